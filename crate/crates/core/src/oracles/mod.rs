//! True first-order oracle access through proxy oracles, with a call ledger.
//!
//! An optimizer sends a batch of non-adaptive queries per round; the proxy
//! evaluates the true oracle on every query, records what happened, and
//! returns a message built by its [`ResponseRule`].

mod proxy;
pub mod quantize;
mod trace;

use std::collections::HashSet;

use rand::Rng;

pub use proxy::{mean_gradient, proxy_gaussian, proxy_identity, proxy_quantized, ProxyReply, ResponseRule};
pub use quantize::{payload_bits, quantize, QuantizedPayload};
pub use trace::{count_pieces, read_trace, write_trace, TraceRecord};

pub(crate) use trace::csv_err;

use crate::error::{Error, Result};
use crate::instances::{FirstOrderReply, Objective, Piece};
use crate::linalg::DenseVector;

/// A point and a loss index (zero-based).
#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    pub point: DenseVector,
    pub index: usize,
}

/// Evaluates loss `query.index` at `query.point`.
pub fn true_oracle(objective: &dyn Objective, query: &Query) -> Result<FirstOrderReply> {
    objective.evaluate(query.index, &query.point)
}

/// Per-round hit cap `sqrt(3 c d / rho)` for the capped counts.
pub fn capped_count_limit(offset: f64, d: usize, rho: f64) -> f64 {
    (3.0 * offset * d as f64 / rho).sqrt()
}

/// Call-count ledger of one oracle handle.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OracleStats {
    /// Total true-oracle evaluations `||M||_1`.
    pub calls_total: u64,
    /// Batch size of every round.
    pub batch_sizes: Vec<u64>,
    /// Distinct query points (bit-exact equality).
    pub unique_points: u64,
    /// `cnt_k` summed over rounds, one entry per problem vector.
    pub problem_hits: Vec<u64>,
    pub regularizer_hits: u64,
    pub generic_hits: u64,
    /// Per-round cap applied to `cnt_k`, if configured.
    pub cap: Option<f64>,
    /// `sum over rounds of min(cnt_k, cap)`, one entry per problem vector.
    pub capped_hits: Vec<f64>,
    /// Total message length over all rounds.
    pub payload_bits: u64,
    /// zCDP `rho` achieved by each Gaussian round (sensitivity `2L/m`).
    pub round_zcdp: Vec<f64>,
}

impl OracleStats {
    pub fn rounds(&self) -> u64 {
        self.batch_sizes.len() as u64
    }

    /// `sum_k cnt_k + regularizer + generic`; equals `calls_total`.
    pub fn tagged_total(&self) -> u64 {
        self.problem_hits.iter().sum::<u64>() + self.regularizer_hits + self.generic_hits
    }

    pub fn total_zcdp(&self) -> f64 {
        self.round_zcdp.iter().sum()
    }
}

/// A proxy oracle bound to one objective; owns its ledger and optional trace.
pub struct ProxyOracle<'a> {
    objective: &'a dyn Objective,
    stats: OracleStats,
    seen: HashSet<Vec<u64>>,
    trace: Option<Vec<TraceRecord>>,
}

impl<'a> ProxyOracle<'a> {
    pub fn new(objective: &'a dyn Objective) -> Self {
        let stats = OracleStats {
            problem_hits: vec![0; objective.piece_count()],
            capped_hits: vec![0.0; objective.piece_count()],
            ..Default::default()
        };
        Self {
            objective,
            stats,
            seen: HashSet::new(),
            trace: None,
        }
    }

    /// Record a per-round trace.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    /// Apply the per-round cap to `cnt_k` when summing capped counts.
    pub fn with_cap(mut self, cap: f64) -> Self {
        self.stats.cap = Some(cap);
        self
    }

    pub fn objective(&self) -> &'a dyn Objective {
        self.objective
    }

    pub fn stats(&self) -> OracleStats {
        self.stats.clone()
    }

    pub fn trace(&self) -> Option<&[TraceRecord]> {
        self.trace.as_deref()
    }

    /// One round with arbitrary query points.
    pub fn round<R: Rng + ?Sized>(&mut self, queries: &[Query], rule: &ResponseRule, rng: &mut R) -> Result<ProxyReply> {
        let pairs: Vec<(&DenseVector, usize)> = queries.iter().map(|q| (&q.point, q.index)).collect();
        self.run_round(&pairs, rule, rng)
    }

    /// One round where every query uses the same point.
    pub fn round_at<R: Rng + ?Sized>(
        &mut self,
        point: &DenseVector,
        indices: &[usize],
        rule: &ResponseRule,
        rng: &mut R,
    ) -> Result<ProxyReply> {
        let pairs: Vec<(&DenseVector, usize)> = indices.iter().map(|&i| (point, i)).collect();
        self.run_round(&pairs, rule, rng)
    }

    fn run_round<R: Rng + ?Sized>(
        &mut self,
        queries: &[(&DenseVector, usize)],
        rule: &ResponseRule,
        rng: &mut R,
    ) -> Result<ProxyReply> {
        if queries.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let replies = self.evaluate_batch(queries)?;
        let m = replies.len();
        let reply = match rule {
            ResponseRule::Identity => proxy_identity(replies.clone()),
            ResponseRule::Gaussian { sigma } => proxy_gaussian(&replies, *sigma, rng)?,
            ResponseRule::Quantized { bits, capacity } => proxy_quantized(&replies, *bits, *capacity, rng)?,
        };
        if let ResponseRule::Gaussian { sigma } = rule {
            let sensitivity = 2.0 * self.objective.lipschitz() / m as f64;
            let rho = if sensitivity == 0.0 {
                0.0
            } else if *sigma == 0.0 {
                f64::INFINITY
            } else {
                sensitivity * sensitivity / (2.0 * sigma * sigma)
            };
            self.stats.round_zcdp.push(rho);
        }
        self.record(queries, &replies, reply.bit_length());
        Ok(reply)
    }

    fn evaluate_batch(&self, queries: &[(&DenseVector, usize)]) -> Result<Vec<FirstOrderReply>> {
        let memo = self.objective.identical_losses();
        let mut out: Vec<FirstOrderReply> = Vec::with_capacity(queries.len());
        for (j, &(w, i)) in queries.iter().enumerate() {
            if memo {
                if let Some(prev) = queries[..j].iter().position(|(p, _)| std::ptr::eq(*p, w) || *p == w) {
                    let r = out[prev].clone();
                    // still validate the index
                    if i >= self.objective.num_losses() {
                        self.objective.evaluate(i, w)?;
                    }
                    out.push(r);
                    continue;
                }
            }
            out.push(self.objective.evaluate(i, w)?);
        }
        Ok(out)
    }

    fn record(&mut self, queries: &[(&DenseVector, usize)], replies: &[FirstOrderReply], bits: u64) {
        let m = queries.len() as u64;
        let s = &mut self.stats;
        s.calls_total += m;
        s.batch_sizes.push(m);
        s.payload_bits += bits;
        for (w, _) in queries {
            if self.seen.insert(w.bit_key()) {
                s.unique_points += 1;
            }
        }
        let mut round_cnt = vec![0u64; s.problem_hits.len()];
        for r in replies {
            match r.piece {
                Piece::Problem(k) => {
                    if k >= round_cnt.len() {
                        round_cnt.resize(k + 1, 0);
                        s.problem_hits.resize(k + 1, 0);
                        s.capped_hits.resize(k + 1, 0.0);
                    }
                    round_cnt[k] += 1;
                }
                Piece::Regularizer => s.regularizer_hits += 1,
                Piece::Generic => s.generic_hits += 1,
            }
        }
        for (k, &c) in round_cnt.iter().enumerate() {
            s.problem_hits[k] += c;
            s.capped_hits[k] += match s.cap {
                Some(cap) => (c as f64).min(cap),
                None => c as f64,
            };
        }
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceRecord {
                round: s.batch_sizes.len() as u64 - 1,
                batch_size: m,
                pieces: replies.iter().map(|r| r.piece).collect(),
                payload_bits: bits,
            });
        }
    }
}
