//! Privacy-budget algebra for zCDP, truncated CDP and approximate DP.
//!
//! Everything here is closed-form arithmetic on `f64`; evaluating the same
//! expression twice yields the same bits.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrivacyError {
    #[error("invalid privacy parameter: {0}")]
    InvalidParameter(String),

    #[error("Gaussian mechanism with zero noise and positive sensitivity has unbounded privacy loss")]
    InfiniteBudget,

    #[error("cannot compose budgets of different kinds ({0} and {1}); convert first")]
    MixedKinds(&'static str, &'static str),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

type Result<T> = std::result::Result<T, PrivacyError>;

/// A privacy guarantee. `Tcdp` with `omega = inf` is the same as `Zcdp`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PrivacyBudget {
    Zcdp { rho: f64 },
    Tcdp { rho: f64, omega: f64 },
    ApproxDp { eps: f64, delta: f64 },
}

impl PrivacyBudget {
    pub fn zcdp(rho: f64) -> Result<Self> {
        check_nonneg("rho", rho)?;
        Ok(PrivacyBudget::Zcdp { rho })
    }

    pub fn tcdp(rho: f64, omega: f64) -> Result<Self> {
        check_nonneg("rho", rho)?;
        if !(omega > 1.0) {
            return Err(PrivacyError::InvalidParameter(format!("omega must exceed 1, got {omega}")));
        }
        Ok(PrivacyBudget::Tcdp { rho, omega })
    }

    pub fn approx(eps: f64, delta: f64) -> Result<Self> {
        check_nonneg("eps", eps)?;
        if !(0.0..=1.0).contains(&delta) {
            return Err(PrivacyError::InvalidParameter(format!("delta must lie in [0, 1], got {delta}")));
        }
        Ok(PrivacyBudget::ApproxDp { eps, delta })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PrivacyBudget::Zcdp { .. } => "zcdp",
            PrivacyBudget::Tcdp { .. } => "tcdp",
            PrivacyBudget::ApproxDp { .. } => "approx",
        }
    }

    /// View a zCDP budget as tCDP with infinite truncation.
    pub fn as_tcdp(&self) -> Option<(f64, f64)> {
        match *self {
            PrivacyBudget::Zcdp { rho } => Some((rho, f64::INFINITY)),
            PrivacyBudget::Tcdp { rho, omega } => Some((rho, omega)),
            PrivacyBudget::ApproxDp { .. } => None,
        }
    }

    /// `(eps, delta)` for an approximate-DP budget.
    pub fn eps_delta(&self) -> Option<(f64, f64)> {
        match *self {
            PrivacyBudget::ApproxDp { eps, delta } => Some((eps, delta)),
            _ => None,
        }
    }

    /// `rho` for zCDP and tCDP budgets.
    pub fn rho(&self) -> Option<f64> {
        self.as_tcdp().map(|(rho, _)| rho)
    }
}

impl fmt::Display for PrivacyBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrivacyBudget::Zcdp { rho } => write!(f, "zCDP(rho={rho})"),
            PrivacyBudget::Tcdp { rho, omega } => write!(f, "tCDP(rho={rho}, omega={omega})"),
            PrivacyBudget::ApproxDp { eps, delta } => write!(f, "({eps}, {delta})-DP"),
        }
    }
}

fn check_nonneg(name: &str, x: f64) -> Result<()> {
    if !(x >= 0.0) || x.is_nan() {
        return Err(PrivacyError::InvalidParameter(format!("{name} must be nonnegative, got {x}")));
    }
    Ok(())
}

/// zCDP of the Gaussian mechanism: `rho = sensitivity^2 / (2 sigma^2)`.
pub fn gaussian_zcdp(sensitivity: f64, sigma: f64) -> Result<PrivacyBudget> {
    check_nonneg("sensitivity", sensitivity)?;
    check_nonneg("sigma", sigma)?;
    if sensitivity == 0.0 {
        return Ok(PrivacyBudget::Zcdp { rho: 0.0 });
    }
    if sigma == 0.0 {
        return Err(PrivacyError::InfiniteBudget);
    }
    Ok(PrivacyBudget::Zcdp {
        rho: sensitivity * sensitivity / (2.0 * sigma * sigma),
    })
}

/// Group privacy for zCDP: a group of `s` records costs `s^2 rho`.
pub fn group_zcdp(rho: f64, s: u64) -> Result<f64> {
    check_nonneg("rho", rho)?;
    if s == 0 {
        return Err(PrivacyError::InvalidParameter("group size must be at least 1".into()));
    }
    let s = s as f64;
    Ok(s * s * rho)
}

/// Sequential composition of budgets of one kind.
///
/// zCDP and tCDP add their `rho` and keep the smallest `omega`; approximate
/// DP uses basic composition. An empty list composes to `Zcdp(0)`.
pub fn compose(budgets: &[PrivacyBudget]) -> Result<PrivacyBudget> {
    let Some(first) = budgets.first() else {
        return Ok(PrivacyBudget::Zcdp { rho: 0.0 });
    };
    for b in budgets {
        if b.kind() != first.kind() {
            return Err(PrivacyError::MixedKinds(first.kind(), b.kind()));
        }
    }
    Ok(match first {
        PrivacyBudget::Zcdp { .. } => PrivacyBudget::Zcdp {
            rho: budgets.iter().filter_map(|b| b.rho()).sum(),
        },
        PrivacyBudget::Tcdp { .. } => {
            let mut rho = 0.0;
            let mut omega = f64::INFINITY;
            for (r, w) in budgets.iter().filter_map(|b| b.as_tcdp()) {
                rho += r;
                omega = omega.min(w);
            }
            PrivacyBudget::Tcdp { rho, omega }
        }
        PrivacyBudget::ApproxDp { .. } => {
            let (mut eps, mut delta) = (0.0, 0.0);
            for (e, d) in budgets.iter().filter_map(|b| b.eps_delta()) {
                eps += e;
                delta += d;
            }
            PrivacyBudget::ApproxDp {
                eps,
                delta: delta.min(1.0),
            }
        }
    })
}

/// Which branch of the tCDP conversion produced an [`ApproxDp`](PrivacyBudget::ApproxDp) value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConversionBranch {
    /// `log(1/delta) <= (omega-1)^2 rho`: `eps = rho + 2 sqrt(rho log(1/delta))`
    Concentrated,
    /// otherwise: `eps = rho omega + log(1/delta)/(omega-1)`
    Truncated,
}

/// Converts `(rho, omega)`-tCDP to `(eps, delta)`-DP, also reporting the branch.
pub fn tcdp_to_approx_branch(rho: f64, omega: f64, delta: f64) -> Result<(PrivacyBudget, ConversionBranch)> {
    check_nonneg("rho", rho)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(PrivacyError::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(omega > 1.0) {
        return Err(PrivacyError::InvalidParameter(format!("omega must exceed 1, got {omega}")));
    }
    let log_inv = (1.0 / delta).ln();
    let threshold = (omega - 1.0) * (omega - 1.0) * rho;
    if log_inv <= threshold {
        let eps = rho + 2.0 * (rho * log_inv).sqrt();
        Ok((PrivacyBudget::ApproxDp { eps, delta }, ConversionBranch::Concentrated))
    } else {
        let eps = rho * omega + log_inv / (omega - 1.0);
        Ok((PrivacyBudget::ApproxDp { eps, delta }, ConversionBranch::Truncated))
    }
}

pub fn tcdp_to_approx(rho: f64, omega: f64, delta: f64) -> Result<PrivacyBudget> {
    tcdp_to_approx_branch(rho, omega, delta).map(|(b, _)| b)
}

/// Converts any zCDP/tCDP budget at the given `delta`; approximate-DP budgets
/// pass through unchanged.
pub fn to_approx(budget: PrivacyBudget, delta: f64) -> Result<PrivacyBudget> {
    match budget.as_tcdp() {
        Some((rho, omega)) => tcdp_to_approx(rho, omega, delta),
        None => Ok(budget),
    }
}

/// Amplification by subsampling `m` of `n` records for a `(rho, omega)`-tCDP
/// mechanism: returns `(13 (m/n)^2 rho, 1/(4 rho))`-tCDP.
pub fn tcdp_subsample(rho: f64, omega: f64, m: u64, n: u64) -> Result<PrivacyBudget> {
    check_nonneg("rho", rho)?;
    if !(omega > 1.0) {
        return Err(PrivacyError::InvalidParameter(format!("omega must exceed 1, got {omega}")));
    }
    if m == 0 || m > n {
        return Err(PrivacyError::InvalidParameter(format!(
            "subsample size must satisfy 1 <= m <= n, got m={m}, n={n}"
        )));
    }
    if rho == 0.0 {
        return Ok(PrivacyBudget::Tcdp {
            rho: 0.0,
            omega,
        });
    }
    let lhs = (n as f64 / m as f64).ln();
    let rhs = 3.0 * rho * (2.0 + (1.0 / rho).log2());
    if lhs < rhs {
        return Err(PrivacyError::Precondition(format!(
            "log(n/m) = {lhs} < 3 rho (2 + log2(1/rho)) = {rhs}"
        )));
    }
    let q = m as f64 / n as f64;
    Ok(PrivacyBudget::Tcdp {
        rho: 13.0 * q * q * rho,
        omega: 1.0 / (4.0 * rho),
    })
}

/// Running an `(eps, delta)`-DP mechanism on `m` records drawn with
/// replacement from `n`: `(6 eps m/n, 4 e^{6 eps m/n} (m/n) delta)`.
///
/// For `m >= n` this degrades the guarantee rather than amplifying it.
pub fn amplify_with_replacement(eps: f64, delta: f64, m: u64, n: u64) -> Result<PrivacyBudget> {
    check_nonneg("eps", eps)?;
    if !(0.0..=1.0).contains(&delta) {
        return Err(PrivacyError::InvalidParameter(format!("delta must lie in [0, 1], got {delta}")));
    }
    if m == 0 || n == 0 {
        return Err(PrivacyError::InvalidParameter("m and n must be positive".into()));
    }
    let ratio = m as f64 / n as f64;
    let limit = 1.0f64.min(n as f64 / (2.0 * m as f64));
    if eps > limit {
        return Err(PrivacyError::Precondition(format!(
            "eps = {eps} exceeds min{{1, n/(2m)}} = {limit}"
        )));
    }
    let eps_out = 6.0 * eps * ratio;
    let delta_out = 4.0 * eps_out.exp() * ratio * delta;
    Ok(PrivacyBudget::ApproxDp {
        eps: eps_out,
        delta: delta_out,
    })
}

/// The optimal DP-ERM excess-risk rate `B L sqrt(d log(1/delta)) / (n eps)`.
pub fn alpha_star(eps: f64, delta: f64, radius: f64, lipschitz: f64, d: usize, n: usize) -> f64 {
    radius * lipschitz * (d as f64 * (1.0 / delta).ln()).sqrt() / (n as f64 * eps)
}

/// End-to-end privacy of private minibatch SGD run with `rho = 1/log(1/delta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DpsgdPrivacyReport {
    /// `3 alpha* / alpha`
    pub closed_form: PrivacyBudget,
    /// Result of evaluating the accountant chain step by step.
    pub chained: PrivacyBudget,
    pub per_round: PrivacyBudget,
    pub subsampled: PrivacyBudget,
    pub composed: PrivacyBudget,
    pub branch: ConversionBranch,
    pub batch: u64,
    pub rounds: u64,
}

impl DpsgdPrivacyReport {
    /// `chained eps / closed-form eps`
    pub fn ratio(&self) -> f64 {
        let (a, _) = self.chained.eps_delta().unwrap_or((f64::NAN, 0.0));
        let (b, _) = self.closed_form.eps_delta().unwrap_or((f64::NAN, 0.0));
        a / b
    }
}

/// Privacy of private minibatch SGD on `n` records at accuracy `alpha`.
///
/// Chain: Gaussian mechanism calibrated to `rho`-zCDP per round, subsampling
/// `m` of `n`, composition over `T` rounds, conversion at `delta`. The batch
/// and round counts use the uncapped schedule (`m = ceil sqrt(d/rho)`,
/// `T = ceil B^2 L^2 / alpha^2`).
pub fn dpsgd_privacy(
    alpha: f64,
    delta: f64,
    radius: f64,
    lipschitz: f64,
    d: usize,
    n: usize,
) -> Result<DpsgdPrivacyReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(PrivacyError::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(alpha > 0.0) || !(radius > 0.0) || !(lipschitz > 0.0) || d == 0 || n == 0 {
        return Err(PrivacyError::InvalidParameter(
            "alpha, radius, lipschitz, d and n must be positive".into(),
        ));
    }
    let a_star = alpha_star(1.0, delta, radius, lipschitz, d, n);
    if alpha < 26.0 * a_star * (1.0 - 1e-12) {
        return Err(PrivacyError::Precondition(format!(
            "alpha = {alpha} is below 26 alpha* = {}; increase alpha or n",
            26.0 * a_star
        )));
    }
    let closed_form = PrivacyBudget::ApproxDp {
        eps: 3.0 * a_star / alpha,
        delta,
    };
    let rho = 1.0 / (1.0 / delta).ln();
    let m = crate::ceil_tol((d as f64 / rho).sqrt()).max(1.0) as u64;
    let rounds = crate::ceil_tol(radius * radius * lipschitz * lipschitz / (alpha * alpha)).max(1.0) as u64;
    let sigma = lipschitz * (2.0 / rho).sqrt() / m as f64;
    let per_round = gaussian_zcdp(2.0 * lipschitz / m as f64, sigma)?;
    let (r, w) = per_round.as_tcdp().expect("zcdp");
    let subsampled = tcdp_subsample(r, w, m, n as u64)?;
    let composed = compose(&vec![subsampled; rounds as usize])?;
    let (rho2, omega2) = composed.as_tcdp().expect("tcdp");
    let (chained, branch) = tcdp_to_approx_branch(rho2, omega2, delta)?;
    Ok(DpsgdPrivacyReport {
        closed_form,
        chained,
        per_round,
        subsampled,
        composed,
        branch,
        batch: m,
        rounds,
    })
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn zcdp_compose_order_invariant(a in 0.0f64..2.0, b in 0.0f64..2.0, c in 0.0f64..2.0) {
            let z = |r| PrivacyBudget::Zcdp { rho: r };
            let x = compose(&[z(a), z(b), z(c)]).unwrap().rho().unwrap();
            let y = compose(&[z(c), z(a), z(b)]).unwrap().rho().unwrap();
            let nested = compose(&[compose(&[z(a), z(b)]).unwrap(), z(c)]).unwrap().rho().unwrap();
            prop_assert!((x - y).abs() <= 1e-15 * (1.0 + x));
            prop_assert!((x - nested).abs() <= 1e-15 * (1.0 + x));
        }

        #[test]
        fn group_privacy_multiplies(rho in 0.0f64..1.0, s in 1u64..50, t in 1u64..50) {
            let once = group_zcdp(group_zcdp(rho, s).unwrap(), t).unwrap();
            let direct = group_zcdp(rho, s * t).unwrap();
            prop_assert!((once - direct).abs() <= 1e-15 * direct.max(1e-300));
        }

        #[test]
        fn conversion_monotone(rho in 1e-4f64..1.0, bump in 0.0f64..1.0, omega in 1.5f64..1e4, delta in 1e-9f64..0.5) {
            let base = tcdp_to_approx(rho, omega, delta).unwrap().eps_delta().unwrap().0;
            let more_rho = tcdp_to_approx(rho + bump, omega, delta).unwrap().eps_delta().unwrap().0;
            let less_delta = tcdp_to_approx(rho, omega, delta * 0.5).unwrap().eps_delta().unwrap().0;
            prop_assert!(more_rho >= base - 1e-12);
            prop_assert!(less_delta >= base - 1e-12);
        }

        #[test]
        fn full_sample_degrades(eps in 0.0f64..0.5, delta in 0.0f64..1e-3, n in 1u64..1000) {
            let (e, _) = amplify_with_replacement(eps, delta, n, n).unwrap().eps_delta().unwrap();
            prop_assert_eq!(e, 6.0 * eps);
        }

        #[test]
        fn deterministic_arithmetic(rho in 1e-6f64..1.0, omega in 1.1f64..100.0) {
            let a = tcdp_to_approx(rho, omega, 1e-6).unwrap();
            let b = tcdp_to_approx(rho, omega, 1e-6).unwrap();
            prop_assert_eq!(a.eps_delta().unwrap().0.to_bits(), b.eps_delta().unwrap().0.to_bits());
        }
    }
}
