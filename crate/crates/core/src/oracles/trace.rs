//! Per-round trace of a proxy oracle, written as CSV.
//!
//! Columns: `round,batch_size,pieces,payload_bits`. The `pieces` field lists
//! the active piece of every query in the round, separated by `;`: problem
//! vectors as 1-based indices, `h` for the regularizer, `-` for losses
//! without piece structure.

use std::io::Write;

use crate::error::{Error, Result};
use crate::instances::Piece;

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub round: u64,
    pub batch_size: u64,
    pub pieces: Vec<Piece>,
    pub payload_bits: u64,
}

fn piece_label(p: &Piece) -> String {
    match p {
        Piece::Problem(k) => (k + 1).to_string(),
        Piece::Regularizer => "h".into(),
        Piece::Generic => "-".into(),
    }
}

fn parse_piece(s: &str) -> Result<Piece> {
    match s {
        "h" => Ok(Piece::Regularizer),
        "-" => Ok(Piece::Generic),
        k => match k.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(Piece::Problem(k - 1)),
            _ => Err(Error::Format(format!("bad piece tag {k:?}"))),
        },
    }
}

pub fn write_trace<W: Write>(records: &[TraceRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["round", "batch_size", "pieces", "payload_bits"])
        .map_err(csv_err)?;
    for r in records {
        let pieces: Vec<String> = r.pieces.iter().map(piece_label).collect();
        w.write_record([
            r.round.to_string(),
            r.batch_size.to_string(),
            pieces.join(";"),
            r.payload_bits.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace<R: std::io::Read>(inp: R) -> Result<Vec<TraceRecord>> {
    let mut rdr = csv::Reader::from_reader(inp);
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_err)?;
        if row.len() != 4 {
            return Err(Error::Format(format!("trace row has {} fields", row.len())));
        }
        let num = |i: usize| {
            row[i]
                .parse::<u64>()
                .map_err(|e| Error::Format(format!("field {i}: {e}")))
        };
        let pieces = if row[2].is_empty() {
            Vec::new()
        } else {
            row[2].split(';').map(parse_piece).collect::<Result<Vec<_>>>()?
        };
        out.push(TraceRecord {
            round: num(0)?,
            batch_size: num(1)?,
            pieces,
            payload_bits: num(3)?,
        });
    }
    Ok(out)
}

/// Per-piece hit counts summed over a trace: `(cnt_k for each k, regularizer, generic)`.
pub fn count_pieces(records: &[TraceRecord], k: usize) -> (Vec<u64>, u64, u64) {
    let mut cnt = vec![0u64; k];
    let (mut reg, mut gen) = (0, 0);
    for r in records {
        for p in &r.pieces {
            match p {
                Piece::Problem(j) => {
                    if *j >= cnt.len() {
                        cnt.resize(j + 1, 0);
                    }
                    cnt[*j] += 1;
                }
                Piece::Regularizer => reg += 1,
                Piece::Generic => gen += 1,
            }
        }
    }
    (cnt, reg, gen)
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format(format!("{other:?}")),
    }
}
