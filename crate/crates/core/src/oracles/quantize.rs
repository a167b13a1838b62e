//! Unbiased stochastic quantization with a certified bit length.
//!
//! Layout: a 32-bit `f32` scale header `s >= ||g||_inf`, then per coordinate
//! one sign bit and `b` level bits. Coordinate `j` decodes to
//! `sign * level / (2^b - 1) * s`; the level is rounded up or down at random
//! so that the decoded value is unbiased.

use bitvec::prelude::*;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::DenseVector;

/// Bits spent on the scale header.
pub const HEADER_BITS: u64 = 32;

/// Largest supported number of level bits per coordinate.
pub const MAX_LEVEL_BITS: u32 = 30;

/// Exact payload length for dimension `d` and `b` level bits.
pub fn payload_bits(d: usize, bits: u32) -> u64 {
    HEADER_BITS + d as u64 * (bits as u64 + 1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantizedPayload {
    dim: usize,
    level_bits: u32,
    bits: BitVec<u8, Lsb0>,
}

impl QuantizedPayload {
    pub fn bit_length(&self) -> u64 {
        self.bits.len() as u64
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level_bits(&self) -> u32 {
        self.level_bits
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.bits.as_raw_slice()
    }

    fn scale(&self) -> f32 {
        f32::from_bits(self.bits[..HEADER_BITS as usize].load_le::<u32>())
    }

    pub fn decode(&self) -> DenseVector {
        let s = self.scale() as f64;
        let top = ((1u64 << self.level_bits) - 1) as f64;
        let width = self.level_bits as usize + 1;
        let body = &self.bits[HEADER_BITS as usize..];
        let v = (0..self.dim)
            .map(|j| {
                let chunk = &body[j * width..(j + 1) * width];
                let negative = chunk[0];
                let level = chunk[1..].load_le::<u32>() as f64;
                let mag = level / top * s;
                if negative {
                    -mag
                } else {
                    mag
                }
            })
            .collect::<Vec<_>>();
        DenseVector::from(v)
    }
}

/// Smallest `f32` that is at least `x`.
fn f32_at_least(x: f64) -> f32 {
    let s = x as f32;
    if (s as f64) < x {
        s.next_up()
    } else {
        s
    }
}

/// Quantizes `g` with `bits` level bits per coordinate.
pub fn quantize<R: Rng + ?Sized>(g: &DenseVector, bits: u32, rng: &mut R) -> Result<QuantizedPayload> {
    if bits == 0 || bits > MAX_LEVEL_BITS {
        return Err(Error::InvalidParameter(format!(
            "level bits must lie in 1..={MAX_LEVEL_BITS}, got {bits}"
        )));
    }
    let d = g.len();
    let scale = f32_at_least(g.norm_inf());
    if !scale.is_finite() {
        return Err(Error::InvalidParameter("gradient too large for an f32 scale header".into()));
    }
    let s = scale as f64;
    let top = (1u64 << bits) - 1;
    let mut out: BitVec<u8, Lsb0> = BitVec::with_capacity(payload_bits(d, bits) as usize);
    out.resize(HEADER_BITS as usize, false);
    out[..HEADER_BITS as usize].store_le::<u32>(scale.to_bits());
    let width = bits as usize + 1;
    for &x in g.iter() {
        let level = if s > 0.0 {
            let pos = (x.abs() / s * top as f64).min(top as f64);
            let lower = pos.floor();
            let up = rng.random::<f64>() < pos - lower;
            (lower as u64 + up as u64).min(top)
        } else {
            0
        };
        let start = out.len();
        out.resize(start + width, false);
        out.set(start, x < 0.0);
        out[start + 1..start + width].store_le::<u32>(level as u32);
    }
    Ok(QuantizedPayload {
        dim: d,
        level_bits: bits,
        bits: out,
    })
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::rng::SplittableRng;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn length_is_exact(g in proptest::collection::vec(-1e3f64..1e3, 1..40), bits in 1u32..8, seed in 0u64..100) {
            let mut rng = SplittableRng::new(seed, 0);
            let g = DenseVector::from(g);
            let p = quantize(&g, bits, &mut rng).unwrap();
            prop_assert_eq!(p.bit_length(), payload_bits(g.len(), bits));
            let dec = p.decode();
            let s = f32_at_least(g.norm_inf()) as f64;
            for j in 0..g.len() {
                prop_assert!(dec[j].abs() <= s);
                prop_assert!(dec[j] == 0.0 || dec[j].signum() == g[j].signum());
            }
        }
    }
}
