//! Proxy replies: what an optimizer receives in place of raw gradients.

use rand::Rng;

use crate::error::{Error, Result};
use crate::instances::FirstOrderReply;
use crate::linalg::{gaussian_vector, DenseVector};

use super::quantize::{payload_bits, quantize, QuantizedPayload};

/// How a proxy oracle turns a batch of true replies into a message.
#[derive(Clone, Debug, PartialEq)]
pub enum ResponseRule {
    /// Return the raw batch (non-private baseline).
    Identity,
    /// Batch-mean gradient plus `N(0, sigma^2 I)`.
    Gaussian { sigma: f64 },
    /// Batch-mean gradient stochastically quantized with `bits` level bits;
    /// `capacity` is the declared message budget in bits.
    Quantized { bits: u32, capacity: u64 },
}

impl ResponseRule {
    pub fn name(&self) -> &'static str {
        match self {
            ResponseRule::Identity => "identity",
            ResponseRule::Gaussian { .. } => "gaussian",
            ResponseRule::Quantized { .. } => "quantized",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProxyReply {
    Raw(Vec<FirstOrderReply>),
    Estimate(DenseVector),
    Quantized(QuantizedPayload),
}

impl ProxyReply {
    /// Message length in bits (`f64` entries count 64 bits each).
    pub fn bit_length(&self) -> u64 {
        match self {
            ProxyReply::Raw(batch) => batch
                .iter()
                .map(|r| 64 * (r.gradient.len() as u64 + 1))
                .sum(),
            ProxyReply::Estimate(v) => 64 * v.len() as u64,
            ProxyReply::Quantized(p) => p.bit_length(),
        }
    }

    /// The gradient estimate carried by the reply (batch mean for raw batches).
    pub fn estimate(&self) -> Result<DenseVector> {
        match self {
            ProxyReply::Raw(batch) => mean_gradient(batch),
            ProxyReply::Estimate(v) => Ok(v.clone()),
            ProxyReply::Quantized(p) => Ok(p.decode()),
        }
    }
}

pub fn mean_gradient(batch: &[FirstOrderReply]) -> Result<DenseVector> {
    let first = batch.first().ok_or(Error::EmptyBatch)?;
    let mut mean = DenseVector::zeros(first.gradient.len());
    let w = 1.0 / batch.len() as f64;
    for r in batch {
        mean.axpy(w, &r.gradient);
    }
    Ok(mean)
}

pub fn proxy_identity(batch: Vec<FirstOrderReply>) -> ProxyReply {
    ProxyReply::Raw(batch)
}

pub fn proxy_gaussian<R: Rng + ?Sized>(batch: &[FirstOrderReply], sigma: f64, rng: &mut R) -> Result<ProxyReply> {
    let mut mean = mean_gradient(batch)?;
    let noise = gaussian_vector(mean.len(), sigma, rng)?;
    mean.axpy(1.0, &noise);
    Ok(ProxyReply::Estimate(mean))
}

pub fn proxy_quantized<R: Rng + ?Sized>(
    batch: &[FirstOrderReply],
    bits: u32,
    capacity: u64,
    rng: &mut R,
) -> Result<ProxyReply> {
    let mean = mean_gradient(batch)?;
    let required = payload_bits(mean.len(), bits);
    if capacity < required {
        return Err(Error::CapacityExceeded {
            declared: capacity,
            required,
        });
    }
    Ok(ProxyReply::Quantized(quantize(&mean, bits, rng)?))
}
