//! One-qubit quantum channels as affine maps of the Bloch ball, and
//! the three-step Holevo capacity approximation: sample pure states,
//! map them through the channel, take the divergence radius of the
//! smallest enclosing ball of the image.

use crate::bloch::{self, BlochVector, SampleScheme};
use crate::qdm::{DensityMatrix, Tolerances};
use crate::voronoi::{self, SebConfig, VoronoiError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("channel maps input {input:?} outside the Bloch ball: |image| = {norm}")]
    ImageOutsideBall { input: [f64; 3], norm: f64 },
    #[error("capacity estimation needs at least 2 samples, got {n}")]
    TooFewSamples { n: usize },
    #[error(transparent)]
    Voronoi(#[from] VoronoiError),
}

/// Affine Bloch-ball map v -> M v + b.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QubitChannel {
    /// Linear part, row-major.
    pub m: [f64; 9],
    pub b: [f64; 3],
}

impl QubitChannel {
    pub fn identity() -> Self {
        QubitChannel {
            m: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            b: [0.0; 3],
        }
    }

    /// Depolarizing channel: shrink by p toward the maximally mixed
    /// state (p = 0 is fully depolarizing, p = 1 the identity).
    pub fn depolarizing(p: f64) -> Self {
        QubitChannel {
            m: [p, 0.0, 0.0, 0.0, p, 0.0, 0.0, 0.0, p],
            b: [0.0; 3],
        }
    }
}

/// Image of a Bloch vector under the channel; errors when the image
/// leaves the ball (the map is not a channel on this input).
pub fn apply_channel(ch: &QubitChannel, v: &BlochVector) -> Result<BlochVector, ChannelError> {
    let m = &ch.m;
    let out = BlochVector::new(
        m[0] * v.x + m[1] * v.y + m[2] * v.z + ch.b[0],
        m[3] * v.x + m[4] * v.y + m[5] * v.z + ch.b[1],
        m[6] * v.x + m[7] * v.y + m[8] * v.z + ch.b[2],
    );
    let norm = out.norm();
    if norm * norm > 1.0 + Tolerances::default().psd {
        return Err(ChannelError::ImageOutsideBall {
            input: v.to_array(),
            norm,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CapacityEstimate {
    /// Holevo capacity estimate in nats.
    pub nats: f64,
    /// Presentation-layer conversion: nats / ln 2.
    pub bits: f64,
    pub samples: usize,
    /// Solver convergence gap (nats).
    pub gap: f64,
    pub converged: bool,
    /// Bloch coordinates of the enclosing-ball center.
    pub center: [f64; 3],
}

/// The sampling/SEB procedure: plot near-uniform pure states, map them
/// through the channel, and return the divergence radius of the
/// smallest enclosing ball of the image.
pub fn holevo_capacity_estimate(
    ch: &QubitChannel,
    n: usize,
    scheme: SampleScheme,
    seed: u64,
    seb: &SebConfig,
) -> Result<CapacityEstimate, ChannelError> {
    if n < 2 {
        return Err(ChannelError::TooFewSamples { n });
    }
    let tol = Tolerances::default();
    let samples = bloch::sample_sphere(n, scheme, seed);
    let mut images: Vec<DensityMatrix> = Vec::with_capacity(n);
    for v in &samples {
        let w = apply_channel(ch, v)?;
        // Guard tiny overshoots from rounding at the surface.
        let w = if w.norm() > 1.0 { w.scale(1.0 / w.norm()) } else { w };
        images.push(bloch::bloch_to_density(&w, &tol).expect("image inside ball"));
    }
    let res = voronoi::smallest_enclosing_ball(&images, seb)?;
    Ok(CapacityEstimate {
        nats: res.radius,
        bits: res.radius / 2.0_f64.ln(),
        samples: n,
        gap: res.gap,
        converged: res.converged,
        center: res.center_bloch.to_array(),
    })
}
