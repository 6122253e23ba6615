use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, VectorField};
use crate::grid::Grid;
use crate::model::WaveState;
use crate::spectral;

/// Scalar initial profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Profile {
    Zero,
    /// `A·exp(−|x−x₀|²/σ²)` summed over the nearest periodic images.
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<[f64; 2]>,
    },
    /// Seeded noise filtered to `|ξ| <= k_max`, scaled to `max|u| = amplitude`.
    RandomBandLimited {
        amplitude: f64,
        k_max: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// `A·cos(ξ_k·x + phase)` for the integer mode `k`.
    SingleMode {
        amplitude: f64,
        mode: [i64; 2],
        #[serde(default)]
        phase: f64,
    },
}

/// Initial full velocity `V̄₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VelocityProfile {
    #[default]
    Zero,
    /// Independent band-limited noise in each component.
    RandomBandLimited {
        amplitude: f64,
        k_max: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// `∇φ` for a scalar profile `φ`.
    Potential { profile: Profile },
    /// `(−∂₂ψ, ∂₁ψ)` for a scalar profile `ψ`; 2D only.
    Rotational { profile: Profile },
    /// Constant vector.
    Uniform { value: Vec<f64> },
}

/// Initial data as read from a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialSpec {
    pub eta: Profile,
    #[serde(default)]
    pub velocity: VelocityProfile,
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec {
            eta: Profile::Gaussian {
                amplitude: 1.0,
                width: 2.0,
                center: None,
            },
            velocity: VelocityProfile::Zero,
        }
    }
}

impl Profile {
    pub fn sample(&self, grid: &Arc<Grid>, seed: u64) -> Result<Field> {
        let spec = *grid.spec();
        let l = spec.length;
        Ok(match self {
            Profile::Zero => Field::zeros(grid),
            Profile::Gaussian {
                amplitude,
                width,
                center,
            } => {
                if !(*width > 0.0) {
                    return Err(Error::ConfigInvalid(format!("gaussian width {width} must be positive")));
                }
                let c = center.unwrap_or([l / 2.0, l / 2.0]);
                let images: &[f64] = &[-1.0, 0.0, 1.0];
                let s2 = width * width;
                Field::from_fn(grid, |x| {
                    let mut acc = 0.0;
                    for &p in images {
                        let dx = x[0] - c[0] - p * l;
                        if spec.dim == 1 {
                            acc += (-dx * dx / s2).exp();
                        } else {
                            for &q in images {
                                let dy = x[1] - c[1] - q * l;
                                acc += (-(dx * dx + dy * dy) / s2).exp();
                            }
                        }
                    }
                    amplitude * acc
                })
            }
            Profile::RandomBandLimited {
                amplitude,
                k_max,
                seed: own,
            } => Field::random_band_limited(grid, *k_max, *amplitude, own.unwrap_or(seed)),
            Profile::SingleMode { amplitude, mode, phase } => {
                let k0 = spec.base_wavenumber();
                let kx = mode[0] as f64 * k0;
                let ky = if spec.dim == 2 { mode[1] as f64 * k0 } else { 0.0 };
                Field::from_fn(grid, |x| amplitude * (kx * x[0] + ky * x[1] + phase).cos())
            }
        })
    }
}

impl VelocityProfile {
    pub fn sample(&self, grid: &Arc<Grid>, seed: u64) -> Result<VectorField> {
        let n = grid.dim();
        Ok(match self {
            VelocityProfile::Zero => VectorField::zeros(grid),
            VelocityProfile::RandomBandLimited {
                amplitude,
                k_max,
                seed: own,
            } => VectorField::random_band_limited(grid, *k_max, *amplitude, own.unwrap_or(seed)),
            VelocityProfile::Potential { profile } => spectral::gradient(&profile.sample(grid, seed)?),
            VelocityProfile::Rotational { profile } => {
                if n != 2 {
                    return Err(Error::ConfigInvalid("rotational velocity needs a 2D grid".into()));
                }
                let g = spectral::gradient(&profile.sample(grid, seed)?);
                let mut first = g.components()[1].clone();
                first.scale(-1.0);
                VectorField::new(vec![first, g.components()[0].clone()])?
            }
            VelocityProfile::Uniform { value } => {
                if value.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: value.len(),
                    });
                }
                let comps = value.iter().map(|&c| Field::from_fn(grid, |_| c)).collect();
                VectorField::new(comps)?
            }
        })
    }
}

impl InitialSpec {
    /// Sample `(η₀, V̄₀)` and split the velocity into `(W, V₀)`.
    pub fn build(&self, grid: &Arc<Grid>, seed: u64) -> Result<WaveState> {
        let eta = self.eta.sample(grid, seed)?;
        let vbar = self.velocity.sample(grid, seed.wrapping_add(0x9e37_79b9))?;
        WaveState::from_initial(eta, &vbar)
    }
}
