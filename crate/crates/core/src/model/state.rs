use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{check_same, Field, VectorField};
use crate::grid::Grid;
use crate::spectral;

/// Surface deviation `η`, curl-free velocity `V` and the frozen
/// divergence-free part `W` at time `t`.
#[derive(Debug, Clone)]
pub struct WaveState {
    pub eta: Field,
    pub v: VectorField,
    pub w: VectorField,
    pub t: f64,
}

/// Split `V̄₀` into `W = P V̄₀` and `V₀ = V̄₀ − W`.
pub fn decompose_initial(vbar0: &VectorField) -> (VectorField, VectorField) {
    let w = spectral::leray_project(vbar0);
    let v0 = vbar0.sub(&w).expect("projection keeps the grid");
    (w, v0)
}

/// `‖∂₁V² − ∂₂V¹‖_{L²}`; 0 in 1D.
pub fn curl_residual(v: &VectorField) -> f64 {
    if v.dim() < 2 {
        return 0.0;
    }
    spectral::curl(v).norm_l2()
}

impl WaveState {
    pub fn new(eta: Field, v: VectorField, w: VectorField, t: f64) -> Result<Self> {
        check_same(eta.grid(), v.grid())?;
        check_same(eta.grid(), w.grid())?;
        let n = eta.spec().dim;
        for got in [v.dim(), w.dim()] {
            if got != n {
                return Err(Error::DimensionMismatch { expected: n, got });
            }
        }
        Ok(WaveState { eta, v, w, t })
    }

    /// Build a state at `t = 0` from `η₀` and the full initial velocity `V̄₀`.
    pub fn from_initial(eta0: Field, vbar0: &VectorField) -> Result<Self> {
        let (w, v0) = decompose_initial(vbar0);
        Self::new(eta0, v0, w, 0.0)
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        WaveState {
            eta: Field::zeros(grid),
            v: VectorField::zeros(grid),
            w: VectorField::zeros(grid),
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.eta.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.eta.is_finite() && self.v.is_finite()
    }

    pub fn curl_residual(&self) -> f64 {
        curl_residual(&self.v)
    }
}
