//! Dyadic partition of unity, the blocks `Δ_j` and `S_j`, nonhomogeneous
//! Besov norms `B^s_{2,r}`, and the randomized commutator/product audits.
//!
//! The low-frequency profile `χ` is a radial mollified step equal to 1 on
//! `|ξ| <= 3/4` and 0 on `|ξ| >= 4/3`; the annular profile is
//! `φ(ξ) = χ(ξ/2) − χ(ξ)`, supported in `3/4 <= |ξ| <= 8/3`. With this choice
//! `χ + Σ_{j>=0} φ(2^{-j}·)` telescopes to exactly 1.

use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::{check_same, Field, Spectrum, VectorField};
use crate::grid::Grid;
use crate::spectral;

pub const CHI_INNER: f64 = 3.0 / 4.0;
pub const CHI_OUTER: f64 = 4.0 / 3.0;
pub const PHI_OUTER: f64 = 8.0 / 3.0;

fn bump(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// C^∞ step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = bump(t);
        a / (a + bump(1.0 - t))
    }
}

/// Radial low-frequency profile `χ(|ξ|)`.
pub fn chi(r: f64) -> f64 {
    1.0 - smooth_step((r - CHI_INNER) / (CHI_OUTER - CHI_INNER))
}

/// Radial annular profile `φ(|ξ|) = χ(|ξ|/2) − χ(|ξ|)`.
pub fn phi(r: f64) -> f64 {
    chi(r / 2.0) - chi(r)
}

/// The symbol of `Δ_j` at radius `r`, for any integer `j`.
pub fn block_profile(j: i32, r: f64) -> f64 {
    match j {
        j if j <= -2 => 0.0,
        -1 => chi(r),
        j => phi(r * 2f64.powi(-j)),
    }
}

/// Summability index `r ∈ [1, ∞]` of an `ℓ^r` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summability(f64);

impl Summability {
    pub const ONE: Summability = Summability(1.0);
    pub const TWO: Summability = Summability(2.0);
    pub const INF: Summability = Summability(f64::INFINITY);

    pub fn new(r: f64) -> Result<Self> {
        if r.is_nan() || r < 1.0 {
            return Err(Error::InvalidSummability(r));
        }
        Ok(Summability(r))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// `‖(x_j)‖_{ℓ^r}` of a finite nonnegative sequence.
    pub fn norm(self, seq: &[f64]) -> f64 {
        let r = self.0;
        if r.is_infinite() {
            seq.iter().fold(0.0, |m, x| m.max(x.abs()))
        } else if r == 1.0 {
            seq.iter().map(|x| x.abs()).sum()
        } else if r == 2.0 {
            seq.iter().map(|x| x * x).sum::<f64>().sqrt()
        } else {
            let peak = seq.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
            if peak == 0.0 {
                return 0.0;
            }
            peak * seq.iter().map(|x| (x.abs() / peak).powf(r)).sum::<f64>().powf(1.0 / r)
        }
    }
}

impl Serialize for Summability {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Summability {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let r = match Raw::deserialize(d)? {
            Raw::Num(v) => v,
            Raw::Text(t) => match t.to_ascii_lowercase().as_str() {
                "inf" | "infinity" => f64::INFINITY,
                other => other.parse().map_err(serde::de::Error::custom)?,
            },
        };
        Summability::new(r).map_err(serde::de::Error::custom)
    }
}

/// `(χ, φ)` tabulated on the modes of one grid.
#[derive(Debug, Clone)]
pub struct DyadicPartition {
    grid: Arc<Grid>,
    j_max: i32,
    /// `symbols[j + 1][mode]` for `j ∈ [-1, j_max]`.
    symbols: Vec<Vec<f64>>,
}

impl DyadicPartition {
    pub const J_MIN: i32 = -1;

    pub fn build(grid: &Arc<Grid>) -> Result<Self> {
        let max_abs = grid.max_abs();
        // largest j with 2^j * 3/4 strictly below the largest resolved |ξ|
        let mut j_max = -1;
        while 2f64.powi(j_max + 1) * CHI_INNER < max_abs {
            j_max += 1;
        }
        if j_max < 1 {
            return Err(Error::Partition(format!(
                "grid resolves |ξ| <= {max_abs:.3}; blocks j = -1, 0, 1 need more than {}",
                2.0 * CHI_INNER
            )));
        }
        let radii: Vec<f64> = grid.abs_sq().iter().map(|s| s.sqrt()).collect();
        let symbols = (Self::J_MIN..=j_max)
            .map(|j| radii.iter().map(|&r| block_profile(j, r)).collect())
            .collect();
        Ok(DyadicPartition {
            grid: grid.clone(),
            j_max,
            symbols,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn block_indices(&self) -> std::ops::RangeInclusive<i32> {
        Self::J_MIN..=self.j_max
    }

    pub fn block_count(&self) -> usize {
        self.symbols.len()
    }

    /// Tabulated symbol of `Δ_j`, `j ∈ [-1, j_max]`.
    pub fn symbol(&self, j: i32) -> Result<&[f64]> {
        if j < Self::J_MIN || j > self.j_max {
            return Err(Error::BlockOutOfRange {
                j,
                lo: Self::J_MIN,
                hi: self.j_max,
            });
        }
        Ok(&self.symbols[(j + 1) as usize])
    }

    fn check(&self, u: &Field) -> Result<()> {
        check_same(&self.grid, u.grid())
    }

    /// `Δ_j u` for `j ∈ [-2, j_max]`; `j = -2` gives the zero field.
    pub fn dyadic_block(&self, u: &Field, j: i32) -> Result<Field> {
        self.check(u)?;
        if j == -2 {
            return Ok(Field::zeros(u.grid()));
        }
        let sym = self.symbol(j)?;
        Ok(u.spectrum().scaled_re(|k| sym[k]).to_field())
    }

    pub fn dyadic_block_spectrum(&self, u: &Spectrum, j: i32) -> Result<Spectrum> {
        if j == -2 {
            return Ok(Spectrum::zeros(u.grid()));
        }
        let sym = self.symbol(j)?;
        Ok(u.scaled_re(|k| sym[k]))
    }

    pub fn dyadic_block_vec(&self, v: &VectorField, j: i32) -> Result<VectorField> {
        let comps = v
            .components()
            .iter()
            .map(|c| self.dyadic_block(c, j))
            .collect::<Result<_>>()?;
        VectorField::new(comps)
    }

    /// Symbol of `S_j = Σ_{k <= j-1} Δ_k`, `j ∈ [-1, j_max + 1]`.
    pub fn low_pass_symbol(&self, j: i32) -> Result<Vec<f64>> {
        if j < Self::J_MIN || j > self.j_max + 1 {
            return Err(Error::BlockOutOfRange {
                j,
                lo: Self::J_MIN,
                hi: self.j_max + 1,
            });
        }
        let mut acc = vec![0.0; self.grid.modes()];
        for k in Self::J_MIN..j {
            for (a, s) in acc.iter_mut().zip(self.symbol(k)?) {
                *a += s;
            }
        }
        Ok(acc)
    }

    pub fn low_pass(&self, u: &Field, j: i32) -> Result<Field> {
        self.check(u)?;
        let sym = self.low_pass_symbol(j)?;
        Ok(u.spectrum().scaled_re(|k| sym[k]).to_field())
    }

    /// `‖Δ_j u‖²_{L²}` for every block, given a per-mode energy density.
    pub fn block_energies_of_density(&self, density: &[f64]) -> Vec<f64> {
        self.symbols
            .iter()
            .map(|sym| sym.iter().zip(density).map(|(m, e)| m * m * e).sum())
            .collect()
    }

    /// `‖Δ_j u‖_{L²}` for `j = -1 ..= j_max`.
    pub fn block_norms(&self, u: &Field) -> Result<Vec<f64>> {
        self.check(u)?;
        let density = u.spectrum().energy_density();
        Ok(self
            .block_energies_of_density(&density)
            .into_iter()
            .map(f64::sqrt)
            .collect())
    }

    /// Block norms of a vector field (root sum of component squares).
    pub fn block_norms_vec(&self, v: &VectorField) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; self.block_count()];
        for c in v.components() {
            for (a, n) in acc.iter_mut().zip(self.block_norms(c)?) {
                *a += n * n;
            }
        }
        Ok(acc.into_iter().map(f64::sqrt).collect())
    }

    /// `‖(2^{js} x_j)_j‖_{ℓ^r}` for a per-block sequence starting at `j = -1`.
    pub fn weighted_lr(&self, per_block: &[f64], s: f64, r: Summability) -> f64 {
        let seq: Vec<f64> = per_block
            .iter()
            .enumerate()
            .map(|(i, x)| 2f64.powf(s * (i as f64 - 1.0)) * x)
            .collect();
        r.norm(&seq)
    }

    pub fn besov_norm(&self, u: &Field, s: f64, r: Summability) -> Result<f64> {
        Ok(self.weighted_lr(&self.block_norms(u)?, s, r))
    }

    pub fn besov_norm_vec(&self, v: &VectorField, s: f64, r: Summability) -> Result<f64> {
        Ok(self.weighted_lr(&self.block_norms_vec(v)?, s, r))
    }

    /// Besov norm of the field whose spectrum is `û · sqrt(weight)`.
    pub fn besov_norm_weighted(&self, u: &Spectrum, weight: impl Fn(usize) -> f64, s: f64, r: Summability) -> f64 {
        let density: Vec<f64> = u
            .energy_density()
            .iter()
            .enumerate()
            .map(|(k, e)| e * weight(k))
            .collect();
        let norms: Vec<f64> = self
            .block_energies_of_density(&density)
            .into_iter()
            .map(f64::sqrt)
            .collect();
        self.weighted_lr(&norms, s, r)
    }

    /// Brute-force range of `‖u‖_{B^s_{2,2}} / ‖u‖_{H^s}` over single modes,
    /// which bounds the ratio for every field on this grid.
    pub fn sobolev_equivalence_bounds(&self, s: f64) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for k in 0..self.grid.modes() {
            let num: f64 = self
                .symbols
                .iter()
                .enumerate()
                .map(|(i, sym)| 4f64.powf(s * (i as f64 - 1.0)) * sym[k] * sym[k])
                .sum();
            let den = (1.0 + self.grid.abs_sq()[k]).powf(s);
            let ratio = (num / den).sqrt();
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        (lo, hi)
    }

    /// `R_j = Δ_j(u ∂₁v) − u Δ_j ∂₁v` for every block.
    ///
    /// Products are formed on the grid, so `u` and `v` should be band-limited
    /// below a quarter of the grid's index range for the result to be exact.
    pub fn commutators(&self, u: &Field, v: &Field) -> Result<Vec<Field>> {
        self.check(u)?;
        self.check(v)?;
        let dv = spectral::derivative(v, 0);
        let prod = u.mul(&dv)?.spectrum();
        let dv_hat = dv.spectrum();
        self.block_indices()
            .map(|j| {
                let mut r = self.dyadic_block_spectrum(&prod, j)?.to_field();
                let local = self.dyadic_block_spectrum(&dv_hat, j)?.to_field();
                r.axpy(-1.0, &u.mul(&local)?)?;
                Ok(r)
            })
            .collect()
    }

    /// LHS/RHS of the commutator estimate
    /// `‖(2^{js}‖R_j‖)‖_{ℓ^r} ≲ ‖∇u‖_{B^{s-1}} ‖v‖_{B^s}`; 0 when the RHS vanishes.
    pub fn commutator_ratio(&self, u: &Field, v: &Field, s: f64, r: Summability) -> Result<f64> {
        let rhs = self.besov_norm_vec(&spectral::gradient(u), s - 1.0, r)? * self.besov_norm(v, s, r)?;
        if rhs <= f64::MIN_POSITIVE {
            return Ok(0.0);
        }
        let norms: Vec<f64> = self.commutators(u, v)?.iter().map(Field::norm_l2).collect();
        Ok(self.weighted_lr(&norms, s, r) / rhs)
    }

    /// LHS/RHS of `‖uv‖_{B^s} ≲ ‖u‖_∞‖v‖_{B^s} + ‖u‖_{B^s}‖v‖_∞`.
    pub fn product_ratio(&self, u: &Field, v: &Field, s: f64, r: Summability) -> Result<f64> {
        let rhs = u.max_abs() * self.besov_norm(v, s, r)? + self.besov_norm(u, s, r)? * v.max_abs();
        if rhs <= f64::MIN_POSITIVE {
            return Ok(0.0);
        }
        Ok(self.besov_norm(&u.mul(v)?, s, r)? / rhs)
    }
}

/// `‖u‖_{H^s}` with the `(1 + |ξ|²)^s` weight.
pub fn sobolev_norm(u: &Field, s: f64) -> f64 {
    let grid = u.grid().clone();
    u.spectrum()
        .weighted_energy(|k| (1.0 + grid.abs_sq()[k]).powf(s))
        .sqrt()
}
