//! Sampled scalar and vector fields on a periodic grid.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridSpec};

/// Real samples of a scalar field in physical space.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

/// Unnormalised Fourier coefficients of a real field.
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
}

/// An `n`-component vector field, one [`Field`] per axis.
#[derive(Debug, Clone)]
pub struct VectorField {
    components: Vec<Field>,
}

pub(crate) fn check_same(a: &Grid, b: &Grid) -> Result<()> {
    if a.spec() != b.spec() {
        return Err(Error::GridMismatch {
            left: *a.spec(),
            right: *b.spec(),
        });
    }
    Ok(())
}

impl Field {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Field {
            grid: grid.clone(),
            values: vec![0.0; grid.modes()],
        }
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.modes() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.modes(),
                values.len()
            )));
        }
        Ok(Field {
            grid: grid.clone(),
            values,
        })
    }

    /// Sample `f(x)` at every grid point (`x[1] = 0` in 1D).
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.modes()).map(|i| f(grid.coordinate(i))).collect();
        Field {
            grid: grid.clone(),
            values,
        }
    }

    /// Seeded random field with spectral support in `|ξ| <= k_max`,
    /// scaled so that `max |u| = amplitude`.
    pub fn random_band_limited(grid: &Arc<Grid>, k_max: f64, amplitude: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise: Vec<f64> = (0..grid.modes()).map(|_| rng.sample(StandardNormal)).collect();
        let mut spec = Field {
            grid: grid.clone(),
            values: noise,
        }
        .spectrum();
        let kk = k_max * k_max;
        for (c, &s) in spec.coeffs.iter_mut().zip(grid.abs_sq()) {
            if s > kk * (1.0 + 1e-12) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        let mut f = spec.to_field();
        let peak = f.max_abs();
        if peak > 0.0 {
            f.scale(amplitude / peak);
        }
        f
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn spec(&self) -> &GridSpec {
        self.grid.spec()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn spectrum(&self) -> Spectrum {
        let mut coeffs: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.grid.forward(&mut coeffs);
        Spectrum {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `∫ u dx` by the periodic trapezoid rule.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spec().cell_volume()
    }

    /// Discrete `L²` norm.
    pub fn norm_l2(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.spec().cell_volume()).sqrt()
    }

    pub fn scale(&mut self, a: f64) {
        for v in &mut self.values {
            *v *= a;
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Field) -> Result<()> {
        check_same(&self.grid, &other.grid)?;
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
        Ok(())
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Field) -> Result<Field> {
        check_same(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(Field {
            grid: self.grid.clone(),
            values,
        })
    }

    /// Largest magnitude on the outermost ring of samples, relative to the
    /// global maximum. Used to flag periodic wrap-around of localized data.
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let n = self.spec().points;
        let edge = match self.spec().dim {
            1 => self.values[0].abs().max(self.values[n - 1].abs()),
            _ => (0..self.values.len())
                .filter(|&i| {
                    let (r, c) = (i / n, i % n);
                    r == 0 || c == 0 || r == n - 1 || c == n - 1
                })
                .fold(0.0, |m: f64, i| m.max(self.values[i].abs())),
        };
        edge / peak
    }
}

impl Spectrum {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Spectrum {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.modes()],
        }
    }

    pub fn from_coeffs(grid: &Arc<Grid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.modes() {
            return Err(Error::InvalidGrid(format!(
                "expected {} coefficients, got {}",
                grid.modes(),
                coeffs.len()
            )));
        }
        Ok(Spectrum {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Back to physical space, keeping the real part.
    pub fn to_field(&self) -> Field {
        let mut data = self.coeffs.clone();
        self.grid.inverse(&mut data);
        Field {
            grid: self.grid.clone(),
            values: data.into_iter().map(|c| c.re).collect(),
        }
    }

    /// Multiply mode `k` by `symbol(k)`.
    pub fn scaled(&self, symbol: impl Fn(usize) -> Complex64) -> Spectrum {
        let coeffs = self.coeffs.iter().enumerate().map(|(k, c)| c * symbol(k)).collect();
        Spectrum {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    /// Multiply mode `k` by the real factor `symbol(k)`.
    pub fn scaled_re(&self, symbol: impl Fn(usize) -> f64) -> Spectrum {
        let coeffs = self.coeffs.iter().enumerate().map(|(k, c)| c * symbol(k)).collect();
        Spectrum {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    pub fn add_assign(&mut self, other: &Spectrum) -> Result<()> {
        check_same(&self.grid, &other.grid)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(())
    }

    /// Parseval: `Σ w(k)|û_k|² · L^n / N^{2n}`, the `L²` norm squared of the
    /// field with multiplier `sqrt(w)` applied.
    pub fn weighted_energy(&self, weight: impl Fn(usize) -> f64) -> f64 {
        let modes = self.grid.modes() as f64;
        let scale = self.grid.spec().cell_volume() / modes;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| weight(k) * c.norm_sqr())
            .sum::<f64>()
            * scale
    }

    /// `Σ_k |û_k|²` per mode, already normalised as in [`Self::weighted_energy`].
    pub fn energy_density(&self) -> Vec<f64> {
        let scale = self.grid.spec().cell_volume() / self.grid.modes() as f64;
        self.coeffs.iter().map(|c| c.norm_sqr() * scale).collect()
    }
}

impl VectorField {
    pub fn new(components: Vec<Field>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidGrid("vector field without components".into()))?;
        if components.len() != first.spec().dim {
            return Err(Error::DimensionMismatch {
                expected: first.spec().dim,
                got: components.len(),
            });
        }
        for c in &components[1..] {
            check_same(first.grid(), c.grid())?;
        }
        Ok(VectorField { components })
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        VectorField {
            components: (0..grid.dim()).map(|_| Field::zeros(grid)).collect(),
        }
    }

    pub fn random_band_limited(grid: &Arc<Grid>, k_max: f64, amplitude: f64, seed: u64) -> Self {
        let components = (0..grid.dim())
            .map(|a| {
                Field::random_band_limited(grid, k_max, amplitude, seed.wrapping_mul(31).wrapping_add(a as u64 + 1))
            })
            .collect();
        VectorField { components }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.components[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Field] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [Field] {
        &mut self.components
    }

    pub fn into_components(self) -> Vec<Field> {
        self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Field::is_zero)
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(Field::is_finite)
    }

    pub fn norm_l2(&self) -> f64 {
        self.components.iter().map(|c| c.norm_l2().powi(2)).sum::<f64>().sqrt()
    }

    pub fn axpy(&mut self, a: f64, other: &VectorField) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        for (x, y) in self.components.iter_mut().zip(&other.components) {
            x.axpy(a, y)?;
        }
        Ok(())
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.components {
            c.scale(a);
        }
    }

    /// Pointwise `|u|²`.
    pub fn magnitude_sq(&self) -> Field {
        let grid = self.grid();
        let mut values = vec![0.0; grid.modes()];
        for c in &self.components {
            for (m, v) in values.iter_mut().zip(c.values()) {
                *m += v * v;
            }
        }
        Field {
            grid: grid.clone(),
            values,
        }
    }

    pub fn spectra(&self) -> Vec<Spectrum> {
        self.components.iter().map(Field::spectrum).collect()
    }

    pub fn from_spectra(spectra: &[Spectrum]) -> VectorField {
        VectorField {
            components: spectra.iter().map(Spectrum::to_field).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn round_trip_and_parseval() {
        let g = GridSpec::two_d(32, 2.0 * PI).unwrap().build().unwrap();
        let f = Field::random_band_limited(&g, 1e9, 1.0, 3);
        let back = f.spectrum().to_field();
        let err = f.sub(&back).unwrap().norm_l2() / f.norm_l2();
        assert!(err < 1e-12, "{err}");
        let spectral = f.spectrum().weighted_energy(|_| 1.0).sqrt();
        assert!((spectral - f.norm_l2()).abs() < 1e-12 * f.norm_l2());
    }

    #[test]
    fn conjugate_symmetry_of_real_fields() {
        let g = GridSpec::one_d(64, 10.0).unwrap().build().unwrap();
        let f = Field::random_band_limited(&g, 1e9, 1.0, 11);
        let s = f.spectrum();
        for idx in 0..g.modes() {
            let k = g.integer_mode(idx);
            let m = g.mode_index([-k[0], -k[1]]);
            let d = s.coeffs()[idx] - s.coeffs()[m].conj();
            assert!(d.norm() < 1e-10);
        }
    }

    #[test]
    fn band_limited_field_has_no_high_modes() {
        let g = GridSpec::one_d(128, 2.0 * PI).unwrap().build().unwrap();
        let f = Field::random_band_limited(&g, 10.0, 2.0, 5);
        assert!((f.max_abs() - 2.0).abs() < 1e-12);
        let s = f.spectrum();
        for (idx, c) in s.coeffs().iter().enumerate() {
            if g.abs_sq()[idx] > 100.0 + 1e-9 {
                assert!(c.norm() < 1e-9);
            }
        }
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = GridSpec::one_d(16, 1.0).unwrap().build().unwrap();
        let b = GridSpec::one_d(32, 1.0).unwrap().build().unwrap();
        assert!(Field::zeros(&a).mul(&Field::zeros(&b)).is_err());
    }
}
