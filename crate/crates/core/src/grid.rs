//! Periodic box descriptor and the transform machinery attached to it.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default box side, `2π·16`.
pub const DEFAULT_LENGTH: f64 = 32.0 * PI;

/// Shape of a periodic box `[0, L)^n` sampled with `N` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub length: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(dim: usize, length: f64, points: usize) -> Result<Self> {
        let spec = GridSpec { dim, length, points };
        spec.validate()?;
        Ok(spec)
    }

    pub fn one_d(points: usize, length: f64) -> Result<Self> {
        Self::new(1, length, points)
    }

    pub fn two_d(points: usize, length: f64) -> Result<Self> {
        Self::new(2, length, points)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension {} not in {{1, 2}}", self.dim)));
        }
        if self.points < 8 || !self.points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {}",
                self.points
            )));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::InvalidGrid(format!("box length {} not positive", self.length)));
        }
        Ok(())
    }

    pub fn modes(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Quadrature weight of one sample, `(L/N)^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Fundamental wavenumber `2π/L`.
    pub fn base_wavenumber(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Largest integer index kept by the two-thirds rule.
    pub fn dealias_index(&self) -> usize {
        self.points / 3
    }

    /// Radius of the largest ball that fits inside the dealiased box.
    pub fn dealias_radius(&self) -> f64 {
        self.dealias_index() as f64 * self.base_wavenumber()
    }

    pub fn build(&self) -> Result<Arc<Grid>> {
        Grid::new(*self)
    }
}

/// A [`GridSpec`] together with FFT plans and per-mode wavevector tables.
///
/// Plans are shared `Arc<dyn Fft>` values and every transform allocates its
/// own scratch, so one `Grid` can be used from many threads at once.
pub struct Grid {
    spec: GridSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Signed integer wavenumber for each index along one axis.
    axis_index: Vec<i64>,
    /// Per-mode wavevector (second entry 0 in 1D), Nyquist kept positive.
    xi: Vec<[f64; 2]>,
    /// Same with the Nyquist component zeroed, used by odd-order symbols.
    xi_odd: Vec<[f64; 2]>,
    xi_sq: Vec<f64>,
    dealias: Vec<bool>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Arc<Self>> {
        spec.validate()?;
        let n = spec.points;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);

        let half = (n / 2) as i64;
        let axis_index: Vec<i64> = (0..n as i64)
            .map(|k| if k <= half { k } else { k - n as i64 })
            .collect();
        let k0 = spec.base_wavenumber();
        let cut = spec.dealias_index() as i64;

        let modes = spec.modes();
        let mut xi = Vec::with_capacity(modes);
        let mut xi_odd = Vec::with_capacity(modes);
        let mut xi_sq = Vec::with_capacity(modes);
        let mut dealias = Vec::with_capacity(modes);
        for idx in 0..modes {
            let ks = mode_indices(spec, &axis_index, idx);
            let w = [ks[0] as f64 * k0, ks[1] as f64 * k0];
            let odd = [
                if ks[0] == half { 0.0 } else { w[0] },
                if spec.dim == 2 && ks[1] == half { 0.0 } else { w[1] },
            ];
            xi.push(w);
            xi_odd.push(odd);
            xi_sq.push(w[0] * w[0] + w[1] * w[1]);
            dealias.push(ks[0].abs() <= cut && ks[1].abs() <= cut);
        }

        Ok(Arc::new(Grid {
            spec,
            forward,
            inverse,
            axis_index,
            xi,
            xi_odd,
            xi_sq,
            dealias,
        }))
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn points(&self) -> usize {
        self.spec.points
    }

    pub fn modes(&self) -> usize {
        self.xi.len()
    }

    pub fn wavevector(&self, mode: usize) -> [f64; 2] {
        self.xi[mode]
    }

    pub fn wavevector_odd(&self, mode: usize) -> [f64; 2] {
        self.xi_odd[mode]
    }

    pub fn wavevectors(&self) -> &[[f64; 2]] {
        &self.xi
    }

    pub fn wavevectors_odd(&self) -> &[[f64; 2]] {
        &self.xi_odd
    }

    /// `|ξ|²` per mode.
    pub fn abs_sq(&self) -> &[f64] {
        &self.xi_sq
    }

    /// Largest `|ξ|` represented on the grid.
    pub fn max_abs(&self) -> f64 {
        self.xi_sq.iter().cloned().fold(0.0, f64::max).sqrt()
    }

    /// True where the two-thirds rule keeps the mode.
    pub fn dealias_mask(&self) -> &[bool] {
        &self.dealias
    }

    /// Signed integer wavenumbers `(k_x, k_y)` of a linear mode index.
    pub fn integer_mode(&self, mode: usize) -> [i64; 2] {
        mode_indices(self.spec, &self.axis_index, mode)
    }

    /// Linear index of the signed integer mode `(k_x, k_y)`.
    pub fn mode_index(&self, k: [i64; 2]) -> usize {
        let n = self.spec.points as i64;
        let wrap = |v: i64| v.rem_euclid(n) as usize;
        match self.spec.dim {
            1 => wrap(k[0]),
            _ => wrap(k[0]) * self.spec.points + wrap(k[1]),
        }
    }

    /// Physical coordinates of sample `idx`.
    pub fn coordinate(&self, idx: usize) -> [f64; 2] {
        let h = self.spec.spacing();
        match self.spec.dim {
            1 => [idx as f64 * h, 0.0],
            _ => {
                let n = self.spec.points;
                [(idx / n) as f64 * h, (idx % n) as f64 * h]
            }
        }
    }

    /// Unnormalised forward transform in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    /// Inverse transform in place, including the `1/N^n` normalisation.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / self.modes() as f64;
        for c in data.iter_mut() {
            *c *= scale;
        }
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.modes());
        let n = self.spec.points;
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // rows (last axis, contiguous)
        plan.process_with_scratch(data, &mut scratch);
        if self.spec.dim == 2 {
            transpose_square(data, n);
            plan.process_with_scratch(data, &mut scratch);
            transpose_square(data, n);
        }
    }
}

fn mode_indices(spec: GridSpec, axis_index: &[i64], idx: usize) -> [i64; 2] {
    match spec.dim {
        1 => [axis_index[idx], 0],
        _ => [axis_index[idx / spec.points], axis_index[idx % spec.points]],
    }
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(GridSpec::one_d(4, 1.0).is_err());
        assert!(GridSpec::one_d(12, 1.0).is_err());
        assert!(GridSpec::new(3, 1.0, 16).is_err());
        assert!(GridSpec::one_d(16, -1.0).is_err());
        assert!(GridSpec::two_d(16, 1.0).is_ok());
    }

    #[test]
    fn mode_count_and_antisymmetry() {
        let g = GridSpec::two_d(16, 2.0 * PI).unwrap().build().unwrap();
        assert_eq!(g.modes(), 256);
        for idx in 0..g.modes() {
            let k = g.integer_mode(idx);
            let neg = g.mode_index([-k[0], -k[1]]);
            let a = g.wavevector_odd(idx);
            let b = g.wavevector_odd(neg);
            assert_eq!(a[0], -b[0]);
            assert_eq!(a[1], -b[1]);
            assert_eq!(g.mode_index(k), idx);
        }
    }

    #[test]
    fn nyquist_zeroed_only_in_odd_table() {
        let g = GridSpec::one_d(8, 2.0 * PI).unwrap().build().unwrap();
        assert_eq!(g.wavevector(4)[0], 4.0);
        assert_eq!(g.wavevector_odd(4)[0], 0.0);
        assert_eq!(g.wavevector(5)[0], -3.0);
    }
}
