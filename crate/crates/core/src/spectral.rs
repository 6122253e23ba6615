//! Fourier multipliers and the differential operators built from them.
//!
//! Conventions: first-order symbols use the wavevector with the Nyquist
//! component zeroed so that outputs stay real; even symbols (`|ξ|²`,
//! Helmholtz) use the full wavevector. On fields without Nyquist content the
//! two agree, which is the case for everything the solver produces.

use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{check_same, Field, Spectrum, VectorField};
use crate::grid::{Grid, GridSpec};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A symbol tabulated on the modes of one grid.
#[derive(Debug, Clone)]
pub struct Multiplier {
    spec: GridSpec,
    values: Vec<Complex64>,
}

impl Multiplier {
    /// Tabulate `symbol(ξ)` on every mode of `grid`.
    pub fn from_fn(grid: &Grid, symbol: impl Fn([f64; 2]) -> Complex64) -> Result<Self> {
        let values: Vec<Complex64> = grid.wavevectors().iter().map(|&xi| symbol(xi)).collect();
        Self::from_values(grid, values)
    }

    /// Tabulate a real symbol.
    pub fn from_real_fn(grid: &Grid, symbol: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        Self::from_fn(grid, |xi| Complex64::new(symbol(xi), 0.0))
    }

    pub fn from_values(grid: &Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.modes() {
            return Err(Error::InvalidGrid("multiplier length does not match grid".into()));
        }
        if let Some(mode) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFiniteSymbol { mode });
        }
        Ok(Multiplier {
            spec: *grid.spec(),
            values,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// Scale every Fourier coefficient of `field` by the tabulated symbol.
pub fn apply_multiplier(field: &Field, symbol: &Multiplier) -> Result<Field> {
    if field.spec() != symbol.spec() {
        return Err(Error::GridMismatch {
            left: *field.spec(),
            right: symbol.spec,
        });
    }
    Ok(field.spectrum().scaled(|k| symbol.values[k]).to_field())
}

/// `iξ_axis · û`, Nyquist zeroed.
pub fn derivative_spectrum(s: &Spectrum, axis: usize) -> Spectrum {
    let grid = s.grid().clone();
    s.scaled(|k| I * grid.wavevector_odd(k)[axis])
}

pub fn derivative(f: &Field, axis: usize) -> Field {
    derivative_spectrum(&f.spectrum(), axis).to_field()
}

pub fn gradient(f: &Field) -> VectorField {
    let s = f.spectrum();
    let comps = (0..f.spec().dim)
        .map(|a| derivative_spectrum(&s, a).to_field())
        .collect();
    VectorField::new(comps).expect("gradient has one component per axis")
}

/// Spectrum of `div V` given the component spectra.
pub fn divergence_spectrum(components: &[Spectrum]) -> Spectrum {
    let grid = components[0].grid().clone();
    let mut out = Spectrum::zeros(&grid);
    for (a, s) in components.iter().enumerate() {
        for (k, (o, c)) in out.coeffs_mut().iter_mut().zip(s.coeffs()).enumerate() {
            *o += I * grid.wavevector_odd(k)[a] * c;
        }
    }
    out
}

pub fn divergence(v: &VectorField) -> Field {
    divergence_spectrum(&v.spectra()).to_field()
}

pub fn laplacian(f: &Field) -> Field {
    let grid = f.grid().clone();
    f.spectrum().scaled_re(|k| -grid.abs_sq()[k]).to_field()
}

/// Scalar curl `∂₁V² − ∂₂V¹` in 2D; zero field in 1D.
pub fn curl(v: &VectorField) -> Field {
    if v.dim() < 2 {
        return Field::zeros(v.grid());
    }
    let c = v.components();
    let mut out = derivative(&c[1], 0);
    out.axpy(-1.0, &derivative(&c[0], 1)).expect("components share a grid");
    out
}

/// `(I − coeff·Δ)⁻¹ f`.
pub fn helmholtz_invert(f: &Field, coeff: f64) -> Result<Field> {
    if !(coeff >= 0.0) {
        return Err(Error::NegativeCoefficient(coeff));
    }
    let grid = f.grid().clone();
    Ok(f.spectrum()
        .scaled_re(|k| 1.0 / (1.0 + coeff * grid.abs_sq()[k]))
        .to_field())
}

/// `(I − coeff·Δ) f`, the forward operator matching [`helmholtz_invert`].
pub fn helmholtz_apply(f: &Field, coeff: f64) -> Field {
    let grid = f.grid().clone();
    f.spectrum().scaled_re(|k| 1.0 + coeff * grid.abs_sq()[k]).to_field()
}

/// Leray projection of component spectra onto divergence-free fields.
///
/// The zero mode passes through unchanged. Modes whose odd wavevector
/// vanishes without being the zero mode (pure Nyquist) are removed.
pub fn leray_project_spectra(components: &[Spectrum]) -> Vec<Spectrum> {
    let grid = components[0].grid().clone();
    let n = components.len();
    let mut out: Vec<Spectrum> = (0..n).map(|_| Spectrum::zeros(&grid)).collect();
    for k in 0..grid.modes() {
        let xi = grid.wavevector_odd(k);
        let xx = xi[0] * xi[0] + xi[1] * xi[1];
        if k == 0 {
            for a in 0..n {
                out[a].coeffs_mut()[0] = components[a].coeffs()[0];
            }
            continue;
        }
        if xx == 0.0 {
            continue;
        }
        let dot: Complex64 = (0..n).map(|b| components[b].coeffs()[k] * xi[b]).sum();
        for a in 0..n {
            out[a].coeffs_mut()[k] = components[a].coeffs()[k] - dot * (xi[a] / xx);
        }
    }
    out
}

pub fn leray_project(v: &VectorField) -> VectorField {
    VectorField::from_spectra(&leray_project_spectra(&v.spectra()))
}

/// `∫ f g dx`, exact for band-limited products without aliasing.
pub fn inner_product_l2(f: &Field, g: &Field) -> Result<f64> {
    check_same(f.grid(), g.grid())?;
    Ok(f.values().iter().zip(g.values()).map(|(a, b)| a * b).sum::<f64>() * f.spec().cell_volume())
}

/// `∫ U · V dx`.
pub fn inner_product_vec(u: &VectorField, v: &VectorField) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            got: v.dim(),
        });
    }
    u.components()
        .iter()
        .zip(v.components())
        .map(|(a, b)| inner_product_l2(a, b))
        .sum()
}

/// Zero every mode outside the two-thirds box, in place.
pub fn dealias_spectrum(s: &mut Spectrum) {
    let grid: Arc<Grid> = s.grid().clone();
    for (c, &keep) in s.coeffs_mut().iter_mut().zip(grid.dealias_mask()) {
        if !keep {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

pub fn dealias(f: &Field) -> Field {
    let mut s = f.spectrum();
    dealias_spectrum(&mut s);
    s.to_field()
}
