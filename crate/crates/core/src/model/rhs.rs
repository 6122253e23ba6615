use rustfft::num_complex::Complex64;

use crate::error::Result;
use crate::field::{check_same, Field, Spectrum, VectorField};
use crate::model::{AbcdParams, WaveState};
use crate::spectral::{dealias_spectrum, derivative_spectrum, divergence_spectrum};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Time derivatives `(∂ₜη, ∂ₜV)`.
#[derive(Debug, Clone)]
pub struct Tendency {
    pub eta: Field,
    pub v: VectorField,
}

/// Right-hand side of the transformed system.
///
/// Flat bottom:
/// `∂ₜη = −(I−εbΔ)⁻¹[(I+aεΔ)div V + εW·∇η + ε div(ηV)]`,
/// `∂ₜV = −(I−εdΔ)⁻¹∇[(I+cεΔ)η + (ε/2)|V+W|²]`.
/// With a topography `S` the transport term becomes `div((η−S)V)` and the
/// `W` terms are dropped.
pub fn rhs(state: &WaveState, params: &AbcdParams, topography: Option<&Field>) -> Result<Tendency> {
    rhs_masked(&state.eta, &state.v, &state.w, params, topography, None)
}

/// [`rhs`] on loose fields, optionally followed by a spectral cutoff mask.
pub fn rhs_masked(
    eta: &Field,
    v: &VectorField,
    w: &VectorField,
    params: &AbcdParams,
    topography: Option<&Field>,
    mask: Option<&[bool]>,
) -> Result<Tendency> {
    let (deta, dv) = rhs_spectra(eta, &eta.spectrum(), v, &v.spectra(), w, params, topography, mask)?;
    Ok(Tendency {
        eta: deta.to_field(),
        v: VectorField::from_spectra(&dv),
    })
}

/// Core evaluation given both representations of `η` and `V`; returns the
/// tendency spectra, masked when `mask` is given.
#[allow(clippy::too_many_arguments)]
pub fn rhs_spectra(
    eta: &Field,
    eta_hat: &Spectrum,
    v: &VectorField,
    v_hat: &[Spectrum],
    w: &VectorField,
    params: &AbcdParams,
    topography: Option<&Field>,
    mask: Option<&[bool]>,
) -> Result<(Spectrum, Vec<Spectrum>)> {
    params.require_evolvable()?;
    check_same(eta.grid(), v.grid())?;
    let grid = eta.grid().clone();
    let xi_sq = grid.abs_sq();
    let eps = params.epsilon;
    let use_w = topography.is_none() && !w.is_zero();

    let mut acc = divergence_spectrum(v_hat).scaled_re(|k| 1.0 - params.a * eps * xi_sq[k]);

    let depth = match topography {
        Some(s) => {
            check_same(eta.grid(), s.grid())?;
            eta.sub(s)?
        }
        None => eta.clone(),
    };
    let fluxes: Vec<Spectrum> = v
        .components()
        .iter()
        .map(|va| {
            let mut f = depth.mul(va)?.spectrum();
            dealias_spectrum(&mut f);
            Ok(f)
        })
        .collect::<Result<_>>()?;
    add_scaled(&mut acc, &divergence_spectrum(&fluxes), eps);

    if use_w {
        let mut q = Field::zeros(&grid);
        for (axis, wa) in w.components().iter().enumerate() {
            let d = derivative_spectrum(eta_hat, axis).to_field();
            q.axpy(1.0, &wa.mul(&d)?)?;
        }
        let mut q_hat = q.spectrum();
        dealias_spectrum(&mut q_hat);
        add_scaled(&mut acc, &q_hat, eps);
    }

    let b = params.b;
    let mut deta = acc.scaled_re(|k| -1.0 / (1.0 + eps * b * xi_sq[k]));

    let speed_sq = if use_w {
        let mut u = v.clone();
        u.axpy(1.0, w)?;
        u.magnitude_sq()
    } else {
        v.magnitude_sq()
    };
    let mut kin = speed_sq.spectrum();
    dealias_spectrum(&mut kin);
    let c = params.c;
    let mut psi = eta_hat.scaled_re(|k| 1.0 - c * eps * xi_sq[k]);
    add_scaled(&mut psi, &kin, 0.5 * eps);

    let d = params.d;
    let mut dv: Vec<Spectrum> = (0..grid.dim())
        .map(|axis| psi.scaled(|k| -I * grid.wavevector_odd(k)[axis] / (1.0 + eps * d * xi_sq[k])))
        .collect();

    if let Some(m) = mask {
        apply_mask(&mut deta, m);
        for s in &mut dv {
            apply_mask(s, m);
        }
    }

    Ok((deta, dv))
}

fn add_scaled(acc: &mut Spectrum, other: &Spectrum, a: f64) {
    for (x, y) in acc.coeffs_mut().iter_mut().zip(other.coeffs()) {
        *x += y * a;
    }
}

pub(crate) fn apply_mask(s: &mut Spectrum, mask: &[bool]) {
    for (c, &keep) in s.coeffs_mut().iter_mut().zip(mask) {
        if !keep {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, DEFAULT_LENGTH};
    use crate::model::validate_params;
    use crate::spectral;

    fn bbm() -> AbcdParams {
        AbcdParams::preset("bbm-bbm", 0.1).unwrap()
    }

    #[test]
    fn zero_state_has_zero_tendency() {
        let g = GridSpec::two_d(16, DEFAULT_LENGTH).unwrap().build().unwrap();
        let t = rhs(&WaveState::zeros(&g), &bbm(), None).unwrap();
        assert!(t.eta.is_zero());
        assert!(t.v.is_zero());
    }

    fn random_state_2d(seed: u64) -> WaveState {
        let g = GridSpec::two_d(32, 2.0 * std::f64::consts::PI * 4.0)
            .unwrap()
            .build()
            .unwrap();
        let eta = Field::random_band_limited(&g, 2.0, 0.5, seed);
        let phi = Field::random_band_limited(&g, 2.0, 0.5, seed + 1);
        let psi = Field::random_band_limited(&g, 2.0, 0.5, seed + 2);
        let dpsi = spectral::gradient(&psi);
        let mut r0 = dpsi.components()[1].clone();
        r0.scale(-1.0);
        let mut vbar = VectorField::new(vec![r0, dpsi.components()[0].clone()]).unwrap();
        vbar.axpy(1.0, &spectral::gradient(&phi)).unwrap();
        WaveState::from_initial(eta, &vbar).unwrap()
    }

    #[test]
    fn velocity_tendency_is_a_gradient() {
        let st = random_state_2d(11);
        assert!(!st.w.is_zero());
        let p = AbcdParams::preset("bona-smith", 0.2).unwrap();
        let t = rhs(&st, &p, None).unwrap();
        assert!(spectral::curl(&t.v).norm_l2() < 1e-12 * (1.0 + t.v.norm_l2()));
        assert!(spectral::leray_project(&t.v).norm_l2() < 1e-10);
    }

    #[test]
    fn flat_topography_matches_bit_for_bit() {
        let g = GridSpec::one_d(64, DEFAULT_LENGTH).unwrap().build().unwrap();
        let eta = Field::random_band_limited(&g, 1.0, 0.3, 1);
        let v = VectorField::random_band_limited(&g, 1.0, 0.3, 2);
        let st = WaveState::new(eta, v, VectorField::zeros(&g), 0.0).unwrap();
        let s = Field::zeros(&g);
        let flat = rhs(&st, &bbm(), None).unwrap();
        let topo = rhs(&st, &bbm(), Some(&s)).unwrap();
        assert_eq!(flat.eta.values(), topo.eta.values());
        assert_eq!(flat.v.components()[0].values(), topo.v.components()[0].values());
    }

    #[test]
    fn linear_single_mode_matches_symbols() {
        // η = cos(kx), V = 0: ∂ₜη = 0, ∂ₜV = −(1−cεk²)/(1+dεk²)·∂ₓη.
        let g = GridSpec::one_d(64, DEFAULT_LENGTH).unwrap().build().unwrap();
        let p = validate_params(-0.1, 0.2, -0.05, 1.0 / 3.0 - 0.05, 0.3).unwrap();
        let k = 5.0 * g.spec().base_wavenumber();
        let eta = Field::from_fn(&g, |x| (k * x[0]).cos());
        let st = WaveState::new(eta, VectorField::zeros(&g), VectorField::zeros(&g), 0.0).unwrap();
        let t = rhs(&st, &p, None).unwrap();
        assert!(t.eta.max_abs() < 1e-14);
        let e = p.epsilon;
        let factor = (1.0 - p.c * e * k * k) / (1.0 + p.d * e * k * k);
        for (i, v) in t.v.components()[0].values().iter().enumerate() {
            let x = g.coordinate(i)[0];
            let want = factor * k * (k * x).sin();
            assert!((v - want).abs() < 1e-12, "{v} vs {want}");
        }
    }

    #[test]
    fn excluded_params_refused() {
        let g = GridSpec::one_d(16, DEFAULT_LENGTH).unwrap().build().unwrap();
        let p = AbcdParams::preset("excluded-1", 0.1).unwrap();
        assert!(rhs(&WaveState::zeros(&g), &p, None).is_err());
    }
}
