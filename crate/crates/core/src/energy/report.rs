use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::field::{Field, Spectrum, VectorField};
use crate::littlewood_paley::{DyadicPartition, Summability};
use crate::model::{sgn, AbcdParams, WaveState};
use crate::spectral;

/// Relative slack below zero tolerated before a block energy counts as
/// indefinite rather than rounding noise.
const NEGATIVE_SLACK: f64 = 1e-12;

/// Diagnostics at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t: f64,
    /// `U_j` for `j = -1 ..= j_max`.
    pub uj: Vec<f64>,
    pub us: f64,
    pub ns: f64,
    pub h: f64,
    pub hamiltonian: Option<f64>,
    pub curl_res: f64,
    pub max_eta: f64,
    pub blow_up: bool,
}

/// Coefficients of the six terms of `U_j²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyWeights {
    /// `ε(b−c)`
    pub eta1: f64,
    /// `ε²(−c)b`
    pub eta2: f64,
    /// `ε(d−a)`
    pub v1: f64,
    /// `ε²(−a)d`
    pub v2: f64,
}

impl EnergyWeights {
    pub fn new(p: &AbcdParams) -> Self {
        let e = p.epsilon;
        EnergyWeights {
            eta1: e * (p.b - p.c),
            eta2: e * e * (-p.c) * p.b,
            v1: e * (p.d - p.a),
            v2: e * e * (-p.a) * p.d,
        }
    }
}

/// Per-block squared `L²` norms of `u`, `∇u`, `∇²u` (summed over components).
struct Layers {
    l0: Vec<f64>,
    l1: Vec<f64>,
    l2: Vec<f64>,
}

fn layers(p: &DyadicPartition, spectra: &[Spectrum]) -> Layers {
    let grid = p.grid();
    let xi_sq = grid.abs_sq();
    let mut d0 = vec![0.0; grid.modes()];
    for s in spectra {
        for (acc, e) in d0.iter_mut().zip(s.energy_density()) {
            *acc += e;
        }
    }
    let d1: Vec<f64> = d0.iter().zip(xi_sq).map(|(e, x)| e * x).collect();
    let d2: Vec<f64> = d1.iter().zip(xi_sq).map(|(e, x)| e * x).collect();
    Layers {
        l0: p.block_energies_of_density(&d0),
        l1: p.block_energies_of_density(&d1),
        l2: p.block_energies_of_density(&d2),
    }
}

fn check_block(j: i32, value: f64, scale: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -NEGATIVE_SLACK * scale {
        Ok(0.0)
    } else {
        Err(Error::IndefiniteEnergy { j, value })
    }
}

/// Squared block energies `U_j²` for `j = -1 ..= j_max`.
///
/// Errors with [`Error::IndefiniteEnergy`] when the six-term form is
/// negative on some block, which can happen outside the long-time regime.
pub fn block_energies_sq(p: &DyadicPartition, st: &WaveState, params: &AbcdParams) -> Result<Vec<f64>> {
    params.require_evolvable()?;
    let w = EnergyWeights::new(params);
    let eta = layers(p, &[st.eta.spectrum()]);
    let v = layers(p, &st.v.spectra());
    (0..p.block_count())
        .map(|i| {
            let pos = eta.l0[i] + v.l0[i];
            let total = pos + w.eta1 * eta.l1[i] + w.eta2 * eta.l2[i] + w.v1 * v.l1[i] + w.v2 * v.l2[i];
            check_block(i as i32 - 1, total, pos)
        })
        .collect()
}

fn total_from_layers(
    p: &DyadicPartition,
    eta: &Layers,
    v: &Layers,
    wts: &EnergyWeights,
    s: f64,
    r: Summability,
) -> Result<f64> {
    let besov = |l: &[f64]| {
        let norms: Vec<f64> = l.iter().map(|x| x.sqrt()).collect();
        p.weighted_lr(&norms, s, r)
    };
    let plain = besov(&eta.l0).powi(2) + besov(&v.l0).powi(2);
    let us_sq = plain
        + wts.eta1 * besov(&eta.l1).powi(2)
        + wts.eta2 * besov(&eta.l2).powi(2)
        + wts.v1 * besov(&v.l1).powi(2)
        + wts.v2 * besov(&v.l2).powi(2);
    Ok(check_block(-1, us_sq, plain)?.sqrt())
}

/// `U_s` from the spectra of `η` and the components of `V`.
pub fn total_energy(
    p: &DyadicPartition,
    eta_hat: &Spectrum,
    v_hat: &[Spectrum],
    params: &AbcdParams,
    s: f64,
    r: Summability,
) -> Result<f64> {
    let eta = layers(p, std::slice::from_ref(eta_hat));
    let v = layers(p, v_hat);
    total_from_layers(p, &eta, &v, &EnergyWeights::new(params), s, r)
}

/// `U_j` for `j = -1 ..= j_max`.
pub fn block_energies(p: &DyadicPartition, st: &WaveState, params: &AbcdParams) -> Result<Vec<f64>> {
    Ok(block_energies_sq(p, st, params)?.into_iter().map(f64::sqrt).collect())
}

/// [`energy_report`] with the block loop parallel by default.
pub fn energy_report(
    p: &DyadicPartition,
    st: &WaveState,
    params: &AbcdParams,
    s: f64,
    r: Summability,
) -> Result<EnergyReport> {
    energy_report_with(Execution::default(), p, st, params, s, r)
}

pub fn energy_report_with(
    exec: Execution,
    p: &DyadicPartition,
    st: &WaveState,
    params: &AbcdParams,
    s: f64,
    r: Summability,
) -> Result<EnergyReport> {
    params.require_evolvable()?;
    let wts = EnergyWeights::new(params);
    let eps = params.epsilon;
    let eta_hat = st.eta.spectrum();
    let v_hat = st.v.spectra();
    let eta = layers(p, std::slice::from_ref(&eta_hat));
    let v = layers(p, &v_hat);

    let uj_sq = block_energies_sq(p, st, params)?;
    let uj: Vec<f64> = uj_sq.iter().map(|x| x.sqrt()).collect();

    let us = total_from_layers(p, &eta, &v, &wts, s, r)?;

    // N_j² = (1+εM)·[η terms] + ∫(1+εη+εM)|V_j|² + ε(d−a)‖∇V_j‖²
    //        + dε²∫(η+M)|∇V_j|² + (1+εM)·ε²(−a)d‖∇²V_j‖²
    let m = st.eta.max_abs();
    let lift = 1.0 + eps * m;
    let shifted: Vec<f64> = st.eta.values().iter().map(|x| x + m).collect();
    let shifted = Field::from_values(st.grid(), shifted)?;
    let pointwise = map_indexed(exec, p.block_count(), |i| -> Result<(f64, f64)> {
        let j = i as i32 - 1;
        let sym = p.symbol(j)?;
        let blocks: Vec<Spectrum> = v_hat.iter().map(|c| c.scaled_re(|k| sym[k])).collect();
        let vj = VectorField::from_spectra(&blocks);
        let a = spectral::inner_product_l2(&shifted, &vj.magnitude_sq())?;
        let mut grad_sq = Field::zeros(st.grid());
        for bj in &blocks {
            for axis in 0..p.grid().dim() {
                let d = spectral::derivative_spectrum(bj, axis).to_field();
                grad_sq.axpy(1.0, &d.mul(&d)?)?;
            }
        }
        let b = spectral::inner_product_l2(&shifted, &grad_sq)?;
        Ok((a, b))
    });
    let mut nj = Vec::with_capacity(p.block_count());
    for (i, pw) in pointwise.into_iter().enumerate() {
        let (vw, gw) = pw?;
        let eta_part = eta.l0[i] + wts.eta1 * eta.l1[i] + wts.eta2 * eta.l2[i];
        let total = lift * eta_part
            + v.l0[i]
            + eps * vw
            + wts.v1 * v.l1[i]
            + params.d * eps * eps * gw
            + lift * wts.v2 * v.l2[i];
        nj.push(check_block(i as i32 - 1, total, eta.l0[i] + v.l0[i])?.sqrt());
    }
    let ns = p.weighted_lr(&nj, s, r);

    Ok(EnergyReport {
        t: st.t,
        uj,
        us,
        ns,
        h: forcing_norm(p, &st.w, params, s, r),
        hamiltonian: if params.b == params.d && p.grid().dim() == 1 {
            Some(hamiltonian_functional(&st.eta, &st.v, params)?)
        } else {
            None
        },
        curl_res: st.curl_residual(),
        max_eta: m,
        blow_up: false,
    })
}

/// `H = ‖W‖_{B^s} + ‖∇W‖_{B^s} − sgn(a)√ε‖∇²W‖_{B^s}`.
pub fn forcing_norm(p: &DyadicPartition, w: &VectorField, params: &AbcdParams, s: f64, r: Summability) -> f64 {
    if w.is_zero() {
        return 0.0;
    }
    let l = layers(p, &w.spectra());
    let besov = |x: &[f64]| {
        let norms: Vec<f64> = x.iter().map(|e| e.sqrt()).collect();
        p.weighted_lr(&norms, s, r)
    };
    besov(&l.l0) + besov(&l.l1) - sgn(params.a) * params.epsilon.sqrt() * besov(&l.l2)
}

/// `∫ η² + (1+εη)V² − εc(∂ₓη)² − εa(∂ₓV)²` in 1D, with `W = 0`.
pub fn hamiltonian(st: &WaveState, params: &AbcdParams) -> Result<f64> {
    if params.b != params.d {
        return Err(Error::HamiltonianUndefined {
            b: params.b,
            d: params.d,
        });
    }
    if st.grid().dim() != 1 {
        return Err(Error::HamiltonianPrecondition("a one-dimensional grid"));
    }
    if !st.w.is_zero() {
        return Err(Error::HamiltonianPrecondition("W = 0"));
    }
    hamiltonian_functional(&st.eta, &st.v, params)
}

fn hamiltonian_functional(eta: &Field, v: &VectorField, params: &AbcdParams) -> Result<f64> {
    let e = params.epsilon;
    let v1 = &v.components()[0];
    let weight: Vec<f64> = eta.values().iter().map(|x| 1.0 + e * x).collect();
    let weight = Field::from_values(eta.grid(), weight)?;
    let grid = eta.grid().clone();
    let xi_sq = grid.abs_sq();
    let quad = eta.norm_l2().powi(2) + spectral::inner_product_l2(&weight, &v1.mul(v1)?)?;
    let deta = eta.spectrum().weighted_energy(|k| xi_sq[k]);
    let dv = v1.spectrum().weighted_energy(|k| xi_sq[k]);
    Ok(quad - e * params.c * deta - e * params.a * dv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, DEFAULT_LENGTH};
    use crate::model::validate_params;

    fn setup(n: usize) -> DyadicPartition {
        let g = GridSpec::one_d(n, DEFAULT_LENGTH).unwrap().build().unwrap();
        DyadicPartition::build(&g).unwrap()
    }

    fn state(p: &DyadicPartition, seed: u64, amp: f64) -> WaveState {
        let g = p.grid();
        let eta = Field::random_band_limited(g, 6.0, amp, seed);
        let v = VectorField::random_band_limited(g, 6.0, amp, seed + 100);
        WaveState::new(eta, v, VectorField::zeros(g), 0.0).unwrap()
    }

    #[test]
    fn zero_state_reports_zero() {
        let p = setup(128);
        let st = WaveState::zeros(p.grid());
        let params = AbcdParams::preset("bbm-bbm", 0.1).unwrap();
        let rep = energy_report(&p, &st, &params, 1.0, Summability::TWO).unwrap();
        assert!(rep.uj.iter().all(|&u| u == 0.0));
        assert_eq!((rep.us, rep.ns, rep.h), (0.0, 0.0, 0.0));
        assert_eq!(rep.hamiltonian, Some(0.0));
    }

    #[test]
    fn single_mode_block_energy_is_diagonal() {
        let p = setup(256);
        let g = p.grid().clone();
        let params = validate_params(0.0, 0.25, -1.0 / 6.0, 0.25, 0.2).unwrap();
        let k = 24.0 * g.spec().base_wavenumber();
        let eta = Field::from_fn(&g, |x| (k * x[0]).cos());
        let st = WaveState::new(eta.clone(), VectorField::zeros(&g), VectorField::zeros(&g), 0.0).unwrap();
        let uj = block_energies_sq(&p, &st, &params).unwrap();
        let e = params.epsilon;
        let factor = 1.0 + e * (params.b - params.c) * k * k + e * e * (-params.c) * params.b * k.powi(4);
        for j in p.block_indices() {
            // direct quadrature of the block in physical space
            let ej = p.dyadic_block(&eta, j).unwrap().norm_l2().powi(2);
            let got = uj[(j + 1) as usize];
            assert!((got - factor * ej).abs() <= 1e-12 * (1.0 + got), "j={j}");
        }
    }

    #[test]
    fn r2_total_matches_block_sum() {
        let p = setup(256);
        let params = AbcdParams::preset("bona-smith", 0.05).unwrap();
        for seed in 0..5 {
            let st = state(&p, seed, 1.0);
            let rep = energy_report(&p, &st, &params, 1.5, Summability::TWO).unwrap();
            let agg = p.weighted_lr(&rep.uj, 1.5, Summability::TWO);
            assert!((agg - rep.us).abs() <= 1e-10 * rep.us);
        }
    }

    #[test]
    fn zero_eta_gives_n_equal_u() {
        let p = setup(128);
        let g = p.grid().clone();
        let params = AbcdParams::preset("bona-smith", 0.1).unwrap();
        let v = VectorField::random_band_limited(&g, 4.0, 1.0, 5);
        let st = WaveState::new(Field::zeros(&g), v, VectorField::zeros(&g), 0.0).unwrap();
        let rep = energy_report(&p, &st, &params, 1.0, Summability::TWO).unwrap();
        let u = block_energies(&p, &st, &params).unwrap();
        for (a, b) in u.iter().zip(&rep.uj) {
            assert_eq!(a, b);
        }
        assert!((rep.ns - rep.us).abs() <= 1e-14 * rep.us);
    }

    #[test]
    fn forcing_norm_sign_convention() {
        let p = setup(128);
        let g = p.grid().clone();
        let w = VectorField::new(vec![Field::from_fn(&g, |_| 2.0)]).unwrap();
        let a0 = AbcdParams::preset("bbm-bbm", 0.1).unwrap();
        let h = forcing_norm(&p, &w, &a0, 1.0, Summability::TWO);
        let l = g.spec().length;
        // constant: only Δ_{-1} contributes, ‖W‖ = 2√L, gradient terms vanish
        assert!((h - 0.5 * 2.0 * l.sqrt()).abs() < 1e-12 * h);
        assert_eq!(
            forcing_norm(&p, &VectorField::zeros(&g), &a0, 1.0, Summability::TWO),
            0.0
        );
    }

    #[test]
    fn hamiltonian_preconditions() {
        let p = setup(64);
        let st = WaveState::zeros(p.grid());
        let equal = AbcdParams::preset("bona-smith", 0.1).unwrap();
        assert!(hamiltonian(&st, &equal).is_ok());
        let unequal = validate_params(0.0, 0.2, 0.0, 1.0 / 3.0 - 0.2, 0.1).unwrap();
        let err = hamiltonian(&st, &unequal).unwrap_err();
        assert!(err.to_string().contains("Hamiltonian only defined for b=d"));
    }

    #[test]
    fn hamiltonian_linear_limit_is_l2_energy() {
        let p = setup(128);
        let st = state(&p, 3, 0.7);
        let lin = AbcdParams::linear_reference(0.0, 1.0 / 6.0, 0.0, 1.0 / 6.0);
        let h = hamiltonian(&st, &lin).unwrap();
        let want = st.eta.norm_l2().powi(2) + st.v.norm_l2().powi(2);
        assert!((h - want).abs() < 1e-12 * want);
    }
}
