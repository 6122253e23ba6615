use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::energy::{block_energy, block_identity, energy_report};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::field::{Field, VectorField};
use crate::grid::{GridSpec, DEFAULT_LENGTH};
use crate::integrator::{simulate, RunConfig, Stepper};
use crate::littlewood_paley::{block_profile, DyadicPartition, Summability};
use crate::model::{validate_params, AbcdParams, InitialSpec, Profile, VelocityProfile, WaveState};
use crate::spectral;

pub const SUITES: [&str; 6] = ["partition", "blocks", "leray", "energy", "commutator", "conservation"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub comparison: Comparison,
    pub tolerance: f64,
}

impl Check {
    fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            passed: measured <= tolerance,
            measured,
            comparison: Comparison::AtMost,
            tolerance,
        }
    }

    fn at_least(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            passed: measured >= tolerance,
            measured,
            comparison: Comparison::AtLeast,
            tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Measured constants that are reported but not asserted.
    pub fitted: BTreeMap<String, f64>,
    pub seconds: f64,
}

/// Sample sizes and seeds of the suites.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Grid of the partition, block and energy suites.
    pub grid: GridSpec,
    pub random_fields: usize,
    pub random_states: usize,
    pub commutator_pairs: usize,
    pub s: f64,
    pub r: Summability,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            grid: GridSpec {
                dim: 1,
                length: DEFAULT_LENGTH,
                points: 512,
            },
            random_fields: 100,
            random_states: 1000,
            commutator_pairs: 200,
            s: 1.0,
            r: Summability::TWO,
            seed: 0,
        }
    }
}

/// Run one suite, or every suite for `"all"`.
pub fn verify(suite: &str, opts: &VerifyOptions, exec: Execution) -> Result<Vec<VerifyReport>> {
    if suite == "all" {
        return SUITES.iter().map(|s| run_suite(s, opts, exec)).collect();
    }
    Ok(vec![run_suite(suite, opts, exec)?])
}

fn run_suite(suite: &str, opts: &VerifyOptions, exec: Execution) -> Result<VerifyReport> {
    let start = Instant::now();
    let mut fitted = BTreeMap::new();
    let checks = match suite {
        "partition" => partition(opts)?,
        "blocks" => blocks(opts, exec)?,
        "leray" => leray(opts, exec)?,
        "energy" => energy(opts, exec)?,
        "commutator" => commutator(opts, exec, &mut fitted)?,
        "conservation" => conservation(exec, &mut fitted)?,
        other => return Err(Error::UnknownSuite(other.to_string())),
    };
    Ok(VerifyReport {
        suite: suite.to_string(),
        passed: checks.iter().all(|c| c.passed),
        checks,
        fitted,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Sum, overlap and square-sum defects of a family of block symbols.
fn partition_defects(symbols: &[Vec<f64>]) -> (f64, f64, f64) {
    let modes = symbols[0].len();
    let (mut sum_err, mut overlap, mut square_err) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..modes {
        let sum: f64 = symbols.iter().map(|s| s[k]).sum();
        let sq: f64 = symbols.iter().map(|s| s[k] * s[k]).sum();
        sum_err = sum_err.max((sum - 1.0).abs());
        square_err = square_err.max(0.5 - sq).max(sq - 1.0);
        for i in 0..symbols.len() {
            for j in i + 2..symbols.len() {
                overlap = overlap.max((symbols[i][k] * symbols[j][k]).abs());
            }
        }
    }
    (sum_err, overlap, square_err.max(0.0))
}

fn partition(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let grid = opts.grid.build()?;
    let p = DyadicPartition::build(&grid)?;
    let on_grid: Vec<Vec<f64>> = p
        .block_indices()
        .map(|j| p.symbol(j).map(<[f64]>::to_vec))
        .collect::<Result<_>>()?;
    let (s1, o1, q1) = partition_defects(&on_grid);

    // dense radial sampling beyond the grid, with every block that can be nonzero there
    let r_max = 2f64.powi(p.j_max() + 2);
    let samples = 200_001;
    let radii: Vec<f64> = (0..samples).map(|i| r_max * i as f64 / (samples - 1) as f64).collect();
    let dense: Vec<Vec<f64>> = (-1..=p.j_max() + 3)
        .map(|j| radii.iter().map(|&r| block_profile(j, r)).collect())
        .collect();
    let (s2, o2, q2) = partition_defects(&dense);

    let tol = 1e-12;
    Ok(vec![
        Check::at_most("sum of blocks equals one (grid modes)", s1, tol),
        Check::at_most("blocks |j-j'| >= 2 have disjoint support (grid modes)", o1, tol),
        Check::at_most("1/2 <= sum of squares <= 1 (grid modes)", q1, tol),
        Check::at_most("sum of blocks equals one (radial samples)", s2, tol),
        Check::at_most("blocks |j-j'| >= 2 have disjoint support (radial samples)", o2, tol),
        Check::at_most("1/2 <= sum of squares <= 1 (radial samples)", q2, tol),
    ])
}

fn blocks(opts: &VerifyOptions, exec: Execution) -> Result<Vec<Check>> {
    let grid = opts.grid.build()?;
    let p = DyadicPartition::build(&grid)?;
    let k_all = grid.max_abs();
    let per_field = map_indexed(exec, opts.random_fields, |i| -> Result<(f64, f64)> {
        let u = Field::random_band_limited(&grid, k_all, 1.0, opts.seed.wrapping_add(i as u64));
        let norm = u.norm_l2();
        let parts = p
            .block_indices()
            .map(|j| p.dyadic_block(&u, j))
            .collect::<Result<Vec<_>>>()?;
        let mut rebuilt = Field::zeros(&grid);
        for b in &parts {
            rebuilt.axpy(1.0, b)?;
        }
        let recon = rebuilt.sub(&u)?.norm_l2() / norm;
        let mut cross: f64 = 0.0;
        for (a, part) in p.block_indices().zip(&parts) {
            for b in p.block_indices().filter(|b| (b - a).abs() >= 2) {
                cross = cross.max(p.dyadic_block(part, b)?.norm_l2() / norm);
            }
        }
        Ok((recon, cross))
    });
    let per_field = per_field.into_iter().collect::<Result<Vec<_>>>()?;
    let recon = per_field.iter().map(|x| x.0).fold(0.0, f64::max);
    let cross = per_field.iter().map(|x| x.1).fold(0.0, f64::max);
    Ok(vec![
        Check::at_most("reconstruction |u - sum_j D_j u| / |u|", recon, 1e-12),
        Check::at_most("D_j D_l u = 0 for |j-l| >= 2, relative", cross, 1e-12),
    ])
}

fn leray(opts: &VerifyOptions, exec: Execution) -> Result<Vec<Check>> {
    let spec = GridSpec::two_d(128, DEFAULT_LENGTH)?;
    let grid = spec.build()?;
    let per_field = map_indexed(exec, opts.random_fields.clamp(1, 20), |i| -> Result<(f64, f64)> {
        let v = VectorField::random_band_limited(&grid, 2.0, 1.0, opts.seed.wrapping_add(i as u64));
        let pv = spectral::leray_project(&v);
        let div = spectral::divergence(&pv).norm_l2() / v.norm_l2();
        let idem = spectral::leray_project(&pv).sub(&pv)?.norm_l2() / v.norm_l2();
        Ok((div, idem))
    });
    let per_field = per_field.into_iter().collect::<Result<Vec<_>>>()?;
    let div = per_field.iter().map(|x| x.0).fold(0.0, f64::max);
    let idem = per_field.iter().map(|x| x.1).fold(0.0, f64::max);

    let mut config = RunConfig::new(AbcdParams::preset("bbm-bbm", 0.05)?, spec, 5.0);
    config.seed = opts.seed;
    let initial = InitialSpec {
        eta: Profile::Gaussian {
            amplitude: 1.0,
            width: 4.0,
            center: None,
        },
        velocity: VelocityProfile::RandomBandLimited {
            amplitude: 0.5,
            k_max: 1.5,
            seed: None,
        },
    }
    .build(&grid, opts.seed)?;
    let out = simulate(&config, &initial)?;
    let curl = out.reports.iter().map(|r| r.curl_res).fold(0.0, f64::max);
    let finished = out.exit.exit_time().is_none() as u8 as f64;
    Ok(vec![
        Check::at_most("|div P v| / |v|", div, 1e-12),
        Check::at_most("|P P v - P v| / |v|", idem, 1e-12),
        Check::at_most("curl residual along a 2D run (max over outputs)", curl, 1e-8),
        Check::at_least("2D run reached t_end", finished, 1.0),
    ])
}

/// Long-time admissible quadruples used for random states.
const ADMISSIBLE: [[f64; 4]; 5] = [
    [0.0, 1.0 / 6.0, 0.0, 1.0 / 6.0],
    [0.0, 1.0 / 3.0, -1.0 / 3.0, 1.0 / 3.0],
    [-1.0 / 6.0, 1.0 / 3.0, 0.0, 1.0 / 6.0],
    [0.0, 1.0 / 6.0, -1.0 / 6.0, 1.0 / 3.0],
    [-1.0 / 12.0, 1.0 / 4.0, -1.0 / 12.0, 1.0 / 4.0],
];

/// Largest relative violation of `U_s <= N_s <= (1+2ε‖η‖∞)^{1/2} U_s`.
pub(crate) fn sandwich_violation(opts: &VerifyOptions, exec: Execution) -> Result<f64> {
    let grid = opts.grid.build()?;
    let p = DyadicPartition::build(&grid)?;
    let k_max = grid.max_abs() / 2.0;
    let per_state = map_indexed(exec, opts.random_states, |i| -> Result<f64> {
        let seed = opts.seed.wrapping_add(i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let [a, b, c, d] = ADMISSIBLE[rng.random_range(0..ADMISSIBLE.len())];
        let eps = rng.random_range(1e-3..=1.0);
        let params = validate_params(a, b, c, d, eps)?;
        let eta = Field::random_band_limited(&grid, k_max, rng.random_range(0.01..5.0), rng.random());
        let vbar = VectorField::random_band_limited(&grid, k_max, rng.random_range(0.01..5.0), rng.random());
        let st = WaveState::from_initial(eta, &vbar)?;
        let rep = energy_report(&p, &st, &params, opts.s, opts.r)?;
        let upper = (1.0 + 2.0 * eps * st.eta.max_abs()).sqrt() * rep.us;
        Ok(((rep.us - rep.ns) / rep.us).max((rep.ns - upper) / upper).max(0.0))
    });
    Ok(per_state
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max))
}

/// Relative mismatch between the centred difference of `E_j` with step
/// `dt` and the assembled balance, for each `j` in `blocks`, on a nonlinear
/// BBM-BBM state reached at `t0`.
pub(crate) fn identity_mismatch(blocks: &[i32], t0: f64, dt: f64) -> Result<Vec<(i32, f64, f64)>> {
    let spec = GridSpec::one_d(512, DEFAULT_LENGTH)?;
    let grid = spec.build()?;
    let params = AbcdParams::preset("bbm-bbm", 0.1)?;
    let mut config = RunConfig::new(params, spec, t0);
    config.output_every = usize::MAX;
    let initial = InitialSpec::default().build(&grid, 0)?;
    let reached = simulate(&config, &initial)?.final_state;

    let stepper = Stepper::new(&config, &grid, &reached.w)?;
    let y = stepper.prepare(&reached);
    let here = y.to_wave(stepper.forcing(), t0);
    let fwd = stepper.advance(&y, dt)?.to_wave(stepper.forcing(), t0 + dt);
    let back = stepper.advance(&y, -dt)?.to_wave(stepper.forcing(), t0 - dt);
    let p = DyadicPartition::build(&grid)?;
    blocks
        .iter()
        .map(|&j| {
            let fd = (block_energy(&p, &fwd, &params, j)? - block_energy(&p, &back, &params, j)?) / (2.0 * dt);
            let predicted = block_identity(&p, &here, &params, j)?.rate;
            Ok((
                j,
                predicted,
                (fd - predicted).abs() / predicted.abs().max(f64::MIN_POSITIVE),
            ))
        })
        .collect()
}

fn energy(opts: &VerifyOptions, exec: Execution) -> Result<Vec<Check>> {
    let mut checks = vec![Check::at_most(
        format!(
            "U_s <= N_s <= (1+2 eps |eta|_inf)^(1/2) U_s over {} random states",
            opts.random_states
        ),
        sandwich_violation(opts, exec)?,
        1e-10,
    )];
    for (j, _, err) in identity_mismatch(&[-1, 0, 1], 1.0, 1e-4)? {
        checks.push(Check::at_most(
            format!("block {j} energy balance vs centred difference"),
            err,
            1e-4,
        ));
    }
    Ok(checks)
}

/// `sup LHS/RHS` of the commutator and product estimates over random
/// band-limited pairs on an `N`-point grid.
pub(crate) fn commutator_constants(
    points: usize,
    pairs: usize,
    s: f64,
    r: Summability,
    seed: u64,
    exec: Execution,
) -> Result<(f64, f64)> {
    let spec = GridSpec::one_d(points, DEFAULT_LENGTH)?;
    let grid = spec.build()?;
    let p = DyadicPartition::build(&grid)?;
    // products stay alias-free below a quarter of the index range
    let k_max = (points / 4 - 1) as f64 * spec.base_wavenumber();
    let ratios = map_indexed(exec, pairs, |i| -> Result<(f64, f64)> {
        let seed = seed.wrapping_add(2 * i as u64);
        let u = Field::random_band_limited(&grid, k_max, 1.0, seed);
        let v = Field::random_band_limited(&grid, k_max, 1.0, seed + 1);
        Ok((p.commutator_ratio(&u, &v, s, r)?, p.product_ratio(&u, &v, s, r)?))
    });
    let ratios = ratios.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((
        ratios.iter().map(|x| x.0).fold(0.0, f64::max),
        ratios.iter().map(|x| x.1).fold(0.0, f64::max),
    ))
}

fn commutator(opts: &VerifyOptions, exec: Execution, fitted: &mut BTreeMap<String, f64>) -> Result<Vec<Check>> {
    let (c256, p256) = commutator_constants(256, opts.commutator_pairs, opts.s, opts.r, opts.seed, exec)?;
    let (c512, p512) = commutator_constants(512, opts.commutator_pairs, opts.s, opts.r, opts.seed, exec)?;
    fitted.insert("commutator_N256".into(), c256);
    fitted.insert("commutator_N512".into(), c512);
    fitted.insert("product_N256".into(), p256);
    fitted.insert("product_N512".into(), p512);
    Ok(vec![
        Check::at_most("commutator constant N=512 / N=256", c512 / c256, 2.0),
        Check::at_least("commutator constant N=256 is positive", c256, f64::MIN_POSITIVE),
    ])
}

/// Drift of the Hamiltonian `max_t |H(t) − H(0)| / |H(0)|` and of the mass
/// per unit time for the b = d run used by the conservation suite.
pub(crate) fn hamiltonian_drift(dt: f64, t_end: f64) -> Result<(f64, f64)> {
    let spec = GridSpec::one_d(512, DEFAULT_LENGTH)?;
    let grid = spec.build()?;
    let params = validate_params(0.0, 1.0 / 6.0, 0.0, 1.0 / 6.0, 0.1)?;
    let mut config = RunConfig::new(params, spec, t_end);
    config.dt = Some(dt);
    config.output_every = ((0.1 / dt).round() as usize).max(1);
    let initial = InitialSpec {
        eta: Profile::Gaussian {
            amplitude: 1.0,
            width: 0.25,
            center: None,
        },
        velocity: VelocityProfile::Zero,
    }
    .build(&grid, 0)?;
    let out = simulate(&config, &initial)?;
    let hs: Vec<f64> = out.reports.iter().filter_map(|r| r.hamiltonian).collect();
    let h0 = hs[0];
    let drift = hs.iter().map(|h| (h - h0).abs() / h0.abs()).fold(0.0, f64::max);
    let mass = (out.final_state.eta.integral() - initial.eta.integral()).abs() / t_end;
    Ok((drift, mass))
}

/// Frequency of a sampled standing wave `A cos(ωt)` from three-term
/// recurrences: `cos(ωΔ) = Σ x_n (x_{n+1} + x_{n−1}) / (2 Σ x_n²)`.
pub fn prony_frequency(samples: &[f64], spacing: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for n in 1..samples.len() - 1 {
        num += samples[n] * (samples[n + 1] + samples[n - 1]);
        den += 2.0 * samples[n] * samples[n];
    }
    (num / den).clamp(-1.0, 1.0).acos() / spacing
}

/// Measured `ω` of a single-mode run with amplitude `1e-8` at integer mode
/// `mode` on the default 1D grid.
pub fn measured_frequency(params: &AbcdParams, mode: i64) -> Result<f64> {
    let spec = GridSpec::one_d(512, DEFAULT_LENGTH)?;
    let grid = spec.build()?;
    let mut config = RunConfig::new(*params, spec, 20.0);
    config.dt = Some(0.01);
    config.output_every = 10;
    config.keep_states = true;
    let initial = InitialSpec {
        eta: Profile::SingleMode {
            amplitude: 1e-8,
            mode: [mode, 0],
            phase: 0.0,
        },
        velocity: VelocityProfile::Zero,
    }
    .build(&grid, 0)?;
    let out = simulate(&config, &initial)?;
    let idx = grid.mode_index([mode, 0]);
    let series: Vec<f64> = out
        .trajectory
        .iter()
        .map(|st| st.eta.spectrum().coeffs()[idx].re)
        .collect();
    Ok(prony_frequency(&series, 0.1))
}

fn conservation(exec: Execution, fitted: &mut BTreeMap<String, f64>) -> Result<Vec<Check>> {
    let runs = map_indexed(exec, 2, |i| hamiltonian_drift(if i == 0 { 1e-3 } else { 5e-4 }, 10.0));
    let (d1, m1) = runs[0].as_ref().map_err(|e| Error::ConfigInvalid(e.to_string()))?;
    let (d2, _) = runs[1].as_ref().map_err(|e| Error::ConfigInvalid(e.to_string()))?;
    fitted.insert("hamiltonian_drift_dt_1e-3".into(), *d1);
    fitted.insert("hamiltonian_drift_dt_5e-4".into(), *d2);

    let presets = ["bbm-bbm", "bona-smith", "kdv-kdv"];
    let modes = [8i64, 16, 32, 48, 64];
    let jobs: Vec<(&str, i64)> = presets
        .iter()
        .flat_map(|p| modes.iter().map(move |m| (*p, *m)))
        .collect();
    let errs = map_indexed(exec, jobs.len(), |i| -> Result<f64> {
        let (name, mode) = jobs[i];
        let params = AbcdParams::preset(name, 0.1)?;
        let k = mode as f64 * GridSpec::one_d(512, DEFAULT_LENGTH)?.base_wavenumber();
        let exact = params.dispersion_omega_sq(k).sqrt();
        Ok((measured_frequency(&params, mode)? - exact).abs() / exact)
    });
    let disp = errs
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    Ok(vec![
        Check::at_most("relative Hamiltonian drift, dt = 1e-3, T = 10", *d1, 1e-6),
        Check::at_least("drift ratio under dt halving", d1 / d2, 8.0),
        Check::at_most("mass drift per unit time", *m1, 1e-10),
        Check::at_most("single-mode frequency vs dispersion relation, relative", disp, 1e-6),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_an_error() {
        let err = verify("nope", &VerifyOptions::default(), Execution::Sequential).unwrap_err();
        assert!(matches!(err, Error::UnknownSuite(_)));
    }

    #[test]
    fn partition_suite_passes() {
        let rep = verify("partition", &VerifyOptions::default(), Execution::Sequential).unwrap();
        assert!(rep[0].passed, "{:?}", rep[0].checks);
    }

    #[test]
    fn prony_recovers_a_cosine() {
        let w = 1.2345;
        let xs: Vec<f64> = (0..300).map(|n| (w * n as f64 * 0.1).cos()).collect();
        assert!((prony_frequency(&xs, 0.1) - w).abs() < 1e-12);
    }

    #[test]
    fn small_audits_pass() {
        let opts = VerifyOptions {
            random_fields: 5,
            random_states: 20,
            commutator_pairs: 10,
            ..Default::default()
        };
        for suite in ["blocks", "commutator"] {
            let rep = verify(suite, &opts, Execution::Parallel).unwrap();
            assert!(rep[0].passed, "{suite}: {:?}", rep[0].checks);
        }
        assert!(sandwich_violation(&opts, Execution::Parallel).unwrap() <= 1e-10);
    }
}
