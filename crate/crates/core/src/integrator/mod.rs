//! Explicit Runge-Kutta stepping of the Friedrichs-truncated system,
//! `∂ₜη = E_m F(η, V)`, `∂ₜV = E_m G(η, V)`, with blow-up detection.
//!
//! The stepper carries the state as spectra so that the cutoff's zeros stay
//! exact across stages; physical fields are rebuilt only for products and
//! for diagnostics.

mod output;
mod refinement;
mod simulate;

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Spectrum, VectorField};
use crate::grid::{Grid, GridSpec};
use crate::littlewood_paley::Summability;
use crate::model::{apply_mask, rhs_spectra, AbcdParams, Profile, WaveState};

pub use output::{read_energy_csv, write_energy_csv, write_events, EnergyRow, ENERGY_HEADER};
pub use refinement::{m_refinement_study, RefinementRow, RefinementStudy};
pub use simulate::{simulate, ExitStatus, RunEvent, SimulationOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Rk4,
    Rk2,
}

/// What the blow-up threshold is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdReference {
    /// `factor · U_s(0)`
    #[default]
    Initial,
    /// `G(U_s(0))`
    TheoryCap,
    /// The fixed value `blow_up_cap`.
    Absolute,
}

fn default_s() -> f64 {
    1.0
}
fn default_r() -> Summability {
    Summability::TWO
}
fn default_factor() -> f64 {
    4.0
}
fn default_one() -> usize {
    1
}
fn default_constant() -> f64 {
    1.0
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: AbcdParams,
    pub grid: GridSpec,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default = "default_r")]
    pub r: Summability,
    /// Cutoff radius; `None` uses the dealiasing radius.
    #[serde(default)]
    pub m: Option<f64>,
    /// Step size; `None` picks one from the dispersion relation.
    #[serde(default)]
    pub dt: Option<f64>,
    pub t_end: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_factor")]
    pub blow_up_factor: f64,
    #[serde(default)]
    pub blow_up_reference: ThresholdReference,
    #[serde(default)]
    pub blow_up_cap: Option<f64>,
    #[serde(default = "default_one")]
    pub output_every: usize,
    #[serde(default)]
    pub seed: u64,
    /// The constant `C` used in the theoretical bounds.
    #[serde(default = "default_constant")]
    pub bound_constant: f64,
    #[serde(default)]
    pub topography: Option<Profile>,
    #[serde(default)]
    pub snapshot_every: Option<usize>,
    /// Keep the state at every output step in memory.
    #[serde(default)]
    pub keep_states: bool,
}

impl RunConfig {
    pub fn new(params: AbcdParams, grid: GridSpec, t_end: f64) -> Self {
        RunConfig {
            params,
            grid,
            s: default_s(),
            r: default_r(),
            m: None,
            dt: None,
            t_end,
            scheme: Scheme::Rk4,
            blow_up_factor: default_factor(),
            blow_up_reference: ThresholdReference::Initial,
            blow_up_cap: None,
            output_every: 1,
            seed: 0,
            bound_constant: default_constant(),
            topography: None,
            snapshot_every: None,
            keep_states: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        self.grid.validate()?;
        self.params.require_evolvable()?;
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("dt must be positive, got {dt}"));
            }
        }
        if let Some(m) = self.m {
            let limit = self.grid.dealias_radius();
            if !(m > 0.0) || m > limit * (1.0 + 1e-12) {
                return bad(format!("cutoff m = {m} must lie in (0, {limit}]"));
            }
        }
        if !self.s.is_finite() {
            return bad("Besov index s must be finite".into());
        }
        if self.output_every == 0 {
            return bad("output_every must be at least 1".into());
        }
        if self.snapshot_every == Some(0) {
            return bad("snapshot_every must be at least 1".into());
        }
        if !(self.blow_up_factor > 0.0) {
            return bad(format!("blow_up_factor must be positive, got {}", self.blow_up_factor));
        }
        if self.blow_up_reference == ThresholdReference::Absolute && !matches!(self.blow_up_cap, Some(c) if c > 0.0) {
            return bad("absolute threshold needs a positive blow_up_cap".into());
        }
        if !(self.bound_constant > 0.0) {
            return bad("bound_constant must be positive".into());
        }
        Ok(())
    }

    pub fn cutoff_radius(&self) -> f64 {
        self.m.unwrap_or_else(|| self.grid.dealias_radius())
    }

    /// Step actually used: the requested or default step shrunk so that an
    /// integer number of steps lands on `t_end`.
    pub fn step_plan(&self) -> (f64, usize) {
        let dt = self
            .dt
            .unwrap_or_else(|| default_dt(&self.params, &self.grid, self.cutoff_radius()));
        let n = ((self.t_end / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        (self.t_end / n as f64, n)
    }
}

/// `dt = min(0.5·Δx/c_max, 1/ω_max)` over `0 < k <= m`, where `c_max` is
/// the largest group speed of the linear dispersion relation.
pub fn default_dt(params: &AbcdParams, grid: &GridSpec, m: f64) -> f64 {
    let samples = 4000;
    let omega = |k: f64| params.dispersion_omega_sq(k).max(0.0).sqrt();
    let mut c_max: f64 = 0.0;
    let mut w_max: f64 = 0.0;
    let mut prev = 0.0;
    for i in 1..=samples {
        let k = m * i as f64 / samples as f64;
        let w = omega(k);
        c_max = c_max.max((w - prev).abs() / (m / samples as f64));
        w_max = w_max.max(w);
        prev = w;
    }
    let mut dt = f64::INFINITY;
    if c_max > 0.0 {
        dt = dt.min(0.5 * grid.spacing() / c_max);
    }
    if w_max > 0.0 {
        dt = dt.min(1.0 / w_max);
    }
    if dt.is_finite() {
        dt
    } else {
        grid.spacing()
    }
}

/// Indicator of the closed ball `|ξ| <= m`.
pub fn cutoff_mask(grid: &Grid, m: f64) -> Vec<bool> {
    let mm = m * m * (1.0 + 1e-12);
    grid.abs_sq().iter().map(|&s| s <= mm).collect()
}

/// `E_m` applied to a spectrum in place.
pub fn friedrichs_cutoff_spectrum(s: &mut Spectrum, m: f64) -> Result<()> {
    if !(m > 0.0) {
        return Err(Error::ConfigInvalid(format!("cutoff radius must be positive, got {m}")));
    }
    let mask = cutoff_mask(s.grid(), m);
    apply_mask(s, &mask);
    Ok(())
}

/// `E_m f = F⁻¹(1_{|ξ|<=m} f̂)`.
pub fn friedrichs_cutoff(field: &Field, m: f64) -> Result<Field> {
    let mut s = field.spectrum();
    friedrichs_cutoff_spectrum(&mut s, m)?;
    Ok(s.to_field())
}

/// `(η̂, V̂)` as carried by the stepper.
#[derive(Debug, Clone)]
pub struct SpectralState {
    pub eta: Spectrum,
    pub v: Vec<Spectrum>,
}

impl SpectralState {
    fn from_wave(st: &WaveState, mask: &[bool]) -> Self {
        let mut eta = st.eta.spectrum();
        apply_mask(&mut eta, mask);
        let v =
            st.v.components()
                .iter()
                .map(|c| {
                    let mut s = c.spectrum();
                    apply_mask(&mut s, mask);
                    s
                })
                .collect();
        SpectralState { eta, v }
    }

    pub fn to_wave(&self, w: &VectorField, t: f64) -> WaveState {
        WaveState {
            eta: self.eta.to_field(),
            v: VectorField::from_spectra(&self.v),
            w: w.clone(),
            t,
        }
    }

    pub fn is_finite(&self) -> bool {
        let ok = |s: &Spectrum| s.coeffs().iter().all(|c| c.re.is_finite() && c.im.is_finite());
        ok(&self.eta) && self.v.iter().all(ok)
    }

    /// Largest coefficient magnitude outside the mask.
    pub fn mass_outside(&self, mask: &[bool]) -> f64 {
        let leak = |s: &Spectrum| {
            s.coeffs()
                .iter()
                .zip(mask)
                .filter(|(_, &m)| !m)
                .fold(0.0f64, |a, (c, _)| a.max(c.norm()))
        };
        self.v.iter().map(leak).fold(leak(&self.eta), f64::max)
    }

    /// `self + a·k`.
    fn plus(&self, a: f64, k: &SpectralState) -> SpectralState {
        let comb = |x: &Spectrum, y: &Spectrum| {
            let coeffs: Vec<Complex64> = x.coeffs().iter().zip(y.coeffs()).map(|(p, q)| p + q * a).collect();
            Spectrum::from_coeffs(x.grid(), coeffs).expect("same grid")
        };
        SpectralState {
            eta: comb(&self.eta, &k.eta),
            v: self.v.iter().zip(&k.v).map(|(x, y)| comb(x, y)).collect(),
        }
    }
}

/// The truncated right-hand side with its fixed data.
#[derive(Debug, Clone)]
pub struct Stepper {
    params: AbcdParams,
    grid: Arc<Grid>,
    mask: Vec<bool>,
    w: VectorField,
    topography: Option<Field>,
    scheme: Scheme,
}

impl Stepper {
    /// Build from a config; `w` is cut to the ball before use.
    pub fn new(config: &RunConfig, grid: &Arc<Grid>, w: &VectorField) -> Result<Self> {
        config.validate()?;
        if *grid.spec() != config.grid {
            return Err(Error::GridMismatch {
                left: config.grid,
                right: *grid.spec(),
            });
        }
        let m = config.cutoff_radius();
        let mask = cutoff_mask(grid, m);
        let w = VectorField::new(
            w.components()
                .iter()
                .map(|c| friedrichs_cutoff(c, m))
                .collect::<Result<_>>()?,
        )?;
        let topography = match &config.topography {
            Some(p) => Some(friedrichs_cutoff(&p.sample(grid, config.seed)?, m)?),
            None => None,
        };
        Ok(Stepper {
            params: config.params,
            grid: grid.clone(),
            mask,
            w,
            topography,
            scheme: config.scheme,
        })
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn forcing(&self) -> &VectorField {
        &self.w
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Cut a state to the ball and switch to the spectral representation.
    pub fn prepare(&self, st: &WaveState) -> SpectralState {
        SpectralState::from_wave(st, &self.mask)
    }

    pub fn tendency(&self, y: &SpectralState) -> Result<SpectralState> {
        let eta = y.eta.to_field();
        let v = VectorField::from_spectra(&y.v);
        let (deta, dv) = rhs_spectra(
            &eta,
            &y.eta,
            &v,
            &y.v,
            &self.w,
            &self.params,
            self.topography.as_ref(),
            Some(&self.mask),
        )?;
        Ok(SpectralState { eta: deta, v: dv })
    }

    /// One step of size `dt` (negative steps integrate backwards).
    pub fn advance(&self, y: &SpectralState, dt: f64) -> Result<SpectralState> {
        match self.scheme {
            Scheme::Rk4 => {
                let k1 = self.tendency(y)?;
                let k2 = self.tendency(&y.plus(0.5 * dt, &k1))?;
                let k3 = self.tendency(&y.plus(0.5 * dt, &k2))?;
                let k4 = self.tendency(&y.plus(dt, &k3))?;
                Ok(y.plus(dt / 6.0, &k1)
                    .plus(dt / 3.0, &k2)
                    .plus(dt / 3.0, &k3)
                    .plus(dt / 6.0, &k4))
            }
            Scheme::Rk2 => {
                let k1 = self.tendency(y)?;
                let k2 = self.tendency(&y.plus(0.5 * dt, &k1))?;
                Ok(y.plus(dt, &k2))
            }
        }
    }
}

/// One step of the truncated system with the configured (or default) step.
pub fn step(state: &WaveState, config: &RunConfig) -> Result<WaveState> {
    let dt = config.dt.unwrap_or_else(|| config.step_plan().0);
    step_with_dt(state, config, dt)
}

pub fn step_with_dt(state: &WaveState, config: &RunConfig, dt: f64) -> Result<WaveState> {
    let stepper = Stepper::new(config, state.grid(), &state.w)?;
    let y = stepper.advance(&stepper.prepare(state), dt)?;
    if !y.is_finite() {
        return Err(Error::BlowUpNumeric { t: state.t + dt });
    }
    Ok(y.to_wave(stepper.forcing(), state.t + dt))
}
