use serde::Serialize;

use crate::energy::{energy_report, theory_g, total_energy, EnergyReport};
use crate::error::{Error, Result};
use crate::littlewood_paley::DyadicPartition;
use crate::model::WaveState;

use super::{RunConfig, SpectralState, Stepper, ThresholdReference};

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum ExitStatus {
    Completed {
        t_end: f64,
    },
    /// `U_s` first reached the threshold at `t_exist`.
    BlowUpThreshold {
        t_exist: f64,
        us: f64,
        threshold: f64,
    },
    /// A step produced non-finite values; the last valid state is kept.
    BlowUpNumeric {
        t_fail: f64,
    },
}

impl ExitStatus {
    pub fn label(&self) -> &'static str {
        match self {
            ExitStatus::Completed { .. } => "completed",
            ExitStatus::BlowUpThreshold { .. } => "blow-up-threshold",
            ExitStatus::BlowUpNumeric { .. } => "blow-up-numeric",
        }
    }

    /// Existence time of a run that stopped early.
    pub fn exit_time(&self) -> Option<f64> {
        match *self {
            ExitStatus::Completed { .. } => None,
            ExitStatus::BlowUpThreshold { t_exist, .. } => Some(t_exist),
            ExitStatus::BlowUpNumeric { t_fail } => Some(t_fail),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum RunEvent {
    Start {
        dt: f64,
        steps: usize,
        cutoff: f64,
        us0: f64,
        threshold: Option<f64>,
        classification: String,
    },
    Warning {
        message: String,
    },
    ThresholdCrossing {
        t: f64,
        us: f64,
        threshold: f64,
    },
    Exit {
        status: ExitStatus,
        steps_taken: usize,
    },
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub reports: Vec<EnergyReport>,
    pub exit: ExitStatus,
    pub final_state: WaveState,
    /// States at output steps, when `keep_states` is set.
    pub trajectory: Vec<WaveState>,
    /// States at snapshot steps, when `snapshot_every` is set.
    pub snapshots: Vec<WaveState>,
    pub events: Vec<RunEvent>,
    pub warnings: Vec<String>,
    pub dt: f64,
    pub steps_taken: usize,
    pub us0: f64,
    pub threshold: Option<f64>,
}

fn report_or_nan(p: &DyadicPartition, st: &WaveState, config: &RunConfig) -> Result<EnergyReport> {
    match energy_report(p, st, &config.params, config.s, config.r) {
        Ok(r) => Ok(r),
        Err(Error::IndefiniteEnergy { .. }) => Ok(EnergyReport {
            t: st.t,
            uj: vec![f64::NAN; p.block_count()],
            us: f64::NAN,
            ns: f64::NAN,
            h: f64::NAN,
            hamiltonian: None,
            curl_res: st.curl_residual(),
            max_eta: st.eta.max_abs(),
            blow_up: false,
        }),
        Err(e) => Err(e),
    }
}

/// Integrate from `initial` to `config.t_end` or the first threshold crossing.
///
/// The state is cut to `B(0, m)` first; `initial.w` is the frozen
/// divergence-free part and is cut the same way.
pub fn simulate(config: &RunConfig, initial: &WaveState) -> Result<SimulationOutput> {
    config.validate()?;
    let grid = initial.grid().clone();
    let stepper = Stepper::new(config, &grid, &initial.w)?;
    let partition = DyadicPartition::build(&grid)?;
    let (dt, steps) = config.step_plan();
    let w = stepper.forcing().clone();

    let mut warnings = Vec::new();
    let edge = initial.eta.edge_ratio();
    if edge > 1e-8 {
        warnings.push(format!(
            "initial surface reaches the box edge (edge/max = {edge:.3e}); periodic wrap-around"
        ));
    }
    if config.params.is_kdv_kdv() {
        warnings.push("kdv-kdv parameters: linear-regime demonstration only".to_string());
    }

    let mut y = stepper.prepare(initial);
    let mut state = y.to_wave(&w, 0.0);
    let mut first = report_or_nan(&partition, &state, config)?;
    let us0 = first.us;
    let threshold = if !us0.is_finite() {
        warnings.push("energy functional indefinite for these parameters; threshold monitor disabled".into());
        None
    } else if us0 == 0.0 && config.blow_up_reference != ThresholdReference::Absolute {
        None
    } else {
        Some(match config.blow_up_reference {
            ThresholdReference::Initial => config.blow_up_factor * us0,
            ThresholdReference::TheoryCap => theory_g(us0),
            ThresholdReference::Absolute => config.blow_up_cap.unwrap_or(f64::INFINITY),
        })
    };

    let mut events = vec![RunEvent::Start {
        dt,
        steps,
        cutoff: config.cutoff_radius(),
        us0,
        threshold,
        classification: format!("{:?}", config.params.classification()),
    }];
    events.extend(warnings.iter().map(|m| RunEvent::Warning { message: m.clone() }));

    let mut trajectory = Vec::new();
    let mut snapshots = Vec::new();
    if config.keep_states {
        trajectory.push(state.clone());
    }
    if config.snapshot_every.is_some() {
        snapshots.push(state.clone());
    }

    let crossed = |us: f64| matches!(threshold, Some(th) if us >= th);
    let finish = |reports, exit, state, trajectory, snapshots, mut events: Vec<RunEvent>, taken| {
        events.push(RunEvent::Exit {
            status: exit,
            steps_taken: taken,
        });
        Ok(SimulationOutput {
            reports,
            exit,
            final_state: state,
            trajectory,
            snapshots,
            events,
            warnings: warnings.clone(),
            dt,
            steps_taken: taken,
            us0,
            threshold,
        })
    };

    if crossed(us0) {
        first.blow_up = true;
        let th = threshold.unwrap_or(f64::NAN);
        events.push(RunEvent::ThresholdCrossing {
            t: 0.0,
            us: us0,
            threshold: th,
        });
        let exit = ExitStatus::BlowUpThreshold {
            t_exist: 0.0,
            us: us0,
            threshold: th,
        };
        return finish(vec![first], exit, state, trajectory, snapshots, events, 0);
    }
    let mut reports = vec![first];

    for k in 1..=steps {
        let t = k as f64 * dt;
        let next: SpectralState = stepper.advance(&y, dt)?;
        if !next.is_finite() {
            let exit = ExitStatus::BlowUpNumeric { t_fail: t };
            return finish(reports, exit, state, trajectory, snapshots, events, k - 1);
        }
        y = next;
        let us = if threshold.is_some() {
            total_energy(&partition, &y.eta, &y.v, &config.params, config.s, config.r)?
        } else {
            f64::NAN
        };
        let hit = crossed(us);
        let emit = hit || k % config.output_every == 0 || k == steps;
        let snap = matches!(config.snapshot_every, Some(e) if k % e == 0);
        if emit || snap {
            state = y.to_wave(&w, t);
        }
        if snap {
            snapshots.push(state.clone());
        }
        if emit {
            let mut rep = report_or_nan(&partition, &state, config)?;
            rep.blow_up = hit;
            reports.push(rep);
            if config.keep_states {
                trajectory.push(state.clone());
            }
        }
        if hit {
            let th = threshold.unwrap_or(f64::NAN);
            events.push(RunEvent::ThresholdCrossing { t, us, threshold: th });
            let exit = ExitStatus::BlowUpThreshold {
                t_exist: t,
                us,
                threshold: th,
            };
            return finish(reports, exit, state, trajectory, snapshots, events, k);
        }
    }
    if state.t != steps as f64 * dt {
        state = y.to_wave(&w, steps as f64 * dt);
    }
    finish(
        reports,
        ExitStatus::Completed { t_end: config.t_end },
        state,
        trajectory,
        snapshots,
        events,
        steps,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Field, VectorField};
    use crate::grid::{GridSpec, DEFAULT_LENGTH};
    use crate::model::AbcdParams;

    fn config() -> RunConfig {
        let grid = GridSpec::one_d(128, DEFAULT_LENGTH).unwrap();
        let mut c = RunConfig::new(AbcdParams::preset("bbm-bbm", 0.1).unwrap(), grid, 2.0);
        c.dt = Some(0.1);
        c
    }

    fn gaussian(c: &RunConfig) -> WaveState {
        let g = c.grid.build().unwrap();
        let l = c.grid.length;
        let eta = Field::from_fn(&g, |x| (-(x[0] - l / 2.0).powi(2) / 4.0).exp());
        WaveState::new(eta, VectorField::zeros(&g), VectorField::zeros(&g), 0.0).unwrap()
    }

    #[test]
    fn zero_data_runs_to_the_end() {
        let c = config();
        let g = c.grid.build().unwrap();
        let out = simulate(&c, &WaveState::zeros(&g)).unwrap();
        assert_eq!(out.exit, ExitStatus::Completed { t_end: 2.0 });
        assert_eq!(out.reports.len(), 21);
        assert!(out
            .reports
            .iter()
            .all(|r| r.us == 0.0 && r.ns == 0.0 && r.max_eta == 0.0));
    }

    #[test]
    fn unit_factor_exits_at_start() {
        let mut c = config();
        c.blow_up_factor = 1.0;
        let out = simulate(&c, &gaussian(&c)).unwrap();
        assert!(matches!(out.exit, ExitStatus::BlowUpThreshold { t_exist, .. } if t_exist == 0.0));
        assert!(out.reports[0].blow_up);
    }

    #[test]
    fn output_cadence_and_final_time() {
        let mut c = config();
        c.output_every = 3;
        let out = simulate(&c, &gaussian(&c)).unwrap();
        let times: Vec<f64> = out.reports.iter().map(|r| r.t).collect();
        assert_eq!(times.len(), 1 + 6 + 1);
        assert!((times.last().unwrap() - 2.0).abs() < 1e-12);
        assert!((out.final_state.t - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mass_is_conserved() {
        let c = config();
        let out = simulate(&c, &gaussian(&c)).unwrap();
        let m0 = gaussian(&c).eta.integral();
        let m1 = out.final_state.eta.integral();
        assert!((m1 - m0).abs() <= 1e-10 * 2.0 * m0.abs().max(1.0));
    }

    #[test]
    fn tiny_threshold_cap_is_hit() {
        let mut c = config();
        c.blow_up_reference = ThresholdReference::Absolute;
        c.blow_up_cap = Some(1e-6);
        let out = simulate(&c, &gaussian(&c)).unwrap();
        assert!(matches!(out.exit, ExitStatus::BlowUpThreshold { .. }));
    }
}
