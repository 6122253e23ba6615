use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::energy::{energy_report, long_time_bounds};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::integrator::{simulate, ExitStatus, RunConfig, SimulationOutput};
use crate::littlewood_paley::DyadicPartition;
use crate::model::InitialSpec;

use super::tools::write_run;

pub const DEFAULT_LADDER: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

pub const SCALING_HEADER: [&str; 8] = [
    "epsilon",
    "seed",
    "t_end",
    "us0",
    "t_exist",
    "eps_t_exist",
    "censored",
    "exit",
];

/// How `t_end` is chosen for each `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Horizon {
    /// `t_end = k/ε`
    Fixed { k: f64 },
    /// `t_end = factor · F(N₀)/ε` from the initial data at that `ε`.
    TheoryScaled { factor: f64 },
}

impl Default for Horizon {
    fn default() -> Self {
        Horizon::TheoryScaled { factor: 4.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Template run; `params.epsilon`, `t_end` and `seed` are overwritten per row.
    pub base: RunConfig,
    pub epsilon_ladder: Vec<f64>,
    pub initial: InitialSpec,
    pub seeds: Vec<u64>,
    pub horizon: Horizon,
}

impl SweepSpec {
    pub fn new(base: RunConfig, initial: InitialSpec) -> Self {
        SweepSpec {
            base,
            epsilon_ladder: DEFAULT_LADDER.to_vec(),
            initial,
            seeds: vec![0],
            horizon: Horizon::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ConfigInvalid(m));
        if self.epsilon_ladder.is_empty() {
            return bad("empty epsilon ladder".into());
        }
        if let Some(e) = self.epsilon_ladder.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
            return Err(Error::EpsilonOutOfRange(*e));
        }
        if self.epsilon_ladder.windows(2).any(|w| !(w[1] < w[0])) {
            return bad("epsilon ladder must be strictly decreasing".into());
        }
        if self.seeds.is_empty() {
            return bad("at least one seed required".into());
        }
        match self.horizon {
            Horizon::Fixed { k } | Horizon::TheoryScaled { factor: k } if !(k > 0.0 && k.is_finite()) => {
                bad(format!("horizon constant must be positive, got {k}"))
            }
            _ => Ok(()),
        }
    }
}

/// One `(ε, seed)` run. A censored row never carries an existence time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub epsilon: f64,
    pub seed: u64,
    pub t_end: f64,
    pub us0: f64,
    pub t_exist: Option<f64>,
    pub eps_t_exist: Option<f64>,
    pub censored: bool,
    pub exit: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingTable {
    pub rows: Vec<ScalingRow>,
    /// Extremes of `ε·T_exist` over uncensored rows.
    pub min_eps_t_exist: Option<f64>,
    pub max_eps_t_exist: Option<f64>,
}

impl ScalingTable {
    fn from_rows(rows: Vec<ScalingRow>) -> Self {
        let vals: Vec<f64> = rows.iter().filter_map(|r| r.eps_t_exist).collect();
        let min = vals.iter().copied().reduce(f64::min);
        let max = vals.iter().copied().reduce(f64::max);
        ScalingTable {
            rows,
            min_eps_t_exist: min,
            max_eps_t_exist: max,
        }
    }

    pub fn all_censored(&self) -> bool {
        self.rows.iter().all(|r| r.censored)
    }

    /// `max/min` of `ε·T_exist` over uncensored rows.
    pub fn spread(&self) -> Option<f64> {
        Some(self.max_eps_t_exist? / self.min_eps_t_exist?)
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub table: ScalingTable,
    /// One output per row, in table order.
    pub runs: Vec<SimulationOutput>,
}

fn horizon_for(spec: &SweepSpec, config: &RunConfig, seed: u64) -> Result<f64> {
    let eps = config.params.epsilon;
    match spec.horizon {
        Horizon::Fixed { k } => Ok(k / eps),
        Horizon::TheoryScaled { factor } => {
            let grid = config.grid.build()?;
            let st = spec.initial.build(&grid, seed)?;
            let p = DyadicPartition::build(&grid)?;
            let rep = energy_report(&p, &st, &config.params, config.s, config.r)?;
            let b = long_time_bounds(rep.us, st.eta.max_abs(), rep.h, eps, config.bound_constant)?;
            let t = factor * b.t_long;
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::ConfigInvalid(format!(
                    "theory-scaled horizon is {t} at epsilon = {eps}"
                )));
            }
            Ok(t)
        }
    }
}

/// Run the ladder × seeds grid and tabulate `ε·T_exist`.
///
/// Refuses parameters outside the long-time regime, naming the failed clause.
pub fn sweep_epsilon(spec: &SweepSpec, exec: Execution) -> Result<SweepOutcome> {
    if let Err(failure) = spec.base.params.long_time_gate() {
        return Err(Error::Inadmissible(format!(
            "sweep refused, parameters classified {:?}: {failure}",
            spec.base.params.classification()
        )));
    }
    spec.validate()?;
    let jobs: Vec<(f64, u64)> = spec
        .epsilon_ladder
        .iter()
        .flat_map(|&e| spec.seeds.iter().map(move |&s| (e, s)))
        .collect();
    let results = map_indexed(exec, jobs.len(), |i| -> Result<(ScalingRow, SimulationOutput)> {
        let (eps, seed) = jobs[i];
        let mut config = spec.base.clone();
        config.params = config.params.with_epsilon(eps)?;
        config.seed = seed;
        config.keep_states = false;
        config.t_end = horizon_for(spec, &config, seed)?;
        let grid = config.grid.build()?;
        let initial = spec.initial.build(&grid, seed)?;
        let out = simulate(&config, &initial)?;
        let t_exist = out.exit.exit_time();
        let row = ScalingRow {
            epsilon: eps,
            seed,
            t_end: config.t_end,
            us0: out.us0,
            t_exist,
            eps_t_exist: t_exist.map(|t| eps * t),
            censored: matches!(out.exit, ExitStatus::Completed { .. }),
            exit: out.exit.label(),
        };
        Ok((row, out))
    });
    let (rows, runs): (Vec<_>, Vec<_>) = results.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
    Ok(SweepOutcome {
        table: ScalingTable::from_rows(rows),
        runs,
    })
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_scaling_csv(path: &Path, table: &ScalingTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SCALING_HEADER)?;
    for r in &table.rows {
        w.write_record([
            r.epsilon.to_string(),
            r.seed.to_string(),
            r.t_end.to_string(),
            r.us0.to_string(),
            cell(r.t_exist),
            cell(r.eps_t_exist),
            r.censored.to_string(),
            r.exit.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `scaling.csv`, `sweep.json` and one run directory per row under `dir`.
pub fn write_sweep(dir: &Path, spec: &SweepSpec, outcome: &SweepOutcome) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_scaling_csv(&dir.join("scaling.csv"), &outcome.table)?;
    let summary = serde_json::json!({
        "min_eps_t_exist": outcome.table.min_eps_t_exist,
        "max_eps_t_exist": outcome.table.max_eps_t_exist,
        "spread": outcome.table.spread(),
        "all_censored": outcome.table.all_censored(),
        "rows": outcome.table.rows,
    });
    std::fs::write(dir.join("sweep.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    for (row, run) in outcome.table.rows.iter().zip(&outcome.runs) {
        let mut config = spec.base.clone();
        config.params = config.params.with_epsilon(row.epsilon)?;
        config.seed = row.seed;
        config.t_end = row.t_end;
        let name = format!("eps_{}_seed_{}", row.epsilon, row.seed);
        write_run(&dir.join(name), &config, run)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, DEFAULT_LENGTH};
    use crate::model::{AbcdParams, Profile, VelocityProfile};

    fn spec(amplitude: f64) -> SweepSpec {
        let grid = GridSpec::one_d(64, DEFAULT_LENGTH).unwrap();
        let mut base = RunConfig::new(AbcdParams::preset("bbm-bbm", 0.1).unwrap(), grid, 1.0);
        base.output_every = 1000;
        let initial = InitialSpec {
            eta: Profile::Gaussian {
                amplitude,
                width: 4.0,
                center: None,
            },
            ..InitialSpec::default()
        };
        let mut s = SweepSpec::new(base, initial);
        s.epsilon_ladder = vec![0.5, 0.25];
        s.horizon = Horizon::Fixed { k: 0.5 };
        s
    }

    #[test]
    fn zero_amplitude_is_censored_everywhere() {
        let out = sweep_epsilon(&spec(0.0), Execution::Sequential).unwrap();
        assert!(out.table.all_censored());
        assert!(out
            .table
            .rows
            .iter()
            .all(|r| r.t_exist.is_none() && r.eps_t_exist.is_none()));
        assert_eq!(out.table.spread(), None);
        assert!((out.table.rows[1].t_end - 2.0).abs() < 1e-12);
    }

    #[test]
    fn excluded_parameters_are_refused_by_clause() {
        let mut s = spec(1.0);
        s.base.params = AbcdParams::preset("excluded-1", 0.1).unwrap();
        let err = sweep_epsilon(&s, Execution::Sequential).unwrap_err().to_string();
        assert!(err.contains("excluded case a=d=0, c<0, b>0"), "{err}");
        s.base.params = AbcdParams::preset("kdv-kdv", 0.1).unwrap();
        let err = sweep_epsilon(&s, Execution::Sequential).unwrap_err().to_string();
        assert!(err.contains("a <= 0"), "{err}");
    }

    #[test]
    fn ladder_must_decrease() {
        let mut s = spec(1.0);
        s.epsilon_ladder = vec![0.1, 0.2];
        assert!(matches!(
            sweep_epsilon(&s, Execution::Sequential),
            Err(Error::ConfigInvalid(_))
        ));
        s.epsilon_ladder = vec![1.5];
        assert!(matches!(
            sweep_epsilon(&s, Execution::Sequential),
            Err(Error::EpsilonOutOfRange(_))
        ));
    }

    #[test]
    fn growing_energy_gives_uncensored_rows() {
        let mut s = spec(1.0);
        let bump = Profile::Gaussian {
            amplitude: 1.0,
            width: 1.0,
            center: None,
        };
        s.initial = InitialSpec {
            eta: bump.clone(),
            velocity: VelocityProfile::Potential { profile: bump },
        };
        s.epsilon_ladder = vec![0.5, 0.4];
        s.horizon = Horizon::Fixed { k: 2.0 };
        s.base.blow_up_factor = 1.01;
        let out = sweep_epsilon(&s, Execution::Parallel).unwrap();
        for r in &out.table.rows {
            assert!(!r.censored, "{r:?}");
            assert!(r.t_exist.unwrap() > 0.0 && r.t_exist.unwrap() < r.t_end);
            assert_eq!(r.eps_t_exist, r.t_exist.map(|t| t * r.epsilon));
        }
        assert!(out.table.spread().unwrap() >= 1.0);
    }

    #[test]
    fn theory_horizon_is_positive() {
        let mut s = spec(1.0);
        s.horizon = Horizon::default();
        s.epsilon_ladder = vec![0.5];
        let out = sweep_epsilon(&s, Execution::Sequential).unwrap();
        assert!(out.table.rows[0].t_end > 0.0);
    }
}
