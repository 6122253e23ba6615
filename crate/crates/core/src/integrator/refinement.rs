use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::model::WaveState;

use super::{default_dt, simulate, ExitStatus, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefinementRow {
    pub m_coarse: f64,
    pub m_fine: f64,
    /// `(‖Δη‖² + ‖ΔV‖²)^{1/2}` between the two runs at `t_end`.
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementStudy {
    pub rows: Vec<RefinementRow>,
    pub warnings: Vec<String>,
}

/// Run the same problem at each cutoff in `m_list` and report distances
/// between successive solutions at `t_end`. All runs share one step size.
pub fn m_refinement_study(
    config: &RunConfig,
    initial: &WaveState,
    m_list: &[f64],
    exec: Execution,
) -> Result<RefinementStudy> {
    if m_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::ConfigInvalid("m_list must be strictly increasing".into()));
    }
    if m_list.len() < 2 {
        return Ok(RefinementStudy {
            rows: Vec::new(),
            warnings: Vec::new(),
        });
    }
    let mut base = config.clone();
    let m_top = *m_list.last().expect("non-empty");
    base.dt = Some(
        config
            .dt
            .unwrap_or_else(|| default_dt(&config.params, &config.grid, m_top)),
    );
    base.keep_states = false;
    base.snapshot_every = None;
    base.output_every = usize::MAX;

    let runs = map_indexed(exec, m_list.len(), |i| {
        let mut c = base.clone();
        c.m = Some(m_list[i]);
        simulate(&c, initial)
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;

    let mut warnings = Vec::new();
    for (m, run) in m_list.iter().zip(&runs) {
        if !matches!(run.exit, ExitStatus::Completed { .. }) {
            warnings.push(format!("run at m = {m} stopped early ({})", run.exit.label()));
        }
    }
    let rows: Vec<RefinementRow> = runs
        .windows(2)
        .zip(m_list.windows(2))
        .map(|(pair, ms)| {
            let (a, b) = (&pair[0].final_state, &pair[1].final_state);
            let de = a.eta.sub(&b.eta).map(|f| f.norm_l2()).unwrap_or(f64::NAN);
            let dv = a.v.sub(&b.v).map(|f| f.norm_l2()).unwrap_or(f64::NAN);
            RefinementRow {
                m_coarse: ms[0],
                m_fine: ms[1],
                distance: (de * de + dv * dv).sqrt(),
            }
        })
        .collect();
    for w in rows.windows(2) {
        if w[1].distance > w[0].distance {
            warnings.push(format!(
                "distance not decreasing between m = {} and m = {}",
                w[0].m_fine, w[1].m_fine
            ));
        }
    }
    Ok(RefinementStudy { rows, warnings })
}
