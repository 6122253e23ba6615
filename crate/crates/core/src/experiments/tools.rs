use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{read_energy_csv, write_energy_csv, write_events, RunConfig, SimulationOutput};
use crate::littlewood_paley::{DyadicPartition, Summability};
use crate::snapshot::Snapshot;

/// Write `config.json`, `energy.csv`, `events.jsonl` and one
/// `snapshot_t*.bin` per kept snapshot into `dir`.
pub fn write_run(dir: &Path, config: &RunConfig, out: &SimulationOutput) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("config.json"), serde_json::to_string_pretty(config)? + "\n")?;
    write_energy_csv(&dir.join("energy.csv"), &out.reports)?;
    write_events(&dir.join("events.jsonl"), &out.events)?;
    for st in &out.snapshots {
        Snapshot::from_state(st, Some(&config.params)).write(&dir.join(format!("snapshot_t{:012.6}.bin", st.t)))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldNorm {
    pub field: String,
    pub norm: f64,
}

/// `‖·‖_{B^s_{2,r}}` of every field stored in a snapshot file.
pub fn besov_of_snapshot(path: &Path, s: f64, r: Summability) -> Result<Vec<FieldNorm>> {
    let snap = Snapshot::read(path)?;
    let grid = snap.header.grid.build()?;
    let p = DyadicPartition::build(&grid)?;
    snap.header
        .fields
        .iter()
        .zip(&snap.fields)
        .map(|(name, f)| {
            let f = crate::field::Field::from_values(&grid, f.values().to_vec())?;
            Ok(FieldNorm {
                field: name.clone(),
                norm: p.besov_norm(&f, s, r)?,
            })
        })
        .collect()
}

/// One line of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub run: String,
    pub reports: usize,
    pub t_final: f64,
    pub us0: f64,
    pub us_max: f64,
    pub us_final: f64,
    pub max_curl_res: f64,
    pub exit: String,
    pub steps_taken: Option<u64>,
}

fn find_runs(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    if dir.join("energy.csv").is_file() {
        out.push(dir.to_path_buf());
    }
    let mut subdirs: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    for d in subdirs {
        find_runs(&d, out)?;
    }
    Ok(())
}

fn exit_of(events: &Path) -> (String, Option<u64>) {
    let Ok(text) = std::fs::read_to_string(events) else {
        return ("unknown".into(), None);
    };
    for line in text.lines().rev() {
        let Ok(v) = serde_json::from_str::<serde_json::Value>(line) else {
            continue;
        };
        if v["event"] == "exit" {
            let label = v["status"]["status"].as_str().unwrap_or("unknown").to_string();
            return (label, v["steps_taken"].as_u64());
        }
    }
    ("unknown".into(), None)
}

fn summarize(root: &Path, dir: &Path) -> Result<RunSummary> {
    let rows = read_energy_csv(&dir.join("energy.csv"))?;
    let (exit, steps_taken) = exit_of(&dir.join("events.jsonl"));
    let name = dir
        .strip_prefix(root)
        .ok()
        .map(|p| p.display().to_string())
        .filter(|s| !s.is_empty());
    Ok(RunSummary {
        run: name.unwrap_or_else(|| ".".into()),
        reports: rows.len(),
        t_final: rows.last().map_or(f64::NAN, |r| r.t),
        us0: rows.first().map_or(f64::NAN, |r| r.us),
        us_max: rows.iter().map(|r| r.us).fold(f64::NAN, f64::max),
        us_final: rows.last().map_or(f64::NAN, |r| r.us),
        max_curl_res: rows.iter().map(|r| r.curl_res).fold(0.0, f64::max),
        exit,
        steps_taken,
    })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn html_table(out: &mut String, header: &[String], rows: &[Vec<String>]) {
    out.push_str("<table>\n<tr>");
    for h in header {
        let _ = write!(out, "<th>{}</th>", escape(h));
    }
    out.push_str("</tr>\n");
    for r in rows {
        out.push_str("<tr>");
        for c in r {
            let _ = write!(out, "<td>{}</td>", escape(c));
        }
        out.push_str("</tr>\n");
    }
    out.push_str("</table>\n");
}

/// Summarize every run directory below `dir` into `summary.csv` and
/// `summary.html` (which also embeds `scaling.csv` when present).
pub fn report(dir: &Path) -> Result<Vec<RunSummary>> {
    let mut runs = Vec::new();
    if dir.is_dir() {
        find_runs(dir, &mut runs)?;
    }
    if runs.is_empty() {
        return Err(Error::NoRunsFound(dir.display().to_string()));
    }
    let summaries = runs.iter().map(|d| summarize(dir, d)).collect::<Result<Vec<_>>>()?;

    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    for s in &summaries {
        w.serialize(s)?;
    }
    w.flush()?;

    let header: Vec<String> = [
        "run", "reports", "t_final", "Us(0)", "max Us", "final Us", "max curl", "exit", "steps",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows: Vec<Vec<String>> = summaries
        .iter()
        .map(|s| {
            vec![
                s.run.clone(),
                s.reports.to_string(),
                format!("{:.6}", s.t_final),
                format!("{:.6e}", s.us0),
                format!("{:.6e}", s.us_max),
                format!("{:.6e}", s.us_final),
                format!("{:.3e}", s.max_curl_res),
                s.exit.clone(),
                s.steps_taken.map(|n| n.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    let mut html = String::from(
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Run summary</title>\n\
         <style>table{border-collapse:collapse}td,th{border:1px solid #999;padding:2px 6px}</style>\n\
         </head><body>\n<h1>Runs</h1>\n",
    );
    html_table(&mut html, &header, &rows);
    let scaling = dir.join("scaling.csv");
    if scaling.is_file() {
        let mut r = csv::Reader::from_path(&scaling)?;
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<Vec<Vec<String>>, _>>()?;
        html.push_str("<h1>Scaling</h1>\n");
        html_table(&mut html, &header, &rows);
    }
    html.push_str("</body></html>\n");
    std::fs::write(dir.join("summary.html"), html)?;
    Ok(summaries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, DEFAULT_LENGTH};
    use crate::integrator::simulate;
    use crate::model::{AbcdParams, WaveState};

    #[test]
    fn empty_directory_has_no_runs() {
        let dir = tempfile::tempdir().unwrap();
        let err = report(dir.path()).unwrap_err();
        assert!(err.to_string().contains("no runs found"));
    }

    #[test]
    fn zero_snapshot_has_zero_norm() {
        let dir = tempfile::tempdir().unwrap();
        let g = GridSpec::one_d(64, DEFAULT_LENGTH).unwrap().build().unwrap();
        let path = dir.path().join("z.bin");
        Snapshot::from_state(&WaveState::zeros(&g), None).write(&path).unwrap();
        let norms = besov_of_snapshot(&path, 1.0, Summability::TWO).unwrap();
        assert_eq!(norms.len(), 3);
        assert!(norms.iter().all(|n| n.norm == 0.0));
    }

    #[test]
    fn run_directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = GridSpec::one_d(64, DEFAULT_LENGTH).unwrap();
        let mut c = RunConfig::new(AbcdParams::preset("bbm-bbm", 0.1).unwrap(), grid, 1.0);
        c.dt = Some(0.1);
        c.snapshot_every = Some(5);
        let g = grid.build().unwrap();
        let eta = crate::field::Field::random_band_limited(&g, 1.0, 0.5, 3);
        let st = WaveState::new(eta, crate::VectorField::zeros(&g), crate::VectorField::zeros(&g), 0.0).unwrap();
        let out = simulate(&c, &st).unwrap();
        write_run(&dir.path().join("one"), &c, &out).unwrap();
        let snaps = std::fs::read_dir(dir.path().join("one"))
            .unwrap()
            .filter(|e| {
                e.as_ref()
                    .unwrap()
                    .file_name()
                    .to_string_lossy()
                    .starts_with("snapshot_t")
            })
            .count();
        assert_eq!(snaps, 3);
        let s = report(dir.path()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].run, "one");
        assert_eq!(s[0].exit, "completed");
        assert_eq!(s[0].steps_taken, Some(10));
        assert!(dir.path().join("summary.html").is_file());
    }
}
