use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::energy::EnergyReport;
use crate::error::Result;

use super::RunEvent;

pub const ENERGY_HEADER: [&str; 8] = ["t", "Us", "Ns", "H", "hamiltonian", "curl_res", "max_eta", "blow_up"];

/// One row per report; an absent Hamiltonian is an empty cell.
pub fn write_energy_csv(path: &Path, reports: &[EnergyReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(ENERGY_HEADER)?;
    for r in reports {
        w.write_record([
            r.t.to_string(),
            r.us.to_string(),
            r.ns.to_string(),
            r.h.to_string(),
            r.hamiltonian.map(|h| h.to_string()).unwrap_or_default(),
            r.curl_res.to_string(),
            r.max_eta.to_string(),
            r.blow_up.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parsed row of `energy.csv`.
#[derive(Debug, Clone, PartialEq, serde::Deserialize)]
pub struct EnergyRow {
    pub t: f64,
    #[serde(rename = "Us")]
    pub us: f64,
    #[serde(rename = "Ns")]
    pub ns: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub hamiltonian: Option<f64>,
    pub curl_res: f64,
    pub max_eta: f64,
    pub blow_up: bool,
}

pub fn read_energy_csv(path: &Path) -> Result<Vec<EnergyRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// One JSON object per line.
pub fn write_events(path: &Path, events: &[RunEvent]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
