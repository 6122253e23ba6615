//! Binary field snapshots: one line of compact JSON header terminated by
//! `\n`, then one little-endian `f64` block per field in row-major order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, VectorField};
use crate::grid::GridSpec;
use crate::model::{AbcdParams, WaveState};

pub const FORMAT: &str = "abcd-snapshot/1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadruple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub format: String,
    pub grid: GridSpec,
    pub fields: Vec<String>,
    pub time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Quadruple>,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub header: SnapshotHeader,
    pub fields: Vec<Field>,
}

fn state_names(dim: usize) -> Vec<String> {
    let mut names = vec!["eta".to_string()];
    names.extend((0..dim).map(|a| format!("V{a}")));
    names.extend((0..dim).map(|a| format!("W{a}")));
    names
}

impl Snapshot {
    pub fn from_state(st: &WaveState, params: Option<&AbcdParams>) -> Self {
        let grid = *st.grid().spec();
        let mut fields = vec![st.eta.clone()];
        fields.extend(st.v.components().iter().cloned());
        fields.extend(st.w.components().iter().cloned());
        Snapshot {
            header: SnapshotHeader {
                format: FORMAT.to_string(),
                grid,
                fields: state_names(grid.dim),
                time: st.t,
                epsilon: params.map(|p| p.epsilon),
                params: params.map(|p| Quadruple {
                    a: p.a,
                    b: p.b,
                    c: p.c,
                    d: p.d,
                }),
            },
            fields,
        }
    }

    /// Snapshot of arbitrary named scalar fields sharing one grid.
    pub fn from_fields(names: Vec<String>, fields: Vec<Field>, time: f64) -> Result<Self> {
        let first = fields.first().ok_or_else(|| Error::Snapshot("no fields".into()))?;
        if names.len() != fields.len() {
            return Err(Error::Snapshot("one name per field required".into()));
        }
        let grid = *first.spec();
        if fields.iter().any(|f| *f.spec() != grid) {
            return Err(Error::Snapshot("fields on different grids".into()));
        }
        Ok(Snapshot {
            header: SnapshotHeader {
                format: FORMAT.to_string(),
                grid,
                fields: names,
                time,
                epsilon: None,
                params: None,
            },
            fields,
        })
    }

    pub fn field(&self, name: &str) -> Option<&Field> {
        self.header
            .fields
            .iter()
            .position(|n| n == name)
            .map(|i| &self.fields[i])
    }

    /// Rebuild a [`WaveState`] when the snapshot holds `eta`, `V*`, `W*`.
    pub fn to_state(&self) -> Result<WaveState> {
        let dim = self.header.grid.dim;
        if self.header.fields != state_names(dim) {
            return Err(Error::Snapshot(format!(
                "fields {:?} do not form a state",
                self.header.fields
            )));
        }
        let v = VectorField::new(self.fields[1..1 + dim].to_vec())?;
        let w = VectorField::new(self.fields[1 + dim..].to_vec())?;
        WaveState::new(self.fields[0].clone(), v, w, self.header.time)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut out, &self.header)?;
        out.write_all(b"\n")?;
        for f in &self.fields {
            for v in f.values() {
                out.write_all(&v.to_le_bytes())?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut input = BufReader::new(File::open(path)?);
        let mut line = Vec::new();
        input.read_until(b'\n', &mut line)?;
        let header: SnapshotHeader =
            serde_json::from_slice(&line).map_err(|e| Error::Snapshot(format!("bad header: {e}")))?;
        if header.format != FORMAT {
            return Err(Error::Snapshot(format!("unsupported format '{}'", header.format)));
        }
        header.grid.validate()?;
        let grid = header.grid.build()?;
        let modes = grid.modes();
        let mut fields = Vec::with_capacity(header.fields.len());
        let mut buf = vec![0u8; modes * 8];
        for name in &header.fields {
            input
                .read_exact(&mut buf)
                .map_err(|_| Error::Snapshot(format!("truncated data for field '{name}'")))?;
            let values = buf
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            fields.push(Field::from_values(&grid, values)?);
        }
        if input.read(&mut [0u8; 1])? != 0 {
            return Err(Error::Snapshot("trailing bytes after last field".into()));
        }
        Ok(Snapshot { header, fields })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DEFAULT_LENGTH;

    #[test]
    fn state_round_trip_is_exact() {
        let g = GridSpec::two_d(16, DEFAULT_LENGTH).unwrap().build().unwrap();
        let eta = Field::random_band_limited(&g, 1.0, 1.0, 1);
        let v = VectorField::random_band_limited(&g, 1.0, 0.5, 2);
        let st = WaveState::new(eta, v, VectorField::zeros(&g), 1.25).unwrap();
        let p = AbcdParams::preset("bbm-bbm", 0.1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.bin");
        Snapshot::from_state(&st, Some(&p)).write(&path).unwrap();
        let back = Snapshot::read(&path).unwrap();
        assert_eq!(back.header.fields, vec!["eta", "V0", "V1", "W0", "W1"]);
        assert_eq!(back.header.epsilon, Some(0.1));
        let st2 = back.to_state().unwrap();
        assert_eq!(st2.t, 1.25);
        assert_eq!(st2.eta.values(), st.eta.values());
        assert_eq!(st2.v.components()[1].values(), st.v.components()[1].values());
    }

    #[test]
    fn truncated_file_is_rejected() {
        let g = GridSpec::one_d(8, 1.0).unwrap().build().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.bin");
        Snapshot::from_fields(vec!["u".into()], vec![Field::zeros(&g)], 0.0)
            .unwrap()
            .write(&path)
            .unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert!(matches!(Snapshot::read(&path), Err(Error::Snapshot(_))));
    }
}
