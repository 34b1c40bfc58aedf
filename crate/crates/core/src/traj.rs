//! Trajectory container and on-disk formats.
//!
//! Two formats are supported: a compact little-endian binary file (magic
//! `ABCDTRJ1`) and a directory of per-snapshot CSV files, each carrying a
//! header with the grid and parameters followed by `x,u,eta` rows.

use crate::params::PhysParams;
use crate::solver::FieldPair;
use crate::spectral::Grid;
use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrajError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed trajectory: {0}")]
    Format(String),
    #[error("bad grid: {0}")]
    Grid(#[from] crate::spectral::GridError),
}

const MAGIC: &[u8; 8] = b"ABCDTRJ1";

/// A solved trajectory: grid, originating physical parameters, solver
/// settings, and the stored snapshots.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Grid,
    pub params: PhysParams,
    pub solver_dt: f64,
    pub dealias: bool,
    pub snapshots: Vec<FieldPair>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn save_binary(&self, path: &Path) -> Result<(), TrajError> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&(self.grid.n as u64).to_le_bytes())?;
        for v in [
            self.grid.length,
            self.params.a,
            self.params.b,
            self.params.c,
            self.params.d,
            self.solver_dt,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&[self.dealias as u8])?;
        w.write_all(&(self.snapshots.len() as u64).to_le_bytes())?;
        for s in &self.snapshots {
            w.write_all(&s.t.to_le_bytes())?;
            for v in s.u.iter().chain(&s.eta) {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn load_binary(path: &Path) -> Result<Self, TrajError> {
        let mut r = BufReader::new(fs::File::open(path)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(TrajError::Format("bad magic".into()));
        }
        let mut buf8 = [0u8; 8];
        let mut read_u64 = |r: &mut dyn Read| -> Result<u64, TrajError> {
            r.read_exact(&mut buf8)?;
            Ok(u64::from_le_bytes(buf8))
        };
        let n = read_u64(&mut r)? as usize;
        let mut buf = [0u8; 8];
        let mut read_f64 = |r: &mut dyn Read| -> Result<f64, TrajError> {
            r.read_exact(&mut buf)?;
            Ok(f64::from_le_bytes(buf))
        };
        let length = read_f64(&mut r)?;
        let a = read_f64(&mut r)?;
        let b = read_f64(&mut r)?;
        let c = read_f64(&mut r)?;
        let d = read_f64(&mut r)?;
        let solver_dt = read_f64(&mut r)?;
        let mut flag = [0u8; 1];
        r.read_exact(&mut flag)?;
        let dealias = flag[0] != 0;
        let mut buf_n = [0u8; 8];
        r.read_exact(&mut buf_n)?;
        let n_snaps = u64::from_le_bytes(buf_n) as usize;
        let params = crate::params::validate_phys(a, b, c, d)
            .map_err(|e| TrajError::Format(format!("invalid parameters in header: {e}")))?;
        let grid = Grid::new(n, length)?;
        let mut snapshots = Vec::with_capacity(n_snaps);
        let mut field = vec![0u8; 8 * n];
        for _ in 0..n_snaps {
            let mut tbuf = [0u8; 8];
            r.read_exact(&mut tbuf)?;
            let t = f64::from_le_bytes(tbuf);
            let mut read_field = |r: &mut dyn Read| -> Result<Vec<f64>, TrajError> {
                r.read_exact(&mut field)?;
                Ok(field
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect())
            };
            let u = read_field(&mut r)?;
            let eta = read_field(&mut r)?;
            snapshots.push(FieldPair { u, eta, t });
        }
        Ok(Trajectory {
            grid,
            params,
            solver_dt,
            dealias,
            snapshots,
        })
    }

    /// Write one CSV file per snapshot into `dir`.
    pub fn save_csv_dir(&self, dir: &Path) -> Result<(), TrajError> {
        fs::create_dir_all(dir)?;
        for (idx, s) in self.snapshots.iter().enumerate() {
            let mut w = BufWriter::new(fs::File::create(dir.join(format!("snap_{idx:06}.csv")))?);
            writeln!(
                w,
                "# n={} length={} a={} b={} c={} d={} dt={} dealias={} t={}",
                self.grid.n,
                self.grid.length,
                self.params.a,
                self.params.b,
                self.params.c,
                self.params.d,
                self.solver_dt,
                self.dealias as u8,
                s.t
            )?;
            writeln!(w, "x,u,eta")?;
            for i in 0..self.grid.n {
                writeln!(w, "{},{},{}", self.grid.x[i], s.u[i], s.eta[i])?;
            }
        }
        Ok(())
    }

    pub fn load_csv_dir(dir: &Path) -> Result<Self, TrajError> {
        type CsvHeader = (usize, f64, f64, f64, f64, f64, f64, bool);
        let mut names: Vec<_> = fs::read_dir(dir)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().map(|e| e == "csv").unwrap_or(false))
            .collect();
        names.sort();
        if names.is_empty() {
            return Err(TrajError::Format("no snapshot files".into()));
        }
        let mut header: Option<CsvHeader> = None;
        let mut snapshots = Vec::new();
        for path in &names {
            let file = BufReader::new(fs::File::open(path)?);
            let mut lines = file.lines();
            let head = lines
                .next()
                .ok_or_else(|| TrajError::Format("empty snapshot".into()))??;
            let mut fields = std::collections::HashMap::new();
            for tok in head.trim_start_matches('#').split_whitespace() {
                if let Some((k, v)) = tok.split_once('=') {
                    fields.insert(k.to_string(), v.to_string());
                }
            }
            let get = |k: &str| -> Result<f64, TrajError> {
                fields
                    .get(k)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| TrajError::Format(format!("missing header field {k}")))
            };
            let n = get("n")? as usize;
            let hdr = (
                n,
                get("length")?,
                get("a")?,
                get("b")?,
                get("c")?,
                get("d")?,
                get("dt")?,
                get("dealias")? != 0.0,
            );
            match &header {
                None => header = Some(hdr),
                Some(h) => {
                    if *h != hdr {
                        return Err(TrajError::Format("inconsistent snapshot headers".into()));
                    }
                }
            }
            let t = get("t")?;
            let mut u = Vec::with_capacity(n);
            let mut eta = Vec::with_capacity(n);
            for line in lines {
                let line = line?;
                if line.starts_with('x') || line.trim().is_empty() {
                    continue;
                }
                let mut cols = line.split(',');
                let _x = cols.next();
                let uv: f64 = cols
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| TrajError::Format("bad row".into()))?;
                let ev: f64 = cols
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| TrajError::Format("bad row".into()))?;
                u.push(uv);
                eta.push(ev);
            }
            if u.len() != n {
                return Err(TrajError::Format(format!(
                    "expected {n} rows, got {}",
                    u.len()
                )));
            }
            snapshots.push(FieldPair { u, eta, t });
        }
        let (n, length, a, b, c, d, solver_dt, dealias) = header.unwrap();
        let params = crate::params::validate_phys(a, b, c, d)
            .map_err(|e| TrajError::Format(format!("invalid parameters in header: {e}")))?;
        Ok(Trajectory {
            grid: Grid::new(n, length)?,
            params,
            solver_dt,
            dealias,
            snapshots,
        })
    }

    /// Load either format, deciding by whether the path is a directory.
    pub fn load(path: &Path) -> Result<Self, TrajError> {
        if path.is_dir() {
            Self::load_csv_dir(path)
        } else {
            Self::load_binary(path)
        }
    }
}
