//! CSV tables, JSON summaries and run manifests.
//!
//! Floats are written with the shortest representation that round-trips
//! (exponent form for very small or large values), so identical results give
//! byte-identical files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use ptwell_core::ep::{LoopTrack, SheetNode};
use ptwell_core::model::WaveFunction;
use ptwell_core::spectrum::SweepPoint;
use ptwell_core::Bicomplex;
use serde::Serialize;

use crate::config::RunConfig;
use crate::Error;

pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// `c1, cj, ci, ck` as used by the μ columns of the sweep, loop and scan tables.
fn mu_fields(mu: Bicomplex) -> [String; 4] {
    [mu.c1, mu.cj, mu.ci, mu.ck].map(num)
}

/// `c1, ci, cj, ck`, the order of the bicomplex text form.
fn bicomplex_fields(z: Bicomplex) -> [String; 4] {
    z.to_array().map(num)
}

pub fn sweep_table<W: Write>(w: W, points: &[SweepPoint]) -> Result<(), Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["gamma", "branch", "mu1", "muj", "mui", "muk", "residual_norm"])?;
    for pt in points {
        for s in &pt.solutions {
            let branch = s.branch.map_or("", |b| b.name());
            let [a, b, c, d] = mu_fields(s.mu);
            out.write_record([num(pt.gamma), branch.into(), a, b, c, d, num(s.residual_norm)])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn loop_table<W: Write>(w: W, track: &LoopTrack) -> Result<(), Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["theta", "state_index", "mu1", "muj", "mui", "muk"])?;
    for (theta, row) in track.thetas.iter().zip(&track.states) {
        for (a, mu) in row.iter().enumerate() {
            let [p, q, r, s] = mu_fields(*mu);
            out.write_record([num(*theta), a.to_string(), p, q, r, s])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// One row per state and node; a failed node gets a single row with empty
/// μ columns and the error message.
pub fn scan_table<W: Write>(w: W, nodes: &[SheetNode]) -> Result<(), Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "y", "state_index", "mu1", "muj", "mui", "muk", "error"])?;
    for n in nodes {
        let (x, y) = (num(n.x), num(n.y));
        match &n.values {
            Ok(v) => {
                for (a, mu) in v.iter().enumerate() {
                    let [p, q, r, s] = mu_fields(*mu);
                    out.write_record([x.clone(), y.clone(), a.to_string(), p, q, r, s, String::new()])?;
                }
            }
            Err(e) => {
                let empty = String::new;
                out.write_record([x, y, empty(), empty(), empty(), empty(), empty(), e.to_string()])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// A row of the matrix-model table: physical `g` and `γ` (the i-part of γ is
/// the asymmetry) and the four eigenvalues.
pub struct MatrixRow {
    pub g: Bicomplex,
    pub gamma: Bicomplex,
    pub eigenvalues: [Bicomplex; 4],
}

pub fn matrix_table<W: Write>(w: W, rows: &[MatrixRow]) -> Result<(), Error> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = ["g1", "gi", "gj", "gk", "gamma1", "gammai", "gammaj", "gammak"]
        .map(String::from)
        .to_vec();
    for a in 0..4 {
        header.extend(["1", "i", "j", "k"].map(|c| format!("mu{a}_{c}")));
    }
    out.write_record(&header)?;
    for r in rows {
        let mut rec: Vec<String> = Vec::with_capacity(24);
        rec.extend(bicomplex_fields(r.g));
        rec.extend(bicomplex_fields(r.gamma));
        for mu in r.eigenvalues {
            rec.extend(bicomplex_fields(mu));
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn wavefunction_table<W: Write>(w: W, psi: &WaveFunction) -> Result<(), Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "psi1", "psij", "psii", "psik", "dpsi1", "dpsij", "dpsii", "dpsik"])?;
    for (i, (v, d)) in psi.values.iter().zip(&psi.derivs).enumerate() {
        let mut rec = vec![num(psi.grid.x(i))];
        rec.extend(mu_fields(*v));
        rec.extend(mu_fields(*d));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    pub solver: f64,
    pub zero: f64,
    pub split: f64,
    pub bisect: f64,
    pub closure: f64,
}

/// Record of one CLI invocation.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub version: String,
    pub config: RunConfig,
    pub tolerances: Tolerances,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
    pub exit_code: i32,
}

/// Output files of one run, all inside `dir` and named `<stem>…`.
pub struct OutputSet {
    dir: PathBuf,
    stem: String,
    files: Vec<PathBuf>,
    started: Instant,
}

impl OutputSet {
    pub fn new(dir: &Path, stem: impl Into<String>) -> Result<Self, Error> {
        fs::create_dir_all(dir).map_err(|e| Error::Io(dir.display().to_string(), e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            stem: stem.into(),
            files: Vec::new(),
            started: Instant::now(),
        })
    }

    /// Creates `<stem><suffix>` and records it.
    pub fn create(&mut self, suffix: &str) -> Result<BufWriter<File>, Error> {
        let path = self.dir.join(format!("{}{suffix}", self.stem));
        let f = File::create(&path).map_err(|e| Error::Io(path.display().to_string(), e))?;
        self.files.push(path);
        Ok(BufWriter::new(f))
    }

    pub fn json<T: Serialize>(&mut self, suffix: &str, value: &T) -> Result<(), Error> {
        let mut w = self.create(suffix)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w).map_err(|e| Error::Io(suffix.into(), e))?;
        Ok(())
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.files
    }

    /// Writes `<stem>.manifest.json` listing every file created so far.
    pub fn finish(self, command: &str, parameters: serde_json::Value, config: &RunConfig, exit_code: i32) -> Result<PathBuf, Error> {
        let sc = &config.spectrum;
        let manifest = RunManifest {
            command: command.into(),
            parameters,
            version: env!("CARGO_PKG_VERSION").into(),
            config: *config,
            tolerances: Tolerances {
                solver: sc.solver.tol,
                zero: sc.zero_tol,
                split: sc.split_tol,
                bisect: sc.bisect_tol,
                closure: config.closure_tol,
            },
            outputs: self.files.iter().map(|p| p.display().to_string()).collect(),
            wall_time_s: self.started.elapsed().as_secs_f64(),
            exit_code,
        };
        let path = self.dir.join(format!("{}.manifest.json", self.stem));
        let f = File::create(&path).map_err(|e| Error::Io(path.display().to_string(), e))?;
        serde_json::to_writer_pretty(BufWriter::new(f), &manifest)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ptwell_core::model::Grid;

    #[test]
    fn wavefunction_columns() {
        let grid = Grid::new(1.0, 3).unwrap();
        let psi = WaveFunction::from_values(grid, vec![Bicomplex::new(1.0, 2.0, 3.0, 4.0); 3]).unwrap();
        let mut buf = Vec::new();
        wavefunction_table(&mut buf, &psi).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,psi1,psij,psii,psik,dpsi1,dpsij,dpsii,dpsik"));
        assert!(lines.next().unwrap().starts_with("-1.0,1.0,3.0,2.0,4.0,"));
    }

    #[test]
    fn matrix_header_has_eight_parameter_columns() {
        let mut buf = Vec::new();
        let row = MatrixRow {
            g: Bicomplex::real(0.2),
            gamma: Bicomplex::new(0.03, 1e-4, 0.0, 0.0),
            eigenvalues: [Bicomplex::ONE; 4],
        };
        matrix_table(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
        assert_eq!(header.len(), 24);
        assert_eq!(header[8], "mu0_1");
        assert_eq!(text.lines().nth(1).unwrap().split(',').count(), 24);
    }
}
