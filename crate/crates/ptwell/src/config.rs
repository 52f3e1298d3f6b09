//! Run configuration from a plain-text `key = value` file plus overrides.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are
//! errors so that typos do not silently fall back to defaults.

use std::fs;
use std::path::Path;

use ptwell_core::matrix_model::ScalingMap;
use ptwell_core::model::{Grid, PotentialParams};
use ptwell_core::solver::StepControl;
use ptwell_core::spectrum::SpectrumConfig;
use serde::Serialize;

use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub potential: PotentialParams,
    pub spectrum: SpectrumConfig,
    pub map: ScalingMap,
    /// Largest closure error accepted by `encircle`.
    pub closure_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            potential: PotentialParams::standard(),
            spectrum: SpectrumConfig::default(),
            map: ScalingMap::default(),
            closure_tol: 1e-6,
        }
    }
}

pub const KEYS: [&str; 24] = [
    "v0",
    "sigma",
    "rho",
    "half_width",
    "nodes",
    "rk_step",
    "linear_tail",
    "solver_tol",
    "max_iter",
    "max_halvings",
    "seed_gamma_low",
    "seed_gamma_high",
    "g_step_max",
    "g_step_min",
    "gamma_step_max",
    "gamma_step_min",
    "bisect_tol",
    "zero_tol",
    "split_tol",
    "g0",
    "gamma0",
    "v",
    "mu0",
    "closure_tol",
];

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(path.display().to_string(), e))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), Error> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k.trim(), v.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<(), Error> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{kv}' is not key=value")))?;
        self.set(k.trim(), v.trim()).map_err(Error::Config)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let real = || value.parse::<f64>().map_err(|_| format!("{key}: '{value}' is not a number"));
        let count = || value.parse::<usize>().map_err(|_| format!("{key}: '{value}' is not a count"));
        let sc = &mut self.spectrum;
        match key {
            "v0" => self.potential.v0 = real()?,
            "sigma" => self.potential.sigma = real()?,
            "rho" => self.potential.rho = real()?,
            "half_width" => sc.solver.grid = Grid::new(real()?, sc.solver.grid.nodes).map_err(|e| e.to_string())?,
            "nodes" => sc.solver.grid = Grid::new(sc.solver.grid.half_width, count()?).map_err(|e| e.to_string())?,
            "rk_step" => sc.solver.rk_step = real()?,
            "linear_tail" => sc.solver.linear_tail = real()?,
            "solver_tol" => sc.solver.tol = real()?,
            "max_iter" => sc.solver.max_iter = count()?,
            "max_halvings" => sc.solver.max_halvings = count()?,
            "seed_gamma_low" => sc.seed_gammas[0] = real()?,
            "seed_gamma_high" => sc.seed_gammas[1] = real()?,
            "g_step_max" => sc.g_step = StepControl::new(real()?, sc.g_step.min_step),
            "g_step_min" => sc.g_step = StepControl::new(sc.g_step.max_step, real()?),
            "gamma_step_max" => sc.gamma_step = StepControl::new(real()?, sc.gamma_step.min_step),
            "gamma_step_min" => sc.gamma_step = StepControl::new(sc.gamma_step.max_step, real()?),
            "bisect_tol" => sc.bisect_tol = real()?,
            "zero_tol" => sc.zero_tol = real()?,
            "split_tol" => sc.split_tol = real()?,
            "g0" => self.map.g0 = real()?,
            "gamma0" => self.map.gamma0 = real()?,
            "v" => self.map.v = real()?,
            "mu0" => self.map.mu0 = real()?,
            "closure_tol" => self.closure_tol = real()?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Every setting as `key = value`, in [`KEYS`] order; re-reading the
    /// output reproduces the configuration.
    pub fn to_text(&self) -> String {
        let sc = &self.spectrum;
        let values: [String; 24] = [
            self.potential.v0.to_string(),
            self.potential.sigma.to_string(),
            self.potential.rho.to_string(),
            sc.solver.grid.half_width.to_string(),
            sc.solver.grid.nodes.to_string(),
            sc.solver.rk_step.to_string(),
            sc.solver.linear_tail.to_string(),
            sc.solver.tol.to_string(),
            sc.solver.max_iter.to_string(),
            sc.solver.max_halvings.to_string(),
            sc.seed_gammas[0].to_string(),
            sc.seed_gammas[1].to_string(),
            sc.g_step.max_step.to_string(),
            sc.g_step.min_step.to_string(),
            sc.gamma_step.max_step.to_string(),
            sc.gamma_step.min_step.to_string(),
            sc.bisect_tol.to_string(),
            sc.zero_tol.to_string(),
            sc.split_tol.to_string(),
            self.map.g0.to_string(),
            self.map.gamma0.to_string(),
            self.map.v.to_string(),
            self.map.mu0.to_string(),
            self.closure_tol.to_string(),
        ];
        KEYS.iter().zip(values).map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
