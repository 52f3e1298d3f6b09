//! Parallel drivers over independent solves. Work items are collected in
//! input order, so results do not depend on the number of threads.

use ptwell_core::ep::{
    assemble_gpe, gpe_seeds, matrix_eigs, scan_node_gpe, track_gpe_state, LoopSpec, LoopTrack, PathPoint, ScanGrid, SheetNode,
    MERGE_TOL,
};
use ptwell_core::matrix_model::ScalingMap;
use ptwell_core::model::PotentialParams;
use ptwell_core::spectrum::{assemble, sweep_seeds, track_branch, SpectrumConfig, SweepPoint};
use ptwell_core::{Bicomplex, Result};
use rayon::prelude::*;

/// Runs `f` on a pool of `jobs` threads (0 means one per core).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Like [`ptwell_core::spectrum::sweep`], with the branches tracked
/// concurrently.
pub fn sweep(g: f64, grid: &[f64], p: &PotentialParams, config: &SpectrumConfig) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) || grid.iter().any(|x| !x.is_finite()) {
        return Err(ptwell_core::Error::InvalidInput("γ grid must be non-empty, finite and strictly increasing"));
    }
    let seeds = sweep_seeds(g, p, config)?;
    let tracks = seeds
        .par_iter()
        .map(|(gs, s)| track_branch(s, *gs, g, grid, p, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(grid, &tracks))
}

/// Like [`ptwell_core::ep::track_gpe`], with the four states continued
/// concurrently.
pub fn track_gpe(spec: &LoopSpec, p: &PotentialParams, config: &SpectrumConfig) -> Result<LoopTrack> {
    let seeds = gpe_seeds(spec, p, config)?;
    let tracks = seeds
        .par_iter()
        .map(|s| track_gpe_state(s, spec, p, config))
        .collect::<Result<Vec<_>>>()?;
    assemble_gpe(spec, seeds.iter().map(|s| s.branch).collect(), tracks, MERGE_TOL)
}

pub fn scan_matrix(spec: &LoopSpec, grid: &ScanGrid, map: &ScalingMap) -> Vec<SheetNode> {
    grid.nodes()
        .into_par_iter()
        .map(|(x, y)| {
            let (g, gamma) = spec.plane_point(x, y);
            let pt = PathPoint { theta: 0.0, g, gamma };
            let values = matrix_eigs(&pt, map)
                .map(|e| e.join([0, 1, 2, 3]).iter().map(|&m| m + Bicomplex::real(map.mu0)).collect());
            SheetNode { x, y, values }
        })
        .collect()
}

pub fn scan_gpe(spec: &LoopSpec, grid: &ScanGrid, p: &PotentialParams, config: &SpectrumConfig) -> Result<Vec<SheetNode>> {
    let seeds = gpe_seeds(spec, p, config)?;
    Ok(grid
        .nodes()
        .into_par_iter()
        .map(|(x, y)| SheetNode {
            x,
            y,
            values: scan_node_gpe(spec, &seeds, x, y, p, config),
        })
        .collect())
}
