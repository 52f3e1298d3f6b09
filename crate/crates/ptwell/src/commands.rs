//! Subcommands of the `ptwell` binary.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ptwell_core::ep::{matrix_eigs, track_matrix, Backend, LoopSpec, LoopTarget, PathPoint, ScanGrid};
use ptwell_core::matrix_model::{branch_eigenvalue, fit_mu0};
use ptwell_core::spectrum::critical_points;
use ptwell_core::Bicomplex;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{self, MatrixRow, OutputSet};
use crate::parallel::{self, with_jobs};
use crate::verify;
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_GAPS: i32 = 3;
pub const EXIT_TRACKING: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "ptwell", version, about = "Stationary states and exceptional points of a PT-symmetric double well")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one setting; applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Worker threads (0: one per core).
    #[arg(long, default_value_t = 0, global = true)]
    pub jobs: usize,
    /// Output directory.
    #[arg(long, default_value = ".", global = true)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Matrix,
    Gpe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    LinearGamma,
    GammaC2,
    GC1,
    GammaC1Eps,
    Ep4,
}

impl From<TargetArg> for LoopTarget {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::LinearGamma => LoopTarget::LinearGamma,
            TargetArg::GammaC2 => LoopTarget::GammaC2,
            TargetArg::GC1 => LoopTarget::GC1,
            TargetArg::GammaC1Eps => LoopTarget::GammaC1Eps,
            TargetArg::Ep4 => LoopTarget::Ep4,
        }
    }
}

#[derive(Debug, Args)]
pub struct LoopArgs {
    #[arg(long, value_enum)]
    pub target: TargetArg,
    #[arg(long, value_enum, default_value = "matrix")]
    pub backend: BackendArg,
    /// Nonlinearity of the γ loops.
    #[arg(long)]
    pub g: Option<f64>,
    /// Centre of the loop (critical γ, or g for g_c1).
    #[arg(long)]
    pub center: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Chemical potentials of all branches over a γ grid.
    Spectrum {
        #[arg(long, default_value_t = 0.2)]
        g: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma_min: f64,
        #[arg(long, default_value_t = 0.06)]
        gamma_max: f64,
        #[arg(long, default_value_t = 121)]
        n: usize,
        /// Skip the critical-point search.
        #[arg(long)]
        no_critical: bool,
        /// Write the wave functions at the grid point nearest this γ.
        #[arg(long = "psi-at", value_name = "GAMMA")]
        psi_at: Vec<f64>,
    },
    /// Follow the states around a closed loop and report the permutation.
    Encircle {
        #[command(flatten)]
        path: LoopArgs,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Traverse clockwise.
        #[arg(long)]
        reverse: bool,
    },
    /// Values on a square grid in the loop plane, without tracking.
    Scan {
        #[command(flatten)]
        path: LoopArgs,
        /// Half-width of the square.
        #[arg(long, default_value_t = 1e-3)]
        extent: f64,
        #[arg(long, default_value_t = 21)]
        nx: usize,
        #[arg(long, default_value_t = 21)]
        ny: usize,
    },
    /// Matrix-model eigenvalues over a γ grid.
    Matrix {
        #[arg(long, default_value_t = 0.2)]
        g: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma_min: f64,
        #[arg(long, default_value_t = 0.06)]
        gamma_max: f64,
        #[arg(long, default_value_t = 121)]
        n: usize,
        /// Asymmetry, the i-part of γ.
        #[arg(long, default_value_t = 0.0)]
        asymmetry: f64,
    },
    /// Fit the energy shift of the matrix model to GPE sweeps.
    Fit {
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2])]
        g: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        gamma_min: f64,
        #[arg(long, default_value_t = 0.06)]
        gamma_max: f64,
        #[arg(long, default_value_t = 21)]
        n: usize,
    },
    /// Run the invariant checks.
    Verify {
        /// Matrix-model checks only.
        #[arg(long)]
        fast: bool,
    },
}

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, Error> {
    if n == 0 || !lo.is_finite() || !hi.is_finite() || (n > 1 && hi <= lo) {
        return Err(Error::Config(format!("bad range [{lo}, {hi}] with {n} points")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
}

pub fn load_config(global: &GlobalArgs) -> Result<RunConfig, Error> {
    let mut cfg = match &global.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    for kv in &global.overrides {
        cfg.apply_override(kv)?;
    }
    Ok(cfg)
}

/// Runs one invocation and returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32, Error> {
    let cfg = load_config(&cli.global)?;
    with_jobs(cli.global.jobs, || dispatch(cli, &cfg))
}

fn dispatch(cli: &Cli, cfg: &RunConfig) -> Result<i32, Error> {
    let out = &cli.global.out;
    match &cli.command {
        Command::Spectrum {
            g,
            gamma_min,
            gamma_max,
            n,
            no_critical,
            psi_at,
        } => spectrum(cfg, out, *g, linspace(*gamma_min, *gamma_max, *n)?, !no_critical, psi_at),
        Command::Encircle {
            path,
            radius,
            steps,
            reverse,
        } => encircle(cfg, out, path, *radius, *steps, *reverse),
        Command::Scan { path, extent, nx, ny } => scan(
            cfg,
            out,
            path,
            ScanGrid {
                extent: *extent,
                nx: *nx,
                ny: *ny,
            },
        ),
        Command::Matrix {
            g,
            gamma_min,
            gamma_max,
            n,
            asymmetry,
        } => matrix(cfg, out, *g, linspace(*gamma_min, *gamma_max, *n)?, *asymmetry),
        Command::Fit { g, gamma_min, gamma_max, n } => fit(cfg, out, g, linspace(*gamma_min, *gamma_max, *n)?),
        Command::Verify { fast } => verify_cmd(cfg, out, *fast),
    }
}

fn spectrum(cfg: &RunConfig, out: &std::path::Path, g: f64, grid: Vec<f64>, critical: bool, psi_at: &[f64]) -> Result<i32, Error> {
    let mut files = OutputSet::new(out, "spectrum")?;
    let params = json!({ "g": g, "gamma_min": grid[0], "gamma_max": grid[grid.len() - 1], "n": grid.len(), "psi_at": psi_at });
    let points = parallel::sweep(g, &grid, &cfg.potential, &cfg.spectrum)?;
    output::sweep_table(files.create(".csv")?, &points)?;
    let gaps: Vec<f64> = points.iter().filter(|p| p.gap).map(|p| p.gamma).collect();
    let mut code = if gaps.is_empty() { EXIT_OK } else { EXIT_GAPS };
    if critical {
        let summary = match critical_points(g, &cfg.potential, &cfg.spectrum) {
            Ok(c) => json!({ "g": g, "gamma_c1": c.gamma_c1, "gamma_c2": c.gamma_c2, "gaps": gaps }),
            Err(e) => {
                code = EXIT_GAPS;
                json!({ "g": g, "error": e.to_string(), "gaps": gaps })
            }
        };
        files.json(".critical.json", &summary)?;
    }
    for &target in psi_at {
        let Some((k, pt)) = points
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.gamma - target).abs().total_cmp(&(b.1.gamma - target).abs()))
        else {
            continue;
        };
        for (a, s) in pt.solutions.iter().enumerate() {
            let name = s.branch.map_or_else(|| format!("state{a}"), |b| b.name().to_string());
            output::wavefunction_table(files.create(&format!(".psi.{k}.{name}.csv"))?, &s.psi)?;
        }
    }
    if !gaps.is_empty() {
        eprintln!("{} of {} grid points do not have four states", gaps.len(), points.len());
    }
    files.finish("spectrum", params, cfg, code)?;
    Ok(code)
}

fn backend_name(b: BackendArg) -> &'static str {
    match b {
        BackendArg::Matrix => Backend::Matrix.name(),
        BackendArg::Gpe => Backend::Gpe.name(),
    }
}

fn loop_spec(cfg: &RunConfig, args: &LoopArgs) -> Result<LoopSpec, ptwell_core::Error> {
    let target = LoopTarget::from(args.target);
    let mut spec = match (args.backend, args.center) {
        (BackendArg::Matrix, None) => LoopSpec::matrix(target, &cfg.map)?,
        (BackendArg::Gpe, None) => LoopSpec::gpe(target, &cfg.potential, &cfg.spectrum)?,
        (BackendArg::Matrix, Some(c)) => LoopSpec::new(target, Backend::Matrix, c)?,
        (BackendArg::Gpe, Some(c)) => {
            let mut s = LoopSpec::new(target, Backend::Gpe, c)?;
            s.steps = 64;
            s
        }
    };
    if let Some(g) = args.g {
        if target.loops_g() {
            spec.gamma = cfg.map.gamma_c1(g);
        } else {
            spec.g = g;
        }
    }
    Ok(spec)
}

fn track(cfg: &RunConfig, spec: &LoopSpec) -> ptwell_core::Result<ptwell_core::ep::LoopTrack> {
    match spec.backend {
        Backend::Matrix => track_matrix(spec, &cfg.map),
        Backend::Gpe => parallel::track_gpe(spec, &cfg.potential, &cfg.spectrum),
    }
}

fn encircle(
    cfg: &RunConfig,
    out: &std::path::Path,
    args: &LoopArgs,
    radius: Option<f64>,
    steps: Option<usize>,
    reverse: bool,
) -> Result<i32, Error> {
    let mut files = OutputSet::new(out, "encircle")?;
    let built = loop_spec(cfg, args).and_then(|mut s| {
        if let Some(r) = radius {
            s = s.with_radius(r)?;
        }
        if let Some(n) = steps {
            s = s.with_steps(n)?;
        }
        Ok(if reverse { s.reversed() } else { s })
    });
    let result = built.clone().and_then(|s| track(cfg, &s));
    let (code, summary) = match result {
        Ok(t) => {
            output::loop_table(files.create(".csv")?, &t)?;
            let code = if t.result.closure_error < cfg.closure_tol { EXIT_OK } else { EXIT_FAILURE };
            let labels: Vec<Option<&str>> = t.labels.iter().map(|l| l.map(|b| b.name())).collect();
            let summary = json!({
                "spec": t.spec,
                "mapping": t.result.mapping,
                "cycles": t.result.cycles,
                "cycle_type": t.result.cycle_type(),
                "closure_error": t.result.closure_error,
                "closure_tol": cfg.closure_tol,
                "components": t.result.components,
                "labels": labels,
                "refined_intervals": t.refined,
            });
            (code, summary)
        }
        Err(e) => {
            eprintln!("tracking failed: {e}");
            (EXIT_TRACKING, json!({ "spec": built.ok(), "error": e.to_string() }))
        }
    };
    files.json(".json", &summary)?;
    let params = json!({ "target": LoopTarget::from(args.target).name(), "backend": backend_name(args.backend), "radius": radius, "steps": steps, "g": args.g, "center": args.center, "reverse": reverse });
    files.finish("encircle", params, cfg, code)?;
    Ok(code)
}

fn scan(cfg: &RunConfig, out: &std::path::Path, args: &LoopArgs, grid: ScanGrid) -> Result<i32, Error> {
    let mut files = OutputSet::new(out, "scan")?;
    let spec = loop_spec(cfg, args)?;
    let nodes = match spec.backend {
        Backend::Matrix => parallel::scan_matrix(&spec, &grid, &cfg.map),
        Backend::Gpe => parallel::scan_gpe(&spec, &grid, &cfg.potential, &cfg.spectrum)?,
    };
    output::scan_table(files.create(".csv")?, &nodes)?;
    let failed = nodes.iter().filter(|n| n.values.is_err()).count();
    let code = if failed == 0 { EXIT_OK } else { EXIT_GAPS };
    if failed > 0 {
        eprintln!("{failed} of {} nodes failed", nodes.len());
    }
    let params = json!({ "target": spec.target.name(), "spec": spec, "grid": grid });
    files.finish("scan", params, cfg, code)?;
    Ok(code)
}

fn matrix(cfg: &RunConfig, out: &std::path::Path, g: f64, grid: Vec<f64>, asymmetry: f64) -> Result<i32, Error> {
    let mut files = OutputSet::new(out, "matrix")?;
    let mut rows = Vec::with_capacity(grid.len());
    for &gamma in &grid {
        let pt = PathPoint {
            theta: 0.0,
            g: Bicomplex::real(g),
            gamma: Bicomplex::new(gamma, asymmetry, 0.0, 0.0),
        };
        let eigenvalues = matrix_eigs(&pt, &cfg.map)?
            .join_conjugate_pairs()
            .map(|m| cfg.map.unscale(m));
        rows.push(MatrixRow {
            g: pt.g,
            gamma: pt.gamma,
            eigenvalues,
        });
    }
    output::matrix_table(files.create(".csv")?, &rows)?;
    let params = json!({ "g": g, "gamma_min": grid[0], "gamma_max": grid[grid.len() - 1], "n": grid.len(), "asymmetry": asymmetry });
    files.finish("matrix", params, cfg, EXIT_OK)?;
    Ok(EXIT_OK)
}

fn fit(cfg: &RunConfig, out: &std::path::Path, gs: &[f64], grid: Vec<f64>) -> Result<i32, Error> {
    let mut files = OutputSet::new(out, "fit")?;
    let mut csv = csv::Writer::from_writer(files.create(".csv")?);
    csv.write_record(["g", "gamma", "branch", "mu1", "muj", "mui", "muk", "model1", "modelj", "modeli", "modelk", "deviation"])?;
    let mut fits = Vec::new();
    let mut code = EXIT_OK;
    for &g in gs {
        let points = parallel::sweep(g, &grid, &cfg.potential, &cfg.spectrum)?;
        if points.iter().any(|p| p.gap) {
            code = EXIT_GAPS;
        }
        let samples: Vec<_> = points
            .iter()
            .flat_map(|p| p.solutions.iter().filter_map(move |s| s.branch.map(|b| (p.gamma, b, s.mu.c1))))
            .collect();
        let mu0 = fit_mu0(&cfg.map, g, &samples)?;
        let mut worst = 0.0_f64;
        for p in &points {
            for s in &p.solutions {
                let Some(b) = s.branch else { continue };
                let model = branch_eigenvalue(g / cfg.map.g0, p.gamma / cfg.map.gamma0, cfg.map.v, b)? + Bicomplex::real(mu0);
                let dev = (s.mu - model).max_abs();
                worst = worst.max(dev);
                let f = |z: Bicomplex| [z.c1, z.cj, z.ci, z.ck].map(output::num);
                let mut rec = vec![output::num(g), output::num(p.gamma), b.name().to_string()];
                rec.extend(f(s.mu));
                rec.extend(f(model));
                rec.push(output::num(dev));
                csv.write_record(&rec)?;
            }
        }
        fits.push(json!({ "g": g, "mu0": mu0, "max_deviation": worst }));
    }
    csv.flush()?;
    drop(csv);
    files.json(".json", &fits)?;
    let params = json!({ "g": gs, "gamma_min": grid[0], "gamma_max": grid[grid.len() - 1], "n": grid.len() });
    files.finish("fit", params, cfg, code)?;
    Ok(code)
}

fn verify_cmd(cfg: &RunConfig, out: &std::path::Path, fast: bool) -> Result<i32, Error> {
    let mut files = OutputSet::new(out, "verify")?;
    let checks = if fast {
        verify::fast_suite(ptwell_core::matrix_model::build_h, &cfg.map)
    } else {
        verify::full_suite(ptwell_core::matrix_model::build_h, cfg)
    };
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let report: Vec<_> = checks
        .iter()
        .map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail }))
        .collect();
    files.json(".json", &report)?;
    let code = if failed == 0 { EXIT_OK } else { EXIT_FAILURE };
    files.finish("verify", json!({ "fast": fast }), cfg, code)?;
    Ok(code)
}
