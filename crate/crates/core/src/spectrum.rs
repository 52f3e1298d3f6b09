//! Branch tracking in γ and location of the two bifurcation points.
//!
//! All branches are seeded from the four `g = 0` states (every pairing of the
//! two lowest modes of each idempotent component) at two fixed γ values, one
//! below and one above the linear exceptional point, and continued first in
//! `g`, then in γ along the sweep grid. A branch ends where continuation
//! fails or where the state loses the μ pattern of its label.

use alloc::vec::Vec;

use crate::bicomplex::Bicomplex;
use crate::error::{Error, Result};
use crate::model::{PotentialParams, SymmetryOp};
use crate::solver::{linear_states, Problem, Solution, SolverConfig, StepControl, Track};

/// The eight solution branches of the continued double-well problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BranchLabel {
    PsiG,
    PsiE,
    PsiIPlus,
    PsiIMinus,
    PsiJPlus,
    PsiJMinus,
    PsiKPlus,
    PsiKMinus,
}

impl BranchLabel {
    pub const ALL: [BranchLabel; 8] = [
        BranchLabel::PsiG,
        BranchLabel::PsiE,
        BranchLabel::PsiIPlus,
        BranchLabel::PsiIMinus,
        BranchLabel::PsiJPlus,
        BranchLabel::PsiJMinus,
        BranchLabel::PsiKPlus,
        BranchLabel::PsiKMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BranchLabel::PsiG => "psi_g",
            BranchLabel::PsiE => "psi_e",
            BranchLabel::PsiIPlus => "psi_i_plus",
            BranchLabel::PsiIMinus => "psi_i_minus",
            BranchLabel::PsiJPlus => "psi_j_plus",
            BranchLabel::PsiJMinus => "psi_j_minus",
            BranchLabel::PsiKPlus => "psi_k_plus",
            BranchLabel::PsiKMinus => "psi_k_minus",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == s)
    }

    /// True for the two branches with real μ.
    pub fn is_real(self) -> bool {
        matches!(self, BranchLabel::PsiG | BranchLabel::PsiE)
    }

    /// Partner under the conjugation that swaps the pair (None for g/e).
    pub fn partner(self) -> Option<Self> {
        use BranchLabel::*;
        match self {
            PsiIPlus => Some(PsiIMinus),
            PsiIMinus => Some(PsiIPlus),
            PsiJPlus => Some(PsiJMinus),
            PsiJMinus => Some(PsiJPlus),
            PsiKPlus => Some(PsiKMinus),
            PsiKMinus => Some(PsiKPlus),
            PsiG | PsiE => None,
        }
    }

    /// The μ component that separates the two members of the pair
    /// (`μ_i`, `μ_j` or `μ_k`); zero for g/e.
    pub fn split_component(self, mu: Bicomplex) -> f64 {
        use BranchLabel::*;
        match self {
            PsiG | PsiE => 0.0,
            PsiIPlus | PsiIMinus => mu.ci,
            PsiJPlus | PsiJMinus => mu.cj,
            PsiKPlus | PsiKMinus => mu.ck,
        }
    }

    /// `+1` for the plus members, `−1` for the minus members, `0` for g/e.
    pub fn sign(self) -> f64 {
        use BranchLabel::*;
        match self {
            PsiIPlus | PsiJPlus | PsiKPlus => 1.0,
            PsiIMinus | PsiJMinus | PsiKMinus => -1.0,
            PsiG | PsiE => 0.0,
        }
    }

    /// Whether the nonvanishing μ components fit the label.
    pub fn consistent_with(self, mu: Bicomplex, tol: f64) -> bool {
        use BranchLabel::*;
        let small = |x: f64| x.abs() < tol;
        match self {
            PsiG | PsiE => small(mu.ci) && small(mu.cj) && small(mu.ck),
            PsiIPlus | PsiIMinus => small(mu.cj) && small(mu.ck),
            PsiJPlus | PsiJMinus => small(mu.ci) && small(mu.ck),
            PsiKPlus | PsiKMinus => small(mu.ci) && small(mu.cj),
        }
    }
}

impl core::fmt::Display for BranchLabel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Label for a non-real μ from its only nonvanishing imaginary component, or
/// `None` for real or mixed patterns.
pub fn pair_label(mu: Bicomplex, tol: f64) -> Option<BranchLabel> {
    use BranchLabel::*;
    let big = |x: f64| x.abs() >= tol;
    let pick = |x: f64, plus, minus| Some(if x > 0.0 { plus } else { minus });
    match (big(mu.ci), big(mu.cj), big(mu.ck)) {
        (true, false, false) => pick(mu.ci, PsiIPlus, PsiIMinus),
        (false, true, false) => pick(mu.cj, PsiJPlus, PsiJMinus),
        (false, false, true) => pick(mu.ck, PsiKPlus, PsiKMinus),
        _ => None,
    }
}

/// Labels a set of states at one parameter point: the pair-type states by
/// their μ pattern, the real-μ states `psi_g`, `psi_e` in order of `μ₁`.
pub fn label_states(states: &mut [Solution], tol: f64) -> Result<()> {
    let mut reals: Vec<usize> = Vec::new();
    for (k, s) in states.iter_mut().enumerate() {
        match pair_label(s.mu, tol) {
            Some(l) => s.branch = Some(l),
            None if BranchLabel::PsiG.consistent_with(s.mu, tol) => reals.push(k),
            None => return Err(Error::NumericalFailure("state with a mixed μ pattern")),
        }
    }
    if reals.len() > 2 {
        return Err(Error::NumericalFailure("more than two real-μ states"));
    }
    reals.sort_by(|&a, &b| states[a].mu.c1.total_cmp(&states[b].mu.c1));
    for (k, l) in reals.into_iter().zip([BranchLabel::PsiG, BranchLabel::PsiE]) {
        states[k].branch = Some(l);
    }
    Ok(())
}

/// Settings for seeding, continuation and bisection.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectrumConfig {
    pub solver: SolverConfig,
    /// γ values at which the `g = 0` states are built. They must lie on
    /// either side of the linear exceptional point.
    pub seed_gammas: [f64; 2],
    pub g_step: StepControl,
    pub gamma_step: StepControl,
    /// Width of the final bracket around a critical point.
    pub bisect_tol: f64,
    /// Threshold below which a μ component counts as vanishing.
    pub zero_tol: f64,
    /// Minimum size of the component (or PT_i defect) separating a pair
    /// state from the real branch it bifurcates from.
    pub split_tol: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            seed_gammas: [0.01, 0.05],
            g_step: StepControl::new(0.02, 1e-4),
            gamma_step: StepControl::new(1e-3, 1e-5),
            bisect_tol: 1e-6,
            zero_tol: 1e-6,
            split_tol: 1e-6,
        }
    }
}

impl SpectrumConfig {
    /// Whether `sol` still belongs to the branch `label`.
    pub fn accepts(&self, label: BranchLabel, sol: &Solution) -> bool {
        use BranchLabel::*;
        if !label.consistent_with(sol.mu, self.zero_tol) {
            return false;
        }
        let split = label.split_component(sol.mu);
        if split * label.sign() < -self.zero_tol {
            return false;
        }
        match label {
            PsiG | PsiE => true,
            PsiJPlus | PsiJMinus => split.abs() >= self.split_tol,
            // at γ = 0 the pair can have real μ and differs from ψ_g only in ψ
            PsiIPlus | PsiIMinus | PsiKPlus | PsiKMinus => {
                split.abs() >= self.split_tol || sol.psi.symmetry_defect(SymmetryOp::PTi) >= self.split_tol
            }
        }
    }
}

fn gamma_problem(g: f64, p: &PotentialParams, config: &SolverConfig) -> impl Fn(f64) -> Result<Problem> {
    let (p, config) = (*p, *config);
    move |gamma| Problem::new(g, &p.with_gamma(gamma), &config)
}

/// The labelled `g = 0` states at `gamma`, continued in `g` to the target.
/// States whose continuation fails are dropped; an error is returned only if
/// none survive.
pub fn seed_states(g: f64, gamma: f64, p: &PotentialParams, config: &SpectrumConfig) -> Result<Vec<Solution>> {
    if !g.is_finite() || g < 0.0 {
        return Err(Error::InvalidInput("g must be finite and non-negative"));
    }
    let pg = p.with_gamma(gamma);
    let mut states = linear_states(&pg, &config.solver)?;
    label_states(&mut states, config.zero_tol)?;
    if g == 0.0 {
        return Ok(states);
    }
    let mut out = Vec::with_capacity(states.len());
    for s in states {
        let label = s.branch.expect("labelled above");
        let mut track = Track::new(0.0, s);
        let make = |gv: f64| Problem::new(gv, &pg, &config.solver);
        if track.advance_checked(make, g, &config.g_step, |sol| config.accepts(label, sol)).is_ok() {
            out.push(track.into_solution());
        }
    }
    if out.is_empty() {
        return Err(Error::NotConverged("g outside continuation reach"));
    }
    Ok(out)
}

/// End of a branch: last γ with a solution and the nearest γ without one.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Boundary {
    pub last: f64,
    pub failed: f64,
}

/// One branch continued along the sweep grid.
#[derive(Clone, Debug)]
pub struct BranchTrack {
    pub label: BranchLabel,
    /// `(grid index, solution)` in increasing index order.
    pub points: Vec<(usize, Solution)>,
    /// Where continuation stopped below and above the seed, if it did.
    pub lower_end: Option<Boundary>,
    pub upper_end: Option<Boundary>,
}

/// Continues one labelled seed at `seed_gamma` in both directions over the
/// sorted `grid`.
pub fn track_branch(
    seed: &Solution,
    seed_gamma: f64,
    g: f64,
    grid: &[f64],
    p: &PotentialParams,
    config: &SpectrumConfig,
) -> Result<BranchTrack> {
    let label = seed.branch.ok_or(Error::InvalidInput("seed state carries no branch label"))?;
    let make = gamma_problem(g, p, &config.solver);
    let accept = |sol: &Solution| config.accepts(label, sol);
    let split = grid.partition_point(|&x| x < seed_gamma);
    let mut points = Vec::new();
    let mut lower_end = None;
    let mut track = Track::new(seed_gamma, seed.clone());
    for k in (0..split).rev() {
        if let Err(e) = track.advance_checked(&make, grid[k], &config.gamma_step, accept) {
            if !matches!(e, Error::NoSolution { .. } | Error::Diverged) {
                return Err(e);
            }
            lower_end = Some(Boundary {
                last: track.param(),
                failed: track.param() - config.gamma_step.min_step,
            });
            break;
        }
        points.push((k, track.solution().clone()));
    }
    points.reverse();
    let mut upper_end = None;
    let mut track = Track::new(seed_gamma, seed.clone());
    for (k, &gamma) in grid.iter().enumerate().skip(split) {
        if let Err(e) = track.advance_checked(&make, gamma, &config.gamma_step, accept) {
            if !matches!(e, Error::NoSolution { .. } | Error::Diverged) {
                return Err(e);
            }
            upper_end = Some(Boundary {
                last: track.param(),
                failed: track.param() + config.gamma_step.min_step,
            });
            break;
        }
        points.push((k, track.solution().clone()));
    }
    Ok(BranchTrack {
        label,
        points,
        lower_end,
        upper_end,
    })
}

/// All states found at one γ.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub gamma: f64,
    /// Ordered by branch label.
    pub solutions: Vec<Solution>,
    /// Set when the number of distinct states differs from four.
    pub gap: bool,
}

impl SweepPoint {
    pub fn branch(&self, label: BranchLabel) -> Option<&Solution> {
        self.solutions.iter().find(|s| s.branch == Some(label))
    }

    pub fn labels(&self) -> Vec<BranchLabel> {
        self.solutions.iter().filter_map(|s| s.branch).collect()
    }
}

/// Merges branch tracks into per-γ records. States of the same label found
/// by two tracks are kept once if their μ agree to 1e−6.
pub fn assemble(grid: &[f64], tracks: &[BranchTrack]) -> Vec<SweepPoint> {
    let mut points: Vec<SweepPoint> = grid
        .iter()
        .map(|&gamma| SweepPoint {
            gamma,
            solutions: Vec::new(),
            gap: false,
        })
        .collect();
    for t in tracks {
        for (k, sol) in &t.points {
            let slot = &mut points[*k].solutions;
            let dup = slot
                .iter()
                .any(|s| s.branch == sol.branch && (s.mu - sol.mu).max_abs() < 1e-6);
            if !dup {
                slot.push(sol.clone());
            }
        }
    }
    for pt in &mut points {
        pt.solutions.sort_by_key(|s| s.branch);
        pt.gap = pt.solutions.len() != 4;
    }
    points
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("γ grid must be non-empty and finite"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("γ grid must be strictly increasing"));
    }
    Ok(())
}

/// Seeds for a sweep: `(seed γ, state)` for both seed values.
pub fn sweep_seeds(g: f64, p: &PotentialParams, config: &SpectrumConfig) -> Result<Vec<(f64, Solution)>> {
    let mut out = Vec::new();
    for &gs in &config.seed_gammas {
        match seed_states(g, gs, p, config) {
            Ok(v) => out.extend(v.into_iter().map(|s| (gs, s))),
            Err(Error::NotConverged(_)) => {}
            Err(e) => return Err(e),
        }
    }
    if out.is_empty() {
        return Err(Error::NotConverged("g outside continuation reach"));
    }
    Ok(out)
}

/// Tracks every branch over the sorted γ grid at fixed `g`.
pub fn sweep(g: f64, grid: &[f64], p: &PotentialParams, config: &SpectrumConfig) -> Result<Vec<SweepPoint>> {
    check_grid(grid)?;
    let seeds = sweep_seeds(g, p, config)?;
    let tracks = seeds
        .iter()
        .map(|(gs, s)| track_branch(s, *gs, g, grid, p, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(grid, &tracks))
}

/// γ_c1 (pitchfork, emergence of the i± pair) and γ_c2 (tangent bifurcation
/// of the real pair).
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CriticalPoints {
    pub gamma_c1: f64,
    pub gamma_c2: f64,
}

/// Walks `track` toward `limit` until failure, then bisects the bracket down
/// to `config.bisect_tol`. Returns the last two accepted points, the
/// boundary-most last, or `None` in `.1` if `limit` itself was reached.
fn walk_and_bisect(
    mut track: Track,
    limit: f64,
    make: &dyn Fn(f64) -> Result<Problem>,
    accept: &dyn Fn(&Solution) -> bool,
    config: &SpectrumConfig,
) -> Result<(Vec<(f64, Solution)>, bool)> {
    let mut history: Vec<(f64, Solution)> = Vec::new();
    let step = config.gamma_step.max_step;
    let dir = if limit >= track.param() { 1.0 } else { -1.0 };
    let coarse = StepControl::new(step, config.gamma_step.min_step);
    let mut failed = None;
    while (limit - track.param()) * dir > 0.0 {
        let next = if (limit - track.param()).abs() <= step { limit } else { track.param() + dir * step };
        match track.advance_checked(make, next, &coarse, accept) {
            Ok(()) => history.push((track.param(), track.solution().clone())),
            Err(Error::NoSolution { .. } | Error::Diverged) => {
                failed = Some(track.param() + dir * config.gamma_step.min_step);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let Some(mut hi) = failed else {
        return Ok((history, false));
    };
    let fine = StepControl::new(config.gamma_step.min_step, config.bisect_tol * 0.25);
    while (hi - track.param()).abs() > config.bisect_tol {
        let mid = 0.5 * (hi + track.param());
        let mut trial = track.clone();
        match trial.advance_checked(make, mid, &fine, accept) {
            Ok(()) => {
                track = trial;
                history.push((track.param(), track.solution().clone()));
            }
            Err(Error::NoSolution { .. } | Error::Diverged) => hi = mid,
            Err(e) => return Err(e),
        }
    }
    Ok((history, true))
}

/// Root of the straight line through `(x0, y0)`, `(x1, y1)`, accepted if it
/// lies beyond `x1` by at most `reach`.
fn extrapolate_root(x0: f64, y0: f64, x1: f64, y1: f64, reach: f64) -> Option<f64> {
    if y0 == y1 || x0 == x1 {
        return None;
    }
    let root = x1 - y1 * (x1 - x0) / (y1 - y0);
    let ahead = (root - x1) * (x1 - x0).signum();
    (ahead >= 0.0 && ahead <= reach).then_some(root)
}

/// Locates both critical points at fixed `g` by existence bisection,
/// refined by extrapolating the squared splitting of the coalescing pair.
pub fn critical_points(g: f64, p: &PotentialParams, config: &SpectrumConfig) -> Result<CriticalPoints> {
    let [lo_seed, hi_seed] = config.seed_gammas;
    let make = gamma_problem(g, p, &config.solver);
    let low = seed_states(g, lo_seed, p, config)?;
    let high = seed_states(g, hi_seed, p, config)?;
    let find = |v: &[Solution], l: BranchLabel| v.iter().find(|s| s.branch == Some(l)).cloned();
    let reach = 10.0 * config.gamma_step.max_step;

    // γ_c2: both real states continued upward until they disappear
    let mut ends = Vec::new();
    for l in [BranchLabel::PsiG, BranchLabel::PsiE] {
        let s = find(&low, l).ok_or(Error::NotConverged("real branch missing at the lower seed"))?;
        let accept = |sol: &Solution| config.accepts(l, sol);
        let (hist, hit) = walk_and_bisect(Track::new(lo_seed, s), 2.0 * hi_seed, &make, &accept, config)?;
        if !hit {
            return Err(Error::NotConverged("real branch did not terminate"));
        }
        ends.push(hist);
    }
    let (hg, he) = (&ends[0], &ends[1]);
    let mut gamma_c2 = hg.last().map_or(lo_seed, |h| h.0).max(he.last().map_or(lo_seed, |h| h.0));
    // (μ_e − μ_g)² is linear in γ near the fold
    let gap_at = |gamma: f64| -> Option<f64> {
        let a = hg.iter().find(|h| (h.0 - gamma).abs() < 1e-12)?;
        let b = he.iter().find(|h| (h.0 - gamma).abs() < 1e-12)?;
        let d = b.1.mu - a.1.mu;
        Some(d.c1 * d.c1)
    };
    let shared: Vec<f64> = hg.iter().map(|h| h.0).filter(|&x| gap_at(x).is_some()).collect();
    if let [.., x0, x1] = shared[..] {
        if let Some(r) = extrapolate_root(x0, gap_at(x0).unwrap(), x1, gap_at(x1).unwrap(), reach) {
            gamma_c2 = gamma_c2.max(r);
        }
    }

    // γ_c1: the i+ state continued downward until it merges with ψ_g
    let s = find(&high, BranchLabel::PsiIPlus).ok_or(Error::NotConverged("i± branch missing at the upper seed"))?;
    let accept = |sol: &Solution| config.accepts(BranchLabel::PsiIPlus, sol);
    let (hist, hit) = walk_and_bisect(Track::new(hi_seed, s), 0.0, &make, &accept, config)?;
    let mut gamma_c1 = if hit { hist.last().map_or(hi_seed, |h| h.0) } else { 0.0 };
    if hit {
        // μ_i² is linear in γ near the pitchfork
        if let [.., (x0, s0), (x1, s1)] = &hist[..] {
            if let Some(r) = extrapolate_root(*x0, s0.mu.ci * s0.mu.ci, *x1, s1.mu.ci * s1.mu.ci, reach) {
                gamma_c1 = gamma_c1.min(r).max(0.0);
            }
        }
    }
    Ok(CriticalPoints { gamma_c1, gamma_c2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_names_round_trip() {
        for l in BranchLabel::ALL {
            assert_eq!(BranchLabel::from_name(l.name()), Some(l));
            if let Some(p) = l.partner() {
                assert_eq!(p.partner(), Some(l));
                assert_eq!(p.sign(), -l.sign());
            }
        }
        assert_eq!(BranchLabel::from_name("psi_x"), None);
    }

    #[test]
    fn pair_labels_from_mu_pattern() {
        let tol = 1e-6;
        assert_eq!(pair_label(Bicomplex::new(2.4, 0.01, 0.0, 0.0), tol), Some(BranchLabel::PsiIPlus));
        assert_eq!(pair_label(Bicomplex::new(2.4, 0.0, -0.01, 0.0), tol), Some(BranchLabel::PsiJMinus));
        assert_eq!(pair_label(Bicomplex::new(2.4, 0.0, 0.0, 0.02), tol), Some(BranchLabel::PsiKPlus));
        assert_eq!(pair_label(Bicomplex::real(2.4), tol), None);
        assert_eq!(pair_label(Bicomplex::new(2.4, 0.01, 0.01, 0.0), tol), None);
    }

    #[test]
    fn acceptance_rejects_wrong_sign_and_pattern() {
        let c = SpectrumConfig::default();
        assert!(BranchLabel::PsiJPlus.consistent_with(Bicomplex::new(1.0, 0.0, 0.5, 0.0), 1e-6));
        assert!(!BranchLabel::PsiJPlus.consistent_with(Bicomplex::new(1.0, 0.5, 0.0, 0.0), 1e-6));
        assert!(BranchLabel::PsiG.consistent_with(Bicomplex::real(1.0), c.zero_tol));
        assert_eq!(BranchLabel::PsiKMinus.split_component(Bicomplex::new(0.0, 1.0, 2.0, 3.0)), 3.0);
    }

    #[test]
    fn malformed_grids_are_rejected() {
        assert!(check_grid(&[]).is_err());
        assert!(check_grid(&[0.1, 0.1]).is_err());
        assert!(check_grid(&[0.2, 0.1]).is_err());
        assert!(check_grid(&[0.0, f64::NAN]).is_err());
        assert!(check_grid(&[0.0, 0.1]).is_ok());
    }

    #[test]
    fn root_extrapolation_stays_ahead() {
        assert_eq!(extrapolate_root(0.0, 2.0, 1.0, 1.0, 5.0), Some(2.0));
        assert_eq!(extrapolate_root(0.0, 2.0, 1.0, 1.0, 0.5), None);
        assert_eq!(extrapolate_root(0.0, 1.0, 1.0, 2.0, 5.0), None);
        assert_eq!(extrapolate_root(0.0, 1.0, 1.0, 1.0, 5.0), None);
    }
}
