//! Encircling exceptional points: loop parameterisations, eigenvalue
//! tracking around a loop for the matrix model and for the GPE, and the
//! permutation read off after one cycle.
//!
//! A matrix-model eigenvalue is bicomplex, but the two idempotent components
//! are eigenvalues of two independent complex matrices. Each component is
//! therefore tracked on its own; the four bicomplex states are formed by a
//! pairing of plus and minus eigenvalues that is compatible with both
//! component permutations.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::bicomplex::{Bicomplex, IdempotentPair, JComplex};
use crate::error::{Error, Result};
use crate::matrix_model::{build_h, eigen_components, IdempotentEigs, ScalingMap, PERMUTATIONS_4};
use crate::model::PotentialParams;
use crate::solver::{Problem, Solution, StepControl, Track};
use crate::spectrum::{critical_points, sweep, BranchLabel, SpectrumConfig};

/// Number of states followed around a loop.
pub const STATES: usize = 4;
/// Maximum number of interval halvings when matching is unclear.
pub const MAX_REFINE: u32 = 3;
/// A step is refined when its motion exceeds this multiple of the median.
pub const MOTION_FACTOR: f64 = 5.0;
/// Tracked GPE states closer than this in μ count as merged.
pub const MERGE_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LoopTarget {
    /// `γ = γ_c + r e^{iθ}` at `g = 0`.
    LinearGamma,
    /// `γ = γ_c2 − r e^{jθ}`.
    GammaC2,
    /// `g = g_c1 + r e^{jθ}` at fixed γ.
    GC1,
    /// `γ = γ_c1 + i r e^{jθ}`.
    GammaC1Eps,
    /// `γ = γ_c + r e^{jθ} + iε` with `ε` along `j`.
    Ep4,
}

impl LoopTarget {
    pub const ALL: [LoopTarget; 5] = [
        LoopTarget::LinearGamma,
        LoopTarget::GammaC2,
        LoopTarget::GC1,
        LoopTarget::GammaC1Eps,
        LoopTarget::Ep4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LoopTarget::LinearGamma => "linear_gamma",
            LoopTarget::GammaC2 => "gamma_c2",
            LoopTarget::GC1 => "g_c1",
            LoopTarget::GammaC1Eps => "gamma_c1_eps",
            LoopTarget::Ep4 => "ep4",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s)
    }

    pub fn default_radius(self) -> f64 {
        match self {
            LoopTarget::LinearGamma => 7e-4,
            LoopTarget::GammaC2 => 1e-3,
            LoopTarget::GC1 => 5e-3,
            LoopTarget::GammaC1Eps => 5e-4,
            LoopTarget::Ep4 => 4e-4,
        }
    }

    /// Nonlinearity used for the γ loops.
    pub fn default_g(self) -> f64 {
        match self {
            LoopTarget::LinearGamma => 0.0,
            LoopTarget::Ep4 => 0.02,
            _ => 0.2,
        }
    }

    /// Whether the loop parameter is `g` rather than γ.
    pub fn loops_g(self) -> bool {
        self == LoopTarget::GC1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Backend {
    Gpe,
    Matrix,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Gpe => "gpe",
            Backend::Matrix => "matrix",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "gpe" => Some(Backend::Gpe),
            "matrix" => Some(Backend::Matrix),
            _ => None,
        }
    }
}

/// A circle in a complexified parameter plane.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LoopSpec {
    pub target: LoopTarget,
    /// Critical γ, or critical g for [`LoopTarget::GC1`].
    pub center: f64,
    pub radius: f64,
    pub steps: usize,
    pub backend: Backend,
    /// Nonlinearity of the γ loops.
    pub g: f64,
    /// Fixed γ of the g loop.
    pub gamma: f64,
    /// j-coefficient of the asymmetry on the EP4 path.
    pub eps: f64,
    pub clockwise: bool,
}

impl LoopSpec {
    /// A loop with the default radius, 128 steps and the default fixed
    /// parameters of `target`.
    pub fn new(target: LoopTarget, backend: Backend, center: f64) -> Result<Self> {
        let spec = Self {
            target,
            center,
            radius: target.default_radius(),
            steps: 128,
            backend,
            g: target.default_g(),
            gamma: 0.0,
            eps: if target == LoopTarget::Ep4 { 2e-4 } else { 0.0 },
            clockwise: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Centres from the matrix-model critical values.
    pub fn matrix(target: LoopTarget, map: &ScalingMap) -> Result<Self> {
        let g = target.default_g();
        let center = match target {
            LoopTarget::LinearGamma | LoopTarget::GammaC2 | LoopTarget::Ep4 => map.gamma_c2(),
            LoopTarget::GammaC1Eps => map.gamma_c1(g),
            LoopTarget::GC1 => map.g_c1(map.gamma_c1(g)),
        };
        let mut spec = Self::new(target, Backend::Matrix, center)?;
        if target.loops_g() {
            spec.gamma = map.gamma_c1(g);
        }
        Ok(spec)
    }

    /// Centres from GPE critical points. The linear exceptional point also
    /// centres the EP4 loop; the g loop sits at `g = 0.2` and the GPE γ_c1
    /// of that nonlinearity.
    pub fn gpe(target: LoopTarget, p: &PotentialParams, config: &SpectrumConfig) -> Result<Self> {
        let g = target.default_g();
        let mut spec = match target {
            LoopTarget::LinearGamma | LoopTarget::Ep4 => {
                Self::new(target, Backend::Gpe, critical_points(0.0, p, config)?.gamma_c2)?
            }
            LoopTarget::GammaC2 => Self::new(target, Backend::Gpe, critical_points(g, p, config)?.gamma_c2)?,
            LoopTarget::GammaC1Eps => Self::new(target, Backend::Gpe, critical_points(g, p, config)?.gamma_c1)?,
            LoopTarget::GC1 => {
                let mut s = Self::new(target, Backend::Gpe, g)?;
                s.gamma = critical_points(g, p, config)?.gamma_c1;
                s
            }
        };
        spec.steps = 64;
        Ok(spec)
    }

    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        self.radius = radius;
        self.validate()?;
        Ok(self)
    }

    pub fn with_steps(mut self, steps: usize) -> Result<Self> {
        self.steps = steps;
        self.validate()?;
        Ok(self)
    }

    pub fn reversed(mut self) -> Self {
        self.clockwise = !self.clockwise;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidInput("loop radius must be positive"));
        }
        if self.steps < 32 {
            return Err(Error::InvalidInput("a loop needs at least 32 steps"));
        }
        if !(self.center.is_finite() && self.g.is_finite() && self.gamma.is_finite() && self.eps.is_finite()) {
            return Err(Error::InvalidInput("loop parameters must be finite"));
        }
        Ok(())
    }

    /// Parameters at plane coordinates `(x, y)` relative to the centre; the
    /// loop itself is `(r cos θ, r sin θ)`.
    pub fn plane_point(&self, x: f64, y: f64) -> (Bicomplex, Bicomplex) {
        let (c, r) = (Bicomplex::real(self.center), Bicomplex::new(x, 0.0, y, 0.0));
        let g = Bicomplex::real(self.g);
        match self.target {
            LoopTarget::LinearGamma => (g, c + Bicomplex::new(x, y, 0.0, 0.0)),
            LoopTarget::GammaC2 => (g, c - r),
            LoopTarget::GC1 => (c + r, Bicomplex::real(self.gamma)),
            LoopTarget::GammaC1Eps => (g, c + Bicomplex::I * r),
            LoopTarget::Ep4 => (g, c + r + Bicomplex::I * Bicomplex::J.scale(self.eps)),
        }
    }

    pub fn point(&self, theta: f64) -> PathPoint {
        let t = if self.clockwise { -theta } else { theta };
        let (g, gamma) = self.plane_point(self.radius * libm::cos(t), self.radius * libm::sin(t));
        PathPoint { theta, g, gamma }
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| 2.0 * PI * k as f64 / self.steps as f64).collect()
    }
}

/// Physical parameters at one loop angle. The i-part of `gamma` is the
/// asymmetry.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PathPoint {
    pub theta: f64,
    pub g: Bicomplex,
    pub gamma: Bicomplex,
}

/// `steps + 1` points from θ = 0 to θ = 2π inclusive.
pub fn make_path(spec: &LoopSpec) -> Vec<PathPoint> {
    spec.thetas().into_iter().map(|t| spec.point(t)).collect()
}

/// Component permutations of a matrix-model loop.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComponentPermutations {
    pub plus: Vec<usize>,
    pub minus: Vec<usize>,
    /// State `a` is `plus[a]` joined with `minus[pairing[a]]`.
    pub pairing: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PermutationResult {
    /// State `a` ends where state `mapping[a]` started.
    pub mapping: Vec<usize>,
    pub cycles: Vec<Vec<usize>>,
    pub closure_error: f64,
    pub components: Option<ComponentPermutations>,
}

impl PermutationResult {
    pub fn new(mapping: Vec<usize>, closure_error: f64) -> Result<Self> {
        if !is_permutation(&mapping) {
            return Err(Error::InvalidInput("mapping is not a bijection"));
        }
        Ok(Self {
            cycles: cycles(&mapping),
            mapping,
            closure_error,
            components: None,
        })
    }

    /// Cycle lengths in decreasing order.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles.iter().map(Vec::len).collect();
        t.sort_unstable_by(|a, b| b.cmp(a));
        t
    }

    /// Mapping after `n` cycles.
    pub fn power(&self, n: usize) -> Vec<usize> {
        let mut m: Vec<usize> = (0..self.mapping.len()).collect();
        for _ in 0..n {
            m = m.iter().map(|&a| self.mapping[a]).collect();
        }
        m
    }

    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.mapping.len()];
        for (a, &b) in self.mapping.iter().enumerate() {
            inv[b] = a;
        }
        inv
    }
}

pub fn is_permutation(m: &[usize]) -> bool {
    let mut seen = vec![false; m.len()];
    m.iter().all(|&b| b < m.len() && !core::mem::replace(&mut seen[b], true))
}

/// Cycle decomposition including fixed points, each cycle starting at its
/// smallest element.
pub fn cycles(m: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; m.len()];
    let mut out = Vec::new();
    for start in 0..m.len() {
        if seen[start] {
            continue;
        }
        let mut c = Vec::new();
        let mut a = start;
        while !seen[a] {
            seen[a] = true;
            c.push(a);
            a = m[a];
        }
        out.push(c);
    }
    out
}

/// Eigenvalues (or chemical potentials) of the tracked states on the
/// `steps + 1` loop nodes.
#[derive(Clone, Debug)]
pub struct LoopTrack {
    pub spec: LoopSpec,
    pub thetas: Vec<f64>,
    /// `states[k][a]` is state `a` at `thetas[k]`.
    pub states: Vec<Vec<Bicomplex>>,
    /// Branch of each state at θ = 0, when known.
    pub labels: Vec<Option<BranchLabel>>,
    /// Intervals that needed refinement.
    pub refined: usize,
    pub result: PermutationResult,
}

impl LoopTrack {
    /// Arithmetic mean of the state values at θ = 0.
    pub fn mean(&self) -> Bicomplex {
        let first = &self.states[0];
        first.iter().fold(Bicomplex::ZERO, |s, &m| s + m).scale(1.0 / first.len() as f64)
    }
}

/// Nearest-neighbour assignment `next[perm[a]] ↔ prev[a]` minimising the
/// summed squared distance.
struct Assignment {
    perm: [usize; 4],
    /// Largest matched distance.
    motion: f64,
    /// The runner-up assignment is almost as good.
    ambiguous: bool,
}

fn assign<T: Copy>(prev: &[T; 4], next: &[T; 4], dist: impl Fn(T, T) -> f64) -> Assignment {
    let mut d = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            d[a][b] = dist(prev[a], next[b]);
        }
    }
    let (mut best, mut second) = ((f64::INFINITY, [0, 1, 2, 3]), f64::INFINITY);
    for p in PERMUTATIONS_4 {
        let cost: f64 = (0..4).map(|a| d[a][p[a]] * d[a][p[a]]).sum();
        if cost < best.0 {
            second = best.0;
            best = (cost, p);
        } else if cost < second {
            second = cost;
        }
    }
    let perm = best.1;
    Assignment {
        perm,
        motion: (0..4).map(|a| d[a][perm[a]]).fold(0.0, f64::max),
        ambiguous: second <= 4.0 * best.0,
    }
}

fn reorder<T: Copy>(next: &[T; 4], perm: &[usize; 4]) -> [T; 4] {
    core::array::from_fn(|a| next[perm[a]])
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn cdist(a: JComplex, b: JComplex) -> f64 {
    (a - b).norm()
}

fn bdist(a: Bicomplex, b: Bicomplex) -> f64 {
    (a - b).norm()
}

/// Follows four complex eigenvalues over `thetas`, refining intervals whose
/// motion exceeds `MOTION_FACTOR` times the median.
fn follow<F>(eval: &F, thetas: &[f64], values: &[[JComplex; 4]], refined: &mut usize) -> Result<Vec<[JComplex; 4]>>
where
    F: Fn(f64) -> Result<[JComplex; 4]>,
{
    let motions = values.windows(2).map(|w| assign(&w[0], &w[1], cdist).motion).collect();
    let limit = (MOTION_FACTOR * median(motions)).max(1e-14);
    let mut out = Vec::with_capacity(values.len());
    out.push(values[0]);
    for k in 1..values.len() {
        let cur = out[k - 1];
        let next = step(eval, (thetas[k - 1], thetas[k]), &cur, &values[k], limit, 0, refined)?;
        out.push(next);
    }
    Ok(out)
}

fn step<F>(
    eval: &F,
    (a, b): (f64, f64),
    cur: &[JComplex; 4],
    next: &[JComplex; 4],
    limit: f64,
    level: u32,
    refined: &mut usize,
) -> Result<[JComplex; 4]>
where
    F: Fn(f64) -> Result<[JComplex; 4]>,
{
    let m = assign(cur, next, cdist);
    if m.motion <= limit {
        return Ok(reorder(next, &m.perm));
    }
    if level == MAX_REFINE {
        if m.ambiguous {
            return Err(Error::TrackingFailure {
                theta: b,
                reason: "ambiguous eigenvalue matching after refinement",
            });
        }
        return Ok(reorder(next, &m.perm));
    }
    if level == 0 {
        *refined += 1;
    }
    let mid_t = 0.5 * (a + b);
    let mid = step(eval, (a, mid_t), cur, &eval(mid_t)?, limit, level + 1, refined)?;
    step(eval, (mid_t, b), &mid, next, limit, level + 1, refined)
}

/// Permutation closing a component track: `final[a]` sits at `initial[p[a]]`.
fn closure(track: &[[JComplex; 4]]) -> ([usize; 4], f64) {
    let m = assign(&track[0], &track[track.len() - 1], cdist);
    let mut p = [0; 4];
    for (a, &b) in m.perm.iter().enumerate() {
        p[b] = a;
    }
    (p, m.motion)
}

/// Pairings σ with `σ∘π₊ = π₋∘σ`, choosing the one closest to joining each
/// plus eigenvalue with the conjugate of its minus partner (smallest j and k
/// parts of the bicomplex states).
fn compatible_pairing(plus: &[usize; 4], minus: &[usize; 4], p0: &[JComplex; 4], m0: &[JComplex; 4]) -> Option<[usize; 4]> {
    PERMUTATIONS_4
        .into_iter()
        .filter(|s| (0..4).all(|a| s[plus[a]] == minus[s[a]]))
        .map(|s| {
            let cost: f64 = (0..4).map(|a| (p0[a] - m0[s[a]].conj()).norm_sqr()).sum();
            (cost, s)
        })
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .map(|(_, s)| s)
}

fn min_gap(v: &[JComplex; 4]) -> f64 {
    let mut gap = f64::INFINITY;
    for a in 0..4 {
        for b in a + 1..4 {
            gap = gap.min(cdist(v[a], v[b]));
        }
    }
    gap
}

/// Model eigenvalue components at one loop point.
pub fn matrix_eigs(point: &PathPoint, map: &ScalingMap) -> Result<IdempotentEigs> {
    eigen_components(&build_h(&map.scale_combined(point.g, point.gamma))?)
}

/// Tracks the four matrix-model eigenvalues around the loop. Reported values
/// are in physical units (`μ̃ + μ₀`).
pub fn track_matrix(spec: &LoopSpec, map: &ScalingMap) -> Result<LoopTrack> {
    spec.validate()?;
    let thetas = spec.thetas();
    let eigs = thetas
        .iter()
        .map(|&t| matrix_eigs(&spec.point(t), map))
        .collect::<Result<Vec<_>>>()?;
    let start = &eigs[0];
    if min_gap(&start.plus).min(min_gap(&start.minus)) < 1e-6 {
        // e.g. g = 0, where the model spectrum is doubly degenerate
        return Err(Error::TrackingFailure {
            theta: 0.0,
            reason: "degenerate model eigenvalues at the loop start",
        });
    }
    let eval_plus = |t: f64| matrix_eigs(&spec.point(t), map).map(|e| e.plus);
    let eval_minus = |t: f64| matrix_eigs(&spec.point(t), map).map(|e| e.minus);
    let mut refined = 0;
    let plus = follow(&eval_plus, &thetas, &eigs.iter().map(|e| e.plus).collect::<Vec<_>>(), &mut refined)?;
    let minus = follow(&eval_minus, &thetas, &eigs.iter().map(|e| e.minus).collect::<Vec<_>>(), &mut refined)?;
    let (pp, ep) = closure(&plus);
    let (pm, em) = closure(&minus);
    let pairing = compatible_pairing(&pp, &pm, &plus[0], &minus[0]).ok_or(Error::TrackingFailure {
        theta: 2.0 * PI,
        reason: "idempotent components permute with different cycle types",
    })?;
    let shift = Bicomplex::real(map.mu0);
    let states = plus
        .iter()
        .zip(&minus)
        .map(|(p, m)| {
            (0..STATES)
                .map(|a| Bicomplex::join(IdempotentPair::new(p[a], m[pairing[a]])) + shift)
                .collect()
        })
        .collect();
    let mut result = PermutationResult::new(pp.to_vec(), ep.max(em) / core::f64::consts::SQRT_2)?;
    result.components = Some(ComponentPermutations {
        plus: pp.to_vec(),
        minus: pm.to_vec(),
        pairing: pairing.to_vec(),
    });
    Ok(LoopTrack {
        spec: *spec,
        thetas,
        states,
        labels: vec![None; STATES],
        refined,
        result,
    })
}

/// Real parameters from which the GPE states are seeded.
fn anchor(spec: &LoopSpec) -> (f64, f64) {
    match spec.target {
        LoopTarget::GC1 => (spec.center + spec.radius, spec.gamma),
        LoopTarget::GammaC2 => (spec.g, spec.center - spec.radius),
        _ => (spec.g, spec.center + spec.radius),
    }
}

/// The four GPE states at θ = 0 of the loop. They are continued from the
/// real anchor along a segment that bulges into the j-direction of γ, since
/// a route inside the real parameter space can run into a fold.
pub fn gpe_seeds(spec: &LoopSpec, p: &PotentialParams, config: &SpectrumConfig) -> Result<Vec<Solution>> {
    spec.validate()?;
    let (g_a, gamma_a) = anchor(spec);
    let point = sweep(g_a, &[gamma_a], p, config)?.pop().ok_or(Error::NotConverged("empty sweep at the loop start"))?;
    let seeds = point.solutions;
    if seeds.len() != STATES {
        return Err(Error::NotConverged("fewer than four states at the loop start"));
    }
    let start = spec.point(0.0);
    let (ga, gam_a) = (Bicomplex::real(g_a), Bicomplex::real(gamma_a));
    if start.g == ga && start.gamma == gam_a {
        return Ok(seeds);
    }
    let (pp, solver) = (*p, config.solver);
    let bulge = Bicomplex::J.scale(2.0 * spec.radius);
    let make = |s: f64| {
        let g = ga + (start.g - ga).scale(s);
        let gamma = gam_a + (start.gamma - gam_a).scale(s) + bulge.scale(s * (1.0 - s));
        Problem::new(g, &pp.with_gamma(gamma), &solver)
    };
    let ctrl = StepControl::new(0.25, 1.0 / 1024.0);
    seeds
        .into_iter()
        .map(|s| {
            let mut track = Track::new(0.0, s);
            track.advance(make, 1.0, &ctrl)?;
            Ok(track.into_solution())
        })
        .collect()
}

/// Continues one GPE state around the loop, returning μ on every node. An
/// interval whose motion exceeds `MOTION_FACTOR` times the running median is
/// redone with smaller continuation steps, up to `MAX_REFINE` halvings.
pub fn track_gpe_state(seed: &Solution, spec: &LoopSpec, p: &PotentialParams, config: &SpectrumConfig) -> Result<(Vec<Bicomplex>, usize)> {
    spec.validate()?;
    let thetas = spec.thetas();
    let (pp, solver) = (*p, config.solver);
    let make = |t: f64| {
        let pt = spec.point(t);
        Problem::new(pt.g, &pp.with_gamma(pt.gamma), &solver)
    };
    let h = 2.0 * PI / spec.steps as f64;
    let mut track = Track::new(0.0, seed.clone());
    let mut mus = vec![seed.mu];
    let mut motions: Vec<f64> = Vec::new();
    let mut refined = 0;
    for &t in &thetas[1..] {
        let prev = track.clone();
        let mut level = 0;
        loop {
            let ctrl = StepControl::new(h / f64::from(1u32 << level), h / f64::from(1u32 << (MAX_REFINE + 2)));
            let mut attempt = prev.clone();
            let outcome = attempt.advance(make, t, &ctrl);
            let ok = outcome.is_ok();
            let motion = if ok { bdist(attempt.solution().mu, prev.solution().mu) } else { f64::INFINITY };
            let typical = median(motions.clone());
            let suspicious = motions.len() >= 4 && motion > MOTION_FACTOR * typical;
            if ok && (!suspicious || level == MAX_REFINE) {
                motions.push(motion);
                track = attempt;
                break;
            }
            if level == MAX_REFINE {
                return Err(outcome.err().unwrap_or(Error::TrackingFailure {
                    theta: t,
                    reason: "continuation failed around the loop",
                }));
            }
            if level == 0 {
                refined += 1;
            }
            level += 1;
        }
        mus.push(track.solution().mu);
    }
    Ok((mus, refined))
}

/// Combines per-state tracks into a [`LoopTrack`]. Fails if two tracked
/// states coincide on a node or the end points do not close onto the start
/// set.
pub fn assemble_gpe(
    spec: &LoopSpec,
    labels: Vec<Option<BranchLabel>>,
    tracks: Vec<(Vec<Bicomplex>, usize)>,
    merge_tol: f64,
) -> Result<LoopTrack> {
    let thetas = spec.thetas();
    if tracks.len() != STATES || labels.len() != STATES || tracks.iter().any(|t| t.0.len() != thetas.len()) {
        return Err(Error::InvalidInput("expected four complete state tracks"));
    }
    let refined = tracks.iter().map(|t| t.1).sum();
    let states: Vec<Vec<Bicomplex>> = (0..thetas.len())
        .map(|k| tracks.iter().map(|t| t.0[k]).collect())
        .collect();
    for (k, row) in states.iter().enumerate() {
        for a in 0..STATES {
            for b in a + 1..STATES {
                if bdist(row[a], row[b]) < merge_tol {
                    return Err(Error::TrackingFailure {
                        theta: thetas[k],
                        reason: "two tracked states merged",
                    });
                }
            }
        }
    }
    let first: [Bicomplex; 4] = core::array::from_fn(|a| states[0][a]);
    let last: [Bicomplex; 4] = core::array::from_fn(|a| states[thetas.len() - 1][a]);
    // state a ends at last[a]; find which initial state it landed on
    let m = assign(&last, &first, bdist);
    let result = PermutationResult::new(m.perm.to_vec(), m.motion)?;
    Ok(LoopTrack {
        spec: *spec,
        thetas,
        states,
        labels,
        refined,
        result,
    })
}

/// Tracks the four GPE states around the loop, one after another.
pub fn track_gpe(spec: &LoopSpec, p: &PotentialParams, config: &SpectrumConfig) -> Result<LoopTrack> {
    let seeds = gpe_seeds(spec, p, config)?;
    let tracks = seeds
        .iter()
        .map(|s| track_gpe_state(s, spec, p, config))
        .collect::<Result<Vec<_>>>()?;
    assemble_gpe(spec, seeds.iter().map(|s| s.branch).collect(), tracks, MERGE_TOL)
}

/// Eigenvalues at one node of a sheet scan.
#[derive(Clone, Debug)]
pub struct SheetNode {
    pub x: f64,
    pub y: f64,
    pub values: core::result::Result<Vec<Bicomplex>, Error>,
}

/// Uniform `nx × ny` grid over `[-extent, extent]²` in the loop plane.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScanGrid {
    pub extent: f64,
    pub nx: usize,
    pub ny: usize,
}

impl ScanGrid {
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let coord = |k: usize, n: usize| {
            if n <= 1 {
                0.0
            } else {
                -self.extent + 2.0 * self.extent * k as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                out.push((coord(ix, self.nx), coord(iy, self.ny)));
            }
        }
        out
    }
}

/// Matrix-model eigenvalues over the scan grid, joined component by
/// component in lexicographic order. No matching across nodes.
pub fn sheet_scan_matrix(spec: &LoopSpec, grid: &ScanGrid, map: &ScalingMap) -> Vec<SheetNode> {
    grid.nodes()
        .into_iter()
        .map(|(x, y)| {
            let (g, gamma) = spec.plane_point(x, y);
            let pt = PathPoint { theta: 0.0, g, gamma };
            let values = matrix_eigs(&pt, map).map(|e| e.join([0, 1, 2, 3]).iter().map(|&m| m + Bicomplex::real(map.mu0)).collect());
            SheetNode { x, y, values }
        })
        .collect()
}

/// GPE chemical potentials over the scan grid. Each node is reached from the
/// θ = 0 states along a straight segment in the loop plane; failures are
/// stored per node.
pub fn sheet_scan_gpe(spec: &LoopSpec, grid: &ScanGrid, p: &PotentialParams, config: &SpectrumConfig) -> Result<Vec<SheetNode>> {
    let seeds = gpe_seeds(spec, p, config)?;
    Ok(grid
        .nodes()
        .into_iter()
        .map(|(x, y)| SheetNode {
            x,
            y,
            values: scan_node_gpe(spec, &seeds, x, y, p, config),
        })
        .collect())
}

/// Chemical potentials at plane point `(x, y)`, continued from `seeds`
/// (the θ = 0 states from [`gpe_seeds`]).
pub fn scan_node_gpe(spec: &LoopSpec, seeds: &[Solution], x: f64, y: f64, p: &PotentialParams, config: &SpectrumConfig) -> Result<Vec<Bicomplex>> {
    let (pp, solver, r) = (*p, config.solver, spec.radius);
    let make = |s: f64| {
        let (g, gamma) = spec.plane_point(r + s * (x - r), s * y);
        Problem::new(g, &pp.with_gamma(gamma), &solver)
    };
    let ctrl = StepControl::new(0.1, 1.0 / 4096.0);
    seeds
        .iter()
        .map(|s| {
            let mut track = Track::new(0.0, s.clone());
            track.advance(make, 1.0, &ctrl)?;
            Ok(track.solution().mu)
        })
        .collect()
}
