//! Stationary states of the continued GPE by two-sided shooting from `x = 0`
//! and a damped Newton search on the decay and normalization conditions.
//!
//! The continued equation is invariant under `ψ → e^{iχ}ψ` for j-complex χ.
//! Writing `ψ = R + iI` with j-complex `R, I`, the gauge is fixed by one
//! j-linear condition on `(R, I, R', I')` at the origin (a [`GaugeSlice`]),
//! chosen orthogonal to the gauge orbit of a reference state.

mod continuation;
mod linear;
mod shooting;

use alloc::vec::Vec;

use crate::bicomplex::{Bicomplex, JComplex};
use crate::error::{Error, Result};
use crate::linalg::solve_dense;
use crate::model::{bicomplex_norm, classify_symmetry, max_residual, Classification, Grid, PotentialParams, Stencil, WaveFunction};
use crate::spectrum::BranchLabel;

pub use continuation::{StepControl, Track};
pub use linear::{linear_basis, linear_modes, linear_states, pair_guess, LinearMode};
use shooting::Shooter;

/// μ, ψ(0) and ψ'(0), four reals each.
pub(crate) const UNKNOWNS: usize = 12;

/// Unknowns below this magnitude are set to zero between iterations.
const TINY: f64 = 1e-100;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverConfig {
    pub grid: Grid,
    /// RK4 step; must divide the grid spacing.
    pub rk_step: f64,
    /// `|x|` beyond which the nonlinear term is omitted during integration.
    pub linear_tail: f64,
    /// Convergence threshold on the row-scaled residual.
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grid: Grid::standard(),
            rk_step: 0.005,
            linear_tail: 7.0,
            tol: 1e-9,
            max_iter: 100,
            max_halvings: 8,
        }
    }
}

/// Initial data at `x = 0` plus the chemical potential.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShootingState {
    pub mu: Bicomplex,
    pub psi0: Bicomplex,
    pub dpsi0: Bicomplex,
}

impl ShootingState {
    /// `(R, I, R', I')` at the origin.
    fn parts(&self) -> [JComplex; 4] {
        [self.psi0.re_part(), self.psi0.im_part(), self.dpsi0.re_part(), self.dpsi0.im_part()]
    }

    /// Multiplies the initial data by `e^{iχ}`.
    pub fn rotated(&self, chi: JComplex) -> Self {
        let (s, c) = (chi.sin(), chi.cos());
        let [r, im, dr, di] = self.parts();
        let rot = |re: JComplex, im: JComplex| Bicomplex::from_parts(c * re - s * im, s * re + c * im);
        Self {
            mu: self.mu,
            psi0: rot(r, im),
            dpsi0: rot(dr, di),
        }
    }

    /// Rotates within the gauge orbit onto `slice`.
    pub fn gauge_fixed(self, slice: &GaugeSlice) -> Result<Self> {
        let a = slice.value(&self);
        let b = slice.orbit_derivative(&self);
        if b.norm() < 1e-300 {
            return Err(Error::InvalidInput("gauge orbit is tangent to the slice"));
        }
        let chi = (-a / b).atan();
        if !(chi.re.is_finite() && chi.im.is_finite()) {
            return Err(Error::InvalidInput("gauge orbit misses the slice"));
        }
        Ok(self.rotated(chi))
    }

    pub(crate) fn to_unknowns(self) -> [f64; UNKNOWNS] {
        let (m, p, d) = (self.mu.to_array(), self.psi0.to_array(), self.dpsi0.to_array());
        core::array::from_fn(|k| match k / 4 {
            0 => m[k],
            1 => p[k - 4],
            _ => d[k - 8],
        })
    }

    pub(crate) fn from_unknowns(u: &[f64; UNKNOWNS]) -> Self {
        let b = |o: usize| Bicomplex::new(u[o], u[o + 1], u[o + 2], u[o + 3]);
        Self {
            mu: b(0),
            psi0: b(4),
            dpsi0: b(8),
        }
    }

    /// Applies an operation of the symmetry group to the initial data.
    pub fn apply(&self, op: crate::model::SymmetryOp) -> Self {
        use crate::bicomplex::Conjugation;
        use crate::model::SymmetryOp;
        let (t, flip) = match op {
            SymmetryOp::PTi => (Conjugation::Ti, true),
            SymmetryOp::Tj => (Conjugation::Tj, false),
            SymmetryOp::PTiTj => (Conjugation::TiTj, true),
        };
        let d = self.dpsi0.conj(t);
        Self {
            mu: self.mu.conj(t),
            psi0: self.psi0.conj(t),
            dpsi0: if flip { -d } else { d },
        }
    }

    /// Max-norm distance of the raw initial data and μ.
    pub fn distance(&self, other: &Self) -> f64 {
        let (a, b) = (self.to_unknowns(), other.to_unknowns());
        a.iter().zip(&b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
    }

    /// Distance after rotating `other` onto the slice through `self`, i.e.
    /// modulo the gauge group.
    pub fn gauge_distance(&self, other: &Self) -> Result<f64> {
        let slice = GaugeSlice::through(self)?;
        Ok(self.gauge_fixed(&slice)?.distance(&other.gauge_fixed(&slice)?))
    }
}

/// The j-linear gauge condition `Σ c_k z_k = 0` on `z = (R, I, R', I')` at
/// the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaugeSlice {
    coeffs: [JComplex; 4],
}

impl GaugeSlice {
    /// The slice normal to the gauge orbit at `s`. The orbit of `s` meets
    /// it after a small rotation.
    pub fn through(s: &ShootingState) -> Result<Self> {
        let [r, im, dr, di] = s.parts();
        // orbit tangent iψ = (−I, R, −I', R')
        let t = [-im, r, -di, dr];
        let size = libm::sqrt(t.iter().map(|z| z.norm_sqr()).sum::<f64>());
        if !(size > 1e-300) {
            return Err(Error::InvalidInput("initial data vanish at the origin"));
        }
        Ok(Self {
            coeffs: core::array::from_fn(|k| t[k].conj() / size),
        })
    }

    pub fn value(&self, s: &ShootingState) -> JComplex {
        self.coeffs.iter().zip(s.parts()).map(|(c, z)| c * z).sum()
    }

    /// `d/dχ` of [`GaugeSlice::value`] along the orbit at `χ = 0`.
    fn orbit_derivative(&self, s: &ShootingState) -> JComplex {
        let [r, im, dr, di] = s.parts();
        let t = [-im, r, -di, dr];
        self.coeffs.iter().zip(t).map(|(c, z)| c * z).sum()
    }

    /// `|value|`.
    pub fn defect(&self, s: &ShootingState) -> f64 {
        self.value(s).norm()
    }

    /// Gradient rows (1- and j-part) with respect to the unknowns.
    fn rows(&self) -> [[f64; UNKNOWNS]; 2] {
        let mut out = [[0.0; UNKNOWNS]; 2];
        // (R, I, R', I') = (c1 + j cj, ci + j ck) of ψ(0), then of ψ'(0)
        let slots = [(4, 6), (5, 7), (8, 10), (9, 11)];
        for (c, (x, y)) in self.coeffs.iter().zip(slots) {
            // c·(x + j y) = (a x − b y) + j(a y + b x)
            let (a, b) = (c.re, c.im);
            out[0][x] += a;
            out[0][y] -= b;
            out[1][x] += b;
            out[1][y] += a;
        }
        out
    }
}

/// A converged stationary state.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub mu: Bicomplex,
    pub psi: WaveFunction,
    /// Set by the spectrum sweep; `None` for a bare solve.
    pub branch: Option<BranchLabel>,
    /// Max |residual| of the fourth-order residual stencil on the grid.
    pub residual_norm: f64,
    pub iterations: usize,
}

impl Solution {
    pub fn state(&self) -> ShootingState {
        let (psi0, dpsi0) = self.psi.at_center();
        ShootingState { mu: self.mu, psi0, dpsi0 }
    }

    pub fn classify(&self) -> Classification {
        classify_symmetry(self.mu, &self.psi)
    }

    pub fn norm(&self) -> Bicomplex {
        bicomplex_norm(&self.psi)
    }

    pub fn with_branch(mut self, branch: BranchLabel) -> Self {
        self.branch = Some(branch);
        self
    }
}

/// A fixed problem `(g, V)` with its tabulated potential.
pub struct Problem {
    shooter: Shooter,
    g: Bicomplex,
    params: PotentialParams,
    config: SolverConfig,
}

impl Problem {
    pub fn new(g: impl Into<Bicomplex>, params: &PotentialParams, config: &SolverConfig) -> Result<Self> {
        params.validate()?;
        let g = g.into();
        Ok(Self {
            shooter: Shooter::new(config.grid, config.rk_step, config.linear_tail, g, params)?,
            g,
            params: *params,
            config: *config,
        })
    }

    pub fn g(&self) -> Bicomplex {
        self.g
    }

    pub fn params(&self) -> &PotentialParams {
        &self.params
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Residual rows: ψ(−L), ψ(L), norm − 1 (1- and j-part), gauge (1- and
    /// j-part). `full` selects the whole-domain norm; otherwise the norm is
    /// taken over the nonlinear region only.
    fn residual(&self, u: &[f64; UNKNOWNS], slice: &GaugeSlice, full: bool) -> Result<[f64; UNKNOWNS]> {
        let s = ShootingState::from_unknowns(u);
        let shot = self.shooter.shoot(s.mu, s.psi0, s.dpsi0, None)?;
        Ok(Self::residual_vector(&shot, &s, slice, full))
    }

    /// Residual and its exact Jacobian (row-major) from the tangent-linear
    /// integration.
    fn residual_and_jacobian(&self, u: &[f64; UNKNOWNS], slice: &GaugeSlice, full: bool) -> Result<([f64; UNKNOWNS], Vec<f64>)> {
        let s = ShootingState::from_unknowns(u);
        let units = [Bicomplex::ONE, Bicomplex::I, Bicomplex::J, Bicomplex::K];
        let z = Bicomplex::ZERO;
        // (δψ(0), δψ'(0), δμ) per unknown, in the order of `to_unknowns`
        let seeds: [(Bicomplex, Bicomplex, Bicomplex); UNKNOWNS] = core::array::from_fn(|k| {
            let e = units[k % 4];
            match k / 4 {
                0 => (z, z, e),
                1 => (e, z, z),
                _ => (z, e, z),
            }
        });
        let (shot, tangents) = self.shooter.shoot_linearized(s.mu, s.psi0, s.dpsi0, &seeds)?;
        let mut jac = alloc::vec![0.0; UNKNOWNS * UNKNOWNS];
        for (c, t) in tangents.iter().enumerate() {
            let (l, r) = (t.left.to_array(), t.right.to_array());
            let n = if full { t.norm } else { t.inner_norm };
            let col = [l[0], l[1], l[2], l[3], r[0], r[1], r[2], r[3], n.c1, n.cj];
            for (row, v) in col.iter().enumerate() {
                jac[row * UNKNOWNS + c] = *v;
            }
        }
        for (k, row) in slice.rows().iter().enumerate() {
            jac[(10 + k) * UNKNOWNS..(11 + k) * UNKNOWNS].copy_from_slice(row);
        }
        Ok((Self::residual_vector(&shot, &s, slice, full), jac))
    }

    fn residual_vector(shot: &shooting::Shot, s: &ShootingState, slice: &GaugeSlice, full: bool) -> [f64; UNKNOWNS] {
        let (l, r) = (shot.left.to_array(), shot.right.to_array());
        let n = if full { shot.norm } else { shot.inner_norm };
        let g = slice.value(s);
        [l[0], l[1], l[2], l[3], r[0], r[1], r[2], r[3], n.c1 - 1.0, n.cj, g.re, g.im]
    }

    /// Newton search from `guess`, in the gauge slice through the guess.
    pub fn solve(&self, guess: &ShootingState) -> Result<Solution> {
        self.solve_in(guess, &GaugeSlice::through(guess)?)
    }

    /// Newton search from `guess` in the given gauge slice.
    ///
    /// Iterates with the norm over the nonlinear region until converged, then
    /// switches to the whole-domain norm for the final iterations.
    pub fn solve_in(&self, guess: &ShootingState, slice: &GaugeSlice) -> Result<Solution> {
        let mut u = guess.gauge_fixed(slice)?.to_unknowns();
        let mut last = f64::INFINITY;
        let mut full = false;
        for iter in 0..self.config.max_iter {
            let (f, jac) = self.residual_and_jacobian(&u, slice, full)?;
            let scales: [f64; UNKNOWNS] = core::array::from_fn(|r| {
                let m = jac[r * UNKNOWNS..(r + 1) * UNKNOWNS].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                if m > 0.0 { 1.0 / m } else { 1.0 }
            });
            let scaled = |f: &[f64; UNKNOWNS]| f.iter().zip(&scales).fold(0.0_f64, |m, (v, s)| m.max((v * s).abs()));
            // decay rows measured in parameter units, normalization rows as is
            let converged = |f: &[f64; UNKNOWNS]| {
                let decay = (0..8).chain(10..12).fold(0.0_f64, |m, r| m.max((f[r] * scales[r]).abs()));
                decay.max(f[8].abs()).max(f[9].abs())
            };
            let current = scaled(&f);
            last = converged(&f);
            if last < self.config.tol {
                if full {
                    return self.finish(&u, iter);
                }
                full = true;
                continue;
            }
            let a: Vec<f64> = (0..UNKNOWNS * UNKNOWNS).map(|k| jac[k] * scales[k / UNKNOWNS]).collect();
            let b: Vec<f64> = (0..UNKNOWNS).map(|r| -f[r] * scales[r]).collect();
            // a singular Newton matrix counts as failure to converge
            let step = solve_dense(a, b).map_err(|_| Error::NoSolution {
                iterations: iter + 1,
                residual: last,
            })?;
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..=self.config.max_halvings {
                let trial: [f64; UNKNOWNS] = core::array::from_fn(|k| u[k] + lambda * step[k]);
                if let Ok(ft) = self.residual(&trial, slice, full) {
                    let r = scaled(&ft);
                    if r < current {
                        accepted = Some((trial, ft, r));
                        break;
                    }
                }
                lambda *= 0.5;
            }
            let Some((trial, ft, r)) = accepted else {
                return Err(Error::NoSolution {
                    iterations: iter + 1,
                    residual: last,
                });
            };
            u = trial;
            // roundoff-level components otherwise decay into subnormals
            for v in &mut u {
                if v.abs() < TINY {
                    *v = 0.0;
                }
            }
            last = converged(&ft);
            if full && last < self.config.tol && lambda == 1.0 && r < self.config.tol {
                return self.finish(&u, iter + 1);
            }
        }
        Err(Error::NoSolution {
            iterations: self.config.max_iter,
            residual: last,
        })
    }

    fn finish(&self, u: &[f64; UNKNOWNS], iterations: usize) -> Result<Solution> {
        let s = ShootingState::from_unknowns(u);
        let mut values = Vec::new();
        let mut derivs = Vec::new();
        self.shooter.shoot(s.mu, s.psi0, s.dpsi0, Some((&mut values, &mut derivs)))?;
        let psi = WaveFunction {
            grid: self.shooter.grid(),
            values,
            derivs,
        };
        let residual_norm = max_residual(&psi, s.mu, self.g, &self.params, Stencil::Numerov)?;
        Ok(Solution {
            mu: s.mu,
            psi,
            branch: None,
            residual_norm,
            iterations,
        })
    }
}

/// One-shot convenience wrapper around [`Problem::solve`].
pub fn solve(guess: &ShootingState, g: impl Into<Bicomplex>, p: &PotentialParams, config: &SolverConfig) -> Result<Solution> {
    Problem::new(g, p, config)?.solve(guess)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SymmetryOp;

    fn sample_state() -> ShootingState {
        ShootingState {
            mu: Bicomplex::new(2.41, 0.003, -0.002, 0.001),
            psi0: Bicomplex::new(0.52, 0.04, 0.01, -0.02),
            dpsi0: Bicomplex::new(0.003, -0.05, 0.002, 0.01),
        }
    }

    #[test]
    fn unknowns_round_trip() {
        let s = sample_state();
        assert_eq!(ShootingState::from_unknowns(&s.to_unknowns()), s);
    }

    #[test]
    fn slice_is_orthogonal_to_the_orbit() {
        let s = sample_state();
        let slice = GaugeSlice::through(&s).unwrap();
        let [r, im, dr, di] = s.parts();
        let size = libm::sqrt([im, r, di, dr].iter().map(|z| z.norm_sqr()).sum::<f64>());
        let d = slice.orbit_derivative(&s);
        assert!((d.re - size).abs() < 1e-14 && d.im.abs() < 1e-14);
    }

    #[test]
    fn gauge_fixing_undoes_a_rotation() {
        let s = sample_state();
        let slice = GaugeSlice::through(&s).unwrap();
        let on = s.gauge_fixed(&slice).unwrap();
        assert!(slice.defect(&on) < 1e-15);
        assert!(on.distance(&s) < 0.1);
        let moved = s.rotated(JComplex::new(0.3, -0.2));
        assert!(moved.distance(&s) > 0.05);
        let back = moved.gauge_fixed(&slice).unwrap();
        assert!(back.distance(&on) < 1e-13, "{}", back.distance(&on));
        assert!(s.gauge_distance(&moved).unwrap() < 1e-13);
    }

    #[test]
    fn symmetry_operations_are_involutions() {
        let s = sample_state();
        for op in [SymmetryOp::PTi, SymmetryOp::Tj, SymmetryOp::PTiTj] {
            assert!(s.apply(op).apply(op).distance(&s) < 1e-16);
        }
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let p = PotentialParams::standard().with_gamma(Bicomplex::new(0.03, 0.001, 0.002, -0.001));
        let problem = Problem::new(Bicomplex::new(0.2, 0.0, 0.01, 0.0), &p, &SolverConfig::default()).unwrap();
        let s = sample_state();
        let slice = GaugeSlice::through(&s).unwrap();
        let u = s.to_unknowns();
        for full in [false, true] {
            let (f, jac) = problem.residual_and_jacobian(&u, &slice, full).unwrap();
            assert_eq!(f, problem.residual(&u, &slice, full).unwrap());
            let diff = |c: usize, h: f64| -> [f64; UNKNOWNS] {
                let (mut up, mut dn) = (u, u);
                up[c] += h;
                dn[c] -= h;
                let (fp, fm) = (problem.residual(&up, &slice, full).unwrap(), problem.residual(&dn, &slice, full).unwrap());
                core::array::from_fn(|r| (fp[r] - fm[r]) / (2.0 * h))
            };
            for c in 0..UNKNOWNS {
                let h = 1e-4 * u[c].abs().max(0.1);
                let (d1, d2) = (diff(c, h), diff(c, 0.5 * h));
                for r in 0..UNKNOWNS {
                    let fd = (4.0 * d2[r] - d1[r]) / 3.0;
                    let row_scale = jac[r * UNKNOWNS..(r + 1) * UNKNOWNS].iter().fold(1.0_f64, |m, v| m.max(v.abs()));
                    let exact = jac[r * UNKNOWNS + c];
                    assert!((fd - exact).abs() < 1e-7 * row_scale, "full {full} row {r} col {c}: {exact} vs {fd}");
                }
            }
        }
    }

    #[test]
    fn linear_ground_state_matches_finite_differences() {
        let p = PotentialParams::standard();
        let config = SolverConfig::default();
        let (plus, _) = linear_modes(&p, &config.grid).unwrap();
        let sol = linear_basis(&p, &config)
            .unwrap()
            .into_iter()
            .min_by(|a, b| a.mu.c1.total_cmp(&b.mu.c1))
            .unwrap();
        assert!((sol.mu.c1 - plus[0].lambda.re).abs() < 1e-6, "{} vs {}", sol.mu.c1, plus[0].lambda.re);
        assert!(sol.mu.ci.abs().max(sol.mu.cj.abs()).max(sol.mu.ck.abs()) < 1e-10);
        assert!((sol.norm() - Bicomplex::ONE).norm() < 1e-9);
        assert!(sol.residual_norm < 1e-6);
    }

    #[test]
    fn vanishing_initial_data_are_rejected() {
        let z = ShootingState {
            mu: Bicomplex::real(2.4),
            psi0: Bicomplex::ZERO,
            dpsi0: Bicomplex::ZERO,
        };
        assert!(matches!(GaugeSlice::through(&z), Err(Error::InvalidInput(_))));
    }
}
