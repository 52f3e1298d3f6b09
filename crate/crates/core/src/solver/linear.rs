//! Lowest two modes of the linear (`g = 0`) problem from the three-point
//! finite-difference operator, per idempotent component.
//!
//! In the linear case the two components `P = ψ_R − jψ_I`, `M = ψ_R + jψ_I`
//! decouple into complex-symmetric Schrödinger problems with potentials
//! `V₊` and `V₋`. A bicomplex eigenstate pairs one mode of each.

use alloc::vec::Vec;

use crate::bicomplex::{Bicomplex, IdempotentPair, JComplex};
use crate::error::{Error, Result};
use crate::model::{potential, potential_real, Grid, PotentialParams};

use super::{Problem, ShootingState, Solution, SolverConfig};

/// Relative; the log-derivative sum carries roundoff near 1e-12.
const NEWTON_TOL: f64 = 1e-11;
const NEWTON_MAX: usize = 100;
/// Largest |γ| increment per continuation step from the Hermitian limit.
const GAMMA_STEP: f64 = 0.004;

/// One mode of a single idempotent component.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMode {
    /// Richardson-extrapolated eigenvalue (grid h and h/2).
    pub lambda: JComplex,
    /// Eigenvalue on the given grid alone.
    pub lambda_h: JComplex,
    /// Eigenvector on the interior nodes of the given grid, max-normalized.
    pub vector: Vec<JComplex>,
}

struct Tridiagonal {
    diag: Vec<JComplex>,
    /// Off-diagonal squared, `1/h⁴`.
    off2: f64,
    off: f64,
}

impl Tridiagonal {
    fn new(grid: &Grid, v: impl Fn(f64) -> JComplex) -> Self {
        let h = grid.spacing();
        let d0 = 2.0 / (h * h);
        Self {
            diag: (1..grid.nodes - 1).map(|i| v(grid.x(i)) + d0).collect(),
            off2: 1.0 / (h * h * h * h),
            off: -1.0 / (h * h),
        }
    }

    /// `d/dλ ln det(T − λ)`.
    fn log_derivative(&self, lambda: JComplex) -> JComplex {
        let mut r_prev = JComplex::new(1.0, 0.0);
        let mut dr_prev = JComplex::new(0.0, 0.0);
        let mut acc = JComplex::new(0.0, 0.0);
        for (n, &d) in self.diag.iter().enumerate() {
            let (r, dr) = if n == 0 {
                (d - lambda, JComplex::new(-1.0, 0.0))
            } else {
                let q = self.off2 / r_prev;
                (d - lambda - q, JComplex::new(-1.0, 0.0) + q * dr_prev / r_prev)
            };
            acc += dr / r;
            r_prev = r;
            dr_prev = dr;
        }
        acc
    }

    /// Inverse iteration for the eigenvector closest to `lambda`.
    fn eigenvector(&self, lambda: JComplex) -> Vec<JComplex> {
        let n = self.diag.len();
        let mut x = alloc::vec![JComplex::new(1.0, 0.0); n];
        // shift slightly so the system is not exactly singular
        let shift = lambda + JComplex::new(1e-10 * (1.0 + lambda.norm()), 0.0);
        for _ in 0..3 {
            x = self.thomas(shift, &x);
            let m = x.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
            let pivot = *x.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
            let phase = pivot / pivot.norm();
            for z in &mut x {
                *z /= phase * m;
            }
        }
        x
    }

    fn thomas(&self, lambda: JComplex, rhs: &[JComplex]) -> Vec<JComplex> {
        let n = self.diag.len();
        let off = JComplex::new(self.off, 0.0);
        let mut c = alloc::vec![JComplex::new(0.0, 0.0); n];
        let mut d = alloc::vec![JComplex::new(0.0, 0.0); n];
        let mut b = self.diag[0] - lambda;
        c[0] = off / b;
        d[0] = rhs[0] / b;
        for i in 1..n {
            b = self.diag[i] - lambda - off * c[i - 1];
            c[i] = off / b;
            d[i] = (rhs[i] - off * d[i - 1]) / b;
        }
        for i in (0..n - 1).rev() {
            let next = d[i + 1];
            d[i] -= c[i] * next;
        }
        d
    }
}

/// Lowest `count` eigenvalues of the real symmetric operator by Sturm bisection.
pub(crate) fn sturm_lowest(grid: &Grid, p: &PotentialParams, count: usize) -> Vec<f64> {
    let h = grid.spacing();
    let d0 = 2.0 / (h * h);
    let off2 = 1.0 / (h * h * h * h);
    let diag: Vec<f64> = (1..grid.nodes - 1).map(|i| potential_real(grid.x(i), p) + d0).collect();
    let below = |lambda: f64| {
        let mut q = 1.0;
        let mut n = 0;
        for (k, &d) in diag.iter().enumerate() {
            q = if k == 0 { d - lambda } else { d - lambda - off2 / q };
            if q == 0.0 {
                q = -1e-300;
            }
            if q < 0.0 {
                n += 1;
            }
        }
        n
    };
    let lo0 = diag.iter().cloned().fold(f64::INFINITY, f64::min) - 4.0 / (h * h);
    (0..count)
        .map(|k| {
            let (mut lo, mut hi) = (lo0, lo0 + 100.0);
            while below(hi) <= k {
                hi += 100.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if below(mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo < 1e-14 * hi.abs().max(1.0) {
                    break;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Newton with mutual deflation (Maehly) on the two roots.
fn refine_pair(t: &Tridiagonal, start: [JComplex; 2]) -> Result<[JComplex; 2]> {
    let mut z = start;
    for _ in 0..NEWTON_MAX {
        let mut worst: f64 = 0.0;
        for k in 0..2 {
            let other = z[1 - k];
            let ld = t.log_derivative(z[k]);
            let diff = z[k] - other;
            let denom = if diff.norm() > 0.0 { ld - JComplex::new(1.0, 0.0) / diff } else { ld };
            if denom.norm() == 0.0 || !denom.re.is_finite() || !denom.im.is_finite() {
                return Err(Error::NumericalFailure("linear mode iteration hit a pole"));
            }
            let step = -JComplex::new(1.0, 0.0) / denom;
            z[k] += step;
            worst = worst.max(step.norm() / z[k].norm().max(1.0));
        }
        if worst < NEWTON_TOL {
            return Ok(z);
        }
    }
    // double root: both iterates approach it only linearly
    if (z[0] - z[1]).norm() < 1e-5 {
        return Ok(z);
    }
    Err(Error::NotConverged("linear mode iteration"))
}

fn component_potential(p: &PotentialParams, plus: bool) -> impl Fn(f64) -> JComplex + '_ {
    move |x| {
        let s = potential(x, p).split();
        if plus {
            s.plus
        } else {
            s.minus
        }
    }
}

/// Lowest two eigenvalues of one component on one grid, continued from the
/// Hermitian limit in steps of |γ|.
fn lowest_pair(grid: &Grid, p: &PotentialParams, plus: bool) -> Result<[JComplex; 2]> {
    let base = sturm_lowest(grid, p, 2);
    let size = p.gamma.max_abs();
    let steps = libm::ceil(size / GAMMA_STEP).max(1.0) as usize;
    let mut z = [JComplex::new(base[0], 1e-3), JComplex::new(base[1], -1e-3)];
    for s in 1..=steps {
        let frac = s as f64 / steps as f64;
        let ps = p.with_gamma(p.gamma.scale(frac));
        let t = Tridiagonal::new(grid, component_potential(&ps, plus));
        z = refine_pair(&t, z)?;
    }
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(z)
}

/// Lowest two modes of each idempotent component: `(plus, minus)`.
pub fn linear_modes(p: &PotentialParams, grid: &Grid) -> Result<([LinearMode; 2], [LinearMode; 2])> {
    p.validate()?;
    let fine = grid.refined();
    let build = |plus: bool| -> Result<[LinearMode; 2]> {
        let coarse = lowest_pair(grid, p, plus)?;
        let refined = lowest_pair(&fine, p, plus)?;
        let t = Tridiagonal::new(grid, component_potential(p, plus));
        let mode = |k: usize| LinearMode {
            lambda: (refined[k] * 4.0 - coarse[k]) / 3.0,
            lambda_h: coarse[k],
            vector: t.eigenvector(coarse[k]),
        };
        Ok([mode(0), mode(1)])
    };
    Ok((build(true)?, build(false)?))
}

/// Shooting guess for the bicomplex state pairing plus-mode `a` with minus-mode `b`.
pub fn pair_guess(grid: &Grid, a: &LinearMode, b: &LinearMode) -> Result<ShootingState> {
    let h = grid.spacing();
    let c = grid.center() - 1; // interior index of x = 0
    let (phi0, chi0) = (a.vector[c], b.vector[c]);
    let dphi = (a.vector[c + 1] - a.vector[c - 1]) / (2.0 * h);
    let dchi = (b.vector[c + 1] - b.vector[c - 1]) / (2.0 * h);
    let overlap: JComplex = a.vector.iter().zip(&b.vector).map(|(x, y)| x * y).sum::<JComplex>() * h;
    let j = JComplex::new(0.0, 1.0);
    let ratio_den = j * phi0 - dphi;
    if overlap.norm() < 1e-8 || ratio_den.norm() < 1e-300 {
        return Err(Error::SingularParameters("paired linear modes cannot be normalized"));
    }
    // a/b from the gauge condition, a·b from the norm
    let ratio = (j * chi0 + dchi) / ratio_den;
    let ca = (ratio / overlap).sqrt();
    let cb = ca / ratio;
    let join = |p: JComplex, m: JComplex| Bicomplex::join(IdempotentPair::new(p, m));
    Ok(ShootingState {
        mu: join(a.lambda, b.lambda),
        psi0: join(ca * phi0, cb * chi0),
        dpsi0: join(ca * dphi, cb * dchi),
    })
}

/// The lowest two states at `g = 0`, paired plus-λ with minus-conj(λ)
/// (the pairing that gives T_j-real μ for real γ), polished by the
/// shooting solver. Ordered by increasing `μ₁`.
pub fn linear_basis(p: &PotentialParams, config: &SolverConfig) -> Result<Vec<Solution>> {
    let (plus, minus) = linear_modes(p, &config.grid)?;
    let problem = Problem::new(Bicomplex::ZERO, p, config)?;
    let mut out = Vec::with_capacity(2);
    for a in &plus {
        let target = a.lambda.conj();
        let b = minus
            .iter()
            .min_by(|x, y| (x.lambda - target).norm().total_cmp(&(y.lambda - target).norm()))
            .unwrap();
        let guess = pair_guess(&config.grid, a, b)?;
        out.push(problem.solve(&guess)?);
    }
    out.sort_by(|a, b| a.mu.c1.total_cmp(&b.mu.c1));
    Ok(out)
}

/// All four pairings of the lowest two plus-modes with the lowest two
/// minus-modes at `g = 0`, polished by the shooting solver and ordered by
/// `(μ₁, μ_i, μ_j, μ_k)`.
///
/// Pairings whose modes are orthogonal (e.g. the mixed pairings at γ = 0)
/// have no normalizable bicomplex state and are omitted.
pub fn linear_states(p: &PotentialParams, config: &SolverConfig) -> Result<Vec<Solution>> {
    let (plus, minus) = linear_modes(p, &config.grid)?;
    let problem = Problem::new(Bicomplex::ZERO, p, config)?;
    let mut out = Vec::with_capacity(4);
    for a in &plus {
        for b in &minus {
            let guess = match pair_guess(&config.grid, a, b) {
                Ok(g) => g,
                Err(Error::SingularParameters(_)) => continue,
                Err(e) => return Err(e),
            };
            out.push(problem.solve(&guess)?);
        }
    }
    out.sort_by(|a, b| a.mu.to_array().partial_cmp(&b.mu.to_array()).unwrap_or(core::cmp::Ordering::Equal));
    Ok(out)
}
