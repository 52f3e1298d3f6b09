//! Four-level linear matrix model whose eigenvalues reproduce the fixed
//! points of the two-mode non-Hermitian Bloch equations, plus the scaling
//! map onto the spatially extended double well.
//!
//! All parameters are bicomplex. The imaginary unit that multiplies γ̃ inside
//! the matrix is the bicomplex `i`, so j-complexified loop parameters give a
//! genuinely bicomplex matrix whose two idempotent components are ordinary
//! complex 4×4 problems.

use alloc::vec::Vec;

use crate::bicomplex::{Bicomplex, IdempotentPair, JComplex};
use crate::error::{Error, Result};
use crate::linalg::{char_poly, durand_kerner, CMatrix};
use crate::spectrum::BranchLabel;

pub type Matrix4 = [[Bicomplex; 4]; 4];

/// Model-space parameters (the tilde quantities).
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    pub g_t: Bicomplex,
    pub gamma_t: Bicomplex,
    pub eps_t: Bicomplex,
    /// Tunnel coupling.
    pub v: f64,
}

impl ModelParams {
    pub fn new(g_t: impl Into<Bicomplex>, gamma_t: impl Into<Bicomplex>, eps_t: impl Into<Bicomplex>, v: f64) -> Self {
        Self {
            g_t: g_t.into(),
            gamma_t: gamma_t.into(),
            eps_t: eps_t.into(),
            v,
        }
    }

    /// `1 / (g̃² + γ̃²)`.
    fn inv_denominator(&self) -> Result<Bicomplex> {
        (self.g_t * self.g_t + self.gamma_t * self.gamma_t)
            .checked_inv()
            .map_err(|_| Error::SingularParameters("g^2 + gamma^2 is a zero divisor"))
    }
}

/// Model to physical parameter map.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalingMap {
    pub g0: f64,
    pub gamma0: f64,
    pub v: f64,
    pub mu0: f64,
}

impl Default for ScalingMap {
    fn default() -> Self {
        Self {
            g0: -5.64,
            gamma0: 0.953,
            v: 0.0426,
            mu0: 0.0,
        }
    }
}

impl ScalingMap {
    pub fn with_mu0(self, mu0: f64) -> Self {
        Self { mu0, ..self }
    }

    pub fn scale(&self, g: Bicomplex, gamma: Bicomplex, eps: Bicomplex) -> ModelParams {
        ModelParams {
            g_t: g.scale(1.0 / self.g0),
            gamma_t: gamma.scale(1.0 / self.gamma0),
            eps_t: eps.scale(1.0 / self.gamma0),
            v: self.v,
        }
    }

    /// Scales a physical gain/loss value whose i-part carries the asymmetry:
    /// `γ = A + iB` gives `γ̃ = A/γ₀`, `ε̃ = B/γ₀`.
    pub fn scale_combined(&self, g: Bicomplex, gamma: Bicomplex) -> ModelParams {
        self.scale(
            g,
            Bicomplex::from_j(gamma.re_part()),
            Bicomplex::from_j(gamma.im_part()),
        )
    }

    pub fn unscale(&self, mu_t: Bicomplex) -> Bicomplex {
        mu_t + Bicomplex::real(self.mu0)
    }

    pub fn to_model_mu(&self, mu: Bicomplex) -> Bicomplex {
        mu - Bicomplex::real(self.mu0)
    }

    /// Physical γ of the fourfold degeneracy at `g = 0`, `γ₀·v`.
    pub fn gamma_ep4(&self) -> f64 {
        self.gamma0 * self.v
    }

    /// Physical `γ_c2 = γ₀v`, where the two real eigenvalues merge.
    pub fn gamma_c2(&self) -> f64 {
        self.gamma_ep4()
    }

    /// Physical `γ_c1 = γ₀√(v² − (g/g₀)²)`, clamped at 0 past self-trapping.
    pub fn gamma_c1(&self, g: f64) -> f64 {
        let q = self.v * self.v - (g / self.g0) * (g / self.g0);
        self.gamma0 * libm::sqrt(q.max(0.0))
    }

    /// Nonlinearity at which the pitchfork sits at the given real γ,
    /// `|g₀|·√(v² − (γ/γ₀)²)`.
    pub fn g_c1(&self, gamma: f64) -> f64 {
        let q = self.v * self.v - (gamma / self.gamma0) * (gamma / self.gamma0);
        self.g0.abs() * libm::sqrt(q.max(0.0))
    }
}

pub fn build_h(p: &ModelParams) -> Result<Matrix4> {
    let i = Bicomplex::I;
    let (g, ga, e) = (p.g_t, p.gamma_t, p.eps_t);
    let v2 = Bicomplex::real(p.v * p.v);
    let dinv = p.inv_denominator()?;
    let (g2, ga2, e2) = (g * g, ga * ga, e * e);
    let zero = Bicomplex::ZERO;
    let one = Bicomplex::ONE;

    let corner = -(i * g2 * g * ga * e) * dinv;
    let h21 = v2 - ga2 + e2;
    let h32 = -(i * ga * e).scale(4.0) + (ga2.scale(4.0) - g2.scale(2.0)) * dinv * e2;
    let h33 = g + (i * g * ga * e).scale(2.0) * dinv;
    let h41 = -(i * ga * e) * dinv * (g2 * g2 + (g2.scale(2.0) + ga2.scale(4.0)) * (ga2 - v2))
        + (ga2.scale(2.0) - g2) * dinv * ((ga2.scale(4.0) + g2 - v2.scale(2.0)) * e2 + (i * ga * e2 * e).scale(2.0) - (e2 * e2).scale(2.0));
    // v²γ̃²/d − γ̃² written over the common denominator so it vanishes exactly at γ̃² = v² − g̃²
    let h43 = ga2 * (v2 - g2 - ga2) * dinv + (g2.scale(2.0) - ga2.scale(3.0)) * dinv * e2;

    Ok([
        [zero, one, zero, zero],
        [h21, zero, one, zero],
        [corner, h32, h33, one],
        [h41, corner, h43, g],
    ])
}

/// Coefficients `(c₃, c₂, c₁, c₀)` of `det(μ − H)` in closed form.
pub fn char_poly_coeffs(p: &ModelParams) -> Result<[Bicomplex; 4]> {
    let i = Bicomplex::I;
    let (g, ga, e) = (p.g_t, p.gamma_t, p.eps_t);
    let v2 = Bicomplex::real(p.v * p.v);
    let dinv = p.inv_denominator()?;
    let d = g * g + ga * ga;
    let (g2, ga2, e2) = (g * g, ga * ga, e * e);
    let e3 = e2 * e;

    let c3 = -g.scale(2.0) - (i * g * ga * e).scale(2.0) * dinv;
    let c2 = (ga2 - v2).scale(2.0) + g2 + g2 * v2 * dinv + (i * ga * (g2.scale(3.0) + ga2.scale(2.0)) * e).scale(2.0) * dinv
        - (g2 + ga2.scale(2.0)) * dinv * e2;
    let c1 = -(g * (ga2 - v2)).scale(2.0) - (i * g * ga * (ga2.scale(3.0) + g2 - v2) * e).scale(2.0) * dinv
        + (g * ga2 * e2).scale(6.0) * dinv
        + (i * g * ga * e3).scale(2.0) * dinv;
    let c0 = (ga2 - v2) * (d * d - ga2 * v2) * dinv + (i * ga * (ga2 - v2) * e).scale(4.0)
        - (ga2 * (g2 + ga2.scale(3.0) - v2) * e2).scale(2.0) * dinv
        - (i * ga2 * ga * e3).scale(4.0) * dinv
        + ga2 * e2 * e2 * dinv;
    Ok([c3, c2, c1, c0])
}

fn split_matrix(h: &Matrix4) -> (CMatrix<4>, CMatrix<4>) {
    let zero = JComplex::new(0.0, 0.0);
    let mut plus = [[zero; 4]; 4];
    let mut minus = [[zero; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            let s = h[r][c].split();
            plus[r][c] = s.plus;
            minus[r][c] = s.minus;
        }
    }
    (plus, minus)
}

fn lexicographic(a: &JComplex, b: &JComplex) -> core::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn roots4(coeffs: &[JComplex]) -> Result<[JComplex; 4]> {
    let r = durand_kerner(coeffs)?;
    let mut out = [r[0], r[1], r[2], r[3]];
    out.sort_by(lexicographic);
    Ok(out)
}

/// Eigenvalues of each idempotent component, each sorted lexicographically.
pub fn eigen_components(h: &Matrix4) -> Result<IdempotentEigs> {
    let (plus, minus) = split_matrix(h);
    Ok(IdempotentEigs {
        plus: roots4(&char_poly(&plus))?,
        minus: roots4(&char_poly(&minus))?,
    })
}

/// The four eigenvalues of each idempotent component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdempotentEigs {
    pub plus: [JComplex; 4],
    pub minus: [JComplex; 4],
}

impl IdempotentEigs {
    /// Joins `plus[k]` with `minus[pairing[k]]`.
    pub fn join(&self, pairing: [usize; 4]) -> [Bicomplex; 4] {
        core::array::from_fn(|k| Bicomplex::join(IdempotentPair::new(self.plus[k], self.minus[pairing[k]])))
    }

    /// Joins each plus eigenvalue with the minus eigenvalue closest to its
    /// complex conjugate. For real physical parameters this yields i-complex
    /// values, real or in T_i-conjugate pairs.
    pub fn join_conjugate_pairs(&self) -> [Bicomplex; 4] {
        let cost = |perm: &[usize; 4]| (0..4).map(|k| (self.plus[k] - self.minus[perm[k]].conj()).norm_sqr()).sum::<f64>();
        let best = PERMUTATIONS_4
            .iter()
            .min_by(|a, b| cost(a).total_cmp(&cost(b)))
            .expect("non-empty");
        self.join(*best)
    }
}

/// Eigenvalues of a bicomplex 4×4 matrix. Components are paired by their
/// lexicographic rank, so j-complex matrices give j-complex eigenvalues.
pub fn eigenvalues(h: &Matrix4) -> Result<[Bicomplex; 4]> {
    Ok(eigen_components(h)?.join([0, 1, 2, 3]))
}

fn require_zero_eps(p: &ModelParams) -> Result<()> {
    if p.eps_t != Bicomplex::ZERO {
        return Err(Error::InvalidInput("closed form needs eps = 0"));
    }
    Ok(())
}

/// `[√(v²−γ̃²), −√(v²−γ̃²), g̃ + γ̃√(v²/(g̃²+γ̃²) − 1), g̃ − γ̃√(…)]` with
/// principal roots per idempotent component.
pub fn closed_form_eigs(p: &ModelParams) -> Result<[Bicomplex; 4]> {
    require_zero_eps(p)?;
    let v2 = Bicomplex::real(p.v * p.v);
    let outer = (v2 - p.gamma_t * p.gamma_t).sqrt();
    let inner = p.gamma_t * (v2 * p.inv_denominator()? - Bicomplex::ONE).sqrt();
    Ok([outer, -outer, p.g_t + inner, p.g_t - inner])
}

/// Model eigenvalue assigned to a branch at `ε̃ = 0` for real `g̃, γ̃`.
///
/// g/e (and their continuations j∓/j±) come from `±√(v² − γ̃²)`; the
/// i±/k± pair comes from `g̃ ± γ̃√(v²/(g̃²+γ̃²) − 1)` with the two
/// idempotent components paired crosswise.
pub fn branch_eigenvalue(g_t: f64, gamma_t: f64, v: f64, branch: BranchLabel) -> Result<Bicomplex> {
    use BranchLabel::*;
    let q = v * v - gamma_t * gamma_t;
    let outer = if q >= 0.0 {
        Bicomplex::real(libm::sqrt(q))
    } else {
        Bicomplex::J.scale(libm::sqrt(-q))
    };
    let d = g_t * g_t + gamma_t * gamma_t;
    if d == 0.0 && !matches!(branch, PsiG | PsiE | PsiJPlus | PsiJMinus) {
        return Err(Error::SingularParameters("g^2 + gamma^2 vanishes"));
    }
    let w = if d > 0.0 { v * v / d - 1.0 } else { 0.0 };
    let r = (gamma_t * libm::sqrt(w.abs())).abs();
    let pair = if w >= 0.0 {
        Bicomplex::K.scale(r)
    } else {
        Bicomplex::I.scale(r)
    };
    let g = Bicomplex::real(g_t);
    Ok(match branch {
        PsiG | PsiJMinus => -outer,
        PsiE | PsiJPlus => outer,
        PsiIPlus | PsiKPlus => g + pair,
        PsiIMinus | PsiKMinus => g - pair,
    })
}

/// Monic coefficients `[a₃, a₂, a₁, a₀]` of the s_z quartic.
pub fn sz_quartic_coeffs(p: &ModelParams) -> Result<[Bicomplex; 4]> {
    let dinv = p.inv_denominator()?;
    let (g, ga, e) = (p.g_t, p.gamma_t, p.eps_t);
    let v2 = Bicomplex::real(p.v * p.v);
    Ok([
        g * e * dinv,
        (e * e + v2 - g * g - ga * ga) * dinv.scale(0.25),
        -(g * e * dinv).scale(0.25),
        -(e * e * dinv).scale(1.0 / 16.0),
    ])
}

/// Same quartic with `a₂` missing its factor 1/4. Its roots do not map onto
/// the spectrum of [`build_h`]; kept to document the difference.
pub fn sz_quartic_coeffs_unscaled_a2(p: &ModelParams) -> Result<[Bicomplex; 4]> {
    let mut a = sz_quartic_coeffs(p)?;
    a[1] = a[1].scale(4.0);
    Ok(a)
}

fn quartic_roots(a: [Bicomplex; 4]) -> Result<[Bicomplex; 4]> {
    let plus: Vec<JComplex> = a.iter().map(|c| c.split().plus).collect();
    let minus: Vec<JComplex> = a.iter().map(|c| c.split().minus).collect();
    let (rp, rm) = (roots4(&plus)?, roots4(&minus)?);
    Ok(core::array::from_fn(|k| Bicomplex::join(IdempotentPair::new(rp[k], rm[k]))))
}

/// Roots of the s_z quartic. Requires `ε̃ ≠ 0`; at `ε̃ = 0` two roots collapse
/// onto `s_z = 0` where the chemical potential is singular.
pub fn sz_quartic_roots(p: &ModelParams) -> Result<[Bicomplex; 4]> {
    if p.eps_t.is_zero_divisor() {
        return Err(Error::SingularParameters("eps must be invertible for the s_z quartic"));
    }
    quartic_roots(sz_quartic_coeffs(p)?)
}

pub fn sz_quartic_roots_unscaled_a2(p: &ModelParams) -> Result<[Bicomplex; 4]> {
    if p.eps_t.is_zero_divisor() {
        return Err(Error::SingularParameters("eps must be invertible for the s_z quartic"));
    }
    quartic_roots(sz_quartic_coeffs_unscaled_a2(p)?)
}

/// `g̃ − 2iγ̃s_z + ε̃/(2s_z)`.
pub fn mu_from_sz(sz: Bicomplex, p: &ModelParams) -> Result<Bicomplex> {
    let inv = sz.checked_inv().map_err(|_| Error::SingularParameters("s_z is a zero divisor"))?;
    Ok(p.g_t - (Bicomplex::I * p.gamma_t * sz).scale(2.0) + p.eps_t * inv.scale(0.5))
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlochVector {
    pub sx: Bicomplex,
    pub sy: Bicomplex,
    pub sz: Bicomplex,
}

/// Time derivatives `(ṡ_x, ṡ_y, ṡ_z)`.
pub fn bloch_rhs(s: &BlochVector, p: &ModelParams) -> [Bicomplex; 3] {
    let (g, ga, e, v) = (p.g_t, p.gamma_t, p.eps_t, p.v);
    let BlochVector { sx, sy, sz } = *s;
    [
        -(e * sy).scale(2.0) - (g * sy * sz).scale(4.0) + (ga * sx * sz).scale(4.0),
        (e * sx).scale(2.0) + (g * sx * sz).scale(4.0) - sz.scale(2.0 * v) + (ga * sy * sz).scale(4.0),
        sy.scale(2.0 * v) - ga * (Bicomplex::ONE - (sz * sz).scale(4.0)),
    ]
}

/// `μ̃ = 2(ε̃ − iγ̃)s_z + 4g̃s_z² + 2v s_x`.
pub fn mu_from_bloch(s: &BlochVector, p: &ModelParams) -> Bicomplex {
    ((p.eps_t - Bicomplex::I * p.gamma_t) * s.sz).scale(2.0) + (p.g_t * s.sz * s.sz).scale(4.0) + s.sx.scale(2.0 * p.v)
}

/// Fixed point belonging to a root of the s_z quartic:
/// `s_y = γ̃(1 − 4s_z²)/(2v)`, `s_x = s_y(ε̃ + 2g̃s_z)/(2γ̃s_z)`.
pub fn recover_fixed_point(sz: Bicomplex, p: &ModelParams) -> Result<BlochVector> {
    if p.v == 0.0 {
        return Err(Error::SingularParameters("v = 0"));
    }
    let sy = p.gamma_t * (Bicomplex::ONE - (sz * sz).scale(4.0)).scale(0.5 / p.v);
    let den = (p.gamma_t * sz)
        .scale(2.0)
        .checked_inv()
        .map_err(|_| Error::SingularParameters("gamma * s_z is a zero divisor"))?;
    let sx = sy * (p.eps_t + (p.g_t * sz).scale(2.0)) * den;
    Ok(BlochVector { sx, sy, sz })
}

/// Fitted energy shift: the mean of `μ₁(GPE) − μ̃₁(model)` over the real
/// branches (g, e) of a sweep. Points on other branches are ignored.
/// `points` holds `(γ, branch, μ₁)` in physical units.
pub fn fit_mu0(map: &ScalingMap, g: f64, points: &[(f64, BranchLabel, f64)]) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for &(gamma, branch, mu1) in points {
        if !branch.is_real() {
            continue;
        }
        let model = branch_eigenvalue(g / map.g0, gamma / map.gamma0, map.v, branch)?;
        sum += mu1 - model.c1;
        count += 1;
    }
    if count == 0 {
        return Err(Error::InvalidInput("no real-branch points to fit"));
    }
    Ok(sum / count as f64)
}

/// Smallest possible `max_k |a_k − b_{π(k)}|` over permutations π, evaluated
/// separately in each idempotent component (the bicomplex pairing of the two
/// components is not compared).
pub fn component_multiset_distance(a: &[Bicomplex; 4], b: &[Bicomplex; 4]) -> f64 {
    let pa: [IdempotentPair; 4] = core::array::from_fn(|k| a[k].split());
    let pb: [IdempotentPair; 4] = core::array::from_fn(|k| b[k].split());
    let plus = best_assignment(&core::array::from_fn(|k| pa[k].plus), &core::array::from_fn(|k| pb[k].plus));
    let minus = best_assignment(&core::array::from_fn(|k| pa[k].minus), &core::array::from_fn(|k| pb[k].minus));
    plus.max(minus)
}

/// Same as [`component_multiset_distance`] but on whole bicomplex values.
pub fn multiset_distance(a: &[Bicomplex; 4], b: &[Bicomplex; 4]) -> f64 {
    PERMUTATIONS_4
        .iter()
        .map(|perm| (0..4).fold(0.0_f64, |m, k| m.max((a[k] - b[perm[k]]).max_abs())))
        .fold(f64::INFINITY, f64::min)
}

fn best_assignment(a: &[JComplex; 4], b: &[JComplex; 4]) -> f64 {
    PERMUTATIONS_4
        .iter()
        .map(|perm| (0..4).fold(0.0_f64, |m, k| m.max((a[k] - b[perm[k]]).norm())))
        .fold(f64::INFINITY, f64::min)
}

/// All 24 permutations of `0..4` in lexicographic order.
pub const PERMUTATIONS_4: [[usize; 4]; 24] = [
    [0, 1, 2, 3], [0, 1, 3, 2], [0, 2, 1, 3], [0, 2, 3, 1], [0, 3, 1, 2], [0, 3, 2, 1],
    [1, 0, 2, 3], [1, 0, 3, 2], [1, 2, 0, 3], [1, 2, 3, 0], [1, 3, 0, 2], [1, 3, 2, 0],
    [2, 0, 1, 3], [2, 0, 3, 1], [2, 1, 0, 3], [2, 1, 3, 0], [2, 3, 0, 1], [2, 3, 1, 0],
    [3, 0, 1, 2], [3, 0, 2, 1], [3, 1, 0, 2], [3, 1, 2, 0], [3, 2, 0, 1], [3, 2, 1, 0],
];
