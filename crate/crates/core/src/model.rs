//! Double-well potential, the analytically continued stationary GPE operator,
//! and the symmetry classes of its bicomplex solutions.

use alloc::vec::Vec;

use crate::bicomplex::{Bicomplex, Conjugation};
use crate::error::{Error, Result};

/// Tolerance on μ components when reading off a symmetry class.
pub const SYMMETRY_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PotentialParams {
    /// Barrier height.
    pub v0: f64,
    /// Barrier width parameter.
    pub sigma: f64,
    /// Width of the antisymmetric imaginary envelope.
    pub rho: f64,
    /// Gain/loss strength. An i-component acts as a real antisymmetric
    /// perturbation (the asymmetry ε); j/k-components continue the parameter.
    pub gamma: Bicomplex,
}

impl PotentialParams {
    /// `v0 = 4`, `σ = 0.5`, ρ from [`matched_rho`], no gain/loss.
    pub fn standard() -> Self {
        let (v0, sigma) = (4.0, 0.5);
        Self {
            v0,
            sigma,
            rho: matched_rho(v0, sigma),
            gamma: Bicomplex::ZERO,
        }
    }

    pub fn with_gamma(self, gamma: impl Into<Bicomplex>) -> Self {
        Self {
            gamma: gamma.into(),
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v0 > 0.0 && self.sigma > 0.0 && self.rho > 0.0) {
            return Err(Error::InvalidInput("v0, sigma and rho must be positive"));
        }
        if 4.0 * self.v0 * self.sigma <= 1.0 {
            return Err(Error::InvalidInput("4 v0 sigma must exceed 1 for a double well"));
        }
        Ok(())
    }

    /// Positive well minimum `√(ln(4v₀σ)/σ)`.
    pub fn well_minimum(&self) -> f64 {
        libm::sqrt(libm::log(4.0 * self.v0 * self.sigma) / self.sigma)
    }
}

impl Default for PotentialParams {
    fn default() -> Self {
        Self::standard()
    }
}

/// ρ placing the extrema of `x·e^{−ρx²}` on the well minima: `σ / (2 ln(4v₀σ))`.
pub fn matched_rho(v0: f64, sigma: f64) -> f64 {
    sigma / (2.0 * libm::log(4.0 * v0 * sigma))
}

/// Real symmetric part `x²/4 + v₀e^{−σx²}`.
pub fn potential_real(x: f64, p: &PotentialParams) -> f64 {
    0.25 * x * x + p.v0 * libm::exp(-p.sigma * x * x)
}

/// `x·e^{−ρx²}`, the envelope multiplying `i·γ`.
pub fn gain_loss_profile(x: f64, p: &PotentialParams) -> f64 {
    x * libm::exp(-p.rho * x * x)
}

pub fn potential(x: f64, p: &PotentialParams) -> Bicomplex {
    Bicomplex::real(potential_real(x, p)) + Bicomplex::I * p.gamma * gain_loss_profile(x, p)
}

/// Uniform grid on `[−L, L]` with an odd node count so that `x = 0` is a node.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Grid {
    pub half_width: f64,
    pub nodes: usize,
}

impl Grid {
    pub fn new(half_width: f64, nodes: usize) -> Result<Self> {
        if nodes < 3 {
            return Err(Error::InvalidInput("grid needs at least 3 nodes"));
        }
        if nodes.is_multiple_of(2) {
            return Err(Error::InvalidInput("grid node count must be odd"));
        }
        if !(half_width > 0.0) {
            return Err(Error::InvalidInput("grid half-width must be positive"));
        }
        Ok(Self { half_width, nodes })
    }

    pub fn standard() -> Self {
        Self {
            half_width: 10.0,
            nodes: 2001,
        }
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.nodes - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn center(&self) -> usize {
        self.nodes / 2
    }

    pub fn abscissas(&self) -> Vec<f64> {
        (0..self.nodes).map(|i| self.x(i)).collect()
    }

    /// Same interval, spacing halved.
    pub fn refined(&self) -> Self {
        Self {
            half_width: self.half_width,
            nodes: 2 * self.nodes - 1,
        }
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self::standard()
    }
}

/// Bicomplex wave function sampled on a uniform grid, with its derivative.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveFunction {
    pub grid: Grid,
    pub values: Vec<Bicomplex>,
    pub derivs: Vec<Bicomplex>,
}

/// A symmetry operation acting on bicomplex wave functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SymmetryOp {
    /// Parity plus i-conjugation: reflects at `x = 0` and flips ψ_i, ψ_k.
    PTi,
    /// j-conjugation: flips ψ_j, ψ_k.
    Tj,
    /// Reflects at `x = 0` and flips ψ_i, ψ_j.
    PTiTj,
}

impl SymmetryOp {
    fn conjugation(self) -> Conjugation {
        match self {
            SymmetryOp::PTi => Conjugation::Ti,
            SymmetryOp::Tj => Conjugation::Tj,
            SymmetryOp::PTiTj => Conjugation::TiTj,
        }
    }

    fn reflects(self) -> bool {
        !matches!(self, SymmetryOp::Tj)
    }

    /// Action on a chemical potential (conjugation only).
    pub fn on_mu(self, mu: Bicomplex) -> Bicomplex {
        mu.conj(self.conjugation())
    }
}

impl WaveFunction {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: alloc::vec![Bicomplex::ZERO; grid.nodes],
            derivs: alloc::vec![Bicomplex::ZERO; grid.nodes],
        }
    }

    /// Builds a wave function from values only, differentiating by central
    /// differences (one-sided at the ends).
    pub fn from_values(grid: Grid, values: Vec<Bicomplex>) -> Result<Self> {
        if values.len() != grid.nodes {
            return Err(Error::InvalidInput("value count does not match the grid"));
        }
        let h = grid.spacing();
        let n = grid.nodes;
        let derivs = (0..n)
            .map(|i| match i {
                0 => (values[1] - values[0]).scale(1.0 / h),
                _ if i == n - 1 => (values[n - 1] - values[n - 2]).scale(1.0 / h),
                _ => (values[i + 1] - values[i - 1]).scale(0.5 / h),
            })
            .collect();
        Ok(Self {
            grid,
            values,
            derivs,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at_center(&self) -> (Bicomplex, Bicomplex) {
        let c = self.grid.center();
        (self.values[c], self.derivs[c])
    }

    pub fn apply(&self, op: SymmetryOp) -> Self {
        let t = op.conjugation();
        let n = self.values.len();
        if op.reflects() {
            Self {
                grid: self.grid,
                values: (0..n).map(|i| self.values[n - 1 - i].conj(t)).collect(),
                derivs: (0..n).map(|i| -self.derivs[n - 1 - i].conj(t)).collect(),
            }
        } else {
            Self {
                grid: self.grid,
                values: self.values.iter().map(|v| v.conj(t)).collect(),
                derivs: self.derivs.iter().map(|v| v.conj(t)).collect(),
            }
        }
    }

    pub fn scaled(&self, c: Bicomplex) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| c * v).collect(),
            derivs: self.derivs.iter().map(|&v| c * v).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.max_abs()))
    }

    /// Largest value magnitude at the two boundary nodes.
    pub fn boundary_abs(&self) -> f64 {
        self.values[0].max_abs().max(self.values[self.values.len() - 1].max_abs())
    }

    /// Largest coefficient difference to `other` on the same grid.
    pub fn distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |m, (a, b)| m.max((*a - *b).max_abs()))
    }

    /// `min_c max|op(ψ) − c·ψ| / max|ψ|`, with `c` the bilinear projection
    /// coefficient `Σ op(ψ)ψ / Σ ψψ`. Zero for an eigenfunction of the operation
    /// up to a (bicomplex) gauge factor.
    pub fn symmetry_defect(&self, op: SymmetryOp) -> f64 {
        let image = self.apply(op);
        let num: Bicomplex = image.values.iter().zip(&self.values).map(|(a, b)| *a * *b).sum();
        let den: Bicomplex = self.values.iter().map(|v| *v * *v).sum();
        let Ok(c) = num.checked_div(den) else {
            return f64::INFINITY;
        };
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        image
            .values
            .iter()
            .zip(&self.values)
            .fold(0.0_f64, |m, (a, b)| m.max((*a - c * *b).max_abs()))
            / scale
    }
}

/// Continued square modulus `(ψ₁ + jψ_j)² + (ψ_i + jψ_k)² = ψ·T_i(ψ)`.
#[inline]
pub fn square_modulus(psi: Bicomplex) -> Bicomplex {
    psi * psi.conj(Conjugation::Ti)
}

/// Finite-difference stencil for the second derivative in [`gpe_residual`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Stencil {
    /// `(ψ_{n+1} − 2ψ_n + ψ_{n−1})/h²`; O(h²).
    #[default]
    ThreePoint,
    /// Numerov form: the potential term is averaged with weights (1, 10, 1)/12; O(h⁴).
    Numerov,
}

/// `[−∂² + V − g|ψ|² − μ]ψ` at every interior node (the two boundary
/// nodes are excluded, so the result has `nodes − 2` entries).
pub fn gpe_residual(
    psi: &WaveFunction,
    mu: Bicomplex,
    g: Bicomplex,
    p: &PotentialParams,
    stencil: Stencil,
) -> Result<Vec<Bicomplex>> {
    let n = psi.values.len();
    if n < 3 || psi.grid.nodes != n {
        return Err(Error::InvalidInput("grid too coarse for a second derivative"));
    }
    let h = psi.grid.spacing();
    let inv_h2 = 1.0 / (h * h);
    let local: Vec<Bicomplex> = psi
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| (potential(psi.grid.x(i), p) - g * square_modulus(v) - mu) * v)
        .collect();
    let vals = &psi.values;
    Ok((1..n - 1)
        .map(|i| {
            let lap = (vals[i + 1] - vals[i].scale(2.0) + vals[i - 1]).scale(inv_h2);
            let pot = match stencil {
                Stencil::ThreePoint => local[i],
                Stencil::Numerov => (local[i - 1] + local[i].scale(10.0) + local[i + 1]).scale(1.0 / 12.0),
            };
            pot - lap
        })
        .collect())
}

/// Largest coefficient of [`gpe_residual`].
pub fn max_residual(
    psi: &WaveFunction,
    mu: Bicomplex,
    g: Bicomplex,
    p: &PotentialParams,
    stencil: Stencil,
) -> Result<f64> {
    Ok(gpe_residual(psi, mu, g, p, stencil)?
        .iter()
        .fold(0.0_f64, |m, r| m.max(r.max_abs())))
}

/// Trapezoidal `∫ |ψ|² dx` with the continued square modulus.
pub fn bicomplex_norm(psi: &WaveFunction) -> Bicomplex {
    let h = psi.grid.spacing();
    let n = psi.values.len();
    let mut acc = Bicomplex::ZERO;
    for (i, v) in psi.values.iter().enumerate() {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        acc += square_modulus(*v).scale(w);
    }
    acc.scale(h)
}

/// Symmetry classes read off the chemical potential.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SymmetryClass {
    /// μ_i = μ_k = 0.
    PTiSymmetric,
    /// μ_j = μ_k = 0.
    TjSymmetric,
    /// μ_i = μ_j = 0.
    PTiTjSymmetric,
    FullyBroken,
}

impl SymmetryClass {
    pub fn from_mu(mu: Bicomplex, tol: f64) -> Self {
        let small = |x: f64| x.abs() < tol;
        if small(mu.ci) && small(mu.ck) {
            SymmetryClass::PTiSymmetric
        } else if small(mu.cj) && small(mu.ck) {
            SymmetryClass::TjSymmetric
        } else if small(mu.ci) && small(mu.cj) {
            SymmetryClass::PTiTjSymmetric
        } else {
            SymmetryClass::FullyBroken
        }
    }

    /// The operation the wave function must be invariant under.
    pub fn operation(self) -> Option<SymmetryOp> {
        match self {
            SymmetryClass::PTiSymmetric => Some(SymmetryOp::PTi),
            SymmetryClass::TjSymmetric => Some(SymmetryOp::Tj),
            SymmetryClass::PTiTjSymmetric => Some(SymmetryOp::PTiTj),
            SymmetryClass::FullyBroken => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Classification {
    pub class: SymmetryClass,
    /// [`WaveFunction::symmetry_defect`] under the class operation (0 for fully broken).
    pub defect: f64,
}

impl Classification {
    /// Whether the wave function agrees with the μ-based class.
    pub fn consistent(&self, tol: f64) -> bool {
        self.defect <= tol
    }
}

pub fn classify_symmetry(mu: Bicomplex, psi: &WaveFunction) -> Classification {
    let class = SymmetryClass::from_mu(mu, SYMMETRY_TOL);
    let defect = class.operation().map_or(0.0, |op| psi.symmetry_defect(op));
    Classification { class, defect }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: Grid) -> WaveFunction {
        let norm = libm::pow(core::f64::consts::PI, -0.25);
        let vals = (0..grid.nodes)
            .map(|i| {
                let x = grid.x(i);
                Bicomplex::real(norm * libm::exp(-0.5 * x * x))
            })
            .collect();
        WaveFunction::from_values(grid, vals).unwrap()
    }

    #[test]
    fn barrier_top_is_v0() {
        let p = PotentialParams::standard().with_gamma(Bicomplex::new(0.3, 0.1, 0.2, 0.05));
        assert_eq!(potential(0.0, &p), Bicomplex::real(4.0));
    }

    #[test]
    fn matched_rho_value() {
        assert!((matched_rho(4.0, 0.5) - 0.120224).abs() < 1e-6);
    }

    #[test]
    fn well_minimum_matches_bisection() {
        // independent root of dV/dx on (1, 3)
        let p = PotentialParams::standard();
        let dv = |x: f64| 0.5 * x - 2.0 * p.sigma * p.v0 * x * libm::exp(-p.sigma * x * x);
        let (mut lo, mut hi) = (1.0, 3.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if dv(lo) * dv(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((p.well_minimum() - 0.5 * (lo + hi)).abs() < 1e-12);
        assert!((p.well_minimum() - 2.0394).abs() < 1e-4);
    }

    #[test]
    fn real_gamma_potential_is_pt_symmetric() {
        let p = PotentialParams::standard().with_gamma(0.037);
        for x in [0.1, 0.77, 1.9, 2.5, 4.2] {
            assert_eq!(potential(-x, &p), potential(x, &p).conj(Conjugation::Ti));
        }
    }

    #[test]
    fn asymmetry_appears_as_real_antisymmetric_term() {
        let eps = 0.002;
        let p = PotentialParams::standard().with_gamma(Bicomplex::new(0.03, eps, 0.0, 0.0));
        let x = 1.3;
        let v = potential(x, &p);
        let expected = potential_real(x, &p) - eps * gain_loss_profile(x, &p);
        assert!((v.c1 - expected).abs() < 1e-15);
    }

    #[test]
    fn gaussian_norm_is_one() {
        let n = bicomplex_norm(&gaussian(Grid::standard()));
        assert!((n - Bicomplex::ONE).max_abs() < 1e-10);
    }

    #[test]
    fn zero_wave_function_has_zero_residual() {
        let psi = WaveFunction::zeros(Grid::standard());
        let p = PotentialParams::standard().with_gamma(0.02);
        let r = max_residual(&psi, Bicomplex::new(1.0, 2.0, 3.0, 4.0), Bicomplex::real(0.2), &p, Stencil::ThreePoint).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn residual_rejects_tiny_grids() {
        assert!(Grid::new(1.0, 1).is_err());
        let psi = WaveFunction {
            grid: Grid { half_width: 1.0, nodes: 2 },
            values: alloc::vec![Bicomplex::ONE; 2],
            derivs: alloc::vec![Bicomplex::ZERO; 2],
        };
        let p = PotentialParams::standard();
        assert!(gpe_residual(&psi, Bicomplex::ZERO, Bicomplex::ZERO, &p, Stencil::ThreePoint).is_err());
    }

    #[test]
    fn table_one_rows() {
        let c = |m| SymmetryClass::from_mu(m, SYMMETRY_TOL);
        assert_eq!(c(Bicomplex::new(1.0, 0.0, 0.3, 0.0)), SymmetryClass::PTiSymmetric);
        assert_eq!(c(Bicomplex::new(1.0, 0.3, 0.0, 0.0)), SymmetryClass::TjSymmetric);
        assert_eq!(c(Bicomplex::new(1.0, 0.0, 0.0, 0.3)), SymmetryClass::PTiTjSymmetric);
        assert_eq!(c(Bicomplex::new(1.0, 0.3, 0.2, 0.0)), SymmetryClass::FullyBroken);
    }

    #[test]
    fn square_modulus_of_pt_symmetric_function_is_symmetric() {
        // PT_i-symmetric trial function: ψ(−x) = T_i ψ(x)
        let grid = Grid::new(6.0, 601).unwrap();
        let vals: Vec<_> = (0..grid.nodes)
            .map(|i| {
                let x = grid.x(i);
                let e = libm::exp(-0.3 * x * x);
                Bicomplex::new(e * (1.0 + 0.2 * x * x), 0.4 * x * e, 0.1 * e, 0.3 * x * x * x * e)
            })
            .collect();
        let psi = WaveFunction::from_values(grid, vals).unwrap();
        assert!(psi.symmetry_defect(SymmetryOp::PTi) < 1e-14);
        let n = psi.len();
        for i in 0..n {
            let a = square_modulus(psi.values[i]);
            let b = square_modulus(psi.values[n - 1 - i]);
            // |ψ|² is even and has no i/k part
            assert!((a.conj(Conjugation::Ti) - b).max_abs() < 1e-14);
            assert!(a.ci.abs() < 1e-15 && a.ck.abs() < 1e-15);
        }
    }

    #[test]
    fn residual_is_phase_equivariant() {
        let grid = Grid::new(6.0, 601).unwrap();
        let vals: Vec<_> = (0..grid.nodes)
            .map(|i| {
                let x = grid.x(i);
                let e = libm::exp(-0.4 * x * x);
                Bicomplex::new(e, 0.3 * x * e, 0.05 * e, -0.1 * x * e)
            })
            .collect();
        let psi = WaveFunction::from_values(grid, vals).unwrap();
        let p = PotentialParams::standard().with_gamma(0.03);
        let (mu, g) = (Bicomplex::new(1.9, 0.01, 0.0, 0.0), Bicomplex::real(0.2));
        let base = gpe_residual(&psi, mu, g, &p, Stencil::ThreePoint).unwrap();
        for chi in [core::f64::consts::PI / 7.0, 1.0] {
            let phase = Bicomplex::unit_circle(chi, crate::bicomplex::ImagUnit::I);
            let rotated = gpe_residual(&psi.scaled(phase), mu, g, &p, Stencil::ThreePoint).unwrap();
            for (r, b) in rotated.iter().zip(&base) {
                assert!((*r - phase * *b).max_abs() < 1e-9 * (1.0 + b.max_abs()));
            }
        }
    }

    #[test]
    fn norm_has_no_i_or_k_part() {
        let grid = Grid::new(5.0, 501).unwrap();
        let vals: Vec<_> = (0..grid.nodes)
            .map(|i| {
                let x = grid.x(i);
                let e = libm::exp(-0.5 * x * x);
                Bicomplex::new(e, 0.7 * x * e, 0.2 * e * x * x, -0.4 * e)
            })
            .collect();
        let n = bicomplex_norm(&WaveFunction::from_values(grid, vals).unwrap());
        assert!(n.ci.abs() < 1e-12 && n.ck.abs() < 1e-12);
    }
}
