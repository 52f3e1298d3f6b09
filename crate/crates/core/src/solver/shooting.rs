//! Outward RK4 integration of the continued GPE from `x = 0` to `±L`.

use alloc::vec::Vec;

use crate::bicomplex::{Bicomplex, Conjugation};
use crate::error::{Error, Result};
use crate::model::{potential, square_modulus, Grid, PotentialParams};

/// Magnitude beyond which a trajectory counts as diverged.
const BLOWUP: f64 = 1e150;

pub(crate) const TANGENTS: usize = super::UNKNOWNS;

/// Derivatives of the end values and of the norm along one seed direction.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Tangent {
    pub left: Bicomplex,
    pub right: Bicomplex,
    pub norm: Bicomplex,
    pub inner_norm: Bicomplex,
}

/// Values at the two ends and the trapezoidal norm of one shot.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Shot {
    pub left: Bicomplex,
    pub right: Bicomplex,
    pub norm: Bicomplex,
    /// Norm restricted to the nonlinear region.
    pub inner_norm: Bicomplex,
}

/// Pre-tabulated potential for one (grid, step, parameters) combination.
pub(crate) struct Shooter {
    grid: Grid,
    g: Bicomplex,
    /// RK4 steps per grid interval.
    ratio: usize,
    dx: f64,
    /// `V(±m·dx/2)` for `m = 0..=2·steps`.
    right: Vec<Bicomplex>,
    left: Vec<Bicomplex>,
    /// Half-step table index beyond which the nonlinear term is dropped.
    nonlinear_until: usize,
    /// Last grid node (counted from the centre) inside the nonlinear region.
    inner_nodes: usize,
}

impl Shooter {
    pub fn new(grid: Grid, rk_step: f64, linear_tail: f64, g: Bicomplex, p: &PotentialParams) -> Result<Self> {
        let h = grid.spacing();
        let ratio = libm::round(h / rk_step).max(1.0) as usize;
        if (h / ratio as f64 - rk_step).abs() > 1e-9 * rk_step.max(h) {
            return Err(Error::InvalidInput("grid spacing must be an integer multiple of the RK4 step"));
        }
        let dx = h / ratio as f64;
        let half = grid.nodes / 2;
        let steps = half * ratio;
        let right = (0..=2 * steps).map(|m| potential(m as f64 * 0.5 * dx, p)).collect();
        let left = (0..=2 * steps).map(|m| potential(-(m as f64) * 0.5 * dx, p)).collect();
        let nonlinear_until = libm::floor(linear_tail / (0.5 * dx)).max(0.0) as usize;
        let inner_nodes = (nonlinear_until / (2 * ratio)).clamp(1, half);
        Ok(Self {
            grid,
            g,
            ratio,
            dx,
            right,
            left,
            nonlinear_until,
            inner_nodes,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Integrates both sides. When `record` is given it receives
    /// `(values, derivs)` on the grid, ordered from `−L` to `L`.
    pub fn shoot(
        &self,
        mu: Bicomplex,
        psi0: Bicomplex,
        dpsi0: Bicomplex,
        mut record: Option<(&mut Vec<Bicomplex>, &mut Vec<Bicomplex>)>,
    ) -> Result<Shot> {
        let half = self.grid.nodes / 2;
        let mut left_rec = Vec::new();
        let mut right_rec = Vec::new();
        let want = record.is_some();
        let (left, left_sum, left_inner) =
            self.side(&self.left, -self.dx, mu, psi0, dpsi0, want.then_some(&mut left_rec))?;
        let (right, right_sum, right_inner) =
            self.side(&self.right, self.dx, mu, psi0, dpsi0, want.then_some(&mut right_rec))?;
        let h = self.grid.spacing();
        let norm = (square_modulus(psi0) + left_sum + right_sum).scale(h);
        let inner_norm = (square_modulus(psi0) + left_inner + right_inner).scale(h);
        if let Some((values, derivs)) = record.as_mut() {
            values.clear();
            derivs.clear();
            values.reserve(self.grid.nodes);
            derivs.reserve(self.grid.nodes);
            for &(v, d) in left_rec.iter().rev() {
                values.push(v);
                derivs.push(d);
            }
            values.push(psi0);
            derivs.push(dpsi0);
            for &(v, d) in &right_rec {
                values.push(v);
                derivs.push(d);
            }
            debug_assert_eq!(values.len(), 2 * half + 1);
        }
        Ok(Shot {
            left,
            right,
            norm,
            inner_norm,
        })
    }

    /// Like [`Shooter::shoot`] without recording, and additionally returns the
    /// exact derivatives of the ends and of the norm with respect to each seed direction.
    ///
    /// `seeds[c] = (δψ(0), δψ'(0), δμ)`.
    pub fn shoot_linearized(
        &self,
        mu: Bicomplex,
        psi0: Bicomplex,
        dpsi0: Bicomplex,
        seeds: &[(Bicomplex, Bicomplex, Bicomplex); TANGENTS],
    ) -> Result<(Shot, [Tangent; TANGENTS])> {
        let (left, lsum, ltan) = self.side_linearized(&self.left, -self.dx, mu, psi0, dpsi0, seeds)?;
        let (right, rsum, rtan) = self.side_linearized(&self.right, self.dx, mu, psi0, dpsi0, seeds)?;
        let h = self.grid.spacing();
        let norm = (square_modulus(psi0) + lsum[0] + rsum[0]).scale(h);
        let inner_norm = (square_modulus(psi0) + lsum[1] + rsum[1]).scale(h);
        let tangents = core::array::from_fn(|c| {
            let (e0, _, _) = seeds[c];
            let d0 = e0 * psi0.conj(Conjugation::Ti) + psi0 * e0.conj(Conjugation::Ti);
            Tangent {
                left: ltan[c].0,
                right: rtan[c].0,
                norm: (d0 + ltan[c].1 + rtan[c].1).scale(h),
                inner_norm: (d0 + ltan[c].2 + rtan[c].2).scale(h),
            }
        });
        Ok((
            Shot {
                left,
                right,
                norm,
                inner_norm,
            },
            tangents,
        ))
    }

    #[allow(clippy::type_complexity)]
    fn side_linearized(
        &self,
        table: &[Bicomplex],
        dx: f64,
        mu: Bicomplex,
        psi0: Bicomplex,
        dpsi0: Bicomplex,
        seeds: &[(Bicomplex, Bicomplex, Bicomplex); TANGENTS],
    ) -> Result<(Bicomplex, [Bicomplex; 2], [(Bicomplex, Bicomplex, Bicomplex); TANGENTS])> {
        let half = self.grid.nodes / 2;
        let ti = Conjugation::Ti;
        let g_at = |m: usize| if m <= self.nonlinear_until { self.g } else { Bicomplex::ZERO };
        let force = |m: usize, psi: Bicomplex| (table[m] - g_at(m) * square_modulus(psi) - mu) * psi;
        // dF = (V − g|ψ|² − μ)η − g(ηT_iψ + ψT_iη)ψ − δμ·ψ
        let dforce = |m: usize, psi: Bicomplex, eta: Bicomplex, dmu: Bicomplex| {
            let g = g_at(m);
            (table[m] - g * square_modulus(psi) - mu) * eta
                - g * (eta * psi.conj(ti) + psi * eta.conj(ti)) * psi
                - dmu * psi
        };
        let (mut y, mut dy) = (psi0, dpsi0);
        let mut eta: [Bicomplex; TANGENTS] = core::array::from_fn(|c| seeds[c].0);
        let mut deta: [Bicomplex; TANGENTS] = core::array::from_fn(|c| seeds[c].1);
        let dmu: [Bicomplex; TANGENTS] = core::array::from_fn(|c| seeds[c].2);
        let mut sum = Bicomplex::ZERO;
        let mut dsum = [Bicomplex::ZERO; TANGENTS];
        let (mut inner, mut dinner) = (Bicomplex::ZERO, [Bicomplex::ZERO; TANGENTS]);
        let hdx = 0.5 * dx;
        for node in 1..=half {
            for sub in 0..self.ratio {
                let m = 2 * ((node - 1) * self.ratio + sub);
                let (v0, v1, v2) = (m, m + 1, m + 2);
                let y1 = y;
                let y2 = y + dy.scale(hdx);
                let k1d = force(v0, y1);
                let dy2 = dy + k1d.scale(hdx);
                let y3 = y + dy2.scale(hdx);
                let k2d = force(v1, y2);
                let dy3 = dy + k2d.scale(hdx);
                let y4 = y + dy3.scale(dx);
                let k3d = force(v1, y3);
                let dy4 = dy + k3d.scale(dx);
                let k4d = force(v2, y4);
                for c in 0..TANGENTS {
                    let (e, de) = (eta[c], deta[c]);
                    let l1d = dforce(v0, y1, e, dmu[c]);
                    let e2 = e + de.scale(hdx);
                    let de2 = de + l1d.scale(hdx);
                    let l2d = dforce(v1, y2, e2, dmu[c]);
                    let e3 = e + de2.scale(hdx);
                    let de3 = de + l2d.scale(hdx);
                    let l3d = dforce(v1, y3, e3, dmu[c]);
                    let e4 = e + de3.scale(dx);
                    let de4 = de + l3d.scale(dx);
                    let l4d = dforce(v2, y4, e4, dmu[c]);
                    eta[c] = e + (de + (de2 + de3).scale(2.0) + de4).scale(dx / 6.0);
                    deta[c] = de + (l1d + (l2d + l3d).scale(2.0) + l4d).scale(dx / 6.0);
                }
                y += (dy + (dy2 + dy3).scale(2.0) + dy4).scale(dx / 6.0);
                dy += (k1d + (k2d + k3d).scale(2.0) + k4d).scale(dx / 6.0);
            }
            if !(y.max_abs() < BLOWUP) {
                return Err(Error::Diverged);
            }
            let w = if node == half { 0.5 } else { 1.0 };
            sum += square_modulus(y).scale(w);
            let yc = y.conj(ti);
            for c in 0..TANGENTS {
                dsum[c] += (eta[c] * yc + y * eta[c].conj(ti)).scale(w);
            }
            if node == self.inner_nodes {
                inner = sum - square_modulus(y).scale(w - 0.5);
                for c in 0..TANGENTS {
                    dinner[c] = dsum[c] - (eta[c] * yc + y * eta[c].conj(ti)).scale(w - 0.5);
                }
            }
        }
        Ok((y, [sum, inner], core::array::from_fn(|c| (eta[c], dsum[c], dinner[c]))))
    }

    /// One side: returns the end value, `Σ_{m=1}^{M−1}|ψ_m|² + ½|ψ_M|²` and the
    /// same sum truncated at the edge of the nonlinear region.
    fn side(
        &self,
        table: &[Bicomplex],
        dx: f64,
        mu: Bicomplex,
        psi0: Bicomplex,
        dpsi0: Bicomplex,
        mut record: Option<&mut Vec<(Bicomplex, Bicomplex)>>,
    ) -> Result<(Bicomplex, Bicomplex, Bicomplex)> {
        let half = self.grid.nodes / 2;
        let force = |m: usize, psi: Bicomplex| {
            let v = table[m];
            if m <= self.nonlinear_until {
                (v - self.g * square_modulus(psi) - mu) * psi
            } else {
                (v - mu) * psi
            }
        };
        let (mut y, mut dy) = (psi0, dpsi0);
        let mut sum = Bicomplex::ZERO;
        let mut inner = Bicomplex::ZERO;
        let hdx = 0.5 * dx;
        for node in 1..=half {
            for sub in 0..self.ratio {
                let m = 2 * ((node - 1) * self.ratio + sub);
                let k1y = dy;
                let k1d = force(m, y);
                let k2y = dy + k1d.scale(hdx);
                let k2d = force(m + 1, y + k1y.scale(hdx));
                let k3y = dy + k2d.scale(hdx);
                let k3d = force(m + 1, y + k2y.scale(hdx));
                let k4y = dy + k3d.scale(dx);
                let k4d = force(m + 2, y + k3y.scale(dx));
                y += (k1y + (k2y + k3y).scale(2.0) + k4y).scale(dx / 6.0);
                dy += (k1d + (k2d + k3d).scale(2.0) + k4d).scale(dx / 6.0);
            }
            let size = y.max_abs();
            if !(size < BLOWUP) {
                return Err(Error::Diverged);
            }
            let w = if node == half { 0.5 } else { 1.0 };
            sum += square_modulus(y).scale(w);
            if node == self.inner_nodes {
                inner = sum - square_modulus(y).scale(w - 0.5);
            }
            if let Some(rec) = record.as_mut() {
                rec.push((y, dy));
            }
        }
        Ok((y, sum, inner))
    }
}
