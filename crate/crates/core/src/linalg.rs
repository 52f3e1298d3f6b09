//! Small dense kernels: characteristic polynomials of complex matrices,
//! simultaneous polynomial root finding, and a pivoted real solve.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Durand–Kerner stopping tolerance on the relative root update.
pub const DK_TOL: f64 = 1e-13;
pub const DK_MAX_ITER: usize = 200;

/// Complex square matrix in row-major order.
pub type CMatrix<const N: usize> = [[Complex64; N]; N];

/// Coefficients `[c_{n-1}, …, c_0]` of `det(z·I − A) = zⁿ + c_{n-1}zⁿ⁻¹ + … + c_0`
/// by the Faddeev–LeVerrier recursion.
pub fn char_poly<const N: usize>(a: &CMatrix<N>) -> [Complex64; N] {
    let zero = Complex64::new(0.0, 0.0);
    let mut m = [[zero; N]; N];
    let mut coeffs = [zero; N];
    let mut prev = Complex64::new(1.0, 0.0);
    for k in 1..=N {
        // M_k = A·M_{k-1} + c_{n-k+1}·I
        let mut next = [[zero; N]; N];
        for r in 0..N {
            for c in 0..N {
                let mut acc = zero;
                for t in 0..N {
                    acc += a[r][t] * m[t][c];
                }
                next[r][c] = acc;
            }
            next[r][r] += prev;
        }
        m = next;
        let mut tr = zero;
        for r in 0..N {
            for t in 0..N {
                tr += a[r][t] * m[t][r];
            }
        }
        prev = -tr / k as f64;
        coeffs[k - 1] = prev;
    }
    coeffs
}

/// Evaluates the monic polynomial with coefficients `[c_{n-1}, …, c_0]`.
pub fn eval_monic(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().fold(Complex64::new(1.0, 0.0), |acc, &c| acc * z + c)
}

/// All roots of a monic polynomial by Weierstrass/Durand–Kerner iteration.
///
/// Starting points sit on a circle of the Fujiwara bound radius. Converged
/// when every update is below `DK_TOL·max(1, |z|)`. Multiple roots only
/// converge linearly; if the iteration limit is hit, the iterates are still
/// accepted when each has a backward error at rounding level.
pub fn durand_kerner(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NumericalFailure("non-finite polynomial coefficient"));
    }
    let radius = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| libm::pow(c.norm(), 1.0 / (k + 1) as f64))
        .fold(0.0, f64::max)
        .max(1e-3)
        * 2.0;
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let phi = 2.0 * core::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, phi)
        })
        .collect();
    for _ in 0..DK_MAX_ITER {
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for m in 0..n {
                if m != k {
                    denom *= z[k] - z[m];
                }
            }
            if denom.norm() == 0.0 {
                // coincident iterates: nudge apart
                z[k] += Complex64::new(1e-10 * radius, 1e-10 * radius);
                worst = f64::INFINITY;
                continue;
            }
            let delta = eval_monic(coeffs, z[k]) / denom;
            z[k] -= delta;
            worst = worst.max(delta.norm() / z[k].norm().max(1.0));
        }
        if worst <= DK_TOL {
            return Ok(z);
        }
    }
    if z.iter().all(|&r| backward_error(coeffs, r) <= 1e3 * f64::EPSILON) {
        return Ok(z);
    }
    Err(Error::NumericalFailure("Durand-Kerner did not converge"))
}

/// `|p(z)| / Σ|c_k||z|^(n-k)` for the monic polynomial `p`.
fn backward_error(coeffs: &[Complex64], z: Complex64) -> f64 {
    let scale = coeffs.iter().fold(1.0, |acc, c| acc * z.norm() + c.norm());
    eval_monic(coeffs, z).norm() / scale
}

/// Solves `A x = b` for a small dense real system by Gaussian elimination
/// with partial pivoting. `a` is row-major `n × n`.
pub fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    if a.len() != n * n {
        return Err(Error::InvalidInput("matrix and right-hand side sizes differ"));
    }
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::NumericalFailure("singular or non-finite Jacobian"));
    }
    for col in 0..n {
        let (piv, pmax) = (col..n)
            .map(|r| (r, a[r * n + col].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax <= 1e-14 * scale {
            return Err(Error::NumericalFailure("singular Jacobian"));
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f != 0.0 {
                for c in col..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for c in r + 1..n {
            acc -= a[r * n + c] * x[c];
        }
        x[r] = acc / a[r * n + r];
    }
    Ok(x)
}

/// Elementary symmetric functions turned into monic coefficients:
/// `Π (z − r_k) = zⁿ + c_{n-1}zⁿ⁻¹ + … + c_0`.
pub fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (k, &ck) in c.iter().enumerate() {
            next[k] += ck;
            next[k + 1] -= ck * r;
        }
        c = next;
    }
    c.remove(0);
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn char_poly_of_companion_matrix() {
        // companion of z^3 - 6z^2 + 11z - 6 = (z-1)(z-2)(z-3)
        let z0 = c(0.0, 0.0);
        let a = [
            [c(6.0, 0.0), c(-11.0, 0.0), c(6.0, 0.0)],
            [c(1.0, 0.0), z0, z0],
            [z0, c(1.0, 0.0), z0],
        ];
        let p = char_poly(&a);
        assert!((p[0] - c(-6.0, 0.0)).norm() < 1e-14);
        assert!((p[1] - c(11.0, 0.0)).norm() < 1e-14);
        assert!((p[2] - c(-6.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn durand_kerner_recovers_known_roots() {
        let roots = [c(1.0, 2.0), c(-0.5, 0.0), c(3.0, -1.0), c(0.25, 0.25)];
        let coeffs = poly_from_roots(&roots);
        let mut found = durand_kerner(&coeffs).unwrap();
        for r in roots {
            let (idx, d) = found
                .iter()
                .enumerate()
                .map(|(i, z)| (i, (z - r).norm()))
                .fold((0, f64::INFINITY), |b, x| if x.1 < b.1 { x } else { b });
            assert!(d < 1e-12, "root {r} missed by {d}");
            found.remove(idx);
        }
    }

    #[test]
    fn durand_kerner_double_roots() {
        let roots = [c(0.3, 0.1), c(0.3, 0.1), c(-0.3, -0.1), c(-0.3, -0.1)];
        let found = durand_kerner(&poly_from_roots(&roots)).unwrap();
        for z in found {
            let d = roots.iter().map(|r| (z - r).norm()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-6, "{z} is {d} from the nearest root");
        }
    }

    #[test]
    fn durand_kerner_quadruple_zero() {
        let roots = durand_kerner(&[c(0.0, 0.0); 4]).unwrap();
        assert!(roots.iter().all(|z| z.norm() < 1e-10));
    }

    #[test]
    fn dense_solve() {
        let a = vec![2.0, 1.0, -1.0, -3.0, -1.0, 2.0, -2.0, 1.0, 2.0];
        let x = solve_dense(a, vec![8.0, -11.0, -3.0]).unwrap();
        for (got, want) in x.iter().zip([2.0, 3.0, -1.0]) {
            assert!((got - want).abs() < 1e-13);
        }
        assert!(solve_dense(vec![1.0, 2.0, 2.0, 4.0], vec![1.0, 1.0]).is_err());
    }
}
