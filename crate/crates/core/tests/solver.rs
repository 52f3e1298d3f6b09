//! Shooting solver against an independent finite-difference
//! self-consistent-field solution, plus symmetry and resolution checks.

use num_complex::Complex64;
use ptwell_core::model::{potential, square_modulus, Grid, PotentialParams, SymmetryClass, SymmetryOp};
use ptwell_core::solver::{linear_modes, Problem, Solution, SolverConfig};
use ptwell_core::spectrum::{sweep, BranchLabel, SpectrumConfig};
use ptwell_core::Bicomplex;

/// Lowest self-consistent state of `−ψ'' + (V − g|ψ|²)ψ = μψ` with Dirichlet
/// ends, by shifted inverse iteration on the tridiagonal operator. Real γ
/// only, so ψ and μ are ordinary complex numbers. With `pt` set, every
/// iterate is projected onto `ψ(x) = ψ*(−x)`.
fn fd_ground_state(g: f64, p: &PotentialParams, nodes: usize, pt: bool) -> (Complex64, Vec<Complex64>) {
    let grid = Grid::new(10.0, nodes).unwrap();
    let h = grid.spacing();
    let n = nodes - 2;
    let v: Vec<Complex64> = (1..=n)
        .map(|i| {
            let w = potential(grid.x(i), p);
            Complex64::new(w.c1, w.ci)
        })
        .collect();
    let off = Complex64::new(-1.0 / (h * h), 0.0);
    let mut psi: Vec<Complex64> = (1..=n)
        .map(|i| {
            let x = grid.x(i);
            Complex64::new((-0.5 * (x - 1.5) * (x - 1.5)).exp() + (-0.5 * (x + 1.5) * (x + 1.5)).exp(), 0.0)
        })
        .collect();
    normalize(&mut psi, h);
    let mut mu = Complex64::new(0.0, 0.0);
    for _ in 0..500 {
        let diag: Vec<Complex64> = (0..n).map(|i| 2.0 / (h * h) + v[i] - g * psi[i].norm_sqr()).collect();
        // bilinear Rayleigh quotient; the operator is complex symmetric
        let hpsi: Vec<Complex64> = (0..n)
            .map(|i| {
                let mut y = diag[i] * psi[i];
                if i > 0 {
                    y += off * psi[i - 1];
                }
                if i + 1 < n {
                    y += off * psi[i + 1];
                }
                y
            })
            .collect();
        let num: Complex64 = psi.iter().zip(&hpsi).map(|(a, b)| a * b).sum();
        let den: Complex64 = psi.iter().map(|a| a * a).sum();
        let new_mu = num / den;
        let shift = new_mu - 0.02;
        let shifted: Vec<Complex64> = diag.iter().map(|d| d - shift).collect();
        let mut next = thomas(&shifted, off, &psi);
        normalize(&mut next, h);
        // fix the global phase so that successive iterates can be compared
        let c = next[n / 2];
        let phase = c.conj() / c.norm();
        next.iter_mut().for_each(|x| *x *= phase);
        if pt {
            let mirrored: Vec<Complex64> = next.iter().rev().map(|x| x.conj()).collect();
            next.iter_mut().zip(mirrored).for_each(|(x, m)| *x = 0.5 * (*x + m));
            normalize(&mut next, h);
        }
        let change = next.iter().zip(&psi).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        psi = next;
        let dmu = (new_mu - mu).norm();
        mu = new_mu;
        if change < 1e-13 && dmu < 1e-13 {
            break;
        }
    }
    let mut full = vec![Complex64::new(0.0, 0.0)];
    full.extend(psi);
    full.push(Complex64::new(0.0, 0.0));
    (mu, full)
}

fn normalize(psi: &mut [Complex64], h: f64) {
    let s = (psi.iter().map(|x| x.norm_sqr()).sum::<f64>() * h).sqrt();
    psi.iter_mut().for_each(|x| *x /= s);
}

fn thomas(diag: &[Complex64], off: Complex64, rhs: &[Complex64]) -> Vec<Complex64> {
    let n = diag.len();
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    c[0] = off / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - off * c[i - 1];
        c[i] = off / m;
        d[i] = (rhs[i] - off * d[i - 1]) / m;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    x
}

/// FD ground state extrapolated from spacings `h` and `h/2`; `|ψ|` on the
/// coarse grid.
fn fd_oracle(g: f64, p: &PotentialParams, pt: bool) -> (Complex64, Vec<f64>) {
    let (mu_h, psi_h) = fd_ground_state(g, p, 2001, pt);
    let (mu_f, psi_f) = fd_ground_state(g, p, 4001, pt);
    let mu = (mu_f * 4.0 - mu_h) / 3.0;
    let amp = psi_h
        .iter()
        .enumerate()
        .map(|(i, a)| (4.0 * psi_f[2 * i].norm() - a.norm()) / 3.0)
        .collect();
    (mu, amp)
}

fn gpe_state(g: f64, gamma: f64, label: BranchLabel) -> Solution {
    let pts = sweep(g, &[gamma], &PotentialParams::standard(), &SpectrumConfig::default()).unwrap();
    pts[0].branch(label).unwrap().clone()
}

fn compare_with_oracle(gamma: f64, label: BranchLabel, pt: bool) {
    let p = PotentialParams::standard().with_gamma(gamma);
    let sol = gpe_state(0.2, gamma, label);
    let (mu, amp) = fd_oracle(0.2, &p, pt);
    assert!((sol.mu.c1 - mu.re).abs() < 1e-6, "μ₁ {} vs {}", sol.mu.c1, mu.re);
    assert!((sol.mu.ci - mu.im).abs() < 1e-6, "μ_i {} vs {}", sol.mu.ci, mu.im);
    assert!(sol.mu.cj.abs() < 1e-9 && sol.mu.ck.abs() < 1e-9);
    let worst = sol
        .psi
        .values
        .iter()
        .zip(&amp)
        .map(|(v, a)| (square_modulus(*v).c1.max(0.0).sqrt() - a).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "max ||ψ| − |ψ_fd|| = {worst:e}");
}

#[test]
fn hermitian_ground_state_matches_finite_differences() {
    compare_with_oracle(0.0, BranchLabel::PsiG, false);
}

#[test]
fn pt_symmetric_ground_state_matches_finite_differences() {
    compare_with_oracle(0.03, BranchLabel::PsiG, true);
}

#[test]
fn broken_ground_state_matches_finite_differences() {
    // the unprojected iteration settles on the lossy member of the i± pair
    compare_with_oracle(0.03, BranchLabel::PsiIMinus, false);
}

#[test]
fn conjugate_partner_is_a_solution() {
    let p = PotentialParams::standard().with_gamma(0.05);
    let pts = sweep(0.2, &[0.05], &p.with_gamma(0.0), &SpectrumConfig::default()).unwrap();
    let plus = pts[0].branch(BranchLabel::PsiIPlus).unwrap();
    let minus = pts[0].branch(BranchLabel::PsiIMinus).unwrap();
    let problem = Problem::new(0.2, &p, &SolverConfig::default()).unwrap();
    let partner = problem.solve(&plus.state().apply(SymmetryOp::PTi)).unwrap();
    assert!((partner.mu - SymmetryOp::PTi.on_mu(plus.mu)).max_abs() < 1e-8);
    assert!((partner.mu - minus.mu).max_abs() < 1e-8);
    assert!(plus.mu.ci.abs() > 1e-3);
}

#[test]
fn k_pair_is_pti_tj_symmetric() {
    let sol = gpe_state(0.2, 0.01, BranchLabel::PsiKPlus);
    let c = sol.classify();
    assert_eq!(c.class, SymmetryClass::PTiTjSymmetric);
    assert!(c.defect < 1e-6);
    assert!(sol.mu.ck.abs() > 1e-3);
    assert!((sol.norm() - Bicomplex::ONE).max_abs() < 1e-9);
}

#[test]
fn halving_the_resolution_changes_little() {
    let p = PotentialParams::standard().with_gamma(0.03);
    let sol = gpe_state(0.2, 0.03, BranchLabel::PsiG);
    let base = SolverConfig::default();
    let fine = SolverConfig {
        grid: base.grid.refined(),
        rk_step: base.rk_step / 2.0,
        ..base
    };
    let refined = Problem::new(0.2, &p, &fine).unwrap().solve(&sol.state()).unwrap();
    assert!((refined.mu - sol.mu).max_abs() < 1e-8);
    assert!(refined.residual_norm < 1e-6);
}

#[test]
fn linear_modes_are_real_below_and_paired_above_the_exceptional_point() {
    let grid = Grid::standard();
    let (below, _) = linear_modes(&PotentialParams::standard().with_gamma(0.03), &grid).unwrap();
    assert!(below.iter().all(|m| m.lambda.im.abs() < 1e-9));
    assert!((below[0].lambda.re - below[1].lambda.re).abs() > 1e-3);
    let (above, _) = linear_modes(&PotentialParams::standard().with_gamma(0.05), &grid).unwrap();
    assert!((above[0].lambda - above[1].lambda.conj()).norm() < 1e-9);
    assert!(above[0].lambda.im.abs() > 1e-3);
}
