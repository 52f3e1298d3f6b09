use proptest::prelude::*;
use ptwell_core::ep::{cycles, is_permutation, PermutationResult};
use ptwell_core::matrix_model::{build_h, char_poly_coeffs, closed_form_eigs, component_multiset_distance, eigenvalues, ModelParams};
use ptwell_core::model::{Grid, SymmetryOp, WaveFunction};
use ptwell_core::{Bicomplex, Conjugation};

fn bicomplex(scale: f64) -> impl Strategy<Value = Bicomplex> {
    (-scale..scale, -scale..scale, -scale..scale, -scale..scale).prop_map(|(a, b, c, d)| Bicomplex::new(a, b, c, d))
}

/// Real `(g̃, γ̃, v)` away from `g̃ = γ̃ = 0`.
fn real_params() -> impl Strategy<Value = ModelParams> {
    (-0.1..0.1f64, -0.1..0.1f64, 0.01..0.1f64)
        .prop_filter("denominator", |(g, ga, _)| g * g + ga * ga > 1e-6)
        .prop_map(|(g, ga, v)| ModelParams::new(g, ga, 0.0, v))
}

fn bicomplex_params() -> impl Strategy<Value = ModelParams> {
    (bicomplex(0.1), bicomplex(0.1), bicomplex(0.05), 0.01..0.1f64)
        .prop_filter("denominator", |(g, ga, _, _)| {
            let s = (*g * *g + *ga * *ga).split();
            s.plus.norm() > 1e-4 && s.minus.norm() > 1e-4
        })
        .prop_map(|(g, ga, e, v)| ModelParams::new(g, ga, e, v))
}

fn max_abs(xs: &[Bicomplex]) -> f64 {
    xs.iter().map(|x| x.max_abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn matrix_spectrum_matches_closed_form(p in real_params()) {
        let ev = eigenvalues(&build_h(&p).unwrap()).unwrap();
        let cf = closed_form_eigs(&p).unwrap();
        prop_assert!(component_multiset_distance(&ev, &cf) < 1e-9);
    }

    #[test]
    fn coefficients_are_symmetric_functions_of_the_spectrum(p in bicomplex_params()) {
        let ev = eigenvalues(&build_h(&p).unwrap()).unwrap();
        let c = char_poly_coeffs(&p).unwrap();
        let e1: Bicomplex = ev.iter().copied().sum();
        let mut e2 = Bicomplex::ZERO;
        let mut e3 = Bicomplex::ZERO;
        for a in 0..4 {
            for b in a + 1..4 {
                e2 += ev[a] * ev[b];
                for d in b + 1..4 {
                    e3 += ev[a] * ev[b] * ev[d];
                }
            }
        }
        let e4 = ev[0] * ev[1] * ev[2] * ev[3];
        let s = max_abs(&ev).max(1e-3);
        for (k, (coef, want)) in c.iter().zip([-e1, e2, -e3, e4]).enumerate() {
            let scale = s.powi(k as i32 + 1).max(coef.max_abs());
            prop_assert!((*coef - want).max_abs() <= 1e-9 * scale, "coefficient {k}");
        }
    }

    #[test]
    fn bicomplex_characteristic_polynomial_vanishes_on_the_spectrum(p in bicomplex_params()) {
        let ev = eigenvalues(&build_h(&p).unwrap()).unwrap();
        let c = char_poly_coeffs(&p).unwrap();
        let s = max_abs(&ev).max(max_abs(&c).sqrt().sqrt()).max(1e-3);
        for mu in ev {
            let val = (((mu + c[0]) * mu + c[1]) * mu + c[2]) * mu + c[3];
            prop_assert!(val.max_abs() <= 1e-9 * s.powi(4));
        }
    }

    #[test]
    fn real_parameter_spectrum_is_ti_invariant(p in real_params()) {
        let ev = eigenvalues(&build_h(&p).unwrap()).unwrap();
        let conj = ev.map(|m| m.conj(Conjugation::Ti));
        prop_assert!(component_multiset_distance(&ev, &conj) < 1e-9);
    }

    #[test]
    fn permutation_powers_and_inverse(m in Just((0..6).collect::<Vec<usize>>()).prop_shuffle()) {
        let r = PermutationResult::new(m.clone(), 0.0).unwrap();
        let flat: usize = r.cycles.iter().map(Vec::len).sum();
        prop_assert_eq!(flat, m.len());
        let order = r.cycles.iter().map(Vec::len).fold(1, lcm);
        prop_assert_eq!(r.power(order), (0..m.len()).collect::<Vec<_>>());
        let inv = r.inverse();
        prop_assert!(is_permutation(&inv));
        prop_assert!(m.iter().enumerate().all(|(a, &b)| inv[b] == a));
        prop_assert_eq!(cycles(&inv).len(), r.cycles.len());
    }

    #[test]
    fn symmetry_operations_are_involutions(vals in proptest::collection::vec(bicomplex(1.0), 9)) {
        let grid = Grid::new(1.0, 9).unwrap();
        let psi = WaveFunction::from_values(grid, vals).unwrap();
        for op in [SymmetryOp::PTi, SymmetryOp::Tj, SymmetryOp::PTiTj] {
            let twice = psi.apply(op).apply(op);
            prop_assert!(psi.distance(&twice) == 0.0);
            prop_assert_eq!(op.on_mu(op.on_mu(Bicomplex::new(1.0, 2.0, 3.0, 4.0))), Bicomplex::new(1.0, 2.0, 3.0, 4.0));
        }
    }
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 { a } else { gcd(b, a % b) }
    }
    a / gcd(a, b) * b
}
