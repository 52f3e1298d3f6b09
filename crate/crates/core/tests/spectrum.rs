use ptwell_core::model::{PotentialParams, SymmetryOp};
use ptwell_core::spectrum::{critical_points, sweep, BranchLabel, SpectrumConfig};

#[test]
fn strong_nonlinearity_breaks_symmetry_without_gain_loss() {
    let p = PotentialParams::standard();
    let config = SpectrumConfig::default();
    let pts = sweep(0.3, &[0.0, 0.02], &p, &config).unwrap();
    let at0 = &pts[0];
    assert!(!at0.gap);
    let plus = at0.branch(BranchLabel::PsiIPlus).unwrap();
    let ground = at0.branch(BranchLabel::PsiG).unwrap();
    // broken states below the symmetric ground state, localized in one well
    assert!(plus.mu.c1 < ground.mu.c1 - 1e-3);
    assert!(plus.psi.symmetry_defect(SymmetryOp::PTi) > 1e-2);
    let c = critical_points(0.3, &p, &config).unwrap();
    assert_eq!(c.gamma_c1, 0.0);
    assert!(c.gamma_c2 > 0.03);
}

#[test]
fn linear_pair_is_absent_without_gain_loss() {
    let pts = sweep(0.0, &[0.0, 0.005], &PotentialParams::standard(), &SpectrumConfig::default()).unwrap();
    assert!(pts[0].gap);
    assert_eq!(pts[0].labels(), vec![BranchLabel::PsiG, BranchLabel::PsiE]);
    assert!(!pts[1].gap);
    let k = pts[1].branch(BranchLabel::PsiKPlus).unwrap();
    assert!(k.mu.ck > 0.0 && k.mu.ci.abs() < 1e-9 && k.mu.cj.abs() < 1e-9);
}
