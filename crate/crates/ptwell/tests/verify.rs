use ptwell::verify::{self, Builder};
use ptwell_core::matrix_model::{build_h, Matrix4, ModelParams, ScalingMap};

fn h43_sign_flipped(p: &ModelParams) -> ptwell_core::Result<Matrix4> {
    let mut h = build_h(p)?;
    h[3][2] = -h[3][2];
    Ok(h)
}

#[test]
fn fast_suite_passes() {
    let checks = verify::fast_suite(build_h, &ScalingMap::default());
    for c in &checks {
        assert!(c.passed, "{c}");
    }
    assert_eq!(checks.len(), 8);
}

#[test]
fn h43_sign_error_fails_the_coefficient_check() {
    let bad: Builder = h43_sign_flipped;
    let c = verify::coefficient_expansion(bad, 1000);
    assert!(!c.passed, "{c}");
    assert!(verify::coefficient_expansion(build_h, 1000).passed);
}

#[test]
fn h43_sign_error_shows_in_the_suite() {
    let checks = verify::fast_suite(h43_sign_flipped, &ScalingMap::default());
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    assert!(failed.contains(&"characteristic coefficients"), "{failed:?}");
}

#[test]
fn check_lines_carry_the_verdict() {
    let line = verify::jordan_block(build_h).to_string();
    assert!(line.starts_with("PASS  Jordan block"), "{line}");
}
