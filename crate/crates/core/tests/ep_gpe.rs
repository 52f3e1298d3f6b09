use ptwell_core::ep::{track_gpe, Backend, LoopSpec, LoopTarget};
use ptwell_core::model::PotentialParams;
use ptwell_core::spectrum::SpectrumConfig;

#[test]
fn linear_loop_exchanges_states_in_pairs() {
    let p = PotentialParams::standard();
    let config = SpectrumConfig::default();
    let spec = LoopSpec::gpe(LoopTarget::LinearGamma, &p, &config).unwrap();
    assert_eq!(spec.backend, Backend::Gpe);
    assert!((spec.center - 0.0413).abs() < 1e-3);
    let t = track_gpe(&spec, &p, &config).unwrap();
    assert_eq!(t.result.cycle_type(), vec![2, 2]);
    assert_eq!(t.result.power(2), vec![0, 1, 2, 3]);
    assert!(t.result.closure_error < 1e-8);
    assert_eq!(t.states.len(), spec.steps + 1);
}
