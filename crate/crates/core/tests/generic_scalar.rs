use gkpsim::circuit::{noiseless_output, odd_cat_state};
use gkpsim::optimizer::optimal_squeezing;
use gkpsim::phase_space::residual_variance_analytic;
use gkpsim::{builtin_cat_circuit, Method, TmsSymplectic};

#[test]
fn single_precision_phase_space() {
    let opt = optimal_squeezing(0.01_f32, Method::Analytic, 1e-3).unwrap();
    assert!((opt.s_star - 3.386).abs() < 0.02, "{}", opt.s_star);
    assert!(TmsSymplectic::new(2.0_f32).unwrap().symplectic_defect() < 1e-4);
    let v32 = residual_variance_analytic(0.01_f32, 1.0, 50) as f64;
    let v64 = residual_variance_analytic(0.01_f64, 1.0, 50);
    assert!((v32 / v64 - 1.0).abs() < 1e-5);
}

#[test]
fn single_precision_fock() {
    let c = builtin_cat_circuit(2.0_f32).unwrap().with_cutoff(30);
    let out = noiseless_output(&c).unwrap();
    let f = out.oscillator_fidelity(&odd_cat_state(2.0_f32, 30)).unwrap();
    assert!((f - 1.0).abs() < 1e-4, "{f}");
}
