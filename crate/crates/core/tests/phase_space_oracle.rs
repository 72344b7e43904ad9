use gkpsim::phase_space::{
    adequate_series_terms, noise_covariance, residual_stats_mc, residual_variance_analytic, residual_variance_mc,
    sample_noise_draw, transform_noise, LogicalStep, SyndromeOutcome,
};
use gkpsim::{NormalSampler, TmsSymplectic};

#[test]
fn decoded_covariance_matches_closed_form() {
    let (s, sigma, trials) = (1.0_f64, 0.01_f64, 1_000_000);
    let mut rng = NormalSampler::from_stream(77, 0);
    let mut acc = [[0.0_f64; 4]; 4];
    for _ in 0..trials {
        let z = transform_noise(&sample_noise_draw(&mut rng, sigma), s).unwrap().to_array();
        for i in 0..4 {
            for j in 0..4 {
                acc[i][j] += z[i] * z[j];
            }
        }
    }
    let exact = noise_covariance(s, sigma);
    for i in 0..4 {
        for j in 0..4 {
            let m = acc[i][j] / trials as f64;
            if exact[i][j] != 0.0 {
                assert!((m / exact[i][j] - 1.0).abs() < 0.02, "({i},{j}) {m} vs {}", exact[i][j]);
            } else {
                assert!(m.abs() < 0.02 * exact[0][0]);
            }
        }
    }
}

#[test]
fn encode_decode_round_trip_without_noise() {
    let tms = TmsSymplectic::new(2.5_f64).unwrap();
    let x = gkpsim::QuadVector4::new(0.3, -1.2, 0.0, 0.0);
    let y = tms.decode(tms.encode(x));
    assert!((y.q_dat - x.q_dat).abs() < 1e-12 && (y.p_dat - x.p_dat).abs() < 1e-12);
    let syn = SyndromeOutcome::measure(&y);
    assert!(syn.zbar_q.abs() < 1e-12 && syn.zbar_p.abs() < 1e-12);
    let step = LogicalStep::new(0.0_f64, 2.5).unwrap();
    let r = step.sample(&mut NormalSampler::from_stream(0, 0));
    assert_eq!((r.delta_q, r.delta_p), (0.0, 0.0));
}

#[test]
fn residual_quadratures_are_symmetric() {
    for (sigma, s) in [(0.01, 2.0), (0.03, 3.0), (0.01, 4.0)] {
        let st = residual_stats_mc(sigma, s, 400_000, 5).unwrap();
        let z = (st.q.variance - st.p.variance).abs() / st.q.variance_standard_error.hypot(st.p.variance_standard_error);
        assert!(z < 3.0, "({sigma}, {s}): {} vs {}", st.q.variance, st.p.variance);
        assert!(st.q.mean.abs() < 4.0 * st.q.mean_standard_error);
    }
}

#[test]
fn monte_carlo_tracks_series_where_wraps_are_sampled() {
    for (sigma, s) in [(0.01, 0.0), (0.01, 3.0), (0.01, 4.0), (0.03, 3.42)] {
        let exact = residual_variance_analytic(sigma, s, adequate_series_terms(sigma, s));
        let (v, se) = residual_variance_mc(sigma, s, 1_000_000, 9).unwrap();
        assert!((v - exact).abs() < 3.0 * se, "({sigma}, {s}): {v} vs {exact} ± {se}");
    }
}

#[test]
fn seeds_and_streams_are_reproducible() {
    let a = residual_variance_mc(0.03_f64, 3.42, 50_000, 1).unwrap();
    let b = residual_variance_mc(0.03_f64, 3.42, 50_000, 1).unwrap();
    let c = residual_variance_mc(0.03_f64, 3.42, 50_000, 2).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
