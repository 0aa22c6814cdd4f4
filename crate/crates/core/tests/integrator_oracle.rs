use proptest::prelude::*;
use soliton_lab::integrator::{Integrator, IntegratorConfig};
use soliton_lab::monitors::comparison_ode_closed_form;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // y' = -a + y²/2 from any start strictly inside the separatrices
    #[test]
    fn riccati_comparison_matches_closed_form(a in 0.1..10.0_f64, frac in -0.9..0.9_f64) {
        let y0 = frac * (2.0 * a).sqrt();
        let cfg = IntegratorConfig { t_max: 5.0, rel_tol: 1e-12, abs_tol: 1e-14, ..Default::default() };
        let times: Vec<f64> = (1..=20).map(|k| 0.25 * f64::from(k)).collect();
        let sol = Integrator::new(cfg)
            .with_output_times(times)
            .run(move |_, y, dy| dy[0] = -a + 0.5 * y[0] * y[0], 0.0, &[y0]);
        for s in &sol.samples {
            let exact = comparison_ode_closed_form(a, y0, 0.0, s.t).unwrap();
            prop_assert!((s.y[0] - exact).abs() <= 1e-9, "a={} t={} {} vs {}", a, s.t, s.y[0], exact);
        }
    }
}
