use proptest::prelude::*;
use shipwave::hull::HullSpec;
use shipwave::lateorder::gamma;
use shipwave::scalar::wrap_angle;
use shipwave::singulant::chi;
use shipwave::{Cx, Hull};

fn hull_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.05f64..5.0, prop_oneof![-0.3f64..-0.05, 0.05f64..0.6]), 1..5)
}

fn five_hulls() -> Vec<Hull<f64>> {
    vec![
        HullSpec::new("one", &[(1.0, 0.5)]).normalize().unwrap(),
        HullSpec::new("fig5", &[(0.8, 0.25), (0.2, 0.25)]).normalize().unwrap(),
        HullSpec::new("fig2a", &[(0.8, 0.5), (0.2, 0.125)]).normalize().unwrap(),
        HullSpec::rational("ft", &[(0.5, (-1, 2)), (0.3, (1, 2)), (0.2, (1, 2))]).normalize().unwrap(),
        HullSpec::new("mixed", &[(3.0, 0.3), (2.0, -0.2), (1.5, 0.4), (0.5, 0.1)]).normalize().unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalization_is_idempotent(corners in hull_strategy()) {
        let spec = HullSpec::new("p", &corners);
        if let Ok(h) = spec.normalize() {
            let again = h.to_spec().normalize().unwrap();
            for (x, y) in h.a().iter().zip(again.a()) {
                prop_assert!((x - y).abs() < 1e-15);
            }
            prop_assert_eq!(h.sigma(), again.sigma());
            let sum: f64 = h.a().iter().take(h.corners()).sum();
            prop_assert!((sum - 1.0).abs() < 1e-14);
            prop_assert!(h.a().windows(2).all(|w| w[0] > w[1]));
        }
    }

    #[test]
    fn gamma_increases_with_sigma(s in -0.33f64..0.99, d in 1e-6f64..0.5) {
        prop_assert!(gamma(s + d).unwrap() > gamma(s).unwrap());
    }

    #[test]
    fn chi_derivative_matches_differences(k in 0usize..2, re in -0.9f64..3.0, im in 0.1f64..1.5) {
        let h = HullSpec::new("fig5", &[(0.8, 0.25), (0.2, 0.25)]).normalize().unwrap();
        let w = Cx::new(re, im);
        let d = 1e-4;
        let fd = (chi(&h, k, w + d, None).unwrap() - chi(&h, k, w - d, None).unwrap()) / (2.0 * d);
        let exact = Cx::new(0.0, 1.0) * h.inv_q0_cubed(w);
        prop_assert!((fd - exact).norm() < 1e-6 * exact.norm(), "{} vs {}", fd, exact);
    }
}

#[test]
fn prefactor_argument_is_the_inclination() {
    for h in five_hulls() {
        for k in 0..h.corners() {
            let c = h.local_prefactor(k).unwrap();
            let d = wrap_angle(c.arg() - h.theta()[k]);
            assert!(d.abs() < 1e-12, "{} corner {k}: {d}", h.label());
        }
    }
}
