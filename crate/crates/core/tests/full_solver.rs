use shipwave::bie::{amplitude_full, amplitude_of, solve_full, CollocationGrid, NewtonOptions, AMPLITUDE_FLOOR};
use shipwave::error::Error;
use shipwave::hull::HullSpec;
use shipwave::solution::{FreeSurfaceSolution, Profile, SolveMeta};
use shipwave::Hull;

fn fig2a() -> Hull<f64> {
    HullSpec::new("fig2a", &[(0.8, 0.5), (0.2, 0.125)]).normalize().unwrap()
}

#[test]
fn refinement_changes_amplitude_little() {
    let h = fig2a();
    let eps = 2.0 / 3.0;
    let coarse = amplitude_full(&h, eps, &CollocationGrid::graded(1000, 0.015)).unwrap();
    let fine = amplitude_full(&h, eps, &CollocationGrid::graded(2000, 0.0075)).unwrap();
    let rel = (coarse.amplitude - fine.amplitude).abs() / fine.amplitude;
    assert!(rel < 0.05, "{} vs {}", coarse.amplitude, fine.amplitude);
}

#[test]
fn converged_solution_satisfies_bernoulli_and_far_field() {
    let h = fig2a();
    let eps = 2.0 / 3.0;
    let sol = solve_full(&h, eps, &CollocationGrid::graded(1000, 0.015), &NewtonOptions::default(), None).unwrap();
    assert!(sol.meta.residual < 1e-11);
    let Profile::Full { q, theta } = &sol.profile else { panic!("wrong profile") };
    // trapezoid Bernoulli integral reproduces q^3
    let mut s = 0.0;
    for i in 1..sol.phi.len() {
        s += 0.5 * (sol.phi[i] - sol.phi[i - 1]) * (theta[i].sin() + theta[i - 1].sin());
        assert!((q[i].powi(3) + 3.0 / eps * s).abs() < 1e-12);
    }
    let n = q.len();
    let tail: Vec<f64> = q[n * 3 / 4..].to_vec();
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    assert!((mean - 1.0).abs() < 0.05, "{mean}");
}

#[test]
fn tiny_waves_are_refused() {
    let phi: Vec<f64> = (0..4000).map(|i| i as f64 * 0.01).collect();
    let q: Vec<f64> = phi.iter().map(|p| 1.0 + 5e-5 * (p / 0.3).cos()).collect();
    let sol = FreeSurfaceSolution {
        phi: phi.clone(),
        profile: Profile::Full { q, theta: vec![0.0; phi.len()] },
        eps: 0.3,
        meta: SolveMeta { solver: "synthetic", tol: 1e-12, residual: 0.0, iterations: 0, evaluations: 0, delta: 0.0 },
    };
    match amplitude_of(&sol) {
        Err(Error::BelowFloor { amplitude, floor }) => {
            assert!((amplitude - 5e-5).abs() < 1e-7);
            assert_eq!(floor, AMPLITUDE_FLOOR);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn strong_gravity_stays_near_rigid_wall() {
    let h: Hull<f64> = HullSpec::new("one", &[(1.0, 0.5)]).normalize().unwrap();
    let eps = 0.02;
    let g = CollocationGrid::graded(1000, 0.002);
    let sol = solve_full(&h, eps, &g, &NewtonOptions::default(), Some(&vec![0.0; g.nodes.len()])).unwrap();
    let Profile::Full { q, theta } = &sol.profile else { panic!("wrong profile") };
    for (i, &p) in sol.phi.iter().enumerate().skip(1) {
        assert!(theta[i].abs() < 0.01);
        assert!((q[i] - h.q0_real(p)).abs() < 0.01);
    }
}
