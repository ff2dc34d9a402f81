//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero when any fails.

use num_rational::Ratio;
use shipwave::bie::{amplitude_full, amplitude_of, CollocationGrid, AMPLITUDE_FLOOR};
use shipwave::error::Error;
use shipwave::hilbert::hilbert_identity_residual;
use shipwave::hull::HullSpec;
use shipwave::lateorder::{gamma, gamma_exact, omega};
use shipwave::measure::measure_waves;
use shipwave::quad::QuadOptions;
use shipwave::scalar::wrap_angle;
use shipwave::sim::solve_simplified;
use shipwave::singulant::{chi, chi_estimate, re_chi1_residue, Contour};
use shipwave::solution::{FreeSurfaceSolution, Profile, SolveMeta};
use shipwave::stokes::{active_corners, emergence_angles, emergence_angles_exact, TraceOptions};
use shipwave::sweep::{sweep_corner, sweep_epsilon, SweepOptions, SweepPoint};
use shipwave::wave::{dominance_analysis, downstream_amplitude, Model, Verdict};
use shipwave::{Cx, Hull, OmegaCache};
use std::f64::consts::PI;
use std::time::Instant;

type Outcome = Result<(bool, String), String>;

fn e(err: Error) -> String {
    err.to_string()
}

fn hull(label: &str, corners: &[(f64, f64)]) -> Hull<f64> {
    HullSpec::new(label, corners).normalize().unwrap()
}

fn fig5() -> Hull<f64> {
    hull("fig5", &[(0.8, 0.25), (0.2, 0.25)])
}

fn step3() -> Hull<f64> {
    HullSpec::rational("step3", &[(0.5, (-1, 2)), (0.3, (1, 2)), (0.2, (1, 2))]).normalize().unwrap()
}

fn criterion_1() -> Outcome {
    let mut ok = true;
    let g_half = gamma_exact(Ratio::new(1, 2)).map_err(e)?;
    let g_third = gamma_exact(Ratio::new(1, 3)).map_err(e)?;
    ok &= g_half == Ratio::new(6, 5) && g_third == Ratio::from_integer(1);
    ok &= (gamma(0.5f64).map_err(e)? - 1.2).abs() < 1e-12 && (gamma(1.0f64 / 3.0).map_err(e)? - 1.0).abs() < 1e-12;
    let one = HullSpec::rational("one", &[(1.0f64, (1, 2))]).normalize().map_err(e)?;
    let nu1 = emergence_angles_exact(&one, 0).map_err(e)?.unwrap_or_default();
    ok &= nu1.contains(&Ratio::new(2, 5));
    ok &= emergence_angles(&one, 0).map_err(e)?.iter().any(|v| (v - 0.4 * PI).abs() < 1e-12);
    let ft = step3();
    // second corner from the bow, zero-based index 1
    let nu2 = emergence_angles_exact(&ft, 1).map_err(e)?.unwrap_or_default();
    ok &= nu2.contains(&Ratio::new(3, 5));
    ok &= emergence_angles(&ft, 1).map_err(e)?.iter().any(|v| (v - 0.6 * PI).abs() < 1e-12);
    let show = |v: &[Ratio<i64>]| v.iter().map(|r| format!("{r}pi")).collect::<Vec<_>>().join(",");
    Ok((ok, format!("gamma(1/2) = {g_half}, gamma(1/3) = {g_third}, nu = {}, nu_2 = {}", show(&nu1), show(&nu2))))
}

fn criterion_2() -> Outcome {
    let hulls = [
        fig5(),
        hull("synthetic-a", &[(0.5, 0.25), (0.3, -0.2), (0.2, 0.3)]),
        hull("synthetic-b", &[(3.0, 0.1), (2.0, 0.2), (1.0, 0.15)]),
    ];
    let (abs_tol, rel_tol) = (1e-10, 1e-13);
    let opts = QuadOptions::with_tol(abs_tol, rel_tol);
    let mut worst_res = 0.0f64;
    let mut worst_path = 0.0f64;
    let mut ok = true;
    for h in &hulls {
        for x in [0.5, 2.0, 10.0] {
            let w = Cx::new(x, 0.0);
            let a = chi_estimate(h, 0, w, None, &opts).map_err(e)?;
            let dev = (a.value.re - re_chi1_residue(h)).abs();
            worst_res = worst_res.max(dev);
            let arch = Contour::arch(h, h.singularity(0), w, 0.7);
            let b = chi_estimate(h, 0, w, Some(&arch), &opts).map_err(e)?;
            let gap = (a.value - b.value).norm();
            let bound = 2.0 * abs_tol.max(rel_tol * a.value.norm());
            worst_path = worst_path.max(gap / bound);
            ok &= dev < 1e-6 && gap < bound;
        }
    }
    Ok((ok, format!("max |Re chi_1 - residue| = {worst_res:.2e}; max path gap / (2 tol) = {worst_path:.3}")))
}

fn criterion_3() -> Outcome {
    let opts = TraceOptions::default();
    let ft = active_corners(&step3(), &opts).map_err(e)?;
    let c1_free = ft.corners[1].traces.iter().all(|t| t.hits_free_surface().is_none());
    let corners: Vec<(f64, (i64, i64))> =
        (1..=9).map(|k| ((10 - k) as f64, if k % 2 == 1 { (1, 2) } else { (-1, 2) })).collect();
    let stair = HullSpec::rational("staircase", &corners).normalize().map_err(e)?;
    let st = active_corners(&stair, &opts).map_err(e)?;
    let ok = ft.members() == vec![2] && c1_free && st.members().len() == 5 && st.undetermined().is_empty();
    Ok((
        ok,
        format!(
            "step3 active {:?} (1-based {:?}), corner-2 trace misses free surface: {c1_free}; staircase |J| = {}",
            ft.members(),
            ft.members().iter().map(|k| k + 1).collect::<Vec<_>>(),
            st.members().len()
        ),
    ))
}

fn criterion_4() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for i in 1..=9 {
        let s = i as f64 / 10.0;
        match omega(s, 1e-6) {
            Ok(d) => {
                ok &= d.omega > 0.0 && d.omega_error_est < 1e-6;
                parts.push(format!("{s}:{:.6}", d.omega));
            }
            Err(err) => {
                ok = false;
                parts.push(format!("{s}:{err}"));
            }
        }
    }
    Ok((ok, format!("Omega = {}", parts.join(" "))))
}

fn criterion_5() -> Outcome {
    let h = fig5();
    let cache = OmegaCache::new(1e-10);
    let sweep = sweep_epsilon(&h, &[0.3, 0.25, 0.2, 0.15], &SweepOptions::default(), &cache).map_err(e)?;
    let fit = sweep.fit.ok_or("fewer than two measured amplitudes")?;
    let amps: Vec<String> = sweep
        .points
        .iter()
        .map(|p| format!("{}:{:.4e}", p.eps, p.numerical_amplitude().unwrap_or(f64::NAN)))
        .collect();
    let rel = fit.relative_error();
    Ok((
        rel < 0.05 && fit.points == 4,
        format!(
            "slope {:.4} vs {:.4} (rel {:.2}%), amplitudes {}",
            fit.slope,
            fit.expected_slope,
            100.0 * rel,
            amps.join(" ")
        ),
    ))
}

fn num(p: &SweepPoint<f64>) -> f64 {
    p.numerical_amplitude().unwrap_or(f64::NAN)
}

fn criterion_6() -> Outcome {
    let cache = OmegaCache::new(1e-10);
    let opts = SweepOptions::default();
    let eps = 0.15;
    let grid: Vec<f64> = (0..25).map(|i| 0.51 + 0.02 * i as f64).collect();
    let pts = sweep_corner((0.25, 0.25), &grid, eps, &opts, &cache).map_err(e)?;
    let flagged: Vec<f64> = pts.iter().filter(|p| !p.flags.is_empty()).map(|p| p.param).collect();
    let imin = (0..pts.len())
        .filter(|&i| pts[i].numerical.is_some())
        .min_by(|&i, &j| num(&pts[i]).partial_cmp(&num(&pts[j])).unwrap())
        .ok_or("no measured amplitudes")?;
    // golden-section refinement of the numerical minimum between grid neighbours
    let amp_at = |a1: f64| -> Result<f64, String> {
        let p = sweep_corner((0.25, 0.25), &[a1], eps, &opts, &cache).map_err(e)?;
        p[0].numerical_amplitude().ok_or_else(|| format!("measurement rejected at a1 = {a1}: {:?}", p[0].flags))
    };
    let (mut lo, mut hi) = (grid[imin.saturating_sub(1)], grid[(imin + 1).min(grid.len() - 1)]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut fc, mut fd) = (amp_at(c)?, amp_at(d)?);
    for _ in 0..24 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = amp_at(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = amp_at(d)?;
        }
    }
    let (a_min, f_min) = if fc < fd { (c, fc) } else { (d, fd) };
    let (a_min, f_min) = if num(&pts[imin]) < f_min { (grid[imin], num(&pts[imin])) } else { (a_min, f_min) };
    let ref_08 = amp_at(0.8)?;
    let ratio = ref_08 / f_min;
    let part_a = (0.93..=0.98).contains(&a_min);
    let part_b = ratio >= 5.0;
    let asym_min = pts
        .iter()
        .filter(|p| p.asymptotic.is_some())
        .min_by(|x, y| x.asymptotic.partial_cmp(&y.asymptotic).unwrap())
        .ok_or("no asymptotic amplitudes")?;
    let part_c = (0.93..=0.98).contains(&asym_min.param);
    let first = &pts[0];
    let (n0, m0, t0) = (num(first), first.merged.unwrap_or(f64::NAN), first.asymptotic.unwrap_or(f64::NAN));
    let part_d = (m0 - n0).abs() < (t0 - n0).abs();
    Ok((
        part_a && part_b && part_c && part_d && flagged.is_empty(),
        format!(
            "(a) {} min at a1 = {a_min:.4}; (b) {} A(0.8)/A_min = {ratio:.2}; (c) {} asymptotic min at a1 = {:.2}; \
             (d) {} at a1 = {}: numeric {n0:.3e}, merged {m0:.3e}, two-corner {t0:.3e}; flagged {flagged:?}",
            pf(part_a),
            pf(part_b),
            pf(part_c),
            asym_min.param,
            pf(part_d),
            first.param
        ),
    ))
}

fn pf(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

fn criterion_7() -> Outcome {
    let cache = OmegaCache::new(1e-10);
    let configs = [("[0.5,0.125]", (0.5, 0.125), 2.0 / 3.0, 1000usize), ("[0.25,0.25]", (0.25, 0.25), 1.0 / 3.0, 2000)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, (s1, s2), eps, n) in configs {
        let h = hull(label, &[(0.8, s1), (0.2, s2)]);
        let active = active_corners(&h, &TraceOptions::default()).map_err(e)?;
        let pred = downstream_amplitude(&h, &active, eps, Model::Full, &cache).map_err(e)?.amplitude;
        match amplitude_full(&h, eps, &CollocationGrid::graded(n, 0.015)) {
            Ok(m) => {
                let rel = (m.amplitude - pred).abs() / pred;
                ok &= rel < 0.2;
                parts.push(format!("{label} eps {eps:.4}: {} measured {:.4e} vs {:.4e} ({:.1}%)", pf(rel < 0.2), m.amplitude, pred, 100.0 * rel));
            }
            Err(err) => {
                ok = false;
                parts.push(format!("{label}: FAIL {err}"));
            }
        }
    }
    let phi: Vec<f64> = (0..4000).map(|i| i as f64 * 0.01).collect();
    let q: Vec<f64> = phi.iter().map(|p| 1.0 + 5e-5 * (p / 0.3).cos()).collect();
    let tiny = FreeSurfaceSolution {
        phi: phi.clone(),
        profile: Profile::Full { q, theta: vec![0.0; phi.len()] },
        eps: 0.3,
        meta: SolveMeta { solver: "synthetic", tol: 1e-12, residual: 0.0, iterations: 0, evaluations: 0, delta: 0.0 },
    };
    let refused = matches!(amplitude_of(&tiny), Err(Error::BelowFloor { .. }));
    ok &= refused;
    parts.push(format!("5e-5 wave refused below {AMPLITUDE_FLOOR:e}: {}", pf(refused)));
    Ok((ok, parts.join("; ")))
}

fn criterion_8() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();

    let mut worst = 0.0f64;
    for h in [fig5(), hull("one", &[(1.0, 0.5)])] {
        for w in [0.5, 1.0, 2.0, 5.0, 10.0] {
            worst = worst.max(hilbert_identity_residual(&h, w).map_err(e)?);
        }
    }
    ok &= worst < 1e-3;
    parts.push(format!("{} Hilbert identity max residual {worst:.2e}", pf(worst < 1e-3)));

    let five = [
        hull("one", &[(1.0, 0.5)]),
        fig5(),
        hull("fig2a", &[(0.8, 0.5), (0.2, 0.125)]),
        step3(),
        hull("mixed", &[(3.0, 0.3), (2.0, -0.2), (1.5, 0.4), (0.5, 0.1)]),
    ];
    let mut arg_dev = 0.0f64;
    for h in &five {
        for k in 0..h.corners() {
            arg_dev = arg_dev.max(wrap_angle(h.local_prefactor(k).map_err(e)?.arg() - h.theta()[k]).abs());
        }
    }
    ok &= arg_dev < 1e-12;
    parts.push(format!("{} arg c_k - theta_k max {arg_dev:.1e}", pf(arg_dev < 1e-12)));

    let h = fig5();
    let mut fd_dev = 0.0f64;
    for (k, w) in [(0, Cx::new(0.4, 0.3)), (1, Cx::new(-0.1, 0.6)), (0, Cx::new(2.5, 1.0))] {
        let d = 1e-4;
        let fd = (chi(&h, k, w + d, None).map_err(e)? - chi(&h, k, w - d, None).map_err(e)?) / (2.0 * d);
        let exact = Cx::new(0.0, 1.0) * h.inv_q0_cubed(w);
        fd_dev = fd_dev.max((fd - exact).norm() / exact.norm());
    }
    ok &= fd_dev < 1e-6;
    parts.push(format!("{} dchi/dw relative deviation {fd_dev:.1e}", pf(fd_dev < 1e-6)));

    let mut wl_dev = 0.0f64;
    for h in [hull("one", &[(1.0, 0.25)]), fig5()] {
        for eps in [0.3, 0.2, 0.15] {
            let sol = solve_simplified(&h, eps, 40.0, 1e-12).map_err(e)?;
            let m = measure_waves(&sol).map_err(e)?;
            let lambda = 2.0 * PI * eps;
            wl_dev = wl_dev.max((m.wavelength - lambda).abs() / lambda);
        }
    }
    ok &= wl_dev < 0.02;
    parts.push(format!("{} wavelength deviation max {:.3}%", pf(wl_dev < 0.02), 100.0 * wl_dev));

    let cache = OmegaCache::new(1e-10);
    let mut verdicts = Vec::new();
    let mut dom_ok = true;
    for a1 in [0.55, 0.6, 0.7, 0.8, 0.9] {
        let h = HullSpec::rational("third", &[(a1, (1, 3)), (1.0 - a1, (1, 3))]).normalize().map_err(e)?;
        let r = dominance_analysis(&h, 0.2, &cache).map_err(e)?;
        dom_ok &= r.verdict == Verdict::CancellationImpossible(0, 1);
        verdicts.push(format!("{:?}", r.verdict));
    }
    ok &= dom_ok;
    parts.push(format!("{} two-corner sigma = 1/3 verdicts {}", pf(dom_ok), verdicts.join(",")));
    Ok((ok, parts.join("; ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("formula exactness", criterion_1),
        ("residue vs quadrature", criterion_2),
        ("Stokes census", criterion_3),
        ("Omega pipeline", criterion_4),
        ("exponential-smallness law", criterion_5),
        ("corner sweep dip", criterion_6),
        ("full-model agreement", criterion_7),
        ("property suite", criterion_8),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        let (pass, detail) = match outcome {
            Ok(v) => v,
            Err(msg) => (false, format!("error: {msg}")),
        };
        if !pass {
            failures += 1;
        }
        println!("criterion {}: {} {name} [{secs:.1}s] {detail}", i + 1, pf(pass));
    }
    println!("acceptance: {} of 8 criteria pass", 8 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
