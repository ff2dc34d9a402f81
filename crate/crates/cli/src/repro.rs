//! Canned reproduction recipes.

use crate::commands::{corner_chart, corner_table, trace_tables, Context, OMEGA_TOL};
use crate::output::{num, opt, Table};
use crate::{CliError, Figure};
use rayon::prelude::*;
use shipwave::bie::{amplitude_full, CollocationGrid};
use shipwave::stokes::{active_corners, TraceOptions};
use shipwave::sweep::{sweep_corner, SweepOptions};
use shipwave::wave::{downstream_amplitude, Model};
use shipwave::{Error, Hull, HullSpec, OmegaCache};

pub fn run(ctx: &Context, figure: Figure) -> Result<(), CliError> {
    match figure {
        Figure::Fig3 => stokes_census(ctx),
        Figure::Fig4 => full_model(ctx),
        Figure::Fig5 => corner_sweep(ctx),
    }
}

/// One-corner hull, a three-corner step and a nine-step staircase.
pub fn census_hulls() -> Result<Vec<Hull<f64>>, Error> {
    let stair: Vec<(f64, (i64, i64))> = (1..=9).map(|k| ((10 - k) as f64, if k % 2 == 1 { (1, 2) } else { (-1, 2) })).collect();
    Ok(vec![
        HullSpec::rational("one-corner", &[(1.0, (1, 2))]).normalize()?,
        HullSpec::rational("step3", &[(0.5, (-1, 2)), (0.3, (1, 2)), (0.2, (1, 2))]).normalize()?,
        HullSpec::rational("staircase", &stair).normalize()?,
    ])
}

fn stokes_census(ctx: &Context) -> Result<(), CliError> {
    let mut art = ctx.artifacts();
    let mut summary = Table::new(&["hull", "corners", "active", "active_count", "undetermined"]);
    for h in census_hulls()? {
        let set = active_corners(&h, &TraceOptions::default())?;
        let t = trace_tables(&h, &set);
        art.table(&format!("fig3_{}_traces.csv", h.label()), &t.traces)?;
        art.table(&format!("fig3_{}_corners.csv", h.label()), &t.summary)?;
        let list = |v: Vec<usize>| v.iter().map(|k| (k + 1).to_string()).collect::<Vec<_>>().join(" ");
        summary.push(vec![
            h.label().into(),
            h.corners().to_string(),
            list(set.members()),
            set.members().len().to_string(),
            list(set.undetermined()),
        ]);
    }
    art.table("fig3_summary.csv", &summary)?;
    art.finish()?;
    print!("{}", summary.to_text());
    Ok(())
}

pub const FIG4_INCLINATIONS: [(f64, f64); 3] = [(0.5, 0.125), (0.25, 0.25), (0.125, 0.5)];
pub const FIG4_EPS: [f64; 3] = [2.0 / 3.0, 0.5, 0.4];
pub const FIG4_N: usize = 1500;
pub const FIG4_DPHI: f64 = 0.015;

fn full_model(ctx: &Context) -> Result<(), CliError> {
    let cache = OmegaCache::new(OMEGA_TOL);
    let mut jobs = Vec::new();
    for &(s1, s2) in &FIG4_INCLINATIONS {
        let h = HullSpec::new(format!("[{s1},{s2}]"), &[(0.8, s1), (0.2, s2)]).normalize()?;
        for &eps in &FIG4_EPS {
            jobs.push((h.clone(), eps));
        }
    }
    let rows: Vec<Result<Vec<String>, Error>> = jobs
        .par_iter()
        .map(|(h, eps)| {
            let eps = *eps;
            let active = active_corners(h, &TraceOptions::default())?;
            let pred = downstream_amplitude(h, &active, eps, Model::Full, &cache)?.amplitude;
            let (meas, flag) = match amplitude_full(h, eps, &CollocationGrid::graded(FIG4_N, FIG4_DPHI)) {
                Ok(m) => (Some(m.amplitude), String::new()),
                Err(e) if e.class() != shipwave::ErrorClass::Input => (None, e.to_string()),
                Err(e) => return Err(e),
            };
            Ok(vec![h.label().into(), num(eps), opt(meas), num(pred), opt(meas.map(|m| (m - pred).abs() / pred)), flag])
        })
        .collect();
    let mut t = Table::new(&["inclinations", "eps", "num_amp", "asym_amp", "relative_error", "flags"]);
    for r in rows {
        t.push(r?);
    }
    let mut art = ctx.artifacts();
    art.param("a", "0.8,0.2");
    art.param("n", FIG4_N);
    art.param("dphi", num(FIG4_DPHI));
    art.table("fig4_full_model.csv", &t)?;
    art.finish()?;
    print!("{}", t.to_text());
    Ok(())
}

pub const FIG5_EPS: f64 = 0.15;

fn corner_sweep(ctx: &Context) -> Result<(), CliError> {
    let grid: Vec<f64> = (0..25).map(|i| format!("{:.2}", 0.51 + 0.02 * i as f64).parse().unwrap_or(f64::NAN)).collect();
    let cache = OmegaCache::new(OMEGA_TOL);
    let pts = sweep_corner((0.25, 0.25), &grid, FIG5_EPS, &SweepOptions::default(), &cache)?;
    let argmin = |f: &dyn Fn(&shipwave::sweep::SweepPoint<f64>) -> Option<f64>| {
        pts.iter().filter_map(|p| f(p).map(|v| (p.param, v))).min_by(|a, b| a.1.total_cmp(&b.1))
    };
    let mut s = Table::new(&["series", "a1_at_minimum", "minimum"]);
    for (label, m) in [("numerical", argmin(&|p| p.numerical_amplitude())), ("asymptotic", argmin(&|p| p.asymptotic))] {
        s.push(vec![label.into(), opt(m.map(|m| m.0)), opt(m.map(|m| m.1))]);
    }
    let mut art = ctx.artifacts();
    art.param("sigma", "1/4,1/4");
    art.param("eps", num(FIG5_EPS));
    art.table("fig5_sweep.csv", &corner_table(&pts))?;
    art.table("fig5_minimum.csv", &s)?;
    art.write("fig5_sweep.svg", corner_chart(&pts, FIG5_EPS).as_bytes())?;
    art.finish()?;
    print!("{}", corner_table(&pts).to_text());
    print!("{}", s.to_text());
    Ok(())
}
