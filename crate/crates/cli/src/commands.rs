use crate::config::{load_config, HullConfig};
use crate::output::{line_chart, num, opt, Artifacts, Series, Table};
use crate::{CliError, SweepCornerArgs};
use shipwave::bie::{amplitude_of, interpolate_theta, solve_full as bie_solve, CollocationGrid, NewtonOptions};
use shipwave::lateorder::omega;
use shipwave::measure::measure_waves;
use shipwave::sim::{default_phi_max, solve_simplified as sim_solve};
use shipwave::solution::{FreeSurfaceSolution, Profile, SolveMeta};
use shipwave::stokes::{active_corners, ActiveSet, CornerStatus, Termination, TraceOptions};
use shipwave::sweep::{sweep_corner as core_sweep_corner, sweep_epsilon as core_sweep_epsilon, SweepOptions, SweepPoint};
use shipwave::wave::{dominance_analysis, downstream_amplitude, Model};
use shipwave::{Error, Hull, OmegaCache};
use std::path::{Path, PathBuf};

pub struct Context {
    pub out: PathBuf,
    pub svg: bool,
    pub command_line: String,
}

impl Context {
    pub fn artifacts(&self) -> Artifacts {
        Artifacts::new(&self.out, &self.command_line)
    }
}

pub const OMEGA_TOL: f64 = 1e-10;

fn eps_of(cfg: &HullConfig, flag: Option<f64>) -> Result<f64, CliError> {
    let eps = flag.or(cfg.epsilon).ok_or_else(|| CliError::Usage("eps missing: pass --eps or set epsilon in the hull file".into()))?;
    if !(eps > 0.0) {
        return Err(Error::InvalidEpsilon(eps).into());
    }
    Ok(eps)
}

fn termination(t: &Termination<f64>) -> (String, String) {
    match *t {
        Termination::FreeSurfaceHit(x) => ("free_surface".into(), num(x)),
        Termination::HullHit(x) => ("hull".into(), num(x)),
        Termination::Escaped(r) => ("escaped".into(), num(r)),
        Termination::HitSingularity(k) => ("singularity".into(), (k + 1).to_string()),
        Termination::StepLimit => ("step_limit".into(), String::new()),
    }
}

fn status(s: &CornerStatus<f64>) -> (String, String) {
    match s {
        CornerStatus::Active { phi_hit } => ("active".into(), num(*phi_hit)),
        CornerStatus::Inactive => ("inactive".into(), String::new()),
        CornerStatus::NoSingulant => ("no_singulant".into(), String::new()),
        CornerStatus::Undetermined(why) => (format!("undetermined: {why}"), String::new()),
    }
}

/// Corner label: 1-based, with the stagnation point called `stagnation`.
pub fn corner_label(hull: &Hull<f64>, k: usize) -> String {
    if k == hull.corners() {
        "stagnation".into()
    } else {
        (k + 1).to_string()
    }
}

pub struct TraceTables {
    pub traces: Table,
    pub summary: Table,
}

pub fn trace_tables(hull: &Hull<f64>, set: &ActiveSet<f64>) -> TraceTables {
    let mut traces = Table::new(&["corner", "trace", "nu", "point", "re_w", "im_w", "re_chi", "im_chi"]);
    let mut summary = Table::new(&["corner", "sigma", "status", "phi_hit", "traces", "terminations"]);
    for c in &set.corners {
        let label = corner_label(hull, c.corner);
        let mut terms = Vec::new();
        for (j, t) in c.traces.iter().enumerate() {
            for (i, (w, x)) in t.points.iter().zip(&t.chi_along).enumerate() {
                traces.push(vec![label.clone(), j.to_string(), num(t.emergence_angle), i.to_string(), num(w.re), num(w.im), num(x.re), num(x.im)]);
            }
            let (kind, at) = termination(&t.termination);
            terms.push(if at.is_empty() { kind } else { format!("{kind}@{at}") } + if t.grazing { "(grazing)" } else { "" });
        }
        let (st, hit) = status(&c.status);
        summary.push(vec![label, num(hull.sigma()[c.corner]), st, hit, c.traces.len().to_string(), terms.join(" ")]);
    }
    TraceTables { traces, summary }
}

pub fn trace_stokes(ctx: &Context, path: &Path) -> Result<(), CliError> {
    let cfg = load_config(path)?;
    let set = active_corners(&cfg.hull, &TraceOptions::default())?;
    let t = trace_tables(&cfg.hull, &set);
    let mut art = ctx.artifacts();
    art.input(path)?;
    art.param("hull", &cfg.label);
    art.table("stokes_traces.csv", &t.traces)?;
    art.table("stokes_summary.csv", &t.summary)?;
    art.finish()?;
    print!("{}", t.summary.to_text());
    println!("active corners: {}", set.members().len());
    Ok(())
}

pub fn predict(ctx: &Context, path: &Path, eps: Option<f64>, model: Model, dominance: bool) -> Result<(), CliError> {
    let cfg = load_config(path)?;
    let eps = eps_of(&cfg, eps)?;
    let cache = OmegaCache::new(OMEGA_TOL);
    let set = active_corners(&cfg.hull, &TraceOptions::default())?;
    let d = downstream_amplitude(&cfg.hull, &set, eps, model, &cache)?;
    let mut t = Table::new(&["corner", "amplitude", "phase"]);
    for c in &d.components {
        t.push(vec![corner_label(&cfg.hull, c.corner), num(c.amplitude), num(c.phase)]);
    }
    t.push(vec!["total".into(), num(d.amplitude), String::new()]);
    let mut art = ctx.artifacts();
    art.input(path)?;
    art.param("hull", &cfg.label);
    art.param("eps", num(eps));
    art.param("model", format!("{model:?}").to_lowercase());
    art.param("omega_tol", num(OMEGA_TOL));
    art.table("prediction.csv", &t)?;
    print!("{}", t.to_text());
    if dominance {
        let r = dominance_analysis(&cfg.hull, eps, &cache)?;
        let mut dt = Table::new(&["corner", "im_integral", "gamma", "log_prefactor"]);
        for c in &r.corners {
            dt.push(vec![corner_label(&cfg.hull, c.corner), opt(c.im_integral), opt(c.gamma), opt(c.log_prefactor)]);
        }
        art.table("dominance.csv", &dt)?;
        print!("{}", dt.to_text());
        let verdict = format!("{:?}", r.verdict);
        println!("verdict: {verdict} (from {})", if r.from_angles { "angle conditions" } else { "exponents" });
        art.param("verdict", verdict);
    }
    art.finish()?;
    Ok(())
}

pub fn omega_table(ctx: &Context, lo: f64, hi: f64, step: f64, tol: f64) -> Result<(), CliError> {
    if !(step > 0.0) || !(hi >= lo) || !(tol > 0.0) {
        return Err(CliError::Usage("need step > 0, sigma-max >= sigma-min and tol > 0".into()));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let mut t = Table::new(&["sigma", "gamma", "omega", "n_used", "error_estimate"]);
    for i in 0..n {
        // decimal grid values without accumulated round-off
        let s: f64 = format!("{:.12}", lo + step * i as f64).parse().unwrap_or(f64::NAN);
        let d = omega(s, tol)?;
        t.push(vec![num(s), num(d.gamma), num(d.omega), d.n_used.to_string(), num(d.omega_error_est)]);
    }
    let mut art = ctx.artifacts();
    art.param("tol", num(tol));
    art.table("omega.csv", &t)?;
    art.finish()?;
    print!("{}", t.to_text());
    Ok(())
}

fn simplified_profile(sol: &FreeSurfaceSolution<f64>) -> Table {
    let mut t = Table::new(&["phi", "q", "re_u", "im_u"]);
    if let Profile::Simplified { u } = &sol.profile {
        for ((p, q), z) in sol.phi.iter().zip(sol.speed()).zip(u) {
            t.push(vec![num(*p), num(q), num(z.re), num(z.im)]);
        }
    }
    t
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn solve_simplified(
    ctx: &Context,
    path: &Path,
    eps: Option<f64>,
    phi_max: Option<f64>,
    tol: f64,
    dump: Option<&Path>,
) -> Result<(), CliError> {
    let cfg = load_config(path)?;
    let eps = eps_of(&cfg, eps)?;
    let phi_max = match phi_max {
        Some(p) => p,
        None => default_phi_max(eps, active_corners(&cfg.hull, &TraceOptions::default())?.last_hit()),
    };
    let sol = sim_solve(&cfg.hull, eps, phi_max, tol)?;
    if let Some(p) = dump {
        write_file(p, &simplified_profile(&sol).to_csv()?)?;
    }
    let mut art = ctx.artifacts();
    art.input(path)?;
    art.param("hull", &cfg.label);
    art.param("eps", num(eps));
    art.param("phi_max", num(phi_max));
    art.param("tol", num(tol));
    let m = measure_waves(&sol);
    let mut t = Table::new(&["eps", "amplitude", "wavelength", "phase", "fit_residual", "window_lo", "window_hi", "ode_residual"]);
    match &m {
        Ok(m) => t.push(vec![
            num(eps),
            num(m.amplitude),
            num(m.wavelength),
            num(m.phase),
            num(m.fit_residual),
            num(m.window.0),
            num(m.window.1),
            num(sol.meta.residual),
        ]),
        Err(e) => art.param("measurement", e),
    }
    art.table("measurement.csv", &t)?;
    art.finish()?;
    print!("{}", t.to_text());
    m.map(|_| ()).map_err(CliError::from)
}

fn read_profile(path: &Path, eps: f64) -> Result<FreeSurfaceSolution<f64>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let headers = r.headers().map_err(|e| CliError::Usage(e.to_string()))?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| CliError::Usage(format!("{}: missing column {name}", path.display())))
    };
    let (ip, iq, it) = (col("phi")?, col("q")?, col("theta")?);
    let (mut phi, mut q, mut theta) = (Vec::new(), Vec::new(), Vec::new());
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Usage(e.to_string()))?;
        let get = |i: usize| -> Result<f64, CliError> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| CliError::Usage(format!("{}:{}: unreadable number", path.display(), line + 2)))
        };
        phi.push(get(ip)?);
        q.push(get(iq)?);
        theta.push(get(it)?);
    }
    Ok(FreeSurfaceSolution {
        phi,
        profile: Profile::Full { q, theta },
        eps,
        meta: SolveMeta { solver: "profile-file", tol: 0.0, residual: 0.0, iterations: 0, evaluations: 0, delta: 0.0 },
    })
}

#[allow(clippy::too_many_arguments)]
pub fn solve_full(
    ctx: &Context,
    path: &Path,
    eps: Option<f64>,
    n: usize,
    dphi: f64,
    newton_tol: f64,
    seed: Option<&Path>,
    dump: Option<&Path>,
) -> Result<(), CliError> {
    let cfg = load_config(path)?;
    let eps = eps_of(&cfg, eps)?;
    if n == 0 || !(dphi > 0.0) || !(newton_tol > 0.0) {
        return Err(CliError::Usage("need n > 0, dphi > 0 and newton-tol > 0".into()));
    }
    let grid = CollocationGrid::graded(n, dphi);
    let initial = match seed {
        Some(p) => Some(interpolate_theta(&read_profile(p, eps)?, &grid.nodes)?),
        None => None,
    };
    let newton = NewtonOptions { tol: newton_tol, ..NewtonOptions::default() };
    let sol = bie_solve(&cfg.hull, eps, &grid, &newton, initial.as_deref())?;
    let Profile::Full { q, theta } = &sol.profile else { unreachable!("full solver returns a full profile") };
    if let Some(p) = dump {
        let mut t = Table::new(&["phi", "q", "theta"]);
        for i in 0..sol.phi.len() {
            t.push(vec![num(sol.phi[i]), num(q[i]), num(theta[i])]);
        }
        write_file(p, &t.to_csv()?)?;
    }
    let mut art = ctx.artifacts();
    art.input(path)?;
    art.param("hull", &cfg.label);
    if let Some(p) = seed {
        art.input(p)?;
    }
    art.param("eps", num(eps));
    art.param("n", n);
    art.param("dphi", num(dphi));
    art.param("newton_tol", num(newton_tol));
    art.param("nodes", grid.nodes.len());
    art.param("newton_iterations", sol.meta.iterations);
    let last_hit = active_corners(&cfg.hull, &TraceOptions::default())?.last_hit().unwrap_or(0.0);
    if !grid.covers(eps, last_hit) {
        art.param("warning", "grid ends within ten wavelengths of the last Stokes-line hit");
    }
    let m = amplitude_of(&sol);
    let mut t = Table::new(&["eps", "amplitude", "wavelength", "fit_residual", "newton_residual", "iterations"]);
    match &m {
        Ok(m) => t.push(vec![
            num(eps),
            num(m.amplitude),
            num(m.wavelength),
            num(m.fit_residual),
            num(sol.meta.residual),
            sol.meta.iterations.to_string(),
        ]),
        Err(e) => art.param("measurement", e),
    }
    art.table("full_measurement.csv", &t)?;
    art.finish()?;
    print!("{}", t.to_text());
    m.map(|_| ()).map_err(CliError::from)
}

pub fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0) || !(hi >= lo) {
        return Err(CliError::Usage("need step > 0 and max >= min".into()));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| format!("{:.12}", lo + step * i as f64).parse().unwrap_or(f64::NAN)).collect())
}

pub fn corner_table(points: &[SweepPoint<f64>]) -> Table {
    let mut t = Table::new(&["a1", "num_amp", "asym_amp", "merged_amp", "wavelength", "flags"]);
    for p in points {
        t.push(vec![
            num(p.param),
            opt(p.numerical_amplitude()),
            opt(p.asymptotic),
            opt(p.merged),
            opt(p.numerical.as_ref().map(|m| m.wavelength)),
            p.flags.join("; "),
        ]);
    }
    t
}

pub fn corner_chart(points: &[SweepPoint<f64>], eps: f64) -> String {
    let pick = |f: &dyn Fn(&SweepPoint<f64>) -> Option<f64>| points.iter().filter_map(|p| f(p).map(|v| (p.param, v))).collect();
    line_chart(
        &format!("downstream amplitude, eps = {eps}"),
        "a1",
        "amplitude",
        &[
            Series { label: "numerical".into(), points: pick(&|p| p.numerical_amplitude()) },
            Series { label: "asymptotic".into(), points: pick(&|p| p.asymptotic) },
            Series { label: "merged".into(), points: pick(&|p| p.merged) },
        ],
        true,
    )
}

pub fn sweep_corner(ctx: &Context, a: &SweepCornerArgs) -> Result<(), CliError> {
    let g = grid(a.a1_min, a.a1_max, a.step)?;
    let opts = SweepOptions { phi_max: a.phi_max, tol: a.tol, ..SweepOptions::default() };
    let cache = OmegaCache::new(OMEGA_TOL);
    let pts = core_sweep_corner((a.sigma1, a.sigma2), &g, a.eps, &opts, &cache)?;
    let t = corner_table(&pts);
    let mut art = ctx.artifacts();
    art.param("sigma", format!("{},{}", num(a.sigma1), num(a.sigma2)));
    art.param("eps", num(a.eps));
    art.param("tol", num(a.tol));
    art.table("sweep_corner.csv", &t)?;
    if ctx.svg {
        art.write("sweep_corner.svg", corner_chart(&pts, a.eps).as_bytes())?;
    }
    art.finish()?;
    print!("{}", t.to_text());
    Ok(())
}

pub fn sweep_epsilon(ctx: &Context, path: &Path, eps: &[f64], phi_max: Option<f64>, tol: f64) -> Result<(), CliError> {
    let cfg = load_config(path)?;
    if let Some(&bad) = eps.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::InvalidEpsilon(bad).into());
    }
    let opts = SweepOptions { phi_max, tol, ..SweepOptions::default() };
    let cache = OmegaCache::new(OMEGA_TOL);
    let s = core_sweep_epsilon(&cfg.hull, eps, &opts, &cache)?;
    let mut t = Table::new(&["eps", "num_amp", "asym_amp", "wavelength", "flags"]);
    for p in &s.points {
        t.push(vec![
            num(p.eps),
            opt(p.numerical_amplitude()),
            opt(p.asymptotic),
            opt(p.numerical.as_ref().map(|m| m.wavelength)),
            p.flags.join("; "),
        ]);
    }
    let mut f = Table::new(&["slope", "expected_slope", "relative_error", "intercept", "gamma", "points"]);
    if let Some(fit) = &s.fit {
        f.push(vec![
            num(fit.slope),
            num(fit.expected_slope),
            num(fit.relative_error()),
            num(fit.intercept),
            num(fit.gamma),
            fit.points.to_string(),
        ]);
    }
    let mut art = ctx.artifacts();
    art.input(path)?;
    art.param("hull", &cfg.label);
    art.param("tol", num(tol));
    art.table("sweep_epsilon.csv", &t)?;
    art.table("exponent_fit.csv", &f)?;
    if ctx.svg {
        let pts = |g: &dyn Fn(&SweepPoint<f64>) -> Option<f64>| s.points.iter().filter_map(|p| g(p).map(|v| (1.0 / p.eps, v))).collect();
        let chart = line_chart(
            "amplitude against 1/eps",
            "1/eps",
            "amplitude",
            &[
                Series { label: "numerical".into(), points: pts(&|p| p.numerical_amplitude()) },
                Series { label: "asymptotic".into(), points: pts(&|p| p.asymptotic) },
            ],
            true,
        );
        art.write("sweep_epsilon.svg", chart.as_bytes())?;
    }
    art.finish()?;
    print!("{}", t.to_text());
    print!("{}", f.to_text());
    Ok(())
}
