//! Collocation solver for the full free-surface problem: the boundary
//! integral `log q = log q0 + H theta` coupled with the integrated Bernoulli
//! condition `q^3 = -(3/eps) int_0^phi sin theta`.
//!
//! `theta` is piecewise linear between nodes and follows the first-order
//! inclination `eps theta_1` beyond the grid. The principal-value integral is
//! evaluated exactly for the interpolant and collocated at interval midpoints.

use crate::error::{Error, Result};
use crate::hull::Hull;
use crate::hilbert::theta1;
use crate::measure::{measure_series, MeasureOptions, WaveMeasurement};
use crate::quad::{integrate, QuadOptions};
use crate::scalar::{lit, to_f64, Cx, Real};
use crate::solution::{FreeSurfaceSolution, Profile, SolveMeta};
use rayon::prelude::*;

/// Smallest measurable wave amplitude of the full solver.
pub const AMPLITUDE_FLOOR: f64 = 1e-4;

/// First node of a graded grid.
pub const FIRST_NODE: f64 = 1e-10;
/// Largest ratio of spacing to distance from the stagnation point.
pub const GRADING: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct CollocationGrid<T> {
    /// Nominal node count; the domain length is `n * dphi`.
    pub n: usize,
    pub dphi: T,
    /// Node positions, starting at the stagnation point.
    pub nodes: Vec<T>,
}

impl<T: Real> CollocationGrid<T> {
    /// Stagnation point followed by midpoint nodes `(i - 1/2) dphi`.
    pub fn uniform(n: usize, dphi: T) -> Self {
        let mut nodes = Vec::with_capacity(n + 1);
        nodes.push(T::zero());
        nodes.extend((1..=n).map(|i| (lit::<T>(i as f64) - lit(0.5)) * dphi));
        CollocationGrid { n, dphi, nodes }
    }

    /// Spacing `min(dphi, GRADING * phi)` from a first node at
    /// [`FIRST_NODE`], geometric through the nonlinear layer at the
    /// stagnation point.
    pub fn graded(n: usize, dphi: T) -> Self {
        let len = lit::<T>(n as f64) * dphi;
        let first: T = lit::<T>(FIRST_NODE).min(dphi);
        let g: T = lit(GRADING);
        let mut nodes = vec![T::zero(), first];
        while *nodes.last().unwrap() < len {
            let p = *nodes.last().unwrap();
            nodes.push((p + dphi.min(g * p)).min(len));
        }
        CollocationGrid { n, dphi, nodes }
    }

    pub fn length(&self) -> T {
        *self.nodes.last().unwrap_or(&T::zero())
    }

    /// Fails when a wavelength `2 pi eps` holds fewer than ten nodes.
    pub fn check_resolution(&self, eps: T) -> Result<()> {
        let per_wave = T::TAU() * eps / self.dphi;
        if per_wave < lit(10.0) {
            return Err(Error::GridTooCoarse(format!(
                "{:.2} nodes per wavelength at dphi = {}",
                to_f64(per_wave),
                to_f64(self.dphi)
            )));
        }
        Ok(())
    }

    /// Whether the grid extends ten wavelengths past `last_hit`.
    pub fn covers(&self, eps: T, last_hit: T) -> bool {
        self.length() >= last_hit + lit::<T>(10.0) * T::TAU() * eps
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOptions<T> {
    pub tol: T,
    pub max_iter: usize,
    pub min_damping: T,
}

impl<T: Real> Default for NewtonOptions<T> {
    fn default() -> Self {
        NewtonOptions { tol: lit(1e-11), max_iter: 40, min_damping: lit(1e-4) }
    }
}

/// Row-major `(1/pi) PV int theta(phi') / (phi' - y_i) dphi'` weights for a
/// piecewise linear `theta` on nodes `x`, one row per point `y_i`; no `y_i`
/// may coincide with a node.
fn pv_weights<T: Real>(x: &[T], ys: &[T]) -> Vec<T> {
    let n = x.len();
    let mut w = vec![T::zero(); ys.len() * n];
    w.par_chunks_mut(n).zip(ys.par_iter()).for_each(|(row, &y)| {
        for c in 0..n - 1 {
            let (p, r) = (x[c], x[c + 1]);
            let d = r - p;
            let l = (r - y).abs().ln() - (p - y).abs().ln();
            row[c] = row[c] + ((r - y) * l - d) / d;
            row[c + 1] = row[c + 1] + (d + (y - p) * l) / d;
        }
        for v in row.iter_mut() {
            *v = *v / T::PI();
        }
    });
    w
}

/// `(1/pi) int_L^inf eps theta_1(phi) / (phi - y) dphi` at each `y < L`.
fn tail_forcing<T: Real>(hull: &Hull<T>, eps: T, l: T, ys: &[T]) -> Result<Vec<T>> {
    let opts = QuadOptions::with_tol(lit(1e-14), lit(1e-10));
    let th = |p: T| theta1(hull, Cx::new(p, T::zero())).map(|v| v.re).unwrap_or(T::zero());
    let tl = th(l);
    let l2 = l + l;
    ys.par_iter()
        .map(|&y| {
            let near = integrate(|p: T| Cx::new((th(p) - tl) / (p - y), T::zero()), l, l2, &opts)?;
            let far = integrate(
                |t: T| {
                    let p = l2 / t;
                    Cx::new(th(p) / (p - y) * l2 / (t * t), T::zero())
                },
                T::zero(),
                T::one(),
                &opts,
            )?;
            Ok(eps * (near.value.re + far.value.re + tl * ((l2 - y) / (l - y)).ln()) / T::PI())
        })
        .collect()
}

/// Equations at the interval midpoints, unknowns `theta` at every node but
/// the first.
struct System<'a, T> {
    x: &'a [T],
    w: Vec<T>,
    log_q0: Vec<T>,
    tail: Vec<T>,
    eps: T,
}

impl<T: Real> System<'_, T> {
    /// Cumulative trapezoid of `sin theta` at the nodes.
    fn integral(&self, th: &[T]) -> Vec<T> {
        let mut s = vec![T::zero(); th.len()];
        for i in 1..th.len() {
            s[i] = s[i - 1] + (self.x[i] - self.x[i - 1]) * (th[i].sin() + th[i - 1].sin()) / lit(2.0);
        }
        s
    }

    /// Midpoint residuals, midpoint `q^3` and node `q^3`; `None` when
    /// `q^3 <= 0` anywhere past the stagnation point.
    fn residual(&self, th: &[T]) -> Option<(Vec<T>, Vec<T>, Vec<T>)> {
        let n = th.len();
        let s = self.integral(th);
        let k: T = -lit::<T>(3.0) / self.eps;
        let q3: Vec<T> = s.iter().map(|&v| k * v).collect();
        let qm: Vec<T> = (0..n - 1).map(|i| (q3[i] + q3[i + 1]) / lit(2.0)).collect();
        if q3[1..].iter().chain(&qm).any(|&v| !(v > T::zero())) {
            return None;
        }
        let r = (0..n - 1)
            .map(|i| {
                let wth = (0..n).fold(T::zero(), |acc, j| acc + self.w[i * n + j] * th[j]);
                qm[i].ln() / lit(3.0) - self.log_q0[i] - wth - self.tail[i]
            })
            .collect();
        Some((r, qm, q3))
    }

    /// Trapezoid weight of node `j` in `int_0^{x_k}`.
    fn trap(&self, k: usize, j: usize) -> T {
        let half: T = lit(0.5);
        if j > k || k == 0 {
            T::zero()
        } else if j == k {
            half * (self.x[k] - self.x[k - 1])
        } else if j == 0 {
            half * (self.x[1] - self.x[0])
        } else {
            half * (self.x[j + 1] - self.x[j - 1])
        }
    }

    fn jacobian(&self, th: &[T], qm: &[T]) -> Vec<T> {
        let n = th.len();
        let m = n - 1;
        let half: T = lit(0.5);
        let cs: Vec<T> = th.iter().map(|t| t.cos()).collect();
        let mut jac = vec![T::zero(); m * m];
        jac.par_chunks_mut(m).enumerate().for_each(|(i, row)| {
            let f = -T::one() / (self.eps * qm[i]);
            for (c, v) in row.iter_mut().enumerate() {
                let j = c + 1;
                let t = half * (self.trap(i, j) + self.trap(i + 1, j));
                *v = f * t * cs[j] - self.w[i * n + j];
            }
        });
        jac
    }
}

fn norm2<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, &x| a + x * x).sqrt()
}

fn norm_inf<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, &x| a.max(x.abs()))
}

/// First-order inclination `eps theta_1` on the grid.
pub fn linear_guess<T: Real>(hull: &Hull<T>, eps: T, x: &[T]) -> Vec<T> {
    let n = x.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                return T::zero();
            }
            let q = hull.q0_real(x[i]);
            let h = T::FRAC_PI_2();
            (-eps * q * q * q * hull.dlog_q0_real(x[i])).max(-h).min(h)
        })
        .collect()
}

/// Linear interpolation of a previous solution's `theta` onto `x`.
pub fn interpolate_theta<T: Real>(sol: &FreeSurfaceSolution<T>, x: &[T]) -> Result<Vec<T>> {
    let th = match &sol.profile {
        Profile::Full { theta, .. } => theta,
        Profile::Simplified { .. } => return Err(Error::Unsupported("seed must be a full-model solution".into())),
    };
    let p = &sol.phi;
    let n = x.len();
    Ok((0..n)
        .map(|i| {
            if i == 0 {
                return T::zero();
            }
            let v = x[i];
            match p.iter().position(|&q| q >= v) {
                Some(0) => th[0],
                Some(k) => th[k - 1] + (th[k] - th[k - 1]) * (v - p[k - 1]) / (p[k] - p[k - 1]),
                None => th[th.len() - 1],
            }
        })
        .collect())
}

/// Solves the full problem on `grid` by damped Newton from `initial`.
/// The first-order inclination replaces a missing or infeasible seed.
pub fn solve_full<T: Real>(
    hull: &Hull<T>,
    eps: T,
    grid: &CollocationGrid<T>,
    newton: &NewtonOptions<T>,
    initial: Option<&[T]>,
) -> Result<FreeSurfaceSolution<T>> {
    if !(eps > T::zero()) {
        return Err(Error::InvalidEpsilon(to_f64(eps)));
    }
    grid.check_resolution(eps)?;
    let x = &grid.nodes;
    let n = x.len();
    if n < 4 || x[0] != T::zero() || x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::GridTooCoarse("nodes must start at 0 and increase".into()));
    }
    let half: T = lit(0.5);
    let mid: Vec<T> = x.windows(2).map(|w| half * (w[0] + w[1])).collect();
    let sys = System {
        x,
        w: pv_weights(x, &mid),
        log_q0: mid.iter().map(|&p| hull.q0_real(p).ln()).collect(),
        tail: tail_forcing(hull, eps, x[n - 1], &mid)?,
        eps,
    };
    let mut th = match initial {
        Some(v) if v.len() == n => v.to_vec(),
        Some(_) => return Err(Error::Unsupported("initial guess has the wrong length".into())),
        None => linear_guess(hull, eps, x),
    };
    th[0] = T::zero();
    let (mut r, mut qm, mut q3) = match sys.residual(&th) {
        Some(v) => v,
        // a seed with q^3 <= 0 somewhere cannot be evaluated
        None => {
            th = linear_guess(hull, eps, x);
            sys.residual(&th).ok_or(Error::NewtonStagnation(f64::INFINITY))?
        }
    };
    let m = n - 1;
    let mut iterations = 0;
    loop {
        let rn = norm_inf(&r);
        if rn < newton.tol {
            break;
        }
        if iterations >= newton.max_iter {
            return Err(Error::NewtonStagnation(to_f64(rn)));
        }
        iterations += 1;
        let jac = sys.jacobian(&th, &qm);
        let mut d: Vec<T> = r.iter().map(|&v| -v).collect();
        if !T::lu_solve(&jac, m, &mut d) {
            return Err(Error::NewtonStagnation(to_f64(rn)));
        }
        let base = norm2(&r);
        let mut lam = T::one();
        loop {
            if lam < newton.min_damping {
                return Err(Error::NewtonStagnation(to_f64(rn)));
            }
            let mut trial = th.clone();
            for i in 0..m {
                trial[i + 1] = trial[i + 1] + lam * d[i];
            }
            if let Some((r2, m2, q2)) = sys.residual(&trial) {
                if norm2(&r2) < (T::one() - lit::<T>(1e-4) * lam) * base {
                    th = trial;
                    r = r2;
                    qm = m2;
                    q3 = q2;
                    break;
                }
            }
            lam = lam / lit(2.0);
        }
    }
    let q: Vec<T> = q3.iter().map(|&v| v.max(T::zero()).cbrt()).collect();
    Ok(FreeSurfaceSolution {
        phi: x.clone(),
        profile: Profile::Full { q, theta: th },
        eps,
        meta: SolveMeta {
            solver: "full-collocation",
            tol: newton.tol,
            residual: norm_inf(&r),
            iterations,
            evaluations: iterations,
            delta: x[1],
        },
    })
}

/// Solves along a decreasing sequence of `eps`, seeding each solve with the
/// previous solution.
pub fn solve_full_continuation<T: Real>(
    hull: &Hull<T>,
    eps_path: &[T],
    grid_for: impl Fn(T) -> CollocationGrid<T>,
    newton: &NewtonOptions<T>,
) -> Result<Vec<FreeSurfaceSolution<T>>> {
    let mut out: Vec<FreeSurfaceSolution<T>> = Vec::with_capacity(eps_path.len());
    for &eps in eps_path {
        let grid = grid_for(eps);
        let seed = match out.last() {
            Some(prev) => Some(interpolate_theta(prev, &grid.nodes)?),
            None => None,
        };
        out.push(solve_full(hull, eps, &grid, newton, seed.as_deref())?);
    }
    Ok(out)
}

/// Measurement options for full-model profiles: the window stops short of
/// the truncated end of the grid and holds as many blocks as fit.
pub fn full_measure_options<T: Real>(eps: T, length: T) -> MeasureOptions<T> {
    let window = (lit::<T>(0.3), lit::<T>(0.95));
    let span = length * (window.1 - window.0);
    let blocks = (span / (lit::<T>(2.5) * T::TAU() * eps)).floor().to_usize().unwrap_or(1).clamp(1, 4);
    MeasureOptions { window, blocks, ..MeasureOptions::default() }
}

/// Downstream wave amplitude of the speed in a full-model solution, refused
/// below [`AMPLITUDE_FLOOR`].
pub fn amplitude_of<T: Real>(sol: &FreeSurfaceSolution<T>) -> Result<WaveMeasurement<T>> {
    let opts = full_measure_options(sol.eps, *sol.phi.last().unwrap_or(&T::zero()));
    let floor = lit::<T>(10.0) * sol.meta.tol;
    let m = measure_series(&sol.phi, &sol.speed(), sol.eps, floor, &opts)?;
    if m.amplitude < lit(AMPLITUDE_FLOOR) {
        return Err(Error::BelowFloor { amplitude: to_f64(m.amplitude), floor: AMPLITUDE_FLOOR });
    }
    Ok(m)
}

pub fn amplitude_full<T: Real>(hull: &Hull<T>, eps: T, grid: &CollocationGrid<T>) -> Result<WaveMeasurement<T>> {
    let sol = solve_full(hull, eps, grid, &NewtonOptions::default(), None)?;
    amplitude_of(&sol)
}
