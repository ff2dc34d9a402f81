//! Explicit Dormand-Prince 8(5,3) integrator with 7th-order dense output,
//! generic over the scalar type. Dense output also provides the derivative
//! of the interpolant, which the residual checks rely on.

mod tableau;

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};
use tableau::{A, B, C, D, E3, E5, INTERPOLATOR_POWER, N_STAGES, N_STAGES_EXTENDED};

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ERROR_EXPONENT: f64 = -1.0 / 8.0;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    pub max_step: T,
    pub first_step: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        OdeOptions { rtol: lit(1e-8), atol: lit(1e-10), max_step: T::infinity(), first_step: None, max_steps: 10_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub nfev: usize,
    pub accepted: usize,
    pub rejected: usize,
}

/// Interpolant over one accepted step.
#[derive(Debug, Clone)]
pub struct DenseStep<T> {
    pub t_old: T,
    pub t: T,
    pub y_old: Vec<T>,
    pub y: Vec<T>,
    coeffs: Vec<Vec<T>>,
}

impl<T: Real> DenseStep<T> {
    fn h(&self) -> T {
        self.t - self.t_old
    }

    /// Interpolated state at `t`.
    pub fn eval(&self, t: T, out: &mut [T]) {
        let x = (t - self.t_old) / self.h();
        for (j, o) in out.iter_mut().enumerate() {
            let mut y = T::zero();
            for (i, f) in self.coeffs.iter().rev().enumerate() {
                y = y + f[j];
                y = y * if i % 2 == 0 { x } else { T::one() - x };
            }
            *o = y + self.y_old[j];
        }
    }

    /// Time derivative of the interpolant at `t`.
    pub fn eval_derivative(&self, t: T, out: &mut [T]) {
        let h = self.h();
        let x = (t - self.t_old) / h;
        for (j, o) in out.iter_mut().enumerate() {
            let (mut y, mut dy) = (T::zero(), T::zero());
            for (i, f) in self.coeffs.iter().rev().enumerate() {
                y = y + f[j];
                let (m, dm) = if i % 2 == 0 { (x, T::one()) } else { (T::one() - x, -T::one()) };
                dy = dy * m + y * dm;
                y = y * m;
            }
            *o = dy / h;
        }
    }
}

struct Tableau<T> {
    a: Vec<Vec<T>>,
    c: Vec<T>,
    b: Vec<T>,
    e3: Vec<T>,
    e5: Vec<T>,
    d: Vec<Vec<T>>,
}

impl<T: Real> Tableau<T> {
    fn new() -> Self {
        let v = |s: &[f64]| s.iter().map(|&x| lit(x)).collect::<Vec<T>>();
        Tableau {
            a: A.iter().map(|r| v(r)).collect(),
            c: v(&C),
            b: v(&B),
            e3: v(&E3),
            e5: v(&E5),
            d: D.iter().map(|r| v(r)).collect(),
        }
    }
}

fn rms<T: Real>(x: impl Iterator<Item = T>, n: usize) -> T {
    (x.fold(T::zero(), |acc, v| acc + v * v) / lit(n as f64)).sqrt()
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end > t0`, calling `on_step`
/// with the dense output of every accepted step.
pub fn solve_ivp<T, F, S>(mut f: F, t0: T, y0: &[T], t_end: T, opts: &OdeOptions<T>, mut on_step: S) -> Result<OdeStats>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]),
    S: FnMut(&DenseStep<T>) -> Result<()>,
{
    if !(t_end > t0) {
        return Err(Error::Ode("integration interval must run forward".into()));
    }
    if !(opts.rtol > T::zero()) || !(opts.atol > T::zero()) {
        return Err(Error::Ode("tolerances must be positive".into()));
    }
    let n = y0.len();
    let tab = Tableau::<T>::new();
    let mut stats = OdeStats::default();
    let mut k = vec![vec![T::zero(); n]; N_STAGES_EXTENDED];
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut f0 = vec![T::zero(); n];
    f(t, &y, &mut f0);
    stats.nfev += 1;
    let mut h_abs = match opts.first_step {
        Some(h) => h,
        None => initial_step(&mut f, t0, &y, t_end, &f0, opts, &mut stats),
    };
    let mut tmp = vec![T::zero(); n];
    let mut y_new = vec![T::zero(); n];
    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Ode(format!("step limit reached at t = {}", to_f64(t))));
        }
        let min_step = lit::<T>(10.0) * T::epsilon() * t.abs().max(T::min_positive_value());
        h_abs = h_abs.min(opts.max_step).max(min_step);
        let mut rejected = false;
        loop {
            if h_abs < min_step {
                return Err(Error::Ode(format!("step size underflow at t = {}", to_f64(t))));
            }
            let mut t_new = t + h_abs;
            if t_new > t_end {
                t_new = t_end;
            }
            let h = t_new - t;
            h_abs = h;
            k[0].copy_from_slice(&f0);
            for s in 1..N_STAGES {
                for i in 0..n {
                    let mut acc = T::zero();
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc = acc + kj[i] * tab.a[s][j];
                    }
                    tmp[i] = y[i] + acc * h;
                }
                let (_, tail) = k.split_at_mut(s);
                f(t + tab.c[s] * h, &tmp, &mut tail[0]);
            }
            for i in 0..n {
                let mut acc = T::zero();
                for s in 0..N_STAGES {
                    acc = acc + k[s][i] * tab.b[s];
                }
                y_new[i] = y[i] + acc * h;
            }
            {
                let (_, tail) = k.split_at_mut(N_STAGES);
                f(t + h, &y_new, &mut tail[0]);
            }
            stats.nfev += N_STAGES;
            if y_new.iter().any(|v| !v.is_finite()) {
                return Err(Error::Ode(format!("non-finite state near t = {}", to_f64(t))));
            }
            let err = error_norm(&k, &y, &y_new, h, opts, &tab);
            if err < T::one() {
                let factor = if err == T::zero() {
                    lit(MAX_FACTOR)
                } else {
                    lit::<T>(MAX_FACTOR).min(lit::<T>(SAFETY) * err.powf(lit(ERROR_EXPONENT)))
                };
                let factor = if rejected { factor.min(T::one()) } else { factor };
                let dense = dense_output(&mut f, &mut k, t, h, &y, &y_new, &tab, &mut stats);
                on_step(&dense)?;
                stats.accepted += 1;
                t = t_new;
                y.copy_from_slice(&y_new);
                f0.copy_from_slice(&k[N_STAGES]);
                h_abs = h_abs * factor;
                break;
            }
            h_abs = h_abs * lit::<T>(MIN_FACTOR).max(lit::<T>(SAFETY) * err.powf(lit(ERROR_EXPONENT)));
            rejected = true;
            stats.rejected += 1;
        }
    }
    Ok(stats)
}

fn error_norm<T: Real>(k: &[Vec<T>], y: &[T], y_new: &[T], h: T, opts: &OdeOptions<T>, tab: &Tableau<T>) -> T {
    let n = y.len();
    let (mut e5, mut e3) = (T::zero(), T::zero());
    for i in 0..n {
        let scale = opts.atol + y[i].abs().max(y_new[i].abs()) * opts.rtol;
        let (mut a5, mut a3) = (T::zero(), T::zero());
        for s in 0..=N_STAGES {
            a5 = a5 + k[s][i] * tab.e5[s];
            a3 = a3 + k[s][i] * tab.e3[s];
        }
        e5 = e5 + (a5 / scale) * (a5 / scale);
        e3 = e3 + (a3 / scale) * (a3 / scale);
    }
    if e5 == T::zero() && e3 == T::zero() {
        return T::zero();
    }
    let denom = e5 + lit::<T>(0.01) * e3;
    h.abs() * e5 / (denom * lit(n as f64)).sqrt()
}

#[allow(clippy::too_many_arguments)]
fn dense_output<T: Real, F: FnMut(T, &[T], &mut [T])>(
    f: &mut F,
    k: &mut [Vec<T>],
    t: T,
    h: T,
    y: &[T],
    y_new: &[T],
    tab: &Tableau<T>,
    stats: &mut OdeStats,
) -> DenseStep<T> {
    let n = y.len();
    let mut tmp = vec![T::zero(); n];
    for s in N_STAGES + 1..N_STAGES_EXTENDED {
        for i in 0..n {
            let mut acc = T::zero();
            for j in 0..s {
                acc = acc + k[j][i] * tab.a[s][j];
            }
            tmp[i] = y[i] + acc * h;
        }
        let (_, tail) = k.split_at_mut(s);
        f(t + tab.c[s] * h, &tmp, &mut tail[0]);
        stats.nfev += 1;
    }
    let mut coeffs = vec![vec![T::zero(); n]; INTERPOLATOR_POWER];
    for i in 0..n {
        let dy = y_new[i] - y[i];
        coeffs[0][i] = dy;
        coeffs[1][i] = h * k[0][i] - dy;
        coeffs[2][i] = dy + dy - h * (k[N_STAGES][i] + k[0][i]);
        for (r, drow) in tab.d.iter().enumerate() {
            let mut acc = T::zero();
            for s in 0..N_STAGES_EXTENDED {
                acc = acc + drow[s] * k[s][i];
            }
            coeffs[3 + r][i] = h * acc;
        }
    }
    DenseStep { t_old: t, t: t + h, y_old: y.to_vec(), y: y_new.to_vec(), coeffs }
}

fn initial_step<T: Real, F: FnMut(T, &[T], &mut [T])>(
    f: &mut F,
    t0: T,
    y0: &[T],
    t_end: T,
    f0: &[T],
    opts: &OdeOptions<T>,
    stats: &mut OdeStats,
) -> T {
    let n = y0.len();
    if n == 0 {
        return t_end - t0;
    }
    let scale: Vec<T> = y0.iter().map(|v| opts.atol + v.abs() * opts.rtol).collect();
    let d0 = rms(y0.iter().zip(&scale).map(|(v, s)| *v / *s), n);
    let d1 = rms(f0.iter().zip(&scale).map(|(v, s)| *v / *s), n);
    let small: T = lit(1e-5);
    let h0 = if d0 < small || d1 < small { lit(1e-6) } else { lit::<T>(0.01) * d0 / d1 };
    let h0 = h0.min(t_end - t0);
    let y1: Vec<T> = y0.iter().zip(f0).map(|(v, d)| *v + h0 * *d).collect();
    let mut f1 = vec![T::zero(); n];
    f(t0 + h0, &y1, &mut f1);
    stats.nfev += 1;
    let d2 = rms(f1.iter().zip(f0).zip(&scale).map(|((a, b), s)| (*a - *b) / *s), n) / h0;
    let tiny: T = lit(1e-15);
    let h1 = if d1 <= tiny && d2 <= tiny {
        lit::<T>(1e-6).max(h0 * lit(1e-3))
    } else {
        (lit::<T>(0.01) / d1.max(d2)).powf(lit(1.0 / 8.0))
    };
    (lit::<T>(100.0) * h0).min(h1).min(t_end - t0).min(opts.max_step)
}
