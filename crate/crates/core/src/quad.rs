//! Globally adaptive Gauss-Kronrod (7/15) quadrature for complex-valued
//! integrands, plus straight-line and circular-arc contour pieces with
//! optional algebraic endpoint singularities.

use crate::error::{Error, Result};
use crate::scalar::{lit, Cx, Real};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        let eps = T::epsilon();
        QuadOptions {
            abs_tol: eps * lit(1e2),
            rel_tol: (eps * lit(1e2)).max(lit(1e-12)),
            max_intervals: 4000,
        }
    }
}

impl<T: Real> QuadOptions<T> {
    pub fn with_tol(abs_tol: T, rel_tol: T) -> Self {
        QuadOptions { abs_tol, rel_tol, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: Cx<T>,
    pub error: T,
}

impl<T: Real> std::ops::Add for Estimate<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Estimate { value: self.value + o.value, error: self.error + o.error }
    }
}

impl<T: Real> Estimate<T> {
    pub fn zero() -> Self {
        Estimate { value: Cx::new(T::zero(), T::zero()), error: T::zero() }
    }

    pub fn scale(self, s: Cx<T>) -> Self {
        Estimate { value: self.value * s, error: self.error * s.norm() }
    }
}

fn qk_error<T: Real>(resk: T, resg: T, resabs: T, resasc: T) -> T {
    let mut err = (resk - resg).abs();
    if resasc != T::zero() && err != T::zero() {
        let r: T = lit::<T>(200.0) * err / resasc;
        err = resasc * T::one().min(r.powf(lit(1.5)));
    }
    let uflow = T::min_positive_value();
    let eps = T::epsilon();
    if resabs > uflow / (lit::<T>(50.0) * eps) {
        err = err.max(lit::<T>(50.0) * eps * resabs);
    }
    err
}

/// One 15-point Kronrod panel on `[a, b]`.
pub fn gk15<T: Real, F: FnMut(T) -> Cx<T>>(f: &mut F, a: T, b: T) -> Estimate<T> {
    let half: T = lit(0.5);
    let c = half * (a + b);
    let h = half * (b - a);
    let fc = f(c);
    let mut resk = fc * lit::<T>(WGK[7]);
    let mut resg = fc * lit::<T>(WG[3]);
    let mut fv1 = [Cx::new(T::zero(), T::zero()); 7];
    let mut fv2 = [Cx::new(T::zero(), T::zero()); 7];
    for j in 0..7 {
        let dx = h * lit::<T>(XGK[j]);
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk = resk + (f1 + f2) * lit::<T>(WGK[j]);
        if j % 2 == 1 {
            resg = resg + (f1 + f2) * lit::<T>(WG[j / 2]);
        }
    }
    let habs = h.abs();
    let mean = resk * half;
    let mut abs_re = fc.re.abs() * lit::<T>(WGK[7]);
    let mut abs_im = fc.im.abs() * lit::<T>(WGK[7]);
    let mut asc_re = (fc.re - mean.re).abs() * lit::<T>(WGK[7]);
    let mut asc_im = (fc.im - mean.im).abs() * lit::<T>(WGK[7]);
    for j in 0..7 {
        let w: T = lit(WGK[j]);
        abs_re = abs_re + w * (fv1[j].re.abs() + fv2[j].re.abs());
        abs_im = abs_im + w * (fv1[j].im.abs() + fv2[j].im.abs());
        asc_re = asc_re + w * ((fv1[j].re - mean.re).abs() + (fv2[j].re - mean.re).abs());
        asc_im = asc_im + w * ((fv1[j].im - mean.im).abs() + (fv2[j].im - mean.im).abs());
    }
    let err = qk_error(resk.re * habs, resg.re * habs, abs_re * habs, asc_re * habs)
        + qk_error(resk.im * habs, resg.im * habs, abs_im * habs, asc_im * habs);
    Estimate { value: resk * h, error: err }
}

struct Panel<T> {
    a: T,
    b: T,
    est: Estimate<T>,
}

/// Adaptive integral of `f` over the real interval `[a, b]`.
pub fn integrate<T: Real, F: FnMut(T) -> Cx<T>>(mut f: F, a: T, b: T, opts: &QuadOptions<T>) -> Result<Estimate<T>> {
    if a == b {
        return Ok(Estimate::zero());
    }
    let first = gk15(&mut f, a, b);
    if !first.value.re.is_finite() || !first.value.im.is_finite() {
        return Err(Error::Quadrature(f64::INFINITY));
    }
    let mut panels = vec![Panel { a, b, est: first }];
    let mut total = first;
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.value.norm());
        if total.error <= tol {
            return Ok(total);
        }
        if panels.len() >= opts.max_intervals {
            return Err(Error::Quadrature(total.error.to_f64().unwrap_or(f64::NAN)));
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .fold((0, -T::one()), |acc, (i, p)| if p.est.error > acc.1 { (i, p.est.error) } else { acc });
        let p = panels.swap_remove(idx);
        let m = lit::<T>(0.5) * (p.a + p.b);
        if (p.b - p.a).abs() <= T::epsilon() * lit::<T>(64.0) * (p.a.abs() + p.b.abs()) {
            // cannot resolve further; accept remaining error if small relative to the tolerance
            if p.est.error <= tol * lit(10.0) {
                panels.push(p);
                return Ok(total);
            }
            return Err(Error::Quadrature(total.error.to_f64().unwrap_or(f64::NAN)));
        }
        let l = gk15(&mut f, p.a, m);
        let r = gk15(&mut f, m, p.b);
        if !(l.value.re.is_finite() && l.value.im.is_finite() && r.value.re.is_finite() && r.value.im.is_finite()) {
            return Err(Error::Quadrature(f64::INFINITY));
        }
        total = Estimate {
            value: total.value - p.est.value + l.value + r.value,
            error: total.error - p.est.error + l.error + r.error,
        };
        // guard against drift in the running error sum
        if total.error < T::zero() {
            total.error = panels.iter().fold(l.error + r.error, |s, q| s + q.est.error);
        }
        panels.push(Panel { a: p.a, b: m, est: l });
        panels.push(Panel { a: m, b: p.b, est: r });
    }
}

/// A piece of an integration contour in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece<T> {
    /// Straight segment. `sing_start`/`sing_end` carry the exponent `alpha > -1`
    /// of an algebraic endpoint singularity `(z - z_end)^alpha` when present.
    Line { from: Cx<T>, to: Cx<T>, sing_start: Option<T>, sing_end: Option<T> },
    /// Circular arc `center + radius * e^{it}` for `t` from `t0` to `t1`.
    Arc { center: Cx<T>, radius: T, t0: T, t1: T },
}

impl<T: Real> Piece<T> {
    pub fn line(from: Cx<T>, to: Cx<T>) -> Self {
        Piece::Line { from, to, sing_start: None, sing_end: None }
    }

    pub fn start(&self) -> Cx<T> {
        match *self {
            Piece::Line { from, .. } => from,
            Piece::Arc { center, radius, t0, .. } => center + Cx::from_polar(radius, t0),
        }
    }

    pub fn end(&self) -> Cx<T> {
        match *self {
            Piece::Line { to, .. } => to,
            Piece::Arc { center, radius, t1, .. } => center + Cx::from_polar(radius, t1),
        }
    }

    /// Contour integral of `f` along the piece.
    pub fn integrate<F: FnMut(Cx<T>) -> Cx<T>>(&self, f: &mut F, opts: &QuadOptions<T>) -> Result<Estimate<T>> {
        match *self {
            Piece::Line { from, to, sing_start, sing_end } => match (sing_start, sing_end) {
                (None, None) => {
                    let d = to - from;
                    let est = integrate(|t: T| f(from + d * t), T::zero(), T::one(), opts)?;
                    Ok(est.scale(d))
                }
                (Some(alpha), None) => singular_line(f, from, to, alpha, opts),
                (None, Some(alpha)) => Ok(singular_line(f, to, from, alpha, opts)?.scale(Cx::new(-T::one(), T::zero()))),
                (Some(a0), Some(a1)) => {
                    let mid = (from + to) * lit::<T>(0.5);
                    let left = singular_line(f, from, mid, a0, opts)?;
                    let right = singular_line(f, to, mid, a1, opts)?.scale(Cx::new(-T::one(), T::zero()));
                    Ok(left + right)
                }
            },
            Piece::Arc { center, radius, t0, t1 } => {
                let i = Cx::new(T::zero(), T::one());
                let est = integrate(
                    |t: T| {
                        let e = Cx::from_polar(radius, t);
                        f(center + e) * i * e
                    },
                    t0,
                    t1,
                    opts,
                )?;
                Ok(est)
            }
        }
    }
}

/// Integral from `p` (singular endpoint, integrand ~ (z-p)^alpha) to `q`.
///
/// Uses `z = p + (q - p) s^(1/(1+alpha))`, which removes the algebraic
/// endpoint behaviour exactly.
fn singular_line<T: Real, F: FnMut(Cx<T>) -> Cx<T>>(
    f: &mut F,
    p: Cx<T>,
    q: Cx<T>,
    alpha: T,
    opts: &QuadOptions<T>,
) -> Result<Estimate<T>> {
    if alpha <= -T::one() {
        return Err(Error::Quadrature(f64::INFINITY));
    }
    let d = q - p;
    let pw = T::one() / (T::one() + alpha);
    let est = integrate(
        |s: T| {
            let t = s.powf(pw);
            let jac = pw * s.powf(pw - T::one());
            f(p + d * t) * jac
        },
        T::zero(),
        T::one(),
        opts,
    )?;
    Ok(est.scale(d))
}

/// Integral over a sequence of pieces.
pub fn integrate_path<T: Real, F: FnMut(Cx<T>) -> Cx<T>>(pieces: &[Piece<T>], mut f: F, opts: &QuadOptions<T>) -> Result<Estimate<T>> {
    let mut total = Estimate::zero();
    for p in pieces {
        total = total + p.integrate(&mut f, opts)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let est = integrate(|x: f64| Cx::new(x * x * x, 1.0), 0.0, 2.0, &QuadOptions::default()).unwrap();
        assert!((est.value.re - 4.0).abs() < 1e-14);
        assert!((est.value.im - 2.0).abs() < 1e-14);
    }

    #[test]
    fn sqrt_endpoint_adaptive() {
        let est = integrate(|x: f64| Cx::new(x.sqrt(), 0.0), 0.0, 1.0, &QuadOptions::default()).unwrap();
        assert!((est.value.re - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn algebraic_singularity_substitution() {
        // integral_0^1 z^{-0.9} dz = 10
        let piece = Piece::Line { from: Cx::new(0.0, 0.0), to: Cx::new(1.0, 0.0), sing_start: Some(-0.9), sing_end: None };
        let est = piece.integrate(&mut |z: Cx<f64>| z.powf(-0.9), &QuadOptions::default()).unwrap();
        assert!((est.value.re - 10.0).abs() < 1e-10, "{:?}", est);
        let rev = Piece::Line { from: Cx::new(1.0, 0.0), to: Cx::new(0.0, 0.0), sing_start: None, sing_end: Some(-0.9) };
        let est = rev.integrate(&mut |z: Cx<f64>| z.powf(-0.9), &QuadOptions::default()).unwrap();
        assert!((est.value.re + 10.0).abs() < 1e-10);
    }

    #[test]
    fn closed_circle_residue() {
        let piece = Piece::Arc { center: Cx::new(0.0, 0.0), radius: 1.0, t0: 0.0, t1: 2.0 * PI };
        let est = piece.integrate(&mut |z: Cx<f64>| z.inv(), &QuadOptions::default()).unwrap();
        assert!((est.value - Cx::new(0.0, 2.0 * PI)).norm() < 1e-12);
    }

    #[test]
    fn single_precision_runs() {
        let est = integrate(|x: f32| Cx::new(x.cos(), 0.0), 0.0, 1.0, &QuadOptions::default()).unwrap();
        assert!((est.value.re - 1f32.sin()).abs() < 1e-5);
    }
}
