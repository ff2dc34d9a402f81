//! First-order free-surface inclination `theta_1 = -q0^2 q0'` and its
//! Hilbert transform `(1/pi) int_0^inf theta_1(phi) / (phi - w) dphi`.

use crate::error::{Error, Result};
use crate::hull::Hull;
use crate::quad::{integrate, integrate_path, Estimate, Piece, QuadOptions};
use crate::scalar::{lit, Cx, Real};
use crate::singulant::{default_indent, Contour};

fn hilbert_opts<T: Real>() -> QuadOptions<T> {
    QuadOptions::with_tol(T::epsilon() * lit(1e3), (T::epsilon() * lit(1e3)).max(lit(1e-12)))
}

/// `theta_1(w) = -q0(w)^2 q0'(w)`.
pub fn theta1<T: Real>(hull: &Hull<T>, w: Cx<T>) -> Result<Cx<T>> {
    let l = hull.log_q0(w)?;
    Ok(-(l * lit::<T>(3.0)).exp() * hull.dlog_q0(w)?)
}

#[inline]
fn theta1_unchecked<T: Real>(hull: &Hull<T>, w: Cx<T>) -> Cx<T> {
    -(hull.log_q0_unchecked(w) * lit::<T>(3.0)).exp() * hull.dlog_q0_unchecked(w)
}

/// `d theta_1 / dw = -q0^3 (3 D^2 + D')` with `D = q0'/q0`.
pub fn theta1_prime<T: Real>(hull: &Hull<T>, w: Cx<T>) -> Result<Cx<T>> {
    hull.log_q0(w)?;
    Ok(theta1_prime_unchecked(hull, w))
}

fn theta1_prime_unchecked<T: Real>(hull: &Hull<T>, w: Cx<T>) -> Cx<T> {
    let q3 = (hull.log_q0_unchecked(w) * lit::<T>(3.0)).exp();
    let d = hull.dlog_q0_unchecked(w);
    let dd = hull.d2log_q0_unchecked(w);
    -q3 * (d * d * lit::<T>(3.0) + dd)
}

/// Exponent of `theta_1 ~ phi^alpha` at the stagnation point.
fn stagnation_exponent<T: Real>(hull: &Hull<T>) -> Result<T> {
    let s = hull.total_turn();
    if !(s > T::zero()) {
        return Err(Error::Unsupported("Hilbert transform needs a positive total turn".into()));
    }
    Ok(lit::<T>(3.0) * s - T::one())
}

/// `int_X^inf f(phi) dphi` through `phi = X / t`.
fn tail<T: Real>(f: impl Fn(Cx<T>) -> Cx<T>, x: T, opts: &QuadOptions<T>) -> Result<Estimate<T>> {
    integrate(
        |t: T| {
            let phi = x / t;
            f(Cx::new(phi, T::zero())) * (x / (t * t))
        },
        T::zero(),
        T::one(),
        opts,
    )
}

/// `(1/pi) int_0^inf theta_1(phi) / (phi - w) dphi`. On the positive real
/// axis this is the limit from the upper half-plane, so that
/// `Im H theta_1 = theta_1` there.
pub fn hilbert_theta1<T: Real>(hull: &Hull<T>, w: Cx<T>) -> Result<Cx<T>> {
    Ok(hilbert_estimate(hull, w, &hilbert_opts())?.value)
}

pub fn hilbert_estimate<T: Real>(hull: &Hull<T>, w: Cx<T>, opts: &QuadOptions<T>) -> Result<Estimate<T>> {
    let alpha = stagnation_exponent(hull)?;
    if w.norm() <= T::epsilon() * lit(16.0) {
        return Err(Error::BranchPoint(hull.corners()));
    }
    let (x, y) = (w.re, w.im);
    let zero = Cx::new(T::zero(), T::zero());
    let half: T = lit(0.5);
    let direct = |z: Cx<T>| theta1_unchecked(hull, z) / (z - w);
    let total = if x > T::zero() && y.abs() < half.max(half * x) {
        let tw = theta1_unchecked(hull, w);
        let small = lit::<T>(1e-5) * (T::one() + x);
        let sub = |z: Cx<T>| {
            let d = z - w;
            if d.norm() < small {
                theta1_prime_unchecked(hull, (z + w) * half)
            } else {
                (theta1_unchecked(hull, z) - tw) / d
            }
        };
        let xx = Cx::new(x, T::zero());
        let x2 = x + x;
        let near = Piece::Line { from: zero, to: xx, sing_start: Some(alpha), sing_end: None }.integrate(&mut &sub, opts)?
            + Piece::line(xx, Cx::new(x2, T::zero())).integrate(&mut &sub, opts)?;
        let log_term = if y == T::zero() {
            Cx::new((x2 - x).abs().ln() - x.abs().ln(), T::PI())
        } else {
            (Cx::new(x2, T::zero()) - w).ln() - (-w).ln()
        };
        let far_end = x2.max(T::one());
        let mut est = near + Estimate { value: tw * log_term, error: T::zero() };
        if far_end > x2 {
            est = est + Piece::line(Cx::new(x2, T::zero()), Cx::new(far_end, T::zero())).integrate(&mut &direct, opts)?;
        }
        est + tail(direct, far_end, opts)?
    } else {
        let far_end = (x + x).max(T::one());
        let body = Piece::Line { from: zero, to: Cx::new(far_end, T::zero()), sing_start: Some(alpha), sing_end: None }
            .integrate(&mut &direct, opts)?;
        body + tail(direct, far_end, opts)?
    };
    Ok(total.scale(Cx::new(T::one() / T::PI(), T::zero())))
}

/// `3 int_{-a_k}^{w} H theta_1 / q0^3 dphi` along a rectangular arch of the
/// given height through the upper half-plane.
pub fn hilbert_integral<T: Real>(hull: &Hull<T>, k: usize, w: Cx<T>, height: T) -> Result<Cx<T>> {
    let s = *hull.sigma().get(k).ok_or(Error::CornerIndex(k))?;
    if k == hull.corners() {
        return Err(Error::Unsupported("Hilbert integral anchored at the stagnation point".into()));
    }
    if s <= lit::<T>(-1.0 / 3.0) {
        return Err(Error::NoSingulant(k));
    }
    let from = hull.singularity(k);
    let c = Contour { waypoints: vec![from, from + Cx::new(T::zero(), height), w + Cx::new(T::zero(), height), w], indent_radius: default_indent(hull) };
    let pieces = c.pieces(hull, |j| lit::<T>(3.0) * hull.sigma()[j])?;
    let opts = hilbert_opts::<T>();
    let mut failure = None;
    let est = integrate_path(
        &pieces,
        |z| match hilbert_estimate(hull, z, &opts) {
            Ok(h) => h.value * hull.inv_q0_cubed(z),
            Err(e) => {
                failure.get_or_insert(e);
                Cx::new(T::zero(), T::zero())
            }
        },
        &QuadOptions::with_tol(lit(1e-11), lit(1e-10)),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(est.value * lit::<T>(3.0))
}

pub const DEFAULT_ARCH_HEIGHT: f64 = 0.5;

/// `|exp(-Im I_1(w)) - e q0(w)^3|` for `w > 0`, where `I_1` is the Hilbert
/// integral anchored at the first corner.
pub fn hilbert_identity_residual<T: Real>(hull: &Hull<T>, w: T) -> Result<T> {
    if !(w > T::zero()) {
        return Err(Error::Unsupported("identity holds on the free surface only".into()));
    }
    let i1 = hilbert_integral(hull, 0, Cx::new(w, T::zero()), lit(DEFAULT_ARCH_HEIGHT))?;
    let q0 = hull.q0_real(w);
    Ok(((-i1.im).exp() - T::one().exp() * q0 * q0 * q0).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hull::HullSpec;

    fn fig5() -> Hull<f64> {
        HullSpec::new("fig5", &[(0.8, 0.25), (0.2, 0.25)]).normalize().unwrap()
    }

    #[test]
    fn theta1_is_real_on_free_surface() {
        let h = fig5();
        let t = theta1(&h, Cx::new(1.3, 0.0)).unwrap();
        assert!(t.im.abs() < 1e-15 && t.re != 0.0);
    }

    #[test]
    fn theta1_prime_matches_differences() {
        let h = fig5();
        let w = Cx::new(0.3, 0.7);
        let d = 1e-5;
        let fd = (theta1(&h, w + d).unwrap() - theta1(&h, w - d).unwrap()) / (2.0 * d);
        let an = theta1_prime(&h, w).unwrap();
        assert!((fd - an).norm() < 1e-7 * an.norm());
    }

    #[test]
    fn imaginary_part_on_the_real_axis() {
        let h = fig5();
        for x in [-0.5, -0.1, -2.0] {
            assert!(hilbert_theta1(&h, Cx::new(x, 0.0)).unwrap().im.abs() < 1e-10);
        }
        for x in [0.05, 0.7, 3.0] {
            let hv = hilbert_theta1(&h, Cx::new(x, 0.0)).unwrap();
            let t = theta1(&h, Cx::new(x, 0.0)).unwrap().re;
            assert!((hv.im - t).abs() < 1e-10, "{x}: {} vs {t}", hv.im);
        }
    }

    #[test]
    fn continuous_across_the_split() {
        let h = fig5();
        let a = hilbert_theta1(&h, Cx::new(1.0, 0.5 - 1e-9)).unwrap();
        let b = hilbert_theta1(&h, Cx::new(1.0, 0.5 + 1e-9)).unwrap();
        assert!((a - b).norm() < 1e-8);
    }

    #[test]
    fn stagnation_point_is_rejected() {
        assert!(hilbert_theta1(&fig5(), Cx::new(0.0, 0.0)).is_err());
    }
}
