//! Singulants `chi_k(w) = i * int_{-a_k}^{w} dphi / q0^3` by contour quadrature.

use crate::error::{Error, Result};
use crate::hull::Hull;
use crate::quad::{integrate_path, Estimate, Piece, QuadOptions};
use crate::scalar::{imag, lit, real, Cx, Real};

/// Polyline integration contour. Legs lying on the real axis are indented
/// into the upper half-plane around every corner they pass over.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour<T> {
    pub waypoints: Vec<Cx<T>>,
    pub indent_radius: T,
}

/// Default indentation radius: a hundredth of the smallest corner spacing.
pub fn default_indent<T: Real>(hull: &Hull<T>) -> T {
    hull.min_spacing() * lit(1e-2)
}

impl<T: Real> Contour<T> {
    pub fn new(waypoints: Vec<Cx<T>>, indent_radius: T) -> Self {
        Contour { waypoints, indent_radius }
    }

    /// Runs along the real axis from `from` to `Re(to)` and then vertically
    /// up to `to`.
    pub fn standard(hull: &Hull<T>, from: Cx<T>, to: Cx<T>) -> Self {
        let r = default_indent(hull);
        let mut turn = Cx::new(to.re, T::zero());
        // do not turn upward directly above a corner
        for k in 0..hull.a().len() {
            let s = hull.singularity(k);
            let d = (turn - s).norm();
            if d < r && (s - from).norm() > r && to.im > T::zero() {
                let dir = if to.re >= from.re { -T::one() } else { T::one() };
                turn = s + real(dir * r);
            }
        }
        // straight out of the start corner when the turn would hug it
        if (turn - from).norm() < r && to.im > T::zero() {
            turn = from;
        }
        let mut pts = vec![from];
        for p in [turn, to] {
            if (p - *pts.last().unwrap()).norm() > T::epsilon() * lit(16.0) {
                pts.push(p);
            }
        }
        Contour { waypoints: pts, indent_radius: r }
    }

    /// Rectangular arch `from -> from + ih -> to + ih -> to` through the upper half-plane.
    pub fn arch(hull: &Hull<T>, from: Cx<T>, to: Cx<T>, height: T) -> Self {
        let up = Cx::new(T::zero(), height);
        Contour { waypoints: vec![from, from + up, to + up, to], indent_radius: default_indent(hull) }
    }

    /// Splits the contour into quadrature pieces. `alpha(k)` is the exponent of
    /// the integrand's algebraic behaviour at corner `k`, used when a leg
    /// starts or ends exactly on that corner.
    pub fn pieces(&self, hull: &Hull<T>, alpha: impl Fn(usize) -> T) -> Result<Vec<Piece<T>>> {
        let nsing = hull.a().len();
        let tiny = T::epsilon() * lit(64.0);
        let r = self.indent_radius;
        let at_corner = |z: Cx<T>| (0..nsing).find(|&k| (z - hull.singularity(k)).norm() <= tiny * (T::one() + hull.a()[k]));
        let mut out = Vec::new();
        for leg in self.waypoints.windows(2) {
            let (p, q) = (leg[0], leg[1]);
            if (q - p).norm() <= tiny {
                continue;
            }
            let sp = at_corner(p);
            let sq = at_corner(q);
            let on_axis = p.im.abs() <= tiny && q.im.abs() <= tiny;
            if on_axis {
                let dir = if q.re > p.re { T::one() } else { -T::one() };
                let mut inner: Vec<usize> = (0..nsing)
                    .filter(|&k| Some(k) != sp && Some(k) != sq)
                    .filter(|&k| {
                        let x = -hull.a()[k];
                        (x - p.re) * dir > T::zero() && (q.re - x) * dir > T::zero()
                    })
                    .collect();
                inner.sort_by(|&i, &j| {
                    let (xi, xj) = (-hull.a()[i], -hull.a()[j]);
                    ((xi - xj) * dir).partial_cmp(&T::zero()).unwrap_or(std::cmp::Ordering::Equal)
                });
                let mut start = p;
                let mut start_sing = sp.map(&alpha);
                for k in inner {
                    let x = -hull.a()[k];
                    if (x - start.re).abs() <= r || (q.re - x).abs() <= r {
                        return Err(Error::ContourThroughSingularity(k));
                    }
                    let before = Cx::new(x - dir * r, T::zero());
                    out.push(Piece::Line { from: start, to: before, sing_start: start_sing, sing_end: None });
                    let (t0, t1) = if dir > T::zero() { (T::PI(), T::zero()) } else { (T::zero(), T::PI()) };
                    out.push(Piece::Arc { center: Cx::new(x, T::zero()), radius: r, t0, t1 });
                    start = Cx::new(x + dir * r, T::zero());
                    start_sing = None;
                }
                out.push(Piece::Line { from: start, to: q, sing_start: start_sing, sing_end: sq.map(&alpha) });
            } else {
                for k in 0..nsing {
                    if Some(k) == sp || Some(k) == sq {
                        continue;
                    }
                    if distance_to_segment(hull.singularity(k), p, q) < r * lit(0.5) {
                        return Err(Error::ContourThroughSingularity(k));
                    }
                }
                out.push(Piece::Line { from: p, to: q, sing_start: sp.map(&alpha), sing_end: sq.map(&alpha) });
            }
        }
        Ok(out)
    }
}

fn distance_to_segment<T: Real>(z: Cx<T>, p: Cx<T>, q: Cx<T>) -> T {
    let d = q - p;
    let len2 = d.norm_sqr();
    if len2 == T::zero() {
        return (z - p).norm();
    }
    let t = ((z - p) * d.conj()).re / len2;
    let t = t.max(T::zero()).min(T::one());
    (z - (p + d * t)).norm()
}

pub(crate) fn quad_opts<T: Real>() -> QuadOptions<T> {
    QuadOptions::with_tol(T::epsilon() * lit(1e3), (T::epsilon() * lit(1e3)).max(lit(1e-13)))
}

fn check_corner<T: Real>(hull: &Hull<T>, k: usize) -> Result<()> {
    let s = *hull.sigma().get(k).ok_or(Error::CornerIndex(k))?;
    if s <= lit::<T>(-1.0 / 3.0) {
        return Err(Error::NoSingulant(k));
    }
    Ok(())
}

/// `int dphi / q0^3` along a contour.
pub fn integrate_inv_q0_cubed<T: Real>(hull: &Hull<T>, contour: &Contour<T>, opts: &QuadOptions<T>) -> Result<Estimate<T>> {
    let pieces = contour.pieces(hull, |k| lit::<T>(3.0) * hull.sigma()[k])?;
    integrate_path(&pieces, |z| hull.inv_q0_cubed(z), opts)
}

/// Singulant `chi_k(w)` for corner `k`; `contour` defaults to [`Contour::standard`].
pub fn chi<T: Real>(hull: &Hull<T>, k: usize, w: Cx<T>, contour: Option<&Contour<T>>) -> Result<Cx<T>> {
    Ok(chi_estimate(hull, k, w, contour, &quad_opts())?.value)
}

pub fn chi_estimate<T: Real>(
    hull: &Hull<T>,
    k: usize,
    w: Cx<T>,
    contour: Option<&Contour<T>>,
    opts: &QuadOptions<T>,
) -> Result<Estimate<T>> {
    check_corner(hull, k)?;
    let from = hull.singularity(k);
    let owned;
    let c = match contour {
        Some(c) => {
            if c.waypoints.first() != Some(&from) || c.waypoints.last() != Some(&w) {
                return Err(Error::Unsupported("contour must run from the corner to w".into()));
            }
            c
        }
        None => {
            owned = Contour::standard(hull, from, w);
            &owned
        }
    };
    if (w - from).norm() == T::zero() {
        return Ok(Estimate::zero());
    }
    Ok(integrate_inv_q0_cubed(hull, c, opts)?.scale(imag()))
}

/// Leading behaviour of `chi_k` close to its corner.
pub fn chi_near_corner<T: Real>(hull: &Hull<T>, k: usize, w: Cx<T>) -> Result<Cx<T>> {
    check_corner(hull, k)?;
    let s = hull.sigma()[k];
    let p = T::one() + lit::<T>(3.0) * s;
    let c = hull.local_prefactor(k)?;
    let z = w + hull.a()[k];
    // (w + a_k)^p on the same branch as q0
    let zp = (crate::hull::log_branch(z) * p).exp();
    Ok(imag::<T>() / (c * c * c * p) * zp)
}

/// `3 pi sum_i a_i sigma_i`, the free-surface value of `Re chi_1`.
pub fn re_chi1_residue<T: Real>(hull: &Hull<T>) -> T {
    let n = hull.corners();
    let s = (0..n).fold(T::zero(), |acc, i| acc + hull.a()[i] * hull.sigma()[i]);
    lit::<T>(3.0) * T::PI() * s
}

/// `i * int_{-a_j}^{-a_k} dphi / q0^3` along the hull, indenting over the
/// corners in between.
pub fn chi_between<T: Real>(hull: &Hull<T>, j: usize, k: usize) -> Result<Cx<T>> {
    check_corner(hull, j)?;
    if k >= hull.a().len() {
        return Err(Error::CornerIndex(k));
    }
    if j == k {
        return Ok(Cx::new(T::zero(), T::zero()));
    }
    let c = Contour::new(vec![hull.singularity(j), hull.singularity(k)], default_indent(hull));
    Ok(integrate_inv_q0_cubed(hull, &c, &quad_opts())?.value * imag::<T>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hull::HullSpec;
    use std::f64::consts::PI;

    fn fig5() -> Hull<f64> {
        HullSpec::rational("fig5", &[(0.8, (1, 4)), (0.2, (1, 4))]).normalize().unwrap()
    }

    #[test]
    fn standard_contour_indents_every_crossed_corner() {
        let h = fig5();
        let c = Contour::standard(&h, h.singularity(0), Cx::new(1.0, 0.0));
        let pieces = c.pieces(&h, |_| 0.0).unwrap();
        let arcs = pieces.iter().filter(|p| matches!(p, Piece::Arc { .. })).count();
        assert_eq!(arcs, 2);
        for w in pieces.windows(2) {
            assert!((w[0].end() - w[1].start()).norm() < 1e-14);
        }
    }

    #[test]
    fn residue_value() {
        assert!((re_chi1_residue(&fig5()) - 0.75 * PI).abs() < 1e-15);
    }

    #[test]
    fn chi_vanishes_at_its_corner() {
        let h = fig5();
        assert_eq!(chi(&h, 0, h.singularity(0), None).unwrap(), Cx::new(0.0, 0.0));
    }

    #[test]
    fn no_singulant_for_steep_negative_corner() {
        let h = HullSpec::new("neg", &[(0.6, -0.5), (0.4, 0.5)]).normalize().unwrap();
        assert_eq!(chi(&h, 0, Cx::new(0.0, 1.0), None), Err(Error::NoSingulant(0)));
    }

    #[test]
    fn chi_just_above_its_corner() {
        let h = fig5();
        let w = Cx::new(-0.7992, 0.1);
        let arch = Contour::arch(&h, h.singularity(0), w, 0.05);
        let a = chi(&h, 0, w, None).unwrap();
        let b = chi(&h, 0, w, Some(&arch)).unwrap();
        assert!((a - b).norm() < 1e-10 * b.norm(), "{a} vs {b}");
    }

    #[test]
    fn contour_too_close_to_corner_is_rejected() {
        let h = fig5();
        let c = Contour::new(vec![Cx::new(-0.8, 0.0), Cx::new(-0.2, 1e-9), Cx::new(1.0, 0.0)], 1e-2);
        assert!(matches!(c.pieces(&h, |_| 0.0), Err(Error::ContourThroughSingularity(1))));
    }
}
