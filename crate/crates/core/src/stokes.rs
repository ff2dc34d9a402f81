//! Stokes lines `Im chi_k = 0, Re chi_k >= 0` and the set of corners whose
//! Stokes lines reach the free surface.

use crate::error::{Error, Result};
use crate::hull::{ExactAngle, Hull};
use crate::quad::{Piece, QuadOptions};
use crate::scalar::{imag, lit, to_f64, Cx, Real};
use crate::singulant::{chi_estimate, default_indent, quad_opts};
use num_rational::Ratio;
use num_traits::ToPrimitive;
use rayon::prelude::*;

/// Emergence angles `nu = (3 theta_k + 2 m pi - pi/2) / (1 + 3 sigma_k)` in (0, pi).
pub fn emergence_angles<T: Real>(hull: &Hull<T>, k: usize) -> Result<Vec<T>> {
    let s = *hull.sigma().get(k).ok_or(Error::CornerIndex(k))?;
    if s <= lit::<T>(-1.0 / 3.0) {
        return Err(Error::NoSingulant(k));
    }
    if let Some(exact) = emergence_angles_exact(hull, k)? {
        return Ok(exact.iter().map(|r| T::PI() * lit::<T>(r.to_f64().unwrap_or(f64::NAN))).collect());
    }
    let th = hull.theta()[k];
    let p = T::one() + lit::<T>(3.0) * s;
    let tau = T::TAU();
    // nu in (0, pi)  <=>  m in ((pi/2 - 3 theta)/2pi, (p pi + pi/2 - 3 theta)/2pi)
    let lo = ((T::FRAC_PI_2() - lit::<T>(3.0) * th) / tau).floor().to_i64().unwrap_or(0) - 1;
    let hi = ((p * T::PI() + T::FRAC_PI_2() - lit::<T>(3.0) * th) / tau).ceil().to_i64().unwrap_or(0) + 1;
    let mut out: Vec<T> = (lo..=hi)
        .map(|m| (lit::<T>(3.0) * th + lit::<T>(2.0 * m as f64) * T::PI() - T::FRAC_PI_2()) / p)
        .filter(|&nu| nu > T::zero() && nu < T::PI())
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(out)
}

/// Emergence angles in units of pi, computed in rational arithmetic.
/// `None` when the hull angles are not exact.
pub fn emergence_angles_exact<T: Real>(hull: &Hull<T>, k: usize) -> Result<Option<Vec<ExactAngle>>> {
    let ex = match hull.sigma_exact() {
        Some(e) => e,
        None => return Ok(None),
    };
    let s = *ex.get(k).ok_or(Error::CornerIndex(k))?;
    if s <= Ratio::new(-1, 3) {
        return Err(Error::NoSingulant(k));
    }
    let th = hull.theta_exact(k).expect("exact angles");
    let one = Ratio::from_integer(1);
    let p = one + Ratio::from_integer(3) * s;
    let base = Ratio::from_integer(3) * th - Ratio::new(1, 2);
    let mut out = Vec::new();
    let lo = (-base / 2).floor().to_integer() - 1;
    let hi = ((p - base) / 2).ceil().to_integer() + 1;
    for m in lo..=hi {
        let nu = (base + Ratio::from_integer(2 * m)) / p;
        if nu > Ratio::from_integer(0) && nu < one {
            out.push(nu);
        }
    }
    out.sort();
    Ok(Some(out))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination<T> {
    /// Crossed the free surface `w = phi > 0`.
    FreeSurfaceHit(T),
    /// Crossed back onto the hull `w = phi < 0`.
    HullHit(T),
    Escaped(T),
    /// Came within the indentation radius of another corner.
    HitSingularity(usize),
    StepLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StokesTrace<T> {
    pub corner: usize,
    pub emergence_angle: T,
    pub points: Vec<Cx<T>>,
    pub chi_along: Vec<Cx<T>>,
    pub termination: Termination<T>,
    /// The crossing of the real axis was too shallow to classify reliably.
    pub grazing: bool,
}

impl<T: Real> StokesTrace<T> {
    pub fn hits_free_surface(&self) -> Option<T> {
        match self.termination {
            Termination::FreeSurfaceHit(x) => Some(x),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TraceOptions<T> {
    pub r0: T,
    pub max_step: T,
    pub r_max: T,
    pub max_steps: usize,
    pub tol: T,
    /// Crossing angles below this (radians) are reported as grazing.
    pub grazing_angle: T,
}

impl<T: Real> Default for TraceOptions<T> {
    fn default() -> Self {
        TraceOptions {
            r0: lit(1e-4),
            max_step: lit(0.02),
            r_max: lit(50.0),
            max_steps: 100_000,
            tol: lit(1e-10),
            grazing_angle: lit(1e-3),
        }
    }
}

fn step_integral<T: Real>(hull: &Hull<T>, a: Cx<T>, b: Cx<T>, opts: &QuadOptions<T>) -> Result<Cx<T>> {
    let est = Piece::line(a, b).integrate(&mut |z| hull.inv_q0_cubed(z), opts)?;
    Ok(est.value * imag::<T>())
}

/// Marches along `Im chi_k = 0` from corner `k` in direction `nu`.
pub fn trace_stokes_line<T: Real>(hull: &Hull<T>, k: usize, nu: T, opts: &TraceOptions<T>) -> Result<StokesTrace<T>> {
    let s = *hull.sigma().get(k).ok_or(Error::CornerIndex(k))?;
    if s <= lit::<T>(-1.0 / 3.0) {
        return Err(Error::NoSingulant(k));
    }
    let qopts = quad_opts::<T>();
    let indent = default_indent(hull);
    let corner = hull.singularity(k);
    let mut w = corner + Cx::from_polar(opts.r0, nu);
    let mut chi = chi_estimate(hull, k, w, None, &qopts).or_else(|_| crate::singulant::chi_near_corner(hull, k, w).map(|v| crate::quad::Estimate { value: v, error: T::zero() }))?.value;
    // start exactly on Im chi = 0
    chi = Cx::new(chi.re, T::zero());
    let mut points = vec![corner, w];
    let mut chis = vec![Cx::new(T::zero(), T::zero()), chi];
    let nsing = hull.a().len();
    let tenth: T = lit(0.1);
    for _ in 0..opts.max_steps {
        let dmin = (0..nsing).fold(T::infinity(), |m, j| m.min((w - hull.singularity(j)).norm()));
        let ds = opts.max_step.min(tenth * dmin).min(opts.max_step * w.norm().max(T::one()));
        let q3inv = hull.inv_q0_cubed(w);
        let q3 = q3inv.inv();
        let dir = -imag::<T>() * q3 / q3.norm();
        let mut wn = w + dir * ds;
        let mut chin = chi + step_integral(hull, w, wn, &qopts)?;
        let normal = imag::<T>() * dir;
        let mut converged = chin.im.abs() < opts.tol;
        for _ in 0..20 {
            if converged {
                break;
            }
            let deriv = (imag::<T>() * hull.inv_q0_cubed(wn) * normal).im;
            if deriv == T::zero() || !deriv.is_finite() {
                break;
            }
            let t = -chin.im / deriv;
            let wt = wn + normal * t;
            chin = chin + step_integral(hull, wn, wt, &qopts)?;
            wn = wt;
            converged = chin.im.abs() < opts.tol;
        }
        if !converged {
            return Err(Error::CorrectorDiverged { re: to_f64(w.re), im: to_f64(w.im) });
        }
        if wn.im <= T::zero() {
            let f = w.im / (w.im - wn.im);
            let x = w.re + f * (wn.re - w.re);
            let hit = Cx::new(x, T::zero());
            let slope = ((wn - w).im / (wn - w).norm()).abs();
            points.push(hit);
            chis.push(chi + step_integral(hull, w, hit, &qopts).unwrap_or(chin - chi));
            let termination = if x > T::zero() { Termination::FreeSurfaceHit(x) } else { Termination::HullHit(x) };
            let near_corner = (0..nsing).any(|j| (hit - hull.singularity(j)).norm() < indent);
            return Ok(StokesTrace {
                corner: k,
                emergence_angle: nu,
                points,
                chi_along: chis,
                termination,
                grazing: slope < opts.grazing_angle.sin() || near_corner,
            });
        }
        if let Some(j) = (0..nsing).find(|&j| j != k && (wn - hull.singularity(j)).norm() < indent) {
            points.push(wn);
            chis.push(chin);
            return Ok(StokesTrace { corner: k, emergence_angle: nu, points, chi_along: chis, termination: Termination::HitSingularity(j), grazing: false });
        }
        w = wn;
        chi = chin;
        points.push(w);
        chis.push(chi);
        if w.norm() > opts.r_max {
            return Ok(StokesTrace { corner: k, emergence_angle: nu, points, chi_along: chis, termination: Termination::Escaped(w.norm()), grazing: false });
        }
    }
    Ok(StokesTrace { corner: k, emergence_angle: nu, points, chi_along: chis, termination: Termination::StepLimit, grazing: false })
}

#[derive(Debug, Clone, PartialEq)]
pub enum CornerStatus<T> {
    /// A Stokes line reaches the free surface at `phi_hit`.
    Active { phi_hit: T },
    Inactive,
    /// `sigma <= -1/3`: no singulant, so no Stokes line.
    NoSingulant,
    Undetermined(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CornerCensus<T> {
    pub corner: usize,
    pub traces: Vec<StokesTrace<T>>,
    pub status: CornerStatus<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSet<T> {
    pub corners: Vec<CornerCensus<T>>,
}

impl<T: Real> ActiveSet<T> {
    /// Indices of corners in the active set.
    pub fn members(&self) -> Vec<usize> {
        self.corners.iter().filter(|c| matches!(c.status, CornerStatus::Active { .. })).map(|c| c.corner).collect()
    }

    pub fn undetermined(&self) -> Vec<usize> {
        self.corners.iter().filter(|c| matches!(c.status, CornerStatus::Undetermined(_))).map(|c| c.corner).collect()
    }

    pub fn status(&self, k: usize) -> Option<&CornerStatus<T>> {
        self.corners.iter().find(|c| c.corner == k).map(|c| &c.status)
    }

    /// Furthest free-surface point reached by a Stokes line.
    pub fn last_hit(&self) -> Option<T> {
        self.corners
            .iter()
            .filter_map(|c| match c.status {
                CornerStatus::Active { phi_hit } => Some(phi_hit),
                _ => None,
            })
            .fold(None, |m: Option<T>, v| Some(m.map_or(v, |m| m.max(v))))
    }
}

/// Traces every Stokes line of every corner (including the stagnation
/// point) and classifies the corners.
pub fn active_corners<T: Real>(hull: &Hull<T>, opts: &TraceOptions<T>) -> Result<ActiveSet<T>> {
    let nsing = hull.a().len();
    let mut jobs = Vec::new();
    let mut angles = vec![None; nsing];
    for (k, slot) in angles.iter_mut().enumerate() {
        match emergence_angles(hull, k) {
            Ok(v) => {
                for &nu in &v {
                    jobs.push((k, nu));
                }
                *slot = Some(v);
            }
            Err(Error::NoSingulant(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let results: Vec<(usize, Result<StokesTrace<T>>)> =
        jobs.par_iter().map(|&(k, nu)| (k, trace_stokes_line(hull, k, nu, opts))).collect();
    let mut corners = Vec::with_capacity(nsing);
    for (k, angles) in angles.iter().enumerate() {
        let mut traces = Vec::new();
        let mut failure = None;
        for (_, r) in results.iter().filter(|(j, _)| *j == k) {
            match r {
                Ok(t) => traces.push(t.clone()),
                Err(e) => failure = Some(e.to_string()),
            }
        }
        let status = if angles.is_none() {
            CornerStatus::NoSingulant
        } else if let Some(t) = traces.iter().find(|t| t.hits_free_surface().is_some() && !t.grazing) {
            CornerStatus::Active { phi_hit: t.hits_free_surface().unwrap() }
        } else if let Some(msg) = failure {
            CornerStatus::Undetermined(msg)
        } else if traces.iter().any(|t| t.grazing) {
            CornerStatus::Undetermined("grazing intersection with the real axis".into())
        } else if traces.iter().any(|t| t.termination == Termination::StepLimit) {
            CornerStatus::Undetermined("step limit reached".into())
        } else {
            CornerStatus::Inactive
        };
        corners.push(CornerCensus { corner: k, traces, status });
    }
    Ok(ActiveSet { corners })
}
