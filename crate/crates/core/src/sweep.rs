//! Parameter sweeps comparing simplified-model numerics with the asymptotic
//! wave amplitude.

use crate::error::{Error, Result};
use crate::hull::{Hull, HullSpec};
use crate::lateorder::{gamma, OmegaCache};
use crate::measure::{measure_waves_with, MeasureOptions, WaveMeasurement};
use crate::scalar::{lit, to_f64, Real};
use crate::sim::{default_phi_max, solve_simplified};
use crate::singulant::re_chi1_residue;
use crate::stokes::{active_corners, TraceOptions};
use crate::wave::{downstream_amplitude, CornerAmplitude, Model};
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct SweepOptions<T> {
    /// End of the integration interval; `None` picks the solver default.
    pub phi_max: Option<T>,
    pub tol: T,
    pub trace: TraceOptions<T>,
    pub measure: MeasureOptions<T>,
}

impl<T: Real> Default for SweepOptions<T> {
    fn default() -> Self {
        SweepOptions {
            phi_max: None,
            tol: lit(1e-12),
            trace: TraceOptions::default(),
            measure: MeasureOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint<T> {
    /// Swept parameter (`a_1` or `eps`).
    pub param: T,
    pub eps: T,
    pub numerical: Option<WaveMeasurement<T>>,
    pub asymptotic: Option<T>,
    /// Prediction of the hull with its two corners merged into one.
    pub merged: Option<T>,
    pub components: Vec<CornerAmplitude<T>>,
    /// Rejected measurements and predictions, one entry each.
    pub flags: Vec<String>,
}

impl<T: Real> SweepPoint<T> {
    pub fn numerical_amplitude(&self) -> Option<T> {
        self.numerical.as_ref().map(|m| m.amplitude)
    }
}

fn flag_or_fail<T>(r: Result<T>, what: &str, flags: &mut Vec<String>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e @ (Error::MeasurementRejected(_) | Error::BelowFloor { .. } | Error::UndeterminedCorner(_))) => {
            flags.push(format!("{what}: {e}"));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn evaluate<T: Real>(hull: &Hull<T>, param: T, eps: T, opts: &SweepOptions<T>, cache: &OmegaCache) -> Result<SweepPoint<T>> {
    let mut flags = Vec::new();
    let active = active_corners(hull, &opts.trace)?;
    for k in active.undetermined() {
        flags.push(format!("corner {k}: Stokes census undetermined"));
    }
    let pred = flag_or_fail(downstream_amplitude(hull, &active, eps, Model::Simplified, cache), "asymptotic", &mut flags)?;
    let phi_max = opts.phi_max.unwrap_or_else(|| default_phi_max(eps, active.last_hit()));
    let sol = solve_simplified(hull, eps, phi_max, opts.tol)?;
    let numerical = flag_or_fail(measure_waves_with(&sol, &opts.measure), "numerical", &mut flags)?;
    let (asymptotic, components) = match pred {
        Some(p) => (Some(p.amplitude), p.components),
        None => (None, Vec::new()),
    };
    Ok(SweepPoint { param, eps, numerical, asymptotic, merged: None, components, flags })
}

/// Amplitude predicted for a one-corner hull of angle `sigma1 + sigma2`
/// placed at the angle-weighted mean position of the two corners.
pub fn merged_prediction<T: Real>(sigma: (T, T), a: (T, T), eps: T, opts: &TraceOptions<T>, cache: &OmegaCache) -> Result<T> {
    let s = sigma.0 + sigma.1;
    let am = (sigma.0 * a.0 + sigma.1 * a.1) / s;
    let one = HullSpec::new("merged", &[(T::one(), s)]).normalize()?;
    let active = active_corners(&one, opts)?;
    Ok(downstream_amplitude(&one, &active, eps / am, Model::Simplified, cache)?.amplitude)
}

/// Two-corner hulls with angles `sigma` and corners at `a_1` and `1 - a_1`.
pub fn sweep_corner<T: Real>(
    sigma: (T, T),
    a1_grid: &[T],
    eps: T,
    opts: &SweepOptions<T>,
    cache: &OmegaCache,
) -> Result<Vec<SweepPoint<T>>> {
    let half: T = lit(0.5);
    if let Some(&bad) = a1_grid.iter().find(|&&a| !(a > half && a < T::one())) {
        return Err(Error::InvalidHull(format!("a1 = {} outside (0.5, 1)", to_f64(bad))));
    }
    a1_grid
        .par_iter()
        .map(|&a1| {
            let a2 = T::one() - a1;
            let hull = HullSpec::new(format!("a1={}", to_f64(a1)), &[(a1, sigma.0), (a2, sigma.1)]).normalize()?;
            let mut p = evaluate(&hull, a1, eps, opts, cache)?;
            p.merged = flag_or_fail(merged_prediction(sigma, (a1, a2), eps, &opts.trace, cache), "merged", &mut p.flags)?;
            Ok(p)
        })
        .collect()
}

/// Straight-line fit of `log A + gamma log eps` against `1/eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit<T> {
    pub slope: T,
    pub intercept: T,
    /// `-Re chi_1` from the residue formula.
    pub expected_slope: T,
    pub gamma: T,
    pub points: usize,
}

impl<T: Real> ExponentFit<T> {
    pub fn relative_error(&self) -> T {
        ((self.slope - self.expected_slope) / self.expected_slope).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSweep<T> {
    pub points: Vec<SweepPoint<T>>,
    /// Absent when fewer than two amplitudes were measured.
    pub fit: Option<ExponentFit<T>>,
}

pub fn sweep_epsilon<T: Real>(hull: &Hull<T>, eps_grid: &[T], opts: &SweepOptions<T>, cache: &OmegaCache) -> Result<EpsilonSweep<T>> {
    let points: Vec<SweepPoint<T>> =
        eps_grid.par_iter().map(|&eps| evaluate(hull, eps, eps, opts, cache)).collect::<Result<_>>()?;
    let g = gamma(hull.sigma()[0])?;
    let data: Vec<(T, T)> = points
        .iter()
        .filter_map(|p| p.numerical_amplitude().map(|a| (T::one() / p.eps, a.ln() + g * p.eps.ln())))
        .collect();
    let fit = fit_line(&data).map(|(slope, intercept)| ExponentFit {
        slope,
        intercept,
        expected_slope: -re_chi1_residue(hull),
        gamma: g,
        points: data.len(),
    });
    Ok(EpsilonSweep { points, fit })
}

/// Least-squares `(slope, intercept)`.
pub fn fit_line<T: Real>(data: &[(T, T)]) -> Option<(T, T)> {
    if data.len() < 2 {
        return None;
    }
    let n: T = lit(data.len() as f64);
    let mx = data.iter().fold(T::zero(), |a, p| a + p.0) / n;
    let my = data.iter().fold(T::zero(), |a, p| a + p.1) / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for &(x, y) in data {
        sxy = sxy + (x - mx) * (y - my);
        sxx = sxx + (x - mx) * (x - mx);
    }
    if sxx == T::zero() {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_is_exact_on_a_line() {
        let d: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 3.0 - 2.0 * i as f64)).collect();
        let (m, c) = fit_line(&d).unwrap();
        assert!((m + 2.0).abs() < 1e-14 && (c - 3.0).abs() < 1e-14);
        assert!(fit_line(&d[..1]).is_none());
    }

    #[test]
    fn grid_outside_the_family_is_refused() {
        let cache = OmegaCache::new(1e-10);
        let r = sweep_corner((0.25, 0.25), &[0.5], 0.2, &SweepOptions::default(), &cache);
        assert!(matches!(r, Err(Error::InvalidHull(_))));
    }

    #[test]
    fn merged_prediction_scales_eps_by_position() {
        let cache = OmegaCache::new(1e-10);
        let opts = TraceOptions::default();
        let a: f64 = merged_prediction((0.25, 0.25), (0.6, 0.4), 0.1, &opts, &cache).unwrap();
        let b = merged_prediction((0.25, 0.25), (0.5, 0.5), 0.1, &opts, &cache).unwrap();
        let one = HullSpec::new("one", &[(1.0, 0.5)]).normalize().unwrap();
        let act = active_corners(&one, &opts).unwrap();
        let c = downstream_amplitude(&one, &act, 0.2, Model::Simplified, &cache).unwrap().amplitude;
        assert!((a - b).abs() < 1e-12 * b && (b - c).abs() < 1e-12 * c);
    }
}
