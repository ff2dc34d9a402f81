//! Downstream wave amplitude and wavelength from a sampled speed profile.
//!
//! The window is cut into blocks. Each block is fitted by a cubic trend in
//! `1/phi` plus `A cos(kappa phi + psi)`, with `kappa` found by a scan followed by a
//! golden-section refinement. Block amplitudes and wavenumbers are then
//! extrapolated linearly in `1/phi` to the far field.

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};
use crate::solution::FreeSurfaceSolution;

#[derive(Debug, Clone, Copy)]
pub struct MeasureOptions<T> {
    /// Window as fractions of the last sample position.
    pub window: (T, T),
    pub blocks: usize,
    /// Relative half-width of the wavenumber search around `1/eps`.
    pub kappa_span: T,
    pub scan_points: usize,
    /// Largest accepted fit residual relative to the amplitude.
    pub max_rel_residual: T,
    /// Largest accepted wavelength deviation from `2 pi eps`.
    pub max_wavelength_dev: T,
}

impl<T: Real> Default for MeasureOptions<T> {
    fn default() -> Self {
        MeasureOptions {
            window: (lit(0.5), T::one()),
            blocks: 4,
            kappa_span: lit(0.25),
            scan_points: 51,
            max_rel_residual: lit(0.05),
            max_wavelength_dev: lit(0.2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockFit<T> {
    pub center: T,
    pub amplitude: T,
    pub kappa: T,
    pub phase: T,
    /// RMS misfit.
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveMeasurement<T> {
    pub amplitude: T,
    pub wavelength: T,
    pub phase: T,
    pub fit_residual: T,
    pub window: (T, T),
    pub blocks: Vec<BlockFit<T>>,
}

/// Measures the waves in `sol` with a noise floor of ten times its tolerance.
pub fn measure_waves<T: Real>(sol: &FreeSurfaceSolution<T>) -> Result<WaveMeasurement<T>> {
    measure_waves_with(sol, &MeasureOptions::default())
}

pub fn measure_waves_with<T: Real>(sol: &FreeSurfaceSolution<T>, opts: &MeasureOptions<T>) -> Result<WaveMeasurement<T>> {
    let floor = lit::<T>(10.0) * sol.meta.tol;
    measure_series(&sol.phi, &sol.speed(), sol.eps, floor, opts)
}

/// Fits samples `y(phi)` whose waves are expected near wavenumber `1/eps`.
pub fn measure_series<T: Real>(phi: &[T], y: &[T], eps: T, floor: T, opts: &MeasureOptions<T>) -> Result<WaveMeasurement<T>> {
    if phi.len() != y.len() || phi.len() < 16 {
        return Err(Error::MeasurementRejected("too few samples".into()));
    }
    if opts.blocks == 0 {
        return Err(Error::MeasurementRejected("no blocks requested".into()));
    }
    let end = *phi.last().unwrap();
    let (lo, hi) = (end * opts.window.0, end * opts.window.1);
    let width = (hi - lo) / lit(opts.blocks as f64);
    let lambda = T::TAU() * eps;
    if width < lit::<T>(2.0) * lambda {
        return Err(Error::MeasurementRejected(format!(
            "blocks of length {} hold fewer than two wavelengths",
            to_f64(width)
        )));
    }
    let mut blocks = Vec::with_capacity(opts.blocks);
    for b in 0..opts.blocks {
        let b0 = lo + width * lit(b as f64);
        let b1 = b0 + width;
        let idx: Vec<usize> = (0..phi.len()).filter(|&i| phi[i] >= b0 && phi[i] <= b1).collect();
        if idx.len() < 12 {
            return Err(Error::MeasurementRejected("block holds too few samples".into()));
        }
        let xs: Vec<T> = idx.iter().map(|&i| phi[i]).collect();
        let ys: Vec<T> = idx.iter().map(|&i| y[i]).collect();
        blocks.push(fit_block(&xs, &ys, eps, opts)?);
    }
    let (amplitude, kappa) = if blocks.len() == 1 {
        (blocks[0].amplitude, blocks[0].kappa)
    } else {
        let inv: Vec<T> = blocks.iter().map(|b| T::one() / b.center).collect();
        (
            extrapolate(&inv, &blocks.iter().map(|b| b.amplitude).collect::<Vec<_>>()),
            extrapolate(&inv, &blocks.iter().map(|b| b.kappa).collect::<Vec<_>>()),
        )
    };
    let fit_residual = blocks.iter().fold(T::zero(), |m, b| m.max(b.residual));
    let last = *blocks.last().unwrap();
    let m = WaveMeasurement {
        amplitude: amplitude.abs(),
        wavelength: T::TAU() / kappa,
        phase: last.phase,
        fit_residual,
        window: (lo, hi),
        blocks,
    };
    let weakest = m.blocks.iter().fold(T::infinity(), |a, b| a.min(b.amplitude));
    if weakest < floor || m.amplitude < floor {
        return Err(Error::BelowFloor { amplitude: to_f64(m.amplitude.min(weakest)), floor: to_f64(floor) });
    }
    if m.fit_residual > opts.max_rel_residual * m.amplitude {
        return Err(Error::MeasurementRejected(format!(
            "fit residual {:e} exceeds {} of amplitude {:e}",
            to_f64(m.fit_residual),
            to_f64(opts.max_rel_residual),
            to_f64(m.amplitude)
        )));
    }
    if ((m.wavelength - lambda) / lambda).abs() > opts.max_wavelength_dev {
        return Err(Error::MeasurementRejected(format!(
            "wavelength {} far from {}",
            to_f64(m.wavelength),
            to_f64(lambda)
        )));
    }
    Ok(m)
}

/// Intercept of the least-squares line through `(x, y)`.
fn extrapolate<T: Real>(x: &[T], y: &[T]) -> T {
    let n: T = lit(x.len() as f64);
    let mx = x.iter().fold(T::zero(), |a, &v| a + v) / n;
    let my = y.iter().fold(T::zero(), |a, &v| a + v) / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        sxy = sxy + (a - mx) * (b - my);
        sxx = sxx + (a - mx) * (a - mx);
    }
    if sxx == T::zero() {
        return my;
    }
    my - sxy / sxx * mx
}

struct Fit<T> {
    coef: Vec<T>,
    rss: T,
}

const COLS: usize = 6;

fn fit_fixed<T: Real>(x: &[T], y: &[T], kappa: T, center: T, half: T, mean: T) -> Option<Fit<T>> {
    let n = x.len();
    let mut a = Vec::with_capacity(n * COLS);
    // trend variable: 1/phi mapped onto roughly [-1, 1]
    let scale = center / half;
    for &p in x {
        let t = (center / p - T::one()) * scale;
        let (s, c) = (kappa * p).sin_cos();
        a.extend_from_slice(&[T::one(), t, t * t, t * t * t, c, s]);
    }
    let b: Vec<T> = y.iter().map(|&v| v - mean).collect();
    let coef = T::lstsq(&a, n, COLS, &b)?;
    let mut rss = T::zero();
    for i in 0..n {
        let r = (0..COLS).fold(T::zero(), |acc, j| acc + a[i * COLS + j] * coef[j]) - b[i];
        rss = rss + r * r;
    }
    Some(Fit { coef, rss })
}

fn fit_block<T: Real>(x: &[T], y: &[T], eps: T, opts: &MeasureOptions<T>) -> Result<BlockFit<T>> {
    let (x0, x1) = (x[0], *x.last().unwrap());
    let center = (x0 + x1) / lit(2.0);
    let half = ((x1 - x0) / lit(2.0)).max(T::min_positive_value());
    let mean = y.iter().fold(T::zero(), |a, &v| a + v) / lit(y.len() as f64);
    let k0 = T::one() / eps;
    let klo = k0 * (T::one() - opts.kappa_span);
    let khi = k0 * (T::one() + opts.kappa_span);
    let npts = opts.scan_points.max(3);
    let dk = (khi - klo) / lit((npts - 1) as f64);
    let rss = |k: T| fit_fixed(x, y, k, center, half, mean).map(|f| f.rss).unwrap_or(T::infinity());
    let mut best = (T::infinity(), klo);
    for i in 0..npts {
        let k = klo + dk * lit(i as f64);
        let r = rss(k);
        if r < best.0 {
            best = (r, k);
        }
    }
    // golden section on the bracket around the best scan point
    let g: T = lit(0.5 * (5f64.sqrt() - 1.0));
    let (mut a, mut b) = ((best.1 - dk).max(klo), (best.1 + dk).min(khi));
    let mut c = b - (b - a) * g;
    let mut d = a + (b - a) * g;
    let (mut fc, mut fd) = (rss(c), rss(d));
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * g;
            fc = rss(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * g;
            fd = rss(d);
        }
        if (b - a) < k0 * lit(1e-12) {
            break;
        }
    }
    let kappa = (a + b) / lit(2.0);
    let fit = fit_fixed(x, y, kappa, center, half, mean)
        .ok_or_else(|| Error::MeasurementRejected("singular least-squares system".into()))?;
    let (cc, ss) = (fit.coef[COLS - 2], fit.coef[COLS - 1]);
    Ok(BlockFit {
        center,
        amplitude: cc.hypot(ss),
        kappa,
        phase: (-ss).atan2(cc),
        residual: (fit.rss / lit(x.len() as f64)).sqrt(),
    })
}
