//! Divergence data of the late-order terms near a corner: the exponent
//! `gamma = 6 sigma / (1 + 3 sigma)` and the prefactor limit
//! `Omega = lim phi_n / Gamma(n + gamma)` of the quadratic recurrence
//! `phi_n = sum_{m<n} (m + beta) phi_m phi_{n-m-1}`, `beta = 2 sigma / (1 + 3 sigma)`.

use crate::error::{Error, Result};
use crate::hull::ExactAngle;
use crate::scalar::{lit, to_f64, Real};
use num_rational::Ratio;
use statrs::function::gamma::ln_gamma;
use std::collections::HashMap;
use std::sync::RwLock;

pub const DEFAULT_N_MAX: usize = 2000;
const N_CAP: usize = 32_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceData<T> {
    pub sigma: T,
    pub gamma: T,
    /// Signed limit; negative for `sigma < 0`.
    pub omega: T,
    pub n_used: usize,
    pub omega_error_est: T,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > -1.0 / 3.0) || !sigma.is_finite() {
        return Err(Error::SigmaOutOfRange(sigma));
    }
    Ok(())
}

pub fn gamma<T: Real>(sigma: T) -> Result<T> {
    check_sigma(to_f64(sigma))?;
    let three: T = lit(3.0);
    Ok(lit::<T>(6.0) * sigma / (T::one() + three * sigma))
}

/// Exact exponent for a rational angle.
pub fn gamma_exact(sigma: ExactAngle) -> Result<ExactAngle> {
    if sigma <= Ratio::new(-1, 3) {
        return Err(Error::SigmaOutOfRange(sigma.to_f64_lossy()));
    }
    Ok(Ratio::from_integer(6) * sigma / (Ratio::from_integer(1) + Ratio::from_integer(3) * sigma))
}

trait Lossy {
    fn to_f64_lossy(&self) -> f64;
}

impl Lossy for ExactAngle {
    fn to_f64_lossy(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// `ln |Gamma(x)|` and the sign of `Gamma(x)`; `None` at the poles.
fn ln_gamma_signed(x: f64) -> Option<(f64, f64)> {
    if x > 0.0 {
        return Some((ln_gamma(x), 1.0));
    }
    if x == x.floor() {
        return None;
    }
    // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    let s = (std::f64::consts::PI * x).sin();
    Some((std::f64::consts::PI.ln() - s.abs().ln() - ln_gamma(1.0 - x), s.signum()))
}

/// Recurrence values in scaled form.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiSequence {
    pub sigma: f64,
    pub gamma: f64,
    /// `phi_n / n!`, bounded for all `n`.
    pub scaled: Vec<f64>,
    /// `phi_n / Gamma(n + gamma)`; zero where `Gamma(n + gamma)` has a pole.
    pub ratio: Vec<f64>,
}

impl PhiSequence {
    /// Unscaled `phi_n` (overflows to infinity for large `n`).
    pub fn phi(&self, n: usize) -> f64 {
        self.scaled[n] * ln_gamma(n as f64 + 1.0).exp()
    }
}

/// Runs the recurrence up to `n_max` in the scaled variable `phi_n / n!`.
pub fn phi_sequence(sigma: f64, n_max: usize) -> Result<PhiSequence> {
    check_sigma(sigma)?;
    if n_max == 0 {
        return Err(Error::Unsupported("n_max must be at least 1".into()));
    }
    let beta = 2.0 * sigma / (1.0 + 3.0 * sigma);
    let g = 3.0 * beta;
    let lnf: Vec<f64> = (0..=n_max).map(|i| ln_gamma(i as f64 + 1.0)).collect();
    let mut rho = vec![0.0; n_max + 1];
    rho[0] = 1.0;
    for n in 1..=n_max {
        let mut s = 0.0;
        for m in 0..n {
            let w = (lnf[m] + lnf[n - m - 1] - lnf[n]).exp();
            s += (m as f64 + beta) * rho[m] * rho[n - m - 1] * w;
        }
        if !s.is_finite() {
            return Err(Error::RecurrenceOverflow(n));
        }
        rho[n] = s;
    }
    let ratio = rho
        .iter()
        .enumerate()
        .map(|(n, &r)| match ln_gamma_signed(n as f64 + g) {
            Some((lg, sg)) => r * (lnf[n] - lg).exp() * sg,
            None => 0.0,
        })
        .collect();
    Ok(PhiSequence { sigma, gamma: g, scaled: rho, ratio })
}

/// Polynomial extrapolation to `1/n -> 0` through `r_n, r_{n/2}, ..., r_{n/2^levels}`.
pub fn richardson(ratio: &[f64], n: usize, levels: usize) -> f64 {
    let xs: Vec<f64> = (0..=levels).map(|j| 1.0 / (n >> j) as f64).collect();
    let mut ys: Vec<f64> = (0..=levels).map(|j| ratio[n >> j]).collect();
    // Neville at x = 0
    for step in 1..=levels {
        for i in 0..=(levels - step) {
            ys[i] = (xs[i + step] * ys[i] - xs[i] * ys[i + 1]) / (xs[i + step] - xs[i]);
        }
    }
    ys[0]
}

/// Levin u-transform of the sequence `s_n` using terms from `start` on.
/// Used as an independent accelerator to cross-check the Richardson limit.
pub fn levin_u(seq: &[f64], start: usize, order: usize) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    let n = start as f64;
    let mut binom = 1.0;
    for j in 0..=order {
        let m = start + j;
        let a = seq[m] - seq[m - 1];
        let omega = (m as f64) * a;
        let c = if j % 2 == 0 { 1.0 } else { -1.0 } * binom * ((n + j as f64) / (n + order as f64)).powi(order as i32 - 1);
        num += c * seq[m] / omega;
        den += c / omega;
        binom = binom * (order - j) as f64 / (j + 1) as f64;
    }
    num / den
}

/// Limit `Omega(sigma)` with a Cauchy-gap error estimate below `tol`.
pub fn omega<T: Real>(sigma: T, tol: T) -> Result<DivergenceData<T>> {
    let s = to_f64(sigma);
    check_sigma(s)?;
    if !(s < 1.0) {
        return Err(Error::SigmaOutOfRange(s));
    }
    let tol64 = to_f64(tol);
    let mut n = DEFAULT_N_MAX;
    loop {
        let seq = phi_sequence(s, n)?;
        let hi = richardson(&seq.ratio, n, 3);
        let lo = richardson(&seq.ratio, n / 2, 3);
        let gap = (hi - lo).abs();
        if gap < tol64 {
            if !(hi.abs() > 10.0 * gap) || hi == 0.0 {
                return Err(Error::OmegaZero { omega: hi, err: gap });
            }
            return Ok(DivergenceData {
                sigma,
                gamma: lit(seq.gamma),
                omega: lit(hi),
                n_used: n,
                omega_error_est: lit(gap),
            });
        }
        if n * 2 > N_CAP {
            return Err(Error::OmegaNonConvergence { gap, tol: tol64, n });
        }
        n *= 2;
    }
}

/// Concurrent cache of `Omega` values keyed by the bit pattern of `sigma`.
#[derive(Debug, Default)]
pub struct OmegaCache {
    tol: f64,
    map: RwLock<HashMap<u64, DivergenceData<f64>>>,
}

impl OmegaCache {
    pub fn new(tol: f64) -> Self {
        OmegaCache { tol, map: RwLock::new(HashMap::new()) }
    }

    pub fn get<T: Real>(&self, sigma: T) -> Result<DivergenceData<T>> {
        let s = to_f64(sigma);
        let key = s.to_bits();
        if let Some(d) = self.map.read().expect("omega cache poisoned").get(&key) {
            return Ok(cast(d, sigma));
        }
        let d = omega(s, self.tol)?;
        self.map.write().expect("omega cache poisoned").entry(key).or_insert(d);
        Ok(cast(&d, sigma))
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("omega cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn cast<T: Real>(d: &DivergenceData<f64>, sigma: T) -> DivergenceData<T> {
    DivergenceData {
        sigma,
        gamma: lit(d.gamma),
        omega: lit(d.omega),
        n_used: d.n_used,
        omega_error_est: lit(d.omega_error_est),
    }
}
