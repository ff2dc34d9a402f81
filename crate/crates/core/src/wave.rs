//! Assembled exponentially small waves: per-corner components, their sum on
//! the free surface, the downstream resultant and the dominance analysis.

use crate::error::{Error, Result};
use crate::hilbert::{hilbert_integral, DEFAULT_ARCH_HEIGHT};
use crate::hull::Hull;
use crate::lateorder::{DivergenceData, OmegaCache};
use crate::scalar::{lit, to_f64, wrap_angle, Cx, Real};
use crate::singulant::{chi, chi_between};
use crate::stokes::{ActiveSet, CornerStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    /// Full boundary-integral model, including the Hilbert-transform terms.
    Full,
    /// Simplified nonlinear model without the Hilbert-transform coupling.
    Simplified,
}

impl std::str::FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Model::Full),
            "simplified" => Ok(Model::Simplified),
            _ => Err(Error::Unsupported(format!("unknown model {s:?}"))),
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Model::Full => "full",
            Model::Simplified => "simplified",
        })
    }
}

/// One corner's wave evaluated at a free-surface point `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveComponent<T> {
    pub corner: usize,
    pub model: Model,
    pub w: T,
    pub eps: T,
    pub gamma: T,
    /// Everything multiplying the exponential and the cosine.
    pub amplitude_coeff: T,
    pub chi: Cx<T>,
    /// Phase offset in (-pi, pi].
    pub phase_const: T,
    /// `-Re chi / eps`.
    pub exponent: T,
    /// Hilbert integral anchored at the corner (full model only).
    pub hilbert: Option<Cx<T>>,
}

impl<T: Real> WaveComponent<T> {
    /// `amplitude_coeff * exp(exponent) * cos(-Im chi / eps + phase_const)`.
    pub fn value(&self) -> T {
        self.envelope() * self.phase().cos()
    }

    pub fn envelope(&self) -> T {
        self.amplitude_coeff * self.exponent.exp()
    }

    /// Total oscillation phase at `w`.
    pub fn phase(&self) -> T {
        -self.chi.im / self.eps + self.phase_const
    }

    /// Power of `q0(w)` that makes the envelope independent of `w` downstream.
    fn downstream_power(&self) -> i32 {
        match self.model {
            Model::Full => 2,
            Model::Simplified => 5,
        }
    }
}

fn require_active<T: Real>(active: &ActiveSet<T>, k: usize) -> Result<()> {
    match active.status(k) {
        Some(CornerStatus::Active { .. }) => Ok(()),
        Some(CornerStatus::Undetermined(_)) => Err(Error::UndeterminedCorner(k)),
        Some(CornerStatus::NoSingulant) => Err(Error::NoSingulant(k)),
        Some(CornerStatus::Inactive) => Err(Error::InactiveCorner(k)),
        None => Err(Error::CornerIndex(k)),
    }
}

/// Wave from corner `k` at `w > 0`.
pub fn wave_component<T: Real>(
    hull: &Hull<T>,
    active: &ActiveSet<T>,
    k: usize,
    w: T,
    eps: T,
    model: Model,
    div: &DivergenceData<T>,
) -> Result<WaveComponent<T>> {
    require_active(active, k)?;
    if !(eps > T::zero()) {
        return Err(Error::InvalidEpsilon(to_f64(eps)));
    }
    if !(w > T::zero()) {
        return Err(Error::Unsupported("waves are evaluated on the free surface w > 0".into()));
    }
    let s = hull.sigma()[k];
    if (div.sigma - s).abs() > lit::<T>(1e-12) * (T::one() + s.abs()) {
        return Err(Error::Unsupported("divergence data belongs to a different corner angle".into()));
    }
    if model == Model::Full && k == hull.corners() {
        return Err(Error::Unsupported("full-model wave from the stagnation point".into()));
    }
    let g = div.gamma;
    let three: T = lit(3.0);
    let six: T = lit(6.0);
    let c = hull.local_prefactor(k)?;
    let wc = Cx::new(w, T::zero());
    let chi_w = chi(hull, k, wc, None)?;
    let q0 = hull.q0_real(w);
    let base = c.norm().powf(six - three * g) * div.omega.abs()
        / (lit::<T>(2.0) * (T::one() + three * s).powf(g))
        / eps.powf(g)
        / q0.powi(5);
    let mut phase = T::PI() * g / lit(2.0) + (six - three * g) * hull.theta()[k] + T::PI();
    if div.omega < T::zero() {
        phase = phase + T::PI();
    }
    let (coeff, hilbert) = match model {
        Model::Simplified => (T::TAU() * base, None),
        Model::Full => {
            let i = hilbert_integral(hull, k, wc, lit(DEFAULT_ARCH_HEIGHT))?;
            phase = phase + T::FRAC_PI_2() + i.re;
            (lit::<T>(4.0) * T::PI() * base * (-i.im).exp(), Some(i))
        }
    };
    Ok(WaveComponent {
        corner: k,
        model,
        w,
        eps,
        gamma: g,
        amplitude_coeff: coeff,
        chi: chi_w,
        phase_const: wrap_angle(phase),
        exponent: -chi_w.re / eps,
        hilbert,
    })
}

fn components<T: Real>(
    hull: &Hull<T>,
    active: &ActiveSet<T>,
    w: T,
    eps: T,
    model: Model,
    cache: &OmegaCache,
) -> Result<Vec<WaveComponent<T>>> {
    if let Some(&k) = active.undetermined().first() {
        return Err(Error::UndeterminedCorner(k));
    }
    active
        .members()
        .into_iter()
        .map(|k| {
            let div = cache.get(hull.sigma()[k])?;
            wave_component(hull, active, k, w, eps, model, &div)
        })
        .collect()
}

/// Sum of the active corners' waves at `w > 0`.
pub fn total_wave<T: Real>(
    hull: &Hull<T>,
    active: &ActiveSet<T>,
    w: T,
    eps: T,
    model: Model,
    cache: &OmegaCache,
) -> Result<T> {
    Ok(components(hull, active, w, eps, model, cache)?.iter().fold(T::zero(), |acc, c| acc + c.value()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerAmplitude<T> {
    pub corner: usize,
    pub amplitude: T,
    /// Phase relative to the reference point, in (-pi, pi].
    pub phase: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Downstream<T> {
    pub amplitude: T,
    pub components: Vec<CornerAmplitude<T>>,
}

/// Reference point for the downstream phasor sum.
pub const REFERENCE_POINT: f64 = 1.0;

/// Amplitude of the combined downstream wave, where `q0 -> 1` and all
/// corners share the wavenumber `1/eps`.
pub fn downstream_amplitude<T: Real>(
    hull: &Hull<T>,
    active: &ActiveSet<T>,
    eps: T,
    model: Model,
    cache: &OmegaCache,
) -> Result<Downstream<T>> {
    let w: T = lit(REFERENCE_POINT);
    let q0 = hull.q0_real(w);
    let comps = components(hull, active, w, eps, model, cache)?;
    let mut sum = Cx::new(T::zero(), T::zero());
    let mut out = Vec::with_capacity(comps.len());
    for c in &comps {
        let amp = c.envelope() * q0.powi(c.downstream_power());
        let ph = wrap_angle(c.phase());
        sum = sum + Cx::from_polar(amp, ph);
        out.push(CornerAmplitude { corner: c.corner, amplitude: amp, phase: ph });
    }
    Ok(Downstream { amplitude: sum.norm(), components: out })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerExponent<T> {
    pub corner: usize,
    /// `Im int dphi / q0^3` from the reference corner to this one.
    pub im_integral: Option<T>,
    pub gamma: Option<T>,
    /// `ln` of the simplified-model downstream prefactor at the given `eps`.
    pub log_prefactor: Option<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Dominant(usize),
    PossibleCancellation(usize, usize),
    /// Equal exponents and orders but necessarily unequal prefactors.
    CancellationImpossible(usize, usize),
    /// Tied exponents with different orders, or no usable exponents.
    MixedOrders,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport<T> {
    /// Corner the integrals are measured from: the first with a singulant.
    pub reference: Option<usize>,
    pub corners: Vec<CornerExponent<T>>,
    pub verdict: Verdict,
    /// Whether the verdict came from the angle conditions rather than the
    /// raw exponents.
    pub from_angles: bool,
}

/// Compares the exponential orders of the corners' waves.
pub fn dominance_analysis<T: Real>(hull: &Hull<T>, eps: T, cache: &OmegaCache) -> Result<DominanceReport<T>> {
    if !(eps > T::zero()) {
        return Err(Error::InvalidEpsilon(to_f64(eps)));
    }
    let n = hull.corners();
    let third: T = lit(1.0 / 3.0);
    let has_singulant = |k: usize| hull.sigma()[k] > -third;
    let reference = (0..n).find(|&k| has_singulant(k));
    let mut corners = Vec::with_capacity(n);
    for k in 0..n {
        let s = hull.sigma()[k];
        let (im_integral, gamma, log_prefactor) = match reference {
            Some(r) if has_singulant(k) => {
                let im = if k < r { None } else { Some(-chi_between(hull, r, k)?.re) };
                let div = cache.get(s)?;
                let g = div.gamma;
                let three: T = lit(3.0);
                let lp = (lit::<T>(6.0) - three * g) * hull.local_prefactor(k)?.norm().ln() + div.omega.abs().ln()
                    - lit::<T>(2.0).ln()
                    - g * (T::one() + three * s).ln()
                    + T::TAU().ln()
                    - g * eps.ln();
                (im, Some(g), Some(lp))
            }
            _ => (None, None, None),
        };
        corners.push(CornerExponent { corner: k, im_integral, gamma, log_prefactor });
    }
    let (verdict, from_angles) = match angle_verdict(hull) {
        Some(v) => (v, true),
        None => (exponent_verdict(&corners), false),
    };
    Ok(DominanceReport { reference, corners, verdict, from_angles })
}

fn close<T: Real>(a: T, b: T, tol: f64) -> bool {
    (a - b).abs() <= lit::<T>(tol) * (T::one() + a.abs().max(b.abs()))
}

/// Verdict from the inclinations alone; `None` when the hull has a
/// non-positive corner angle or turns by more than `2 pi / 3`.
fn angle_verdict<T: Real>(hull: &Hull<T>) -> Option<Verdict> {
    let n = hull.corners();
    let sig = &hull.sigma()[..n];
    let th = &hull.theta()[..n];
    if sig.iter().any(|&s| s <= T::zero()) || th[n - 1] > lit::<T>(2.0) * T::FRAC_PI_3() * (T::one() + lit(1e-12)) {
        return None;
    }
    if let Some(j) = (0..n).find(|&j| close(th[j], T::FRAC_PI_3(), 1e-12)) {
        if j + 1 < n && close(sig[j], sig[j + 1], 1e-12) {
            return Some(if n == 2 { Verdict::CancellationImpossible(0, 1) } else { Verdict::PossibleCancellation(j, j + 1) });
        }
        return Some(Verdict::MixedOrders);
    }
    let k = (0..n).find(|&k| th[k] > T::FRAC_PI_3()).unwrap_or(n - 1);
    Some(Verdict::Dominant(k))
}

fn exponent_verdict<T: Real>(corners: &[CornerExponent<T>]) -> Verdict {
    let mut cand: Vec<(usize, T, T)> =
        corners.iter().filter_map(|c| Some((c.corner, -c.im_integral?, c.gamma?))).collect();
    if cand.is_empty() {
        return Verdict::MixedOrders;
    }
    cand.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    let top = cand[0];
    match cand.get(1) {
        Some(&second) if close(top.1, second.1, 1e-9) => {
            if close(top.2, second.2, 1e-12) {
                Verdict::PossibleCancellation(top.0.min(second.0), top.0.max(second.0))
            } else {
                Verdict::MixedOrders
            }
        }
        _ => Verdict::Dominant(top.0),
    }
}
