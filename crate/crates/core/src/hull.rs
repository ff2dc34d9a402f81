//! Piecewise-linear hull geometry and the leading-order rigid-wall flow.
//!
//! A hull with `N` corners is described in the complex potential plane by
//! the corner potentials `-a_k` (with `a_1 > ... > a_N > a_{N+1} = 0`) and the
//! exterior angles `pi * sigma_k`. The stagnation point `w = 0` is carried as
//! an extra corner whose angle closes the polygon.

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Cx, Real};
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};

/// Exact exterior angle (in units of pi).
pub type ExactAngle = Ratio<i64>;

#[derive(Debug, Clone, PartialEq)]
pub struct CornerSpec<T> {
    /// Potential of the corner (any positive scale).
    pub k: T,
    pub sigma: T,
    /// Exact value of `sigma` when it was given as a fraction.
    pub sigma_exact: Option<ExactAngle>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HullSpec<T> {
    pub label: String,
    pub corners: Vec<CornerSpec<T>>,
    pub epsilon: Option<T>,
}

impl<T: Real> HullSpec<T> {
    pub fn new(label: impl Into<String>, corners: &[(T, T)]) -> Self {
        HullSpec {
            label: label.into(),
            corners: corners.iter().map(|&(k, sigma)| CornerSpec { k, sigma, sigma_exact: None }).collect(),
            epsilon: None,
        }
    }

    /// Corners with exact fractional angles `(k, (num, den))`.
    pub fn rational(label: impl Into<String>, corners: &[(T, (i64, i64))]) -> Self {
        HullSpec {
            label: label.into(),
            corners: corners
                .iter()
                .map(|&(k, (n, d))| {
                    let r = Ratio::new(n, d);
                    CornerSpec { k, sigma: lit(r.to_f64().unwrap_or(f64::NAN)), sigma_exact: Some(r) }
                })
                .collect(),
            epsilon: None,
        }
    }

    pub fn with_epsilon(mut self, eps: T) -> Self {
        self.epsilon = Some(eps);
        self
    }

    pub fn normalize(&self) -> Result<Hull<T>> {
        normalize(self)
    }
}

/// Normalized hull. Corner index `k` is zero based: `k = 0` is the corner
/// farthest upstream and `k = N` is the stagnation point.
#[derive(Debug, Clone, PartialEq)]
pub struct Hull<T> {
    label: String,
    a: Vec<T>,
    sigma: Vec<T>,
    sigma_exact: Option<Vec<ExactAngle>>,
    theta: Vec<T>,
    c: Vec<Cx<T>>,
}

/// `log z` with the argument taken in (-pi/2, 3pi/2], i.e. the cut runs
/// vertically downward from the origin.
#[inline]
pub fn log_branch<T: Real>(z: Cx<T>) -> Cx<T> {
    let mut arg = z.im.atan2(z.re);
    if arg <= -T::FRAC_PI_2() {
        arg = arg + T::TAU();
    }
    Cx::new(z.norm().ln(), arg)
}

pub fn normalize<T: Real>(spec: &HullSpec<T>) -> Result<Hull<T>> {
    if spec.corners.is_empty() {
        return Err(Error::InvalidHull("hull needs at least one corner".into()));
    }
    for (i, c) in spec.corners.iter().enumerate() {
        if !(c.k > T::zero()) || !c.k.is_finite() {
            return Err(Error::InvalidHull(format!("corner {} has non-positive potential {}", i + 1, c.k)));
        }
        if !(c.sigma > -T::one() && c.sigma < T::one()) || c.sigma == T::zero() {
            return Err(Error::SigmaOutOfRange(to_f64(c.sigma)));
        }
        if let Some(r) = c.sigma_exact {
            if r.is_zero() || r.abs() >= Ratio::from_integer(1) {
                return Err(Error::SigmaOutOfRange(r.to_f64().unwrap_or(f64::NAN)));
            }
        }
    }
    let mut corners = spec.corners.clone();
    corners.sort_by(|x, y| y.k.partial_cmp(&x.k).unwrap_or(std::cmp::Ordering::Equal));
    for w in corners.windows(2) {
        if w[0].k == w[1].k {
            return Err(Error::InvalidHull("two corners share the same potential".into()));
        }
    }
    let total = corners.iter().fold(T::zero(), |s, c| s + c.k);
    let mut a: Vec<T> = corners.iter().map(|c| c.k / total).collect();
    a.push(T::zero());

    let mut sigma: Vec<T> = corners.iter().map(|c| c.sigma).collect();
    let sigma_exact: Option<Vec<ExactAngle>> = corners.iter().map(|c| c.sigma_exact).collect();
    let sigma_exact = sigma_exact.map(|mut v| {
        let close = -v.iter().fold(Ratio::zero(), |s: ExactAngle, r| s + r);
        v.push(close);
        v
    });
    let closure = -sigma.iter().fold(T::zero(), |s, &x| s + x);
    sigma.push(closure);

    let theta: Vec<T> = match &sigma_exact {
        Some(ex) => {
            let mut acc = Ratio::zero();
            ex.iter()
                .map(|r| {
                    acc += r;
                    T::PI() * lit::<T>(acc.to_f64().unwrap_or(f64::NAN))
                })
                .collect()
        }
        None => {
            let mut acc = T::zero();
            let n = sigma.len();
            sigma
                .iter()
                .enumerate()
                .map(|(i, &s)| {
                    acc = acc + s;
                    if i + 1 == n {
                        T::zero()
                    } else {
                        T::PI() * acc
                    }
                })
                .collect()
        }
    };
    for (k, &t) in theta.iter().enumerate() {
        if !(t > -T::PI() && t < T::PI()) {
            return Err(Error::InvalidHull(format!("hull inclination after corner {} leaves (-pi, pi)", k + 1)));
        }
    }

    let mut hull = Hull { label: spec.label.clone(), a, sigma, sigma_exact, theta, c: Vec::new() };
    hull.c = (0..hull.a.len()).map(|k| hull.compute_prefactor(k)).collect();
    Ok(hull)
}

impl<T: Real> Hull<T> {
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Number of physical corners `N` (the stagnation point is extra).
    pub fn corners(&self) -> usize {
        self.a.len() - 1
    }

    /// Corner potentials `a_1..a_N, 0`.
    pub fn a(&self) -> &[T] {
        &self.a
    }

    /// Exterior angles / pi, including the closure at the stagnation point.
    pub fn sigma(&self) -> &[T] {
        &self.sigma
    }

    pub fn sigma_exact(&self) -> Option<&[ExactAngle]> {
        self.sigma_exact.as_deref()
    }

    /// Inclination of the hull facet downstream of corner `k`; the last
    /// entry (after the stagnation point) is zero.
    pub fn theta(&self) -> &[T] {
        &self.theta
    }

    /// Exact inclination / pi after corner `k` when all angles are exact.
    pub fn theta_exact(&self, k: usize) -> Option<ExactAngle> {
        self.sigma_exact.as_ref().map(|v| v[..=k].iter().fold(Ratio::zero(), |s: ExactAngle, r| s + r))
    }

    pub fn prefactors(&self) -> &[Cx<T>] {
        &self.c
    }

    /// Branch point location `-a_k`.
    pub fn singularity(&self, k: usize) -> Cx<T> {
        Cx::new(-self.a[k], T::zero())
    }

    /// Smallest gap between consecutive corner potentials (including the stagnation point).
    pub fn min_spacing(&self) -> T {
        self.a.windows(2).fold(T::infinity(), |m, w| m.min(w[0] - w[1]))
    }

    /// Sum of the physical exterior angles (minus the closure angle).
    pub fn total_turn(&self) -> T {
        -self.sigma[self.corners()]
    }

    /// Re-expresses the normalized hull as a spec.
    pub fn to_spec(&self) -> HullSpec<T> {
        let n = self.corners();
        HullSpec {
            label: self.label.clone(),
            corners: (0..n)
                .map(|k| CornerSpec {
                    k: self.a[k],
                    sigma: self.sigma[k],
                    sigma_exact: self.sigma_exact.as_ref().map(|v| v[k]),
                })
                .collect(),
            epsilon: None,
        }
    }

    fn check_branch(&self, w: Cx<T>) -> Result<()> {
        let tiny = T::epsilon() * lit(16.0);
        for (k, &ak) in self.a.iter().enumerate() {
            if (w + ak).norm() <= tiny * (T::one() + ak) {
                return Err(Error::BranchPoint(k));
            }
        }
        Ok(())
    }

    /// `log q0(w) = -sum sigma_k log(w + a_k)`.
    pub fn log_q0(&self, w: Cx<T>) -> Result<Cx<T>> {
        self.check_branch(w)?;
        Ok(self.log_q0_unchecked(w))
    }

    #[inline]
    pub(crate) fn log_q0_unchecked(&self, w: Cx<T>) -> Cx<T> {
        self.a
            .iter()
            .zip(&self.sigma)
            .fold(Cx::new(T::zero(), T::zero()), |acc, (&ak, &sk)| acc - log_branch(w + ak) * sk)
    }

    /// Rigid-wall complex velocity `q0(w) = prod (w + a_k)^{-sigma_k}`.
    pub fn q0(&self, w: Cx<T>) -> Result<Cx<T>> {
        Ok(self.log_q0(w)?.exp())
    }

    /// `q0` on the free surface `w = phi > 0`, where it is real and positive.
    pub fn q0_real(&self, phi: T) -> T {
        self.a
            .iter()
            .zip(&self.sigma)
            .fold(T::zero(), |acc, (&ak, &sk)| acc - sk * (phi + ak).ln())
            .exp()
    }

    /// Logarithmic derivative `q0'/q0 = -sum sigma_k / (w + a_k)`.
    pub fn dlog_q0(&self, w: Cx<T>) -> Result<Cx<T>> {
        self.check_branch(w)?;
        Ok(self.dlog_q0_unchecked(w))
    }

    #[inline]
    pub(crate) fn dlog_q0_unchecked(&self, w: Cx<T>) -> Cx<T> {
        self.a
            .iter()
            .zip(&self.sigma)
            .fold(Cx::new(T::zero(), T::zero()), |acc, (&ak, &sk)| acc - (w + ak).inv() * sk)
    }

    /// `d/dw` of the logarithmic derivative.
    pub(crate) fn d2log_q0_unchecked(&self, w: Cx<T>) -> Cx<T> {
        self.a.iter().zip(&self.sigma).fold(Cx::new(T::zero(), T::zero()), |acc, (&ak, &sk)| {
            let z = (w + ak).inv();
            acc + z * z * sk
        })
    }

    /// Real log-derivative on the free surface.
    pub fn dlog_q0_real(&self, phi: T) -> T {
        self.a.iter().zip(&self.sigma).fold(T::zero(), |acc, (&ak, &sk)| acc - sk / (phi + ak))
    }

    /// `1 / q0(w)^3`, the singulant integrand up to a factor `i`.
    #[inline]
    pub fn inv_q0_cubed(&self, w: Cx<T>) -> Cx<T> {
        (self.log_q0_unchecked(w) * lit::<T>(-3.0)).exp()
    }

    /// Local prefactor `c_k` with `q0 ~ c_k (w + a_k)^{-sigma_k}` near `-a_k`.
    pub fn local_prefactor(&self, k: usize) -> Result<Cx<T>> {
        self.c.get(k).copied().ok_or(Error::CornerIndex(k))
    }

    fn compute_prefactor(&self, k: usize) -> Cx<T> {
        let ak = self.a[k];
        self.a
            .iter()
            .zip(&self.sigma)
            .enumerate()
            .filter(|&(j, _)| j != k)
            .fold(Cx::new(T::zero(), T::zero()), |acc, (_, (&aj, &sj))| {
                acc - log_branch(Cx::new(aj - ak, T::zero())) * sj
            })
            .exp()
    }

    /// Inner-region length scale `eps^{1/(1+3 sigma_k)}` around corner `k`,
    /// flagging corners closer than that scale.
    pub fn inner_scale(&self, k: usize, eps: T) -> Result<InnerScale<T>> {
        if k >= self.a.len() {
            return Err(Error::CornerIndex(k));
        }
        if !(eps > T::zero()) {
            return Err(Error::InvalidEpsilon(to_f64(eps)));
        }
        let s = self.sigma[k];
        if s <= lit::<T>(-1.0 / 3.0) {
            return Err(Error::NoSingulant(k));
        }
        let ell = eps.powf(T::one() / (T::one() + lit::<T>(3.0) * s));
        let close = (0..self.a.len())
            .filter(|&j| j != k && (self.a[j] - self.a[k]).abs() < ell)
            .map(|j| (k.min(j), k.max(j)))
            .collect();
        Ok(InnerScale { length: ell, close_pairs: close })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerScale<T> {
    pub length: T,
    /// Corner pairs `(i, j)` separated by less than `length`.
    pub close_pairs: Vec<(usize, usize)>,
}
