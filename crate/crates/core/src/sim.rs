//! Simplified nonlinear model `eps q0 u u' + i (u - q0^2) = 0`, `u = q^2`,
//! integrated along the free surface from just past the stagnation point.

use crate::error::{Error, Result};
use crate::hull::Hull;
use crate::ode::{solve_ivp, OdeOptions};
use crate::scalar::{lit, to_f64, Cx, Real};
use crate::solution::{FreeSurfaceSolution, Profile, SolveMeta};

#[derive(Debug, Clone, Copy)]
pub struct SimOptions<T> {
    /// Start offset as a fraction of the smallest corner spacing.
    pub delta_factor: T,
    /// Output spacing as a fraction of `eps`.
    pub output_step: T,
    /// Largest step as a fraction of `eps`.
    pub max_step: T,
}

impl<T: Real> Default for SimOptions<T> {
    fn default() -> Self {
        SimOptions { delta_factor: lit(1e-3), output_step: lit(0.05), max_step: lit(0.1) }
    }
}

/// Default end of the integration interval.
pub fn default_phi_max<T: Real>(eps: T, last_hit: Option<T>) -> T {
    let hit = last_hit.unwrap_or(T::zero());
    lit::<T>(10.0).max(hit + lit::<T>(20.0) * T::TAU() * eps)
}

fn rhs<T: Real>(hull: &Hull<T>, eps: T, phi: T, u: Cx<T>) -> Cx<T> {
    let q = hull.q0_real(phi);
    Cx::new(T::zero(), -T::one()) * (u - q * q) / (u * (eps * q))
}

/// Residual `|eps q0 u u' + i (u - q0^2)|`.
pub fn ode_residual<T: Real>(hull: &Hull<T>, eps: T, phi: T, u: Cx<T>, du: Cx<T>) -> T {
    let q = hull.q0_real(phi);
    (u * du * (eps * q) + Cx::new(T::zero(), T::one()) * (u - q * q)).norm()
}

pub fn solve_simplified<T: Real>(hull: &Hull<T>, eps: T, phi_max: T, tol: T) -> Result<FreeSurfaceSolution<T>> {
    solve_simplified_with(hull, eps, phi_max, tol, &SimOptions::default())
}

pub fn solve_simplified_with<T: Real>(
    hull: &Hull<T>,
    eps: T,
    phi_max: T,
    tol: T,
    opts: &SimOptions<T>,
) -> Result<FreeSurfaceSolution<T>> {
    if !(eps > T::zero()) {
        return Err(Error::InvalidEpsilon(to_f64(eps)));
    }
    if !(tol > T::zero()) {
        return Err(Error::Ode("tolerance must be positive".into()));
    }
    let delta = opts.delta_factor * hull.min_spacing();
    if !(phi_max > delta) {
        return Err(Error::Ode("phi_max must exceed the start offset".into()));
    }
    // two-term outer expansion
    let q = hull.q0_real(delta);
    let dq = q * hull.dlog_q0_real(delta);
    let two: T = lit(2.0);
    let u0 = Cx::new(q * q, two * eps * q.powi(4) * dq);
    let ode_opts = OdeOptions {
        rtol: tol,
        atol: tol * lit(1e-2),
        max_step: opts.max_step * eps,
        first_step: None,
        max_steps: 50_000_000,
    };
    let dphi = opts.output_step * eps;
    let first = (delta / dphi).floor().to_usize().unwrap_or(0) + 1;
    let mut next = first;
    let mut phi = Vec::new();
    let mut u = Vec::new();
    let mut worst = T::zero();
    let mut buf = [T::zero(); 2];
    let mut dbuf = [T::zero(); 2];
    let stats = solve_ivp(
        |t, y: &[T], d: &mut [T]| {
            let du = rhs(hull, eps, t, Cx::new(y[0], y[1]));
            d[0] = du.re;
            d[1] = du.im;
        },
        delta,
        &[u0.re, u0.im],
        phi_max,
        &ode_opts,
        |step| {
            let mid = (step.t_old + step.t) / two;
            step.eval(mid, &mut buf);
            step.eval_derivative(mid, &mut dbuf);
            let r = ode_residual(hull, eps, mid, Cx::new(buf[0], buf[1]), Cx::new(dbuf[0], dbuf[1]));
            worst = worst.max(r);
            loop {
                let x = lit::<T>(next as f64) * dphi;
                if x > step.t || x > phi_max {
                    break;
                }
                step.eval(x, &mut buf);
                phi.push(x);
                u.push(Cx::new(buf[0], buf[1]));
                next += 1;
            }
            Ok(())
        },
    )?;
    Ok(FreeSurfaceSolution {
        phi,
        profile: Profile::Simplified { u },
        eps,
        meta: SolveMeta {
            solver: "simplified-dop853",
            tol,
            residual: worst,
            iterations: stats.accepted,
            evaluations: stats.nfev,
            delta,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hull::HullSpec;

    #[test]
    fn small_eps_follows_outer_solution() {
        let h = HullSpec::new("fig5", &[(0.8, 0.25), (0.2, 0.25)]).normalize().unwrap();
        let eps: f64 = 1e-3;
        let sol = solve_simplified(&h, eps, 3.0, 1e-10).unwrap();
        let q = sol.speed();
        let worst = sol
            .phi
            .iter()
            .zip(&q)
            .filter(|(p, _)| **p >= 1.0)
            .map(|(p, q)| (q - h.q0_real(*p)).abs())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-3, "{worst}");
    }

    #[test]
    fn samples_are_uniform_and_increasing() {
        let h = HullSpec::new("one", &[(1.0, 0.5)]).normalize().unwrap();
        let sol = solve_simplified(&h, 0.3, 4.0, 1e-9).unwrap();
        assert!(sol.phi.windows(2).all(|w| ((w[1] - w[0]) - 0.015f64).abs() < 1e-12));
        assert!(*sol.phi.last().unwrap() <= 4.0);
        assert!(sol.meta.residual < 1e-6);
    }
}
