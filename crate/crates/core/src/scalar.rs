//! Scalar abstraction used by every numerical routine in the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::{Debug, Display, LowerExp};

/// Complex number over a generic real scalar.
pub type Cx<T> = Complex<T>;

/// Floating point scalar usable by the solvers (`f32` or `f64`).
///
/// Dense linear algebra is not expressible through `num-traits`; it is
/// delegated to nalgebra per concrete type.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Solves `a x = b` in place for a row-major `n x n` matrix.
    /// Returns `false` when the matrix is singular.
    fn lu_solve(a: &[Self], n: usize, b: &mut [Self]) -> bool;

    /// Least-squares solution of an overdetermined row-major `rows x cols` system.
    fn lstsq(a: &[Self], rows: usize, cols: usize, b: &[Self]) -> Option<Vec<Self>>;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            fn lu_solve(a: &[Self], n: usize, b: &mut [Self]) -> bool {
                debug_assert_eq!(a.len(), n * n);
                debug_assert_eq!(b.len(), n);
                let m = DMatrix::from_row_slice(n, n, a);
                let rhs = DVector::from_column_slice(b);
                match m.lu().solve(&rhs) {
                    Some(x) if x.iter().all(|v| v.is_finite()) => {
                        b.copy_from_slice(x.as_slice());
                        true
                    }
                    _ => false,
                }
            }

            fn lstsq(a: &[Self], rows: usize, cols: usize, b: &[Self]) -> Option<Vec<Self>> {
                debug_assert_eq!(a.len(), rows * cols);
                let m = DMatrix::from_row_slice(rows, cols, a);
                let rhs = DVector::from_column_slice(b);
                let x = m.svd(true, true).solve(&rhs, <$t>::EPSILON * rows as $t).ok()?;
                x.iter().all(|v| v.is_finite()).then(|| x.as_slice().to_vec())
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Imaginary unit.
#[inline]
pub fn imag<T: Real>() -> Cx<T> {
    Cx::new(T::zero(), T::one())
}

#[inline]
pub fn real<T: Real>(x: T) -> Cx<T> {
    Cx::new(x, T::zero())
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle<T: Real>(x: T) -> T {
    let tau = T::TAU();
    let mut y = x % tau;
    if y <= -T::PI() {
        y = y + tau;
    } else if y > T::PI() {
        y = y - tau;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_range() {
        for k in -20..20 {
            let x = 0.37 * k as f64;
            let y = wrap_angle(x);
            assert!(y > -std::f64::consts::PI && y <= std::f64::consts::PI);
            assert!(((x - y) / std::f64::consts::TAU).fract().abs() < 1e-12 || ((x - y) / std::f64::consts::TAU).fract().abs() > 1.0 - 1e-12);
        }
        assert_eq!(wrap_angle(-std::f64::consts::PI), std::f64::consts::PI);
    }

    #[test]
    fn lu_solve_small_system() {
        let a = [4.0, 1.0, 2.0, 3.0];
        let mut b = [1.0, 2.0];
        assert!(f64::lu_solve(&a, 2, &mut b));
        assert!((4.0 * b[0] + b[1] - 1.0).abs() < 1e-14);
        assert!((2.0 * b[0] + 3.0 * b[1] - 2.0).abs() < 1e-14);
        let mut c = [1.0f32, 1.0];
        assert!(!f32::lu_solve(&[1.0, 1.0, 1.0, 1.0], 2, &mut c));
    }
}
