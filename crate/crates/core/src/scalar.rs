//! Floating-point abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar the library is generic over: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Default relative tolerance of the eigensolver for this precision.
    const SOLVER_TOL: f64;

    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    const SOLVER_TOL: f64 = 1e-5;
}

impl Real for f64 {
    const SOLVER_TOL: f64 = 1e-12;
}

pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn czero<T: Real>() -> C<T> {
    C::new(T::zero(), T::zero())
}

#[inline]
pub(crate) fn cone<T: Real>() -> C<T> {
    C::new(T::one(), T::zero())
}

#[inline]
pub(crate) fn creal<T: Real>(x: T) -> C<T> {
    C::new(x, T::zero())
}

/// |z| without the overflow-prone `norm()` path on extreme inputs.
#[inline]
pub(crate) fn cabs<T: Real>(z: C<T>) -> T {
    z.re.hypot(z.im)
}

/// |re| + |im|, the cheap magnitude used for pivoting and deflation tests.
#[inline]
pub(crate) fn cabs1<T: Real>(z: C<T>) -> T {
    z.re.abs() + z.im.abs()
}
