//! Scalar abstraction shared by the exact solvers.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point type the exact solvers are generic over. Implemented for `f32` and `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Infallible for finite inputs on both implementations.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Tolerance used for probability-row validation.
    ///
    /// `1e-12` for `f64`; scaled up to a few ULPs of one for lower precision.
    #[inline]
    fn tolerance() -> Self {
        let floor = Self::lit(1e-12);
        let eps = Self::epsilon() * Self::lit(64.0);
        if eps > floor {
            eps
        } else {
            floor
        }
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Index of the largest entry; near-ties (relative `8·eps`) resolve to the lowest index.
pub fn argmax_lowest<T: Real>(values: &[T]) -> usize {
    let tie = T::epsilon() * T::lit(8.0);
    let mut best = 0;
    for (i, &q) in values.iter().enumerate().skip(1) {
        let b = values[best];
        let scale = b.abs().max(q.abs()).max(T::one());
        if q > b + tie * scale {
            best = i;
        }
    }
    best
}
