//! Scalar abstraction for the copula math.
//!
//! Everything numeric in this crate is generic over [`Real`], so the same
//! formulas run in `f32` or `f64`. The crate root exposes `f64` aliases,
//! which is what the CLI and all tolerance-bearing tests use.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + NumAssign + Debug + Display + Send + Sync + 'static {
    /// Lift an `f64` constant into this scalar type.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant converts to scalar")
    }

    /// Lift a `usize` (counts, sample sizes) into this scalar type.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize converts to scalar")
    }

    /// Lossy view as `f64`, used at serialization and reporting boundaries.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Boundary guard for copula-scale inputs: everything is clamped to
/// `[UNIT_EPS, 1 - UNIT_EPS]` before evaluation so log-densities and
/// h-inverses stay finite.
pub const UNIT_EPS: f64 = 1e-10;

/// Clamp a copula-scale value to the guarded open unit interval.
#[inline]
pub fn clamp_unit<R: Real>(u: R) -> R {
    let lo = R::of(UNIT_EPS);
    let hi = R::one() - lo;
    if u < lo {
        lo
    } else if u > hi {
        hi
    } else {
        u
    }
}
