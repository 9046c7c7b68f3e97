use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar used by every network, schedule and loss in the crate.
///
/// Implemented for `f32` (training and checkpoints) and `f64` (gradient
/// checks and reference computations).
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal, rounding to the nearest representable value.
    fn lit(v: f64) -> Self;

    fn as_f64(self) -> f64;

    /// Raw little-endian bytes, used by checkpoint hashing in tests.
    fn to_bits_u64(self) -> u64;
}

impl Scalar for f32 {
    #[inline]
    fn lit(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }

    fn to_bits_u64(self) -> u64 {
        self.to_bits() as u64
    }
}

impl Scalar for f64 {
    #[inline]
    fn lit(v: f64) -> Self {
        v
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }

    fn to_bits_u64(self) -> u64 {
        self.to_bits()
    }
}

/// Casts a slice between scalar types.
pub fn cast_vec<A: Scalar, B: Scalar>(xs: &[A]) -> Vec<B> {
    xs.iter().map(|&x| B::lit(x.as_f64())).collect()
}

#[inline]
pub fn sigmoid<F: Scalar>(x: F) -> F {
    if x >= F::zero() {
        F::one() / (F::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (F::one() + e)
    }
}

/// Sigmoid clamped to `[δ, 1 − δ]` with `δ = 64·ε_mach`, so products built
/// from it stay strictly inside their open bounds after rounding.
#[inline]
pub fn open_sigmoid<F: Scalar>(x: F) -> F {
    let margin = F::epsilon() * F::lit(64.0);
    sigmoid(x).max(margin).min(F::one() - margin)
}

/// Derivative of [`open_sigmoid`]; zero where the clamp is active.
#[inline]
pub fn open_sigmoid_grad<F: Scalar>(x: F) -> F {
    let margin = F::epsilon() * F::lit(64.0);
    let s = sigmoid(x);
    if s < margin || s > F::one() - margin {
        F::zero()
    } else {
        s * (F::one() - s)
    }
}

pub fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn l2_norm<F: Scalar>(a: &[F]) -> F {
    dot(a, a).sqrt()
}

pub fn squared_distance<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| {
        let d = x - y;
        acc + d * d
    })
}
