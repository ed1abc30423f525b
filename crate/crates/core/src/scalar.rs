//! Scalar traits shared by the matrix and subspace code.
//!
//! The linear algebra in this crate is written once against [`Ring`] and
//! [`Field`] and instantiated for exact rationals, quadratic numbers,
//! p-adic floats and (for matrices only) truncated Laurent series.
//! Exact types additionally implement `num_traits::{Zero, One}`; the
//! context-carrying types (p-adic numbers, series) cannot, which is why the
//! traits build their constants from an existing element.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// A commutative ring with enough structure for matrix arithmetic.
pub trait Ring:
    Clone
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// The additive identity living in the same context as `self`.
    fn zero_like(&self) -> Self;
    /// The multiplicative identity living in the same context as `self`.
    fn one_like(&self) -> Self;
    /// True if the element is zero (at working precision for inexact types).
    fn vanishes(&self) -> bool;

    fn from_i64_like(&self, n: i64) -> Self {
        let one = self.one_like();
        let mut acc = self.zero_like();
        // Double-and-add keeps this cheap for large |n|.
        let mut base = one;
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc + base.clone();
            }
            base = base.clone() + base;
            k >>= 1;
        }
        if n < 0 {
            -acc
        } else {
            acc
        }
    }
}

/// A field. `pivot_cost` lets elimination prefer numerically better pivots
/// (smallest valuation for p-adic floats); exact fields return 0.
pub trait Field: Ring + Div<Output = Self> {
    fn pivot_cost(&self) -> i64 {
        0
    }

    fn recip(&self) -> Self {
        self.one_like() / self.clone()
    }
}

impl Ring for BigRational {
    fn zero_like(&self) -> Self {
        BigRational::zero()
    }
    fn one_like(&self) -> Self {
        BigRational::one()
    }
    fn vanishes(&self) -> bool {
        self.is_zero()
    }
    fn from_i64_like(&self, n: i64) -> Self {
        BigRational::from_integer(n.into())
    }
}

impl Field for BigRational {
    fn pivot_cost(&self) -> i64 {
        rational_height(self) as i64
    }
}

/// Height of a rational, used to keep exact pivots small.
pub fn rational_height(x: &BigRational) -> u64 {
    x.numer().abs().bits() + x.denom().bits()
}
