//! The scalar abstraction shared by every algebraic structure in this crate.
//!
//! All linear algebra, polynomial, series and expression-evaluation code is
//! generic over [`Field`]; the two instantiations used throughout are
//! [`crate::K`] (the cyclotomic field Q(zeta_12)) and [`crate::RatFn`]
//! (rational functions in eps over it).

use num_traits::{One, Zero};
use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// An exact field: commutative, characteristic zero in practice, with
/// decidable equality. Division by zero panics, so callers gate on
/// [`Zero::is_zero`] first (fallible paths use [`Field::try_inv`]).
pub trait Field:
    Clone
    + PartialEq
    + Debug
    + Display
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    /// Multiplicative inverse, `None` for zero.
    fn try_inv(&self) -> Option<Self>;

    /// Embed a rational number.
    fn from_rat(r: crate::Q) -> Self;

    fn from_i64(n: i64) -> Self {
        Self::from_rat(crate::Q::from_integer(n.into()))
    }

    fn inv(&self) -> Self {
        self.try_inv().expect("division by zero")
    }
}

impl Field for crate::Q {
    fn try_inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }

    fn from_rat(r: crate::Q) -> Self {
        r
    }
}
