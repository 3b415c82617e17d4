//! Dual numbers for exact forward-mode differentiation.
//!
//! The partials vector is either empty (a constant — broadcasts as all
//! zeros against any arity) or has the arity fixed by the evaluation
//! context. Arithmetic follows the Leibniz and quotient rules exactly.

use crate::field::Field;
use num_traits::{One, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Clone, PartialEq, Debug)]
pub struct Dual<F: Field> {
    pub v: F,
    pub d: Vec<F>,
}

impl<F: Field> Dual<F> {
    pub fn constant(v: F) -> Self {
        Dual { v, d: vec![] }
    }

    /// The j-th variable of an `arity`-variable context.
    pub fn variable(v: F, j: usize, arity: usize) -> Self {
        let mut d = vec![F::zero(); arity];
        d[j] = F::one();
        Dual { v, d }
    }

    pub fn partial(&self, j: usize) -> F {
        self.d.get(j).cloned().unwrap_or_else(F::zero)
    }

    fn zip(a: &[F], b: &[F], f: impl Fn(&F, &F) -> F) -> Vec<F> {
        let n = a.len().max(b.len());
        let zero = F::zero();
        (0..n)
            .map(|i| f(a.get(i).unwrap_or(&zero), b.get(i).unwrap_or(&zero)))
            .collect()
    }
}

impl<F: Field> Zero for Dual<F> {
    fn zero() -> Self {
        Dual::constant(F::zero())
    }
    fn is_zero(&self) -> bool {
        self.v.is_zero() && self.d.iter().all(|x| x.is_zero())
    }
}

impl<F: Field> One for Dual<F> {
    fn one() -> Self {
        Dual::constant(F::one())
    }
}

impl<F: Field> Add for Dual<F> {
    type Output = Dual<F>;
    fn add(self, rhs: Dual<F>) -> Dual<F> {
        Dual {
            v: self.v + rhs.v,
            d: Dual::zip(&self.d, &rhs.d, |a, b| a.clone() + b.clone()),
        }
    }
}

impl<F: Field> Sub for Dual<F> {
    type Output = Dual<F>;
    fn sub(self, rhs: Dual<F>) -> Dual<F> {
        Dual {
            v: self.v - rhs.v,
            d: Dual::zip(&self.d, &rhs.d, |a, b| a.clone() - b.clone()),
        }
    }
}

impl<F: Field> Neg for Dual<F> {
    type Output = Dual<F>;
    fn neg(self) -> Dual<F> {
        Dual {
            v: -self.v,
            d: self.d.into_iter().map(|x| -x).collect(),
        }
    }
}

impl<F: Field> Mul for Dual<F> {
    type Output = Dual<F>;
    fn mul(self, rhs: Dual<F>) -> Dual<F> {
        let d = if self.d.is_empty() && rhs.d.is_empty() {
            vec![]
        } else {
            Dual::zip(&self.d, &rhs.d, |da, db| {
                da.clone() * rhs.v.clone() + self.v.clone() * db.clone()
            })
        };
        Dual {
            v: self.v * rhs.v,
            d,
        }
    }
}

impl<F: Field> Div for Dual<F> {
    type Output = Dual<F>;
    fn div(self, rhs: Dual<F>) -> Dual<F> {
        self * rhs.inv()
    }
}

impl<F: Field> AddAssign for Dual<F> {
    fn add_assign(&mut self, rhs: Dual<F>) {
        *self = self.clone() + rhs;
    }
}

impl<F: Field> SubAssign for Dual<F> {
    fn sub_assign(&mut self, rhs: Dual<F>) {
        *self = self.clone() - rhs;
    }
}

impl<F: Field> MulAssign for Dual<F> {
    fn mul_assign(&mut self, rhs: Dual<F>) {
        *self = self.clone() * rhs;
    }
}

/// Duals form the evaluation scalar for differentiation: inversion is
/// defined exactly when the value part is nonzero (a zero value with a
/// nonzero derivative is a genuine singular point of the function).
impl<F: Field> Field for Dual<F> {
    fn try_inv(&self) -> Option<Self> {
        let vi = self.v.try_inv()?;
        let vi2 = vi.clone() * vi.clone();
        Some(Dual {
            v: vi,
            d: self
                .d
                .iter()
                .map(|da| -(da.clone() * vi2.clone()))
                .collect(),
        })
    }

    fn from_rat(r: crate::Q) -> Self {
        Dual::constant(F::from_rat(r))
    }
}

impl<F: Field> fmt::Display for Dual<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.v)?;
        for (i, di) in self.d.iter().enumerate() {
            write!(f, " + ({})*d{}", di, i)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::Cyclo;
    use proptest::prelude::*;

    type D = Dual<Cyclo>;

    fn var(v: i64, j: usize) -> D {
        Dual::variable(Cyclo::from_int(v), j, 2)
    }

    #[test]
    fn quotient_rule() {
        // d/dx (x/y) at (3, 5) -> 1/5; d/dy -> -3/25.
        let x = var(3, 0);
        let y = var(5, 1);
        let q = x / y;
        assert_eq!(q.partial(0), Cyclo::ratio(1, 5));
        assert_eq!(q.partial(1), Cyclo::ratio(-3, 25));
    }

    #[test]
    fn constants_broadcast() {
        let c = D::constant(Cyclo::from_int(7));
        let x = var(2, 0);
        let p = c * x;
        assert_eq!(p.partial(0), Cyclo::from_int(7));
        assert_eq!(p.partial(1), Cyclo::from_int(0));
    }

    fn arb_dual() -> impl Strategy<Value = D> {
        (-6i64..=6, -6i64..=6, -6i64..=6).prop_map(|(v, d0, d1)| Dual {
            v: Cyclo::from_int(v),
            d: vec![Cyclo::from_int(d0), Cyclo::from_int(d1)],
        })
    }

    proptest! {
        #[test]
        fn product_and_sum_rules_exact(a in arb_dual(), b in arb_dual()) {
            let s = a.clone() + b.clone();
            prop_assert_eq!(s.partial(0), a.partial(0) + b.partial(0));
            let p = a.clone() * b.clone();
            let expect = a.partial(0) * b.v.clone() + a.v.clone() * b.partial(0);
            prop_assert_eq!(p.partial(0), expect);
            if !b.v.is_zero() {
                let q = a.clone() / b.clone();
                let back = q * b.clone();
                prop_assert_eq!(back.partial(0), a.partial(0));
                prop_assert_eq!(back.partial(1), a.partial(1));
                prop_assert_eq!(back.v, a.v);
            }
        }
    }
}
