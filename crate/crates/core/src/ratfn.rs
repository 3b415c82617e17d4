//! Rational functions in `eps` over Q(zeta_12), the carrier for the
//! Appendix-style eps -> 0 limits.
//!
//! Values are kept reduced (gcd divided out) with a monic denominator, so
//! structural equality is semantic equality.

use crate::cyclo::Cyclo;
use crate::field::Field;
use crate::laurent::EpsLaurent;
use crate::poly::Poly;
use crate::ScalarError;
use num_traits::{One, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Clone, PartialEq)]
pub struct RatFn {
    num: Poly<Cyclo>,
    den: Poly<Cyclo>,
}

impl RatFn {
    pub fn new(num: Poly<Cyclo>, den: Poly<Cyclo>) -> Self {
        assert!(!den.is_zero(), "rational function with zero denominator");
        let mut r = RatFn { num, den };
        r.reduce();
        r
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den = Poly::one();
            return;
        }
        let g = self.num.gcd(&self.den);
        if g.degree() != Some(0) {
            let (qn, rn) = self.num.div_rem(&g);
            let (qd, rd) = self.den.div_rem(&g);
            debug_assert!(rn.is_zero() && rd.is_zero());
            self.num = qn;
            self.den = qd;
        }
        let lead = self.den.leading().unwrap().inv();
        self.den = self.den.scale(&lead);
        self.num = self.num.scale(&lead);
    }

    pub fn constant(c: Cyclo) -> Self {
        RatFn {
            num: Poly::constant(c),
            den: Poly::one(),
        }
    }

    /// The variable eps itself.
    pub fn eps() -> Self {
        RatFn {
            num: Poly::x(),
            den: Poly::one(),
        }
    }

    pub fn numerator(&self) -> &Poly<Cyclo> {
        &self.num
    }

    pub fn denominator(&self) -> &Poly<Cyclo> {
        &self.den
    }

    /// ord_eps: valuation of the numerator minus that of the denominator.
    pub fn valuation(&self) -> Option<i64> {
        let vn = self.num.valuation()? as i64;
        let vd = self.den.valuation().unwrap_or(0) as i64;
        Some(vn - vd)
    }

    pub fn is_constant(&self) -> bool {
        self.num.degree().map_or(true, |d| d == 0) && self.den.degree() == Some(0)
    }

    /// Exact value if the function is a constant.
    pub fn as_constant(&self) -> Option<Cyclo> {
        if self.den.degree() == Some(0) {
            match self.num.degree() {
                None => Some(Cyclo::zero()),
                Some(0) => Some(self.num.coeff(0) / self.den.coeff(0)),
                _ => None,
            }
        } else {
            None
        }
    }

    /// Evaluate at a point where the denominator does not vanish.
    pub fn eval(&self, x: &Cyclo) -> Result<Cyclo, ScalarError> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(self.num.eval(x) / d)
    }

    /// Laurent expansion at eps = 0 including terms up to eps^order.
    ///
    /// The order must not cut below the valuation of a nonzero function.
    pub fn expand(&self, order: i64) -> Result<EpsLaurent, ScalarError> {
        if self.num.is_zero() {
            return Ok(EpsLaurent::zero_truncated(order));
        }
        let vn = self.num.valuation().unwrap() as i64;
        let vd = self.den.valuation().unwrap_or(0) as i64;
        let val = vn - vd;
        if order < val {
            return Err(ScalarError::InvalidTruncation { val, order });
        }
        // Strip eps powers so the denominator has a nonzero constant term,
        // then multiply the numerator by the denominator's inverse series.
        let num = Poly::new(self.num.coeffs[vn as usize..].to_vec());
        let den = Poly::new(self.den.coeffs[vd as usize..].to_vec());
        let terms = (order - val + 1) as usize;
        let d0_inv = den.coeff(0).inv();
        let mut inv = Vec::with_capacity(terms);
        inv.push(d0_inv.clone());
        for k in 1..terms {
            let mut acc = Cyclo::zero();
            for j in 1..=k.min(den.coeffs.len().saturating_sub(1)) {
                acc += den.coeff(j) * inv[k - j].clone();
            }
            inv.push(-(acc * d0_inv.clone()));
        }
        let mut coeffs = vec![Cyclo::zero(); terms];
        for (k, slot) in coeffs.iter_mut().enumerate() {
            let mut acc = Cyclo::zero();
            for j in 0..=k.min(num.coeffs.len().saturating_sub(1)) {
                acc += num.coeff(j) * inv[k - j].clone();
            }
            *slot = acc;
        }
        Ok(EpsLaurent::new(val, coeffs, order))
    }
}

impl Zero for RatFn {
    fn zero() -> Self {
        RatFn {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for RatFn {
    fn one() -> Self {
        RatFn {
            num: Poly::one(),
            den: Poly::one(),
        }
    }
}

impl Add for RatFn {
    type Output = RatFn;
    fn add(self, rhs: RatFn) -> RatFn {
        RatFn::new(
            self.num * rhs.den.clone() + rhs.num * self.den.clone(),
            self.den * rhs.den,
        )
    }
}

impl Sub for RatFn {
    type Output = RatFn;
    fn sub(self, rhs: RatFn) -> RatFn {
        self + (-rhs)
    }
}

impl Neg for RatFn {
    type Output = RatFn;
    fn neg(self) -> RatFn {
        RatFn {
            num: -self.num,
            den: self.den,
        }
    }
}

impl Mul for RatFn {
    type Output = RatFn;
    fn mul(self, rhs: RatFn) -> RatFn {
        RatFn::new(self.num * rhs.num, self.den * rhs.den)
    }
}

impl Div for RatFn {
    type Output = RatFn;
    fn div(self, rhs: RatFn) -> RatFn {
        self * rhs.inv()
    }
}

impl AddAssign for RatFn {
    fn add_assign(&mut self, rhs: RatFn) {
        *self = self.clone() + rhs;
    }
}

impl SubAssign for RatFn {
    fn sub_assign(&mut self, rhs: RatFn) {
        *self = self.clone() - rhs;
    }
}

impl MulAssign for RatFn {
    fn mul_assign(&mut self, rhs: RatFn) {
        *self = self.clone() * rhs;
    }
}

impl Field for RatFn {
    fn try_inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        Some(RatFn::new(self.den.clone(), self.num.clone()))
    }

    fn from_rat(r: crate::Q) -> Self {
        RatFn::constant(Cyclo::from_rat(r))
    }
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.degree() == Some(0) && self.den.coeff(0).is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "[{}] / [{}]", self.num, self.den)
        }
    }
}

impl fmt::Debug for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(n: i64) -> Cyclo {
        Cyclo::from_int(n)
    }

    #[test]
    fn geometric_series_with_pole() {
        // 1 / (eps (1 - eps)) = eps^-1 + 1 + eps + ...
        let den = Poly::new(vec![c(0), c(1), c(-1)]);
        let f = RatFn::new(Poly::one(), den);
        let s = f.expand(1).unwrap();
        assert_eq!(s.valuation(), -1);
        assert_eq!(s.coeff(-1), c(1));
        assert_eq!(s.coeff(0), c(1));
        assert_eq!(s.coeff(1), c(1));
    }

    #[test]
    fn expansion_with_negative_order() {
        // (1 + eps) / eps^2 to order -1: eps^-2 + eps^-1.
        let f = RatFn::new(
            Poly::new(vec![c(1), c(1)]),
            Poly::new(vec![c(0), c(0), c(1)]),
        );
        let s = f.expand(-1).unwrap();
        assert_eq!(s.valuation(), -2);
        assert_eq!(s.coeff(-2), c(1));
        assert_eq!(s.coeff(-1), c(1));
    }

    #[test]
    fn long_division_oracle() {
        // eps/(1+eps) to order 2 equals eps - eps^2 by explicit long division.
        let f = RatFn::new(Poly::x(), Poly::new(vec![c(1), c(1)]));
        let s = f.expand(2).unwrap();
        assert_eq!(s.coeff(1), c(1));
        assert_eq!(s.coeff(2), c(-1));
        assert_eq!(s.coeff(0), c(0));
    }

    #[test]
    fn order_below_valuation_is_rejected() {
        let f = RatFn::eps();
        assert!(matches!(
            f.expand(0),
            Err(ScalarError::InvalidTruncation { .. })
        ));
    }

    fn arb_ratfn() -> impl Strategy<Value = RatFn> {
        let coeffs = proptest::collection::vec(-5i64..=5, 1..4);
        (coeffs.clone(), coeffs).prop_filter_map("nonzero denominator", |(n, d)| {
            let num = Poly::new(n.into_iter().map(c).collect());
            let den = Poly::new(d.into_iter().map(c).collect());
            if den.is_zero() {
                None
            } else {
                Some(RatFn::new(num, den))
            }
        })
    }

    proptest! {
        #[test]
        fn expand_is_multiplicative(f in arb_ratfn(), g in arb_ratfn()) {
            let order = 4;
            let fg = f.clone() * g.clone();
            if fg.is_zero() { return Ok(()); }
            let sf = f.expand(order + 6).unwrap();
            let sg = g.expand(order + 6).unwrap();
            let sfg = fg.expand(order).unwrap();
            let prod = sf.mul_truncated(&sg, order);
            prop_assert_eq!(prod.truncated(order), sfg.truncated(order));
        }
    }
}
