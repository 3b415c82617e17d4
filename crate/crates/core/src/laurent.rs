//! Truncated Laurent series in eps over Q(zeta_12).

use crate::cyclo::Cyclo;
use num_traits::Zero;
use std::fmt;

/// Coefficients for exponents `val ..= trunc`; everything above `trunc`
/// is unknown, everything below `val` is zero.
#[derive(Clone, PartialEq, Debug)]
pub struct EpsLaurent {
    val: i64,
    coeffs: Vec<Cyclo>,
    trunc: i64,
}

impl EpsLaurent {
    pub fn new(mut val: i64, mut coeffs: Vec<Cyclo>, trunc: i64) -> Self {
        // Normalize so the first stored coefficient is nonzero.
        while let Some(first) = coeffs.first() {
            if first.is_zero() {
                coeffs.remove(0);
                val += 1;
            } else {
                break;
            }
        }
        if coeffs.is_empty() {
            val = trunc + 1;
        }
        assert!(trunc + 1 >= val, "truncation below valuation");
        coeffs.truncate((trunc - val + 1).max(0) as usize);
        EpsLaurent { val, coeffs, trunc }
    }

    /// A series with no known nonzero terms up to `trunc`.
    pub fn zero_truncated(trunc: i64) -> Self {
        EpsLaurent {
            val: trunc + 1,
            coeffs: vec![],
            trunc,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Valuation of the leading stored term (trunc+1 for a truncated zero).
    pub fn valuation(&self) -> i64 {
        self.val
    }

    pub fn truncation_order(&self) -> i64 {
        self.trunc
    }

    pub fn coeff(&self, n: i64) -> Cyclo {
        if n < self.val || n > self.trunc {
            return Cyclo::zero();
        }
        self.coeffs
            .get((n - self.val) as usize)
            .cloned()
            .unwrap_or_else(Cyclo::zero)
    }

    pub fn truncated(&self, order: i64) -> Self {
        let order = order.min(self.trunc);
        Self::new(
            self.val,
            self.coeffs
                .iter()
                .take((order - self.val + 1).max(0) as usize)
                .cloned()
                .collect(),
            order,
        )
    }

    pub fn mul_truncated(&self, rhs: &Self, order: i64) -> Self {
        let order = order
            .min(self.trunc + rhs.val)
            .min(rhs.trunc + self.val);
        let val = self.val + rhs.val;
        if self.is_zero() || rhs.is_zero() {
            return Self::zero_truncated(order);
        }
        let n = (order - val + 1).max(0) as usize;
        let mut out = vec![Cyclo::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if i + j < n {
                    out[i + j] += a.clone() * b.clone();
                }
            }
        }
        Self::new(val, out, order)
    }
}

impl fmt::Display for EpsLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "O(eps^{})", self.trunc + 1);
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let e = self.val + i as i64;
            match e {
                0 => write!(f, "({})", c)?,
                1 => write!(f, "({})*eps", c)?,
                _ => write!(f, "({})*eps^{}", c, e)?,
            }
        }
        write!(f, " + O(eps^{})", self.trunc + 1)
    }
}
