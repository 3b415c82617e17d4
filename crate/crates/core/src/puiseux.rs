//! Truncated Puiseux series: finite Laurent data on the lattice `z^(1/ram)`.
//!
//! Exponents are integers in lattice units, so the term at lattice index k
//! is the coefficient of `z^(k/ram)`. A series knows its coefficients for
//! indices `val ..= trunc` exactly; beyond `trunc` nothing is claimed.

use crate::field::Field;
use crate::Q;
use num_integer::Integer;
use num_traits::{One, Zero};
use std::fmt;

#[derive(Clone, PartialEq, Debug)]
pub struct Puiseux<F: Field> {
    ram: i64,
    val: i64,
    coeffs: Vec<F>,
    trunc: i64,
}

impl<F: Field> Puiseux<F> {
    pub fn new(ram: i64, mut val: i64, mut coeffs: Vec<F>, trunc: i64) -> Self {
        assert!(ram >= 1);
        while let Some(c) = coeffs.first() {
            if c.is_zero() {
                coeffs.remove(0);
                val += 1;
            } else {
                break;
            }
        }
        while coeffs.len() as i64 > trunc - val + 1 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            val = trunc + 1;
        } else {
            while coeffs.last().is_some_and(|c| c.is_zero()) {
                coeffs.pop();
            }
        }
        Puiseux {
            ram,
            val,
            coeffs,
            trunc,
        }
    }

    pub fn zero_truncated(ram: i64, trunc: i64) -> Self {
        Puiseux {
            ram,
            val: trunc + 1,
            coeffs: vec![],
            trunc,
        }
    }

    /// The monomial c * z^(num/den), truncated at `trunc` lattice steps on
    /// the lattice 1/lcm(den, ram_hint).
    pub fn monomial(c: F, expo: Q, ram_hint: i64, trunc_exp: Q) -> Self {
        let ram = lcm64(ram_hint, denom_of(&expo));
        let val = lattice_index(&expo, ram);
        let trunc = floor_lattice(&trunc_exp, ram);
        Self::new(ram, val, vec![c], trunc)
    }

    pub fn ram(&self) -> i64 {
        self.ram
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Leading exponent as a rational (None when zero to truncation).
    pub fn valuation(&self) -> Option<Q> {
        if self.is_zero() {
            None
        } else {
            Some(Q::new(self.val.into(), self.ram.into()))
        }
    }

    pub fn val_index(&self) -> i64 {
        self.val
    }

    pub fn trunc_index(&self) -> i64 {
        self.trunc
    }

    pub fn truncation_exp(&self) -> Q {
        Q::new(self.trunc.into(), self.ram.into())
    }

    pub fn leading(&self) -> Option<&F> {
        self.coeffs.first()
    }

    /// Coefficient of z^(k/ram) by lattice index.
    pub fn coeff_index(&self, k: i64) -> F {
        if k < self.val {
            return F::zero();
        }
        self.coeffs
            .get((k - self.val) as usize)
            .cloned()
            .unwrap_or_else(F::zero)
    }

    /// Coefficient at a rational exponent (zero off the lattice).
    pub fn coeff(&self, expo: &Q) -> F {
        let scaled = expo * Q::from_integer(self.ram.into());
        if !scaled.is_integer() {
            return F::zero();
        }
        let k: i64 = int_to_i64(&scaled.to_integer());
        self.coeff_index(k)
    }

    /// Reinterpret on a finer lattice; `new_ram` must be a multiple of ram.
    pub fn with_ram(&self, new_ram: i64) -> Self {
        assert!(new_ram % self.ram == 0);
        let f = new_ram / self.ram;
        if f == 1 {
            return self.clone();
        }
        if self.is_zero() {
            return Self::zero_truncated(new_ram, self.trunc * f + (f - 1));
        }
        let mut coeffs = vec![F::zero(); ((self.coeffs.len() as i64 - 1) * f + 1) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * f as usize] = c.clone();
        }
        // Knowledge extends to just below the next original lattice point.
        Puiseux::new(new_ram, self.val * f, coeffs, self.trunc * f + (f - 1))
    }

    /// Drop all terms above `trunc` lattice steps (same lattice).
    pub fn truncated_index(&self, trunc: i64) -> Self {
        let trunc = trunc.min(self.trunc);
        Self::new(
            self.ram,
            self.val,
            self.coeffs
                .iter()
                .take((trunc - self.val + 1).max(0) as usize)
                .cloned()
                .collect(),
            trunc,
        )
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let ram = lcm64(self.ram, rhs.ram);
        let a = self.with_ram(ram);
        let b = rhs.with_ram(ram);
        let trunc = a.trunc.min(b.trunc);
        if a.is_zero() {
            return b.truncated_index(trunc);
        }
        if b.is_zero() {
            return a.truncated_index(trunc);
        }
        let val = a.val.min(b.val);
        let n = (trunc - val + 1).max(0) as usize;
        let mut out = vec![F::zero(); n];
        for (i, slot) in out.iter_mut().enumerate() {
            let k = val + i as i64;
            *slot = a.coeff_index(k) + b.coeff_index(k);
        }
        Self::new(ram, val, out, trunc)
    }

    pub fn neg(&self) -> Self {
        Puiseux {
            ram: self.ram,
            val: self.val,
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
            trunc: self.trunc,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let ram = lcm64(self.ram, rhs.ram);
        let a = self.with_ram(ram);
        let b = rhs.with_ram(ram);
        if a.is_zero() || b.is_zero() {
            // Truncation of a product with an (unknown-tail) zero factor.
            let trunc = (a.trunc + b.val).min(b.trunc + a.val);
            return Self::zero_truncated(ram, trunc);
        }
        let val = a.val + b.val;
        let trunc = (a.trunc + b.val).min(b.trunc + a.val);
        let n = (trunc - val + 1).max(0) as usize;
        let mut out = vec![F::zero(); n];
        for (i, ca) in a.coeffs.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (j, cb) in b.coeffs.iter().enumerate() {
                if i + j < n {
                    out[i + j] += ca.clone() * cb.clone();
                }
            }
        }
        Self::new(ram, val, out, trunc)
    }

    pub fn scale(&self, s: &F) -> Self {
        Puiseux {
            ram: self.ram,
            val: self.val,
            coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect(),
            trunc: self.trunc,
        }
    }

    /// Multiply by the monomial z^(k/ram) (lattice units of self).
    pub fn shift_index(&self, k: i64) -> Self {
        Puiseux {
            ram: self.ram,
            val: self.val + k,
            coeffs: self.coeffs.clone(),
            trunc: self.trunc + k,
        }
    }

    /// Multiplicative inverse; requires a nonzero leading coefficient.
    pub fn invert(&self) -> Result<Self, crate::ScalarError> {
        if self.is_zero() {
            return Err(crate::ScalarError::DivisionByZero);
        }
        let l0 = self.coeffs[0].inv();
        let terms = (self.trunc - self.val + 1) as usize;
        let mut inv = Vec::with_capacity(terms);
        inv.push(l0.clone());
        for k in 1..terms {
            let mut acc = F::zero();
            for j in 1..=k.min(self.coeffs.len() - 1) {
                if !self.coeffs[j].is_zero() {
                    acc += self.coeffs[j].clone() * inv[k - j].clone();
                }
            }
            inv.push(-(acc * l0.clone()));
        }
        // 1/f has valuation -val and the same number of known terms.
        Ok(Self::new(self.ram, -self.val, inv, self.trunc - 2 * self.val))
    }

    /// Term-by-term derivative: z^a -> a z^(a-1).
    pub fn derive(&self) -> Self {
        if self.is_zero() {
            return Self::zero_truncated(self.ram, self.trunc - self.ram);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = self.val + i as i64;
                c.clone() * F::from_rat(Q::new(k.into(), self.ram.into()))
            })
            .collect();
        Self::new(self.ram, self.val - self.ram, coeffs, self.trunc - self.ram)
    }

    /// Minimal lattice for the stored support.
    pub fn normalized(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut g = self.ram;
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                g = g.gcd(&(self.val + i as i64));
            }
            if g == 1 {
                return self.clone();
            }
        }
        let f = g;
        let coeffs = self
            .coeffs
            .iter()
            .step_by(f as usize)
            .cloned()
            .collect::<Vec<_>>();
        Puiseux::new(
            self.ram / f,
            self.val / f,
            coeffs,
            (self.trunc - (self.trunc.rem_euclid(f))) / f,
        )
    }
}

pub(crate) fn lcm64(a: i64, b: i64) -> i64 {
    a.lcm(&b)
}

pub(crate) fn denom_of(q: &Q) -> i64 {
    int_to_i64(q.denom())
}

pub(crate) fn int_to_i64(n: &num_bigint::BigInt) -> i64 {
    use num_traits::ToPrimitive;
    n.to_i64().expect("lattice index out of range")
}

/// Index of an exact lattice point.
pub(crate) fn lattice_index(q: &Q, ram: i64) -> i64 {
    let scaled = q * Q::from_integer(ram.into());
    assert!(scaled.is_integer(), "exponent off the lattice");
    int_to_i64(&scaled.to_integer())
}

pub(crate) fn floor_lattice(q: &Q, ram: i64) -> i64 {
    let scaled = q * Q::from_integer(ram.into());
    int_to_i64(&scaled.floor().to_integer())
}

impl<F: Field> fmt::Display for Puiseux<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "O(z^({}/{}))", self.trunc + 1, self.ram);
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
            let e = Q::new((self.val + i as i64).into(), self.ram.into());
            if e.is_zero() {
                write!(f, "({})", c)?;
            } else if e.is_one() {
                write!(f, "({})*z", c)?;
            } else {
                write!(f, "({})*z^({})", c, e)?;
            }
        }
        write!(f, " + O(z^({}/{}))", self.trunc + 1, self.ram)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::Cyclo;

    fn series(ram: i64, val: i64, coeffs: &[i64], trunc: i64) -> Puiseux<Cyclo> {
        Puiseux::new(
            ram,
            val,
            coeffs.iter().map(|&c| Cyclo::from_int(c)).collect(),
            trunc,
        )
    }

    #[test]
    fn product_of_conjugates() {
        // (1+z)(1-z) = 1 - z^2
        let a = series(1, 0, &[1, 1], 8);
        let b = series(1, 0, &[1, -1], 8);
        let p = a.mul(&b);
        assert_eq!(p.coeff_index(0), Cyclo::from_int(1));
        assert_eq!(p.coeff_index(1), Cyclo::from_int(0));
        assert_eq!(p.coeff_index(2), Cyclo::from_int(-1));
    }

    #[test]
    fn inverse_of_one_plus_z() {
        let a = series(1, 0, &[1, 1], 2);
        let inv = a.invert().unwrap();
        assert_eq!(inv.coeff_index(0), Cyclo::from_int(1));
        assert_eq!(inv.coeff_index(1), Cyclo::from_int(-1));
        assert_eq!(inv.coeff_index(2), Cyclo::from_int(1));
        let one = a.mul(&inv);
        assert!(one.coeff_index(0).is_one());
        assert!(one.coeff_index(1).is_zero());
        assert!(one.coeff_index(2).is_zero());
    }

    #[test]
    fn derivative_of_fractional_power() {
        // d/dz z^(5/4) = (5/4) z^(1/4)
        let a = Puiseux::monomial(
            Cyclo::from_int(1),
            Q::new(5.into(), 4.into()),
            1,
            Q::from_integer(3.into()),
        );
        let d = a.derive();
        assert_eq!(d.valuation(), Some(Q::new(1.into(), 4.into())));
        assert_eq!(
            d.leading().cloned(),
            Some(Cyclo::from_rat(Q::new(5.into(), 4.into())))
        );
    }

    #[test]
    fn truncation_tracks_products() {
        let a = series(1, 0, &[1, 1], 3);
        let b = series(1, 2, &[1], 10);
        let p = a.mul(&b);
        assert_eq!(p.trunc_index(), 5);
    }
}
