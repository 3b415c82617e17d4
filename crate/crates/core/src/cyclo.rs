//! Exact arithmetic in the cyclotomic field Q(zeta_12).
//!
//! `zeta` is a primitive 12th root of unity with minimal polynomial
//! z^4 - z^2 + 1, so every element is stored on the basis
//! {1, zeta, zeta^2, zeta^3} and reduced by zeta^4 = zeta^2 - 1.
//! The field contains the imaginary unit i = zeta^3 and the primitive
//! cube root of unity omega = zeta^4 = zeta^2 - 1, which is what the
//! Riemann-scheme data needs once the times are specialized to powers.

use crate::field::Field;
use crate::Q;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// An element of Q(zeta_12): `c[0] + c[1] zeta + c[2] zeta^2 + c[3] zeta^3`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Cyclo {
    c: [Q; 4],
}

/// zeta^n on the basis (n taken mod 12), as small integer rows.
const POWER_TABLE: [[i8; 4]; 12] = [
    [1, 0, 0, 0],
    [0, 1, 0, 0],
    [0, 0, 1, 0],
    [0, 0, 0, 1],
    [-1, 0, 1, 0],
    [0, -1, 0, 1],
    [-1, 0, 0, 0],
    [0, -1, 0, 0],
    [0, 0, -1, 0],
    [0, 0, 0, -1],
    [1, 0, -1, 0],
    [0, 1, 0, -1],
];

impl Cyclo {
    pub fn new(c: [Q; 4]) -> Self {
        Cyclo { c }
    }

    pub fn from_rat(r: Q) -> Self {
        Cyclo {
            c: [r, Q::zero(), Q::zero(), Q::zero()],
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rat(Q::from_integer(n.into()))
    }

    /// Ratio of two integers; `d` must be nonzero.
    pub fn ratio(n: i64, d: i64) -> Self {
        Self::from_rat(Q::new(n.into(), d.into()))
    }

    /// zeta^n for any integer n.
    pub fn zeta_pow(n: i64) -> Self {
        let idx = n.rem_euclid(12) as usize;
        let row = &POWER_TABLE[idx];
        Cyclo {
            c: std::array::from_fn(|i| Q::from_integer(BigInt::from(row[i]))),
        }
    }

    pub fn zeta() -> Self {
        Self::zeta_pow(1)
    }

    /// The imaginary unit i = zeta^3.
    pub fn i() -> Self {
        Self::zeta_pow(3)
    }

    /// omega = zeta^4, a primitive cube root of unity.
    pub fn omega() -> Self {
        Self::zeta_pow(4)
    }

    pub fn coeffs(&self) -> &[Q; 4] {
        &self.c
    }

    pub fn is_rational(&self) -> bool {
        self.c[1].is_zero() && self.c[2].is_zero() && self.c[3].is_zero()
    }

    /// The rational part, if the element is rational.
    pub fn as_rat(&self) -> Option<&Q> {
        if self.is_rational() {
            Some(&self.c[0])
        } else {
            None
        }
    }

    /// Galois conjugation zeta -> zeta^k; `k` must be coprime to 12.
    pub fn galois(&self, k: u32) -> Self {
        debug_assert!(matches!(k, 1 | 5 | 7 | 11));
        let mut out = Cyclo::zero();
        for (j, cj) in self.c.iter().enumerate() {
            if !cj.is_zero() {
                out += Cyclo::zeta_pow((k as i64) * (j as i64)).scale(cj);
            }
        }
        out
    }

    fn scale(&self, r: &Q) -> Self {
        Cyclo {
            c: std::array::from_fn(|i| &self.c[i] * r),
        }
    }

    pub fn pow(&self, n: i64) -> Self {
        if n < 0 {
            return self.inv().pow(-n);
        }
        let mut base = self.clone();
        let mut exp = n as u64;
        let mut acc = Cyclo::one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            exp >>= 1;
        }
        acc
    }

    /// Exact m-th root when one of the form `u * zeta^l` (u rational) exists.
    pub fn nth_root(&self, m: u32) -> Option<Self> {
        if self.is_zero() {
            return Some(Self::zero());
        }
        for l in 0..12i64 {
            let cand = self.clone() * Cyclo::zeta_pow(-l * m as i64);
            if let Some(r) = cand.as_rat() {
                if let Some(u) = rat_nth_root(r, m) {
                    return Some(Cyclo::from_rat(u) * Cyclo::zeta_pow(l));
                }
            }
        }
        None
    }
}

/// Exact m-th root of a rational, if it exists (sign-aware for odd m).
pub fn rat_nth_root(r: &Q, m: u32) -> Option<Q> {
    if r.is_zero() {
        return Some(Q::zero());
    }
    if r.is_negative() && m % 2 == 0 {
        return None;
    }
    let num = r.numer().abs();
    let den = r.denom().clone();
    let rn = num.nth_root(m);
    let rd = den.nth_root(m);
    if num != num_traits::Pow::pow(&rn, m) || den != num_traits::Pow::pow(&rd, m) {
        return None;
    }
    let mut root = Q::new(rn, rd);
    if r.is_negative() {
        root = -root;
    }
    Some(root)
}

impl Zero for Cyclo {
    fn zero() -> Self {
        Cyclo {
            c: std::array::from_fn(|_| Q::zero()),
        }
    }
    fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }
}

impl One for Cyclo {
    fn one() -> Self {
        Self::from_int(1)
    }
    fn is_one(&self) -> bool {
        self.c[0].is_one() && self.c[1].is_zero() && self.c[2].is_zero() && self.c[3].is_zero()
    }
}

impl Add for Cyclo {
    type Output = Cyclo;
    fn add(mut self, rhs: Cyclo) -> Cyclo {
        self += rhs;
        self
    }
}

impl AddAssign for Cyclo {
    fn add_assign(&mut self, rhs: Cyclo) {
        for i in 0..4 {
            self.c[i] += &rhs.c[i];
        }
    }
}

impl Sub for Cyclo {
    type Output = Cyclo;
    fn sub(mut self, rhs: Cyclo) -> Cyclo {
        self -= rhs;
        self
    }
}

impl SubAssign for Cyclo {
    fn sub_assign(&mut self, rhs: Cyclo) {
        for i in 0..4 {
            self.c[i] -= &rhs.c[i];
        }
    }
}

impl Neg for Cyclo {
    type Output = Cyclo;
    fn neg(self) -> Cyclo {
        Cyclo {
            c: self.c.map(|x| -x),
        }
    }
}

impl Mul for Cyclo {
    type Output = Cyclo;
    fn mul(self, rhs: Cyclo) -> Cyclo {
        // Schoolbook product up to degree 6, then zeta^4 = zeta^2 - 1,
        // zeta^5 = zeta^3 - zeta, zeta^6 = -1.
        let mut p = [
            Q::zero(),
            Q::zero(),
            Q::zero(),
            Q::zero(),
            Q::zero(),
            Q::zero(),
            Q::zero(),
        ];
        for i in 0..4 {
            if self.c[i].is_zero() {
                continue;
            }
            for j in 0..4 {
                if rhs.c[j].is_zero() {
                    continue;
                }
                p[i + j] += &self.c[i] * &rhs.c[j];
            }
        }
        let [p0, p1, p2, p3, p4, p5, p6] = p;
        Cyclo {
            c: [p0 - &p4 - &p6, p1 - &p5, p2 + p4, p3 + p5],
        }
    }
}

impl MulAssign for Cyclo {
    fn mul_assign(&mut self, rhs: Cyclo) {
        *self = self.clone() * rhs;
    }
}

impl Div for Cyclo {
    type Output = Cyclo;
    fn div(self, rhs: Cyclo) -> Cyclo {
        self * rhs.inv()
    }
}

impl Field for Cyclo {
    fn try_inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        // Solve M x = e0 where M is the multiplication-by-self matrix on
        // the power basis.
        let mut cols: Vec<[Q; 4]> = Vec::with_capacity(4);
        for j in 0..4 {
            let col = self.clone() * Cyclo::zeta_pow(j);
            cols.push(col.c);
        }
        // Gaussian elimination on the 4x5 augmented system.
        let mut a: [[Q; 5]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| Q::zero()));
        for r in 0..4 {
            for (j, col) in cols.iter().enumerate() {
                a[r][j] = col[r].clone();
            }
            a[r][4] = if r == 0 { Q::one() } else { Q::zero() };
        }
        for col in 0..4 {
            let piv = (col..4).find(|&r| !a[r][col].is_zero())?;
            a.swap(col, piv);
            let inv = a[col][col].recip();
            for j in col..5 {
                a[col][j] = &a[col][j] * &inv;
            }
            for r in 0..4 {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    for j in col..5 {
                        let sub = &a[col][j] * &f;
                        a[r][j] = &a[r][j] - sub;
                    }
                }
            }
        }
        Some(Cyclo {
            c: std::array::from_fn(|r| a[r][4].clone()),
        })
    }

    fn from_rat(r: Q) -> Self {
        Cyclo::from_rat(r)
    }
}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (j, cj) in self.c.iter().enumerate() {
            if cj.is_zero() {
                continue;
            }
            let mag = cj.abs();
            let sign = if cj.is_negative() { "-" } else { "+" };
            if first {
                if cj.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", sign)?;
            }
            first = false;
            match j {
                0 => write!(f, "{}", mag)?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{}*", mag)?;
                    }
                    if j == 1 {
                        write!(f, "zeta")?;
                    } else {
                        write!(f, "zeta^{}", j)?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    #[test]
    fn zeta_cubed_squared_is_minus_one() {
        let i = Cyclo::i();
        assert_eq!(i.clone() * i, Cyclo::from_int(-1));
    }

    #[test]
    fn omega_is_cube_root_of_unity() {
        let om = Cyclo::omega();
        let lhs = om.pow(2) + om.clone() + Cyclo::one();
        assert!(lhs.is_zero());
        assert!(om.pow(3).is_one());
    }

    #[test]
    fn zeta_inverse_is_zeta_minus_zeta_cubed() {
        // Brute-force oracle: zeta^11 reduced modulo zeta^4 - zeta^2 + 1.
        let mut acc = Cyclo::one();
        for _ in 0..11 {
            acc = acc * Cyclo::zeta();
        }
        assert_eq!(Cyclo::zeta().inv(), acc);
        let expect = Cyclo::zeta() - Cyclo::zeta_pow(3);
        assert_eq!(acc, expect);
    }

    #[test]
    fn nth_roots() {
        let t = Cyclo::from_int(4096);
        assert_eq!(t.nth_root(4), Some(Cyclo::from_int(8)));
        assert_eq!(Cyclo::from_int(-1).nth_root(2), Some(Cyclo::zeta_pow(3)));
        assert_eq!(Cyclo::from_int(2).nth_root(2), None);
        let c = Cyclo::from_rat(q(27, 8));
        assert_eq!(c.nth_root(3), Some(Cyclo::from_rat(q(3, 2))));
    }

    #[test]
    fn galois_fixes_rationals_and_permutes_roots() {
        let x = Cyclo::from_rat(q(7, 3));
        assert_eq!(x.galois(5), x);
        let z = Cyclo::zeta();
        assert_eq!(z.galois(5), Cyclo::zeta_pow(5));
        // sigma_11 is complex conjugation: i -> -i.
        assert_eq!(Cyclo::i().galois(11), -Cyclo::i());
    }

    fn arb_cyclo() -> impl Strategy<Value = Cyclo> {
        let rat = (-12i64..=12, 1i64..=6).prop_map(|(n, d)| q(n, d));
        [rat.clone(), rat.clone(), rat.clone(), rat]
            .prop_map(|c: [Q; 4]| Cyclo::new(c))
    }

    proptest! {
        #[test]
        fn field_axioms(a in arb_cyclo(), b in arb_cyclo(), c in arb_cyclo()) {
            let assoc = (a.clone() * b.clone()) * c.clone();
            let assoc2 = a.clone() * (b.clone() * c.clone());
            prop_assert_eq!(assoc, assoc2);
            let dist = a.clone() * (b.clone() + c.clone());
            let dist2 = a.clone() * b.clone() + a.clone() * c.clone();
            prop_assert_eq!(dist, dist2);
            if !a.is_zero() {
                prop_assert!((a.clone() * a.inv()).is_one());
            }
        }

        #[test]
        fn galois_is_multiplicative(a in arb_cyclo(), b in arb_cyclo()) {
            for k in [5u32, 7, 11] {
                let lhs = (a.clone() * b.clone()).galois(k);
                let rhs = a.galois(k) * b.galois(k);
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
