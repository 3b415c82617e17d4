//! Truncated matrix Puiseux series in the local coordinate z, the working
//! representation of a linear system near one singular point.
//!
//! Coefficients are dense on the lattice z^(1/ram): `coeffs[k]` is the
//! matrix coefficient of z^((val + k)/ram). Everything above index
//! `trunc` is unknown; operations shrink `trunc` conservatively.

use crate::catalog::{PointLoc, RationalMat};
use crate::field::Field;
use crate::linalg::Mat;
use crate::{K, Q};
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Error, Debug, Clone)]
pub enum HtlError {
    #[error("series truncation too shallow for the requested reduction")]
    TruncationTooShallow,
    #[error("reduction diverged: {0}")]
    ReductionDiverged(String),
    #[error("leading coefficient has a factor irreducible over Q(zeta_12): {0}")]
    IrreducibleLeading(String),
    #[error("entry has no matrix data at this point")]
    NotApplicable,
    #[error("gauge transformation is singular")]
    SingularGauge,
}

#[derive(Clone, Debug)]
pub struct MatSeries {
    pub dim: usize,
    /// Lattice denominator: exponents are index/ram.
    pub ram: i64,
    /// Lattice index of coeffs[0].
    pub val: i64,
    pub coeffs: Vec<Mat<K>>,
    /// Highest lattice index with a known coefficient.
    pub trunc: i64,
}

impl MatSeries {
    pub fn new(dim: usize, ram: i64, mut val: i64, mut coeffs: Vec<Mat<K>>, trunc: i64) -> Self {
        while coeffs.first().is_some_and(|m| m.is_zero()) {
            coeffs.remove(0);
            val += 1;
        }
        if coeffs.len() as i64 > trunc - val + 1 {
            coeffs.truncate((trunc - val + 1).max(0) as usize);
        }
        if coeffs.is_empty() {
            val = trunc + 1;
        }
        MatSeries {
            dim,
            ram,
            val,
            coeffs,
            trunc,
        }
    }

    pub fn zero_truncated(dim: usize, ram: i64, trunc: i64) -> Self {
        MatSeries {
            dim,
            ram,
            val: trunc + 1,
            coeffs: vec![],
            trunc,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|m| m.is_zero())
    }

    /// Coefficient at lattice index k (zero outside the stored range).
    pub fn coeff(&self, k: i64) -> Mat<K> {
        if k < self.val || k > self.trunc {
            return Mat::zeros(self.dim, self.dim);
        }
        self.coeffs
            .get((k - self.val) as usize)
            .cloned()
            .unwrap_or_else(|| Mat::zeros(self.dim, self.dim))
    }

    pub fn leading(&self) -> Option<&Mat<K>> {
        self.coeffs.first()
    }

    /// Leading exponent as a rational.
    pub fn valuation(&self) -> Option<Q> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(Q::new(self.val.into(), self.ram.into()))
        }
    }

    /// Pole order of the system dY/dz = M Y (0 for a regular point).
    pub fn pole_order(&self) -> Q {
        match self.valuation() {
            Some(v) if v < Q::zero() => -v,
            _ => Q::zero(),
        }
    }

    pub fn with_ram(&self, new_ram: i64) -> Self {
        assert!(new_ram % self.ram == 0);
        let f = new_ram / self.ram;
        if f == 1 {
            return self.clone();
        }
        if self.coeffs.is_empty() {
            return Self::zero_truncated(self.dim, new_ram, self.trunc * f + (f - 1));
        }
        let n = (self.coeffs.len() - 1) * f as usize + 1;
        let mut coeffs = vec![Mat::zeros(self.dim, self.dim); n];
        for (i, m) in self.coeffs.iter().enumerate() {
            coeffs[i * f as usize] = m.clone();
        }
        MatSeries::new(
            self.dim,
            new_ram,
            self.val * f,
            coeffs,
            self.trunc * f + (f - 1),
        )
    }

    pub fn truncated(&self, trunc: i64) -> Self {
        let trunc = trunc.min(self.trunc);
        MatSeries::new(
            self.dim,
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
        let ram = lcm(self.ram, rhs.ram);
        let a = self.with_ram(ram);
        let b = rhs.with_ram(ram);
        let trunc = a.trunc.min(b.trunc);
        let val = a.val.min(b.val).min(trunc + 1);
        let n = (trunc - val + 1).max(0) as usize;
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            let k = val + i as i64;
            coeffs.push(a.coeff(k) + b.coeff(k));
        }
        MatSeries::new(a.dim, ram, val, coeffs, trunc)
    }

    pub fn neg(&self) -> Self {
        MatSeries {
            dim: self.dim,
            ram: self.ram,
            val: self.val,
            coeffs: self.coeffs.iter().map(|m| -m.clone()).collect(),
            trunc: self.trunc,
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let ram = lcm(self.ram, rhs.ram);
        let a = self.with_ram(ram);
        let b = rhs.with_ram(ram);
        if a.coeffs.is_empty() || b.coeffs.is_empty() {
            let trunc = (a.trunc + b.val).min(b.trunc + a.val);
            return Self::zero_truncated(a.dim, ram, trunc);
        }
        let val = a.val + b.val;
        let trunc = (a.trunc + b.val).min(b.trunc + a.val);
        let n = (trunc - val + 1).max(0) as usize;
        let mut coeffs = vec![Mat::zeros(a.dim, a.dim); n];
        for (i, ma) in a.coeffs.iter().enumerate() {
            if ma.is_zero() {
                continue;
            }
            for (j, mb) in b.coeffs.iter().enumerate() {
                if i + j < n && !mb.is_zero() {
                    coeffs[i + j] = coeffs[i + j].clone() + ma.mat_mul(mb);
                }
            }
        }
        MatSeries::new(a.dim, ram, val, coeffs, trunc)
    }

    /// Term-by-term d/dz.
    pub fn derive(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let e = Q::new((self.val + i as i64).into(), self.ram.into());
                m.scale(&K::from_rat(e))
            })
            .collect();
        MatSeries::new(
            self.dim,
            self.ram,
            self.val - self.ram,
            coeffs,
            self.trunc - self.ram,
        )
    }

    /// Constant conjugation C^-1 M C.
    pub fn conjugate_const(&self, c: &Mat<K>, c_inv: &Mat<K>) -> Self {
        MatSeries {
            dim: self.dim,
            ram: self.ram,
            val: self.val,
            coeffs: self
                .coeffs
                .iter()
                .map(|m| c_inv.mat_mul(m).mat_mul(c))
                .collect(),
            trunc: self.trunc,
        }
    }

    /// Gauge by the diagonal monomial S = diag(z^e1, ..., z^en):
    /// M -> S^-1 M S - diag(e_i)/z.
    pub fn shear_gauge(&self, exps: &[Q]) -> Self {
        let mut ram = self.ram;
        for e in exps {
            ram = lcm(ram, denom(e));
        }
        let a = self.with_ram(ram);
        let shifts: Vec<i64> = exps
            .iter()
            .map(|e| {
                let s = e * Q::from_integer(ram.into());
                to_i64(&s.to_integer())
            })
            .collect();
        // Knowledge limit: entry (i,j) is known to trunc + s_j - s_i;
        // the safe common truncation is trunc + min(s_j - s_i).
        let min_shift = shifts
            .iter()
            .flat_map(|sj| shifts.iter().map(move |si| sj - si))
            .min()
            .unwrap_or(0);
        let trunc = a.trunc + min_shift;
        let mut lo = -ram;
        for (k0, m) in a.coeffs.iter().enumerate() {
            let k = a.val + k0 as i64;
            for i in 0..a.dim {
                for j in 0..a.dim {
                    if !m[(i, j)].is_zero() {
                        lo = lo.min(k + shifts[j] - shifts[i]);
                    }
                }
            }
        }
        let hi = trunc.max(lo);
        let n = (hi - lo + 1) as usize;
        let mut coeffs = vec![Mat::zeros(a.dim, a.dim); n];
        for (k0, m) in a.coeffs.iter().enumerate() {
            let k = a.val + k0 as i64;
            for i in 0..a.dim {
                for j in 0..a.dim {
                    if !m[(i, j)].is_zero() {
                        let kk = k + shifts[j] - shifts[i];
                        if kk <= trunc {
                            let slot = (kk - lo) as usize;
                            coeffs[slot][(i, j)] += m[(i, j)].clone();
                        }
                    }
                }
            }
        }
        if -ram >= lo && -ram <= trunc {
            let corr = (-ram - lo) as usize;
            for i in 0..a.dim {
                coeffs[corr][(i, i)] -= K::from_rat(exps[i].clone());
            }
        }
        MatSeries::new(a.dim, ram, lo, coeffs, trunc)
    }

    /// Subtract c * z^(k/ram) * I.
    pub fn subtract_scalar(&self, k: i64, c: &K) -> Self {
        let mut out = self.clone();
        if k < out.val {
            let pad = (out.val - k) as usize;
            let mut coeffs = vec![Mat::zeros(out.dim, out.dim); pad];
            coeffs.extend(out.coeffs);
            out.coeffs = coeffs;
            out.val = k;
        }
        let idx = (k - out.val) as usize;
        if out.coeffs.len() <= idx {
            out.coeffs.resize(idx + 1, Mat::zeros(out.dim, out.dim));
        }
        for i in 0..out.dim {
            out.coeffs[idx][(i, i)] -= c.clone();
        }
        MatSeries::new(out.dim, out.ram, out.val, out.coeffs, out.trunc)
    }

    /// Extract the principal sub-series on a row/column range.
    pub fn block(&self, start: usize, len: usize) -> Self {
        MatSeries::new(
            len,
            self.ram,
            self.val,
            self.coeffs
                .iter()
                .map(|m| m.block(start, start, len, len))
                .collect(),
            self.trunc,
        )
    }

    /// Series inverse of a matrix series with invertible leading part.
    pub fn invert(&self) -> Result<Self, HtlError> {
        let lead = self.leading().ok_or(HtlError::SingularGauge)?;
        let lead_inv = lead.inverse().map_err(|_| HtlError::SingularGauge)?;
        let terms = (self.trunc - self.val + 1) as usize;
        let mut inv: Vec<Mat<K>> = Vec::with_capacity(terms);
        inv.push(lead_inv.clone());
        for k in 1..terms {
            let mut acc = Mat::zeros(self.dim, self.dim);
            for j in 1..=k.min(self.coeffs.len() - 1) {
                if !self.coeffs[j].is_zero() {
                    acc = acc + self.coeffs[j].mat_mul(&inv[k - j]);
                }
            }
            inv.push(-(lead_inv.mat_mul(&acc)));
        }
        Ok(MatSeries::new(
            self.dim,
            self.ram,
            -self.val,
            inv,
            self.trunc - 2 * self.val,
        ))
    }

    /// Full gauge transform P^-1 M P - P^-1 P' (used by tests to verify
    /// invertibility of every reduction step).
    pub fn gauge(&self, p: &MatSeries) -> Result<Self, HtlError> {
        let p_inv = p.invert()?;
        let conj = p_inv.mul(&self.mul(p));
        let corr = p_inv.mul(&p.derive());
        Ok(conj.add(&corr.neg()))
    }
}

pub(crate) fn lcm(a: i64, b: i64) -> i64 {
    use num_integer::Integer;
    a.lcm(&b)
}

pub(crate) fn denom(q: &Q) -> i64 {
    to_i64(q.denom())
}

pub(crate) fn to_i64(n: &num_bigint::BigInt) -> i64 {
    use num_traits::ToPrimitive;
    n.to_i64().expect("lattice index overflow")
}

/// Expand the system at a singular point into a local series.
///
/// At a finite point z = x - u; at infinity z = 1/x with
/// dY/dz = -z^-2 A(1/z) Y. `depth` is the highest z-exponent kept.
pub fn localize_depth(
    rm: &RationalMat<K>,
    loc: &PointLoc,
    depth: i64,
) -> Result<MatSeries, HtlError> {
    let n = rm.dim();
    match loc {
        PointLoc::Symbolic(_) => Err(HtlError::NotApplicable),
        PointLoc::Finite(u) => {
            let u = K::from_rat(u.clone());
            let own_order = rm
                .poles
                .iter()
                .find(|(v, _)| *v == u)
                .map(|(_, ms)| ms.len() as i64)
                .unwrap_or(0);
            let val = -own_order;
            let m = (depth - val + 1).max(0) as usize;
            let mut coeffs = vec![Mat::zeros(n, n); m];
            for (v, ms) in &rm.poles {
                if *v == u {
                    for (k, mat) in ms.iter().enumerate() {
                        let idx = (-(k as i64 + 1) - val) as usize;
                        coeffs[idx] = coeffs[idx].clone() + mat.clone();
                    }
                } else {
                    // 1/(z + (u-v))^(k+1) expanded at z = 0.
                    let c = u.clone() - v.clone();
                    let c_inv = c.inv();
                    for (k, mat) in ms.iter().enumerate() {
                        let kk = k as i64 + 1;
                        let mut coef = c_inv.pow(kk);
                        for mm in 0..m as i64 {
                            let idx = (mm - val) as usize;
                            if idx < coeffs.len() {
                                coeffs[idx] = coeffs[idx].clone() + mat.scale(&coef);
                            }
                            let f = K::from_rat(Q::new((-(kk + mm)).into(), (mm + 1).into()));
                            coef = coef * f * c_inv.clone();
                        }
                    }
                }
            }
            for (j, mat) in rm.poly.iter().enumerate() {
                // (z+u)^j = sum binom(j,m) u^(j-m) z^m
                let mut bin = K::one();
                for mm in 0..=j {
                    let c = bin.clone() * u.pow((j - mm) as i64);
                    let idx = (mm as i64 - val) as usize;
                    if idx < coeffs.len() {
                        coeffs[idx] = coeffs[idx].clone() + mat.scale(&c);
                    }
                    bin = bin
                        * K::from_rat(Q::new(((j - mm) as i64).into(), (mm as i64 + 1).into()));
                }
            }
            Ok(MatSeries::new(n, 1, val, coeffs, depth))
        }
        PointLoc::Infinity => {
            let poly_deg = rm.poly.len() as i64 - 1;
            let val0 = -poly_deg.max(0);
            let m = (depth + 2 - val0 + 1).max(0) as usize;
            let mut coeffs = vec![Mat::zeros(n, n); m];
            for (j, mat) in rm.poly.iter().enumerate() {
                let idx = (-(j as i64) - val0) as usize;
                coeffs[idx] = coeffs[idx].clone() + mat.clone();
            }
            for (v, ms) in &rm.poles {
                for (k, mat) in ms.iter().enumerate() {
                    let kk = k as i64 + 1;
                    // 1/(1/z - v)^kk = z^kk (1 - vz)^-kk
                    let mut coef = K::one();
                    let mut mm = 0i64;
                    loop {
                        let e = kk + mm;
                        let idx = e - val0;
                        if idx as usize >= m {
                            break;
                        }
                        coeffs[idx as usize] = coeffs[idx as usize].clone() + mat.scale(&coef);
                        let f = K::from_rat(Q::new((kk + mm).into(), (mm + 1).into()));
                        coef = coef * f * v.clone();
                        mm += 1;
                    }
                }
            }
            // dY/dz = -z^-2 A(1/z) Y: shift exponents by -2 and negate.
            let shifted = MatSeries::new(n, 1, val0 - 2, coeffs, depth);
            Ok(shifted.neg())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;

    fn km(rows: Vec<Vec<i64>>) -> Mat<K> {
        Mat::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(K::from_int).collect())
                .collect(),
        )
    }

    #[test]
    fn localize_fuchsian_at_infinity_flips_sign() {
        // dY/dx = (C/x) Y  ->  dY/dz = (-C/z) Y
        let c = km(vec![vec![1, 2], vec![3, 4]]);
        let rm = RationalMat::<K> {
            poles: vec![(K::from_int(0), vec![c.clone()])],
            poly: vec![],
        };
        let s = localize_depth(&rm, &PointLoc::Infinity, 4).unwrap();
        assert_eq!(s.valuation(), Some(Q::new((-1).into(), 1.into())));
        assert_eq!(s.coeff(-1), -c);
        assert!(s.coeff(0).is_zero());
    }

    #[test]
    fn localize_geometric_expansion() {
        // M/(x-1) around x=0: -M (1 + z + z^2 + ...)
        let m = km(vec![vec![1, 0], vec![0, 1]]);
        let rm = RationalMat::<K> {
            poles: vec![(K::from_int(1), vec![m.clone()])],
            poly: vec![],
        };
        let s = localize_depth(&rm, &PointLoc::Finite(Q::zero()), 3).unwrap();
        for k in 0..=3 {
            assert_eq!(s.coeff(k), -m.clone());
        }
    }

    #[test]
    fn shear_of_jordan_block() {
        // M = e12 / z^2, shear by (0, 1/2): entry (1,2) shifts by +1/2,
        // and -diag(0, 1/2)/z appears.
        let e12 = km(vec![vec![0, 1], vec![0, 0]]);
        let m = MatSeries::new(2, 1, -2, vec![e12], 4);
        let sheared = m.shear_gauge(&[Q::zero(), Q::new(1.into(), 2.into())]);
        assert_eq!(sheared.ram, 2);
        let lead = sheared.coeff(-3);
        assert_eq!(lead[(0, 1)], K::from_int(1));
        let corr = sheared.coeff(-2);
        assert_eq!(corr[(1, 1)], K::ratio(-1, 2));
    }

    #[test]
    fn series_inverse_roundtrip() {
        let n = km(vec![vec![0, 3], vec![5, 0]]);
        let p = MatSeries::new(2, 1, 0, vec![Mat::identity(2), n], 5);
        let p_inv = p.invert().unwrap();
        let prod = p.mul(&p_inv);
        assert_eq!(prod.coeff(0), Mat::identity(2));
        for k in 1..=4 {
            assert!(prod.coeff(k).is_zero(), "order {} nonzero", k);
        }
    }
}
