//! Exact dense linear algebra over a [`Field`].

use crate::cyclo::Cyclo;
use crate::field::Field;
use crate::poly::Poly;
use crate::{Q, ScalarError};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, PartialEq)]
pub struct Mat<F: Field> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<F>,
}

impl<F: Field> Mat<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn diagonal(diag: Vec<F>) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.into_iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn map<G: Field>(&self, f: impl Fn(&F) -> G) -> Mat<G> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, s: &F) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    pub fn trace(&self) -> F {
        let mut acc = F::zero();
        for i in 0..self.rows.min(self.cols) {
            acc += self[(i, i)].clone();
        }
        acc
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Mat::from_fn(rows.len(), cols.len(), |i, j| {
            self[(rows[i], cols[j])].clone()
        })
    }

    /// Paste `block` with its top-left corner at (r0, c0).
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Mat<F>) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)].clone();
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Mat::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    pub fn hstack(blocks: &[Mat<F>]) -> Self {
        let rows = blocks[0].rows;
        assert!(blocks.iter().all(|b| b.rows == rows));
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(rows, cols);
        let mut off = 0;
        for b in blocks {
            m.set_block(0, off, b);
            off += b.cols;
        }
        m
    }

    pub fn vstack(blocks: &[Mat<F>]) -> Self {
        let cols = blocks[0].cols;
        assert!(blocks.iter().all(|b| b.cols == cols));
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut m = Self::zeros(rows, cols);
        let mut off = 0;
        for b in blocks {
            m.set_block(off, 0, b);
            off += b.rows;
        }
        m
    }

    pub fn block_diag(blocks: &[Mat<F>]) -> Self {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let c: usize = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(n, c);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            m.set_block(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        m
    }

    /// Reduced row echelon form; returns (rref, pivot column indices).
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].inv();
            for j in c..m.cols {
                m[(r, j)] = m[(r, j)].clone() * inv.clone();
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in c..m.cols {
                        let sub = m[(r, j)].clone() * f.clone();
                        m[(i, j)] = m[(i, j)].clone() - sub;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel, as columns.
    pub fn kernel(&self) -> Vec<Vec<F>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::new();
        for &fc in &free {
            let mut v = vec![F::zero(); self.cols];
            v[fc] = F::one();
            for (pi, &pc) in pivots.iter().enumerate() {
                v[pc] = -r[(pi, fc)].clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Solve `self * x = rhs` for a square system; errors when singular.
    pub fn solve(&self, rhs: &[F]) -> Result<Vec<F>, ScalarError> {
        assert!(self.is_square() && rhs.len() == self.rows);
        let aug = Mat::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                rhs[i].clone()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.len() != self.rows || pivots.iter().any(|&p| p >= self.cols) {
            return Err(ScalarError::SingularMatrix);
        }
        Ok((0..self.rows).map(|i| r[(i, self.cols)].clone()).collect())
    }

    /// Solve `self * X = rhs` column by column.
    pub fn solve_mat(&self, rhs: &Mat<F>) -> Result<Mat<F>, ScalarError> {
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for c in 0..rhs.cols {
            let col: Vec<F> = (0..rhs.rows).map(|i| rhs[(i, c)].clone()).collect();
            let x = self.solve(&col)?;
            for i in 0..self.rows {
                out[(i, c)] = x[i].clone();
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Result<Self, ScalarError> {
        self.solve_mat(&Mat::identity(self.rows))
    }

    pub fn mat_mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows);
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    out[(i, j)] += a.clone() * b.clone();
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[F]) -> Vec<F> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = F::zero();
                for j in 0..self.cols {
                    if !self[(i, j)].is_zero() && !v[j].is_zero() {
                        acc += self[(i, j)].clone() * v[j].clone();
                    }
                }
                acc
            })
            .collect()
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        self.mat_mul(rhs) - rhs.mat_mul(self)
    }

    /// Characteristic polynomial det(xI - M) by the Faddeev-LeVerrier
    /// recurrence (valid in characteristic zero).
    pub fn char_poly(&self) -> Poly<F> {
        assert!(self.is_square());
        let n = self.rows;
        let mut coeffs = vec![F::zero(); n + 1];
        coeffs[n] = F::one();
        let mut m = Mat::<F>::zeros(n, n);
        let mut c = F::one();
        for k in 1..=n {
            // M_k = A * M_{k-1} + c_{k-1} I
            let mut am = self.mat_mul(&m);
            for i in 0..n {
                am[(i, i)] += c.clone();
            }
            m = am;
            let t = self.mat_mul(&m).trace();
            c = -(t / F::from_i64(k as i64));
            coeffs[n - k] = c.clone();
        }
        Poly::new(coeffs)
    }

    pub fn eval_poly(&self, p: &Poly<F>) -> Self {
        let n = self.rows;
        let mut acc = Mat::zeros(n, n);
        for c in p.coeffs.iter().rev() {
            acc = self.mat_mul(&acc);
            for i in 0..n {
                acc[(i, i)] += c.clone();
            }
        }
        acc
    }
}

impl<F: Field> std::ops::Index<(usize, usize)> for Mat<F> {
    type Output = F;
    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.cols + j]
    }
}

impl<F: Field> std::ops::IndexMut<(usize, usize)> for Mat<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.cols + j]
    }
}

impl<F: Field> Add for Mat<F> {
    type Output = Mat<F>;
    fn add(self, rhs: Mat<F>) -> Mat<F> {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols);
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .into_iter()
                .zip(rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl<F: Field> Sub for Mat<F> {
    type Output = Mat<F>;
    fn sub(self, rhs: Mat<F>) -> Mat<F> {
        self + (-rhs)
    }
}

impl<F: Field> Neg for Mat<F> {
    type Output = Mat<F>;
    fn neg(self) -> Mat<F> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.into_iter().map(|x| -x).collect(),
        }
    }
}

impl<F: Field> Mul for Mat<F> {
    type Output = Mat<F>;
    fn mul(self, rhs: Mat<F>) -> Mat<F> {
        self.mat_mul(&rhs)
    }
}

impl<F: Field> fmt::Display for Mat<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

impl<F: Field> fmt::Debug for Mat<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

// ---------------------------------------------------------------------------
// Eigenvalue splitting over Q(zeta_12)
// ---------------------------------------------------------------------------

/// Outcome of [`eigen_split`]: either all roots with multiplicities, or the
/// factor that does not split over the field.
#[derive(Clone, Debug)]
pub enum EigenSplit {
    Split(Vec<(Cyclo, usize)>),
    IrreducibleBlock(Poly<Cyclo>),
}

/// Roots of the characteristic polynomial of `m` over Q(zeta_12).
///
/// Root search: squarefree decomposition, then candidates of the form
/// u * zeta^k with u a rational root of the Galois-norm polynomial of the
/// zeta^k-twisted squarefree part.
pub fn eigen_split(m: &Mat<Cyclo>) -> EigenSplit {
    assert!(m.rows <= 8, "eigen_split limited to dimension <= 8");
    let p = m.char_poly();
    roots_with_multiplicity(&p)
}

pub fn roots_with_multiplicity(p: &Poly<Cyclo>) -> EigenSplit {
    let n = p.degree().unwrap_or(0);
    let sf = p.squarefree_part();
    let mut roots = find_roots(&sf);
    roots.sort_by(root_order);
    roots.dedup();
    // Multiplicities by repeated exact division.
    let mut out = Vec::new();
    let mut rem = p.monic();
    let mut total = 0usize;
    for r in roots {
        let lin = Poly::new(vec![-r.clone(), Cyclo::one()]);
        let mut mult = 0usize;
        loop {
            let (q, rr) = rem.div_rem(&lin);
            if rr.is_zero() {
                rem = q;
                mult += 1;
            } else {
                break;
            }
        }
        if mult > 0 {
            total += mult;
            out.push((r, mult));
        }
    }
    if total < n {
        EigenSplit::IrreducibleBlock(rem)
    } else {
        EigenSplit::Split(out)
    }
}

fn root_order(a: &Cyclo, b: &Cyclo) -> std::cmp::Ordering {
    let key = |x: &Cyclo| {
        x.coeffs()
            .iter()
            .map(|q| (q.numer().clone(), q.denom().clone()))
            .collect::<Vec<_>>()
    };
    key(a).cmp(&key(b))
}

/// All roots in Q(zeta_12) of a squarefree polynomial.
fn find_roots(sf: &Poly<Cyclo>) -> Vec<Cyclo> {
    let mut roots = Vec::new();
    let mut work = sf.monic();
    // Strip zero roots.
    while !work.is_zero() && work.coeff(0).is_zero() {
        roots.push(Cyclo::zero());
        work = Poly::new(work.coeffs[1..].to_vec());
        break; // squarefree: at most one zero root
    }
    if work.degree().map_or(true, |d| d == 0) {
        return roots;
    }
    // Binomial fast path: X^m - c has roots c^(1/m) * zeta^(12j/m).
    if let Some(d) = work.degree() {
        let mid_zero = (1..d).all(|i| work.coeff(i).is_zero());
        if mid_zero && d >= 1 {
            let c = -work.coeff(0);
            if let Some(r0) = c.nth_root(d as u32) {
                if 12 % d == 0 && !r0.is_zero() {
                    let step = (12 / d) as i64;
                    for j in 0..d as i64 {
                        let cand = r0.clone() * Cyclo::zeta_pow(step * j);
                        if work.eval(&cand).is_zero() {
                            roots.push(cand);
                        }
                    }
                    if roots.len() >= d {
                        return roots;
                    }
                } else if work.eval(&r0).is_zero() {
                    roots.push(r0);
                }
            }
        }
    }
    // General path: for each twist X -> zeta^k X, a rational root u of
    // the twisted polynomial must annihilate all four basis components
    // simultaneously, so it is a root of their gcd over Q.
    for k in 0..6i64 {
        let twisted = twist(&work, k);
        let mut g: Option<Poly<Q>> = None;
        for comp in 0..4 {
            let pc = Poly::new(
                twisted
                    .coeffs
                    .iter()
                    .map(|c| c.coeffs()[comp].clone())
                    .collect(),
            );
            g = Some(match g {
                None => pc,
                Some(acc) => {
                    if pc.is_zero() {
                        acc
                    } else if acc.is_zero() {
                        pc
                    } else {
                        acc.gcd(&pc)
                    }
                }
            });
        }
        let g = g.unwrap();
        if g.degree().map_or(true, |d| d == 0) {
            continue;
        }
        for u in rational_roots(&g) {
            let cand = Cyclo::from_rat(u) * Cyclo::zeta_pow(k);
            if work.eval(&cand).is_zero() && !roots.contains(&cand) {
                roots.push(cand);
            }
        }
    }
    roots
}

/// p(zeta^k X): multiply coefficient i by zeta^(k i).
fn twist(p: &Poly<Cyclo>, k: i64) -> Poly<Cyclo> {
    Poly::new(
        p.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c.clone() * Cyclo::zeta_pow(k * i as i64))
            .collect(),
    )
}

/// Rational roots of a Q-polynomial. The polynomial is made monic and
/// rescaled to a monic integer polynomial whose rational roots are
/// integers dividing the constant term; candidates pass the classic
/// g(1)/g(-1) divisibility filters before an exact evaluation.
fn rational_roots(p: &Poly<Q>) -> Vec<Q> {
    if p.is_zero() {
        return vec![];
    }
    let mut roots = Vec::new();
    let mut work = p.clone();
    while !work.is_zero() && work.coeff(0).is_zero() {
        if !roots.contains(&Q::zero()) {
            roots.push(Q::zero());
        }
        work = Poly::new(work.coeffs[1..].to_vec());
    }
    let Some(d) = work.degree() else {
        return roots;
    };
    if d == 0 {
        return roots;
    }
    let monic = work.monic();
    if d == 1 {
        roots.push(-monic.coeff(0));
        return roots;
    }
    // Substitute x = y / L with L the common denominator: monic integer
    // polynomial g in y whose rational roots are integers.
    let mut lden = BigInt::one();
    for c in &monic.coeffs {
        lden = lden.lcm(c.denom());
    }
    let lq = Q::from_integer(lden.clone());
    // g_k = c_k * L^(d-k)
    let g: Vec<BigInt> = monic
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let scaled = c * num_traits::Pow::pow(&lq, (d - k) as u32);
            debug_assert!(scaled.is_integer());
            scaled.to_integer()
        })
        .collect();
    let gp = Poly::new(g.iter().map(|n| Q::from_integer(n.clone())).collect());
    let g0 = g[0].clone();
    if g0.is_zero() {
        // Zero roots were stripped above; nothing more.
        return roots;
    }
    let g_at_1 = gp.eval(&Q::one());
    let g_at_m1 = gp.eval(&-Q::one());
    let mut found = 0usize;
    for dv in divisors(&g0.abs()) {
        if found >= d {
            break;
        }
        for sign in [1i64, -1] {
            let y = &dv * BigInt::from(sign);
            // (y - 1) | g(1) and (y + 1) | g(-1).
            let ym1: BigInt = &y - 1;
            if !ym1.is_zero() && !(g_at_1.numer() % &ym1).is_zero() {
                continue;
            }
            let yp1: BigInt = &y + 1;
            if !yp1.is_zero() && !(g_at_m1.numer() % &yp1).is_zero() {
                continue;
            }
            let yq = Q::from_integer(y);
            if gp.eval(&yq).is_zero() {
                let r = yq / lq.clone();
                if !roots.contains(&r) {
                    roots.push(r);
                    found += 1;
                }
            }
        }
    }
    roots
}

/// Divisors built from trial division up to 10^5 plus the remaining
/// cofactor as a single unit. Capped to keep pathological inputs cheap.
fn divisors(n: &BigInt) -> Vec<BigInt> {
    const CAP: usize = 300000;
    if n.is_zero() {
        return vec![BigInt::one()];
    }
    let mut factors: Vec<(BigInt, u32)> = Vec::new();
    let mut m = n.clone();
    let mut p = BigInt::from(2u32);
    while &p * &p <= m && p < BigInt::from(100_000u32) {
        let mut e = 0u32;
        while (&m % &p).is_zero() {
            m /= &p;
            e += 1;
        }
        if e > 0 {
            factors.push((p.clone(), e));
        }
        p += if p == BigInt::from(2u32) { 1u32 } else { 2u32 };
    }
    if !m.is_one() {
        factors.push((m, 1));
    }
    let mut divs = vec![BigInt::one()];
    for (p, e) in factors {
        let mut next = Vec::with_capacity(divs.len() * (e as usize + 1));
        for d in &divs {
            let mut pw = BigInt::one();
            for _ in 0..=e {
                next.push(d * &pw);
                if next.len() > CAP {
                    return divs;
                }
                pw *= &p;
            }
        }
        divs = next;
    }
    divs
}

// ---------------------------------------------------------------------------
// Nilpotent Jordan normalization
// ---------------------------------------------------------------------------

/// For nilpotent `n`, a basis matrix C with C^-1 n C in Jordan form
/// (blocks ordered by decreasing size, ones on the superdiagonal).
/// Returns (C, block sizes).
pub fn nilpotent_jordan<F: Field>(n: &Mat<F>) -> (Mat<F>, Vec<usize>) {
    let dim = n.rows;
    // Kernel filtration K_1 subset ... subset K_h = V.
    let mut powers = vec![Mat::identity(dim)];
    let mut h = 0;
    loop {
        let next = n.mat_mul(powers.last().unwrap());
        powers.push(next.clone());
        h += 1;
        if next.is_zero() {
            break;
        }
        assert!(h <= dim, "matrix is not nilpotent");
    }
    // chains: (top vector, height)
    let mut tops: Vec<(Vec<F>, usize)> = Vec::new();
    for j in (1..=h).rev() {
        // Span to be complemented: ker N^(j-1) plus carried chain vectors.
        let ker_lower = powers[j - 1].kernel();
        let mut span: Vec<Vec<F>> = ker_lower;
        for (v, height) in &tops {
            if *height > j {
                span.push(powers[height - j].apply(v));
            }
        }
        let ker_j = powers[j].kernel();
        for v in ker_j {
            let mut rows: Vec<Vec<F>> = span.clone();
            for (t, height) in &tops {
                if *height == j {
                    rows.push(t.clone());
                }
            }
            rows.push(v.clone());
            let m = Mat::from_rows(rows.clone());
            if m.rank() == rows.len() {
                tops.push((v, j));
            }
        }
    }
    tops.sort_by_key(|(_, height)| std::cmp::Reverse(*height));
    let mut cols: Vec<Vec<F>> = Vec::with_capacity(dim);
    let mut sizes = Vec::new();
    for (v, height) in &tops {
        sizes.push(*height);
        for k in (0..*height).rev() {
            cols.push(powers[k].apply(v));
        }
    }
    assert_eq!(cols.len(), dim, "Jordan basis does not span");
    let c = Mat::from_rows(cols).transpose();
    (c, sizes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: i64) -> Cyclo {
        Cyclo::from_int(n)
    }

    fn m(rows: Vec<Vec<i64>>) -> Mat<Cyclo> {
        Mat::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(c).collect())
                .collect(),
        )
    }

    #[test]
    fn solve_identity_and_diagonal() {
        let id = Mat::<Cyclo>::identity(2);
        assert_eq!(id.solve(&[c(1), c(2)]).unwrap(), vec![c(1), c(2)]);
        let d = m(vec![vec![2, 0], vec![0, 4]]);
        assert_eq!(
            d.solve(&[c(1), c(1)]).unwrap(),
            vec![Cyclo::ratio(1, 2), Cyclo::ratio(1, 4)]
        );
    }

    #[test]
    fn solve_residual_is_exactly_zero() {
        // Deterministic pseudo-random 4x4 with small entries.
        let a = Mat::from_fn(4, 4, |i, j| c(((7 * i + 3 * j + 1) % 11) as i64 - 5));
        let rhs: Vec<Cyclo> = (0..4).map(|i| c(i as i64 + 1)).collect();
        let x = a.solve(&rhs).unwrap();
        let back = a.apply(&x);
        assert_eq!(back, rhs);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = m(vec![vec![1, 2], vec![2, 4]]);
        assert!(matches!(
            a.solve(&[c(1), c(1)]),
            Err(ScalarError::SingularMatrix)
        ));
    }

    #[test]
    fn eigen_split_diag_with_theta() {
        let a = m(vec![
            vec![0, 0, 0, 0],
            vec![0, 0, 0, 0],
            vec![0, 0, 0, 0],
            vec![0, 0, 0, 5],
        ]);
        match eigen_split(&a) {
            EigenSplit::Split(roots) => {
                assert_eq!(roots.len(), 2);
                assert!(roots.contains(&(c(0), 3)));
                assert!(roots.contains(&(c(5), 1)));
            }
            _ => panic!("should split"),
        }
    }

    #[test]
    fn eigen_split_companion_of_lambda4_minus_t() {
        // t = 4096 = 2^12, so the roots are 8 zeta^(3k).
        let mut a = Mat::<Cyclo>::zeros(4, 4);
        a[(0, 1)] = c(1);
        a[(1, 2)] = c(1);
        a[(2, 3)] = c(1);
        a[(3, 0)] = c(4096);
        match eigen_split(&a) {
            EigenSplit::Split(roots) => {
                let expect = [
                    c(8),
                    c(8) * Cyclo::i(),
                    c(-8),
                    c(-8) * Cyclo::i(),
                ];
                assert_eq!(roots.len(), 4);
                for e in expect {
                    assert!(roots.contains(&(e, 1)));
                }
            }
            _ => panic!("lambda^4 - 4096 splits over Q(zeta_12)"),
        }
    }

    #[test]
    fn eigen_split_nilpotent_jordan_block() {
        let mut a = Mat::<Cyclo>::zeros(4, 4);
        a[(0, 1)] = c(1);
        a[(1, 2)] = c(1);
        a[(2, 3)] = c(1);
        match eigen_split(&a) {
            EigenSplit::Split(roots) => assert_eq!(roots, vec![(c(0), 4)]),
            _ => panic!("nilpotent splits"),
        }
    }

    #[test]
    fn sum_of_multiplicities_and_root_check() {
        let a = m(vec![
            vec![1, 1, 0, 0],
            vec![0, 1, 0, 0],
            vec![0, 0, -3, 1],
            vec![0, 0, 0, 7],
        ]);
        let p = a.char_poly();
        match eigen_split(&a) {
            EigenSplit::Split(roots) => {
                let total: usize = roots.iter().map(|(_, m)| m).sum();
                assert_eq!(total, 4);
                for (r, _) in roots {
                    assert!(p.eval(&r).is_zero());
                }
            }
            _ => panic!(),
        }
    }

    #[test]
    fn irreducible_block_is_reported_not_fatal() {
        // lambda^2 - 2 has no root in Q(zeta_12).
        let a = m(vec![vec![0, 2], vec![1, 0]]);
        assert!(matches!(eigen_split(&a), EigenSplit::IrreducibleBlock(_)));
    }

    #[test]
    fn jordan_of_rank2_nilpotent() {
        // e12 + e41 has Jordan type (3, 1).
        let mut a = Mat::<Cyclo>::zeros(4, 4);
        a[(0, 1)] = c(1);
        a[(3, 0)] = c(1);
        let (cmat, sizes) = nilpotent_jordan(&a);
        assert_eq!(sizes, vec![3, 1]);
        let j = cmat.inverse().unwrap().mat_mul(&a).mat_mul(&cmat);
        let mut expect = Mat::<Cyclo>::zeros(4, 4);
        expect[(0, 1)] = c(1);
        expect[(1, 2)] = c(1);
        assert_eq!(j, expect);
    }
}
