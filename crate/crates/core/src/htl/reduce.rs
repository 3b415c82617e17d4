//! Reduction of a local system to its canonical form: block
//! diagonalization along eigenvalue groups of the leading coefficient,
//! scalar exponential shifts, and shearing transformations for nilpotent
//! leading parts.

use super::series::{denom, lcm, HtlError, MatSeries};
use crate::catalog::{PointLoc, RationalMat};
use crate::linalg::{eigen_split, nilpotent_jordan, EigenSplit, Mat};
use crate::{K, Q};
use num_traits::{One, Zero};

/// One shearing step; s0 is the smallest beta-coordinate among
/// intersections of the negative-slope exponent lines with beta = s.
#[derive(Clone, Debug)]
pub struct ShearStep {
    /// Dimension of the block being sheared.
    pub block_dim: usize,
    /// Pole order of the block when the shear was applied.
    pub pole: Q,
    /// The chosen shearing exponent.
    pub s0: Q,
    /// The gauge exponents (0, s0, ..., (m-1) s0).
    pub exponents: Vec<Q>,
}

/// Exponential and residue data of one reduction leaf: a block whose
/// series is regular singular after the recorded scalar shifts.
#[derive(Clone, Debug)]
pub struct Leaf {
    pub size: usize,
    /// Scalar exponential coefficients at levels > 1, sparse.
    pub shifts: Vec<(Q, K)>,
    /// Residue eigenvalues with multiplicities.
    pub residue_eigs: Vec<(K, usize)>,
    /// Jordan block sizes of the residue per eigenvalue.
    pub residue_jordan: Vec<(K, Vec<usize>)>,
}

/// The canonical form at one singular point.
#[derive(Clone, Debug)]
pub struct HtlForm {
    pub dim: usize,
    pub leaves: Vec<Leaf>,
    pub shears: Vec<ShearStep>,
    /// The finest exponent lattice any gauge step used. Residues are
    /// canonical modulo 1/gauge_lattice per row (the exp(2 pi i k Theta)
    /// equivalence); 1 at points reduced without fractional shears.
    pub gauge_lattice: i64,
}

impl HtlForm {
    /// Minimal ramification: lcm of the denominators of all levels with a
    /// nonzero exponential coefficient.
    pub fn ramification(&self) -> i64 {
        let mut r = 1;
        for leaf in &self.leaves {
            for (l, c) in &leaf.shifts {
                if !c.is_zero() {
                    r = lcm(r, denom(l));
                }
            }
        }
        r
    }

    /// Distinct levels with nonzero diagonal, descending (residue level 1
    /// excluded).
    pub fn levels(&self) -> Vec<Q> {
        let mut ls: Vec<Q> = Vec::new();
        for leaf in &self.leaves {
            for (l, c) in &leaf.shifts {
                if !c.is_zero() && !ls.contains(l) {
                    ls.push(l.clone());
                }
            }
        }
        ls.sort_by(|a, b| b.cmp(a));
        ls
    }

    /// The highest level l0 (1 when the point is regular singular).
    pub fn top_level(&self) -> Q {
        self.levels().first().cloned().unwrap_or_else(Q::one)
    }

    pub fn poincare_rank(&self) -> Q {
        self.top_level() - Q::one()
    }

    /// The column levels of the printed schemes: l0 down to 1 + 1/ram in
    /// steps of 1/ram.
    pub fn column_levels(&self) -> Vec<Q> {
        let ram = self.ramification();
        let top = self.top_level();
        let mut out = Vec::new();
        let step = Q::new(1.into(), ram.into());
        let mut l = top;
        while l > Q::one() {
            out.push(l.clone());
            l -= step.clone();
        }
        out
    }

    /// Rows (exponential coefficients by descending column level, residue
    /// eigenvalue), one row per formal solution.
    pub fn exponent_table(&self) -> Vec<(Vec<K>, K)> {
        let steps = self.column_levels();
        let mut rows = Vec::with_capacity(self.dim);
        for leaf in &self.leaves {
            let exps: Vec<K> = steps
                .iter()
                .map(|l| {
                    leaf.shifts
                        .iter()
                        .find(|(ll, _)| ll == l)
                        .map(|(_, c)| c.clone())
                        .unwrap_or_else(K::zero)
                })
                .collect();
            for (eig, mult) in &leaf.residue_eigs {
                for _ in 0..*mult {
                    rows.push((exps.clone(), eig.clone()));
                }
            }
        }
        rows
    }

    /// Rows with cycle-canonical residues: within one Galois cycle of a
    /// ramified group, sheet residues are only defined modulo 1/r (a
    /// monomial regauge on the cycle shifts them); the canonical
    /// representative makes congruent residues equal, which is how the
    /// schemes print them. Unramified rows are left untouched.
    pub fn canonical_rows(&self) -> Vec<(Vec<K>, K)> {
        let rows = self.exponent_table();
        let steps = self.column_levels();
        let rot = |exps: &[K]| -> Vec<K> {
            exps.iter()
                .zip(steps.iter())
                .map(|(c, l)| {
                    let twelve_l = l * Q::from_integer(12.into());
                    let e = super::series::to_i64(&twelve_l.to_integer());
                    c.clone() * K::zeta_pow(-e)
                })
                .collect()
        };
        // Orbit key: lexicographically minimal rotation image.
        let orbit_key = |exps: &[K]| -> String {
            let mut best: Option<String> = None;
            let mut cur = exps.to_vec();
            for _ in 0..12 {
                let s = cur.iter().map(|c| format!("{};", c)).collect::<String>();
                if best.as_ref().map_or(true, |b| s < *b) {
                    best = Some(s);
                }
                cur = rot(&cur);
            }
            best.unwrap()
        };
        // Group row indices by orbit.
        let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
        for (i, (exps, _)) in rows.iter().enumerate() {
            let key = orbit_key(exps);
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, v)) => v.push(i),
                None => groups.push((key, vec![i])),
            }
        }
        let mut out = rows.clone();
        for (_, idxs) in groups {
            // Cycle ramification from the group's own level support.
            let mut r = 1i64;
            for &i in &idxs {
                for (si, l) in steps.iter().enumerate() {
                    if !rows[i].0[si].is_zero() {
                        r = super::series::lcm(r, denom(l));
                    }
                }
            }
            if r <= 1 {
                continue;
            }
            // Congruence classes modulo the gauge lattice; each class
            // collapses to its representative.
            let k_lat = self.gauge_lattice.max(r);
            let mut classes: Vec<(K, Vec<usize>)> = Vec::new();
            for &i in &idxs {
                let res = rows[i].1.clone();
                let hit = classes.iter_mut().find(|(rep, _)| {
                    let d = (res.clone() - rep.clone()) * K::from_int(k_lat);
                    d.as_rat().is_some_and(|q| q.is_integer())
                });
                match hit {
                    Some((_, v)) => v.push(i),
                    None => classes.push((res, vec![i])),
                }
            }
            // Collapse each class to its first representative: the
            // members differ by multiples of 1/r, which a monomial
            // regauge of the cycle removes; the mean would leave the
            // congruence class.
            for (rep, members) in classes {
                for &i in &members {
                    out[i].1 = rep.clone();
                }
            }
        }
        out
    }

    /// Partition of the canonical rows into rotation cycles; returns
    /// (row indices, ramification) per cycle (r = 1 for unramified rows).
    pub fn cycle_partition(&self) -> Vec<(Vec<usize>, i64)> {
        let rows = self.canonical_rows();
        let steps = self.column_levels();
        let rot = |exps: &[K]| -> Vec<K> {
            exps.iter()
                .zip(steps.iter())
                .map(|(c, l)| {
                    let twelve_l = l * Q::from_integer(12.into());
                    let e = super::series::to_i64(&twelve_l.to_integer());
                    c.clone() * K::zeta_pow(-e)
                })
                .collect()
        };
        let orbit_key = |exps: &[K]| -> String {
            let mut best: Option<String> = None;
            let mut cur = exps.to_vec();
            for _ in 0..12 {
                let s = cur.iter().map(|c| format!("{};", c)).collect::<String>();
                if best.as_ref().map_or(true, |b| s < *b) {
                    best = Some(s);
                }
                cur = rot(&cur);
            }
            best.unwrap()
        };
        let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
        for (i, (exps, _)) in rows.iter().enumerate() {
            let key = orbit_key(exps);
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, v)) => v.push(i),
                None => groups.push((key, vec![i])),
            }
        }
        groups
            .into_iter()
            .map(|(_, idxs)| {
                let mut r = 1i64;
                for &i in &idxs {
                    for (si, l) in steps.iter().enumerate() {
                        if !rows[i].0[si].is_zero() {
                            r = super::series::lcm(r, denom(l));
                        }
                    }
                }
                (idxs, r)
            })
            .collect()
    }

    /// Raw residues per row (no normalization).
    pub fn raw_residues(&self) -> Vec<K> {
        self.exponent_table().into_iter().map(|(_, r)| r).collect()
    }

    /// Residues after removing the common scalar shift (the mean).
    pub fn normalized_residues(&self) -> Vec<K> {
        let raw = self.raw_residues();
        let n = raw.len() as i64;
        let mut mean = K::zero();
        for r in &raw {
            mean += r.clone();
        }
        mean = mean * K::from_rat(Q::new(1.into(), n.into()));
        raw.into_iter().map(|r| r - mean.clone()).collect()
    }
}

/// Localize with the default depth (the retry loop in `reduce_at_point`
/// re-expands deeper when the reduction runs out of terms).
pub fn localize(rm: &RationalMat<K>, loc: &PointLoc) -> Result<MatSeries, HtlError> {
    super::series::localize_depth(rm, loc, 6)
}

/// Full pipeline with shallow-truncation retries (doubled depth, twice).
pub fn reduce_at_point(rm: &RationalMat<K>, loc: &PointLoc) -> Result<HtlForm, HtlError> {
    let mut depth = 6;
    for attempt in 0..3 {
        let series = super::series::localize_depth(rm, loc, depth)?;
        match htl_form(&series) {
            Err(HtlError::TruncationTooShallow) if attempt < 2 => {
                depth *= 2;
            }
            other => return other,
        }
    }
    Err(HtlError::TruncationTooShallow)
}

/// Reduce a local series to its canonical form.
pub fn htl_form(series: &MatSeries) -> Result<HtlForm, HtlError> {
    let mut leaves = Vec::new();
    let mut shears = Vec::new();
    let lattice_bound = series.ram * lcm_up_to(series.dim as i64);
    let mut gauge_lattice = series.ram;
    reduce_block(
        series.clone(),
        Vec::new(),
        &mut leaves,
        &mut shears,
        lattice_bound,
        &mut gauge_lattice,
    )?;
    let dim: usize = leaves.iter().map(|l| l.size).sum();
    debug_assert_eq!(dim, series.dim);
    Ok(HtlForm {
        dim,
        leaves,
        shears,
        gauge_lattice,
    })
}

fn reduce_block(
    mut m: MatSeries,
    mut shifts: Vec<(Q, K)>,
    leaves: &mut Vec<Leaf>,
    shears: &mut Vec<ShearStep>,
    lattice_bound: i64,
    gauge_lattice: &mut i64,
) -> Result<(), HtlError> {
    let mut guard = 0;
    loop {
        guard += 1;
        if guard > 300 {
            return Err(HtlError::ReductionDiverged(
                "iteration limit exceeded".into(),
            ));
        }
        // The residue coefficient must be known exactly.
        if m.trunc < -m.ram {
            return Err(HtlError::TruncationTooShallow);
        }
        if m.is_zero() || m.pole_order() <= Q::one() {
            leaves.push(finish_regular(&m, shifts)?);
            return Ok(());
        }
        let pole = m.pole_order();
        let a0 = m.leading().unwrap().clone();
        match eigen_split(&a0) {
            EigenSplit::IrreducibleBlock(p) => {
                return Err(HtlError::IrreducibleLeading(format!("{}", p)));
            }
            EigenSplit::Split(roots) => {
                if roots.len() > 1 {
                    let blocks = block_diagonalize_roots(&m, &roots)?;
                    for b in blocks {
                        reduce_block(b, shifts.clone(), leaves, shears, lattice_bound, gauge_lattice)?;
                    }
                    return Ok(());
                }
                let (lambda, _) = roots.into_iter().next().unwrap();
                if !lambda.is_zero() {
                    // Scalar shift: remove lambda I / z^pole.
                    shifts.push((pole.clone(), lambda.clone()));
                    m = m.subtract_scalar(m.val, &lambda);
                    continue;
                }
                // Nilpotent leading coefficient: Jordanize, then shear.
                let (c, sizes) = nilpotent_jordan(&a0);
                let c_inv = c.inverse().map_err(|_| HtlError::SingularGauge)?;
                m = m.conjugate_const(&c, &c_inv);
                // Admissible shears live on the invariant exponent
                // lattice (level denominators divide lcm(1..dim)); each
                // accepted shear must strictly lower the pole order, so
                // the episode terminates on that fixed lattice.
                let cands = shear_candidates(&m, &sizes, lattice_bound);
                let mut accepted = false;
                for (s0, exps) in cands {
                    let sheared = m.shear_gauge(&exps);
                    if sheared.trunc < -sheared.ram {
                        return Err(HtlError::TruncationTooShallow);
                    }
                    if sheared.pole_order() < pole {
                        shears.push(ShearStep {
                            block_dim: m.dim,
                            pole: pole.clone(),
                            s0,
                            exponents: exps,
                        });
                        m = sheared;
                        *gauge_lattice = lcm(*gauge_lattice, m.ram);
                        accepted = true;
                        break;
                    }
                }
                if !accepted {
                    // Either the series is too shallow to expose the
                    // sub-diagonal support or no admissible line makes
                    // progress; a deeper expansion decides which.
                    return Err(HtlError::TruncationTooShallow);
                }
            }
        }
    }
}

fn lcm_up_to(n: i64) -> i64 {
    let mut out = 1;
    for k in 2..=n.max(1) {
        out = lcm(out, k);
    }
    out
}

/// Shear candidates per the alpha/beta rule: with gauge exponents e_i,
/// entries with e_j < e_i give lines beta = (e_j - e_i)/s * s + alpha_ij
/// whose intersection with beta = s is at s = alpha / (1 + stair_i -
/// stair_j). Candidates come from the full staircase (0, s, ..., (m-1)s)
/// and from the per-Jordan-block staircase, are filtered to the
/// invariant lattice, and are tried smallest first.
fn shear_candidates(m: &MatSeries, sizes: &[usize], lattice_bound: i64) -> Vec<(Q, Vec<Q>)> {
    // Staircase index vectors.
    let global: Vec<i64> = (0..m.dim as i64).collect();
    let mut per_block = Vec::with_capacity(m.dim);
    for sz in sizes {
        for k in 0..*sz {
            per_block.push(k as i64);
        }
    }
    let mut cands: Vec<(Q, Vec<Q>)> = Vec::new();
    for stair in [&global, &per_block] {
        for i in 0..m.dim {
            for j in 0..m.dim {
                let drop = stair[i] - stair[j];
                if drop <= 0 {
                    continue;
                }
                // Valuation of entry (i, j) in lattice units above the pole.
                let mut alpha = None;
                for k in 0..m.coeffs.len() {
                    if !m.coeffs[k][(i, j)].is_zero() {
                        alpha = Some(k as i64);
                        break;
                    }
                }
                let Some(a) = alpha else { continue };
                let s = Q::new(a.into(), (m.ram * (1 + drop)).into());
                if s <= Q::zero() {
                    continue;
                }
                if lcm(m.ram, denom(&s)) > lattice_bound
                    || lattice_bound % lcm(m.ram, denom(&s)) != 0
                {
                    continue;
                }
                let exps: Vec<Q> = stair
                    .iter()
                    .map(|&k| Q::from_integer(k.into()) * s.clone())
                    .collect();
                if !cands.iter().any(|(cs, ce)| *cs == s && *ce == exps) {
                    cands.push((s, exps));
                }
            }
        }
    }
    // Smallest shear first; the full staircase was generated first, so a
    // stable sort keeps it ahead on ties.
    cands.sort_by(|a, b| a.0.cmp(&b.0));
    cands
}

/// Block-diagonalize a series whose leading coefficient splits into
/// several eigenvalue groups; returns the diagonal blocks.
fn block_diagonalize_roots(
    m: &MatSeries,
    roots: &[(K, usize)],
) -> Result<Vec<MatSeries>, HtlError> {
    let (blocks, _c, _p, b) = block_diagonalize_full(m, roots)?;
    let _ = b;
    Ok(blocks)
}

/// Returns (blocks, constant basis C, series gauge P, block-diagonal B)
/// with A^(C then P) = B to the available truncation.
#[allow(clippy::type_complexity)]
pub fn block_diagonalize_full(
    m: &MatSeries,
    roots: &[(K, usize)],
) -> Result<(Vec<MatSeries>, Mat<K>, MatSeries, MatSeries), HtlError> {
    let n = m.dim;
    let a0 = m.leading().ok_or(HtlError::TruncationTooShallow)?.clone();
    // Constant conjugation into generalized eigenspaces.
    let mut cols: Vec<Vec<K>> = Vec::with_capacity(n);
    let mut sizes = Vec::new();
    for (lambda, mult) in roots {
        let mut shifted = a0.clone();
        for i in 0..n {
            shifted[(i, i)] -= lambda.clone();
        }
        let mut power = Mat::identity(n);
        for _ in 0..*mult {
            power = shifted.mat_mul(&power);
        }
        let basis = power.kernel();
        if basis.len() != *mult {
            return Err(HtlError::ReductionDiverged(
                "generalized eigenspace dimension mismatch".into(),
            ));
        }
        sizes.push(*mult);
        cols.extend(basis);
    }
    let c = Mat::from_rows(cols).transpose();
    let c_inv = c.inverse().map_err(|_| HtlError::SingularGauge)?;
    let m1 = m.conjugate_const(&c, &c_inv);

    // Order-by-order splitting: P = I + sum P_k zeta^k with off-diagonal
    // blocks only; B = block-diagonal part.
    let ram = m1.ram;
    let lpole = -m1.val; // pole in lattice units, > ram here
    let budget = (m1.trunc - m1.val) as usize;
    let a: Vec<Mat<K>> = (0..=budget as i64).map(|k| m1.coeff(m1.val + k)).collect();
    let mut p: Vec<Mat<K>> = vec![Mat::identity(n)];
    let mut b: Vec<Mat<K>> = vec![a[0].clone()];
    let starts: Vec<usize> = sizes
        .iter()
        .scan(0usize, |acc, s| {
            let out = *acc;
            *acc += s;
            Some(out)
        })
        .collect();
    for k in 1..=budget {
        // KNOWN_k = sum_{i=1..k} A_i P_{k-i} - sum_{j=1..k-1} P_j B_{k-j}
        //           - derivative term.
        let mut known = Mat::zeros(n, n);
        for i in 1..=k {
            if !a[i].is_zero() && !p[k - i].is_zero() {
                known = known + a[i].mat_mul(&p[k - i]);
            }
        }
        for j in 1..k {
            if !p[j].is_zero() && !b[k - j].is_zero() {
                known = known + -(p[j].mat_mul(&b[k - j]));
            }
        }
        // d/dz contributes P_{k'} (k'/ram) at order k with
        // k' = k - (lpole - ram).
        let kp = k as i64 - (lpole - ram);
        if kp >= 1 && (kp as usize) < p.len() {
            let f = K::from_rat(Q::new(kp.into(), ram.into()));
            known = known + -(p[kp as usize].scale(&f));
        }
        // [A_0, P_k] = B_k - KNOWN_k: B_k takes the diagonal blocks of
        // KNOWN_k; the off-diagonal blocks of P_k solve Sylvester
        // equations with disjoint spectra.
        let mut bk = Mat::zeros(n, n);
        let mut pk = Mat::zeros(n, n);
        for (bi, (&ri, &si)) in starts.iter().zip(sizes.iter()).enumerate() {
            for (bj, (&rj, &sj)) in starts.iter().zip(sizes.iter()).enumerate() {
                let kb = known.block(ri, rj, si, sj);
                if bi == bj {
                    bk.set_block(ri, rj, &kb);
                } else {
                    let la = a[0].block(ri, ri, si, si);
                    let lb = a[0].block(rj, rj, sj, sj);
                    let x = solve_sylvester(&la, &lb, &-kb)?;
                    pk.set_block(ri, rj, &x);
                }
            }
        }
        p.push(pk);
        b.push(bk);
    }
    let p_series = MatSeries::new(n, ram, 0, p, budget as i64);
    let b_series = MatSeries::new(n, ram, m1.val, b, m1.trunc);
    let blocks = starts
        .iter()
        .zip(sizes.iter())
        .map(|(&r0, &s)| b_series.block(r0, s))
        .collect();
    Ok((blocks, c, p_series, b_series))
}

/// Solve L X - X R = RHS where L and R have disjoint spectra.
fn solve_sylvester(l: &Mat<K>, r: &Mat<K>, rhs: &Mat<K>) -> Result<Mat<K>, HtlError> {
    let (si, sj) = (l.rows, r.rows);
    let n = si * sj;
    // Row-major vectorization: coefficient matrix of x_(i,j).
    let mut sys = Mat::zeros(n, n);
    let mut vec = vec![K::zero(); n];
    for i in 0..si {
        for j in 0..sj {
            let row = i * sj + j;
            vec[row] = rhs[(i, j)].clone();
            for k in 0..si {
                sys[(row, k * sj + j)] += l[(i, k)].clone();
            }
            for k in 0..sj {
                sys[(row, i * sj + k)] -= r[(k, j)].clone();
            }
        }
    }
    let sol = sys
        .solve(&vec)
        .map_err(|_| HtlError::ReductionDiverged("resonant Sylvester system".into()))?;
    let mut x = Mat::zeros(si, sj);
    for i in 0..si {
        for j in 0..sj {
            x[(i, j)] = sol[i * sj + j].clone();
        }
    }
    Ok(x)
}

/// Regular-singular endpoint: extract the residue and its eigen data.
fn finish_regular(m: &MatSeries, shifts: Vec<(Q, K)>) -> Result<Leaf, HtlError> {
    if m.trunc < -m.ram {
        return Err(HtlError::TruncationTooShallow);
    }
    let res = m.coeff(-m.ram);
    let eigs = match eigen_split(&res) {
        EigenSplit::Split(roots) => roots,
        EigenSplit::IrreducibleBlock(p) => {
            return Err(HtlError::IrreducibleLeading(format!("{}", p)));
        }
    };
    let mut jordan = Vec::new();
    for (lambda, mult) in &eigs {
        let mut shifted = res.clone();
        for i in 0..res.rows {
            shifted[(i, i)] -= lambda.clone();
        }
        // Block sizes from kernel dimensions of successive powers.
        let mut dims = vec![0usize];
        let mut power = Mat::identity(res.rows);
        loop {
            power = shifted.mat_mul(&power);
            let d = power.kernel().len();
            dims.push(d);
            if d >= *mult || dims.len() > res.rows + 1 {
                break;
            }
        }
        let mut sizes = Vec::new();
        for k in 1..dims.len() {
            let blocks_ge_k = dims[k] - dims[k - 1];
            for _ in sizes.len()..blocks_ge_k {
                sizes.push(0);
            }
            for s in sizes.iter_mut().take(blocks_ge_k) {
                *s += 1;
            }
        }
        sizes.sort_unstable_by(|x, y| y.cmp(x));
        jordan.push((lambda.clone(), sizes));
    }
    Ok(Leaf {
        size: m.dim,
        shifts,
        residue_eigs: eigs,
        residue_jordan: jordan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn km(rows: Vec<Vec<i64>>) -> Mat<K> {
        Mat::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(K::from_int).collect())
                .collect(),
        )
    }

    #[test]
    fn fuchsian_residue_is_read_off() {
        // dY/dz = (D/z) Y with D = diag(1,2,3,4).
        let d = km(vec![
            vec![1, 0, 0, 0],
            vec![0, 2, 0, 0],
            vec![0, 0, 3, 0],
            vec![0, 0, 0, 4],
        ]);
        let m = MatSeries::new(4, 1, -1, vec![d], 4);
        let form = htl_form(&m).unwrap();
        assert_eq!(form.poincare_rank(), Q::zero());
        assert_eq!(form.ramification(), 1);
        let mut eigs: Vec<K> = form.raw_residues();
        eigs.sort_by(|a, b| format!("{}", a).cmp(&format!("{}", b)));
        assert_eq!(eigs.len(), 4);
    }

    #[test]
    fn distinct_leading_eigenvalues_split_into_four() {
        // A0 = diag(1,2,3,4)/z^2 + perturbation/z.
        let d = km(vec![
            vec![1, 1, 0, 0],
            vec![0, 2, 1, 0],
            vec![0, 0, 3, 1],
            vec![1, 0, 0, 4],
        ]);
        let pert = km(vec![
            vec![0, 1, 1, 1],
            vec![1, 0, 1, 1],
            vec![1, 1, 0, 1],
            vec![1, 1, 1, 0],
        ]);
        let mut dd = d;
        // strip the off-diagonal part so the leading is diagonal
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    dd[(i, j)] = K::from_int(0);
                }
            }
        }
        let m = MatSeries::new(4, 1, -2, vec![dd, pert], 6);
        let form = htl_form(&m).unwrap();
        assert_eq!(form.leaves.len(), 4);
        assert_eq!(form.poincare_rank(), Q::one());
        // Exponential coefficients are the leading eigenvalues.
        let mut tops: Vec<K> = form
            .exponent_table()
            .into_iter()
            .map(|(e, _)| e[0].clone())
            .collect();
        tops.sort_by(|a, b| format!("{}", a).cmp(&format!("{}", b)));
        let mut expect: Vec<K> = (1..=4).map(K::from_int).collect();
        expect.sort_by(|a, b| format!("{}", a).cmp(&format!("{}", b)));
        assert_eq!(tops, expect);
    }

    #[test]
    fn ramified_two_by_two() {
        // M = (e12 + a21 z e21)/z^2: level 3/2 with exponents
        // +-sqrt(a21); take a21 = 9 so the roots are +-3.
        let e12 = km(vec![vec![0, 1], vec![0, 0]]);
        let e21 = km(vec![vec![0, 0], vec![9, 0]]);
        let m = MatSeries::new(2, 1, -2, vec![e12, e21], 6);
        let form = htl_form(&m).unwrap();
        assert_eq!(form.ramification(), 2);
        assert_eq!(form.poincare_rank(), Q::new(1.into(), 2.into()));
        let mut tops: Vec<K> = form
            .exponent_table()
            .into_iter()
            .map(|(e, _)| e[0].clone())
            .collect();
        tops.sort_by(|a, b| format!("{}", a).cmp(&format!("{}", b)));
        let mut expect = vec![K::from_int(3), K::from_int(-3)];
        expect.sort_by(|a, b| format!("{}", a).cmp(&format!("{}", b)));
        assert_eq!(tops, expect);
    }

    #[test]
    fn block_diagonalization_conjugates_back() {
        // Leading diag(0,0,0,-5): blocks of sizes 3 and 1; recombining
        // the gauge must reproduce the input to truncation order.
        let lead = km(vec![
            vec![0, 0, 0, 0],
            vec![0, 0, 0, 0],
            vec![0, 0, 0, 0],
            vec![0, 0, 0, -5],
        ]);
        let pert = km(vec![
            vec![1, 2, 0, 1],
            vec![0, 1, 1, 1],
            vec![2, 0, 1, 0],
            vec![1, 1, 0, 3],
        ]);
        let m = MatSeries::new(4, 1, -2, vec![lead, pert], 5);
        let roots = vec![(K::from_int(0), 3), (K::from_int(-5), 1)];
        let (blocks, c, p, b) = block_diagonalize_full(&m, &roots).unwrap();
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0].dim, 3);
        assert_eq!(blocks[1].dim, 1);
        // Verify A^(C) gauged by P equals B to truncation.
        let c_inv = c.inverse().unwrap();
        let m1 = m.conjugate_const(&c, &c_inv);
        let gauged = m1.gauge(&p).unwrap();
        let diff = gauged.add(&b.neg());
        let lo = diff.val.min(b.val);
        let hi = diff.trunc.min(b.trunc);
        for k in lo..=hi {
            assert!(diff.coeff(k).is_zero(), "mismatch at order {}", k);
        }
        // Off-diagonal blocks of B vanish.
        for k in b.val..=b.trunc {
            let bk = b.coeff(k);
            for i in 0..3 {
                assert!(bk[(i, 3)].is_zero());
                assert!(bk[(3, i)].is_zero());
            }
        }
    }
}
