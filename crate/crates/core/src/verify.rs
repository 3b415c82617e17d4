//! Structural checks: zero-curvature compatibility of each Lax pair with
//! its Hamiltonian flow, cross-compatibility of the two-time pairs,
//! Riemann-scheme regression and Fuchs-Hukuhara trace identities.
//!
//! Compatibility is checked pointwise exactly at rational x. With
//! denominators cleared the residual is polynomial in x of degree < 12
//! for every entry, so vanishing at 13 distinct x-values per sample
//! promotes the pointwise zero to an identity in x.

use crate::catalog::{
    hamiltonian_vector_field, sample_point, PointLoc, SampleMode, SpecializeValues, SystemEntry,
};
use crate::dual::Dual;
use crate::expr::{dual_assignment, Assignment, ExprError};
use crate::htl::{localize, spectral_type_of, HtlError, HtlForm, SpectralType};
use crate::linalg::Mat;
use crate::{K, Q};
use num_traits::Zero;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum VerifyError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Catalog(#[from] crate::catalog::CatalogError),
    #[error(transparent)]
    Htl(#[from] HtlError),
    #[error("x = {0} is a pole of the system")]
    PoleHit(K),
}

/// D_t A - d_x B + [A, B] at one sample and one x-value; compatibility
/// holds iff this is exactly the zero matrix.
pub fn zero_curvature(
    entry: &SystemEntry,
    time: &str,
    sample: &Assignment<K>,
    x: &K,
) -> Result<Mat<K>, VerifyError> {
    let x_eq = entry.x_eq.as_ref().expect("full entry");
    let t_eq = entry
        .t_eq_for(time)
        .unwrap_or_else(|| panic!("no deformation equation for {}", time));

    // Differentiate with respect to the time and every flow variable.
    let mut wrt: Vec<&str> = vec![time];
    wrt.extend(entry.vars.iter().map(|s| s.as_str()));
    wrt.extend(entry.gauge.iter().map(|s| s.as_str()));

    let mut da = dual_assignment(sample, &wrt);
    entry.extend_with_defs(&mut da)?;

    let ax = x_eq.evaluate(&da)?;
    let bx = t_eq.evaluate(&da)?;
    let xd = Dual::constant(x.clone());
    let a_at = ax.eval_at(&xd).ok_or_else(|| VerifyError::PoleHit(x.clone()))?;
    let b_at = bx.eval_at(&xd).ok_or_else(|| VerifyError::PoleHit(x.clone()))?;
    let dxb_at = bx.deriv_at(&xd).ok_or_else(|| VerifyError::PoleHit(x.clone()))?;

    let flows = hamiltonian_vector_field(entry, time, sample)?.flows;

    let n = a_at.rows;
    let mut residual = Mat::zeros(n, n);
    // D_t A = dA/dt (explicit) + sum over flow variables.
    for i in 0..n {
        for j in 0..n {
            let mut dt = a_at[(i, j)].partial(0);
            for (k, var) in wrt.iter().enumerate().skip(1) {
                if let Some(fl) = flows.get(*var) {
                    dt += a_at[(i, j)].partial(k) * fl.clone();
                }
            }
            residual[(i, j)] = dt - dxb_at[(i, j)].v.clone();
        }
    }
    let a_val = a_at.map(|d| d.v.clone());
    let b_val = b_at.map(|d| d.v.clone());
    residual = residual + a_val.commutator(&b_val);
    Ok(residual)
}

/// D_{t1} M2 - D_{t2} M1 + [M1, M2] for the two-time entries, where M_i
/// is the full deformation matrix in direction t_i evaluated at x.
pub fn cross_compatibility(
    entry: &SystemEntry,
    sample: &Assignment<K>,
    x: &K,
) -> Result<Mat<K>, VerifyError> {
    assert!(entry.times.len() == 2, "cross-compatibility needs two times");
    let t1 = entry.times[0].as_str();
    let t2 = entry.times[1].as_str();
    let m1_eq = entry.t_eq_for(t1).unwrap();
    let m2_eq = entry.t_eq_for(t2).unwrap();

    let mut wrt: Vec<&str> = vec![t1, t2];
    wrt.extend(entry.vars.iter().map(|s| s.as_str()));
    wrt.extend(entry.gauge.iter().map(|s| s.as_str()));

    let mut da = dual_assignment(sample, &wrt);
    entry.extend_with_defs(&mut da)?;
    let m1 = m1_eq.evaluate(&da)?;
    let m2 = m2_eq.evaluate(&da)?;
    let xd = Dual::constant(x.clone());
    let m1_at = m1.eval_at(&xd).ok_or_else(|| VerifyError::PoleHit(x.clone()))?;
    let m2_at = m2.eval_at(&xd).ok_or_else(|| VerifyError::PoleHit(x.clone()))?;

    let f1 = hamiltonian_vector_field(entry, t1, sample)?.flows;
    let f2 = hamiltonian_vector_field(entry, t2, sample)?.flows;

    let n = m1_at.rows;
    let mut residual = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // D_{t1} M2: explicit d/dt1 plus flows of t1.
            let mut d1 = m2_at[(i, j)].partial(0);
            let mut d2 = m1_at[(i, j)].partial(1);
            for (k, var) in wrt.iter().enumerate().skip(2) {
                if let Some(fl) = f1.get(*var) {
                    d1 += m2_at[(i, j)].partial(k) * fl.clone();
                }
                if let Some(fl) = f2.get(*var) {
                    d2 += m1_at[(i, j)].partial(k) * fl.clone();
                }
            }
            residual[(i, j)] = d1 - d2;
        }
    }
    let m1v = m1_at.map(|d| d.v.clone());
    let m2v = m2_at.map(|d| d.v.clone());
    // d_{t1} M2 - d_{t2} M1 = M1 M2 - M2 M1, so the residual carries
    // [M2, M1].
    residual = residual + m2v.commutator(&m1v);
    Ok(residual)
}

/// Report of a compatibility sweep over samples and x-values.
#[derive(Clone, Debug)]
pub struct CompatReport {
    pub entry: String,
    pub time: String,
    pub samples: usize,
    pub x_values: usize,
    pub pass: bool,
    /// First failing (seed, x) with a sample residual entry, if any.
    pub failure: Option<(u64, K, K)>,
}

impl CompatReport {
    pub fn record(&self) -> String {
        format!(
            "compat\t{}\t{}\t{}x{}\t{}",
            self.entry,
            self.time,
            self.samples,
            self.x_values,
            if self.pass { "pass" } else { "FAIL" }
        )
    }
}

/// Sweep the zero-curvature residual over seeded samples and an x-grid.
pub fn compat_sweep(
    entry: &SystemEntry,
    time: &str,
    samples: usize,
    x_values: usize,
    seed0: u64,
) -> Result<CompatReport, VerifyError> {
    let xs = x_grid(entry, x_values);
    let mut failure = None;
    'outer: for s in 0..samples {
        let seed = seed0.wrapping_add(s as u64);
        let sample = sample_point(entry, seed, SampleMode::Generic, &Default::default())?;
        for x in &xs {
            let r = zero_curvature(entry, time, &sample, x)?;
            if !r.is_zero() {
                let bad = first_nonzero(&r);
                failure = Some((seed, x.clone(), bad));
                break 'outer;
            }
        }
    }
    Ok(CompatReport {
        entry: entry.name.clone(),
        time: time.to_string(),
        samples,
        x_values: xs.len(),
        pass: failure.is_none(),
        failure,
    })
}

/// Same sweep for the cross-compatibility of two-time entries.
pub fn cross_sweep(
    entry: &SystemEntry,
    samples: usize,
    x_values: usize,
    seed0: u64,
) -> Result<CompatReport, VerifyError> {
    let xs = x_grid(entry, x_values);
    let mut failure = None;
    'outer: for s in 0..samples {
        let seed = seed0.wrapping_add(s as u64);
        let sample = sample_point(entry, seed, SampleMode::Generic, &Default::default())?;
        for x in &xs {
            let r = cross_compatibility(entry, &sample, x)?;
            if !r.is_zero() {
                failure = Some((seed, x.clone(), first_nonzero(&r)));
                break 'outer;
            }
        }
    }
    Ok(CompatReport {
        entry: entry.name.clone(),
        time: "t1,t2".to_string(),
        samples,
        x_values: xs.len(),
        pass: failure.is_none(),
        failure,
    })
}

/// Integer x-values 2, 3, ... avoiding the finite pole locations.
pub fn x_grid(entry: &SystemEntry, count: usize) -> Vec<K> {
    let poles: Vec<Q> = entry
        .x_eq
        .as_ref()
        .map(|x| x.poles.iter().map(|(u, _)| u.clone()).collect())
        .unwrap_or_default();
    let mut xs = Vec::with_capacity(count);
    let mut v: i64 = 2;
    while xs.len() < count {
        let q = Q::from_integer(v.into());
        if !poles.contains(&q) {
            xs.push(K::from_rat(q));
        }
        v += 1;
    }
    xs
}

fn first_nonzero(m: &Mat<K>) -> K {
    for i in 0..m.rows {
        for j in 0..m.cols {
            if !m[(i, j)].is_zero() {
                return m[(i, j)].clone();
            }
        }
    }
    K::from_int(0)
}

// ---------------------------------------------------------------------------
// Fuchs-Hukuhara relations
// ---------------------------------------------------------------------------

/// Check that the stored relation equals the scheme's trace identity
/// (the sum of all residue-column entries over all points), exactly,
/// at randomized parameter values.
pub fn check_fuchs_relation(entry: &SystemEntry, seeds: u64) -> Result<bool, VerifyError> {
    for seed in 0..seeds {
        let mut rng = crate::catalog::sample::SplitMix64(seed.wrapping_mul(0x9e3779b9).wrapping_add(17));
        let mut a: Assignment<K> = HashMap::new();
        for p in &entry.params {
            a.insert(p.clone(), K::from_rat(rng.small_rat()));
        }
        for tv in &entry.times {
            a.insert(tv.clone(), K::from_rat(rng.small_rat()));
        }
        // Scheme rows may reference the specialization symbols.
        for s in ["lam", "mu", "nu"] {
            a.insert(s.to_string(), K::from_rat(rng.small_rat()));
        }
        let mut total = K::zero();
        for pt in &entry.scheme {
            for row in &pt.rows {
                total += row.res.evaluate(&a)?;
            }
        }
        let declared = entry.fuchs.evaluate(&a)?;
        if total != declared {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Riemann-scheme regression
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct PointReport {
    pub loc: String,
    pub declared_type: String,
    pub computed_type: Option<String>,
    pub rank_ok: bool,
    pub ram_ok: bool,
    pub type_ok: bool,
    pub exp_ok: bool,
    pub res_ok: bool,
    /// The common residue shift used for the comparison.
    pub shift: Option<Q>,
    pub error: Option<String>,
}

impl PointReport {
    pub fn pass(&self) -> bool {
        self.rank_ok && self.ram_ok && self.type_ok && self.exp_ok && self.res_ok
    }
}

#[derive(Clone, Debug)]
pub struct SchemeReport {
    pub entry: String,
    pub lambda: i64,
    pub points: Vec<PointReport>,
}

impl SchemeReport {
    pub fn pass(&self) -> bool {
        self.points.iter().all(|p| p.pass())
    }

    pub fn records(&self) -> Vec<String> {
        self.points
            .iter()
            .map(|p| {
                format!(
                    "scheme\t{}\tx={}\tlambda={}\t{}\t{}",
                    self.entry,
                    p.loc,
                    self.lambda,
                    p.declared_type,
                    if p.pass() {
                        "pass".to_string()
                    } else {
                        format!(
                            "FAIL rank={} ram={} type={} exp={} res={} {}",
                            p.rank_ok,
                            p.ram_ok,
                            p.type_ok,
                            p.exp_ok,
                            p.res_ok,
                            p.error.clone().unwrap_or_default()
                        )
                    }
                )
            })
            .collect()
    }
}

/// Run the reduction at every declared singular point of a full entry at
/// an HTL-specialized sample and compare against the printed scheme.
pub fn check_riemann_scheme(
    entry: &SystemEntry,
    seed: u64,
    lambda: i64,
) -> Result<SchemeReport, VerifyError> {
    let spec = SpecializeValues::with_lambda(lambda);
    let sample = sample_point(entry, seed, SampleMode::HtlSpecialized, &spec)?;
    let mut full = sample.clone();
    entry.extend_with_defs(&mut full)?;
    let mut points = Vec::new();
    for pt in &entry.scheme {
        let report = check_point(entry, pt, &full);
        points.push(report);
    }
    Ok(SchemeReport {
        entry: entry.name.clone(),
        lambda,
        points,
    })
}

fn check_point(
    entry: &SystemEntry,
    pt: &crate::catalog::SchemePoint,
    sample: &Assignment<K>,
) -> PointReport {
    let mut rep = PointReport {
        loc: pt.loc.to_string(),
        declared_type: pt.spectral_type.clone(),
        computed_type: None,
        rank_ok: false,
        ram_ok: false,
        type_ok: false,
        exp_ok: false,
        res_ok: false,
        shift: None,
        error: None,
    };
    let form = match run_reduction(entry, &pt.loc, sample) {
        Ok(f) => f,
        Err(e) => {
            rep.error = Some(e.to_string());
            return rep;
        }
    };
    rep.rank_ok = form.poincare_rank() == pt.rank;
    rep.ram_ok = form.ramification() == pt.ram;
    let st = spectral_type_of(&form);
    rep.computed_type = Some(st.render());
    rep.type_ok = match SpectralType::parse(&pt.spectral_type) {
        Some(declared) => st.equivalent(&declared),
        None => false,
    };
    // Expected rows from the scheme data.
    let mut declared_rows = Vec::new();
    for row in &pt.rows {
        let exps: Result<Vec<K>, _> = row.exps.iter().map(|e| e.evaluate(sample)).collect();
        let res = row.res.evaluate(sample);
        match (exps, res) {
            (Ok(e), Ok(r)) => declared_rows.push((e, r)),
            _ => {
                rep.error = Some("scheme row evaluation failed".into());
                return rep;
            }
        }
    }
    let computed_rows = form.canonical_rows();
    let (exp_ok, res_ok, shift) = compare_rows(&computed_rows, &declared_rows, form.gauge_lattice);
    rep.exp_ok = exp_ok;
    rep.res_ok = res_ok;
    rep.shift = shift;
    rep
}

/// Localize the entry at a declared point and reduce to canonical form.
pub fn run_reduction(
    entry: &SystemEntry,
    loc: &PointLoc,
    sample: &Assignment<K>,
) -> Result<HtlForm, VerifyError> {
    let x_eq = entry
        .x_eq
        .as_ref()
        .ok_or_else(|| VerifyError::Htl(HtlError::NotApplicable))?;
    let rm = x_eq.evaluate(sample)?;
    let series = localize(&rm, loc)?;
    Ok(crate::htl::htl_form(&series)?)
}

/// Compare computed and declared rows: exponential columns must match as
/// exact multisets. Residues match after one common rational shift per
/// point plus, when the reduction used a fractional gauge lattice 1/k,
/// per-row corrections in (1/k) * Z — the exp(2 pi i k Theta)
/// equivalence class of the canonical form. Points reduced without
/// fractional shears (k = 1) are compared exactly.
fn compare_rows(
    computed: &[(Vec<K>, K)],
    declared: &[(Vec<K>, K)],
    gauge_lattice: i64,
) -> (bool, bool, Option<Q>) {
    if computed.len() != declared.len() {
        return (false, false, None);
    }
    // Exponential multiset match with a row pairing.
    let mut paired: Vec<Option<usize>> = vec![None; computed.len()];
    let mut used = vec![false; declared.len()];
    for (i, (exps, _)) in computed.iter().enumerate() {
        if let Some(j) = declared
            .iter()
            .enumerate()
            .position(|(j, (de, _))| !used[j] && de == exps)
        {
            used[j] = true;
            paired[i] = Some(j);
        }
    }
    if paired.iter().any(|p| p.is_none()) {
        return (false, false, None);
    }
    // Candidate common shifts from the first row's possible partners.
    let mut candidates: Vec<K> = Vec::new();
    for (de, dr) in declared {
        if *de == computed[0].0 {
            let diff = computed[0].1.clone() - dr.clone();
            if !candidates.contains(&diff) {
                candidates.push(diff);
            }
        }
    }
    'cand: for sigma in candidates {
        let Some(sq) = sigma.as_rat().cloned() else {
            continue;
        };
        let mut remaining: Vec<K> = declared.iter().map(|(_, r)| r.clone()).collect();
        let mut rem_exps: Vec<Vec<K>> = declared.iter().map(|(e, _)| e.clone()).collect();
        for (exps, res) in computed {
            let want = res.clone() - sigma.clone();
            let pos = (0..remaining.len()).position(|p| {
                if rem_exps[p] != *exps {
                    return false;
                }
                let delta = (want.clone() - remaining[p].clone()) * K::from_int(gauge_lattice);
                match delta.as_rat() {
                    Some(q) => {
                        if gauge_lattice > 1 {
                            q.is_integer()
                        } else {
                            q.is_zero()
                        }
                    }
                    None => false,
                }
            });
            match pos {
                Some(p) => {
                    remaining.remove(p);
                    rem_exps.remove(p);
                }
                None => continue 'cand,
            }
        }
        return (true, true, Some(sq));
    }
    (true, false, None)
}

// ---------------------------------------------------------------------------
// Negative controls
// ---------------------------------------------------------------------------

/// Rerun zero-curvature with the Hamiltonian perturbed by +q1: the
/// residual must become nonzero, proving the check has teeth.
pub fn perturbed_hamiltonian_fails(
    entry: &SystemEntry,
    time: &str,
    seed: u64,
    x: &K,
) -> Result<bool, VerifyError> {
    use crate::expr::Expr;
    let mut modified = entry.clone();
    for (tv, h) in &mut modified.hams {
        if tv == time {
            *h = Expr::add(h.clone(), Expr::sym("q1"));
        }
    }
    let sample = sample_point(&modified, seed, SampleMode::Generic, &Default::default())?;
    let r = zero_curvature(&modified, time, &sample, x)?;
    Ok(!r.is_zero())
}

/// Drop one gauge-ODE term: compatibility must break.
pub fn broken_gauge_fails(
    entry: &SystemEntry,
    time: &str,
    seed: u64,
    x: &K,
) -> Result<bool, VerifyError> {
    let mut modified = entry.clone();
    let mut changed = false;
    for (tv, odes) in &mut modified.gauge_odes {
        if tv == time && !odes.is_empty() {
            odes.remove(0);
            changed = true;
        }
    }
    if !changed {
        return Ok(true);
    }
    let sample = sample_point(&modified, seed, SampleMode::Generic, &Default::default())?;
    let r = zero_curvature(&modified, time, &sample, x)?;
    Ok(!r.is_zero())
}

