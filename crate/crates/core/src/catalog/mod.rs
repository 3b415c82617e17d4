//! The machine-readable catalog: linear systems, Riemann schemes,
//! Fuchs-Hukuhara relations, Hamiltonians and gauge ODEs.
//!
//! Catalog content lives in versioned text files under `data/` (override
//! the directory with the `ISOATLAS_DATA` environment variable) so every
//! entry can be reviewed line by line. The loader assembles them into
//! [`SystemEntry`] values; nothing mathematical is hard-coded here except
//! the eight classical Hamiltonian templates the data files reference.

pub mod classical;
mod format;
pub mod sample;

pub use sample::{sample_point, ParameterSet, SampleMode, SpecializeValues};

use crate::expr::{Assignment, Expr, ExprError, FromCyclo, MatExpr};
use crate::field::Field;
use crate::linalg::Mat;
use crate::Q;
use once_cell::sync::OnceCell;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum CatalogError {
    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },
    #[error("unknown entry `{0}`")]
    UnknownEntry(String),
    #[error("sampling failed for `{0}`: rejection budget exhausted")]
    SamplingFailed(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Location of a singular point in the x-plane.
#[derive(Clone, Debug, PartialEq)]
pub enum PointLoc {
    Finite(Q),
    /// A pole at a symbolic location (the moving pole x = t of the
    /// Hamiltonian-only base entry); scheme metadata only.
    Symbolic(String),
    Infinity,
}

impl std::fmt::Display for PointLoc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PointLoc::Finite(u) => write!(f, "{}", u),
            PointLoc::Symbolic(s) => write!(f, "{}", s),
            PointLoc::Infinity => write!(f, "inf"),
        }
    }
}

/// A matrix-valued rational function of x with constant (x-free)
/// coefficient matrices: sum of pole terms plus a polynomial part.
#[derive(Clone, Debug)]
pub struct RationalMatExpr {
    /// (pole location, coefficients of (x-u)^-1, (x-u)^-2, ...)
    pub poles: Vec<(Q, Vec<MatExpr>)>,
    /// Coefficients of x^0, x^1, ...
    pub poly: Vec<MatExpr>,
}

impl RationalMatExpr {
    pub fn evaluate<F: FromCyclo>(&self, a: &Assignment<F>) -> Result<RationalMat<F>, ExprError> {
        Ok(RationalMat {
            poles: self
                .poles
                .iter()
                .map(|(u, ms)| {
                    Ok((
                        F::from_rat(u.clone()),
                        ms.iter().map(|m| m.evaluate(a)).collect::<Result<_, _>>()?,
                    ))
                })
                .collect::<Result<_, ExprError>>()?,
            poly: self
                .poly
                .iter()
                .map(|m| m.evaluate(a))
                .collect::<Result<_, _>>()?,
        })
    }

    pub fn dim(&self) -> usize {
        self.poles
            .first()
            .map(|(_, ms)| ms[0].rows)
            .or_else(|| self.poly.first().map(|m| m.rows))
            .unwrap_or(0)
    }

    pub fn denominators(&self, out: &mut Vec<Expr>) {
        for (_, ms) in &self.poles {
            for m in ms {
                m.denominators(out);
            }
        }
        for m in &self.poly {
            m.denominators(out);
        }
    }
}

/// Evaluated form of [`RationalMatExpr`]: exact matrix rational function.
#[derive(Clone, Debug)]
pub struct RationalMat<F: Field> {
    pub poles: Vec<(F, Vec<Mat<F>>)>,
    pub poly: Vec<Mat<F>>,
}

impl<F: Field> RationalMat<F> {
    pub fn dim(&self) -> usize {
        self.poles
            .first()
            .map(|(_, ms)| ms[0].rows)
            .or_else(|| self.poly.first().map(|m| m.rows))
            .unwrap_or(0)
    }

    /// Value at x; `None` when x is a pole location.
    pub fn eval_at(&self, x: &F) -> Option<Mat<F>> {
        let n = self.dim();
        let mut acc = Mat::zeros(n, n);
        for (u, ms) in &self.poles {
            let d = x.clone() - u.clone();
            let dinv = d.try_inv()?;
            let mut pw = F::one();
            for m in ms {
                pw = pw * dinv.clone();
                acc = acc + m.scale(&pw);
            }
        }
        let mut xp = F::one();
        for m in &self.poly {
            acc = acc + m.scale(&xp);
            xp = xp * x.clone();
        }
        Some(acc)
    }

    /// d/dx of the value at x.
    pub fn deriv_at(&self, x: &F) -> Option<Mat<F>> {
        let n = self.dim();
        let mut acc = Mat::zeros(n, n);
        for (u, ms) in &self.poles {
            let d = x.clone() - u.clone();
            let dinv = d.try_inv()?;
            let mut pw = dinv.clone();
            for (k, m) in ms.iter().enumerate() {
                // d/dx (x-u)^-(k+1) = -(k+1) (x-u)^-(k+2)
                pw = pw * dinv.clone();
                let s = -F::from_i64(k as i64 + 1) * pw.clone();
                acc = acc + m.scale(&s);
            }
        }
        let mut xp = F::one();
        for (j, m) in self.poly.iter().enumerate() {
            if j == 0 {
                continue;
            }
            let s = F::from_i64(j as i64) * xp.clone();
            acc = acc + m.scale(&s);
            xp = xp * x.clone();
        }
        Some(acc)
    }
}

/// One row of a Riemann scheme: exponential coefficients by descending
/// level, then the residue exponent. Entries are expressions in the
/// parameters and the specialization symbols lam/mu/nu.
#[derive(Clone, Debug)]
pub struct SchemeRow {
    pub exps: Vec<Expr>,
    pub res: Expr,
}

#[derive(Clone, Debug)]
pub struct SchemePoint {
    pub loc: PointLoc,
    /// Declared Poincare rank l0 - 1.
    pub rank: Q,
    /// Declared ramification index of the point.
    pub ram: i64,
    /// Declared spectral type, e.g. "(1)_4" or "31".
    pub spectral_type: String,
    pub rows: Vec<SchemeRow>,
}

/// A catalog Lax pair with all printed side data.
#[derive(Clone, Debug)]
pub struct SystemEntry {
    pub name: String,
    pub pattern: String,
    pub ham_name: String,
    pub times: Vec<String>,
    pub vars: Vec<String>,
    pub params: Vec<String>,
    pub gauge: Vec<String>,
    /// Left-hand side of the Fuchs-Hukuhara relation "... = 0".
    pub fuchs: Expr,
    /// Specialization recipe time -> expression in lam, mu, nu.
    pub specialize: Vec<(String, Expr)>,
    /// Extra nonvanishing constraints for sampling.
    pub constraints: Vec<Expr>,
    /// Auxiliary definitions, in evaluation order.
    pub defs: Vec<(String, Expr)>,
    /// The x-direction equation; `None` for Hamiltonian-only entries.
    pub x_eq: Option<RationalMatExpr>,
    /// Deformation equations per time variable.
    pub t_eqs: Vec<(String, RationalMatExpr)>,
    /// Hamiltonian (normalized H, not tH) per time variable.
    pub hams: Vec<(String, Expr)>,
    /// Gauge-scalar logarithmic derivatives per time: dg/dt = g * expr.
    pub gauge_odes: Vec<(String, Vec<(String, Expr)>)>,
    pub scheme: Vec<SchemePoint>,
}

impl SystemEntry {
    pub fn is_full(&self) -> bool {
        self.x_eq.is_some()
    }

    pub fn dim(&self) -> usize {
        self.x_eq.as_ref().map_or(4, |m| m.dim())
    }

    pub fn ham_for(&self, time: &str) -> Option<&Expr> {
        self.hams.iter().find(|(t, _)| t == time).map(|(_, h)| h)
    }

    pub fn t_eq_for(&self, time: &str) -> Option<&RationalMatExpr> {
        self.t_eqs.iter().find(|(t, _)| t == time).map(|(_, m)| m)
    }

    pub fn gauge_odes_for(&self, time: &str) -> &[(String, Expr)] {
        self.gauge_odes
            .iter()
            .find(|(t, _)| t == time)
            .map(|(_, v)| v.as_slice())
            .unwrap_or(&[])
    }

    /// Every denominator appearing anywhere in the entry's data, used by
    /// the sampler for singular-locus avoidance.
    pub fn all_denominators(&self) -> Vec<Expr> {
        let mut out = Vec::new();
        for (_, e) in &self.defs {
            e.denominators(&mut out);
        }
        if let Some(x) = &self.x_eq {
            x.denominators(&mut out);
        }
        for (_, m) in &self.t_eqs {
            m.denominators(&mut out);
        }
        for (_, h) in &self.hams {
            h.denominators(&mut out);
        }
        for (_, odes) in &self.gauge_odes {
            for (_, e) in odes {
                e.denominators(&mut out);
            }
        }
        out
    }

    /// Evaluate the auxiliary definitions in order, extending `a`.
    pub fn extend_with_defs<F: FromCyclo>(&self, a: &mut Assignment<F>) -> Result<(), ExprError> {
        for (name, e) in &self.defs {
            let v = e.evaluate(a)?;
            a.insert(name.clone(), v);
        }
        Ok(())
    }
}

/// A classical (two-dimensional) Painleve Hamiltonian, listed for
/// reference and used as a building block of the catalog entries.
#[derive(Clone, Debug)]
pub struct ClassicalHamiltonian {
    pub name: String,
    pub params: Vec<String>,
    /// Normalized H as an expression in the params, t, q, p.
    pub expr: Expr,
}

pub struct Catalog {
    pub entries: Vec<SystemEntry>,
    pub classical: Vec<ClassicalHamiltonian>,
    pub checksum: String,
}

impl Catalog {
    pub fn get(&self, name: &str) -> Result<&SystemEntry, CatalogError> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| CatalogError::UnknownEntry(name.to_string()))
    }

    /// Names of all entries in catalog order (full Lax pairs first, then
    /// Hamiltonian-only entries).
    pub fn list_entries(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.name.clone()).collect()
    }

    pub fn full_entries(&self) -> impl Iterator<Item = &SystemEntry> {
        self.entries.iter().filter(|e| e.is_full())
    }
}

static CATALOG: OnceCell<Catalog> = OnceCell::new();

/// The process-wide catalog, loaded once.
pub fn catalog() -> &'static Catalog {
    CATALOG.get_or_init(|| match load_catalog() {
        Ok(c) => c,
        Err(e) => panic!("catalog failed to load: {}", e),
    })
}

/// Embedded catalog sources (filename, content), used unless
/// `ISOATLAS_DATA` points at a directory.
const EMBEDDED: &[(&str, &str)] = &[
    (
        "entries/a-2_2-31-1111.entry",
        include_str!("data/entries/a-2_2-31-1111.entry"),
    ),
    (
        "entries/b-1_211-22-22.entry",
        include_str!("data/entries/b-1_211-22-22.entry"),
    ),
    (
        "entries/c-1_21_2-31-22.entry",
        include_str!("data/entries/c-1_21_2-31-22.entry"),
    ),
    (
        "entries/d-br1_4-31-22.entry",
        include_str!("data/entries/d-br1_4-31-22.entry"),
    ),
    (
        "entries/e-br11_2-31.entry",
        include_str!("data/entries/e-br11_2-31.entry"),
    ),
    (
        "entries/f-br1_4x6-31.entry",
        include_str!("data/entries/f-br1_4x6-31.entry"),
    ),
    (
        "entries/g-111x1-2_2.entry",
        include_str!("data/entries/g-111x1-2_2.entry"),
    ),
    (
        "entries/h-1_211-2x2.entry",
        include_str!("data/entries/h-1_211-2x2.entry"),
    ),
    (
        "entries/i-1_31-22-22.entry",
        include_str!("data/entries/i-1_31-22-22.entry"),
    ),
    (
        "entries/j-1_211-2_2.entry",
        include_str!("data/entries/j-1_211-2_2.entry"),
    ),
    (
        "entries/k-1_31-2x2.entry",
        include_str!("data/entries/k-1_31-2x2.entry"),
    ),
    (
        "entries/l-1_4-22-22.entry",
        include_str!("data/entries/l-1_4-22-22.entry"),
    ),
    (
        "entries/m-1_31-2_2.entry",
        include_str!("data/entries/m-1_31-2_2.entry"),
    ),
    (
        "entries/n-1_4-2x2.entry",
        include_str!("data/entries/n-1_4-2x2.entry"),
    ),
    (
        "entries/o-1_4-2_2.entry",
        include_str!("data/entries/o-1_4-2_2.entry"),
    ),
    (
        "entries/p-sasano-base.entry",
        include_str!("data/entries/p-sasano-base.entry"),
    ),
];

pub fn load_catalog() -> Result<Catalog, CatalogError> {
    let sources = load_sources()?;
    let mut entries = Vec::new();
    for (name, content) in &sources {
        entries.push(format::parse_entry(name, content)?);
    }
    let checksum = checksum_sources(&sources);
    Ok(Catalog {
        entries,
        classical: classical::all(),
        checksum,
    })
}

fn load_sources() -> Result<Vec<(String, String)>, CatalogError> {
    if let Ok(dir) = std::env::var("ISOATLAS_DATA") {
        let base = std::path::Path::new(&dir).join("entries");
        let mut files: Vec<_> = std::fs::read_dir(&base)
            .map_err(|e| CatalogError::Parse {
                file: base.display().to_string(),
                line: 0,
                msg: format!("cannot read data directory: {}", e),
            })?
            .filter_map(|r| r.ok())
            .map(|d| d.path())
            .filter(|p| p.extension().is_some_and(|x| x == "entry"))
            .collect();
        files.sort();
        let mut out = Vec::new();
        for f in files {
            let content = std::fs::read_to_string(&f).map_err(|e| CatalogError::Parse {
                file: f.display().to_string(),
                line: 0,
                msg: e.to_string(),
            })?;
            out.push((f.display().to_string(), content));
        }
        Ok(out)
    } else {
        Ok(EMBEDDED
            .iter()
            .map(|(n, c)| (n.to_string(), c.to_string()))
            .collect())
    }
}

/// SHA-256 over normalized content (trimmed lines, LF joined) of all
/// sources in order.
fn checksum_sources(sources: &[(String, String)]) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    for (name, content) in sources {
        h.update(name.rsplit('/').next().unwrap_or(name).as_bytes());
        h.update(b"\n");
        for line in content.lines() {
            h.update(line.trim_end().as_bytes());
            h.update(b"\n");
        }
    }
    let out = h.finalize();
    out.iter().map(|b| format!("{:02x}", b)).collect()
}

/// Flow data of the Hamiltonian system at a sample point: time
/// derivatives of the phase variables and of the gauge scalars.
#[derive(Clone, Debug)]
pub struct FlowField {
    /// var name -> d(var)/d(time)
    pub flows: HashMap<String, crate::K>,
}

/// Exact Hamiltonian vector field: qdot_i = dH/dp_i, pdot_i = -dH/dq_i,
/// and gauge scalars via their stated logarithmic-derivative ODEs.
pub fn hamiltonian_vector_field(
    entry: &SystemEntry,
    time: &str,
    sample: &Assignment<crate::K>,
) -> Result<FlowField, ExprError> {
    let ham = entry
        .ham_for(time)
        .unwrap_or_else(|| panic!("entry {} has no Hamiltonian for {}", entry.name, time));
    let wrt: Vec<&str> = entry.vars.iter().map(|s| s.as_str()).collect();
    // Definitions may depend on the phase variables, so they are carried
    // through the dual evaluation rather than frozen to constants.
    let mut da = crate::expr::dual_assignment(sample, &wrt);
    entry.extend_with_defs(&mut da)?;
    let d = ham.evaluate(&da)?;
    let mut flows = HashMap::new();
    // vars come in (q_i, p_i) pairs
    for pair in entry.vars.chunks(2) {
        let qi = &pair[0];
        let pi = &pair[1];
        let iq = wrt.iter().position(|v| v == qi).unwrap();
        let ip = wrt.iter().position(|v| v == pi).unwrap();
        flows.insert(qi.clone(), d.partial(ip));
        flows.insert(pi.clone(), -d.partial(iq));
    }
    let mut full = sample.clone();
    entry.extend_with_defs(&mut full)?;
    for (g, lexpr) in entry.gauge_odes_for(time) {
        let l = lexpr.evaluate(&full)?;
        let gv = sample
            .get(g)
            .cloned()
            .ok_or_else(|| ExprError::UnboundSymbol(g.clone()))?;
        flows.insert(g.clone(), gv * l);
    }
    Ok(FlowField { flows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::K;

    #[test]
    fn catalog_loads_and_counts() {
        let c = catalog();
        let full = c.full_entries().count();
        assert_eq!(full, 15);
        assert_eq!(c.entries.len(), 16);
        assert_eq!(c.classical.len(), 8);
        assert!(c.list_entries().iter().any(|n| n == "((1))_4,31,22"));
        assert!(c.list_entries().iter().any(|n| n == "31,22,22,1111"));
    }

    #[test]
    fn classical_flow_of_h_one() {
        // H_I = p^2 - q^3 - t q: qdot = 2p, pdot = 3q^2 + t.
        let c = catalog();
        let h1 = c.classical.iter().find(|h| h.name == "I").unwrap();
        let mut a: Assignment<K> = Assignment::new();
        a.insert("t".into(), K::from_int(5));
        a.insert("q".into(), K::from_int(2));
        a.insert("p".into(), K::from_int(3));
        let d = crate::expr::eval_with_partials(&h1.expr, &a, &["q", "p"]).unwrap();
        assert_eq!(d.partial(1), K::from_int(6));
        assert_eq!(-d.partial(0), K::from_int(17));
    }

    #[test]
    fn checksum_is_stable_and_hex() {
        let c = catalog();
        assert_eq!(c.checksum.len(), 64);
        assert!(c.checksum.chars().all(|ch| ch.is_ascii_hexdigit()));
    }
}
