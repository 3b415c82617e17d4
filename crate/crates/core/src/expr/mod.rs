//! Symbolic expression trees: the language every catalog matrix,
//! Hamiltonian and degeneration substitution is written in.
//!
//! The grammar is deliberately small — rational constants, the named
//! constants `im` (the imaginary unit) and `om` (the primitive cube root
//! of unity), symbols, `+ - * /` and integer powers `^`. There is no
//! simplification beyond constant folding; identities are checked by
//! exact evaluation, not rewriting.

mod parse;

pub use parse::parse_expr;

use crate::cyclo::Cyclo;
use crate::field::Field;
use crate::linalg::Mat;
use num_traits::Zero;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Clone, PartialEq, Debug)]
pub enum Expr {
    Const(Cyclo),
    Sym(Arc<str>),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Neg(Arc<Expr>),
    /// Integer power; the exponent may be negative.
    Pow(Arc<Expr>, i64),
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ExprError {
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
    #[error("evaluation hit a zero denominator")]
    EvalSingular,
    #[error("cyclic substitution through `{0}`")]
    CyclicSubstitution(String),
    #[error("syntax error at offset {offset}: {msg}")]
    Parse { offset: usize, msg: String },
}

/// Lift of a cyclotomic constant into the evaluation scalar.
pub trait FromCyclo: Field {
    fn from_cyclo(c: &Cyclo) -> Self;
}

impl FromCyclo for Cyclo {
    fn from_cyclo(c: &Cyclo) -> Self {
        c.clone()
    }
}

impl FromCyclo for crate::RatFn {
    fn from_cyclo(c: &Cyclo) -> Self {
        crate::RatFn::constant(c.clone())
    }
}

impl<F: FromCyclo> FromCyclo for crate::dual::Dual<F> {
    fn from_cyclo(c: &Cyclo) -> Self {
        crate::dual::Dual::constant(F::from_cyclo(c))
    }
}

/// Bindings for evaluation; generic in the scalar so the same catalog data
/// evaluates over K, over eps-rational functions, or over dual numbers.
pub type Assignment<F> = HashMap<String, F>;

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Const(Cyclo::from_int(n))
    }

    pub fn sym(name: &str) -> Expr {
        Expr::Sym(Arc::from(name))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x.clone() + y.clone()),
            _ => Expr::Add(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x.clone() - y.clone()),
            _ => Expr::Sub(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x.clone() * y.clone()),
            _ => Expr::Mul(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) if !y.is_zero() => {
                Expr::Const(x.clone() / y.clone())
            }
            _ => Expr::Div(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match &a {
            Expr::Const(x) => Expr::Const(-x.clone()),
            _ => Expr::Neg(Arc::new(a)),
        }
    }

    pub fn pow(a: Expr, n: i64) -> Expr {
        match &a {
            Expr::Const(x) if n >= 0 || !x.is_zero() => Expr::Const(x.pow(n)),
            _ => Expr::Pow(Arc::new(a), n),
        }
    }

    pub fn free_symbols(&self) -> HashSet<String> {
        let mut out = HashSet::new();
        self.collect_symbols(&mut out);
        out
    }

    pub(crate) fn collect_symbols(&self, out: &mut HashSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Sym(s) => {
                out.insert(s.to_string());
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
            Expr::Neg(a) | Expr::Pow(a, _) => a.collect_symbols(out),
        }
    }

    /// Denominator subtrees, used for singular-locus avoidance in sampling.
    pub fn denominators(&self, out: &mut Vec<Expr>) {
        match self {
            Expr::Const(_) | Expr::Sym(_) => {}
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.denominators(out);
                b.denominators(out);
            }
            Expr::Div(a, b) => {
                a.denominators(out);
                b.denominators(out);
                out.push((**b).clone());
            }
            Expr::Neg(a) => a.denominators(out),
            Expr::Pow(a, n) => {
                a.denominators(out);
                if *n < 0 {
                    out.push((**a).clone());
                }
            }
        }
    }

    pub fn evaluate<F: FromCyclo>(&self, a: &Assignment<F>) -> Result<F, ExprError> {
        match self {
            Expr::Const(c) => Ok(F::from_cyclo(c)),
            Expr::Sym(s) => a
                .get(s.as_ref())
                .cloned()
                .ok_or_else(|| ExprError::UnboundSymbol(s.to_string())),
            Expr::Add(x, y) => Ok(x.evaluate(a)? + y.evaluate(a)?),
            Expr::Sub(x, y) => Ok(x.evaluate(a)? - y.evaluate(a)?),
            Expr::Mul(x, y) => Ok(x.evaluate(a)? * y.evaluate(a)?),
            Expr::Div(x, y) => {
                let d = y.evaluate(a)?;
                let dinv = d.try_inv().ok_or(ExprError::EvalSingular)?;
                Ok(x.evaluate(a)? * dinv)
            }
            Expr::Neg(x) => Ok(-x.evaluate(a)?),
            Expr::Pow(x, n) => {
                let b = x.evaluate(a)?;
                if *n < 0 {
                    let binv = b.try_inv().ok_or(ExprError::EvalSingular)?;
                    Ok(pow_u(binv, (-n) as u64))
                } else {
                    Ok(pow_u(b, *n as u64))
                }
            }
        }
    }

    /// Simultaneous substitution. Replacements are not re-substituted;
    /// chains of length >= 2 through the domain are rejected.
    pub fn substitute(&self, s: &SubstMap) -> Result<Expr, ExprError> {
        s.check_acyclic()?;
        Ok(self.substitute_unchecked(s))
    }

    pub fn substitute_unchecked(&self, s: &SubstMap) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Sym(name) => match s.map.get(name.as_ref()) {
                Some(r) => r.clone(),
                None => self.clone(),
            },
            Expr::Add(a, b) => Expr::add(a.substitute_unchecked(s), b.substitute_unchecked(s)),
            Expr::Sub(a, b) => Expr::sub(a.substitute_unchecked(s), b.substitute_unchecked(s)),
            Expr::Mul(a, b) => Expr::mul(a.substitute_unchecked(s), b.substitute_unchecked(s)),
            Expr::Div(a, b) => Expr::div(a.substitute_unchecked(s), b.substitute_unchecked(s)),
            Expr::Neg(a) => Expr::neg(a.substitute_unchecked(s)),
            Expr::Pow(a, n) => Expr::pow(a.substitute_unchecked(s), *n),
        }
    }

    /// Exact symbolic derivative with respect to one symbol.
    pub fn diff(&self, wrt: &str) -> Expr {
        match self {
            Expr::Const(_) => Expr::int(0),
            Expr::Sym(s) => {
                if s.as_ref() == wrt {
                    Expr::int(1)
                } else {
                    Expr::int(0)
                }
            }
            Expr::Add(a, b) => Expr::add(a.diff(wrt), b.diff(wrt)),
            Expr::Sub(a, b) => Expr::sub(a.diff(wrt), b.diff(wrt)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.diff(wrt), (**b).clone()),
                Expr::mul((**a).clone(), b.diff(wrt)),
            ),
            Expr::Div(a, b) => Expr::sub(
                Expr::div(a.diff(wrt), (**b).clone()),
                Expr::div(
                    Expr::mul((**a).clone(), b.diff(wrt)),
                    Expr::pow((**b).clone(), 2),
                ),
            ),
            Expr::Neg(a) => Expr::neg(a.diff(wrt)),
            Expr::Pow(a, n) => Expr::mul(
                Expr::mul(Expr::int(*n), Expr::pow((**a).clone(), n - 1)),
                a.diff(wrt),
            ),
        }
    }
}

fn pow_u<F: Field>(base: F, mut e: u64) -> F {
    let mut acc = F::one();
    let mut b = base;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b.clone();
        }
        b = b.clone() * b;
        e >>= 1;
    }
    acc
}

/// Evaluate with exact partial derivatives with respect to `wrt`.
pub fn eval_with_partials<F: FromCyclo>(
    e: &Expr,
    a: &Assignment<F>,
    wrt: &[&str],
) -> Result<crate::dual::Dual<F>, ExprError> {
    let mut da: Assignment<crate::dual::Dual<F>> = HashMap::with_capacity(a.len());
    for (k, v) in a {
        let d = match wrt.iter().position(|w| w == k) {
            Some(j) => crate::dual::Dual::variable(v.clone(), j, wrt.len()),
            None => crate::dual::Dual::constant(v.clone()),
        };
        da.insert(k.clone(), d);
    }
    e.evaluate(&da)
}

/// Lift a plain assignment to duals with the given differentiation context.
pub fn dual_assignment<F: FromCyclo>(
    a: &Assignment<F>,
    wrt: &[&str],
) -> Assignment<crate::dual::Dual<F>> {
    let mut da = HashMap::with_capacity(a.len());
    for (k, v) in a {
        let d = match wrt.iter().position(|w| w == k) {
            Some(j) => crate::dual::Dual::variable(v.clone(), j, wrt.len()),
            None => crate::dual::Dual::constant(v.clone()),
        };
        da.insert(k.clone(), d);
    }
    da
}

// ---------------------------------------------------------------------------
// Substitution maps
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Default)]
pub struct SubstMap {
    map: HashMap<String, Expr>,
}

impl SubstMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, replacement: Expr) {
        self.map.insert(name.to_string(), replacement);
    }

    pub fn get(&self, name: &str) -> Option<&Expr> {
        self.map.get(name)
    }

    pub fn domain(&self) -> impl Iterator<Item = &String> {
        self.map.keys()
    }

    /// Reject chains sym -> free(replacement) -> ... of length >= 2 that
    /// return to the start; a self-reference (identity entry) is fine
    /// because substitution is simultaneous.
    pub fn check_acyclic(&self) -> Result<(), ExprError> {
        for start in self.map.keys() {
            let mut seen = HashSet::new();
            let mut frontier: Vec<String> = self.map[start]
                .free_symbols()
                .into_iter()
                .filter(|s| s != start)
                .collect();
            while let Some(sym) = frontier.pop() {
                if !seen.insert(sym.clone()) {
                    continue;
                }
                if let Some(rep) = self.map.get(&sym) {
                    for next in rep.free_symbols() {
                        if &next == start {
                            return Err(ExprError::CyclicSubstitution(start.clone()));
                        }
                        frontier.push(next);
                    }
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Matrices of expressions
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct MatExpr {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Expr>,
}

impl MatExpr {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        MatExpr {
            rows,
            cols,
            entries: vec![Expr::int(0); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Expr>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        MatExpr {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.cols + j]
    }

    pub fn evaluate<F: FromCyclo>(&self, a: &Assignment<F>) -> Result<Mat<F>, ExprError> {
        let mut out = Mat::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self.entry(i, j).evaluate(a)?;
            }
        }
        Ok(out)
    }

    pub fn substitute(&self, s: &SubstMap) -> Result<MatExpr, ExprError> {
        s.check_acyclic()?;
        Ok(MatExpr {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .map(|e| e.substitute_unchecked(s))
                .collect(),
        })
    }

    pub fn free_symbols(&self) -> HashSet<String> {
        let mut out = HashSet::new();
        for e in &self.entries {
            e.collect_symbols(&mut out);
        }
        out
    }

    pub fn denominators(&self, out: &mut Vec<Expr>) {
        for e in &self.entries {
            e.denominators(out);
        }
    }
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serialize_expr(self))
    }
}

pub fn serialize_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(e, 0, &mut s);
    s
}

/// Precedence levels: 0 additive, 1 multiplicative, 2 unary, 3 power, 4 atom.
fn write_expr(e: &Expr, parent: u8, out: &mut String) {
    let prec = match e {
        Expr::Add(..) | Expr::Sub(..) => 0,
        Expr::Mul(..) | Expr::Div(..) => 1,
        Expr::Neg(..) => 2,
        Expr::Pow(..) => 3,
        Expr::Const(_) | Expr::Sym(_) => 4,
    };
    let need_parens = prec < parent;
    if need_parens {
        out.push('(');
    }
    match e {
        Expr::Const(c) => write_const(c, out),
        Expr::Sym(s) => out.push_str(s),
        Expr::Add(a, b) => {
            write_expr(a, 0, out);
            out.push_str(" + ");
            write_expr(b, 1, out);
        }
        Expr::Sub(a, b) => {
            write_expr(a, 0, out);
            out.push_str(" - ");
            write_expr(b, 1, out);
        }
        Expr::Mul(a, b) => {
            write_expr(a, 1, out);
            out.push('*');
            write_expr(b, 2, out);
        }
        Expr::Div(a, b) => {
            write_expr(a, 1, out);
            out.push('/');
            write_expr(b, 2, out);
        }
        Expr::Neg(a) => {
            out.push('-');
            write_expr(a, 2, out);
        }
        Expr::Pow(a, n) => {
            write_expr(a, 4, out);
            out.push('^');
            if *n < 0 {
                out.push('(');
                out.push_str(&n.to_string());
                out.push(')');
            } else {
                out.push_str(&n.to_string());
            }
        }
    }
    if need_parens {
        out.push(')');
    }
}

fn write_const(c: &Cyclo, out: &mut String) {
    use num_traits::{One, Signed};
    let co = c.coeffs();
    if c.is_rational() {
        let q = &co[0];
        if q.is_negative() {
            out.push('(');
            out.push('-');
            out.push_str(&rat_str(&-q.clone()));
            out.push(')');
        } else {
            out.push_str(&rat_str(q));
        }
        return;
    }
    // On the basis 1, zeta, zeta^2, zeta^3 with im = zeta^3 and
    // om = zeta^2 - 1: c = (c0 + c2) + c2*om + c3*im + c1*zeta.
    let mut parts = Vec::new();
    let rat = &co[0] + &co[2];
    if !rat.is_zero() {
        parts.push(rat_str(&rat));
    }
    if !co[2].is_zero() {
        if co[2].is_one() {
            parts.push("om".into());
        } else {
            parts.push(format!("{}*om", rat_str(&co[2])));
        }
    }
    if !co[3].is_zero() {
        if co[3].is_one() {
            parts.push("im".into());
        } else {
            parts.push(format!("{}*im", rat_str(&co[3])));
        }
    }
    if !co[1].is_zero() {
        // A bare zeta cannot arise from the grammar's constants, but keep
        // serialization total: im*om = -zeta.
        parts.push(format!("({})*im*om", rat_str(&-co[1].clone())));
    }
    out.push('(');
    out.push_str(&parts.join(" + "));
    out.push(')');
}

fn rat_str(q: &crate::Q) -> String {
    use num_traits::One;
    if q.denom().is_one() {
        format!("{}", q.numer())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, binds: &[(&str, i64)]) -> Result<Cyclo, ExprError> {
        let e = parse_expr(src).unwrap();
        let mut a = Assignment::new();
        for (k, v) in binds {
            a.insert(k.to_string(), Cyclo::from_int(*v));
        }
        e.evaluate(&a)
    }

    #[test]
    fn hand_evaluated_hamiltonian() {
        // p^2 - (q^2+t)p - alpha*q at (p,q,t,alpha)=(1,1,0,1) -> -1
        let got = ev(
            "p^2 - (q^2 + t)*p - alpha*q",
            &[("p", 1), ("q", 1), ("t", 0), ("alpha", 1)],
        )
        .unwrap();
        assert_eq!(got, Cyclo::from_int(-1));
    }

    #[test]
    fn bare_symbol_lookup() {
        assert_eq!(ev("t", &[("t", 4096)]).unwrap(), Cyclo::from_int(4096));
    }

    #[test]
    fn forced_singular_division() {
        assert_eq!(
            ev("1/(q1 - q2)", &[("q1", 3), ("q2", 3)]),
            Err(ExprError::EvalSingular)
        );
    }

    #[test]
    fn unbound_symbol_is_reported() {
        assert_eq!(
            ev("a + b", &[("a", 1)]),
            Err(ExprError::UnboundSymbol("b".into()))
        );
    }

    #[test]
    fn im_and_om_constants() {
        assert_eq!(ev("im^2", &[]).unwrap(), Cyclo::from_int(-1));
        assert_eq!(ev("om^2 + om + 1", &[]).unwrap(), Cyclo::from_int(0));
    }

    #[test]
    fn partials_of_product() {
        let e = parse_expr("p*q^2").unwrap();
        let mut a = Assignment::new();
        a.insert("p".into(), Cyclo::from_int(3));
        a.insert("q".into(), Cyclo::from_int(2));
        let d = eval_with_partials(&e, &a, &["q"]).unwrap();
        assert_eq!(d.v, Cyclo::from_int(12));
        assert_eq!(d.partial(0), Cyclo::from_int(12));
    }

    #[test]
    fn partials_match_intro_flow() {
        // dH_II/dp = 2p - q^2 - t at (alpha,t,q,p)=(1,5,1,2) -> -2
        let e = parse_expr("p^2 - (q^2+t)*p - alpha*q").unwrap();
        let mut a = Assignment::new();
        for (k, v) in [("alpha", 1), ("t", 5), ("q", 1), ("p", 2)] {
            a.insert(k.into(), Cyclo::from_int(v));
        }
        let d = eval_with_partials(&e, &a, &["p"]).unwrap();
        assert_eq!(d.partial(0), Cyclo::from_int(-2));
    }

    #[test]
    fn partial_of_reciprocal() {
        let e = parse_expr("1/(x-1)").unwrap();
        let mut a = Assignment::new();
        a.insert("x".into(), Cyclo::from_int(3));
        let d = eval_with_partials(&e, &a, &["x"]).unwrap();
        assert_eq!(d.partial(0), Cyclo::ratio(-1, 4));
    }

    #[test]
    fn substitution_simultaneous() {
        let e = parse_expr("q1^2").unwrap();
        let mut s = SubstMap::new();
        s.insert("q1", parse_expr("eps*tt*pt1").unwrap());
        let out = e.substitute(&s).unwrap();
        let mut a = Assignment::new();
        for (k, v) in [("eps", 2), ("tt", 3), ("pt1", 5)] {
            a.insert(k.into(), Cyclo::from_int(v));
        }
        assert_eq!(out.evaluate(&a).unwrap(), Cyclo::from_int(900));
    }

    #[test]
    fn identity_substitution_is_identity() {
        let e = parse_expr("a*b + 1/c").unwrap();
        let mut s = SubstMap::new();
        s.insert("a", Expr::sym("a"));
        let out = e.substitute(&s).unwrap();
        assert_eq!(out, e);
    }

    #[test]
    fn cyclic_substitution_rejected() {
        let mut s = SubstMap::new();
        s.insert("a", parse_expr("b + 1").unwrap());
        s.insert("b", parse_expr("a").unwrap());
        let e = parse_expr("a").unwrap();
        assert!(matches!(
            e.substitute(&s),
            Err(ExprError::CyclicSubstitution(_))
        ));
    }

    #[test]
    fn substitution_composition_law() {
        // evaluate(substitute(e,s), a) == evaluate(e, a composed with s)
        let e = parse_expr("x^2 + y/x").unwrap();
        let mut s = SubstMap::new();
        s.insert("x", parse_expr("u + v").unwrap());
        s.insert("y", parse_expr("u*v").unwrap());
        let mut a = Assignment::new();
        a.insert("u".into(), Cyclo::from_int(2));
        a.insert("v".into(), Cyclo::from_int(5));
        let lhs = e.substitute(&s).unwrap().evaluate(&a).unwrap();
        let mut composed = Assignment::new();
        composed.insert("x".into(), Cyclo::from_int(7));
        composed.insert("y".into(), Cyclo::from_int(10));
        let rhs = e.evaluate(&composed).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn roundtrip_serialization() {
        for src in [
            "q1*p1 - th0",
            "(a+b)*(c-d)/(e+1)",
            "-x^3 + 2/3*y - z^(-2)",
            "1/2 + im - om",
            "a - (b - c)",
            "a/(b*c)",
        ] {
            let e = parse_expr(src).unwrap();
            let text = serialize_expr(&e);
            let back = parse_expr(&text).unwrap();
            assert_eq!(e, back, "roundtrip failed for {} -> {}", src, text);
        }
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_expr("1/(").unwrap_err();
        match err {
            ExprError::Parse { offset, .. } => assert_eq!(offset, 3),
            _ => panic!("expected parse error"),
        }
    }

    #[test]
    fn symbolic_derivative_agrees_with_duals() {
        let e = parse_expr("(x^2 + 3*x)/(x - 5) + x*y^2").unwrap();
        let mut a = Assignment::new();
        a.insert("x".into(), Cyclo::from_int(2));
        a.insert("y".into(), Cyclo::from_int(3));
        let d = eval_with_partials(&e, &a, &["x", "y"]).unwrap();
        let dx = e.diff("x").evaluate(&a).unwrap();
        let dy = e.diff("y").evaluate(&a).unwrap();
        assert_eq!(d.partial(0), dx);
        assert_eq!(d.partial(1), dy);
    }
}
