//! Parser for the catalog entry file format.
//!
//! Files are line oriented with `#` comments. A header block of
//! `key = value` lines is followed by sections:
//!
//! * `[defs]` — named scalar definitions, in evaluation order;
//! * `[matrix NAME R C]` — a matrix, either as R literal rows of
//!   comma-separated expressions or as `= <matrix expression>` built from
//!   previously defined matrices with `+ - *`, `vstack(a; b)`,
//!   `hstack(a; b)`, `diag(e1; ...)`, `I2`/`I4`, and bracketed scalars
//!   `[expr]`;
//! * `[x-equation]` / `[t-equation <time>]` — pole and polynomial
//!   coefficients by matrix name, with an optional `conjugate = P U`
//!   (or `conjugate = U`) applying A -> U^-1 P^-1 A P U to every
//!   coefficient (P unipotent with square-zero off-part, U diagonal);
//! * `[hamiltonian <time>]` — `ham = ...` with classical template calls
//!   `NAME{arg | ... | t | q | p}` expanded in place;
//! * `[gauge-ode <time>]` — logarithmic derivatives `g = expr`;
//! * `[scheme]` — `point <loc> rank <r> ram <n> type <name>` followed by
//!   `row e1, e2 | res` lines (no exponential columns for Fuchsian rows).

use super::{
    classical, CatalogError, PointLoc, RationalMatExpr, SchemePoint, SchemeRow, SystemEntry,
};
use crate::expr::{parse_expr, Expr, MatExpr};
use crate::Q;
use num_traits::Zero;
use std::collections::HashMap;
use std::str::FromStr;

pub fn parse_entry(file: &str, content: &str) -> Result<SystemEntry, CatalogError> {
    Parser::new(file, content).parse()
}

struct Parser<'a> {
    file: String,
    lines: Vec<(usize, &'a str)>,
    pos: usize,
    matrices: HashMap<String, MatExpr>,
}

impl<'a> Parser<'a> {
    fn new(file: &str, content: &'a str) -> Self {
        let lines = content
            .lines()
            .enumerate()
            .map(|(i, l)| {
                let l = match l.find('#') {
                    Some(k) => &l[..k],
                    None => l,
                };
                (i + 1, l.trim())
            })
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Parser {
            file: file.to_string(),
            lines,
            pos: 0,
            matrices: HashMap::new(),
        }
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> CatalogError {
        CatalogError::Parse {
            file: self.file.clone(),
            line,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.lines.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let l = self.peek();
        if l.is_some() {
            self.pos += 1;
        }
        l
    }

    fn expr(&self, line: usize, src: &str) -> Result<Expr, CatalogError> {
        let expanded = expand_templates(src).map_err(|m| self.err(line, m))?;
        parse_expr(&expanded).map_err(|e| self.err(line, e.to_string()))
    }

    fn parse(mut self) -> Result<SystemEntry, CatalogError> {
        let (l0, header) = self
            .next()
            .ok_or_else(|| self.err(0, "empty entry file"))?;
        if header != "isoatlas-entry v1" {
            return Err(self.err(l0, "expected `isoatlas-entry v1` header"));
        }
        let mut name = String::new();
        let mut pattern = String::new();
        let mut ham_name = String::new();
        let mut times = Vec::new();
        let mut vars = Vec::new();
        let mut params = Vec::new();
        let mut gauge = Vec::new();
        let mut fuchs = Expr::int(0);
        let mut specialize = Vec::new();
        let mut constraints = Vec::new();
        // Header key = value lines until the first section.
        while let Some((ln, line)) = self.peek() {
            if line.starts_with('[') {
                break;
            }
            self.pos += 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| self.err(ln, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "name" => name = value.to_string(),
                "pattern" => pattern = value.to_string(),
                "hamiltonian-name" => ham_name = value.to_string(),
                "times" => times = words(value),
                "vars" => vars = words(value),
                "params" => params = words(value),
                "gauge" => gauge = words(value),
                "fuchs" => fuchs = self.expr(ln, value)?,
                "specialize" => {
                    for clause in value.split(',') {
                        let clause = clause.trim();
                        if clause.is_empty() {
                            continue;
                        }
                        let (tv, ex) = clause
                            .split_once(':')
                            .ok_or_else(|| self.err(ln, "expected `time: expr`"))?;
                        specialize.push((tv.trim().to_string(), self.expr(ln, ex)?));
                    }
                }
                "constraints" => {
                    for clause in value.split(',') {
                        let clause = clause.trim();
                        if !clause.is_empty() {
                            constraints.push(self.expr(ln, clause)?);
                        }
                    }
                }
                _ => return Err(self.err(ln, format!("unknown header key `{}`", key))),
            }
        }
        if name.is_empty() {
            return Err(self.err(l0, "missing `name`"));
        }

        let mut defs = Vec::new();
        let mut x_eq = None;
        let mut x_conj: Option<(Option<MatExpr>, Option<MatExpr>)> = None;
        let mut t_eqs: Vec<(String, RationalMatExpr)> = Vec::new();
        let mut hams = Vec::new();
        let mut gauge_odes = Vec::new();
        let mut scheme = Vec::new();

        while let Some((ln, line)) = self.next() {
            let section = line
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| self.err(ln, "expected a section header"))?
                .trim()
                .to_string();
            let mut parts = section.split_whitespace();
            match parts.next().unwrap_or("") {
                "defs" => {
                    while let Some((dl, dline)) = self.peek() {
                        if dline.starts_with('[') {
                            break;
                        }
                        self.pos += 1;
                        let (n, e) = dline
                            .split_once('=')
                            .ok_or_else(|| self.err(dl, "expected `name = expr`"))?;
                        defs.push((n.trim().to_string(), self.expr(dl, e.trim())?));
                    }
                }
                "matrix" => {
                    let mname = parts
                        .next()
                        .ok_or_else(|| self.err(ln, "matrix needs a name"))?
                        .to_string();
                    let rest: Vec<&str> = parts.collect();
                    if rest.len() < 2 {
                        return Err(self.err(ln, "matrix needs dimensions"));
                    }
                    let rows: usize = rest[0]
                        .parse()
                        .map_err(|_| self.err(ln, "bad row count"))?;
                    // The column count may be followed by `= <matexpr>` on
                    // the same line after the closing bracket; handle both.
                    let cols: usize = rest[1]
                        .parse()
                        .map_err(|_| self.err(ln, "bad column count"))?;
                    let m = if let Some((el, eline)) = self.peek() {
                        if let Some(meq) = eline.strip_prefix('=') {
                            self.pos += 1;
                            let m = self.matrix_expr(el, meq.trim())?;
                            if m.rows != rows || m.cols != cols {
                                return Err(self.err(
                                    el,
                                    format!(
                                        "matrix `{}` has shape {}x{}, declared {}x{}",
                                        mname, m.rows, m.cols, rows, cols
                                    ),
                                ));
                            }
                            m
                        } else {
                            self.literal_matrix(rows, cols)?
                        }
                    } else {
                        return Err(self.err(ln, "matrix body missing"));
                    };
                    self.matrices.insert(mname, m);
                }
                "x-equation" => {
                    let (rm, conj) = self.rational_section()?;
                    x_eq = Some(rm);
                    x_conj = conj;
                }
                "t-equation" => {
                    let tv = parts
                        .next()
                        .ok_or_else(|| self.err(ln, "t-equation needs a time"))?
                        .to_string();
                    let (rm, conj) = self.rational_section()?;
                    if conj.is_some() {
                        return Err(self.err(ln, "conjugate goes on the x-equation only"));
                    }
                    t_eqs.push((tv, rm));
                }
                "hamiltonian" => {
                    let tv = parts
                        .next()
                        .ok_or_else(|| self.err(ln, "hamiltonian needs a time"))?
                        .to_string();
                    let (hl, hline) = self
                        .next()
                        .ok_or_else(|| self.err(ln, "hamiltonian body missing"))?;
                    let e = hline
                        .strip_prefix("ham")
                        .and_then(|s| s.trim_start().strip_prefix('='))
                        .ok_or_else(|| self.err(hl, "expected `ham = ...`"))?;
                    hams.push((tv, self.expr(hl, e.trim())?));
                }
                "gauge-ode" => {
                    let tv = parts
                        .next()
                        .ok_or_else(|| self.err(ln, "gauge-ode needs a time"))?
                        .to_string();
                    let mut odes = Vec::new();
                    while let Some((gl, gline)) = self.peek() {
                        if gline.starts_with('[') {
                            break;
                        }
                        self.pos += 1;
                        let (g, e) = gline
                            .split_once('=')
                            .ok_or_else(|| self.err(gl, "expected `g = expr`"))?;
                        odes.push((g.trim().to_string(), self.expr(gl, e.trim())?));
                    }
                    gauge_odes.push((tv, odes));
                }
                "scheme" => {
                    scheme = self.scheme_section()?;
                }
                other => return Err(self.err(ln, format!("unknown section `{}`", other))),
            }
        }

        // Apply the conjugation to the x- and t-equation coefficients.
        if let Some((p, u)) = x_conj {
            let conj = |m: &MatExpr| conjugate(m, p.as_ref(), u.as_ref());
            if let Some(x) = &mut x_eq {
                apply_conj(x, &conj);
            }
            for (_, teq) in &mut t_eqs {
                apply_conj(teq, &conj);
            }
        }

        Ok(SystemEntry {
            name,
            pattern,
            ham_name,
            times,
            vars,
            params,
            gauge,
            fuchs,
            specialize,
            constraints,
            defs,
            x_eq,
            t_eqs,
            hams,
            gauge_odes,
            scheme,
        })
    }

    fn literal_matrix(&mut self, rows: usize, cols: usize) -> Result<MatExpr, CatalogError> {
        let mut out = Vec::with_capacity(rows);
        for _ in 0..rows {
            let (rl, rline) = self
                .next()
                .ok_or_else(|| self.err(0, "matrix row missing"))?;
            let entries: Vec<Expr> = rline
                .split(',')
                .map(|e| self.expr(rl, e.trim()))
                .collect::<Result<_, _>>()?;
            if entries.len() != cols {
                return Err(self.err(rl, format!("expected {} entries", cols)));
            }
            out.push(entries);
        }
        Ok(MatExpr::from_rows(out))
    }

    /// `pole <loc> <order> = NAME` and `const <j> = NAME` lines, plus an
    /// optional `conjugate = [P] U` line.
    #[allow(clippy::type_complexity)]
    fn rational_section(
        &mut self,
    ) -> Result<(RationalMatExpr, Option<(Option<MatExpr>, Option<MatExpr>)>), CatalogError> {
        let mut poles: Vec<(Q, Vec<MatExpr>)> = Vec::new();
        let mut poly: Vec<MatExpr> = Vec::new();
        let mut conj = None;
        while let Some((ln, line)) = self.peek() {
            if line.starts_with('[') {
                break;
            }
            self.pos += 1;
            if let Some(rest) = line.strip_prefix("conjugate") {
                let rest = rest
                    .trim_start()
                    .strip_prefix('=')
                    .ok_or_else(|| self.err(ln, "expected `conjugate = ...`"))?;
                let names = words(rest);
                let (p, u) = match names.len() {
                    1 => (None, Some(self.named(ln, &names[0])?)),
                    2 => (
                        Some(self.named(ln, &names[0])?),
                        Some(self.named(ln, &names[1])?),
                    ),
                    _ => return Err(self.err(ln, "conjugate takes `P U` or `U`")),
                };
                conj = Some((p, u));
                continue;
            }
            let (head, mname) = line
                .split_once('=')
                .ok_or_else(|| self.err(ln, "expected `pole|const ... = NAME`"))?;
            let m = self.named(ln, mname.trim())?;
            let head: Vec<&str> = head.split_whitespace().collect();
            match head.as_slice() {
                ["pole", loc, ord] => {
                    let u: Q = parse_q(loc).ok_or_else(|| self.err(ln, "bad pole location"))?;
                    let k: usize = ord.parse().map_err(|_| self.err(ln, "bad pole order"))?;
                    let slot = match poles.iter_mut().find(|(v, _)| *v == u) {
                        Some((_, ms)) => ms,
                        None => {
                            poles.push((u.clone(), Vec::new()));
                            &mut poles.last_mut().unwrap().1
                        }
                    };
                    while slot.len() < k {
                        slot.push(MatExpr::zeros(m.rows, m.cols));
                    }
                    slot[k - 1] = m;
                }
                ["const", j] => {
                    let j: usize = j.parse().map_err(|_| self.err(ln, "bad power"))?;
                    while poly.len() <= j {
                        poly.push(MatExpr::zeros(m.rows, m.cols));
                    }
                    poly[j] = m;
                }
                _ => return Err(self.err(ln, "expected `pole <loc> <order>` or `const <j>`")),
            }
        }
        Ok((RationalMatExpr { poles, poly }, conj))
    }

    fn named(&self, line: usize, name: &str) -> Result<MatExpr, CatalogError> {
        self.matrices
            .get(name)
            .cloned()
            .ok_or_else(|| self.err(line, format!("unknown matrix `{}`", name)))
    }

    fn scheme_section(&mut self) -> Result<Vec<SchemePoint>, CatalogError> {
        let mut points: Vec<SchemePoint> = Vec::new();
        while let Some((ln, line)) = self.peek() {
            if line.starts_with('[') {
                break;
            }
            self.pos += 1;
            if let Some(rest) = line.strip_prefix("point") {
                let w: Vec<&str> = rest.split_whitespace().collect();
                // point <loc> rank <q> ram <n> type <name...>
                if w.len() < 7 || w[1] != "rank" || w[3] != "ram" || w[5] != "type" {
                    return Err(self.err(ln, "expected `point <loc> rank <q> ram <n> type <t>`"));
                }
                let loc = if w[0] == "inf" {
                    PointLoc::Infinity
                } else if let Some(q) = parse_q(w[0]) {
                    PointLoc::Finite(q)
                } else {
                    PointLoc::Symbolic(w[0].to_string())
                };
                let rank = parse_q(w[2]).ok_or_else(|| self.err(ln, "bad rank"))?;
                let ram: i64 = w[4].parse().map_err(|_| self.err(ln, "bad ramification"))?;
                let spectral_type = w[6..].join(" ");
                points.push(SchemePoint {
                    loc,
                    rank,
                    ram,
                    spectral_type,
                    rows: Vec::new(),
                });
            } else if let Some(rest) = line.strip_prefix("row") {
                let point = points
                    .last_mut()
                    .ok_or_else(|| self.err(ln, "row before any point"))?;
                let (exps, res) = rest
                    .split_once('|')
                    .ok_or_else(|| self.err(ln, "expected `row exps | res`"))?;
                let exps: Vec<Expr> = exps
                    .split(',')
                    .map(|e| e.trim())
                    .filter(|e| !e.is_empty())
                    .map(|e| self.expr(ln, e))
                    .collect::<Result<_, _>>()?;
                let res = self.expr(ln, res.trim())?;
                point.rows.push(SchemeRow { exps, res });
            } else {
                return Err(self.err(ln, "expected `point` or `row`"));
            }
        }
        Ok(points)
    }

    // -- matrix expressions -------------------------------------------------

    fn matrix_expr(&self, line: usize, src: &str) -> Result<MatExpr, CatalogError> {
        let mut p = MexParser {
            outer: self,
            line,
            src: src.as_bytes(),
            pos: 0,
        };
        let v = p.mexpr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(self.err(line, "trailing input in matrix expression"));
        }
        match v {
            MVal::Matrix(m) => Ok(m),
            MVal::Scalar(_) => Err(self.err(line, "matrix expression evaluates to a scalar")),
        }
    }
}

fn apply_conj(rm: &mut RationalMatExpr, conj: &impl Fn(&MatExpr) -> MatExpr) {
    for (_, ms) in &mut rm.poles {
        for m in ms {
            *m = conj(m);
        }
    }
    for m in &mut rm.poly {
        *m = conj(m);
    }
}

/// A -> U^-1 P^-1 A P U with P = I + N (N^2 = 0, so P^-1 = 2I - P) and
/// U diagonal.
fn conjugate(a: &MatExpr, p: Option<&MatExpr>, u: Option<&MatExpr>) -> MatExpr {
    let mut m = a.clone();
    if let Some(p) = p {
        let n = p.rows;
        let two_i_minus_p = {
            let mut t = MatExpr::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let pij = p.entry(i, j).clone();
                    t.entries[i * n + j] = if i == j {
                        Expr::sub(Expr::int(2), pij)
                    } else {
                        Expr::neg(pij)
                    };
                }
            }
            t
        };
        m = mat_mul_expr(&mat_mul_expr(&two_i_minus_p, &m), p);
    }
    if let Some(u) = u {
        let n = u.rows;
        let mut out = MatExpr::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                // (U^-1 M U)_ij = M_ij * u_j / u_i
                let mij = m.entry(i, j).clone();
                let scaled = Expr::div(
                    Expr::mul(mij, u.entry(j, j).clone()),
                    u.entry(i, i).clone(),
                );
                out.entries[i * n + j] = scaled;
            }
        }
        m = out;
    }
    m
}

pub(crate) fn mat_mul_expr(a: &MatExpr, b: &MatExpr) -> MatExpr {
    assert_eq!(a.cols, b.rows);
    let mut out = MatExpr::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for j in 0..b.cols {
            let mut acc = Expr::int(0);
            for k in 0..a.cols {
                let x = a.entry(i, k);
                let y = b.entry(k, j);
                if is_zero_expr(x) || is_zero_expr(y) {
                    continue;
                }
                let term = Expr::mul(x.clone(), y.clone());
                acc = if is_zero_expr(&acc) {
                    term
                } else {
                    Expr::add(acc, term)
                };
            }
            out.entries[i * b.cols + j] = acc;
        }
    }
    out
}

pub(crate) fn is_zero_expr(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if c.is_zero())
}

enum MVal {
    Scalar(Expr),
    Matrix(MatExpr),
}

struct MexParser<'a, 'b> {
    outer: &'b Parser<'a>,
    line: usize,
    src: &'b [u8],
    pos: usize,
}

impl MexParser<'_, '_> {
    fn err(&self, msg: &str) -> CatalogError {
        self.outer.err(self.line, msg)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn mexpr(&mut self) -> Result<MVal, CatalogError> {
        let mut acc = self.mterm()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = mval_add(acc, self.mterm()?, false).map_err(|m| self.err(m))?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = mval_add(acc, self.mterm()?, true).map_err(|m| self.err(m))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn mterm(&mut self) -> Result<MVal, CatalogError> {
        let mut acc = self.mfactor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = mval_mul(acc, self.mfactor()?).map_err(|m| self.err(m))?;
        }
        Ok(acc)
    }

    fn mfactor(&mut self) -> Result<MVal, CatalogError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.mexpr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(b'[') => {
                let start = self.pos + 1;
                let mut depth = 1;
                let mut i = start;
                while i < self.src.len() && depth > 0 {
                    match self.src[i] {
                        b'[' => depth += 1,
                        b']' => depth -= 1,
                        _ => {}
                    }
                    i += 1;
                }
                if depth != 0 {
                    return Err(self.err("unterminated `[`"));
                }
                let text = std::str::from_utf8(&self.src[start..i - 1]).unwrap();
                self.pos = i;
                let e = self.outer.expr(self.line, text)?;
                Ok(MVal::Scalar(e))
            }
            Some(b'-') => {
                self.pos += 1;
                let v = self.mfactor()?;
                Ok(match v {
                    MVal::Scalar(e) => MVal::Scalar(Expr::neg(e)),
                    MVal::Matrix(m) => MVal::Matrix(MatExpr {
                        rows: m.rows,
                        cols: m.cols,
                        entries: m.entries.into_iter().map(Expr::neg).collect(),
                    }),
                })
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos])
                    .unwrap()
                    .to_string();
                match name.as_str() {
                    "vstack" | "hstack" | "diag" => {
                        let args = self.paren_args()?;
                        self.builtin(&name, args)
                    }
                    _ => {
                        if let Some(rest) = name.strip_prefix('I') {
                            if let Ok(n) = rest.parse::<usize>() {
                                return Ok(MVal::Matrix(identity_expr(n)));
                            }
                        }
                        let m = self.outer.named(self.line, &name)?;
                        Ok(MVal::Matrix(m))
                    }
                }
            }
            _ => Err(self.err("unexpected character in matrix expression")),
        }
    }

    /// Arguments between parens, separated by `;` at depth zero.
    fn paren_args(&mut self) -> Result<Vec<String>, CatalogError> {
        if self.peek() != Some(b'(') {
            return Err(self.err("expected `(`"));
        }
        self.pos += 1;
        let start = self.pos;
        let mut depth = 1;
        let mut i = start;
        let mut args = Vec::new();
        let mut seg_start = start;
        while i < self.src.len() && depth > 0 {
            match self.src[i] {
                b'(' | b'[' => depth += 1,
                b')' | b']' => {
                    depth -= 1;
                    if depth == 0 {
                        args.push(
                            std::str::from_utf8(&self.src[seg_start..i])
                                .unwrap()
                                .to_string(),
                        );
                    }
                }
                b';' if depth == 1 => {
                    args.push(
                        std::str::from_utf8(&self.src[seg_start..i])
                            .unwrap()
                            .to_string(),
                    );
                    seg_start = i + 1;
                }
                _ => {}
            }
            i += 1;
        }
        if depth != 0 {
            return Err(self.err("unterminated `(`"));
        }
        self.pos = i;
        Ok(args)
    }

    fn builtin(&mut self, name: &str, args: Vec<String>) -> Result<MVal, CatalogError> {
        match name {
            "diag" => {
                let es: Vec<Expr> = args
                    .iter()
                    .map(|a| self.outer.expr(self.line, a.trim()))
                    .collect::<Result<_, _>>()?;
                let n = es.len();
                let mut m = MatExpr::zeros(n, n);
                for (i, e) in es.into_iter().enumerate() {
                    m.entries[i * n + i] = e;
                }
                Ok(MVal::Matrix(m))
            }
            "vstack" | "hstack" => {
                let ms: Vec<MatExpr> = args
                    .iter()
                    .map(|a| self.outer.matrix_expr(self.line, a.trim()))
                    .collect::<Result<_, _>>()?;
                if ms.is_empty() {
                    return Err(self.err("stack of nothing"));
                }
                Ok(MVal::Matrix(if name == "vstack" {
                    stack_v(&ms).map_err(|m| self.err(m))?
                } else {
                    stack_h(&ms).map_err(|m| self.err(m))?
                }))
            }
            _ => unreachable!(),
        }
    }
}

fn identity_expr(n: usize) -> MatExpr {
    let mut m = MatExpr::zeros(n, n);
    for i in 0..n {
        m.entries[i * n + i] = Expr::int(1);
    }
    m
}

fn stack_v(ms: &[MatExpr]) -> Result<MatExpr, &'static str> {
    let cols = ms[0].cols;
    if ms.iter().any(|m| m.cols != cols) {
        return Err("vstack column mismatch");
    }
    let rows = ms.iter().map(|m| m.rows).sum();
    let mut entries = Vec::with_capacity(rows * cols);
    for m in ms {
        entries.extend(m.entries.iter().cloned());
    }
    Ok(MatExpr {
        rows,
        cols,
        entries,
    })
}

fn stack_h(ms: &[MatExpr]) -> Result<MatExpr, &'static str> {
    let rows = ms[0].rows;
    if ms.iter().any(|m| m.rows != rows) {
        return Err("hstack row mismatch");
    }
    let cols: usize = ms.iter().map(|m| m.cols).sum();
    let mut entries = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for m in ms {
            for j in 0..m.cols {
                entries.push(m.entry(i, j).clone());
            }
        }
    }
    Ok(MatExpr {
        rows,
        cols,
        entries,
    })
}

fn mval_add(a: MVal, b: MVal, sub: bool) -> Result<MVal, &'static str> {
    match (a, b) {
        (MVal::Scalar(x), MVal::Scalar(y)) => Ok(MVal::Scalar(if sub {
            Expr::sub(x, y)
        } else {
            Expr::add(x, y)
        })),
        (MVal::Matrix(x), MVal::Matrix(y)) => {
            if x.rows != y.rows || x.cols != y.cols {
                return Err("matrix shape mismatch in sum");
            }
            let entries = x
                .entries
                .into_iter()
                .zip(y.entries)
                .map(|(p, q)| {
                    if is_zero_expr(&p) {
                        if sub {
                            Expr::neg(q)
                        } else {
                            q
                        }
                    } else if is_zero_expr(&q) {
                        p
                    } else if sub {
                        Expr::sub(p, q)
                    } else {
                        Expr::add(p, q)
                    }
                })
                .collect();
            Ok(MVal::Matrix(MatExpr {
                rows: x.rows,
                cols: x.cols,
                entries,
            }))
        }
        _ => Err("cannot add a scalar and a matrix"),
    }
}

fn mval_mul(a: MVal, b: MVal) -> Result<MVal, &'static str> {
    match (a, b) {
        (MVal::Scalar(x), MVal::Scalar(y)) => Ok(MVal::Scalar(Expr::mul(x, y))),
        (MVal::Scalar(x), MVal::Matrix(m)) | (MVal::Matrix(m), MVal::Scalar(x)) => {
            let entries = m
                .entries
                .into_iter()
                .map(|e| {
                    if is_zero_expr(&e) {
                        e
                    } else {
                        Expr::mul(x.clone(), e)
                    }
                })
                .collect();
            Ok(MVal::Matrix(MatExpr {
                rows: m.rows,
                cols: m.cols,
                entries,
            }))
        }
        (MVal::Matrix(x), MVal::Matrix(y)) => {
            if x.cols != y.rows {
                return Err("matrix shape mismatch in product");
            }
            Ok(MVal::Matrix(mat_mul_expr(&x, &y)))
        }
    }
}

/// Expand classical-template calls `NAME{a | b | ...}` in source text.
fn expand_templates(src: &str) -> Result<String, String> {
    if !src.contains('{') {
        return Ok(src.to_string());
    }
    let mut out = String::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_alphabetic() || bytes[i] == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let name = &src[start..i];
            if i < bytes.len() && bytes[i] == b'{' {
                let args_start = i + 1;
                let mut depth = 1;
                let mut j = args_start;
                while j < bytes.len() && depth > 0 {
                    match bytes[j] {
                        b'{' => depth += 1,
                        b'}' => depth -= 1,
                        _ => {}
                    }
                    j += 1;
                }
                if depth != 0 {
                    return Err("unterminated template call".into());
                }
                let args_src = &src[args_start..j - 1];
                let args: Vec<Expr> = args_src
                    .split('|')
                    .map(|a| parse_expr(a.trim()).map_err(|e| e.to_string()))
                    .collect::<Result<_, _>>()?;
                let expanded = classical::expand(name, &args)
                    .ok_or_else(|| format!("unknown template or arity: `{}`", name))?;
                out.push('(');
                out.push_str(&crate::expr::serialize_expr(&expanded));
                out.push(')');
                i = j;
                continue;
            }
            out.push_str(name);
            continue;
        }
        out.push(bytes[i] as char);
        i += 1;
    }
    Ok(out)
}

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(|w| w.to_string()).collect()
}

fn parse_q(s: &str) -> Option<Q> {
    if let Some((n, d)) = s.split_once('/') {
        let n: num_bigint::BigInt = n.parse().ok()?;
        let d: num_bigint::BigInt = d.parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(Q::new(n, d))
    } else {
        Q::from_str(s).ok()
    }
}
