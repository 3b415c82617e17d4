//! Spectral types: combinatorial names for canonical forms.
//!
//! A point's type is a list of parts: ramified clusters `(...)_r`
//! (written once per Galois orbit of sheets) and unramified groups,
//! which are nested parentheses over the integer levels ending in
//! residue-multiplicity digits; a Fuchsian group is the bare digit run.

use super::reduce::HtlForm;
use crate::{K, Q};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Tree {
    /// Residue multiplicities (descending).
    Leaf(Vec<u32>),
    /// Branches at the next level down.
    Node(Vec<Tree>),
}

impl Tree {
    fn render(&self) -> String {
        match self {
            Tree::Leaf(digits) => digits.iter().map(|d| d.to_string()).collect(),
            Tree::Node(children) => children
                .iter()
                .map(|c| format!("({})", c.render()))
                .collect(),
        }
    }

    fn canonical(&mut self) {
        match self {
            Tree::Leaf(d) => d.sort_unstable_by(|a, b| b.cmp(a)),
            Tree::Node(ch) => {
                for c in ch.iter_mut() {
                    c.canonical();
                }
                ch.sort_by(|a, b| b.cmp(a));
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Part {
    /// Fuchsian-style digits with no surrounding parentheses.
    Bare(Vec<u32>),
    /// A parenthesized group; `r` = 1 for unramified groups, otherwise
    /// the ramification index printed as a subscript.
    Cluster { r: u32, tree: Tree },
}

impl Part {
    fn render(&self) -> String {
        match self {
            Part::Bare(d) => d.iter().map(|x| x.to_string()).collect(),
            Part::Cluster { r, tree } => {
                let body = format!("({})", tree.render());
                if *r > 1 {
                    format!("{}_{}", body, r)
                } else {
                    body
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralType {
    pub parts: Vec<Part>,
}

impl SpectralType {
    pub fn render(&self) -> String {
        let mut pieces: Vec<String> = self.parts.iter().map(|p| p.render()).collect();
        // Separate adjacent digit runs with a space, as in "(1)_3 1".
        let mut out = String::new();
        for (i, p) in pieces.drain(..).enumerate() {
            if i > 0 && !p.starts_with('(') {
                out.push(' ');
            }
            out.push_str(&p);
        }
        out
    }

    /// Canonical order for structural comparison.
    pub fn canonicalize(&self) -> SpectralType {
        let mut parts = self.parts.clone();
        for p in parts.iter_mut() {
            match p {
                Part::Bare(d) => d.sort_unstable_by(|a, b| b.cmp(a)),
                Part::Cluster { tree, .. } => tree.canonical(),
            }
        }
        parts.sort_by(|a, b| b.cmp(a));
        SpectralType { parts }
    }

    pub fn equivalent(&self, other: &SpectralType) -> bool {
        self.canonicalize() == other.canonicalize()
    }

    /// Parse a printed name like "(1)_3 1" or "31" or "(((1)(1)))_2".
    pub fn parse(src: &str) -> Option<SpectralType> {
        let bytes = src.as_bytes();
        let mut parts = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            match bytes[i] {
                b' ' | b',' => i += 1,
                b'(' => {
                    let (tree, j) = parse_tree(bytes, i)?;
                    i = j;
                    let mut r = 1u32;
                    if i < bytes.len() && bytes[i] == b'_' {
                        i += 1;
                        let start = i;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                        r = src[start..i].parse().ok()?;
                    }
                    parts.push(Part::Cluster { r, tree });
                }
                c if c.is_ascii_digit() => {
                    let mut digits = Vec::new();
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        digits.push((bytes[i] - b'0') as u32);
                        i += 1;
                    }
                    parts.push(Part::Bare(digits));
                }
                _ => return None,
            }
        }
        Some(SpectralType { parts })
    }
}

/// Parse one parenthesized tree starting at `(`; returns (tree, index
/// after the closing paren). The body is either a digit run or a list of
/// subtrees.
fn parse_tree(bytes: &[u8], start: usize) -> Option<(Tree, usize)> {
    debug_assert_eq!(bytes[start], b'(');
    let mut i = start + 1;
    if i < bytes.len() && bytes[i] == b'(' {
        let mut children = Vec::new();
        while i < bytes.len() && bytes[i] == b'(' {
            let (t, j) = parse_tree(bytes, i)?;
            children.push(t);
            i = j;
        }
        if i >= bytes.len() || bytes[i] != b')' {
            return None;
        }
        Some((Tree::Node(children), i + 1))
    } else {
        let mut digits = Vec::new();
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            digits.push((bytes[i] - b'0') as u32);
            i += 1;
        }
        if i >= bytes.len() || bytes[i] != b')' || digits.is_empty() {
            return None;
        }
        Some((Tree::Leaf(digits), i + 1))
    }
}

/// The spectral type of a canonical form.
pub fn spectral_type_of(form: &HtlForm) -> SpectralType {
    let ram = form.ramification();
    let steps = form.column_levels();
    // Distinct rows with multiplicities.
    let rows = form.canonical_rows();
    let mut rowmap: BTreeMap<String, (Vec<K>, K, usize)> = BTreeMap::new();
    for (exps, res) in rows {
        let key = row_key(&exps, &res);
        rowmap
            .entry(key)
            .and_modify(|(_, _, c)| *c += 1)
            .or_insert((exps, res, 1));
    }
    let rowvals: Vec<(Vec<K>, K, usize)> = rowmap.into_values().collect();

    // Rotation action: the coefficient at level l picks up zeta12^(-12 l).
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

    // Unramified rows are the rotation-fixed ones.
    let mut unram: Vec<(Vec<K>, K, usize)> = Vec::new();
    let mut ramrows: Vec<(Vec<K>, K, usize)> = Vec::new();
    for (exps, res, c) in rowvals {
        if rot(&exps) == exps {
            unram.push((exps, res, c));
        } else {
            ramrows.push((exps, res, c));
        }
    }

    let mut parts = Vec::new();

    // --- ramified clusters ---
    let mut remaining = ramrows;
    while let Some(seed) = remaining.first().cloned() {
        // Orbit closure of the seed row.
        let mut cluster: Vec<(Vec<K>, K, usize)> = vec![seed.clone()];
        remaining.remove(0);
        let mut changed = true;
        while changed {
            changed = false;
            // (a) rotation closure
            let mut to_add = Vec::new();
            for (exps, res, _) in &cluster {
                let r = rot(exps);
                if let Some(pos) = remaining
                    .iter()
                    .position(|(e, s, _)| *e == r && s == res)
                {
                    to_add.push(remaining.remove(pos));
                }
            }
            if !to_add.is_empty() {
                changed = true;
                cluster.extend(to_add);
            }
            // (b) shared-prefix closure: any row agreeing with a cluster
            // row on the top coefficient joins the cluster.
            let mut to_add = Vec::new();
            let mut idx = 0;
            while idx < remaining.len() {
                let joins = cluster
                    .iter()
                    .any(|(e, _, _)| !e.is_empty() && !remaining[idx].0.is_empty() && e[0] == remaining[idx].0[0]);
                if joins {
                    to_add.push(remaining.remove(idx));
                } else {
                    idx += 1;
                }
            }
            if !to_add.is_empty() {
                changed = true;
                cluster.extend(to_add);
            }
        }
        parts.push(render_ram_cluster(&cluster, &steps, ram, &rot));
    }

    // --- unramified part ---
    if !unram.is_empty() {
        // Highest integer level with a nonzero coefficient among them.
        let mut top: Option<usize> = None;
        for (si, l) in steps.iter().enumerate() {
            if l.is_integer() && unram.iter().any(|(e, _, _)| !e[si].is_zero()) {
                top = Some(si);
                break;
            }
        }
        match top {
            None => {
                // Depth 0: bare residue-multiplicity digits.
                parts.push(Part::Bare(residue_digits(&unram)));
            }
            Some(si) => {
                let int_steps: Vec<usize> = (si..steps.len())
                    .filter(|&k| steps[k].is_integer())
                    .collect();
                let trees = unram_tree(&unram, &int_steps);
                for t in trees {
                    parts.push(Part::Cluster { r: 1, tree: t });
                }
            }
        }
    }

    SpectralType { parts }.canonicalize()
}

fn row_key(exps: &[K], res: &K) -> String {
    let mut s = String::new();
    for e in exps {
        s.push_str(&format!("{};", e));
    }
    s.push_str(&format!("|{}", res));
    s
}

fn residue_digits(rows: &[(Vec<K>, K, usize)]) -> Vec<u32> {
    // Group by residue value.
    let mut counts: Vec<(K, u32)> = Vec::new();
    for (_, res, c) in rows {
        match counts.iter_mut().find(|(r, _)| r == res) {
            Some((_, n)) => *n += *c as u32,
            None => counts.push((res.clone(), *c as u32)),
        }
    }
    let mut digits: Vec<u32> = counts.into_iter().map(|(_, n)| n).collect();
    digits.sort_unstable_by(|a, b| b.cmp(a));
    digits
}

/// Nested refinement of the unramified rows over integer levels.
fn unram_tree(rows: &[(Vec<K>, K, usize)], int_steps: &[usize]) -> Vec<Tree> {
    if int_steps.is_empty() {
        return vec![Tree::Leaf(residue_digits(rows))];
    }
    let si = int_steps[0];
    let rest = &int_steps[1..];
    // Group rows by the coefficient at this level.
    let mut groups: Vec<(K, Vec<(Vec<K>, K, usize)>)> = Vec::new();
    for row in rows {
        let v = row.0[si].clone();
        match groups.iter_mut().find(|(g, _)| *g == v) {
            Some((_, rs)) => rs.push(row.clone()),
            None => groups.push((v, vec![row.clone()])),
        }
    }
    let mut out = Vec::new();
    for (_, g) in groups {
        let children = unram_tree(&g, rest);
        if rest.is_empty() {
            // children is a single leaf
            out.extend(children);
        } else {
            out.push(Tree::Node(children));
        }
    }
    out
}

/// Render one ramified cluster: quotient the refinement tree by the
/// rotation and wrap one paren layer per step of the cluster lattice.
fn render_ram_cluster(
    cluster: &[(Vec<K>, K, usize)],
    steps: &[Q],
    global_ram: i64,
    rot: &impl Fn(&[K]) -> Vec<K>,
) -> Part {
    // Cluster ramification: minimal d with rot^d fixing every row.
    let mut r = 1i64;
    for d in 1..=global_ram {
        if global_ram % d != 0 {
            continue;
        }
        let fixes = cluster.iter().all(|(e, _, _)| {
            let mut x = e.clone();
            for _ in 0..d {
                x = rot(&x);
            }
            x == *e
        });
        if fixes {
            r = d;
            break;
        }
    }
    // Cluster stepping on its own lattice, from its own top level.
    let top = steps
        .iter()
        .enumerate()
        .find(|(si, _)| cluster.iter().any(|(e, _, _)| !e[*si].is_zero()))
        .map(|(si, _)| steps[si].clone())
        .unwrap_or_else(Q::one);
    let own_steps: Vec<usize> = steps
        .iter()
        .enumerate()
        .filter(|(_, l)| {
            **l <= top && (*l * Q::from_integer(r.into())).is_integer()
        })
        .map(|(si, _)| si)
        .collect();
    // The cluster's rows form a single rotation orbit of values at the
    // top step, so the quotient tree has a singleton root; the printed
    // form's outermost parenthesis is supplied by the Part itself.
    let tree = match quotient_tree(cluster, &own_steps, 1, global_ram, rot) {
        Tree::Node(children) if children.len() == 1 => children.into_iter().next().unwrap(),
        other => other,
    };
    Part::Cluster {
        r: r as u32,
        tree,
    }
}

/// Recursive quotient of the refinement tree by the cyclic rotation.
/// `g` is the exponent generating the stabilizer of the path so far.
fn quotient_tree(
    rows: &[(Vec<K>, K, usize)],
    steps: &[usize],
    g: i64,
    global_ram: i64,
    rot: &impl Fn(&[K]) -> Vec<K>,
) -> Tree {
    if steps.is_empty() {
        return Tree::Leaf(residue_digits(rows));
    }
    let si = steps[0];
    let rest = &steps[1..];
    // Branches by the coefficient at this step.
    let mut branches: Vec<(K, Vec<(Vec<K>, K, usize)>)> = Vec::new();
    for row in rows {
        let v = row.0[si].clone();
        match branches.iter_mut().find(|(b, _)| *b == v) {
            Some((_, rs)) => rs.push(row.clone()),
            None => branches.push((v, vec![row.clone()])),
        }
    }
    // The stabilizer sigma^g permutes branches; pick one representative
    // per orbit and recurse with the enlarged stabilizer.
    let rot_g = |e: &[K]| -> Vec<K> {
        let mut x = e.to_vec();
        for _ in 0..g {
            x = rot(&x);
        }
        x
    };
    let mut seen: Vec<K> = Vec::new();
    let mut children = Vec::new();
    for (v, rows_v) in &branches {
        if seen.contains(v) {
            continue;
        }
        // Orbit of this branch value under sigma^g at this step.
        let mut orbit_len = 1i64;
        let mut cur: Vec<K> = rows_v[0].0.clone();
        loop {
            cur = rot_g(&cur);
            let cv = cur[si].clone();
            if cv == *v {
                break;
            }
            if !seen.contains(&cv) {
                seen.push(cv.clone());
            }
            orbit_len += 1;
            if orbit_len > global_ram {
                break;
            }
        }
        seen.push(v.clone());
        children.push(quotient_tree(rows_v, rest, g * orbit_len, global_ram, rot));
    }
    Tree::Node(children)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render_roundtrip() {
        for src in [
            "31",
            "1111",
            "22",
            "(1)_4",
            "(2)_2",
            "(1)_2 11",
            "(1)_3 1",
            "(111)(1)",
            "(2)(2)",
            "(1)_2(1)_2",
            "((1))_4",
            "(((1)(1)))_2",
            "((((((1))))))_4",
            "(11)(11)",
            "(2)(1)",
            "(1)(1)(1)",
            "(1)_2(1)",
        ] {
            let t = SpectralType::parse(src).expect(src);
            let out = t.render();
            let back = SpectralType::parse(&out).expect(&out);
            assert!(t.equivalent(&back), "{} -> {}", src, out);
        }
    }

    #[test]
    fn structural_inequivalence() {
        let a = SpectralType::parse("(11)").unwrap();
        let b = SpectralType::parse("11").unwrap();
        assert!(!a.equivalent(&b));
        let c = SpectralType::parse("(1)(1)").unwrap();
        assert!(!a.equivalent(&c));
        let d = SpectralType::parse("(1)_2").unwrap();
        let e = SpectralType::parse("(1)(1)").unwrap();
        assert!(!d.equivalent(&e));
    }

    #[test]
    fn order_insensitive_equivalence() {
        let a = SpectralType::parse("(1)_3 1").unwrap();
        let b = SpectralType::parse("1 (1)_3").unwrap();
        assert!(a.equivalent(&b));
    }
}
