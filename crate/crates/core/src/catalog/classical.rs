//! The eight classical Painleve Hamiltonians, stored as expression
//! templates. Catalog files reference them through template calls like
//! `III_D7{alpha | t | q | p}`, which expand by substitution into these
//! trees; the stored expression is the normalized H (the printed
//! normalizations t(t-1)H_VI, tH_V, tH_III are divided out).

use super::ClassicalHamiltonian;
use crate::expr::{parse_expr, Expr, SubstMap};

/// (name, parameter slots, printed normalized-H source text)
/// Template formal symbols: parameters as listed, then t, q, p.
const TEMPLATES: &[(&str, &[&str], &str)] = &[
    (
        "VI",
        &["__a", "__b", "__c", "__d"],
        "(__q*(__q-1)*(__q-__t)*__p^2 + (__d*__q*(__q-1) - (2*__a+__b+__c+__d)*__q*(__q-__t) + __c*(__q-1)*(__q-__t))*__p + __a*(__a+__b)*(__q-__t)) / (__t*(__t-1))",
    ),
    (
        "V",
        &["__a", "__b", "__c"],
        "(__p*(__p+__t)*__q*(__q-1) + __b*__p*__q + __c*__p - (__a+__c)*__t*__q) / __t",
    ),
    (
        "IV",
        &["__a", "__b"],
        "__p*__q*(__p-__q-__t) + __b*__p + __a*__q",
    ),
    (
        "III_D6",
        &["__a", "__b"],
        "(__p^2*__q^2 - (__q^2 - __b*__q - __t)*__p - __a*__q) / __t",
    ),
    (
        "III_D7",
        &["__a"],
        "(__p^2*__q^2 + __a*__q*__p + __t*__p + __q) / __t",
    ),
    ("III_D8", &[], "(__p^2*__q^2 + __q*__p - __q - __t/__q) / __t"),
    ("II", &["__a"], "__p^2 - (__q^2+__t)*__p - __a*__q"),
    ("I", &[], "__p^2 - __q^3 - __t*__q"),
];

/// User-facing parameter names per template, in slot order.
fn nice_params(n: usize) -> Vec<String> {
    ["alpha", "beta", "gamma", "delta"][..n]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

pub fn all() -> Vec<ClassicalHamiltonian> {
    TEMPLATES
        .iter()
        .map(|(name, params, _)| {
            let nice = nice_params(params.len());
            let mut args: Vec<Expr> = nice.iter().map(|p| Expr::sym(p)).collect();
            args.push(Expr::sym("t"));
            args.push(Expr::sym("q"));
            args.push(Expr::sym("p"));
            ClassicalHamiltonian {
                name: name.to_string(),
                params: nice,
                expr: expand(name, &args).expect("classical template expands"),
            }
        })
        .collect()
}

/// Expand a template call: `args` are the parameter expressions followed
/// by the time, q and p expressions.
pub fn expand(name: &str, args: &[Expr]) -> Option<Expr> {
    let (_, params, src) = TEMPLATES.iter().find(|(n, _, _)| *n == name)?;
    if args.len() != params.len() + 3 {
        return None;
    }
    let tpl = parse_expr(src).ok()?;
    let mut s = SubstMap::new();
    for (i, p) in params.iter().enumerate() {
        s.insert(p, args[i].clone());
    }
    s.insert("__t", args[params.len()].clone());
    s.insert("__q", args[params.len() + 1].clone());
    s.insert("__p", args[params.len() + 2].clone());
    Some(tpl.substitute_unchecked(&s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Assignment;
    use crate::K;

    #[test]
    fn d8_template_expansion() {
        // t*H_III(D8)(t; q, p) = p^2 q^2 + qp - q - t/q
        let e = expand(
            "III_D8",
            &[Expr::sym("t"), Expr::sym("q1"), Expr::sym("p1")],
        )
        .unwrap();
        let mut a: Assignment<K> = Assignment::new();
        a.insert("t".into(), K::from_int(6));
        a.insert("q1".into(), K::from_int(2));
        a.insert("p1".into(), K::from_int(3));
        // (36 + 6 - 2 - 3)/6 = 37/6
        assert_eq!(e.evaluate(&a).unwrap(), K::ratio(37, 6));
    }
}
