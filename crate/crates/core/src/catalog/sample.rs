//! Deterministic parameter sampling.
//!
//! Seeds drive a SplitMix64 stream, so equal seeds give identical samples
//! on every platform. Values are small rationals (numerators and
//! denominators bounded by 40); the last parameter is solved from the
//! Fuchs-Hukuhara relation, and candidates hitting any declared or
//! derived singular locus are rejected and redrawn.

use super::{CatalogError, SystemEntry};
use crate::expr::Assignment;
use crate::{K, Q};
use num_traits::Zero;

/// The 64-bit mix underlying all sampling (SplitMix64).
#[derive(Clone, Debug)]
pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// A nonzero rational with numerator in 1..=40 and denominator in 1..=5.
    pub fn small_rat(&mut self) -> Q {
        let r = self.next_u64();
        let num = 1 + (r % 40) as i64;
        let den = 1 + ((r >> 8) % 5) as i64;
        let sign = if (r >> 16) & 1 == 0 { 1 } else { -1 };
        Q::new((sign * num).into(), den.into())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleMode {
    /// Free rational times.
    Generic,
    /// Times from the entry's specialization recipe, making every
    /// Riemann-scheme entry field-rational.
    HtlSpecialized,
    /// Tilde-side sample for eps -> 0 limits (same shape as `Generic`;
    /// the eps variable is adjoined by the degeneration checker).
    EpsMode,
}

/// Values for the specialization symbols lam, mu, nu.
#[derive(Clone, Debug)]
pub struct SpecializeValues {
    pub lam: Q,
    pub mu: Q,
    pub nu: Q,
}

impl Default for SpecializeValues {
    fn default() -> Self {
        SpecializeValues {
            lam: Q::from_integer(2.into()),
            mu: Q::from_integer(3.into()),
            nu: Q::from_integer(5.into()),
        }
    }
}

impl SpecializeValues {
    pub fn with_lambda(lam: i64) -> Self {
        SpecializeValues {
            lam: Q::from_integer(lam.into()),
            mu: Q::from_integer((lam + 1).into()),
            nu: Q::from_integer((lam + 3).into()),
        }
    }
}

/// A sampled, admissible parameter point.
pub type ParameterSet = Assignment<K>;

pub fn sample_point(
    entry: &SystemEntry,
    seed: u64,
    mode: SampleMode,
    spec: &SpecializeValues,
) -> Result<ParameterSet, CatalogError> {
    let denoms = entry.all_denominators();
    let mut rng = SplitMix64(seed.wrapping_mul(0x2545f4914f6cdd1d).wrapping_add(seed));
    'attempt: for _ in 0..400 {
        let mut a: ParameterSet = Assignment::new();
        if mode == SampleMode::HtlSpecialized {
            a.insert("lam".into(), K::from_rat(spec.lam.clone()));
            a.insert("mu".into(), K::from_rat(spec.mu.clone()));
            a.insert("nu".into(), K::from_rat(spec.nu.clone()));
        }
        for tv in &entry.times {
            let recipe = entry.specialize.iter().find(|(t, _)| t == tv);
            match (mode, recipe) {
                (SampleMode::HtlSpecialized, Some((_, e))) => {
                    let v = e.evaluate(&a).map_err(CatalogError::Expr)?;
                    a.insert(tv.clone(), v);
                }
                _ => {
                    a.insert(tv.clone(), K::from_rat(rng.small_rat()));
                }
            }
        }
        // Parameters: sample all but the last, then solve the relation.
        let solve_for = if entry.params.is_empty() || is_zero_const(&entry.fuchs) {
            None
        } else {
            Some(entry.params.last().unwrap().clone())
        };
        for p in &entry.params {
            if Some(p) != solve_for.as_ref() {
                a.insert(p.clone(), K::from_rat(rng.small_rat()));
            }
        }
        if let Some(sf) = &solve_for {
            a.insert(sf.clone(), K::from_int(0));
            let f0 = entry.fuchs.evaluate(&a).map_err(CatalogError::Expr)?;
            a.insert(sf.clone(), K::from_int(1));
            let f1 = entry.fuchs.evaluate(&a).map_err(CatalogError::Expr)?;
            let slope = f1 - f0.clone();
            if slope.is_zero() {
                continue 'attempt;
            }
            a.insert(sf.clone(), -(f0 / slope));
        }
        for v in &entry.vars {
            a.insert(v.clone(), K::from_rat(rng.small_rat()));
        }
        for g in &entry.gauge {
            a.insert(g.clone(), K::from_rat(rng.small_rat()));
        }
        // Definitions may themselves divide; a singular draw is rejected.
        let mut full = a.clone();
        if entry.extend_with_defs(&mut full).is_err() {
            continue 'attempt;
        }
        for d in &denoms {
            match d.evaluate(&full) {
                Ok(v) if !v.is_zero() => {}
                _ => continue 'attempt,
            }
        }
        for c in &entry.constraints {
            match c.evaluate(&full) {
                Ok(v) if !v.is_zero() => {}
                _ => continue 'attempt,
            }
        }
        return Ok(a);
    }
    Err(CatalogError::SamplingFailed(entry.name.clone()))
}

fn is_zero_const(e: &crate::expr::Expr) -> bool {
    matches!(e, crate::expr::Expr::Const(c) if c.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::catalog;

    #[test]
    fn equal_seeds_give_identical_samples() {
        let e = catalog().get("(1)_4,(2)_2").unwrap();
        let s1 = sample_point(e, 7, SampleMode::Generic, &Default::default()).unwrap();
        let s2 = sample_point(e, 7, SampleMode::Generic, &Default::default()).unwrap();
        assert_eq!(s1.get("q1"), s2.get("q1"));
        assert_eq!(s1.get("t"), s2.get("t"));
    }

    #[test]
    fn fuchs_relation_holds_exactly() {
        let e = catalog().get("(2)_2,31,1111").unwrap();
        for seed in 0..5 {
            let s = sample_point(e, seed, SampleMode::Generic, &Default::default()).unwrap();
            let v = e.fuchs.evaluate(&s).unwrap();
            assert!(v.is_zero(), "Fuchs relation violated at seed {}", seed);
        }
    }

    #[test]
    fn specialized_sample_uses_recipe() {
        let e = catalog().get("(1)_4,(2)_2").unwrap();
        let s = sample_point(
            e,
            3,
            SampleMode::HtlSpecialized,
            &SpecializeValues::with_lambda(2),
        )
        .unwrap();
        assert_eq!(s.get("t"), Some(&K::from_int(4096)));
    }
}
