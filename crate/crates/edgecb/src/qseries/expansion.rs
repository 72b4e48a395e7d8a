//! Exact truncated q-expansions with rational exponents.
//!
//! A [`QExpansion`] stores a series `sum_k c_k q^(e0 + k*step)` with exact
//! rational leading exponent `e0`, exact rational `step` (the common
//! denominator of all exponent gaps), and exact rational coefficients. The
//! truncation bound is recorded so two expansions are only ever compared on
//! their common valid range.

use std::collections::BTreeMap;

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};

fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Greatest common divisor of two non-negative rationals:
/// `gcd(a/b, c/d) = gcd(a*d, c*b) / (b*d)`.
fn gcd_rational(a: Rational64, b: Rational64) -> Rational64 {
    if a.is_zero() {
        return b;
    }
    if b.is_zero() {
        return a;
    }
    let num = gcd_i64(a.numer() * b.denom(), b.numer() * a.denom());
    Rational64::new(num, a.denom() * b.denom())
}

/// Truncated q-series with exact rational exponent grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QExpansion {
    leading_exponent: Rational64,
    step: Rational64,
    coefficients: Vec<Rational64>,
    /// Exponents up to `leading_exponent + level_max` are complete.
    level_max: Rational64,
}

impl QExpansion {
    /// Build an expansion from sparse `(exponent, coefficient)` terms.
    ///
    /// `level_max` is the truncation bound relative to the smallest exponent:
    /// terms above `min_exponent + level_max` are dropped, everything at or
    /// below is kept and the gaps are put on the finest common grid.
    ///
    /// Panics if `terms` is empty.
    pub fn from_terms(terms: BTreeMap<Rational64, Rational64>, level_max: Rational64) -> Self {
        assert!(!terms.is_empty(), "QExpansion requires at least one term");
        let leading = *terms.keys().next().unwrap();
        let bound = leading + level_max;
        let kept: BTreeMap<_, _> = terms
            .into_iter()
            .filter(|(e, c)| *e <= bound && !c.is_zero())
            .collect();
        let mut step = Rational64::zero();
        for exp in kept.keys() {
            step = gcd_rational(step, exp - leading);
        }
        if step.is_zero() {
            step = Rational64::from_integer(1);
        }
        let n = ((bound - leading) / step).floor().to_integer() as usize;
        let mut coefficients = vec![Rational64::zero(); n + 1];
        for (exp, c) in kept {
            let k = ((exp - leading) / step).to_integer() as usize;
            coefficients[k] = c;
        }
        QExpansion {
            leading_exponent: leading,
            step,
            coefficients,
            level_max,
        }
    }

    /// Expansion consisting of the single term `1 * q^exponent`, complete up
    /// to `exponent + level_max`.
    pub fn constant_one(exponent: Rational64, level_max: Rational64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(exponent, Rational64::from_integer(1));
        QExpansion::from_terms(terms, level_max)
    }

    /// Power of `q` carried by the first term.
    pub fn leading_exponent(&self) -> Rational64 {
        self.leading_exponent
    }

    /// Common grid spacing of the exponents.
    pub fn step(&self) -> Rational64 {
        self.step
    }

    /// Truncation bound relative to the leading exponent.
    pub fn level_max(&self) -> Rational64 {
        self.level_max
    }

    /// Coefficients along the grid `leading_exponent + k*step`.
    pub fn coefficients(&self) -> &[Rational64] {
        &self.coefficients
    }

    /// Largest absolute exponent up to which the expansion is complete.
    pub fn complete_up_to(&self) -> Rational64 {
        self.leading_exponent + self.level_max
    }

    /// Iterate over `(exponent, coefficient)` pairs, zeros skipped.
    pub fn terms(&self) -> impl Iterator<Item = (Rational64, Rational64)> + '_ {
        self.coefficients
            .iter()
            .enumerate()
            .filter_map(move |(k, c)| {
                if c.is_zero() {
                    None
                } else {
                    Some((
                        self.leading_exponent + self.step * Rational64::from_integer(k as i64),
                        *c,
                    ))
                }
            })
    }

    /// Exact coefficient of `q^exponent` (zero off-grid), or `None` past the
    /// truncation bound where the value is unknown.
    pub fn coefficient_at(&self, exponent: Rational64) -> Option<Rational64> {
        if exponent > self.complete_up_to() {
            return None;
        }
        let offset = exponent - self.leading_exponent;
        if offset.is_negative() {
            return Some(Rational64::zero());
        }
        let ratio = offset / self.step;
        if !ratio.is_integer() {
            return Some(Rational64::zero());
        }
        let k = ratio.to_integer() as usize;
        Some(
            self.coefficients
                .get(k)
                .copied()
                .unwrap_or_else(Rational64::zero),
        )
    }

    /// Coefficient at integer level `k` above the leading exponent, counting
    /// on an integer grid regardless of the stored `step`. `None` past the
    /// truncation bound.
    pub fn coefficient_at_level(&self, k: i64) -> Option<Rational64> {
        self.coefficient_at(self.leading_exponent + Rational64::from_integer(k))
    }

    /// Sum of two expansions. The result's grid is the common refinement and
    /// its valid range is the intersection of the operands' ranges.
    pub fn add(&self, other: &QExpansion) -> QExpansion {
        let bound = self.complete_up_to().min(other.complete_up_to());
        let mut terms: BTreeMap<Rational64, Rational64> = BTreeMap::new();
        for (e, c) in self.terms().chain(other.terms()) {
            if e <= bound {
                *terms.entry(e).or_insert_with(Rational64::zero) += c;
            }
        }
        let leading = self.leading_exponent.min(other.leading_exponent);
        terms.entry(leading).or_insert_with(Rational64::zero);
        let level_max = bound - leading;
        // from_terms drops zero entries; keep the leading anchor by rebuilding
        // around the true minimum kept exponent.
        let mut exp = QExpansion::from_terms(terms, level_max);
        exp.level_max = bound - exp.leading_exponent;
        exp
    }

    /// True when every coefficient is a non-negative integer, as character
    /// expansions must be once the leading q-power is factored out.
    pub fn is_character_like(&self) -> bool {
        self.coefficients
            .iter()
            .all(|c| c.is_integer() && !c.is_negative())
    }

    /// Compare against `other` on the exponent range both expansions cover.
    pub fn eq_on_common_range(&self, other: &QExpansion) -> bool {
        let bound = self.complete_up_to().min(other.complete_up_to());
        let mut exps: Vec<Rational64> = self
            .terms()
            .chain(other.terms())
            .map(|(e, _)| e)
            .filter(|e| *e <= bound)
            .collect();
        exps.sort();
        exps.dedup();
        exps.into_iter().all(|e| {
            self.coefficient_at(e)
                .zip(other.coefficient_at(e))
                .is_some_and(|(a, b)| a == b)
        })
    }

    /// Floating view of the series as `(exponent, coefficient)` pairs,
    /// for consumption by the thermodynamics layer. Terms with exponent
    /// above `cutoff` are dropped.
    pub fn float_terms(&self, cutoff: f64) -> Vec<(f64, f64)> {
        self.terms()
            .filter_map(|(e, c)| {
                let ef = e.to_f64().expect("exponent fits in f64");
                if ef <= cutoff {
                    Some((ef, c.to_f64().expect("coefficient fits in f64")))
                } else {
                    None
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn grid_from_sparse_terms() {
        let mut t = BTreeMap::new();
        t.insert(r(-1, 30), r(1, 1));
        t.insert(r(-1, 30) + r(2, 1), r(3, 1));
        t.insert(r(-1, 30) + r(10, 3), r(5, 1));
        let e = QExpansion::from_terms(t, r(4, 1));
        assert_eq!(e.leading_exponent(), r(-1, 30));
        // gcd of the gaps 2 and 10/3.
        assert_eq!(e.step(), r(2, 3));
        assert_eq!(e.coefficient_at(r(-1, 30) + r(2, 1)).unwrap(), r(3, 1));
        assert_eq!(e.coefficient_at(r(-1, 30) + r(1, 3)).unwrap(), r(0, 1));
        // Past the bound the value is unknown, not zero.
        assert_eq!(e.coefficient_at(r(-1, 30) + r(5, 1)), None);
    }

    #[test]
    fn add_refines_grid_and_clips_range() {
        let a = QExpansion::constant_one(r(0, 1), r(6, 1));
        let mut t = BTreeMap::new();
        t.insert(r(2, 3), r(1, 1));
        t.insert(r(5, 3), r(2, 1));
        let b = QExpansion::from_terms(t, r(3, 1));
        let s = a.add(&b);
        assert_eq!(s.leading_exponent(), r(0, 1));
        assert_eq!(s.step(), r(1, 3));
        assert_eq!(s.complete_up_to(), r(2, 3) + r(3, 1));
        assert_eq!(s.coefficient_at(r(2, 3)).unwrap(), r(1, 1));
        assert_eq!(s.coefficient_at(r(0, 1)).unwrap(), r(1, 1));
    }

    #[test]
    fn character_like_detects_negatives_and_fractions() {
        let mut t = BTreeMap::new();
        t.insert(r(0, 1), r(1, 1));
        t.insert(r(1, 1), r(-2, 1));
        let e = QExpansion::from_terms(t, r(2, 1));
        assert!(!e.is_character_like());
        let mut t = BTreeMap::new();
        t.insert(r(0, 1), r(1, 2));
        let e = QExpansion::from_terms(t, r(2, 1));
        assert!(!e.is_character_like());
    }
}
