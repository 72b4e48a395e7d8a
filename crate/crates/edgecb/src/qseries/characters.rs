//! Exact character expansions for the neutral edge sectors.
//!
//! The Z3 parafermion characters in the vacuum orbit are the double q-series
//!
//! `ch_l(q) = q^(-1/30) * sum_{n1,n2 >= 0} q^((2/3)(n1^2 + n1*n2 + n2^2)) / ((q)_n1 (q)_n2)`
//!
//! with the sum restricted to `n1 + 2*n2 = l mod 3`. The `q^(-1/30)` prefactor
//! is the `-c/24` shift of the trace at central charge `c = 4/5`. The quadratic
//! form is the symmetric Eisenstein norm form `n1^2 + n1*n2 + n2^2`; that this
//! reading reproduces the parafermion weights (leading exponents `2/3` above
//! the prefactor for `l = 1, 2`) and non-negative integer coefficients is
//! checked by [`crate::edge::FqhState::validate`] and the test suite rather
//! than assumed.

use std::collections::BTreeMap;

use num_rational::Rational64;
use num_traits::Zero;

use super::{QExpansion, SeriesError};

/// `-c/24` prefactor exponent of the Z3 parafermion trace, `c = 4/5`.
pub fn z3_prefactor_exponent() -> Rational64 {
    Rational64::new(-1, 30)
}

/// In-place expansion of `1/(q)_n` to order `max_level`: applying the
/// recurrence `v[k] += v[k-j]` for `j = 1..=n` multiplies by the geometric
/// series of `q^j`, so starting from `[1, 0, ...]` the vector ends up holding
/// the coefficients of `prod_{j=1..n} 1/(1-q^j)`.
fn divide_by_pochhammer(coeffs: &mut [i64], n: u32) {
    let len = coeffs.len();
    for j in 1..=(n as usize) {
        if j >= len {
            break;
        }
        for k in j..len {
            coeffs[k] += coeffs[k - j];
        }
    }
}

/// Quadratic exponent `(2/3)(n1^2 + n1*n2 + n2^2)` of the lowest state in the
/// `(n1, n2)` summand.
fn pair_base_exponent(n1: i64, n2: i64) -> Rational64 {
    Rational64::new(2 * (n1 * n1 + n1 * n2 + n2 * n2), 3)
}

/// Z3 parafermion character of the vacuum-orbit sector `l in {0, 1, 2}`,
/// exact and complete for all exponents up to `leading + level_max`.
pub fn z3_parafermion(l: u8, level_max: Rational64) -> Result<QExpansion, SeriesError> {
    if l > 2 {
        return Err(SeriesError::UnknownSector(format!("psi{l}")));
    }
    z3_double_sum(Some(l), level_max)
}

/// Unrestricted double sum (all residue classes together); equals
/// `ch_0 + ch_1 + ch_2` coefficient-by-coefficient and serves as the second
/// route for the sector-sum identity.
pub fn z3_unrestricted(level_max: Rational64) -> QExpansion {
    z3_double_sum(None, level_max).expect("unrestricted sum has no sector label")
}

fn z3_double_sum(class: Option<u8>, level_max: Rational64) -> Result<QExpansion, SeriesError> {
    assert!(level_max >= Rational64::zero(), "level_max must be >= 0");
    // Leading base exponent of the residue class: 0 for l = 0 (term (0,0)),
    // 2/3 for l = 1 ((1,0)) and l = 2 ((0,1)); 0 for the unrestricted sum.
    let leading_base = match class {
        Some(0) | None => Rational64::zero(),
        Some(_) => Rational64::new(2, 3),
    };
    let bound = leading_base + level_max;
    let mut terms: BTreeMap<Rational64, Rational64> = BTreeMap::new();
    // (2/3)n^2 grows fast; n_max generously covers every pair under the bound.
    let n_max = {
        let b = (*bound.numer() as f64) / (*bound.denom() as f64);
        (1.5 * b).sqrt().ceil() as i64 + 1
    };
    for n1 in 0..=n_max {
        for n2 in 0..=n_max {
            if let Some(l) = class {
                if (n1 + 2 * n2).rem_euclid(3) != l as i64 {
                    continue;
                }
            }
            let base = pair_base_exponent(n1, n2);
            if base > bound {
                continue;
            }
            let depth = (bound - base).floor().to_integer() as usize;
            let mut coeffs = vec![0i64; depth + 1];
            coeffs[0] = 1;
            divide_by_pochhammer(&mut coeffs, n1 as u32);
            divide_by_pochhammer(&mut coeffs, n2 as u32);
            for (k, c) in coeffs.into_iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let exp = base + Rational64::from_integer(k as i64);
                *terms.entry(exp).or_insert_with(Rational64::zero) += Rational64::from_integer(c);
            }
        }
    }
    // Anchor the grid at the class leading exponent even if truncation left
    // nothing there (cannot happen for level_max >= 0, but keeps from_terms
    // total).
    terms.entry(leading_base).or_insert_with(Rational64::zero);
    let prefactor = z3_prefactor_exponent();
    let shifted: BTreeMap<_, _> = terms.into_iter().map(|(e, c)| (e + prefactor, c)).collect();
    Ok(QExpansion::from_terms(shifted, level_max))
}

/// Character of a trivial one-dimensional neutral sector: the constant 1 at
/// exponent 0 (central-charge offset absorbed by the charged evaluator).
pub fn trivial(level_max: Rational64) -> QExpansion {
    QExpansion::constant_one(Rational64::zero(), level_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn vacuum_sector_low_levels() {
        let ch = z3_parafermion(0, r(6, 1)).unwrap();
        assert_eq!(ch.leading_exponent(), r(-1, 30));
        let levels: Vec<i64> = (0..=6)
            .map(|k| ch.coefficient_at_level(k).unwrap().to_integer())
            .collect();
        // Levels 0..3 freeze the vacuum module content of a chiral algebra
        // with one spin-2 and one spin-3 generator: 1, 0, T, {L-3, W-3}.
        assert_eq!(levels, vec![1, 0, 1, 2, 3, 4, 7]);
    }

    #[test]
    fn sector_one_leading_exponent() {
        let ch = z3_parafermion(1, r(5, 1)).unwrap();
        assert_eq!(ch.leading_exponent(), r(-1, 30) + r(2, 3));
    }

    #[test]
    fn charge_conjugate_sectors_match() {
        let a = z3_parafermion(1, r(12, 1)).unwrap();
        let b = z3_parafermion(2, r(12, 1)).unwrap();
        assert_eq!(a.leading_exponent(), b.leading_exponent());
        assert_eq!(a.coefficients(), b.coefficients());
    }

    #[test]
    fn sector_sum_equals_unrestricted() {
        let level = r(12, 1);
        let total = z3_parafermion(0, level)
            .unwrap()
            .add(&z3_parafermion(1, level).unwrap())
            .add(&z3_parafermion(2, level).unwrap());
        let unrestricted = z3_unrestricted(level);
        assert!(total.eq_on_common_range(&unrestricted));
    }

    #[test]
    fn coefficients_are_counting_numbers() {
        for l in 0..3 {
            let ch = z3_parafermion(l, r(12, 1)).unwrap();
            assert!(ch.is_character_like(), "sector {l} has a bad coefficient");
        }
    }

    #[test]
    fn unknown_sector_rejected() {
        assert!(matches!(
            z3_parafermion(3, r(2, 1)),
            Err(SeriesError::UnknownSector(_))
        ));
    }

    #[test]
    fn trivial_character_is_one() {
        let ch = trivial(r(10, 1));
        assert_eq!(ch.leading_exponent(), r(0, 1));
        assert_eq!(ch.coefficient_at_level(0).unwrap(), r(1, 1));
        assert_eq!(ch.coefficient_at_level(5).unwrap(), r(0, 1));
    }
}
