//! q-series building blocks: q-Pochhammer symbols, the Dedekind eta function
//! in log domain, exact truncated character expansions, and a stable
//! log-sum-exp accumulator with charge moments.
//!
//! Exponent arithmetic for expansions is exact rational; floating-point
//! evaluation happens only in the thermodynamics layer. Throughout,
//! `q = exp(-2*pi^2/t)` with `t` the reduced temperature, so `0 < q < 1` and
//! every series here converges fast for the temperatures of interest.

mod accumulator;
pub mod characters;
mod expansion;

pub use accumulator::{accumulate_log_terms, LogSeriesAccumulator};
pub use expansion::QExpansion;

use thiserror::Error;

/// Errors from q-series evaluation.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SeriesError {
    /// `q` outside the convergence domain `[0, 1)`.
    #[error("q = {0} outside the domain [0, 1)")]
    DomainQ(f64),
    /// Reduced temperature above the configured guard: the eta product and
    /// character truncations are only budgeted for `t <= t_max`.
    #[error("reduced temperature t = {t} exceeds the guard t_max = {t_max}")]
    TemperatureGuard { t: f64, t_max: f64 },
    /// Reduced temperature must be positive.
    #[error("reduced temperature t = {0} is not positive")]
    NonPositiveTemperature(f64),
    /// A stream of terms was empty where at least one term is required.
    #[error("empty term stream")]
    EmptyStream,
    /// Sector label not supported by the character family.
    #[error("unknown sector label {0}")]
    UnknownSector(String),
}

/// Default guard on the reduced temperature. At `t = 50` the nome is
/// `q = exp(-2*pi^2/50) ~ 0.67` and the eta product still needs only ~100
/// factors for full double precision; beyond that the truncation budget grows
/// quickly while the physics of interest sits at `t <= 1`.
pub const T_MAX_DEFAULT: f64 = 50.0;

/// Finite q-Pochhammer symbol `(q)_n = prod_{j=1..n} (1 - q^j)`.
///
/// Returns 1 for `n = 0` (empty product). Requires `0 <= q < 1`.
pub fn q_pochhammer(n: u32, q: f64) -> Result<f64, SeriesError> {
    if !(0.0..1.0).contains(&q) {
        return Err(SeriesError::DomainQ(q));
    }
    let mut prod = 1.0;
    let mut qj = 1.0;
    for _ in 0..n {
        qj *= q;
        prod *= 1.0 - qj;
    }
    Ok(prod)
}

/// Natural log of the Dedekind eta function at the purely thermal nome
/// `q = exp(-2*pi^2/t)`:
///
/// `ln eta = ln(q)/24 + sum_{n>=1} ln(1 - q^n)`,
///
/// truncated once `|ln(1 - q^n)| < abs_tol`. For `t -> 0` the product tends
/// to 1 and the value is dominated by `ln(q)/24 = -pi^2/(12 t)`.
pub fn log_dedekind_eta(t: f64, t_max: f64, abs_tol: f64) -> Result<f64, SeriesError> {
    if t <= 0.0 {
        return Err(SeriesError::NonPositiveTemperature(t));
    }
    if t > t_max {
        return Err(SeriesError::TemperatureGuard { t, t_max });
    }
    let log_q = -2.0 * std::f64::consts::PI.powi(2) / t;
    let q = log_q.exp();
    let mut sum = log_q / 24.0;
    let mut qn = 1.0;
    loop {
        qn *= q;
        let term = (1.0 - qn).ln();
        if term.abs() < abs_tol {
            break;
        }
        sum += term;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn pochhammer_empty_product() {
        assert_eq!(q_pochhammer(0, 0.37).unwrap(), 1.0);
    }

    #[test]
    fn pochhammer_small_orders() {
        assert_eq!(q_pochhammer(1, 0.5).unwrap(), 0.5);
        assert_eq!(q_pochhammer(2, 0.5).unwrap(), 0.375);
    }

    #[test]
    fn pochhammer_domain_errors() {
        assert!(q_pochhammer(3, -0.1).is_err());
        assert!(q_pochhammer(3, 1.0).is_err());
        assert!(q_pochhammer(3, 1.7).is_err());
    }

    #[test]
    fn eta_matches_direct_product() {
        // Direct-product oracle: evaluate ln(q)/24 + ln prod (1-q^n) with a
        // fixed large cutoff, independently of the truncation logic.
        let t = 0.5;
        let q = (-2.0 * PI * PI / t).exp();
        let mut oracle = q.ln() / 24.0;
        let mut qn = 1.0;
        for _ in 0..200 {
            qn *= q;
            oracle += (1.0 - qn).ln();
        }
        let got = log_dedekind_eta(t, T_MAX_DEFAULT, 1e-18).unwrap();
        assert!((got - oracle).abs() <= 1e-15 * oracle.abs());
        // At t = 0.5 the nome is ~7e-18, so the first factor alone saturates
        // double precision.
        let two_terms = q.ln() / 24.0 + (1.0 - q).ln();
        assert!((got - two_terms).abs() <= 1e-15 * two_terms.abs());
    }

    #[test]
    fn eta_truncation_converged() {
        let t = 2.0;
        let coarse = log_dedekind_eta(t, T_MAX_DEFAULT, 1e-14).unwrap();
        let fine = log_dedekind_eta(t, T_MAX_DEFAULT, 0.5e-14).unwrap();
        assert!((coarse - fine).abs() < 1e-14);
    }

    #[test]
    fn eta_low_t_limit() {
        let t = 0.05;
        let log_q = -2.0 * PI * PI / t;
        let got = log_dedekind_eta(t, T_MAX_DEFAULT, 1e-18).unwrap();
        assert!((got - log_q / 24.0).abs() < 1e-15 * (log_q / 24.0).abs());
    }

    #[test]
    fn eta_guard() {
        assert!(matches!(
            log_dedekind_eta(51.0, T_MAX_DEFAULT, 1e-18),
            Err(SeriesError::TemperatureGuard { .. })
        ));
        assert!(log_dedekind_eta(-1.0, T_MAX_DEFAULT, 1e-18).is_err());
    }
}
