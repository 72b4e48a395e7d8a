//! Streaming log-sum-exp accumulation with charge moments.
//!
//! Thermal sums over edge states span hundreds of orders of magnitude in the
//! Boltzmann weights, so everything is accumulated relative to the running
//! maximum log-weight. Alongside the scaled weight sum `S0` the accumulator
//! tracks the first and second charge moments `S1 = sum w*Q` and
//! `S2 = sum w*Q^2`, from which mean charge and charge variance follow.

use super::SeriesError;

/// Log-domain weight sum with charge-moment accumulators.
///
/// Single-writer; parallel reductions merge accumulators with [`merge`],
/// which combines two accumulators exactly as if their term streams had been
/// concatenated.
///
/// [`merge`]: LogSeriesAccumulator::merge
#[derive(Debug, Clone, Copy, Default)]
pub struct LogSeriesAccumulator {
    /// Running maximum log-weight; all sums are scaled by `exp(-max_log_w)`.
    max_log_w: f64,
    s0: f64,
    s1: f64,
    s2: f64,
    n_terms: usize,
}

impl LogSeriesAccumulator {
    pub fn new() -> Self {
        LogSeriesAccumulator {
            max_log_w: f64::NEG_INFINITY,
            s0: 0.0,
            s1: 0.0,
            s2: 0.0,
            n_terms: 0,
        }
    }

    /// Add one term with the given log-weight and charge eigenvalue.
    pub fn push(&mut self, log_w: f64, charge: f64) {
        debug_assert!(log_w.is_finite() || log_w == f64::NEG_INFINITY);
        if log_w == f64::NEG_INFINITY {
            // Weight underflows to exactly zero; count it but leave the sums.
            self.n_terms += 1;
            return;
        }
        if log_w > self.max_log_w {
            let scale = if self.max_log_w == f64::NEG_INFINITY {
                0.0
            } else {
                (self.max_log_w - log_w).exp()
            };
            self.s0 *= scale;
            self.s1 *= scale;
            self.s2 *= scale;
            self.max_log_w = log_w;
        }
        let w = (log_w - self.max_log_w).exp();
        self.s0 += w;
        self.s1 += w * charge;
        self.s2 += w * charge * charge;
        self.n_terms += 1;
    }

    /// Combine with another accumulator as if the two streams were one.
    pub fn merge(&mut self, other: &LogSeriesAccumulator) {
        if other.n_terms == 0 {
            return;
        }
        if other.max_log_w == f64::NEG_INFINITY {
            self.n_terms += other.n_terms;
            return;
        }
        if other.max_log_w > self.max_log_w {
            let scale = if self.max_log_w == f64::NEG_INFINITY {
                0.0
            } else {
                (self.max_log_w - other.max_log_w).exp()
            };
            self.s0 *= scale;
            self.s1 *= scale;
            self.s2 *= scale;
            self.max_log_w = other.max_log_w;
        }
        let scale = (other.max_log_w - self.max_log_w).exp();
        self.s0 += other.s0 * scale;
        self.s1 += other.s1 * scale;
        self.s2 += other.s2 * scale;
        self.n_terms += other.n_terms;
    }

    pub fn is_empty(&self) -> bool {
        self.n_terms == 0
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    /// `ln(sum_i w_i)`. Requires at least one term.
    pub fn log_sum(&self) -> f64 {
        assert!(self.n_terms > 0, "log_sum of an empty accumulator");
        self.max_log_w + self.s0.ln()
    }

    /// Mean charge `S1/S0`.
    pub fn mean_charge(&self) -> f64 {
        assert!(self.n_terms > 0, "mean_charge of an empty accumulator");
        self.s1 / self.s0
    }

    /// Charge variance `S2/S0 - (S1/S0)^2`, clamped at zero against rounding.
    pub fn charge_variance(&self) -> f64 {
        assert!(self.n_terms > 0, "charge_variance of an empty accumulator");
        let mean = self.s1 / self.s0;
        (self.s2 / self.s0 - mean * mean).max(0.0)
    }
}

/// Aggregate a stream of `(log-weight, charge)` terms.
///
/// Errors on an empty stream; otherwise see [`LogSeriesAccumulator`].
pub fn accumulate_log_terms<I>(terms: I) -> Result<LogSeriesAccumulator, SeriesError>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let mut acc = LogSeriesAccumulator::new();
    for (log_w, charge) in terms {
        acc.push(log_w, charge);
    }
    if acc.is_empty() {
        return Err(SeriesError::EmptyStream);
    }
    Ok(acc)
}
