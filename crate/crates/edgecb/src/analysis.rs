//! Flux sweeps, peak detection and period classification.
//!
//! A sweep evaluates the island conductance over a uniform flux grid (points
//! are independent, so the work is distributed with rayon). Peaks are local
//! maxima above a baseline-relative threshold, refined by a three-point
//! quadratic fit; widths are full width at half maximum between linearly
//! interpolated half-height crossings. The spacing pattern is classified into
//! within-bunch and between-bunch scales with a deterministic two-means
//! split.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::edge::{FqhState, Sector};
use crate::thermo::{SectorEvaluator, ThermoError, ThermoParams};

const PI: f64 = std::f64::consts::PI;

#[derive(Debug, Clone, Error)]
pub enum AnalysisError {
    #[error("flux sweep needs at least 2 points and phi_max > phi_min")]
    BadSweepRange,
    #[error("peak finding needs a trace of at least 3 points")]
    TraceTooShort,
    #[error("period classification needs at least {needed} peaks, got {got}")]
    TooFewPeaks { needed: usize, got: usize },
    #[error("sweep failed at phi = {phi}: {source}")]
    PointFailure {
        phi: f64,
        #[source]
        source: ThermoError,
    },
    #[error(transparent)]
    Thermo(#[from] ThermoError),
}

/// Conductance over a uniform flux grid.
#[derive(Debug, Clone)]
pub struct ConductanceTrace {
    pub phi: Vec<f64>,
    /// Conductance in units of `e^2/h`, finite at every grid point.
    pub g: Vec<f64>,
    pub state_id: String,
    /// Parameters of the sweep; the `phi` field holds the grid start.
    pub params: ThermoParams,
}

impl ConductanceTrace {
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn grid_step(&self) -> f64 {
        if self.phi.len() < 2 {
            return 0.0;
        }
        (self.phi[self.phi.len() - 1] - self.phi[0]) / (self.phi.len() - 1) as f64
    }
}

/// One detected conductance peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    /// Refined position in flux quanta.
    pub position: f64,
    /// Refined height in `e^2/h`.
    pub height: f64,
    /// Full width at half maximum (height measured from the trace baseline).
    pub fwhm: f64,
}

/// Bunching pattern of the peak spacings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    /// Peaks per bunch (1 for a single-period pattern).
    pub bunch_size: usize,
    pub within_spacing: f64,
    pub between_spacing: f64,
    /// Measured flux period `(bunch_size - 1) * within + between`.
    pub period: f64,
    /// Expected period `d_h` of the state.
    pub period_expected: f64,
}

/// Detected peaks with their spacings and optional classification.
#[derive(Debug, Clone, Serialize)]
pub struct PeakReport {
    pub peaks: Vec<Peak>,
    /// Consecutive position differences, in flux quanta.
    pub spacings: Vec<f64>,
    pub classification: Option<Classification>,
}

/// Sweep the island conductance over `n_points` flux values spanning
/// `[phi_min, phi_max]`. Points are evaluated in parallel; any per-point
/// failure aborts the sweep with the offending flux value.
pub fn sweep_flux(
    state: &FqhState,
    sector: &Sector,
    base_params: &ThermoParams,
    phi_min: f64,
    phi_max: f64,
    n_points: usize,
) -> Result<ConductanceTrace, AnalysisError> {
    let range_ok = phi_min.is_finite() && phi_max.is_finite() && phi_max > phi_min;
    if n_points < 2 || !range_ok {
        return Err(AnalysisError::BadSweepRange);
    }
    let evaluator = SectorEvaluator::new(state, sector, base_params)?;
    let unit = base_params.t / (4.0 * PI * PI);
    let step = (phi_max - phi_min) / (n_points - 1) as f64;
    let phi: Vec<f64> = (0..n_points).map(|i| phi_min + i as f64 * step).collect();
    let g: Vec<f64> = phi
        .par_iter()
        .map(|&p| {
            let eval = evaluator
                .eval(p)
                .map_err(|source| AnalysisError::PointFailure { phi: p, source })?;
            let g = unit * eval.d2log_z_dphi2;
            if !g.is_finite() {
                return Err(AnalysisError::PointFailure {
                    phi: p,
                    source: ThermoError::NonFinite { phi: p },
                });
            }
            Ok(g)
        })
        .collect::<Result<_, _>>()?;
    let mut params = *base_params;
    params.phi = phi_min;
    Ok(ConductanceTrace {
        phi,
        g,
        state_id: state.id(),
        params,
    })
}

/// Find conductance peaks in a trace.
///
/// A peak is a strict local maximum above `baseline + 10%` of the global
/// max-minus-baseline, with the baseline at the trace minimum so a constant
/// offset cannot suppress detection. Positions and heights are refined by a
/// quadratic through the three points around the maximum (the refinement
/// never moves a peak by more than half a grid step); the FWHM interpolates
/// the half-height crossings linearly. Peaks whose half-height crossings run
/// off the grid are discarded as truncated. Finding no peaks is an empty
/// report, not an error.
pub fn find_peaks(trace: &ConductanceTrace) -> Result<PeakReport, AnalysisError> {
    if trace.len() < 3 {
        return Err(AnalysisError::TraceTooShort);
    }
    let g = &trace.g;
    let phi = &trace.phi;
    let baseline = g.iter().cloned().fold(f64::INFINITY, f64::min);
    let top = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let threshold = baseline + 0.1 * (top - baseline);

    let mut peaks = Vec::new();
    for i in 1..g.len() - 1 {
        if !(g[i] > g[i - 1] && g[i] > g[i + 1] && g[i] > threshold) {
            continue;
        }
        let (ym, y0, yp) = (g[i - 1], g[i], g[i + 1]);
        let denom = ym - 2.0 * y0 + yp;
        let delta = if denom == 0.0 {
            0.0
        } else {
            0.5 * (ym - yp) / denom
        };
        let h = trace.grid_step();
        let position = phi[i] + delta * h;
        let height = y0 - 0.25 * (ym - yp) * delta;
        let half = baseline + 0.5 * (height - baseline);

        let left = crossing(phi, g, i, half, -1);
        let right = crossing(phi, g, i, half, 1);
        let (Some(l), Some(r)) = (left, right) else {
            continue; // truncated at a grid edge
        };
        peaks.push(Peak {
            position,
            height,
            fwhm: r - l,
        });
    }
    let spacings = peaks
        .windows(2)
        .map(|w| w[1].position - w[0].position)
        .collect();
    Ok(PeakReport {
        peaks,
        spacings,
        classification: None,
    })
}

/// Walk from index `i` in `direction` until the trace crosses `level`, and
/// linearly interpolate the crossing position. `None` if the grid ends first.
fn crossing(phi: &[f64], g: &[f64], i: usize, level: f64, direction: i64) -> Option<f64> {
    let mut j = i as i64;
    loop {
        let next = j + direction;
        if next < 0 || next as usize >= g.len() {
            return None;
        }
        let (a, b) = (j as usize, next as usize);
        if (g[a] >= level) != (g[b] >= level) {
            let frac = (g[a] - level) / (g[a] - g[b]);
            return Some(phi[a] + frac * (phi[b] - phi[a]));
        }
        j = next;
    }
}

/// Classify the spacing pattern of a peak report against a state's expected
/// structure. Needs at least `n_h + 1` peaks. Spacings are split into
/// "within" (small) and "between" (large) groups by a deterministic 1-d
/// two-means pass seeded with the extreme spacings, ties toward "within";
/// when all spacings agree the pattern is a single-period one and both
/// scales coincide.
pub fn classify_periods(
    report: &PeakReport,
    state: &FqhState,
) -> Result<Classification, AnalysisError> {
    let needed = state.filling.n_h as usize + 1;
    if report.peaks.len() < needed {
        return Err(AnalysisError::TooFewPeaks {
            needed,
            got: report.peaks.len(),
        });
    }
    let spacings = &report.spacings;
    let lo = spacings.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = spacings.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let d_h = state.filling.d_h as f64;
    if hi - lo <= 1e-3 * hi {
        // Single spacing scale.
        let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
        return Ok(Classification {
            bunch_size: 1,
            within_spacing: mean,
            between_spacing: mean,
            period: mean,
            period_expected: d_h,
        });
    }

    let (mut c_within, mut c_between) = (lo, hi);
    let mut labels = vec![false; spacings.len()]; // true = between
    for _ in 0..64 {
        let mut changed = false;
        for (k, &s) in spacings.iter().enumerate() {
            // Ties toward "within".
            let is_between = (s - c_between).abs() < (s - c_within).abs();
            if labels[k] != is_between {
                labels[k] = is_between;
                changed = true;
            }
        }
        let (mut sw, mut nw, mut sb, mut nb) = (0.0, 0usize, 0.0, 0usize);
        for (k, &s) in spacings.iter().enumerate() {
            if labels[k] {
                sb += s;
                nb += 1;
            } else {
                sw += s;
                nw += 1;
            }
        }
        if nw > 0 {
            c_within = sw / nw as f64;
        }
        if nb > 0 {
            c_between = sb / nb as f64;
        }
        if !changed {
            break;
        }
    }

    // Bunch size = longest run of within-spacings + 1 (runs at the window
    // edges may be truncated).
    let mut longest_run = 0usize;
    let mut run = 0usize;
    for &is_between in &labels {
        if is_between {
            run = 0;
        } else {
            run += 1;
            longest_run = longest_run.max(run);
        }
    }
    let bunch_size = longest_run + 1;
    let period = (bunch_size - 1) as f64 * c_within + c_between;
    Ok(Classification {
        bunch_size,
        within_spacing: c_within,
        between_spacing: c_between,
        period,
        period_expected: d_h,
    })
}

/// Sweep and characterize the peaks at each temperature in `t_values` over
/// the flux window `(phi_min, phi_max, n_points)`.
pub fn temperature_scan(
    state: &FqhState,
    sector: &Sector,
    base_params: &ThermoParams,
    t_values: &[f64],
    phi_window: (f64, f64, usize),
) -> Result<Vec<(f64, PeakReport)>, AnalysisError> {
    let (phi_min, phi_max, n_points) = phi_window;
    let mut out = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let mut params = *base_params;
        params.t = t;
        let trace = sweep_flux(state, sector, &params, phi_min, phi_max, n_points)?;
        let mut report = find_peaks(&trace)?;
        report.classification = classify_periods(&report, state).ok();
        out.push((t, report));
    }
    Ok(out)
}
