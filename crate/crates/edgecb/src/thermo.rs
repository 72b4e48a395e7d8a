//! Grand-canonical thermodynamics of the flux-threaded edge.
//!
//! Each charged/neutral pair emitted by the sector decomposition contributes
//! a product of a Luttinger-lattice sum and a neutral character. In reduced
//! units (`t = T/T0`, `mu_red = mu/(k_B T)`, flux `phi` in flux quanta) a
//! lattice point `a = n + l/m` at neutral level `e` carries
//!
//! `log w = -kappa*(m/2)*a^2 + Q*(mu_red + kappa*phi) - kappa*e + ln(mult)`
//!
//! with `kappa = 2*pi^2/t`, charge `Q = n_h*a`, so the whole partition
//! function depends on `mu_red` and `phi` only through the single combination
//! `x = mu_red + kappa*phi`. The sign of the coupling is oriented so that
//! increasing either the chemical potential or the flux draws charge onto the
//! island (mean charge rises by `n_h` per `d_h` flux quanta). Flux and
//! chemical-potential derivatives are then exactly proportional, which is the
//! identity behind the agreement of the two conductance routes below.
//!
//! The Dedekind eta prefactor carries no flux or chemical-potential
//! dependence and only shifts `log Z`; the Cappelli-Zemba counterterm
//! `ln CZ = -nu_H * x^2 / (2*kappa)` contributes the constant `-nu_H/2` to
//! the reduced conductance.

use num_rational::Rational64;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::edge::{display_charge, FqhState, Sector, StateError};
use crate::qseries::{log_dedekind_eta, LogSeriesAccumulator, SeriesError};

const PI: f64 = std::f64::consts::PI;

/// Errors from thermodynamic evaluation.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ThermoError {
    /// Reduced temperature outside `[t_min, t_max]`. Below `t_min` the
    /// spectrum is frozen and derivative information drops under floating
    /// precision; above `t_max` the truncation budgets are not honored.
    #[error("reduced temperature t = {t} outside [{t_min}, {t_max}]")]
    TemperatureOutOfRange { t: f64, t_min: f64, t_max: f64 },
    /// The lattice summation window exceeded its cap (pathological inputs).
    #[error("lattice summation window exceeded {cap} terms")]
    WindowOverflow { cap: usize },
    /// Finite-difference step too small: cancellation would dominate.
    #[error("finite-difference step {step} below the cancellation guard {min}")]
    StepTooSmall { step: f64, min: f64 },
    /// A non-finite value surfaced during evaluation.
    #[error("non-finite partition evaluation at phi = {phi}")]
    NonFinite { phi: f64 },
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Truncation and guard settings.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Tolerances {
    /// A term is dropped once its log-weight falls this far below the
    /// running maximum; 750 is the double-precision underflow margin.
    pub drop_threshold: f64,
    /// Hard cap on neutral character levels.
    pub level_cap: i64,
    /// Refuse temperatures below this (frozen spectrum).
    pub t_min: f64,
    /// Refuse temperatures above this (truncation budget guard).
    pub t_max: f64,
    /// Absolute truncation tolerance of the eta-product log terms.
    pub eta_abs_tol: f64,
    /// Default flux step of the finite-difference conductance route.
    pub fd_step: f64,
    /// Cap on lattice window size.
    pub window_cap: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            drop_threshold: 750.0,
            level_cap: 64,
            t_min: 1e-3,
            t_max: 50.0,
            eta_abs_tol: 1e-18,
            fd_step: 1e-3,
            window_cap: 1_000_000,
        }
    }
}

/// Reduced thermodynamic parameters of one evaluation point.
///
/// Physical constants enter only through the reduced combinations: `t = T/T0`
/// with `T0 = hbar*v_F/(pi*k_B*L)`, `mu_red = mu/(k_B*T)`, and `phi` in units
/// of the flux quantum. Conductances come out in units of `e^2/h`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ThermoParams {
    pub t: f64,
    pub mu_red: f64,
    pub phi: f64,
    /// Include the Cappelli-Zemba counterterm (constant `-nu_H/2` in `g`).
    pub include_cz: bool,
    /// Include the Dedekind eta prefactor (no effect on any derivative).
    pub include_eta: bool,
    #[serde(skip)]
    pub tol: Tolerances,
}

impl ThermoParams {
    pub fn new(t: f64) -> Self {
        ThermoParams {
            t,
            mu_red: 0.0,
            phi: 0.0,
            include_cz: true,
            include_eta: true,
            tol: Tolerances::default(),
        }
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_mu(mut self, mu_red: f64) -> Self {
        self.mu_red = mu_red;
        self
    }

    pub fn validate(&self) -> Result<(), ThermoError> {
        if !(self.t >= self.tol.t_min && self.t <= self.tol.t_max) {
            return Err(ThermoError::TemperatureOutOfRange {
                t: self.t,
                t_min: self.tol.t_min,
                t_max: self.tol.t_max,
            });
        }
        Ok(())
    }

    fn kappa(&self) -> f64 {
        2.0 * PI * PI / self.t
    }
}

/// One charged/neutral branch of an evaluated partition function.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BranchContribution {
    /// Charge label in the display range `(-m/2, m/2]`.
    pub charge_label: i64,
    pub neutral_sector: String,
    /// `ln` of this branch's contribution, prefactors included, so the
    /// log-sum-exp of all branches reproduces `log_z`.
    pub log_contribution: f64,
}

/// Result of evaluating `ln Z` and its analytic derivatives at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionEval {
    pub log_z: f64,
    /// Thermal mean island charge in electron units (state average; the
    /// Cappelli-Zemba counterterm is a prefactor, not a state, and does not
    /// enter here).
    pub mean_charge: f64,
    /// Thermal charge variance (state average, always `>= 0`).
    pub charge_variance: f64,
    /// Full analytic `d ln Z / d phi`, counterterms included.
    pub dlog_z_dphi: f64,
    /// Full analytic `d^2 ln Z / d phi^2`, counterterms included.
    pub d2log_z_dphi2: f64,
    pub branches: Vec<BranchContribution>,
}

struct Branch {
    /// Canonical charge label in `[0, m)`.
    l: i64,
    neutral_name: String,
    /// Neutral character as `(absolute exponent, ln coefficient)` pairs.
    char_terms: Vec<(f64, f64)>,
    /// Leading character exponent, used to locate the dominant term.
    leading_exponent: f64,
}

/// Prepared evaluator for one `(state, sector)` pair at fixed temperature,
/// chemical potential and flags; evaluation per flux value is cheap and
/// immutable, so a flux sweep can share one evaluator across threads.
pub struct SectorEvaluator {
    params: ThermoParams,
    n_h: i64,
    d_h: i64,
    m: i64,
    nu_h: f64,
    branches: Vec<Branch>,
    log_eta: f64,
    level_cut: i64,
}

impl SectorEvaluator {
    pub fn new(
        state: &FqhState,
        sector: &Sector,
        params: &ThermoParams,
    ) -> Result<Self, ThermoError> {
        params.validate()?;
        let pairs = state.decompose_sector(sector)?;
        let kappa = params.kappa();
        // Keep character levels until kappa*level crosses the drop threshold,
        // capped; the cutoff is recorded implicitly in the expansion bound.
        let level_cut = ((params.tol.drop_threshold / kappa).ceil() as i64)
            .min(params.tol.level_cap)
            .max(0);
        let mut branches = Vec::with_capacity(pairs.len());
        for (l, neutral) in pairs {
            let ch = state
                .neutral
                .character(neutral, Rational64::from_integer(level_cut))?;
            let char_terms: Vec<(f64, f64)> = ch
                .float_terms(f64::INFINITY)
                .into_iter()
                .map(|(exp, c)| (exp, c.ln()))
                .collect();
            let leading_exponent = char_terms.first().map(|&(exp, _)| exp).unwrap_or_default();
            branches.push(Branch {
                l,
                neutral_name: state.neutral.sector_name(neutral)?.to_string(),
                char_terms,
                leading_exponent,
            });
        }
        let log_eta = if params.include_eta {
            log_dedekind_eta(params.t, params.tol.t_max, params.tol.eta_abs_tol)?
        } else {
            0.0
        };
        Ok(SectorEvaluator {
            params: *params,
            n_h: state.filling.n_h as i64,
            d_h: state.filling.d_h as i64,
            m: state.filling.modulus(),
            nu_h: state.filling.value(),
            branches,
            log_eta,
            level_cut,
        })
    }

    /// Exact flux period of the evaluated sector: shifting `phi` by `d_h`
    /// translates every branch lattice onto itself.
    pub fn flux_period(&self) -> f64 {
        self.d_h as f64
    }

    /// Neutral character level cutoff used by this evaluator: the first
    /// omitted level is weight-suppressed past the drop threshold, or the
    /// hard cap if smaller.
    pub fn character_level_cut(&self) -> i64 {
        self.level_cut
    }

    /// Evaluate at the given flux (the flux stored in the construction
    /// params is ignored).
    pub fn eval(&self, phi: f64) -> Result<PartitionEval, ThermoError> {
        let p = &self.params;
        let kappa = p.kappa();
        let x = p.mu_red + kappa * phi;
        let m_f = self.m as f64;
        let n_h_f = self.n_h as f64;
        // Continuous maximizer of the lattice exponent.
        let a_star = n_h_f * x / (kappa * m_f);
        // Charge of the globally dominant term, neutral offsets included;
        // centering the moment sums there keeps the mean accurate even when
        // the variance is many orders below the mean-square.
        let mut q_ref = 0.0;
        let mut best = f64::NEG_INFINITY;
        for branch in &self.branches {
            let l_frac = branch.l as f64 / m_f;
            let n_c = (a_star - l_frac).round() as i64;
            for n in [n_c - 1, n_c, n_c + 1] {
                let a = n as f64 + l_frac;
                let score =
                    -0.5 * kappa * m_f * a * a + n_h_f * a * x - kappa * branch.leading_exponent;
                if score > best {
                    best = score;
                    q_ref = (self.n_h * (n * self.m + branch.l)) as f64 / m_f;
                }
            }
        }
        let q_ref = q_ref.round();

        let mut total = LogSeriesAccumulator::new();
        let mut branch_out = Vec::with_capacity(self.branches.len());
        for branch in &self.branches {
            let acc = self.eval_branch(branch, kappa, x, a_star, q_ref)?;
            total.merge(&acc);
            branch_out.push((branch, acc));
        }

        let mut prefactor = 0.0;
        if p.include_eta {
            prefactor -= self.log_eta;
        }
        let mut dcz_dphi = 0.0;
        let mut d2cz_dphi2 = 0.0;
        if p.include_cz {
            prefactor -= self.nu_h * x * x / (2.0 * kappa);
            dcz_dphi = -self.nu_h * x;
            d2cz_dphi2 = -self.nu_h * kappa;
        }

        let log_z = total.log_sum() + prefactor;
        if !log_z.is_finite() {
            return Err(ThermoError::NonFinite { phi });
        }
        let mean_charge = q_ref + total.mean_charge();
        let charge_variance = total.charge_variance();
        let branches = branch_out
            .into_iter()
            .map(|(b, acc)| BranchContribution {
                charge_label: display_charge(b.l, self.m),
                neutral_sector: b.neutral_name.clone(),
                log_contribution: acc.log_sum() + prefactor,
            })
            .collect();
        Ok(PartitionEval {
            log_z,
            mean_charge,
            charge_variance,
            dlog_z_dphi: kappa * mean_charge + dcz_dphi,
            d2log_z_dphi2: kappa * kappa * charge_variance + d2cz_dphi2,
            branches,
        })
    }

    fn eval_branch(
        &self,
        branch: &Branch,
        kappa: f64,
        x: f64,
        a_star: f64,
        q_ref: f64,
    ) -> Result<LogSeriesAccumulator, ThermoError> {
        let p = &self.params;
        let m_f = self.m as f64;
        let n_h_f = self.n_h as f64;
        let l_frac = branch.l as f64 / m_f;
        let lattice_log_w = |n: i64| {
            let a = n as f64 + l_frac;
            -0.5 * kappa * m_f * a * a + n_h_f * a * x
        };
        let n_star = (a_star - l_frac).round() as i64;
        let peak = lattice_log_w(n_star)
            .max(lattice_log_w(n_star - 1))
            .max(lattice_log_w(n_star + 1));
        let floor = peak - p.tol.drop_threshold;

        let mut acc = LogSeriesAccumulator::new();
        let mut push_lattice_point = |n: i64| -> bool {
            let lw = lattice_log_w(n);
            if lw < floor {
                return false;
            }
            let q_num = self.n_h * (n * self.m + branch.l);
            let q_centered = q_num as f64 / m_f - q_ref;
            for &(exp, ln_c) in &branch.char_terms {
                acc.push(lw - kappa * exp + ln_c, q_centered);
            }
            true
        };

        let mut steps = 0usize;
        let mut n = n_star;
        while push_lattice_point(n) {
            n += 1;
            steps += 1;
            if steps > p.tol.window_cap {
                return Err(ThermoError::WindowOverflow {
                    cap: p.tol.window_cap,
                });
            }
        }
        n = n_star - 1;
        while push_lattice_point(n) {
            n -= 1;
            steps += 1;
            if steps > p.tol.window_cap {
                return Err(ThermoError::WindowOverflow {
                    cap: p.tol.window_cap,
                });
            }
        }
        Ok(acc)
    }
}

/// Log-domain Luttinger-lattice partition sum over `a = n + l/m`, with
/// charge eigenvalue `Q = charge_factor * a` attached to each term and the
/// eta / Cappelli-Zemba log-prefactors folded into every term's log-weight
/// when the corresponding flags are set.
///
/// Exactly periodic under `l -> l + m` (an index shift of the lattice) and,
/// at `phi = mu_red = 0`, symmetric under `l -> -l`.
pub fn lattice_partition(
    l: i64,
    m: i64,
    charge_factor: i64,
    params: &ThermoParams,
) -> Result<LogSeriesAccumulator, ThermoError> {
    params.validate()?;
    assert!(m > 0 && charge_factor > 0);
    let kappa = params.kappa();
    let x = params.mu_red + kappa * params.phi;
    let m_f = m as f64;
    let cf = charge_factor as f64;
    let nu = cf * cf / m_f;

    let mut prefactor = 0.0;
    if params.include_eta {
        prefactor -= log_dedekind_eta(params.t, params.tol.t_max, params.tol.eta_abs_tol)?;
    }
    if params.include_cz {
        prefactor -= nu * x * x / (2.0 * kappa);
    }

    let l_frac = l as f64 / m_f;
    let log_w = |n: i64| {
        let a = n as f64 + l_frac;
        -0.5 * kappa * m_f * a * a + cf * a * x + prefactor
    };
    let a_star = cf * x / (kappa * m_f);
    let n_star = (a_star - l_frac).round() as i64;
    let peak = log_w(n_star).max(log_w(n_star - 1)).max(log_w(n_star + 1));
    let floor = peak - params.tol.drop_threshold;

    let mut acc = LogSeriesAccumulator::new();
    let mut steps = 0usize;
    for direction in [1i64, -1] {
        let mut n = if direction == 1 { n_star } else { n_star - 1 };
        loop {
            let lw = log_w(n);
            if lw < floor {
                break;
            }
            let a = n as f64 + l_frac;
            acc.push(lw, cf * a);
            n += direction;
            steps += 1;
            if steps > params.tol.window_cap {
                return Err(ThermoError::WindowOverflow {
                    cap: params.tol.window_cap,
                });
            }
        }
    }
    Ok(acc)
}

/// Evaluate `ln Z` with analytic derivatives for a physical sector.
pub fn partition_eval(
    state: &FqhState,
    sector: &Sector,
    params: &ThermoParams,
) -> Result<PartitionEval, ThermoError> {
    SectorEvaluator::new(state, sector, params)?.eval(params.phi)
}

/// Grand potential in units of `k_B T`: `Omega/(k_B T) = -ln Z`.
pub fn grand_potential(
    state: &FqhState,
    sector: &Sector,
    params: &ThermoParams,
) -> Result<f64, ThermoError> {
    Ok(-partition_eval(state, sector, params)?.log_z)
}

/// Thermal mean island charge in electron units.
pub fn mean_charge(
    state: &FqhState,
    sector: &Sector,
    params: &ThermoParams,
) -> Result<f64, ThermoError> {
    Ok(partition_eval(state, sector, params)?.mean_charge)
}

/// Charge stiffness in reduced form: `d<Q>/d mu_red = Var(Q) >= 0`.
pub fn charge_stiffness(
    state: &FqhState,
    sector: &Sector,
    params: &ThermoParams,
) -> Result<f64, ThermoError> {
    Ok(partition_eval(state, sector, params)?.charge_variance)
}

/// Island conductance from the flux susceptibility, in units of `e^2/h`:
///
/// `g = (t / 4 pi^2) * d^2 ln Z / d phi^2`.
///
/// Unit reduction: the susceptibility form of the conductance is
/// `G = (L / 2 v_F) (e/h)^2 k_B T * d^2 ln Z / d phi^2`, and with the
/// crossover scale `k_B T0 = hbar v_F / (pi L) = h v_F / (2 pi^2 L)` the
/// combination `L k_B T / (2 v_F h)` reduces to `(T/T0) / (4 pi^2)`, fixing
/// the prefactor `t/(4 pi^2)`. The same constant is pinned independently by
/// requiring agreement with [`conductance_einstein`].
pub fn conductance_flux(
    state: &FqhState,
    sector: &Sector,
    params: &ThermoParams,
) -> Result<f64, ThermoError> {
    let eval = partition_eval(state, sector, params)?;
    Ok(params.t / (4.0 * PI * PI) * eval.d2log_z_dphi2)
}

/// Island conductance from the Einstein relation, in units of `e^2/h`:
///
/// `sigma(0) = e^2 D (dn/dmu)` with the ballistic diffusion constant
/// `D = L v_F / 2` (relaxation time replaced by the time of flight
/// `L/(2 v_F)`), `n = <Q>/L` and `d<Q>/dmu = Var(Q)/(k_B T)`. Dividing by
/// `L` and reducing with `k_B T0 = h v_F/(2 pi^2 L)` gives
///
/// `g = (pi^2 / t) * Var(Q)`,
///
/// plus the same Cappelli-Zemba constant `-nu_H/2` as the flux route when
/// the counterterm is enabled. Since `ln Z` depends on `mu_red` and `phi`
/// only through `mu_red + kappa*phi`, this route is identically equal to
/// [`conductance_flux`].
pub fn conductance_einstein(
    state: &FqhState,
    sector: &Sector,
    params: &ThermoParams,
) -> Result<f64, ThermoError> {
    let eval = partition_eval(state, sector, params)?;
    let mut g = PI * PI / params.t * eval.charge_variance;
    if params.include_cz {
        g -= state.filling.value() / 2.0;
    }
    Ok(g)
}

/// Richardson-extrapolated central second difference of `f` at `x0`:
/// combines steps `h` and `h/2` to cancel the leading `h^2` error. Exact on
/// quadratics for any step.
pub fn second_derivative_richardson<F: FnMut(f64) -> Result<f64, ThermoError>>(
    mut f: F,
    x0: f64,
    h: f64,
) -> Result<f64, ThermoError> {
    let mut second = |h: f64| -> Result<f64, ThermoError> {
        Ok((f(x0 + h)? - 2.0 * f(x0)? + f(x0 - h)?) / (h * h))
    };
    let coarse = second(h)?;
    let fine = second(h / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Finite-difference conductance with its cancellation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConductance {
    pub value: f64,
    /// Upper bound on the rounding noise inherited from differencing
    /// `ln Z` values of size `~|ln Z|` at the used steps, in `g` units.
    /// Where this exceeds the wanted tolerance the FD route is noise-limited.
    pub cancellation_bound: f64,
}

/// Island conductance from a Richardson-extrapolated central second
/// difference of the grand potential in flux, in units of `e^2/h`.
///
/// The flux argument is folded into the fundamental period `[-d_h/2, d_h/2)`
/// before differencing: a `d_h` shift changes `ln Z` by a term linear in
/// flux, so the second difference is unchanged while the magnitude of the
/// differenced values (hence the cancellation error) drops sharply.
///
/// Errors when the step is non-positive or below the cancellation guard.
pub fn conductance_fd_detail(
    state: &FqhState,
    sector: &Sector,
    params: &ThermoParams,
    step: f64,
) -> Result<FdConductance, ThermoError> {
    let min_step = 1e-6;
    let step_ok = step.is_finite() && step >= min_step;
    if !step_ok {
        return Err(ThermoError::StepTooSmall {
            step,
            min: min_step,
        });
    }
    let evaluator = SectorEvaluator::new(state, sector, params)?;
    let period = evaluator.flux_period();
    let phi0 = params.phi - period * (params.phi / period).round();

    let mut max_abs_log_z = 0.0f64;
    let mut f = |phi: f64| -> Result<f64, ThermoError> {
        let log_z = evaluator.eval(phi)?.log_z;
        max_abs_log_z = max_abs_log_z.max(log_z.abs());
        Ok(log_z)
    };
    let d2 = second_derivative_richardson(&mut f, phi0, step)?;
    let unit = params.t / (4.0 * PI * PI);
    // |1,-2,1| differencing of values rounded at eps*|ln Z|, Richardson
    // combination (4*fine - coarse)/3.
    let eps_noise = 4.0 * f64::EPSILON * max_abs_log_z;
    let h2 = step / 2.0;
    let bound = unit * eps_noise * (4.0 / 3.0 / (h2 * h2) + 1.0 / 3.0 / (step * step));
    Ok(FdConductance {
        value: unit * d2,
        cancellation_bound: bound,
    })
}

/// Convenience wrapper over [`conductance_fd_detail`] returning the value.
pub fn conductance_fd(
    state: &FqhState,
    sector: &Sector,
    params: &ThermoParams,
    step: f64,
) -> Result<f64, ThermoError> {
    Ok(conductance_fd_detail(state, sector, params, step)?.value)
}

/// Sequential-tunneling Coulomb-blockade conductance of the full device:
/// series combination of the two point contacts times the island factor,
/// `g_cb = (g_l * g_r / (g_l + g_r)) * g_island`, in reduced units where the
/// quantum `h/e^2` cancels. Degenerate contact inputs yield 0.
pub fn cb_conductance(g_left: f64, g_right: f64, g_island: f64) -> f64 {
    debug_assert!(g_left >= 0.0 && g_right >= 0.0);
    let sum = g_left + g_right;
    if sum == 0.0 {
        return 0.0;
    }
    g_left * g_right / sum * g_island
}

/// Point-contact conductance in the strong-backscattering regime:
/// `amplitude * t^(4*Delta_el - 2)`, vanishing at low temperature. The
/// amplitude is a free tunneling parameter.
pub fn qpc_conductance(t: f64, delta_el: Rational64, amplitude: f64) -> f64 {
    let exponent = 4.0 * delta_el.to_f64().expect("dimension fits in f64") - 2.0;
    amplitude * t.powf(exponent)
}
