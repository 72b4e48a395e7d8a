//! Finite-temperature Coulomb-blockade conductance of a fractional quantum
//! Hall (FQH) island, computed from the grand-canonical partition function of
//! its chiral edge modes.
//!
//! The edge theory of an FQH droplet at filling `nu = n_h/d_h` factorizes into
//! a charged u(1) sector, fully fixed by the filling, and a neutral sector that
//! distinguishes universality classes at the same filling. An Aharonov-Bohm
//! flux through the island twists the boundary conditions and enters the
//! charged sector as a shift of the chemical-potential-like modular parameter.
//! The island conductance follows from equilibrium thermodynamics alone: it is
//! proportional to the flux susceptibility of the grand potential, or
//! equivalently (Einstein relation with ballistic diffusion) to the charge
//! variance over temperature.
//!
//! The crate is organized in four layers:
//!
//! - [`qseries`]: exact truncated q-expansions with rational exponents
//!   (neutral characters, Dedekind eta) and a log-domain accumulator with
//!   charge-moment tracking for numerically stable thermal sums.
//! - [`edge`]: algebraic structure of the edge theory: filling factor,
//!   neutral sector model, monodromy charge, pairing rule, and the
//!   decomposition of a physical sector into charged-lattice/neutral-character
//!   pairs.
//! - [`thermo`]: evaluation of the flux-threaded partition function, its
//!   analytic flux and chemical-potential derivatives, and the conductance via
//!   three cross-checking routes (flux susceptibility, Einstein relation,
//!   finite differences).
//! - [`analysis`]: flux sweeps, peak detection with FWHM, and classification
//!   of the peak-spacing pattern (bunching, periods).
//!
//! All thermodynamics is in reduced units: temperature `t = T/T0` with
//! `T0 = hbar*v_F/(pi*k_B*L)` the finite-size crossover scale of an edge of
//! circumference `L`, chemical potential `mu_red = mu/(k_B*T)`, flux `phi` in
//! flux quanta. Conductances are reported in units of `e^2/h`.

pub mod analysis;
pub mod edge;
pub mod qseries;
pub mod thermo;

pub use edge::{FillingFactor, FqhState, NeutralModel, Sector};
pub use qseries::{LogSeriesAccumulator, QExpansion};
pub use thermo::{PartitionEval, SectorEvaluator, ThermoParams};

/// Crate version, echoed into serialized reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
