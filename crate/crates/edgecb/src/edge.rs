//! Algebraic structure of the FQH edge theory.
//!
//! An edge state is specified by its filling factor `nu = n_h/d_h` and a
//! neutral-sector model. The electron operator carries electric charge label
//! `-d_h` and a distinguished neutral charge `omega`; repeated fusion with the
//! electron grades the physical Hilbert space into `n_h` charged/neutral
//! pairs, subject to a Z_{n_h} pairing rule driven by the neutral monodromy
//! charge. This module provides the types, validation diagnostics, the
//! pairing rule, and the sector decomposition consumed by the thermodynamics
//! layer.

use std::fmt;

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::qseries::{characters, QExpansion, SeriesError};

fn gcd_u64(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Reduce an exact rational into `[0, 1)`.
fn mod_one(x: Rational64) -> Rational64 {
    x - x.floor()
}

/// Errors from state construction and sector handling.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum StateError {
    #[error("unknown neutral sector index {0}")]
    UnknownSector(usize),
    #[error("unknown state preset '{0}' (expected \"rr-z3\" or \"laughlin:<d_h>\")")]
    UnknownPreset(String),
    #[error("sector (l = {l}, {sector}) violates the pairing rule for this state")]
    InadmissibleSector { l: i64, sector: String },
    #[error("neutral model inconsistency: n_h * Q_omega({sector}) = {value} is not an integer")]
    NonIntegerPairingCharge { sector: String, value: Rational64 },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Filling factor `nu = n_h/d_h` as an exact pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FillingFactor {
    pub n_h: u32,
    pub d_h: u32,
}

impl FillingFactor {
    pub fn new(n_h: u32, d_h: u32) -> Self {
        assert!(n_h > 0 && d_h > 0, "filling factor parts must be positive");
        FillingFactor { n_h, d_h }
    }

    /// `nu` as a float.
    pub fn value(&self) -> f64 {
        self.n_h as f64 / self.d_h as f64
    }

    /// Lattice modulus `m = n_h * d_h` of the decomposed charged algebra.
    pub fn modulus(&self) -> i64 {
        self.n_h as i64 * self.d_h as i64
    }

    pub fn is_coprime(&self) -> bool {
        gcd_u64(self.n_h as u64, self.d_h as u64) == 1
    }
}

impl fmt::Display for FillingFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.n_h, self.d_h)
    }
}

/// Index of a neutral sector within its model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NeutralSectorId(pub usize);

#[derive(Debug, Clone, PartialEq)]
struct SectorInfo {
    name: String,
    weight: Rational64,
}

/// Which character family backs the model's sectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CharacterFamily {
    Trivial,
    Z3Parafermion,
}

/// Description of the neutral conformal sector of the edge: sector labels and
/// weights, the electron's neutral charge `omega` acting by fusion, and the
/// character of each sector as an exact q-expansion.
///
/// Models are immutable after construction. Only the vacuum orbit of `omega`
/// is populated; further sectors can be added to a family without touching
/// the thermodynamics layer.
#[derive(Debug, Clone, PartialEq)]
pub struct NeutralModel {
    name: String,
    central_charge: Rational64,
    sectors: Vec<SectorInfo>,
    omega: NeutralSectorId,
    omega_fusion: Vec<usize>,
    family: CharacterFamily,
}

impl NeutralModel {
    /// Z3 parafermion model: sectors `{vac, psi1, psi2}` with weights
    /// `{0, 2/3, 2/3}`, `omega = psi1`, fusion `psi1*psi1 = psi2`,
    /// `psi1*psi2 = vac`, neutral central charge `4/5`.
    pub fn z3_parafermion() -> Self {
        NeutralModel {
            name: "z3-parafermion".to_string(),
            central_charge: Rational64::new(4, 5),
            sectors: vec![
                SectorInfo {
                    name: "vac".into(),
                    weight: Rational64::zero(),
                },
                SectorInfo {
                    name: "psi1".into(),
                    weight: Rational64::new(2, 3),
                },
                SectorInfo {
                    name: "psi2".into(),
                    weight: Rational64::new(2, 3),
                },
            ],
            omega: NeutralSectorId(1),
            omega_fusion: vec![1, 2, 0],
            family: CharacterFamily::Z3Parafermion,
        }
    }

    /// Trivial one-sector model for Laughlin states: weight 0, character 1,
    /// neutral central-charge offset folded into the charged evaluator.
    pub fn trivial() -> Self {
        NeutralModel {
            name: "trivial".to_string(),
            central_charge: Rational64::zero(),
            sectors: vec![SectorInfo {
                name: "vac".into(),
                weight: Rational64::zero(),
            }],
            omega: NeutralSectorId(0),
            omega_fusion: vec![0],
            family: CharacterFamily::Trivial,
        }
    }

    /// Test hook: a deliberately broken variant for exercising diagnostics.
    #[cfg(test)]
    pub(crate) fn broken_for_tests(weight_psi1: Rational64, fusion: Vec<usize>) -> Self {
        let mut model = NeutralModel::z3_parafermion();
        model.sectors[1].weight = weight_psi1;
        model.omega_fusion = fusion;
        model.name = "broken".into();
        model
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Neutral central charge `c0` (the full theory has `c = 1 + c0`).
    pub fn central_charge(&self) -> Rational64 {
        self.central_charge
    }

    pub fn sector_count(&self) -> usize {
        self.sectors.len()
    }

    pub fn sector_ids(&self) -> impl Iterator<Item = NeutralSectorId> {
        (0..self.sectors.len()).map(NeutralSectorId)
    }

    pub fn sector_name(&self, s: NeutralSectorId) -> Result<&str, StateError> {
        self.sectors
            .get(s.0)
            .map(|i| i.name.as_str())
            .ok_or(StateError::UnknownSector(s.0))
    }

    pub fn sector_by_name(&self, name: &str) -> Option<NeutralSectorId> {
        self.sectors
            .iter()
            .position(|i| i.name == name)
            .map(NeutralSectorId)
    }

    /// Conformal weight of a sector.
    pub fn weight(&self, s: NeutralSectorId) -> Result<Rational64, StateError> {
        self.sectors
            .get(s.0)
            .map(|i| i.weight)
            .ok_or(StateError::UnknownSector(s.0))
    }

    /// The electron's neutral charge.
    pub fn omega(&self) -> NeutralSectorId {
        self.omega
    }

    /// Fusion with the electron's neutral charge: `L -> omega * L`.
    pub fn fuse_with_omega(&self, s: NeutralSectorId) -> Result<NeutralSectorId, StateError> {
        self.omega_fusion
            .get(s.0)
            .map(|&i| NeutralSectorId(i))
            .ok_or(StateError::UnknownSector(s.0))
    }

    /// Neutral monodromy charge
    /// `Q_omega(L) = (Delta(omega*L) - Delta(L) - Delta(omega)) mod 1`,
    /// reduced to `[0, 1)` with exact rational arithmetic.
    pub fn monodromy_charge(&self, s: NeutralSectorId) -> Result<Rational64, StateError> {
        let fused = self.fuse_with_omega(s)?;
        Ok(mod_one(
            self.weight(fused)? - self.weight(s)? - self.weight(self.omega)?,
        ))
    }

    /// Exact character expansion of a sector, complete for exponents up to
    /// `leading + level_max`.
    pub fn character(
        &self,
        s: NeutralSectorId,
        level_max: Rational64,
    ) -> Result<QExpansion, StateError> {
        if s.0 >= self.sectors.len() {
            return Err(StateError::UnknownSector(s.0));
        }
        match self.family {
            CharacterFamily::Trivial => Ok(characters::trivial(level_max)),
            CharacterFamily::Z3Parafermion => Ok(characters::z3_parafermion(s.0 as u8, level_max)?),
        }
    }
}

/// A full FQH edge state: filling factor plus neutral model.
#[derive(Debug, Clone, PartialEq)]
pub struct FqhState {
    pub filling: FillingFactor,
    pub neutral: NeutralModel,
}

/// One violation found by [`FqhState::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    /// `gcd(n_h, d_h) != 1`.
    NonCoprimeFilling(FillingFactor),
    /// `2*Delta_el` is not an odd positive integer.
    ElectronStatisticsNotOdd { twice_dimension: Rational64 },
    /// Applying `omega`-fusion `n_h` times does not return to the start.
    OrbitNotClosed { sector: String },
    /// Character leading exponent differs from `Delta(L) - c0/24`.
    CharacterLeadingMismatch {
        sector: String,
        expected: Rational64,
        found: Rational64,
    },
    /// Neutral central charge is negative.
    NegativeNeutralCentralCharge(Rational64),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::NonCoprimeFilling(ff) => {
                write!(f, "filling factor {ff} is not in lowest terms")
            }
            Diagnostic::ElectronStatisticsNotOdd { twice_dimension } => write!(
                f,
                "electron statistics 2*Delta_el = {twice_dimension} is not an odd positive integer"
            ),
            Diagnostic::OrbitNotClosed { sector } => {
                write!(f, "omega-fusion orbit does not close on sector {sector}")
            }
            Diagnostic::CharacterLeadingMismatch {
                sector,
                expected,
                found,
            } => write!(
                f,
                "character of {sector} leads with q^{found}, expected q^{expected}"
            ),
            Diagnostic::NegativeNeutralCentralCharge(c) => {
                write!(f, "neutral central charge {c} is negative")
            }
        }
    }
}

/// A physical excitation sector: electric charge label `l` (charge `l/d_h`)
/// paired with a neutral sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sector {
    pub l: i64,
    pub neutral: NeutralSectorId,
}

impl Sector {
    /// The vacuum sector `(0, vac)`.
    pub fn vacuum() -> Self {
        Sector {
            l: 0,
            neutral: NeutralSectorId(0),
        }
    }
}

/// Sign convention of the pairing rule, fixed by requiring the electron orbit
/// of the vacuum, `(0, vac) -> (d_h, omega) -> ...`, to be admissible: the
/// rule reads `n_h * Q_omega(L) = -l mod n_h`.
pub const PAIRING_SIGN: i64 = -1;

impl FqhState {
    /// Z3 Read-Rezayi state at `nu = 3/5` with the Z3 parafermion neutral
    /// sector.
    pub fn read_rezayi_z3() -> Self {
        FqhState {
            filling: FillingFactor::new(3, 5),
            neutral: NeutralModel::z3_parafermion(),
        }
    }

    /// Laughlin state at `nu = 1/d_h` with trivial neutral sector.
    pub fn laughlin(d_h: u32) -> Self {
        FqhState {
            filling: FillingFactor::new(1, d_h),
            neutral: NeutralModel::trivial(),
        }
    }

    /// Parse a state preset: `"rr-z3"` or `"laughlin:<d_h>"`.
    pub fn from_preset(preset: &str) -> Result<Self, StateError> {
        if preset == "rr-z3" {
            return Ok(FqhState::read_rezayi_z3());
        }
        if let Some(d) = preset.strip_prefix("laughlin:") {
            let d_h: u32 = d
                .parse()
                .map_err(|_| StateError::UnknownPreset(preset.to_string()))?;
            if d_h == 0 {
                return Err(StateError::UnknownPreset(preset.to_string()));
            }
            return Ok(FqhState::laughlin(d_h));
        }
        Err(StateError::UnknownPreset(preset.to_string()))
    }

    /// Short identifier used in reports.
    pub fn id(&self) -> String {
        format!("nu={} ({})", self.filling, self.neutral.name())
    }

    /// Electron scaling dimension `Delta_el = d_h/(2 n_h) + Delta(omega)`.
    pub fn electron_dimension(&self) -> Rational64 {
        let ff = self.filling;
        Rational64::new(ff.d_h as i64, 2 * ff.n_h as i64)
            + self
                .neutral
                .weight(self.neutral.omega())
                .expect("omega is a model sector")
    }

    /// Consistency diagnostics; an empty list means the state is valid.
    ///
    /// Checks: coprime filling, odd electron statistics (`2*Delta_el` an odd
    /// positive integer), closure of the `omega`-fusion orbit after `n_h`
    /// steps from every sector, agreement of each character's leading
    /// exponent with `Delta(L) - c0/24`, and non-negative neutral central
    /// charge.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if !self.filling.is_coprime() {
            out.push(Diagnostic::NonCoprimeFilling(self.filling));
        }
        let twice = self.electron_dimension() * Rational64::from_integer(2);
        let odd_positive = twice.is_integer() && twice.numer() > &0 && twice.to_integer() % 2 == 1;
        if !odd_positive {
            out.push(Diagnostic::ElectronStatisticsNotOdd {
                twice_dimension: twice,
            });
        }
        if self.neutral.central_charge().is_negative() {
            out.push(Diagnostic::NegativeNeutralCentralCharge(
                self.neutral.central_charge(),
            ));
        }
        for s in self.neutral.sector_ids() {
            let mut cur = s;
            let mut closed = true;
            for _ in 0..self.filling.n_h {
                match self.neutral.fuse_with_omega(cur) {
                    Ok(next) => cur = next,
                    Err(_) => {
                        closed = false;
                        break;
                    }
                }
            }
            if !closed || cur != s {
                out.push(Diagnostic::OrbitNotClosed {
                    sector: self
                        .neutral
                        .sector_name(s)
                        .unwrap_or("<unknown>")
                        .to_string(),
                });
            }
        }
        let c24 = self.neutral.central_charge() / Rational64::from_integer(24);
        for s in self.neutral.sector_ids() {
            let expected = self.neutral.weight(s).expect("sector exists") - c24;
            match self.neutral.character(s, Rational64::zero()) {
                Ok(ch) => {
                    let found = ch.leading_exponent();
                    if found != expected {
                        out.push(Diagnostic::CharacterLeadingMismatch {
                            sector: self
                                .neutral
                                .sector_name(s)
                                .unwrap_or("<unknown>")
                                .to_string(),
                            expected,
                            found,
                        });
                    }
                }
                Err(_) => out.push(Diagnostic::CharacterLeadingMismatch {
                    sector: self
                        .neutral
                        .sector_name(s)
                        .unwrap_or("<unknown>")
                        .to_string(),
                    expected,
                    found: Rational64::zero(),
                }),
            }
        }
        out
    }

    /// Pairing rule: `(l, L)` is admissible iff
    /// `n_h * Q_omega(L) = sigma * l mod n_h` with [`PAIRING_SIGN`] `sigma`.
    ///
    /// Errors if `n_h * Q_omega(L)` is not an integer, which signals an
    /// inconsistent neutral model rather than an inadmissible pair.
    pub fn pairing_admissible(&self, l: i64, neutral: NeutralSectorId) -> Result<bool, StateError> {
        let n_h = self.filling.n_h as i64;
        let q = self.neutral.monodromy_charge(neutral)? * Rational64::from_integer(n_h);
        if !q.is_integer() {
            return Err(StateError::NonIntegerPairingCharge {
                sector: self.neutral.sector_name(neutral)?.to_string(),
                value: q,
            });
        }
        let lhs = q.to_integer().rem_euclid(n_h);
        let rhs = (PAIRING_SIGN * l).rem_euclid(n_h);
        Ok(lhs == rhs)
    }

    /// Decompose a physical sector into its `n_h` charged/neutral pairs
    /// `(l + s*d_h mod m, omega^s * L)`, `s = 0..n_h`, with charge labels
    /// reduced modulo `m = n_h*d_h`.
    ///
    /// Errors if the input sector itself is inadmissible. Every returned pair
    /// is admissible.
    pub fn decompose_sector(
        &self,
        sector: &Sector,
    ) -> Result<Vec<(i64, NeutralSectorId)>, StateError> {
        if !self.pairing_admissible(sector.l, sector.neutral)? {
            return Err(StateError::InadmissibleSector {
                l: sector.l,
                sector: self.neutral.sector_name(sector.neutral)?.to_string(),
            });
        }
        let m = self.filling.modulus();
        let d_h = self.filling.d_h as i64;
        let mut out = Vec::with_capacity(self.filling.n_h as usize);
        let mut neutral = sector.neutral;
        for s in 0..self.filling.n_h as i64 {
            let l_s = (sector.l + s * d_h).rem_euclid(m);
            out.push((l_s, neutral));
            neutral = self.neutral.fuse_with_omega(neutral)?;
        }
        Ok(out)
    }
}

/// Representative of a charge label in `(-m/2, m/2]`, the form used for
/// display (so `10 mod 15` prints as `-5`).
pub fn display_charge(l: i64, m: i64) -> i64 {
    let r = l.rem_euclid(m);
    if 2 * r > m {
        r - m
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn rr_z3_is_valid() {
        let state = FqhState::read_rezayi_z3();
        assert_eq!(state.electron_dimension(), r(3, 2));
        assert!(state.validate().is_empty());
    }

    #[test]
    fn laughlin_third_is_valid() {
        let state = FqhState::laughlin(3);
        assert_eq!(state.electron_dimension(), r(3, 2));
        assert!(state.validate().is_empty());
    }

    #[test]
    fn non_coprime_filling_is_flagged() {
        let state = FqhState {
            filling: FillingFactor::new(2, 4),
            neutral: NeutralModel::trivial(),
        };
        let diags = state.validate();
        assert!(diags
            .iter()
            .any(|d| matches!(d, Diagnostic::NonCoprimeFilling(_))));
    }

    #[test]
    fn even_statistics_is_flagged() {
        // nu = 1/2 gives 2*Delta_el = 2 with a trivial neutral sector.
        let state = FqhState {
            filling: FillingFactor::new(1, 2),
            neutral: NeutralModel::trivial(),
        };
        let diags = state.validate();
        assert!(diags
            .iter()
            .any(|d| matches!(d, Diagnostic::ElectronStatisticsNotOdd { .. })));
    }

    #[test]
    fn broken_weight_breaks_leading_exponent() {
        let state = FqhState {
            filling: FillingFactor::new(3, 5),
            neutral: NeutralModel::broken_for_tests(r(1, 2), vec![1, 2, 0]),
        };
        let diags = state.validate();
        assert!(diags
            .iter()
            .any(|d| matches!(d, Diagnostic::CharacterLeadingMismatch { .. })));
    }

    #[test]
    fn broken_fusion_breaks_orbit() {
        let state = FqhState {
            filling: FillingFactor::new(3, 5),
            neutral: NeutralModel::broken_for_tests(r(2, 3), vec![1, 1, 0]),
        };
        let diags = state.validate();
        assert!(diags
            .iter()
            .any(|d| matches!(d, Diagnostic::OrbitNotClosed { .. })));
    }

    #[test]
    fn monodromy_charges() {
        let model = NeutralModel::z3_parafermion();
        let vac = model.sector_by_name("vac").unwrap();
        let psi1 = model.sector_by_name("psi1").unwrap();
        let psi2 = model.sector_by_name("psi2").unwrap();
        assert_eq!(model.monodromy_charge(vac).unwrap(), r(0, 1));
        assert_eq!(model.monodromy_charge(psi1).unwrap(), r(1, 3));
        assert_eq!(model.monodromy_charge(psi2).unwrap(), r(2, 3));
        let trivial = NeutralModel::trivial();
        assert_eq!(trivial.monodromy_charge(trivial.omega()).unwrap(), r(0, 1));
    }

    #[test]
    fn pairing_rule_on_vacuum_orbit() {
        let state = FqhState::read_rezayi_z3();
        assert!(state.pairing_admissible(0, NeutralSectorId(0)).unwrap());
        assert!(!state.pairing_admissible(1, NeutralSectorId(0)).unwrap());
        for (l, s) in state.decompose_sector(&Sector::vacuum()).unwrap() {
            assert!(state.pairing_admissible(l, s).unwrap());
        }
    }

    #[test]
    fn vacuum_decomposition_matches_convention() {
        let state = FqhState::read_rezayi_z3();
        let pairs = state.decompose_sector(&Sector::vacuum()).unwrap();
        let m = state.filling.modulus();
        let named: Vec<(i64, &str)> = pairs
            .iter()
            .map(|(l, s)| {
                (
                    display_charge(*l, m),
                    state.neutral.sector_name(*s).unwrap(),
                )
            })
            .collect();
        assert_eq!(named, vec![(0, "vac"), (5, "psi1"), (-5, "psi2")]);
    }

    #[test]
    fn laughlin_decomposition_is_single_pair() {
        let state = FqhState::laughlin(3);
        let pairs = state.decompose_sector(&Sector::vacuum()).unwrap();
        assert_eq!(pairs, vec![(0, NeutralSectorId(0))]);
    }

    #[test]
    fn orbit_closes_after_n_h_steps() {
        let state = FqhState::read_rezayi_z3();
        let mut s = NeutralSectorId(0);
        for _ in 0..3 {
            s = state.neutral.fuse_with_omega(s).unwrap();
        }
        assert_eq!(s, NeutralSectorId(0));
    }

    #[test]
    fn inadmissible_sector_rejected() {
        let state = FqhState::read_rezayi_z3();
        let bad = Sector {
            l: 1,
            neutral: NeutralSectorId(0),
        };
        assert!(matches!(
            state.decompose_sector(&bad),
            Err(StateError::InadmissibleSector { .. })
        ));
    }

    #[test]
    fn fractional_pairing_charge_flags_broken_model() {
        // psi1 weight 1/2 makes n_h * Q_omega(psi2) = 5/2, not an integer.
        let state = FqhState {
            filling: FillingFactor::new(3, 5),
            neutral: NeutralModel::broken_for_tests(r(1, 2), vec![1, 2, 0]),
        };
        assert!(matches!(
            state.pairing_admissible(0, NeutralSectorId(2)),
            Err(StateError::NonIntegerPairingCharge { .. })
        ));
    }

    #[test]
    fn presets_parse() {
        assert!(FqhState::from_preset("rr-z3").is_ok());
        let l5 = FqhState::from_preset("laughlin:5").unwrap();
        assert_eq!(l5.filling, FillingFactor::new(1, 5));
        assert!(FqhState::from_preset("laughlin:0").is_err());
        assert!(FqhState::from_preset("pfaffian").is_err());
    }

    #[test]
    fn display_charge_representative() {
        assert_eq!(display_charge(10, 15), -5);
        assert_eq!(display_charge(5, 15), 5);
        assert_eq!(display_charge(-7, 15), -7);
        assert_eq!(display_charge(8, 15), -7);
    }
}
