//! Built-in invariant suite: exercises the cross-identities the library is
//! supposed to satisfy and prints one pass/fail line per item.

use edgecb::analysis::{find_peaks, sweep_flux};
use edgecb::edge::{display_charge, FqhState, Sector};
use edgecb::qseries::{accumulate_log_terms, characters};
use edgecb::thermo::{
    conductance_einstein, conductance_fd_detail, conductance_flux, lattice_partition,
    SectorEvaluator, ThermoParams,
};
use num_rational::Rational64;

/// Deliberate corruptions for proving the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Apply the flux-susceptibility counterterm with the wrong sign in the
    /// positivity bookkeeping.
    CzSign,
}

pub struct Item {
    pub name: &'static str,
    pub tolerance: String,
    pub passed: bool,
    pub detail: String,
}

pub struct SelftestReport {
    pub items: Vec<Item>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

pub fn run(fault: Option<Fault>) -> SelftestReport {
    let mut items = Vec::new();
    let z3 = FqhState::read_rezayi_z3();
    let laughlin = FqhState::laughlin(3);
    let vac = Sector::vacuum();
    let level12 = Rational64::from_integer(12);

    // Character suite.
    {
        let ch0 = characters::z3_parafermion(0, level12).unwrap();
        let got: Vec<i64> = (0..4)
            .map(|k| ch0.coefficient_at_level(k).unwrap().to_integer())
            .collect();
        items.push(Item {
            name: "characters: vacuum coefficients",
            tolerance: "exact".into(),
            passed: got == vec![1, 0, 1, 2],
            detail: format!("levels 0..3 = {got:?}"),
        });

        let ch1 = characters::z3_parafermion(1, level12).unwrap();
        let ch2 = characters::z3_parafermion(2, level12).unwrap();
        let leading_ok = ch1.leading_exponent() == Rational64::new(-1, 30) + Rational64::new(2, 3);
        items.push(Item {
            name: "characters: sector-1 leading exponent",
            tolerance: "exact".into(),
            passed: leading_ok,
            detail: format!("leading = {}", ch1.leading_exponent()),
        });
        items.push(Item {
            name: "characters: conjugate sectors equal",
            tolerance: "exact, levels <= 12".into(),
            passed: ch1.coefficients() == ch2.coefficients()
                && ch1.leading_exponent() == ch2.leading_exponent(),
            detail: format!("{} coefficients compared", ch1.coefficients().len()),
        });
        let total = ch0.add(&ch1).add(&ch2);
        let unrestricted = characters::z3_unrestricted(level12);
        items.push(Item {
            name: "characters: sector sum identity",
            tolerance: "exact, levels <= 12".into(),
            passed: total.eq_on_common_range(&unrestricted),
            detail: "restricted sum vs unrestricted double sum".into(),
        });
        let positive = [&ch0, &ch1, &ch2].iter().all(|c| c.is_character_like());
        items.push(Item {
            name: "characters: coefficient positivity",
            tolerance: "exact, levels <= 12".into(),
            passed: positive,
            detail: "all sectors".into(),
        });
    }

    // Algebraic structure.
    {
        let valid = z3.validate().is_empty() && laughlin.validate().is_empty();
        let pairs = z3.decompose_sector(&vac).unwrap();
        let m = z3.filling.modulus();
        let named: Vec<(i64, String)> = pairs
            .iter()
            .map(|(l, s)| {
                (
                    display_charge(*l, m),
                    z3.neutral.sector_name(*s).unwrap().to_string(),
                )
            })
            .collect();
        let decomposition_ok = named
            == vec![
                (0, "vac".to_string()),
                (5, "psi1".to_string()),
                (-5, "psi2".to_string()),
            ];
        let admissible = pairs
            .iter()
            .all(|(l, s)| z3.pairing_admissible(*l, *s).unwrap());
        items.push(Item {
            name: "algebra: state validation and vacuum decomposition",
            tolerance: "exact".into(),
            passed: valid && decomposition_ok && admissible,
            detail: format!("{named:?}"),
        });

        let params = ThermoParams::new(0.5).with_phi(0.4).with_mu(0.2);
        let a = lattice_partition(2, 15, 3, &params).unwrap().log_sum();
        let b = lattice_partition(17, 15, 3, &params).unwrap().log_sum();
        items.push(Item {
            name: "algebra: lattice label periodicity",
            tolerance: "1e-12 relative".into(),
            passed: rel_err(a, b) < 1e-12,
            detail: format!("rel err = {:.2e}", rel_err(a, b)),
        });
    }

    // Route equivalence.
    {
        let mut worst_fe = 0.0f64;
        let mut worst_fd = 0.0f64;
        let mut fd_ok = true;
        for (t, mu, phi) in [(0.5, 0.0, 0.6), (0.4, 0.3, 1.5), (1.2, -0.2, 2.2)] {
            let params = ThermoParams::new(t).with_mu(mu).with_phi(phi);
            let gf = conductance_flux(&z3, &vac, &params).unwrap();
            let ge = conductance_einstein(&z3, &vac, &params).unwrap();
            worst_fe = worst_fe.max((gf - ge).abs() / gf.abs().max(ge.abs()).max(1e-15));
            let fd = conductance_fd_detail(&z3, &vac, &params, 1e-3).unwrap();
            let err = (fd.value - gf).abs();
            let allowed = (1e-6 * gf.abs()).max(fd.cancellation_bound);
            worst_fd = worst_fd.max(err);
            fd_ok &= err <= allowed;
        }
        items.push(Item {
            name: "routes: flux susceptibility vs Einstein",
            tolerance: "1e-9 relative".into(),
            passed: worst_fe < 1e-9,
            detail: format!("worst rel err = {worst_fe:.2e}"),
        });
        items.push(Item {
            name: "routes: finite-difference cross-check",
            tolerance: "1e-6 relative or cancellation bound".into(),
            passed: fd_ok,
            detail: format!("worst abs err = {worst_fd:.2e}"),
        });
    }

    // Periodicity, reflection, staircase, counterterm and eta toggles.
    {
        let params = ThermoParams::new(0.5);
        let ev_z3 = SectorEvaluator::new(&z3, &vac, &params).unwrap();
        let ev_lg = SectorEvaluator::new(&laughlin, &vac, &params).unwrap();
        let unit = 0.5 / (4.0 * std::f64::consts::PI.powi(2));
        let g_of = |ev: &SectorEvaluator, phi: f64| unit * ev.eval(phi).unwrap().d2log_z_dphi2;

        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..40 {
            let phi = i as f64 * 0.125;
            let (a, b) = (g_of(&ev_z3, phi), g_of(&ev_z3, phi + 5.0));
            worst = worst.max((a - b).abs());
            scale = scale.max(a.abs());
            let (a, b) = (g_of(&ev_lg, phi), g_of(&ev_lg, phi + 3.0));
            worst = worst.max((a - b).abs());
            scale = scale.max(a.abs());
        }
        items.push(Item {
            name: "symmetry: flux periodicity (z3 by 5, laughlin by 3)",
            tolerance: "1e-9 of max |g|".into(),
            passed: worst < 1e-9 * scale,
            detail: format!("worst abs diff = {worst:.2e}"),
        });

        let mut worst = 0.0f64;
        for i in 1..30 {
            let phi = i as f64 * 0.15;
            worst = worst.max((g_of(&ev_z3, phi) - g_of(&ev_z3, -phi)).abs());
            worst = worst.max((g_of(&ev_lg, phi) - g_of(&ev_lg, -phi)).abs());
        }
        items.push(Item {
            name: "symmetry: flux reflection at mu = 0",
            tolerance: "1e-9 of max |g|".into(),
            passed: worst < 1e-9 * scale,
            detail: format!("worst abs diff = {worst:.2e}"),
        });

        let mut worst = 0.0f64;
        for i in 0..20 {
            let phi = i as f64 * 0.25;
            let dq =
                ev_z3.eval(phi + 5.0).unwrap().mean_charge - ev_z3.eval(phi).unwrap().mean_charge;
            worst = worst.max((dq - 3.0).abs());
        }
        items.push(Item {
            name: "thermo: charge staircase (+n_h per d_h flux quanta)",
            tolerance: "1e-8 absolute".into(),
            passed: worst < 1e-8,
            detail: format!("worst |dQ - 3| = {worst:.2e}"),
        });

        // Positivity; this is where the fault hook corrupts the bookkeeping,
        // emulating a counterterm applied with the wrong sign.
        let nu = z3.filling.value();
        let mut params_off = params;
        params_off.include_cz = false;
        let ev_off = SectorEvaluator::new(&z3, &vac, &params_off).unwrap();
        let mut min_off = f64::INFINITY;
        let mut min_on = f64::INFINITY;
        for i in 0..=100 {
            let phi = i as f64 * 0.05;
            let mut off = g_of(&ev_off, phi);
            if fault == Some(Fault::CzSign) {
                off -= nu;
            }
            min_off = min_off.min(off);
            min_on = min_on.min(g_of(&ev_z3, phi) + nu / 2.0);
        }
        items.push(Item {
            name: "thermo: conductance positivity",
            tolerance: "g >= 0 (no counterterm), g + nu/2 >= 0 (with)".into(),
            passed: min_off >= -1e-12 && min_on >= -1e-12,
            detail: format!("min = {min_off:.2e} / {min_on:.2e}"),
        });

        let shift = g_of(&ev_z3, 0.7) - g_of(&ev_off, 0.7);
        items.push(Item {
            name: "thermo: counterterm is a constant -nu/2 shift",
            tolerance: "1e-12 absolute".into(),
            passed: (shift + nu / 2.0).abs() < 1e-12,
            detail: format!("shift = {shift:.15}"),
        });

        let mut params_no_eta = params;
        params_no_eta.include_eta = false;
        let ev_no_eta = SectorEvaluator::new(&z3, &vac, &params_no_eta).unwrap();
        let diff = (g_of(&ev_z3, 1.1) - g_of(&ev_no_eta, 1.1)).abs();
        items.push(Item {
            name: "thermo: eta factor drops out of conductance",
            tolerance: "1e-12 absolute".into(),
            passed: diff < 1e-12,
            detail: format!("diff = {diff:.2e}"),
        });
    }

    // Accumulator order independence.
    {
        let terms: Vec<(f64, f64)> = (0..500)
            .map(|i| {
                let x = i as f64;
                ((x * 0.37).sin() * 120.0, (x * 0.11).cos() * 3.0)
            })
            .collect();
        let fwd = accumulate_log_terms(terms.iter().copied()).unwrap();
        let rev = accumulate_log_terms(terms.iter().rev().copied()).unwrap();
        let err = rel_err(fwd.log_sum(), rev.log_sum());
        items.push(Item {
            name: "qseries: accumulator order independence",
            tolerance: "1e-13 relative".into(),
            passed: err < 1e-13,
            detail: format!("rel err = {err:.2e}"),
        });
    }

    // Peak pattern smoke check (coarse grid; the acceptance suite runs the
    // full-resolution version).
    {
        let params = ThermoParams::new(0.5);
        let trace = sweep_flux(&z3, &vac, &params, 0.0, 15.0, 3001).unwrap();
        let report = find_peaks(&trace).unwrap();
        items.push(Item {
            name: "analysis: nine peaks in three bunches",
            tolerance: "count exact".into(),
            passed: report.peaks.len() == 9,
            detail: format!("{} peaks", report.peaks.len()),
        });
    }

    SelftestReport { items }
}

pub fn print_report(report: &SelftestReport) {
    for item in &report.items {
        let status = if item.passed { "PASS" } else { "FAIL" };
        println!(
            "[{status}] {} ({}) -- {}",
            item.name, item.tolerance, item.detail
        );
    }
    let passed = report.items.iter().filter(|i| i.passed).count();
    println!("{passed}/{} checks passed", report.items.len());
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_run_passes() {
        let report = run(None);
        for item in &report.items {
            assert!(item.passed, "{} failed: {}", item.name, item.detail);
        }
    }

    #[test]
    fn cz_fault_breaks_positivity() {
        let report = run(Some(Fault::CzSign));
        let positivity = report
            .items
            .iter()
            .find(|i| i.name.contains("conductance positivity"))
            .unwrap();
        assert!(!positivity.passed);
    }
}
