//! CSV, JSON and SVG artifact writers.
//!
//! All numeric text output uses 12-significant-digit scientific notation so
//! repeated runs with identical configuration produce byte-identical files.

use std::fs;
use std::io::Write;
use std::path::Path;

use edgecb::analysis::{Classification, ConductanceTrace, Peak, PeakReport};
use serde::Serialize;

use crate::config::RunConfig;

/// Round to 12 significant digits through the decimal representation, so the
/// serialized JSON numbers are diff-stable across platforms.
pub fn sig12(x: f64) -> f64 {
    format!("{x:.11e}").parse().expect("formatted float parses")
}

pub fn format_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Trace CSV: header `phi,g`, one row per grid point.
pub fn write_csv(path: &Path, trace: &ConductanceTrace) -> std::io::Result<()> {
    let mut out = String::with_capacity(trace.len() * 40 + 8);
    out.push_str("phi,g\n");
    for (phi, g) in trace.phi.iter().zip(&trace.g) {
        out.push_str(&format_sig12(*phi));
        out.push(',');
        out.push_str(&format_sig12(*g));
        out.push('\n');
    }
    fs::write(path, out)
}

#[derive(Debug, Serialize)]
pub struct PeakJson {
    pub position: f64,
    pub height: f64,
    pub fwhm: f64,
}

#[derive(Debug, Serialize)]
pub struct ReportJson {
    pub peaks: Vec<PeakJson>,
    pub spacings: Vec<f64>,
    pub classification: Option<Classification>,
}

/// Positions are rounded to 12 significant digits and the stored spacings are
/// exact differences of the stored positions, so re-reading the JSON and
/// recomputing spacings reproduces them bit-for-bit.
pub fn report_to_json(report: &PeakReport) -> ReportJson {
    let peaks: Vec<PeakJson> = report
        .peaks
        .iter()
        .map(|p: &Peak| PeakJson {
            position: sig12(p.position),
            height: sig12(p.height),
            fwhm: sig12(p.fwhm),
        })
        .collect();
    let spacings = peaks
        .windows(2)
        .map(|w| w[1].position - w[0].position)
        .collect();
    let classification = report.classification.map(|c| Classification {
        bunch_size: c.bunch_size,
        within_spacing: sig12(c.within_spacing),
        between_spacing: sig12(c.between_spacing),
        period: sig12(c.period),
        period_expected: c.period_expected,
    });
    ReportJson {
        peaks,
        spacings,
        classification,
    }
}

#[derive(Debug, Serialize)]
pub struct SweepDocument<'a> {
    pub library_version: &'static str,
    pub config: &'a RunConfig,
    pub state: String,
    pub n_points: usize,
    #[serde(flatten)]
    pub report: ReportJson,
}

#[derive(Debug, Serialize)]
pub struct ScanDocument<'a> {
    pub library_version: &'static str,
    pub config: &'a RunConfig,
    pub state: String,
    pub scans: Vec<ScanEntry>,
}

#[derive(Debug, Serialize)]
pub struct ScanEntry {
    pub t: f64,
    #[serde(flatten)]
    pub report: ReportJson,
}

pub fn write_json<T: Serialize>(path: &Path, document: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(document).expect("report serializes");
    text.push('\n');
    fs::write(path, text)
}

/// Dependency-free SVG line plot of `g(phi)` with detected peaks marked.
pub fn write_svg(path: &Path, trace: &ConductanceTrace, peaks: &[Peak]) -> std::io::Result<()> {
    const W: f64 = 900.0;
    const H: f64 = 500.0;
    const ML: f64 = 70.0;
    const MR: f64 = 20.0;
    const MT: f64 = 20.0;
    const MB: f64 = 50.0;

    let (x_lo, x_hi) = (trace.phi[0], *trace.phi.last().unwrap());
    let y_lo = trace.g.iter().cloned().fold(f64::INFINITY, f64::min);
    let y_hi = trace.g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let y_pad = 0.05 * (y_hi - y_lo).max(1e-12);
    let (y_lo, y_hi) = (y_lo - y_pad, y_hi + y_pad);

    let x_of = |phi: f64| ML + (phi - x_lo) / (x_hi - x_lo) * (W - ML - MR);
    let y_of = |g: f64| H - MB - (g - y_lo) / (y_hi - y_lo) * (H - MT - MB);

    // Thin very dense traces; the plot is a convenience, not a data channel.
    let stride = (trace.len() / 4000).max(1);
    let mut points = String::new();
    for i in (0..trace.len()).step_by(stride) {
        points.push_str(&format!(
            "{:.2},{:.2} ",
            x_of(trace.phi[i]),
            y_of(trace.g[i])
        ));
    }
    if !(trace.len() - 1).is_multiple_of(stride) {
        let i = trace.len() - 1;
        points.push_str(&format!(
            "{:.2},{:.2} ",
            x_of(trace.phi[i]),
            y_of(trace.g[i])
        ));
    }

    let mut file = fs::File::create(path)?;
    writeln!(
        file,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {W} {H}" font-family="monospace" font-size="12">"#
    )?;
    writeln!(file, r#"<rect width="{W}" height="{H}" fill="white"/>"#)?;
    writeln!(
        file,
        r#"<line x1="{ML}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        H - MB,
        W - MR,
        H - MB
    )?;
    writeln!(
        file,
        r#"<line x1="{ML}" y1="{MT}" x2="{ML}" y2="{}" stroke="black"/>"#,
        H - MB
    )?;
    writeln!(
        file,
        r#"<text x="{}" y="{}" text-anchor="middle">phi (flux quanta)</text>"#,
        (ML + W - MR) / 2.0,
        H - 12.0
    )?;
    writeln!(
        file,
        r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">g (e^2/h)</text>"#,
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0
    )?;
    for (value, x) in [(x_lo, ML), (x_hi, W - MR)] {
        writeln!(
            file,
            r#"<text x="{x}" y="{}" text-anchor="middle">{value:.3}</text>"#,
            H - MB + 18.0
        )?;
    }
    for (value, y) in [(y_lo, H - MB), (y_hi, MT)] {
        writeln!(
            file,
            r#"<text x="{}" y="{}" text-anchor="end">{value:.3}</text>"#,
            ML - 6.0,
            y + 4.0
        )?;
    }
    writeln!(
        file,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.2"/>"#,
        points.trim_end()
    )?;
    for peak in peaks {
        writeln!(
            file,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="none" stroke="crimson" stroke-width="1.5"/>"#,
            x_of(peak.position),
            y_of(peak.height)
        )?;
    }
    writeln!(file, "</svg>")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig12_is_idempotent() {
        for x in [1.5, -0.0012345678901234, 3.0e17, 0.0] {
            assert_eq!(sig12(sig12(x)), sig12(x));
        }
    }

    #[test]
    fn format_is_stable() {
        assert_eq!(format_sig12(1.5), "1.50000000000e0");
        assert_eq!(format_sig12(0.0), "0.00000000000e0");
        assert_eq!(format_sig12(-2.5e-4), "-2.50000000000e-4");
    }
}
