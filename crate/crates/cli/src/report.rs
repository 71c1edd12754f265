//! Files written by the CLI: the TOML report and the CSV tables.
//!
//! Floats in CSV files use `{:.16e}`, which round-trips and is stable across
//! runs; the TOML report uses the shortest round-trip form.

use std::fmt::Write as _;

use serde::Serialize;
use strandloss::losses::{cauchy_schwarz_witness, LossRatio, LossReport, PropertyStatus};
use strandloss::network::ValidationReport;
use strandloss::solver::{SharingFunctions, SolvedBundle};

use crate::config::{AnalysisSpec, DriveSpec, NetworkEcho, NetworkSpec};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_ratio(r: LossRatio) -> String {
    match r {
        LossRatio::Defined(v) => fmt_f64(v),
        LossRatio::Undefined => "undefined".to_string(),
    }
}

pub fn status_name(s: PropertyStatus) -> &'static str {
    match s {
        PropertyStatus::Holds => "holds",
        PropertyStatus::Violated => "violated",
        PropertyStatus::NotApplicable => "not_applicable",
    }
}

fn strand_columns(n: usize, prefix: &str, suffix: &str) -> String {
    (1..=n)
        .map(|i| format!(",{prefix}{i:02}{suffix}"))
        .collect()
}

/// `time_s,total_A,strand_01_A,...` over one period.
pub fn waveforms_csv(sol: &SolvedBundle, grid: usize) -> String {
    let n = sol.strand_count();
    let period = sol.drive.period();
    let mut out = format!("time_s,total_A{}\n", strand_columns(n, "strand_", "_A"));
    for k in 0..grid {
        let t = k as f64 * period / grid as f64;
        out.push_str(&fmt_f64(t));
        out.push(',');
        out.push_str(&fmt_f64(sol.drive.sample(t)));
        for i in sol.sample_strands(t) {
            out.push(',');
            out.push_str(&fmt_f64(i));
        }
        out.push('\n');
    }
    out
}

/// `time_s,total_A,masked,alpha_01,...,sum_alpha,sum_alpha_sq`; share
/// columns are empty on masked rows. `None` means every point was masked.
pub fn sharing_csv(sol: &SolvedBundle, shares: Option<&SharingFunctions>, grid: usize) -> String {
    let n = sol.strand_count();
    let period = sol.drive.period();
    let mut out = format!(
        "time_s,total_A,masked{},sum_alpha,sum_alpha_sq\n",
        strand_columns(n, "alpha_", "")
    );
    for k in 0..grid {
        let t = shares.map_or(k as f64 * period / grid as f64, |s| s.times[k]);
        let masked = shares.is_none_or(|s| s.masked[k]);
        let _ = write!(
            out,
            "{},{},{}",
            fmt_f64(t),
            fmt_f64(sol.drive.sample(t)),
            u8::from(masked)
        );
        match shares {
            Some(s) if !masked => {
                let a = s.shares_at(k);
                for v in &a {
                    out.push(',');
                    out.push_str(&fmt_f64(*v));
                }
                let sum: f64 = a.iter().sum();
                let sq: f64 = a.iter().map(|v| v * v).sum();
                let _ = write!(out, ",{},{}", fmt_f64(sum), fmt_f64(sq));
            }
            _ => out.push_str(&",".repeat(n + 2)),
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportFile {
    pub network: NetworkSpec,
    pub drive: DriveSpec,
    pub analysis: AnalysisSpec,
    pub report: ReportSection,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportSection {
    pub strand_count: usize,
    pub drive_rms: f64,
    pub total_cc_losses: f64,
    pub total_baseline_losses: f64,
    pub excess_loss: f64,
    /// `defined` or `undefined`; `loss_ratio` is absent when undefined.
    pub loss_ratio_status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss_ratio: Option<f64>,
    pub bundle_resistance: f64,
    pub uniform_resistance: bool,
    pub per_strand_rms: Vec<f64>,
    pub baseline_rms: Vec<f64>,
    pub per_strand_cc_losses: Vec<f64>,
    pub per_strand_baseline_losses: Vec<f64>,
    pub detection: DetectionSection,
    pub property: PropertySection,
    pub sharing: SharingSection,
    pub validation: ValidationSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DetectionSection {
    pub occurred: bool,
    pub threshold: f64,
    pub max_deviation: f64,
    /// One-based.
    pub deviation_strand: usize,
    pub deviation_time: f64,
    pub max_phasor_deviation: f64,
    /// One-based.
    pub phasor_strand: usize,
    pub phasor_order: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertySection {
    pub status: String,
    pub circulating: bool,
    pub margin: f64,
    pub relative_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SharingSection {
    pub grid_size: usize,
    pub masked_points: usize,
    pub max_sum_alpha_error: f64,
    pub max_sum_alpha_sq: f64,
    pub bound_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationSection {
    pub min_eigenvalue: f64,
    pub positive_semidefinite: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSection {
    pub steps_per_period: usize,
    pub settle_periods: usize,
    /// `ok`, or the reason the integration was skipped.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_relative_rms_error: Option<f64>,
}

pub fn sharing_section(shares: Option<&SharingFunctions>, grid: usize) -> SharingSection {
    match shares {
        None => SharingSection {
            grid_size: grid,
            masked_points: grid,
            max_sum_alpha_error: 0.0,
            max_sum_alpha_sq: 0.0,
            bound_holds: true,
        },
        Some(s) => {
            let w = cauchy_schwarz_witness(s);
            SharingSection {
                grid_size: grid,
                masked_points: s.masked.iter().filter(|&&m| m).count(),
                max_sum_alpha_error: w
                    .points
                    .iter()
                    .map(|p| (p.sum_alpha - 1.0).abs())
                    .fold(0.0, f64::max),
                max_sum_alpha_sq: w.worst_point().map_or(0.0, |p| p.sum_alpha_sq),
                bound_holds: w.all_pass(),
            }
        }
    }
}

pub fn report_file(
    sol: &SolvedBundle,
    analysis: &AnalysisSpec,
    losses: &LossReport,
    validation: &ValidationReport,
    sharing: SharingSection,
    oracle: Option<OracleSection>,
) -> ReportFile {
    let echo = NetworkEcho::new(&sol.network, &sol.drive, analysis);
    let d = &losses.detection;
    ReportFile {
        network: echo.network,
        drive: echo.drive,
        analysis: echo.analysis,
        report: ReportSection {
            strand_count: sol.strand_count(),
            drive_rms: losses.drive_rms,
            total_cc_losses: losses.total_cc_losses,
            total_baseline_losses: losses.total_baseline_losses,
            excess_loss: losses.excess_loss,
            loss_ratio_status: match losses.loss_ratio {
                LossRatio::Defined(_) => "defined",
                LossRatio::Undefined => "undefined",
            }
            .to_string(),
            loss_ratio: losses.loss_ratio.value(),
            bundle_resistance: losses.bundle_resistance,
            uniform_resistance: losses.uniform_resistance,
            per_strand_rms: losses.per_strand_rms.clone(),
            baseline_rms: losses.baseline_rms.clone(),
            per_strand_cc_losses: losses.per_strand_cc_losses.clone(),
            per_strand_baseline_losses: losses.per_strand_baseline_losses.clone(),
            detection: DetectionSection {
                occurred: d.occurred,
                threshold: d.threshold,
                max_deviation: d.max_deviation,
                deviation_strand: d.deviation_strand + 1,
                deviation_time: d.deviation_time,
                max_phasor_deviation: d.max_phasor_deviation,
                phasor_strand: d.phasor_strand + 1,
                phasor_order: d.phasor_order,
            },
            property: PropertySection {
                status: status_name(losses.property.status).to_string(),
                circulating: losses.property.circulating,
                margin: losses.property.margin,
                relative_margin: losses.property.relative_margin,
            },
            sharing,
            validation: ValidationSection {
                min_eigenvalue: validation.min_eigenvalue,
                positive_semidefinite: validation.positive_semidefinite(),
                warnings: validation.warnings.clone(),
            },
            oracle,
        },
    }
}
