//! Subcommand implementations. Each returns the text to print and whether
//! the loss property held; file and config errors come back as `Err`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use strandloss::losses::{compute_losses_with, LossRatio, LossReport, PropertyStatus};
use strandloss::network::{apply_transposition, validate_network, BundleNetwork};
use strandloss::solver::{
    sharing_functions, solve_drive, transient_oracle, SharingFunctions, SolveError, SolvedBundle,
};
use strandloss::suite::run_theorem_suite;
use strandloss::waveform::Waveform;

use crate::config::{AnalysisSpec, SimulationConfig};
use crate::report::{self, fmt_f64, fmt_ratio, status_name, OracleSection};

/// Largest relative RMS disagreement with the transient integration that is
/// still reported as agreement.
pub const ORACLE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    PropertyViolated,
}

impl Outcome {
    fn from_status(s: PropertyStatus) -> Self {
        if s == PropertyStatus::Violated {
            Outcome::PropertyViolated
        } else {
            Outcome::Ok
        }
    }

    fn worst(self, other: Outcome) -> Outcome {
        if self == Outcome::PropertyViolated {
            self
        } else {
            other
        }
    }
}

#[derive(Debug, Clone)]
pub struct Run {
    pub outcome: Outcome,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

fn write_file(dir: &Path, name: &str, contents: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    files.push(path);
    Ok(())
}

fn solve_and_measure(
    cfg: &SimulationConfig,
    net: &BundleNetwork,
    drive: &Waveform,
) -> Result<(SolvedBundle, LossReport)> {
    let sol =
        solve_drive(net, drive).with_context(|| format!("{}: solve failed", cfg.path.display()))?;
    let losses = compute_losses_with(&sol, &cfg.analysis.tolerances())
        .with_context(|| format!("{}: [analysis]", cfg.path.display()))?;
    Ok((sol, losses))
}

fn shares_or_masked(
    sol: &SolvedBundle,
    analysis: &AnalysisSpec,
) -> Result<Option<SharingFunctions>> {
    match sharing_functions(sol, analysis.grid_size, analysis.zero_threshold) {
        Ok(s) => Ok(Some(s)),
        Err(SolveError::AllPointsMasked) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn run_oracle(sol: &SolvedBundle, analysis: &AnalysisSpec) -> OracleSection {
    let mut section = OracleSection {
        steps_per_period: analysis.oracle_steps,
        settle_periods: analysis.oracle_settle,
        status: "ok".to_string(),
        max_relative_rms_error: None,
    };
    match transient_oracle(
        &sol.network,
        &sol.drive,
        analysis.oracle_steps,
        analysis.oracle_settle,
    ) {
        Ok(samples) => {
            let worst = samples
                .relative_rms_error(sol)
                .into_iter()
                .fold(0.0, f64::max);
            if worst > ORACLE_TOL {
                section.status = format!("disagrees beyond {ORACLE_TOL:e}");
            }
            section.max_relative_rms_error = Some(worst);
        }
        Err(e) => section.status = format!("skipped: {e}"),
    }
    section
}

/// Solves the configured bundle and writes `report.toml`, `waveforms.csv`
/// and `sharing.csv` into `out_dir`.
pub fn solve(cfg: &SimulationConfig, out_dir: &Path) -> Result<Run> {
    let validation = validate_network(&cfg.network)
        .with_context(|| format!("{}: network invalid", cfg.path.display()))?;
    let (sol, losses) = solve_and_measure(cfg, &cfg.network, &cfg.drive)?;
    let grid = cfg.analysis.grid_size;
    let shares = shares_or_masked(&sol, &cfg.analysis)?;
    let oracle = cfg.analysis.oracle.then(|| run_oracle(&sol, &cfg.analysis));

    let mut files = Vec::new();
    write_file(
        out_dir,
        "waveforms.csv",
        &report::waveforms_csv(&sol, grid),
        &mut files,
    )?;
    write_file(
        out_dir,
        "sharing.csv",
        &report::sharing_csv(&sol, shares.as_ref(), grid),
        &mut files,
    )?;
    let file = report::report_file(
        &sol,
        &cfg.analysis,
        &losses,
        &validation,
        report::sharing_section(shares.as_ref(), grid),
        oracle.clone(),
    );
    let toml_text = toml::to_string(&file).context("cannot serialize report")?;
    write_file(out_dir, "report.toml", &toml_text, &mut files)?;

    let mut s = String::new();
    let _ = writeln!(s, "strands          {}", sol.strand_count());
    let _ = writeln!(s, "drive rms        {:.6e} A", losses.drive_rms);
    let _ = writeln!(s, "P_CC             {:.6e} W", losses.total_cc_losses);
    let _ = writeln!(s, "P_CC0            {:.6e} W", losses.total_baseline_losses);
    let _ = writeln!(s, "excess           {:.6e} W", losses.excess_loss);
    let _ = match losses.loss_ratio {
        LossRatio::Defined(r) => writeln!(s, "loss ratio       {r:.9}"),
        LossRatio::Undefined => writeln!(s, "loss ratio       undefined (zero drive)"),
    };
    let d = &losses.detection;
    let _ = if d.occurred {
        writeln!(
            s,
            "circulating      yes, {:.3e} A on strand {} at t = {:.6e} s",
            d.max_deviation,
            d.deviation_strand + 1,
            d.deviation_time
        )
    } else {
        writeln!(s, "circulating      no")
    };
    let _ = writeln!(
        s,
        "property         {}",
        status_name(losses.property.status)
    );
    if let Some(o) = &oracle {
        let _ = match o.max_relative_rms_error {
            Some(e) => writeln!(
                s,
                "oracle           {} (max relative rms error {e:.3e})",
                o.status
            ),
            None => writeln!(s, "oracle           {}", o.status),
        };
    }
    for w in &validation.warnings {
        let _ = writeln!(s, "warning          {w}");
    }
    Ok(Run {
        outcome: Outcome::from_status(losses.property.status),
        summary: s,
        files,
    })
}

/// Frequencies must be finite, non-negative and strictly ascending.
pub fn check_frequencies(freqs: &[f64]) -> Result<()> {
    if freqs.is_empty() {
        bail!("sweep needs at least one frequency");
    }
    for (k, &f) in freqs.iter().enumerate() {
        if !f.is_finite() || f < 0.0 {
            bail!(
                "frequency #{} is {f}; frequencies must be finite and >= 0",
                k + 1
            );
        }
        if k > 0 && f <= freqs[k - 1] {
            bail!(
                "frequencies must be strictly ascending ({} then {f})",
                freqs[k - 1]
            );
        }
    }
    Ok(())
}

/// The configured drive shape moved to fundamental frequency `f`; at `f = 0`
/// a DC current with the same RMS.
pub fn drive_at(drive: &Waveform, f: f64) -> Result<Waveform> {
    Ok(if f > 0.0 {
        drive.with_period(1.0 / f)?
    } else {
        Waveform::constant(drive.period(), drive.rms_parseval())?
    })
}

struct SweepRow {
    frequency: f64,
    losses: LossReport,
    imbalance: Option<f64>,
}

/// Largest `|α_i(t) − 1/n|` over unmasked points.
fn max_imbalance(shares: &SharingFunctions) -> f64 {
    let even = 1.0 / shares.strand_count() as f64;
    shares
        .unmasked()
        .flat_map(|k| shares.alpha.iter().map(move |a| (a[k] - even).abs()))
        .fold(0.0, f64::max)
}

/// Solves the bundle once per frequency and writes `sweep.csv`.
pub fn sweep(cfg: &SimulationConfig, freqs: &[f64], out_dir: &Path) -> Result<Run> {
    check_frequencies(freqs).with_context(|| format!("{}: [sweep]", cfg.path.display()))?;
    validate_network(&cfg.network)
        .with_context(|| format!("{}: network invalid", cfg.path.display()))?;
    let rows = freqs
        .par_iter()
        .map(|&f| {
            let drive = drive_at(&cfg.drive, f)?;
            let (sol, losses) = solve_and_measure(cfg, &cfg.network, &drive)?;
            let imbalance = shares_or_masked(&sol, &cfg.analysis)?.map(|s| max_imbalance(&s));
            Ok(SweepRow {
                frequency: f,
                losses,
                imbalance,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut csv =
        String::from("frequency_hz,p_cc_w,p_cc0_w,loss_ratio,max_alpha_imbalance,property\n");
    let mut s = String::from("frequency_hz    loss_ratio\n");
    let mut outcome = Outcome::Ok;
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            fmt_f64(r.frequency),
            fmt_f64(r.losses.total_cc_losses),
            fmt_f64(r.losses.total_baseline_losses),
            fmt_ratio(r.losses.loss_ratio),
            r.imbalance.map_or("undefined".to_string(), fmt_f64),
            status_name(r.losses.property.status),
        );
        let ratio = r
            .losses
            .loss_ratio
            .value()
            .map_or("undefined".to_string(), |v| format!("{v:.9}"));
        let _ = writeln!(s, "{:<15} {ratio}", r.frequency);
        outcome = outcome.worst(Outcome::from_status(r.losses.property.status));
    }
    let mut files = Vec::new();
    write_file(out_dir, "sweep.csv", &csv, &mut files)?;
    Ok(Run {
        outcome,
        summary: s,
        files,
    })
}

/// Compares the untransposed layout with every configured schedule and
/// writes `transposition.csv`.
pub fn transpose_compare(cfg: &SimulationConfig, out_dir: &Path) -> Result<Run> {
    let Some(layout) = &cfg.layout else {
        bail!(
            "{}: transpose-compare needs a [layout] section, not [network]",
            cfg.path.display()
        );
    };
    if cfg.schedules.len() < 2 {
        bail!(
            "{}: transpose-compare needs at least two [[transposition]] schedules, found {}",
            cfg.path.display(),
            cfg.schedules.len()
        );
    }
    let mut cases = vec![("untransposed".to_string(), 0, cfg.network.clone())];
    for (name, schedule) in &cfg.schedules {
        let net = apply_transposition(&cfg.network, layout, schedule)
            .with_context(|| format!("{}: schedule `{name}`", cfg.path.display()))?;
        cases.push((name.clone(), schedule.segments().len(), net));
    }

    let mut csv = String::from(
        "schedule,segments,p_cc_w,p_cc0_w,excess_loss_w,loss_ratio,circulating,property\n",
    );
    let mut s = String::from("schedule             loss_ratio\n");
    let mut outcome = Outcome::Ok;
    for (name, segments, net) in &cases {
        let (_, losses) = solve_and_measure(cfg, net, &cfg.drive)?;
        let _ = writeln!(
            csv,
            "{name},{segments},{},{},{},{},{},{}",
            fmt_f64(losses.total_cc_losses),
            fmt_f64(losses.total_baseline_losses),
            fmt_f64(losses.excess_loss),
            fmt_ratio(losses.loss_ratio),
            losses.detection.occurred,
            status_name(losses.property.status),
        );
        let ratio = losses
            .loss_ratio
            .value()
            .map_or("undefined".to_string(), |v| format!("{v:.12}"));
        let _ = writeln!(s, "{name:<20} {ratio}");
        outcome = outcome.worst(Outcome::from_status(losses.property.status));
    }
    let mut files = Vec::new();
    write_file(out_dir, "transposition.csv", &csv, &mut files)?;
    Ok(Run {
        outcome,
        summary: s,
        files,
    })
}

/// Physical checks on the configured network.
pub fn validate(cfg: &SimulationConfig) -> Result<Run> {
    let v = validate_network(&cfg.network)
        .with_context(|| format!("{}: network invalid", cfg.path.display()))?;
    let mut s = String::new();
    let _ = writeln!(s, "config           {}", cfg.path.display());
    let _ = writeln!(s, "strands          {}", v.strand_count);
    let _ = writeln!(s, "min eigenvalue   {:.6e} H", v.min_eigenvalue);
    let _ = writeln!(s, "semidefinite     {}", v.positive_semidefinite());
    let _ = writeln!(
        s,
        "uniform R        {}",
        cfg.network
            .has_uniform_resistance(strandloss::losses::UNIFORM_RESISTANCE_TOL)
    );
    let _ = writeln!(s, "drive rms        {:.6e} A", cfg.drive.rms_parseval());
    let _ = writeln!(
        s,
        "fundamental      {:.6e} Hz",
        cfg.drive.fundamental_frequency()
    );
    for w in &v.warnings {
        let _ = writeln!(s, "warning          {w}");
    }
    Ok(Run {
        outcome: Outcome::Ok,
        summary: s,
        files: Vec::new(),
    })
}

/// Runs the seeded random property suite.
pub fn self_test(seed: u64, cases: usize, grid: usize) -> Result<Run> {
    let sum = run_theorem_suite(seed, cases, grid)?;
    let mut s = String::new();
    let _ = writeln!(s, "suite seed       {seed}");
    let _ = writeln!(s, "cases            {}", sum.cases);
    let _ = writeln!(s, "bound holds      {}", sum.bound_holds);
    let _ = writeln!(
        s,
        "circulating      {} ({} strict)",
        sum.detected, sum.detected_strict
    );
    let _ = writeln!(s, "property holds   {}", sum.property_holds);
    let _ = writeln!(
        s,
        "sharing points   {} ({} failures)",
        sum.sharing_points, sum.sharing_failures
    );
    let _ = writeln!(
        s,
        "suite            {}",
        if sum.all_pass() { "pass" } else { "FAIL" }
    );
    Ok(Run {
        outcome: if sum.all_pass() {
            Outcome::Ok
        } else {
            Outcome::PropertyViolated
        },
        summary: s,
        files: Vec::new(),
    })
}
