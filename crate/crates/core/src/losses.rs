//! Copper losses of a solved bundle, circulating-current detection, and the
//! loss-minimality check for even current sharing.
//!
//! With identical strands (equal `R_DC`), loss in the bundle is minimal
//! exactly when every strand carries `I(t)/n`: at each instant the shares
//! `α_i = I_i/I` sum to one, so by Cauchy-Schwarz `Σ α_i² ≥ 1/n` with equality
//! only for `α_i = 1/n`. Multiplying by `R·I(t)²` and averaging over a period
//! gives `P_even ≤ P`, strict whenever some strand deviates from the even
//! share. [`check_fundamental_property`] verifies that equivalence on a
//! computed solution; a violation can only come from a numerical defect.
//!
//! With unequal resistances the even split is no longer the loss minimum
//! (the conductance split is), and the check reports
//! [`PropertyStatus::NotApplicable`].

use thiserror::Error;

use crate::solver::{SharingFunctions, SolvedBundle};
use crate::waveform::Waveform;

/// Points per period scanned by [`detect_circulating`].
pub const DETECTION_GRID: usize = 1024;

/// Relative spread of strand resistances still treated as identical.
pub const UNIFORM_RESISTANCE_TOL: f64 = 1e-9;

/// Tolerance on `|Σα_i − 1|` in [`cauchy_schwarz_witness`].
pub const SHARE_SUM_TOL: f64 = 1e-9;

/// Tolerance on `Σα_i² − 1/n ≥ 0` in [`cauchy_schwarz_witness`].
pub const SHARE_SQUARES_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LossError {
    #[error("a bundle needs at least two strands, got {0}")]
    InvalidStrandCount(usize),
    #[error("tolerances must be finite and non-negative")]
    InvalidTolerance,
    #[error("loss report and detection verdict come from different solutions")]
    InconsistentInputs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute deviation threshold for detection, amperes.
    pub abs_tol: f64,
    /// Deviation threshold relative to the even-share RMS `I_RMS / n`.
    pub rel_tol: f64,
    /// Relative tolerance for `P == P_even` when no circulation is detected.
    pub equality_tol: f64,
    /// Minimum excess loss, watts, required when circulation is detected.
    pub margin_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: 1e-6,
            equality_tol: 1e-9,
            margin_floor: 0.0,
        }
    }
}

impl Tolerances {
    fn check(&self) -> Result<(), LossError> {
        let ok = [
            self.abs_tol,
            self.rel_tol,
            self.equality_tol,
            self.margin_floor,
        ]
        .iter()
        .all(|v| v.is_finite() && *v >= 0.0);
        if ok {
            Ok(())
        } else {
            Err(LossError::InvalidTolerance)
        }
    }
}

/// Current of one strand when the total is shared evenly: `I(t) / n`.
pub fn baseline_strand_current(drive: &Waveform, n: usize) -> Result<Waveform, LossError> {
    if n < 2 {
        return Err(LossError::InvalidStrandCount(n));
    }
    Ok(drive.scaled(1.0 / n as f64))
}

/// Ratio `P / P_even`, undefined when the drive is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossRatio {
    Defined(f64),
    Undefined,
}

impl LossRatio {
    pub fn value(self) -> Option<f64> {
        match self {
            LossRatio::Defined(v) => Some(v),
            LossRatio::Undefined => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub occurred: bool,
    /// Largest `|I_i(t) − I(t)/n|` on the scan grid, amperes.
    pub max_deviation: f64,
    pub deviation_strand: usize,
    pub deviation_time: f64,
    /// Largest `|Î_i,h − Î_h/n|` over all harmonics, peak amperes.
    pub max_phasor_deviation: f64,
    pub phasor_strand: usize,
    pub phasor_order: u32,
    /// Deviation above which circulation is declared, amperes.
    pub threshold: f64,
    source: u64,
}

/// Decides whether any strand departs from the even share `I(t)/n`.
///
/// Both the time grid and the per-harmonic phasors are scanned; either one
/// exceeding `abs_tol + rel_tol · I_RMS / n` counts as circulation.
pub fn detect_circulating(
    sol: &SolvedBundle,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Detection, LossError> {
    Tolerances {
        abs_tol,
        rel_tol,
        ..Tolerances::default()
    }
    .check()?;
    let n = sol.strand_count();
    let nf = n as f64;
    let threshold = abs_tol + rel_tol * sol.drive.rms_parseval() / nf;
    let period = sol.drive.period();

    let mut max_deviation = 0.0;
    let (mut deviation_strand, mut deviation_time) = (0, 0.0);
    for (i, strand) in sol.per_strand.iter().enumerate() {
        let dev = deviation(strand, &sol.drive, n);
        for k in 0..DETECTION_GRID {
            let t = k as f64 * period / DETECTION_GRID as f64;
            let d = dev.sample(t).abs();
            if d > max_deviation {
                max_deviation = d;
                deviation_strand = i;
                deviation_time = t;
            }
        }
    }

    let mut max_phasor_deviation = 0.0;
    let (mut phasor_strand, mut phasor_order) = (0, 0);
    for h in &sol.per_harmonic {
        let even = h.drive_phasor / nf;
        for (i, p) in h.strand_phasors.iter().enumerate() {
            let d = (p - even).norm();
            if d > max_phasor_deviation {
                max_phasor_deviation = d;
                phasor_strand = i;
                phasor_order = h.order;
            }
        }
    }

    Ok(Detection {
        occurred: max_deviation > threshold || max_phasor_deviation > threshold,
        max_deviation,
        deviation_strand,
        deviation_time,
        max_phasor_deviation,
        phasor_strand,
        phasor_order,
        threshold,
        source: sol.fingerprint(),
    })
}

fn deviation(strand: &Waveform, drive: &Waveform, n: usize) -> Waveform {
    Waveform::linear_combine(1.0, strand, -1.0 / n as f64, drive)
        .expect("strand and drive share the period")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyStatus {
    Holds,
    Violated,
    /// Strand resistances differ, so even sharing is not the loss minimum.
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropertyVerdict {
    pub status: PropertyStatus,
    /// Whether the detection branch (circulation present) was checked.
    pub circulating: bool,
    /// `P − P_even`, watts.
    pub margin: f64,
    /// `(P − P_even) / P_even`, zero for a zero drive.
    pub relative_margin: f64,
}

impl PropertyVerdict {
    pub fn holds(&self) -> bool {
        self.status != PropertyStatus::Violated
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub drive_rms: f64,
    /// `I_RMS,i` of every strand.
    pub per_strand_rms: Vec<f64>,
    /// `I_RMS / n` for every strand.
    pub baseline_rms: Vec<f64>,
    /// `R_i · I_RMS,i²`, watts.
    pub per_strand_cc_losses: Vec<f64>,
    /// `R_i · (I_RMS/n)²`, watts.
    pub per_strand_baseline_losses: Vec<f64>,
    pub total_cc_losses: f64,
    pub total_baseline_losses: f64,
    /// `total_cc_losses − total_baseline_losses`, evaluated from the strand
    /// deviations `I_i − I/n` so that small imbalances survive rounding.
    pub excess_loss: f64,
    pub loss_ratio: LossRatio,
    /// Parallel combination of the strand resistances.
    pub bundle_resistance: f64,
    pub uniform_resistance: bool,
    pub detection: Detection,
    pub property: PropertyVerdict,
    source: u64,
}

/// Losses with default tolerances.
pub fn compute_losses(sol: &SolvedBundle) -> LossReport {
    compute_losses_with(sol, &Tolerances::default()).expect("default tolerances are valid")
}

pub fn compute_losses_with(sol: &SolvedBundle, tol: &Tolerances) -> Result<LossReport, LossError> {
    tol.check()?;
    let n = sol.strand_count();
    let nf = n as f64;
    let resistances = sol.network.resistances();
    let drive_rms = sol.drive.rms_parseval();
    let drive_ms = sol.drive.mean_square();

    let per_strand_rms: Vec<f64> = sol.per_strand.iter().map(Waveform::rms_parseval).collect();
    let baseline_rms = vec![drive_rms / nf; n];
    let per_strand_cc_losses: Vec<f64> = sol
        .per_strand
        .iter()
        .zip(&resistances)
        .map(|(w, r)| r * w.mean_square())
        .collect();
    let per_strand_baseline_losses: Vec<f64> = resistances
        .iter()
        .map(|r| r * drive_ms / (nf * nf))
        .collect();
    let total_cc_losses: f64 = per_strand_cc_losses.iter().sum();
    let total_baseline_losses: f64 = per_strand_baseline_losses.iter().sum();

    // R_i·ms(I/n + d_i) − R_i·ms(I/n) = R_i·(ms(d_i) + 2/n·<I, d_i>)
    let excess_loss: f64 = sol
        .per_strand
        .iter()
        .zip(&resistances)
        .map(|(w, r)| {
            let d = deviation(w, &sol.drive, n);
            let cross = sol.drive.mean_product(&d).expect("same period");
            r * (d.mean_square() + 2.0 / nf * cross)
        })
        .sum();

    let loss_ratio = if total_baseline_losses > 0.0 {
        LossRatio::Defined(total_cc_losses / total_baseline_losses)
    } else {
        LossRatio::Undefined
    };

    let detection = detect_circulating(sol, tol.abs_tol, tol.rel_tol)?;
    let mut report = LossReport {
        drive_rms,
        per_strand_rms,
        baseline_rms,
        per_strand_cc_losses,
        per_strand_baseline_losses,
        total_cc_losses,
        total_baseline_losses,
        excess_loss,
        loss_ratio,
        bundle_resistance: sol.network.bundle_resistance(),
        uniform_resistance: sol.network.has_uniform_resistance(UNIFORM_RESISTANCE_TOL),
        detection: detection.clone(),
        property: PropertyVerdict {
            status: PropertyStatus::NotApplicable,
            circulating: detection.occurred,
            margin: excess_loss,
            relative_margin: 0.0,
        },
        source: sol.fingerprint(),
    };
    report.property = check_fundamental_property_with(&report, &detection, tol)?;
    Ok(report)
}

/// Checks "circulation ⇔ P_even < P" on one solution with default tolerances.
pub fn check_fundamental_property(
    report: &LossReport,
    detection: &Detection,
) -> Result<PropertyVerdict, LossError> {
    check_fundamental_property_with(report, detection, &Tolerances::default())
}

pub fn check_fundamental_property_with(
    report: &LossReport,
    detection: &Detection,
    tol: &Tolerances,
) -> Result<PropertyVerdict, LossError> {
    tol.check()?;
    if report.source != detection.source {
        return Err(LossError::InconsistentInputs);
    }
    let margin = report.excess_loss;
    let relative_margin = if report.total_baseline_losses > 0.0 {
        margin / report.total_baseline_losses
    } else {
        0.0
    };
    let status = if !report.uniform_resistance {
        PropertyStatus::NotApplicable
    } else {
        let ok = if detection.occurred {
            margin > tol.margin_floor
        } else {
            margin.abs() <= tol.equality_tol * report.total_cc_losses
        };
        if ok {
            PropertyStatus::Holds
        } else {
            PropertyStatus::Violated
        }
    };
    Ok(PropertyVerdict {
        status,
        circulating: detection.occurred,
        margin,
        relative_margin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessPoint {
    /// Index into the sharing-function grid.
    pub index: usize,
    pub time: f64,
    pub sum_alpha: f64,
    pub sum_alpha_sq: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CauchySchwarzWitness {
    pub strand_count: usize,
    /// One entry per unmasked grid point.
    pub points: Vec<WitnessPoint>,
    /// Position in `points` of the largest `Σα_i²`, the worst imbalance.
    pub worst: Option<usize>,
}

impl CauchySchwarzWitness {
    pub fn all_pass(&self) -> bool {
        self.points.iter().all(|p| p.passes)
    }

    pub fn worst_point(&self) -> Option<&WitnessPoint> {
        self.worst.map(|k| &self.points[k])
    }
}

/// Checks `Σα_i = 1` and `Σα_i² ≥ 1/n` at every unmasked grid point.
pub fn cauchy_schwarz_witness(shares: &SharingFunctions) -> CauchySchwarzWitness {
    let n = shares.strand_count();
    let floor = 1.0 / n as f64;
    let mut points: Vec<WitnessPoint> = Vec::new();
    let mut worst: Option<usize> = None;
    for k in shares.unmasked() {
        let (sum_alpha, sum_alpha_sq) = shares
            .alpha
            .iter()
            .fold((0.0, 0.0), |(s, q), a| (s + a[k], q + a[k] * a[k]));
        let passes =
            (sum_alpha - 1.0).abs() <= SHARE_SUM_TOL && sum_alpha_sq - floor >= -SHARE_SQUARES_TOL;
        if worst.is_none_or(|w: usize| sum_alpha_sq > points[w].sum_alpha_sq) {
            worst = Some(points.len());
        }
        points.push(WitnessPoint {
            index: k,
            time: shares.times[k],
            sum_alpha,
            sum_alpha_sq,
            passes,
        });
    }
    CauchySchwarzWitness {
        strand_count: n,
        points,
        worst,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{BundleNetwork, InductanceMatrix};
    use crate::solver::{sharing_functions, solve_drive, DEFAULT_ZERO_THRESHOLD};
    use crate::waveform::Harmonic;
    use num_complex::Complex64;
    use std::f64::consts::TAU;

    const T: f64 = 0.02;

    fn uniform(n: usize, r: f64) -> BundleNetwork {
        let l = InductanceMatrix::from_fn(n, |i, j| if i == j { 1e-3 } else { 0.4e-3 });
        BundleNetwork::from_resistances(&vec![r; n], l).unwrap()
    }

    fn divider_net() -> BundleNetwork {
        let l = InductanceMatrix::from_row_major(2, vec![1e-3, 0.5e-3, 0.5e-3, 2e-3]).unwrap();
        BundleNetwork::from_resistances(&[1.0, 1.0], l).unwrap()
    }

    /// Closed-form strand phasors of the two-strand divider at 50 Hz, 10 A.
    fn divider_phasors() -> [Complex64; 2] {
        let jw = Complex64::new(0.0, TAU * 50.0);
        let (z1, z2, zm) = (1.0 + jw * 1e-3, 1.0 + jw * 2e-3, jw * 0.5e-3);
        let total = Complex64::new(10.0, 0.0);
        let i1 = total * (z2 - zm) / (z1 + z2 - 2.0 * zm);
        [i1, total - i1]
    }

    #[test]
    fn baseline_current_scales_drive() {
        let s = Waveform::sinusoid(T, 10.0, 0.0).unwrap();
        let b = baseline_strand_current(&s, 2).unwrap();
        assert!((b.harmonics()[0].amplitude - 5.0).abs() < 1e-15);
        assert!(baseline_strand_current(&Waveform::zero(T).unwrap(), 4)
            .unwrap()
            .is_zero());
        let d = baseline_strand_current(&Waveform::constant(T, 7.0).unwrap(), 7).unwrap();
        assert!((d.dc() - 1.0).abs() < 1e-15);
        assert_eq!(
            baseline_strand_current(&s, 1),
            Err(LossError::InvalidStrandCount(1))
        );
    }

    #[test]
    fn symmetric_pair_losses() {
        let sol =
            solve_drive(&uniform(2, 1.0), &Waveform::sinusoid(T, 10.0, 0.0).unwrap()).unwrap();
        let rep = compute_losses(&sol);
        let strand_rms = 5.0 / 2f64.sqrt();
        for r in &rep.per_strand_rms {
            assert!((r - strand_rms).abs() < 1e-12);
        }
        for p in &rep.per_strand_cc_losses {
            assert!((p - 12.5).abs() < 1e-12);
        }
        assert!((rep.total_cc_losses - 25.0).abs() < 1e-12);
        assert!((rep.total_baseline_losses - 25.0).abs() < 1e-12);
        assert!((rep.loss_ratio.value().unwrap() - 1.0).abs() < 1e-12);
        assert!(!rep.detection.occurred);
        assert_eq!(rep.property.status, PropertyStatus::Holds);
    }

    #[test]
    fn divider_losses_match_closed_form() {
        let sol = solve_drive(&divider_net(), &Waveform::sinusoid(T, 10.0, 0.0).unwrap()).unwrap();
        let rep = compute_losses(&sol);
        let [i1, i2] = divider_phasors();
        let p_cc = 0.5 * (i1.norm_sqr() + i2.norm_sqr());
        let p_even = 2.0 * 0.5 * 25.0;
        assert!((rep.total_cc_losses - p_cc).abs() <= 1e-12 * p_cc);
        assert!((rep.total_baseline_losses - p_even).abs() <= 1e-12 * p_even);
        assert!(rep.total_cc_losses > rep.total_baseline_losses);
        assert!((rep.excess_loss - (p_cc - p_even)).abs() <= 1e-12 * p_cc);
        assert!(rep.detection.occurred);
        assert_eq!(rep.property.status, PropertyStatus::Holds);
        assert!(rep.property.circulating);
    }

    #[test]
    fn zero_drive_is_flagged() {
        let sol = solve_drive(&divider_net(), &Waveform::zero(T).unwrap()).unwrap();
        let rep = compute_losses(&sol);
        assert_eq!(rep.total_cc_losses, 0.0);
        assert_eq!(rep.total_baseline_losses, 0.0);
        assert_eq!(rep.loss_ratio, LossRatio::Undefined);
        assert!(!rep.detection.occurred);
        assert_eq!(rep.detection.max_deviation, 0.0);
        assert_eq!(rep.property.status, PropertyStatus::Holds);
    }

    #[test]
    fn detection_locates_deviation() {
        let sol = solve_drive(&divider_net(), &Waveform::sinusoid(T, 10.0, 0.0).unwrap()).unwrap();
        let det = detect_circulating(&sol, 0.0, 1e-6).unwrap();
        let [i1, _] = divider_phasors();
        let dev = (i1 - Complex64::new(5.0, 0.0)).norm();
        assert!((det.max_phasor_deviation - dev).abs() < 1e-12);
        assert!(det.max_deviation <= dev + 1e-12);
        assert!(
            det.max_deviation >= dev * (std::f64::consts::PI / DETECTION_GRID as f64).cos() - 1e-12
        );
        assert_eq!(det.phasor_order, 1);
        assert!(detect_circulating(&sol, -1.0, 0.0).is_err());
        // a threshold above the deviation suppresses detection
        assert!(!detect_circulating(&sol, dev * 1.01, 0.0).unwrap().occurred);
    }

    #[test]
    fn unequal_resistances_are_not_applicable() {
        let l = InductanceMatrix::from_fn(3, |i, j| if i == j { 1e-3 } else { 0.2e-3 });
        let net = BundleNetwork::from_resistances(&[1.0, 2.0, 4.0], l).unwrap();
        let sol = solve_drive(&net, &Waveform::constant(T, 7.0).unwrap()).unwrap();
        let rep = compute_losses(&sol);
        // conductance split beats the even split: 28 W vs 343/9 W
        assert!((rep.total_cc_losses - 28.0).abs() < 1e-12);
        assert!((rep.total_baseline_losses - 343.0 / 9.0).abs() < 1e-12);
        assert!(rep.detection.occurred);
        assert_eq!(rep.property.status, PropertyStatus::NotApplicable);
        assert!(rep.property.holds());
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let a = solve_drive(&divider_net(), &Waveform::sinusoid(T, 10.0, 0.0).unwrap()).unwrap();
        let b = solve_drive(&uniform(2, 1.0), &Waveform::sinusoid(T, 10.0, 0.0).unwrap()).unwrap();
        let rep = compute_losses(&a);
        let det = detect_circulating(&b, 0.0, 1e-6).unwrap();
        assert_eq!(
            check_fundamental_property(&rep, &det),
            Err(LossError::InconsistentInputs)
        );
        let same = detect_circulating(&a, 0.0, 1e-6).unwrap();
        assert!(check_fundamental_property(&rep, &same).unwrap().holds());
    }

    #[test]
    fn baseline_decomposition() {
        let l = InductanceMatrix::from_fn(3, |i, j| if i == j { 1e-3 } else { 0.1e-3 });
        let rs = [0.5, 0.9, 1.3];
        let net = BundleNetwork::from_resistances(&rs, l).unwrap();
        let drive = Waveform::from_harmonics(
            T,
            1.5,
            [Harmonic::new(1, 8.0, 0.2), Harmonic::new(7, 1.0, 0.0)],
        )
        .unwrap();
        let rep = compute_losses(&solve_drive(&net, &drive).unwrap());
        let expect = rs.iter().sum::<f64>() / 9.0 * drive.rms_parseval().powi(2);
        assert!((rep.total_baseline_losses - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn witness_even_sharing_hits_equality() {
        let sol =
            solve_drive(&uniform(4, 1.0), &Waveform::sinusoid(T, 10.0, 0.4).unwrap()).unwrap();
        let shares = sharing_functions(&sol, 256, DEFAULT_ZERO_THRESHOLD).unwrap();
        let w = cauchy_schwarz_witness(&shares);
        assert!(w.all_pass());
        for p in &w.points {
            assert!((p.sum_alpha_sq - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn witness_one_strand_carries_all() {
        let shares = SharingFunctions {
            times: vec![0.0],
            alpha: vec![vec![1.0], vec![0.0]],
            masked: vec![false],
        };
        let w = cauchy_schwarz_witness(&shares);
        assert!(w.all_pass());
        assert_eq!(w.points[0].sum_alpha_sq, 1.0);
    }

    #[test]
    fn witness_flags_closed_form_worst_instant() {
        let sol = solve_drive(&divider_net(), &Waveform::sinusoid(T, 10.0, 0.0).unwrap()).unwrap();
        let grid = 512;
        let shares = sharing_functions(&sol, grid, DEFAULT_ZERO_THRESHOLD).unwrap();
        let w = cauchy_schwarz_witness(&shares);
        assert!(w.all_pass());

        // closed-form α on the same grid
        let [i1, i2] = divider_phasors();
        let omega = TAU * 50.0;
        let closed = |t: f64| {
            let total = 10.0 * (omega * t).cos();
            let a1 = i1.norm() * (omega * t + i1.arg()).cos() / total;
            let a2 = i2.norm() * (omega * t + i2.arg()).cos() / total;
            a1 * a1 + a2 * a2
        };
        let best = shares
            .unmasked()
            .max_by(|&a, &b| closed(shares.times[a]).total_cmp(&closed(shares.times[b])))
            .unwrap();
        assert_eq!(w.worst_point().unwrap().index, best);
        // the proof's vectors: a = (1/n, ..), b = α; a·b = 1/n, |a|² = 1/n
        for p in &w.points {
            let ab = p.sum_alpha / 2.0;
            assert!(ab * ab <= 0.5 * p.sum_alpha_sq + 1e-12);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn net_and_drive() -> impl Strategy<Value = (BundleNetwork, Waveform)> {
            (2usize..7)
                .prop_flat_map(|n| {
                    (
                        Just(n),
                        0.05f64..2.0,
                        prop::collection::vec(0.5e-3f64..5e-3, n),
                        prop::collection::vec(-1.0f64..1.0, n * n),
                        prop::collection::btree_map(1u32..12, (0.1f64..10.0, -3.0f64..3.0), 1..5),
                        -2.0f64..2.0,
                    )
                })
                .prop_map(|(n, r, diag, off, hs, dc)| {
                    let l = InductanceMatrix::from_fn(n, |i, j| {
                        if i == j {
                            diag[i]
                        } else {
                            let (a, b) = (i.min(j), i.max(j));
                            0.9 * off[a * n + b] * diag[a].min(diag[b]) / n as f64
                        }
                    });
                    let net = BundleNetwork::from_resistances(&vec![r; n], l).unwrap();
                    let drive = Waveform::from_harmonics(
                        0.02,
                        dc,
                        hs.into_iter().map(|(k, (a, p))| Harmonic::new(k, a, p)),
                    )
                    .unwrap();
                    (net, drive)
                })
        }

        proptest! {
            #[test]
            fn excess_matches_direct_difference((net, drive) in net_and_drive()) {
                let rep = compute_losses(&solve_drive(&net, &drive).unwrap());
                let direct = rep.total_cc_losses - rep.total_baseline_losses;
                prop_assert!((rep.excess_loss - direct).abs() <= 1e-12 * rep.total_cc_losses);
                prop_assert!(rep.total_baseline_losses <= rep.total_cc_losses * (1.0 + 1e-9));
                prop_assert!(rep.property.holds());
            }

            #[test]
            fn loss_ratio_is_scale_invariant((net, drive) in net_and_drive(), k in 0.01f64..100.0) {
                let a = compute_losses(&solve_drive(&net, &drive).unwrap());
                let b = compute_losses(&solve_drive(&net, &drive.scaled(k)).unwrap());
                prop_assert!((b.total_cc_losses - k * k * a.total_cc_losses).abs() <= 1e-10 * b.total_cc_losses);
                prop_assert!((b.total_baseline_losses - k * k * a.total_baseline_losses).abs() <= 1e-10 * b.total_baseline_losses);
                let (ra, rb) = (a.loss_ratio.value().unwrap(), b.loss_ratio.value().unwrap());
                prop_assert!((ra - rb).abs() <= 1e-10 * ra);
            }
        }
    }
}
