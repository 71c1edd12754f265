//! Seeded random bundles and drives for property sweeps.
//!
//! Generated networks have identical strand resistances (the setting in which
//! even sharing minimizes loss) and diagonally dominant inductance matrices,
//! so they are positive definite and well conditioned.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::losses::{cauchy_schwarz_witness, compute_losses, PropertyStatus};
use crate::network::{BundleNetwork, InductanceMatrix};
use crate::solver::{sharing_functions, solve_drive, SolveError, DEFAULT_ZERO_THRESHOLD};
use crate::waveform::{Harmonic, Waveform};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Drive with a random period, optional DC term and up to `max_harmonics`
/// distinct orders in `1..=15`.
pub fn random_drive<R: Rng>(rng: &mut R, max_harmonics: usize) -> Waveform {
    let period = 10f64.powf(rng.random_range(-3.0..-1.3));
    let dc = if rng.random_bool(0.3) {
        rng.random_range(-5.0..5.0)
    } else {
        0.0
    };
    let count = rng.random_range(1..=max_harmonics.max(1));
    let mut orders: Vec<u32> = (1..=15).collect();
    // partial Fisher-Yates for `count` distinct orders
    for i in 0..count {
        let j = rng.random_range(i..orders.len());
        orders.swap(i, j);
    }
    let harmonics = orders[..count]
        .iter()
        .map(|&k| Harmonic::new(k, rng.random_range(0.1..20.0), rng.random_range(-PI..PI)));
    Waveform::from_harmonics(period, dc, harmonics).expect("generated drive is valid")
}

/// Symmetric matrix with diagonal in `[lo, hi]` and off-diagonal entries
/// bounded so every row is strictly diagonally dominant.
pub fn random_dominant_inductance<R: Rng>(
    rng: &mut R,
    n: usize,
    lo: f64,
    hi: f64,
) -> InductanceMatrix {
    let diag: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        data[i * n + i] = diag[i];
        for j in i + 1..n {
            let bound = 0.95 * diag[i].min(diag[j]) / (n - 1) as f64;
            let v = rng.random_range(-0.3..1.0) * bound;
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    InductanceMatrix::from_row_major(n, data).expect("square")
}

/// `n ∈ [2, 12]`, one random resistance shared by all strands, random
/// dominant inductance matrix, drive with up to 8 harmonics.
pub fn random_theorem_case<R: Rng>(rng: &mut R) -> (BundleNetwork, Waveform) {
    let n = rng.random_range(2..=12);
    let r = 10f64.powf(rng.random_range(-2.0..0.3));
    let l = random_dominant_inductance(rng, n, 0.1e-3, 5e-3);
    let net = BundleNetwork::from_resistances(&vec![r; n], l).expect("valid network");
    (net, random_drive(rng, 8))
}

/// Bundle whose strands are interchangeable: equal resistances and a
/// symmetric circulant inductance matrix, so every strand sees the same
/// impedance to the rest of the bundle.
pub fn random_symmetric_case<R: Rng>(rng: &mut R) -> (BundleNetwork, Waveform) {
    let n = rng.random_range(2..=12);
    let r = 10f64.powf(rng.random_range(-2.0..0.3));
    let self_l = rng.random_range(0.5e-3..5e-3);
    let half = n / 2;
    let mut ring = vec![self_l; n];
    for k in 1..=half {
        let v = rng.random_range(-0.3..1.0) * 0.95 * self_l / (n - 1) as f64;
        ring[k] = v;
        ring[n - k] = v;
    }
    let l = InductanceMatrix::from_fn(n, |i, j| ring[(j + n - i) % n]);
    let net = BundleNetwork::from_resistances(&vec![r; n], l).expect("valid network");
    (net, random_drive(rng, 8))
}

/// 2–6 strands with independent resistances and a 50 Hz sinusoidal drive,
/// sized so transients decay well within ten periods.
pub fn random_oracle_case<R: Rng>(rng: &mut R) -> (BundleNetwork, Waveform) {
    let n = rng.random_range(2..=6);
    let rs: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    let l = random_dominant_inductance(rng, n, 1e-3, 5e-3);
    let net = BundleNetwork::from_resistances(&rs, l).expect("valid network");
    let drive = Waveform::sinusoid(0.02, rng.random_range(1.0..20.0), rng.random_range(-PI..PI))
        .expect("valid drive");
    (net, drive)
}

/// Aggregate result of [`run_theorem_suite`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuiteSummary {
    pub cases: usize,
    /// Cases with `P_even ≤ P` within `1e-9` relative.
    pub bound_holds: usize,
    pub detected: usize,
    /// Detected cases whose relative margin exceeds the equality tolerance.
    pub detected_strict: usize,
    pub property_holds: usize,
    pub smallest_detected_margin: Option<f64>,
    pub sharing_points: usize,
    pub sharing_failures: usize,
}

impl SuiteSummary {
    pub fn all_pass(&self) -> bool {
        self.bound_holds == self.cases
            && self.detected_strict == self.detected
            && self.property_holds == self.cases
            && self.sharing_failures == 0
    }
}

/// Solves `cases` random theorem cases and tallies the loss bound, the
/// detection/strictness equivalence and the sharing-function identities.
pub fn run_theorem_suite(
    seed: u64,
    cases: usize,
    grid_size: usize,
) -> Result<SuiteSummary, SolveError> {
    let mut rng = rng_from_seed(seed);
    let mut s = SuiteSummary {
        cases,
        ..SuiteSummary::default()
    };
    for _ in 0..cases {
        let (net, drive) = random_theorem_case(&mut rng);
        let sol = solve_drive(&net, &drive)?;
        let rep = compute_losses(&sol);
        let (p, p0) = (rep.total_cc_losses, rep.total_baseline_losses);
        if p0 <= p + 1e-9 * p.max(1e-30) {
            s.bound_holds += 1;
        }
        if rep.detection.occurred {
            s.detected += 1;
            let rel = rep.property.relative_margin;
            if rel > 1e-9 {
                s.detected_strict += 1;
            }
            s.smallest_detected_margin =
                Some(s.smallest_detected_margin.map_or(rel, |m: f64| m.min(rel)));
        }
        if rep.property.status == PropertyStatus::Holds {
            s.property_holds += 1;
        }
        let shares = sharing_functions(&sol, grid_size, DEFAULT_ZERO_THRESHOLD)?;
        let witness = cauchy_schwarz_witness(&shares);
        s.sharing_points += witness.points.len();
        s.sharing_failures += witness.points.iter().filter(|p| !p.passes).count();
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::validate_network;

    #[test]
    fn generated_networks_are_valid_and_definite() {
        let mut rng = rng_from_seed(7);
        for _ in 0..50 {
            for (net, drive) in [
                random_theorem_case(&mut rng),
                random_symmetric_case(&mut rng),
                random_oracle_case(&mut rng),
            ] {
                let report = validate_network(&net).unwrap();
                assert!(report.positive_semidefinite());
                assert!(drive.rms_parseval() > 0.0);
            }
        }
    }

    #[test]
    fn same_seed_same_cases() {
        let a = random_theorem_case(&mut rng_from_seed(3));
        let b = random_theorem_case(&mut rng_from_seed(3));
        assert_eq!(a, b);
    }

    #[test]
    fn small_suite_passes() {
        let s = run_theorem_suite(11, 40, 256).unwrap();
        assert_eq!(s.cases, 40);
        assert!(s.all_pass(), "{s:?}");
    }
}
