//! Time-domain cross-check of the phasor solution.
//!
//! The bundle is an index-1 DAE: the strand voltage equations
//! `R_i I_i + Σ_j L_ij dI_j/dt = V(t)` plus the constraint `Σ I_i = I(t)`.
//! Subtracting the last strand's equation from the others removes `V`, and
//! substituting `I_n = I − Σ_{i<n} I_i` leaves an `(n−1)`-dimensional linear
//! ODE
//!
//! ```text
//! A x' + B x = R_n I(t) − c I'(t)
//! A_ik = (L_ik − L_nk) − (L_in − L_nn)
//! B_ik = R_i δ_ik + R_n
//! c_i  = L_in − L_nn
//! ```
//!
//! integrated with the trapezoidal rule from rest.

use crate::linalg::Lu;
use crate::network::BundleNetwork;
use crate::waveform::Waveform;

use super::{SolveError, SolvedBundle};

pub const MIN_STEPS_PER_PERIOD: usize = 512;
pub const MIN_SETTLE_PERIODS: usize = 5;

/// Strand currents sampled over one period.
#[derive(Debug, Clone, PartialEq)]
pub struct TransientSamples {
    pub times: Vec<f64>,
    /// `currents[i][k]` is strand `i` at `times[k]`.
    pub currents: Vec<Vec<f64>>,
}

impl TransientSamples {
    /// Per-strand RMS of the difference to `sol`, relative to the strand's
    /// own RMS from `sol`.
    pub fn relative_rms_error(&self, sol: &SolvedBundle) -> Vec<f64> {
        self.currents
            .iter()
            .zip(&sol.per_strand)
            .map(|(samples, wave)| {
                let n = samples.len() as f64;
                let err: f64 = samples
                    .iter()
                    .zip(&self.times)
                    .map(|(&v, &t)| (v - wave.sample(t)).powi(2))
                    .sum();
                (err / n).sqrt() / wave.rms_parseval().max(1e-300)
            })
            .collect()
    }
}

/// Integrates the bundle from zero current for `settle_periods` periods and
/// returns the samples of the last one.
///
/// A network with an all-zero inductance matrix has no dynamics; it is
/// handled as the conductance divider applied pointwise.
pub fn transient_oracle(
    net: &BundleNetwork,
    drive: &Waveform,
    steps_per_period: usize,
    settle_periods: usize,
) -> Result<TransientSamples, SolveError> {
    if steps_per_period < MIN_STEPS_PER_PERIOD {
        return Err(SolveError::StepTooCoarse {
            got: steps_per_period,
            min: MIN_STEPS_PER_PERIOD,
        });
    }
    if settle_periods < MIN_SETTLE_PERIODS {
        return Err(SolveError::TooFewSettlePeriods {
            got: settle_periods,
            min: MIN_SETTLE_PERIODS,
        });
    }
    let n = net.strand_count();
    let period = drive.period();
    let h = period / steps_per_period as f64;
    let first_recorded = (settle_periods - 1) * steps_per_period;
    let times: Vec<f64> = (0..steps_per_period)
        .map(|k| (first_recorded + k) as f64 * h)
        .collect();

    if net.inductance().as_row_major().iter().all(|&v| v == 0.0) {
        return resistive(net, drive, times);
    }
    net.check()?;

    let l = net.inductance();
    let r = net.resistances();
    let last = n - 1;
    let m = last;
    let mut a = vec![0.0; m * m];
    let mut b = vec![0.0; m * m];
    let c: Vec<f64> = (0..m).map(|i| l.get(i, last) - l.get(last, last)).collect();
    for i in 0..m {
        for k in 0..m {
            a[i * m + k] = (l.get(i, k) - l.get(last, k)) - c[i];
            b[i * m + k] = r[last] + if i == k { r[i] } else { 0.0 };
        }
    }
    Lu::factor(m, a.clone()).map_err(|_| SolveError::ReducedMatrixSingular)?;

    let lhs: Vec<f64> = a.iter().zip(&b).map(|(a, b)| a / h + 0.5 * b).collect();
    let rhs_mat: Vec<f64> = a.iter().zip(&b).map(|(a, b)| a / h - 0.5 * b).collect();
    let step = Lu::factor(m, lhs).map_err(|_| SolveError::ReducedMatrixSingular)?;

    let forcing = |t: f64| -> Vec<f64> {
        let (i, di) = (drive.sample(t), drive.sample_derivative(t));
        c.iter().map(|ci| r[last] * i - ci * di).collect()
    };

    let mut currents = vec![Vec::with_capacity(steps_per_period); n];
    let mut record = |x: &[f64], t: f64| {
        let total = drive.sample(t);
        for (i, v) in x.iter().enumerate() {
            currents[i].push(*v);
        }
        currents[last].push(total - x.iter().sum::<f64>());
    };

    let total_steps = settle_periods * steps_per_period;
    let mut x = vec![0.0; m];
    let mut f_prev = forcing(0.0);
    if first_recorded == 0 {
        record(&x, 0.0);
    }
    for k in 0..total_steps - 1 {
        let t_next = (k + 1) as f64 * h;
        let f_next = forcing(t_next);
        let rhs: Vec<f64> = (0..m)
            .map(|i| {
                let nx: f64 = (0..m).map(|j| rhs_mat[i * m + j] * x[j]).sum();
                nx + 0.5 * (f_prev[i] + f_next[i])
            })
            .collect();
        x = step.solve(&rhs);
        f_prev = f_next;
        if k + 1 >= first_recorded {
            record(&x, t_next);
        }
    }
    Ok(TransientSamples { times, currents })
}

fn resistive(
    net: &BundleNetwork,
    drive: &Waveform,
    times: Vec<f64>,
) -> Result<TransientSamples, SolveError> {
    let r = net.resistances();
    if let Some((index, &value)) = r.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(crate::network::NetworkError::NonPositiveResistance { index, value }.into());
    }
    let g_total: f64 = r.iter().map(|r| 1.0 / r).sum();
    let currents = r
        .iter()
        .map(|ri| {
            let share = (1.0 / ri) / g_total;
            times.iter().map(|&t| share * drive.sample(t)).collect()
        })
        .collect();
    Ok(TransientSamples { times, currents })
}
