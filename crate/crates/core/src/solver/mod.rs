//! Current sharing in a current-driven bundle.
//!
//! All strands share their two terminals, so they see one terminal voltage
//! `V`. For each harmonic of the drive the strand phasors satisfy
//!
//! ```text
//! (R_i + jωL_ii) I_i + jω Σ_{j≠i} L_ij I_j = V     i = 1..n
//! Σ_i I_i = I_total
//! ```
//!
//! which [`solve_harmonic`] solves as one dense `(n+1)×(n+1)` system. At
//! `ω = 0` the inductances drop out and the split is the conductance divider.
//! [`solve_drive`] superposes the harmonic solutions into strand waveforms.

mod transient;

use std::hash::{DefaultHasher, Hash, Hasher};

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::Lu;
use crate::network::{BundleNetwork, NetworkError};
use crate::waveform::{Harmonic, Waveform, WaveformError};

pub use transient::{transient_oracle, TransientSamples, MIN_SETTLE_PERIODS, MIN_STEPS_PER_PERIOD};

/// Default masking threshold for sharing functions, relative to drive RMS.
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-6;

/// Smallest grid accepted by [`sharing_functions`].
pub const MIN_SHARING_GRID: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("invalid network: {0}")]
    NetworkInvalid(#[from] NetworkError),
    #[error(transparent)]
    Waveform(#[from] WaveformError),
    #[error("angular frequency must be finite and non-negative, got {0}")]
    NegativeFrequency(f64),
    #[error("singular current-sharing system at harmonic order {order}")]
    SingularSystem { order: u32 },
    #[error("reduced inductance matrix of the transient model is singular")]
    ReducedMatrixSingular,
    #[error("transient oracle needs at least {min} steps per period, got {got}")]
    StepTooCoarse { got: usize, min: usize },
    #[error("transient oracle needs at least {min} settle periods, got {got}")]
    TooFewSettlePeriods { got: usize, min: usize },
    #[error("sharing function grid needs at least {min} points, got {got}")]
    GridTooSmall { got: usize, min: usize },
    #[error("total current is below the masking threshold at every grid point")]
    AllPointsMasked,
}

/// Steady-state phasors of one harmonic.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSolution {
    /// Harmonic order, 0 for the DC component.
    pub order: u32,
    pub angular_frequency: f64,
    /// Imposed total current phasor.
    pub drive_phasor: Complex64,
    pub strand_phasors: Vec<Complex64>,
    pub terminal_voltage: Complex64,
}

impl HarmonicSolution {
    pub fn total(&self) -> Complex64 {
        self.strand_phasors.iter().sum()
    }

    /// `|(R_i I_i + jω Σ_j L_ij I_j) − V|` for each strand.
    pub fn kvl_residuals(&self, net: &BundleNetwork) -> Vec<f64> {
        let l = net.inductance();
        let jw = Complex64::new(0.0, self.angular_frequency);
        net.strands()
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let coupled: Complex64 = self
                    .strand_phasors
                    .iter()
                    .enumerate()
                    .map(|(j, &c)| l.get(i, j) * c)
                    .sum();
                (s.r_dc * self.strand_phasors[i] + jw * coupled - self.terminal_voltage).norm()
            })
            .collect()
    }
}

/// Solves the strand phasors for one angular frequency and total phasor.
pub fn solve_harmonic(
    net: &BundleNetwork,
    omega: f64,
    total_phasor: Complex64,
) -> Result<HarmonicSolution, SolveError> {
    solve_order(net, 0, omega, total_phasor)
}

fn solve_order(
    net: &BundleNetwork,
    order: u32,
    omega: f64,
    total: Complex64,
) -> Result<HarmonicSolution, SolveError> {
    net.check()?;
    if !(omega.is_finite() && omega >= 0.0) {
        return Err(SolveError::NegativeFrequency(omega));
    }
    let n = net.strand_count();
    if omega == 0.0 {
        let g_total: f64 = net.strands().iter().map(|s| 1.0 / s.r_dc).sum();
        let strand_phasors = net
            .strands()
            .iter()
            .map(|s| total * ((1.0 / s.r_dc) / g_total))
            .collect();
        return Ok(HarmonicSolution {
            order,
            angular_frequency: 0.0,
            drive_phasor: total,
            strand_phasors,
            terminal_voltage: total / g_total,
        });
    }

    let l = net.inductance();
    let jw = Complex64::new(0.0, omega);
    let size = n + 1;
    let mut a = vec![Complex64::new(0.0, 0.0); size * size];
    let mut z_scale = 0.0f64;
    for (i, s) in net.strands().iter().enumerate() {
        for j in 0..n {
            let mut z = jw * l.get(i, j);
            if i == j {
                z += s.r_dc;
            }
            z_scale = z_scale.max(z.norm());
            a[i * size + j] = z;
        }
    }
    // the voltage unknown and the current-sum row are scaled by the largest
    // impedance so that every block of the matrix has comparable magnitude
    for i in 0..n {
        a[i * size + n] = Complex64::new(-z_scale, 0.0);
        a[n * size + i] = Complex64::new(z_scale, 0.0);
    }
    let mut rhs = vec![Complex64::new(0.0, 0.0); size];
    rhs[n] = total * z_scale;

    let lu = Lu::factor(size, a).map_err(|_| SolveError::SingularSystem { order })?;
    let mut x = lu.solve(&rhs);
    let terminal_voltage = x.pop().expect("voltage unknown") * z_scale;
    Ok(HarmonicSolution {
        order,
        angular_frequency: omega,
        drive_phasor: total,
        strand_phasors: x,
        terminal_voltage,
    })
}

/// Strand current waveforms of a driven bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct SolvedBundle {
    pub network: BundleNetwork,
    pub drive: Waveform,
    pub per_strand: Vec<Waveform>,
    /// DC component first, then harmonics in ascending order.
    pub per_harmonic: Vec<HarmonicSolution>,
}

impl SolvedBundle {
    pub fn strand_count(&self) -> usize {
        self.per_strand.len()
    }

    /// Hash of the drive and strand waveforms, used to tie reports to the
    /// solution they were computed from.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for w in std::iter::once(&self.drive).chain(&self.per_strand) {
            w.period().to_bits().hash(&mut h);
            w.dc().to_bits().hash(&mut h);
            for c in w.harmonics() {
                (c.order, c.amplitude.to_bits(), c.phase.to_bits()).hash(&mut h);
            }
        }
        h.finish()
    }

    /// Strand currents at `t`.
    pub fn sample_strands(&self, t: f64) -> Vec<f64> {
        self.per_strand.iter().map(|w| w.sample(t)).collect()
    }
}

/// Solves every drive component and superposes the strand currents.
pub fn solve_drive(net: &BundleNetwork, drive: &Waveform) -> Result<SolvedBundle, SolveError> {
    let n = net.strand_count();
    let mut per_harmonic = Vec::with_capacity(drive.harmonics().len() + 1);
    per_harmonic.push(solve_order(net, 0, 0.0, Complex64::new(drive.dc(), 0.0))?);
    for h in drive.harmonics() {
        per_harmonic.push(solve_order(
            net,
            h.order,
            drive.angular_frequency(h.order),
            h.phasor(),
        )?);
    }

    let per_strand = (0..n)
        .map(|i| {
            let dc = per_harmonic[0].strand_phasors[i].re;
            let harmonics = per_harmonic[1..]
                .iter()
                .map(|sol| Harmonic::from_phasor(sol.order, sol.strand_phasors[i]));
            Waveform::from_harmonics(drive.period(), dc, harmonics)
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(SolvedBundle {
        network: net.clone(),
        drive: drive.clone(),
        per_strand,
        per_harmonic,
    })
}

/// Instantaneous current shares `α_i(t) = I_i(t) / I(t)` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SharingFunctions {
    pub times: Vec<f64>,
    /// `alpha[i][k]` is the share of strand `i` at `times[k]`; meaningless
    /// where `masked[k]`.
    pub alpha: Vec<Vec<f64>>,
    /// Grid points where `|I(t)|` is too small for a share to be defined.
    pub masked: Vec<bool>,
}

impl SharingFunctions {
    pub fn strand_count(&self) -> usize {
        self.alpha.len()
    }

    /// Shares of every strand at grid point `k`.
    pub fn shares_at(&self, k: usize) -> Vec<f64> {
        self.alpha.iter().map(|a| a[k]).collect()
    }

    pub fn unmasked(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.times.len()).filter(|&k| !self.masked[k])
    }
}

/// Evaluates the sharing functions of a solution.
///
/// Points with `|I(t)| ≤ zero_threshold · I_RMS` are masked, since no finite
/// share exists where the total current crosses zero.
pub fn sharing_functions(
    sol: &SolvedBundle,
    grid_size: usize,
    zero_threshold: f64,
) -> Result<SharingFunctions, SolveError> {
    if grid_size < MIN_SHARING_GRID {
        return Err(SolveError::GridTooSmall {
            got: grid_size,
            min: MIN_SHARING_GRID,
        });
    }
    let cutoff = zero_threshold * sol.drive.rms_parseval();
    let period = sol.drive.period();
    let times: Vec<f64> = (0..grid_size)
        .map(|k| k as f64 * period / grid_size as f64)
        .collect();
    let totals: Vec<f64> = times.iter().map(|&t| sol.drive.sample(t)).collect();
    let masked: Vec<bool> = totals.iter().map(|i| !(i.abs() > cutoff)).collect();
    if masked.iter().all(|&m| m) {
        return Err(SolveError::AllPointsMasked);
    }
    let alpha = sol
        .per_strand
        .iter()
        .map(|w| {
            times
                .iter()
                .zip(&totals)
                .zip(&masked)
                .map(|((&t, &total), &m)| if m { f64::NAN } else { w.sample(t) / total })
                .collect()
        })
        .collect();
    Ok(SharingFunctions {
        times,
        alpha,
        masked,
    })
}
