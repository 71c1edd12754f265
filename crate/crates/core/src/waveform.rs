//! Periodic signals as a DC term plus a finite cosine series.
//!
//! Every current in the crate (the bundle drive, the solved strand currents,
//! the even-share baseline) is a [`Waveform`]. The convention is fixed
//! globally:
//!
//! ```text
//! w(t) = dc + Σ_h A_h · cos(2π · k_h · t / T + φ_h)
//! ```
//!
//! so the phasor of harmonic `k_h` is `A_h · e^{jφ_h}` (peak, not RMS).

use std::f64::consts::TAU;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveformError {
    #[error("period must be positive and finite, got {0}")]
    NonPositivePeriod(f64),
    #[error("harmonic order {0} appears more than once")]
    DuplicateHarmonicOrder(u32),
    #[error("harmonic order must be at least 1")]
    ZeroHarmonicOrder,
    #[error("harmonic {order} has negative amplitude {amplitude}")]
    NegativeAmplitude { order: u32, amplitude: f64 },
    #[error("non-finite value in waveform definition")]
    NonFinite,
    #[error("rms quadrature needs at least 16 samples, got {0}")]
    TooFewSamples(usize),
    #[error("cannot combine waveforms with periods {0} and {1}")]
    PeriodMismatch(f64, f64),
}

/// One cosine term of a [`Waveform`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    /// Multiple of the fundamental frequency, at least 1.
    pub order: u32,
    /// Peak amplitude in amperes.
    pub amplitude: f64,
    /// Phase in radians.
    pub phase: f64,
}

impl Harmonic {
    pub fn new(order: u32, amplitude: f64, phase: f64) -> Self {
        Self {
            order,
            amplitude,
            phase,
        }
    }

    /// Peak phasor `A · e^{jφ}`.
    pub fn phasor(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }

    /// Builds a term from a peak phasor, keeping the amplitude non-negative.
    pub fn from_phasor(order: u32, phasor: Complex64) -> Self {
        let (amplitude, phase) = phasor.to_polar();
        Self {
            order,
            amplitude,
            phase,
        }
    }
}

/// A periodic real signal: DC term plus harmonics with strictly increasing orders.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    period: f64,
    dc: f64,
    harmonics: Vec<Harmonic>,
}

impl Waveform {
    /// Builds a canonical waveform. Harmonics are sorted by order.
    pub fn from_harmonics(
        period: f64,
        dc: f64,
        harmonics: impl IntoIterator<Item = Harmonic>,
    ) -> Result<Self, WaveformError> {
        if !(period.is_finite() && period > 0.0) {
            return Err(WaveformError::NonPositivePeriod(period));
        }
        if !dc.is_finite() {
            return Err(WaveformError::NonFinite);
        }
        let mut harmonics: Vec<Harmonic> = harmonics.into_iter().collect();
        for h in &harmonics {
            if h.order == 0 {
                return Err(WaveformError::ZeroHarmonicOrder);
            }
            if !(h.amplitude.is_finite() && h.phase.is_finite()) {
                return Err(WaveformError::NonFinite);
            }
            if h.amplitude < 0.0 {
                return Err(WaveformError::NegativeAmplitude {
                    order: h.order,
                    amplitude: h.amplitude,
                });
            }
        }
        harmonics.sort_by_key(|h| h.order);
        if let Some(w) = harmonics.windows(2).find(|w| w[0].order == w[1].order) {
            return Err(WaveformError::DuplicateHarmonicOrder(w[0].order));
        }
        Ok(Self {
            period,
            dc,
            harmonics,
        })
    }

    /// Single cosine of the given order.
    pub fn sinusoid(period: f64, amplitude: f64, phase: f64) -> Result<Self, WaveformError> {
        Self::from_harmonics(period, 0.0, [Harmonic::new(1, amplitude, phase)])
    }

    /// Constant signal.
    pub fn constant(period: f64, dc: f64) -> Result<Self, WaveformError> {
        Self::from_harmonics(period, dc, [])
    }

    /// Identically zero signal.
    pub fn zero(period: f64) -> Result<Self, WaveformError> {
        Self::constant(period, 0.0)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn dc(&self) -> f64 {
        self.dc
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    pub fn fundamental_frequency(&self) -> f64 {
        1.0 / self.period
    }

    /// Angular frequency of a harmonic order, rad/s.
    pub fn angular_frequency(&self, order: u32) -> f64 {
        TAU * f64::from(order) / self.period
    }

    /// Highest harmonic order present, 0 for a DC-only signal.
    pub fn max_order(&self) -> u32 {
        self.harmonics.last().map_or(0, |h| h.order)
    }

    /// Peak phasor for `order`; zero when the order is absent.
    pub fn phasor(&self, order: u32) -> Complex64 {
        self.harmonics
            .binary_search_by_key(&order, |h| h.order)
            .map_or(Complex64::new(0.0, 0.0), |i| self.harmonics[i].phasor())
    }

    /// True when the DC term and every amplitude are exactly zero.
    pub fn is_zero(&self) -> bool {
        self.dc == 0.0 && self.harmonics.iter().all(|h| h.amplitude == 0.0)
    }

    /// Evaluates the signal at `t`, reduced modulo the period.
    pub fn sample(&self, t: f64) -> f64 {
        let cycles = (t / self.period).rem_euclid(1.0);
        self.harmonics.iter().fold(self.dc, |acc, h| {
            let turns = (f64::from(h.order) * cycles).fract();
            acc + h.amplitude * (TAU * turns + h.phase).cos()
        })
    }

    /// Time derivative at `t`, A/s.
    pub fn sample_derivative(&self, t: f64) -> f64 {
        let cycles = (t / self.period).rem_euclid(1.0);
        self.harmonics.iter().fold(0.0, |acc, h| {
            let turns = (f64::from(h.order) * cycles).fract();
            let omega = self.angular_frequency(h.order);
            acc - h.amplitude * omega * (TAU * turns + h.phase).sin()
        })
    }

    /// Exact RMS of the series: `sqrt(dc² + Σ A²/2)`.
    pub fn rms_parseval(&self) -> f64 {
        self.mean_square().sqrt()
    }

    /// `dc² + Σ A²/2`, the mean of the squared signal over one period.
    pub fn mean_square(&self) -> f64 {
        self.dc * self.dc
            + self
                .harmonics
                .iter()
                .map(|h| 0.5 * h.amplitude * h.amplitude)
                .sum::<f64>()
    }

    /// Mean of the product of two waveforms over one period.
    ///
    /// Both waveforms must share the period; terms of orders present in only
    /// one of them contribute nothing.
    pub fn mean_product(&self, other: &Waveform) -> Result<f64, WaveformError> {
        self.check_period(other)?;
        let mut acc = self.dc * other.dc;
        for h in &self.harmonics {
            let p = other.phasor(h.order);
            acc += 0.5 * (h.phasor() * p.conj()).re;
        }
        Ok(acc)
    }

    /// RMS by equal-weight quadrature of `w(t)²` over one period.
    ///
    /// On a uniform periodic grid the trapezoidal rule reduces to the plain
    /// sample mean; it is exact once `n_samples > 2 · max_order`.
    pub fn rms_integrate(&self, n_samples: usize) -> Result<f64, WaveformError> {
        if n_samples < 16 {
            return Err(WaveformError::TooFewSamples(n_samples));
        }
        let dt = self.period / n_samples as f64;
        let sum: f64 = (0..n_samples)
            .map(|k| {
                let v = self.sample(k as f64 * dt);
                v * v
            })
            .sum();
        Ok((sum / n_samples as f64).sqrt())
    }

    /// `coeff_a · a + coeff_b · b`, combined per harmonic as complex phasors.
    ///
    /// Orders whose combined phasor cancels to rounding level are dropped.
    pub fn linear_combine(
        coeff_a: f64,
        a: &Waveform,
        coeff_b: f64,
        b: &Waveform,
    ) -> Result<Waveform, WaveformError> {
        a.check_period(b)?;
        let mut out = Vec::with_capacity(a.harmonics.len() + b.harmonics.len());
        let (mut i, mut j) = (0, 0);
        while i < a.harmonics.len() || j < b.harmonics.len() {
            let order_a = a.harmonics.get(i).map_or(u32::MAX, |h| h.order);
            let order_b = b.harmonics.get(j).map_or(u32::MAX, |h| h.order);
            let order = order_a.min(order_b);
            let mut phasor = Complex64::new(0.0, 0.0);
            let mut magnitude = 0.0;
            if order_a == order {
                phasor += coeff_a * a.harmonics[i].phasor();
                magnitude += (coeff_a * a.harmonics[i].amplitude).abs();
                i += 1;
            }
            if order_b == order {
                phasor += coeff_b * b.harmonics[j].phasor();
                magnitude += (coeff_b * b.harmonics[j].amplitude).abs();
                j += 1;
            }
            if phasor.norm() > 4.0 * f64::EPSILON * magnitude {
                out.push(Harmonic::from_phasor(order, phasor));
            }
        }
        Ok(Waveform {
            period: a.period,
            dc: coeff_a * a.dc + coeff_b * b.dc,
            harmonics: out,
        })
    }

    /// `coeff · self`.
    pub fn scaled(&self, coeff: f64) -> Waveform {
        let harmonics = if coeff == 0.0 {
            Vec::new()
        } else {
            self.harmonics
                .iter()
                .map(|h| Harmonic::from_phasor(h.order, coeff * h.phasor()))
                .collect()
        };
        Waveform {
            period: self.period,
            dc: coeff * self.dc,
            harmonics,
        }
    }

    /// Same harmonic content over a different period.
    pub fn with_period(&self, period: f64) -> Result<Waveform, WaveformError> {
        Waveform::from_harmonics(period, self.dc, self.harmonics.iter().copied())
    }

    fn check_period(&self, other: &Waveform) -> Result<(), WaveformError> {
        if self.period == other.period {
            Ok(())
        } else {
            Err(WaveformError::PeriodMismatch(self.period, other.period))
        }
    }
}
