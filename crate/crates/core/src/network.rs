//! The bundle as an electrical network: strands, their DC resistances and the
//! inductance matrix coupling them.
//!
//! Inductances either come from outside (an exported field-solution matrix)
//! or are synthesized from a [`SlotLayout`] with a one-dimensional slot
//! leakage model. [`apply_transposition`] averages that model over a
//! [`TranspositionSchedule`].

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

/// Vacuum permeability, H/m.
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;

/// Relative tolerance for `L_ij == L_ji`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Tolerance on `Σ fraction == 1` for transposition schedules.
pub const FRACTION_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("a bundle needs at least two strands, got {0}")]
    TooFewStrands(usize),
    #[error("inductance matrix has {entries} entries, expected {expected} for {n} strands")]
    DimensionMismatch {
        n: usize,
        entries: usize,
        expected: usize,
    },
    #[error("inductance matrix is not symmetric: L[{i}][{j}] = {lij}, L[{j}][{i}] = {lji}")]
    AsymmetricInductance {
        i: usize,
        j: usize,
        lij: f64,
        lji: f64,
    },
    #[error("self inductance of strand {index} is {value} H, must be positive")]
    NonPositiveSelfInductance { index: usize, value: f64 },
    #[error("resistance of strand {index} is {value} ohm, must be positive")]
    NonPositiveResistance { index: usize, value: f64 },
    #[error("non-finite value in network definition")]
    NonFinite,
    #[error("slot dimension `{name}` must be positive, got {value}")]
    NonPositiveDimension { name: &'static str, value: f64 },
    #[error("placement {index} of strand {strand} at ({x}, {y}) lies outside the slot")]
    PlacementOutOfSlot {
        strand: usize,
        index: usize,
        x: f64,
        y: f64,
    },
    #[error("layout describes {layout} strands but the network has {network}")]
    StrandCountMismatch { layout: usize, network: usize },
    #[error("transposition schedule has no segments")]
    EmptySchedule,
    #[error("segment {segment} permutation is not a bijection on 1..={n}")]
    InvalidPermutation { segment: usize, n: usize },
    #[error("segment {segment} fraction {fraction} is outside (0, 1]")]
    InvalidFraction { segment: usize, fraction: f64 },
    #[error("segment fractions sum to {0}, expected 1")]
    FractionsNotNormalized(f64),
}

/// Direction of current in a slot conductor relative to the strand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Go,
    Return,
}

impl Polarity {
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Go => 1.0,
            Polarity::Return => -1.0,
        }
    }

    /// `+1` or `-1`.
    pub fn from_sign(sign: i64) -> Option<Self> {
        match sign {
            1 => Some(Polarity::Go),
            -1 => Some(Polarity::Return),
            _ => None,
        }
    }
}

/// One slot conductor position, meters from the slot's bottom-left corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub x: f64,
    pub y: f64,
    pub polarity: Polarity,
}

impl Placement {
    pub fn new(x: f64, y: f64, polarity: Polarity) -> Self {
        Self { x, y, polarity }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Strand {
    pub label: String,
    /// DC resistance, ohms.
    pub r_dc: f64,
    /// Slot conductors the strand passes through in series, if known.
    pub path: Option<Vec<Placement>>,
}

impl Strand {
    pub fn new(label: impl Into<String>, r_dc: f64) -> Self {
        Self {
            label: label.into(),
            r_dc,
            path: None,
        }
    }
}

/// Default label for the strand at zero-based `index`.
pub fn strand_label(index: usize) -> String {
    format!("strand_{:02}", index + 1)
}

/// Dense square matrix of self and mutual inductances, henries, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct InductanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl InductanceMatrix {
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self, NetworkError> {
        if data.len() != n * n {
            return Err(NetworkError::DimensionMismatch {
                n,
                entries: data.len(),
                expected: n * n,
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(NetworkError::NonFinite);
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let data = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Smallest eigenvalue of the symmetric part.
    pub fn min_eigenvalue(&self) -> f64 {
        let m = DMatrix::from_fn(self.n, self.n, |i, j| {
            0.5 * (self.get(i, j) + self.get(j, i))
        });
        SymmetricEigen::new(m).eigenvalues.min()
    }

    /// Matrix seen by strands relabelled through `perm`: entry `(i, j)` is
    /// `self[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self::from_fn(self.n, |i, j| self.get(perm[i], perm[j]))
    }

    fn check_symmetric(&self) -> Result<(), NetworkError> {
        let tol = SYMMETRY_TOL * self.max_abs();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let (lij, lji) = (self.get(i, j), self.get(j, i));
                if (lij - lji).abs() > tol {
                    return Err(NetworkError::AsymmetricInductance { i, j, lij, lji });
                }
            }
        }
        Ok(())
    }
}

/// `n ≥ 2` strands connected in parallel plus their inductance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleNetwork {
    strands: Vec<Strand>,
    inductance: InductanceMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub strand_count: usize,
    pub min_eigenvalue: f64,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn positive_semidefinite(&self) -> bool {
        self.min_eigenvalue >= 0.0
    }
}

impl BundleNetwork {
    /// Checks shapes only; see [`validate_network`] for physical checks.
    pub fn new(strands: Vec<Strand>, inductance: InductanceMatrix) -> Result<Self, NetworkError> {
        let n = strands.len();
        if n < 2 {
            return Err(NetworkError::TooFewStrands(n));
        }
        if inductance.dim() != n {
            return Err(NetworkError::DimensionMismatch {
                n,
                entries: inductance.dim() * inductance.dim(),
                expected: n * n,
            });
        }
        if strands.iter().any(|s| !s.r_dc.is_finite()) {
            return Err(NetworkError::NonFinite);
        }
        Ok(Self {
            strands,
            inductance,
        })
    }

    /// Strands labelled `strand_01..` with the given resistances.
    pub fn from_resistances(
        resistances: &[f64],
        inductance: InductanceMatrix,
    ) -> Result<Self, NetworkError> {
        let strands = resistances
            .iter()
            .enumerate()
            .map(|(i, &r)| Strand::new(strand_label(i), r))
            .collect();
        Self::new(strands, inductance)
    }

    /// Network whose inductances come from [`slot_inductance_matrix`].
    pub fn from_layout(layout: &SlotLayout, resistances: &[f64]) -> Result<Self, NetworkError> {
        if resistances.len() != layout.strand_count() {
            return Err(NetworkError::StrandCountMismatch {
                layout: layout.strand_count(),
                network: resistances.len(),
            });
        }
        let inductance = slot_inductance_matrix(layout)?;
        let strands = resistances
            .iter()
            .zip(&layout.placements_per_strand)
            .enumerate()
            .map(|(i, (&r, path))| Strand {
                label: strand_label(i),
                r_dc: r,
                path: Some(path.clone()),
            })
            .collect();
        Self::new(strands, inductance)
    }

    pub fn strand_count(&self) -> usize {
        self.strands.len()
    }

    pub fn strands(&self) -> &[Strand] {
        &self.strands
    }

    pub fn inductance(&self) -> &InductanceMatrix {
        &self.inductance
    }

    pub fn resistances(&self) -> Vec<f64> {
        self.strands.iter().map(|s| s.r_dc).collect()
    }

    /// Parallel combination `1 / Σ(1/R_i)`.
    pub fn bundle_resistance(&self) -> f64 {
        1.0 / self.strands.iter().map(|s| 1.0 / s.r_dc).sum::<f64>()
    }

    /// True when every strand resistance equals the first within `rel_tol`.
    pub fn has_uniform_resistance(&self, rel_tol: f64) -> bool {
        let r0 = self.strands[0].r_dc;
        self.strands
            .iter()
            .all(|s| (s.r_dc - r0).abs() <= rel_tol * r0.abs())
    }

    /// Structural checks shared by every solve; no eigen decomposition.
    pub(crate) fn check(&self) -> Result<(), NetworkError> {
        for (index, s) in self.strands.iter().enumerate() {
            if !(s.r_dc > 0.0) {
                return Err(NetworkError::NonPositiveResistance {
                    index,
                    value: s.r_dc,
                });
            }
        }
        for index in 0..self.strand_count() {
            let value = self.inductance.get(index, index);
            if !(value > 0.0) {
                return Err(NetworkError::NonPositiveSelfInductance { index, value });
            }
        }
        self.inductance.check_symmetric()
    }
}

/// Confirms the network is solvable and reports the inductance spectrum.
///
/// A negative smallest eigenvalue is reported as a warning: externally
/// supplied matrices may carry numerical noise, and the solver accepts any
/// symmetric matrix.
pub fn validate_network(net: &BundleNetwork) -> Result<ValidationReport, NetworkError> {
    net.check()?;
    let min_eigenvalue = net.inductance.min_eigenvalue();
    let mut warnings = Vec::new();
    if min_eigenvalue < 0.0 {
        warnings.push(format!(
            "inductance matrix is not positive semi-definite (smallest eigenvalue {min_eigenvalue:e} H)"
        ));
    }
    Ok(ValidationReport {
        strand_count: net.strand_count(),
        min_eigenvalue,
        warnings,
    })
}

/// Rectangular open slot with the conductor positions of every strand.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotLayout {
    pub slot_width: f64,
    pub slot_depth: f64,
    pub stack_length: f64,
    /// Uniform inductance added to every matrix entry (end winding and air
    /// gap leakage), henries. Usually zero.
    pub end_leakage: f64,
    pub placements_per_strand: Vec<Vec<Placement>>,
}

impl SlotLayout {
    pub fn strand_count(&self) -> usize {
        self.placements_per_strand.len()
    }

    pub fn validate(&self) -> Result<(), NetworkError> {
        for (name, value) in [
            ("slot_width", self.slot_width),
            ("slot_depth", self.slot_depth),
            ("stack_length", self.stack_length),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(NetworkError::NonPositiveDimension { name, value });
            }
        }
        if !self.end_leakage.is_finite() {
            return Err(NetworkError::NonFinite);
        }
        if self.placements_per_strand.is_empty() {
            return Err(NetworkError::TooFewStrands(0));
        }
        for (strand, path) in self.placements_per_strand.iter().enumerate() {
            for (index, p) in path.iter().enumerate() {
                let inside = (0.0..=self.slot_width).contains(&p.x)
                    && (0.0..=self.slot_depth).contains(&p.y);
                if !inside {
                    return Err(NetworkError::PlacementOutOfSlot {
                        strand,
                        index,
                        x: p.x,
                        y: p.y,
                    });
                }
            }
        }
        Ok(())
    }

    /// Partial inductance between two slot conductors.
    ///
    /// With infinitely permeable iron the slot flux crosses horizontally, and
    /// the flux above height `y` links every conductor below it, giving
    /// `μ0 · ℓ / w · (d − max(y_p, y_q))` with sign from the polarities.
    pub fn partial_inductance(&self, p: &Placement, q: &Placement) -> f64 {
        MU0 * self.stack_length / self.slot_width
            * (self.slot_depth - p.y.max(q.y))
            * p.polarity.sign()
            * q.polarity.sign()
    }
}

/// Strand inductance matrix from the one-dimensional slot leakage model.
///
/// `L_ij` sums [`SlotLayout::partial_inductance`] over every conductor pair
/// of strands `i` and `j`, plus the layout's uniform `end_leakage`.
pub fn slot_inductance_matrix(layout: &SlotLayout) -> Result<InductanceMatrix, NetworkError> {
    layout.validate()?;
    let n = layout.strand_count();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let mut acc = layout.end_leakage;
            for p in &layout.placements_per_strand[i] {
                for q in &layout.placements_per_strand[j] {
                    acc += layout.partial_inductance(p, q);
                }
            }
            data[i * n + j] = acc;
            data[j * n + i] = acc;
        }
    }
    InductanceMatrix::from_row_major(n, data)
}

/// One length segment of a transposed winding.
#[derive(Debug, Clone, PartialEq)]
pub struct TranspositionSegment {
    /// Share of the winding length, in (0, 1].
    pub fraction: f64,
    /// Zero-based: strand `i` occupies the canonical position set of strand
    /// `permutation[i]` over this segment.
    pub permutation: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranspositionSchedule {
    segments: Vec<TranspositionSegment>,
}

impl TranspositionSchedule {
    pub fn new(segments: Vec<TranspositionSegment>) -> Result<Self, NetworkError> {
        let first = segments.first().ok_or(NetworkError::EmptySchedule)?;
        let n = first.permutation.len();
        let mut total = 0.0;
        for (segment, s) in segments.iter().enumerate() {
            if !(s.fraction > 0.0 && s.fraction <= 1.0) {
                return Err(NetworkError::InvalidFraction {
                    segment,
                    fraction: s.fraction,
                });
            }
            total += s.fraction;
            let mut seen = vec![false; n];
            let bijective = s.permutation.len() == n
                && s.permutation
                    .iter()
                    .all(|&p| p < n && !std::mem::replace(&mut seen[p], true));
            if !bijective {
                return Err(NetworkError::InvalidPermutation { segment, n });
            }
        }
        if (total - 1.0).abs() > FRACTION_SUM_TOL {
            return Err(NetworkError::FractionsNotNormalized(total));
        }
        Ok(Self { segments })
    }

    /// No transposition: a single segment with the identity permutation.
    pub fn identity(n: usize) -> Self {
        Self {
            segments: vec![TranspositionSegment {
                fraction: 1.0,
                permutation: (0..n).collect(),
            }],
        }
    }

    /// `n` equal segments; in segment `k` strand `i` takes position `(i + k) mod n`,
    /// so every strand visits every position once.
    pub fn full_cyclic(n: usize) -> Self {
        let segments = (0..n)
            .map(|k| TranspositionSegment {
                fraction: 1.0 / n as f64,
                permutation: (0..n).map(|i| (i + k) % n).collect(),
            })
            .collect();
        Self { segments }
    }

    pub fn strand_count(&self) -> usize {
        self.segments[0].permutation.len()
    }

    pub fn segments(&self) -> &[TranspositionSegment] {
        &self.segments
    }
}

/// Effective network of a transposed winding.
///
/// Segments are in series along each strand, so the effective matrix is the
/// length-weighted sum of the layout matrix seen through each segment's
/// permutation. Resistances are unchanged.
pub fn apply_transposition(
    net: &BundleNetwork,
    layout: &SlotLayout,
    schedule: &TranspositionSchedule,
) -> Result<BundleNetwork, NetworkError> {
    let n = net.strand_count();
    for count in [layout.strand_count(), schedule.strand_count()] {
        if count != n {
            return Err(NetworkError::StrandCountMismatch {
                layout: count,
                network: n,
            });
        }
    }
    // revalidates in case the schedule was built field by field
    let schedule = TranspositionSchedule::new(schedule.segments.clone())?;
    let base = slot_inductance_matrix(layout)?;
    let mut data = vec![0.0; n * n];
    for seg in schedule.segments() {
        let p = &seg.permutation;
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] += seg.fraction * base.get(p[i], p[j]);
            }
        }
    }
    BundleNetwork::new(
        net.strands.clone(),
        InductanceMatrix::from_row_major(n, data)?,
    )
}
