//! Current sharing and copper losses in bundles of parallel-connected strands.
//!
//! A winding built from `n` strands in parallel only reaches its minimum
//! copper loss when every strand carries exactly `I(t)/n`. Any difference in
//! strand inductance (position in the slot, coupling to neighbours) pushes
//! current around the loop formed by two strands, and that circulating
//! current always costs loss.
//!
//! The crate is organised bottom-up:
//!
//! * [`waveform`]: periodic currents as finite cosine series, RMS by Parseval
//!   and by quadrature.
//! * [`network`]: strands, inductance matrices, slot-leakage synthesis and
//!   transposition.
//! * [`solver`]: per-harmonic phasor solve, strand waveforms, sharing
//!   functions and a transient cross-check.
//! * [`losses`]: strand and bundle losses, circulation detection and the
//!   even-sharing loss bound.
//! * [`suite`]: seeded random cases for property sweeps.
//!
//! ```
//! use strandloss::prelude::*;
//!
//! let l = InductanceMatrix::from_row_major(2, vec![1e-3, 0.5e-3, 0.5e-3, 2e-3])?;
//! let net = BundleNetwork::from_resistances(&[1.0, 1.0], l)?;
//! let drive = Waveform::sinusoid(0.02, 10.0, 0.0)?;
//!
//! let sol = solve_drive(&net, &drive)?;
//! let report = compute_losses(&sol);
//! assert!(report.detection.occurred);
//! assert!(report.loss_ratio.value().unwrap() > 1.0);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod linalg;
pub mod losses;
pub mod network;
pub mod solver;
pub mod suite;
pub mod waveform;

pub mod prelude {
    pub use crate::losses::{
        baseline_strand_current, cauchy_schwarz_witness, check_fundamental_property,
        compute_losses, compute_losses_with, detect_circulating, Detection, LossRatio, LossReport,
        PropertyStatus, PropertyVerdict, Tolerances,
    };
    pub use crate::network::{
        apply_transposition, slot_inductance_matrix, validate_network, BundleNetwork,
        InductanceMatrix, Placement, Polarity, SlotLayout, Strand, TranspositionSchedule,
        TranspositionSegment,
    };
    pub use crate::solver::{
        sharing_functions, solve_drive, solve_harmonic, transient_oracle, HarmonicSolution,
        SharingFunctions, SolvedBundle, DEFAULT_ZERO_THRESHOLD,
    };
    pub use crate::waveform::{Harmonic, Waveform};
}

// Book chapters are compiled as doc tests so their snippets stay in sync
// with the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/waveforms.md")]
    mod waveforms {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/solving.md")]
    mod solving {}
    #[doc = include_str!("../../../book/src/losses.md")]
    mod losses {}
    #[doc = include_str!("../../../book/src/transposition.md")]
    mod transposition {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
