//! Error type shared across the crate.

use thiserror::Error;

use crate::symbol::GradedIndex;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cutoff mismatch: left (n_max, N_max) = {left:?}, right = {right:?}")]
    CutoffMismatch {
        left: (u32, u32),
        right: (u32, u32),
    },

    #[error("star commutator produced an h-free term at {index:?}; Weyl parity violated")]
    HFreeCommutatorTerm { index: GradedIndex },

    #[error("non-finite coefficient at {index:?}")]
    InvalidCoefficient { index: GradedIndex },

    #[error(
        "frequencies fail the Diophantine bound at k = {k:?}: |a·k| = {value:e} < {bound:e}"
    )]
    NotDiophantine {
        k: [i64; 2],
        value: f64,
        bound: f64,
    },

    #[error("Fourier mode {n:?} lies outside the certified radius {radius}")]
    ModeOutsideCertifiedRadius { n: [i32; 2], radius: u32 },

    #[error("resonant mode {n:?}: a·n vanishes, frequencies are not Diophantine")]
    ResonantMode { n: [i32; 2] },

    #[error("generator has a term of grading {grading} < 2; the Lie series need not terminate")]
    GeneratorGradingTooLow { grading: u32 },

    #[error("requested order {requested} needs grading cutoff ≥ {required}, symbol has {available}")]
    CutoffOverflow {
        requested: u32,
        required: u32,
        available: u32,
    },

    #[error("symbol's grading-≤1 part is not a·ξ for the given frequencies (deviation {deviation:e})")]
    LeadingPartMismatch { deviation: f64 },

    #[error(
        "normalization left an angle-dependent residue of relative size {relative:e} at grading {grading}; Fourier cutoff too small"
    )]
    ProjectionResidue { grading: u32, relative: f64 },

    #[error("symmetry transform maps mode {n:?} outside the Fourier cutoff {cutoff}")]
    SymmetryModeOverflow { n: [i32; 2], cutoff: u32 },

    #[error("matrix is not unimodular: det = {det}")]
    NotUnimodular { det: i64 },

    #[error("window not covered: lattice point {k:?} on the search boundary is inside the window")]
    WindowNotCovered { k: [i64; 2] },

    #[error("eps = {eps:e} outside the admissible range [{lo:e}, {hi:e}] for h = {h:e}")]
    EpsOutOfRange { eps: f64, h: f64, lo: f64, hi: f64 },

    #[error("decay-rate collision between indices {first:?} and {second:?} under the free schedule")]
    RateCollision {
        first: (u32, u32, u32),
        second: (u32, u32, u32),
    },

    #[error(
        "rank-deficient fit for degree-{degree} class: achieved rank {achieved}, need {needed}"
    )]
    RankDeficient {
        degree: u32,
        achieved: usize,
        needed: usize,
    },

    #[error("record at h = {h:e} has no labels; run association first")]
    MissingLabels { h: f64 },

    #[error("no usable sample points for the fit (band empty)")]
    EmptyFitBand,

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
}
