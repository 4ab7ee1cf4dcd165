//! Quantum Birkhoff normal forms near a Diophantine invariant torus, the
//! distorted eigenvalue lattices they induce, and the inverse engine that
//! recovers normal-form coefficients from eigenvalue data.
//!
//! The pipeline has four stages, mirrored by the modules below:
//!
//! 1. [`symbol`] — exact graded algebra of truncated Weyl symbols on T*T²:
//!    Moyal product and bracket, Poisson bracket, averaging, truncation.
//! 2. [`bnf`] — the normalization engine: cohomological equation, Lie-series
//!    conjugation, symmetry transforms, the [`bnf::NormalForm`] type.
//! 3. [`spectral`] — the forward model: Bohr–Sommerfeld quasi-eigenvalues in
//!    an (h, ε)-dependent complex window, with optional bounded noise.
//! 4. [`associate`] / [`recover`] — the inverse direction: re-attach lattice
//!    labels to raw eigenvalues using only real parts, then recover the
//!    normal-form coefficients (or their identifiable class sums) by ordered
//!    least squares over decay rates.

pub mod associate;
pub mod bnf;
pub mod error;
pub mod fixtures;
pub mod freq;
pub mod linalg;
pub mod recover;
pub mod spectral;
pub mod symbol;

pub use associate::{associate, AssociationOutcome};
pub use bnf::{
    apply_symmetry, birkhoff_normalize, lie_conjugate, solve_cohomological, verification_defect,
    NormalForm, NormalFormHeader, NormalizationResult,
};
pub use error::{Error, Result};
pub use freq::{check_diophantine, golden_mean, min_pairwise_separation, FrequencyData};
pub use recover::{
    classify_indices, fit_class, recover, IndexClass, RecoveredClass, RecoveryReport, Schedule,
};
pub use spectral::{
    bohr_sommerfeld_action, generate_spectrum, inject_noise, quasi_eigenvalue, QuantizationData,
    SpectralDataset, SpectralRecord, SpectralWindow,
};
pub use symbol::{GradedIndex, HomogeneousPolynomial, TruncatedSymbol, XiPolynomial};
