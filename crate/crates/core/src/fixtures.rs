//! Ready-made inputs used by the test suites, the benchmarks, and the CLI
//! walkthrough: golden-mean frequencies, a quadratic-plus-cosine symbol, and
//! a perturbed symbol rich enough to populate most recoverable indices.

use num_complex::Complex64;

use crate::bnf::NormalForm;
use crate::freq::{check_diophantine, golden_mean, FrequencyData};
use crate::spectral::{QuantizationData, SpectralWindow};
use crate::symbol::{GradedIndex, TruncatedSymbol};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Golden-mean frequencies (1, (1+√5)/2) with C0 = 3, N0 = 2, certified on
/// the given box.
pub fn golden_frequency(radius: u32) -> FrequencyData {
    check_diophantine([1.0, golden_mean()], 3.0, 2.0, radius)
        .expect("golden-mean frequencies are Diophantine")
}

/// `a·ξ + ξ1² + ε (cos x1 + cos(x1+x2))`: the normalization identity
/// fixture. Fourier cutoff 8, grading cutoff 8.
pub fn quadratic_cosine_symbol() -> TruncatedSymbol {
    let freq = golden_frequency(8);
    let mut p = TruncatedSymbol::action_linear(8, 8, freq.a());
    p.add_term(GradedIndex::new([0, 0], [2, 0], 0, 0), c(1.0, 0.0));
    for n in [[1, 0], [-1, 0], [1, 1], [-1, -1]] {
        p.add_term(GradedIndex::new(n, [0, 0], 1, 0), c(0.5, 0.0));
    }
    p
}

/// A perturbed symbol whose normal form populates a broad spread of the
/// ε-dependent indices up to grading 6, with amplitudes small enough that
/// real-part association stays sound at the fixture h values.
///
/// Structure: `a·ξ + iε q + ε r + (explicit higher ε,h terms)` with
/// `⟨q⟩(ξ) = 1 + 0.3 ξ1 − 0.2 ξ2` driving the window, so the imaginary
/// constraint is transverse to `a·ξ` and the window is a bounded
/// parallelogram.
pub fn roundtrip_symbol() -> TruncatedSymbol {
    let freq = golden_frequency(12);
    let mut p = TruncatedSymbol::action_linear(12, 8, freq.a());

    // iε ⟨q⟩(ξ): window center and imaginary slope.
    p.add_term(GradedIndex::new([0, 0], [0, 0], 1, 0), c(0.0, 1.0));
    p.add_term(GradedIndex::new([0, 0], [1, 0], 1, 0), c(0.0, 0.3));
    p.add_term(GradedIndex::new([0, 0], [0, 1], 1, 0), c(0.0, -0.2));

    // Oscillatory parts of iε q.
    for n in [[1, 0], [-1, 0]] {
        p.add_term(GradedIndex::new(n, [0, 0], 1, 0), c(0.0, 0.05));
    }
    for n in [[1, 1], [-1, -1]] {
        p.add_term(GradedIndex::new(n, [0, 0], 1, 0), c(0.0, 0.04));
    }
    // iε ξ1 sin x2 piece: ε 0.03 ξ1 (e^{i x2} − e^{−i x2}).
    p.add_term(GradedIndex::new([0, 1], [1, 0], 1, 0), c(0.03, 0.0));
    p.add_term(GradedIndex::new([0, -1], [1, 0], 1, 0), c(-0.03, 0.0));
    // A real ε part (the perturbation need not be self-adjoint).
    p.add_term(GradedIndex::new([1, 0], [0, 0], 1, 0), c(0.02, 0.0));
    p.add_term(GradedIndex::new([-1, 0], [0, 0], 1, 0), c(0.02, 0.0));

    // Direct higher-index seeds so every recoverable class has a nonzero
    // truth of honest size. Imaginary parts carry the weight (they do not
    // perturb the real-part association); sizes stay below the level where
    // the induced window shift would displace the lattice parallelogram.
    p.add_term(GradedIndex::new([0, 0], [2, 0], 1, 0), c(0.0, 0.04));
    p.add_term(GradedIndex::new([0, 0], [1, 1], 1, 0), c(0.0, 0.03));
    p.add_term(GradedIndex::new([0, 0], [3, 0], 1, 0), c(0.0, 0.05));
    p.add_term(GradedIndex::new([0, 0], [4, 0], 1, 0), c(0.0, 0.06));
    p.add_term(GradedIndex::new([0, 0], [0, 0], 1, 1), c(0.0, 0.12));
    p.add_term(GradedIndex::new([0, 0], [1, 0], 1, 1), c(0.015, 0.05));
    p.add_term(GradedIndex::new([0, 0], [2, 0], 1, 1), c(0.0, 0.04));
    p.add_term(GradedIndex::new([0, 0], [0, 0], 1, 2), c(0.02, 0.1));
    p.add_term(GradedIndex::new([0, 0], [0, 0], 2, 1), c(0.025, -0.1));
    p.add_term(GradedIndex::new([0, 0], [1, 0], 2, 0), c(0.009, 0.05));
    p.add_term(GradedIndex::new([0, 0], [0, 0], 2, 0), c(0.004, 0.18));
    p.add_term(GradedIndex::new([0, 0], [2, 0], 2, 0), c(0.0, 0.06));
    p.add_term(GradedIndex::new([0, 0], [0, 0], 3, 0), c(0.0, 0.15));
    p
}

/// Window used by the lattice fixtures: δ = 0.2, C = 4, center from the
/// normal form's torus average.
pub fn standard_window(nf: &NormalForm) -> SpectralWindow {
    SpectralWindow::new(0.2, 4.0, nf.window_center())
}

/// Wider window (C = 1.5) for the noisy fixed-schedule fixtures: the larger
/// `|ξ|/ε` range is what keeps tied-rate classes of different degree
/// separable under noise.
pub fn wide_window(nf: &NormalForm) -> SpectralWindow {
    SpectralWindow::new(0.2, 1.5, nf.window_center())
}

/// Quantization constants used by the fixtures.
pub fn trivial_quantization() -> QuantizationData {
    QuantizationData::trivial()
}
