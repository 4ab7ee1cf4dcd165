//! Graded algebra of truncated symbols on the phase space T*T².
//!
//! A symbol is a finite sum of terms `c · e^{i n·x} ξ^α ε^k h^ℓ` with complex
//! coefficients, stored sparsely and truncated both in the Fourier modes
//! (`|n|_∞ ≤ n_max`) and in the grading `|α| + 2(k + ℓ) ≤ N_max`. The grading
//! weights a power of h or ε twice as much as a power of ξ, so that every
//! Moyal correction (which trades a ξ-derivative for a power of h) moves
//! strictly up the grading filtration.
//!
//! All operations are pure; symbols are immutable values and can be shared
//! freely across threads. Arithmetic is exact for inputs supported on modes
//! `|n|_∞ ≤ n_max / 2`; beyond that, products silently drop the out-of-range
//! modes (this is the documented truncation contract, checkable by doubling
//! `n_max`).

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of one monomial `e^{i n·x} ξ^α ε^k h^ℓ`.
///
/// Ordering is lexicographic in `(grading, n, α, k, ℓ)`; this fixes the
/// canonical term order used for serialization and equality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GradedIndex {
    /// Fourier mode in the angle variables.
    pub n: [i32; 2],
    /// Monomial powers in the action variables.
    pub alpha: [u32; 2],
    /// Power of the perturbation parameter ε.
    pub k: u32,
    /// Power of the semiclassical parameter h.
    pub l: u32,
}

impl GradedIndex {
    pub fn new(n: [i32; 2], alpha: [u32; 2], k: u32, l: u32) -> Self {
        GradedIndex { n, alpha, k, l }
    }

    /// Grading weight `|α| + 2(k + ℓ)`.
    pub fn grading(&self) -> u32 {
        self.alpha[0] + self.alpha[1] + 2 * (self.k + self.l)
    }

    /// Sup norm of the Fourier mode.
    pub fn mode_norm(&self) -> u32 {
        self.n[0].unsigned_abs().max(self.n[1].unsigned_abs())
    }

    /// Total degree in ξ.
    pub fn action_degree(&self) -> u32 {
        self.alpha[0] + self.alpha[1]
    }
}

impl Ord for GradedIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.grading(), self.n, self.alpha, self.k, self.l).cmp(&(
            other.grading(),
            other.n,
            other.alpha,
            other.k,
            other.l,
        ))
    }
}

impl PartialOrd for GradedIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Multiply a complex number by `i^p` exactly (quarter rotations only).
fn mul_i_pow(z: Complex64, p: u32) -> Complex64 {
    match p % 4 {
        0 => z,
        1 => Complex64::new(-z.im, z.re),
        2 => -z,
        _ => Complex64::new(z.im, -z.re),
    }
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// Falling factorial `a (a-1) ⋯ (a-d+1)`; zero when `d > a`.
fn falling(a: u32, d: u32) -> f64 {
    if d > a {
        return 0.0;
    }
    ((a - d + 1)..=a).map(|v| v as f64).product()
}

fn int_pow(base: i32, exp: u32) -> f64 {
    (base as f64).powi(exp as i32)
}

/// Sparse truncated symbol `Σ c(n,α,k,ℓ) e^{i n·x} ξ^α ε^k h^ℓ`.
///
/// Zero coefficients are never stored, so two symbols are equal iff their
/// term maps (and cutoffs) are equal.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSymbol {
    terms: BTreeMap<GradedIndex, Complex64>,
    grading_cutoff: u32,
    fourier_cutoff: u32,
}

impl TruncatedSymbol {
    /// The zero symbol with the given cutoffs.
    pub fn zero(fourier_cutoff: u32, grading_cutoff: u32) -> Self {
        TruncatedSymbol {
            terms: BTreeMap::new(),
            grading_cutoff,
            fourier_cutoff,
        }
    }

    pub fn from_terms<I>(fourier_cutoff: u32, grading_cutoff: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (GradedIndex, Complex64)>,
    {
        let mut s = Self::zero(fourier_cutoff, grading_cutoff);
        for (idx, c) in terms {
            s.add_term(idx, c);
        }
        s
    }

    /// Single-term symbol; the term is dropped if it violates the cutoffs.
    pub fn monomial(
        fourier_cutoff: u32,
        grading_cutoff: u32,
        c: Complex64,
        n: [i32; 2],
        alpha: [u32; 2],
        k: u32,
        l: u32,
    ) -> Self {
        Self::from_terms(
            fourier_cutoff,
            grading_cutoff,
            [(GradedIndex::new(n, alpha, k, l), c)],
        )
    }

    /// The linear symbol `a·ξ`.
    pub fn action_linear(fourier_cutoff: u32, grading_cutoff: u32, a: [f64; 2]) -> Self {
        Self::from_terms(
            fourier_cutoff,
            grading_cutoff,
            [
                (
                    GradedIndex::new([0, 0], [1, 0], 0, 0),
                    Complex64::new(a[0], 0.0),
                ),
                (
                    GradedIndex::new([0, 0], [0, 1], 0, 0),
                    Complex64::new(a[1], 0.0),
                ),
            ],
        )
    }

    pub fn grading_cutoff(&self) -> u32 {
        self.grading_cutoff
    }

    pub fn fourier_cutoff(&self) -> u32 {
        self.fourier_cutoff
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GradedIndex, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, idx: &GradedIndex) -> Complex64 {
        self.terms.get(idx).copied().unwrap_or(Complex64::ZERO)
    }

    /// Accumulate a coefficient, keeping the canonical sparse form. Terms
    /// outside the cutoffs are dropped; that is the truncation-on-write rule.
    pub fn add_term(&mut self, idx: GradedIndex, c: Complex64) {
        if c == Complex64::ZERO {
            return;
        }
        if idx.grading() > self.grading_cutoff || idx.mode_norm() > self.fourier_cutoff {
            return;
        }
        let entry = self.terms.entry(idx).or_insert(Complex64::ZERO);
        *entry += c;
        if *entry == Complex64::ZERO {
            self.terms.remove(&idx);
        }
    }

    fn check_cutoffs(&self, other: &Self) -> Result<()> {
        if self.grading_cutoff != other.grading_cutoff
            || self.fourier_cutoff != other.fourier_cutoff
        {
            return Err(Error::CutoffMismatch {
                left: (self.fourier_cutoff, self.grading_cutoff),
                right: (other.fourier_cutoff, other.grading_cutoff),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_cutoffs(other)?;
        let mut out = self.clone();
        for (idx, c) in other.iter() {
            out.add_term(*idx, *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = Self::zero(self.fourier_cutoff, self.grading_cutoff);
        for (idx, c) in self.iter() {
            out.add_term(*idx, c * factor);
        }
        out
    }

    /// Pointwise (commutative) product of two symbols, truncated.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_cutoffs(other)?;
        let mut out = Self::zero(self.fourier_cutoff, self.grading_cutoff);
        for (ia, ca) in self.iter() {
            for (ib, cb) in other.iter() {
                let idx = GradedIndex::new(
                    [ia.n[0] + ib.n[0], ia.n[1] + ib.n[1]],
                    [ia.alpha[0] + ib.alpha[0], ia.alpha[1] + ib.alpha[1]],
                    ia.k + ib.k,
                    ia.l + ib.l,
                );
                out.add_term(idx, ca * cb);
            }
        }
        Ok(out)
    }

    /// Partial derivative in the angle variable `x_axis` (brings down `i n`).
    pub fn x_derivative(&self, axis: usize) -> Self {
        let mut out = Self::zero(self.fourier_cutoff, self.grading_cutoff);
        for (idx, c) in self.iter() {
            let n = idx.n[axis];
            if n != 0 {
                out.add_term(*idx, mul_i_pow(*c, 1) * (n as f64));
            }
        }
        out
    }

    /// Partial derivative in the action variable `ξ_axis`.
    pub fn xi_derivative(&self, axis: usize) -> Self {
        let mut out = Self::zero(self.fourier_cutoff, self.grading_cutoff);
        for (idx, c) in self.iter() {
            let a = idx.alpha[axis];
            if a > 0 {
                let mut alpha = idx.alpha;
                alpha[axis] -= 1;
                out.add_term(
                    GradedIndex::new(idx.n, alpha, idx.k, idx.l),
                    c * (a as f64),
                );
            }
        }
        out
    }

    /// Directional angle derivative `(a·∂_x)`.
    pub fn x_directional_derivative(&self, a: [f64; 2]) -> Self {
        let mut out = Self::zero(self.fourier_cutoff, self.grading_cutoff);
        for (idx, c) in self.iter() {
            let d = a[0] * idx.n[0] as f64 + a[1] * idx.n[1] as f64;
            if d != 0.0 {
                out.add_term(*idx, mul_i_pow(*c, 1) * d);
            }
        }
        out
    }

    /// Projection onto the zero Fourier mode (the spatial average in x).
    pub fn average_x(&self) -> Self {
        let mut out = Self::zero(self.fourier_cutoff, self.grading_cutoff);
        for (idx, c) in self.iter() {
            if idx.n == [0, 0] {
                out.add_term(*idx, *c);
            }
        }
        out
    }

    /// Drop all terms of grading greater than `n`.
    pub fn truncate_grading(&self, n: u32) -> Self {
        let mut out = self.clone();
        out.terms.retain(|idx, _| idx.grading() <= n);
        out
    }

    /// The homogeneous part of grading exactly `m`.
    pub fn homogeneous_part(&self, m: u32) -> Self {
        let mut out = self.clone();
        out.terms.retain(|idx, _| idx.grading() == m);
        out
    }

    pub fn retain<F: FnMut(&GradedIndex, &Complex64) -> bool>(&self, mut pred: F) -> Self {
        let mut out = self.clone();
        out.terms.retain(|idx, c| pred(idx, c));
        out
    }

    /// Smallest grading among stored terms, if any.
    pub fn min_grading(&self) -> Option<u32> {
        self.terms.keys().map(|idx| idx.grading()).min()
    }

    /// Largest total ξ-degree among stored terms.
    pub fn max_action_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|idx| idx.action_degree())
            .max()
            .unwrap_or(0)
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Re-embed into new cutoffs, truncating whatever no longer fits.
    pub fn with_cutoffs(&self, fourier_cutoff: u32, grading_cutoff: u32) -> Self {
        Self::from_terms(
            fourier_cutoff,
            grading_cutoff,
            self.iter().map(|(idx, c)| (*idx, *c)),
        )
    }

    /// Largest coefficient difference against another symbol (union support).
    pub fn max_term_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for (idx, c) in self.iter() {
            worst = worst.max((c - other.coeff(idx)).norm());
        }
        for (idx, c) in other.iter() {
            if !self.terms.contains_key(idx) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }

    /// Evaluate the symbol at a phase-space point and parameter values.
    pub fn eval(&self, x: [f64; 2], xi: [f64; 2], eps: f64, h: f64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for (idx, c) in self.iter() {
            let phase = idx.n[0] as f64 * x[0] + idx.n[1] as f64 * x[1];
            let osc = Complex64::new(0.0, phase).exp();
            let mono = xi[0].powi(idx.alpha[0] as i32)
                * xi[1].powi(idx.alpha[1] as i32)
                * eps.powi(idx.k as i32)
                * h.powi(idx.l as i32);
            acc += c * osc * mono;
        }
        acc
    }

    /// Poisson bracket `{a,b} = Σ_j ∂_ξj a ∂_xj b − ∂_xj a ∂_ξj b`.
    ///
    /// Every output term has grading at least `grading(a) + grading(b) − 1`.
    pub fn poisson_bracket(&self, other: &Self) -> Result<Self> {
        self.check_cutoffs(other)?;
        let mut out = Self::zero(self.fourier_cutoff, self.grading_cutoff);
        for (ia, ca) in self.iter() {
            for (ib, cb) in other.iter() {
                for axis in 0..2 {
                    // i (α_a n_b − n_a α_b) on the merged monomial with one
                    // ξ_axis power removed.
                    let weight =
                        ia.alpha[axis] as f64 * ib.n[axis] as f64 - ia.n[axis] as f64 * ib.alpha[axis] as f64;
                    if weight == 0.0 {
                        continue;
                    }
                    let mut alpha = [
                        ia.alpha[0] + ib.alpha[0],
                        ia.alpha[1] + ib.alpha[1],
                    ];
                    alpha[axis] -= 1;
                    let idx = GradedIndex::new(
                        [ia.n[0] + ib.n[0], ia.n[1] + ib.n[1]],
                        alpha,
                        ia.k + ib.k,
                        ia.l + ib.l,
                    );
                    out.add_term(idx, mul_i_pow(ca * cb, 1) * weight);
                }
            }
        }
        Ok(out)
    }

    /// Weyl star product
    /// `a # b = Σ_m (1/m!) (ih/2)^m a (←∂_x·→∂_ξ − ←∂_ξ·→∂_x)^m b`,
    /// the finite expansion matching composition of Weyl quantizations.
    ///
    /// The sum over the bidifferential ladder terminates because every
    /// ξ-derivative lowers a polynomial degree. The result is truncated to
    /// the shared cutoffs.
    pub fn moyal_product(&self, other: &Self) -> Result<Self> {
        self.check_cutoffs(other)?;
        let mut out = Self::zero(self.fourier_cutoff, self.grading_cutoff);
        self.moyal_accumulate(other, self.grading_cutoff, false, &mut out);
        Ok(out)
    }

    /// `(i/h)(a # b − b # a)`: the Moyal bracket divided by h.
    ///
    /// The division is exact because the star commutator is odd in the
    /// ladder order m, so every term carries at least one power of h. The
    /// leading (m = 1) part is the Poisson bracket; all corrections have
    /// grading at least `grading(a) + grading(b) + 1`.
    pub fn moyal_bracket_over_h(&self, other: &Self) -> Result<Self> {
        self.check_cutoffs(other)?;
        // Work two gradings above the cutoff so that dividing by h (which
        // lowers the grading by 2) loses nothing below the cutoff.
        let bound = self.grading_cutoff.saturating_add(2);
        let mut comm = Self::zero(self.fourier_cutoff, bound);
        self.moyal_accumulate(other, bound, true, &mut comm);
        let mut out = Self::zero(self.fourier_cutoff, self.grading_cutoff);
        for (idx, c) in comm.iter() {
            if idx.l == 0 {
                return Err(Error::HFreeCommutatorTerm { index: *idx });
            }
            out.add_term(
                GradedIndex::new(idx.n, idx.alpha, idx.k, idx.l - 1),
                mul_i_pow(*c, 1),
            );
        }
        Ok(out)
    }

    /// Shared ladder for `moyal_product` and the star commutator.
    ///
    /// With multi-indices β (x-derivatives on the left factor) and γ
    /// (ξ-derivatives on the left factor), the term of order m = |β| + |γ| is
    /// `(ih/2)^m (−1)^{|γ|}/(β!γ!) (∂_x^β ∂_ξ^γ a)(∂_ξ^β ∂_x^γ b)`.
    /// For the commutator only odd m survive, doubled.
    fn moyal_accumulate(
        &self,
        other: &Self,
        grading_bound: u32,
        commutator: bool,
        out: &mut Self,
    ) {
        for (ia, ca) in self.iter() {
            for (ib, cb) in other.iter() {
                let base = ca * cb;
                for b0 in 0..=ib.alpha[0] {
                    for b1 in 0..=ib.alpha[1] {
                        for g0 in 0..=ia.alpha[0] {
                            for g1 in 0..=ia.alpha[1] {
                                let m = b0 + b1 + g0 + g1;
                                if commutator && m % 2 == 0 {
                                    continue;
                                }
                                let alpha = [
                                    ia.alpha[0] - g0 + ib.alpha[0] - b0,
                                    ia.alpha[1] - g1 + ib.alpha[1] - b1,
                                ];
                                let grading = alpha[0]
                                    + alpha[1]
                                    + 2 * (ia.k + ib.k + ia.l + ib.l + m);
                                if grading > grading_bound {
                                    continue;
                                }
                                // Integer structure constants: mode powers and
                                // falling factorials from the derivatives.
                                let magnitude = int_pow(ia.n[0], b0)
                                    * int_pow(ia.n[1], b1)
                                    * int_pow(ib.n[0], g0)
                                    * int_pow(ib.n[1], g1)
                                    * falling(ia.alpha[0], g0)
                                    * falling(ia.alpha[1], g1)
                                    * falling(ib.alpha[0], b0)
                                    * falling(ib.alpha[1], b1);
                                if magnitude == 0.0 {
                                    continue;
                                }
                                let mut scale = magnitude
                                    / (factorial(b0)
                                        * factorial(b1)
                                        * factorial(g0)
                                        * factorial(g1))
                                    / 2f64.powi(m as i32);
                                if (g0 + g1) % 2 == 1 {
                                    scale = -scale;
                                }
                                if commutator {
                                    // a#b − b#a doubles the odd-order terms.
                                    scale *= 2.0;
                                }
                                // i-power: m from (ih/2)^m plus the mode derivatives.
                                let rot = m + b0 + b1 + g0 + g1;
                                let idx = GradedIndex::new(
                                    [ia.n[0] + ib.n[0], ia.n[1] + ib.n[1]],
                                    alpha,
                                    ia.k + ib.k,
                                    ia.l + ib.l + m,
                                );
                                out.add_term(idx, mul_i_pow(base, rot) * scale);
                            }
                        }
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Inhomogeneous polynomials in ξ (used by the symmetry transforms).
// ---------------------------------------------------------------------------

/// A polynomial in the action variables alone, `Σ c_α ξ^α`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct XiPolynomial {
    terms: BTreeMap<[u32; 2], Complex64>,
}

impl XiPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms<I: IntoIterator<Item = ([u32; 2], Complex64)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (alpha, c) in terms {
            p.add_term(alpha, c);
        }
        p
    }

    pub fn add_term(&mut self, alpha: [u32; 2], c: Complex64) {
        if c == Complex64::ZERO {
            return;
        }
        let entry = self.terms.entry(alpha).or_insert(Complex64::ZERO);
        *entry += c;
        if *entry == Complex64::ZERO {
            self.terms.remove(&alpha);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u32; 2], &Complex64)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|a| a[0] + a[1])
            .max()
            .unwrap_or(0)
    }

    /// Constant term.
    pub fn constant(&self) -> Complex64 {
        self.terms
            .get(&[0, 0])
            .copied()
            .unwrap_or(Complex64::ZERO)
    }

    /// The polynomial minus its constant term.
    pub fn without_constant(&self) -> Self {
        let mut p = self.clone();
        p.terms.remove(&[0, 0]);
        p
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::from_terms(self.iter().map(|(a, c)| (*a, c * factor)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for (a, c) in other.iter() {
            p.add_term(*a, *c);
        }
        p
    }

    /// Product with all terms of total degree above `degree_bound` dropped.
    pub fn mul_truncated(&self, other: &Self, degree_bound: u32) -> Self {
        let mut p = Self::zero();
        for (a, ca) in self.iter() {
            for (b, cb) in other.iter() {
                let alpha = [a[0] + b[0], a[1] + b[1]];
                if alpha[0] + alpha[1] <= degree_bound {
                    p.add_term(alpha, ca * cb);
                }
            }
        }
        p
    }

    /// Gradient `(∂_ξ1 ψ, ∂_ξ2 ψ)`.
    pub fn gradient(&self) -> [Self; 2] {
        let mut out = [Self::zero(), Self::zero()];
        for (alpha, c) in self.iter() {
            for axis in 0..2 {
                if alpha[axis] > 0 {
                    let mut a = *alpha;
                    a[axis] -= 1;
                    out[axis].add_term(a, c * alpha[axis] as f64);
                }
            }
        }
        out
    }

    pub fn eval(&self, xi: [f64; 2]) -> Complex64 {
        self.iter()
            .map(|(a, c)| c * xi[0].powi(a[0] as i32) * xi[1].powi(a[1] as i32))
            .sum()
    }
}

// ---------------------------------------------------------------------------
// Homogeneous polynomials (normal-form coefficients).
// ---------------------------------------------------------------------------

/// Homogeneous polynomial of fixed degree j in ξ, stored in the
/// descending-power monomial basis `ξ1^j, ξ1^{j−1}ξ2, …, ξ2^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousPolynomial {
    degree: u32,
    coeffs: Vec<Complex64>,
}

impl HomogeneousPolynomial {
    pub fn new(degree: u32, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(
            coeffs.len(),
            degree as usize + 1,
            "degree-{degree} homogeneous polynomial needs {} coefficients",
            degree + 1
        );
        HomogeneousPolynomial { degree, coeffs }
    }

    pub fn zeros(degree: u32) -> Self {
        Self::new(degree, vec![Complex64::ZERO; degree as usize + 1])
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `ξ1^{j−t} ξ2^t`.
    pub fn coeff(&self, t: usize) -> Complex64 {
        self.coeffs[t]
    }

    pub fn coeff_mut(&mut self, t: usize) -> &mut Complex64 {
        &mut self.coeffs[t]
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.degree, other.degree);
        Self::new(
            self.degree,
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn eval(&self, xi: [f64; 2]) -> Complex64 {
        let j = self.degree as i32;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(t, c)| c * xi[0].powi(j - t as i32) * xi[1].powi(t as i32))
            .sum()
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.degree, other.degree);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

// ---------------------------------------------------------------------------
// JSON literal format.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TermRecord {
    n: [i32; 2],
    alpha: [u32; 2],
    k: u32,
    l: u32,
    re: f64,
    im: f64,
}

/// On-disk symbol literal: cutoff header plus the canonical term list.
///
/// Doubles are written in shortest round-trip decimal form, so parsing
/// recovers the exact bits.
#[derive(Serialize, Deserialize)]
struct SymbolFile {
    n_max: u32,
    #[serde(rename = "N_max")]
    grading_max: u32,
    terms: Vec<TermRecord>,
}

impl TruncatedSymbol {
    pub fn to_json(&self) -> String {
        let file = SymbolFile {
            n_max: self.fourier_cutoff,
            grading_max: self.grading_cutoff,
            terms: self
                .iter()
                .map(|(idx, c)| TermRecord {
                    n: idx.n,
                    alpha: idx.alpha,
                    k: idx.k,
                    l: idx.l,
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("symbol serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SymbolFile = serde_json::from_str(text)?;
        let mut s = Self::zero(file.n_max, file.grading_max);
        for t in file.terms {
            if !t.re.is_finite() || !t.im.is_finite() {
                return Err(Error::InvalidCoefficient {
                    index: GradedIndex::new(t.n, t.alpha, t.k, t.l),
                });
            }
            s.add_term(
                GradedIndex::new(t.n, t.alpha, t.k, t.l),
                Complex64::new(t.re, t.im),
            );
        }
        Ok(s)
    }
}
