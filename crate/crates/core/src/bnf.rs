//! Iterative reduction of a perturbed symbol `a·ξ + O(2)` to quantum
//! Birkhoff normal form near the Diophantine torus `ξ = 0`.
//!
//! The engine walks the grading filtration: at each grading m it splits the
//! homogeneous residual into its angle average and the rest, solves the
//! cohomological equation `{G, a·ξ} = ⟨R⟩ − R` by Fourier division, and
//! conjugates by `exp((i/h) ad_G)`. The Lie series terminates inside the
//! truncation because every generator term has grading at least 2, so each
//! nested bracket climbs the filtration.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freq::FrequencyData;
use crate::symbol::{GradedIndex, HomogeneousPolynomial, TruncatedSymbol, XiPolynomial};

/// Angle-independent truncation `P^(N)(ξ,ε,h) = Σ P_{jkℓ}(ξ) ε^k h^ℓ` with
/// homogeneous degree-j polynomials, stored per index `(j, k, ℓ)` with
/// grading `j + 2(k + ℓ) ≤ order`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm {
    order: u32,
    coeffs: BTreeMap<(u32, u32, u32), HomogeneousPolynomial>,
}

impl NormalForm {
    pub fn new(order: u32) -> Self {
        NormalForm {
            order,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u32, u32, u32), &HomogeneousPolynomial)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, j: u32, k: u32, l: u32) -> Option<&HomogeneousPolynomial> {
        self.coeffs.get(&(j, k, l))
    }

    /// Insert or accumulate a polynomial at `(j,k,ℓ)`. Panics if the grading
    /// exceeds the order or the degree disagrees with j.
    pub fn insert(&mut self, j: u32, k: u32, l: u32, poly: HomogeneousPolynomial) {
        assert!(j + 2 * (k + l) <= self.order, "index beyond normal-form order");
        assert_eq!(poly.degree(), j);
        match self.coeffs.get_mut(&(j, k, l)) {
            Some(existing) => *existing = existing.add(&poly),
            None => {
                self.coeffs.insert((j, k, l), poly);
            }
        }
        if self.coeffs[&(j, k, l)].max_coeff() == 0.0 {
            self.coeffs.remove(&(j, k, l));
        }
    }

    /// Value `Σ P_{jkℓ}(ξ) ε^k h^ℓ` over all stored indices.
    pub fn evaluate(&self, xi: [f64; 2], eps: f64, h: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(&(_, k, l), poly)| poly.eval(xi) * (eps.powi(k as i32) * h.powi(l as i32)))
            .sum()
    }

    /// Restriction to the ε-independent indices (known from the unperturbed
    /// operator).
    pub fn seed_only(&self) -> Self {
        let mut out = Self::new(self.order);
        for (&(j, k, l), poly) in &self.coeffs {
            if k == 0 {
                out.insert(j, k, l, poly.clone());
            }
        }
        out
    }

    /// The window center `F = ⟨q⟩|_Λ`, recovered from the ε¹ constant term
    /// of `p + iεq`: that term equals iF.
    pub fn window_center(&self) -> Complex64 {
        self.get(0, 1, 0)
            .map(|poly| poly.coeff(0) * Complex64::new(0.0, -1.0))
            .unwrap_or(Complex64::ZERO)
    }

    /// Sum of the polynomials over a set of same-degree indices.
    pub fn class_sum(&self, members: &[(u32, u32, u32)]) -> HomogeneousPolynomial {
        let degree = members.first().map(|m| m.0).unwrap_or(0);
        let mut acc = HomogeneousPolynomial::zeros(degree);
        for &(j, k, l) in members {
            assert_eq!(j, degree, "class members must share the degree");
            if let Some(poly) = self.get(j, k, l) {
                acc = acc.add(poly);
            }
        }
        acc
    }

    /// Expand back into a symbol (every term at Fourier mode 0).
    pub fn to_symbol(&self, fourier_cutoff: u32, grading_cutoff: u32) -> TruncatedSymbol {
        let mut sym = TruncatedSymbol::zero(fourier_cutoff, grading_cutoff);
        for (&(j, k, l), poly) in &self.coeffs {
            for t in 0..=j {
                sym.add_term(
                    GradedIndex::new([0, 0], [j - t, t], k, l),
                    poly.coeff(t as usize),
                );
            }
        }
        sym
    }

    /// Build from an angle-independent symbol; terms of grading beyond
    /// `order` are dropped. Panics if a nonzero Fourier mode is present.
    pub fn from_symbol(sym: &TruncatedSymbol, order: u32) -> Self {
        let mut nf = Self::new(order);
        for (idx, c) in sym.iter() {
            assert_eq!(idx.n, [0, 0], "normal form requires an angle-independent symbol");
            if idx.grading() > order {
                continue;
            }
            let j = idx.action_degree();
            let mut poly = HomogeneousPolynomial::zeros(j);
            *poly.coeff_mut(idx.alpha[1] as usize) = *c;
            nf.insert(j, idx.k, idx.l, poly);
        }
        nf
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for (&(j, k, l), poly) in &self.coeffs {
            match other.get(j, k, l) {
                Some(theirs) => worst = worst.max(poly.max_diff(theirs)),
                None => worst = worst.max(poly.max_coeff()),
            }
        }
        for (&(j, k, l), theirs) in &other.coeffs {
            if self.get(j, k, l).is_none() {
                worst = worst.max(theirs.max_coeff());
            }
        }
        worst
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "normal form to order {}", self.order)?;
        for (&(j, k, l), poly) in &self.coeffs {
            writeln!(f, "  (j,k,l)=({j},{k},{l}): {:?}", poly.coeffs())?;
        }
        Ok(())
    }
}

/// Outcome of a normalization run: the angle-independent truncation, the
/// generators used (one per grading, starting at grading 2), and the
/// homogeneous residual of grading `order + 1`.
#[derive(Clone, Debug)]
pub struct NormalizationResult {
    pub normal_form: NormalForm,
    /// `generators[i]` is the grading-(i+2) generator, zero average in x.
    pub generators: Vec<TruncatedSymbol>,
    /// Homogeneous grading-(order+1) part left after normalization.
    pub residual: TruncatedSymbol,
    pub order: u32,
}

impl NormalizationResult {
    /// Generator for grading m, if the run reached it.
    pub fn generator(&self, m: u32) -> Option<&TruncatedSymbol> {
        if m < 2 {
            return None;
        }
        self.generators.get((m - 2) as usize)
    }
}

/// Solve `{G, a·ξ} = ⟨R⟩ − R` by Fourier division.
///
/// Returns `(G, ⟨R⟩)` where `Ĝ(n,·) = −i R̂(n,·)/(a·n)` for n ≠ 0 and
/// `Ĝ(0,·) = 0` (zero-average gauge). The exact identity
/// `(a·∂_x) G = R − ⟨R⟩` then holds within the cutoffs.
pub fn solve_cohomological(
    residual: &TruncatedSymbol,
    freq: &FrequencyData,
) -> Result<(TruncatedSymbol, TruncatedSymbol)> {
    let avg = residual.average_x();
    let mut gen = TruncatedSymbol::zero(residual.fourier_cutoff(), residual.grading_cutoff());
    for (idx, c) in residual.iter() {
        if idx.n == [0, 0] {
            continue;
        }
        if idx.mode_norm() > freq.certified_radius() {
            return Err(Error::ModeOutsideCertifiedRadius {
                n: idx.n,
                radius: freq.certified_radius(),
            });
        }
        let divisor = freq.dot(idx.n);
        if divisor == 0.0 {
            return Err(Error::ResonantMode { n: idx.n });
        }
        // Ĝ(n) = −i R̂(n) / (a·n)
        gen.add_term(*idx, Complex64::new(0.0, -1.0) * c / divisor);
    }
    Ok((gen, avg))
}

/// Conjugate `P` by `exp((i/h) ad_G)`: the Lie series
/// `Σ_m (1/m!) ((i/h) ad_G)^m P`, truncated to grading `order`.
///
/// Requires every term of G to have grading at least 2, so each bracket
/// application raises the minimum grading and the series terminates below
/// the truncation. The series length is additionally capped at the
/// truncation-forced bound.
pub fn lie_conjugate(
    p: &TruncatedSymbol,
    generator: &TruncatedSymbol,
    order: u32,
) -> Result<TruncatedSymbol> {
    if let Some(g) = generator.min_grading() {
        if g < 2 {
            return Err(Error::GeneratorGradingTooLow { grading: g });
        }
    }
    let mut result = p.truncate_grading(order);
    if generator.is_zero() || p.is_zero() {
        return Ok(result);
    }
    let mut term = p.clone();
    // Each bracket with G raises the minimum grading by at least 1, so after
    // `order + 1` applications everything lies beyond the truncation.
    let cap = order + 2;
    for m in 1..=cap {
        term = generator
            .moyal_bracket_over_h(&term)?
            .scale(Complex64::new(1.0 / m as f64, 0.0))
            .truncate_grading(order);
        if term.is_zero() {
            break;
        }
        result = result.add(&term)?;
    }
    Ok(result)
}

/// Reduce `P = a·ξ + O(2)` to normal form through grading `order`.
///
/// Iterates gradings m = 2..=order: extracts the homogeneous residual of the
/// current symbol, solves the cohomological equation, records the average as
/// the normal-form contribution and conjugates by the generator. Needs
/// `order + 1 ≤ grading cutoff` so the residual is representable.
pub fn birkhoff_normalize(
    p: &TruncatedSymbol,
    freq: &FrequencyData,
    order: u32,
) -> Result<NormalizationResult> {
    if order + 1 > p.grading_cutoff() {
        return Err(Error::CutoffOverflow {
            requested: order,
            required: order + 1,
            available: p.grading_cutoff(),
        });
    }
    let leading = p.truncate_grading(1);
    let expected = TruncatedSymbol::action_linear(p.fourier_cutoff(), p.grading_cutoff(), freq.a());
    let deviation = leading.max_term_diff(&expected);
    if deviation > 1e-12 {
        return Err(Error::LeadingPartMismatch { deviation });
    }

    let mut current = p.clone();
    let mut generators = Vec::new();
    for m in 2..=order {
        let residual_m = current.homogeneous_part(m);
        let (gen_m, _avg) = solve_cohomological(&residual_m, freq)?;
        if !gen_m.is_zero() {
            current = lie_conjugate(&current, &gen_m, p.grading_cutoff())?;
            // The cohomological cancellation makes the grading-m part equal
            // its average identically; project out the rounding residue and
            // verify it really was only rounding.
            let scale = residual_m.max_coeff().max(1.0);
            let mut dropped = 0.0f64;
            current = current.retain(|idx, c| {
                if idx.grading() == m && idx.n != [0, 0] {
                    dropped = dropped.max(c.norm());
                    false
                } else {
                    true
                }
            });
            if dropped > 1e-8 * scale {
                return Err(Error::ProjectionResidue {
                    grading: m,
                    relative: dropped / scale,
                });
            }
        }
        generators.push(gen_m);
    }

    let flat = current.truncate_grading(order);
    debug_assert!(flat.iter().all(|(idx, _)| idx.n == [0, 0]));
    let normal_form = NormalForm::from_symbol(&flat, order);
    let residual = current.homogeneous_part(order + 1);
    Ok(NormalizationResult {
        normal_form,
        generators,
        residual,
        order,
    })
}

/// Replay the sequential conjugation of `p` by the stored generators and
/// measure the worst coefficient deviation from `normal_form + residual`
/// over all terms of grading ≤ order + 1.
pub fn verification_defect(p: &TruncatedSymbol, result: &NormalizationResult) -> Result<f64> {
    let mut conjugated = p.clone();
    for gen in &result.generators {
        if !gen.is_zero() {
            conjugated = lie_conjugate(&conjugated, gen, p.grading_cutoff())?;
        }
    }
    let reached = conjugated.truncate_grading(result.order + 1);
    let expected = result
        .normal_form
        .to_symbol(p.fourier_cutoff(), p.grading_cutoff())
        .add(&result.residual)?;
    Ok(reached.max_term_diff(&expected))
}

/// Pull back a symbol under the action-angle change
/// `(y,η) ↦ (x,ξ) = (A⁻¹y + ∂ψ(η), Aᵀη)` with A unimodular over ℤ.
///
/// Per term `c e^{i n·x} ξ^α`: the mode becomes `A⁻ᵀ n`, the monomial is the
/// exact binomial expansion of `(Aᵀη)^α`, and the phase
/// `e^{i n·∂ψ(η)}` splits into the closed-form constant-gradient factor and a
/// Taylor series in the degree-≥1 part of ∂ψ, which truncates exactly within
/// the grading cutoff. Modes pushed outside the Fourier cutoff are an error,
/// not a silent drop.
pub fn apply_symmetry(
    p: &TruncatedSymbol,
    psi: &XiPolynomial,
    a_map: [[i64; 2]; 2],
) -> Result<TruncatedSymbol> {
    let det = a_map[0][0] * a_map[1][1] - a_map[0][1] * a_map[1][0];
    if det.abs() != 1 {
        return Err(Error::NotUnimodular { det });
    }
    // A⁻¹ = adj(A)/det; integer because det = ±1.
    let inv = [
        [a_map[1][1] * det, -a_map[0][1] * det],
        [-a_map[1][0] * det, a_map[0][0] * det],
    ];
    let grad = psi.gradient();
    let grad_const = [grad[0].constant(), grad[1].constant()];
    let grad_high = [grad[0].without_constant(), grad[1].without_constant()];

    let n_max = p.fourier_cutoff();
    let g_max = p.grading_cutoff();
    let mut out = TruncatedSymbol::zero(n_max, g_max);

    for (idx, coeff) in p.iter() {
        // New mode m with m·y = n·A⁻¹y, i.e. m = A⁻ᵀ n.
        let mode = [
            inv[0][0] * idx.n[0] as i64 + inv[1][0] * idx.n[1] as i64,
            inv[0][1] * idx.n[0] as i64 + inv[1][1] * idx.n[1] as i64,
        ];
        if mode[0].unsigned_abs().max(mode[1].unsigned_abs()) > n_max as u64 {
            return Err(Error::SymmetryModeOverflow {
                n: idx.n,
                cutoff: n_max,
            });
        }
        let mode = [mode[0] as i32, mode[1] as i32];

        // Remaining polynomial budget at this term's (k, ℓ).
        let budget = g_max.saturating_sub(2 * (idx.k + idx.l));

        // ξ^α ↦ (Aᵀη)^α, expanded exactly.
        let mut poly = XiPolynomial::from_terms([([0, 0], Complex64::new(1.0, 0.0))]);
        for axis in 0..2 {
            // ξ_axis = A[0][axis] η1 + A[1][axis] η2
            let linear = XiPolynomial::from_terms([
                ([1, 0], Complex64::new(a_map[0][axis] as f64, 0.0)),
                ([0, 1], Complex64::new(a_map[1][axis] as f64, 0.0)),
            ]);
            for _ in 0..idx.alpha[axis] {
                poly = poly.mul_truncated(&linear, budget);
            }
        }

        // Constant part of the phase: e^{i n·c}, an exact complex factor.
        let phase_const = Complex64::new(
            0.0,
            1.0,
        ) * (grad_const[0] * idx.n[0] as f64 + grad_const[1] * idx.n[1] as f64);
        let factor = phase_const.exp();

        // Degree-≥1 phase polynomial φ(η) = n·∂ψ_high(η); its exponential
        // series terminates within the grading budget.
        let phi = grad_high[0]
            .scale(Complex64::new(idx.n[0] as f64, 0.0))
            .add(&grad_high[1].scale(Complex64::new(idx.n[1] as f64, 0.0)));
        if !phi.is_zero() {
            let mut series = XiPolynomial::from_terms([([0, 0], Complex64::new(1.0, 0.0))]);
            let mut power = XiPolynomial::from_terms([([0, 0], Complex64::new(1.0, 0.0))]);
            let iphi = phi.scale(Complex64::new(0.0, 1.0));
            for t in 1..=budget {
                power = power.mul_truncated(&iphi, budget);
                if power.is_zero() {
                    break;
                }
                series = series.add(&power.scale(Complex64::new(
                    1.0 / crate::symbol::factorial(t),
                    0.0,
                )));
            }
            poly = poly.mul_truncated(&series, budget);
        }

        for (alpha, c) in poly.iter() {
            out.add_term(
                GradedIndex::new(mode, *alpha, idx.k, idx.l),
                coeff * factor * c,
            );
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Normal-form file format.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct NfTermRecord {
    j: u32,
    k: u32,
    l: u32,
    coeffs: Vec<[f64; 2]>,
}

/// Header carried by normal-form files: the frequencies and their
/// Diophantine constants, as fixed by the unperturbed operator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalFormHeader {
    pub a: [f64; 2],
    pub c0: f64,
    pub n0: f64,
}

impl From<&FrequencyData> for NormalFormHeader {
    fn from(freq: &FrequencyData) -> Self {
        NormalFormHeader {
            a: freq.a(),
            c0: freq.c0(),
            n0: freq.n0(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct NormalFormFile {
    order: u32,
    a: [f64; 2],
    c0: f64,
    n0: f64,
    terms: Vec<NfTermRecord>,
}

impl NormalForm {
    pub fn to_json(&self, header: &NormalFormHeader) -> String {
        let file = NormalFormFile {
            order: self.order,
            a: header.a,
            c0: header.c0,
            n0: header.n0,
            terms: self
                .coeffs
                .iter()
                .map(|(&(j, k, l), poly)| NfTermRecord {
                    j,
                    k,
                    l,
                    coeffs: poly.coeffs().iter().map(|c| [c.re, c.im]).collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("normal-form serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<(Self, NormalFormHeader)> {
        let file: NormalFormFile = serde_json::from_str(text)?;
        let mut nf = NormalForm::new(file.order);
        for t in file.terms {
            let coeffs: Vec<Complex64> = t
                .coeffs
                .iter()
                .map(|&[re, im]| Complex64::new(re, im))
                .collect();
            nf.insert(t.j, t.k, t.l, HomogeneousPolynomial::new(t.j, coeffs));
        }
        Ok((
            nf,
            NormalFormHeader {
                a: file.a,
                c0: file.c0,
                n0: file.n0,
            },
        ))
    }
}
