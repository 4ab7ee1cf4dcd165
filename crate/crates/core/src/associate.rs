//! Recover the eigenvalue ↔ lattice-point correspondence from real parts.
//!
//! The real part of an in-window eigenvalue is `a·ξ(k)` to leading order,
//! and the Diophantine separation keeps the candidate values `a·ξ(k)` apart
//! by at least `h · min|a·Δk|` over the window's k-diameter. A candidate is
//! accepted only when the runner-up is worse by more than a guard fraction
//! of that separation floor, so the matcher can leave points unmatched but
//! never silently mislabels.

use serde::{Deserialize, Serialize};

use crate::freq::{min_pairwise_separation, FrequencyData};
use crate::spectral::{bohr_sommerfeld_action, QuantizationData};

/// Result of one association run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssociationOutcome {
    /// Per-eigenvalue label; `None` when the match was ambiguous or collided.
    pub labels: Vec<Option<[i64; 2]>>,
    pub matched: usize,
    /// Ambiguous under the runner-up guard.
    pub unmatched: usize,
    /// Pairs of eigenvalues that claimed the same lattice point; both are
    /// released and reported.
    pub collisions: usize,
    /// Exhaustive `min |a·Δk|` over the candidate diameter — the separation
    /// witness behind the guard.
    pub min_separation: f64,
}

impl AssociationOutcome {
    pub fn match_rate(&self) -> f64 {
        if self.labels.is_empty() {
            return 1.0;
        }
        self.matched as f64 / self.labels.len() as f64
    }
}

/// Match each eigenvalue to the lattice point minimizing
/// `|Re z − a·ξ(k)|` over the candidate box `|k|_∞ ≤ k_bound`, accepting
/// only when the runner-up differs by more than `guard · h · min|a·Δk|`.
pub fn associate(
    eigenvalues: &[num_complex::Complex64],
    freq: &FrequencyData,
    quant: &QuantizationData,
    h: f64,
    guard: f64,
    k_bound: u32,
) -> AssociationOutcome {
    assert!(guard > 0.0, "guard must be positive");
    let a = freq.a();
    let (min_separation, _) = min_pairwise_separation(a, 2 * k_bound);
    let threshold = guard * h * min_separation;

    // Candidate real parts, sorted once; nearest and runner-up are then
    // neighbors in sort order.
    let bound = k_bound as i64;
    let mut candidates: Vec<(f64, [i64; 2])> = Vec::new();
    for k1 in -bound..=bound {
        for k2 in -bound..=bound {
            let xi = bohr_sommerfeld_action([k1, k2], h, quant);
            candidates.push((a[0] * xi[0] + a[1] * xi[1], [k1, k2]));
        }
    }
    candidates.sort_by(|l, r| l.0.total_cmp(&r.0));
    let values: Vec<f64> = candidates.iter().map(|c| c.0).collect();

    let mut labels: Vec<Option<[i64; 2]>> = Vec::with_capacity(eigenvalues.len());
    for z in eigenvalues {
        let target = z.re;
        let pos = values.partition_point(|v| *v < target);
        // Examine the sorted neighbors around the insertion point.
        let lo = pos.saturating_sub(2);
        let hi = (pos + 2).min(values.len());
        let mut best: Option<(f64, [i64; 2])> = None;
        let mut runner_up = f64::INFINITY;
        for i in lo..hi {
            let d = (target - values[i]).abs();
            match best {
                Some((bd, _)) if d < bd => {
                    runner_up = bd;
                    best = Some((d, candidates[i].1));
                }
                Some((_, _)) => runner_up = runner_up.min(d),
                None => best = Some((d, candidates[i].1)),
            }
        }
        match best {
            // No competitor at all (single candidate) is unambiguous.
            Some((_, k)) if runner_up.is_infinite() => labels.push(Some(k)),
            Some((bd, k)) if runner_up - bd > threshold => labels.push(Some(k)),
            _ => labels.push(None),
        }
    }

    // Duplicate targets are collisions: release both.
    let mut collisions = 0usize;
    for i in 0..labels.len() {
        let Some(k) = labels[i] else { continue };
        for j in (i + 1)..labels.len() {
            if labels[j] == Some(k) {
                labels[i] = None;
                labels[j] = None;
                collisions += 1;
            }
        }
    }

    let matched = labels.iter().filter(|l| l.is_some()).count();
    let unmatched = labels.len() - matched;
    AssociationOutcome {
        labels,
        matched,
        unmatched,
        collisions,
        min_separation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    use crate::bnf::NormalForm;
    use crate::freq::{check_diophantine, golden_mean};
    use crate::spectral::{
        generate_spectrum_auto, inject_noise, quasi_eigenvalue, SpectralDataset,
        SpectralWindow,
    };
    use crate::symbol::HomogeneousPolynomial;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fixture() -> (NormalForm, SpectralWindow, FrequencyData) {
        let freq = check_diophantine([1.0, golden_mean()], 3.0, 2.0, 64).unwrap();
        let a = freq.a();
        let mut nf = NormalForm::new(6);
        nf.insert(
            1,
            0,
            0,
            HomogeneousPolynomial::new(1, vec![c(a[0], 0.0), c(a[1], 0.0)]),
        );
        nf.insert(0, 1, 0, HomogeneousPolynomial::new(0, vec![c(0.0, 1.0)]));
        nf.insert(
            1,
            1,
            0,
            HomogeneousPolynomial::new(1, vec![c(0.0, 0.3), c(0.0, -0.2)]),
        );
        let win = SpectralWindow::new(0.2, 4.0, c(1.0, 0.0));
        (nf, win, freq)
    }

    #[test]
    fn single_candidate_matches() {
        let freq = check_diophantine([1.0, golden_mean()], 3.0, 2.0, 4).unwrap();
        let quant = QuantizationData::trivial();
        let out = associate(&[c(0.0, 0.0)], &freq, &quant, 0.01, 0.5, 0);
        assert_eq!(out.labels, vec![Some([0, 0])]);
    }

    #[test]
    fn noiseless_labels_recovered_exactly() {
        let (nf, win, freq) = fixture();
        let quant = QuantizationData::trivial();
        for &h in &[0.01_f64, 0.005] {
            let eps = h.powf(0.7657);
            let record =
                generate_spectrum_auto(&nf, freq.a(), &quant, &win, h, eps, 12.0).unwrap();
            let bound = record.k_bound.unwrap();
            let truth = record.labels.clone().unwrap();
            let out = associate(&record.eigenvalues, &freq, &quant, h, 0.5, bound);
            assert_eq!(out.matched, truth.len(), "h = {h}");
            for (got, want) in out.labels.iter().zip(&truth) {
                assert_eq!(got.as_ref(), Some(want));
            }
        }
    }

    #[test]
    fn collisions_are_released() {
        let freq = check_diophantine([1.0, golden_mean()], 3.0, 2.0, 8).unwrap();
        let quant = QuantizationData::trivial();
        let h = 0.01_f64;
        let xi = bohr_sommerfeld_action([1, 0], h, &quant);
        let z = c(freq.a()[0] * xi[0] + freq.a()[1] * xi[1], 0.0);
        let out = associate(&[z, z], &freq, &quant, h, 0.5, 3);
        assert_eq!(out.collisions, 1);
        assert_eq!(out.matched, 0);
        assert_eq!(out.labels, vec![None, None]);
    }

    #[test]
    fn noise_sweep_never_mislabels() {
        let (nf, win, freq) = fixture();
        let quant = QuantizationData::trivial();
        let h = 0.01_f64;
        let eps = h.powf(0.7657);
        let record = generate_spectrum_auto(&nf, freq.a(), &quant, &win, h, eps, 12.0).unwrap();
        let bound = record.k_bound.unwrap();
        let truth = record.labels.clone().unwrap();
        let ds = SpectralDataset {
            records: vec![record],
        };

        // Safely above the separation threshold: everything matches.
        let quiet = inject_noise(&ds, 2.4, 7);
        let out = associate(
            &quiet.records[0].eigenvalues,
            &freq,
            &quant,
            h,
            0.5,
            bound,
        );
        assert_eq!(out.matched, truth.len());
        for (got, want) in out.labels.iter().zip(&truth) {
            assert_eq!(got.as_ref(), Some(want));
        }

        // Noise comparable to the spacing: unmatched allowed, mislabels not.
        let loud = inject_noise(&ds, 2.0, 7);
        let out = associate(&loud.records[0].eigenvalues, &freq, &quant, h, 0.5, bound);
        for (got, want) in out.labels.iter().zip(&truth) {
            if let Some(k) = got {
                assert_eq!(k, want, "mislabeled under noise");
            }
        }
    }

    #[test]
    fn stripped_record_round_trip_via_quasi() {
        // Labels derived by association reproduce the eigenvalues through
        // the quantization rule.
        let (nf, win, freq) = fixture();
        let quant = QuantizationData::trivial();
        let h = 0.005_f64;
        let eps = h.powf(0.7657);
        let record = generate_spectrum_auto(&nf, freq.a(), &quant, &win, h, eps, 12.0).unwrap();
        let bound = record.k_bound.unwrap();
        let stripped = record.strip_labels();
        let out = associate(&stripped.eigenvalues, &freq, &quant, h, 0.5, bound);
        for (z, label) in stripped.eigenvalues.iter().zip(&out.labels) {
            let k = label.expect("noiseless fixture should match fully");
            let xi = bohr_sommerfeld_action(k, h, &quant);
            let again = quasi_eigenvalue(&nf, xi, eps, h);
            assert_eq!(*z, again);
        }
    }
}
