//! Forward model: the distorted eigenvalue lattice induced by a normal form.
//!
//! Quasi-eigenvalues are the normal form evaluated at the Bohr–Sommerfeld
//! actions `ξ(k) = h(k − k0/4) − S/2π`, filtered through the h- and
//! ε-dependent complex window. The generated spectra ARE the model here;
//! there is no operator discretization behind them — the inverse theory
//! operates entirely on these lattice asymptotics.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bnf::NormalForm;
use crate::error::{Error, Result};

/// Quantization constants of the unperturbed operator: Maslov indices k0 and
/// actions S over the fundamental cycles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantizationData {
    pub k0: [i64; 2],
    pub s: [f64; 2],
}

impl QuantizationData {
    pub fn trivial() -> Self {
        QuantizationData {
            k0: [0, 0],
            s: [0.0, 0.0],
        }
    }
}

/// The complex window `|Re z| < h^δ/C`, `|Im z − ε Re F| < ε h^δ/C`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SpectralWindow {
    pub delta: f64,
    pub c: f64,
    /// Torus average of the perturbation symbol; only its real part enters
    /// the membership test.
    pub f: Complex64,
}

impl SpectralWindow {
    pub fn new(delta: f64, c: f64, f: Complex64) -> Self {
        assert!(delta > 0.0 && delta < 1.0, "delta must lie in (0,1)");
        assert!(c > 0.0, "window constant must be positive");
        SpectralWindow { delta, c, f }
    }

    /// Half-width of the real-part constraint at this h.
    pub fn radius(&self, h: f64) -> f64 {
        h.powf(self.delta) / self.c
    }

    pub fn contains(&self, z: Complex64, h: f64, eps: f64) -> bool {
        let r = self.radius(h);
        z.re.abs() < r && (z.im - eps * self.f.re).abs() < eps * r
    }
}

/// One spectral sample: all retained eigenvalues at a given (h, ε), with the
/// generating lattice labels (strippable) and the noise exponent if noise
/// was injected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralRecord {
    pub h: f64,
    pub eps: f64,
    pub beta: Option<f64>,
    #[serde(with = "complex_pairs")]
    pub eigenvalues: Vec<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub labels: Option<Vec<[i64; 2]>>,
    /// Lattice search radius used by the generator; consumers reuse it as
    /// the candidate radius when re-deriving labels.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k_bound: Option<u32>,
}

impl SpectralRecord {
    pub fn strip_labels(&self) -> Self {
        let mut r = self.clone();
        r.labels = None;
        r
    }
}

mod complex_pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], ser: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(de)?;
        Ok(pairs
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect())
    }
}

/// A whole dataset: one record per (h, ε) sample, JSONL on disk.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpectralDataset {
    pub records: Vec<SpectralRecord>,
}

impl SpectralDataset {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for record in &self.records {
            out.push_str(&serde_json::to_string(record).expect("record serialization"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut records = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            records.push(serde_json::from_str(line)?);
        }
        Ok(SpectralDataset { records })
    }

    pub fn strip_labels(&self) -> Self {
        SpectralDataset {
            records: self.records.iter().map(|r| r.strip_labels()).collect(),
        }
    }
}

/// Bohr–Sommerfeld action for the lattice point k: `h(k − k0/4) − S/2π`.
pub fn bohr_sommerfeld_action(k: [i64; 2], h: f64, quant: &QuantizationData) -> [f64; 2] {
    let two_pi = 2.0 * std::f64::consts::PI;
    [
        h * (k[0] as f64 - quant.k0[0] as f64 / 4.0) - quant.s[0] / two_pi,
        h * (k[1] as f64 - quant.k0[1] as f64 / 4.0) - quant.s[1] / two_pi,
    ]
}

/// Value of the normal form at an action point: `Σ P_{jkℓ}(ξ) ε^k h^ℓ`.
pub fn quasi_eigenvalue(nf: &NormalForm, xi: [f64; 2], eps: f64, h: f64) -> Complex64 {
    nf.evaluate(xi, eps, h)
}

/// Search-box radius that covers the window with a ×2 margin: the smallest
/// bound with `|a| h (bound/2) ≥ 2 h^δ/C`, widened by the lattice offset
/// from k0 and S.
pub fn default_search_bound(
    a: [f64; 2],
    win: &SpectralWindow,
    quant: &QuantizationData,
    h: f64,
) -> u32 {
    let norm = (a[0] * a[0] + a[1] * a[1]).sqrt();
    let core = (4.0 * win.radius(h) / (norm * h)).ceil();
    let two_pi = 2.0 * std::f64::consts::PI;
    let offset = (quant.k0[0].abs().max(quant.k0[1].abs()) as f64 / 4.0)
        + quant.s[0].abs().max(quant.s[1].abs()) / (two_pi * h);
    (core + offset.ceil()) as u32 + 1
}

/// Like [`generate_spectrum`] but grows the search bound geometrically from
/// [`default_search_bound`] until the window is covered. The linear-in-`a`
/// default underestimates the box when the window parallelogram is stretched
/// along the `a`-strip, so coverage is established by the boundary check
/// rather than assumed.
pub fn generate_spectrum_auto(
    nf: &NormalForm,
    a: [f64; 2],
    quant: &QuantizationData,
    win: &SpectralWindow,
    h: f64,
    eps: f64,
    m_exp: f64,
) -> Result<SpectralRecord> {
    let mut bound = default_search_bound(a, win, quant, h);
    for _ in 0..12 {
        match generate_spectrum(nf, quant, win, h, eps, bound, m_exp) {
            Err(Error::WindowNotCovered { .. }) => {
                bound = (bound * 3).div_ceil(2) + 1;
            }
            other => return other,
        }
    }
    generate_spectrum(nf, quant, win, h, eps, bound, m_exp)
}

/// Enumerate `|k|_∞ ≤ k_search_bound`, keep quasi-eigenvalues inside the
/// window, and record them with their generating labels.
///
/// `eps` must lie in the admissible range `[h^m_exp, h^δ]`. If a retained
/// point sits on the search boundary the box did not cover the window and
/// an error is returned.
pub fn generate_spectrum(
    nf: &NormalForm,
    quant: &QuantizationData,
    win: &SpectralWindow,
    h: f64,
    eps: f64,
    k_search_bound: u32,
    m_exp: f64,
) -> Result<SpectralRecord> {
    assert!(h > 0.0 && h < 1.0);
    let lo = h.powf(m_exp);
    let hi = h.powf(win.delta);
    if eps < lo || eps > hi * (1.0 + 1e-9) {
        return Err(Error::EpsOutOfRange { eps, h, lo, hi });
    }
    let bound = k_search_bound as i64;
    let mut eigenvalues = Vec::new();
    let mut labels = Vec::new();
    for k1 in -bound..=bound {
        for k2 in -bound..=bound {
            let k = [k1, k2];
            let xi = bohr_sommerfeld_action(k, h, quant);
            let z = quasi_eigenvalue(nf, xi, eps, h);
            if win.contains(z, h, eps) {
                if k1.abs() == bound || k2.abs() == bound {
                    return Err(Error::WindowNotCovered { k });
                }
                eigenvalues.push(z);
                labels.push(k);
            }
        }
    }
    Ok(SpectralRecord {
        h,
        eps,
        beta: None,
        eigenvalues,
        labels: Some(labels),
        k_bound: Some(k_search_bound),
    })
}

/// Add an independent complex perturbation of modulus at most `h^β` to every
/// eigenvalue (uniform in the disk, seeded, reproducible). Labels are kept.
///
/// An infinite β means no noise by convention; the dataset is returned
/// unchanged.
pub fn inject_noise(ds: &SpectralDataset, beta: f64, seed: u64) -> SpectralDataset {
    assert!(beta > 0.0, "noise exponent must be positive");
    if beta.is_infinite() {
        return ds.clone();
    }
    let mut out = ds.clone();
    for (record_idx, record) in out.records.iter_mut().enumerate() {
        // One independent, reproducible stream per record, so records can be
        // generated in any order or in parallel.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(record_idx as u64 + 1);
        let radius = record.h.powf(beta);
        for z in record.eigenvalues.iter_mut() {
            *z += disk_sample(&mut rng) * radius;
        }
        record.beta = Some(beta);
    }
    out
}

/// Uniform sample from the closed unit disk by rejection; avoids
/// transcendental functions so the stream is stable.
fn disk_sample<R: Rng>(rng: &mut R) -> Complex64 {
    loop {
        let u: f64 = rng.random::<f64>() * 2.0 - 1.0;
        let v: f64 = rng.random::<f64>() * 2.0 - 1.0;
        if u * u + v * v <= 1.0 {
            return Complex64::new(u, v);
        }
    }
}
