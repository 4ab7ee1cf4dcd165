//! Recover normal-form coefficients from labeled spectra.
//!
//! Each index (j,k,ℓ) contributes `P_{jkℓ}(ξ) ε^k h^ℓ` to an eigenvalue, and
//! on the sampling band `|ξ| ~ h^δ` that contribution decays like
//! `h^{δj + e}` where e is the exponent of `ε^k h^ℓ` under the ε-schedule.
//! Indices whose decay rates are two-sidedly comparable for every admissible
//! ε form an equivalence class; only class sums are identifiable when ε is
//! pinned to a rational power of h. Recovery walks the classes from slowest
//! to fastest decay (the inductive order), fitting each class's homogeneous
//! polynomial by linear least squares on rate-matched residuals, then
//! polishes all surviving classes in one joint solve so that neighboring
//! decay rates cannot leak error into each other.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bnf::NormalForm;
use crate::error::{Error, Result};
use crate::linalg::{lstsq, DenseMatrix};
use crate::spectral::{bohr_sommerfeld_action, QuantizationData, SpectralDataset};
use crate::symbol::HomogeneousPolynomial;

/// How ε relates to h across the dataset.
///
/// `Free` stands in for the regime where ε may be chosen per query; the
/// concrete schedule uses the generic exponent `α = δ + (1−δ)/√2`, and
/// classification verifies that no two indices collide in decay rate, so
/// every class is a singleton. `Fixed { s }` is the constrained regime
/// `ε = h^s`; for rational s distinct indices can share a rate exactly and
/// merge into one class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Schedule {
    Free { alpha: f64 },
    Fixed { s: f64 },
}

impl Schedule {
    /// The free schedule at window exponent δ.
    pub fn free(delta: f64) -> Self {
        Schedule::Free {
            alpha: delta + (1.0 - delta) / 2f64.sqrt(),
        }
    }

    pub fn fixed(s: f64) -> Self {
        Schedule::Fixed { s }
    }

    pub fn exponent(&self) -> f64 {
        match self {
            Schedule::Free { alpha } => *alpha,
            Schedule::Fixed { s } => *s,
        }
    }

    pub fn is_free(&self) -> bool {
        matches!(self, Schedule::Free { .. })
    }

    pub fn eps_for(&self, h: f64) -> f64 {
        let e = self.exponent();
        if e == 1.0 {
            h
        } else {
            h.powf(e)
        }
    }

    /// Decay exponent of the prefactor `ε^k h^ℓ`.
    pub fn prefactor_exponent(&self, k: u32, l: u32) -> f64 {
        self.exponent() * k as f64 + l as f64
    }
}

/// One equivalence class of indices under the configured schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexClass {
    /// Members (j,k,ℓ); all share the degree j.
    pub members: Vec<(u32, u32, u32)>,
    pub degree: u32,
    /// Total decay exponent `δ j + e` of the class signal on the band
    /// `|ξ| ~ h^δ`.
    pub rate: f64,
    /// Singleton classes identify their lone coefficient; multi-member
    /// classes only identify the sum.
    pub identifiable: bool,
    /// Below the noise floor: the class decays at least as fast as h^β.
    pub excluded: bool,
}

/// Geometric h-grid from `h_max` down to `h_min`. Separating same-degree
/// classes leans entirely on variation across h, so the grid needs at least
/// as many values as the largest same-degree class family.
pub fn geometric_h_grid(h_max: f64, h_min: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && h_min < h_max);
    let ratio = (h_min / h_max).powf(1.0 / (count - 1) as f64);
    (0..count).map(|i| h_max * ratio.powi(i as i32)).collect()
}

/// All indices with k ≥ 1 and grading ≤ max_grading: the ε-dependent part
/// of the expansion, which is what the spectra can teach us.
pub fn perturbative_indices(max_grading: u32) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for k in 1..=(max_grading / 2) {
        for l in 0..=(max_grading / 2).saturating_sub(k) {
            let budget = max_grading - 2 * (k + l);
            for j in 0..=budget {
                out.push((j, k, l));
            }
        }
    }
    out.sort();
    out
}

/// Group indices into equivalence classes under the schedule and order them
/// from slowest to fastest decay (ties broken by smaller degree first).
///
/// Under the free schedule every class must be a singleton; a rate collision
/// there is an error, not an assumption. Indices with distinct degrees are
/// never merged — tied rates across degrees stay separate classes and are
/// resolved jointly at fit time through the radial variation of the band.
pub fn classify_indices(
    indices: &[(u32, u32, u32)],
    schedule: &Schedule,
    delta: f64,
    beta: Option<f64>,
) -> Result<Vec<IndexClass>> {
    const TOL: f64 = 1e-9;
    let mut tagged: Vec<((u32, u32, u32), f64)> = indices
        .iter()
        .map(|&(j, k, l)| ((j, k, l), schedule.prefactor_exponent(k, l)))
        .collect();
    tagged.sort_by(|a, b| {
        (a.1, a.0).partial_cmp(&(b.1, b.0)).expect("finite rates")
    });

    let mut classes: Vec<IndexClass> = Vec::new();
    for ((j, k, l), e) in tagged {
        let rate = delta * j as f64 + e;
        let merged = classes.iter_mut().find(|c| {
            c.degree == j && (c.rate - rate).abs() < TOL
        });
        match merged {
            Some(class) => {
                if schedule.is_free() {
                    return Err(Error::RateCollision {
                        first: class.members[0],
                        second: (j, k, l),
                    });
                }
                class.members.push((j, k, l));
                class.identifiable = false;
            }
            None => classes.push(IndexClass {
                members: vec![(j, k, l)],
                degree: j,
                rate,
                identifiable: true,
                excluded: beta.is_some_and(|b| rate >= b - TOL),
            }),
        }
    }

    if schedule.is_free() {
        // A total ordering of rates is the whole point of the free schedule.
        let mut rates: Vec<(f64, (u32, u32, u32))> =
            classes.iter().map(|c| (c.rate, c.members[0])).collect();
        rates.sort_by(|a, b| a.0.total_cmp(&b.0));
        for pair in rates.windows(2) {
            if (pair[1].0 - pair[0].0).abs() < TOL {
                return Err(Error::RateCollision {
                    first: pair[0].1,
                    second: pair[1].1,
                });
            }
        }
    }

    classes.sort_by(|a, b| {
        a.rate
            .partial_cmp(&b.rate)
            .expect("finite rates")
            .then(a.degree.cmp(&b.degree))
    });
    Ok(classes)
}

/// Noise-scaled relative tolerance for a recovered class.
pub fn noise_tolerance(h_min: f64, beta: f64, rate: f64) -> f64 {
    10.0 * h_min.powf(beta - rate)
}

/// A labeled sample point.
#[derive(Clone, Copy, Debug)]
struct SamplePoint {
    h: f64,
    eps: f64,
    xi: [f64; 2],
    z: Complex64,
    /// Whitening weight: reciprocal of the record's noise radius, so that
    /// rows from different h carry homoscedastic errors in the fits.
    weight: f64,
}

fn collect_points(ds: &SpectralDataset, quant: &QuantizationData) -> Result<Vec<SamplePoint>> {
    let mut points = Vec::new();
    for record in &ds.records {
        let labels = record
            .labels
            .as_ref()
            .ok_or(Error::MissingLabels { h: record.h })?;
        let weight = match record.beta {
            Some(beta) => record.h.powf(-beta),
            None => 1.0,
        };
        for (z, k) in record.eigenvalues.iter().zip(labels) {
            points.push(SamplePoint {
                h: record.h,
                eps: record.eps,
                xi: bohr_sommerfeld_action(*k, record.h, quant),
                z: *z,
                weight,
            });
        }
    }
    Ok(points)
}

/// Band filter: `|ξ| ∈ [h^δ/2, h^δ] ∪ [h^δ'/2, h^δ']` with the second band
/// at δ' = 1.25 δ (smaller radii, still inside the window); the radial
/// spread across the union is what separates tied classes of different
/// degree.
fn in_band(p: &SamplePoint, delta: f64) -> bool {
    let r = (p.xi[0] * p.xi[0] + p.xi[1] * p.xi[1]).sqrt();
    let b1 = p.h.powf(delta);
    let b2 = p.h.powf(1.25 * delta);
    (r >= b1 / 2.0 && r <= b1) || (r >= b2 / 2.0 && r <= b2)
}

/// Prefactor `ε^k h^ℓ` of a class at a sample point, taken from the first
/// member; under the schedule all members produce the same value.
fn class_prefactor(cls: &IndexClass, p: &SamplePoint) -> f64 {
    let (_, k, l) = cls.members[0];
    p.eps.powi(k as i32) * p.h.powi(l as i32)
}

/// Jointly fit one or more classes (tied in decay rate) against residuals.
/// Returns one polynomial per class and the post-fit residual RMS.
fn fit_group(
    classes: &[&IndexClass],
    points: &[SamplePoint],
    known: &NormalForm,
) -> Result<(Vec<HomogeneousPolynomial>, f64)> {
    let cols: usize = classes.iter().map(|c| c.degree as usize + 1).sum();
    if points.len() < cols {
        return Err(Error::EmptyFitBand);
    }
    let rows = points.len();
    let mut a = DenseMatrix::zeros(rows, cols);
    let mut rhs_re = vec![0.0; rows];
    let mut rhs_im = vec![0.0; rows];
    for (i, p) in points.iter().enumerate() {
        let predicted = known.evaluate(p.xi, p.eps, p.h);
        let resid = (p.z - predicted) * p.weight;
        rhs_re[i] = resid.re;
        rhs_im[i] = resid.im;
        let mut col = 0usize;
        for cls in classes {
            let pf = class_prefactor(cls, p) * p.weight;
            let j = cls.degree as i32;
            for t in 0..=cls.degree {
                let mono = p.xi[0].powi(j - t as i32) * p.xi[1].powi(t as i32);
                a.set(i, col, pf * mono);
                col += 1;
            }
        }
    }

    let out = lstsq(&a, &[rhs_re, rhs_im], 1e-10);
    if out.rank < cols {
        let worst = classes.iter().map(|c| c.degree).max().unwrap_or(0);
        return Err(Error::RankDeficient {
            degree: worst,
            achieved: out.rank,
            needed: cols,
        });
    }

    let mut polys = Vec::with_capacity(classes.len());
    let mut col = 0usize;
    for cls in classes {
        let mut poly = HomogeneousPolynomial::zeros(cls.degree);
        for t in 0..=cls.degree as usize {
            *poly.coeff_mut(t) =
                Complex64::new(out.solutions[0][col], out.solutions[1][col]);
            col += 1;
        }
        polys.push(poly);
    }
    let rms = ((out.residual_norms[0].powi(2) + out.residual_norms[1].powi(2))
        / rows as f64)
        .sqrt();
    Ok((polys, rms))
}

/// Record a recovered polynomial into the running `known` prediction. The
/// class polynomial is attached to the first member's index; under the
/// schedule that reproduces the class's total contribution.
fn absorb(known: &mut NormalForm, cls: &IndexClass, poly: &HomogeneousPolynomial) {
    let (j, k, l) = cls.members[0];
    known.insert(j, k, l, poly.clone());
}

/// Fit a single class assuming every strictly slower class is already
/// present in `known`. Residuals are restricted to the sampling bands and
/// rescaled by the class prefactor; the returned residual norm is in class
/// units.
pub fn fit_class(
    ds: &SpectralDataset,
    known: &NormalForm,
    cls: &IndexClass,
    quant: &QuantizationData,
    delta: f64,
) -> Result<(HomogeneousPolynomial, f64)> {
    let points: Vec<SamplePoint> = collect_points(ds, quant)?
        .into_iter()
        .filter(|p| in_band(p, delta))
        .collect();
    if points.is_empty() {
        return Err(Error::EmptyFitBand);
    }
    let (polys, rms) = fit_group(&[cls], &points, known)?;
    // Express the residual in class units at the smallest h present.
    let unit = points
        .iter()
        .map(|p| class_prefactor(cls, p))
        .fold(f64::INFINITY, f64::min);
    Ok((polys.into_iter().next().unwrap(), rms / unit.max(f64::MIN_POSITIVE)))
}

/// One recovered class in the report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecoveredClass {
    pub class: IndexClass,
    /// The recovered polynomial (the class sum); absent for classes below
    /// the noise floor.
    #[serde(with = "opt_poly")]
    pub coeffs: Option<HomogeneousPolynomial>,
    pub residual_norm: Option<f64>,
}

mod opt_poly {
    use super::HomogeneousPolynomial;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(
        v: &Option<HomogeneousPolynomial>,
        ser: S,
    ) -> Result<S::Ok, S::Error> {
        v.as_ref()
            .map(|p| p.coeffs().iter().map(|c| [c.re, c.im]).collect::<Vec<_>>())
            .serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> Result<Option<HomogeneousPolynomial>, D::Error> {
        let raw: Option<Vec<[f64; 2]>> = Option::deserialize(de)?;
        Ok(raw.map(|coeffs| {
            let degree = coeffs.len().saturating_sub(1) as u32;
            HomogeneousPolynomial::new(
                degree,
                coeffs
                    .into_iter()
                    .map(|[re, im]| Complex64::new(re, im))
                    .collect(),
            )
        }))
    }
}

/// Outcome of a full recovery run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub delta: f64,
    pub beta: Option<f64>,
    pub schedule: Schedule,
    pub h_min: f64,
    pub classes: Vec<RecoveredClass>,
    /// Indices past the noise floor, reported but never valued.
    pub excluded: Vec<(u32, u32, u32)>,
    pub warnings: Vec<String>,
}

impl RecoveryReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn find_class(&self, member: (u32, u32, u32)) -> Option<&RecoveredClass> {
        self.classes
            .iter()
            .find(|rc| rc.class.members.contains(&member))
    }
}

/// Recover all identifiable class sums with k ≥ 1 and grading ≤ max_grading.
///
/// `seed_nf` carries the ε-independent terms, which are fixed by the
/// unperturbed operator and never fitted. The walk is inductive: classes are
/// processed from slowest to fastest decay, each fit seeing the residual
/// after everything slower has been subtracted (groups tied in rate are
/// fitted jointly). A final joint solve over all surviving classes removes
/// the leakage between neighboring rates that the one-at-a-time induction
/// cannot.
pub fn recover(
    ds: &SpectralDataset,
    seed_nf: &NormalForm,
    schedule: &Schedule,
    delta: f64,
    beta: Option<f64>,
    max_grading: u32,
    quant: &QuantizationData,
) -> Result<RecoveryReport> {
    let indices = perturbative_indices(max_grading);
    let classes = classify_indices(&indices, schedule, delta, beta)?;

    let all_points = collect_points(ds, quant)?;
    let band_points: Vec<SamplePoint> = all_points
        .iter()
        .copied()
        .filter(|p| in_band(p, delta))
        .collect();
    let h_min = ds
        .records
        .iter()
        .map(|r| r.h)
        .fold(f64::INFINITY, f64::min);

    let mut warnings = Vec::new();
    for record in &ds.records {
        let labeled = record.labels.as_ref().map_or(0, |l| l.len());
        if labeled < (max_grading as usize + 1) * 2 {
            warnings.push(format!(
                "record at h = {:e} has only {labeled} labeled points",
                record.h
            ));
        }
    }

    // Inductive pass in decay order; tied rates form one joint group.
    let mut known = seed_nf.clone();
    let mut estimates: Vec<Option<HomogeneousPolynomial>> = vec![None; classes.len()];
    let mut last_rate = f64::NEG_INFINITY;
    let mut i = 0usize;
    while i < classes.len() {
        let mut group_end = i + 1;
        while group_end < classes.len()
            && (classes[group_end].rate - classes[i].rate).abs() < 1e-9
        {
            group_end += 1;
        }
        let group: Vec<&IndexClass> = classes[i..group_end]
            .iter()
            .filter(|c| !c.excluded)
            .collect();
        // Ordering soundness: every strictly slower class is already fitted.
        assert!(
            classes[i].rate >= last_rate - 1e-12,
            "class ordering violated"
        );
        last_rate = classes[i].rate;
        if !group.is_empty() {
            let (polys, _rms) = fit_group(&group, &band_points, &known)?;
            let mut poly_iter = polys.into_iter();
            for (offset, cls) in classes[i..group_end].iter().enumerate() {
                if cls.excluded {
                    continue;
                }
                let poly = poly_iter.next().unwrap();
                absorb(&mut known, cls, &poly);
                estimates[i + offset] = Some(poly);
            }
        }
        i = group_end;
    }

    // Joint polish: one solve over every class on all points. Below-floor
    // classes enter as nuisance columns — leaving them out would bias their
    // collinear siblings by the full size of the truncated signal — but
    // their fitted values are never recorded or reported.
    if !classes.is_empty() {
        let every: Vec<&IndexClass> = classes.iter().collect();
        let (polys, _rms) = fit_group(&every, &all_points, seed_nf)?;
        let mut known_final = seed_nf.clone();
        for ((slot, cls), poly) in classes.iter().enumerate().zip(polys) {
            absorb(&mut known_final, cls, &poly);
            if !cls.excluded {
                estimates[slot] = Some(poly);
            }
        }
        known = known_final;
    }

    // Model-mismatch check: the post-fit residual should sit at the noise
    // floor (or rounding level). A residual far above both means the data
    // carries structure the index set cannot express.
    if !all_points.is_empty() {
        let mut sq = 0.0;
        let mut scale = 0.0f64;
        for p in &all_points {
            sq += (p.z - known.evaluate(p.xi, p.eps, p.h)).norm_sqr();
            scale = scale.max(p.z.norm());
        }
        let rms = (sq / all_points.len() as f64).sqrt();
        let noise_floor = match beta {
            // Noise radii are the reciprocals of the whitening weights.
            Some(_) => all_points
                .iter()
                .map(|p| 1.0 / p.weight.max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max),
            None => 0.0,
        };
        let expected = noise_floor.max(1e-12 * scale);
        if rms > 1e3 * expected {
            warnings.push(format!(
                "model mismatch: residual rms {rms:e} far above the expected scale {expected:e}"
            ));
        }
    }

    // Per-class residual diagnostics in class units on the band.
    let mut report_classes = Vec::with_capacity(classes.len());
    for (slot, cls) in classes.iter().enumerate() {
        let residual_norm = if cls.excluded || band_points.is_empty() {
            None
        } else {
            let mut sq = 0.0;
            let mut unit = f64::INFINITY;
            for p in &band_points {
                let r = p.z - known.evaluate(p.xi, p.eps, p.h);
                sq += r.norm_sqr();
                unit = unit.min(class_prefactor(cls, p));
            }
            Some((sq / band_points.len() as f64).sqrt() / unit.max(f64::MIN_POSITIVE))
        };
        report_classes.push(RecoveredClass {
            class: cls.clone(),
            coeffs: estimates[slot].clone(),
            residual_norm,
        });
    }

    let excluded = classes
        .iter()
        .filter(|c| c.excluded)
        .flat_map(|c| c.members.iter().copied())
        .collect();

    Ok(RecoveryReport {
        delta,
        beta,
        schedule: *schedule,
        h_min,
        classes: report_classes,
        excluded,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freq::golden_mean;
    use crate::spectral::{generate_spectrum_auto, SpectralWindow};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn index_enumeration_respects_grading() {
        let idx = perturbative_indices(6);
        assert!(idx.contains(&(0, 1, 0)));
        assert!(idx.contains(&(4, 1, 0)));
        assert!(idx.contains(&(0, 3, 0)));
        assert!(idx.contains(&(0, 1, 2)));
        assert!(!idx.contains(&(5, 1, 0)));
        assert!(!idx.contains(&(0, 4, 0)));
        assert!(idx.iter().all(|&(j, k, l)| k >= 1 && j + 2 * (k + l) <= 6));
        assert_eq!(idx.len(), 14);
    }

    #[test]
    fn free_schedule_gives_singletons() {
        let schedule = Schedule::free(0.2);
        let classes =
            classify_indices(&perturbative_indices(6), &schedule, 0.2, None).unwrap();
        assert_eq!(classes.len(), 14);
        assert!(classes.iter().all(|c| c.identifiable));
        // Ordered by rate.
        for pair in classes.windows(2) {
            assert!(pair[0].rate <= pair[1].rate);
        }
    }

    #[test]
    fn fixed_unit_schedule_merges_equal_rates() {
        let schedule = Schedule::fixed(1.0);
        let classes = classify_indices(
            &[(0, 1, 2), (0, 2, 1)],
            &schedule,
            0.2,
            None,
        )
        .unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].members, vec![(0, 1, 2), (0, 2, 1)]);
        assert!(!classes[0].identifiable);
    }

    #[test]
    fn fixed_generic_schedule_keeps_singletons() {
        let schedule = Schedule::fixed(std::f64::consts::SQRT_2 / 2.0);
        let classes =
            classify_indices(&perturbative_indices(6), &schedule, 0.2, None).unwrap();
        assert!(classes.iter().all(|c| c.identifiable));
        assert_eq!(classes.len(), 14);
    }

    #[test]
    fn different_degrees_never_merge() {
        // Under ε = h^δ the indices (2,1,0), (1,2,0), (0,3,0) share the
        // total rate 3δ but keep distinct degrees.
        let schedule = Schedule::fixed(0.2);
        let classes = classify_indices(
            &[(2, 1, 0), (1, 2, 0), (0, 3, 0)],
            &schedule,
            0.2,
            None,
        )
        .unwrap();
        assert_eq!(classes.len(), 3);
        for pair in classes.windows(2) {
            assert!((pair[0].rate - pair[1].rate).abs() < 1e-12);
        }
        // Tie broken by degree ascending.
        assert_eq!(classes[0].degree, 0);
        assert_eq!(classes[1].degree, 1);
        assert_eq!(classes[2].degree, 2);
    }

    #[test]
    fn beta_floor_marks_exclusions() {
        let schedule = Schedule::fixed(0.2);
        let beta = 3.0 * 0.2 + 1.0;
        let classes = classify_indices(
            &perturbative_indices(6),
            &schedule,
            0.2,
            Some(beta),
        )
        .unwrap();
        for cls in &classes {
            let (j, k, l) = cls.members[0];
            let floor = (j + k) as f64 * 0.2 + l as f64;
            assert_eq!(
                cls.excluded,
                floor >= beta - 1e-9,
                "index ({j},{k},{l})"
            );
        }
        // (2,1,1) sits exactly on the floor and must be excluded.
        let edge = classes
            .iter()
            .find(|c| c.members.contains(&(2, 1, 1)))
            .unwrap();
        assert!(edge.excluded);
    }

    /// Forward fixture: linear frequencies plus a spread of ε-dependent
    /// terms, sampled on an h-grid under the given schedule.
    fn forward_dataset(
        nf: &NormalForm,
        schedule: &Schedule,
        hs: &[f64],
        win: &SpectralWindow,
    ) -> SpectralDataset {
        let quant = QuantizationData::trivial();
        let a = [1.0, golden_mean()];
        let records = hs
            .iter()
            .map(|&h| {
                let eps = schedule.eps_for(h);
                generate_spectrum_auto(nf, a, &quant, win, h, eps, 16.0).unwrap()
            })
            .collect();
        SpectralDataset { records }
    }

    fn base_nf() -> NormalForm {
        let a = [1.0, golden_mean()];
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
        nf
    }

    #[test]
    fn fit_constant_class_is_exact() {
        // nf = a·ξ + iεF: the single class (0,1,0) comes back exactly.
        let nf = base_nf();
        let schedule = Schedule::free(0.2);
        let win = SpectralWindow::new(0.2, 4.0, c(1.0, 0.0));
        let ds = forward_dataset(&nf, &schedule, &[0.01, 0.005], &win);
        let cls = IndexClass {
            members: vec![(0, 1, 0)],
            degree: 0,
            rate: schedule.prefactor_exponent(1, 0),
            identifiable: true,
            excluded: false,
        };
        let mut known = nf.seed_only();
        // The (1,1,0) slope is also present; include it in `known` so the
        // constant class is the only unknown.
        known.insert(
            1,
            1,
            0,
            HomogeneousPolynomial::new(1, vec![c(0.0, 0.3), c(0.0, -0.2)]),
        );
        let (poly, rms) =
            fit_class(&ds, &known, &cls, &QuantizationData::trivial(), 0.2).unwrap();
        assert!((poly.coeff(0) - c(0.0, 1.0)).norm() < 1e-10);
        assert!(rms < 1e-9);
    }

    #[test]
    fn fit_reports_rank_deficiency() {
        // A single record with a single labeled point cannot pin a slope.
        let nf = base_nf();
        let schedule = Schedule::free(0.2);
        let win = SpectralWindow::new(0.2, 4.0, c(1.0, 0.0));
        let mut ds = forward_dataset(&nf, &schedule, &[0.01], &win);
        let record = &mut ds.records[0];
        record.eigenvalues.truncate(1);
        if let Some(labels) = record.labels.as_mut() {
            labels.truncate(1);
        }
        let cls = IndexClass {
            members: vec![(1, 1, 0)],
            degree: 1,
            rate: schedule.prefactor_exponent(1, 0) + 0.2,
            identifiable: true,
            excluded: false,
        };
        let known = nf.seed_only();
        let err = fit_class(&ds, &known, &cls, &QuantizationData::trivial(), 0.2);
        assert!(matches!(
            err,
            Err(Error::RankDeficient { .. }) | Err(Error::EmptyFitBand)
        ));
    }

    #[test]
    fn round_trip_recovers_free_schedule() {
        let mut nf = base_nf();
        nf.insert(
            2,
            1,
            0,
            HomogeneousPolynomial::new(
                2,
                vec![c(0.04, 0.01), c(-0.02, 0.03), c(0.01, 0.0)],
            ),
        );
        nf.insert(0, 2, 0, HomogeneousPolynomial::new(0, vec![c(0.012, 0.008)]));
        nf.insert(0, 1, 1, HomogeneousPolynomial::new(0, vec![c(0.0, 0.02)]));
        let schedule = Schedule::free(0.2);
        let win = SpectralWindow::new(0.2, 4.0, c(1.0, 0.0));
        let hs = geometric_h_grid(0.02, 0.004, 8);
        let ds = forward_dataset(&nf, &schedule, &hs, &win);
        let report = recover(
            &ds,
            &nf.seed_only(),
            &schedule,
            0.2,
            None,
            6,
            &QuantizationData::trivial(),
        )
        .unwrap();

        for member in [(0, 1, 0), (1, 1, 0), (2, 1, 0), (0, 2, 0), (0, 1, 1)] {
            let rc = report.find_class(member).unwrap();
            let got = rc.coeffs.as_ref().unwrap();
            let want = nf.class_sum(&rc.class.members);
            let denom = want.max_coeff().max(1e-3);
            assert!(
                got.max_diff(&want) / denom < 1e-6,
                "class {member:?}: got {:?}, want {:?}",
                got.coeffs(),
                want.coeffs()
            );
        }
        // Absent classes come back as (near) zero.
        let rc = report.find_class((0, 3, 0)).unwrap();
        assert!(rc.coeffs.as_ref().unwrap().max_coeff() < 1e-6);
    }

    #[test]
    fn fixed_unit_schedule_exposes_only_sums() {
        // Swapping coefficient mass between (0,1,2) and (0,2,1) while
        // keeping the sum produces the same dataset and the same report.
        let schedule = Schedule::fixed(1.0);
        let win = SpectralWindow::new(0.2, 4.0, c(1.0, 0.0));
        let mut nf1 = base_nf();
        nf1.insert(0, 1, 2, HomogeneousPolynomial::new(0, vec![c(0.3, 0.1)]));
        nf1.insert(0, 2, 1, HomogeneousPolynomial::new(0, vec![c(-0.1, 0.2)]));
        let mut nf2 = base_nf();
        nf2.insert(0, 1, 2, HomogeneousPolynomial::new(0, vec![c(0.1, 0.25)]));
        nf2.insert(0, 2, 1, HomogeneousPolynomial::new(0, vec![c(0.1, 0.05)]));

        let hs = geometric_h_grid(0.02, 0.005, 5);
        let ds1 = forward_dataset(&nf1, &schedule, &hs, &win);
        let ds2 = forward_dataset(&nf2, &schedule, &hs, &win);
        for (r1, r2) in ds1.records.iter().zip(&ds2.records) {
            assert_eq!(r1.labels, r2.labels);
            for (z1, z2) in r1.eigenvalues.iter().zip(&r2.eigenvalues) {
                assert!((z1 - z2).norm() < 1e-13);
            }
        }

        let quant = QuantizationData::trivial();
        let rep1 = recover(&ds1, &nf1.seed_only(), &schedule, 0.2, None, 6, &quant).unwrap();
        let rep2 = recover(&ds2, &nf2.seed_only(), &schedule, 0.2, None, 6, &quant).unwrap();
        let c1 = rep1.find_class((0, 1, 2)).unwrap();
        let c2 = rep2.find_class((0, 1, 2)).unwrap();
        assert!(!c1.class.identifiable);
        assert!(c1.class.members.contains(&(0, 2, 1)));
        let s1 = c1.coeffs.as_ref().unwrap();
        let s2 = c2.coeffs.as_ref().unwrap();
        assert!(s1.max_diff(s2) < 1e-9);
        // And the sum equals the true class sum.
        let want = nf1.class_sum(&c1.class.members);
        assert!(s1.max_diff(&want) < 1e-6);
    }

    #[test]
    fn report_json_round_trip() {
        let nf = base_nf();
        let schedule = Schedule::free(0.2);
        let win = SpectralWindow::new(0.2, 4.0, c(1.0, 0.0));
        let hs = geometric_h_grid(0.02, 0.005, 5);
        let ds = forward_dataset(&nf, &schedule, &hs, &win);
        let report = recover(
            &ds,
            &nf.seed_only(),
            &schedule,
            0.2,
            None,
            4,
            &QuantizationData::trivial(),
        )
        .unwrap();
        let text = report.to_json();
        let back = RecoveryReport::from_json(&text).unwrap();
        assert_eq!(back.classes.len(), report.classes.len());
        for (a, b) in report.classes.iter().zip(&back.classes) {
            assert_eq!(a.class, b.class);
            match (&a.coeffs, &b.coeffs) {
                (Some(x), Some(y)) => assert!(x.max_diff(y) == 0.0),
                (None, None) => {}
                _ => panic!("coeff mismatch"),
            }
        }
    }
}
