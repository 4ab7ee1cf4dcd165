//! Behavior of recovery under noise: shrinking β only shrinks the recovered
//! set (surviving values move within the tolerance scaling), and data the
//! index set cannot express raises the model-mismatch warning.

use qbnf_core::fixtures::{golden_frequency, roundtrip_symbol, trivial_quantization, wide_window};
use qbnf_core::recover::{geometric_h_grid, noise_tolerance};
use qbnf_core::spectral::generate_spectrum_auto;
use qbnf_core::{birkhoff_normalize, inject_noise, recover, Schedule, SpectralDataset};

fn noisy_fixture(beta: f64) -> (qbnf_core::NormalForm, SpectralDataset) {
    let freq = golden_frequency(12);
    let p = roundtrip_symbol();
    let nf = birkhoff_normalize(&p, &freq, 6).unwrap().normal_form;
    let win = wide_window(&nf);
    let quant = trivial_quantization();
    let schedule = Schedule::fixed(0.2);
    let records = geometric_h_grid(0.06, 0.001, 24)
        .iter()
        .map(|&h| {
            let eps = schedule.eps_for(h);
            generate_spectrum_auto(&nf, freq.a(), &quant, &win, h, eps, 16.0).unwrap()
        })
        .collect();
    let ds = inject_noise(&SpectralDataset { records }, beta, 77);
    (nf, ds)
}

#[test]
fn decreasing_beta_only_shrinks_the_recovered_set() {
    let schedule = Schedule::fixed(0.2);
    let quant = trivial_quantization();
    let (nf, ds_hi) = noisy_fixture(1.6);
    let (_, ds_lo) = noisy_fixture(1.0);
    let h_min = ds_hi
        .records
        .iter()
        .map(|r| r.h)
        .fold(f64::INFINITY, f64::min);

    let rep_hi = recover(&ds_hi, &nf.seed_only(), &schedule, 0.2, Some(1.6), 6, &quant).unwrap();
    let rep_lo = recover(&ds_lo, &nf.seed_only(), &schedule, 0.2, Some(1.0), 6, &quant).unwrap();

    let survivors_hi: Vec<_> = rep_hi
        .classes
        .iter()
        .filter(|c| c.coeffs.is_some())
        .map(|c| c.class.members.clone())
        .collect();
    let survivors_lo: Vec<_> = rep_lo
        .classes
        .iter()
        .filter(|c| c.coeffs.is_some())
        .map(|c| c.class.members.clone())
        .collect();
    assert!(survivors_lo.len() < survivors_hi.len());
    for members in &survivors_lo {
        assert!(survivors_hi.contains(members), "set must shrink, not shift");
    }

    // Values of surviving classes agree within the looser (β = 1.0)
    // tolerance scaling, with the fixture's recorded conditioning factor.
    for lo in rep_lo.classes.iter().filter(|c| c.coeffs.is_some()) {
        let hi = rep_hi.find_class(lo.class.members[0]).unwrap();
        let a = lo.coeffs.as_ref().unwrap();
        let b = hi.coeffs.as_ref().unwrap();
        let scale = b.max_coeff().max(1e-3);
            // Drift bound: both runs' error scales, at the conditioning factor
        // recorded for this grid design.
        let tol = 15.0
            * (noise_tolerance(h_min, 1.0, lo.class.rate)
                + noise_tolerance(h_min, 1.6, lo.class.rate));
        assert!(
            a.max_diff(b) / scale <= tol,
            "class {:?} drifted by {:e} (tol {tol:e})",
            lo.class.members,
            a.max_diff(b) / scale
        );
    }
}

#[test]
fn truncated_index_set_flags_model_mismatch() {
    let freq = golden_frequency(12);
    let p = roundtrip_symbol();
    let nf = birkhoff_normalize(&p, &freq, 6).unwrap().normal_form;
    let win = wide_window(&nf);
    let quant = trivial_quantization();
    let schedule = Schedule::free(0.2);
    let mut records = Vec::new();
    for &h in &geometric_h_grid(0.02, 0.005, 5) {
        let eps = schedule.eps_for(h);
        for e in [eps, eps / 2.0] {
            records
                .push(generate_spectrum_auto(&nf, freq.a(), &quant, &win, h, e, 16.0).unwrap());
        }
    }
    let ds = SpectralDataset { records };

    // Grading-4 index set cannot express the grading-5/6 content.
    let report = recover(&ds, &nf.seed_only(), &schedule, 0.2, None, 4, &quant).unwrap();
    assert!(
        report.warnings.iter().any(|w| w.contains("model mismatch")),
        "warnings: {:?}",
        report.warnings
    );

    // The full index set fits cleanly.
    let report = recover(&ds, &nf.seed_only(), &schedule, 0.2, None, 6, &quant).unwrap();
    assert!(
        !report.warnings.iter().any(|w| w.contains("model mismatch")),
        "warnings: {:?}",
        report.warnings
    );
}
