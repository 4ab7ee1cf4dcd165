//! Diophantine frequency vectors and their certification.
//!
//! A frequency vector a is usable for the normal-form construction only if
//! `|a·k| ≥ 1/(C0 |k|^{N0})` for every nonzero integer vector k; we certify
//! the bound exhaustively on the finite box `|k|_∞ ≤ K` and record K as the
//! certified radius. Here `|k|` is the Euclidean norm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A certified Diophantine frequency vector with its constants.
///
/// Construct through [`check_diophantine`]; the bound has then been verified
/// for every mode in the certified box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyData {
    a: [f64; 2],
    c0: f64,
    n0: f64,
    certified_radius: u32,
}

impl FrequencyData {
    pub fn a(&self) -> [f64; 2] {
        self.a
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn certified_radius(&self) -> u32 {
        self.certified_radius
    }

    pub fn dot(&self, n: [i32; 2]) -> f64 {
        self.a[0] * n[0] as f64 + self.a[1] * n[1] as f64
    }
}

/// Verify `|a·k| ≥ 1/(C0 |k|^{N0})` for all `0 < |k|_∞ ≤ radius`.
///
/// On failure reports the first violating k in scan order together with the
/// achieved value and the required bound.
pub fn check_diophantine(a: [f64; 2], c0: f64, n0: f64, radius: u32) -> Result<FrequencyData> {
    assert!(a != [0.0, 0.0], "frequency vector must be nonzero");
    assert!(radius >= 1, "certification radius must be at least 1");
    assert!(c0 > 0.0 && n0 > 0.0);
    let r = radius as i64;
    for k1 in -r..=r {
        for k2 in -r..=r {
            if k1 == 0 && k2 == 0 {
                continue;
            }
            let value = (a[0] * k1 as f64 + a[1] * k2 as f64).abs();
            let norm = ((k1 * k1 + k2 * k2) as f64).sqrt();
            let bound = 1.0 / (c0 * norm.powf(n0));
            if value < bound {
                return Err(Error::NotDiophantine {
                    k: [k1, k2],
                    value,
                    bound,
                });
            }
        }
    }
    Ok(FrequencyData {
        a,
        c0,
        n0,
        certified_radius: radius,
    })
}

/// Exhaustive minimum of `|a·Δk|` over `0 < |Δk|_∞ ≤ diameter`, with the
/// minimizing Δk. This is the separation witness used to set association
/// guards: the Diophantine bound lower-bounds exactly this quantity.
pub fn min_pairwise_separation(a: [f64; 2], diameter: u32) -> (f64, [i64; 2]) {
    let r = diameter as i64;
    let mut best = f64::INFINITY;
    let mut arg = [0i64, 0];
    for k1 in -r..=r {
        for k2 in -r..=r {
            if k1 == 0 && k2 == 0 {
                continue;
            }
            let value = (a[0] * k1 as f64 + a[1] * k2 as f64).abs();
            if value < best {
                best = value;
                arg = [k1, k2];
            }
        }
    }
    (best, arg)
}

/// The golden mean (1 + √5)/2, the canonical badly approximable number.
pub fn golden_mean() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_frequencies_certify() {
        let freq = check_diophantine([1.0, golden_mean()], 3.0, 2.0, 100).unwrap();
        assert_eq!(freq.certified_radius(), 100);
        // Independent worst-case scan: the certified bound must hold with
        // the achieved minimum of |a·k| |k|^{N0} at least C0⁻¹.
        let a = freq.a();
        let mut worst = f64::INFINITY;
        for k1 in -100i64..=100 {
            for k2 in -100i64..=100 {
                if (k1, k2) == (0, 0) {
                    continue;
                }
                let v = (a[0] * k1 as f64 + a[1] * k2 as f64).abs();
                let norm = ((k1 * k1 + k2 * k2) as f64).sqrt();
                worst = worst.min(v * norm.powi(2));
            }
        }
        assert!(worst >= 1.0 / 3.0, "worst product {worst}");
    }

    #[test]
    fn rational_dependence_rejected() {
        let err = check_diophantine([1.0, 1.0], 10.0, 2.0, 5).unwrap_err();
        match err {
            Error::NotDiophantine { k, value, .. } => {
                assert_eq!(k[0] + k[1], 0);
                assert_eq!(value, 0.0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn integer_dependence_rejected() {
        let err = check_diophantine([1.0, 2.0], 10.0, 2.0, 5).unwrap_err();
        match err {
            Error::NotDiophantine { k, value, .. } => {
                // a·k = 0 along the line k1 + 2 k2 = 0, e.g. ±(2, −1).
                assert_eq!(k[0] + 2 * k[1], 0);
                assert_eq!(value, 0.0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn separation_witness_matches_brute_force() {
        let a = [1.0, golden_mean()];
        let (min, arg) = min_pairwise_separation(a, 40);
        let mut brute = f64::INFINITY;
        for k1 in -40i64..=40 {
            for k2 in -40i64..=40 {
                if (k1, k2) != (0, 0) {
                    brute = brute.min((a[0] * k1 as f64 + a[1] * k2 as f64).abs());
                }
            }
        }
        assert_eq!(min, brute);
        assert!((a[0] * arg[0] as f64 + a[1] * arg[1] as f64).abs() == min);
        // The golden mean's continued fraction makes Fibonacci pairs optimal.
        assert!(min > 0.0 && min < 0.03);
    }
}
