use serde::Serialize;

use super::field::ModeField;
use crate::error::{Error, Result};

/// Fitted envelope `|v_{iα}| ≈ C/(1+|α|^e)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayProfile {
    pub constant: f64,
    /// `+∞` for the zero field.
    pub exponent: f64,
    /// `exponent − n`.
    pub s_estimate: f64,
    /// RMS of the log-space residuals.
    pub residual: f64,
    pub shells: usize,
}

/// Per-shell envelope samples `(|α*|, max |v|)`, where shells are the
/// integer radii `round(|α|) ≥ 1` and `α*` is the mode attaining the maximum.
pub fn shell_maxima(field: &ModeField) -> Vec<(f64, f64)> {
    let lat = field.lattice();
    let mut best: Vec<Option<(f64, f64)>> = Vec::new();
    for k in 0..lat.len() {
        let r = lat.magnitude(k);
        let shell = r.round() as usize;
        if shell == 0 {
            continue;
        }
        if best.len() <= shell {
            best.resize(shell + 1, None);
        }
        for i in 0..field.dim() {
            let a = field.get(i, k).norm();
            if a > 0.0 && best[shell].map_or(true, |(_, m)| a > m) {
                best[shell] = Some((r, a));
            }
        }
    }
    best.into_iter().flatten().collect()
}

/// `ln(1 + ρ^e)` without overflow.
fn log1p_pow(ln_r: f64, e: f64) -> f64 {
    let x = e * ln_r;
    if x > 30.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

struct Samples {
    ln_r: Vec<f64>,
    ln_y: Vec<f64>,
}

impl Samples {
    /// Closed-form `ln C` and residual sum of squares for a fixed exponent.
    fn evaluate(&self, e: f64) -> (f64, f64) {
        let m = self.ln_r.len() as f64;
        let shifted: Vec<f64> = self
            .ln_r
            .iter()
            .zip(&self.ln_y)
            .map(|(&lr, &ly)| ly + log1p_pow(lr, e))
            .collect();
        let ln_c = shifted.iter().sum::<f64>() / m;
        let rss = shifted.iter().map(|x| (x - ln_c).powi(2)).sum();
        (ln_c, rss)
    }
}

const EXPONENT_RANGE: (f64, f64) = (-10.0, 60.0);
const GRID_STEP: f64 = 0.05;

/// Fits `C/(1+|α|^e)` to the per-shell maxima by least squares in log space.
pub fn fit_decay(field: &ModeField) -> Result<DecayProfile> {
    field.ensure_finite()?;
    let n = field.dim() as f64;
    let shells = shell_maxima(field);
    if shells.is_empty() && field.max_abs() == 0.0 {
        return Ok(DecayProfile {
            constant: 0.0,
            exponent: f64::INFINITY,
            s_estimate: f64::INFINITY,
            residual: 0.0,
            shells: 0,
        });
    }
    if shells.len() < 2 {
        return Err(Error::InsufficientShells {
            found: shells.len(),
            needed: 2,
        });
    }
    let samples = Samples {
        ln_r: shells.iter().map(|(r, _)| r.ln()).collect(),
        ln_y: shells.iter().map(|(_, y)| y.ln()).collect(),
    };

    let (lo, hi) = EXPONENT_RANGE;
    let steps = ((hi - lo) / GRID_STEP).round() as usize;
    let (mut best_e, mut best_rss) = (lo, f64::INFINITY);
    for k in 0..=steps {
        let e = lo + k as f64 * GRID_STEP;
        let (_, rss) = samples.evaluate(e);
        if rss < best_rss {
            best_rss = rss;
            best_e = e;
        }
    }

    // Golden-section refinement inside the bracketing grid cells.
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = ((best_e - GRID_STEP).max(lo), (best_e + GRID_STEP).min(hi));
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (samples.evaluate(c).1, samples.evaluate(d).1);
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = samples.evaluate(c).1;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = samples.evaluate(d).1;
        }
    }
    let e = 0.5 * (a + b);
    let (ln_c, rss) = samples.evaluate(e);
    let (e, ln_c, rss) = if rss <= best_rss {
        (e, ln_c, rss)
    } else {
        let (lc, r) = samples.evaluate(best_e);
        (best_e, lc, r)
    };
    Ok(DecayProfile {
        constant: ln_c.exp(),
        exponent: e,
        s_estimate: e - n,
        residual: (rss / shells.len() as f64).sqrt(),
        shells: shells.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ModeLattice;
    use num_complex::Complex64;
    use std::sync::Arc;

    fn power_field(n: usize, l: usize, amp: f64, e: f64) -> ModeField {
        let lat = Arc::new(ModeLattice::new(n, l, 1.0).unwrap());
        let mut f = ModeField::zeros(lat.clone());
        for k in 0..lat.len() {
            let v = amp / (1.0 + lat.magnitude(k).powf(e));
            for i in 0..n {
                f.set(i, k, Complex64::new(v, 0.0));
            }
        }
        f
    }

    #[test]
    fn recovers_power_law() {
        let p = fit_decay(&power_field(2, 8, 1.0, 5.0)).unwrap();
        assert!((p.exponent - 5.0).abs() < 0.05, "{p:?}");
        assert!((p.constant - 1.0).abs() < 0.05);
        assert!((p.s_estimate - 3.0).abs() < 0.05);
        assert!(p.residual < 1e-6);
    }

    #[test]
    fn flat_field_has_zero_exponent() {
        let lat = Arc::new(ModeLattice::new(2, 8, 1.0).unwrap());
        let mut f = ModeField::zeros(lat);
        for c in f.coeffs_mut() {
            *c = Complex64::new(1.0, 0.0);
        }
        let p = fit_decay(&f).unwrap();
        assert!(p.exponent.abs() < 0.05, "{p:?}");
    }

    #[test]
    fn zero_field_sentinel() {
        let lat = Arc::new(ModeLattice::new(2, 3, 1.0).unwrap());
        let p = fit_decay(&ModeField::zeros(lat)).unwrap();
        assert_eq!(p.constant, 0.0);
        assert!(p.exponent.is_infinite());
    }

    #[test]
    fn single_shell_is_an_error() {
        let lat = Arc::new(ModeLattice::new(2, 3, 1.0).unwrap());
        let mut f = ModeField::zeros(lat.clone());
        f.set(0, lat.index_of(&[1, 0]).unwrap(), Complex64::new(1.0, 0.0));
        let err = fit_decay(&f).unwrap_err();
        assert!(err.to_string().contains("insufficient shells"));
    }
}
