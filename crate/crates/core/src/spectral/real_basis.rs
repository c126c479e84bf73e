use std::sync::Arc;

use num_complex::Complex64;

use super::field::{ModeField, REALITY_TOL};
use super::lattice::ModeLattice;
use crate::error::{Error, Result};

/// Cosine/sine coefficients over one representative of each `±α` pair.
///
/// Representatives are the lattice indices `k ≥ zero_index`, i.e. the zero
/// mode followed by every `α` whose first nonzero component is positive. Slot
/// `j` of each array refers to lattice index `zero_index + j`. The field is
/// `v_i(x) = Σ_α [c_{iα} cos(2πα·x/l) + s_{iα} sin(2πα·x/l)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealModeField {
    lattice: Arc<ModeLattice>,
    cos: Vec<Vec<f64>>,
    sin: Vec<Vec<f64>>,
}

impl RealModeField {
    pub fn zeros(lattice: Arc<ModeLattice>) -> Self {
        let half = lattice.len() / 2 + 1;
        let n = lattice.dim();
        RealModeField {
            lattice,
            cos: vec![vec![0.0; half]; n],
            sin: vec![vec![0.0; half]; n],
        }
    }

    pub fn lattice(&self) -> &Arc<ModeLattice> {
        &self.lattice
    }

    /// Number of representative modes per component.
    pub fn half_len(&self) -> usize {
        self.lattice.len() / 2 + 1
    }

    /// Lattice index of representative slot `j`.
    pub fn lattice_index(&self, j: usize) -> usize {
        self.lattice.zero_index() + j
    }

    pub fn cos(&self, i: usize) -> &[f64] {
        &self.cos[i]
    }

    pub fn sin(&self, i: usize) -> &[f64] {
        &self.sin[i]
    }

    pub fn cos_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.cos[i]
    }

    /// Sine slot 0 (the zero mode) is kept at 0.
    pub fn sin_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.sin[i]
    }

    pub fn max_abs_diff(&self, other: &RealModeField) -> f64 {
        let mut worst = 0.0f64;
        for (a, b) in self.cos.iter().chain(&self.sin).zip(other.cos.iter().chain(&other.sin)) {
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((x - y).abs());
            }
        }
        worst
    }
}

/// Complex to real basis: `c = 2 Re v_α`, `s = −2 Im v_α` for `α ≠ 0`,
/// `c = Re v_0` at the zero mode.
pub fn to_real_basis(field: &ModeField) -> Result<RealModeField> {
    let violation = field.reality_violation();
    let zero_imag = (0..field.dim())
        .map(|i| field.get(i, field.lattice().zero_index()).im.abs())
        .fold(0.0, f64::max);
    let violation = violation.max(2.0 * zero_imag);
    if violation > REALITY_TOL {
        return Err(Error::NotReal { violation });
    }
    let lat = field.lattice().clone();
    let mut out = RealModeField::zeros(lat.clone());
    let z = lat.zero_index();
    for i in 0..field.dim() {
        let comp = field.component(i);
        out.cos[i][0] = comp[z].re;
        for j in 1..out.half_len() {
            let v = comp[z + j];
            out.cos[i][j] = 2.0 * v.re;
            out.sin[i][j] = -2.0 * v.im;
        }
    }
    Ok(out)
}

/// Real to complex basis; the output is reality-symmetric by construction.
pub fn from_real_basis(real: &RealModeField) -> ModeField {
    let lat = real.lattice.clone();
    let mut out = ModeField::zeros(lat.clone());
    let z = lat.zero_index();
    for i in 0..lat.dim() {
        let comp = out.component_mut(i);
        comp[z] = Complex64::new(real.cos[i][0], 0.0);
        for j in 1..real.half_len() {
            let v = Complex64::new(real.cos[i][j], -real.sin[i][j]) * 0.5;
            comp[z + j] = v;
            comp[lat.neg_index(z + j)] = v.conj();
        }
    }
    out.set_real_flag(true);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::enforce_reality;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lat() -> Arc<ModeLattice> {
        Arc::new(ModeLattice::new(2, 2, 1.0).unwrap())
    }

    #[test]
    fn cosine_field() {
        let lat = lat();
        let mut f = ModeField::zeros(lat.clone());
        f.set(0, lat.index_of(&[0, 1]).unwrap(), Complex64::new(0.5, 0.0));
        f.set(0, lat.index_of(&[0, -1]).unwrap(), Complex64::new(0.5, 0.0));
        let r = to_real_basis(&f).unwrap();
        let j = lat.index_of(&[0, 1]).unwrap() - lat.zero_index();
        assert_eq!(r.cos(0)[j], 1.0);
        assert!(r.sin(0).iter().all(|&s| s == 0.0));
    }

    #[test]
    fn sine_field() {
        let lat = lat();
        let mut f = ModeField::zeros(lat.clone());
        f.set(0, lat.index_of(&[0, 1]).unwrap(), Complex64::new(0.0, -0.5));
        f.set(0, lat.index_of(&[0, -1]).unwrap(), Complex64::new(0.0, 0.5));
        let r = to_real_basis(&f).unwrap();
        let j = lat.index_of(&[0, 1]).unwrap() - lat.zero_index();
        assert_eq!(r.sin(0)[j], 1.0);
        assert_eq!(r.cos(0)[j], 0.0);
    }

    #[test]
    fn rejects_non_real() {
        let lat = lat();
        let mut f = ModeField::zeros(lat.clone());
        f.set(1, lat.index_of(&[1, 1]).unwrap(), Complex64::new(1.0, 0.0));
        assert!(matches!(to_real_basis(&f), Err(Error::NotReal { .. })));
    }

    #[test]
    fn round_trip_random() {
        let lat = Arc::new(ModeLattice::new(2, 3, 1.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut f = ModeField::zeros(lat);
        for c in f.coeffs_mut() {
            *c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let f = enforce_reality(&f);
        let back = from_real_basis(&to_real_basis(&f).unwrap());
        assert!(back.max_abs_diff(&f) < 1e-12);
    }
}
