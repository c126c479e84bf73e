use std::sync::Arc;

use num_complex::Complex64;

use super::lattice::ModeLattice;
use crate::error::{Error, Result};

/// Tolerance for the reality symmetry `v_{i,−α} = conj(v_{iα})`.
pub const REALITY_TOL: f64 = 1e-12;

/// Velocity modes `v_{iα}` for `i = 1..n` on a truncated lattice.
///
/// Coefficients are stored component-major: component `i` occupies
/// `coeffs[i * M .. (i + 1) * M]` with `M = lattice.len()`, in lattice order.
#[derive(Clone, Debug)]
pub struct ModeField {
    lattice: Arc<ModeLattice>,
    coeffs: Vec<Complex64>,
    real_flag: bool,
    diverged: bool,
}

impl ModeField {
    pub fn zeros(lattice: Arc<ModeLattice>) -> Self {
        let len = lattice.len() * lattice.dim();
        ModeField {
            lattice,
            coeffs: vec![Complex64::new(0.0, 0.0); len],
            real_flag: true,
            diverged: false,
        }
    }

    pub fn from_coeffs(lattice: Arc<ModeLattice>, coeffs: Vec<Complex64>) -> Result<Self> {
        let expected = lattice.len() * lattice.dim();
        if coeffs.len() != expected {
            return Err(Error::LatticeMismatch(format!(
                "expected {expected} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(ModeField {
            lattice,
            coeffs,
            real_flag: false,
            diverged: false,
        })
    }

    #[inline]
    pub fn lattice(&self) -> &Arc<ModeLattice> {
        &self.lattice
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    #[inline]
    pub fn modes(&self) -> usize {
        self.lattice.len()
    }

    #[inline]
    pub fn get(&self, component: usize, mode: usize) -> Complex64 {
        self.coeffs[component * self.lattice.len() + mode]
    }

    #[inline]
    pub fn set(&mut self, component: usize, mode: usize, value: Complex64) {
        let m = self.lattice.len();
        self.coeffs[component * m + mode] = value;
    }

    #[inline]
    pub fn component(&self, i: usize) -> &[Complex64] {
        let m = self.lattice.len();
        &self.coeffs[i * m..(i + 1) * m]
    }

    #[inline]
    pub fn component_mut(&mut self, i: usize) -> &mut [Complex64] {
        let m = self.lattice.len();
        &mut self.coeffs[i * m..(i + 1) * m]
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn real_flag(&self) -> bool {
        self.real_flag
    }

    pub fn set_real_flag(&mut self, flag: bool) {
        self.real_flag = flag;
    }

    pub fn is_diverged(&self) -> bool {
        self.diverged
    }

    pub fn mark_diverged(&mut self) {
        self.diverged = true;
    }

    pub fn same_lattice(&self, other: &ModeField) -> bool {
        Arc::ptr_eq(&self.lattice, &other.lattice) || self.lattice.same_shape(&other.lattice)
    }

    pub fn ensure_same_lattice(&self, other: &ModeField) -> Result<()> {
        if self.same_lattice(other) {
            Ok(())
        } else {
            Err(Error::LatticeMismatch(format!(
                "n={} L={} l={} vs n={} L={} l={}",
                self.lattice.dim(),
                self.lattice.truncation(),
                self.lattice.torus_size(),
                other.lattice.dim(),
                other.lattice.truncation(),
                other.lattice.torus_size()
            )))
        }
    }

    /// First non-finite coefficient as `(component, mode)`.
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        let m = self.lattice.len();
        self.coeffs
            .iter()
            .position(|c| !(c.re.is_finite() && c.im.is_finite()))
            .map(|p| (p / m, p % m))
    }

    pub fn is_finite(&self) -> bool {
        self.first_non_finite().is_none()
    }

    pub fn ensure_finite(&self) -> Result<()> {
        match self.first_non_finite() {
            Some((component, mode)) => Err(Error::FieldDiverged { component, mode }),
            None => Ok(()),
        }
    }

    /// `max |v_{i,−α} − conj(v_{iα})|` over all components and modes.
    pub fn reality_violation(&self) -> f64 {
        let lat = &self.lattice;
        let mut worst = 0.0f64;
        for i in 0..self.dim() {
            let c = self.component(i);
            for k in 0..lat.len() {
                worst = worst.max((c[lat.neg_index(k)] - c[k].conj()).norm());
            }
        }
        worst
    }

    pub fn is_real(&self) -> bool {
        self.reality_violation() <= REALITY_TOL
    }

    /// `self += a · other`
    pub fn axpy(&mut self, a: f64, other: &ModeField) {
        debug_assert!(self.same_lattice(other));
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
        self.real_flag = self.real_flag && other.real_flag;
    }

    pub fn scale(&mut self, a: f64) {
        for x in &mut self.coeffs {
            *x *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> ModeField {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn add(&self, other: &ModeField) -> ModeField {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &ModeField) -> ModeField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest zero-mode modulus over components.
    pub fn zero_mode_max(&self) -> f64 {
        let z = self.lattice.zero_index();
        (0..self.dim()).map(|i| self.get(i, z).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &ModeField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

}

impl PartialEq for ModeField {
    fn eq(&self, other: &Self) -> bool {
        self.same_lattice(other) && self.coeffs == other.coeffs
    }
}
