use std::sync::Arc;

use ndarray::{s, Array1, Array2, ArrayView2};
use num_complex::Complex64;

use super::{projected_nonlinear, support, symbol_table, I};
use crate::spectral::{ModeField, ModeLattice};
use crate::stepper::SchemeConfig;

/// A linear map on mode fields of one lattice.
pub trait ModeOperator {
    fn lattice(&self) -> &Arc<ModeLattice>;

    fn apply(&self, w: &ModeField) -> ModeField;

    /// Induced ∞-norm (maximum absolute row sum) in the flat `(i, α)` basis.
    fn norm_inf(&self) -> f64;
}

/// Dense `nM × nM` operator matrix; row and column `i·M + k` refer to
/// component `i` at lattice mode `k`.
#[derive(Clone, Debug)]
pub struct CoeffMatrix {
    lattice: Arc<ModeLattice>,
    data: Array2<Complex64>,
    pub time_label: f64,
}

impl CoeffMatrix {
    pub fn zeros(lattice: Arc<ModeLattice>) -> Self {
        let size = lattice.len() * lattice.dim();
        CoeffMatrix {
            lattice,
            data: Array2::zeros((size, size)),
            time_label: 0.0,
        }
    }

    pub fn from_array(lattice: Arc<ModeLattice>, data: Array2<Complex64>) -> Self {
        let size = lattice.len() * lattice.dim();
        assert_eq!(data.dim(), (size, size), "matrix shape does not match lattice");
        CoeffMatrix {
            lattice,
            data,
            time_label: 0.0,
        }
    }

    pub fn size(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.data
    }

    pub fn into_array(self) -> Array2<Complex64> {
        self.data
    }

    /// Block `(i, j)` over `lattice × lattice`.
    pub fn block(&self, i: usize, j: usize) -> ArrayView2<'_, Complex64> {
        let m = self.lattice.len();
        self.data.slice(s![i * m..(i + 1) * m, j * m..(j + 1) * m])
    }

    pub fn add_diagonal(&mut self, diag: &[f64]) {
        for (k, d) in diag.iter().enumerate() {
            self.data[[k, k]] += d;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl ModeOperator for CoeffMatrix {
    fn lattice(&self) -> &Arc<ModeLattice> {
        &self.lattice
    }

    fn apply(&self, w: &ModeField) -> ModeField {
        assert!(w.lattice().same_shape(&self.lattice), "operand lattice mismatch");
        let x = Array1::from(w.coeffs().to_vec());
        let y = self.data.dot(&x);
        let mut out = ModeField::from_coeffs(self.lattice.clone(), y.to_vec()).expect("shape checked");
        out.set_real_flag(w.real_flag());
        out
    }

    fn norm_inf(&self) -> f64 {
        self.data
            .rows()
            .into_iter()
            .map(|row| row.iter().map(|c| c.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Dense Euler-part matrix `E(v)` with `E(v)·w = scale·(convection(v,w) +
/// leray_term(v,w))`; pass `scale = ρr`.
///
/// Entries, with `g = Σ_j γ_j v_{j(α−γ)}` and `k = 2π/l`:
/// `E[(i,α),(c,γ)] = −scale·ik·g·(δ_{ic} − α_iα_c/|α|²)`, the projector term
/// being absent at `α = 0`.
pub fn assemble_euler_matrix(v: &ModeField, scale: f64) -> CoeffMatrix {
    let lat = v.lattice().clone();
    let n = lat.dim();
    let m = lat.len();
    let k = lat.wavenumber();
    let z = lat.zero_index();
    let mut mat = CoeffMatrix::zeros(lat.clone());
    for a in 0..m {
        let alpha = lat.alpha(a);
        let a2 = lat.norm_sq(a);
        for c in 0..m {
            let Some(b) = lat.diff_index(a, c) else { continue };
            let gamma = lat.alpha(c);
            let mut g = Complex64::new(0.0, 0.0);
            for j in 0..n {
                g += v.get(j, b) * gamma[j] as f64;
            }
            if g == Complex64::new(0.0, 0.0) {
                continue;
            }
            let base = -I * (scale * k) * g;
            for i in 0..n {
                mat.data[[i * m + a, i * m + c]] += base;
                if a != z {
                    for q in 0..n {
                        let proj = alpha[i] as f64 * alpha[q] as f64 / a2;
                        mat.data[[i * m + a, q * m + c]] -= base * proj;
                    }
                }
            }
        }
    }
    mat
}

/// Full matrix `A(v) = ρr²·diag(symbol) + E(v)` with `E` scaled by `ρr`.
pub fn assemble_full_matrix(v: &ModeField, cfg: &SchemeConfig) -> CoeffMatrix {
    let mut mat = assemble_euler_matrix(v, cfg.rho_r());
    let sym = symbol_table(v.lattice(), cfg.nu);
    let diag: Vec<f64> = (0..v.dim())
        .flat_map(|_| sym.iter().map(|d| d * cfg.rho_r2()))
        .collect();
    mat.add_diagonal(&diag);
    mat
}

/// Matrix-free form of [`assemble_euler_matrix`]: applies through the sparse
/// convolution and evaluates the same row-sum norm without assembling.
#[derive(Clone, Debug)]
pub struct EulerOperator {
    v: ModeField,
    scale: f64,
}

impl EulerOperator {
    pub fn new(v: ModeField, scale: f64) -> Self {
        EulerOperator { v, scale }
    }

    pub fn coefficients(&self) -> &ModeField {
        &self.v
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn to_matrix(&self) -> CoeffMatrix {
        assemble_euler_matrix(&self.v, self.scale)
    }
}

impl ModeOperator for EulerOperator {
    fn lattice(&self) -> &Arc<ModeLattice> {
        self.v.lattice()
    }

    fn apply(&self, w: &ModeField) -> ModeField {
        let mut out = projected_nonlinear(&self.v, w).expect("operand lattice mismatch");
        out.scale(self.scale);
        out
    }

    fn norm_inf(&self) -> f64 {
        let lat = self.v.lattice();
        let n = lat.dim();
        let m = lat.len();
        let z = lat.zero_index();
        let mut row = vec![0.0f64; m];
        for b in support(&self.v) {
            for c in 0..m {
                let Some(a) = lat.sum_index(b, c) else { continue };
                let gamma = lat.alpha(c);
                let mut g = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    g += self.v.get(j, b) * gamma[j] as f64;
                }
                row[a] += g.norm();
            }
        }
        let mut worst = 0.0f64;
        for (a, &r) in row.iter().enumerate() {
            if r == 0.0 {
                continue;
            }
            let alpha = lat.alpha(a);
            let a2 = lat.norm_sq(a);
            for i in 0..n {
                let weight = if a == z {
                    1.0
                } else {
                    (0..n)
                        .map(|q| {
                            let delta = if q == i { 1.0 } else { 0.0 };
                            (delta - alpha[i] as f64 * alpha[q] as f64 / a2).abs()
                        })
                        .sum()
                };
                worst = worst.max(r * weight);
            }
        }
        worst * self.scale.abs() * lat.wavenumber()
    }
}
