//! Navier-Stokes mode operator: viscous symbol, convection, pressure and the
//! Leray term, plus their matrix forms.
//!
//! With `k = 2π/l` the nonlinear terms on the box lattice are
//!
//! ```text
//! b_{iα} = −ik Σ_γ (γ·v_{α−γ}) w_{iγ}
//! S_α    = Σ_γ (α·w_γ)(γ·v_{α−γ})
//! p_α    = −S_α / |α|²              (p_0 = 0)
//! g_{iα} = −ik α_i p_α
//! ```
//!
//! where both `γ` and `α − γ` range over the box. `g` removes exactly the
//! longitudinal part of `b`, so `α·(b_α + g_α) = 0` for every `α ≠ 0`.

mod matrix;
mod real;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;
use crate::spectral::{ModeField, ModeLattice};
use crate::stepper::SchemeConfig;

pub use matrix::{assemble_euler_matrix, assemble_full_matrix, CoeffMatrix, EulerOperator, ModeOperator};
pub use real::ns_rhs_real;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `−ν Σ_j 4π² α_j² / l²`.
pub fn dissipative_symbol(alpha: &[i32], nu: f64, l: f64) -> f64 {
    let k = 2.0 * std::f64::consts::PI / l;
    let a2: f64 = alpha.iter().map(|&a| (a as f64) * (a as f64)).sum();
    -nu * k * k * a2
}

/// Dissipative symbol for every lattice mode, in lattice order.
pub fn symbol_table(lattice: &ModeLattice, nu: f64) -> Vec<f64> {
    let k = lattice.wavenumber();
    (0..lattice.len()).map(|m| -nu * k * k * lattice.norm_sq(m)).collect()
}

/// Pressure modes `p_α` on a lattice; `p_0 = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PressureModes {
    pub values: Vec<Complex64>,
}

/// Raw convolution sums `(Σ_γ (γ·v_{α−γ}) w_{iγ}, S_α)`, before the `−ik`
/// factor on the first.
struct Convolution {
    flux: Vec<Complex64>,
    s: Vec<Complex64>,
}

/// Modes where at least one component is nonzero.
fn support(field: &ModeField) -> Vec<usize> {
    let n = field.dim();
    (0..field.modes())
        .filter(|&k| (0..n).any(|i| field.get(i, k) != Complex64::new(0.0, 0.0)))
        .collect()
}

const PARALLEL_PAIRS: usize = 1 << 15;

/// Scatters every product pair `(β from v, γ from w)` into `α = β + γ`.
/// The cost is proportional to the product of the two supports.
fn convolve(v: &ModeField, w: &ModeField) -> Convolution {
    let lat = v.lattice();
    let n = lat.dim();
    let m = lat.len();
    let sv = support(v);
    let sw = support(w);

    let bound = lat.truncation() as i32;
    let z = lat.zero_index();
    let mut v_alpha = Vec::with_capacity(sv.len() * n);
    let mut v_vals = Vec::with_capacity(sv.len() * n);
    for &b in &sv {
        v_alpha.extend_from_slice(lat.alpha(b));
        v_vals.extend((0..n).map(|j| v.get(j, b)));
    }

    let work = |gammas: &[usize]| {
        let mut flux = vec![Complex64::new(0.0, 0.0); n * m];
        let mut wg = vec![Complex64::new(0.0, 0.0); n];
        for &g in gammas {
            let gamma = lat.alpha(g);
            for (i, x) in wg.iter_mut().enumerate() {
                *x = w.get(i, g);
            }
            'pairs: for (k, &b) in sv.iter().enumerate() {
                let beta = &v_alpha[k * n..(k + 1) * n];
                for (bc, gc) in beta.iter().zip(gamma) {
                    if (bc + gc).abs() > bound {
                        continue 'pairs;
                    }
                }
                // Flat indices are affine in the mode, so α = β + γ maps to
                // b + g − z.
                let a = b + g - z;
                let vb = &v_vals[k * n..(k + 1) * n];
                let mut dot = Complex64::new(0.0, 0.0);
                for (x, &gj) in vb.iter().zip(gamma) {
                    dot += x * gj as f64;
                }
                if dot == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (i, x) in wg.iter().enumerate() {
                    flux[i * m + a] += dot * x;
                }
            }
        }
        flux
    };

    let flux = if sv.len() * sw.len() < PARALLEL_PAIRS {
        work(&sw)
    } else {
        let chunk = sw.len().div_ceil(rayon::current_num_threads().max(1) * 4).max(1);
        sw.par_chunks(chunk)
            .map(work)
            .reduce_with(|mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                a
            })
            .unwrap_or_else(|| work(&[]))
    };
    // S_α = Σ_γ (α·w_γ)(γ·v_{α−γ}) is α contracted with the flux.
    let s = (0..m)
        .map(|a| {
            lat.alpha(a)
                .iter()
                .enumerate()
                .map(|(i, &ai)| flux[i * m + a] * ai as f64)
                .sum()
        })
        .collect();
    Convolution { flux, s }
}

/// Convection modes `b_{iα} = −Σ_j Σ_γ (2πi γ_j / l) v_{j(α−γ)} w_{iγ}`.
pub fn convection(v: &ModeField, w: &ModeField) -> Result<ModeField> {
    v.ensure_same_lattice(w)?;
    let k = v.lattice().wavenumber();
    let conv = convolve(v, w);
    let coeffs = conv.flux.into_iter().map(|x| -I * k * x).collect();
    ModeField::from_coeffs(v.lattice().clone(), coeffs)
}

/// Pressure modes of the bilinear form `(v, w)`.
pub fn pressure_modes(v: &ModeField, w: &ModeField) -> Result<PressureModes> {
    v.ensure_same_lattice(w)?;
    let conv = convolve(v, w);
    Ok(PressureModes {
        values: pressure_from_s(v.lattice(), &conv.s),
    })
}

fn pressure_from_s(lat: &ModeLattice, s: &[Complex64]) -> Vec<Complex64> {
    let z = lat.zero_index();
    s.iter()
        .enumerate()
        .map(|(a, &x)| if a == z { Complex64::new(0.0, 0.0) } else { -x / lat.norm_sq(a) })
        .collect()
}

fn leray_from_pressure(lat: &ModeLattice, p: &[Complex64]) -> Vec<Complex64> {
    let k = lat.wavenumber();
    let m = lat.len();
    let mut out = vec![Complex64::new(0.0, 0.0); lat.dim() * m];
    for a in 0..m {
        for (i, &ai) in lat.alpha(a).iter().enumerate() {
            out[i * m + a] = -I * (k * ai as f64) * p[a];
        }
    }
    out
}

/// Leray term `g_{iα} = −(2πi α_i / l) p_α`.
pub fn leray_term(v: &ModeField, w: &ModeField) -> Result<ModeField> {
    let p = pressure_modes(v, w)?;
    ModeField::from_coeffs(v.lattice().clone(), leray_from_pressure(v.lattice(), &p.values))
}

/// `convection(v, w) + leray_term(v, w)` from a single convolution pass.
pub fn projected_nonlinear(v: &ModeField, w: &ModeField) -> Result<ModeField> {
    v.ensure_same_lattice(w)?;
    let lat = v.lattice();
    let k = lat.wavenumber();
    let conv = convolve(v, w);
    let g = leray_from_pressure(lat, &pressure_from_s(lat, &conv.s));
    let coeffs = conv.flux.into_iter().zip(g).map(|(b, g)| -I * k * b + g).collect();
    let mut out = ModeField::from_coeffs(lat.clone(), coeffs)?;
    out.set_real_flag(v.real_flag() && w.real_flag());
    Ok(out)
}

/// `ρr²·symbol(α)·v_{iα} + ρr·[convection(v,v) + leray_term(v,v)]_{iα}`.
pub fn ns_rhs(v: &ModeField, cfg: &SchemeConfig) -> Result<ModeField> {
    let mut out = projected_nonlinear(v, v)?;
    out.scale(cfg.rho_r());
    let sym = symbol_table(v.lattice(), cfg.nu);
    let c = cfg.rho_r2();
    for i in 0..v.dim() {
        let src = v.component(i);
        for ((o, x), d) in out.component_mut(i).iter_mut().zip(src).zip(&sym) {
            *o += x * (c * d);
        }
    }
    out.set_real_flag(v.real_flag());
    Ok(out)
}
