//! Mode lattices, field storage, norms and basis conversions.

mod decay;
mod field;
mod io;
mod lattice;
mod real_basis;

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use decay::{fit_decay, shell_maxima, DecayProfile};
pub use field::{ModeField, REALITY_TOL};
pub use io::{field_from_json, field_to_json, read_field, write_field, FieldFile, ModeEntry};
pub use lattice::{ModeIndex, ModeLattice};
pub use real_basis::{from_real_basis, to_real_basis, RealModeField};

/// Imaginary parts below this are discarded silently by [`eval_physical`].
pub const IMAG_DISCARD: f64 = 1e-10;
/// Imaginary parts above this make [`eval_physical`] fail.
pub const IMAG_ERROR: f64 = 1e-8;

/// Dual Sobolev norm `sqrt(Σ_{i,α} |v_{iα}|² (1+|α|²)^s)`.
pub fn sobolev_norm(field: &ModeField, s: f64) -> Result<f64> {
    field.ensure_finite()?;
    Ok(sobolev_norm_unchecked(field, s))
}

/// [`sobolev_norm`] without the finiteness check; non-finite input yields a
/// non-finite result.
pub fn sobolev_norm_unchecked(field: &ModeField, s: f64) -> f64 {
    let lat = field.lattice();
    let weights: Vec<f64> = (0..lat.len()).map(|k| (1.0 + lat.norm_sq(k)).powf(s)).collect();
    let mut acc = 0.0;
    for i in 0..field.dim() {
        for (c, w) in field.component(i).iter().zip(&weights) {
            acc += c.norm_sqr() * w;
        }
    }
    acc.sqrt()
}

/// `h^s` distance between two fields on the same lattice.
pub fn sobolev_distance(a: &ModeField, b: &ModeField, s: f64) -> Result<f64> {
    a.ensure_same_lattice(b)?;
    sobolev_norm(&a.sub(b), s)
}

/// Restricts `field` to `|α_i| ≤ new_truncation`, preserving the mode order.
pub fn truncate(field: &ModeField, new_truncation: usize) -> Result<ModeField> {
    let lat = field.lattice();
    if new_truncation > lat.truncation() {
        return Err(Error::TruncationTooLarge {
            requested: new_truncation,
            available: lat.truncation(),
        });
    }
    if new_truncation == lat.truncation() {
        return Ok(field.clone());
    }
    let small = Arc::new(ModeLattice::new(lat.dim(), new_truncation, lat.torus_size())?);
    let mut out = ModeField::zeros(small.clone());
    for k in 0..small.len() {
        let src = lat.index_of(small.alpha(k)).expect("sub-box mode must exist");
        for i in 0..field.dim() {
            out.set(i, k, field.get(i, src));
        }
    }
    out.set_real_flag(field.real_flag());
    Ok(out)
}

/// Zero-pads `field` onto a larger box.
pub fn extend(field: &ModeField, new_truncation: usize) -> Result<ModeField> {
    let lat = field.lattice();
    if new_truncation < lat.truncation() {
        return truncate(field, new_truncation);
    }
    let big = Arc::new(ModeLattice::new(lat.dim(), new_truncation, lat.torus_size())?);
    let mut out = ModeField::zeros(big.clone());
    for k in 0..lat.len() {
        let dst = big.index_of(lat.alpha(k)).expect("sub-box mode must exist");
        for i in 0..field.dim() {
            out.set(i, dst, field.get(i, k));
        }
    }
    out.set_real_flag(field.real_flag());
    Ok(out)
}

/// Symmetrizes every conjugate pair: `v_{iα} ← (v_{iα} + conj(v_{i,−α}))/2`.
pub fn enforce_reality(field: &ModeField) -> ModeField {
    let lat = field.lattice().clone();
    let mut out = field.clone();
    for i in 0..field.dim() {
        let src = field.component(i);
        let dst = out.component_mut(i);
        for k in 0..=lat.zero_index() {
            let nk = lat.neg_index(k);
            let v = (src[k] + src[nk].conj()) * 0.5;
            dst[k] = v;
            dst[nk] = v.conj();
        }
    }
    out.set_real_flag(true);
    out
}

/// Evaluates `Σ_α v_{iα} exp(2πi α·x / l)` for every component.
pub fn eval_physical(field: &ModeField, x: &[f64]) -> Result<Vec<f64>> {
    let values = eval_complex(field, x)?;
    let mut out = Vec::with_capacity(values.len());
    for v in values {
        let scale = 1.0f64.max(v.re.abs());
        if v.im.abs() > IMAG_ERROR * scale {
            return Err(Error::ImaginaryResidue { residue: v.im.abs() });
        }
        out.push(v.re);
    }
    Ok(out)
}

/// Complex physical-space values, without the reality check.
pub fn eval_complex(field: &ModeField, x: &[f64]) -> Result<Vec<Complex64>> {
    let lat = field.lattice();
    if x.len() != lat.dim() {
        return Err(Error::param("x", format!("point has {} coordinates, lattice dimension is {}", x.len(), lat.dim())));
    }
    let k = lat.wavenumber();
    let mut out = vec![Complex64::new(0.0, 0.0); field.dim()];
    for (m, alpha) in lat.iter() {
        let phase: f64 = alpha.iter().zip(x).map(|(&a, &xi)| a as f64 * xi).sum::<f64>() * k;
        let e = Complex64::from_polar(1.0, phase);
        for (i, o) in out.iter_mut().enumerate() {
            *o += field.get(i, m) * e;
        }
    }
    Ok(out)
}

/// Divergence modes `d_α = Σ_j (2πi α_j / l) v_{jα}`.
pub fn divergence(field: &ModeField) -> Vec<Complex64> {
    let lat = field.lattice();
    let k = lat.wavenumber();
    (0..lat.len())
        .map(|m| {
            let alpha = lat.alpha(m);
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &a) in alpha.iter().enumerate() {
                acc += field.get(j, m) * (a as f64);
            }
            acc * Complex64::new(0.0, k)
        })
        .collect()
}

/// `max_α |d_α|`.
pub fn max_divergence(field: &ModeField) -> f64 {
    divergence(field).iter().map(|d| d.norm()).fold(0.0, f64::max)
}
