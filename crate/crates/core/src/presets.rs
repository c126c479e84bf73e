//! Canonical initial data and analytic references.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::{enforce_reality, ModeField, ModeLattice};

/// Envelope `C/(1+|α|^{n+s})` used by [`random_decay`].
pub fn decay_envelope(lattice: &ModeLattice, k: usize, s: f64, c: f64) -> f64 {
    c / (1.0 + lattice.magnitude(k).powf(lattice.dim() as f64 + s))
}

/// `v₁ = A cos(2πx₁/l) sin(2πx₂/l)`, `v₂ = −A sin(2πx₁/l) cos(2πx₂/l)`.
pub fn taylor_green_2d(lattice: &Arc<ModeLattice>, amplitude: f64) -> Result<ModeField> {
    if lattice.dim() != 2 {
        return Err(Error::param("n", "Taylor-Green data needs n = 2"));
    }
    if lattice.truncation() < 2 {
        return Err(Error::param("L", "Taylor-Green data needs L >= 2"));
    }
    let q = amplitude / 4.0;
    let mut f = ModeField::zeros(lattice.clone());
    for (alpha, v1, v2) in [
        ([1, 1], -q, q),
        ([1, -1], q, q),
        ([-1, 1], -q, -q),
        ([-1, -1], q, -q),
    ] {
        let k = lattice.index_of(&alpha).expect("L >= 1");
        f.set(0, k, Complex64::new(0.0, v1));
        f.set(1, k, Complex64::new(0.0, v2));
    }
    f.set_real_flag(true);
    Ok(f)
}

/// Analytic Taylor-Green decay factor `exp(−8π²νt/l²)`, before any time
/// rescaling.
pub fn taylor_green_factor(nu: f64, l: f64, t: f64) -> f64 {
    (-8.0 * PI * PI * nu * t / (l * l)).exp()
}

/// `v_i = A cos(2πx_j/l)` with every other component zero.
pub fn single_shear(lattice: &Arc<ModeLattice>, component: usize, axis: usize, amplitude: f64) -> Result<ModeField> {
    let n = lattice.dim();
    if n < 2 || component >= n || axis >= n || component == axis {
        return Err(Error::param(
            "axis",
            format!("need distinct component and axis below n = {n}, got ({component}, {axis})"),
        ));
    }
    if lattice.truncation() < 1 {
        return Err(Error::param("L", "shear data needs L >= 1"));
    }
    let mut f = ModeField::zeros(lattice.clone());
    let mut e = vec![0i32; n];
    for sign in [1, -1] {
        e[axis] = sign;
        let k = lattice.index_of(&e).expect("L >= 1");
        f.set(component, k, Complex64::new(amplitude / 2.0, 0.0));
    }
    f.set_real_flag(true);
    Ok(f)
}

/// Random-phase data with `max_i |v_{iα}| = C/(1+|α|^{n+s})` on every mode.
///
/// Phases are drawn per mode and component, the field is symmetrized, each
/// nonzero mode is projected onto the plane orthogonal to `α`, and every mode
/// is finally rescaled so its largest component sits exactly on the envelope.
/// The zero mode is `±C` per component.
pub fn random_decay(lattice: &Arc<ModeLattice>, s: f64, c: f64, seed: u64) -> Result<ModeField> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::param("C", format!("must be positive, got {c}")));
    }
    if !s.is_finite() {
        return Err(Error::param("s", "must be finite"));
    }
    let n = lattice.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = ModeField::zeros(lattice.clone());
    let z = lattice.zero_index();
    for k in 0..lattice.len() {
        let env = decay_envelope(lattice, k, s, c);
        for i in 0..n {
            let phase: f64 = rng.gen_range(0.0..2.0 * PI);
            let v = if k == z {
                Complex64::new(if phase < PI { env } else { -env }, 0.0)
            } else {
                Complex64::from_polar(env, phase)
            };
            f.set(i, k, v);
        }
    }
    let mut f = enforce_reality(&f);
    for k in 0..lattice.len() {
        if k == z {
            continue;
        }
        let alpha = lattice.alpha(k);
        let a2 = lattice.norm_sq(k);
        let dot: Complex64 = (0..n).map(|i| f.get(i, k) * alpha[i] as f64).sum();
        for i in 0..n {
            let v = f.get(i, k) - dot * (alpha[i] as f64 / a2);
            f.set(i, k, v);
        }
        let peak = (0..n).map(|i| f.get(i, k).norm()).fold(0.0, f64::max);
        if peak > 0.0 {
            let scale = decay_envelope(lattice, k, s, c) / peak;
            for i in 0..n {
                let v = f.get(i, k) * scale;
                f.set(i, k, v);
            }
        }
    }
    let mut f = enforce_reality(&f);
    f.set_real_flag(true);
    Ok(f)
}
