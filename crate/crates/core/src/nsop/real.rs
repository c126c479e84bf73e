use crate::spectral::{RealModeField, ModeLattice};
use crate::stepper::SchemeConfig;

/// Adds `cc·cos(θ_d) + sc·sin(θ_d)` for lattice mode `d` into the
/// representative slot of `±d`.
fn deposit(lat: &ModeLattice, cos: &mut [f64], sin: &mut [f64], d: usize, cc: f64, sc: f64) {
    let z = lat.zero_index();
    if d >= z {
        cos[d - z] += cc;
        if d > z {
            sin[d - z] += sc;
        }
    } else {
        let rep = lat.neg_index(d) - z;
        cos[rep] += cc;
        sin[rep] -= sc;
    }
}

/// Navier-Stokes right-hand side computed entirely in the cosine/sine basis.
///
/// The advection `(v·∇)v` is expanded with product-to-sum identities;
/// products whose wavevector leaves the box are dropped, pressure is removed
/// by projecting each nonzero mode's cosine and sine vectors onto the plane
/// orthogonal to `α`, and the viscous term acts diagonally.
pub fn ns_rhs_real(v: &RealModeField, cfg: &SchemeConfig) -> RealModeField {
    let lat = v.lattice().clone();
    let n = lat.dim();
    let z = lat.zero_index();
    let half = v.half_len();
    let k = lat.wavenumber();
    let mut adv = RealModeField::zeros(lat.clone());

    for i in 0..n {
        let (ci, si) = (v.cos(i), v.sin(i));
        let mut acc_c = vec![0.0; half];
        let mut acc_s = vec![0.0; half];
        for jb in 0..half {
            let b = z + jb;
            for jg in 1..half {
                let g = z + jg;
                let gamma = lat.alpha(g);
                let (cp, sp) = (ci[jg], si[jg]);
                if cp == 0.0 && sp == 0.0 {
                    continue;
                }
                // Σ_j v_j(β-part) · ∂_j v_i(γ-part)
                let mut plus_c = 0.0;
                let mut plus_s = 0.0;
                let mut minus_c = 0.0;
                let mut minus_s = 0.0;
                for j in 0..n {
                    let f = k * gamma[j] as f64;
                    if f == 0.0 {
                        continue;
                    }
                    let (cb, sb) = (v.cos(j)[jb], v.sin(j)[jb]);
                    plus_c += f * 0.5 * (cb * sp + sb * cp);
                    minus_c += f * 0.5 * (cb * sp - sb * cp);
                    plus_s += f * 0.5 * (sb * sp - cb * cp);
                    minus_s += f * 0.5 * (cb * cp + sb * sp);
                }
                if let Some(d) = lat.sum_index(b, g) {
                    deposit(&lat, &mut acc_c, &mut acc_s, d, plus_c, plus_s);
                }
                if let Some(d) = lat.diff_index(b, g) {
                    deposit(&lat, &mut acc_c, &mut acc_s, d, minus_c, minus_s);
                }
            }
        }
        adv.cos_mut(i).copy_from_slice(&acc_c);
        adv.sin_mut(i).copy_from_slice(&acc_s);
    }

    let mut out = RealModeField::zeros(lat.clone());
    let rr = cfg.rho_r();
    let rr2 = cfg.rho_r2();
    for j in 0..half {
        let alpha = lat.alpha(z + j);
        let a2 = lat.norm_sq(z + j);
        let visc = -cfg.nu * k * k * a2 * rr2;
        let (mut nc, mut ns): (Vec<f64>, Vec<f64>) =
            (0..n).map(|i| (-adv.cos(i)[j], -adv.sin(i)[j])).unzip();
        if j > 0 {
            let dc: f64 = (0..n).map(|i| alpha[i] as f64 * nc[i]).sum::<f64>() / a2;
            let ds: f64 = (0..n).map(|i| alpha[i] as f64 * ns[i]).sum::<f64>() / a2;
            for i in 0..n {
                nc[i] -= alpha[i] as f64 * dc;
                ns[i] -= alpha[i] as f64 * ds;
            }
        }
        for i in 0..n {
            out.cos_mut(i)[j] = rr * nc[i] + visc * v.cos(i)[j];
            if j > 0 {
                out.sin_mut(i)[j] = rr * ns[i] + visc * v.sin(i)[j];
            }
        }
    }
    out
}
