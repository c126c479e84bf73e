//! Exponential actions and truncated time-ordered series on mode fields.

mod dense;

use crate::error::{Error, Result};
use crate::nsop::ModeOperator;
use crate::spectral::{sobolev_norm_unchecked, ModeField};

pub use dense::{dense_expm, dense_expm_real, max_abs, norm_inf};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpmOptions {
    /// Stop once a series term is below `tol` times the running sum (h^0).
    pub tol: f64,
    pub max_terms: usize,
}

impl Default for ExpmOptions {
    fn default() -> Self {
        ExpmOptions {
            tol: 1e-15,
            max_terms: 200,
        }
    }
}

/// Upper limit on `⌈t·‖M‖_∞⌉`; larger products are reported as not converged.
pub const MAX_SUBSTEPS: usize = 4096;

/// `exp(t·M) v` by a truncated Taylor series.
///
/// The interval is split into `⌈t·‖M‖_∞⌉` substeps so that each series runs
/// with a scaled operator of norm at most one.
pub fn matrix_exp_action<O: ModeOperator + ?Sized>(
    op: &O,
    v: &ModeField,
    t: f64,
    opts: ExpmOptions,
) -> Result<ModeField> {
    if !(opts.tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    let norm = op.norm_inf() * t.abs();
    if !norm.is_finite() {
        return Err(Error::ExpmNotConverged {
            terms: 0,
            last_term: norm,
        });
    }
    if norm == 0.0 {
        return Ok(v.clone());
    }
    if norm > MAX_SUBSTEPS as f64 {
        return Err(Error::ExpmNotConverged {
            terms: 0,
            last_term: norm,
        });
    }
    let substeps = norm.ceil().max(1.0) as usize;
    let h = t / substeps as f64;
    let mut x = v.clone();
    for _ in 0..substeps {
        x = taylor_action(op, &x, h, opts)?;
    }
    x.set_real_flag(v.real_flag());
    Ok(x)
}

fn taylor_action<O: ModeOperator + ?Sized>(op: &O, v: &ModeField, h: f64, opts: ExpmOptions) -> Result<ModeField> {
    let mut sum = v.clone();
    let mut term = v.clone();
    let mut last = f64::INFINITY;
    for k in 1..=opts.max_terms {
        term = op.apply(&term);
        term.scale(h / k as f64);
        sum.axpy(1.0, &term);
        last = sobolev_norm_unchecked(&term, 0.0);
        if !last.is_finite() {
            break;
        }
        if last <= opts.tol * sobolev_norm_unchecked(&sum, 0.0) {
            return Ok(sum);
        }
    }
    Err(Error::ExpmNotConverged {
        terms: opts.max_terms,
        last_term: last,
    })
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre(points: usize) -> Vec<(f64, f64)> {
    (0..points)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (points as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=points {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = points as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            (0.5 * (1.0 - x), 0.5 * w)
        })
        .collect()
}

/// Weights `W[j][l] = ∫_0^{τ_j} L_l(τ) dτ` for the Lagrange basis on `q`
/// equispaced nodes `τ_j = j/(q−1)` of `[0, 1]`.
pub fn cumulative_weights(q: usize) -> Vec<Vec<f64>> {
    let nodes: Vec<f64> = (0..q).map(|j| j as f64 / (q - 1) as f64).collect();
    let basis = |l: usize, t: f64| -> f64 {
        nodes
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != l)
            .map(|(_, &tm)| (t - tm) / (nodes[l] - tm))
            .product()
    };
    let rule = gauss_legendre(q / 2 + 1);
    nodes
        .iter()
        .map(|&tj| {
            (0..q)
                .map(|l| rule.iter().map(|&(x, w)| w * tj * basis(l, x * tj)).sum())
                .collect()
        })
        .collect()
}

/// `v0 + Σ_{m=1..order} ∫_{t0<t_m<…<t_1<t0+dt} E(t_1)…E(t_m) v0`.
///
/// Each nesting level `y_m(t) = ∫_{t0}^t E(s) y_{m−1}(s) ds` is evaluated on
/// `q` equispaced nodes with cumulative interpolatory weights, which are exact
/// when `E(s) y_{m−1}(s)` is a polynomial of degree below `q`.
pub fn time_ordered_series<O, F>(sampler: F, t0: f64, dt: f64, v0: &ModeField, order: usize, q: usize) -> Result<ModeField>
where
    O: ModeOperator,
    F: Fn(f64) -> O,
{
    if order == 0 {
        return Err(Error::param("order", "must be at least 1"));
    }
    if q < 2 {
        return Err(Error::param("q", "need at least 2 quadrature points"));
    }
    let weights = cumulative_weights(q);
    let ops: Vec<O> = (0..q).map(|j| sampler(t0 + dt * j as f64 / (q - 1) as f64)).collect();
    let mut level: Vec<ModeField> = vec![v0.clone(); q];
    let mut total = v0.clone();
    for _ in 0..order {
        let images: Vec<ModeField> = ops.iter().zip(&level).map(|(op, y)| op.apply(y)).collect();
        let mut next = Vec::with_capacity(q);
        for row in &weights {
            let mut acc = ModeField::zeros(v0.lattice().clone());
            for (w, img) in row.iter().zip(&images) {
                if *w != 0.0 {
                    acc.axpy(w * dt, img);
                }
            }
            next.push(acc);
        }
        total.axpy(1.0, &next[q - 1]);
        level = next;
    }
    total.ensure_finite()?;
    total.set_real_flag(v0.real_flag());
    Ok(total)
}

#[cfg(test)]
mod tests;
