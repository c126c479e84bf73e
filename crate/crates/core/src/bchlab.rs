//! Finite-matrix bench: decay classes `M^s_n`, transposed brackets, truncated
//! BCH series and Trotter residuals.

use ndarray::{Array1, Array2, ArrayView2, LinalgScalar};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dyson::dense_expm_real;
use crate::error::{Error, Result};
use crate::spectral::ModeLattice;

/// Smallest `C` with `|m_{αβ}| ≤ C/(1+|α−β|^s)` over the lattice.
pub fn msn_constant<T: Copy + Into<Complex64>>(lattice: &ModeLattice, m: ArrayView2<'_, T>, s: f64) -> f64 {
    let mut worst = 0.0f64;
    for ((a, b), &x) in m.indexed_iter() {
        let v: Complex64 = x.into();
        if v.norm() > 0.0 {
            worst = worst.max(v.norm() * (1.0 + lattice.distance(a, b).powf(s)));
        }
    }
    worst
}

/// Matrix with entries exactly `1/(1+|α−β|^s)`.
pub fn decay_kernel(lattice: &ModeLattice, s: f64) -> Array2<f64> {
    let m = lattice.len();
    Array2::from_shape_fn((m, m), |(a, b)| 1.0 / (1.0 + lattice.distance(a, b).powf(s)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductDecay {
    /// `msn(DE, r+s−n) / (msn(D, s)·msn(E, r))`.
    pub c_measured: f64,
    pub claim_exponent: f64,
    pub product_constant: f64,
    pub d_constant: f64,
    pub e_constant: f64,
}

/// Measures the constant of `D·E` in the class `M^{r+s−n}`.
pub fn product_decay_check(lattice: &ModeLattice, d: ArrayView2<'_, f64>, s: f64, e: ArrayView2<'_, f64>, r: f64) -> Result<ProductDecay> {
    let m = lattice.len();
    if d.dim() != (m, m) || e.dim() != (m, m) {
        return Err(Error::LatticeMismatch(format!("matrices must be {m}×{m}")));
    }
    let claim_exponent = r + s - lattice.dim() as f64;
    let product = d.dot(&e);
    let product_constant = msn_constant(lattice, product.view(), claim_exponent);
    let d_constant = msn_constant(lattice, d, s);
    let e_constant = msn_constant(lattice, e, r);
    let denom = d_constant * e_constant;
    Ok(ProductDecay {
        c_measured: if denom > 0.0 { product_constant / denom } else { 0.0 },
        claim_exponent,
        product_constant,
        d_constant,
        e_constant,
    })
}

/// [`product_decay_check`] on `D = E = decay_kernel(n + extra)` for each
/// truncation.
pub fn product_decay_scan(n: usize, extra: f64, truncations: &[usize]) -> Result<Vec<(usize, ProductDecay)>> {
    truncations
        .iter()
        .map(|&l| {
            let lat = ModeLattice::new(n, l, 1.0)?;
            let k = decay_kernel(&lat, n as f64 + extra);
            let s = n as f64 + extra;
            Ok((l, product_decay_check(&lat, k.view(), s, k.view(), s)?))
        })
        .collect()
}

/// Transposed bracket `[E, B]_T = E·B − Bᵀ·E`.
pub fn lie_bracket_t<A: LinalgScalar>(e: &Array2<A>, b: &Array2<A>) -> Array2<A> {
    e.dot(b) - b.t().dot(e)
}

fn bracket(x: &Array2<f64>, y: &Array2<f64>) -> Array2<f64> {
    x.dot(y) - y.dot(x)
}

/// BCH series `log(e^X e^Y)` through order `q ≤ 4`.
pub fn standard_bch(x: &Array2<f64>, y: &Array2<f64>, q: usize) -> Result<Array2<f64>> {
    if !(1..=4).contains(&q) {
        return Err(Error::param("q", format!("order must lie in 1..=4, got {q}")));
    }
    let mut c = x + y;
    if q >= 2 {
        let xy = bracket(x, y);
        c = c + &xy * 0.5;
        if q >= 3 {
            let xxy = bracket(x, &xy);
            c = c + &xxy / 12.0 + &bracket(&xy, y) / 12.0;
            if q >= 4 {
                c = c + &bracket(&xxy, y) / 24.0;
            }
        }
    }
    Ok(c)
}

/// The same series with the diagonal-matrix substitution rules
/// `[A,B] → AΔB`, `[A,[A,B]] → 2A²ΔB`, `[[A,B],B] → A[ΔB,B]_T`,
/// `[A,[[A,B],B]] → A²([ΔB,B]_T + [ΔB,Bᵀ]_T)` and
/// `[[A,[A,B]],B] → 2A²[ΔB,B]_T`, where `ΔB = B − Bᵀ`.
///
/// These rules are not identities for general diagonal `A`; the series is
/// evaluated for comparison only.
pub fn substituted_bch(a_diag: &[f64], y: &Array2<f64>, q: usize) -> Result<Array2<f64>> {
    if !(1..=4).contains(&q) {
        return Err(Error::param("q", format!("order must lie in 1..=4, got {q}")));
    }
    let a = Array2::from_diag(&Array1::from(a_diag.to_vec()));
    let a2 = a.dot(&a);
    let bt = y.t().to_owned();
    let db = y - &bt;
    let mut c = &a + y;
    if q >= 2 {
        c = c + a.dot(&db) * 0.5;
    }
    let dbb = lie_bracket_t(&db, y);
    if q >= 3 {
        c = c + a2.dot(&db) * (2.0 / 12.0) + a.dot(&dbb) / 12.0;
    }
    if q >= 4 {
        let dbbt = lie_bracket_t(&db, &bt);
        c = c + a2.dot(&(&dbb + &dbbt)) / 48.0 + a2.dot(&dbb) * (2.0 / 48.0);
    }
    Ok(c)
}

fn max_abs(m: &Array2<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BchTruncation {
    pub c_standard: Array2<f64>,
    pub c_substituted: Array2<f64>,
    /// `max |exp(At)exp(Bt) − exp(C)|` for each series.
    pub residual_standard: f64,
    pub residual_substituted: f64,
}

/// Both order-`q` series for `(tA, tB)` and their residuals against the
/// dense product of exponentials.
pub fn bch_truncation(a_diag: &[f64], b: &Array2<f64>, q: usize, t: f64) -> Result<BchTruncation> {
    let size = a_diag.len();
    if b.dim() != (size, size) {
        return Err(Error::param("B", format!("must be {size}×{size}")));
    }
    let ta: Vec<f64> = a_diag.iter().map(|x| x * t).collect();
    let a = Array2::from_diag(&Array1::from(ta.clone()));
    let tb = b * t;
    let exact = Array2::from_diag(&Array1::from(ta.iter().map(|x| x.exp()).collect::<Vec<_>>())).dot(&dense_expm_real(&tb));
    let c_standard = standard_bch(&a, &tb, q)?;
    let c_substituted = substituted_bch(&ta, &tb, q)?;
    Ok(BchTruncation {
        residual_standard: max_abs(&(&dense_expm_real(&c_standard) - &exact)),
        residual_substituted: max_abs(&(&dense_expm_real(&c_substituted) - &exact)),
        c_standard,
        c_substituted,
    })
}

/// `max |(e^{At/k} e^{Bt/k})^k v − e^{(A+B)t} v|`.
pub fn trotter_residual(a_diag: &[f64], b: &Array2<f64>, v: &[f64], t: f64, k: usize) -> Result<f64> {
    let size = a_diag.len();
    if b.dim() != (size, size) || v.len() != size {
        return Err(Error::param("B", format!("operands must have size {size}")));
    }
    if k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    let h = t / k as f64;
    let ea = Array1::from(a_diag.iter().map(|x| (x * h).exp()).collect::<Vec<_>>());
    let eb = dense_expm_real(&(b * h));
    let mut x = Array1::from(v.to_vec());
    for _ in 0..k {
        x = &ea * &eb.dot(&x);
    }
    let full = Array2::from_diag(&Array1::from(a_diag.to_vec())) + b;
    let exact = dense_expm_real(&(full * t)).dot(&Array1::from(v.to_vec()));
    Ok((&x - &exact).iter().fold(0.0f64, |acc, d| acc.max(d.abs())))
}

/// Residuals for `k = 1, 2, 4, …, k_max`.
pub fn trotter_residual_series(a_diag: &[f64], b: &Array2<f64>, v: &[f64], t: f64, k_max: usize) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    let mut k = 1;
    while k <= k_max {
        out.push((k, trotter_residual(a_diag, b, v, t, k)?));
        k *= 2;
    }
    Ok(out)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Seeded pair: diagonal entries uniform in `[−2, −0.1]`, dense `B` uniform
/// in `[−1/2, 1/2]`, and a unit-box vector.
pub fn random_dissipative_pair(size: usize, seed: u64) -> (Vec<f64>, Array2<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = (0..size).map(|_| rng.gen_range(-2.0..-0.1)).collect();
    let b = Array2::from_shape_fn((size, size), |_| rng.gen_range(-0.5..0.5));
    let v = (0..size).map(|_| rng.gen_range(-1.0..1.0)).collect();
    (a, b, v)
}

/// Row of a bench report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub case: String,
    /// Series order `q` or Trotter factor count `k`.
    pub param: usize,
    pub t: f64,
    pub residual_standard: f64,
    pub residual_substituted: Option<f64>,
}

/// BCH residuals of one random pair at `t0, t0/2, …` (`halvings + 1`
/// values); returns the rows and the fitted order of the standard series.
pub fn bch_order_study(seed: u64, size: usize, q: usize, t0: f64, halvings: usize) -> Result<(Vec<BenchRow>, f64)> {
    let (a, b, _) = random_dissipative_pair(size, seed);
    let mut rows = Vec::new();
    for h in 0..=halvings {
        let t = t0 / (1u64 << h) as f64;
        let r = bch_truncation(&a, &b, q, t)?;
        rows.push(BenchRow {
            case: format!("bch-seed{seed}"),
            param: q,
            t,
            residual_standard: r.residual_standard,
            residual_substituted: Some(r.residual_substituted),
        });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.residual_standard)).collect();
    Ok((rows, loglog_slope(&pts)))
}

/// Trotter residuals of one random pair for `k = 1 … k_max`; returns the rows
/// and the fitted decay rate `−slope`.
pub fn trotter_study(seed: u64, size: usize, t: f64, k_max: usize) -> Result<(Vec<BenchRow>, f64)> {
    let (a, b, v) = random_dissipative_pair(size, seed);
    let series = trotter_residual_series(&a, &b, &v, t, k_max)?;
    let rows = series
        .iter()
        .map(|&(k, r)| BenchRow {
            case: format!("trotter-seed{seed}"),
            param: k,
            t,
            residual_standard: r,
            residual_substituted: None,
        })
        .collect();
    let pts: Vec<(f64, f64)> = series.iter().map(|&(k, r)| (k as f64, r)).collect();
    Ok((rows, -loglog_slope(&pts)))
}
