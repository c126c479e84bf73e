use ndarray::Array2;
use num_complex::Complex64;

/// Maximum absolute row sum.
pub fn norm_inf(a: &Array2<Complex64>) -> f64 {
    a.rows()
        .into_iter()
        .map(|r| r.iter().map(|c| c.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest entry modulus.
pub fn max_abs(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Dense exponential by scaling and squaring with a Taylor kernel.
pub fn dense_expm(a: &Array2<Complex64>) -> Array2<Complex64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let norm = norm_inf(a);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a / Complex64::new(2f64.powi(squarings), 0.0);

    let mut sum = Array2::<Complex64>::eye(n);
    let mut term = Array2::<Complex64>::eye(n);
    for k in 1..=40 {
        term = term.dot(&scaled) / Complex64::new(k as f64, 0.0);
        sum += &term;
        if max_abs(&term) <= f64::EPSILON * 1e-2 * max_abs(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.dot(&sum);
    }
    sum
}

/// Real-valued convenience wrapper around [`dense_expm`].
pub fn dense_expm_real(a: &Array2<f64>) -> Array2<f64> {
    dense_expm(&a.mapv(|x| Complex64::new(x, 0.0))).mapv(|c| c.re)
}
