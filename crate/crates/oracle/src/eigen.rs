use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::banded::{factor_shifted, BANDWIDTH};
use crate::chain::DiscreteOperator;
use crate::{OracleError, Result};

const MAX_LOW_COUNT: usize = 50;

fn pivmin(op: &DiscreteOperator) -> f64 {
    f64::EPSILON * f64::EPSILON * op.k.max_abs().max(1.0)
}

/// Number of eigenvalues of K u = E B u strictly below `sigma`.
pub fn sturm_count(op: &DiscreteOperator, sigma: f64) -> usize {
    factor_shifted(&op.k, &op.b, sigma, pivmin(op)).negative_count()
}

/// Gershgorin interval containing the whole spectrum.
fn spectral_bounds(op: &DiscreteOperator) -> (f64, f64) {
    let n = op.dim();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut radius = 0.0;
        for j in i.saturating_sub(BANDWIDTH)..(i + BANDWIDTH + 1).min(n) {
            if j != i {
                radius += op.k.get(i, j).norm() / (op.b[i] * op.b[j]).sqrt();
            }
        }
        let c = op.k.diag[i] / op.b[i];
        lo = lo.min(c - radius);
        hi = hi.max(c + radius);
    }
    (lo, hi)
}

/// The eigenvalue with zero-based index `idx` inside [a, b], by bisection
/// on Sturm counts.
fn bisect_index(op: &DiscreteOperator, idx: usize, mut a: f64, mut b: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a <= tol * m.abs().max(1.0) || m <= a || m >= b {
            break;
        }
        if sturm_count(op, m) > idx {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

/// All eigenvalues in [lo, hi), ascending, to relative accuracy `tol`.
pub fn eigenvalues_in_window(op: &DiscreteOperator, lo: f64, hi: f64, tol: f64) -> Vec<f64> {
    if hi <= lo {
        return Vec::new();
    }
    let n_lo = sturm_count(op, lo);
    let n_hi = sturm_count(op, hi);
    (n_lo..n_hi).map(|i| bisect_index(op, i, lo, hi, tol)).collect()
}

/// The `count` lowest eigenvalues, ascending.
pub fn low_spectrum(op: &DiscreteOperator, count: usize) -> Result<Vec<f64>> {
    if count > MAX_LOW_COUNT {
        return Err(OracleError::InvalidChain(format!("at most {MAX_LOW_COUNT} eigenvalues, asked for {count}")));
    }
    let count = count.min(op.dim());
    let (lo, hi) = spectral_bounds(op);
    let (lo, hi) = (lo - 1.0, hi + 1.0);
    let vals: Vec<f64> = (0..count).map(|i| bisect_index(op, i, lo, hi, 1e-14)).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(OracleError::SolverNoConvergence("non-finite eigenvalue".into()));
    }
    Ok(vals)
}

/// Eigenvector for an (isolated) eigenvalue by inverse iteration, normalized
/// so that u^H B u = 1.
pub fn eigenvector(op: &DiscreteOperator, energy: f64) -> Result<Vec<Complex64>> {
    let n = op.dim();
    let shift = energy - 1e-10 * energy.abs().max(1.0);
    let f = factor_shifted(&op.k, &op.b, shift, pivmin(op));
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + 0.5 * (0.7 * i as f64).sin(), 0.3 * (1.3 * i as f64).cos()))
        .collect();
    for _ in 0..4 {
        for (xi, bi) in x.iter_mut().zip(&op.b) {
            *xi *= *bi;
        }
        f.solve(&mut x);
        let norm: f64 = x.iter().zip(&op.b).map(|(v, b)| v.norm_sqr() * b).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(OracleError::SolverNoConvergence(format!("inverse iteration broke down at {energy}")));
        }
        x.iter_mut().for_each(|v| *v /= norm);
    }
    Ok(x)
}

/// All eigenvalues of the dense matrix B^{-1/2} K B^{-1/2}; for small
/// operators only.
pub fn dense_eigenvalues(op: &DiscreteOperator) -> Result<Vec<f64>> {
    if op.dim() > 4000 {
        return Err(OracleError::DimensionOverflow { dim: op.dim(), cap: 4000 });
    }
    let eig = SymmetricEigen::new(op.to_dense());
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{assemble, TruncatedChain};

    #[test]
    fn banded_matches_dense() {
        let c = TruncatedChain::centered(0.29, 0.8, &[-1.5, 0.5], 3, 10).unwrap();
        let op = assemble(&c).unwrap();
        let dense = dense_eigenvalues(&op).unwrap();
        let low = low_spectrum(&op, 30).unwrap();
        for (a, b) in low.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        }
        let win = eigenvalues_in_window(&op, 1.5, 4.5, 1e-14);
        let expect: Vec<f64> = dense.iter().copied().filter(|&e| (1.5..4.5).contains(&e)).collect();
        assert_eq!(win.len(), expect.len());
        for (a, b) in win.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn free_chain_is_nonnegative() {
        let c = TruncatedChain::centered(0.0, 0.0, &[0.0], 4, 16).unwrap();
        let op = assemble(&c).unwrap();
        let low = low_spectrum(&op, 5).unwrap();
        assert!(low[0] >= 0.0);
        assert_eq!(sturm_count(&op, 0.0), 0);
    }

    #[test]
    fn inverse_iteration_gives_eigenvector() {
        let c = TruncatedChain::centered(0.21, 1.0, &[-3.0], 4, 16).unwrap();
        let op = assemble(&c).unwrap();
        let e = low_spectrum(&op, 1).unwrap()[0];
        let u = eigenvector(&op, e).unwrap();
        let n = op.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in i.saturating_sub(2)..(i + 3).min(n) {
                acc += op.k.get(i, j) * u[j];
            }
            worst = worst.max((acc - e * op.b[i] * u[i]).norm());
        }
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn sturm_counts_match_dense_inertia() {
        let c = TruncatedChain::centered(0.41, -1.2, &[2.0, -3.0, 0.5], 3, 12).unwrap();
        let op = assemble(&c).unwrap();
        let dense = dense_eigenvalues(&op).unwrap();
        let mut shifts: Vec<f64> = op.k.diag.iter().zip(&op.b).map(|(k, b)| k / b).collect();
        shifts.extend((0..200).map(|i| -20.0 + 0.37 * i as f64));
        for s in shifts {
            let expect = dense.iter().filter(|&&e| e < s).count();
            let gap = dense.iter().map(|e| (e - s).abs()).fold(f64::INFINITY, f64::min);
            if gap > 1e-8 {
                assert_eq!(sturm_count(&op, s), expect, "shift {s}");
            }
        }
    }

    #[test]
    fn count_limit() {
        let c = TruncatedChain::centered(0.21, 1.0, &[-3.0], 4, 16).unwrap();
        let op = assemble(&c).unwrap();
        assert!(low_spectrum(&op, 51).is_err());
    }
}
