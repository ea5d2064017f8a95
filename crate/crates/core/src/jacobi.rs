//! Cyclic Jacobi eigenvalue iteration for dense symmetric matrices.
//!
//! Eigenvalues only — the spectral module needs magnitudes, never vectors.
//! Convergence is measured by the off-diagonal Frobenius norm; for the
//! integer matrices this crate feeds in, a handful of sweeps suffices.

use thiserror::Error;

/// Absolute off-diagonal Frobenius norm at which the iteration stops.
pub const OFF_NORM_TOL: f64 = 1e-10;
/// Sweep budget; exceeding it is an error, not a silent fallback.
pub const MAX_SWEEPS: usize = 100;

#[derive(Debug, Error)]
pub enum JacobiError {
    #[error("no convergence after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
}

/// Result of [`symmetric_eigenvalues`]: unsorted eigenvalues plus the
/// off-diagonal norm trace (index 0 = before the first sweep).
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub sweeps: usize,
    pub off_norms: Vec<f64>,
}

fn off_norm(a: &[f64], n: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[i * n + j] * a[i * n + j];
            }
        }
    }
    sum.sqrt()
}

/// Eigenvalues of a symmetric matrix given row-major as `n * n` entries.
/// The caller's data is consumed as scratch space.
pub fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Result<SymmetricEigen, JacobiError> {
    assert_eq!(a.len(), n * n, "matrix must be n×n row-major");
    debug_assert!(
        (0..n).all(|i| (0..n).all(|j| a[i * n + j] == a[j * n + i])),
        "input must be symmetric"
    );
    let mut off_norms = vec![off_norm(&a, n)];
    let mut sweeps = 0;
    while *off_norms.last().unwrap() > OFF_NORM_TOL {
        if sweeps == MAX_SWEEPS {
            return Err(JacobiError::NoConvergence {
                sweeps,
                off_norm: *off_norms.last().unwrap(),
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                // stable tangent of the annihilating rotation
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    a[r * n + p] = c * arp - s * arq;
                    a[p * n + r] = a[r * n + p];
                    a[r * n + q] = s * arp + c * arq;
                    a[q * n + r] = a[r * n + q];
                }
            }
        }
        sweeps += 1;
        off_norms.push(off_norm(&a, n));
    }
    let values = (0..n).map(|i| a[i * n + i]).collect();
    Ok(SymmetricEigen { values, sweeps, off_norms })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn diagonal_matrix_is_immediate() {
        let a = vec![3.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 5.0];
        let e = symmetric_eigenvalues(a, 3).unwrap();
        assert_eq!(e.sweeps, 0);
        assert_eq!(sorted(e.values), vec![-1.0, 3.0, 5.0]);
    }

    #[test]
    fn two_by_two_exact() {
        // eigenvalues of [[2,1],[1,2]] are 1 and 3
        let e = symmetric_eigenvalues(vec![2.0, 1.0, 1.0, 2.0], 2).unwrap();
        let v = sorted(e.values);
        assert!((v[0] - 1.0).abs() < 1e-12);
        assert!((v[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn four_by_four_frozen_values() {
        let a = vec![
            4.0, 1.0, 2.0, 0.0, //
            1.0, 5.0, 0.0, 3.0, //
            2.0, 0.0, 6.0, 1.0, //
            0.0, 3.0, 1.0, 7.0,
        ];
        let e = symmetric_eigenvalues(a, 4).unwrap();
        let v = sorted(e.values);
        let expect = [
            1.8019696160709693,
            3.7974288608269227,
            6.814195716843732,
            9.586405806258377,
        ];
        for (got, want) in v.iter().zip(expect) {
            assert!((got - want).abs() < 1e-9, "got {got}, want {want}");
        }
    }

    #[test]
    fn off_norm_decreases_monotonically() {
        // moderately coupled integer matrix
        let n = 12;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = if i == j { (i + 3) as f64 } else { ((i * j) % 5) as f64 };
            }
        }
        let e = symmetric_eigenvalues(a, n).unwrap();
        for w in e.off_norms.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "off-norm increased: {} -> {}", w[0], w[1]);
        }
        assert!(*e.off_norms.last().unwrap() <= OFF_NORM_TOL);
        assert!(e.sweeps <= MAX_SWEEPS);
    }

    #[test]
    fn trace_and_frobenius_are_preserved() {
        let n = 9;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = ((7 * i + 3 * j) % 11) as f64;
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
        let frob2: f64 = a.iter().map(|x| x * x).sum();
        let e = symmetric_eigenvalues(a, n).unwrap();
        let tsum: f64 = e.values.iter().sum();
        let fsum: f64 = e.values.iter().map(|x| x * x).sum();
        assert!((tsum - trace).abs() < 1e-8);
        assert!((fsum - frob2).abs() < 1e-7 * frob2.max(1.0));
    }
}
