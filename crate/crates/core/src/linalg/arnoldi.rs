//! Explicitly restarted Arnoldi iteration for the rightmost eigenvalue of a
//! sparse matrix.

use log::warn;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::eigen::{hessenberg_eigenvalues, inverse_iteration};
use crate::linalg::sparse::norm2;
use crate::linalg::SparseMatrix;

#[derive(Clone, Debug)]
pub struct ArnoldiOptions {
    pub krylov_dim: usize,
    /// Number of rightmost Ritz vectors blended into each restart vector.
    pub wanted: usize,
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for ArnoldiOptions {
    fn default() -> Self {
        Self {
            krylov_dim: 40,
            wanted: 4,
            tol: 8e-2,
            max_restarts: 300,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RightmostEstimate {
    pub value: Complex64,
    pub converged: bool,
    pub restarts: usize,
    /// Ritz residual relative to the Ritz value magnitude.
    pub residual: f64,
}

/// Rightmost eigenvalue of `a` by Arnoldi with explicit restarts.
///
/// Convergence is declared when the Ritz residual falls below `tol` times
/// the Ritz value magnitude (or the Krylov space becomes invariant).
/// Hitting the restart cap returns the best estimate with `converged = false`.
pub fn rightmost_eigenvalue(a: &SparseMatrix, opts: &ArnoldiOptions) -> Result<RightmostEstimate> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Dimension {
            expected: n,
            actual: a.ncols(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    let m = opts.krylov_dim.clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut best = RightmostEstimate {
        value: Complex64::new(f64::NEG_INFINITY, 0.0),
        converged: false,
        restarts: 0,
        residual: f64::INFINITY,
    };
    let anorm = a.norm_inf().max(f64::MIN_POSITIVE);

    for restart in 0..=opts.max_restarts {
        let nrm = norm2(&start);
        if nrm == 0.0 || !nrm.is_finite() {
            start = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            continue;
        }
        let mut basis: Vec<Vec<f64>> = vec![start.iter().map(|v| v / nrm).collect()];
        let mut h = vec![vec![0.0f64; m]; m + 1];
        let mut w = vec![0.0; n];
        let mut size = m;
        let mut invariant = false;
        for j in 0..m {
            a.spmv_into(&basis[j], &mut w)?;
            // modified Gram-Schmidt with one reorthogonalization pass
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let d: f64 = v.iter().zip(&w).map(|(p, q)| p * q).sum();
                    h[i][j] += d;
                    w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= d * vi);
                }
            }
            let beta = norm2(&w);
            h[j + 1][j] = beta;
            if beta <= 1e-12 * anorm {
                size = j + 1;
                invariant = true;
                break;
            }
            if j + 1 < m {
                basis.push(w.iter().map(|v| v / beta).collect());
            }
        }

        let hm: Vec<Vec<Complex64>> = (0..size)
            .map(|i| (0..size).map(|j| Complex64::new(h[i][j], 0.0)).collect())
            .collect();
        let mut ritz = hessenberg_eigenvalues(&hm)?;
        ritz.sort_by(|x, y| y.re.total_cmp(&x.re));
        let theta = ritz[0];
        let y = inverse_iteration(&hm, theta);
        let beta = if invariant { 0.0 } else { h[size][size - 1] };
        let resid = beta * y[size - 1].norm();
        let rel = resid / theta.norm().max(1e-14 * anorm);

        best = RightmostEstimate {
            value: theta,
            converged: invariant || rel <= opts.tol,
            restarts: restart,
            residual: if invariant { 0.0 } else { rel },
        };
        if best.converged {
            return Ok(best);
        }

        // restart from a blend of the rightmost Ritz vectors
        start = vec![0.0; n];
        for (rank, z) in ritz.iter().take(opts.wanted.max(1)).enumerate() {
            let y = if rank == 0 {
                y.clone()
            } else {
                inverse_iteration(&hm, *z)
            };
            for (k, v) in basis.iter().enumerate().take(size) {
                let c = y[k].re + y[k].im;
                start.iter_mut().zip(v).for_each(|(s, vi)| *s += c * vi);
            }
        }
    }
    warn!(
        "Arnoldi did not converge after {} restarts (relative residual {:.3e})",
        opts.max_restarts, best.residual
    );
    Ok(best)
}

/// Largest real part over the spectra of several matrices.
pub fn max_real_part(mats: &[&SparseMatrix], opts: &ArnoldiOptions) -> Result<(f64, bool)> {
    let mut best = f64::NEG_INFINITY;
    let mut all_converged = true;
    for a in mats {
        let est = rightmost_eigenvalue(a, opts)?;
        best = best.max(est.value.re);
        all_converged &= est.converged;
    }
    Ok((best, all_converged))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense_spectrum;

    #[test]
    fn diagonal_rightmost() {
        let a =
            SparseMatrix::from_triplets(3, 3, &[(0, 0, -1.0), (1, 1, -2.0), (2, 2, 3.0)]).unwrap();
        let est = rightmost_eigenvalue(&a, &ArnoldiOptions::default()).unwrap();
        assert!((est.value.re - 3.0).abs() <= 8e-2 * 3.0);
        assert!(est.converged);
    }

    #[test]
    fn skew_has_zero_real_part() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, -1.0)]).unwrap();
        let est = rightmost_eigenvalue(&a, &ArnoldiOptions::default()).unwrap();
        assert!(est.value.re.abs() <= 8e-2);
    }

    #[test]
    fn max_over_several() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, -1.0)]).unwrap();
        let b = SparseMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (1, 1, -5.0)]).unwrap();
        let (v, ok) = max_real_part(&[&a, &b], &ArnoldiOptions::default()).unwrap();
        assert!(ok);
        assert!((v - 2.0).abs() < 1e-8);
    }

    #[test]
    fn agrees_with_dense_on_random_sparse() {
        for seed in 0..3u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let n = 200;
            let mut t = Vec::new();
            for i in 0..n {
                // dominant real eigenvalue carried by the diagonal
                let d = if i == 17 {
                    4.0
                } else {
                    rng.gen_range(-3.0..1.0)
                };
                t.push((i, i, d));
                for _ in 0..4 {
                    t.push((i, rng.gen_range(0..n), rng.gen_range(-0.15..0.15)));
                }
            }
            let a = SparseMatrix::from_triplets(n, n, &t).unwrap();
            let dense = dense_spectrum(&a.to_dense()).unwrap();
            let exact = dense.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            let est = rightmost_eigenvalue(&a, &ArnoldiOptions::default()).unwrap();
            assert!(
                (est.value.re - exact).abs() <= 8e-2 * exact.abs(),
                "seed {seed}: {} vs {exact}",
                est.value.re
            );
        }
    }
}
