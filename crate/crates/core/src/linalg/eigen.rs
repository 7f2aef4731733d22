//! Eigenvalue kernels: a full dense spectrum for moderate sizes, and a small
//! complex Hessenberg QR used for projected Krylov problems.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Largest matrix accepted by [`dense_spectrum`].
pub const DENSE_SPECTRUM_CAP: usize = 5000;

/// All eigenvalues of a square dense matrix (Hessenberg reduction followed by
/// shifted QR, via faer).
pub fn dense_spectrum(a: &DenseMatrix) -> Result<Vec<Complex64>> {
    if a.rows() > DENSE_SPECTRUM_CAP {
        return Err(Error::Config(format!(
            "dense spectrum limited to N <= {DENSE_SPECTRUM_CAP} (got {}); use the Arnoldi estimate instead",
            a.rows()
        )));
    }
    if a.rows() != a.cols() {
        return Err(Error::Dimension {
            expected: a.rows(),
            actual: a.cols(),
        });
    }
    if a.rows() == 0 {
        return Ok(Vec::new());
    }
    let m = faer::Mat::<f64>::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)]);
    let ev = m
        .eigenvalues()
        .map_err(|e| Error::NoConvergence(format!("dense QR iteration: {e:?}")))?;
    Ok(ev.into_iter().map(|z| Complex64::new(z.re, z.im)).collect())
}

/// Eigenvalues of a small upper Hessenberg matrix by single-shift complex QR
/// with Wilkinson shifts and deflation. Entries below the subdiagonal are
/// ignored.
pub fn hessenberg_eigenvalues(h: &[Vec<Complex64>]) -> Result<Vec<Complex64>> {
    let n = h.len();
    let mut a: Vec<Vec<Complex64>> = h
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, v)| {
                    if i > j + 1 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        *v
                    }
                })
                .collect()
        })
        .collect();
    let mut hi = n;
    let mut iter = 0usize;
    let max_iter = 100 * n.max(1);
    while hi > 1 {
        // find the start of the active unreduced block
        let mut lo = hi - 1;
        while lo > 0 {
            let s = a[lo][lo].norm() + a[lo - 1][lo - 1].norm();
            let s = if s == 0.0 { 1.0 } else { s };
            if a[lo][lo - 1].norm() <= f64::EPSILON * s {
                a[lo][lo - 1] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > max_iter {
            return Err(Error::NoConvergence(format!(
                "Hessenberg QR did not deflate row {hi}"
            )));
        }
        let shift = if iter % 11 == 10 {
            // exceptional shift to break cycles
            a[hi - 1][hi - 1] + Complex64::new(0.75 * a[hi - 1][hi - 2].norm(), 0.0)
        } else {
            wilkinson_shift(
                a[hi - 2][hi - 2],
                a[hi - 2][hi - 1],
                a[hi - 1][hi - 2],
                a[hi - 1][hi - 1],
            )
        };
        qr_sweep(&mut a, lo, hi, shift);
    }
    Ok((0..n).map(|i| a[i][i]).collect())
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr * 0.25 - det).sqrt();
    let l1 = tr * 0.5 + disc;
    let l2 = tr * 0.5 - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One explicit shifted QR step on rows/columns `lo..hi` using Givens rotations.
fn qr_sweep(a: &mut [Vec<Complex64>], lo: usize, hi: usize, shift: Complex64) {
    let n = a.len();
    for i in lo..hi {
        a[i][i] -= shift;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for k in lo..hi - 1 {
        let x = a[k][k];
        let y = a[k + 1][k];
        let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            (x / r, y / r)
        };
        // apply G^H = [[conj c, conj s], [-s, c]] from the left
        for j in k..n {
            let p = a[k][j];
            let q = a[k + 1][j];
            a[k][j] = c.conj() * p + s.conj() * q;
            a[k + 1][j] = -s * p + c * q;
        }
        rots.push((c, s));
    }
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let k = lo + idx;
        // apply G from the right: columns k, k+1
        for row in a.iter_mut().take((k + 2).min(hi)) {
            let p = row[k];
            let q = row[k + 1];
            row[k] = p * c + q * s;
            row[k + 1] = -p * s.conj() + q * c.conj();
        }
    }
    for i in lo..hi {
        a[i][i] += shift;
    }
}

/// Unit eigenvector of `h` for the (approximate) eigenvalue `lambda`, by
/// inverse iteration.
pub fn inverse_iteration(h: &[Vec<Complex64>], lambda: Complex64) -> Vec<Complex64> {
    let n = h.len();
    let scale = h
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.norm()))
        .max(f64::MIN_POSITIVE);
    let perturb = Complex64::new(scale * 1e-10, scale * 1e-10);
    let mut m: Vec<Vec<Complex64>> = h.to_vec();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= lambda + perturb;
    }
    let lu = complex_lu(m, scale * 1e-14);
    let mut x = vec![Complex64::new(1.0, 0.0); n];
    for _ in 0..3 {
        x = lu.solve(&x);
        let nrm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if nrm == 0.0 || !nrm.is_finite() {
            x = vec![Complex64::new(1.0, 0.0); n];
            continue;
        }
        x.iter_mut().for_each(|v| *v /= nrm);
    }
    x
}

struct ComplexLu {
    lu: Vec<Vec<Complex64>>,
    perm: Vec<usize>,
}

fn complex_lu(mut a: Vec<Vec<Complex64>>, floor: f64) -> ComplexLu {
    let n = a.len();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].norm().total_cmp(&a[j][k].norm()))
            .unwrap();
        a.swap(k, p);
        perm.swap(k, p);
        if a[k][k].norm() < floor {
            a[k][k] = Complex64::new(floor, 0.0);
        }
        let piv = a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / piv;
            a[i][k] = f;
            for j in k + 1..n {
                let u = a[k][j];
                a[i][j] -= f * u;
            }
        }
    }
    ComplexLu { lu: a, perm }
}

impl ComplexLu {
    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = b.len();
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[i][k];
                x[i] = x[i] - l * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[i][k];
                x[i] = x[i] - u * x[k];
            }
            x[i] /= self.lu[i][i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    fn to_complex(a: &DenseMatrix) -> Vec<Vec<Complex64>> {
        (0..a.rows())
            .map(|i| a.row(i).iter().map(|&v| Complex64::new(v, 0.0)).collect())
            .collect()
    }

    fn cube_roots_companion() -> DenseMatrix {
        // companion of z^3 - 1
        DenseMatrix::from_rows(&[
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ])
        .unwrap()
    }

    fn assert_cube_roots(ev: Vec<Complex64>) {
        let s = 3f64.sqrt() / 2.0;
        let expect = [
            Complex64::new(-0.5, -s),
            Complex64::new(-0.5, s),
            Complex64::new(1.0, 0.0),
        ];
        for (a, b) in sorted(ev).iter().zip(expect) {
            assert!((a - b).norm() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn diagonal_spectrum() {
        let a = DenseMatrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 3.0],
        ])
        .unwrap();
        let ev = sorted(dense_spectrum(&a).unwrap());
        for (i, z) in ev.iter().enumerate() {
            assert!((z - Complex64::new(i as f64 + 1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn rotation_spectrum() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        let ev = sorted(dense_spectrum(&a).unwrap());
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn companion_roots_dense() {
        assert_cube_roots(dense_spectrum(&cube_roots_companion()).unwrap());
    }

    #[test]
    fn companion_roots_hessenberg_qr() {
        assert_cube_roots(hessenberg_eigenvalues(&to_complex(&cube_roots_companion())).unwrap());
    }

    #[test]
    fn quartic_characteristic_roots() {
        // (z-1)(z+2)(z^2+1) = z^4 + z^3 - z^2 + z - 2
        let c = [1.0, -1.0, 1.0, -2.0];
        let a = DenseMatrix::from_fn(4, 4, |i, j| {
            if i == 0 {
                -c[j]
            } else if i == j + 1 {
                1.0
            } else {
                0.0
            }
        });
        let expect = sorted(vec![
            Complex64::new(-2.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(1.0, 0.0),
        ]);
        for ev in [
            dense_spectrum(&a).unwrap(),
            hessenberg_eigenvalues(&to_complex(&a)).unwrap(),
        ] {
            for (x, y) in sorted(ev).iter().zip(&expect) {
                assert!((x - y).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn small_qr_agrees_with_dense_on_random_hessenberg() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 30;
        let a = DenseMatrix::from_fn(n, n, |i, j| {
            if i > j + 1 {
                0.0
            } else {
                rng.gen_range(-1.0..1.0)
            }
        });
        let mut ours = hessenberg_eigenvalues(&to_complex(&a)).unwrap();
        let reference = dense_spectrum(&a).unwrap();
        for z in &reference {
            let (pos, d) = ours
                .iter()
                .enumerate()
                .map(|(i, w)| (i, (w - z).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert!(d < 1e-8, "eigenvalue {z} unmatched ({d})");
            ours.swap_remove(pos);
        }
    }

    #[test]
    fn inverse_iteration_finds_eigenvector() {
        let a = cube_roots_companion();
        let h = to_complex(&a);
        let lambda = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
        let x = inverse_iteration(&h, lambda);
        let mut res = 0.0;
        for i in 0..3 {
            let ax: Complex64 = (0..3).map(|j| h[i][j] * x[j]).sum();
            res += (ax - lambda * x[i]).norm_sqr();
        }
        assert!(res.sqrt() < 1e-8);
    }

    #[test]
    fn cap_is_enforced() {
        let a = DenseMatrix::zeros(DENSE_SPECTRUM_CAP + 1, 1);
        assert!(matches!(dense_spectrum(&a), Err(Error::Config(_))));
    }
}
