//! Tensor-product orthonormal Chebyshev polynomials on a bounding box.

use crate::geometry::Vec3;

/// Exponents of a trivariate monomial or tensor polynomial.
pub type MultiIndex = [usize; 3];

/// Total degree of a multi-index.
pub fn degree(alpha: MultiIndex) -> usize {
    alpha[0] + alpha[1] + alpha[2]
}

/// Multi-indices of total degree exactly `r`, in graded lexicographic order
/// (first exponent descending, then second).
pub fn indices_of_degree(r: usize) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity((r + 1) * (r + 2) / 2);
    for a in (0..=r).rev() {
        for b in (0..=r - a).rev() {
            out.push([a, b, r - a - b]);
        }
    }
    out
}

/// All multi-indices of total degree at most `max_degree`, degree by degree.
pub fn indices_up_to(max_degree: usize) -> Vec<MultiIndex> {
    (0..=max_degree).flat_map(indices_of_degree).collect()
}

/// Number of multi-indices of degree exactly `r` in three variables.
pub fn block_size(r: usize) -> usize {
    (r + 1) * (r + 2) / 2
}

/// Offset of the degree-`r` block in the graded ordering.
pub fn block_offset(r: usize) -> usize {
    r * (r + 1) * (r + 2) / 6
}

/// Axis-aligned box with strictly positive extent in every coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingBox {
    pub lower: Vec3,
    pub upper: Vec3,
}

impl BoundingBox {
    /// Smallest box holding `points`; axes thinner than 1e-8 of the largest
    /// extent are widened (centered) to 10% of it.
    pub fn around(points: &[Vec3]) -> Self {
        let mut lower = [f64::INFINITY; 3];
        let mut upper = [f64::NEG_INFINITY; 3];
        for p in points {
            for q in 0..3 {
                lower[q] = lower[q].min(p[q]);
                upper[q] = upper[q].max(p[q]);
            }
        }
        let max_extent = (0..3).map(|q| upper[q] - lower[q]).fold(0.0, f64::max);
        let max_extent = if max_extent > 0.0 { max_extent } else { 1.0 };
        for q in 0..3 {
            if upper[q] - lower[q] < 1e-8 * max_extent {
                let mid = 0.5 * (upper[q] + lower[q]);
                lower[q] = mid - 0.05 * max_extent;
                upper[q] = mid + 0.05 * max_extent;
            }
        }
        Self { lower, upper }
    }

    /// Affine map of `x` into `[-1, 1]^3` coordinates.
    #[inline]
    pub fn to_reference(&self, x: Vec3) -> Vec3 {
        let mut s = [0.0; 3];
        for q in 0..3 {
            s[q] = (2.0 * x[q] - (self.lower[q] + self.upper[q])) / (self.upper[q] - self.lower[q]);
        }
        s
    }

    /// Derivative of the reference coordinate with respect to `x[q]`.
    #[inline]
    pub fn scale(&self) -> Vec3 {
        [
            2.0 / (self.upper[0] - self.lower[0]),
            2.0 / (self.upper[1] - self.lower[1]),
            2.0 / (self.upper[2] - self.lower[2]),
        ]
    }
}

/// Orthonormal Chebyshev values `T_0..T_deg` and derivatives at `s`
/// (probability weight on `[-1, 1]`): `T_0 = 1`, `T_q = sqrt(2) cos(q acos s)`.
/// Uses the three-term recurrence, so `s` may lie outside `[-1, 1]`.
pub fn chebyshev_1d(s: f64, deg: usize, values: &mut [f64], derivs: &mut [f64]) {
    let mut c_prev = 1.0;
    let mut d_prev = 0.0;
    values[0] = 1.0;
    derivs[0] = 0.0;
    if deg == 0 {
        return;
    }
    let mut c = s;
    let mut d = 1.0;
    let r2 = std::f64::consts::SQRT_2;
    values[1] = r2 * c;
    derivs[1] = r2 * d;
    for q in 2..=deg {
        let c_next = 2.0 * s * c - c_prev;
        let d_next = 2.0 * c + 2.0 * s * d - d_prev;
        c_prev = c;
        d_prev = d;
        c = c_next;
        d = d_next;
        values[q] = r2 * c;
        derivs[q] = r2 * d;
    }
}

/// Highest total degree the tensor tables support.
pub const MAX_DEGREE: usize = 15;

/// Values and Cartesian gradients of every tensor Chebyshev polynomial of
/// total degree at most `max_degree` at one point, in graded order.
#[derive(Clone, Debug)]
pub struct TensorTable {
    pub values: Vec<f64>,
    pub gradients: Vec<Vec3>,
}

impl TensorTable {
    pub fn new(bbox: &BoundingBox, max_degree: usize, x: Vec3) -> Self {
        let s = bbox.to_reference(x);
        let scale = bbox.scale();
        let mut v = [[0.0; MAX_DEGREE + 1]; 3];
        let mut dv = [[0.0; MAX_DEGREE + 1]; 3];
        assert!(max_degree <= MAX_DEGREE, "degree {max_degree} too large");
        for q in 0..3 {
            chebyshev_1d(s[q], max_degree, &mut v[q], &mut dv[q]);
        }
        let count = block_offset(max_degree + 1);
        let mut values = Vec::with_capacity(count);
        let mut gradients = Vec::with_capacity(count);
        for r in 0..=max_degree {
            for a in (0..=r).rev() {
                for b in (0..=r - a).rev() {
                    let c = r - a - b;
                    let (x0, x1, x2) = (v[0][a], v[1][b], v[2][c]);
                    values.push(x0 * x1 * x2);
                    gradients.push([
                        dv[0][a] * scale[0] * x1 * x2,
                        x0 * dv[1][b] * scale[1] * x2,
                        x0 * x1 * dv[2][c] * scale[2],
                    ]);
                }
            }
        }
        Self { values, gradients }
    }
}

/// Value and gradient of a single tensor Chebyshev polynomial.
pub fn chebyshev_tensor_eval(bbox: &BoundingBox, alpha: MultiIndex, x: Vec3) -> (f64, Vec3) {
    let d = alpha.iter().copied().max().unwrap_or(0);
    let s = bbox.to_reference(x);
    let scale = bbox.scale();
    let mut v = vec![vec![0.0; d + 1]; 3];
    let mut dv = vec![vec![0.0; d + 1]; 3];
    for q in 0..3 {
        chebyshev_1d(s[q], d, &mut v[q], &mut dv[q]);
    }
    let t = [v[0][alpha[0]], v[1][alpha[1]], v[2][alpha[2]]];
    let dt = [dv[0][alpha[0]], dv[1][alpha[1]], dv[2][alpha[2]]];
    (
        t[0] * t[1] * t[2],
        [
            dt[0] * scale[0] * t[1] * t[2],
            t[0] * dt[1] * scale[1] * t[2],
            t[0] * t[1] * dt[2] * scale[2],
        ],
    )
}

/// Gauss-Chebyshev nodes on `[-1, 1]` with equal weights `1/q`; exact for
/// polynomials of degree below `2q` under the Chebyshev probability measure.
pub fn gauss_chebyshev(q: usize) -> Vec<f64> {
    (0..q)
        .map(|i| ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * q) as f64).cos())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box() -> BoundingBox {
        BoundingBox {
            lower: [-1.0; 3],
            upper: [1.0; 3],
        }
    }

    #[test]
    fn constant_element() {
        let (v, g) = chebyshev_tensor_eval(&unit_box(), [0, 0, 0], [0.3, -2.0, 5.0]);
        assert_eq!(v, 1.0);
        assert_eq!(g, [0.0; 3]);
    }

    #[test]
    fn linear_element_at_corner() {
        let (v, g) = chebyshev_tensor_eval(&unit_box(), [1, 0, 0], [1.0, 0.0, 0.0]);
        let r2 = 2f64.sqrt();
        assert!((v - r2).abs() < 1e-15);
        assert!((g[0] - r2).abs() < 1e-15 && g[1] == 0.0 && g[2] == 0.0);
    }

    #[test]
    fn box_midpoint_is_a_root() {
        let b = BoundingBox {
            lower: [0.0; 3],
            upper: [2.0; 3],
        };
        let (v, _) = chebyshev_tensor_eval(&b, [1, 0, 0], [1.0, 1.0, 1.0]);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn recurrence_matches_trigonometric_form() {
        let mut v = [0.0; 9];
        let mut d = [0.0; 9];
        for &s in &[-0.9, -0.3, 0.0, 0.41, 0.99] {
            chebyshev_1d(s, 8, &mut v, &mut d);
            let theta = f64::acos(s);
            for q in 1..=8 {
                let exact = 2f64.sqrt() * (q as f64 * theta).cos();
                let dexact = 2f64.sqrt() * q as f64 * (q as f64 * theta).sin() / theta.sin();
                assert!((v[q] - exact).abs() < 1e-13);
                assert!((d[q] - dexact).abs() < 1e-11 * (1.0 + dexact.abs()));
            }
        }
    }

    #[test]
    fn orthonormal_under_quadrature() {
        // univariate Gram matrix by Gauss-Chebyshev quadrature
        let deg = 7;
        let nodes = gauss_chebyshev(deg + 1);
        let mut gram = vec![vec![0.0; deg + 1]; deg + 1];
        let mut v = vec![0.0; deg + 1];
        let mut d = vec![0.0; deg + 1];
        for &s in &nodes {
            chebyshev_1d(s, deg, &mut v, &mut d);
            for i in 0..=deg {
                for j in 0..=deg {
                    gram[i][j] += v[i] * v[j] / nodes.len() as f64;
                }
            }
        }
        for i in 0..=deg {
            for j in 0..=deg {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((gram[i][j] - e).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let b = BoundingBox {
            lower: [-0.4, 0.1, -2.0],
            upper: [0.7, 0.9, 1.0],
        };
        let x = [0.2, 0.35, -0.5];
        let table = TensorTable::new(&b, 5, x);
        let h = 1e-6;
        for (k, alpha) in indices_up_to(5).into_iter().enumerate() {
            let (v, g) = chebyshev_tensor_eval(&b, alpha, x);
            assert!((v - table.values[k]).abs() < 1e-14);
            for q in 0..3 {
                let mut xp = x;
                let mut xm = x;
                xp[q] += h;
                xm[q] -= h;
                let fd = (chebyshev_tensor_eval(&b, alpha, xp).0
                    - chebyshev_tensor_eval(&b, alpha, xm).0)
                    / (2.0 * h);
                assert!(
                    (fd - g[q]).abs() <= 1e-6 * (1.0 + g[q].abs()),
                    "{alpha:?} {q}"
                );
                assert!((table.gradients[k][q] - g[q]).abs() < 1e-12 * (1.0 + g[q].abs()));
            }
        }
    }

    #[test]
    fn graded_ordering() {
        assert_eq!(indices_of_degree(1), vec![[1, 0, 0], [0, 1, 0], [0, 0, 1]]);
        assert_eq!(indices_up_to(3).len(), 20);
        for r in 0..6 {
            assert_eq!(indices_of_degree(r).len(), block_size(r));
            assert_eq!(indices_up_to(r).len(), block_offset(r + 1));
            assert!(indices_of_degree(r).iter().all(|&a| degree(a) == r));
        }
    }

    #[test]
    fn degenerate_axis_padding() {
        let pts = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]];
        let b = BoundingBox::around(&pts);
        assert_eq!(b.lower[0], 0.0);
        assert_eq!(b.upper[0], 2.0);
        assert!((b.upper[1] - b.lower[1] - 0.2).abs() < 1e-15);
        assert!((b.upper[2] + b.lower[2]).abs() < 1e-15);
    }
}
