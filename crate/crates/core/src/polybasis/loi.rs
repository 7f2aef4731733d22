//! Least orthogonal interpolation: a minimal-degree polynomial space adapted
//! to a point set, with an orthonormal basis under the tensor Chebyshev
//! measure of the point set's bounding box.
//!
//! The construction works on the Chebyshev-Vandermonde matrix of the points,
//! one total-degree block at a time. Within a degree, points are selected
//! greedily by the size of their block residual orthogonal to the functions
//! already chosen at that degree; a selection is accepted only while that
//! residual reaches the tolerance, otherwise the degree is raised. Before
//! moving on, the block is eliminated from the unselected rows using the
//! selected ones, which leaves each row holding the lowest-degree part of a
//! combination of point-evaluation representors.

use super::chebyshev::{block_offset, block_size, BoundingBox, TensorTable, MAX_DEGREE};
use crate::error::{Error, Result};
use crate::geometry::vec3::dist2;
use crate::geometry::Vec3;
use crate::linalg::{DenseMatrix, LuFactors};

/// Relative rank floor applied on top of the tolerance, so a zero tolerance
/// still separates exact rank deficiency from rounding noise.
const RANK_FLOOR: f64 = 1e-10;

const TIE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct LoiFunction {
    pub degree: usize,
    /// Coefficients over `indices_of_degree(degree)`.
    pub coeffs: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LoiBasis {
    pub bbox: BoundingBox,
    pub functions: Vec<LoiFunction>,
    /// Index of the point each function was identified with.
    pub associated: Vec<usize>,
    pub tau: f64,
}

#[derive(Clone, Debug)]
pub struct BasisValues {
    pub values: Vec<f64>,
    pub gradients: Vec<Vec3>,
}

impl LoiBasis {
    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.functions.iter().map(|f| f.degree).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.functions.iter().map(|f| f.degree).max().unwrap_or(0)
    }

    /// Values and Cartesian gradients of every basis function at `x`.
    pub fn eval(&self, x: Vec3) -> BasisValues {
        let table = TensorTable::new(&self.bbox, self.max_degree(), x);
        self.combine(&table)
    }

    fn combine(&self, table: &TensorTable) -> BasisValues {
        let mut values = Vec::with_capacity(self.len());
        let mut gradients = Vec::with_capacity(self.len());
        for f in &self.functions {
            let off = block_offset(f.degree);
            let mut v = 0.0;
            let mut g = [0.0; 3];
            for (k, c) in f.coeffs.iter().enumerate() {
                v += c * table.values[off + k];
                let tg = table.gradients[off + k];
                g[0] += c * tg[0];
                g[1] += c * tg[1];
                g[2] += c * tg[2];
            }
            values.push(v);
            gradients.push(g);
        }
        BasisValues { values, gradients }
    }

    /// Square matrix `[h_j(points[associated[l]])]` with rows indexed by `l`.
    pub fn collocation(&self, points: &[Vec3]) -> DenseMatrix {
        let m = self.len();
        let mut a = DenseMatrix::zeros(m, m);
        for (l, &i) in self.associated.iter().enumerate() {
            a.row_mut(l).copy_from_slice(&self.eval(points[i]).values);
        }
        a
    }
}

/// Builds the basis for `points` with tolerance `tau`, stopping after
/// `max_functions` functions or once the degree would exceed `degree_cap`.
pub fn loi_construct(
    points: &[Vec3],
    tau: f64,
    max_functions: usize,
    degree_cap: usize,
) -> Result<LoiBasis> {
    if points.is_empty() {
        return Err(Error::Basis("no points".into()));
    }
    if degree_cap > MAX_DEGREE {
        return Err(Error::Basis(format!(
            "degree cap {degree_cap} exceeds the supported maximum {MAX_DEGREE}"
        )));
    }
    if !(tau >= 0.0) {
        return Err(Error::Basis(format!(
            "tolerance must be nonnegative, got {tau}"
        )));
    }
    for i in 0..points.len() {
        for j in 0..i {
            if dist2(points[i], points[j]) == 0.0 {
                return Err(Error::DuplicatePoints {
                    first: j,
                    second: i,
                });
            }
        }
    }
    let bbox = BoundingBox::around(points);
    let n = points.len();
    let target = max_functions.min(n);
    let width = block_offset(degree_cap + 1);

    // Chebyshev-Vandermonde rows, reduced in place block by block.
    let mut rows: Vec<Vec<f64>> = points
        .iter()
        .map(|&p| TensorTable::new(&bbox, degree_cap, p).values)
        .collect();
    let floor = RANK_FLOOR
        * rows
            .iter()
            .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
    let threshold = tau.max(floor);

    let mut selected = vec![false; n];
    let mut functions = Vec::with_capacity(target);
    let mut associated = Vec::with_capacity(target);

    for r in 0..=degree_cap {
        if functions.len() >= target {
            break;
        }
        let off = block_offset(r);
        let bs = block_size(r);
        let mut resid: Vec<Vec<f64>> = rows.iter().map(|row| row[off..off + bs].to_vec()).collect();
        let mut basis_r: Vec<Vec<f64>> = Vec::new();
        let mut pivots: Vec<usize> = Vec::new();
        while functions.len() < target && basis_r.len() < bs {
            // near-ties go to the lowest index so symmetric point sets pick
            // the same pivots regardless of rounding
            let norms: Vec<(usize, f64)> = (0..n)
                .filter(|&i| !selected[i])
                .map(|i| (i, norm(&resid[i])))
                .collect();
            let top = norms.iter().fold(-1.0f64, |a, &(_, v)| a.max(v));
            let Some(&(i, best_norm)) = norms.iter().find(|&&(_, v)| v >= top * (1.0 - TIE_TOL))
            else {
                break;
            };
            if best_norm < threshold {
                break;
            }
            let h: Vec<f64> = resid[i].iter().map(|v| v / best_norm).collect();
            selected[i] = true;
            for j in (0..n).filter(|&j| !selected[j]) {
                let d = dot(&resid[j], &h);
                resid[j].iter_mut().zip(&h).for_each(|(a, b)| *a -= d * b);
            }
            functions.push(LoiFunction {
                degree: r,
                coeffs: h.clone(),
            });
            associated.push(i);
            basis_r.push(h);
            pivots.push(i);
        }
        if functions.len() >= target || r == degree_cap {
            break;
        }
        // Coupling of the selected rows' degree-r blocks to the orthonormal
        // functions; upper triangular by construction.
        let k = pivots.len();
        let mut tri = vec![vec![0.0; k]; k];
        for (s, &p) in pivots.iter().enumerate() {
            for t in 0..=s {
                tri[t][s] = dot(&rows[p][off..off + bs], &basis_r[t]);
            }
        }
        let pivot_rows: Vec<Vec<f64>> = pivots.iter().map(|&p| rows[p].clone()).collect();
        for j in (0..n).filter(|&j| !selected[j]) {
            let row = &mut rows[j];
            let mut c: Vec<f64> = basis_r
                .iter()
                .map(|h| dot(&row[off..off + bs], h))
                .collect();
            for s in (0..k).rev() {
                for t in s + 1..k {
                    c[s] -= tri[s][t] * c[t];
                }
                c[s] /= tri[s][s];
            }
            for (s, pr) in pivot_rows.iter().enumerate() {
                for col in off + bs..width {
                    row[col] -= c[s] * pr[col];
                }
            }
            row[off..off + bs].iter_mut().for_each(|v| *v = 0.0);
        }
    }
    if functions.is_empty() {
        return Err(Error::Basis(format!(
            "no basis function reached tolerance {tau} up to degree {degree_cap}"
        )));
    }
    Ok(LoiBasis {
        bbox,
        functions,
        associated,
        tau,
    })
}

/// Coefficients of the interpolant in `basis` of `data` given at the basis'
/// associated points (`data[l]` belongs to `points[basis.associated[l]]`).
pub fn loi_interpolate(basis: &LoiBasis, points: &[Vec3], data: &[f64]) -> Result<Vec<f64>> {
    if data.len() != basis.len() {
        return Err(Error::Dimension {
            expected: basis.len(),
            actual: data.len(),
        });
    }
    let a = basis.collocation(points);
    let lu = LuFactors::new(&a).map_err(|e| Error::Basis(format!("collocation matrix: {e}")))?;
    let c = lu.solve_vec(data)?;
    let ac = a.matvec(&c);
    let res = ac
        .iter()
        .zip(data)
        .map(|(p, q)| (p - q).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = data.iter().map(|v| v * v).sum::<f64>().sqrt();
    if res > 1e-8 * scale {
        return Err(Error::Basis(format!(
            "interpolation residual {res:.3e} exceeds 1e-8 relative; tolerance too small"
        )));
    }
    Ok(c)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
