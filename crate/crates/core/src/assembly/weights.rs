//! Per-stencil surface gradient weights and iterated-interpolation Laplacian.

use super::config::AssemblyConfig;
use super::kernel::{phs_unchecked, project_unchecked};
use crate::error::{Error, Result};
use crate::geometry::vec3::{scale, sub};
use crate::geometry::{NodeSet, Stencil, Vec3};
use crate::linalg::{DenseMatrix, LuFactors};
use crate::polybasis::{loi_construct, LoiBasis};

/// Rows of a projected basis-gradient block below this fraction of the
/// block's largest entry count as identically zero.
pub const ZERO_ROW_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct StencilOperators {
    /// `gradient[c][(k, e)]` is the weight of stencil node `k` in the `c`-th
    /// surface-gradient component at stencil node `e`.
    pub gradient: [DenseMatrix; 3],
    /// Laplacian weights, one row per retained node (in `Stencil::retained` order).
    pub laplacian: DenseMatrix,
    /// Basis indices removed because a projected gradient row vanished.
    pub eliminated_basis: Vec<usize>,
    /// LOI basis in the stencil's shifted and scaled coordinates.
    pub basis: LoiBasis,
    pub origin: Vec3,
    pub length_scale: f64,
}

impl StencilOperators {
    /// Maps a physical point into the coordinates the basis was built on.
    pub fn to_local(&self, x: Vec3) -> Vec3 {
        scale(sub(x, self.origin), 1.0 / self.length_scale)
    }

    /// Indices of basis functions kept in the saddle system.
    pub fn kept_basis(&self) -> Vec<usize> {
        (0..self.basis.len())
            .filter(|j| !self.eliminated_basis.contains(j))
            .collect()
    }
}

/// Indices `j > 0` whose row is numerically zero in any of the three blocks.
/// Each block is `M x n` (basis function by evaluation point); an all-zero
/// block eliminates nothing.
pub fn axis_misalignment_fix(blocks: &[DenseMatrix; 3]) -> Vec<usize> {
    let m = blocks[0].rows();
    let mut out = Vec::new();
    for j in 1..m {
        let zero_somewhere = blocks.iter().any(|b| {
            let overall = b.max_abs();
            overall > 0.0
                && b.row(j).iter().fold(0.0f64, |a, v| a.max(v.abs()))
                    < ZERO_ROW_THRESHOLD * overall
        });
        if zero_somewhere {
            out.push(j);
        }
    }
    out
}

fn stencil_error(nodes: &NodeSet, stencil: &Stencil, reason: String) -> Error {
    Error::Stencil {
        stencil: stencil.center,
        reason,
        points: stencil.neighbors.iter().map(|&i| nodes.points[i]).collect(),
    }
}

/// Gradient weights and Laplacian block for one stencil.
pub fn build_stencil_weights(
    stencil: &Stencil,
    nodes: &NodeSet,
    config: &AssemblyConfig,
) -> Result<StencilOperators> {
    let n = stencil.size();
    if n != config.stencil_size {
        return Err(Error::Dimension {
            expected: config.stencil_size,
            actual: n,
        });
    }
    let origin = nodes.points[stencil.center];
    let rho = if stencil.width > 0.0 {
        stencil.width
    } else {
        1.0
    };
    let y: Vec<Vec3> = stencil
        .neighbors
        .iter()
        .map(|&i| scale(sub(nodes.points[i], origin), 1.0 / rho))
        .collect();
    let normals: Vec<Vec3> = stencil
        .neighbors
        .iter()
        .map(|&i| nodes.normals[i])
        .collect();

    let basis = loi_construct(&y, config.tau, config.basis_size, config.degree_cap)
        .map_err(|e| stencil_error(nodes, stencil, e.to_string()))?;
    let evals: Vec<_> = y.iter().map(|&p| basis.eval(p)).collect();
    let mb = basis.len();

    let mut bh = [
        DenseMatrix::zeros(mb, n),
        DenseMatrix::zeros(mb, n),
        DenseMatrix::zeros(mb, n),
    ];
    for (e, ev) in evals.iter().enumerate() {
        for (i, &g) in ev.gradients.iter().enumerate() {
            let pg = project_unchecked(normals[e], g);
            for c in 0..3 {
                bh[c][(i, e)] = pg[c];
            }
        }
    }
    let eliminated = axis_misalignment_fix(&bh);
    let kept: Vec<usize> = (0..mb).filter(|j| !eliminated.contains(j)).collect();
    let mk = kept.len();
    let size = n + mk;
    let m = config.phs_exponent;

    let mut saddle = DenseMatrix::zeros(size, size);
    for i in 0..n {
        for j in 0..i {
            let v = phs_unchecked(y[i], y[j], m).0;
            saddle[(i, j)] = v;
            saddle[(j, i)] = v;
        }
        for (jj, &j) in kept.iter().enumerate() {
            let h = evals[i].values[j];
            saddle[(i, n + jj)] = h;
            saddle[(n + jj, i)] = h;
        }
    }

    // column c*n + e holds the c-th component at evaluation point e
    let mut rhs = DenseMatrix::zeros(size, 3 * n);
    for e in 0..n {
        for j in 0..n {
            let g = project_unchecked(normals[e], phs_unchecked(y[e], y[j], m).1);
            for c in 0..3 {
                rhs[(j, c * n + e)] = g[c];
            }
        }
        for (jj, &j) in kept.iter().enumerate() {
            for c in 0..3 {
                rhs[(n + jj, c * n + e)] = bh[c][(j, e)];
            }
        }
    }

    let lu = LuFactors::new(&saddle)
        .map_err(|e| stencil_error(nodes, stencil, format!("saddle system: {e}")))?;
    let sol = lu.solve(&rhs)?;
    if sol.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(stencil_error(nodes, stencil, "non-finite weights".into()));
    }

    let gradient: [DenseMatrix; 3] =
        std::array::from_fn(|c| DenseMatrix::from_fn(n, n, |k, e| sol[(k, c * n + e)] / rho));
    let laplacian = laplacian_rows(&gradient, &stencil.retained);
    Ok(StencilOperators {
        gradient,
        laplacian,
        eliminated_basis: eliminated,
        basis,
        origin,
        length_scale: rho,
    })
}

/// Rows of `sum_c D_c D_c` for the given evaluation nodes, where
/// `D_c[(e, k)] = gradient[c][(k, e)]` applies the `c`-th gradient component
/// to samples on the stencil.
fn laplacian_rows(gradient: &[DenseMatrix; 3], rows: &[usize]) -> DenseMatrix {
    let n = gradient[0].rows();
    let mut out = DenseMatrix::zeros(rows.len(), n);
    for (r, &e) in rows.iter().enumerate() {
        let row = out.row_mut(r);
        for g in gradient {
            for k in 0..n {
                let w = g[(k, e)];
                if w != 0.0 {
                    for (o, j) in row.iter_mut().zip(0..n) {
                        *o += w * g[(j, k)];
                    }
                }
            }
        }
    }
    out
}

/// Laplacian block restricted to the stencil's retained nodes.
pub fn stencil_laplacian(ops: &StencilOperators, stencil: &Stencil) -> DenseMatrix {
    laplacian_rows(&ops.gradient, &stencil.retained)
}
