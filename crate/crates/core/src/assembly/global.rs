//! Global sparse operators and hyperviscosity parameters.

use log::{debug, warn};

use super::config::AssemblyConfig;
use super::weights::build_stencil_weights;
use crate::error::{Error, Result};
use crate::geometry::{NodeSet, StencilSet};
use crate::linalg::{max_real_part, ArnoldiOptions, SparseMatrix};

#[derive(Clone, Debug)]
pub struct GlobalOperators {
    pub gx: SparseMatrix,
    pub gy: SparseMatrix,
    pub gz: SparseMatrix,
    pub laplacian: SparseMatrix,
    /// Number of stencils where the axis fix removed at least one basis function.
    pub stencils_with_eliminations: usize,
}

impl GlobalOperators {
    pub fn gradient(&self) -> [&SparseMatrix; 3] {
        [&self.gx, &self.gy, &self.gz]
    }
}

/// Builds every stencil's weights and scatters the claimed rows.
pub fn assemble_global(
    stencils: &StencilSet,
    nodes: &NodeSet,
    config: &AssemblyConfig,
) -> Result<GlobalOperators> {
    config.validate()?;
    let total = nodes.len();
    if stencils.owner.len() != total {
        return Err(Error::Dimension {
            expected: total,
            actual: stencils.owner.len(),
        });
    }
    let mut grad_rows: [Vec<Vec<(usize, f64)>>; 3] =
        std::array::from_fn(|_| vec![Vec::new(); total]);
    let mut lap_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); total];
    let mut with_elim = 0;
    for st in &stencils.stencils {
        let ops = build_stencil_weights(st, nodes, config)?;
        if !ops.eliminated_basis.is_empty() {
            with_elim += 1;
            debug!(
                "stencil {}: axis fix removed basis {:?}",
                st.center, ops.eliminated_basis
            );
        }
        for &e in &st.claimed {
            let global = st.neighbors[e];
            let r = st.retained.iter().position(|&x| x == e).ok_or_else(|| {
                Error::InvalidInput(format!("claimed node {global} not retained"))
            })?;
            lap_rows[global] = st
                .neighbors
                .iter()
                .zip(ops.laplacian.row(r))
                .map(|(&j, &w)| (j, w))
                .collect();
            for c in 0..3 {
                grad_rows[c][global] = st
                    .neighbors
                    .iter()
                    .enumerate()
                    .map(|(k, &j)| (j, ops.gradient[c][(k, e)]))
                    .collect();
            }
        }
    }
    let [rx, ry, rz] = grad_rows;
    Ok(GlobalOperators {
        gx: SparseMatrix::from_rows(total, rx)?,
        gy: SparseMatrix::from_rows(total, ry)?,
        gz: SparseMatrix::from_rows(total, rz)?,
        laplacian: SparseMatrix::from_rows(total, lap_rows)?,
        stencils_with_eliminations: with_elim,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyperviscosity {
    pub gamma: f64,
    pub power: u32,
}

impl Hyperviscosity {
    /// `out = gamma * L^power * c` by repeated products.
    pub fn apply(&self, laplacian: &SparseMatrix, c: &[f64], out: &mut [f64]) -> Result<()> {
        let mut cur = c.to_vec();
        let mut next = vec![0.0; c.len()];
        for _ in 0..self.power {
            laplacian.spmv_into(&cur, &mut next)?;
            std::mem::swap(&mut cur, &mut next);
        }
        for (o, v) in out.iter_mut().zip(&cur) {
            *o = self.gamma * v;
        }
        Ok(())
    }
}

/// `k = floor(ln n)` and
/// `gamma = (-1)^(1+k) 2^(2-2k) N^(1-k) lambda_max u_max`.
pub fn hyperviscosity_params(
    lambda_max: f64,
    stencil_size: usize,
    node_count: usize,
    u_max: f64,
) -> Result<Hyperviscosity> {
    let k = (stencil_size as f64).ln().floor();
    if k < 1.0 {
        return Err(Error::Config(format!(
            "stencil size {stencil_size} gives hyperviscosity power below 1"
        )));
    }
    let k = k as i32;
    let sign = if (1 + k) % 2 == 0 { 1.0 } else { -1.0 };
    let gamma = sign * 2f64.powi(2 - 2 * k) * (node_count as f64).powi(1 - k) * lambda_max * u_max;
    Ok(Hyperviscosity {
        gamma,
        power: k as u32,
    })
}

/// Largest real part over the spectra of the given matrices, and whether
/// every Arnoldi run converged.
pub fn estimate_lambda_max(mats: &[&SparseMatrix], tol: f64) -> Result<(f64, bool)> {
    let opts = ArnoldiOptions {
        tol,
        ..ArnoldiOptions::default()
    };
    let (value, converged) = max_real_part(mats, &opts)?;
    if !converged {
        warn!("rightmost eigenvalue estimate did not converge; using best estimate {value}");
    }
    Ok((value, converged))
}
