//! Reaction-diffusion models split into a stiff linear part (implicit) and
//! an explicit remainder.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::linalg::SparseMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CahnHilliard {
    pub nu: f64,
    pub gamma: f64,
}

impl Default for CahnHilliard {
    fn default() -> Self {
        Self {
            nu: 0.5,
            gamma: 0.006,
        }
    }
}

/// FitzHugh-Nagumo kinetics with a shared diffusion coefficient; it has
/// no default.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitzHughNagumo {
    pub diffusion: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Turing {
    pub delta1: f64,
    pub delta2: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma1: f64,
}

impl Default for Turing {
    fn default() -> Self {
        let alpha = 0.899;
        Self {
            delta1: 0.0011,
            delta2: 0.0021,
            tau1: 0.02,
            tau2: 0.2,
            alpha,
            beta: -0.91,
            gamma1: -alpha,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    CahnHilliard,
    FitzHughNagumo,
    Turing,
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cahn_hilliard" | "ch" => Ok(Self::CahnHilliard),
            "fhn" | "fitzhugh_nagumo" => Ok(Self::FitzHughNagumo),
            "turing" => Ok(Self::Turing),
            other => Err(Error::Config(format!("unknown reaction model '{other}'"))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::CahnHilliard => "cahn_hilliard",
            Self::FitzHughNagumo => "fhn",
            Self::Turing => "turing",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReactionModel {
    CahnHilliard(CahnHilliard),
    FitzHughNagumo(FitzHughNagumo),
    Turing(Turing),
}

impl ReactionModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            Self::CahnHilliard(_) => ModelKind::CahnHilliard,
            Self::FitzHughNagumo(_) => ModelKind::FitzHughNagumo,
            Self::Turing(_) => ModelKind::Turing,
        }
    }

    pub fn field_count(&self) -> usize {
        match self {
            Self::CahnHilliard(_) => 1,
            _ => 2,
        }
    }

    /// Parameter record as name/value pairs.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match self {
            Self::CahnHilliard(p) => vec![("nu", p.nu), ("gamma", p.gamma)],
            Self::FitzHughNagumo(p) => vec![("delta1", p.diffusion)],
            Self::Turing(p) => vec![
                ("delta1", p.delta1),
                ("delta2", p.delta2),
                ("tau1", p.tau1),
                ("tau2", p.tau2),
                ("alpha", p.alpha),
                ("beta", p.beta),
                ("gamma1", p.gamma1),
            ],
        }
    }

    /// Description of the implicit/explicit split.
    pub fn splitting(&self) -> &'static str {
        match self {
            Self::CahnHilliard(_) => "implicit: -nu L c - nu gamma (L L) c; explicit: nu L (c^3)",
            Self::FitzHughNagumo(_) => "implicit: delta1 L on both fields; explicit: kinetics",
            Self::Turing(_) => "implicit: delta1 L, delta2 L; explicit: kinetics",
        }
    }

    /// Stiff linear operator on the stacked fields.
    pub fn implicit_operator(&self, laplacian: &SparseMatrix) -> Result<SparseMatrix> {
        match self {
            Self::CahnHilliard(p) => {
                let bilap = laplacian.matmul(laplacian)?;
                laplacian.add_scaled(-p.nu, &bilap, -p.nu * p.gamma)
            }
            Self::FitzHughNagumo(p) => {
                block_diagonal(&[laplacian.scaled(p.diffusion), laplacian.scaled(p.diffusion)])
            }
            Self::Turing(p) => {
                block_diagonal(&[laplacian.scaled(p.delta1), laplacian.scaled(p.delta2)])
            }
        }
    }

    /// Explicit part for the stacked state `u` (length `field_count * N`).
    /// `scratch` must have length `N`.
    pub fn explicit(
        &self,
        laplacian: &SparseMatrix,
        u: &[f64],
        out: &mut [f64],
        scratch: &mut [f64],
    ) -> Result<()> {
        let n = laplacian.nrows();
        if u.len() != self.field_count() * n || out.len() != u.len() {
            return Err(Error::Dimension {
                expected: self.field_count() * n,
                actual: u.len(),
            });
        }
        match self {
            Self::CahnHilliard(p) => {
                for (s, c) in scratch.iter_mut().zip(u) {
                    *s = c * c * c;
                }
                laplacian.spmv_into(scratch, out)?;
                out.iter_mut().for_each(|v| *v *= p.nu);
            }
            Self::FitzHughNagumo(_) => {
                let (c1, c2) = u.split_at(n);
                let (o1, o2) = out.split_at_mut(n);
                for i in 0..n {
                    let (a, b) = fhn_kinetics(c1[i], c2[i]);
                    o1[i] = a;
                    o2[i] = b;
                }
            }
            Self::Turing(p) => {
                let (c1, c2) = u.split_at(n);
                let (o1, o2) = out.split_at_mut(n);
                for i in 0..n {
                    let (a, b) = p.kinetics(c1[i], c2[i]);
                    o1[i] = a;
                    o2[i] = b;
                }
            }
        }
        Ok(())
    }
}

/// FitzHugh-Nagumo reaction terms.
pub fn fhn_kinetics(c1: f64, c2: f64) -> (f64, f64) {
    (c1 * (1.0 - c1) * (c1 - (c2 + 0.02) / 0.75) / 0.02, c1 - c2)
}

impl Turing {
    pub fn kinetics(&self, c1: f64, c2: f64) -> (f64, f64) {
        (
            self.alpha * c1 * (1.0 - self.tau1 * c2 * c2) + c2 * (1.0 - self.tau2 * c1),
            self.beta * c2 * (1.0 + self.alpha * self.tau1 / self.beta * c1 * c2)
                + c1 * (self.gamma1 + self.tau2 * c2),
        )
    }
}

/// FitzHugh-Nagumo initial fields at `x`.
pub fn fhn_initial(x: Vec3) -> (f64, f64) {
    (
        0.5 * (1.0 + (5.0 * x[0] + x[1]).tanh()),
        0.5 * (1.0 - (10.0 * x[2]).tanh()),
    )
}

/// `mean + amplitude * U(-1, 1)` per entry from a seeded generator.
pub fn random_field(len: usize, mean: f64, amplitude: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| mean + amplitude * rng.gen_range(-1.0..1.0))
        .collect()
}

fn block_diagonal(blocks: &[SparseMatrix]) -> Result<SparseMatrix> {
    let total: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut rows = Vec::with_capacity(total);
    let mut off = 0;
    for b in blocks {
        for i in 0..b.nrows() {
            rows.push(b.row(i).map(|(j, v)| (j + off, v)).collect());
        }
        off += b.ncols();
    }
    SparseMatrix::from_rows(off, rows)
}
