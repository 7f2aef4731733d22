//! Stencil and kernel parameters derived from the requested polynomial degree.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct AssemblyConfig {
    /// Requested polynomial degree.
    pub degree: usize,
    /// Number of basis functions requested from the LOI construction.
    pub basis_size: usize,
    pub stencil_size: usize,
    /// Odd exponent of the polyharmonic spline `r^m`.
    pub phs_exponent: u32,
    pub delta: f64,
    pub tau: f64,
    /// Highest degree the LOI construction may reach.
    pub degree_cap: usize,
}

/// Number of trivariate polynomials of total degree at most `ell`.
pub fn polynomial_dim(ell: usize) -> usize {
    (ell + 1) * (ell + 2) * (ell + 3) / 6
}

/// Overlap parameter used for a requested degree.
pub fn default_delta(ell: usize) -> f64 {
    if ell <= 4 {
        0.7
    } else if ell <= 6 {
        0.5
    } else {
        0.3
    }
}

impl AssemblyConfig {
    /// Parameters for degree `ell`: `M = C(ell+3, 3)`, `n = 2M + 1`,
    /// `m = 2 ell + 1`, the default overlap, and `ell + 2` as degree cap.
    pub fn for_degree(ell: usize, tau: f64) -> Result<Self> {
        if ell == 0 {
            return Err(Error::Config("polynomial degree must be positive".into()));
        }
        let basis_size = polynomial_dim(ell);
        let cfg = Self {
            degree: ell,
            basis_size,
            stencil_size: 2 * basis_size + 1,
            phs_exponent: 2 * ell as u32 + 1,
            delta: default_delta(ell),
            tau,
            degree_cap: ell + 2,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parameters for accuracy order `xi` of an operator of order `theta`
    /// (degree `xi + theta - 1`).
    pub fn for_order(xi: usize, theta: usize, tau: f64) -> Result<Self> {
        if xi == 0 || theta == 0 {
            return Err(Error::Config(
                "order and operator order must be positive".into(),
            ));
        }
        Self::for_degree(xi + theta - 1, tau)
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        self.delta = delta;
        self.validate()?;
        Ok(self)
    }

    pub fn with_stencil_size(mut self, n: usize) -> Result<Self> {
        self.stencil_size = n;
        self.validate()?;
        Ok(self)
    }

    pub fn with_phs_exponent(mut self, m: u32) -> Result<Self> {
        self.phs_exponent = m;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.phs_exponent.is_multiple_of(2) || self.phs_exponent < 3 {
            return Err(Error::Config(format!(
                "PHS exponent must be odd and at least 3, got {}",
                self.phs_exponent
            )));
        }
        if self.basis_size > self.stencil_size / 2 {
            return Err(Error::Config(format!(
                "basis size {} exceeds half the stencil size {}",
                self.basis_size, self.stencil_size
            )));
        }
        if !(self.delta > 0.2 && self.delta <= 1.0) {
            return Err(Error::Config(format!(
                "overlap delta must lie in (0.2, 1], got {}",
                self.delta
            )));
        }
        if !(self.tau >= 0.0) {
            return Err(Error::Config(format!(
                "tolerance must be nonnegative, got {}",
                self.tau
            )));
        }
        if self.degree_cap < self.degree {
            return Err(Error::Config("degree cap below requested degree".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heuristics() {
        let c = AssemblyConfig::for_degree(4, 1e-3).unwrap();
        assert_eq!((c.basis_size, c.stencil_size, c.phs_exponent), (35, 71, 9));
        assert_eq!(c.delta, 0.7);
        assert_eq!(c.degree_cap, 6);
        let c = AssemblyConfig::for_degree(2, 1e-2).unwrap();
        assert_eq!((c.basis_size, c.stencil_size, c.phs_exponent), (10, 21, 5));
        assert_eq!(AssemblyConfig::for_degree(5, 0.0).unwrap().delta, 0.5);
        assert_eq!(AssemblyConfig::for_degree(7, 0.0).unwrap().delta, 0.3);
    }

    #[test]
    fn order_to_degree() {
        // a fourth-order Laplacian needs degree 5
        assert_eq!(AssemblyConfig::for_order(4, 2, 0.0).unwrap().degree, 5);
        assert_eq!(AssemblyConfig::for_order(2, 1, 0.0).unwrap().degree, 2);
    }

    #[test]
    fn rejects_bad_overrides() {
        let c = AssemblyConfig::for_degree(2, 1e-2).unwrap();
        assert!(c.clone().with_phs_exponent(4).is_err());
        assert!(c.clone().with_stencil_size(15).is_err());
        assert!(c.clone().with_delta(0.2).is_err());
        assert!(c.with_delta(1.0).is_ok());
    }
}
