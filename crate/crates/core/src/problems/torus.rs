//! Manufactured solution for forced diffusion on the ring torus.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{torus_angles, Vec3, TORUS_R, TORUS_TUBE};

/// Seed of the 23 bump centers.
pub const TORUS_CENTER_SEED: u64 = 0x7045_2023;
pub const TORUS_CENTER_COUNT: usize = 23;
pub const DIFFUSION_DT: f64 = 1e-3;
pub const DIFFUSION_FINAL_TIME: f64 = 0.1;

const DECAY: f64 = 5.0;
const AZIMUTH_SHARPNESS: f64 = 81.0;
const TUBE_SHARPNESS: f64 = 9.0;

/// `c = exp(-5t) sum_k exp(-81 (1 - cos(lambda - lambda_k)) - 9 (1 - cos(phi - phi_k)))`
/// with forcing `f = c_t - Laplace-Beltrami(c)`.
#[derive(Clone, Debug)]
pub struct TorusManufactured {
    /// `(phi_k, lambda_k)` pairs.
    pub centers: Vec<(f64, f64)>,
}

impl TorusManufactured {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centers = (0..TORUS_CENTER_COUNT)
            .map(|_| (rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)))
            .collect();
        Self { centers }
    }

    /// Spatial factor and its derivatives
    /// `(s, s_phi, s_phiphi, s_lambdalambda)`.
    fn spatial(&self, phi: f64, lambda: f64) -> (f64, f64, f64, f64) {
        let (mut s, mut sp, mut spp, mut sll) = (0.0, 0.0, 0.0, 0.0);
        for &(pk, lk) in &self.centers {
            let (sd, cd) = (phi - pk).sin_cos();
            let (sl, cl) = (lambda - lk).sin_cos();
            let e = (-AZIMUTH_SHARPNESS * (1.0 - cl) - TUBE_SHARPNESS * (1.0 - cd)).exp();
            s += e;
            sp += -TUBE_SHARPNESS * sd * e;
            spp += (TUBE_SHARPNESS * TUBE_SHARPNESS * sd * sd - TUBE_SHARPNESS * cd) * e;
            sll += (AZIMUTH_SHARPNESS * AZIMUTH_SHARPNESS * sl * sl - AZIMUTH_SHARPNESS * cl) * e;
        }
        (s, sp, spp, sll)
    }

    pub fn solution(&self, t: f64, phi: f64, lambda: f64) -> f64 {
        (-DECAY * t).exp() * self.spatial(phi, lambda).0
    }

    /// Laplace-Beltrami of the solution in intrinsic coordinates.
    pub fn laplacian(&self, t: f64, phi: f64, lambda: f64) -> f64 {
        let (_, sp, spp, sll) = self.spatial(phi, lambda);
        let ring = TORUS_R + TORUS_TUBE * phi.cos();
        let lap = spp / (TORUS_TUBE * TORUS_TUBE) - phi.sin() / (TORUS_TUBE * ring) * sp
            + sll / (ring * ring);
        (-DECAY * t).exp() * lap
    }

    pub fn forcing(&self, t: f64, phi: f64, lambda: f64) -> f64 {
        -DECAY * self.solution(t, phi, lambda) - self.laplacian(t, phi, lambda)
    }

    pub fn solution_at(&self, t: f64, x: Vec3) -> f64 {
        let (phi, lambda) = torus_angles(x);
        self.solution(t, phi, lambda)
    }

    pub fn forcing_at(&self, t: f64, x: Vec3) -> f64 {
        let (phi, lambda) = torus_angles(x);
        self.forcing(t, phi, lambda)
    }
}

impl Default for TorusManufactured {
    fn default() -> Self {
        Self::new(TORUS_CENTER_SEED)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_factor_is_separable() {
        let m = TorusManufactured::default();
        let (p, l) = (0.4, -1.2);
        let r = m.solution(0.3, p, l) / m.solution(0.0, p, l);
        assert!((r - (-1.5f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn single_center_peak_is_one() {
        let m = TorusManufactured {
            centers: vec![(0.7, -2.0)],
        };
        assert_eq!(m.solution(0.0, 0.7, -2.0), 1.0);
    }

    #[test]
    fn centers_are_reproducible_and_in_range() {
        let a = TorusManufactured::default();
        let b = TorusManufactured::default();
        assert_eq!(a.centers, b.centers);
        assert_eq!(a.centers.len(), 23);
        assert!(a
            .centers
            .iter()
            .all(|&(p, l)| (-PI..PI).contains(&p) && (-PI..PI).contains(&l)));
    }
}
