//! Deformational flow on the unit sphere and the two-bell initial condition.

use std::f64::consts::PI;

use crate::assembly::{GlobalOperators, Hyperviscosity};
use crate::error::{Error, Result};
use crate::geometry::vec3::{dist2, norm};
use crate::geometry::Vec3;

/// Period of the deformational flow; the flow reverses at `T/2`.
pub const FLOW_PERIOD: f64 = 5.0;
/// Time step used for the advection runs.
pub const ADVECTION_DT: f64 = 5.0 / 2400.0;

const BELL_1: Vec3 = [0.866_025_403_784_438_6, 0.5, 0.0];
const BELL_2: Vec3 = [0.866_025_403_784_438_6, -0.5, 0.0];

/// Cartesian velocity of the deformational flow at time `t` and point `x`
/// on the unit sphere.
pub fn deformational_velocity(t: f64, x: Vec3) -> Result<Vec3> {
    if (norm(x) - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidInput(format!(
            "point {x:?} is not on the unit sphere"
        )));
    }
    let lon = x[1].atan2(x[0]);
    let lat = x[2].clamp(-1.0, 1.0).asin();
    let tp = FLOW_PERIOD;
    let amp = 10.0 / tp * (PI * t / tp).cos();
    let shift = lon - 2.0 * PI * t / tp;
    let u = amp * shift.sin().powi(2) * (2.0 * lat).sin() + 2.0 * PI / tp * lat.cos();
    let v = amp * (2.0 * shift).sin() * lat.cos();
    let east = [-lon.sin(), lon.cos(), 0.0];
    let north = [-lat.sin() * lon.cos(), -lat.sin() * lon.sin(), lat.cos()];
    Ok([
        u * east[0] + v * north[0],
        u * east[1] + v * north[1],
        u * east[2] + v * north[2],
    ])
}

/// Two Gaussian bells centered symmetrically about the x-z plane.
pub fn gaussian_bells(x: Vec3) -> f64 {
    0.95 * ((-5.0 * dist2(x, BELL_1)).exp() + (-5.0 * dist2(x, BELL_2)).exp())
}

/// Largest pointwise speed of the flow at time `t` over the given points.
pub fn max_speed(points: &[Vec3], t: f64) -> Result<f64> {
    let mut m = 0.0f64;
    for &p in points {
        m = m.max(norm(deformational_velocity(t, p)?));
    }
    Ok(m)
}

/// Conservative advection right-hand side
/// `-(Gx(u1 c) + Gy(u2 c) + Gz(u3 c)) + gamma L^k c`.
pub struct Advection<'a> {
    ops: &'a GlobalOperators,
    points: &'a [Vec3],
    hyper: Option<Hyperviscosity>,
    velocity: Vec<Vec3>,
    velocity_time: f64,
    flux: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> Advection<'a> {
    pub fn new(
        ops: &'a GlobalOperators,
        points: &'a [Vec3],
        hyper: Option<Hyperviscosity>,
    ) -> Self {
        let n = points.len();
        Self {
            ops,
            points,
            hyper,
            velocity: Vec::new(),
            velocity_time: f64::NAN,
            flux: vec![0.0; n],
            scratch: vec![0.0; n],
        }
    }

    pub fn rhs(&mut self, t: f64, c: &[f64], out: &mut [f64]) -> Result<()> {
        if self.velocity_time != t {
            self.velocity = self
                .points
                .iter()
                .map(|&p| deformational_velocity(t, p))
                .collect::<Result<_>>()?;
            self.velocity_time = t;
        }
        out.fill(0.0);
        for (comp, g) in self.ops.gradient().into_iter().enumerate() {
            for ((f, v), ci) in self.flux.iter_mut().zip(&self.velocity).zip(c) {
                *f = v[comp] * ci;
            }
            g.spmv_into(&self.flux, &mut self.scratch)?;
            for (o, s) in out.iter_mut().zip(&self.scratch) {
                *o -= s;
            }
        }
        if let Some(h) = self.hyper {
            h.apply(&self.ops.laplacian, c, &mut self.scratch)?;
            for (o, s) in out.iter_mut().zip(&self.scratch) {
                *o += s;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vec3::dot;
    use proptest::prelude::*;

    #[test]
    fn half_period_is_pure_rotation() {
        for &x in &[[1.0, 0.0, 0.0], [0.0, 0.6, 0.8], [-0.48, 0.6, -0.64]] {
            let v = deformational_velocity(2.5, x).unwrap();
            let lat = f64::asin(x[2]);
            let lon = x[1].atan2(x[0]);
            let u = 2.0 * PI / 5.0 * lat.cos();
            let expect = [-u * lon.sin(), u * lon.cos(), 0.0];
            for q in 0..3 {
                assert!((v[q] - expect[q]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn initial_velocity_at_origin_of_coordinates() {
        let v = deformational_velocity(0.0, [1.0, 0.0, 0.0]).unwrap();
        assert!(v[0].abs() < 1e-15 && (v[1] - 2.0 * PI / 5.0).abs() < 1e-15 && v[2].abs() < 1e-15);
    }

    #[test]
    fn off_sphere_rejected() {
        assert!(deformational_velocity(0.0, [2.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn bell_values() {
        let at_p1 = gaussian_bells(BELL_1);
        assert!((at_p1 - 0.95 * (1.0 + (-5f64).exp())).abs() < 1e-15);
        let far = gaussian_bells([-0.866_025_403_784_438_6, 0.0, 0.0]);
        assert!(far < 0.95 * 2.0 * (-10f64).exp());
    }

    #[test]
    fn flow_is_divergence_free() {
        // spherical divergence (u_lon + (v cos lat)_lat) / cos lat by central differences
        let vel = |t: f64, lon: f64, lat: f64| {
            let x = [lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()];
            let w = deformational_velocity(t, x).unwrap();
            let east = [-lon.sin(), lon.cos(), 0.0];
            let north = [-lat.sin() * lon.cos(), -lat.sin() * lon.sin(), lat.cos()];
            (dot(w, east), dot(w, north))
        };
        let h = 1e-5;
        for &(t, lon, lat) in &[(0.7, 0.3, 0.2), (3.1, -2.0, -0.9), (4.4, 1.1, 0.5)] {
            let du = (vel(t, lon + h, lat).0 - vel(t, lon - h, lat).0) / (2.0 * h);
            let dv = (vel(t, lon, lat + h).1 * (lat + h).cos()
                - vel(t, lon, lat - h).1 * (lat - h).cos())
                / (2.0 * h);
            assert!(((du + dv) / lat.cos()).abs() < 1e-8);
        }
    }

    proptest! {
        #[test]
        fn velocity_is_tangent(
            t in 0.0f64..5.0,
            p in prop::array::uniform3(-1.0f64..1.0),
        ) {
            prop_assume!(norm(p) > 1e-3);
            let x = crate::geometry::vec3::scale(p, 1.0 / norm(p));
            let v = deformational_velocity(t, x).unwrap();
            prop_assert!(dot(v, x).abs() < 1e-12);
        }

        #[test]
        fn bells_mirror_symmetric(p in prop::array::uniform3(-1.0f64..1.0)) {
            let q = [p[0], -p[1], p[2]];
            prop_assert!((gaussian_bells(p) - gaussian_bells(q)).abs() < 1e-15);
        }
    }
}
