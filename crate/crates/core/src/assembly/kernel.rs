//! Polyharmonic spline kernel and tangent-plane projection.

use crate::error::{Error, Result};
use crate::geometry::vec3::{dot, norm, scale, sub};
use crate::geometry::Vec3;

/// `|x - c|^m` and its gradient in `x`, for odd `m >= 3` (the gradient is
/// zero at `x = c`).
pub fn phs(x: Vec3, c: Vec3, m: u32) -> Result<(f64, Vec3)> {
    if m.is_multiple_of(2) || m < 3 {
        return Err(Error::Config(format!(
            "PHS exponent must be odd and >= 3, got {m}"
        )));
    }
    Ok(phs_unchecked(x, c, m))
}

#[inline]
pub(crate) fn phs_unchecked(x: Vec3, c: Vec3, m: u32) -> (f64, Vec3) {
    let d = sub(x, c);
    let r = norm(d);
    if r == 0.0 {
        return (0.0, [0.0; 3]);
    }
    let rm2 = r.powi(m as i32 - 2);
    (rm2 * r * r, scale(d, m as f64 * rm2))
}

/// `(I - n n^T) v` for a unit normal `n`.
pub fn surface_project(normal: Vec3, v: Vec3) -> Result<Vec3> {
    if (norm(normal) - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!(
            "normal must be unit length, got |n| = {}",
            norm(normal)
        )));
    }
    Ok(project_unchecked(normal, v))
}

#[inline]
pub(crate) fn project_unchecked(normal: Vec3, v: Vec3) -> Vec3 {
    let d = dot(normal, v);
    [
        v[0] - d * normal[0],
        v[1] - d * normal[1],
        v[2] - d * normal[2],
    ]
}
