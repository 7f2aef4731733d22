//! Node sets with unit normals on the supported surfaces.

use std::collections::{BinaryHeap, HashMap};
use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::kdtree::KdTree;
use super::vec3::{add, dist, dot, norm, normalize, scale, sub, Vec3};
use crate::error::{Error, Result};

pub const MAX_SPHERE_LEVEL: u32 = 7;

/// Major and minor radius of the ring torus.
pub const TORUS_R: f64 = 1.0;
pub const TORUS_TUBE: f64 = 1.0 / 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Surface {
    Sphere,
    Torus,
    DoubleTorus,
    External,
}

impl fmt::Display for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Surface::Sphere => "sphere",
            Surface::Torus => "torus",
            Surface::DoubleTorus => "double_torus",
            Surface::External => "external",
        })
    }
}

impl std::str::FromStr for Surface {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere" => Ok(Surface::Sphere),
            "torus" => Ok(Surface::Torus),
            "double_torus" | "double-torus" => Ok(Surface::DoubleTorus),
            "external" => Ok(Surface::External),
            other => Err(Error::Config(format!("unknown surface '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct NodeSet {
    pub points: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub surface: Surface,
}

impl NodeSet {
    /// Validates lengths, unit normals (1e-12) and distinctness (1e-14).
    pub fn new(points: Vec<Vec3>, normals: Vec<Vec3>, surface: Surface) -> Result<Self> {
        if points.len() != normals.len() {
            return Err(Error::Dimension {
                expected: points.len(),
                actual: normals.len(),
            });
        }
        if points.is_empty() {
            return Err(Error::InvalidInput("node set is empty".into()));
        }
        for (i, (p, nrm)) in points.iter().zip(&normals).enumerate() {
            if p.iter().chain(nrm.iter()).any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("node {i} has non-finite data")));
            }
            if (norm(*nrm) - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "normal {i} is not unit length (|n| = {})",
                    norm(*nrm)
                )));
            }
        }
        check_distinct(&points)?;
        Ok(Self {
            points,
            normals,
            surface,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Smallest distance between two distinct nodes.
    pub fn min_separation(&self) -> f64 {
        let tree = KdTree::new(&self.points);
        self.points
            .iter()
            .map(|&p| {
                tree.knn_with_distances(p, 2)
                    .get(1)
                    .map_or(f64::INFINITY, |&(_, d)| d)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_distinct(points: &[Vec3]) -> Result<()> {
    let tree = KdTree::new(points);
    for (i, &p) in points.iter().enumerate() {
        for j in tree.within(p, 1e-14) {
            if j != i {
                return Err(Error::DuplicatePoints {
                    first: i.min(j),
                    second: i.max(j),
                });
            }
        }
    }
    Ok(())
}

/// Icosahedral nodes on the unit sphere: `10 * 4^level + 2` points.
pub fn generate_sphere_nodes(level: u32) -> Result<NodeSet> {
    if level > MAX_SPHERE_LEVEL {
        return Err(Error::Config(format!(
            "sphere subdivision level {level} exceeds the cap of {MAX_SPHERE_LEVEL}"
        )));
    }
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|&v| normalize(v))
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                verts.push(normalize(scale(add(verts[a], verts[b]), 0.5)));
                verts.len() - 1
            })
        };
        for &[a, b, c] in &faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let normals = verts.clone();
    NodeSet::new(verts, normals, Surface::Sphere)
}

/// Implicit function of the ring torus; zero on the surface.
pub fn torus_implicit(x: Vec3) -> f64 {
    let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
    (TORUS_R - rho).powi(2) + x[2] * x[2] - TORUS_TUBE * TORUS_TUBE
}

/// Point and outward normal at intrinsic coordinates (tube angle `phi`,
/// azimuth `lambda`).
pub fn torus_point(phi: f64, lambda: f64) -> (Vec3, Vec3) {
    let ring = TORUS_R + TORUS_TUBE * phi.cos();
    let p = [
        ring * lambda.cos(),
        ring * lambda.sin(),
        TORUS_TUBE * phi.sin(),
    ];
    let n = [
        phi.cos() * lambda.cos(),
        phi.cos() * lambda.sin(),
        phi.sin(),
    ];
    (p, n)
}

/// Intrinsic coordinates `(phi, lambda)` of a point on (or near) the torus.
pub fn torus_angles(x: Vec3) -> (f64, f64) {
    let lambda = x[1].atan2(x[0]);
    let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let phi = x[2].atan2(rho - TORUS_R);
    (phi, lambda)
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Quasi-uniform torus nodes from a shifted Halton sequence in intrinsic
/// coordinates, thinned by the area element and relaxed by a short
/// surface-constrained repulsion.
pub fn generate_torus_nodes(count_target: usize, seed: u64) -> Result<NodeSet> {
    if count_target < 100 {
        return Err(Error::Config(format!(
            "torus node count must be at least 100 (got {count_target})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
    let mut points = Vec::with_capacity(count_target);
    let mut i = 1u64;
    while points.len() < count_target {
        let u = [
            (radical_inverse(i, 2) + shift[0]).fract(),
            (radical_inverse(i, 3) + shift[1]).fract(),
            (radical_inverse(i, 5) + shift[2]).fract(),
        ];
        i += 1;
        let phi = 2.0 * PI * u[0] - PI;
        let lambda = 2.0 * PI * u[1] - PI;
        if u[2] < (TORUS_R + TORUS_TUBE * phi.cos()) / (TORUS_R + TORUS_TUBE) {
            points.push(torus_point(phi, lambda).0);
        }
    }
    let project = |x: Vec3| {
        let (phi, lambda) = torus_angles(x);
        Some(torus_point(phi, lambda).0)
    };
    relax_on_surface(&mut points, &project, TORUS_RELAX_ITERATIONS);
    let normals = points
        .iter()
        .map(|&p| {
            let (phi, lambda) = torus_angles(p);
            torus_point(phi, lambda).1
        })
        .collect();
    NodeSet::new(points, normals, Surface::Torus)
}

const TORUS_RELAX_ITERATIONS: usize = 20;

/// Implicit function of the genus-2 surface; zero on the surface.
pub fn double_torus_implicit(x: Vec3) -> f64 {
    let g = x[0] * x[0] * (1.0 - x[0] * x[0]) - x[1] * x[1];
    g * g + 0.5 * x[2] * x[2] - 1.0 / 40.0
}

pub fn double_torus_gradient(x: Vec3) -> Vec3 {
    let g = x[0] * x[0] * (1.0 - x[0] * x[0]) - x[1] * x[1];
    [
        2.0 * g * (2.0 * x[0] - 4.0 * x[0].powi(3)),
        -4.0 * g * x[1],
        x[2],
    ]
}

/// Damped Newton projection onto the zero set of `f` along its gradient.
/// Returns `None` if the iteration fails to reach `|f| < 1e-13`.
pub fn newton_project(
    mut x: Vec3,
    f: impl Fn(Vec3) -> f64,
    grad: impl Fn(Vec3) -> Vec3,
    max_step: f64,
) -> Option<Vec3> {
    for _ in 0..100 {
        let v = f(x);
        if v.abs() < 1e-13 {
            return Some(x);
        }
        let g = grad(x);
        let gg = dot(g, g);
        if gg < 1e-24 {
            return None;
        }
        let mut step = scale(g, -v / gg);
        let len = norm(step);
        if len > max_step {
            step = scale(step, max_step / len);
        }
        x = add(x, step);
    }
    None
}

/// Nodes on the genus-2 surface `(x^2(1-x^2) - y^2)^2 + z^2/2 = 1/40`.
///
/// Random box seeds are projected onto the surface, thinned to the target by
/// greedy removal of the closest pairs, then spread by constrained repulsion.
pub fn sample_double_torus(count_target: usize, seed: u64) -> Result<NodeSet> {
    if count_target < 100 {
        return Err(Error::Config(format!(
            "double torus node count must be at least 100 (got {count_target})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = [-1.2, -0.7, -0.3];
    let hi = [1.2, 0.7, 0.3];
    let oversample = 4 * count_target;
    let mut raw = Vec::with_capacity(oversample);
    let mut attempts = 0usize;
    while raw.len() < oversample && attempts < 20 * oversample {
        attempts += 1;
        let x = [
            rng.gen_range(lo[0]..hi[0]),
            rng.gen_range(lo[1]..hi[1]),
            rng.gen_range(lo[2]..hi[2]),
        ];
        if let Some(p) = newton_project(x, double_torus_implicit, double_torus_gradient, 0.1) {
            raw.push(p);
        }
    }
    if raw.len() < count_target.div_ceil(2) {
        return Err(Error::Sampling(format!(
            "only {} of {} projected seeds converged",
            raw.len(),
            count_target
        )));
    }
    let mut points = eliminate_to(&raw, count_target);
    let project = |x: Vec3| newton_project(x, double_torus_implicit, double_torus_gradient, 0.05);
    relax_on_surface(&mut points, &project, 30);
    let normals = points
        .iter()
        .map(|&p| normalize(double_torus_gradient(p)))
        .collect();
    NodeSet::new(points, normals, Surface::DoubleTorus)
}

#[derive(PartialEq)]
struct Closest {
    d: f64,
    index: usize,
}

impl Eq for Closest {}

impl Ord for Closest {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // min-heap on distance, then index
        other
            .d
            .total_cmp(&self.d)
            .then(other.index.cmp(&self.index))
    }
}

impl PartialOrd for Closest {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Repeatedly drops the point with the smallest nearest-neighbor distance
/// until `target` points remain.
fn eliminate_to(points: &[Vec3], target: usize) -> Vec<Vec3> {
    if points.len() <= target {
        return points.to_vec();
    }
    const K: usize = 24;
    let tree = KdTree::new(points);
    let neighbors: Vec<Vec<(usize, f64)>> = points
        .iter()
        .map(|&p| {
            tree.knn_with_distances(p, K + 1)
                .into_iter()
                .skip(1)
                .collect()
        })
        .collect();
    let mut alive = vec![true; points.len()];
    let nearest = |i: usize, alive: &[bool]| {
        neighbors[i]
            .iter()
            .find(|(j, _)| alive[*j])
            .map_or(f64::INFINITY, |&(_, d)| d)
    };
    let mut heap: BinaryHeap<Closest> = (0..points.len())
        .map(|i| Closest {
            d: nearest(i, &alive),
            index: i,
        })
        .collect();
    let mut remaining = points.len();
    while remaining > target {
        let Some(Closest { d, index }) = heap.pop() else {
            break;
        };
        if !alive[index] {
            continue;
        }
        let current = nearest(index, &alive);
        if current != d {
            heap.push(Closest { d: current, index });
            continue;
        }
        alive[index] = false;
        remaining -= 1;
    }
    points
        .iter()
        .zip(&alive)
        .filter(|(_, a)| **a)
        .map(|(p, _)| *p)
        .collect()
}

/// Short-range repulsion moves, each followed by reprojection onto the
/// surface. Moves that fail to reproject are rejected.
fn relax_on_surface(
    points: &mut [Vec3],
    project: &dyn Fn(Vec3) -> Option<Vec3>,
    iterations: usize,
) {
    const K: usize = 8;
    if points.len() <= K {
        return;
    }
    for _ in 0..iterations {
        let tree = KdTree::new(points);
        let moves: Vec<Vec3> = points
            .iter()
            .map(|&p| {
                let nb = tree.knn_with_distances(p, K + 1);
                let h = nb.iter().skip(1).map(|(_, d)| d).sum::<f64>() / K as f64;
                let mut force = [0.0; 3];
                let mut total = 0.0;
                for &(j, d) in nb.iter().skip(1) {
                    if d > 0.0 {
                        let w = (h / d).powi(3);
                        force = add(force, scale(sub(p, points[j]), w / d));
                        total += w;
                    }
                }
                if total == 0.0 {
                    return [0.0; 3];
                }
                scale(force, 0.2 * h / total)
            })
            .collect();
        for (p, m) in points.iter_mut().zip(&moves) {
            if let Some(q) = project(add(*p, *m)) {
                if dist(q, *p) <= 3.0 * norm(*m) {
                    *p = q;
                }
            }
        }
    }
}
