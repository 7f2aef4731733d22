//! Point clouds on surfaces and the stencil structures built on them.

pub mod io;
pub mod kdtree;
pub mod nodes;
pub mod stencil;
pub mod vec3;

pub use io::{load_nodeset, parse_nodeset, write_nodeset};
pub use kdtree::KdTree;
pub use nodes::{
    double_torus_gradient, double_torus_implicit, generate_sphere_nodes, generate_torus_nodes,
    newton_project, sample_double_torus, torus_angles, torus_implicit, torus_point, NodeSet,
    Surface, MAX_SPHERE_LEVEL, TORUS_R, TORUS_TUBE,
};
pub use stencil::{build_stencils, make_stencil, Stencil, StencilSet};
pub use vec3::Vec3;
