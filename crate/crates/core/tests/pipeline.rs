use manifold_rbf::assembly::AssemblyConfig;
use manifold_rbf::experiments::{assemble, run_torus_diffusion};
use manifold_rbf::geometry::vec3::{dist2, dot};
use manifold_rbf::geometry::{
    generate_sphere_nodes, generate_torus_nodes, sample_double_torus, Vec3,
};
use manifold_rbf::problems::{
    deformational_velocity, gaussian_bells, relative_l2_error, Advection, TorusManufactured,
    DIFFUSION_DT,
};

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn divergence_norms(ell: usize, tau: f64, levels: std::ops::RangeInclusive<u32>) -> Vec<f64> {
    let config = AssemblyConfig::for_degree(ell, tau).unwrap();
    levels
        .map(|level| {
            let nodes = generate_sphere_nodes(level).unwrap();
            let a = assemble(&nodes, &config).unwrap();
            let mut adv = Advection::new(&a.ops, &nodes.points, None);
            let ones = vec![1.0; nodes.len()];
            let mut out = vec![0.0; nodes.len()];
            adv.rhs(0.9, &ones, &mut out).unwrap();
            max_abs(&out)
        })
        .collect()
}

#[test]
fn discrete_divergence_of_flow_shrinks_under_refinement() {
    let norms = divergence_norms(2, 1e-2, 4..=5);
    assert!(norms[1] < norms[0] / 3.0, "{norms:?}");
}

#[test]
fn quadratic_flow_divergence_is_exact_for_cubic_operators() {
    // the stream function is quadratic, so the Cartesian velocity is too
    let norms = divergence_norms(3, 1e-3, 2..=4);
    assert!(norms.iter().all(|&v| v < 1e-11), "{norms:?}");
}

/// `-u . grad c` for the bells, with the gradient written out by hand.
fn transport_of_bells(t: f64, x: Vec3) -> f64 {
    let centers = [[0.75f64.sqrt(), 0.5, 0.0], [0.75f64.sqrt(), -0.5, 0.0]];
    let mut g = [0.0; 3];
    for p in centers {
        let e = 0.95 * (-5.0 * dist2(x, p)).exp();
        for q in 0..3 {
            g[q] += -10.0 * (x[q] - p[q]) * e;
        }
    }
    -dot(deformational_velocity(t, x).unwrap(), g)
}

#[test]
fn advection_rhs_converges_to_transport() {
    let config = AssemblyConfig::for_degree(3, 1e-3).unwrap();
    let mut errors = Vec::new();
    for level in 3..=4 {
        let nodes = generate_sphere_nodes(level).unwrap();
        let a = assemble(&nodes, &config).unwrap();
        let mut adv = Advection::new(&a.ops, &nodes.points, None);
        let c: Vec<f64> = nodes.points.iter().map(|&p| gaussian_bells(p)).collect();
        let mut out = vec![0.0; c.len()];
        adv.rhs(0.7, &c, &mut out).unwrap();
        let exact: Vec<f64> = nodes
            .points
            .iter()
            .map(|&p| transport_of_bells(0.7, p))
            .collect();
        errors.push(relative_l2_error(&out, &exact).unwrap());
    }
    // third order in sqrt(N) would give a factor 8 per level
    assert!(errors[1] < errors[0] / 5.0, "{errors:?}");
    assert!(errors[1] < 1e-3);
}

#[test]
fn torus_diffusion_is_accurate_at_moderate_resolution() {
    let nodes = generate_torus_nodes(2000, 11).unwrap();
    let config = AssemblyConfig::for_degree(4, 1e-3).unwrap();
    let r = run_torus_diffusion(
        &nodes,
        &config,
        &TorusManufactured::default(),
        DIFFUSION_DT,
        0.02,
        None,
    )
    .unwrap();
    assert_eq!(r.steps, 20);
    assert!(r.error < 2e-2, "{}", r.error);
}

#[test]
fn double_torus_laplacian_annihilates_constants() {
    let nodes = sample_double_torus(800, 2).unwrap();
    let config = AssemblyConfig::for_degree(4, 1e-3).unwrap();
    let a = assemble(&nodes, &config).unwrap();
    let l1 = a.ops.laplacian.spmv(&vec![1.0; nodes.len()]).unwrap();
    let scale = max_abs(a.ops.laplacian.values());
    assert!(max_abs(&l1) < 1e-9 * scale);
}
