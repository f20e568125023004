//! Manufactured-solution convergence studies.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::fields::{l2_error, ContinuousFunction};
use crate::mesh::{domain_square, refine_uniform, Mesh, MeshError};
use crate::reftensors::RefTensors;
use crate::system::{solve_stationary, BoundaryKind, ProblemSpec, SystemError};

/// A stationary problem together with its exact solution.
#[derive(Clone)]
pub struct Manufactured {
    pub spec: ProblemSpec,
    pub exact: Arc<dyn ContinuousFunction>,
}

/// c = cos(7x1) cos(7x2), d = exp(x1 + x2), Neumann on y = 0 and y = 1
/// (IDs 1 and 3), Dirichlet on x = 0 and x = 1 (IDs 4 and 2).
pub fn cosine_problem(eta: f64) -> Manufactured {
    let exact: Arc<dyn ContinuousFunction> = Arc::new(|_: f64, x: f64, y: f64| (7.0 * x).cos() * (7.0 * y).cos());
    let f = |_: f64, x: f64, y: f64| {
        let (s1, c1) = (7.0 * x).sin_cos();
        let (s2, c2) = (7.0 * y).sin_cos();
        (x + y).exp() * (7.0 * s1 * c2 + 7.0 * c1 * s2 + 98.0 * c1 * c2)
    };
    let spec = ProblemSpec {
        d: Arc::new(|_: f64, x: f64, y: f64| (x + y).exp()),
        f: Arc::new(f),
        c_d: exact.clone(),
        g_n: Arc::new(|_: f64, x: f64, y: f64| 7.0 * (7.0 * x).cos() * (7.0 * y).sin()),
        c0: exact.clone(),
        eta,
        boundary: BTreeMap::from([
            (1, BoundaryKind::Neumann),
            (2, BoundaryKind::Dirichlet),
            (3, BoundaryKind::Neumann),
            (4, BoundaryKind::Dirichlet),
        ]),
        t_end: 1.0,
        num_steps: 1,
        stationary: true,
    };
    Manufactured { spec, exact }
}

/// α = ln(e_{j−1}/e_j) / ln(h_{j−1}/h_j).
pub fn estimated_order(e_prev: f64, e: f64, h_prev: f64, h: f64) -> f64 {
    (e_prev / e).ln() / (h_prev / h).ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub p: usize,
    pub j: usize,
    pub h: f64,
    pub num_t: usize,
    pub error: f64,
    pub alpha: Option<f64>,
}

/// The coarse mesh domain_square(1/3) refined `levels` times, with
/// h_j = 1/(3·2^j).
pub fn mesh_hierarchy(levels: usize) -> Result<Vec<(f64, Mesh)>, MeshError> {
    let mut out = Vec::with_capacity(levels + 1);
    let mut mesh = domain_square(1.0 / 3.0)?;
    for j in 0..=levels {
        let h = 1.0 / (3.0 * f64::powi(2.0, j as i32));
        let next = (j < levels).then(|| refine_uniform(&mesh));
        out.push((h, mesh));
        match next {
            Some(m) => mesh = m,
            None => break,
        }
    }
    Ok(out)
}

/// Stationary solves and L2 errors (quadrature order 2p+2) on every mesh.
pub fn run_study(
    problem: &Manufactured,
    meshes: &[(f64, Mesh)],
    p: usize,
) -> Result<Vec<ConvergenceRow>, SystemError> {
    let n = (p + 1) * (p + 2) / 2;
    let refs = RefTensors::new(n)?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(meshes.len());
    for (j, (h, mesh)) in meshes.iter().enumerate() {
        let (c, _, _) = solve_stationary(mesh, &problem.spec, &refs)?;
        let error = l2_error(mesh, &c, problem.exact.as_ref(), 0.0, 2 * p + 2)?;
        let alpha = rows.last().map(|prev| estimated_order(prev.error, error, prev.h, *h));
        log::info!("p = {p}, j = {j}: K = {}, error = {error:.3e}", mesh.num_t());
        rows.push(ConvergenceRow { p, j, h: *h, num_t: mesh.num_t(), error, alpha });
    }
    Ok(rows)
}
