//! Continuous coefficient functions, L2 projection into the broken
//! polynomial space, Lagrange sampling and L2 errors.

use thiserror::Error;

use crate::assembly::DofMatrix;
use crate::basis::{self, PolynomialOrder};
use crate::mesh::Mesh;
use crate::quadrature::quad_rule_2d;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("{message} at t = {}, x = ({}, {})", .point.0, .point.1, .point.2)]
    Evaluation { message: String, point: (f64, f64, f64) },
    #[error("reference mass matrix is singular")]
    SingularMass,
    #[error(transparent)]
    Basis(#[from] basis::BasisError),
}

/// A scalar function of time and physical position.
pub trait ContinuousFunction: Send + Sync {
    /// Writes f(t, x) for every point into `out`.
    fn evaluate(&self, t: f64, points: &[[f64; 2]], out: &mut [f64]) -> Result<(), FieldError>;
}

impl<F> ContinuousFunction for F
where
    F: Fn(f64, f64, f64) -> f64 + Send + Sync,
{
    fn evaluate(&self, t: f64, points: &[[f64; 2]], out: &mut [f64]) -> Result<(), FieldError> {
        for (o, x) in out.iter_mut().zip(points) {
            *o = self(t, x[0], x[1]);
        }
        Ok(())
    }
}

/// Evaluates `f` and rejects non-finite values.
pub fn evaluate_checked(
    f: &dyn ContinuousFunction,
    t: f64,
    points: &[[f64; 2]],
) -> Result<Vec<f64>, FieldError> {
    let mut out = vec![0.0; points.len()];
    f.evaluate(t, points, &mut out)?;
    if let Some(i) = out.iter().position(|v| !v.is_finite()) {
        return Err(FieldError::Evaluation {
            message: format!("function value {} is not finite", out[i]),
            point: (t, points[i][0], points[i][1]),
        });
    }
    Ok(out)
}

/// Basis values at the nodes of a 2D rule, `vals[r * n + i]`.
fn basis_table(points: &[[f64; 2]], n: usize) -> Vec<f64> {
    points
        .iter()
        .flat_map(|x| (0..n).map(move |i| basis::phi_value(i, x[0], x[1])))
        .collect()
}

/// Solves M̂ X = B for the N×K right-hand side `rhs` (column k at `rhs[k*n..]`).
fn solve_reference_mass(m_hat: &[f64], n: usize, rhs: &mut [f64]) -> Result<(), FieldError> {
    let m = faer::Mat::<f64>::from_fn(n, n, |i, j| m_hat[i * n + j]);
    let lu = m.partial_piv_lu();
    let u = lu.U();
    if (0..n).any(|i| !(u[(i, i)].abs() > 1e-12)) {
        return Err(FieldError::SingularMass);
    }
    let k = rhs.len() / n;
    let mut b = faer::Mat::<f64>::from_fn(n, k, |i, c| rhs[c * n + i]);
    use faer::linalg::solvers::Solve;
    lu.solve_in_place(b.as_mut());
    for c in 0..k {
        for i in 0..n {
            rhs[c * n + i] = b[(i, c)];
        }
    }
    Ok(())
}

/// L2 projection of `func(t, ·)` with a triangle rule of order `q_ord`.
pub fn project(
    mesh: &Mesh,
    func: &dyn ContinuousFunction,
    t: f64,
    q_ord: usize,
    m_hat: &[f64],
) -> Result<DofMatrix, FieldError> {
    let n = (m_hat.len() as f64).sqrt().round() as usize;
    PolynomialOrder::from_n_local(n)?;
    let rule = quad_rule_2d(q_ord.max(1));
    let vals = basis_table(&rule.points, n);
    let nq = rule.len();
    let k_count = mesh.num_t();
    let mut pts = Vec::with_capacity(k_count * nq);
    for k in 0..k_count {
        pts.extend(rule.points.iter().map(|&x| mesh.map_to_physical(k, x)));
    }
    let f = evaluate_checked(func, t, &pts)?;
    let mut rhs = vec![0.0; k_count * n];
    for k in 0..k_count {
        for (r, &w) in rule.weights.iter().enumerate() {
            let wf = w * f[k * nq + r];
            for i in 0..n {
                rhs[k * n + i] += wf * vals[r * n + i];
            }
        }
    }
    solve_reference_mass(m_hat, n, &mut rhs)?;
    Ok(DofMatrix::from_vec(k_count, n, rhs))
}

/// Evaluates the discrete field on triangle k at reference point x̂.
pub fn evaluate_at(dof: &DofMatrix, k: usize, x: [f64; 2]) -> f64 {
    dof.row(k)
        .iter()
        .enumerate()
        .map(|(i, c)| c * basis::phi_value(i, x[0], x[1]))
        .sum()
}

/// Reference coordinates of the Lagrange nodes for `n_local` basis
/// functions: vertices for p ≤ 1, vertices and edge midpoints otherwise.
pub fn lagrange_nodes(n_local: usize) -> Vec<[f64; 2]> {
    if n_local <= 3 {
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]
    } else {
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.5], [0.0, 0.5], [0.5, 0.0]]
    }
}

/// Samples the field at [`lagrange_nodes`]. Returns K rows of 3 or 6 values;
/// piecewise constants are replicated to the vertices and fields with p > 2
/// are sampled at the quadratic nodes.
pub fn to_lagrange(dof: &DofMatrix) -> Vec<Vec<f64>> {
    let nodes = lagrange_nodes(dof.n_local());
    (0..dof.num_t())
        .map(|k| nodes.iter().map(|&x| evaluate_at(dof, k, x)).collect())
        .collect()
}

/// ‖c_h − c(t)‖ in L2(Ω), integrated with a triangle rule of order `q_ord`.
pub fn l2_error(
    mesh: &Mesh,
    dof: &DofMatrix,
    exact: &dyn ContinuousFunction,
    t: f64,
    q_ord: usize,
) -> Result<f64, FieldError> {
    let n = dof.n_local();
    let rule = quad_rule_2d(q_ord.max(1));
    let vals = basis_table(&rule.points, n);
    let nq = rule.len();
    let mut pts = Vec::with_capacity(mesh.num_t() * nq);
    for k in 0..mesh.num_t() {
        pts.extend(rule.points.iter().map(|&x| mesh.map_to_physical(k, x)));
    }
    let c = evaluate_checked(exact, t, &pts)?;
    let mut total = 0.0;
    for k in 0..mesh.num_t() {
        let row = dof.row(k);
        let mut local = 0.0;
        for (r, &w) in rule.weights.iter().enumerate() {
            let ch: f64 = (0..n).map(|i| row[i] * vals[r * n + i]).sum();
            let d = ch - c[k * nq + r];
            local += w * d * d;
        }
        total += mesh.area_t()[k] * local;
    }
    Ok((2.0 * total).sqrt())
}
