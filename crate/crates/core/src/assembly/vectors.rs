//! Right-hand-side vectors from boundary data and sources.

use super::{AssemblyError, DofMatrix, EdgeSelector, SparseOperator};
use crate::fields::{evaluate_checked, ContinuousFunction};
use crate::mesh::Mesh;
use crate::quadrature::OrderTables;

/// Physical quadrature points on every selected edge, in selector order.
fn edge_points(mesh: &Mesh, sel: &EdgeSelector, tables: &OrderTables) -> (Vec<(usize, usize)>, Vec<[f64; 2]>) {
    let pairs: Vec<(usize, usize)> = sel.iter().collect();
    let r1 = tables.rule_1d.len();
    let mut pts = Vec::with_capacity(pairs.len() * r1);
    for &(k, n) in &pairs {
        for &s in &tables.rule_1d.points {
            let x = crate::quadrature::gamma_map(n, s).expect("edge index in range");
            pts.push(mesh.map_to_physical(k, x));
        }
    }
    (pairs, pts)
}

/// J_D¹ and J_D²: ∫_E φ_ki c_D ν^m over Dirichlet edges.
pub fn assemble_vec_dirichlet_nu(
    mesh: &Mesh,
    sel: &EdgeSelector,
    c_d: &dyn ContinuousFunction,
    t: f64,
    tables: &OrderTables,
    n_local: usize,
) -> Result<[Vec<f64>; 2], AssemblyError> {
    sel.check(mesh)?;
    let (pairs, pts) = edge_points(mesh, sel, tables);
    let vals = evaluate_checked(c_d, t, &pts)?;
    let r1 = tables.rule_1d.len();
    let mut out = [vec![0.0; mesh.num_t() * n_local], vec![0.0; mesh.num_t() * n_local]];
    for (p, &(k, e)) in pairs.iter().enumerate() {
        let len = mesh.area_e0t()[k][e];
        let nu = mesh.nu_e0t()[k][e];
        for i in 0..n_local {
            let mut acc = 0.0;
            for (r, &w) in tables.rule_1d.weights.iter().enumerate() {
                acc += w * tables.phi_edge(e, r, i) * vals[p * r1 + r];
            }
            for m in 0..2 {
                out[m][k * n_local + i] += nu[m] * len * acc;
            }
        }
    }
    Ok(out)
}

/// K_D: Dirichlet data tested against φ_ki, with the edge length cancelled
/// by the 1/|E| penalty scaling.
pub fn assemble_vec_dirichlet(
    mesh: &Mesh,
    sel: &EdgeSelector,
    c_d: &dyn ContinuousFunction,
    t: f64,
    tables: &OrderTables,
    n_local: usize,
) -> Result<Vec<f64>, AssemblyError> {
    sel.check(mesh)?;
    let (pairs, pts) = edge_points(mesh, sel, tables);
    let vals = evaluate_checked(c_d, t, &pts)?;
    let r1 = tables.rule_1d.len();
    let mut out = vec![0.0; mesh.num_t() * n_local];
    for (p, &(k, e)) in pairs.iter().enumerate() {
        for i in 0..n_local {
            let mut acc = 0.0;
            for (r, &w) in tables.rule_1d.weights.iter().enumerate() {
                acc += w * tables.phi_edge(e, r, i) * vals[p * r1 + r];
            }
            out[k * n_local + i] += acc;
        }
    }
    Ok(out)
}

/// K_N: ∫_E φ_ki d_h g_N over Neumann edges.
pub fn assemble_vec_neumann(
    mesh: &Mesh,
    sel: &EdgeSelector,
    d_disc: &DofMatrix,
    g_n: &dyn ContinuousFunction,
    t: f64,
    tables: &OrderTables,
) -> Result<Vec<f64>, AssemblyError> {
    sel.check(mesh)?;
    let n_local = d_disc.n_local();
    d_disc.check(mesh.num_t(), n_local)?;
    let (pairs, pts) = edge_points(mesh, sel, tables);
    let vals = evaluate_checked(g_n, t, &pts)?;
    let r1 = tables.rule_1d.len();
    let mut out = vec![0.0; mesh.num_t() * n_local];
    let mut dg = vec![0.0; r1];
    for (p, &(k, e)) in pairs.iter().enumerate() {
        let len = mesh.area_e0t()[k][e];
        let d = d_disc.row(k);
        for (r, v) in dg.iter_mut().enumerate() {
            let dh: f64 = (0..n_local).map(|l| d[l] * tables.phi_edge(e, r, l)).sum();
            *v = tables.rule_1d.weights[r] * dh * vals[p * r1 + r];
        }
        for i in 0..n_local {
            let acc: f64 = (0..r1).map(|r| tables.phi_edge(e, r, i) * dg[r]).sum();
            out[k * n_local + i] += len * acc;
        }
    }
    Ok(out)
}

/// L = M vec(F).
pub fn assemble_vec_source(mass: &SparseOperator, f_disc: &DofMatrix) -> Result<Vec<f64>, AssemblyError> {
    if mass.ncols() != f_disc.as_slice().len() {
        return Err(AssemblyError::DofShape {
            rows: f_disc.num_t(),
            cols: f_disc.n_local(),
            k: mass.ncols(),
            n: 1,
        });
    }
    Ok(mass.mul_vec(f_disc.as_slice()))
}
