//! Global block operators and right-hand-side vectors of the LDG system.
//!
//! Unknowns are ordered triangle-major: entry `k * N + j` is the coefficient
//! of basis function j on triangle k.

mod sparse;
mod vectors;

pub use sparse::{SparseError, SparseOperator};
pub use vectors::{
    assemble_vec_dirichlet, assemble_vec_dirichlet_nu, assemble_vec_neumann, assemble_vec_source,
};

use thiserror::Error;

use crate::mesh::Mesh;
use crate::reftensors::RefTensors;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("coefficient matrix is {rows}x{cols}, expected {k}x{n}")]
    DofShape { rows: usize, cols: usize, k: usize, n: usize },
    #[error("edge selector covers {0} triangles, mesh has {1}")]
    SelectorShape(usize, usize),
    #[error("normal component {0} out of range 0..2")]
    Component(usize),
    #[error(transparent)]
    Sparse(#[from] SparseError),
    #[error(transparent)]
    Field(#[from] crate::fields::FieldError),
}

/// K×N coefficient matrix of a broken polynomial field, stored row-major so
/// the flat storage is the stacked representation vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMatrix {
    k: usize,
    n: usize,
    data: Vec<f64>,
}

impl DofMatrix {
    pub fn zeros(k: usize, n: usize) -> Self {
        Self { k, n, data: vec![0.0; k * n] }
    }

    /// Wraps a stacked vector of length K·N. Panics on a length mismatch.
    pub fn from_vec(k: usize, n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), k * n, "representation vector length");
        Self { k, n, data }
    }

    pub fn num_t(&self) -> usize {
        self.k
    }

    pub fn n_local(&self) -> usize {
        self.n
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.n..(k + 1) * self.n]
    }

    pub fn row_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.data[k * self.n..(k + 1) * self.n]
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.data[k * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    fn check(&self, k: usize, n: usize) -> Result<(), AssemblyError> {
        if self.k != k || self.n != n {
            return Err(AssemblyError::DofShape { rows: self.k, cols: self.n, k, n });
        }
        Ok(())
    }
}

/// Marks (triangle, local edge) pairs taking part in an edge integral.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSelector {
    mask: Vec<[bool; 3]>,
}

impl EdgeSelector {
    pub fn from_mask(mask: Vec<[bool; 3]>) -> Self {
        Self { mask }
    }

    /// Edges shared by two triangles.
    pub fn interior(mesh: &Mesh) -> Self {
        let mask = mesh
            .e0t()
            .iter()
            .map(|es| es.map(|e| !mesh.is_boundary_edge(e)))
            .collect();
        Self { mask }
    }

    /// Boundary edges whose ID is in `ids`.
    pub fn boundary(mesh: &Mesh, ids: &[i32]) -> Self {
        let mask = mesh
            .e0t()
            .iter()
            .map(|es| es.map(|e| mesh.is_boundary_edge(e) && ids.contains(&mesh.id_e()[e])))
            .collect();
        Self { mask }
    }

    pub fn none(num_t: usize) -> Self {
        Self { mask: vec![[false; 3]; num_t] }
    }

    pub fn num_t(&self) -> usize {
        self.mask.len()
    }

    pub fn contains(&self, k: usize, n: usize) -> bool {
        self.mask[k][n]
    }

    pub fn mask(&self) -> &[[bool; 3]] {
        &self.mask
    }

    /// Selected pairs, local edge major and triangle ascending.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..3).flat_map(move |n| (0..self.mask.len()).filter(move |&k| self.mask[k][n]).map(move |k| (k, n)))
    }

    fn check(&self, mesh: &Mesh) -> Result<(), AssemblyError> {
        if self.mask.len() != mesh.num_t() {
            return Err(AssemblyError::SelectorShape(self.mask.len(), mesh.num_t()));
        }
        Ok(())
    }
}

/// Collects dense N×N blocks as triplets.
struct BlockTriplets {
    n: usize,
    trip: Vec<(usize, usize, f64)>,
}

impl BlockTriplets {
    fn new(n: usize, blocks: usize) -> Self {
        Self { n, trip: Vec::with_capacity(blocks * n * n) }
    }

    fn push(&mut self, kr: usize, kc: usize, block: &[f64]) {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                self.trip.push((kr * n + i, kc * n + j, block[i * n + j]));
            }
        }
    }

    fn finish(self, num_t: usize) -> SparseOperator {
        let dim = num_t * self.n;
        SparseOperator::from_triplets(dim, dim, &self.trip).expect("block indices are in range")
    }
}

fn axpy(acc: &mut [f64], a: f64, x: &[f64]) {
    for (y, v) in acc.iter_mut().zip(x) {
        *y += a * v;
    }
}

fn normal_component(m: usize) -> Result<usize, AssemblyError> {
    if m > 1 {
        return Err(AssemblyError::Component(m));
    }
    Ok(m)
}

/// Mass matrix M = 2 diag(|T_k|) ⊗ M̂.
pub fn assemble_mass(mesh: &Mesh, refs: &RefTensors) -> SparseOperator {
    let n = refs.n_local();
    let mut out = BlockTriplets::new(n, mesh.num_t());
    let mut block = vec![0.0; n * n];
    for k in 0..mesh.num_t() {
        block.fill(0.0);
        axpy(&mut block, 2.0 * mesh.area_t()[k], refs.m_hat());
        out.push(k, k, &block);
    }
    out.finish(mesh.num_t())
}

/// H¹ and H²: ∫ ∂_m φ_ki φ_kj on each triangle.
pub fn assemble_dphi_phi(mesh: &Mesh, refs: &RefTensors) -> [SparseOperator; 2] {
    let n = refs.n_local();
    let mut out = [BlockTriplets::new(n, mesh.num_t()), BlockTriplets::new(n, mesh.num_t())];
    let mut block = vec![0.0; n * n];
    for k in 0..mesh.num_t() {
        let b = mesh.b()[k];
        let coeff = [[b[1][1], -b[1][0]], [-b[0][1], b[0][0]]];
        for m in 0..2 {
            block.fill(0.0);
            axpy(&mut block, coeff[m][0], refs.h_hat(0));
            axpy(&mut block, coeff[m][1], refs.h_hat(1));
            out[m].push(k, k, &block);
        }
    }
    let [a, b] = out;
    [a.finish(mesh.num_t()), b.finish(mesh.num_t())]
}

/// G¹ and G²: ∫ d_h ∂_m φ_ki φ_kj with d_h given by its coefficients.
pub fn assemble_dphi_phi_coeff(
    mesh: &Mesh,
    refs: &RefTensors,
    d_disc: &DofMatrix,
) -> Result<[SparseOperator; 2], AssemblyError> {
    let n = refs.n_local();
    d_disc.check(mesh.num_t(), n)?;
    let mut out = [BlockTriplets::new(n, mesh.num_t()), BlockTriplets::new(n, mesh.num_t())];
    let mut block = vec![0.0; n * n];
    for k in 0..mesh.num_t() {
        let b = mesh.b()[k];
        let coeff = [[b[1][1], -b[1][0]], [-b[0][1], b[0][0]]];
        let d = d_disc.row(k);
        for m in 0..2 {
            block.fill(0.0);
            for (l, &dl) in d.iter().enumerate() {
                axpy(&mut block, dl * coeff[m][0], refs.g_hat(l, 0));
                axpy(&mut block, dl * coeff[m][1], refs.g_hat(l, 1));
            }
            out[m].push(k, k, &block);
        }
    }
    let [a, b] = out;
    Ok([a.finish(mesh.num_t()), b.finish(mesh.num_t())])
}

/// Penalty operators S (interior jumps) and S_D (Dirichlet edges). The
/// 1/|E| penalty scaling cancels the edge length of the integral.
pub fn assemble_edge_jump(
    mesh: &Mesh,
    interior: &EdgeSelector,
    dirichlet: &EdgeSelector,
    refs: &RefTensors,
) -> Result<(SparseOperator, SparseOperator), AssemblyError> {
    interior.check(mesh)?;
    dirichlet.check(mesh)?;
    let n = refs.n_local();
    let nt = mesh.num_t();
    let mut s = BlockTriplets::new(n, 4 * nt);
    let mut sd = BlockTriplets::new(n, nt);
    let mut block = vec![0.0; n * n];
    for k in 0..nt {
        for (sel, out) in [(interior, &mut s), (dirichlet, &mut sd)] {
            block.fill(0.0);
            let mut any = false;
            for e in 0..3 {
                if sel.contains(k, e) {
                    axpy(&mut block, 1.0, refs.s_diag(e));
                    any = true;
                }
            }
            if any {
                out.push(k, k, &block);
            }
        }
    }
    for nm in 0..3 {
        for np in 0..3 {
            for &(km, kp) in mesh.mark_e0te0t(nm, np) {
                if interior.contains(km, nm) {
                    block.fill(0.0);
                    axpy(&mut block, -1.0, refs.s_offdiag(nm, np));
                    s.push(km, kp, &block);
                }
            }
        }
    }
    Ok((s.finish(nt), sd.finish(nt)))
}

/// Q^m (interior averages) and Q_N^m (Neumann edges) for normal component m.
pub fn assemble_edge_avg_nu(
    mesh: &Mesh,
    m: usize,
    interior: &EdgeSelector,
    neumann: &EdgeSelector,
    refs: &RefTensors,
) -> Result<(SparseOperator, SparseOperator), AssemblyError> {
    let m = normal_component(m)?;
    interior.check(mesh)?;
    neumann.check(mesh)?;
    let n = refs.n_local();
    let nt = mesh.num_t();
    let mut q = BlockTriplets::new(n, 4 * nt);
    let mut qn = BlockTriplets::new(n, nt);
    let mut block = vec![0.0; n * n];
    for k in 0..nt {
        for (sel, factor, out) in [(interior, 0.5, &mut q), (neumann, 1.0, &mut qn)] {
            block.fill(0.0);
            let mut any = false;
            for e in 0..3 {
                if sel.contains(k, e) {
                    let w = factor * mesh.nu_e0t()[k][e][m] * mesh.area_e0t()[k][e];
                    axpy(&mut block, w, refs.s_diag(e));
                    any = true;
                }
            }
            if any {
                out.push(k, k, &block);
            }
        }
    }
    for nm in 0..3 {
        for np in 0..3 {
            for &(km, kp) in mesh.mark_e0te0t(nm, np) {
                if interior.contains(km, nm) {
                    let w = 0.5 * mesh.nu_e0t()[km][nm][m] * mesh.area_e0t()[km][nm];
                    block.fill(0.0);
                    axpy(&mut block, w, refs.s_offdiag(nm, np));
                    q.push(km, kp, &block);
                }
            }
        }
    }
    Ok((q.finish(nt), qn.finish(nt)))
}

/// R^m (interior averages of d z) and R_D^m (Dirichlet edges). Off-diagonal
/// blocks use the neighbour's diffusion coefficients.
pub fn assemble_edge_avg_coeff_nu(
    mesh: &Mesh,
    m: usize,
    d_disc: &DofMatrix,
    interior: &EdgeSelector,
    dirichlet: &EdgeSelector,
    refs: &RefTensors,
) -> Result<(SparseOperator, SparseOperator), AssemblyError> {
    let m = normal_component(m)?;
    interior.check(mesh)?;
    dirichlet.check(mesh)?;
    let n = refs.n_local();
    let nt = mesh.num_t();
    d_disc.check(nt, n)?;
    let mut r = BlockTriplets::new(n, 4 * nt);
    let mut rd = BlockTriplets::new(n, nt);
    let mut block = vec![0.0; n * n];
    for k in 0..nt {
        let d = d_disc.row(k);
        for (sel, factor, out) in [(interior, 0.5, &mut r), (dirichlet, 1.0, &mut rd)] {
            block.fill(0.0);
            let mut any = false;
            for e in 0..3 {
                if sel.contains(k, e) {
                    let w = factor * mesh.nu_e0t()[k][e][m] * mesh.area_e0t()[k][e];
                    for (l, &dl) in d.iter().enumerate() {
                        axpy(&mut block, w * dl, refs.r_diag(l, e));
                    }
                    any = true;
                }
            }
            if any {
                out.push(k, k, &block);
            }
        }
    }
    for nm in 0..3 {
        for np in 0..3 {
            for &(km, kp) in mesh.mark_e0te0t(nm, np) {
                if interior.contains(km, nm) {
                    let w = 0.5 * mesh.nu_e0t()[km][nm][m] * mesh.area_e0t()[km][nm];
                    block.fill(0.0);
                    for (l, &dl) in d_disc.row(kp).iter().enumerate() {
                        axpy(&mut block, w * dl, refs.r_offdiag(l, nm, np));
                    }
                    r.push(km, kp, &block);
                }
            }
        }
    }
    Ok((r.finish(nt), rd.finish(nt)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_grid_data;

    fn two_triangles() -> Mesh {
        let s3 = 3f64.sqrt();
        generate_grid_data(vec![[0.0, -1.0], [s3, 0.0], [0.0, 1.0], [-s3, 0.0]], vec![[3, 0, 2], [0, 1, 2]])
            .unwrap()
    }

    #[test]
    fn two_triangle_examples() {
        let mesh = two_triangles();
        let refs = RefTensors::new(1).unwrap();
        let mass = assemble_mass(&mesh, &refs);
        let s3 = 3f64.sqrt();
        assert!((mass.get(0, 0) - 2.0 * s3).abs() < 1e-14 && mass.get(0, 1) == 0.0);
        let interior = EdgeSelector::interior(&mesh);
        let all = EdgeSelector::boundary(&mesh, &[0]);
        let (s, sd) = assemble_edge_jump(&mesh, &interior, &all, &refs).unwrap();
        let expect = [[2.0, -2.0], [-2.0, 2.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((s.get(i, j) - expect[i][j]).abs() < 1e-14);
            }
        }
        assert!((sd.get(0, 0) - 4.0).abs() < 1e-14 && (sd.get(1, 1) - 4.0).abs() < 1e-14);
        let none = EdgeSelector::none(2);
        let (q1, _) = assemble_edge_avg_nu(&mesh, 0, &interior, &none, &refs).unwrap();
        let expect = [[2.0, 2.0], [-2.0, -2.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((q1.get(i, j) - expect[i][j]).abs() < 1e-14);
            }
        }
        let (q2, _) = assemble_edge_avg_nu(&mesh, 1, &interior, &none, &refs).unwrap();
        assert!(q2.max_abs() < 1e-14);
        assert!(assemble_edge_avg_nu(&mesh, 2, &interior, &none, &refs).is_err());
    }

    #[test]
    fn neumann_diagonal_entry() {
        let mesh = crate::mesh::domain_square(1.0).unwrap();
        let refs = RefTensors::new(1).unwrap();
        let south = EdgeSelector::boundary(&mesh, &[1]);
        let (_, qn) = assemble_edge_avg_nu(&mesh, 1, &EdgeSelector::none(2), &south, &refs).unwrap();
        let k = (0..2).find(|&k| (0..3).any(|e| south.contains(k, e))).unwrap();
        assert!((qn.get(k, k) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn constant_coefficient_reduces_to_h_and_q() {
        let mesh = crate::mesh::domain_square(0.5).unwrap();
        for n in [1, 3, 6, 10, 15] {
            let refs = RefTensors::new(n).unwrap();
            let mut one = DofMatrix::zeros(mesh.num_t(), n);
            for k in 0..mesh.num_t() {
                one.row_mut(k)[0] = 0.5f64.sqrt();
            }
            let h = assemble_dphi_phi(&mesh, &refs);
            let g = assemble_dphi_phi_coeff(&mesh, &refs, &one).unwrap();
            let interior = EdgeSelector::interior(&mesh);
            let none = EdgeSelector::none(mesh.num_t());
            for m in 0..2 {
                assert!(h[m].max_abs_diff(&g[m]) < 1e-12);
                let (q, _) = assemble_edge_avg_nu(&mesh, m, &interior, &none, &refs).unwrap();
                let (r, _) = assemble_edge_avg_coeff_nu(&mesh, m, &one, &interior, &none, &refs).unwrap();
                assert!(q.max_abs_diff(&r) < 1e-12);
            }
            let zero = DofMatrix::zeros(mesh.num_t(), n);
            assert!(assemble_dphi_phi_coeff(&mesh, &refs, &zero).unwrap()[0].max_abs() == 0.0);
            assert!(assemble_dphi_phi_coeff(&mesh, &refs, &DofMatrix::zeros(3, n)).is_err());
        }
    }

    #[test]
    fn jumps_of_constants_vanish() {
        let mesh = crate::mesh::refine_uniform(&crate::mesh::domain_square(0.5).unwrap());
        for n in [3, 6, 10] {
            let refs = RefTensors::new(n).unwrap();
            let (s, _) = assemble_edge_jump(&mesh, &EdgeSelector::interior(&mesh), &EdgeSelector::none(mesh.num_t()), &refs)
                .unwrap();
            let mut c = vec![0.0; mesh.num_t() * n];
            for k in 0..mesh.num_t() {
                c[k * n] = 0.7;
            }
            assert!(s.mul_vec(&c).iter().all(|v| v.abs() < 1e-12));
        }
    }
}
