//! Triangulations with the topological and geometric lists used by assembly.
//!
//! All indices are zero-based. Local edge `n` of a triangle is opposite local
//! vertex `n` and joins local vertices `n+1` and `n+2` (mod 3). Global edges
//! are numbered lexicographically by (smaller vertex, larger vertex). For an
//! interior edge the triangle with the smaller index is `T⁻`.

mod medit;

use std::path::PathBuf;

pub use medit::{parse_mesh_medit, read_mesh_medit};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("triangle {triangle} is not counter-clockwise or is degenerate (signed area {signed_area:e})")]
    Orientation { triangle: usize, signed_area: f64 },
    #[error("triangle {triangle} references vertex {vertex}, but the mesh has {num_v} vertices")]
    VertexIndex { triangle: usize, vertex: usize, num_v: usize },
    #[error("triangle {triangle} repeats vertex {vertex}")]
    DuplicateVertex { triangle: usize, vertex: usize },
    #[error("edge ({0}, {1}) is shared by more than two triangles or by two triangles with the same orientation")]
    NonManifold(usize, usize),
    #[error("mesh has no triangles")]
    Empty,
    #[error("maximum edge length must be positive (got {0})")]
    NonPositiveH(f64),
    #[error("{path}: line {line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// The two triangles adjacent to an edge, with their local edge indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeTriangles {
    /// (k⁻, n⁻); always present.
    pub minus: (usize, usize),
    /// (k⁺, n⁺); `None` on the boundary.
    pub plus: Option<(usize, usize)>,
}

/// Immutable triangulation.
#[derive(Debug, Clone)]
pub struct Mesh {
    coord_v: Vec<[f64; 2]>,
    v0t: Vec<[usize; 3]>,
    e0t: Vec<[usize; 3]>,
    v0e: Vec<[usize; 2]>,
    t0e: Vec<EdgeTriangles>,
    area_t: Vec<f64>,
    area_e: Vec<f64>,
    area_e0t: Vec<[f64; 3]>,
    bary_t: Vec<[f64; 2]>,
    bary_e: Vec<[f64; 2]>,
    nu_e: Vec<[f64; 2]>,
    nu_e0t: Vec<[[f64; 2]; 3]>,
    b: Vec<[[f64; 2]; 2]>,
    mark: [[Vec<(usize, usize)>; 3]; 3],
    id_e: Vec<i32>,
    id_e0t: Vec<[i32; 3]>,
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Builds all mesh lists from vertex coordinates and counter-clockwise
/// triangles. Boundary IDs start at 0.
pub fn generate_grid_data(coord_v: Vec<[f64; 2]>, v0t: Vec<[usize; 3]>) -> Result<Mesh, MeshError> {
    if v0t.is_empty() {
        return Err(MeshError::Empty);
    }
    let num_v = coord_v.len();
    for (k, tri) in v0t.iter().enumerate() {
        for (i, &v) in tri.iter().enumerate() {
            if v >= num_v {
                return Err(MeshError::VertexIndex { triangle: k, vertex: v, num_v });
            }
            if tri[..i].contains(&v) {
                return Err(MeshError::DuplicateVertex { triangle: k, vertex: v });
            }
        }
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for tri in &v0t {
        for &v in tri {
            for m in 0..2 {
                lo[m] = lo[m].min(coord_v[v][m]);
                hi[m] = hi[m].max(coord_v[v][m]);
            }
        }
    }
    let tol = 1e-14 * (hi[0] - lo[0]) * (hi[1] - lo[1]);

    let num_t = v0t.len();
    let mut area_t = Vec::with_capacity(num_t);
    let mut b = Vec::with_capacity(num_t);
    let mut bary_t = Vec::with_capacity(num_t);
    for (k, tri) in v0t.iter().enumerate() {
        let [a1, a2, a3] = tri.map(|v| coord_v[v]);
        let area = signed_area(a1, a2, a3);
        if !(area > tol) {
            return Err(MeshError::Orientation { triangle: k, signed_area: area });
        }
        area_t.push(area);
        b.push([[a2[0] - a1[0], a3[0] - a1[0]], [a2[1] - a1[1], a3[1] - a1[1]]]);
        bary_t.push([(a1[0] + a2[0] + a3[0]) / 3.0, (a1[1] + a2[1] + a3[1]) / 3.0]);
    }

    // (min vertex, max vertex, k, n), sorted so equal keys are adjacent.
    let mut slots: Vec<(usize, usize, usize, usize)> = Vec::with_capacity(3 * num_t);
    for (k, tri) in v0t.iter().enumerate() {
        for n in 0..3 {
            let (a, c) = (tri[(n + 1) % 3], tri[(n + 2) % 3]);
            slots.push((a.min(c), a.max(c), k, n));
        }
    }
    slots.sort_unstable();

    let mut e0t = vec![[usize::MAX; 3]; num_t];
    let mut v0e = Vec::new();
    let mut t0e = Vec::new();
    let mut i = 0;
    while i < slots.len() {
        let (lo_v, hi_v, k, n) = slots[i];
        let e = t0e.len();
        let mut j = i + 1;
        while j < slots.len() && slots[j].0 == lo_v && slots[j].1 == hi_v {
            j += 1;
        }
        let plus = match j - i {
            1 => None,
            2 => {
                let (_, _, kp, np) = slots[i + 1];
                // consistently oriented neighbours traverse the edge in opposite directions
                if v0t[k][(n + 1) % 3] == v0t[kp][(np + 1) % 3] {
                    return Err(MeshError::NonManifold(lo_v, hi_v));
                }
                e0t[kp][np] = e;
                Some((kp, np))
            }
            _ => return Err(MeshError::NonManifold(lo_v, hi_v)),
        };
        e0t[k][n] = e;
        v0e.push([v0t[k][(n + 1) % 3], v0t[k][(n + 2) % 3]]);
        t0e.push(EdgeTriangles { minus: (k, n), plus });
        i = j;
    }

    let num_e = t0e.len();
    let mut area_e = Vec::with_capacity(num_e);
    let mut bary_e = Vec::with_capacity(num_e);
    let mut nu_e = Vec::with_capacity(num_e);
    for &[va, vb] in &v0e {
        let (a, c) = (coord_v[va], coord_v[vb]);
        let d = [c[0] - a[0], c[1] - a[1]];
        let len = d[0].hypot(d[1]);
        area_e.push(len);
        bary_e.push([0.5 * (a[0] + c[0]), 0.5 * (a[1] + c[1])]);
        nu_e.push([d[1] / len, -d[0] / len]);
    }
    let mut area_e0t = vec![[0.0; 3]; num_t];
    let mut nu_e0t = vec![[[0.0; 2]; 3]; num_t];
    for k in 0..num_t {
        for n in 0..3 {
            let e = e0t[k][n];
            area_e0t[k][n] = area_e[e];
            let minus = t0e[e].minus == (k, n);
            let nu = nu_e[e];
            nu_e0t[k][n] = if minus { nu } else { [-nu[0], -nu[1]] };
        }
    }

    let mut mark: [[Vec<(usize, usize)>; 3]; 3] = Default::default();
    for adj in &t0e {
        if let Some((kp, np)) = adj.plus {
            let (km, nm) = adj.minus;
            mark[nm][np].push((km, kp));
            mark[np][nm].push((kp, km));
        }
    }
    for row in mark.iter_mut() {
        for list in row.iter_mut() {
            list.sort_unstable();
        }
    }

    Ok(Mesh {
        coord_v,
        v0t,
        e0t,
        v0e,
        t0e,
        area_t,
        area_e,
        area_e0t,
        bary_t,
        bary_e,
        nu_e,
        nu_e0t,
        b,
        mark,
        id_e: vec![0; num_e],
        id_e0t: vec![[0; 3]; num_t],
    })
}

/// Friedrichs–Keller triangulation of the unit square with ⌈1/h_max⌉ edges
/// per side. Boundary IDs: 1 south, 2 east, 3 north, 4 west.
pub fn domain_square(h_max: f64) -> Result<Mesh, MeshError> {
    if !(h_max > 0.0) || !h_max.is_finite() {
        return Err(MeshError::NonPositiveH(h_max));
    }
    // the small shift keeps 1/(1/3) from rounding up to 4
    let dim = ((1.0 / h_max) - 1e-9).ceil().max(1.0) as usize;
    let stride = dim + 1;
    let mut coord_v = Vec::with_capacity(stride * stride);
    for col in 0..=dim {
        for row in 0..=dim {
            coord_v.push([col as f64 / dim as f64, row as f64 / dim as f64]);
        }
    }
    let mut lower = Vec::with_capacity(dim * dim);
    let mut upper = Vec::with_capacity(dim * dim);
    for col in 0..dim {
        for row in 0..dim {
            let b = col * stride + row;
            lower.push([b, b + stride, b + 1]);
            upper.push([b + stride, b + stride + 1, b + 1]);
        }
    }
    lower.extend(upper);
    let mut mesh = generate_grid_data(coord_v, lower)?;
    let ids: Vec<i32> = (0..mesh.num_e())
        .map(|e| {
            if mesh.t0e[e].plus.is_some() {
                return 0;
            }
            let [x, y] = mesh.bary_e[e];
            if y.abs() < 1e-12 {
                1
            } else if (x - 1.0).abs() < 1e-12 {
                2
            } else if (y - 1.0).abs() < 1e-12 {
                3
            } else {
                4
            }
        })
        .collect();
    mesh.set_boundary_ids(ids);
    Ok(mesh)
}

/// Red refinement: every triangle is split into four congruent children
/// through its edge midpoints. Child boundary edges inherit their parent's ID.
pub fn refine_uniform(mesh: &Mesh) -> Mesh {
    let num_v = mesh.num_v();
    let mut coord_v = mesh.coord_v.clone();
    coord_v.extend_from_slice(&mesh.bary_e);
    let mut v0t = Vec::with_capacity(4 * mesh.num_t());
    for k in 0..mesh.num_t() {
        let [a1, a2, a3] = mesh.v0t[k];
        let [m1, m2, m3] = mesh.e0t[k].map(|e| num_v + e);
        v0t.push([a1, m3, m2]);
        v0t.push([m3, a2, m1]);
        v0t.push([m2, m1, a3]);
        v0t.push([m1, m2, m3]);
    }
    let mut fine = generate_grid_data(coord_v, v0t).expect("children of a valid mesh are valid");
    let ids = (0..fine.num_e())
        .map(|e| {
            if fine.t0e[e].plus.is_some() {
                return 0;
            }
            let [va, vb] = fine.v0e[e];
            let mid = if va >= num_v { va } else { vb };
            mesh.id_e[mid - num_v]
        })
        .collect();
    fine.set_boundary_ids(ids);
    fine
}

impl Mesh {
    /// Number of triangles K.
    pub fn num_t(&self) -> usize {
        self.v0t.len()
    }

    pub fn num_e(&self) -> usize {
        self.v0e.len()
    }

    pub fn num_v(&self) -> usize {
        self.coord_v.len()
    }

    pub fn coord_v(&self) -> &[[f64; 2]] {
        &self.coord_v
    }

    pub fn v0t(&self) -> &[[usize; 3]] {
        &self.v0t
    }

    pub fn e0t(&self) -> &[[usize; 3]] {
        &self.e0t
    }

    /// Edge endpoints in the counter-clockwise order of `T⁻`.
    pub fn v0e(&self) -> &[[usize; 2]] {
        &self.v0e
    }

    pub fn t0e(&self) -> &[EdgeTriangles] {
        &self.t0e
    }

    pub fn area_t(&self) -> &[f64] {
        &self.area_t
    }

    pub fn area_e(&self) -> &[f64] {
        &self.area_e
    }

    pub fn area_e0t(&self) -> &[[f64; 3]] {
        &self.area_e0t
    }

    pub fn bary_t(&self) -> &[[f64; 2]] {
        &self.bary_t
    }

    pub fn bary_e(&self) -> &[[f64; 2]] {
        &self.bary_e
    }

    /// Unit normal of each edge, pointing out of `T⁻`.
    pub fn nu_e(&self) -> &[[f64; 2]] {
        &self.nu_e
    }

    /// Outward unit normal ν_kn.
    pub fn nu_e0t(&self) -> &[[[f64; 2]; 3]] {
        &self.nu_e0t
    }

    /// Affine matrices B_k, indexed `b[k][row][col]`.
    pub fn b(&self) -> &[[[f64; 2]; 2]] {
        &self.b
    }

    /// Sorted (k⁻, k⁺) pairs with E_{k⁻n⁻} = E_{k⁺n⁺}.
    pub fn mark_e0te0t(&self, n_minus: usize, n_plus: usize) -> &[(usize, usize)] {
        &self.mark[n_minus][n_plus]
    }

    pub fn is_marked(&self, n_minus: usize, n_plus: usize, k_minus: usize, k_plus: usize) -> bool {
        self.mark[n_minus][n_plus].binary_search(&(k_minus, k_plus)).is_ok()
    }

    pub fn id_e(&self) -> &[i32] {
        &self.id_e
    }

    pub fn id_e0t(&self) -> &[[i32; 3]] {
        &self.id_e0t
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.t0e[e].plus.is_none()
    }

    /// Sets boundary IDs from a per-edge list. Interior edges keep ID 0.
    pub fn set_boundary_ids(&mut self, ids: Vec<i32>) {
        assert_eq!(ids.len(), self.num_e(), "one boundary ID per edge");
        self.id_e = ids
            .into_iter()
            .enumerate()
            .map(|(e, id)| if self.t0e[e].plus.is_some() { 0 } else { id })
            .collect();
        self.id_e0t = self.e0t.iter().map(|es| es.map(|e| self.id_e[e])).collect();
    }

    /// Distinct nonzero boundary IDs in ascending order.
    pub fn boundary_ids(&self) -> Vec<i32> {
        let mut ids: Vec<i32> = (0..self.num_e())
            .filter(|&e| self.is_boundary_edge(e))
            .map(|e| self.id_e[e])
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Number of boundary edges whose ID is 0.
    pub fn untagged_boundary_edges(&self) -> usize {
        (0..self.num_e())
            .filter(|&e| self.is_boundary_edge(e) && self.id_e[e] == 0)
            .count()
    }

    /// F_k(x̂) = B_k x̂ + a_k1.
    #[inline]
    pub fn map_to_physical(&self, k: usize, x: [f64; 2]) -> [f64; 2] {
        let b = &self.b[k];
        let a = self.coord_v[self.v0t[k][0]];
        [
            b[0][0] * x[0] + b[0][1] * x[1] + a[0],
            b[1][0] * x[0] + b[1][1] * x[1] + a[1],
        ]
    }

    /// Largest edge length.
    pub fn h_max(&self) -> f64 {
        self.area_e.iter().copied().fold(0.0, f64::max)
    }

    /// Checks every structural invariant and returns a description of the
    /// first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        let tol = 1e-12;
        for k in 0..self.num_t() {
            let b = self.b[k];
            let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
            if !(det > 0.0) || (det - 2.0 * self.area_t[k]).abs() > tol * det.abs().max(1.0) {
                return Err(format!("det(B_{k}) = {det} does not equal 2|T_{k}|"));
            }
            for n in 0..3 {
                let nu = self.nu_e0t[k][n];
                if (nu[0].hypot(nu[1]) - 1.0).abs() > tol {
                    return Err(format!("normal of ({k}, {n}) is not unit"));
                }
                let e = self.e0t[k][n];
                let dx = [self.bary_e[e][0] - self.bary_t[k][0], self.bary_e[e][1] - self.bary_t[k][1]];
                if nu[0] * dx[0] + nu[1] * dx[1] <= 0.0 {
                    return Err(format!("normal of ({k}, {n}) points inward"));
                }
                let [va, vb] = self.v0e[e];
                let (la, lb) = (self.v0t[k][(n + 1) % 3], self.v0t[k][(n + 2) % 3]);
                if !((va == la && vb == lb) || (va == lb && vb == la)) {
                    return Err(format!("local edge ({k}, {n}) does not join vertices n+1, n+2"));
                }
                if self.id_e0t[k][n] != self.id_e[e] {
                    return Err(format!("id_e0t of ({k}, {n}) disagrees with id_e"));
                }
            }
        }
        let mut interior = 0;
        for (e, adj) in self.t0e.iter().enumerate() {
            let (km, nm) = adj.minus;
            if self.e0t[km][nm] != e {
                return Err(format!("t0e of edge {e} is inconsistent"));
            }
            if let Some((kp, np)) = adj.plus {
                interior += 1;
                if self.e0t[kp][np] != e || kp <= km {
                    return Err(format!("t0e of edge {e} is inconsistent"));
                }
                let (a, c) = (self.nu_e0t[km][nm], self.nu_e0t[kp][np]);
                if (a[0] + c[0]).abs() > tol || (a[1] + c[1]).abs() > tol {
                    return Err(format!("normals of interior edge {e} are not opposite"));
                }
                if self.id_e[e] != 0 {
                    return Err(format!("interior edge {e} carries boundary ID"));
                }
                if !self.is_marked(nm, np, km, kp) || !self.is_marked(np, nm, kp, km) {
                    return Err(format!("edge {e} missing from neighbour marks"));
                }
            }
        }
        let boundary = self.num_e() - interior;
        if 3 * self.num_t() != 2 * interior + boundary {
            return Err("edge count identity 3K = 2 interior + boundary fails".into());
        }
        let marked: usize = self.mark.iter().flatten().map(Vec::len).sum();
        if marked != 2 * interior {
            return Err(format!("{marked} mark entries for {interior} interior edges"));
        }
        for nm in 0..3 {
            for np in 0..3 {
                for &(km, kp) in &self.mark[nm][np] {
                    if self.e0t[km][nm] != self.e0t[kp][np] {
                        return Err(format!("mark ({nm},{np}) ({km},{kp}) joins different edges"));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_triangles() -> Mesh {
        let s3 = 3f64.sqrt();
        generate_grid_data(vec![[0.0, -1.0], [s3, 0.0], [0.0, 1.0], [-s3, 0.0]], vec![[3, 0, 2], [0, 1, 2]])
            .unwrap()
    }

    #[test]
    fn two_triangle_mesh_lists() {
        let m = two_triangles();
        assert_eq!((m.num_t(), m.num_v(), m.num_e()), (2, 4, 5));
        for &a in m.area_t() {
            assert!((a - 3f64.sqrt()).abs() < 1e-14);
        }
        m.check_invariants().unwrap();
        let interior: Vec<usize> = (0..5).filter(|&e| !m.is_boundary_edge(e)).collect();
        assert_eq!(interior.len(), 1);
        let e = interior[0];
        assert_eq!(m.t0e()[e].minus.0, 0);
        assert!((m.nu_e()[e][0] - 1.0).abs() < 1e-15);
        assert!((m.area_e()[e] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn unit_triangle() {
        let m = generate_grid_data(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        assert_eq!(m.area_t(), &[0.5]);
        assert_eq!(m.num_e(), 3);
        assert!((0..3).all(|e| m.is_boundary_edge(e)));
        let nu = m.nu_e0t()[0][0];
        let s = 0.5f64.sqrt();
        assert!((nu[0] - s).abs() < 1e-15 && (nu[1] - s).abs() < 1e-15);
        m.check_invariants().unwrap();
    }

    #[test]
    fn rejects_bad_triangles() {
        let c = vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]];
        match generate_grid_data(c.clone(), vec![[0, 1, 2]]) {
            Err(MeshError::Orientation { triangle: 0, .. }) => {}
            other => panic!("expected orientation error, got {other:?}"),
        }
        assert!(matches!(
            generate_grid_data(c.clone(), vec![[0, 1, 3]]),
            Err(MeshError::VertexIndex { vertex: 3, .. })
        ));
        assert!(matches!(
            generate_grid_data(c.clone(), vec![[0, 1, 1]]),
            Err(MeshError::DuplicateVertex { .. })
        ));
        let flat = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 1.0]];
        assert!(matches!(
            generate_grid_data(flat, vec![[0, 1, 3], [0, 1, 2]]),
            Err(MeshError::Orientation { triangle: 1, .. })
        ));
    }

    #[test]
    fn square_counts() {
        let m = domain_square(1.0).unwrap();
        assert_eq!((m.num_t(), m.num_v()), (2, 4));
        let m = domain_square(0.5).unwrap();
        assert_eq!((m.num_t(), m.num_v()), (8, 9));
        assert_eq!(domain_square(0.4).unwrap().num_t(), 18);
        assert_eq!(domain_square(1.0 / 3.0).unwrap().num_t(), 18);
        assert!(domain_square(0.0).is_err());
        m.check_invariants().unwrap();
        assert_eq!(m.boundary_ids(), vec![1, 2, 3, 4]);
        for e in 0..m.num_e() {
            let [x, y] = m.bary_e()[e];
            let expect = match m.id_e()[e] {
                0 => !m.is_boundary_edge(e),
                1 => y == 0.0,
                2 => x == 1.0,
                3 => y == 1.0,
                4 => x == 0.0,
                _ => false,
            };
            assert!(expect, "edge {e} at ({x}, {y}) has ID {}", m.id_e()[e]);
        }
    }

    #[test]
    fn refinement_quadruples_and_inherits_ids() {
        let m = two_triangles();
        let f = refine_uniform(&m);
        assert_eq!(f.num_t(), 8);
        let total: f64 = f.area_t().iter().sum();
        assert!((total - 2.0 * 3f64.sqrt()).abs() < 1e-14);
        f.check_invariants().unwrap();
        for k in 0..m.num_t() {
            let child: f64 = f.area_t()[4 * k..4 * k + 4].iter().sum();
            assert!((child - m.area_t()[k]).abs() < 1e-14);
        }
        let mut sq = domain_square(1.0 / 3.0).unwrap();
        for j in 1..=3 {
            sq = refine_uniform(&sq);
            assert_eq!(sq.num_t(), 18 * 4usize.pow(j));
            sq.check_invariants().unwrap();
            assert!((sq.area_t().iter().sum::<f64>() - 1.0).abs() < 1e-13);
        }
        assert_eq!(sq.untagged_boundary_edges(), 0);
        for e in 0..sq.num_e() {
            if sq.id_e()[e] == 3 {
                assert!((sq.bary_e()[e][1] - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn construction_is_deterministic() {
        let a = domain_square(0.25).unwrap();
        let b = domain_square(0.25).unwrap();
        assert_eq!(a.e0t(), b.e0t());
        assert_eq!(a.v0e(), b.v0e());
        assert_eq!(a.nu_e(), b.nu_e());
    }
}
