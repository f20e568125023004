//! Brute-force reference assembly: every operator entry is integrated in
//! physical space with its own high-order Gauss rules, per triangle and per
//! edge, without reference tensors or sparse storage.

#![allow(dead_code)]

use std::collections::HashMap;

use ldg_core::basis::{grad_phi_value, phi_value};
use ldg_core::mesh::Mesh;

const GAUSS_POINTS: usize = 12;

/// Gauss–Legendre nodes and weights on (0, 1).
fn gauss_01(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out
}

/// Affine map of one triangle with its inverse.
#[derive(Clone, Copy)]
struct Affine {
    a1: [f64; 2],
    b: [[f64; 2]; 2],
    inv: [[f64; 2]; 2],
    det: f64,
}

impl Affine {
    fn new(a: [[f64; 2]; 3]) -> Self {
        let b = [[a[1][0] - a[0][0], a[2][0] - a[0][0]], [a[1][1] - a[0][1], a[2][1] - a[0][1]]];
        let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
        let inv = [[b[1][1] / det, -b[0][1] / det], [-b[1][0] / det, b[0][0] / det]];
        Self { a1: a[0], b, inv, det }
    }

    fn to_ref(self, x: [f64; 2]) -> [f64; 2] {
        let d = [x[0] - self.a1[0], x[1] - self.a1[1]];
        [self.inv[0][0] * d[0] + self.inv[0][1] * d[1], self.inv[1][0] * d[0] + self.inv[1][1] * d[1]]
    }

    fn to_phys(self, s: [f64; 2]) -> [f64; 2] {
        [
            self.a1[0] + self.b[0][0] * s[0] + self.b[0][1] * s[1],
            self.a1[1] + self.b[1][0] * s[0] + self.b[1][1] * s[1],
        ]
    }

    fn phi(&self, i: usize, x: [f64; 2]) -> f64 {
        let s = self.to_ref(x);
        phi_value(i, s[0], s[1])
    }

    /// Physical gradient component m: Σ_r (B⁻¹)_{rm} ∂_r φ̂.
    fn dphi(&self, i: usize, m: usize, x: [f64; 2]) -> f64 {
        let s = self.to_ref(x);
        (0..2).map(|r| self.inv[r][m] * grad_phi_value(i, r, s[0], s[1])).sum()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EdgeKind {
    Interior,
    Dirichlet,
    Neumann,
    Other,
}

/// One local edge of a triangle as seen from that triangle.
struct LocalEdge {
    k: usize,
    neighbour: Option<usize>,
    p0: [f64; 2],
    p1: [f64; 2],
    len: f64,
    normal: [f64; 2],
    kind: EdgeKind,
}

pub struct Oracle<'a> {
    mesh: &'a Mesh,
    n: usize,
    maps: Vec<Affine>,
    edges: Vec<LocalEdge>,
    tri_rule: Vec<([f64; 2], f64)>,
    line_rule: Vec<(f64, f64)>,
}

pub type Dense = Vec<Vec<f64>>;

fn zeros(r: usize, c: usize) -> Dense {
    vec![vec![0.0; c]; r]
}

impl<'a> Oracle<'a> {
    /// `dirichlet` and `neumann` list boundary IDs.
    pub fn new(mesh: &'a Mesh, n: usize, dirichlet: &[i32], neumann: &[i32]) -> Self {
        let coords = mesh.coord_v();
        let maps: Vec<Affine> = mesh.v0t().iter().map(|t| Affine::new(t.map(|v| coords[v]))).collect();
        let mut owner: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (k, t) in mesh.v0t().iter().enumerate() {
            for j in 0..3 {
                let (a, b) = (t[(j + 1) % 3], t[(j + 2) % 3]);
                owner.entry((a.min(b), a.max(b))).or_default().push(k);
            }
        }
        let mut edges = Vec::new();
        for (k, t) in mesh.v0t().iter().enumerate() {
            for j in 0..3 {
                let (a, b) = (t[(j + 1) % 3], t[(j + 2) % 3]);
                let neighbour = owner[&(a.min(b), a.max(b))].iter().copied().find(|&o| o != k);
                let (p0, p1) = (coords[a], coords[b]);
                let len = ((p1[0] - p0[0]).powi(2) + (p1[1] - p0[1]).powi(2)).sqrt();
                // counter-clockwise triangles: outward normal is the tangent turned clockwise
                let normal = [(p1[1] - p0[1]) / len, -(p1[0] - p0[0]) / len];
                let id = mesh.id_e0t()[k][j];
                let kind = match neighbour {
                    Some(_) => EdgeKind::Interior,
                    None if dirichlet.contains(&id) => EdgeKind::Dirichlet,
                    None if neumann.contains(&id) => EdgeKind::Neumann,
                    None => EdgeKind::Other,
                };
                edges.push(LocalEdge { k, neighbour, p0, p1, len, normal, kind });
            }
        }
        let g = gauss_01(GAUSS_POINTS);
        let mut tri_rule = Vec::new();
        for &(u, wu) in &g {
            for &(v, wv) in &g {
                tri_rule.push(([u, v * (1.0 - u)], wu * wv * (1.0 - u)));
            }
        }
        Self { mesh, n, maps, edges, tri_rule, line_rule: g }
    }

    fn size(&self) -> usize {
        self.mesh.num_t() * self.n
    }

    /// ∫_{T_k} g(x) dx.
    fn integrate_tri(&self, k: usize, mut g: impl FnMut([f64; 2]) -> f64) -> f64 {
        let map = &self.maps[k];
        self.tri_rule.iter().map(|&(s, w)| w * g(map.to_phys(s))).sum::<f64>() * map.det.abs()
    }

    /// ∫_E g(x) ds.
    fn integrate_edge(&self, e: &LocalEdge, mut g: impl FnMut([f64; 2]) -> f64) -> f64 {
        self.line_rule
            .iter()
            .map(|&(s, w)| {
                let x = [e.p0[0] + s * (e.p1[0] - e.p0[0]), e.p0[1] + s * (e.p1[1] - e.p0[1])];
                w * g(x)
            })
            .sum::<f64>()
            * e.len
    }

    /// Discrete field with row-major coefficients `dof` evaluated on T_k.
    fn field(&self, dof: &[f64], k: usize, x: [f64; 2]) -> f64 {
        (0..self.n).map(|l| dof[k * self.n + l] * self.maps[k].phi(l, x)).sum()
    }

    pub fn mass(&self) -> Dense {
        let n = self.n;
        let mut out = zeros(self.size(), self.size());
        for k in 0..self.mesh.num_t() {
            let map = self.maps[k];
            for i in 0..n {
                for j in 0..n {
                    out[k * n + i][k * n + j] = self.integrate_tri(k, |x| map.phi(i, x) * map.phi(j, x));
                }
            }
        }
        out
    }

    /// H^m: ∫ ∂_m φ_ki φ_kj.
    pub fn h(&self, m: usize) -> Dense {
        let n = self.n;
        let mut out = zeros(self.size(), self.size());
        for k in 0..self.mesh.num_t() {
            let map = self.maps[k];
            for i in 0..n {
                for j in 0..n {
                    out[k * n + i][k * n + j] = self.integrate_tri(k, |x| map.dphi(i, m, x) * map.phi(j, x));
                }
            }
        }
        out
    }

    /// G^m: ∫ ∂_m φ_ki d_h φ_kj.
    pub fn g(&self, m: usize, d: &[f64]) -> Dense {
        let n = self.n;
        let mut out = zeros(self.size(), self.size());
        for k in 0..self.mesh.num_t() {
            let map = self.maps[k];
            for i in 0..n {
                for j in 0..n {
                    out[k * n + i][k * n + j] =
                        self.integrate_tri(k, |x| map.dphi(i, m, x) * self.field(d, k, x) * map.phi(j, x));
                }
            }
        }
        out
    }

    /// Adds ∫_E w(x) φ_ki φ_{k'j} into row block k, column block k'.
    fn edge_block(&self, out: &mut Dense, e: &LocalEdge, col: usize, w: impl Fn([f64; 2]) -> f64) {
        let n = self.n;
        let (mi, mj) = (self.maps[e.k], self.maps[col]);
        for i in 0..n {
            for j in 0..n {
                out[e.k * n + i][col * n + j] += self.integrate_edge(e, |x| w(x) * mi.phi(i, x) * mj.phi(j, x));
            }
        }
    }

    /// Q^m: ½ ∫_E ν^m φ_ki (φ_kj + φ_k'j) on interior edges.
    pub fn q(&self, m: usize) -> Dense {
        let mut out = zeros(self.size(), self.size());
        for e in self.edges.iter().filter(|e| e.kind == EdgeKind::Interior) {
            let nu = e.normal[m];
            self.edge_block(&mut out, e, e.k, |_| 0.5 * nu);
            self.edge_block(&mut out, e, e.neighbour.unwrap(), |_| 0.5 * nu);
        }
        out
    }

    /// Q_N^m: ∫_E ν^m φ_ki φ_kj on Neumann edges.
    pub fn q_n(&self, m: usize) -> Dense {
        let mut out = zeros(self.size(), self.size());
        for e in self.edges.iter().filter(|e| e.kind == EdgeKind::Neumann) {
            let nu = e.normal[m];
            self.edge_block(&mut out, e, e.k, |_| nu);
        }
        out
    }

    /// S: |E|⁻¹ ∫_E φ_ki (φ_kj − φ_k'j) on interior edges.
    pub fn s(&self) -> Dense {
        let mut out = zeros(self.size(), self.size());
        for e in self.edges.iter().filter(|e| e.kind == EdgeKind::Interior) {
            let inv = 1.0 / e.len;
            self.edge_block(&mut out, e, e.k, |_| inv);
            self.edge_block(&mut out, e, e.neighbour.unwrap(), |_| -inv);
        }
        out
    }

    /// S_D: |E|⁻¹ ∫_E φ_ki φ_kj on Dirichlet edges.
    pub fn s_d(&self) -> Dense {
        let mut out = zeros(self.size(), self.size());
        for e in self.edges.iter().filter(|e| e.kind == EdgeKind::Dirichlet) {
            let inv = 1.0 / e.len;
            self.edge_block(&mut out, e, e.k, |_| inv);
        }
        out
    }

    /// R^m: ½ ∫_E ν^m φ_ki (d_h|_k φ_kj + d_h|_k' φ_k'j) on interior edges.
    pub fn r(&self, m: usize, d: &[f64]) -> Dense {
        let mut out = zeros(self.size(), self.size());
        for e in self.edges.iter().filter(|e| e.kind == EdgeKind::Interior) {
            let nu = e.normal[m];
            let nb = e.neighbour.unwrap();
            self.edge_block(&mut out, e, e.k, |x| 0.5 * nu * self.field(d, e.k, x));
            self.edge_block(&mut out, e, nb, |x| 0.5 * nu * self.field(d, nb, x));
        }
        out
    }

    /// R_D^m: ∫_E ν^m φ_ki d_h φ_kj on Dirichlet edges.
    pub fn r_d(&self, m: usize, d: &[f64]) -> Dense {
        let mut out = zeros(self.size(), self.size());
        for e in self.edges.iter().filter(|e| e.kind == EdgeKind::Dirichlet) {
            let nu = e.normal[m];
            self.edge_block(&mut out, e, e.k, |x| nu * self.field(d, e.k, x));
        }
        out
    }

    fn edge_vector(&self, kind: EdgeKind, w: impl Fn(&LocalEdge, [f64; 2]) -> f64) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; self.size()];
        for e in self.edges.iter().filter(|e| e.kind == kind) {
            let map = self.maps[e.k];
            for i in 0..n {
                out[e.k * n + i] += self.integrate_edge(e, |x| w(e, x) * map.phi(i, x));
            }
        }
        out
    }

    /// J_D^m: ∫_E φ_ki c_D ν^m on Dirichlet edges.
    pub fn j_d(&self, m: usize, c_d: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.edge_vector(EdgeKind::Dirichlet, |e, x| c_d(x) * e.normal[m])
    }

    /// K_D: |E|⁻¹ ∫_E φ_ki c_D on Dirichlet edges.
    pub fn k_d(&self, c_d: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.edge_vector(EdgeKind::Dirichlet, |e, x| c_d(x) / e.len)
    }

    /// K_N: ∫_E φ_ki d_h g_N on Neumann edges.
    pub fn k_n(&self, d: &[f64], g_n: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.edge_vector(EdgeKind::Neumann, |e, x| self.field(d, e.k, x) * g_n(x))
    }

    /// L: ∫ φ_ki f_h.
    pub fn l(&self, f: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; self.size()];
        for k in 0..self.mesh.num_t() {
            let map = self.maps[k];
            for i in 0..n {
                out[k * n + i] = self.integrate_tri(k, |x| map.phi(i, x) * self.field(f, k, x));
            }
        }
        out
    }
}

pub fn max_abs_diff_dense(a: &Dense, b: &Dense) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

pub fn max_abs_diff_vec(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Deterministic pseudo-random coefficients in [-1, 1].
pub fn coefficients(len: usize, seed: u64) -> Vec<f64> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..len)
        .map(|_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
        .collect()
}

/// The two-triangle mesh with vertices (0,−1), (√3,0), (0,1), (−√3,0) and
/// boundary ID 1 below the x1-axis and 2 above it.
pub fn two_triangle_mesh() -> Mesh {
    let s = 3f64.sqrt();
    let mut mesh = ldg_core::mesh::generate_grid_data(
        vec![[0.0, -1.0], [s, 0.0], [0.0, 1.0], [-s, 0.0]],
        vec![[3, 0, 2], [0, 1, 2]],
    )
    .unwrap();
    let ids = (0..mesh.num_e())
        .map(|e| match (mesh.is_boundary_edge(e), mesh.bary_e()[e][1] < 0.0) {
            (false, _) => 0,
            (true, true) => 1,
            (true, false) => 2,
        })
        .collect();
    mesh.set_boundary_ids(ids);
    mesh
}

/// Compares every library operator with the oracle; returns the largest
/// difference per operator name.
pub fn compare_all(mesh: &Mesh, n: usize, dirichlet: &[i32], neumann: &[i32]) -> Vec<(String, f64)> {
    use ldg_core::assembly::*;
    use ldg_core::quadrature::build_basis_cache;
    use ldg_core::reftensors::RefTensors;

    let p = ldg_core::basis::PolynomialOrder::from_n_local(n).unwrap().p();
    let oracle = Oracle::new(mesh, n, dirichlet, neumann);
    let refs = RefTensors::new(n).unwrap();
    let cache = build_basis_cache(n).unwrap();
    let edge_tables = cache.get(2 * p + 1);
    let k = mesh.num_t();
    let d_vals = coefficients(k * n, 7);
    let f_vals = coefficients(k * n, 11);
    let d = DofMatrix::from_vec(k, n, d_vals.clone());
    let f = DofMatrix::from_vec(k, n, f_vals.clone());
    let interior = EdgeSelector::interior(mesh);
    let dsel = EdgeSelector::boundary(mesh, dirichlet);
    let nsel = EdgeSelector::boundary(mesh, neumann);
    // polynomial data the edge rule of order 2p+1 integrates exactly
    let quad = if p >= 1 { 1.0 } else { 0.0 };
    let c_d = move |t: f64, x: f64, y: f64| (1.0 + t) * (1.0 + 2.0 * x - y) + quad * x * y;
    let g_n = |t: f64, x: f64, y: f64| 0.5 - x + 3.0 * y + t;
    let t = 0.25;

    let mut out = Vec::new();
    let mut push = |name: &str, v: f64| out.push((name.to_string(), v));
    push("M", max_abs_diff_dense(&assemble_mass(mesh, &refs).to_dense(), &oracle.mass()));
    let h = assemble_dphi_phi(mesh, &refs);
    let g = assemble_dphi_phi_coeff(mesh, &refs, &d).unwrap();
    let (s, sd) = assemble_edge_jump(mesh, &interior, &dsel, &refs).unwrap();
    push("S", max_abs_diff_dense(&s.to_dense(), &oracle.s()));
    push("S_D", max_abs_diff_dense(&sd.to_dense(), &oracle.s_d()));
    let [jd1, jd2] = assemble_vec_dirichlet_nu(mesh, &dsel, &c_d, t, edge_tables, n).unwrap();
    let jd = [jd1, jd2];
    for m in 0..2 {
        push(&format!("H{}", m + 1), max_abs_diff_dense(&h[m].to_dense(), &oracle.h(m)));
        push(&format!("G{}", m + 1), max_abs_diff_dense(&g[m].to_dense(), &oracle.g(m, &d_vals)));
        let (q, qn) = assemble_edge_avg_nu(mesh, m, &interior, &nsel, &refs).unwrap();
        push(&format!("Q{}", m + 1), max_abs_diff_dense(&q.to_dense(), &oracle.q(m)));
        push(&format!("Q_N{}", m + 1), max_abs_diff_dense(&qn.to_dense(), &oracle.q_n(m)));
        let (r, rd) = assemble_edge_avg_coeff_nu(mesh, m, &d, &interior, &dsel, &refs).unwrap();
        push(&format!("R{}", m + 1), max_abs_diff_dense(&r.to_dense(), &oracle.r(m, &d_vals)));
        push(&format!("R_D{}", m + 1), max_abs_diff_dense(&rd.to_dense(), &oracle.r_d(m, &d_vals)));
        let exact = oracle.j_d(m, |x| c_d(t, x[0], x[1]));
        push(&format!("J_D{}", m + 1), max_abs_diff_vec(&jd[m], &exact));
    }
    let kd = assemble_vec_dirichlet(mesh, &dsel, &c_d, t, edge_tables, n).unwrap();
    push("K_D", max_abs_diff_vec(&kd, &oracle.k_d(|x| c_d(t, x[0], x[1]))));
    let kn = assemble_vec_neumann(mesh, &nsel, &d, &g_n, t, edge_tables).unwrap();
    push("K_N", max_abs_diff_vec(&kn, &oracle.k_n(&d_vals, |x| g_n(t, x[0], x[1]))));
    let l = assemble_vec_source(&assemble_mass(mesh, &refs), &f).unwrap();
    push("L", max_abs_diff_vec(&l, &oracle.l(&f_vals)));
    out
}
