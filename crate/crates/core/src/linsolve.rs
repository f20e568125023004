//! Sparse direct solver for block-structured systems.
//!
//! Unknowns are grouped (one group per triangle) and ordered by geometric
//! nested dissection of the group graph. The factorization is multifrontal:
//! each front is a dense matrix whose pivot block is factored by LU with
//! partial pivoting, and whose Schur complement is passed to its parent.

use faer::linalg::matmul::matmul;
use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Accum, Mat, Par};
use thiserror::Error;

use crate::assembly::SparseOperator;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("matrix is {0}x{1}, expected a square matrix")]
    NotSquare(usize, usize),
    #[error("grouping covers {0} unknowns, matrix has {1}")]
    Layout(usize, usize),
    #[error("matrix is numerically singular (zero pivot in front of size {front})")]
    Singular { front: usize },
    #[error("relative residual {residual:e} exceeds {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },
}

/// Runs faer's dense kernels on the calling thread. Fronts are small, so
/// threading inside them costs more than it saves; callers that want
/// parallelism should run independent solves concurrently instead.
pub fn use_sequential_kernels() {
    faer::set_global_parallelism(Par::Seq);
}

/// Partition of the unknowns into groups with a representative point each.
#[derive(Debug, Clone)]
pub struct BlockLayout {
    pub groups: Vec<Vec<usize>>,
    pub coords: Vec<[f64; 2]>,
}

impl BlockLayout {
    /// Groups `components` stacked fields of `n_local` coefficients per
    /// triangle, so group k holds every unknown of triangle k.
    pub fn per_triangle(coords: &[[f64; 2]], n_local: usize, components: usize) -> Self {
        let k_count = coords.len();
        let groups = (0..k_count)
            .map(|k| {
                (0..components)
                    .flat_map(|c| (0..n_local).map(move |i| c * k_count * n_local + k * n_local + i))
                    .collect()
            })
            .collect();
        Self { groups, coords: coords.to_vec() }
    }

    fn num_unknowns(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }
}

struct TreeNode {
    own: Vec<usize>,
    children: Vec<usize>,
}

/// Geometric nested dissection of the group graph. Nodes are created in
/// postorder.
struct Dissection<'a> {
    adj: &'a [Vec<usize>],
    coords: &'a [[f64; 2]],
    sizes: &'a [usize],
    stamp: Vec<u32>,
    next_stamp: u32,
    nodes: Vec<TreeNode>,
}

const LEAF_UNKNOWNS: usize = 192;

impl Dissection<'_> {
    fn build(&mut self, mut set: Vec<usize>) -> usize {
        let weight: usize = set.iter().map(|&g| self.sizes[g]).sum();
        if weight <= LEAF_UNKNOWNS || set.len() < 4 {
            set.sort_unstable();
            return self.push(set, Vec::new());
        }
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for &g in &set {
            for m in 0..2 {
                lo[m] = lo[m].min(self.coords[g][m]);
                hi[m] = hi[m].max(self.coords[g][m]);
            }
        }
        let axis = usize::from(hi[1] - lo[1] > hi[0] - lo[0]);
        set.sort_by(|&a, &b| {
            self.coords[a][axis]
                .total_cmp(&self.coords[b][axis])
                .then(a.cmp(&b))
        });
        let right = set.split_off(set.len() / 2);
        self.next_stamp += 1;
        let tag = self.next_stamp;
        for &g in &right {
            self.stamp[g] = tag;
        }
        let (sep, left): (Vec<usize>, Vec<usize>) = set
            .into_iter()
            .partition(|&g| self.adj[g].iter().any(|&h| self.stamp[h] == tag));
        let mut children = Vec::new();
        for part in [left, right] {
            if !part.is_empty() {
                children.push(self.build(part));
            }
        }
        let mut sep = sep;
        sep.sort_unstable();
        self.push(sep, children)
    }

    fn push(&mut self, own: Vec<usize>, children: Vec<usize>) -> usize {
        self.nodes.push(TreeNode { own, children });
        self.nodes.len() - 1
    }
}

struct Front {
    own: Vec<usize>,
    update: Vec<usize>,
    lu: PartialPivLu<f64>,
    f21: Mat<f64>,
    x12: Mat<f64>,
}

/// LU factorization of a sparse matrix.
pub struct MultifrontalLu {
    n: usize,
    fronts: Vec<Front>,
}

impl MultifrontalLu {
    pub fn factor(a: &SparseOperator, layout: &BlockLayout) -> Result<Self, SolveError> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(SolveError::NotSquare(n, a.ncols()));
        }
        if layout.num_unknowns() != n {
            return Err(SolveError::Layout(layout.num_unknowns(), n));
        }
        let ng = layout.groups.len();
        let mut group_of = vec![usize::MAX; n];
        for (g, dofs) in layout.groups.iter().enumerate() {
            for &i in dofs {
                if i >= n || group_of[i] != usize::MAX {
                    return Err(SolveError::Layout(layout.num_unknowns(), n));
                }
                group_of[i] = g;
            }
        }

        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); ng];
        for (g, dofs) in layout.groups.iter().enumerate() {
            for &r in dofs {
                for (c, _) in a.row(r) {
                    let h = group_of[c];
                    if h != g {
                        adj[g].push(h);
                        adj[h].push(g);
                    }
                }
            }
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }

        let sizes: Vec<usize> = layout.groups.iter().map(Vec::len).collect();
        let mut nd = Dissection {
            adj: &adj,
            coords: &layout.coords,
            sizes: &sizes,
            stamp: vec![0; ng],
            next_stamp: 0,
            nodes: Vec::new(),
        };
        // components of the group graph are dissected separately
        let mut roots = Vec::new();
        let mut seen = vec![false; ng];
        for start in 0..ng {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut head = 0;
            while head < comp.len() {
                let g = comp[head];
                head += 1;
                for &h in &adj[g] {
                    if !seen[h] {
                        seen[h] = true;
                        comp.push(h);
                    }
                }
            }
            roots.push(nd.build(comp));
        }
        let nodes = nd.nodes;

        // elimination position of each group and the last position per subtree
        let mut pos = vec![0usize; ng];
        let mut last = vec![0usize; nodes.len()];
        let mut p = 0;
        for (t, node) in nodes.iter().enumerate() {
            for &g in &node.own {
                pos[g] = p;
                p += 1;
            }
            last[t] = p;
        }

        let transpose = a.transpose();
        let mut update_groups: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        let mut pending: Vec<Option<Mat<f64>>> = (0..nodes.len()).map(|_| None).collect();
        let mut loc = vec![usize::MAX; n];
        let mut fronts = Vec::with_capacity(nodes.len());

        for (t, node) in nodes.iter().enumerate() {
            let mut ug: Vec<usize> = Vec::new();
            for &g in &node.own {
                ug.extend(adj[g].iter().copied().filter(|&h| pos[h] >= last[t]));
            }
            for &c in &node.children {
                ug.extend(update_groups[c].iter().copied().filter(|&h| pos[h] >= last[t]));
            }
            ug.sort_unstable_by_key(|&g| pos[g]);
            ug.dedup();

            let own: Vec<usize> = node.own.iter().flat_map(|&g| layout.groups[g].iter().copied()).collect();
            let update: Vec<usize> = ug.iter().flat_map(|&g| layout.groups[g].iter().copied()).collect();
            let (n1, n2) = (own.len(), update.len());
            for (l, &i) in own.iter().chain(&update).enumerate() {
                loc[i] = l;
            }
            let first_own = last[t] - node.own.len();
            let is_own = |i: usize| {
                let q = pos[group_of[i]];
                q >= first_own && q < last[t]
            };

            let mut front = Mat::<f64>::zeros(n1 + n2, n1 + n2);
            for (li, &r) in own.iter().enumerate() {
                for (c, v) in a.row(r) {
                    let lc = loc[c];
                    if lc != usize::MAX {
                        front[(li, lc)] += v;
                    }
                }
                for (rr, v) in transpose.row(r) {
                    let lr = loc[rr];
                    if lr != usize::MAX && !is_own(rr) {
                        front[(lr, li)] += v;
                    }
                }
            }
            for &c in &node.children {
                let upd = pending[c].take().expect("child factored before parent");
                let cidx: Vec<usize> = update_groups[c]
                    .iter()
                    .flat_map(|&g| layout.groups[g].iter().map(|&i| loc[i]))
                    .collect();
                for (j, &lj) in cidx.iter().enumerate() {
                    for (i, &li) in cidx.iter().enumerate() {
                        front[(li, lj)] += upd[(i, j)];
                    }
                }
            }
            for &i in own.iter().chain(&update) {
                loc[i] = usize::MAX;
            }

            let f11 = front.as_ref().submatrix(0, 0, n1, n1);
            let scale = (0..n1)
                .flat_map(|j| (0..n1).map(move |i| (i, j)))
                .fold(0.0f64, |m, (i, j)| m.max(f11[(i, j)].abs()));
            let lu = f11.partial_piv_lu();
            let u = lu.U();
            if (0..n1).any(|i| !(u[(i, i)].abs() > 1e-14 * scale)) {
                return Err(SolveError::Singular { front: n1 });
            }
            let mut x12 = front.as_ref().submatrix(0, n1, n1, n2).to_owned();
            lu.solve_in_place(x12.as_mut());
            let f21 = front.as_ref().submatrix(n1, 0, n2, n1).to_owned();
            if n2 > 0 {
                let mut f22 = front.as_ref().submatrix(n1, n1, n2, n2).to_owned();
                matmul(f22.as_mut(), Accum::Add, f21.as_ref(), x12.as_ref(), -1.0, Par::Seq);
                pending[t] = Some(f22);
            }
            update_groups[t] = ug;
            fronts.push(Front { own, update, lu, f21, x12 });
        }
        debug_assert!(roots.iter().all(|&r| update_groups[r].is_empty()));
        Ok(Self { n, fronts })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves A x = b with the stored factors.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "right-hand side length");
        let mut x = b.to_vec();
        for f in &self.fronts {
            let mut w = Mat::<f64>::from_fn(f.own.len(), 1, |i, _| x[f.own[i]]);
            f.lu.solve_in_place(w.as_mut());
            for (i, &gi) in f.own.iter().enumerate() {
                x[gi] = w[(i, 0)];
            }
            for (r, &gr) in f.update.iter().enumerate() {
                let s: f64 = (0..f.own.len()).map(|i| f.f21[(r, i)] * w[(i, 0)]).sum();
                x[gr] -= s;
            }
        }
        for f in self.fronts.iter().rev() {
            let xu: Vec<f64> = f.update.iter().map(|&i| x[i]).collect();
            for (i, &gi) in f.own.iter().enumerate() {
                let s: f64 = xu.iter().enumerate().map(|(j, v)| f.x12[(i, j)] * v).sum();
                x[gi] -= s;
            }
        }
        x
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// ‖A x − b‖₂ / max(‖b‖₂, 1).
pub fn relative_residual(a: &SparseOperator, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r: Vec<f64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
    norm2(&r) / norm2(b).max(1.0)
}

/// Solves with the factors and applies iterative refinement against `a`
/// until the relative residual drops below `tolerance`.
pub fn solve_refined(
    a: &SparseOperator,
    lu: &MultifrontalLu,
    b: &[f64],
    tolerance: f64,
) -> Result<(Vec<f64>, f64), SolveError> {
    let mut x = lu.solve(b);
    let scale = norm2(b).max(1.0);
    let mut residual = f64::INFINITY;
    for _ in 0..5 {
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        residual = norm2(&r) / scale;
        if !residual.is_finite() || residual <= 1e-3 * tolerance {
            break;
        }
        let dx = lu.solve(&r);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
    }
    if !(residual <= tolerance) {
        return Err(SolveError::Residual { residual, tolerance });
    }
    Ok((x, residual))
}
