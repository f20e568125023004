//! The 3KN block system, implicit Euler stepping and stationary solves.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::assembly::{
    assemble_dphi_phi, assemble_dphi_phi_coeff, assemble_edge_avg_coeff_nu, assemble_edge_avg_nu,
    assemble_edge_jump, assemble_mass, assemble_vec_dirichlet, assemble_vec_dirichlet_nu,
    assemble_vec_neumann, assemble_vec_source, AssemblyError, DofMatrix, EdgeSelector,
    SparseOperator,
};
use crate::basis::PolynomialOrder;
use crate::fields::{project, ContinuousFunction, FieldError};
use crate::linsolve::{solve_refined, BlockLayout, MultifrontalLu, SolveError};
use crate::mesh::Mesh;
use crate::quadrature::{build_basis_cache, BasisQuadCache, QuadratureError};
use crate::reftensors::RefTensors;

/// Relative residual every linear solve must reach.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("boundary ID {0} present in the mesh has no boundary condition")]
    UnmappedBoundary(i32),
    #[error("invalid problem parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Sparse(#[from] crate::assembly::SparseError),
    #[error("linear solve failed (eta = {eta}, p = {p}): {source}")]
    Solve {
        source: SolveError,
        eta: f64,
        p: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
}

/// Coefficients, boundary data and time interval of a diffusion problem.
#[derive(Clone)]
pub struct ProblemSpec {
    pub d: Arc<dyn ContinuousFunction>,
    pub f: Arc<dyn ContinuousFunction>,
    pub c_d: Arc<dyn ContinuousFunction>,
    pub g_n: Arc<dyn ContinuousFunction>,
    pub c0: Arc<dyn ContinuousFunction>,
    pub eta: f64,
    pub boundary: BTreeMap<i32, BoundaryKind>,
    pub t_end: f64,
    pub num_steps: usize,
    pub stationary: bool,
}

impl ProblemSpec {
    pub fn validate(&self, mesh: &Mesh) -> Result<(), SystemError> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(SystemError::Parameter(format!("eta must be positive (got {})", self.eta)));
        }
        if !self.stationary {
            if !(self.t_end > 0.0 && self.t_end.is_finite()) {
                return Err(SystemError::Parameter(format!("t_end must be positive (got {})", self.t_end)));
            }
            if self.num_steps == 0 {
                return Err(SystemError::Parameter("num_steps must be at least 1".into()));
            }
        }
        for id in mesh.boundary_ids() {
            if !self.boundary.contains_key(&id) {
                return Err(SystemError::UnmappedBoundary(id));
            }
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.num_steps as f64
    }

    fn ids(&self, kind: BoundaryKind) -> Vec<i32> {
        self.boundary
            .iter()
            .filter(|(_, &k)| k == kind)
            .map(|(&id, _)| id)
            .collect()
    }
}

/// Y = [Z¹; Z²; C] at time t.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub y: Vec<f64>,
    pub t: f64,
    num_t: usize,
    n_local: usize,
}

impl SystemState {
    pub fn from_parts(z1: &DofMatrix, z2: &DofMatrix, c: &DofMatrix, t: f64) -> Self {
        let mut y = Vec::with_capacity(3 * c.as_slice().len());
        y.extend_from_slice(z1.as_slice());
        y.extend_from_slice(z2.as_slice());
        y.extend_from_slice(c.as_slice());
        Self { y, t, num_t: c.num_t(), n_local: c.n_local() }
    }

    fn block(&self, b: usize) -> DofMatrix {
        let kn = self.num_t * self.n_local;
        DofMatrix::from_vec(self.num_t, self.n_local, self.y[b * kn..(b + 1) * kn].to_vec())
    }

    pub fn c(&self) -> DofMatrix {
        self.block(2)
    }

    /// Z^m for m ∈ {0, 1}.
    pub fn z(&self, m: usize) -> DofMatrix {
        assert!(m < 2, "flux component {m} out of range");
        self.block(m)
    }
}

/// System matrix A and right-hand side V at one time.
#[derive(Debug, Clone)]
pub struct Blocks {
    pub a: SparseOperator,
    pub v: Vec<f64>,
    pub t: f64,
}

/// Time-independent operators and solver state for one mesh and problem.
pub struct Discretization<'a> {
    mesh: &'a Mesh,
    spec: &'a ProblemSpec,
    refs: &'a RefTensors,
    order: PolynomialOrder,
    cache: BasisQuadCache,
    interior: EdgeSelector,
    dirichlet: EdgeSelector,
    neumann: EdgeSelector,
    mass: SparseOperator,
    z_rows: [SparseOperator; 2],
    penalty: SparseOperator,
    w: SparseOperator,
    layout: BlockLayout,
    factor: Option<(SparseOperator, MultifrontalLu)>,
}

impl<'a> Discretization<'a> {
    pub fn new(mesh: &'a Mesh, spec: &'a ProblemSpec, refs: &'a RefTensors) -> Result<Self, SystemError> {
        spec.validate(mesh)?;
        let n = refs.n_local();
        let order = PolynomialOrder::from_n_local(n).map_err(QuadratureError::from)?;
        let cache = build_basis_cache(n)?;
        let interior = EdgeSelector::interior(mesh);
        let dirichlet = EdgeSelector::boundary(mesh, &spec.ids(BoundaryKind::Dirichlet));
        let neumann = EdgeSelector::boundary(mesh, &spec.ids(BoundaryKind::Neumann));

        let mass = assemble_mass(mesh, refs);
        let h = assemble_dphi_phi(mesh, refs);
        let mut z_rows = Vec::with_capacity(2);
        for (m, h_m) in h.iter().enumerate() {
            let (q, qn) = assemble_edge_avg_nu(mesh, m, &interior, &neumann, refs)?;
            z_rows.push(q.add(&qn)?.sub(h_m)?);
        }
        let z_rows: [SparseOperator; 2] = z_rows.try_into().expect("two components");
        let (s, sd) = assemble_edge_jump(mesh, &interior, &dirichlet, refs)?;
        let penalty = s.add(&sd)?.scaled(spec.eta);
        let kn = mesh.num_t() * n;
        let zero = SparseOperator::zeros(kn, kn);
        let w = SparseOperator::from_blocks(&[
            vec![Some(&zero), None, None],
            vec![None, Some(&zero), None],
            vec![None, None, Some(&mass)],
        ])?;
        let layout = BlockLayout::per_triangle(mesh.bary_t(), n, 3);
        Ok(Self {
            mesh,
            spec,
            refs,
            order,
            cache,
            interior,
            dirichlet,
            neumann,
            mass,
            z_rows,
            penalty,
            w,
            layout,
            factor: None,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        self.mesh
    }

    pub fn order(&self) -> PolynomialOrder {
        self.order
    }

    pub fn mass(&self) -> &SparseOperator {
        &self.mass
    }

    /// L2 projection at the order 2p used for coefficient data.
    pub fn project(&self, func: &dyn ContinuousFunction, t: f64) -> Result<DofMatrix, SystemError> {
        Ok(project(self.mesh, func, t, 2 * self.order.p(), self.refs.m_hat())?)
    }

    /// Initial state: Z = 0 and C the projection of c⁰.
    pub fn initial_state(&self) -> Result<SystemState, SystemError> {
        let c = self.project(self.spec.c0.as_ref(), 0.0)?;
        let zero = DofMatrix::zeros(c.num_t(), c.n_local());
        Ok(SystemState::from_parts(&zero, &zero, &c, 0.0))
    }

    /// Assembles A(t) and V(t).
    pub fn build_blocks(&self, t: f64) -> Result<Blocks, SystemError> {
        let mesh = self.mesh;
        let refs = self.refs;
        let p = self.order.p();
        let n = refs.n_local();
        let edge_tables = self.cache.get(2 * p + 1);
        let d = self.project(self.spec.d.as_ref(), t)?;
        let f = self.project(self.spec.f.as_ref(), t)?;

        let g = assemble_dphi_phi_coeff(mesh, refs, &d)?;
        let mut c_rows = Vec::with_capacity(2);
        for (m, g_m) in g.iter().enumerate() {
            let (r, rd) = assemble_edge_avg_coeff_nu(mesh, m, &d, &self.interior, &self.dirichlet, refs)?;
            c_rows.push(r.add(&rd)?.sub(g_m)?);
        }
        let a = SparseOperator::from_blocks(&[
            vec![Some(&self.mass), None, Some(&self.z_rows[0])],
            vec![None, Some(&self.mass), Some(&self.z_rows[1])],
            vec![Some(&c_rows[0]), Some(&c_rows[1]), Some(&self.penalty)],
        ])?;

        let c_d = self.spec.c_d.as_ref();
        let [jd1, jd2] = assemble_vec_dirichlet_nu(mesh, &self.dirichlet, c_d, t, edge_tables, n)?;
        let kd = assemble_vec_dirichlet(mesh, &self.dirichlet, c_d, t, edge_tables, n)?;
        let kn = assemble_vec_neumann(mesh, &self.neumann, &d, self.spec.g_n.as_ref(), t, edge_tables)?;
        let l = assemble_vec_source(&self.mass, &f)?;
        let mut v = Vec::with_capacity(3 * l.len());
        v.extend(jd1.iter().map(|x| -x));
        v.extend(jd2.iter().map(|x| -x));
        v.extend(
            kd.iter()
                .zip(&kn)
                .zip(&l)
                .map(|((kd, kn), l)| self.spec.eta * kd - kn + l),
        );
        Ok(Blocks { a, v, t })
    }

    /// Solves `matrix · y = rhs`, reusing the last factorization when the
    /// matrix has not changed.
    pub fn solve(&mut self, matrix: SparseOperator, rhs: &[f64]) -> Result<Vec<f64>, SystemError> {
        let err = |source| SystemError::Solve { source, eta: self.spec.eta, p: self.order.p() };
        let reuse = matches!(&self.factor, Some((prev, _)) if *prev == matrix);
        if !reuse {
            let lu = MultifrontalLu::factor(&matrix, &self.layout).map_err(err)?;
            self.factor = Some((matrix, lu));
        }
        let (matrix, lu) = self.factor.as_ref().expect("factorization present");
        let (y, residual) = solve_refined(matrix, lu, rhs, RESIDUAL_TOLERANCE).map_err(err)?;
        log::debug!("linear solve: n = {}, relative residual {residual:.2e}", rhs.len());
        Ok(y)
    }

    /// One implicit Euler step: (W + Δt A) Y⁺ = W Y + Δt V.
    pub fn euler_step(&mut self, state: &SystemState, blocks: &Blocks, dt: f64) -> Result<SystemState, SystemError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SystemError::Parameter(format!("time step must be positive (got {dt})")));
        }
        let matrix = self.w.add_scaled(dt, &blocks.a).map_err(AssemblyError::from)?;
        let wy = self.w.mul_vec(&state.y);
        let rhs: Vec<f64> = wy.iter().zip(&blocks.v).map(|(a, b)| a + dt * b).collect();
        let y = self.solve(matrix, &rhs)?;
        Ok(SystemState { y, t: blocks.t, num_t: state.num_t, n_local: state.n_local })
    }

    /// Solves A Y = V at time t.
    pub fn solve_stationary_at(&mut self, t: f64) -> Result<SystemState, SystemError> {
        let blocks = self.build_blocks(t)?;
        let y = self.solve(blocks.a, &blocks.v)?;
        Ok(SystemState { y, t, num_t: self.mesh.num_t(), n_local: self.refs.n_local() })
    }

    /// Runs all time steps, calling `observe(step, state)` after each one
    /// (steps counted from 1).
    pub fn run<F>(&mut self, mut observe: F) -> Result<SystemState, SystemError>
    where
        F: FnMut(usize, &SystemState) -> Result<(), SystemError>,
    {
        let dt = self.spec.dt();
        let mut state = self.initial_state()?;
        for step in 1..=self.spec.num_steps {
            let blocks = self.build_blocks(step as f64 * dt)?;
            state = self.euler_step(&state, &blocks, dt)?;
            observe(step, &state)?;
        }
        Ok(state)
    }
}

/// Stationary solution (C, Z¹, Z²) with the data evaluated at t = 0.
pub fn solve_stationary(
    mesh: &Mesh,
    spec: &ProblemSpec,
    refs: &RefTensors,
) -> Result<(DofMatrix, DofMatrix, DofMatrix), SystemError> {
    let mut disc = Discretization::new(mesh, spec, refs)?;
    let state = disc.solve_stationary_at(0.0)?;
    Ok((state.c(), state.z(0), state.z(1)))
}

/// Σ_k |T_k| C_k0, proportional to ∫_Ω c_h.
pub fn mass_weighted_sum(mesh: &Mesh, c: &DofMatrix) -> f64 {
    mesh.area_t()
        .iter()
        .enumerate()
        .map(|(k, a)| a * c.row(k)[0])
        .sum()
}
