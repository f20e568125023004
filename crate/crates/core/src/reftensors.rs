//! Integrals of basis-function products on the reference triangle and its
//! edges. Each accessor returns a row-major N×N block indexed (i, j), where
//! i is the test function.

use crate::basis::PolynomialOrder;
use crate::quadrature::{quad_rule_1d, quad_rule_2d, BasisQuadCache, QuadratureError};

/// Quadrature orders (triangle, edge) that integrate every tensor exactly:
/// the triple products reach degree 3p - 1 on triangles and 3p on edges.
pub fn exact_orders(order: PolynomialOrder) -> (usize, usize) {
    let p = order.p();
    (
        (3 * p).saturating_sub(1).max(2 * p).max(1),
        (3 * p).max(2 * p + 1),
    )
}

/// All reference tensors for one local dimension N.
#[derive(Debug, Clone)]
pub struct RefTensors {
    n: usize,
    m_hat: Vec<f64>,
    h_hat: Vec<f64>,
    g_hat: Vec<f64>,
    s_diag: Vec<f64>,
    s_offdiag: Vec<f64>,
    r_diag: Vec<f64>,
    r_offdiag: Vec<f64>,
}

impl RefTensors {
    /// Computes all tensors with the exact orders of [`exact_orders`].
    pub fn new(n_local: usize) -> Result<Self, QuadratureError> {
        let order = PolynomialOrder::from_n_local(n_local)?;
        let (q2, q1) = exact_orders(order);
        Self::with_orders(n_local, q2, q1)
    }

    /// Computes all tensors with the given triangle and edge orders.
    pub fn with_orders(n_local: usize, q2: usize, q1: usize) -> Result<Self, QuadratureError> {
        let order = PolynomialOrder::from_n_local(n_local)?;
        let cache = BasisQuadCache::with_orders(order, &[q2, q1])?;
        let t2 = cache.get(q2);
        let t1 = cache.get(q1);
        let n = n_local;
        let nn = n * n;
        let w2 = &t2.rule_2d.weights;
        let w1 = &t1.rule_1d.weights;

        let mut m_hat = vec![0.0; nn];
        let mut h_hat = vec![0.0; 2 * nn];
        let mut g_hat = vec![0.0; 2 * n * nn];
        for (r, &w) in w2.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    let pj = t2.phi(r, j);
                    m_hat[i * n + j] += w * t2.phi(r, i) * pj;
                    for m in 0..2 {
                        let dpi = t2.grad_phi(r, i, m);
                        h_hat[(m * n + i) * n + j] += w * dpi * pj;
                        for l in 0..n {
                            g_hat[((m * n + l) * n + i) * n + j] += w * dpi * pj * t2.phi(r, l);
                        }
                    }
                }
            }
        }

        let mut s_diag = vec![0.0; 3 * nn];
        let mut s_offdiag = vec![0.0; 9 * nn];
        let mut r_diag = vec![0.0; 3 * n * nn];
        let mut r_offdiag = vec![0.0; 9 * n * nn];
        for nm in 0..3 {
            for (r, &w) in w1.iter().enumerate() {
                for i in 0..n {
                    let pi = t1.phi_edge(nm, r, i);
                    for j in 0..n {
                        let pj = t1.phi_edge(nm, r, j);
                        s_diag[(nm * n + i) * n + j] += w * pi * pj;
                        for l in 0..n {
                            r_diag[((nm * n + l) * n + i) * n + j] += w * pi * pj * t1.phi_edge(nm, r, l);
                        }
                        for np in 0..3 {
                            let pj = t1.phi_theta(nm, np, r, j);
                            let base = nm * 3 + np;
                            s_offdiag[(base * n + i) * n + j] += w * pi * pj;
                            for l in 0..n {
                                r_offdiag[((base * n + l) * n + i) * n + j] +=
                                    w * pi * pj * t1.phi_theta(nm, np, r, l);
                            }
                        }
                    }
                }
            }
        }
        Ok(Self {
            n,
            m_hat,
            h_hat,
            g_hat,
            s_diag,
            s_offdiag,
            r_diag,
            r_offdiag,
        })
    }

    pub fn n_local(&self) -> usize {
        self.n
    }

    /// ∫ φ̂_i φ̂_j.
    pub fn m_hat(&self) -> &[f64] {
        &self.m_hat
    }

    /// ∫ ∂_m φ̂_i φ̂_j.
    pub fn h_hat(&self, m: usize) -> &[f64] {
        let nn = self.n * self.n;
        &self.h_hat[m * nn..(m + 1) * nn]
    }

    /// ∫ ∂_m φ̂_i φ̂_l φ̂_j.
    pub fn g_hat(&self, l: usize, m: usize) -> &[f64] {
        let nn = self.n * self.n;
        let o = (m * self.n + l) * nn;
        &self.g_hat[o..o + nn]
    }

    /// ∫₀¹ φ̂_i∘γ̂_n φ̂_j∘γ̂_n.
    pub fn s_diag(&self, n: usize) -> &[f64] {
        let nn = self.n * self.n;
        &self.s_diag[n * nn..(n + 1) * nn]
    }

    /// ∫₀¹ φ̂_i∘γ̂_{n⁻} φ̂_j∘θ̂_{n⁻n⁺}∘γ̂_{n⁻}.
    pub fn s_offdiag(&self, n_minus: usize, n_plus: usize) -> &[f64] {
        let nn = self.n * self.n;
        let o = (n_minus * 3 + n_plus) * nn;
        &self.s_offdiag[o..o + nn]
    }

    /// ∫₀¹ φ̂_i φ̂_l φ̂_j along γ̂_n.
    pub fn r_diag(&self, l: usize, n: usize) -> &[f64] {
        let nn = self.n * self.n;
        let o = (n * self.n + l) * nn;
        &self.r_diag[o..o + nn]
    }

    /// ∫₀¹ φ̂_i∘γ̂_{n⁻} φ̂_l∘θ̂∘γ̂_{n⁻} φ̂_j∘θ̂∘γ̂_{n⁻}.
    pub fn r_offdiag(&self, l: usize, n_minus: usize, n_plus: usize) -> &[f64] {
        let nn = self.n * self.n;
        let o = ((n_minus * 3 + n_plus) * self.n + l) * nn;
        &self.r_offdiag[o..o + nn]
    }

    /// Largest absolute entry over all tensors.
    pub fn max_abs(&self) -> f64 {
        [&self.m_hat, &self.h_hat, &self.g_hat, &self.s_diag, &self.s_offdiag, &self.r_diag, &self.r_offdiag]
            .iter()
            .flat_map(|t| t.iter().map(|v| v.abs()))
            .fold(0.0, f64::max)
    }

    /// Largest absolute entrywise difference over all tensors.
    pub fn max_abs_diff(&self, other: &RefTensors) -> f64 {
        let pairs = [
            (&self.m_hat, &other.m_hat),
            (&self.h_hat, &other.h_hat),
            (&self.g_hat, &other.g_hat),
            (&self.s_diag, &other.s_diag),
            (&self.s_offdiag, &other.s_offdiag),
            (&self.r_diag, &other.r_diag),
            (&self.r_offdiag, &other.r_offdiag),
        ];
        pairs
            .iter()
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// M̂ alone.
pub fn integrate_ref_elem_phi_phi(n_local: usize) -> Result<Vec<f64>, QuadratureError> {
    let order = PolynomialOrder::from_n_local(n_local)?;
    let rule = quad_rule_2d((2 * order.p()).max(1));
    let n = n_local;
    let mut m = vec![0.0; n * n];
    for (x, &w) in rule.points.iter().zip(&rule.weights) {
        let v: Vec<f64> = (0..n).map(|i| crate::basis::phi_value(i, x[0], x[1])).collect();
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] += w * v[i] * v[j];
            }
        }
    }
    Ok(m)
}

/// S^diag computed directly from the edge rule of order 2p + 1.
pub fn integrate_ref_edge_phi_int_phi_int(n_local: usize) -> Result<Vec<f64>, QuadratureError> {
    let order = PolynomialOrder::from_n_local(n_local)?;
    let rule = quad_rule_1d(2 * order.p() + 1)?;
    let n = n_local;
    let mut s = vec![0.0; 3 * n * n];
    for e in 0..3 {
        for (&t, &w) in rule.points.iter().zip(&rule.weights) {
            let x = crate::quadrature::gamma_map(e, t)?;
            let v: Vec<f64> = (0..n).map(|i| crate::basis::phi_value(i, x[0], x[1])).collect();
            for i in 0..n {
                for j in 0..n {
                    s[(e * n + i) * n + j] += w * v[i] * v[j];
                }
            }
        }
    }
    Ok(s)
}
