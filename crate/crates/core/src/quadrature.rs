//! Gauss quadrature on the unit interval and the reference triangle, the
//! reference edge maps, and precomputed basis values at quadrature nodes.
//!
//! Local edges and basis functions are indexed from zero: edge `n` is the
//! edge opposite local vertex `n`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::basis::{self, PolynomialOrder};

/// Highest exactness degree available from [`quad_rule_1d`].
pub const MAX_ORDER_1D: usize = 17;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("no 1D quadrature rule of order {0} (maximum is {MAX_ORDER_1D})")]
    UnsupportedOrder(usize),
    #[error("local edge index {0} is out of range 0..3")]
    EdgeIndex(usize),
    #[error(transparent)]
    Basis(#[from] basis::BasisError),
}

/// Gauss rule on (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule1D {
    /// Polynomial degree integrated exactly.
    pub order: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Rule on the reference triangle (0,0), (1,0), (0,1). Weights sum to 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule2D {
    pub order: usize,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadRule1D {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl QuadRule2D {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre polynomial. Nodes are returned in ascending order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one point");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (
        x.iter().map(|&xi| 0.5 * (xi + 1.0)).collect(),
        w.iter().map(|&wi| 0.5 * wi).collect(),
    )
}

/// Smallest Gauss–Legendre rule on (0, 1) exact for degree `max(q_ord, 1)`.
pub fn quad_rule_1d(q_ord: usize) -> Result<QuadRule1D, QuadratureError> {
    if q_ord > MAX_ORDER_1D {
        return Err(QuadratureError::UnsupportedOrder(q_ord));
    }
    let q = q_ord.max(1);
    let n = q / 2 + 1;
    let (points, weights) = gauss_legendre_unit(n);
    Ok(QuadRule1D {
        order: 2 * n - 1,
        points,
        weights,
    })
}

/// Rule on the reference triangle exact for degree `q_ord`. Orders up to 6
/// use the symmetric tabulated rules; higher orders a collapsed Gauss product.
pub fn quad_rule_2d(q_ord: usize) -> QuadRule2D {
    match q_ord {
        0 | 1 => QuadRule2D {
            order: 1,
            points: vec![[1.0 / 3.0, 1.0 / 3.0]],
            weights: vec![0.5],
        },
        2 => QuadRule2D {
            order: 2,
            points: vec![[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]],
            weights: vec![1.0 / 6.0; 3],
        },
        3 => {
            let (a, b, w1) = (0.666_390_246_014_701_4, 0.178_558_728_263_616_4, 0.159_020_690_871_988_6);
            let (c, d, w2) = (0.280_019_915_499_074_1, 0.075_031_110_222_608_12, 0.090_979_309_128_011_42);
            QuadRule2D {
                order: 3,
                points: vec![[a, b], [b, a], [c, d], [d, c]],
                weights: vec![w1, w1, w2, w2],
            }
        }
        4 => {
            let (a, a2, w1) = (0.445_948_490_915_964_9, 0.108_103_018_168_070_2, 0.111_690_794_839_005_7);
            let (b, b2, w2) = (0.091_576_213_509_770_74, 0.816_847_572_980_458_5, 0.054_975_871_827_660_93);
            QuadRule2D {
                order: 4,
                points: vec![[a, a2], [a2, a], [a, a], [b, b2], [b2, b], [b, b]],
                weights: vec![w1, w1, w1, w2, w2, w2],
            }
        }
        5 => {
            let s15 = 15f64.sqrt();
            let a1 = (6.0 - s15) / 21.0;
            let a2 = (6.0 + s15) / 21.0;
            let w1 = (155.0 - s15) / 2400.0;
            let w2 = (155.0 + s15) / 2400.0;
            QuadRule2D {
                order: 5,
                points: vec![
                    [1.0 / 3.0, 1.0 / 3.0],
                    [a1, 1.0 - 2.0 * a1],
                    [1.0 - 2.0 * a1, a1],
                    [a1, a1],
                    [a2, 1.0 - 2.0 * a2],
                    [1.0 - 2.0 * a2, a2],
                    [a2, a2],
                ],
                weights: vec![9.0 / 80.0, w1, w1, w1, w2, w2, w2],
            }
        }
        6 => {
            let (a, a2, wa) = (0.063_089_014_491_502_23, 0.873_821_971_016_995_5, 0.025_422_453_185_103_41);
            let (b, b2, wb) = (0.249_286_745_170_910_4, 0.501_426_509_658_179_2, 0.058_393_137_863_189_68);
            let (c, d, e, wc) = (
                0.310_352_451_033_784_4,
                0.053_145_049_844_816_95,
                0.636_502_499_121_398_6,
                0.041_425_537_809_186_79,
            );
            QuadRule2D {
                order: 6,
                points: vec![
                    [a, a],
                    [a2, a],
                    [a, a2],
                    [b, b],
                    [b2, b],
                    [b, b2],
                    [c, d],
                    [d, c],
                    [e, d],
                    [d, e],
                    [e, c],
                    [c, e],
                ],
                weights: vec![wa, wa, wa, wb, wb, wb, wc, wc, wc, wc, wc, wc],
            }
        }
        q => collapsed_gauss(q),
    }
}

/// Duffy-type rule: Gauss in (u, v) mapped by (u, v) -> (u, v (1 - u)).
fn collapsed_gauss(q: usize) -> QuadRule2D {
    let nu = (q + 2).div_ceil(2);
    let nv = (q + 1).div_ceil(2);
    let (pu, wu) = gauss_legendre_unit(nu);
    let (pv, wv) = gauss_legendre_unit(nv);
    let mut points = Vec::with_capacity(nu * nv);
    let mut weights = Vec::with_capacity(nu * nv);
    for (&u, &wui) in pu.iter().zip(&wu) {
        for (&v, &wvi) in pv.iter().zip(&wv) {
            points.push([u, v * (1.0 - u)]);
            weights.push(wui * wvi * (1.0 - u));
        }
    }
    QuadRule2D {
        order: (2 * nu - 2).min(2 * nv - 1),
        points,
        weights,
    }
}

/// Parametrization of reference edge `n` over s in [0, 1].
pub fn gamma_map(n: usize, s: f64) -> Result<[f64; 2], QuadratureError> {
    match n {
        0 => Ok([1.0 - s, s]),
        1 => Ok([0.0, 1.0 - s]),
        2 => Ok([s, 0.0]),
        _ => Err(QuadratureError::EdgeIndex(n)),
    }
}

/// Maps a point of reference edge `n_minus` to the point of reference edge
/// `n_plus` that coincides with it in the neighbouring element.
pub fn theta_map(n_minus: usize, n_plus: usize, x: [f64; 2]) -> Result<[f64; 2], QuadratureError> {
    let [x1, x2] = x;
    let y = match (n_minus, n_plus) {
        (0, 0) => [1.0 - x1, 1.0 - x2],
        (0, 1) => [0.0, x2],
        (0, 2) => [x1, 0.0],
        (1, 0) => [1.0 - x2, x2],
        (1, 1) => [0.0, 1.0 - x2],
        (1, 2) => [x2, 0.0],
        (2, 0) => [x1, 1.0 - x1],
        (2, 1) => [0.0, x1],
        (2, 2) => [1.0 - x1, 0.0],
        (a, b) => return Err(QuadratureError::EdgeIndex(a.max(b))),
    };
    Ok(y)
}

/// Basis values at the nodes of one pair of 2D/1D rules.
#[derive(Debug, Clone)]
pub struct OrderTables {
    pub rule_2d: QuadRule2D,
    pub rule_1d: QuadRule1D,
    n_local: usize,
    phi_2d: Vec<f64>,
    grad_2d: Vec<f64>,
    phi_edge: Vec<f64>,
    phi_theta: Vec<f64>,
}

impl OrderTables {
    fn new(n_local: usize, rule_2d: QuadRule2D, rule_1d: QuadRule1D) -> Self {
        let r2 = rule_2d.len();
        let r1 = rule_1d.len();
        let mut phi_2d = vec![0.0; r2 * n_local];
        let mut grad_2d = vec![0.0; r2 * n_local * 2];
        for (r, &[x1, x2]) in rule_2d.points.iter().enumerate() {
            for i in 0..n_local {
                phi_2d[r * n_local + i] = basis::phi_value(i, x1, x2);
                for m in 0..2 {
                    grad_2d[(r * n_local + i) * 2 + m] = basis::grad_phi_value(i, m, x1, x2);
                }
            }
        }
        let mut phi_edge = vec![0.0; 3 * r1 * n_local];
        let mut phi_theta = vec![0.0; 9 * r1 * n_local];
        for n in 0..3 {
            for (r, &s) in rule_1d.points.iter().enumerate() {
                let x = gamma_map(n, s).expect("edge index in range");
                for i in 0..n_local {
                    phi_edge[(n * r1 + r) * n_local + i] = basis::phi_value(i, x[0], x[1]);
                }
                for np in 0..3 {
                    let y = theta_map(n, np, x).expect("edge index in range");
                    for i in 0..n_local {
                        phi_theta[((n * 3 + np) * r1 + r) * n_local + i] =
                            basis::phi_value(i, y[0], y[1]);
                    }
                }
            }
        }
        Self {
            rule_2d,
            rule_1d,
            n_local,
            phi_2d,
            grad_2d,
            phi_edge,
            phi_theta,
        }
    }

    /// φ̂_i at 2D node r.
    #[inline]
    pub fn phi(&self, r: usize, i: usize) -> f64 {
        self.phi_2d[r * self.n_local + i]
    }

    /// ∂φ̂_i/∂x̂_m at 2D node r.
    #[inline]
    pub fn grad_phi(&self, r: usize, i: usize, m: usize) -> f64 {
        self.grad_2d[(r * self.n_local + i) * 2 + m]
    }

    /// φ̂_i ∘ γ̂_n at 1D node r.
    #[inline]
    pub fn phi_edge(&self, n: usize, r: usize, i: usize) -> f64 {
        self.phi_edge[(n * self.rule_1d.len() + r) * self.n_local + i]
    }

    /// φ̂_i ∘ θ̂_{n−n+} ∘ γ̂_{n−} at 1D node r.
    #[inline]
    pub fn phi_theta(&self, n_minus: usize, n_plus: usize, r: usize, i: usize) -> f64 {
        self.phi_theta[((n_minus * 3 + n_plus) * self.rule_1d.len() + r) * self.n_local + i]
    }
}

/// Basis values at quadrature nodes for a set of exactness orders. Order `q`
/// pairs the 2D rule of order `q` with the 1D rule of order `q`.
#[derive(Debug, Clone)]
pub struct BasisQuadCache {
    order: PolynomialOrder,
    tables: BTreeMap<usize, OrderTables>,
}

impl BasisQuadCache {
    pub fn with_orders(order: PolynomialOrder, orders: &[usize]) -> Result<Self, QuadratureError> {
        let mut tables = BTreeMap::new();
        for &q in orders {
            let q = q.max(1);
            if tables.contains_key(&q) {
                continue;
            }
            let rule_1d = quad_rule_1d(q)?;
            tables.insert(q, OrderTables::new(order.n_local(), quad_rule_2d(q), rule_1d));
        }
        Ok(Self { order, tables })
    }

    pub fn order(&self) -> PolynomialOrder {
        self.order
    }

    pub fn n_local(&self) -> usize {
        self.order.n_local()
    }

    /// Tables for exactness `q` (clamped below by 1). Panics if `q` was not
    /// requested at construction; use [`BasisQuadCache::ensure`] first.
    pub fn get(&self, q: usize) -> &OrderTables {
        let q = q.max(1);
        self.tables
            .get(&q)
            .unwrap_or_else(|| panic!("quadrature order {q} not cached"))
    }

    pub fn ensure(&mut self, q: usize) -> Result<&OrderTables, QuadratureError> {
        let q = q.max(1);
        if !self.tables.contains_key(&q) {
            let rule_1d = quad_rule_1d(q)?;
            self.tables
                .insert(q, OrderTables::new(self.n_local(), quad_rule_2d(q), rule_1d));
        }
        Ok(&self.tables[&q])
    }

    pub fn orders(&self) -> impl Iterator<Item = usize> + '_ {
        self.tables.keys().copied()
    }
}

/// Cache holding the orders 2p (triangles) and 2p+1 (edges) used by the
/// right-hand-side assembly, plus the orders that integrate the reference
/// tensors exactly.
pub fn build_basis_cache(n_local: usize) -> Result<BasisQuadCache, QuadratureError> {
    let order = PolynomialOrder::from_n_local(n_local)?;
    let p = order.p();
    let (q2, q1) = crate::reftensors::exact_orders(order);
    BasisQuadCache::with_orders(order, &[(2 * p).max(1), 2 * p + 1, q2, q1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn one_d_rules_match_tabulated_gauss_points() {
        let r = quad_rule_1d(2).unwrap();
        let s = (1.0f64 / 3.0).sqrt();
        assert!((r.points[0] - (1.0 - s) / 2.0).abs() < 1e-16);
        assert!((r.points[1] - (1.0 + s) / 2.0).abs() < 1e-16);
        assert!(r.weights.iter().all(|w| (w - 0.5).abs() < 1e-15));
        let r = quad_rule_1d(1).unwrap();
        assert_eq!(r.points, vec![0.5]);
        assert_eq!(r.weights, vec![1.0]);
        let (x, w) = gauss_legendre(9);
        let table = [
            (0.0, 0.330_239_355_001_259_8),
            (0.836_031_107_326_635_8, 0.180_648_160_694_857_4),
            (0.968_160_239_507_626_1, 0.081_274_388_361_574_4),
            (0.324_253_423_403_808_9, 0.312_347_077_040_002_9),
            (0.613_371_432_700_590_4, 0.260_610_696_402_935_4),
        ];
        for (q, wt) in table {
            let i = x.iter().position(|&xi| (xi - q).abs() < 1e-14).unwrap();
            assert!((w[i] - wt).abs() < 1e-15);
        }
        let (x, w) = gauss_legendre(5);
        let c = 13.0 * 70f64.sqrt();
        assert!((w[0] - (322.0 - c) / 900.0).abs() < 1e-15);
        assert!((w[1] - (322.0 + c) / 900.0).abs() < 1e-15);
        assert!((w[2] - 128.0 / 225.0).abs() < 1e-15);
        let outer = (5.0 + 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
        assert!((x[4] - outer).abs() < 1e-15);
    }

    #[test]
    fn order_above_17_is_rejected() {
        assert_eq!(quad_rule_1d(18), Err(QuadratureError::UnsupportedOrder(18)));
        assert_eq!(quad_rule_1d(17).unwrap().len(), 9);
    }

    #[test]
    fn cubic_integral_is_exact() {
        let r = quad_rule_1d(3).unwrap();
        let v: f64 = r.points.iter().zip(&r.weights).map(|(s, w)| w * s.powi(3)).sum();
        assert!((v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn two_d_low_orders_match_tabulated() {
        let r = quad_rule_2d(1);
        assert_eq!(r.points, vec![[1.0 / 3.0, 1.0 / 3.0]]);
        assert_eq!(r.weights, vec![0.5]);
        let r = quad_rule_2d(2);
        assert_eq!(r.points[1], [2.0 / 3.0, 1.0 / 6.0]);
        assert_eq!(r.weights, vec![1.0 / 6.0; 3]);
    }

    #[test]
    fn fallback_rule_integrates_monomial() {
        let r = quad_rule_2d(8);
        let v: f64 = r
            .points
            .iter()
            .zip(&r.weights)
            .map(|(x, w)| w * x[0].powi(2) * x[1].powi(3))
            .sum();
        let exact = factorial(2) * factorial(3) / factorial(7);
        assert!(((v - exact) / exact).abs() < 1e-12);
        assert!((exact - 1.0 / 420.0).abs() < 1e-16);
    }

    #[test]
    fn gamma_endpoints() {
        assert_eq!(gamma_map(1, 0.0).unwrap(), [0.0, 1.0]);
        assert_eq!(gamma_map(0, 0.5).unwrap(), [0.5, 0.5]);
        assert_eq!(gamma_map(2, 1.0).unwrap(), [1.0, 0.0]);
        assert!(gamma_map(3, 0.0).is_err());
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta_map(1, 0, [0.0, 0.3]).unwrap(), [0.7, 0.3]);
        assert_eq!(theta_map(0, 0, [0.25, 0.75]).unwrap(), [0.75, 0.25]);
    }

    #[test]
    fn cache_matches_direct_evaluation() {
        let cache = build_basis_cache(3).unwrap();
        let t = cache.get(3);
        for (r, &s) in t.rule_1d.points.iter().enumerate() {
            assert!((t.phi_edge(2, r, 1) - (2.0 - 6.0 * s)).abs() < 1e-14);
        }
        let cache = build_basis_cache(15).unwrap();
        for q in cache.orders().collect::<Vec<_>>() {
            let t = cache.get(q);
            for (r, x) in t.rule_2d.points.iter().enumerate() {
                for i in 0..15 {
                    assert_eq!(t.phi(r, i), basis::phi_value(i, x[0], x[1]));
                }
            }
        }
        let cache = build_basis_cache(1).unwrap();
        let t = cache.get(1);
        assert!((0..t.rule_2d.len()).all(|r| t.phi(r, 0) == 2f64.sqrt()));
    }
}
