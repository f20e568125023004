//! Orthonormal modal basis on the reference triangle for degrees 0 to 4.
//!
//! Basis indices are zero-based: `phi_value(0, ..)` is the constant √2.

use thiserror::Error;

/// Highest supported polynomial degree.
pub const MAX_DEGREE: usize = 4;
/// Number of basis functions for [`MAX_DEGREE`].
pub const MAX_LOCAL: usize = 15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("Polynomial order must be zero to four (got {0})")]
    UnsupportedDegree(usize),
    #[error("{0} local basis functions does not match any degree 0..=4")]
    UnsupportedLocalCount(usize),
    #[error("basis index {0} out of range 0..15")]
    Index(usize),
    #[error("gradient component {0} out of range 0..2")]
    Component(usize),
}

/// Polynomial degree p together with the local dimension N = (p+1)(p+2)/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PolynomialOrder(usize);

impl PolynomialOrder {
    pub fn new(p: usize) -> Result<Self, BasisError> {
        if p > MAX_DEGREE {
            return Err(BasisError::UnsupportedDegree(p));
        }
        Ok(Self(p))
    }

    pub fn from_n_local(n: usize) -> Result<Self, BasisError> {
        match n {
            1 => Ok(Self(0)),
            3 => Ok(Self(1)),
            6 => Ok(Self(2)),
            10 => Ok(Self(3)),
            15 => Ok(Self(4)),
            _ => Err(BasisError::UnsupportedLocalCount(n)),
        }
    }

    pub fn p(self) -> usize {
        self.0
    }

    pub fn n_local(self) -> usize {
        (self.0 + 1) * (self.0 + 2) / 2
    }
}

impl std::fmt::Display for PolynomialOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "p = {}", self.0)
    }
}

/// Evaluates φ̂_i at each point.
pub fn phi(i: usize, points: &[[f64; 2]]) -> Result<Vec<f64>, BasisError> {
    if i >= MAX_LOCAL {
        return Err(BasisError::Index(i));
    }
    Ok(points.iter().map(|x| phi_value(i, x[0], x[1])).collect())
}

/// Evaluates ∂φ̂_i/∂x̂_m at each point, m ∈ {0, 1}.
pub fn grad_phi(i: usize, m: usize, points: &[[f64; 2]]) -> Result<Vec<f64>, BasisError> {
    if i >= MAX_LOCAL {
        return Err(BasisError::Index(i));
    }
    if m > 1 {
        return Err(BasisError::Component(m));
    }
    Ok(points.iter().map(|x| grad_phi_value(i, m, x[0], x[1])).collect())
}

/// φ̂_i(x1, x2). Panics if `i >= 15`.
#[inline]
pub fn phi_value(i: usize, x1: f64, x2: f64) -> f64 {
    let s2 = std::f64::consts::SQRT_2;
    match i {
        0 => s2,
        1 => 2.0 - 6.0 * x1,
        2 => 2.0 * 3f64.sqrt() * (1.0 - x1 - 2.0 * x2),
        3 => 6f64.sqrt() * ((10.0 * x1 - 8.0) * x1 + 1.0),
        4 => 3f64.sqrt() * ((5.0 * x1 - 4.0) * x1 + (-15.0 * x2 + 12.0) * x2 - 1.0),
        5 => 3.0 * 5f64.sqrt() * ((3.0 * x1 + 8.0 * x2 - 4.0) * x1 + (3.0 * x2 - 4.0) * x2 + 1.0),
        6 => 2.0 * s2 * (-1.0 + (15.0 + (-45.0 + 35.0 * x1) * x1) * x1),
        7 => {
            2.0 * 6f64.sqrt()
                * (-1.0 + (13.0 + (-33.0 + 21.0 * x1) * x1) * x1 + (2.0 + (-24.0 + 42.0 * x1) * x1) * x2)
        }
        8 => {
            2.0 * 10f64.sqrt()
                * (-1.0
                    + (9.0 + (-15.0 + 7.0 * x1) * x1) * x1
                    + (6.0 + (-48.0 + 42.0 * x1) * x1 + (-6.0 + 42.0 * x1) * x2) * x2)
        }
        9 => {
            2.0 * 14f64.sqrt()
                * (-1.0
                    + (3.0 + (-3.0 + x1) * x1) * x1
                    + (12.0 + (-24.0 + 12.0 * x1) * x1 + (-30.0 + 30.0 * x1 + 20.0 * x2) * x2) * x2)
        }
        10 => 10f64.sqrt() * (1.0 + (-24.0 + (126.0 + (-224.0 + 126.0 * x1) * x1) * x1) * x1),
        11 => {
            30f64.sqrt()
                * (1.0
                    + (-22.0 + (105.0 + (-168.0 + 84.0 * x1) * x1) * x1) * x1
                    + (-2.0 + (42.0 + (-168.0 + 168.0 * x1) * x1) * x1) * x2)
        }
        12 => {
            5.0 * s2
                * (1.0
                    + (-18.0 + (69.0 + (-88.0 + 36.0 * x1) * x1) * x1) * x1
                    + (-6.0
                        + (102.0 + (-312.0 + 216.0 * x1) * x1) * x1
                        + (6.0 + (-96.0 + 216.0 * x1) * x1) * x2)
                        * x2)
        }
        13 => {
            70f64.sqrt()
                * (1.0
                    + (-12.0 + (30.0 + (-28.0 + 9.0 * x1) * x1) * x1) * x1
                    + (-12.0
                        + (132.0 + (-228.0 + 108.0 * x1) * x1) * x1
                        + (30.0 + (-300.0 + 270.0 * x1) * x1 + (-20.0 + 180.0 * x1) * x2) * x2)
                        * x2)
        }
        14 => {
            3.0 * 10f64.sqrt()
                * (1.0
                    + (-4.0 + (6.0 + (-4.0 + x1) * x1) * x1) * x1
                    + (-20.0
                        + (60.0 + (-60.0 + 20.0 * x1) * x1) * x1
                        + (90.0
                            + (-180.0 + 90.0 * x1) * x1
                            + (-140.0 + 140.0 * x1 + 70.0 * x2) * x2)
                            * x2)
                        * x2)
        }
        _ => panic!("basis index {i} out of range"),
    }
}

/// ∂φ̂_i/∂x̂_m at (x1, x2), m ∈ {0, 1}. Panics on out-of-range indices.
#[inline]
pub fn grad_phi_value(i: usize, m: usize, x1: f64, x2: f64) -> f64 {
    let s2 = std::f64::consts::SQRT_2;
    match (m, i) {
        (_, 0) => 0.0,
        (0, 1) => -6.0,
        (0, 2) => -2.0 * 3f64.sqrt(),
        (0, 3) => 6f64.sqrt() * (20.0 * x1 - 8.0),
        (0, 4) => 3f64.sqrt() * (10.0 * x1 - 4.0),
        (0, 5) => 6.0 * 5f64.sqrt() * (3.0 * x1 + 4.0 * x2 - 2.0),
        (0, 6) => 2.0 * s2 * (15.0 + (-90.0 + 105.0 * x1) * x1),
        (0, 7) => 2.0 * 6f64.sqrt() * (13.0 + (-66.0 + 63.0 * x1) * x1 + (-24.0 + 84.0 * x1) * x2),
        (0, 8) => 2.0 * 10f64.sqrt() * (9.0 + (-30.0 + 21.0 * x1) * x1 + (-48.0 + 84.0 * x1 + 42.0 * x2) * x2),
        (0, 9) => 2.0 * 14f64.sqrt() * (3.0 + (-6.0 + 3.0 * x1) * x1 + (-24.0 + 24.0 * x1 + 30.0 * x2) * x2),
        (0, 10) => 10f64.sqrt() * (-24.0 + (252.0 + (-672.0 + 504.0 * x1) * x1) * x1),
        (0, 11) => {
            30f64.sqrt()
                * (-22.0
                    + (210.0 + (-504.0 + 336.0 * x1) * x1) * x1
                    + (42.0 + (-336.0 + 504.0 * x1) * x1) * x2)
        }
        (0, 12) => {
            5.0 * s2
                * (-18.0
                    + (138.0 + (-264.0 + 144.0 * x1) * x1) * x1
                    + (102.0 + (-624.0 + 648.0 * x1) * x1 + (-96.0 + 432.0 * x1) * x2) * x2)
        }
        (0, 13) => {
            70f64.sqrt()
                * (-12.0
                    + (60.0 + (-84.0 + 36.0 * x1) * x1) * x1
                    + (132.0 + (-456.0 + 324.0 * x1) * x1 + (-300.0 + 540.0 * x1 + 180.0 * x2) * x2) * x2)
        }
        (0, 14) => {
            3.0 * 10f64.sqrt()
                * (-4.0
                    + (12.0 + (-12.0 + 4.0 * x1) * x1) * x1
                    + (60.0 + (-120.0 + 60.0 * x1) * x1 + (-180.0 + 180.0 * x1 + 140.0 * x2) * x2) * x2)
        }
        (1, 1) | (1, 3) | (1, 6) | (1, 10) => 0.0,
        (1, 2) => -4.0 * 3f64.sqrt(),
        (1, 4) => 2.0 * 3f64.sqrt() * (-15.0 * x2 + 6.0),
        (1, 5) => 6.0 * 5f64.sqrt() * (4.0 * x1 + 3.0 * x2 - 2.0),
        (1, 7) => 2.0 * 6f64.sqrt() * (2.0 + (-24.0 + 42.0 * x1) * x1),
        (1, 8) => 2.0 * 10f64.sqrt() * (6.0 + (-48.0 + 42.0 * x1) * x1 + (-12.0 + 84.0 * x1) * x2),
        (1, 9) => {
            2.0 * 14f64.sqrt() * (12.0 + (-24.0 + 12.0 * x1) * x1 + (-60.0 + 60.0 * x1 + 60.0 * x2) * x2)
        }
        (1, 11) => 30f64.sqrt() * (-2.0 + (42.0 + (-168.0 + 168.0 * x1) * x1) * x1),
        (1, 12) => {
            5.0 * s2
                * (-6.0 + (102.0 + (-312.0 + 216.0 * x1) * x1) * x1 + (12.0 + (-192.0 + 432.0 * x1) * x1) * x2)
        }
        (1, 13) => {
            70f64.sqrt()
                * (-12.0
                    + (132.0 + (-228.0 + 108.0 * x1) * x1) * x1
                    + (60.0 + (-600.0 + 540.0 * x1) * x1 + (-60.0 + 540.0 * x1) * x2) * x2)
        }
        (1, 14) => {
            3.0 * 10f64.sqrt()
                * (-20.0
                    + (60.0 + (-60.0 + 20.0 * x1) * x1) * x1
                    + (180.0 + (-360.0 + 180.0 * x1) * x1 + (-420.0 + 420.0 * x1 + 280.0 * x2) * x2) * x2)
        }
        _ => panic!("gradient ({m}, {i}) out of range"),
    }
}
