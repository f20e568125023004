use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use ldg_core::exprlang::parse;
use ldg_core::mesh::{domain_square, read_mesh_medit};
use ldg_core::{BoundaryKind, Expr, Mesh, PolynomialOrder, ProblemSpec};
use serde::Deserialize;

pub const BUILTINS: [(&str, &str); 2] = [
    ("paper-main", include_str!("../configs/paper-main.toml")),
    ("paper-convergence", include_str!("../configs/paper-convergence.toml")),
];

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: MeshConfig,
    pub discretization: DiscretizationConfig,
    pub time: TimeConfig,
    pub boundary: BoundaryConfig,
    pub coefficients: Coefficients,
    pub output: OutputConfig,
    pub convergence: ConvergenceConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    pub generator: String,
    pub h_max: f64,
    pub file: Option<PathBuf>,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { generator: "domain_square".into(), h_max: 0.125, file: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscretizationConfig {
    pub p: usize,
    pub eta: f64,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        Self { p: 2, eta: 1.0 }
    }
}

/// A number, or a constant expression such as `"pi/2"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Expr(String),
}

impl Scalar {
    fn value(&self, field: &str) -> Result<f64> {
        match self {
            Scalar::Number(v) => Ok(*v),
            Scalar::Expr(text) => {
                let e = parse(text).with_context(|| format!("{field}: cannot parse {text:?}"))?;
                Ok(e.eval(0.0, 0.0, 0.0).with_context(|| format!("{field}: cannot evaluate {text:?}"))?)
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    pub t_end: Scalar,
    pub num_steps: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self { t_end: Scalar::Expr("pi".into()), num_steps: 20 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundaryConfig {
    pub dirichlet: Vec<i32>,
    pub neumann: Vec<i32>,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        Self { dirichlet: vec![2, 4], neumann: vec![1, 3] }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Coefficients {
    pub d: String,
    pub f: String,
    pub c_d: String,
    pub g_n: String,
    pub c0: String,
}

impl Default for Coefficients {
    fn default() -> Self {
        Self {
            d: "(x1<3/4 && x1>1/4 && x2<3/4 && x2>1/4) + 0.01".into(),
            f: "0.1*t".into(),
            c_d: "sin(2*pi*x2 + t)".into(),
            g_n: "x2".into(),
            c0: "sin(x1)*cos(x2)".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub basename: String,
    pub variable: String,
    pub every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { basename: "solution".into(), variable: "u".into(), every: 1 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub levels: usize,
    pub orders: Vec<usize>,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self { levels: 4, orders: vec![0, 1, 2, 3, 4] }
    }
}

impl RunConfig {
    /// Reads a config file, or a builtin when `source` names one.
    pub fn load(source: &str) -> Result<Self> {
        if let Some((_, text)) = BUILTINS.iter().find(|(name, _)| *name == source) {
            return Self::from_toml(text).with_context(|| format!("builtin config {source}"));
        }
        let text = std::fs::read_to_string(source).with_context(|| format!("cannot read config {source}"))?;
        let mut config = Self::from_toml(&text).with_context(|| format!("config {source}"))?;
        if let Some(file) = &config.mesh.file {
            if file.is_relative() {
                let base = Path::new(source).parent().unwrap_or(Path::new("."));
                config.mesh.file = Some(base.join(file));
            }
        }
        Ok(config)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        PolynomialOrder::new(self.discretization.p).context("discretization.p")?;
        if self.mesh.file.is_none() {
            if self.mesh.generator != "domain_square" {
                bail!("mesh.generator: unknown generator {:?} (expected \"domain_square\")", self.mesh.generator);
            }
            if !(self.mesh.h_max > 0.0 && self.mesh.h_max.is_finite()) {
                bail!("mesh.h_max must be positive (got {})", self.mesh.h_max);
            }
        }
        if !(self.discretization.eta > 0.0 && self.discretization.eta.is_finite()) {
            bail!("discretization.eta must be positive (got {})", self.discretization.eta);
        }
        if self.time.num_steps == 0 {
            bail!("time.num_steps must be at least 1");
        }
        let t_end = self.t_end()?;
        if !(t_end > 0.0 && t_end.is_finite()) {
            bail!("time.t_end must be positive (got {t_end})");
        }
        if self.output.every == 0 {
            bail!("output.every must be at least 1");
        }
        for id in &self.boundary.dirichlet {
            if self.boundary.neumann.contains(id) {
                bail!("boundary: ID {id} is listed as both dirichlet and neumann");
            }
        }
        for p in &self.convergence.orders {
            PolynomialOrder::new(*p).context("convergence.orders")?;
        }
        self.expressions()?;
        Ok(())
    }

    pub fn t_end(&self) -> Result<f64> {
        self.time.t_end.value("time.t_end")
    }

    fn expressions(&self) -> Result<[Expr; 5]> {
        let c = &self.coefficients;
        let one = |name: &str, text: &str| -> Result<Expr> {
            parse(text).with_context(|| format!("coefficients.{name}: cannot parse {text:?}"))
        };
        Ok([one("d", &c.d)?, one("f", &c.f)?, one("c_d", &c.c_d)?, one("g_n", &c.g_n)?, one("c0", &c.c0)?])
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        match &self.mesh.file {
            Some(path) => Ok(read_mesh_medit(path)?),
            None => Ok(domain_square(self.mesh.h_max)?),
        }
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        let [d, f, c_d, g_n, c0] = self.expressions()?;
        let mut boundary = BTreeMap::new();
        boundary.extend(self.boundary.dirichlet.iter().map(|&id| (id, BoundaryKind::Dirichlet)));
        boundary.extend(self.boundary.neumann.iter().map(|&id| (id, BoundaryKind::Neumann)));
        Ok(ProblemSpec {
            d: Arc::new(d),
            f: Arc::new(f),
            c_d: Arc::new(c_d),
            g_n: Arc::new(g_n),
            c0: Arc::new(c0),
            eta: self.discretization.eta,
            boundary,
            t_end: self.t_end()?,
            num_steps: self.time.num_steps,
            stationary: false,
        })
    }
}
