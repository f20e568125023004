mod config;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use ldg_core::convergence::{cosine_problem, mesh_hierarchy, run_study, ConvergenceRow};
use ldg_core::fields::to_lagrange;
use ldg_core::vtkout::{dump_mesh_report, format_sci, write_vtu, VtuSnapshot};
use ldg_core::{Discretization, RefTensors};
use rayon::prelude::*;

use config::RunConfig;

#[derive(Parser)]
#[command(name = "ldg", version, about = "LDG solver for diffusion on triangular meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory for .vtu and .csv output
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,
    /// Print nothing but errors
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Time-dependent run writing a .vtu series
    Simulate {
        /// Config file, or a builtin name (paper-main, paper-convergence)
        #[arg(long, default_value = "paper-main")]
        config: String,
    },
    /// Manufactured-solution convergence study
    Convergence {
        #[arg(long, default_value = "paper-convergence")]
        config: String,
        /// Number of refinements of the coarse mesh
        #[arg(long)]
        levels: Option<usize>,
        /// Comma-separated polynomial orders
        #[arg(long, value_delimiter = ',')]
        orders: Option<Vec<usize>>,
    },
    /// Mesh summary and optional flat .vtu dump
    MeshInfo {
        #[arg(long, default_value = "paper-main")]
        config: String,
        /// Also write <basename>_mesh.0.vtu with the triangle index as data
        #[arg(long)]
        vtu: bool,
    },
}

struct Out {
    quiet: bool,
}

impl Out {
    fn line(&self, text: impl AsRef<str>) {
        if !self.quiet {
            let _ = writeln!(std::io::stdout().lock(), "{}", text.as_ref());
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    ldg_core::linsolve::use_sequential_kernels();
    let out = Out { quiet: cli.quiet };
    let result = match &cli.command {
        Command::Simulate { config } => simulate(config, &cli.output_dir, &out),
        Command::Convergence { config, levels, orders } => {
            convergence(config, *levels, orders.clone(), &cli.output_dir, &out)
        }
        Command::MeshInfo { config, vtu } => mesh_info(config, *vtu, &cli.output_dir, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn simulate(source: &str, dir: &Path, out: &Out) -> Result<()> {
    let start = Instant::now();
    let cfg = RunConfig::load(source)?;
    let mesh = cfg.build_mesh()?;
    let spec = cfg.problem()?;
    let p = cfg.discretization.p;
    let refs = RefTensors::new((p + 1) * (p + 2) / 2)?;
    create_dir(dir)?;
    out.line(format!(
        "simulate: K = {}, p = {p}, t_end = {:.6}, {} steps, eta = {}",
        mesh.num_t(),
        spec.t_end,
        spec.num_steps,
        spec.eta
    ));
    let mut disc = Discretization::new(&mesh, &spec, &refs)?;
    let mut snapshots = 0;
    let mut last = Instant::now();
    let mut write_err = None;
    let end = disc.run(|step, state| {
        let c = state.c();
        if step % cfg.output.every == 0 || step == spec.num_steps {
            let data = to_lagrange(&c);
            let snap = VtuSnapshot {
                mesh: &mesh,
                data: &data,
                var_name: &cfg.output.variable,
                basename: &cfg.output.basename,
                t_lvl: step,
            };
            match write_vtu(&snap, dir) {
                Ok(_) => snapshots += 1,
                Err(e) => write_err = Some(e),
            }
        }
        let now = Instant::now();
        out.line(format!(
            "step {step:>4}/{}  t = {}  {:.3} s",
            spec.num_steps,
            format_sci(state.t),
            (now - last).as_secs_f64()
        ));
        last = now;
        Ok(())
    })?;
    if let Some(e) = write_err {
        return Err(e.into());
    }
    if end.y.iter().any(|v| !v.is_finite()) {
        anyhow::bail!("solution contains non-finite values");
    }
    let c = end.c();
    let (lo, hi) = c.as_slice().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    out.line(format!(
        "done: {} steps, {snapshots} snapshots in {}, coefficients in [{lo:.4e}, {hi:.4e}], wall time {:.3} s",
        spec.num_steps,
        dir.display(),
        start.elapsed().as_secs_f64()
    ));
    Ok(())
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(text) = std::env::var("LDG_THREADS") {
        let n: usize = text.trim().parse().with_context(|| format!("LDG_THREADS: not a number: {text:?}"))?;
        builder = builder.num_threads(n.max(1));
    }
    Ok(builder.build()?)
}

fn csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("p,j,h,K,error,alpha\n");
    for r in rows {
        let alpha = r.alpha.map(|a| format!("{a:.6}")).unwrap_or_default();
        let _ = writeln!(s, "{},{},{:.10e},{},{:.10e},{alpha}", r.p, r.j, r.h, r.num_t, r.error);
    }
    s
}

fn table(rows: &[ConvergenceRow], eta: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# c = cos(7 x1) cos(7 x2), d = exp(x1 + x2), eta = {eta}, stationary");
    let _ = writeln!(
        s,
        "# coarse mesh: domain_square(1/3) with K = 18 instead of the irregular K = 36 grid;"
    );
    let _ = writeln!(s, "# compare the orders alpha, not the error magnitudes");
    let _ = writeln!(s, "{:>2} {:>2} {:>12} {:>7} {:>12} {:>7}", "p", "j", "h", "K", "error", "alpha");
    for r in rows {
        let alpha = r.alpha.map(|a| format!("{a:.2}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(s, "{:>2} {:>2} {:>12.4e} {:>7} {:>12.4e} {:>7}", r.p, r.j, r.h, r.num_t, r.error, alpha);
    }
    s
}

fn convergence(
    source: &str,
    levels: Option<usize>,
    orders: Option<Vec<usize>>,
    dir: &Path,
    out: &Out,
) -> Result<()> {
    let start = Instant::now();
    let mut cfg = RunConfig::load(source)?;
    if let Some(l) = levels {
        cfg.convergence.levels = l;
    }
    if let Some(o) = orders {
        cfg.convergence.orders = o;
    }
    cfg.validate()?;
    let problem = cosine_problem(cfg.discretization.eta);
    let meshes = mesh_hierarchy(cfg.convergence.levels)?;
    let pool = thread_pool()?;
    let studies: Vec<Result<Vec<ConvergenceRow>, _>> =
        pool.install(|| cfg.convergence.orders.par_iter().map(|&p| run_study(&problem, &meshes, p)).collect());
    let mut rows = Vec::new();
    for s in studies {
        rows.extend(s?);
    }
    create_dir(dir)?;
    let path = dir.join("convergence.csv");
    std::fs::write(&path, csv(&rows)).with_context(|| format!("cannot write {}", path.display()))?;
    out.line(table(&rows, cfg.discretization.eta));
    out.line(format!("wrote {} ({:.3} s)", path.display(), start.elapsed().as_secs_f64()));
    Ok(())
}

fn mesh_info(source: &str, vtu: bool, dir: &Path, out: &Out) -> Result<()> {
    let cfg = RunConfig::load(source)?;
    let mesh = cfg.build_mesh()?;
    mesh.check_invariants().map_err(anyhow::Error::msg)?;
    out.line(dump_mesh_report(&mesh));
    if vtu {
        create_dir(dir)?;
        let data: Vec<Vec<f64>> = (0..mesh.num_t()).map(|k| vec![k as f64]).collect();
        let basename = format!("{}_mesh", cfg.output.basename);
        let snap = VtuSnapshot { mesh: &mesh, data: &data, var_name: "triangle", basename: &basename, t_lvl: 0 };
        let path = write_vtu(&snap, dir)?;
        out.line(format!("wrote {}", path.display()));
    }
    Ok(())
}
