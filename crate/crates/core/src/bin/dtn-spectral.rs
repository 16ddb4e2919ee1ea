use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use dtn_spectral::config::{parse_config, ConfigError, RunConfig};
use dtn_spectral::convergence::{eigenvalue_refinement, m_refinement, truncation_study, EigenRefinement, MRefinement, MSample};
use dtn_spectral::domain::{oracle_eigendecomposition, oracle_projector, InteriorField};
use dtn_spectral::dtn::validation_run;
use dtn_spectral::measures::{
    ac_sc_supports, nearest_level_distance, operator_norm, simplicity_rank, spectral_measure, stone_projection, MeasureDecomposition,
    SimplicityReport, SpectralMeasure,
};
use dtn_spectral::report::{emit_csv, emit_plot_data, emit_report};
use dtn_spectral::sweep::run_sweep;
use dtn_spectral::{Error, C64};

#[derive(Parser)]
#[command(name = "dtn-spectral", version, about = "Spectral classification from the discrete Dirichlet-to-Neumann map")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (overrides `output.threads`).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for random probes and random parameter draws.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Boundary-triple identities and the Herglotz law over random draws.
    Validate {
        #[arg(long, default_value_t = 20)]
        draws: usize,
    },
    /// Classify every grid point of the window and write report, CSV and plot data.
    Classify,
    /// Dense eigendecomposition of the operator.
    Oracle,
    /// Stone projections, measure supports and the simplicity rank.
    Measures,
    /// Mesh and truncation refinement on the free half-line.
    Convergence,
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Model(e) => e.into(),
            e => Failure::Config(e.to_string()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidDomain(_) | Error::InvalidArgument(_) | Error::PotentialBound { .. } | Error::DimensionMismatch { .. } => {
                Failure::Config(e.to_string())
            }
            e => Failure::Numerical(e.to_string()),
        }
    }
}

fn io_failure(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn load(cli: &Cli) -> Result<RunConfig, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("--config is required for this subcommand".into()))?;
    let mut cfg = parse_config(path)?;
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::Config("--threads must be at least 1".into()));
        }
        cfg.output.threads = Some(t);
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    Ok(cfg)
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(dir).map_err(|e| io_failure(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).map_err(io_failure)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| io_failure(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    let pool = b.build().map_err(|e| Failure::Config(e.to_string()))?;
    Ok(pool.install(f))
}

const IDENTITY_TOL: f64 = 1e-10;

fn validate(cli: &Cli, draws: usize) -> Result<(), Failure> {
    let cfg = load(cli)?;
    let op = cfg.operator()?;
    let seed = cli.seed.unwrap_or(0);
    let report = validation_run(&op, seed, draws, draws)?;
    let path = write_json(&cfg.output.dir, "validate.json", &report)?;
    println!(
        "identities: max residual {:e}; Herglotz: max residual {:e}; wrote {}",
        report.max_identity_residual,
        report.max_herglotz_residual,
        path.display()
    );
    if report.max_identity_residual > IDENTITY_TOL || report.max_herglotz_residual > IDENTITY_TOL {
        return Err(Failure::Numerical(format!("residuals exceed {IDENTITY_TOL:e}")));
    }
    Ok(())
}

fn classify(cli: &Cli) -> Result<(), Failure> {
    let cfg = load(cli)?;
    let report = run_sweep(&cfg)?;
    let dir = &cfg.output.dir;
    let json = emit_report(&report, dir).map_err(io_failure)?;
    emit_csv(&report, dir).map_err(io_failure)?;
    emit_plot_data(&report, dir).map_err(io_failure)?;
    println!(
        "{} grid points, {} inconclusive, {} eigenvalues, purity {}; wrote {}",
        report.points.len(),
        report.inconclusive,
        report.eigenvalues.len(),
        report
            .purity
            .as_ref()
            .map_or_else(|| "unavailable".to_string(), |p| format!("{:?}", p.purity)),
        json.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct OracleDump {
    dimension: usize,
    values: Vec<f64>,
    distinct: Vec<(f64, usize)>,
    in_window: Vec<(f64, usize)>,
}

fn oracle(cli: &Cli) -> Result<(), Failure> {
    let cfg = load(cli)?;
    let op = cfg.operator()?;
    let eig = oracle_eigendecomposition(&op);
    let distinct = eig.distinct();
    let dump = OracleDump {
        dimension: eig.values().len(),
        values: eig.values().to_vec(),
        in_window: distinct
            .iter()
            .copied()
            .filter(|(v, _)| *v >= cfg.window.lower && *v <= cfg.window.upper)
            .collect(),
        distinct,
    };
    let path = write_json(&cfg.output.dir, "oracle.json", &dump)?;
    println!("{} eigenvalues, {} in the window; wrote {}", dump.dimension, dump.in_window.len(), path.display());
    Ok(())
}

#[derive(Serialize)]
struct StoneRow {
    a: f64,
    b: f64,
    gap: f64,
    error_vs_oracle: Option<f64>,
    failure: Option<String>,
}

#[derive(Serialize)]
struct MeasuresDump {
    stone: Vec<StoneRow>,
    measure: SpectralMeasure,
    supports: MeasureDecomposition,
    simplicity: SimplicityReport,
}

fn measures(cli: &Cli) -> Result<(), Failure> {
    let cfg = load(cli)?;
    let mcfg = cfg.measures.clone().unwrap_or_default();
    let op = cfg.operator()?;
    let eig = oracle_eigendecomposition(&op);
    let dump = in_pool(cfg.output.threads, || -> Result<MeasuresDump, Failure> {
        let stone = mcfg
            .intervals
            .iter()
            .map(|&[a, b]| match stone_projection(&op, a, b, &mcfg.delta) {
                Ok(p) => StoneRow {
                    a,
                    b,
                    gap: p.gap,
                    error_vs_oracle: oracle_projector(&eig, a, b).ok().map(|o| operator_norm(&(&p.projector - o))),
                    failure: None,
                },
                Err(e) => StoneRow {
                    a,
                    b,
                    gap: nearest_level_distance(&op, a).min(nearest_level_distance(&op, b)),
                    error_vs_oracle: None,
                    failure: Some(e.to_string()),
                },
            })
            .collect();
        let n = op.domain().n_interior();
        if mcfg.vector_node >= n {
            return Err(Failure::Config(format!("measures.vector_node: must be below {n}")));
        }
        let mut unit = vec![0.0; n];
        unit[mcfg.vector_node] = 1.0;
        let u = InteriorField::from_real(op.domain(), &unit)?;
        let measure = spectral_measure(&eig, &u);
        let grid = cfg.window.window()?.grid();
        let supports = ac_sc_supports(&measure, &cfg.eta, &cfg.thresholds, &grid);
        let probes = cfg.probe_vectors(&op);
        let zetas: Vec<C64> = mcfg.zetas();
        let simplicity = simplicity_rank(&op, &zetas, Some(&probes))?;
        Ok(MeasuresDump {
            stone,
            measure,
            supports,
            simplicity,
        })
    })??;
    let path = write_json(&cfg.output.dir, "measures.json", &dump)?;
    println!(
        "{} Stone intervals, {} atoms, simplicity rank {}/{}; wrote {}",
        dump.stone.len(),
        dump.measure.atoms.len(),
        dump.simplicity.rank,
        dump.simplicity.dimension,
        path.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct ConvergenceDump {
    m_refinement: Vec<MRefinement>,
    truncation: Vec<Vec<MSample>>,
    eigenvalue: EigenRefinement,
}

fn convergence(cli: &Cli) -> Result<(), Failure> {
    let cfg = load(cli)?;
    let c = cfg.convergence.clone().unwrap_or_default();
    let lambdas: Vec<C64> = c.points.iter().map(|&x| C64::new(x, c.eta)).collect();
    let m = lambdas
        .iter()
        .map(|&l| m_refinement(c.h, c.length, l))
        .collect::<Result<Vec<_>, _>>()?;
    let truncation = lambdas
        .iter()
        .map(|&l| truncation_study(c.h, &c.lengths, l))
        .collect::<Result<Vec<_>, _>>()?;
    let eigenvalue = eigenvalue_refinement(c.eigen_length, c.eigen_index, &c.eigen_steps)?;
    let dump = ConvergenceDump {
        m_refinement: m,
        truncation,
        eigenvalue,
    };
    let path = write_json(&cfg.output.dir, "convergence.json", &dump)?;
    for r in &dump.m_refinement {
        println!(
            "x = {}: |M - sqrt(-z)| = {:e} at h = {}, reduction {:.3} at h/2, truncation {:e}",
            r.coarse.lambda.re, r.coarse.continuum_error, r.coarse.h, r.reduction, r.coarse.truncation_error
        );
    }
    println!("eigenvalue {} orders {:?}; wrote {}", dump.eigenvalue.k, dump.eigenvalue.orders, path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { draws } => validate(&cli, *draws),
        Command::Classify => classify(&cli),
        Command::Oracle => oracle(&cli),
        Command::Measures => measures(&cli),
        Command::Convergence => convergence(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}
