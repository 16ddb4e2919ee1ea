//! Config-driven classification sweep and its report.

use serde::{Deserialize, Serialize};

use crate::classify::{scan_window, ACSupportSet, PointOutcome, PurityReport, SCReport};
use crate::config::RunConfig;
use crate::domain::{oracle_eigendecomposition, DirichletOperator};
use crate::{Error, Result, C64};

pub const REPORT_SCHEMA: &str = "dtn-spectral/report/v1";

/// Dense oracle is only run up to this interior dimension.
pub const ORACLE_MAX_DIM: usize = 2500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSummary {
    pub dimension: usize,
    pub n_interior: usize,
    pub n_boundary: usize,
    pub h: f64,
    pub interior_weight: f64,
    pub boundary_weight: f64,
    pub norm1: f64,
}

impl OperatorSummary {
    pub fn of(op: &DirichletOperator) -> Self {
        let dom = op.domain();
        Self {
            dimension: dom.dimension(),
            n_interior: dom.n_interior(),
            n_boundary: dom.n_boundary(),
            h: dom.h(),
            interior_weight: dom.interior_weight(),
            boundary_weight: dom.boundary_weight(),
            norm1: op.norm1(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectedEigenvalue {
    pub location: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub oracle: f64,
    pub multiplicity: usize,
    pub detected: Option<f64>,
    pub detected_multiplicity: Option<usize>,
}

/// Oracle eigenvalues inside the window against what the sweep found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCrossCheck {
    pub tolerance: f64,
    pub rows: Vec<OracleRow>,
    /// Detections with no oracle eigenvalue nearby.
    pub spurious: Vec<f64>,
    pub agrees: bool,
}

/// Everything `classify` writes out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub schema: String,
    /// Config as run, with the thread count removed.
    pub config: RunConfig,
    pub operator: OperatorSummary,
    /// Probe vectors in the boundary basis.
    pub probes: Vec<Vec<C64>>,
    pub points: Vec<PointOutcome>,
    pub poles: Vec<PointOutcome>,
    pub eigenvalues: Vec<DetectedEigenvalue>,
    pub inconclusive: usize,
    pub ac_support: Option<ACSupportSet>,
    pub sc_report: Option<SCReport>,
    pub purity: Option<PurityReport>,
    /// Why the windowed analyses were skipped.
    pub window_note: Option<String>,
    pub oracle: Option<OracleCrossCheck>,
}

/// Detection tolerance used by the oracle cross-check.
pub const MATCH_REL: f64 = 1e-6;

fn cross_check(op: &DirichletOperator, lower: f64, upper: f64, found: &[DetectedEigenvalue]) -> OracleCrossCheck {
    let eig = oracle_eigendecomposition(op);
    let mut rows = Vec::new();
    let mut used = vec![false; found.len()];
    for (value, mult) in eig.distinct() {
        if value < lower || value > upper {
            continue;
        }
        let tol = MATCH_REL * value.abs().max(1.0);
        let hit = found.iter().position(|d| (d.location - value).abs() <= tol);
        if let Some(i) = hit {
            used[i] = true;
        }
        rows.push(OracleRow {
            oracle: value,
            multiplicity: mult,
            detected: hit.map(|i| found[i].location),
            detected_multiplicity: hit.map(|i| found[i].multiplicity),
        });
    }
    let spurious: Vec<f64> = found.iter().zip(&used).filter(|(_, u)| !**u).map(|(d, _)| d.location).collect();
    let agrees = spurious.is_empty() && rows.iter().all(|r| r.detected_multiplicity == Some(r.multiplicity));
    OracleCrossCheck {
        tolerance: MATCH_REL,
        rows,
        spurious,
        agrees,
    }
}

fn sweep_in_pool(cfg: &RunConfig) -> Result<ClassificationReport> {
    let op = cfg.operator()?;
    let window = cfg.window.window()?;
    let ccfg = cfg.classify_config(&op);
    let scan = scan_window(&op, &window, &ccfg);
    let eigenvalues: Vec<DetectedEigenvalue> = scan
        .eigenvalues()
        .into_iter()
        .map(|(location, multiplicity)| DetectedEigenvalue { location, multiplicity })
        .collect();
    let inconclusive = scan.points.iter().filter(|p| p.verdict().is_none()).count();
    let (ac_support, sc_report, purity, window_note) = match (
        scan.ac_support(&ccfg.thresholds),
        scan.sc_screen(&op, &ccfg.probes),
        scan.purity(&op, &ccfg.probes, &ccfg.thresholds),
    ) {
        (Ok(a), Ok(s), Ok(p)) => (Some(a), Some(s), Some(p), None),
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => (None, None, None, Some(e.to_string())),
    };
    let oracle = (op.domain().n_interior() <= ORACLE_MAX_DIM).then(|| cross_check(&op, window.lower, window.upper, &eigenvalues));
    let mut echo = cfg.clone();
    echo.output.threads = None;
    Ok(ClassificationReport {
        schema: REPORT_SCHEMA.to_string(),
        config: echo,
        operator: OperatorSummary::of(&op),
        probes: ccfg.probes.iter().map(|g| g.iter().copied().collect()).collect(),
        points: scan.points,
        poles: scan.poles,
        eigenvalues,
        inconclusive,
        ac_support,
        sc_report,
        purity,
        window_note,
        oracle,
    })
}

/// Runs the sweep inside a pool sized by `output.threads`. Per-point failures are recorded as
/// inconclusive entries; only setup errors abort.
pub fn run_sweep(cfg: &RunConfig) -> Result<ClassificationReport> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.output.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start thread pool: {e}")))?;
    pool.install(|| sweep_in_pool(cfg))
}
