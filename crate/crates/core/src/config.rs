//! Run configuration read from TOML.
//!
//! ```toml
//! [domain]
//! kind = "halfline1d"
//! h = 0.05
//! length = 20.0
//!
//! [potential]
//! kind = "well"
//! depth = 2.0
//! width = 1.0
//!
//! [window]
//! lower = -1.0
//! upper = 1.0
//! step = 0.01
//! ```
//!
//! Optional sections: `[eta]`, `[probes]`, `[thresholds]`, `[output]`, `[measures]`,
//! `[convergence]`. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{basis_probes, ClassifyConfig, Window};
use crate::domain::{assemble_operator, build_domain, BoundaryVector, DirichletOperator, DomainSpec, PotentialField, PotentialSpec};
use crate::limits::{EtaPolicy, Thresholds};
use crate::measures::DeltaSchedule;
use crate::{c64, C64};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}:{line}:{column}: {message}{}", suggestion.as_ref().map(|s| format!(" (did you mean `{s}`?)")).unwrap_or_default())]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
        suggestion: Option<String>,
    },
    #[error("{field}: {message}")]
    Range { field: String, message: String },
    #[error("unsupported schema version {0} (this build reads {SCHEMA_VERSION})")]
    Schema(u32),
    #[error("{0}")]
    Model(#[from] crate::Error),
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn default_potential() -> PotentialSpec {
    PotentialSpec::Zero
}

/// Grid for the sweep, with the starting half-width of the analyticity window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub lower: f64,
    pub upper: f64,
    pub step: f64,
    /// Defaults to half the grid step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
}

impl WindowConfig {
    pub fn window(&self) -> crate::Result<Window> {
        Window::new(self.lower, self.upper, self.step)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width.unwrap_or(0.5 * self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProbeSelection {
    /// Boundary unit vectors.
    #[default]
    Basis,
    /// `count` real vectors with entries uniform in `[-1, 1]`, normalized in `w_B`.
    Random { seed: u64, count: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Worker threads; `None` lets the pool decide.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            threads: None,
        }
    }
}

/// Stone intervals, the measure probe and the simplicity samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasuresConfig {
    pub intervals: Vec<[f64; 2]>,
    pub delta: DeltaSchedule,
    /// Non-real samples `[re, im]` for the rank test.
    pub zetas: Vec<[f64; 2]>,
    /// Interior node whose unit vector defines `μ_u`.
    pub vector_node: usize,
}

impl Default for MeasuresConfig {
    fn default() -> Self {
        Self {
            intervals: Vec::new(),
            delta: DeltaSchedule::default(),
            zetas: vec![[0.0, 1.0], [0.0, 2.0]],
            vector_node: 0,
        }
    }
}

impl MeasuresConfig {
    pub fn zetas(&self) -> Vec<C64> {
        self.zetas.iter().map(|z| c64(z[0], z[1])).collect()
    }
}

/// Free half-line refinement studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceConfig {
    pub points: Vec<f64>,
    pub eta: f64,
    pub length: f64,
    pub h: f64,
    /// Truncation lengths for the `L` study.
    pub lengths: Vec<f64>,
    pub eigen_length: f64,
    pub eigen_index: usize,
    pub eigen_steps: Vec<f64>,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            points: vec![0.5, 1.0, 2.0],
            eta: 0.1,
            length: 200.0,
            h: 0.01,
            lengths: vec![25.0, 50.0, 100.0, 200.0],
            eigen_length: 1.0,
            eigen_index: 1,
            eigen_steps: vec![0.1, 0.05, 0.025, 0.0125],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub domain: DomainSpec,
    #[serde(default = "default_potential")]
    pub potential: PotentialSpec,
    pub window: WindowConfig,
    #[serde(default)]
    pub eta: EtaPolicy,
    #[serde(default)]
    pub probes: ProbeSelection,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measures: Option<MeasuresConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceConfig>,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Closest expected key to an unknown one, read off a serde "unknown field" message.
fn suggest(message: &str) -> Option<String> {
    let rest = message.split("unknown field `").nth(1)?;
    let unknown = rest.split('`').next()?;
    let expected = message.split("expected").nth(1)?;
    expected
        .split('`')
        .skip(1)
        .step_by(2)
        .map(|cand| (strsim::jaro_winkler(unknown, cand), cand))
        .filter(|(score, _)| *score >= 0.8)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| c.to_string())
}

fn range(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Range {
        field: field.to_string(),
        message: message.into(),
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(range(field, format!("must be a positive finite number, got {v}")))
    }
}

fn unit_open(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(range(field, format!("must lie in (0, 1), got {v}")))
    }
}

impl RunConfig {
    /// Checks every numeric field against its declared range.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema != SCHEMA_VERSION {
            return Err(ConfigError::Schema(self.schema));
        }
        match self.domain {
            DomainSpec::HalfLine1d { h, length } => {
                positive("domain.h", h)?;
                positive("domain.length", length)?;
                if length < 2.0 * h {
                    return Err(range("domain.length", "must hold at least one interior node"));
                }
            }
            DomainSpec::Exterior2d {
                h,
                obstacle_half_width,
                box_half_width,
            } => {
                positive("domain.h", h)?;
                positive("domain.obstacle_half_width", obstacle_half_width)?;
                positive("domain.box_half_width", box_half_width)?;
                if box_half_width <= obstacle_half_width + h {
                    return Err(range("domain.box_half_width", "must exceed obstacle_half_width + h"));
                }
            }
        }
        match &self.potential {
            PotentialSpec::Zero => {}
            PotentialSpec::Constant { value } if !value.is_finite() => return Err(range("potential.value", "must be finite")),
            PotentialSpec::Well { depth, width } => {
                if !depth.is_finite() {
                    return Err(range("potential.depth", "must be finite"));
                }
                positive("potential.width", *width)?;
            }
            PotentialSpec::Tabulated { values } if values.iter().any(|v| !v.is_finite()) => {
                return Err(range("potential.values", "must all be finite"))
            }
            _ => {}
        }
        let w = &self.window;
        if !(w.lower.is_finite() && w.upper.is_finite() && w.lower < w.upper) {
            return Err(range("window.upper", format!("must exceed window.lower, got ({}, {})", w.lower, w.upper)));
        }
        positive("window.step", w.step)?;
        if let Some(hw) = w.half_width {
            positive("window.half_width", hw)?;
        }
        let e = &self.eta;
        if let Some(eta0) = e.eta0 {
            positive("eta.eta0", eta0)?;
        }
        unit_open("eta.ratio", e.ratio)?;
        unit_open("eta.continuum_ratio", e.continuum_ratio)?;
        if e.count < 3 {
            return Err(range("eta.count", format!("must be at least 3, got {}", e.count)));
        }
        if e.continuum_count < 3 {
            return Err(range("eta.continuum_count", format!("must be at least 3, got {}", e.continuum_count)));
        }
        positive("eta.floor_factor", e.floor_factor)?;
        positive("eta.spacing_window", e.spacing_window)?;
        if let ProbeSelection::Random { count, .. } = self.probes {
            if count == 0 {
                return Err(range("probes.count", "must be at least 1"));
            }
        }
        let t = &self.thresholds;
        positive("thresholds.eig_rel", t.eig_rel)?;
        unit_open("thresholds.ac_band", t.ac_band)?;
        if !(0.0..1.0).contains(&t.null_fraction) {
            return Err(range("thresholds.null_fraction", format!("must lie in [0, 1), got {}", t.null_fraction)));
        }
        positive("thresholds.limit_tol", t.limit_tol)?;
        positive("thresholds.analyticity_misfit", t.analyticity_misfit)?;
        positive("thresholds.continuum_rel", t.continuum_rel)?;
        if !(t.divergence_ratio > 1.0) {
            return Err(range("thresholds.divergence_ratio", "must exceed 1"));
        }
        if self.output.threads == Some(0) {
            return Err(range("output.threads", "must be at least 1"));
        }
        if let Some(m) = &self.measures {
            for (i, iv) in m.intervals.iter().enumerate() {
                if !(iv[0] < iv[1]) {
                    return Err(range(&format!("measures.intervals[{i}]"), "needs a < b"));
                }
            }
            if !m.zetas.iter().any(|z| z[1] != 0.0) {
                return Err(range("measures.zetas", "needs at least one non-real sample"));
            }
            unit_open("measures.delta.first", m.delta.first)?;
            unit_open("measures.delta.ratio", m.delta.ratio)?;
            if m.delta.count < 2 {
                return Err(range("measures.delta.count", "must be at least 2"));
            }
            if m.delta.nodes == 0 {
                return Err(range("measures.delta.nodes", "must be at least 1"));
            }
        }
        if let Some(c) = &self.convergence {
            positive("convergence.eta", c.eta)?;
            positive("convergence.length", c.length)?;
            positive("convergence.h", c.h)?;
            positive("convergence.eigen_length", c.eigen_length)?;
            if c.eigen_index == 0 {
                return Err(range("convergence.eigen_index", "is 1-based"));
            }
            if c.eigen_steps.len() < 2 {
                return Err(range("convergence.eigen_steps", "needs at least two mesh sizes"));
            }
        }
        Ok(())
    }

    pub fn operator(&self) -> crate::Result<DirichletOperator> {
        let dom = build_domain(&self.domain)?;
        let q = PotentialField::from_spec(&dom, &self.potential)?;
        assemble_operator(&dom, &q)
    }

    pub fn probe_vectors(&self, op: &DirichletOperator) -> Vec<BoundaryVector> {
        match self.probes {
            ProbeSelection::Basis => basis_probes(op),
            ProbeSelection::Random { seed, count } => random_probes(op, seed, count),
        }
    }

    pub fn classify_config(&self, op: &DirichletOperator) -> ClassifyConfig {
        let mut cfg = ClassifyConfig::new(op, self.window.half_width());
        cfg.policy = self.eta;
        cfg.thresholds = self.thresholds;
        cfg.probes = self.probe_vectors(op);
        cfg
    }

    /// Replaces the seed of random probes; basis probes are unaffected.
    pub fn with_seed(mut self, seed: u64) -> Self {
        if let ProbeSelection::Random { count, .. } = self.probes {
            self.probes = ProbeSelection::Random { seed, count };
        }
        self
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }
}

/// Seeded random probes, normalized in the boundary inner product.
pub fn random_probes(op: &DirichletOperator, seed: u64, count: usize) -> Vec<BoundaryVector> {
    let dom = op.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let vals: Vec<f64> = (0..dom.n_boundary()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut g = BoundaryVector::from_real(dom, &vals).expect("length matches");
            let norm = dom.boundary_norm(&g);
            g.0 /= c64(norm, 0.0);
            g
        })
        .collect()
}

pub fn parse_config_str(text: &str, origin: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        let message = e.message().to_string();
        ConfigError::Parse {
            origin: origin.to_string(),
            line,
            column,
            suggestion: suggest(&message),
            message,
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[domain]
kind = "halfline1d"
h = 1.0
length = 3.0

[window]
lower = 0.0
upper = 4.0
step = 0.1
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config_str(MINIMAL, "minimal").unwrap();
        assert_eq!(cfg.eta, EtaPolicy::default());
        assert_eq!(cfg.eta.ratio, 0.5);
        assert_eq!(cfg.eta.count, 8);
        assert_eq!(cfg.eta.eta0, None);
        assert_eq!(cfg.probes, ProbeSelection::Basis);
        assert_eq!(cfg.potential, PotentialSpec::Zero);
        assert_eq!(cfg.window.half_width(), 0.05);
        let again = parse_config_str(&cfg.to_toml(), "echo").unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn negative_h_names_the_field() {
        let text = MINIMAL.replace("h = 1.0", "h = -1.0");
        let err = parse_config_str(&text, "neg").unwrap_err();
        assert!(matches!(&err, ConfigError::Range { field, .. } if field == "domain.h"), "{err}");
    }

    #[test]
    fn unknown_key_gets_a_suggestion() {
        let text = format!("{MINIMAL}\n[potental]\nkind = \"zero\"\n");
        let err = parse_config_str(&text, "typo").unwrap_err();
        match &err {
            ConfigError::Parse { suggestion, line, .. } => {
                assert_eq!(suggestion.as_deref(), Some("potential"));
                assert!(*line > 0);
            }
            other => panic!("unexpected {other}"),
        }
        assert!(err.to_string().contains("potential"));
    }

    #[test]
    fn random_probes_follow_the_seed() {
        let text = format!("{MINIMAL}\n[probes]\nkind = \"random\"\nseed = 7\ncount = 3\n");
        let cfg = parse_config_str(&text, "random").unwrap();
        let op = cfg.operator().unwrap();
        let a = cfg.probe_vectors(&op);
        let b = cfg.clone().probe_vectors(&op);
        assert_eq!(a, b);
        let c = cfg.with_seed(8).probe_vectors(&op);
        assert_ne!(a, c);
        assert!((op.domain().boundary_norm(&a[0]) - 1.0).abs() < 1e-14);
    }
}
