//! Spectral verdicts from boundary limits: pointwise classification, pole location,
//! eigenspaces through normal-derivative traces, AC supports, the SC screen and purity.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{BoundaryVector, DirichletOperator, EigenSystem};
use crate::dtn::ShiftedResolvent;
use crate::limits::{
    auto_radius, chebyshev_fit_misfit, point_regularity, probe_limits, residue_contour, AnalyticityReport, EtaPolicy,
    LimitMode, ProbeLimits, ResidueMatrix, Thresholds,
};
use crate::{c64, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ResolventSet,
    Eigenvalue,
    ContinuousSpectrum,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::ResolventSet => "resolvent",
            Verdict::Eigenvalue => "eigenvalue",
            Verdict::ContinuousSpectrum => "continuous",
        }
    }
}

/// Knobs of the classifier.
#[derive(Debug, Clone)]
pub struct ClassifyConfig {
    pub policy: EtaPolicy,
    pub thresholds: Thresholds,
    pub probes: Vec<BoundaryVector>,
    pub contour_nodes: usize,
    /// Starting half-width of the analyticity window.
    pub half_width: f64,
    /// Halvings of the analyticity window before giving up.
    pub max_shrinks: usize,
    /// Relative singular-value cutoff for residue ranks.
    pub rank_rel: f64,
}

impl ClassifyConfig {
    pub fn new(op: &DirichletOperator, half_width: f64) -> Self {
        Self {
            policy: EtaPolicy::default(),
            thresholds: Thresholds::default(),
            probes: basis_probes(op),
            contour_nodes: 64,
            half_width,
            max_shrinks: 40,
            rank_rel: 1e-8,
        }
    }
}

/// Unit vectors of the boundary basis.
pub fn basis_probes(op: &DirichletOperator) -> Vec<BoundaryVector> {
    let dom = op.domain();
    (0..dom.n_boundary()).map(|k| BoundaryVector::unit(dom, k)).collect()
}

/// Residue attached to an eigenvalue verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleEvidence {
    /// Refined pole location.
    pub location: f64,
    pub radius: f64,
    pub multiplicity: usize,
    /// Residue rows.
    pub residue: Vec<Vec<C64>>,
    /// Orthonormal basis of the residue range (columns stored as rows).
    pub tau_basis: Vec<Vec<C64>>,
    pub hermitian_defect: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointVerdict {
    pub x: f64,
    pub verdict: Verdict,
    pub spacing: f64,
    pub floored: bool,
    pub probes: Vec<ProbeLimits>,
    pub analyticity: Option<AnalyticityReport>,
    pub pole: Option<PoleEvidence>,
}

impl PointVerdict {
    pub fn multiplicity(&self) -> Option<usize> {
        self.pole.as_ref().map(|p| p.multiplicity)
    }
}

fn matrix_rows(m: &DMatrix<C64>) -> Vec<Vec<C64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix_cols(m: &DMatrix<C64>) -> Vec<Vec<C64>> {
    m.column_iter().map(|c| c.iter().copied().collect()).collect()
}

/// Rebuilds a matrix from rows.
pub fn rows_to_matrix(rows: &[Vec<C64>]) -> DMatrix<C64> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(n, m, |i, j| rows[i][j])
}

fn inconclusive(x: f64, reason: impl Into<String>) -> Error {
    Error::Inconclusive { x, reason: reason.into() }
}

/// `(M(x) g, g)` and `‖γ(x) g‖²` on the real axis.
fn real_form(op: &DirichletOperator, x: f64, g: &BoundaryVector) -> Result<(f64, f64)> {
    form_with(ShiftedResolvent::new(op, c64(x, 0.0))?, g)
}

fn form_with(r: ShiftedResolvent<'_>, g: &BoundaryVector) -> Result<(f64, f64)> {
    let op = r.operator();
    let dom = op.domain();
    let (u, mg) = r.poisson_and_dtn(g);
    Ok((dom.boundary_inner(&mg, g).re, dom.interior_norm(&u).powi(2)))
}

/// Newton iteration on `1 / (M(x) g, g)` started at `x0`, kept inside `[lo, hi]`.
pub fn refine_pole(op: &DirichletOperator, x0: f64, g: &BoundaryVector, lo: f64, hi: f64) -> f64 {
    let mut x = x0;
    for _ in 0..100 {
        let (m, d) = match ShiftedResolvent::unchecked(op, c64(x, 0.0)).and_then(|r| form_with(r, g)) {
            Ok(v) => v,
            Err(_) => return x,
        };
        if d == 0.0 {
            return x;
        }
        let next = (x - m / d).clamp(lo, hi);
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            return next;
        }
        x = next;
    }
    x
}

pub fn classify_point(op: &DirichletOperator, x: f64, cfg: &ClassifyConfig) -> Result<PointVerdict> {
    let th = &cfg.thresholds;
    let local = cfg.policy.at(op, x);
    let probes = cfg
        .probes
        .iter()
        .map(|g| probe_limits(op, x, g, &local, th))
        .collect::<Result<Vec<_>>>()?;
    if let Some(p) = probes.iter().find(|p| !p.slim.converged) {
        return Err(inconclusive(
            x,
            format!("s-lim did not settle (error {:e} > {:e})", p.slim.error, p.slim.tolerance),
        ));
    }
    let mut verdict = PointVerdict {
        x,
        verdict: Verdict::ResolventSet,
        spacing: local.spacing,
        floored: local.floored,
        probes,
        analyticity: None,
        pole: None,
    };
    let strongest = verdict
        .probes
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.slim_vanishes())
        .max_by(|a, b| (a.1.slim.norm() / a.1.slim_threshold).total_cmp(&(b.1.slim.norm() / b.1.slim_threshold)))
        .map(|(k, _)| k);
    if let Some(k) = strongest {
        let location = if local.floored {
            x
        } else {
            refine_pole(op, x, &cfg.probes[k], x - local.spacing, x + local.spacing)
        };
        let radius = auto_radius(op, location, local.spacing);
        let res = residue_contour(op, location, radius, cfg.contour_nodes)?;
        let multiplicity = res.rank(cfg.rank_rel);
        if multiplicity == 0 {
            return Err(inconclusive(x, "s-lim is nonzero but the contour residue vanishes"));
        }
        verdict.verdict = Verdict::Eigenvalue;
        verdict.pole = Some(pole_evidence(&res, multiplicity, cfg.rank_rel));
        return Ok(verdict);
    }
    if let Some(p) = verdict.probes.iter().find(|p| !p.boundary.estimate.converged && !p.boundary.diverges) {
        return Err(inconclusive(
            x,
            format!("boundary value did not settle (error {:e})", p.boundary.estimate.error),
        ));
    }
    let centre_imag = verdict.probes.iter().all(|p| p.imag_vanishes(th));
    let mut report = AnalyticityReport {
        x,
        half_width: cfg.half_width,
        slim_vanishes: true,
        imag_vanishes: centre_imag,
        fit_misfit: None,
        analytic: false,
    };
    if centre_imag {
        let mut w = cfg.half_width;
        for _ in 0..=cfg.max_shrinks {
            report = window_analyticity(op, x, w, cfg)?;
            if report.analytic {
                break;
            }
            w *= 0.5;
        }
    }
    verdict.verdict = if report.analytic {
        Verdict::ResolventSet
    } else {
        Verdict::ContinuousSpectrum
    };
    verdict.analyticity = Some(report);
    Ok(verdict)
}

/// Endpoint checks plus the polynomial fit; the centre is checked by the caller.
fn window_analyticity(op: &DirichletOperator, x: f64, w: f64, cfg: &ClassifyConfig) -> Result<AnalyticityReport> {
    let mut slim_ok = true;
    let mut imag_ok = true;
    for t in [x - w, x + w] {
        let (s, i) = point_regularity(op, t, &cfg.probes, &cfg.policy, &cfg.thresholds)?;
        slim_ok &= s;
        imag_ok &= i;
    }
    let fit_misfit = if slim_ok && imag_ok {
        chebyshev_fit_misfit(op, x, w, &cfg.probes)
    } else {
        None
    };
    Ok(AnalyticityReport {
        x,
        half_width: w,
        slim_vanishes: slim_ok,
        imag_vanishes: imag_ok,
        fit_misfit,
        analytic: slim_ok && imag_ok && fit_misfit.is_some_and(|m| m <= cfg.thresholds.analyticity_misfit),
    })
}

fn pole_evidence(res: &ResidueMatrix, multiplicity: usize, rank_rel: f64) -> PoleEvidence {
    PoleEvidence {
        location: res.lambda0,
        radius: res.radius,
        multiplicity,
        residue: matrix_rows(&res.r),
        tau_basis: matrix_cols(&res.range_basis(rank_rel)),
        hermitian_defect: res.hermitian_defect(),
        min_eigenvalue: res.min_eigenvalue(),
    }
}

/// Poles of `(M(x) g, g)` in `[lo, hi]` located from upward jumps on the grid, bisection
/// and a Newton polish.
pub fn locate_poles(op: &DirichletOperator, grid: &[f64], g: &BoundaryVector) -> Vec<f64> {
    let forms: Vec<Option<f64>> = grid.iter().map(|&x| real_form(op, x, g).ok().map(|v| v.0)).collect();
    let mut poles = Vec::new();
    for (i, &x) in grid.iter().enumerate() {
        if forms[i].is_none() {
            poles.push(x);
        }
    }
    for i in 0..grid.len().saturating_sub(1) {
        if let (Some(ma), Some(mb)) = (forms[i], forms[i + 1]) {
            if mb > ma {
                poles_in_bracket(op, g, grid[i], ma, grid[i + 1], mb, 0, &mut poles);
            }
        }
    }
    poles.sort_by(f64::total_cmp);
    dedup_close(&mut poles);
    poles
}

fn dedup_close(xs: &mut Vec<f64>) {
    xs.dedup_by(|b, a| (*b - *a).abs() <= 1e-8 * a.abs().max(1.0));
}

/// Requires `mb > ma`, which forces a pole in `(a, b)` because the form decreases between poles.
#[allow(clippy::too_many_arguments)]
fn poles_in_bracket(
    op: &DirichletOperator,
    g: &BoundaryVector,
    mut a: f64,
    mut ma: f64,
    mut b: f64,
    mut mb: f64,
    depth: usize,
    out: &mut Vec<f64>,
) {
    let (a0, ma0, b0, mb0) = (a, ma, b, mb);
    let mut hit = None;
    for _ in 0..200 {
        if b - a <= 1e-12 * a.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (a + b);
        match real_form(op, mid, g) {
            Ok((mm, _)) => {
                if mm > ma {
                    b = mid;
                    mb = mm;
                } else {
                    a = mid;
                    ma = mm;
                }
            }
            Err(_) => {
                hit = Some(mid);
                break;
            }
        }
    }
    let _ = mb;
    let p = refine_pole(op, hit.unwrap_or(0.5 * (a + b)), g, a, b);
    out.push(p);
    if depth >= 8 {
        return;
    }
    let delta = 1e-6 * (b0 - a0);
    if p - delta > a0 {
        if let Ok((ml, _)) = real_form(op, p - delta, g) {
            if ml > ma0 {
                poles_in_bracket(op, g, a0, ma0, p - delta, ml, depth + 1, out);
            }
        }
    }
    if p + delta < b0 {
        if let Ok((mr, _)) = real_form(op, p + delta, g) {
            if mb0 > mr {
                poles_in_bracket(op, g, p + delta, mr, b0, mb0, depth + 1, out);
            }
        }
    }
}

/// Eigenspace recovered through normal-derivative traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauReport {
    pub lambda0: f64,
    pub multiplicity: usize,
    /// `τu` for each oracle eigenvector.
    pub tau_vectors: Vec<Vec<C64>>,
    pub gram_singular_values: Vec<f64>,
    pub injective: bool,
    pub residue_rank: usize,
    /// Sines of the principal angles between `span{τu}` and the residue range.
    pub angle_sines: Vec<f64>,
    pub range_match: bool,
}

/// Minimum ratio `σ_min / σ_max` for the τ-Gram matrix to count as nonsingular.
pub const TAU_GRAM_MIN: f64 = 1e-8;
pub const TAU_ANGLE_MAX: f64 = 1e-6;

fn orthonormal_range(m: &DMatrix<C64>, rel: f64) -> DMatrix<C64> {
    if m.ncols() == 0 {
        return m.clone();
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors");
    let smax = svd.singular_values.max();
    let cols: Vec<_> = (0..svd.singular_values.len())
        .filter(|&k| smax > 0.0 && svd.singular_values[k] > rel * smax)
        .map(|k| u.column(k).clone_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(m.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Principal-angle sines between the column spans of two orthonormal bases; returns ones
/// for the missing directions when the dimensions differ.
pub fn principal_angle_sines(q1: &DMatrix<C64>, q2: &DMatrix<C64>) -> Vec<f64> {
    let n = q1.nrows();
    let k = q1.ncols().max(q2.ncols());
    if q1.ncols() == 0 || q2.ncols() == 0 {
        return vec![1.0; k];
    }
    let proj = DMatrix::<C64>::identity(n, n) - q2 * q2.adjoint();
    let mut s: Vec<f64> = (proj * q1).singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    while s.len() < k {
        s.insert(0, 1.0);
    }
    s
}

pub fn eigenspace_via_tau(op: &DirichletOperator, lambda0: f64, eig: &EigenSystem) -> Result<TauReport> {
    let tol = eig.tolerance().max(1e-6 * lambda0.abs().max(1.0));
    let group = eig.group_at(lambda0, tol).ok_or(Error::NotAnEigenvalue(lambda0))?;
    let dom = op.domain();
    let zero = BoundaryVector::zeros(dom);
    let taus: Vec<DVector<C64>> = group
        .clone()
        .map(|k| {
            let u = eig.vector(k);
            crate::dtn::normal_derivative(dom, &zero, &u).map(|v| v.0)
        })
        .collect::<Result<_>>()?;
    let t = DMatrix::from_columns(&taus);
    let gram = t.adjoint() * &t * c64(dom.boundary_weight(), 0.0);
    let gsv: Vec<f64> = gram.singular_values().iter().copied().collect();
    let gmax = gsv.iter().copied().fold(0.0, f64::max);
    let gmin = gsv.iter().copied().fold(f64::INFINITY, f64::min);
    let injective = gmax > 0.0 && gmin / gmax > TAU_GRAM_MIN;

    let centre = eig.values()[group.clone()].iter().sum::<f64>() / group.len() as f64;
    let spacing = crate::limits::level_spacing(op, centre, 0.25);
    let radius = auto_radius(op, centre, spacing);
    let res = residue_contour(op, centre, radius, 64)?;
    let residue_rank = res.rank(1e-8);
    let q2 = res.range_basis(1e-8);
    let q1 = orthonormal_range(&t, 1e-8);
    let angle_sines = principal_angle_sines(&q1, &q2);
    let range_match = !angle_sines.is_empty() && angle_sines.iter().all(|&s| s <= TAU_ANGLE_MAX);
    Ok(TauReport {
        lambda0: centre,
        multiplicity: group.len(),
        tau_vectors: taus.iter().map(|v| v.iter().copied().collect()).collect(),
        gram_singular_values: gsv,
        injective,
        residue_rank,
        angle_sines,
        range_match,
    })
}

/// Closed real interval; `lo == hi` is a single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn is_degenerate(&self) -> bool {
        self.hi <= self.lo
    }
}

/// Finite union of disjoint sorted closed intervals.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GridSet {
    pub intervals: Vec<Interval>,
}

impl GridSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Runs of consecutive flagged grid points, each as `[first, last]`.
    pub fn from_flags(grid: &[f64], flags: &[bool]) -> Self {
        let mut intervals = Vec::new();
        let mut start: Option<usize> = None;
        for i in 0..=grid.len() {
            let on = i < grid.len() && flags[i];
            match (on, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    intervals.push(Interval { lo: grid[s], hi: grid[i - 1] });
                    start = None;
                }
                _ => {}
            }
        }
        Self { intervals }
    }

    /// Sorted, merged union of arbitrary intervals (touching ones are joined).
    pub fn from_intervals(mut v: Vec<Interval>) -> Self {
        v.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut out: Vec<Interval> = Vec::with_capacity(v.len());
        for iv in v {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => out.push(iv),
            }
        }
        Self { intervals: out }
    }

    pub fn union(sets: &[GridSet]) -> Self {
        Self::from_intervals(sets.iter().flat_map(|s| s.intervals.iter().copied()).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|i| i.hi - i.lo).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|i| i.lo <= x && x <= i.hi)
    }

    pub fn has_nondegenerate(&self) -> bool {
        self.intervals.iter().any(|i| !i.is_degenerate())
    }
}

/// Drops zero-length pieces and merges what is left.
pub fn essential_closure(s: &GridSet) -> GridSet {
    GridSet::from_intervals(s.intervals.iter().copied().filter(|i| !i.is_degenerate()).collect())
}

/// Uniform grid `lower, lower + step, ..., upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub lower: f64,
    pub upper: f64,
    pub step: f64,
}

impl Window {
    pub fn new(lower: f64, upper: f64, step: f64) -> Result<Self> {
        if !(lower < upper && step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "window needs lower < upper and step > 0, got ({lower}, {upper}) step {step}"
            )));
        }
        Ok(Self { lower, upper, step })
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.upper - self.lower) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.lower + i as f64 * self.step).collect()
    }
}

/// Classified grid point, or the reason it could not be classified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PointOutcome {
    Classified(PointVerdict),
    Inconclusive { x: f64, reason: String },
}

impl PointOutcome {
    fn from_result(x: f64, r: Result<PointVerdict>) -> Self {
        match r {
            Ok(v) => PointOutcome::Classified(v),
            Err(Error::Inconclusive { reason, .. }) => PointOutcome::Inconclusive { x, reason },
            Err(e) => PointOutcome::Inconclusive { x, reason: e.to_string() },
        }
    }

    pub fn x(&self) -> f64 {
        match self {
            PointOutcome::Classified(v) => v.x,
            PointOutcome::Inconclusive { x, .. } => *x,
        }
    }

    pub fn verdict(&self) -> Option<&PointVerdict> {
        match self {
            PointOutcome::Classified(v) => Some(v),
            PointOutcome::Inconclusive { .. } => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            PointOutcome::Classified(v) => v.verdict.label(),
            PointOutcome::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// Everything the windowed analyses need, computed once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowScan {
    pub window: Window,
    pub grid: Vec<f64>,
    pub points: Vec<PointOutcome>,
    /// Classification at each located pole.
    pub poles: Vec<PointOutcome>,
}

pub fn scan_window(op: &DirichletOperator, window: &Window, cfg: &ClassifyConfig) -> WindowScan {
    let grid = window.grid();
    let points: Vec<PointOutcome> = grid
        .par_iter()
        .map(|&x| PointOutcome::from_result(x, classify_point(op, x, cfg)))
        .collect();
    let mut locations: Vec<f64> = Vec::new();
    if cfg.policy.mode == LimitMode::Finite {
        let per_probe: Vec<Vec<f64>> = cfg.probes.par_iter().map(|g| locate_poles(op, &grid, g)).collect();
        locations = per_probe.into_iter().flatten().collect();
        locations.sort_by(f64::total_cmp);
        dedup_close(&mut locations);
    }
    let mut poles: Vec<PointOutcome> = locations
        .par_iter()
        .map(|&p| PointOutcome::from_result(p, classify_point(op, p, cfg)))
        .collect();
    // Different probes can converge onto the same pole from different sides.
    poles.dedup_by(|b, a| match (a.verdict().and_then(|v| v.pole.as_ref()), b.verdict().and_then(|v| v.pole.as_ref())) {
        (Some(pa), Some(pb)) => (pa.location - pb.location).abs() <= 1e-8 * pa.location.abs().max(1.0),
        _ => false,
    });
    WindowScan {
        window: *window,
        grid,
        points,
        poles,
    }
}

impl WindowScan {
    fn first_inconclusive(&self) -> Option<Error> {
        self.points.iter().find_map(|p| match p {
            PointOutcome::Inconclusive { x, reason } => Some(inconclusive(*x, reason.clone())),
            _ => None,
        })
    }

    fn classified(&self) -> Result<Vec<&PointVerdict>> {
        if let Some(e) = self.first_inconclusive() {
            return Err(e);
        }
        Ok(self.points.iter().filter_map(|p| p.verdict()).collect())
    }

    /// Refined locations of confirmed eigenvalues (from located poles and grid hits).
    pub fn eigenvalues(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = self
            .poles
            .iter()
            .chain(&self.points)
            .filter_map(|p| p.verdict())
            .filter_map(|v| v.pole.as_ref().map(|p| (p.location, p.multiplicity)))
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out.dedup_by(|b, a| (b.0 - a.0).abs() <= 1e-8 * a.0.abs().max(1.0));
        out
    }

    pub fn ac_support(&self, th: &Thresholds) -> Result<ACSupportSet> {
        let pts = self.classified()?;
        let n_probes = pts.first().map_or(0, |p| p.probes.len());
        let mut per_probe = Vec::with_capacity(n_probes);
        for j in 0..n_probes {
            let flags: Vec<bool> = pts.iter().map(|p| p.probes[j].in_ac_band(th)).collect();
            per_probe.push(GridSet::from_flags(&self.grid, &flags));
        }
        let closures: Vec<GridSet> = per_probe.iter().map(essential_closure).collect();
        let union = GridSet::union(&closures);
        let nonnull: Vec<bool> = pts
            .iter()
            .map(|p| p.probes.iter().any(|q| !q.imag_vanishes(th)))
            .collect();
        let runs = GridSet::from_flags(&self.grid, &nonnull);
        let in_runs = self
            .grid
            .iter()
            .zip(&nonnull)
            .filter(|(&x, &f)| f && runs.intervals.iter().any(|i| !i.is_degenerate() && i.lo <= x && x <= i.hi))
            .count();
        let null_fraction = in_runs as f64 / self.grid.len().max(1) as f64;
        Ok(ACSupportSet {
            per_probe,
            closures,
            union,
            nonnull_fraction: null_fraction,
            ac_free: null_fraction <= th.null_fraction,
        })
    }

    pub fn sc_screen(&self, op: &DirichletOperator, probes: &[BoundaryVector]) -> Result<SCReport> {
        let pts = self.classified()?;
        let mut rows = Vec::new();
        let mut flags = vec![false; self.grid.len()];
        for (i, p) in pts.iter().enumerate() {
            for (j, q) in p.probes.iter().enumerate() {
                let diverges = q.boundary.diverges;
                let vanishes = q.eta_form_vanishes(op, &probes[j]);
                flags[i] |= diverges && vanishes;
                rows.push(SCFlag {
                    x: p.x,
                    probe: j,
                    diverges,
                    eta_form_vanishes: vanishes,
                });
            }
        }
        let flagged = GridSet::from_flags(&self.grid, &flags);
        let excluded = !flagged.has_nondegenerate();
        Ok(SCReport {
            flags: rows,
            flagged,
            excluded,
            note: "grid points stand in for the countable exceptional set; isolated flags are tolerated".into(),
        })
    }

    pub fn purity(&self, op: &DirichletOperator, probes: &[BoundaryVector], th: &Thresholds) -> Result<PurityReport> {
        let pts = self.classified()?;
        let mut offending: Vec<f64> = pts
            .iter()
            .filter(|p| p.probes.iter().any(|q| !q.slim_vanishes()))
            .map(|p| p.x)
            .collect();
        offending.extend(self.eigenvalues().iter().map(|e| e.0));
        offending.sort_by(f64::total_cmp);
        dedup_close(&mut offending);
        if !offending.is_empty() {
            return Ok(PurityReport {
                purity: Purity::MixedUnknown,
                offending,
            });
        }
        let purity = if pts.iter().all(|p| p.verdict == Verdict::ResolventSet) {
            Purity::NoSpectrum
        } else {
            let ac = self.ac_support(th)?;
            let sc = self.sc_screen(op, probes)?;
            let divergence_flags: Vec<bool> = pts.iter().map(|p| p.probes.iter().any(|q| q.boundary.diverges)).collect();
            let divergence_isolated = !GridSet::from_flags(&self.grid, &divergence_flags).has_nondegenerate();
            let covered = pts
                .iter()
                .filter(|p| p.verdict != Verdict::ResolventSet)
                .all(|p| ac.union.contains(p.x));
            if divergence_isolated && sc.excluded && covered && !ac.union.is_empty() {
                Purity::PureAC
            } else if ac.ac_free {
                Purity::PureSC
            } else {
                Purity::MixedUnknown
            }
        };
        Ok(PurityReport {
            purity,
            offending,
        })
    }
}

/// AC support estimate over a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ACSupportSet {
    pub per_probe: Vec<GridSet>,
    pub closures: Vec<GridSet>,
    pub union: GridSet,
    /// Fraction of grid points in nondegenerate runs where `Im M(x + i0) ≠ 0`.
    pub nonnull_fraction: f64,
    pub ac_free: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SCFlag {
    pub x: f64,
    pub probe: usize,
    pub diverges: bool,
    pub eta_form_vanishes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SCReport {
    pub flags: Vec<SCFlag>,
    /// Grid points where both flags hold for some probe.
    pub flagged: GridSet,
    /// No nondegenerate run of flagged points.
    pub excluded: bool,
    pub note: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purity {
    PureAC,
    PureSC,
    NoSpectrum,
    MixedUnknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurityReport {
    pub purity: Purity,
    /// Points where `η M(x + iη)` does not vanish.
    pub offending: Vec<f64>,
}

pub fn ac_support(op: &DirichletOperator, window: &Window, cfg: &ClassifyConfig) -> Result<ACSupportSet> {
    scan_window(op, window, cfg).ac_support(&cfg.thresholds)
}

pub fn sc_screen(op: &DirichletOperator, window: &Window, cfg: &ClassifyConfig) -> Result<SCReport> {
    scan_window(op, window, cfg).sc_screen(op, &cfg.probes)
}

pub fn purity_filter(op: &DirichletOperator, window: &Window, cfg: &ClassifyConfig) -> Result<PurityReport> {
    scan_window(op, window, cfg).purity(op, &cfg.probes, &cfg.thresholds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{assemble_operator, build_domain, oracle_eigendecomposition, DomainSpec, PotentialField};
    use approx::assert_relative_eq;

    fn t1() -> DirichletOperator {
        let dom = build_domain(&DomainSpec::HalfLine1d { h: 1.0, length: 3.0 }).unwrap();
        assemble_operator(&dom, &PotentialField::zero(&dom)).unwrap()
    }

    #[test]
    fn t1_point_verdicts() {
        let op = t1();
        let cfg = ClassifyConfig::new(&op, 0.05);
        let v = classify_point(&op, 1.0, &cfg).unwrap();
        assert_eq!(v.verdict, Verdict::Eigenvalue);
        assert_eq!(v.multiplicity(), Some(1));
        assert_relative_eq!(v.pole.as_ref().unwrap().location, 1.0, epsilon = 1e-10);
        let v = classify_point(&op, 2.0, &cfg).unwrap();
        assert_eq!(v.verdict, Verdict::ResolventSet);
        assert!(v.analyticity.unwrap().analytic);
    }

    #[test]
    fn grid_point_near_a_pole_is_resolvent() {
        let op = t1();
        let cfg = ClassifyConfig::new(&op, 0.05);
        for x in [1.0 + 1e-3, 1.0 - 3e-5, 2.999] {
            let v = classify_point(&op, x, &cfg).unwrap();
            assert_eq!(v.verdict, Verdict::ResolventSet, "x = {x}");
        }
    }

    #[test]
    fn poles_are_located_between_grid_points() {
        let op = t1();
        let grid: Vec<f64> = (0..=16).map(|i| 0.13 + 0.25 * i as f64).collect();
        let g = BoundaryVector::unit(op.domain(), 0);
        let poles = locate_poles(&op, &grid, &g);
        assert_eq!(poles.len(), 2);
        assert!((poles[0] - 1.0).abs() < 1e-10 && (poles[1] - 3.0).abs() < 1e-10, "{poles:?}");
    }

    #[test]
    fn t1_tau_bijection() {
        let op = t1();
        let eig = oracle_eigendecomposition(&op);
        let rep = eigenspace_via_tau(&op, 1.0, &eig).unwrap();
        assert_relative_eq!(rep.tau_vectors[0][0].re, -1.0 / 2f64.sqrt(), epsilon = 1e-14);
        assert!(rep.injective && rep.range_match);
        assert!(rep.angle_sines[0] < 1e-12);
        assert!(matches!(eigenspace_via_tau(&op, 2.0, &eig), Err(Error::NotAnEigenvalue(_))));
    }

    fn set(iv: &[(f64, f64)]) -> GridSet {
        GridSet {
            intervals: iv.iter().map(|&(lo, hi)| Interval { lo, hi }).collect(),
        }
    }

    #[test]
    fn essential_closure_cases() {
        assert!(essential_closure(&set(&[(2.0, 2.0)])).is_empty());
        assert_eq!(essential_closure(&set(&[(0.0, 1.0), (2.0, 2.0)])), set(&[(0.0, 1.0)]));
        assert_eq!(essential_closure(&set(&[(0.0, 1.0), (1.0, 2.0)])), set(&[(0.0, 2.0)]));
        let s = set(&[(0.0, 1.0), (1.5, 1.5), (1.0, 1.2), (3.0, 4.0)]);
        let once = essential_closure(&s);
        assert_eq!(essential_closure(&once), once);
    }

    #[test]
    fn flags_to_runs() {
        let grid = [0.0, 1.0, 2.0, 3.0, 4.0];
        let s = GridSet::from_flags(&grid, &[true, true, false, true, false]);
        assert_eq!(s, set(&[(0.0, 1.0), (3.0, 3.0)]));
    }

    #[test]
    fn t1_windows() {
        let op = t1();
        let cfg = ClassifyConfig::new(&op, 0.05);
        let win = Window::new(0.0, 4.0, 0.1).unwrap();
        let scan = scan_window(&op, &win, &cfg);
        let eigs = scan.eigenvalues();
        assert_eq!(eigs.len(), 2, "{eigs:?}");
        assert!(scan.ac_support(&cfg.thresholds).unwrap().union.is_empty());
        assert!(scan.sc_screen(&op, &cfg.probes).unwrap().excluded);
        let mixed = purity_filter(&op, &Window::new(0.5, 1.5, 0.1).unwrap(), &cfg).unwrap();
        assert_eq!(mixed.purity, Purity::MixedUnknown);
        let gap = purity_filter(&op, &Window::new(1.5, 2.5, 0.1).unwrap(), &cfg).unwrap();
        assert_eq!(gap.purity, Purity::NoSpectrum);
    }
}
