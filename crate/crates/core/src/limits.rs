//! `η ↘ 0` limits of the DtN map, contour residues and the analytic-continuation test.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{BoundaryVector, DirichletOperator};
use crate::dtn::ShiftedResolvent;
use crate::{c64, Error, Result, C64};

/// Geometric sample set `η_k = η₀ r^k`, `k < count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaSchedule {
    pub eta0: f64,
    pub ratio: f64,
    pub count: usize,
}

impl EtaSchedule {
    pub fn new(eta0: f64, ratio: f64, count: usize) -> Result<Self> {
        if !(eta0.is_finite() && eta0 > 0.0) {
            return Err(Error::InvalidArgument(format!("eta0 must be positive, got {eta0}")));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidArgument(format!("eta ratio must lie in (0, 1), got {ratio}")));
        }
        if count < 3 {
            return Err(Error::InvalidArgument(format!("need at least 3 eta samples, got {count}")));
        }
        let s = Self { eta0, ratio, count };
        if s.eta(count - 1) <= 0.0 {
            return Err(Error::InvalidArgument("smallest eta underflows".into()));
        }
        Ok(s)
    }

    pub fn eta(&self, k: usize) -> f64 {
        self.eta0 * self.ratio.powi(k as i32)
    }

    pub fn samples(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.eta(k)).collect()
    }

    pub fn smallest(&self) -> f64 {
        self.eta(self.count - 1)
    }
}

/// Whether dense level clusters are treated as a continuum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LimitMode {
    /// Every level is an isolated pole; `η` goes well below the level spacing.
    #[default]
    Finite,
    /// Where levels are dense, `η` stays above a multiple of the local spacing.
    Continuum,
}

/// Anything that can count spectral points in `[lo, hi)`.
pub trait SpectralCounter {
    fn count_in(&self, lo: f64, hi: f64) -> usize;
}

impl SpectralCounter for DirichletOperator {
    fn count_in(&self, lo: f64, hi: f64) -> usize {
        DirichletOperator::count_in(self, lo, hi)
    }
}

/// Rule that turns a position `x` into an η-schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EtaPolicy {
    pub mode: LimitMode,
    /// Fixed first sample; `None` means `0.1 ×` the local level spacing.
    pub eta0: Option<f64>,
    pub ratio: f64,
    pub count: usize,
    /// Continuum floor in units of the local spacing.
    pub floor_factor: f64,
    pub continuum_count: usize,
    pub continuum_ratio: f64,
    /// Half-width of the window used to count levels around `x`.
    pub spacing_window: f64,
    /// Minimum level count in the window for the continuum floor to apply.
    pub dense_count: usize,
    /// Extra halvings allowed when a finite-mode limit has not settled.
    pub max_extension: usize,
}

impl Default for EtaPolicy {
    fn default() -> Self {
        Self {
            mode: LimitMode::Finite,
            eta0: None,
            ratio: 0.5,
            count: 8,
            floor_factor: 5.0,
            continuum_count: 4,
            continuum_ratio: 1.0 / 1.5,
            spacing_window: 0.25,
            dense_count: 3,
            max_extension: 24,
        }
    }
}

/// Schedule chosen at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalSchedule {
    pub schedule: EtaSchedule,
    pub spacing: f64,
    /// True when the continuum floor is in force.
    pub floored: bool,
    pub max_extension: usize,
}

/// `2W / max(N, 1)` with `N` the level count in `[x - W, x + W)`.
pub fn level_spacing<S: SpectralCounter + ?Sized>(counter: &S, x: f64, half_window: f64) -> f64 {
    let n = counter.count_in(x - half_window, x + half_window);
    2.0 * half_window / n.max(1) as f64
}

impl EtaPolicy {
    pub fn at<S: SpectralCounter + ?Sized>(&self, counter: &S, x: f64) -> LocalSchedule {
        let w = self.spacing_window;
        let n = counter.count_in(x - w, x + w);
        let spacing = 2.0 * w / n.max(1) as f64;
        if self.mode == LimitMode::Continuum && n >= self.dense_count {
            let floor = self.floor_factor * spacing;
            let top = floor / self.continuum_ratio.powi(self.continuum_count as i32 - 1);
            return LocalSchedule {
                schedule: EtaSchedule {
                    eta0: top,
                    ratio: self.continuum_ratio,
                    count: self.continuum_count,
                },
                spacing,
                floored: true,
                max_extension: 0,
            };
        }
        LocalSchedule {
            schedule: EtaSchedule {
                eta0: self.eta0.unwrap_or(0.1 * spacing),
                ratio: self.ratio,
                count: self.count,
            },
            spacing,
            floored: false,
            max_extension: self.max_extension,
        }
    }
}

/// Decision thresholds shared by the limit and classification layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// `τ_eig` relative to `‖M(x + iη₀) g‖`.
    pub eig_rel: f64,
    /// `τ_ac`: band `(τ_ac, 1/τ_ac)` for `-Im` of a boundary value.
    pub ac_band: f64,
    /// Grid fraction tolerated as a null set.
    pub null_fraction: f64,
    /// Relative convergence tolerance for finite-mode extrapolation.
    pub limit_tol: f64,
    pub analyticity_misfit: f64,
    /// Relative tolerance used when the continuum floor is in force.
    pub continuum_rel: f64,
    /// `|Im|` growth factor that counts as divergence.
    pub divergence_ratio: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            eig_rel: 1e-6,
            ac_band: 1e-6,
            null_fraction: 0.01,
            limit_tol: 1e-8,
            analyticity_misfit: 1e-3,
            continuum_rel: 0.1,
            divergence_ratio: 1e3,
        }
    }
}

impl Thresholds {
    /// Absolute tolerance for a limit whose samples have magnitude `scale`.
    pub fn limit_tolerance(&self, scale: f64, floored: bool) -> f64 {
        let rel = if floored { self.continuum_rel } else { self.limit_tol };
        rel * scale.max(f64::MIN_POSITIVE)
    }
}

fn vec_dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn vec_norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Richardson extrapolation to `η = 0` of samples taken at `η₀ r^k`, with the error estimate
/// of the best tableau entry.
pub fn richardson(samples: &[Vec<C64>], ratio: f64) -> (Vec<C64>, f64) {
    let n = samples.len();
    assert!(n > 0, "richardson needs samples");
    let mut prev: Vec<Vec<C64>> = vec![samples[0].clone()];
    let mut best = samples[0].clone();
    let mut best_err = f64::INFINITY;
    for k in 1..n {
        let mut row: Vec<Vec<C64>> = vec![samples[k].clone()];
        for j in 1..=k {
            let rj = ratio.powi(j as i32);
            let v: Vec<C64> = row[j - 1]
                .iter()
                .zip(&prev[j - 1])
                .map(|(a, b)| (a - b * rj) / (1.0 - rj))
                .collect();
            let err = vec_dist(&v, &row[j - 1]).max(vec_dist(&v, &prev[j - 1]));
            if err <= best_err {
                best_err = err;
                best = v.clone();
            }
            row.push(v);
        }
        prev = row;
    }
    if n == 1 {
        best_err = f64::INFINITY;
    }
    (best, best_err)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSample {
    pub eta: f64,
    pub value: Vec<C64>,
}

/// Extrapolated `η ↘ 0` limit with its error estimate and raw samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub value: Vec<C64>,
    pub error: f64,
    pub tolerance: f64,
    pub converged: bool,
    pub samples: Vec<LimitSample>,
}

impl LimitEstimate {
    fn from_samples(samples: Vec<LimitSample>, ratio: f64, tolerance: f64) -> Self {
        let vals: Vec<Vec<C64>> = samples.iter().map(|s| s.value.clone()).collect();
        let (value, error) = richardson(&vals, ratio);
        Self {
            value,
            error,
            tolerance,
            converged: error <= tolerance,
            samples,
        }
    }

    pub fn norm(&self) -> f64 {
        vec_norm(&self.value)
    }

    /// First component, for scalar limits.
    pub fn scalar(&self) -> C64 {
        self.value[0]
    }

    /// Largest sample magnitude.
    pub fn sample_scale(&self) -> f64 {
        self.samples.iter().map(|s| vec_norm(&s.value)).fold(0.0, f64::max)
    }
}

/// Boundary value `(M(x + i0) g, g)` with the divergence flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryValue {
    pub estimate: LimitEstimate,
    /// `|Im m(x + iη_div)| / |Im m(x + iη₀)|`, saturating at `f64::MAX`.
    pub divergence_ratio: f64,
    pub divergence_eta: f64,
    /// `Im → -∞` by the ratio test.
    pub diverges: bool,
}

impl BoundaryValue {
    pub fn value(&self) -> C64 {
        self.estimate.scalar()
    }
}

fn dtn_at(op: &DirichletOperator, z: C64, g: &DVector<C64>) -> Result<DVector<C64>> {
    Ok(ShiftedResolvent::new(op, z)?.dtn_apply(g))
}

fn slim_from(samples: &[(f64, DVector<C64>)], ratio: f64, tol_of: impl Fn(f64) -> f64) -> LimitEstimate {
    let s: Vec<LimitSample> = samples
        .iter()
        .map(|(eta, mg)| LimitSample {
            eta: *eta,
            value: mg.iter().map(|v| v * *eta).collect(),
        })
        .collect();
    let scale = s.iter().map(|x| vec_norm(&x.value)).fold(0.0, f64::max);
    LimitEstimate::from_samples(s, ratio, tol_of(scale))
}

fn form_from(
    op: &DirichletOperator,
    samples: &[(f64, DVector<C64>)],
    g: &DVector<C64>,
    ratio: f64,
    tol_of: impl Fn(f64) -> f64,
) -> LimitEstimate {
    let dom = op.domain();
    let s: Vec<LimitSample> = samples
        .iter()
        .map(|(eta, mg)| LimitSample {
            eta: *eta,
            value: vec![dom.boundary_inner(mg, g)],
        })
        .collect();
    let scale = s.iter().map(|x| x.value[0].norm()).fold(0.0, f64::max);
    LimitEstimate::from_samples(s, ratio, tol_of(scale))
}

/// Extrapolated `s-lim η M(x + iη) g` on a fixed schedule.
pub fn slim_eta_m(op: &DirichletOperator, x: f64, g: &BoundaryVector, sched: &EtaSchedule, tol: f64) -> Result<LimitEstimate> {
    let samples = sched
        .samples()
        .into_iter()
        .map(|eta| Ok((eta, dtn_at(op, c64(x, eta), g)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(slim_from(&samples, sched.ratio, |_| tol))
}

fn divergence(op: &DirichletOperator, x: f64, g: &DVector<C64>, im_ref: f64, eta_div: f64) -> Result<f64> {
    let dom = op.domain();
    let im_div = dom.boundary_inner(&dtn_at(op, c64(x, eta_div), g)?, g).im;
    Ok(if im_ref == 0.0 {
        if im_div == 0.0 { 0.0 } else { f64::MAX }
    } else {
        im_div.abs() / im_ref.abs()
    })
}

/// Extrapolated `(M(x + i0) g, g)` on a fixed schedule. The divergence sample sits at
/// `η₀ · 1e-4` unless `divergence_eta` overrides it.
pub fn boundary_value_m(
    op: &DirichletOperator,
    x: f64,
    g: &BoundaryVector,
    sched: &EtaSchedule,
    tol: f64,
    divergence_eta: Option<f64>,
    divergence_ratio: f64,
) -> Result<BoundaryValue> {
    let samples = sched
        .samples()
        .into_iter()
        .map(|eta| Ok((eta, dtn_at(op, c64(x, eta), g)?)))
        .collect::<Result<Vec<_>>>()?;
    let estimate = form_from(op, &samples, g, sched.ratio, |_| tol);
    let eta_div = divergence_eta.unwrap_or(sched.eta0 * 1e-4);
    let ratio = divergence(op, x, g, estimate.samples[0].value[0].im, eta_div)?;
    Ok(BoundaryValue {
        estimate,
        divergence_ratio: ratio,
        divergence_eta: eta_div,
        diverges: ratio >= divergence_ratio,
    })
}

/// Slim and boundary value for one probe, sharing the DtN samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeLimits {
    pub slim: LimitEstimate,
    pub boundary: BoundaryValue,
    /// `τ_eig` for this probe.
    pub slim_threshold: f64,
    /// `‖M(x + iη₀) g‖`.
    pub dtn_norm: f64,
    /// `M(x + iη_k) g` for every sample, used for report rows.
    pub dtn_samples: Vec<LimitSample>,
}

impl ProbeLimits {
    pub fn converged(&self) -> bool {
        self.slim.converged && self.boundary.estimate.converged
    }

    /// Slim is indistinguishable from zero.
    pub fn slim_vanishes(&self) -> bool {
        self.slim.norm() <= self.slim_threshold
    }

    /// `|Im M(x + i0)| ≈ 0` relative to the value and the extrapolation error.
    pub fn imag_vanishes(&self, th: &Thresholds) -> bool {
        let v = self.boundary.value();
        !self.boundary.diverges
            && v.im.abs() <= (th.ac_band * v.norm().max(1.0)).max(self.boundary.estimate.error)
    }

    /// `τ_ac < -Im M(x + i0) < 1/τ_ac`.
    pub fn in_ac_band(&self, th: &Thresholds) -> bool {
        let v = -self.boundary.value().im;
        self.boundary.estimate.converged && !self.boundary.diverges && v > th.ac_band && v < 1.0 / th.ac_band
    }

    /// `η (M(x + iη) g, g) → 0`.
    pub fn eta_form_vanishes(&self, op: &DirichletOperator, g: &BoundaryVector) -> bool {
        let dom = op.domain();
        let v = DVector::from_vec(self.slim.value.clone());
        let scalar = dom.boundary_inner(&v, g).norm();
        scalar <= self.slim_threshold * dom.boundary_norm(g)
    }
}

/// Samples `M(x + iη) g` on the local schedule; in finite mode the schedule is extended
/// by further halvings until both limits settle (or the extension budget runs out).
pub fn probe_limits(
    op: &DirichletOperator,
    x: f64,
    g: &BoundaryVector,
    local: &LocalSchedule,
    th: &Thresholds,
) -> Result<ProbeLimits> {
    let sched = local.schedule;
    let mut samples = Vec::with_capacity(sched.count + local.max_extension);
    for eta in sched.samples() {
        samples.push((eta, dtn_at(op, c64(x, eta), g)?));
    }
    let tol = |scale: f64| th.limit_tolerance(scale, local.floored);
    let dtn_norm = op.domain().boundary_norm(&samples[0].1);
    let base_threshold = th.eig_rel * dtn_norm;
    let mut k = sched.count;
    let (slim, form) = loop {
        let slim = slim_from(&samples, sched.ratio, tol);
        let form = form_from(op, &samples, g, sched.ratio, tol);
        // At a pole the form diverges by design, so only the slim has to settle there.
        let settled = slim.converged && (form.converged || slim.norm() > base_threshold);
        if settled || k >= sched.count + local.max_extension {
            break (slim, form);
        }
        let eta = sched.eta(k);
        samples.push((eta, dtn_at(op, c64(x, eta), g)?));
        k += 1;
    };
    let eta_div = if local.floored {
        samples.last().map(|s| s.0).unwrap_or(sched.eta0)
    } else {
        sched.eta0 * 1e-4
    };
    let ratio = divergence(op, x, g, form.samples[0].value[0].im, eta_div)?;
    let mut slim_threshold = base_threshold;
    if local.floored {
        slim_threshold = slim_threshold.max(th.continuum_rel * slim.sample_scale());
    }
    let dtn_samples = samples
        .iter()
        .map(|(eta, mg)| LimitSample {
            eta: *eta,
            value: mg.iter().copied().collect(),
        })
        .collect();
    Ok(ProbeLimits {
        slim,
        boundary: BoundaryValue {
            estimate: form,
            divergence_ratio: ratio,
            divergence_eta: eta_div,
            diverges: ratio >= th.divergence_ratio,
        },
        slim_threshold,
        dtn_norm,
        dtn_samples,
    })
}

/// `(1/2πi) ∮ M(z) dz` over `|z - λ₀| = ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidueMatrix {
    pub lambda0: f64,
    pub radius: f64,
    pub nodes: usize,
    pub r: DMatrix<C64>,
    /// `ρ · max ‖M(z_k)‖`, the size of the integrand.
    pub scale: f64,
}

impl ResidueMatrix {
    /// `‖R - R^H‖ / max(‖R‖, scale)`.
    pub fn hermitian_defect(&self) -> f64 {
        (&self.r - self.r.adjoint()).norm() / self.r.norm().max(self.scale).max(f64::MIN_POSITIVE)
    }

    fn hermitian_part(&self) -> DMatrix<C64> {
        (&self.r + self.r.adjoint()) * c64(0.5, 0.0)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigen(&self.hermitian_part()).0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn rank_cutoff(&self, rel: f64) -> f64 {
        let sv = self.r.clone().singular_values();
        rel * sv.max().max(self.scale)
    }

    /// Numerical rank with singular values above `rel · max(σ_max, scale)`.
    pub fn rank(&self, rel: f64) -> usize {
        let cut = self.rank_cutoff(rel);
        self.r.clone().singular_values().iter().filter(|&&s| s > cut).count()
    }

    /// Orthonormal (Euclidean) basis of the column range.
    pub fn range_basis(&self, rel: f64) -> DMatrix<C64> {
        let cut = self.rank_cutoff(rel);
        let (vals, vecs) = hermitian_eigen(&self.hermitian_part());
        let cols: Vec<_> = vals
            .iter()
            .enumerate()
            .filter(|(_, &v)| v.abs() > cut)
            .map(|(k, _)| vecs.column(k).clone_owned())
            .collect();
        if cols.is_empty() {
            DMatrix::zeros(self.r.nrows(), 0)
        } else {
            DMatrix::from_columns(&cols)
        }
    }
}

/// Eigen-decomposition of a Hermitian matrix through its real symmetric embedding.
pub(crate) fn hermitian_eigen(a: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = a.nrows();
    let mut big = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let v = a[(i, j)];
            big[(i, j)] = v.re;
            big[(i + n, j + n)] = v.re;
            big[(i, j + n)] = -v.im;
            big[(i + n, j)] = v.im;
        }
    }
    let eig = nalgebra::SymmetricEigen::new(big);
    // Each eigenvalue appears twice; keep one vector per pair by Gram-Schmidt on the complex form.
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut vals = Vec::with_capacity(n);
    let mut vecs: Vec<DVector<C64>> = Vec::with_capacity(n);
    for &k in &order {
        if vecs.len() == n {
            break;
        }
        let col = eig.eigenvectors.column(k);
        let mut v = DVector::from_fn(n, |i, _| c64(col[i], col[i + n]));
        for q in &vecs {
            let p = q.dotc(&v);
            v -= q * p;
        }
        let nv = v.norm();
        if nv > 0.5 {
            vecs.push(v / c64(nv, 0.0));
            vals.push(eig.eigenvalues[k]);
        }
    }
    let m = if vecs.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&vecs)
    };
    (vals, m)
}

pub fn residue_contour(op: &DirichletOperator, lambda0: f64, radius: f64, nodes: usize) -> Result<ResidueMatrix> {
    if nodes < 16 || nodes % 2 != 0 {
        return Err(Error::InvalidArgument(format!("contour needs an even node count >= 16, got {nodes}")));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("contour radius must be positive, got {radius}")));
    }
    let n_b = op.domain().n_boundary();
    let terms: Vec<(DMatrix<C64>, f64)> = (0..nodes)
        .into_par_iter()
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / nodes as f64;
            let dir = c64(theta.cos(), theta.sin());
            let z = c64(lambda0, 0.0) + dir * radius;
            let m = ShiftedResolvent::new(op, z)
                .map_err(|_| Error::ContourTouchesSpectrum { center: lambda0, radius })?
                .dtn_matrix();
            let norm = m.norm();
            Ok((m * dir, norm))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut r = DMatrix::zeros(n_b, n_b);
    let mut max_norm = 0.0_f64;
    for (t, norm) in &terms {
        r += t;
        max_norm = max_norm.max(*norm);
    }
    r *= c64(radius / nodes as f64, 0.0);
    Ok(ResidueMatrix {
        lambda0,
        radius,
        nodes,
        r,
        scale: radius * max_norm,
    })
}

/// Contour radius around `λ₀` whose annulus `(ρ/4, 2ρ)` holds no levels.
pub fn auto_radius<S: SpectralCounter + ?Sized>(counter: &S, lambda0: f64, spacing: f64) -> f64 {
    let mut rho = 0.25 * spacing;
    for _ in 0..60 {
        let outer = counter.count_in(lambda0 - 2.0 * rho, lambda0 + 2.0 * rho);
        let inner = counter.count_in(lambda0 - 0.25 * rho, lambda0 + 0.25 * rho);
        if outer == inner {
            return rho;
        }
        rho *= 0.5;
    }
    rho
}

/// Number of real Chebyshev samples and polynomial degree used by the fit test.
pub const FIT_SAMPLES: usize = 21;
pub const FIT_DEGREE: usize = 10;

/// Relative least-squares misfit of a degree-10 Chebyshev fit to `M(t) g` over 21 real
/// Chebyshev nodes of `[x - w, x + w]`; `None` if a node is too close to the spectrum.
pub fn chebyshev_fit_misfit(op: &DirichletOperator, x: f64, w: f64, probes: &[BoundaryVector]) -> Option<f64> {
    let n = FIT_SAMPLES;
    let ts: Vec<f64> = (0..n)
        .map(|j| (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos())
        .collect();
    let mut values: Vec<Vec<C64>> = Vec::with_capacity(n);
    for &t in &ts {
        let r = ShiftedResolvent::new(op, c64(x + w * t, 0.0)).ok()?;
        values.push(probes.iter().flat_map(|g| r.dtn_apply(g).iter().copied().collect::<Vec<_>>()).collect());
    }
    let basis = DMatrix::from_fn(n, FIT_DEGREE + 1, |j, k| (k as f64 * ts[j].acos()).cos());
    let svd = basis.clone().svd(true, true);
    let cols = values[0].len();
    let mut resid = 0.0;
    let mut total = 0.0;
    for c in 0..cols {
        for part in 0..2 {
            let y = DVector::from_fn(n, |j, _| if part == 0 { values[j][c].re } else { values[j][c].im });
            let coef = svd.solve(&y, 1e-14).ok()?;
            resid += (&basis * coef - &y).norm_squared();
            total += y.norm_squared();
        }
    }
    Some(if total == 0.0 { 0.0 } else { (resid / total).sqrt() })
}

/// Evidence of the analytic-continuation test on one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticityReport {
    pub x: f64,
    pub half_width: f64,
    /// Slim vanishes at the centre and both endpoints for every probe.
    pub slim_vanishes: bool,
    /// `Im M(t + i0) ≈ 0` at the centre and both endpoints for every probe.
    pub imag_vanishes: bool,
    /// `None` when a fit node hit the spectrum.
    pub fit_misfit: Option<f64>,
    pub analytic: bool,
}

/// Checks at one point whether every probe has vanishing slim and real boundary value.
pub fn point_regularity(
    op: &DirichletOperator,
    x: f64,
    probes: &[BoundaryVector],
    policy: &EtaPolicy,
    th: &Thresholds,
) -> Result<(bool, bool)> {
    let local = policy.at(op, x);
    let mut slim_ok = true;
    let mut imag_ok = true;
    for g in probes {
        let pl = match probe_limits(op, x, g, &local, th) {
            Ok(pl) => pl,
            Err(Error::NearSpectrum { .. }) => return Ok((false, false)),
            Err(e) => return Err(e),
        };
        slim_ok &= pl.converged() && pl.slim_vanishes();
        imag_ok &= pl.imag_vanishes(th);
    }
    Ok((slim_ok, imag_ok))
}

pub fn analyticity_test(
    op: &DirichletOperator,
    x: f64,
    half_width: f64,
    probes: &[BoundaryVector],
    policy: &EtaPolicy,
    th: &Thresholds,
) -> Result<AnalyticityReport> {
    let mut slim_ok = true;
    let mut imag_ok = true;
    for t in [x, x - half_width, x + half_width] {
        let (s, i) = point_regularity(op, t, probes, policy, th)?;
        slim_ok &= s;
        imag_ok &= i;
        if !(slim_ok && imag_ok) {
            break;
        }
    }
    let fit_misfit = if slim_ok && imag_ok {
        chebyshev_fit_misfit(op, x, half_width, probes)
    } else {
        None
    };
    let analytic = slim_ok && imag_ok && fit_misfit.is_some_and(|m| m <= th.analyticity_misfit);
    Ok(AnalyticityReport {
        x,
        half_width,
        slim_vanishes: slim_ok,
        imag_vanishes: imag_ok,
        fit_misfit,
        analytic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{assemble_operator, build_domain, DomainSpec, PotentialField};
    use approx::assert_relative_eq;

    fn t1() -> DirichletOperator {
        let dom = build_domain(&DomainSpec::HalfLine1d { h: 1.0, length: 3.0 }).unwrap();
        assemble_operator(&dom, &PotentialField::zero(&dom)).unwrap()
    }

    fn one(op: &DirichletOperator) -> BoundaryVector {
        BoundaryVector::from_real(op.domain(), &[1.0]).unwrap()
    }

    #[test]
    fn schedule_validation() {
        let s = EtaSchedule::new(0.1, 0.5, 8).unwrap();
        assert!(s.samples().windows(2).all(|w| w[1] < w[0]));
        assert!(EtaSchedule::new(0.1, 1.5, 8).is_err());
        assert!(EtaSchedule::new(0.1, 0.5, 2).is_err());
        assert!(EtaSchedule::new(-0.1, 0.5, 8).is_err());
    }

    #[test]
    fn richardson_is_exact_on_polynomials() {
        let r: f64 = 0.5;
        let f = |eta: f64| vec![c64(3.0 + 2.0 * eta - 5.0 * eta * eta + eta.powi(3), -1.0 + eta)];
        let samples: Vec<_> = (0..6).map(|k| f(0.2 * r.powi(k))).collect();
        let (v, err) = richardson(&samples, r);
        assert_relative_eq!(v[0].re, 3.0, epsilon = 1e-12);
        assert_relative_eq!(v[0].im, -1.0, epsilon = 1e-12);
        assert!(err < 1e-10);
    }

    #[test]
    fn richardson_error_order_at_least_one() {
        // f(η) = 1/(1 + η): error of the plain samples is O(η); extrapolants do better.
        let r: f64 = 0.5;
        let samples: Vec<_> = (0..8).map(|k| vec![c64(1.0 / (1.0 + 0.1 * r.powi(k)), 0.0)]).collect();
        let (v, _) = richardson(&samples, r);
        let raw_err = (samples[7][0].re - 1.0).abs();
        assert!((v[0].re - 1.0).abs() < raw_err * 1e-3);
    }

    #[test]
    fn t1_slim_values() {
        let op = t1();
        let s = EtaSchedule::new(0.05, 0.5, 8).unwrap();
        let at1 = slim_eta_m(&op, 1.0, &one(&op), &s, 1e-8).unwrap();
        assert!(at1.converged);
        assert!((at1.scalar() - c64(0.0, -0.5)).norm() < 1e-9);
        for x in [2.0, -5.0] {
            let e = slim_eta_m(&op, x, &one(&op), &s, 1e-8).unwrap();
            assert!(e.converged);
            assert!(e.norm() < 1e-9, "x = {x}: {:?}", e.value);
        }
    }

    #[test]
    fn t1_boundary_values() {
        let op = t1();
        let s = EtaSchedule::new(0.05, 0.5, 8).unwrap();
        let bv = boundary_value_m(&op, 2.0, &one(&op), &s, 1e-8, None, 1e3).unwrap();
        assert!((bv.value() - c64(1.0, 0.0)).norm() < 1e-9);
        assert!(!bv.diverges);
        let bv = boundary_value_m(&op, -5.0, &one(&op), &s, 1e-8, None, 1e3).unwrap();
        assert!(bv.value().im.abs() < 1e-10);
        let bv = boundary_value_m(&op, 1.0, &one(&op), &s, 1e-8, None, 1e3).unwrap();
        assert!(bv.diverges);
    }

    #[test]
    fn t1_residues() {
        let op = t1();
        let r = residue_contour(&op, 1.0, 0.5, 64).unwrap();
        // τφ = -1/√2 for φ = (1, 1)/√2.
        let tau = -1.0 / 2f64.sqrt();
        assert_relative_eq!(r.r[(0, 0)].re, tau * tau, epsilon = 1e-12);
        assert!(r.r[(0, 0)].im.abs() < 1e-12);
        assert_eq!(r.rank(1e-8), 1);
        let r = residue_contour(&op, 2.0, 0.5, 64).unwrap();
        assert!(r.r[(0, 0)].norm() < 1e-12);
        assert_eq!(r.rank(1e-8), 0);
        // The eigenvalue 3 sits just outside.
        let r = residue_contour(&op, 1.0, 0.999, 64).unwrap();
        assert_relative_eq!(r.r[(0, 0)].re, 0.5, epsilon = 1e-8);
        assert!(matches!(residue_contour(&op, 0.5, 0.5, 64), Err(Error::ContourTouchesSpectrum { .. })));
    }

    #[test]
    fn residue_is_contour_independent() {
        let op = t1();
        let a = residue_contour(&op, 1.0, 0.5, 64).unwrap();
        let b = residue_contour(&op, 1.0, 0.25, 128).unwrap();
        assert!((a.r - b.r).norm() < 1e-8);
    }

    #[test]
    fn auto_radius_isolates_levels() {
        let op = t1();
        let rho = auto_radius(&op, 1.0, 0.5);
        assert!(rho <= 0.125 && op.count_in(1.0 - 2.0 * rho, 1.0 + 2.0 * rho) == 1);
    }

    #[test]
    fn t1_analyticity() {
        let op = t1();
        let probes = [one(&op)];
        let (p, th) = (EtaPolicy::default(), Thresholds::default());
        assert!(analyticity_test(&op, 2.0, 0.5, &probes, &p, &th).unwrap().analytic);
        assert!(!analyticity_test(&op, 1.0, 0.1, &probes, &p, &th).unwrap().analytic);
    }

    #[test]
    fn hermitian_eigen_reconstructs() {
        let a = DMatrix::from_row_slice(2, 2, &[c64(2.0, 0.0), c64(0.0, 1.0), c64(0.0, -1.0), c64(2.0, 0.0)]);
        let (vals, vecs) = hermitian_eigen(&a);
        assert_relative_eq!(vals[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(vals[1], 3.0, epsilon = 1e-12);
        let d = DMatrix::from_diagonal(&DVector::from_iterator(2, vals.iter().map(|&v| c64(v, 0.0))));
        assert!((&vecs * d * vecs.adjoint() - a).norm() < 1e-12);
    }
}
