//! Spectral measures of interior vectors, their Borel transforms, Stone projections,
//! Lebesgue-decomposition supports and the Poisson-column rank test.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{essential_closure, GridSet};
use crate::domain::{BoundaryVector, DirichletOperator, EigenSystem, InteriorField};
use crate::dtn::ShiftedResolvent;
use crate::limits::{richardson, EtaPolicy, EtaSchedule, LocalSchedule, SpectralCounter, Thresholds};
use crate::{c64, Error, Result, C64};

/// Point mass of a spectral measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

/// Purely atomic measure, locations strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasure {
    pub atoms: Vec<Atom>,
    /// Free-form note on where the measure came from.
    pub provenance: String,
}

impl SpectralMeasure {
    /// Sorts the atoms and merges coincident locations.
    pub fn from_atoms(mut atoms: Vec<Atom>, provenance: impl Into<String>) -> Result<Self> {
        for a in &atoms {
            if !(a.location.is_finite() && a.weight.is_finite() && a.weight >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "atom ({}, {}) needs a finite location and a finite nonnegative weight",
                    a.location, a.weight
                )));
            }
        }
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.location == a.location => last.weight += a.weight,
                _ => merged.push(a),
            }
        }
        Ok(Self {
            atoms: merged,
            provenance: provenance.into(),
        })
    }

    /// `count` equal atoms at the midpoints of a uniform partition of `[lo, hi]`, each carrying
    /// `density · cell width`.
    pub fn uniform_density(lo: f64, hi: f64, density: f64, count: usize) -> Result<Self> {
        if !(lo < hi) || count == 0 || !(density > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "uniform density needs lo < hi, count > 0 and density > 0, got [{lo}, {hi}], {count}, {density}"
            )));
        }
        let cell = (hi - lo) / count as f64;
        let atoms = (0..count)
            .map(|k| Atom {
                location: lo + (k as f64 + 0.5) * cell,
                weight: density * cell,
            })
            .collect();
        Self::from_atoms(atoms, format!("density {density} on [{lo}, {hi}], {count} atoms"))
    }

    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Sum of two measures.
    pub fn superpose(&self, other: &SpectralMeasure) -> Result<Self> {
        let atoms = self.atoms.iter().chain(&other.atoms).copied().collect();
        Self::from_atoms(atoms, format!("({}) + ({})", self.provenance, other.provenance))
    }
}

impl SpectralCounter for SpectralMeasure {
    fn count_in(&self, lo: f64, hi: f64) -> usize {
        let start = self.atoms.partition_point(|a| a.location < lo);
        let end = self.atoms.partition_point(|a| a.location < hi);
        end.saturating_sub(start)
    }
}

/// Atoms with relative weight below this are treated as numerical zeros.
const ATOM_DROP_REL: f64 = 1e-24;

/// `μ_u`: one atom per eigenvalue cluster, weighted by `‖P_k u‖²` in the `w_I` norm.
pub fn spectral_measure(eig: &EigenSystem, u: &InteriorField) -> SpectralMeasure {
    let w = eig.weight();
    let vecs = eig.vectors();
    let total: f64 = u.iter().map(|v| v.norm_sqr()).sum::<f64>() * w;
    let mut atoms = Vec::new();
    for g in eig.groups() {
        let mut weight = 0.0;
        for k in g.clone() {
            let overlap: C64 = vecs.column(k).iter().zip(u.iter()).map(|(p, v)| v * *p).sum::<C64>() * w;
            weight += overlap.norm_sqr();
        }
        if weight > ATOM_DROP_REL * total {
            let values = &eig.values()[g.clone()];
            let location = values.iter().sum::<f64>() / values.len() as f64;
            atoms.push(Atom { location, weight });
        }
    }
    SpectralMeasure {
        atoms,
        provenance: format!("interior vector with w_I-norm {:e}, operator of dimension {}", total.sqrt(), vecs.nrows()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BorelSample {
    pub lambda: C64,
    pub value: C64,
}

/// `F(λ) = Σ w_k / (t_k - λ)`.
pub fn borel_transform(mu: &SpectralMeasure, lambda: C64) -> Result<BorelSample> {
    if lambda.im == 0.0 && mu.atoms.iter().any(|a| a.location == lambda.re) {
        return Err(Error::AtomHit(lambda.re));
    }
    let value = mu.atoms.iter().map(|a| a.weight / (a.location - lambda)).sum();
    Ok(BorelSample { lambda, value })
}

fn borel_value(mu: &SpectralMeasure, z: C64) -> C64 {
    mu.atoms.iter().map(|a| a.weight / (a.location - z)).sum()
}

/// `μ({x})` from the extrapolated `-i lim y F(x + iy)`.
pub fn point_mass(mu: &SpectralMeasure, x: f64, sched: &EtaSchedule) -> f64 {
    let samples: Vec<Vec<C64>> = sched
        .samples()
        .into_iter()
        .map(|y| vec![borel_value(mu, c64(x, y)) * y])
        .collect();
    let (lim, _) = richardson(&samples, sched.ratio);
    (lim[0] * c64(0.0, -1.0)).re
}

/// Geometric `δ` schedule for Stone's formula, in units of the endpoint gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeltaSchedule {
    pub first: f64,
    pub ratio: f64,
    pub count: usize,
    /// Gauss-Legendre nodes per panel.
    pub nodes: usize,
    /// Relative tolerance on the extrapolation error (Frobenius).
    pub tolerance: f64,
}

impl Default for DeltaSchedule {
    fn default() -> Self {
        Self {
            first: 0.1,
            ratio: 10f64.powf(-0.5),
            count: 5,
            nodes: 16,
            tolerance: 1e-8,
        }
    }
}

/// Endpoints closer than this (relative to `max(‖A‖₁, 1)`) to an eigenvalue are refused.
pub const ENDPOINT_REL: f64 = 1e-8;

/// Distance from `x` to the nearest eigenvalue, by inertia bisection.
pub fn nearest_level_distance(op: &DirichletOperator, x: f64) -> f64 {
    let scale = op.norm1().max(1.0);
    let mut hi = 1e-3 * scale;
    while op.count_in(x - hi, x + hi) == 0 {
        hi *= 2.0;
        if hi > 8.0 * scale + 2.0 * x.abs() {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if op.count_in(x - mid, x + mid) > 0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * scale {
            break;
        }
    }
    hi
}

/// Stone's formula evaluated at each `δ` and extrapolated.
#[derive(Debug, Clone, PartialEq)]
pub struct StoneProjection {
    pub a: f64,
    pub b: f64,
    /// Smallest endpoint distance to the spectrum.
    pub gap: f64,
    pub deltas: Vec<f64>,
    pub projector: DMatrix<f64>,
    pub error: f64,
}

fn dense_resolvent(op: &DirichletOperator, z: C64) -> Result<DMatrix<C64>> {
    let r = ShiftedResolvent::unchecked(op, z)?;
    let n = op.domain().n_interior();
    let mut out = DMatrix::zeros(n, n);
    let mut e = DVector::zeros(n);
    for k in 0..n {
        e[k] = c64(1.0, 0.0);
        out.set_column(k, &r.solve(&e));
        e[k] = C64::default();
    }
    Ok(out)
}

/// One straight piece of the integration path, `z(s) = start + s · dir` for `s ∈ [s0, s1]`.
#[derive(Debug, Clone, Copy)]
struct Panel {
    start: C64,
    dir: C64,
    s0: f64,
    s1: f64,
}

fn integrate_panels(op: &DirichletOperator, panels: &[Panel], rule: &GaussLegendre) -> Result<DMatrix<C64>> {
    let n = op.domain().n_interior();
    let parts = panels
        .par_iter()
        .map(|p| {
            let half = 0.5 * (p.s1 - p.s0);
            let mid = 0.5 * (p.s1 + p.s0);
            let mut acc = DMatrix::<C64>::zeros(n, n);
            for &(node, weight) in rule.as_node_weight_pairs() {
                let z = p.start + p.dir * (mid + half * node);
                acc += dense_resolvent(op, z)? * (p.dir * (weight * half));
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = DMatrix::zeros(n, n);
    for p in parts {
        total += p;
    }
    Ok(total)
}

/// Geometric panels covering `[lo, hi]`: first length `first`, doubling afterwards.
fn geometric_breaks(lo: f64, hi: f64, first: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut s = lo;
    let mut len = first;
    while s < hi {
        let e = (s + len).min(hi);
        if hi - e < 0.25 * len {
            out.push((s, hi));
            break;
        }
        out.push((s, e));
        s = e;
        len *= 2.0;
    }
    out
}

/// `E((a, b))` from `(1/2πi) ∫_a^b [R(t + iδ) - R(t - iδ)] dt`, extrapolated to `δ = 0`.
///
/// For fixed `δ` the segment `[a + iδ, b + iδ]` is deformed into the path
/// `a + iδ → a + iH → b + iH → b + iδ`, which keeps the integrand smooth. Since `A` is real,
/// `R(t - iδ)` is the entrywise conjugate of `R(t + iδ)`, and the bracket reduces to
/// `(1/π) Im` of the path integral.
pub fn stone_projection(op: &DirichletOperator, a: f64, b: f64, sched: &DeltaSchedule) -> Result<StoneProjection> {
    if !(a < b) {
        return Err(Error::InvalidArgument(format!("need a < b, got ({a}, {b})")));
    }
    if !(sched.count >= 2 && sched.ratio > 0.0 && sched.ratio < 1.0 && sched.first > 0.0 && sched.first < 1.0) {
        return Err(Error::InvalidArgument("delta schedule needs count >= 2, ratio and first in (0, 1)".into()));
    }
    let nodes = NonZeroUsize::new(sched.nodes).ok_or_else(|| Error::InvalidArgument("need at least one node".into()))?;
    let tol_abs = ENDPOINT_REL * op.norm1().max(1.0);
    let da = nearest_level_distance(op, a);
    let db = nearest_level_distance(op, b);
    if da <= tol_abs {
        return Err(Error::EndpointOnEigenvalue(a));
    }
    if db <= tol_abs {
        return Err(Error::EndpointOnEigenvalue(b));
    }
    let gap = da.min(db).min(b - a);
    let deltas: Vec<f64> = (0..sched.count).map(|k| sched.first * gap * sched.ratio.powi(k as i32)).collect();
    let dmax = deltas[0];
    let height = (0.5 * (b - a)).max(2.0 * dmax);
    let rule = GaussLegendre::new(nodes);
    let up = c64(0.0, 1.0);
    let down = c64(0.0, -1.0);

    // Path pieces shared by every δ: both legs above δ_max and the top edge.
    let mut common = Vec::new();
    for (s0, s1) in geometric_breaks(dmax, height, 0.25 * gap) {
        common.push(Panel { start: c64(a, 0.0), dir: up, s0, s1 });
        common.push(Panel { start: c64(b, 0.0), dir: down, s0: -s1, s1: -s0 });
    }
    let top_pieces = ((b - a) / height).ceil().max(1.0) as usize;
    let step = (b - a) / top_pieces as f64;
    for k in 0..top_pieces {
        common.push(Panel {
            start: c64(a, height),
            dir: c64(1.0, 0.0),
            s0: k as f64 * step,
            s1: if k + 1 == top_pieces { b - a } else { (k + 1) as f64 * step },
        });
    }
    let shared = integrate_panels(op, &common, &rule)?;

    let mut samples = Vec::with_capacity(deltas.len());
    for &d in &deltas {
        let mut total = shared.clone();
        if d < dmax {
            let legs = [
                Panel { start: c64(a, 0.0), dir: up, s0: d, s1: dmax },
                Panel { start: c64(b, 0.0), dir: down, s0: -dmax, s1: -d },
            ];
            total += integrate_panels(op, &legs, &rule)?;
        }
        samples.push(total.iter().map(|v| c64(v.im / std::f64::consts::PI, 0.0)).collect::<Vec<_>>());
    }
    let scale = samples[0].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    let (lim, error) = richardson(&samples, sched.ratio);
    if !(error <= sched.tolerance * scale) {
        return Err(Error::QuadratureNonConvergence(format!(
            "Stone projection on ({a}, {b}): extrapolation error {error:e} exceeds {:e}",
            sched.tolerance * scale
        )));
    }
    let n = op.domain().n_interior();
    let projector = DMatrix::from_iterator(n, n, lim.iter().map(|v| v.re));
    Ok(StoneProjection {
        a,
        b,
        gap,
        deltas,
        projector,
        error,
    })
}

/// Spectral norm of a real matrix.
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Boundary behaviour of `F` at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurePoint {
    pub x: f64,
    pub floored: bool,
    /// Extrapolated `F(x + i0)`.
    pub boundary: C64,
    pub converged: bool,
    /// Extrapolated `lim y F(x + iy)`.
    pub eta_limit: C64,
    pub divergence_ratio: f64,
    pub diverges: bool,
    pub ac: bool,
    pub sc: bool,
}

/// Grid sets read off from `F` for the Lebesgue decomposition of a measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureDecomposition {
    pub points: Vec<MeasurePoint>,
    /// Closure of `{0 < Im F(x + i0) < ∞}`.
    pub ac_support: GridSet,
    /// `{Im F(x + i0) = ∞, y F(x + iy) → 0}`.
    pub sc_set: GridSet,
}

fn measure_point(mu: &SpectralMeasure, x: f64, local: &LocalSchedule, th: &Thresholds) -> MeasurePoint {
    let sched = local.schedule;
    let mut etas = sched.samples();
    let eval = |eta: f64| borel_value(mu, c64(x, eta));
    let mut values: Vec<C64> = etas.iter().map(|&e| eval(e)).collect();
    let mass = mu.mass().max(f64::MIN_POSITIVE);
    let window = sched.count;

    let estimate = |etas: &[f64], values: &[C64]| {
        let lo = etas.len() - window;
        let f: Vec<Vec<C64>> = values[lo..].iter().map(|v| vec![*v]).collect();
        let yf: Vec<Vec<C64>> = values[lo..].iter().zip(&etas[lo..]).map(|(v, e)| vec![v * *e]).collect();
        let scale = values[lo..].iter().map(|v| v.norm()).fold(0.0, f64::max);
        let (fl, ferr) = richardson(&f, sched.ratio);
        let (yl, _) = richardson(&yf, sched.ratio);
        let converged = ferr <= th.limit_tolerance(scale, local.floored);
        (fl[0], yl[0], converged)
    };

    let (mut boundary, mut eta_limit, mut converged) = estimate(&etas, &values);
    let mut extra = 0;
    while !converged && extra < local.max_extension {
        let next = etas[etas.len() - 1] * sched.ratio;
        etas.push(next);
        values.push(eval(next));
        (boundary, eta_limit, converged) = estimate(&etas, &values);
        extra += 1;
    }

    let eta_div = if local.floored { sched.smallest() } else { sched.eta0 * 1e-4 };
    let im_ref = values[0].im;
    let im_div = eval(eta_div).im;
    let divergence_ratio = if im_ref == 0.0 {
        if im_div == 0.0 { 0.0 } else { f64::MAX }
    } else {
        im_div.abs() / im_ref.abs()
    };
    let diverges = divergence_ratio >= th.divergence_ratio;
    let ac = converged && !diverges && boundary.im > th.ac_band && boundary.im < 1.0 / th.ac_band;
    let sc = diverges && eta_limit.norm() <= th.eig_rel * mass;
    MeasurePoint {
        x,
        floored: local.floored,
        boundary,
        converged,
        eta_limit,
        divergence_ratio,
        diverges,
        ac,
        sc,
    }
}

/// AC support and singular-continuous candidate set of `μ` on a grid.
pub fn ac_sc_supports(mu: &SpectralMeasure, policy: &EtaPolicy, th: &Thresholds, grid: &[f64]) -> MeasureDecomposition {
    let points: Vec<MeasurePoint> = grid
        .par_iter()
        .map(|&x| measure_point(mu, x, &policy.at(mu, x), th))
        .collect();
    let ac_flags: Vec<bool> = points.iter().map(|p| p.ac).collect();
    let sc_flags: Vec<bool> = points.iter().map(|p| p.sc).collect();
    MeasureDecomposition {
        ac_support: essential_closure(&GridSet::from_flags(grid, &ac_flags)),
        sc_set: GridSet::from_flags(grid, &sc_flags),
        points,
    }
}

/// Numerical rank of the stacked Poisson columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplicityReport {
    pub rank: usize,
    pub dimension: usize,
    pub singular_values: Vec<f64>,
    pub zetas: Vec<C64>,
    pub probes: usize,
}

impl SimplicityReport {
    pub fn full_rank(&self) -> bool {
        self.rank == self.dimension
    }
}

pub const SIMPLICITY_RANK_REL: f64 = 1e-10;

/// Rank of `[γ(ζ_1) g_1, …, γ(ζ_m) g_p]` against the interior dimension. With no probes the
/// boundary unit vectors are used, so the columns are those of every `Γ(ζ_j)`.
pub fn simplicity_rank(op: &DirichletOperator, zetas: &[C64], probes: Option<&[BoundaryVector]>) -> Result<SimplicityReport> {
    if !zetas.iter().any(|z| z.im != 0.0) {
        return Err(Error::InvalidArgument("simplicity test needs at least one non-real sample".into()));
    }
    let dom = op.domain();
    let basis: Vec<BoundaryVector>;
    let probes = match probes {
        Some(p) => p,
        None => {
            basis = (0..dom.n_boundary()).map(|k| BoundaryVector::unit(dom, k)).collect();
            &basis
        }
    };
    let n = dom.n_interior();
    let mut cols = Vec::with_capacity(zetas.len() * probes.len());
    for &z in zetas {
        let r = ShiftedResolvent::new(op, z)?;
        for g in probes {
            cols.push(r.poisson(g));
        }
    }
    let stacked = DMatrix::from_columns(&cols);
    let mut sv: Vec<f64> = if cols.is_empty() {
        Vec::new()
    } else {
        stacked.singular_values().iter().copied().collect()
    };
    sv.sort_by(|a, b| b.total_cmp(a));
    let top = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > SIMPLICITY_RANK_REL * top && top > 0.0).count();
    Ok(SimplicityReport {
        rank,
        dimension: n,
        singular_values: sv,
        zetas: zetas.to_vec(),
        probes: probes.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{assemble_operator, build_domain, oracle_eigendecomposition, oracle_projector, DomainSpec, PotentialField};
    use approx::assert_relative_eq;

    fn t1() -> DirichletOperator {
        let dom = build_domain(&DomainSpec::HalfLine1d { h: 1.0, length: 3.0 }).unwrap();
        assemble_operator(&dom, &PotentialField::zero(&dom)).unwrap()
    }

    fn e1(op: &DirichletOperator) -> InteriorField {
        InteriorField::from_real(op.domain(), &[1.0, 0.0]).unwrap()
    }

    #[test]
    fn t1_measure_of_first_unit_vector() {
        let op = t1();
        let eig = oracle_eigendecomposition(&op);
        let mu = spectral_measure(&eig, &e1(&op));
        assert_eq!(mu.atoms.len(), 2);
        assert_relative_eq!(mu.atoms[0].location, 1.0, epsilon = 1e-12);
        assert_relative_eq!(mu.atoms[1].location, 3.0, epsilon = 1e-12);
        assert_relative_eq!(mu.atoms[0].weight, 0.5, epsilon = 1e-12);
        assert_relative_eq!(mu.atoms[1].weight, 0.5, epsilon = 1e-12);
        let zero = spectral_measure(&eig, &InteriorField::zeros(op.domain()));
        assert!(zero.is_empty());
        let phi = spectral_measure(&eig, &eig.vector(0));
        assert_eq!(phi.atoms.len(), 1);
        assert_relative_eq!(phi.atoms[0].weight, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn borel_transform_values() {
        let single = SpectralMeasure::from_atoms(vec![Atom { location: 0.0, weight: 1.0 }], "unit").unwrap();
        let f = borel_transform(&single, c64(0.0, 1.0)).unwrap().value;
        assert_relative_eq!(f.re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(f.im, 1.0, epsilon = 1e-15);
        assert!(matches!(borel_transform(&single, c64(0.0, 0.0)), Err(Error::AtomHit(_))));

        let op = t1();
        let mu = spectral_measure(&oracle_eigendecomposition(&op), &e1(&op));
        let f0 = borel_transform(&mu, c64(0.0, 0.0)).unwrap().value;
        assert_relative_eq!(f0.re, 2.0 / 3.0, epsilon = 1e-12);
        // resolvent quadratic form at the same point
        let r = ShiftedResolvent::new(&op, c64(0.0, 0.0)).unwrap();
        let u = e1(&op);
        let form = op.domain().interior_inner(&r.solve(&u), &u);
        assert_relative_eq!(form.re, f0.re, epsilon = 1e-12);
        assert!(borel_transform(&mu, c64(2.0, 0.3)).unwrap().value.im > 0.0);
    }

    #[test]
    fn point_masses() {
        let mu = SpectralMeasure::from_atoms(
            vec![Atom { location: 1.0, weight: 0.5 }, Atom { location: 3.0, weight: 0.5 }],
            "pair",
        )
        .unwrap();
        let sched = EtaSchedule::new(0.1, 0.5, 8).unwrap();
        assert!((point_mass(&mu, 1.0, &sched) - 0.5).abs() < 1e-8);
        assert!(point_mass(&mu, 2.0, &sched).abs() < 1e-8);
        assert!((point_mass(&mu, 3.0, &sched) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn t1_stone() {
        let op = t1();
        let eig = oracle_eigendecomposition(&op);
        let sched = DeltaSchedule::default();
        let p = stone_projection(&op, 0.5, 1.5, &sched).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        assert!(operator_norm(&(&p.projector - &expect)) < 1e-3);
        assert!(operator_norm(&(&p.projector - oracle_projector(&eig, 0.5, 1.5).unwrap())) < 1e-6);
        let gap = stone_projection(&op, 1.5, 2.5, &sched).unwrap();
        assert!(operator_norm(&gap.projector) < 1e-6);
        assert!(matches!(
            stone_projection(&op, 0.9999999999, 2.0, &sched),
            Err(Error::EndpointOnEigenvalue(_))
        ));
    }

    #[test]
    fn atomic_measure_has_no_continuous_part() {
        let op = t1();
        let mu = spectral_measure(&oracle_eigendecomposition(&op), &e1(&op));
        let grid: Vec<f64> = (0..=40).map(|k| k as f64 * 0.1).collect();
        let d = ac_sc_supports(&mu, &EtaPolicy::default(), &Thresholds::default(), &grid);
        assert!(d.ac_support.is_empty());
        assert!(d.sc_set.is_empty());
        assert!(d.points[10].diverges && d.points[30].diverges);
    }

    #[test]
    fn simplicity_on_t1() {
        let op = t1();
        let two = simplicity_rank(&op, &[c64(0.0, 1.0), c64(0.0, 2.0)], None).unwrap();
        assert_eq!((two.rank, two.dimension), (2, 2));
        let one = simplicity_rank(&op, &[c64(0.0, 1.0)], None).unwrap();
        assert_eq!(one.rank, 1);
        assert!(simplicity_rank(&op, &[c64(1.0, 0.0)], None).is_err());
    }

    #[test]
    fn measure_counts_atoms() {
        let mu = SpectralMeasure::uniform_density(0.0, 1.0, 1.0, 10).unwrap();
        assert_eq!(mu.count_in(0.0, 0.5), 5);
        assert_relative_eq!(mu.mass(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn uniform_density_boundary_values() {
        let mu = SpectralMeasure::uniform_density(0.0, 1.0, 1.0, 10_000).unwrap();
        let policy = EtaPolicy {
            mode: crate::limits::LimitMode::Continuum,
            ..EtaPolicy::default()
        };
        let grid: Vec<f64> = (0..=30).map(|k| 0.2 + k as f64 * 0.02).collect();
        let d = ac_sc_supports(&mu, &policy, &Thresholds::default(), &grid);
        for p in &d.points {
            let ratio = p.boundary.im / std::f64::consts::PI;
            assert!((ratio - 1.0).abs() < 0.02, "x = {}: {ratio}", p.x);
        }
        assert!(d.ac_support.contains(0.2) && d.ac_support.contains(0.8));
        assert!(d.sc_set.is_empty());
    }

    #[test]
    fn well_stone() {
        let dom = build_domain(&DomainSpec::HalfLine1d { h: 0.05, length: 20.0 }).unwrap();
        let q = PotentialField::from_spec(&dom, &crate::domain::PotentialSpec::Well { depth: 2.0, width: 1.0 }).unwrap();
        let op = assemble_operator(&dom, &q).unwrap();
        let eig = oracle_eigendecomposition(&op);
        let v = eig.values();
        for k in [0usize, 3, 10] {
            let a = 0.5 * (v[k] + v[k + 1]);
            let b = 0.5 * (v[k + 2] + v[k + 3]);
            let t = std::time::Instant::now();
            let p = stone_projection(&op, a, b, &DeltaSchedule::default()).unwrap();
            let err = operator_norm(&(&p.projector - oracle_projector(&eig, a, b).unwrap()));
            eprintln!("({a}, {b}) err {err:e} in {:?}", t.elapsed());
            assert!(err < 1e-3);
        }
    }
}
