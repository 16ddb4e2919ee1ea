//! Poisson operator, DtN matrix and the resolvent identities they satisfy.
//!
//! Boundary data `g` is extended into the interior by solving `(A_II - λ) u = B g`. The
//! outward normal derivative at a boundary node `b` is the sum over its inward neighbours
//! `Σ_n (g_b - u_n) / h`, which gives `M(λ) = (C - K (A_II - λ)⁻¹ Kᵀ / h²) / h` with `C` the
//! neighbour counts and `K` the boundary/interior adjacency.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::banded::BandLu;
use crate::domain::{BoundaryVector, DirichletOperator, DiscreteDomain, InteriorField};
use crate::{c64, Error, Result, C64};

/// Relative distance to the spectrum below which a shifted solve is refused.
pub const NEAR_SPECTRUM_REL: f64 = 1e-10;

/// Factorization of `A_II - λ` with a solver-side distance estimate.
#[derive(Debug, Clone)]
pub struct ShiftedResolvent<'a> {
    op: &'a DirichletOperator,
    lu: BandLu,
    distance: f64,
}

impl<'a> ShiftedResolvent<'a> {
    pub fn new(op: &'a DirichletOperator, lambda: C64) -> Result<Self> {
        let lu = BandLu::factor(op.matrix(), lambda);
        let distance = if lu.is_singular() {
            0.0
        } else {
            1.0 / lu.inverse_norm1_estimate()
        };
        if !(distance > NEAR_SPECTRUM_REL * op.norm1().max(1.0)) {
            return Err(Error::NearSpectrum { lambda, distance });
        }
        Ok(Self { op, lu, distance })
    }

    /// Factorization without the conditioning check; fails only on an exactly zero pivot.
    /// Meant for pole polishing, where the solve error lies along the eigenvector.
    pub fn unchecked(op: &'a DirichletOperator, lambda: C64) -> Result<Self> {
        let lu = BandLu::factor(op.matrix(), lambda);
        if lu.is_singular() {
            return Err(Error::NearSpectrum { lambda, distance: 0.0 });
        }
        Ok(Self { op, lu, distance: f64::NAN })
    }

    pub fn lambda(&self) -> C64 {
        self.lu.shift()
    }

    /// Estimated distance from `λ` to the spectrum (within a modest factor).
    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn operator(&self) -> &'a DirichletOperator {
        self.op
    }

    /// `(A_II - λ)⁻¹ f`.
    pub fn solve(&self, f: &DVector<C64>) -> DVector<C64> {
        self.lu.solve(f)
    }

    /// `γ(λ) g`.
    pub fn poisson(&self, g: &DVector<C64>) -> DVector<C64> {
        self.solve(&self.op.inject(g))
    }

    /// `M(λ) g`.
    pub fn dtn_apply(&self, g: &DVector<C64>) -> DVector<C64> {
        let u = self.poisson(g);
        outward_derivative(self.op.domain(), g, &u)
    }

    /// Both `γ(λ) g` and `M(λ) g` from one solve.
    pub fn poisson_and_dtn(&self, g: &DVector<C64>) -> (DVector<C64>, DVector<C64>) {
        let u = self.poisson(g);
        let mg = outward_derivative(self.op.domain(), g, &u);
        (u, mg)
    }

    pub fn poisson_matrix(&self) -> DMatrix<C64> {
        let dom = self.op.domain();
        let mut gamma = DMatrix::zeros(dom.n_interior(), dom.n_boundary());
        for k in 0..dom.n_boundary() {
            let e = BoundaryVector::unit(dom, k);
            gamma.set_column(k, &self.poisson(&e));
        }
        gamma
    }

    pub fn dtn_matrix(&self) -> DMatrix<C64> {
        let dom = self.op.domain();
        let mut m = DMatrix::zeros(dom.n_boundary(), dom.n_boundary());
        for k in 0..dom.n_boundary() {
            let e = BoundaryVector::unit(dom, k);
            m.set_column(k, &self.dtn_apply(&e));
        }
        m
    }
}

fn outward_derivative(dom: &DiscreteDomain, g: &DVector<C64>, u: &DVector<C64>) -> DVector<C64> {
    let inv_h = 1.0 / dom.h();
    DVector::from_iterator(
        dom.n_boundary(),
        dom.boundary_adjacency()
            .iter()
            .enumerate()
            .map(|(b, nbrs)| nbrs.iter().map(|&n| (g[b] - u[n]) * inv_h).sum::<C64>()),
    )
}

pub fn poisson_solve(op: &DirichletOperator, lambda: C64, g: &BoundaryVector) -> Result<InteriorField> {
    let dom = op.domain();
    BoundaryVector::new(dom, g.0.clone())?;
    let r = ShiftedResolvent::new(op, lambda)?;
    Ok(InteriorField(r.poisson(g)))
}

/// Outward normal derivative of the field equal to `g` on the boundary and `u` inside.
pub fn normal_derivative(dom: &DiscreteDomain, g: &BoundaryVector, u: &InteriorField) -> Result<BoundaryVector> {
    BoundaryVector::new(dom, g.0.clone())?;
    InteriorField::new(dom, u.0.clone())?;
    Ok(BoundaryVector(outward_derivative(dom, g, u)))
}

/// `Γ(λ)`: columns solve the boundary value problem for the boundary unit vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonMatrix {
    pub lambda: C64,
    pub gamma: DMatrix<C64>,
}

/// Normal-derivative convention carried by a DtN matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormalConvention {
    /// `Σ_n (g_b - u_n) / h` over the inward neighbours of `b`.
    OutwardNeighbourSum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DtnMatrix {
    pub lambda: C64,
    pub m: DMatrix<C64>,
    pub convention: NormalConvention,
}

pub fn poisson_matrix(op: &DirichletOperator, lambda: C64) -> Result<PoissonMatrix> {
    let r = ShiftedResolvent::new(op, lambda)?;
    Ok(PoissonMatrix {
        lambda,
        gamma: r.poisson_matrix(),
    })
}

pub fn dtn_matrix(op: &DirichletOperator, lambda: C64) -> Result<DtnMatrix> {
    let r = ShiftedResolvent::new(op, lambda)?;
    Ok(DtnMatrix {
        lambda,
        m: r.dtn_matrix(),
        convention: NormalConvention::OutwardNeighbourSum,
    })
}

/// `γ(λ)*` as a matrix, built column by column as `u ↦ -∂_ν((A_II - λ̄)⁻¹ u)` with zero
/// boundary data.
pub fn gamma_adjoint(op: &DirichletOperator, lambda: C64) -> Result<DMatrix<C64>> {
    let r = ShiftedResolvent::new(op, lambda.conj())?;
    let dom = op.domain();
    let zero = DVector::zeros(dom.n_boundary());
    let mut out = DMatrix::zeros(dom.n_boundary(), dom.n_interior());
    let mut e = DVector::zeros(dom.n_interior());
    for j in 0..dom.n_interior() {
        e[j] = c64(1.0, 0.0);
        let v = r.solve(&e);
        out.set_column(j, &-outward_derivative(dom, &zero, &v));
        e[j] = c64(0.0, 0.0);
    }
    Ok(out)
}

/// Applies `γ(λ)*` to one field through `r = ShiftedResolvent(λ̄)`.
pub fn apply_gamma_adjoint(r: &ShiftedResolvent<'_>, u: &DVector<C64>) -> DVector<C64> {
    let dom = r.operator().domain();
    let zero = DVector::zeros(dom.n_boundary());
    -outward_derivative(dom, &zero, &r.solve(u))
}

fn rel_residual(lhs: &DMatrix<C64>, rhs: &DMatrix<C64>) -> f64 {
    let scale = lhs.norm().max(rhs.norm());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).norm() / scale
    }
}

/// Relative Frobenius residuals of the four resolvent/Weyl identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub lambda: C64,
    pub zeta: C64,
    pub nu: C64,
    /// `γ(λ) = (I + (λ-ζ)(A-λ)⁻¹) γ(ζ)`.
    pub resolvent_shift: f64,
    /// `(ζ̄-λ) γ(ζ)* γ(λ) = M(λ) - M(ζ)*`.
    pub dtn_difference: f64,
    /// `γ(ζ)* (A-λ)⁻¹ γ(ν)` in terms of `M` at `λ`, `ζ̄`, `ν`.
    pub three_point: f64,
    /// `M(λ) = Re M(ζ) - γ(ζ)* ((λ - Re ζ) + (λ-ζ)(λ-ζ̄)(A-λ)⁻¹) γ(ζ)`.
    pub weyl_representation: f64,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.resolvent_shift
            .max(self.dtn_difference)
            .max(self.three_point)
            .max(self.weyl_representation)
    }
}

fn too_close(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-12 * (1.0 + a.norm().max(b.norm()))
}

pub fn identity_suite(op: &DirichletOperator, lambda: C64, zeta: C64, nu: C64) -> Result<IdentityReport> {
    if too_close(nu, zeta.conj()) {
        return Err(Error::DegenerateParameters(format!("ν = {nu} equals conj(ζ)")));
    }
    if too_close(lambda, nu) || too_close(lambda, zeta.conj()) {
        return Err(Error::DegenerateParameters(format!(
            "λ = {lambda} coincides with ν or conj(ζ)"
        )));
    }
    let dom = op.domain();
    let r_lam = ShiftedResolvent::new(op, lambda)?;
    let r_zeta = ShiftedResolvent::new(op, zeta)?;
    let r_zeta_bar = ShiftedResolvent::new(op, zeta.conj())?;
    let r_nu = ShiftedResolvent::new(op, nu)?;

    let g_lam = r_lam.poisson_matrix();
    let g_zeta = r_zeta.poisson_matrix();
    let g_nu = r_nu.poisson_matrix();
    let m_lam = r_lam.dtn_matrix();
    let m_zeta = r_zeta.dtn_matrix();
    let m_zeta_bar = r_zeta_bar.dtn_matrix();
    let m_nu = r_nu.dtn_matrix();
    let g_zeta_adj = gamma_adjoint(op, zeta)?;

    let solve_cols = |r: &ShiftedResolvent<'_>, x: &DMatrix<C64>| {
        let mut out = x.clone();
        for (k, col) in x.column_iter().enumerate() {
            out.set_column(k, &r.solve(&col.clone_owned()));
        }
        out
    };

    // Resolvent shift.
    let rhs = &g_zeta + solve_cols(&r_lam, &g_zeta) * (lambda - zeta);
    let resolvent_shift = rel_residual(&g_lam, &rhs);

    // Difference of DtN maps.
    let lhs = &g_zeta_adj * &g_lam * (zeta.conj() - lambda);
    let dtn_difference = rel_residual(&lhs, &(&m_lam - m_zeta.adjoint()));

    // Three-point identity at z = λ.
    let z = lambda;
    let lhs = &g_zeta_adj * solve_cols(&r_lam, &g_nu);
    let rhs = &m_lam / ((z - nu) * (zeta.conj() - z)) + &m_zeta_bar / ((z - zeta.conj()) * (zeta.conj() - nu))
        - &m_nu / ((z - nu) * (zeta.conj() - nu));
    let three_point = rel_residual(&lhs, &rhs);

    // Weyl representation around ζ.
    let re_m = (&m_zeta + m_zeta.adjoint()) * c64(0.5, 0.0);
    let inner = &g_zeta * (lambda - zeta.re) + solve_cols(&r_lam, &g_zeta) * ((lambda - zeta) * (lambda - zeta.conj()));
    let rhs = re_m - &g_zeta_adj * inner;
    let weyl_representation = rel_residual(&m_lam, &rhs);

    debug_assert_eq!(m_lam.nrows(), dom.n_boundary());
    Ok(IdentityReport {
        lambda,
        zeta,
        nu,
        resolvent_shift,
        dtn_difference,
        three_point,
        weyl_representation,
    })
}

/// Both sides of `Im (M(λ)g, g) = -Im λ ‖γ(λ)g‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HerglotzDefect {
    pub im_form: f64,
    pub expected: f64,
    pub rel_residual: f64,
}

pub fn herglotz_defect(op: &DirichletOperator, lambda: C64, g: &BoundaryVector) -> Result<HerglotzDefect> {
    let dom = op.domain();
    let r = ShiftedResolvent::new(op, lambda)?;
    let (u, mg) = r.poisson_and_dtn(g);
    let im_form = dom.boundary_inner(&mg, g).im;
    let expected = -lambda.im * dom.interior_norm(&u).powi(2);
    let scale = im_form.abs().max(expected.abs());
    let rel_residual = if scale == 0.0 { 0.0 } else { (im_form - expected).abs() / scale };
    Ok(HerglotzDefect {
        im_form,
        expected,
        rel_residual,
    })
}

/// `M_Θ(λ) = (Θ - M(λ))⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct RobinMap {
    pub lambda: C64,
    pub theta: DMatrix<f64>,
    pub m_theta: DMatrix<C64>,
}

/// Largest accepted condition number of `Θ - M(λ)`.
pub const ROBIN_CONDITION_MAX: f64 = 1e12;

pub fn robin_to_dirichlet(op: &DirichletOperator, lambda: C64, theta: &DMatrix<f64>) -> Result<RobinMap> {
    let n = op.domain().n_boundary();
    if theta.nrows() != n || theta.ncols() != n {
        return Err(Error::DimensionMismatch {
            what: "Robin parameter",
            expected: n,
            got: theta.nrows(),
        });
    }
    if theta != &theta.transpose() {
        return Err(Error::InvalidArgument("Robin parameter must be symmetric".into()));
    }
    let m = dtn_matrix(op, lambda)?.m;
    let pencil = theta.map(|v| c64(v, 0.0)) - m;
    let sv = pencil.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin == 0.0 { f64::INFINITY } else { smax / smin };
    if !(condition < ROBIN_CONDITION_MAX) {
        return Err(Error::SingularRobinPencil { lambda, condition });
    }
    let m_theta = pencil
        .try_inverse()
        .ok_or(Error::SingularRobinPencil { lambda, condition })?;
    Ok(RobinMap {
        lambda,
        theta: theta.clone(),
        m_theta,
    })
}

/// Herglotz defect at one random draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HerglotzSample {
    pub lambda: C64,
    pub probe: Vec<C64>,
    pub defect: HerglotzDefect,
}

/// Identity and Herglotz residuals over seeded random parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub identities: Vec<IdentityReport>,
    pub herglotz: Vec<HerglotzSample>,
    pub max_identity_residual: f64,
    pub max_herglotz_residual: f64,
}

/// Non-real point with real part in `[lo, hi]` and `|Im|` in `[0.05, 2]`.
fn random_nonreal(rng: &mut impl Rng, lo: f64, hi: f64, upper_only: bool) -> C64 {
    let re = rng.random_range(lo..hi);
    let mut im = rng.random_range(0.05..2.0);
    if !upper_only && rng.random_bool(0.5) {
        im = -im;
    }
    c64(re, im)
}

/// Runs `identity_suite` on `identity_draws` admissible `(λ, ζ, ν)` and `herglotz_defect` on
/// `herglotz_draws` upper-half-plane `λ` with random complex probes. Draws that hit a
/// degenerate configuration are redrawn.
pub fn validation_run(op: &DirichletOperator, seed: u64, identity_draws: usize, herglotz_draws: usize) -> Result<ValidationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = op.potential().min().min(0.0) - 1.0;
    let hi = op.norm1() + 1.0;
    let mut identities = Vec::with_capacity(identity_draws);
    while identities.len() < identity_draws {
        let lambda = random_nonreal(&mut rng, lo, hi, false);
        let zeta = random_nonreal(&mut rng, lo, hi, false);
        let nu = random_nonreal(&mut rng, lo, hi, false);
        match identity_suite(op, lambda, zeta, nu) {
            Ok(r) => identities.push(r),
            Err(Error::DegenerateParameters(_)) | Err(Error::NearSpectrum { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    let dom = op.domain();
    let mut herglotz = Vec::with_capacity(herglotz_draws);
    while herglotz.len() < herglotz_draws {
        let lambda = random_nonreal(&mut rng, lo, hi, true);
        let probe: Vec<C64> = (0..dom.n_boundary())
            .map(|_| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let g = BoundaryVector(DVector::from_vec(probe.clone()));
        let defect = herglotz_defect(op, lambda, &g)?;
        herglotz.push(HerglotzSample { lambda, probe, defect });
    }
    let max_identity_residual = identities.iter().map(|r| r.max_residual()).fold(0.0, f64::max);
    let max_herglotz_residual = herglotz.iter().map(|s| s.defect.rel_residual).fold(0.0, f64::max);
    Ok(ValidationReport {
        seed,
        identities,
        herglotz,
        max_identity_residual,
        max_herglotz_residual,
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

    fn annulus() -> DirichletOperator {
        let dom = build_domain(&DomainSpec::Exterior2d {
            h: 1.0,
            obstacle_half_width: 1.5,
            box_half_width: 7.5,
        })
        .unwrap();
        assemble_operator(&dom, &PotentialField::zero(&dom)).unwrap()
    }

    fn one(op: &DirichletOperator) -> BoundaryVector {
        BoundaryVector::from_real(op.domain(), &[1.0]).unwrap()
    }

    #[test]
    fn t1_poisson_solution() {
        let op = t1();
        let u = poisson_solve(&op, c64(0.0, 0.0), &one(&op)).unwrap();
        assert_relative_eq!(u[0].re, 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(u[1].re, 1.0 / 3.0, epsilon = 1e-15);
        let lam = c64(0.0, 1.0);
        let u = poisson_solve(&op, lam, &one(&op)).unwrap();
        let load = op.inject(&one(&op));
        let resid = op.matrix().mul_complex(&u) - u.map(|v| v * lam) - &load;
        assert!(resid.norm() <= 1e-12 * load.norm());
        assert!(matches!(
            poisson_solve(&op, c64(1.0, 0.0), &one(&op)),
            Err(Error::NearSpectrum { .. })
        ));
    }

    #[test]
    fn normal_derivative_cases() {
        let op = t1();
        let dom = op.domain();
        let u = InteriorField::from_real(dom, &[2.0 / 3.0, 1.0 / 3.0]).unwrap();
        let d = normal_derivative(dom, &one(&op), &u).unwrap();
        assert_relative_eq!(d[0].re, 1.0 / 3.0, epsilon = 1e-15);
        let zero = normal_derivative(dom, &BoundaryVector::zeros(dom), &InteriorField::zeros(dom)).unwrap();
        assert_eq!(zero[0], c64(0.0, 0.0));
        let c = 2.5;
        let d = normal_derivative(
            dom,
            &BoundaryVector::from_real(dom, &[c]).unwrap(),
            &InteriorField::from_real(dom, &[c, c]).unwrap(),
        )
        .unwrap();
        assert_eq!(d[0], c64(0.0, 0.0));
        let bad = BoundaryVector(DVector::zeros(3));
        assert!(normal_derivative(dom, &bad, &u).is_err());
    }

    #[test]
    fn t1_dtn_values() {
        let op = t1();
        assert_relative_eq!(dtn_matrix(&op, c64(0.0, 0.0)).unwrap().m[(0, 0)].re, 1.0 / 3.0, epsilon = 1e-15);
        // Eigen-sum: 1 - [½/(1-2) + ½/(3-2)].
        let expected = 1.0 - (0.5 / (1.0 - 2.0) + 0.5 / (3.0 - 2.0));
        assert_relative_eq!(dtn_matrix(&op, c64(2.0, 0.0)).unwrap().m[(0, 0)].re, expected, epsilon = 1e-14);
        let up = dtn_matrix(&op, c64(0.0, 1.0)).unwrap().m;
        let down = dtn_matrix(&op, c64(0.0, -1.0)).unwrap().m;
        assert!((up.adjoint() - down).camax() < 1e-15);
    }

    #[test]
    fn conjugate_symmetry_on_annulus() {
        let op = annulus();
        let lam = c64(0.7, 0.3);
        let up = dtn_matrix(&op, lam).unwrap().m;
        let down = dtn_matrix(&op, lam.conj()).unwrap().m;
        assert!((up.adjoint() - down).camax() <= 1e-12 * up.camax());
    }

    #[test]
    fn gamma_adjoint_is_weighted_adjoint() {
        for op in [t1(), annulus()] {
            let dom = op.domain();
            let lam = c64(0.4, 1.0);
            let adj = gamma_adjoint(&op, lam).unwrap();
            let gamma = poisson_matrix(&op, lam).unwrap().gamma;
            let weighted = gamma.adjoint() * c64(dom.interior_weight() / dom.boundary_weight(), 0.0);
            assert!((adj - &weighted).camax() <= 1e-12 * weighted.camax());
        }
        let op = t1();
        let adj = gamma_adjoint(&op, c64(0.0, 0.0)).unwrap();
        assert_relative_eq!(adj[(0, 0)].re, 2.0 / 3.0, epsilon = 1e-15);
        let zero = &adj * DVector::<C64>::zeros(2);
        assert_eq!(zero[0], c64(0.0, 0.0));
    }

    #[test]
    fn t1_identities_at_fixed_parameters() {
        let rep = identity_suite(&t1(), c64(1.0, 2.0), c64(-1.0, 1.0), c64(3.0, -1.0)).unwrap();
        assert!(rep.max_residual() <= 1e-12, "{rep:?}");
    }

    #[test]
    fn identities_hold_on_annulus() {
        let rep = identity_suite(&annulus(), c64(0.3, 0.5), c64(2.0, -0.7), c64(-0.5, 1.3)).unwrap();
        assert!(rep.max_residual() <= 1e-10, "{rep:?}");
    }

    #[test]
    fn degenerate_parameters_are_rejected() {
        let zeta = c64(-1.0, 1.0);
        let err = identity_suite(&t1(), c64(1.0, 2.0), zeta, zeta.conj()).unwrap_err();
        assert!(matches!(err, Error::DegenerateParameters(_)));
    }

    #[test]
    fn herglotz_defect_vanishes() {
        let op = annulus();
        let g = BoundaryVector(DVector::from_fn(8, |i, _| c64(i as f64 - 3.0, 0.5 * i as f64)));
        let d = herglotz_defect(&op, c64(1.1, 0.2), &g).unwrap();
        assert!(d.im_form < 0.0);
        assert!(d.rel_residual <= 1e-10);
    }

    #[test]
    fn t1_robin_maps() {
        let op = t1();
        let zero = DMatrix::from_element(1, 1, 0.0);
        let r = robin_to_dirichlet(&op, c64(0.0, 0.0), &zero).unwrap();
        assert_relative_eq!(r.m_theta[(0, 0)].re, -3.0, epsilon = 1e-14);
        let two = DMatrix::from_element(1, 1, 2.0);
        let r = robin_to_dirichlet(&op, c64(2.0, 0.0), &two).unwrap();
        assert_relative_eq!(r.m_theta[(0, 0)].re, 1.0, epsilon = 1e-14);
        let m0 = dtn_matrix(&op, c64(0.0, 0.0)).unwrap().m[(0, 0)].re;
        let err = robin_to_dirichlet(&op, c64(0.0, 0.0), &DMatrix::from_element(1, 1, m0)).unwrap_err();
        assert!(matches!(err, Error::SingularRobinPencil { .. }));
    }

    #[test]
    fn robin_inverse_on_annulus() {
        let op = annulus();
        let theta = DMatrix::from_fn(8, 8, |i, j| if i == j { 0.5 } else { 0.1 / (1.0 + (i + j) as f64) });
        let lam = c64(1.3, 0.4);
        let r = robin_to_dirichlet(&op, lam, &theta).unwrap();
        let m = dtn_matrix(&op, lam).unwrap().m;
        let id = (theta.map(|v| c64(v, 0.0)) - m) * &r.m_theta;
        assert!((id - DMatrix::identity(8, 8)).camax() <= 1e-10);
    }
}
