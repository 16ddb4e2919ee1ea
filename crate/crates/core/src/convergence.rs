//! Mesh and truncation refinement studies on the free half-line.

use serde::{Deserialize, Serialize};

use crate::domain::{assemble_operator, build_domain, BoundaryVector, DirichletOperator, DomainSpec, PotentialField};
use crate::dtn::ShiftedResolvent;
use crate::{Error, Result, C64};

/// `m_h(λ) = (1 - r) / h` with `r + 1/r = 2 - h²λ`, `|r| < 1`: the DtN value of the
/// untruncated lattice half-line.
pub fn discrete_halfline_m(h: f64, lambda: C64) -> Result<C64> {
    let b = 2.0 - lambda * (h * h);
    let disc = (b * b - 4.0).sqrt();
    let r1 = (b - disc) * 0.5;
    let r2 = (b + disc) * 0.5;
    let r = if r1.norm() < r2.norm() { r1 } else { r2 };
    if !(r.norm() < 1.0 - 1e-14) {
        return Err(Error::InvalidArgument(format!(
            "lambda = {lambda} lies on the lattice half-line spectrum [0, 4/h^2]"
        )));
    }
    Ok((1.0 - r) / h)
}

/// `√(-λ)` on the principal branch.
pub fn continuum_m(lambda: C64) -> C64 {
    (-lambda).sqrt()
}

fn free_halfline(h: f64, length: f64) -> Result<DirichletOperator> {
    let dom = build_domain(&DomainSpec::HalfLine1d { h, length })?;
    let q = PotentialField::zero(&dom);
    assemble_operator(&dom, &q)
}

/// Truncated DtN value against both half-line oracles at one `(h, L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MSample {
    pub h: f64,
    pub length: f64,
    pub lambda: C64,
    pub truncated: C64,
    pub lattice: C64,
    pub continuum: C64,
    /// `|M_{h,L} - √(-λ)|`.
    pub continuum_error: f64,
    /// `|M_{h,L} - m_h|`.
    pub truncation_error: f64,
}

pub fn m_sample(h: f64, length: f64, lambda: C64) -> Result<MSample> {
    let op = free_halfline(h, length)?;
    let e = BoundaryVector::unit(op.domain(), 0);
    let truncated = ShiftedResolvent::new(&op, lambda)?.dtn_apply(&e)[0];
    let lattice = discrete_halfline_m(h, lambda)?;
    let continuum = continuum_m(lambda);
    Ok(MSample {
        h,
        length,
        lambda,
        truncated,
        lattice,
        continuum,
        continuum_error: (truncated - continuum).norm(),
        truncation_error: (truncated - lattice).norm(),
    })
}

/// Error at `h` and `h/2`, and how much it shrank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MRefinement {
    pub coarse: MSample,
    pub fine: MSample,
    pub reduction: f64,
}

pub fn m_refinement(h: f64, length: f64, lambda: C64) -> Result<MRefinement> {
    let coarse = m_sample(h, length, lambda)?;
    let fine = m_sample(0.5 * h, length, lambda)?;
    Ok(MRefinement {
        coarse,
        fine,
        reduction: coarse.continuum_error / fine.continuum_error,
    })
}

/// `|M_{h,L} - m_h|` for a sequence of truncation lengths at fixed `h`.
pub fn truncation_study(h: f64, lengths: &[f64], lambda: C64) -> Result<Vec<MSample>> {
    lengths.iter().map(|&l| m_sample(h, l, lambda)).collect()
}

/// `k`-th eigenvalue (1-based) by inertia bisection.
pub fn kth_eigenvalue(op: &DirichletOperator, k: usize) -> Result<f64> {
    let n = op.domain().n_interior();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("eigenvalue index {k} outside 1..={n}")));
    }
    let a = op.matrix();
    let bound = op.norm1();
    let (mut lo, mut hi) = (-bound - 1.0, bound + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if a.count_below(mid) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenSample {
    pub h: f64,
    pub value: f64,
    pub error: f64,
}

/// Convergence of the `k`-th Dirichlet eigenvalue of `(0, L)` towards `(kπ/L)²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenRefinement {
    pub k: usize,
    pub length: f64,
    pub exact: f64,
    pub samples: Vec<EigenSample>,
    /// `log(e_i / e_{i+1}) / log(h_i / h_{i+1})` for consecutive samples.
    pub orders: Vec<f64>,
}

impl EigenRefinement {
    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn eigenvalue_refinement(length: f64, k: usize, hs: &[f64]) -> Result<EigenRefinement> {
    if hs.len() < 2 {
        return Err(Error::InvalidArgument("need at least two mesh sizes".into()));
    }
    let exact = (k as f64 * std::f64::consts::PI / length).powi(2);
    let samples = hs
        .iter()
        .map(|&h| {
            let value = kth_eigenvalue(&free_halfline(h, length)?, k)?;
            Ok(EigenSample {
                h,
                value,
                error: (value - exact).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let orders = samples
        .windows(2)
        .map(|w| (w[0].error / w[1].error).ln() / (w[0].h / w[1].h).ln())
        .collect();
    Ok(EigenRefinement {
        k,
        length,
        exact,
        samples,
        orders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use approx::assert_relative_eq;

    #[test]
    fn lattice_root_solves_recurrence() {
        let h = 0.1;
        let lambda = c64(1.0, 0.5);
        let m = discrete_halfline_m(h, lambda).unwrap();
        let r = 1.0 - m * h;
        assert!(r.norm() < 1.0);
        let resid = r + 1.0 / r - (2.0 - lambda * h * h);
        assert!(resid.norm() < 1e-12);
        assert!(discrete_halfline_m(h, c64(1.0, 0.0)).is_err());
    }

    #[test]
    fn continuum_branch() {
        let m = continuum_m(c64(-4.0, 0.0));
        assert_relative_eq!(m.re, 2.0, epsilon = 1e-15);
        assert!(continuum_m(c64(1.0, 0.1)).re > 0.0);
    }

    #[test]
    fn truncated_map_matches_lattice_oracle() {
        // below the spectrum the decay is fast, so a short box suffices
        let s = m_sample(0.1, 20.0, c64(-1.0, 0.0)).unwrap();
        assert!(s.truncation_error < 1e-12);
        let studies = truncation_study(0.1, &[5.0, 10.0], c64(0.5, 0.2)).unwrap();
        assert!(studies[1].truncation_error < studies[0].truncation_error);
    }

    #[test]
    fn second_order_eigenvalues() {
        let r = eigenvalue_refinement(1.0, 1, &[0.1, 0.05, 0.025]).unwrap();
        // closed form of the lattice eigenvalue
        let h = 0.05;
        let lattice = 4.0 / (h * h) * (std::f64::consts::PI * h / 2.0).sin().powi(2);
        assert_relative_eq!(r.samples[1].value, lattice, epsilon = 1e-10);
        assert!(r.min_order() >= 1.9);
    }
}
