//! Grids, potentials, the Dirichlet operator and the dense eigen-oracle.

use std::ops::{Deref, DerefMut};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::banded::SymSparse;
use crate::{Error, Result, C64};

const LATTICE_EPS: f64 = 1e-9;

/// Which truncated domain to build.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    /// `(0, L)` with the boundary point at 0 and the far end at `L`.
    #[serde(rename = "halfline1d")]
    HalfLine1d { h: f64, length: f64 },
    /// Square box `[-L, L]²` minus the closed square obstacle `[-a, a]²`.
    #[serde(rename = "exterior2d")]
    Exterior2d {
        h: f64,
        obstacle_half_width: f64,
        box_half_width: f64,
    },
}

/// Lattice node, coordinates are `index * h`. 1D nodes have `index[1] == 0`.
pub type Node = [i64; 2];

/// Truncated grid with interior, Dirichlet-boundary and truncation node sets.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDomain {
    dimension: usize,
    h: f64,
    interior: Vec<Node>,
    boundary: Vec<Node>,
    truncation: Vec<Node>,
    /// For each boundary node, the interior indices of its inward neighbours.
    boundary_adjacency: Vec<Vec<usize>>,
    /// Interior neighbours of each interior node.
    interior_adjacency: Vec<Vec<usize>>,
}

impl DiscreteDomain {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn interior_nodes(&self) -> &[Node] {
        &self.interior
    }

    pub fn boundary_nodes(&self) -> &[Node] {
        &self.boundary
    }

    pub fn truncation_nodes(&self) -> &[Node] {
        &self.truncation
    }

    pub fn boundary_adjacency(&self) -> &[Vec<usize>] {
        &self.boundary_adjacency
    }

    pub fn interior_adjacency(&self) -> &[Vec<usize>] {
        &self.interior_adjacency
    }

    pub fn n_interior(&self) -> usize {
        self.interior.len()
    }

    pub fn n_boundary(&self) -> usize {
        self.boundary.len()
    }

    /// `h^d`.
    pub fn interior_weight(&self) -> f64 {
        self.h.powi(self.dimension as i32)
    }

    /// `h^(d-1)`.
    pub fn boundary_weight(&self) -> f64 {
        self.h.powi(self.dimension as i32 - 1)
    }

    pub fn coords(&self, node: Node) -> [f64; 2] {
        [node[0] as f64 * self.h, node[1] as f64 * self.h]
    }

    /// Lattice distance (in units of h, max-norm) from a node to the Dirichlet boundary set.
    fn boundary_distance(&self, node: Node) -> f64 {
        self.boundary
            .iter()
            .map(|b| (node[0] - b[0]).abs().max((node[1] - b[1]).abs()))
            .min()
            .unwrap_or(0) as f64
            * self.h
    }

    /// Weighted inner product on interior fields, conjugate-linear in `v`.
    pub fn interior_inner(&self, u: &DVector<C64>, v: &DVector<C64>) -> C64 {
        weighted_inner(self.interior_weight(), u, v)
    }

    pub fn boundary_inner(&self, u: &DVector<C64>, v: &DVector<C64>) -> C64 {
        weighted_inner(self.boundary_weight(), u, v)
    }

    pub fn interior_norm(&self, u: &DVector<C64>) -> f64 {
        (self.interior_weight() * u.norm_squared()).sqrt()
    }

    pub fn boundary_norm(&self, g: &DVector<C64>) -> f64 {
        (self.boundary_weight() * g.norm_squared()).sqrt()
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDomain(msg));
        for (b, nbrs) in self.boundary_adjacency.iter().enumerate() {
            if nbrs.is_empty() {
                return bad(format!("boundary node {:?} has no interior neighbour", self.boundary[b]));
            }
            for &n in nbrs {
                let (p, q) = (self.boundary[b], self.interior[n]);
                if (p[0] - q[0]).abs() + (p[1] - q[1]).abs() != 1 {
                    return bad(format!("{p:?} and {q:?} are not grid neighbours"));
                }
            }
        }
        // Connectivity of the interior graph.
        let n = self.interior.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for &j in &self.interior_adjacency[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return bad("interior nodes are not connected".into());
        }
        Ok(())
    }
}

fn weighted_inner(w: f64, u: &DVector<C64>, v: &DVector<C64>) -> C64 {
    u.iter().zip(v.iter()).map(|(a, b)| a * b.conj()).sum::<C64>() * w
}

fn lattice_count(len: f64, h: f64) -> i64 {
    (len / h + LATTICE_EPS).floor() as i64
}

pub fn build_domain(spec: &DomainSpec) -> Result<DiscreteDomain> {
    match *spec {
        DomainSpec::HalfLine1d { h, length } => build_halfline(h, length),
        DomainSpec::Exterior2d {
            h,
            obstacle_half_width,
            box_half_width,
        } => build_exterior(h, obstacle_half_width, box_half_width),
    }
}

fn check_h(h: f64) -> Result<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidDomain(format!("mesh spacing h must be positive, got {h}")));
    }
    Ok(())
}

fn build_halfline(h: f64, length: f64) -> Result<DiscreteDomain> {
    check_h(h)?;
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidDomain(format!("length must be positive, got {length}")));
    }
    let n = lattice_count(length, h);
    if n < 3 {
        return Err(Error::InvalidDomain(format!(
            "need at least 2 interior nodes, got {}",
            (n - 1).max(0)
        )));
    }
    let interior: Vec<Node> = (1..n).map(|i| [i, 0]).collect();
    let m = interior.len();
    let interior_adjacency = (0..m)
        .map(|i| {
            let mut v = Vec::with_capacity(2);
            if i > 0 {
                v.push(i - 1);
            }
            if i + 1 < m {
                v.push(i + 1);
            }
            v
        })
        .collect();
    let dom = DiscreteDomain {
        dimension: 1,
        h,
        interior,
        boundary: vec![[0, 0]],
        truncation: vec![[n, 0]],
        boundary_adjacency: vec![vec![0]],
        interior_adjacency,
    };
    dom.check()?;
    Ok(dom)
}

fn build_exterior(h: f64, a: f64, l: f64) -> Result<DiscreteDomain> {
    check_h(h)?;
    if !(a > 0.0 && a < l) {
        return Err(Error::InvalidDomain(format!(
            "obstacle half-width must satisfy 0 < a < L, got a = {a}, L = {l}"
        )));
    }
    let na = lattice_count(a, h);
    let nb = lattice_count(l, h);
    if na < 1 {
        return Err(Error::InvalidDomain(format!(
            "obstacle half-width {a} is below one mesh step {h}"
        )));
    }
    if na + 1 >= nb {
        return Err(Error::InvalidDomain(format!(
            "obstacle ring {na} leaves no interior before the truncation ring {nb}"
        )));
    }
    let ring = |p: Node| p[0].abs().max(p[1].abs());
    let mut interior = Vec::new();
    let mut boundary = Vec::new();
    let mut truncation = Vec::new();
    // Row-major in (y, x) so that the interior bandwidth is one grid row.
    for j in -nb..=nb {
        for i in -nb..=nb {
            let p = [i, j];
            let r = ring(p);
            if r == nb {
                truncation.push(p);
            } else if r > na {
                interior.push(p);
            } else if r == na {
                boundary.push(p);
            }
        }
    }
    let index_of = |p: Node| interior.binary_search_by(|q| (q[1], q[0]).cmp(&(p[1], p[0]))).ok();
    let steps: [[i64; 2]; 4] = [[-1, 0], [1, 0], [0, -1], [0, 1]];
    let interior_adjacency = interior
        .iter()
        .map(|&p| {
            steps
                .iter()
                .filter_map(|s| index_of([p[0] + s[0], p[1] + s[1]]))
                .collect()
        })
        .collect();
    let boundary_adjacency = boundary
        .iter()
        .map(|&p| {
            steps
                .iter()
                .filter_map(|s| index_of([p[0] + s[0], p[1] + s[1]]))
                .collect()
        })
        .collect();
    let dom = DiscreteDomain {
        dimension: 2,
        h,
        interior,
        boundary,
        truncation,
        boundary_adjacency,
        interior_adjacency,
    };
    dom.check()?;
    Ok(dom)
}

/// Named potential presets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    Constant { value: f64 },
    /// `q = -depth` on nodes closer than `width` to the Dirichlet boundary, else 0.
    Well { depth: f64, width: f64 },
    /// Values on interior nodes followed by boundary nodes.
    Tabulated { values: Vec<f64> },
}

/// Real potential on interior nodes followed by Dirichlet-boundary nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    values: Vec<f64>,
    bound: f64,
}

impl PotentialField {
    /// Bound defaults to `max |q|`.
    pub fn new(values: Vec<f64>) -> Self {
        let bound = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        Self { values, bound }
    }

    pub fn with_bound(values: Vec<f64>, bound: f64) -> Result<Self> {
        if let Some(&v) = values.iter().find(|v| v.abs() > bound) {
            return Err(Error::PotentialBound { value: v, bound });
        }
        Ok(Self { values, bound })
    }

    pub fn zero(dom: &DiscreteDomain) -> Self {
        Self::new(vec![0.0; dom.n_interior() + dom.n_boundary()])
    }

    pub fn constant(dom: &DiscreteDomain, c: f64) -> Self {
        Self::new(vec![c; dom.n_interior() + dom.n_boundary()])
    }

    pub fn from_fn(dom: &DiscreteDomain, f: impl Fn(Node) -> f64) -> Self {
        let values = dom
            .interior_nodes()
            .iter()
            .chain(dom.boundary_nodes())
            .map(|&p| f(p))
            .collect();
        Self::new(values)
    }

    pub fn from_spec(dom: &DiscreteDomain, spec: &PotentialSpec) -> Result<Self> {
        Ok(match spec {
            PotentialSpec::Zero => Self::zero(dom),
            PotentialSpec::Constant { value } => Self::constant(dom, *value),
            PotentialSpec::Well { depth, width } => {
                Self::from_fn(dom, |p| if dom.boundary_distance(p) < *width { -depth } else { 0.0 })
            }
            PotentialSpec::Tabulated { values } => {
                let expected = dom.n_interior() + dom.n_boundary();
                if values.len() != expected {
                    return Err(Error::DimensionMismatch {
                        what: "tabulated potential",
                        expected,
                        got: values.len(),
                    });
                }
                Self::new(values.clone())
            }
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Interior block `A_II` of `-Δ + q` and the boundary injection `B`.
#[derive(Debug, Clone)]
pub struct DirichletOperator {
    domain: DiscreteDomain,
    potential: PotentialField,
    a: SymSparse,
    a_norm1: f64,
}

pub fn assemble_operator(dom: &DiscreteDomain, q: &PotentialField) -> Result<DirichletOperator> {
    let expected = dom.n_interior() + dom.n_boundary();
    if q.values().len() != expected {
        return Err(Error::DimensionMismatch {
            what: "potential",
            expected,
            got: q.values().len(),
        });
    }
    let h2 = dom.h() * dom.h();
    let diag = 2.0 * dom.dimension() as f64 / h2;
    let rows = dom
        .interior_adjacency()
        .iter()
        .enumerate()
        .map(|(i, nbrs)| {
            let mut row = Vec::with_capacity(nbrs.len() + 1);
            row.push((i, diag + q.values()[i]));
            row.extend(nbrs.iter().map(|&j| (j, -1.0 / h2)));
            row
        })
        .collect();
    let a = SymSparse::from_rows(rows);
    let a_norm1 = a.norm1();
    Ok(DirichletOperator {
        domain: dom.clone(),
        potential: q.clone(),
        a,
        a_norm1,
    })
}

impl DirichletOperator {
    pub fn domain(&self) -> &DiscreteDomain {
        &self.domain
    }

    pub fn potential(&self) -> &PotentialField {
        &self.potential
    }

    pub fn matrix(&self) -> &SymSparse {
        &self.a
    }

    pub fn a_dense(&self) -> DMatrix<f64> {
        self.a.to_dense()
    }

    /// ‖A_II‖₁.
    pub fn norm1(&self) -> f64 {
        self.a_norm1
    }

    /// Dense `B`: `1/h²` at each (inward neighbour, boundary node) pair.
    pub fn boundary_injection(&self) -> DMatrix<f64> {
        let dom = &self.domain;
        let mut b = DMatrix::zeros(dom.n_interior(), dom.n_boundary());
        let inv_h2 = 1.0 / (dom.h() * dom.h());
        for (k, nbrs) in dom.boundary_adjacency().iter().enumerate() {
            for &n in nbrs {
                b[(n, k)] = inv_h2;
            }
        }
        b
    }

    /// `B g` without forming `B`.
    pub fn inject(&self, g: &DVector<C64>) -> DVector<C64> {
        let dom = &self.domain;
        let inv_h2 = 1.0 / (dom.h() * dom.h());
        let mut load = DVector::zeros(dom.n_interior());
        for (k, nbrs) in dom.boundary_adjacency().iter().enumerate() {
            for &n in nbrs {
                load[n] += g[k] * inv_h2;
            }
        }
        load
    }

    /// Number of eigenvalues in `[lo, hi)` from band inertia (no eigendecomposition).
    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        self.a.count_in(lo, hi)
    }
}

macro_rules! field_newtype {
    ($name:ident, $what:literal, $len:ident) => {
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(pub DVector<C64>);

        impl $name {
            pub fn new(dom: &DiscreteDomain, values: DVector<C64>) -> Result<Self> {
                if values.len() != dom.$len() {
                    return Err(Error::DimensionMismatch {
                        what: $what,
                        expected: dom.$len(),
                        got: values.len(),
                    });
                }
                Ok(Self(values))
            }

            pub fn zeros(dom: &DiscreteDomain) -> Self {
                Self(DVector::zeros(dom.$len()))
            }

            pub fn from_real(dom: &DiscreteDomain, values: &[f64]) -> Result<Self> {
                Self::new(dom, DVector::from_iterator(values.len(), values.iter().map(|&v| C64::new(v, 0.0))))
            }

            pub fn into_inner(self) -> DVector<C64> {
                self.0
            }
        }

        impl Deref for $name {
            type Target = DVector<C64>;
            fn deref(&self) -> &DVector<C64> {
                &self.0
            }
        }

        impl DerefMut for $name {
            fn deref_mut(&mut self) -> &mut DVector<C64> {
                &mut self.0
            }
        }
    };
}

field_newtype!(InteriorField, "interior field", n_interior);
field_newtype!(BoundaryVector, "boundary vector", n_boundary);

impl BoundaryVector {
    /// `k`-th unit vector of the boundary basis.
    pub fn unit(dom: &DiscreteDomain, k: usize) -> Self {
        let mut v = DVector::zeros(dom.n_boundary());
        v[k] = C64::new(1.0, 0.0);
        Self(v)
    }
}

/// Dense eigendecomposition of `A_II`, used as the independent reference.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    values: Vec<f64>,
    /// Columns are eigenvectors, orthonormal in the `w_I` inner product.
    vectors: DMatrix<f64>,
    groups: Vec<std::ops::Range<usize>>,
    tolerance: f64,
    weight: f64,
}

impl EigenSystem {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Degeneracy tolerance used for grouping.
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Index ranges of eigenvalue clusters, ascending.
    pub fn groups(&self) -> &[std::ops::Range<usize>] {
        &self.groups
    }

    /// Group mean values with their multiplicity.
    pub fn distinct(&self) -> Vec<(f64, usize)> {
        self.groups
            .iter()
            .map(|g| {
                let mean = self.values[g.clone()].iter().sum::<f64>() / g.len() as f64;
                (mean, g.len())
            })
            .collect()
    }

    /// Group whose members lie within `tol` of `x`.
    pub fn group_at(&self, x: f64, tol: f64) -> Option<std::ops::Range<usize>> {
        self.groups
            .iter()
            .find(|g| self.values[(*g).clone()].iter().any(|&v| (v - x).abs() <= tol))
            .cloned()
    }

    /// Eigenvector `k` as a complex interior field.
    pub fn vector(&self, k: usize) -> InteriorField {
        InteriorField(self.vectors.column(k).map(|v| C64::new(v, 0.0)))
    }

    /// Distance from `x` to the nearest eigenvalue.
    pub fn distance_to(&self, x: f64) -> f64 {
        self.values.iter().map(|v| (v - x).abs()).fold(f64::INFINITY, f64::min)
    }
}

pub fn oracle_eigendecomposition(op: &DirichletOperator) -> EigenSystem {
    let dense = op.a_dense();
    let eig = SymmetricEigen::new(dense);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let weight = op.domain().interior_weight();
    let scale = 1.0 / weight.sqrt();
    let n = values.len();
    let mut vectors = DMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(i).clone_owned() * scale;
        // Fix the sign so the first sizeable entry is positive.
        if let Some(v) = col.iter().find(|v| v.abs() > 1e-8 * scale) {
            if *v < 0.0 {
                col = -col;
            }
        }
        vectors.set_column(c, &col);
    }
    let diameter = (values[n - 1] - values[0]).max(values[n - 1].abs().max(values[0].abs()));
    let tolerance = 1e-8 * diameter.max(f64::MIN_POSITIVE);
    let mut groups = Vec::new();
    let mut start = 0;
    for k in 1..=n {
        if k == n || values[k] - values[k - 1] > tolerance {
            groups.push(start..k);
            start = k;
        }
    }
    EigenSystem {
        values,
        vectors,
        groups,
        tolerance,
        weight,
    }
}

/// Sum of `w_I`-orthogonal projectors onto eigenspaces with eigenvalue in `(a, b)`.
pub fn oracle_projector(eig: &EigenSystem, a: f64, b: f64) -> Result<DMatrix<f64>> {
    if !(a < b) {
        return Err(Error::InvalidArgument(format!("need a < b, got ({a}, {b})")));
    }
    for &end in &[a, b] {
        if eig.distance_to(end) <= eig.tolerance {
            return Err(Error::EndpointOnEigenvalue(end));
        }
    }
    let n = eig.vectors.nrows();
    let mut p = DMatrix::zeros(n, n);
    for (k, &v) in eig.values.iter().enumerate() {
        if v > a && v < b {
            let phi = eig.vectors.column(k);
            p += phi * phi.transpose() * eig.weight;
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) fn t1() -> DirichletOperator {
        let dom = build_domain(&DomainSpec::HalfLine1d { h: 1.0, length: 3.0 }).unwrap();
        assemble_operator(&dom, &PotentialField::zero(&dom)).unwrap()
    }

    #[test]
    fn halfline_node_sets() {
        let dom = build_domain(&DomainSpec::HalfLine1d { h: 1.0, length: 3.0 }).unwrap();
        assert_eq!(dom.boundary_nodes(), &[[0, 0]]);
        assert_eq!(dom.interior_nodes(), &[[1, 0], [2, 0]]);
        assert_eq!(dom.truncation_nodes(), &[[3, 0]]);
        let dom = build_domain(&DomainSpec::HalfLine1d { h: 0.5, length: 3.0 }).unwrap();
        assert_eq!(dom.n_interior(), 5);
        assert_eq!(dom.interior_weight(), 0.5);
        assert_eq!(dom.boundary_weight(), 1.0);
    }

    #[test]
    fn exterior_boundary_is_obstacle_perimeter() {
        let dom = build_domain(&DomainSpec::Exterior2d {
            h: 1.0,
            obstacle_half_width: 1.5,
            box_half_width: 7.5,
        })
        .unwrap();
        // Enumerate the perimeter of the 3x3 obstacle independently.
        let mut perimeter = 0;
        for i in -1i64..=1 {
            for j in -1i64..=1 {
                if i.abs() == 1 || j.abs() == 1 {
                    perimeter += 1;
                }
            }
        }
        assert_eq!(dom.n_boundary(), perimeter);
        assert_eq!(dom.n_interior(), 13 * 13 - 9);
        assert_eq!(dom.truncation_nodes().len(), 15 * 15 - 13 * 13);
        let corners = dom.boundary_adjacency().iter().filter(|n| n.len() == 2).count();
        assert_eq!(corners, 4);
    }

    #[test]
    fn domain_errors() {
        assert!(build_domain(&DomainSpec::HalfLine1d { h: -1.0, length: 3.0 }).is_err());
        assert!(build_domain(&DomainSpec::HalfLine1d { h: 1.0, length: 2.0 }).is_err());
        assert!(build_domain(&DomainSpec::Exterior2d {
            h: 1.0,
            obstacle_half_width: 3.0,
            box_half_width: 2.0
        })
        .is_err());
    }

    #[test]
    fn t1_operator_entries() {
        let op = t1();
        let a = op.a_dense();
        assert_eq!(a, DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]));
        assert_eq!(op.boundary_injection(), DMatrix::from_row_slice(2, 1, &[1.0, 0.0]));
        let dom = op.domain().clone();
        let shifted = assemble_operator(&dom, &PotentialField::constant(&dom, 0.7)).unwrap();
        assert_eq!(shifted.a_dense(), a + DMatrix::identity(2, 2) * 0.7);
    }

    #[test]
    fn assembly_is_exactly_symmetric() {
        let dom = build_domain(&DomainSpec::Exterior2d {
            h: 0.5,
            obstacle_half_width: 1.0,
            box_half_width: 3.0,
        })
        .unwrap();
        let q = PotentialField::from_fn(&dom, |p| ((p[0] * 7 + p[1] * 3) % 5) as f64 * 0.1);
        let op = assemble_operator(&dom, &q).unwrap();
        let a = op.a_dense();
        assert_eq!(a, a.transpose());
        let eig = oracle_eigendecomposition(&op);
        assert!(eig.values()[0] >= q.min() - 1e-12);
    }

    #[test]
    fn mismatched_potential_is_rejected() {
        let op = t1();
        let err = assemble_operator(op.domain(), &PotentialField::new(vec![0.0; 2])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        assert!(PotentialField::with_bound(vec![1.0, -3.0], 2.0).is_err());
    }

    #[test]
    fn t1_oracle() {
        let eig = oracle_eigendecomposition(&t1());
        assert_relative_eq!(eig.values()[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(eig.values()[1], 3.0, epsilon = 1e-14);
        let s = 1.0 / 2f64.sqrt();
        let v = eig.vectors();
        assert_relative_eq!(v[(0, 0)], s, epsilon = 1e-14);
        assert_relative_eq!(v[(1, 0)], s, epsilon = 1e-14);
        assert_relative_eq!(v[(0, 1)].abs(), s, epsilon = 1e-14);
        assert_relative_eq!(v[(0, 1)], -v[(1, 1)], epsilon = 1e-14);
    }

    #[test]
    fn oracle_invariants_on_exterior_model() {
        let dom = build_domain(&DomainSpec::Exterior2d {
            h: 1.0,
            obstacle_half_width: 1.5,
            box_half_width: 7.5,
        })
        .unwrap();
        let op = assemble_operator(&dom, &PotentialField::zero(&dom)).unwrap();
        let eig = oracle_eigendecomposition(&op);
        let a = op.a_dense();
        let v = eig.vectors();
        let lam = DMatrix::from_diagonal(&DVector::from_vec(eig.values().to_vec()));
        let resid = (&a * v - v * lam).norm();
        assert!(resid <= 1e-12 * a.norm() * (v.norm()));
        let gram = v.transpose() * v * eig.weight();
        assert!((gram - DMatrix::identity(v.ncols(), v.ncols())).amax() < 1e-12);
        assert!(eig.values().windows(2).all(|w| w[0] <= w[1]));
        assert!(eig.values()[0] >= 0.0);
    }

    #[test]
    fn constant_shift_moves_eigenvalues() {
        let op = t1();
        let dom = op.domain().clone();
        let shifted = assemble_operator(&dom, &PotentialField::constant(&dom, -4.0)).unwrap();
        let (e0, e1) = (oracle_eigendecomposition(&op), oracle_eigendecomposition(&shifted));
        for k in 0..2 {
            assert_relative_eq!(e1.values()[k], e0.values()[k] - 4.0, epsilon = 1e-13);
        }
        assert!((e1.vectors() - e0.vectors()).amax() < 1e-13);
    }

    #[test]
    fn t1_projectors() {
        let eig = oracle_eigendecomposition(&t1());
        let p = oracle_projector(&eig, 0.5, 1.5).unwrap();
        let expected = DMatrix::from_element(2, 2, 0.5);
        assert!((&p - expected).amax() < 1e-14);
        assert!((&p * &p - &p).amax() < 1e-12);
        assert!(oracle_projector(&eig, 1.5, 2.5).unwrap().amax() < 1e-15);
        let full = oracle_projector(&eig, 0.0, 4.0).unwrap();
        assert!((full - DMatrix::identity(2, 2)).amax() < 1e-14);
        assert!(matches!(oracle_projector(&eig, 1.0, 2.0), Err(Error::EndpointOnEigenvalue(_))));
    }

    #[test]
    fn inertia_count_agrees_with_oracle() {
        let dom = build_domain(&DomainSpec::HalfLine1d { h: 0.05, length: 20.0 }).unwrap();
        let q = PotentialField::from_spec(&dom, &PotentialSpec::Well { depth: 2.0, width: 1.0 }).unwrap();
        let op = assemble_operator(&dom, &q).unwrap();
        let eig = oracle_eigendecomposition(&op);
        for (lo, hi) in [(-3.0, 0.0), (0.0, 0.1), (0.1, 0.5), (10.0, 100.0)] {
            let expected = eig.values().iter().filter(|&&v| v >= lo && v < hi).count();
            assert_eq!(op.count_in(lo, hi), expected);
        }
    }
}
