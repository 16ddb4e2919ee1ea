//! Spectral data of discrete Schrödinger operators `-Δ + q` on truncated exterior domains,
//! read off from the Dirichlet-to-Neumann map `M(λ)`.
//!
//! The crate is layered bottom-up:
//!
//! * [`domain`] builds grids, potentials, the Dirichlet operator and a dense eigen-oracle;
//! * [`dtn`] evaluates the Poisson operator, the DtN matrix and the resolvent identities;
//! * [`limits`] extracts `η ↘ 0` limits, residues and the analytic-continuation test;
//! * [`classify`] turns those limits into pointwise and windowed spectral verdicts;
//! * [`measures`] holds spectral measures, Borel transforms and Stone projections;
//! * [`config`], [`sweep`] and [`report`] drive runs from a TOML file and serialize results.

pub mod banded;
pub mod classify;
pub mod config;
pub mod convergence;
pub mod domain;
pub mod dtn;
pub mod error;
pub mod limits;
pub mod measures;
pub mod report;
pub mod sweep;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};

pub(crate) fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
