//! DtN map of the three-node half-line model at a few spectral parameters.

use dtn_spectral::domain::{assemble_operator, build_domain, DomainSpec, PotentialField};
use dtn_spectral::dtn::dtn_matrix;
use dtn_spectral::C64;

fn main() {
    let dom = build_domain(&DomainSpec::HalfLine1d { h: 1.0, length: 3.0 }).unwrap();
    let op = assemble_operator(&dom, &PotentialField::zero(&dom)).unwrap();
    for lambda in [C64::new(0.5, 0.5), C64::new(2.0, 0.1), C64::new(-1.0, 0.0)] {
        let m = dtn_matrix(&op, lambda).unwrap();
        println!("M({lambda}) = {}", m.m[(0, 0)]);
    }
}
