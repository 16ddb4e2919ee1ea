//! Spectral projection of the three-node model from the resolvent, compared with the oracle.

use dtn_spectral::domain::{assemble_operator, build_domain, oracle_eigendecomposition, oracle_projector, DomainSpec, PotentialField};
use dtn_spectral::measures::{operator_norm, stone_projection, DeltaSchedule};

fn main() {
    let dom = build_domain(&DomainSpec::HalfLine1d { h: 1.0, length: 3.0 }).unwrap();
    let op = assemble_operator(&dom, &PotentialField::zero(&dom)).unwrap();
    let eig = oracle_eigendecomposition(&op);
    for (a, b) in [(0.5, 1.5), (1.5, 2.5), (0.5, 3.5)] {
        let p = stone_projection(&op, a, b, &DeltaSchedule::default()).unwrap();
        let err = operator_norm(&(&p.projector - oracle_projector(&eig, a, b).unwrap()));
        println!("({a}, {b}): trace {:.6}, error vs oracle {err:.1e}", p.projector.trace());
    }
}
