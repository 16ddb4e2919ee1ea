//! Square obstacle in a box: oracle spectrum, the degenerate level, and eigenvectors with vanishing trace.

use dtn_spectral::classify::eigenspace_via_tau;
use dtn_spectral::domain::{assemble_operator, build_domain, oracle_eigendecomposition, DomainSpec, PotentialField};

fn main() {
    let dom = build_domain(&DomainSpec::Exterior2d {
        h: 1.0,
        obstacle_half_width: 1.5,
        box_half_width: 7.5,
    })
    .unwrap();
    println!("{} interior nodes, {} boundary nodes", dom.n_interior(), dom.n_boundary());
    let op = assemble_operator(&dom, &PotentialField::zero(&dom)).unwrap();
    let eig = oracle_eigendecomposition(&op);
    let mut silent = 0;
    for (value, mult) in eig.distinct() {
        let rep = eigenspace_via_tau(&op, value, &eig).unwrap();
        if rep.residue_rank == 0 {
            silent += mult;
        } else if value < 0.5 {
            println!("λ = {value:.5}  multiplicity {mult}  residue rank {}  injective {}", rep.residue_rank, rep.injective);
        }
    }
    println!("{silent} eigenvalues have zero normal-derivative trace");
}
