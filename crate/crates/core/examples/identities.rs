//! Boundary-triple identities and the Herglotz law over random draws on the 2D exterior model.

use dtn_spectral::domain::{assemble_operator, build_domain, DomainSpec, PotentialField};
use dtn_spectral::dtn::validation_run;

fn main() {
    let dom = build_domain(&DomainSpec::Exterior2d {
        h: 1.0,
        obstacle_half_width: 1.5,
        box_half_width: 7.5,
    })
    .unwrap();
    let op = assemble_operator(&dom, &PotentialField::zero(&dom)).unwrap();
    let rep = validation_run(&op, 7, 20, 20).unwrap();
    println!("identity residual  {:e}", rep.max_identity_residual);
    println!("Herglotz residual  {:e}", rep.max_herglotz_residual);
}
