//! Lattice m-function against sqrt(-z) under mesh refinement.

use dtn_spectral::convergence::m_refinement;
use dtn_spectral::C64;

fn main() {
    for x in [0.5, 1.0, 2.0] {
        let r = m_refinement(0.01, 200.0, C64::new(x, 0.1)).unwrap();
        println!(
            "x = {x}: error {:.3e} at h = 0.01, {:.3e} at h = 0.005, truncation {:.1e}",
            r.coarse.continuum_error, r.fine.continuum_error, r.coarse.truncation_error
        );
    }
}
