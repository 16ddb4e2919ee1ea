//! Negative eigenvalue of a deep square well found from the DtN map and checked against the dense oracle.

use dtn_spectral::classify::{scan_window, ClassifyConfig, Window};
use dtn_spectral::domain::{assemble_operator, build_domain, oracle_eigendecomposition, DomainSpec, PotentialField, PotentialSpec};

fn main() {
    let dom = build_domain(&DomainSpec::HalfLine1d { h: 0.05, length: 20.0 }).unwrap();
    let q = PotentialField::from_spec(&dom, &PotentialSpec::Well { depth: 4.0, width: 1.0 }).unwrap();
    let op = assemble_operator(&dom, &q).unwrap();
    let scan = scan_window(&op, &Window::new(-1.0, 0.1, 0.01).unwrap(), &ClassifyConfig::new(&op, 0.005));
    let oracle = oracle_eigendecomposition(&op);
    for (loc, mult) in scan.eigenvalues() {
        println!("detected {loc:.10} (multiplicity {mult}), oracle distance {:.1e}", oracle.distance_to(loc));
    }
}
