//! Absolutely continuous band of the free half-line seen through Im M(x + i0).

use dtn_spectral::classify::{scan_window, ClassifyConfig, Window};
use dtn_spectral::domain::{assemble_operator, build_domain, DomainSpec, PotentialField};
use dtn_spectral::limits::LimitMode;

fn main() {
    let dom = build_domain(&DomainSpec::HalfLine1d { h: 0.01, length: 200.0 }).unwrap();
    let op = assemble_operator(&dom, &PotentialField::zero(&dom)).unwrap();
    let mut cfg = ClassifyConfig::new(&op, 0.05);
    cfg.policy.mode = LimitMode::Continuum;
    let scan = scan_window(&op, &Window::new(-1.0, 4.0, 0.5).unwrap(), &cfg);
    for p in &scan.points {
        if let Some(v) = p.verdict() {
            println!("x = {:5.2}  -Im M = {:.4}  sqrt(x) = {:.4}  {}", v.x, -v.probes[0].boundary.value().im, v.x.max(0.0).sqrt(), p.label());
        }
    }
    println!("AC support: {:?}", scan.ac_support(&cfg.thresholds).unwrap().union);
}
