//! Supports of an atomic measure and of a dense uniform measure from their Borel transforms.

use dtn_spectral::limits::{EtaPolicy, LimitMode, Thresholds};
use dtn_spectral::measures::{ac_sc_supports, Atom, SpectralMeasure};

fn main() {
    let th = Thresholds::default();
    let grid: Vec<f64> = (0..=20).map(|k| k as f64 * 0.05).collect();
    let atoms = SpectralMeasure::from_atoms(
        vec![Atom { location: 0.3, weight: 0.5 }, Atom { location: 0.7, weight: 0.5 }],
        "two atoms",
    )
    .unwrap();
    let d = ac_sc_supports(&atoms, &EtaPolicy::default(), &th, &grid);
    println!("atoms:   AC {:?}, SC {:?}", d.ac_support, d.sc_set);
    let density = SpectralMeasure::uniform_density(0.0, 1.0, 1.0, 10_000).unwrap();
    let policy = EtaPolicy {
        mode: LimitMode::Continuum,
        ..EtaPolicy::default()
    };
    let d = ac_sc_supports(&density, &policy, &th, &grid);
    println!("density: AC {:?}, SC {:?}", d.ac_support, d.sc_set);
}
