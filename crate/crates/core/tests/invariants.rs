//! Property tests over random parameters, potentials and configs.

use dtn_spectral::classify::{essential_closure, GridSet, Interval};
use dtn_spectral::config::parse_config_str;
use dtn_spectral::domain::{assemble_operator, build_domain, BoundaryVector, DirichletOperator, DomainSpec, PotentialField};
use dtn_spectral::dtn::{herglotz_defect, identity_suite};
use dtn_spectral::measures::simplicity_rank;
use dtn_spectral::report::report_json;
use dtn_spectral::sweep::{run_sweep, ClassificationReport};
use dtn_spectral::C64;
use proptest::prelude::*;

fn halfline(h: f64, length: f64, q: &[f64]) -> DirichletOperator {
    let dom = build_domain(&DomainSpec::HalfLine1d { h, length }).unwrap();
    let n = dom.n_interior() + dom.n_boundary();
    let values: Vec<f64> = (0..n).map(|k| q[k % q.len()]).collect();
    assemble_operator(&dom, &PotentialField::new(values)).unwrap()
}

fn off_axis() -> impl Strategy<Value = C64> {
    (-2.0..6.0f64, 0.05..2.0f64, any::<bool>()).prop_map(|(re, im, up)| C64::new(re, if up { im } else { -im }))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn identities_hold_for_random_potentials(
        q in prop::collection::vec(-1.0..1.0f64, 1..6),
        lambda in off_axis(),
        zeta in off_axis(),
        nu in off_axis(),
    ) {
        let op = halfline(0.5, 4.0, &q);
        if let Ok(r) = identity_suite(&op, lambda, zeta, nu) {
            prop_assert!(r.max_residual() <= 1e-10, "{r:?}");
        }
    }

    #[test]
    fn herglotz_sign_in_upper_half_plane(
        q in prop::collection::vec(-1.0..1.0f64, 1..6),
        re in -2.0..6.0f64,
        im in 0.01..3.0f64,
        g in -1.0..1.0f64,
    ) {
        prop_assume!(g.abs() > 1e-3);
        let op = halfline(0.5, 4.0, &q);
        let gv = BoundaryVector::from_real(op.domain(), &[g]).unwrap();
        let d = herglotz_defect(&op, C64::new(re, im), &gv).unwrap();
        prop_assert!(d.im_form < 0.0);
        prop_assert!(d.rel_residual <= 1e-10);
    }

    #[test]
    fn closure_is_idempotent(cuts in prop::collection::vec((0.0..10.0f64, 0.0..1.0f64), 0..8)) {
        let set = GridSet::from_intervals(cuts.iter().map(|&(lo, w)| Interval { lo, hi: lo + if w < 0.3 { 0.0 } else { w } }).collect());
        let once = essential_closure(&set);
        prop_assert_eq!(essential_closure(&once), once.clone());
        prop_assert!(once.measure() <= set.measure() + 1e-12);
    }

    #[test]
    fn simplicity_rank_grows_with_more_points(
        q in prop::collection::vec(-1.0..1.0f64, 1..4),
        extra in 1usize..4,
    ) {
        let op = halfline(0.5, 3.0, &q);
        let base = [C64::new(0.5, 1.0)];
        let more: Vec<C64> = (0..=extra).map(|k| C64::new(0.5 + k as f64, 1.0 + 0.5 * k as f64)).collect();
        let a = simplicity_rank(&op, &base, None).unwrap();
        let b = simplicity_rank(&op, &more, None).unwrap();
        prop_assert!(a.rank <= b.rank);
        prop_assert!(b.rank <= b.dimension);
    }
}

fn t1_sweep(lower: f64, upper: f64, step: f64, threads: usize) -> ClassificationReport {
    let text = format!(
        "[domain]\nkind = \"halfline1d\"\nh = 1.0\nlength = 3.0\n[window]\nlower = {lower}\nupper = {upper}\nstep = {step}\n[output]\nthreads = {threads}\n"
    );
    run_sweep(&parse_config_str(&text, "t1").unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn report_survives_json_and_thread_count(lower in -1.0..0.9f64, span in 1.0..3.0f64) {
        let r1 = t1_sweep(lower, lower + span, 0.25, 1);
        let r3 = t1_sweep(lower, lower + span, 0.25, 3);
        let json = report_json(&r1);
        prop_assert_eq!(&json, &report_json(&r3));
        let back: ClassificationReport = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, r1);
    }
}
