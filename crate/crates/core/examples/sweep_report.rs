//! Config-driven sweep written to report, CSV and plot files in a temporary directory.

use dtn_spectral::config::parse_config_str;
use dtn_spectral::report::{emit_csv, emit_plot_data, emit_report};
use dtn_spectral::sweep::run_sweep;

const CONFIG: &str = r#"
[domain]
kind = "halfline1d"
h = 1.0
length = 3.0

[window]
lower = 0.0
upper = 4.0
step = 0.1
"#;

fn main() {
    let cfg = parse_config_str(CONFIG, "inline").unwrap();
    let report = run_sweep(&cfg).unwrap();
    let dir = std::env::temp_dir().join("dtn-spectral-example");
    println!("{}", emit_report(&report, &dir).unwrap().display());
    println!("{}", emit_csv(&report, &dir).unwrap().display());
    for p in emit_plot_data(&report, &dir).unwrap() {
        println!("{}", p.display());
    }
    for e in &report.eigenvalues {
        println!("eigenvalue {} multiplicity {}", e.location, e.multiplicity);
    }
}
