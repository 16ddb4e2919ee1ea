//! Report, CSV and plot-data files.
//!
//! Floats are written with Rust's shortest round-trip formatting, both in JSON and CSV.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::classify::PointOutcome;
use crate::sweep::ClassificationReport;
use crate::C64;

pub const REPORT_FILE: &str = "report.json";
pub const CSV_FILE: &str = "samples.csv";
pub const BOUNDARY_PLOT_FILE: &str = "boundary_values.dat";
pub const POLE_PLOT_FILE: &str = "poles.dat";

pub const CSV_HEADER: [&str; 7] = ["x", "eta", "probe_id", "re_Mgg", "im_Mgg", "abs_etaMg", "verdict"];

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn prepare(dir: &Path, file: &str) -> Result<PathBuf, ReportError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    Ok(dir.join(file))
}

/// Pretty JSON with struct fields in declaration order.
pub fn report_json(report: &ClassificationReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn emit_report(report: &ClassificationReport, dir: &Path) -> Result<PathBuf, ReportError> {
    let path = prepare(dir, REPORT_FILE)?;
    fs::write(&path, report_json(report)).map_err(io_err(&path))?;
    Ok(path)
}

pub fn read_report(path: &Path) -> Result<ClassificationReport, ReportError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| ReportError::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn weighted_inner(w: f64, u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a * b.conj()).sum::<C64>() * w
}

fn weighted_norm(w: f64, u: &[C64]) -> f64 {
    (u.iter().map(|a| a.norm_sqr()).sum::<f64>() * w).sqrt()
}

/// One row per grid point, probe and `η` sample; unclassified points get one row per probe
/// with empty numeric fields.
pub fn csv_rows(report: &ClassificationReport) -> Vec<[String; 7]> {
    let w = report.operator.boundary_weight;
    let mut rows = Vec::new();
    for p in &report.points {
        let x = p.x().to_string();
        let label = p.label().to_string();
        match p {
            PointOutcome::Classified(v) => {
                for (j, (lim, g)) in v.probes.iter().zip(&report.probes).enumerate() {
                    for s in &lim.dtn_samples {
                        let mgg = weighted_inner(w, &s.value, g);
                        rows.push([
                            x.clone(),
                            s.eta.to_string(),
                            j.to_string(),
                            mgg.re.to_string(),
                            mgg.im.to_string(),
                            (s.eta * weighted_norm(w, &s.value)).to_string(),
                            label.clone(),
                        ]);
                    }
                }
            }
            PointOutcome::Inconclusive { .. } => {
                for j in 0..report.probes.len() {
                    rows.push([x.clone(), String::new(), j.to_string(), String::new(), String::new(), String::new(), label.clone()]);
                }
            }
        }
    }
    rows
}

pub fn emit_csv(report: &ClassificationReport, dir: &Path) -> Result<PathBuf, ReportError> {
    let path = prepare(dir, CSV_FILE)?;
    let csv_err = |source| ReportError::Csv {
        path: path.clone(),
        source,
    };
    let mut wtr = csv::Writer::from_path(&path).map_err(csv_err)?;
    wtr.write_record(CSV_HEADER).map_err(csv_err)?;
    for row in csv_rows(report) {
        wtr.write_record(&row).map_err(csv_err)?;
    }
    wtr.flush().map_err(io_err(&path))?;
    Ok(path)
}

/// Whitespace-separated `x probe_id -Im(M(x+i0)g,g) diverges` and `location multiplicity`.
pub fn emit_plot_data(report: &ClassificationReport, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    let bpath = prepare(dir, BOUNDARY_PLOT_FILE)?;
    let mut out = String::from("# x probe_id minus_im_Mgg diverges\n");
    for v in report.points.iter().filter_map(|p| p.verdict()) {
        for (j, lim) in v.probes.iter().enumerate() {
            let value = -lim.boundary.value().im;
            out.push_str(&format!("{} {} {} {}\n", v.x, j, value, u8::from(lim.boundary.diverges)));
        }
    }
    fs::File::create(&bpath)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(io_err(&bpath))?;

    let ppath = dir.join(POLE_PLOT_FILE);
    let mut poles = String::from("# location multiplicity\n");
    for e in &report.eigenvalues {
        poles.push_str(&format!("{} {}\n", e.location, e.multiplicity));
    }
    fs::write(&ppath, poles).map_err(io_err(&ppath))?;
    Ok(vec![bpath, ppath])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config_str;
    use crate::sweep::run_sweep;

    fn t1_report() -> ClassificationReport {
        let text = "[domain]\nkind = \"halfline1d\"\nh = 1.0\nlength = 3.0\n[window]\nlower = 0.0\nupper = 4.0\nstep = 0.5\n";
        run_sweep(&parse_config_str(text, "t1").unwrap()).unwrap()
    }

    #[test]
    fn report_round_trip() {
        let r = t1_report();
        let dir = tempfile::tempdir().unwrap();
        let path = emit_report(&r, dir.path()).unwrap();
        assert_eq!(read_report(&path).unwrap(), r);
    }

    #[test]
    fn csv_shape() {
        let r = t1_report();
        let dir = tempfile::tempdir().unwrap();
        let path = emit_csv(&r, dir.path()).unwrap();
        let mut rdr = csv::Reader::from_path(&path).unwrap();
        assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER.to_vec());
        let expected: usize = r
            .points
            .iter()
            .map(|p| match p {
                PointOutcome::Classified(v) => v.probes.iter().map(|q| q.dtn_samples.len()).sum(),
                PointOutcome::Inconclusive { .. } => r.probes.len(),
            })
            .sum();
        let rows: Vec<csv::StringRecord> = rdr.records().map(|x| x.unwrap()).collect();
        assert_eq!(rows.len(), expected);
        for row in &rows {
            assert!(["resolvent", "eigenvalue", "continuous", "inconclusive"].contains(&&row[6]));
        }
    }

    #[test]
    fn plot_files_and_missing_dir() {
        let r = t1_report();
        let dir = tempfile::tempdir().unwrap();
        let files = emit_plot_data(&r, dir.path()).unwrap();
        let poles = fs::read_to_string(&files[1]).unwrap();
        assert_eq!(poles.lines().count(), 3);
        let err = read_report(&dir.path().join("absent.json")).unwrap_err();
        assert!(err.to_string().contains("absent.json"));
    }
}
