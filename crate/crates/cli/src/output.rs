use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qtran_core::propagator::TraceRecord;

use crate::error::CliError;

pub const TRACE_HEADER: &str = "t_fs,J_L_uA,J_R_uA,trace_sigma";

/// 12 significant digits, scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn trace_csv(rec: &TraceRecord<f64>) -> String {
    let mut s = String::from(TRACE_HEADER);
    for i in 0..rec.occupations.len() {
        write!(s, ",occ_{i}").unwrap();
    }
    s.push('\n');
    for k in 0..rec.len() {
        s.push_str(&num(rec.times[k]));
        for v in [rec.j_l[k], rec.j_r[k], rec.trace_sigma[k]] {
            s.push(',');
            s.push_str(&num(v));
        }
        for occ in &rec.occupations {
            s.push(',');
            s.push_str(&num(occ[k]));
        }
        s.push('\n');
    }
    s
}

pub fn table_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|&x| num(x)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// Script plotting both currents from `csv` (a file name relative to the script).
pub fn gnuplot_script(csv: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 't (fs)'\n\
         set ylabel 'J (uA)'\n\
         plot '{csv}' using 1:2 with lines, '' using 1:3 with lines\n"
    )
}

/// `dir/name.ext` → `dir/name_<label>.ext`.
pub fn labelled(path: &Path, label: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{label}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{label}"),
    };
    path.with_file_name(name)
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, &e))
}
