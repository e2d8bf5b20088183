//! One function per subcommand. Each returns the text meant for stdout and
//! writes its own artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qtran_core::ground_state::ground_state_closed_form;
use qtran_core::model::Lead;
use qtran_core::oracle::{discretize_lead, normalized_deviation, propagate_full, OracleOptions};
use qtran_core::propagator::{run, RunOptions};
use qtran_core::steady::{steady_current, transmission_wbl_matrix};
use qtran_core::units::natural_to_microamp;
use qtran_core::verify::{check, CheckOutcome, CRITERIA};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{gnuplot_script, labelled, num, table_csv, trace_csv, write_file};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    GroundState,
    Propagate,
    Steady,
    Transmission,
    Oracle,
}

/// Run `cmd` for every sweep entry concurrently. Reports come back in entry order.
pub fn execute(cmd: Command, cfg: &RunConfig, out: Option<&Path>) -> Result<String, CliError> {
    let entries = cfg.expand_sweep()?;
    // The config's output names a trace file, so only trace commands fall back to it.
    let traces = matches!(cmd, Command::Propagate | Command::Oracle);
    let base = out.map(Path::to_path_buf).or_else(|| cfg.output.clone().filter(|_| traces));
    if entries.len() > 1 && base.is_none() {
        return Err(CliError::validation("a sweep needs an output path"));
    }
    let results: Vec<Result<String, CliError>> = std::thread::scope(|s| {
        let handles: Vec<_> = entries
            .iter()
            .map(|(label, c)| {
                let path = match (label, &base) {
                    (Some(l), Some(p)) => Some(labelled(p, l)),
                    (None, p) => p.clone(),
                    (Some(_), None) => None,
                };
                s.spawn(move || {
                    let r = execute_one(cmd, c, path.as_deref());
                    match label {
                        Some(l) => r.map_err(|e| e.context(format!("sweep {l:?}"))),
                        None => r,
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("run thread panicked")).collect()
    });
    let mut report = String::new();
    for ((label, _), r) in entries.iter().zip(results) {
        let text = r?;
        if let Some(l) = label {
            writeln!(report, "[{l}]").unwrap();
        }
        report.push_str(&text);
    }
    Ok(report)
}

fn execute_one(cmd: Command, cfg: &RunConfig, out: Option<&Path>) -> Result<String, CliError> {
    match cmd {
        Command::GroundState => ground_state(cfg, out),
        Command::Propagate => propagate(cfg, out),
        Command::Steady => steady(cfg, out),
        Command::Transmission => transmission(cfg, out),
        Command::Oracle => oracle(cfg, out),
    }
}

/// Write `contents` to `out`, or hand it back for stdout.
fn emit(out: Option<&Path>, contents: String) -> Result<String, CliError> {
    match out {
        Some(p) => {
            write_file(p, &contents)?;
            Ok(format!("wrote {}\n", p.display()))
        }
        None => Ok(contents),
    }
}

fn ground_state(cfg: &RunConfig, out: Option<&Path>) -> Result<String, CliError> {
    let m = cfg.device_model()?;
    let gs = ground_state_closed_form(&m, cfg.effective_eps_min()?)?;
    let mut s = String::from("sigma0 (re, im):\n");
    for i in 0..m.n_orb() {
        let row: Vec<String> = (0..m.n_orb())
            .map(|j| format!("({}, {})", num(gs.sigma0[(i, j)].re), num(gs.sigma0[(i, j)].im)))
            .collect();
        writeln!(s, "  {}", row.join(" ")).unwrap();
    }
    for (i, o) in gs.occupations().iter().enumerate() {
        writeln!(s, "occ_{i} = {}", num(*o)).unwrap();
    }
    emit(out, s)
}

fn run_options(cfg: &RunConfig) -> Result<RunOptions<f64>, CliError> {
    let mut o = RunOptions::new(cfg.t_end, cfg.dt, cfg.dissipator_kind());
    o.eps_min = cfg.effective_eps_min()?;
    Ok(o)
}

fn script_path(csv: &Path) -> PathBuf {
    csv.with_extension("gp")
}

fn write_script(cfg: &RunConfig, csv: Option<&Path>) -> Result<(), CliError> {
    if let (true, Some(p)) = (cfg.gnuplot, csv) {
        let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        write_file(&script_path(p), &gnuplot_script(&name))?;
    }
    Ok(())
}

fn propagate(cfg: &RunConfig, out: Option<&Path>) -> Result<String, CliError> {
    let m = cfg.device_model()?;
    let b = cfg.bias_profile()?;
    let r = cfg.rule(m.n_orb())?;
    let rec = run(&m, &b, &r, run_options(cfg)?)?;
    write_script(cfg, out)?;
    emit(out, trace_csv(&rec))
}

fn steady(cfg: &RunConfig, out: Option<&Path>) -> Result<String, CliError> {
    let m = cfg.device_model()?;
    let r = cfg.rule(m.n_orb())?;
    match &cfg.steady {
        Some(spec) => {
            let mut rows = Vec::with_capacity(spec.voltages.len());
            for &v in &spec.voltages {
                let j = steady_current(&m, (0.5 * v, -0.5 * v), &r)?;
                rows.push(vec![v, natural_to_microamp(j.j_left), natural_to_microamp(j.j_right)]);
            }
            emit(out, table_csv(&["V_volt", "J_L_uA", "J_R_uA"], &rows))
        }
        None => {
            let b = cfg.bias_profile()?;
            let settled = (b.left.settled(), b.right.settled());
            let j = steady_current(&m, settled, &r)?;
            let s = format!(
                "J_L = {} uA ({} e*eV/hbar)\nJ_R = {} uA ({} e*eV/hbar)\n",
                num(natural_to_microamp(j.j_left)),
                num(j.j_left),
                num(natural_to_microamp(j.j_right)),
                num(j.j_right)
            );
            emit(out, s)
        }
    }
}

fn transmission(cfg: &RunConfig, out: Option<&Path>) -> Result<String, CliError> {
    let spec = cfg
        .transmission
        .as_ref()
        .ok_or_else(|| CliError::validation("the transmission command needs a transmission section"))?;
    let m = cfg.device_model()?;
    let b = cfg.bias_profile()?;
    let r = cfg.rule(m.n_orb())?;
    let h_inf = &m.h0 + r.settled(&b, m.n_orb());
    let step = (spec.e_max - spec.e_min) / (spec.points - 1) as f64;
    let mut rows = Vec::with_capacity(spec.points);
    for k in 0..spec.points {
        let e = spec.e_min + step * k as f64;
        let t = transmission_wbl_matrix(&m, &h_inf, e)?;
        rows.push(vec![e, t.standard, t.over_2pi]);
    }
    emit(out, table_csv(&["energy_eV", "T", "T_over_2pi"], &rows))
}

fn oracle(cfg: &RunConfig, out: Option<&Path>) -> Result<String, CliError> {
    let spec = cfg
        .oracle
        .as_ref()
        .ok_or_else(|| CliError::validation("the oracle command needs an oracle section"))?;
    let m = cfg.device_model()?;
    let b = cfg.bias_profile()?;
    let r = cfg.rule(m.n_orb())?;
    let window = spec.window.unwrap_or(cfg.t_end).min(cfg.t_end);
    let leads = [
        discretize_lead(m.lambda(Lead::L), spec.bandwidth, spec.levels, m.mu0)?,
        discretize_lead(m.lambda(Lead::R), spec.bandwidth, spec.levels, m.mu0)?,
    ];
    let half_recurrence = 0.5 * leads[0].recurrence_time().min(leads[1].recurrence_time());
    if window > half_recurrence {
        return Err(CliError::validation(format!(
            "comparison window {window} fs exceeds half the recurrence time {half_recurrence} fs"
        )));
    }
    let mut o = OracleOptions::new(cfg.t_end, spec.init.into());
    o.dt = spec.dt;
    o.decimation = cfg.oracle_decimation(spec)?;
    let orc = propagate_full(&m, [&leads[0], &leads[1]], &b, &r, o)?;
    let reference = run(&m, &b, &r, run_options(cfg)?)?;
    let dev = normalized_deviation(&orc.record, &reference, window)?;
    let csv = trace_csv(&orc.record);
    let summary = comparison_report(cfg, &orc, dev, window);
    match out {
        Some(p) => {
            write_script(cfg, out)?;
            write_file(p, &csv)?;
            Ok(format!("wrote {}\n{summary}", p.display()))
        }
        None => {
            // stdout stays a clean CSV.
            eprint!("{summary}");
            Ok(csv)
        }
    }
}

fn comparison_report(
    cfg: &RunConfig,
    orc: &qtran_core::oracle::OracleRun<f64>,
    dev: f64,
    window: f64,
) -> String {
    format!(
        "oracle dimension {}, recurrence time {} fs, full trace drift {}\n\
         reference: {} dt {} fs\n\
         max relative deviation over [0, {window}] fs: {}\n",
        orc.dimension,
        num(orc.recurrence_time),
        num(orc.full_trace_drift),
        cfg.dissipator_kind().name(),
        cfg.dt,
        num(dev)
    )
}

/// Run the acceptance checks; `only` restricts to the listed ids.
pub fn verify(only: &[u8], out: Option<&Path>) -> Result<(String, bool), CliError> {
    let ids: Vec<u8> = if only.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { only.to_vec() };
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
        return Err(CliError::validation(format!("no criterion {bad}; valid ids are 1 to {}", CRITERIA.len())));
    }
    let mut s = String::new();
    let mut all = true;
    for id in ids {
        let o: CheckOutcome = check(id);
        all &= o.passed;
        writeln!(s, "{o}").unwrap();
    }
    if let Some(p) = out {
        write_file(p, &s)?;
    }
    Ok((s, all))
}
