//! Command-line front end: scenario loading, the four subcommands and their
//! CSV/text output.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numeric failure, 3 a fingerprint
//! check failed under `--assert`.

mod scenario;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analysis::{
    fingerprint_report, parameter_sweep, sample_waveform, table1_reproduction, AnalysisError, FingerprintReport,
    Fp3Verdict, SweepPoint, Table1Row, Tolerances,
};
use crate::integrator::{settle_to_periodic, IntegrationError, Settled};

pub use scenario::{OutputSpec, Scenario, ScenarioError, Sweep, PRESETS};

/// Waveform samples written per settled period.
pub const WAVEFORM_POINTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Fingerprints,
    Sweep,
    Table1,
}

impl Command {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "simulate" => Command::Simulate,
            "fingerprints" => Command::Fingerprints,
            "sweep" => Command::Sweep,
            "table1" => Command::Table1,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the scenario's output directory.
    pub out: Option<PathBuf>,
    pub assert: bool,
    /// Worker threads for sweeps; `None` uses the global pool.
    pub jobs: Option<usize>,
    pub raw_steps: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("all {0} sweep points failed")]
    SweepFailed(usize),
    #[error("fingerprint check failed: {0}")]
    Fingerprint(String),
    #[error("cannot write {path}: {message}")]
    Output { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario(_) | CliError::Usage(_) => 1,
            CliError::Analysis(AnalysisError::InvalidSweep(_)) => 1,
            CliError::Analysis(AnalysisError::Integration(IntegrationError::InvalidConfig(_))) => 1,
            CliError::Analysis(_) | CliError::SweepFailed(_) | CliError::Output { .. } => 2,
            CliError::Fingerprint(_) => 3,
        }
    }
}

/// Picks the scenario from `--scenario` or `--preset` (default preset `fig1`).
pub fn resolve_scenario(path: Option<&Path>, preset: Option<&str>) -> Result<Scenario, CliError> {
    match (path, preset) {
        (Some(_), Some(_)) => Err(CliError::Usage("--scenario and --preset are mutually exclusive".into())),
        (Some(p), None) => Ok(Scenario::load(p)?),
        (None, name) => Ok(Scenario::preset(name.unwrap_or("fig1"))?),
    }
}

/// Runs a subcommand and returns the files it wrote.
pub fn run(command: Command, scenario: &Scenario, opts: &RunOptions) -> Result<Vec<PathBuf>, CliError> {
    scenario.validate()?;
    let dir = opts.out.clone().unwrap_or_else(|| scenario.output.directory.clone());
    fs::create_dir_all(&dir).map_err(|e| CliError::Output {
        path: dir.clone(),
        message: e.to_string(),
    })?;
    let out = Output {
        dir,
        csv: scenario.output.formats.iter().any(|f| f == "csv"),
        txt: scenario.output.formats.iter().any(|f| f == "txt"),
        written: Vec::new(),
    };

    match opts.jobs {
        Some(0) => Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {n} workers: {e}")))?;
            pool.install(|| dispatch(command, scenario, opts, out))
        }
        None => dispatch(command, scenario, opts, out),
    }
}

fn dispatch(
    command: Command,
    scenario: &Scenario,
    opts: &RunOptions,
    mut out: Output,
) -> Result<Vec<PathBuf>, CliError> {
    match command {
        Command::Simulate => simulate(scenario, opts, &mut out)?,
        Command::Fingerprints => fingerprints(scenario, opts, &mut out)?,
        Command::Sweep => sweep(scenario, &mut out)?,
        Command::Table1 => table1(scenario, &mut out)?,
    }
    Ok(out.written)
}

fn simulate(s: &Scenario, opts: &RunOptions, out: &mut Output) -> Result<(), CliError> {
    let settled = settle_to_periodic(&s.arc, &s.circuit, s.initial_state, &s.integrator, &s.settle)
        .map_err(AnalysisError::from)?;
    out.csv_file("waveform.csv", &["t", "i", "g", "u", "E"], waveform_rows(&settled, s))?;
    out.csv_file(
        "settle_report.csv",
        &[
            "periods_integrated",
            "converged",
            "period_map_residual",
            "accepted_steps",
            "rejected_steps",
        ],
        vec![vec![
            settled.report.periods_integrated.to_string(),
            settled.report.converged.to_string(),
            fmt(settled.report.period_map_residual),
            settled.trajectory.stats.accepted.to_string(),
            settled.trajectory.stats.rejected.to_string(),
        ]],
    )?;
    if opts.raw_steps {
        let rows = settled
            .trajectory
            .steps()
            .iter()
            .map(|st| vec![fmt(st.t0), fmt(st.h), fmt(st.y0.i), fmt(st.y0.g), fmt(st.error_ratio)])
            .collect();
        out.csv_file("steps.csv", &["t0", "h", "i", "g", "error_ratio"], rows)?;
    }
    let mut text = String::new();
    let r = &settled.report;
    let _ = writeln!(text, "scenario: {}", s.name);
    let _ = writeln!(
        text,
        "f = {} Hz, periods to settle = {}, residual = {:e}",
        s.circuit.f, r.periods_integrated, r.period_map_residual
    );
    out.text_file("summary.txt", &text)
}

fn waveform_rows(settled: &Settled, s: &Scenario) -> Vec<Vec<String>> {
    sample_waveform(&settled.trajectory, &s.circuit, WAVEFORM_POINTS)
        .into_iter()
        .map(|w| vec![fmt(w.t), fmt(w.i), fmt(w.g), fmt(w.u), fmt(w.e)])
        .collect()
}

/// Frequencies used for the loop-collapse check: the scenario's frequency plus
/// the sweep values when the sweep runs over frequency.
pub fn fingerprint_frequencies(s: &Scenario) -> Vec<f64> {
    let mut f = vec![s.circuit.f];
    if let Some(Sweep {
        axis: crate::analysis::SweepAxis::F,
        values,
    }) = &s.sweep
    {
        f.extend(values);
    }
    f.sort_by(f64::total_cmp);
    f.dedup();
    f
}

fn fingerprints(s: &Scenario, opts: &RunOptions, out: &mut Output) -> Result<(), CliError> {
    let tol = Tolerances::default();
    let report = fingerprint_report(&s.arc, &s.circuit, &fingerprint_frequencies(s), &s.run_settings(), &tol)?;
    write_fingerprints(&report, &tol, out)?;
    if opts.assert && !report.all_pass() {
        let mut failed = Vec::new();
        if !report.fp1_pass {
            failed.push("fp1");
        }
        if !report.fp2_pass {
            failed.push("fp2");
        }
        if report.fp3_verdict != Fp3Verdict::Pass {
            failed.push("fp3");
        }
        return Err(CliError::Fingerprint(failed.join(", ")));
    }
    Ok(())
}

fn write_fingerprints(r: &FingerprintReport, tol: &Tolerances, out: &mut Output) -> Result<(), CliError> {
    let pins = r
        .pinch_points
        .iter()
        .map(|p| {
            vec![
                fmt(p.t_star),
                fmt(p.g_at),
                fmt(p.slope),
                format!("{:?}", p.concavity).to_lowercase(),
                fmt(p.voltage_at),
                fmt(p.di_dt_at),
                fmt(p.dg_dt_at),
            ]
        })
        .collect();
    out.csv_file(
        "pinch_points.csv",
        &["t_star", "g", "slope", "concavity", "u", "di_dt", "dg_dt"],
        pins,
    )?;

    let sweep = r
        .fp3_evidence
        .iter()
        .map(|p| match &p.outcome {
            Ok(m) => vec![
                fmt(p.f),
                "ok".into(),
                fmt(m.lobe_area),
                fmt(m.loop_width_metric),
                fmt(m.i_peak),
                fmt(m.g_mean),
            ],
            Err(e) => vec![
                fmt(p.f),
                format!("error: {e}"),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ],
        })
        .collect();
    out.csv_file(
        "fp3_sweep.csv",
        &["f", "status", "lobe_area", "loop_width_metric", "i_peak", "g_mean"],
        sweep,
    )?;

    let fp3 = match r.fp3_verdict {
        Fp3Verdict::Pass => "pass",
        Fp3Verdict::Fail => "fail",
        Fp3Verdict::Vacuous => "vacuous",
    };
    let verdicts = vec![
        vec![
            "fp1".into(),
            pass(r.fp1_pass).into(),
            "slope_spread".into(),
            fmt(r.slope_spread),
            fmt(tol.slope_rel),
        ],
        vec![
            "fp2".into(),
            pass(r.fp2_pass).into(),
            "crossing_voltage_rel".into(),
            fmt(r.crossing_voltage_rel),
            fmt(tol.crossing_voltage_rel),
        ],
        vec![
            "fp3".into(),
            fp3.into(),
            "sweep_points".into(),
            r.fp3_evidence.len().to_string(),
            String::new(),
        ],
    ];
    out.csv_file(
        "verdicts.csv",
        &["fingerprint", "verdict", "metric", "value", "tolerance"],
        verdicts,
    )?;

    let mut text = String::new();
    let _ = writeln!(
        text,
        "f = {} Hz, settled after {} periods",
        r.f, r.settle.periods_integrated
    );
    let _ = writeln!(
        text,
        "pinched loop: {} (slope spread {:e}, concavities alternate: {})",
        pass(r.fp1_pass),
        r.slope_spread,
        r.concavities_alternate
    );
    let _ = writeln!(
        text,
        "zero crossings coincide: {} (|u(t*)|/u_peak = {:e}, min g(t*) = {:e} S)",
        pass(r.fp2_pass),
        r.crossing_voltage_rel,
        r.min_crossing_g
    );
    let _ = writeln!(text, "loop collapses with frequency: {fp3}");
    out.text_file("summary.txt", &text)
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn sweep(s: &Scenario, out: &mut Output) -> Result<(), CliError> {
    let sw = s
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Usage("scenario has no sweep.axis / sweep.values".into()))?;
    let points = parameter_sweep(
        &s.arc,
        &s.circuit,
        sw.axis,
        &sw.values,
        &s.run_settings(),
        WAVEFORM_POINTS,
    )?;
    write_sweep(sw, &points, out)?;
    if points.iter().all(|p| p.outcome.is_err()) {
        return Err(CliError::SweepFailed(points.len()));
    }
    Ok(())
}

fn write_sweep(sw: &Sweep, points: &[SweepPoint], out: &mut Output) -> Result<(), CliError> {
    let axis = sw.axis.name();
    let rows = points
        .iter()
        .map(|p| match &p.outcome {
            Ok(run) => {
                let m = &run.metrics;
                vec![
                    fmt(p.value),
                    "ok".into(),
                    run.settled.report.periods_integrated.to_string(),
                    fmt(m.lobe_area),
                    fmt(m.loop_width_metric),
                    fmt(m.i_peak),
                    fmt(m.g_mean),
                    fmt(m.g_min_observed),
                    fmt(m.g_max_observed),
                ]
            }
            Err(e) => {
                let mut row = vec![fmt(p.value), format!("error: {e}")];
                row.resize(9, String::new());
                row
            }
        })
        .collect();
    out.csv_file(
        "sweep_metrics.csv",
        &[
            axis,
            "status",
            "periods",
            "lobe_area",
            "loop_width_metric",
            "i_peak",
            "g_mean",
            "g_min",
            "g_max",
        ],
        rows,
    )?;
    for (idx, p) in points.iter().enumerate() {
        if let Ok(run) = &p.outcome {
            let rows = run
                .waveform
                .iter()
                .map(|w| vec![fmt(w.t), fmt(w.i), fmt(w.g), fmt(w.u), fmt(w.e)])
                .collect();
            out.csv_file(&format!("waveform_{axis}_{idx}.csv"), &["t", "i", "g", "u", "E"], rows)?;
        }
    }
    Ok(())
}

fn table1(s: &Scenario, out: &mut Output) -> Result<(), CliError> {
    let rows = table1_reproduction(&s.arc, &s.circuit, &s.run_settings())?;
    write_table1(&rows, out)
}

fn write_table1(rows: &[Table1Row], out: &mut Output) -> Result<(), CliError> {
    let csv_rows = rows
        .iter()
        .map(|r| {
            vec![
                fmt(r.f / 1e3),
                fmt(r.i_m),
                fmt(r.g_mean),
                fmt(r.hf_estimate),
                fmt(r.rel_error),
            ]
        })
        .collect();
    out.csv_file(
        "table1.csv",
        &["f_kHz", "I_m", "g_mean", "hf_estimate", "rel_error"],
        csv_rows,
    )?;
    let mut text = String::from(" f [kHz]    I_m [A]   g_mean [S]   G_min+I_m^2/2P_M [S]   rel. error\n");
    for r in rows {
        let _ = writeln!(
            text,
            "{:>8.0} {:>10.4} {:>12.5} {:>22.5} {:>12.4}",
            r.f / 1e3,
            r.i_m,
            r.g_mean,
            r.hf_estimate,
            r.rel_error
        );
    }
    out.text_file("summary.txt", &text)
}

/// Shortest representation that parses back to the same `f64`.
fn fmt(x: f64) -> String {
    format!("{x:?}")
}

struct Output {
    dir: PathBuf,
    csv: bool,
    txt: bool,
    written: Vec<PathBuf>,
}

impl Output {
    fn csv_file(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), CliError> {
        if !self.csv {
            return Ok(());
        }
        let path = self.dir.join(name);
        let err = |e: &dyn std::fmt::Display| CliError::Output {
            path: path.clone(),
            message: e.to_string(),
        };
        let mut w = csv::Writer::from_path(&path).map_err(|e| err(&e))?;
        w.write_record(header).map_err(|e| err(&e))?;
        for row in rows {
            w.write_record(&row).map_err(|e| err(&e))?;
        }
        w.flush().map_err(|e| err(&e))?;
        self.written.push(path);
        Ok(())
    }

    fn text_file(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        if !self.txt {
            return Ok(());
        }
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| CliError::Output {
            path: path.clone(),
            message: e.to_string(),
        })?;
        self.written.push(path);
        Ok(())
    }
}
