//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

use std::f64::consts::PI;
use std::time::Instant;

use arcmem::analysis::{
    area_from_fourier, fourier_coefficients, lobe_area, parameter_sweep, pinch_points, table1_reproduction, Concavity,
    LoopMetrics, RunSettings, SweepPoint,
};
use arcmem::cli::Scenario;
use arcmem::integrator::{integrate, settle_to_periodic, IntegratorConfig, Settled, Trajectory};
use arcmem::model::{mayr_rhs, mayr_sinusoidal_g, ArcParameters, ArcState, CircuitParameters, FixedConductance};

// Table 1 reproduction
const TABLE1_I_M: [f64; 5] = [3.821, 2.264, 1.568, 1.152, 0.790];
const TABLE1_REL_TOL_3KHZ: f64 = 0.10;
const TABLE1_REL_TOL: f64 = 0.05;
const TABLE1_RUNTIME_S: f64 = 30.0;
// fingerprints
const SLOPE_REL_TOL: f64 = 0.01;
const CROSSING_VOLTAGE_REL: f64 = 1e-3;
const LOBE_DECAY_RATIO: f64 = 0.1;
const FIG3_FREQUENCIES: [f64; 6] = [400.0, 3e3, 5e3, 7e3, 9e3, 11e3];
// oracles
const FOURIER_K_MAX: usize = 50;
const FOURIER_AREA_REL: f64 = 1e-3;
const LINEAR_AMPLITUDE_REL: f64 = 1e-8;
const INTEGRATOR_TOL: f64 = 1e-10;
const MAYR_DECAY_ABS: f64 = 1e-8;
const MAYR_CLOSED_FORM_REL: f64 = 1e-4;
// symmetry
const HALF_WAVE_REL: f64 = 1e-6;
const EVEN_HARMONIC_REL: f64 = 1e-4;
const LOBE_SYMMETRY_REL: f64 = 1e-6;
// quadrant check: u·i ≥ −ε·max|u·i|
const QUADRANT_EPS: f64 = 1e-6;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn settle(arc: &ArcParameters, circuit: &CircuitParameters) -> Settled {
    let s = RunSettings::default();
    settle_to_periodic(arc, circuit, s.initial_state, &s.integrator, &s.settle).expect("settles")
}

fn preset(name: &str) -> Scenario {
    Scenario::preset(name).expect("preset exists")
}

fn criterion_1() -> Outcome {
    let s = preset("table1");
    let start = Instant::now();
    let rows = table1_reproduction(&s.arc, &s.circuit, &s.run_settings()).expect("table1 runs");
    let elapsed = start.elapsed().as_secs_f64();
    let mut pass = elapsed < TABLE1_RUNTIME_S;
    let mut detail = format!("{elapsed:.2}s;");
    for (row, i_ref) in rows.iter().zip(TABLE1_I_M) {
        let tol = if row.f == 3e3 {
            TABLE1_REL_TOL_3KHZ
        } else {
            TABLE1_REL_TOL
        };
        let i_err = (row.i_m - i_ref).abs() / i_ref;
        let ok = row.rel_error <= tol && i_err <= tol;
        pass &= ok;
        detail += &format!(
            " {}kHz: g_mean {:.5} vs {:.5} ({:.1}%), I_m {:.4} ({:.2}%){};",
            row.f / 1e3,
            row.g_mean,
            row.hf_estimate,
            100.0 * row.rel_error,
            row.i_m,
            100.0 * i_err,
            if ok { "" } else { " FAIL" }
        );
    }
    outcome(pass, detail)
}

fn criterion_2() -> Outcome {
    let s = preset("fig1");
    let settled = settle(&s.arc, &s.circuit);
    let pins = pinch_points(&settled.trajectory).expect("crossings");
    if pins.len() != 2 {
        return outcome(false, format!("{} pinch points", pins.len()));
    }
    let spread = (pins[0].slope - pins[1].slope).abs() / pins[0].slope.max(pins[1].slope);
    let by_construction = pins
        .iter()
        .all(|p| p.slope * p.g_at == 1.0 || (p.slope * p.g_at - 1.0).abs() <= f64::EPSILON);
    let opposite = matches!(
        (pins[0].concavity, pins[1].concavity),
        (Concavity::Up, Concavity::Down) | (Concavity::Down, Concavity::Up)
    );
    outcome(
        spread <= SLOPE_REL_TOL && by_construction && opposite,
        format!(
            "slopes {:.6} / {:.6} Ω (spread {spread:.2e}), concavities {:?}/{:?}",
            pins[0].slope, pins[1].slope, pins[0].concavity, pins[1].concavity
        ),
    )
}

/// Max |u(t*)|/max|u| and min g(t*)/G_min over the crossings of one period.
fn crossing_coincidence(traj: &Trajectory) -> (f64, f64) {
    let pins = pinch_points(traj).expect("crossings");
    let mut u_peak: f64 = 0.0;
    for t in traj.uniform_times(20_000).into_iter().chain(traj.node_times()) {
        u_peak = u_peak.max(traj.voltage_at(t).abs());
    }
    let u_rel = pins.iter().map(|p| p.voltage_at.abs()).fold(0.0, f64::max) / u_peak;
    let g_min = pins.iter().map(|p| p.g_at).fold(f64::INFINITY, f64::min);
    (u_rel, g_min)
}

fn criterion_3() -> Outcome {
    let fig1 = preset("fig1");
    let table1 = preset("table1");
    let mut runs = vec![(fig1.arc, fig1.circuit)];
    for &f in &table1.sweep.as_ref().unwrap().values {
        runs.push((table1.arc, table1.circuit.with_frequency(f)));
    }
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for (arc, circuit) in &runs {
        let (u_rel, g) = crossing_coincidence(&settle(arc, circuit).trajectory);
        pass &= u_rel <= CROSSING_VOLTAGE_REL && g >= arc.g_min;
        worst = worst.max(u_rel);
    }
    outcome(pass, format!("{} runs, worst |u(t*)|/max|u| = {worst:.2e}", runs.len()))
}

fn fig3_metrics() -> Vec<(f64, LoopMetrics)> {
    let s = preset("fig3");
    let points = parameter_sweep(
        &s.arc,
        &s.circuit,
        arcmem::analysis::SweepAxis::F,
        &FIG3_FREQUENCIES,
        &s.run_settings(),
        10,
    )
    .expect("sweep runs");
    points
        .into_iter()
        .map(|p: SweepPoint| (p.value, p.outcome.expect("point settles").metrics))
        .collect()
}

fn criterion_4() -> Outcome {
    let m = fig3_metrics();
    let decreasing = m.windows(2).all(|w| {
        w[1].1.lobe_area.abs() < w[0].1.lobe_area.abs() && w[1].1.loop_width_metric < w[0].1.loop_width_metric
    });
    let ratio = m[5].1.lobe_area.abs() / m[0].1.lobe_area.abs();
    let detail = m
        .iter()
        .map(|(f, x)| format!("{}kHz {:.4}/{:.4}", f / 1e3, x.lobe_area, x.loop_width_metric))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(
        decreasing && ratio < LOBE_DECAY_RATIO,
        format!("area/width: {detail}; A(11k)/A(0.4k) = {ratio:.4}"),
    )
}

fn criterion_5() -> Outcome {
    let fig1 = preset("fig1");
    let table1 = preset("table1");
    let mut runs = vec![(fig1.arc, fig1.circuit)];
    for &f in &table1.sweep.as_ref().unwrap().values {
        runs.push((table1.arc, table1.circuit.with_frequency(f)));
    }
    let mut worst: f64 = 0.0;
    for (arc, circuit) in &runs {
        let traj = settle(arc, circuit).trajectory;
        let t_star = pinch_points(&traj).expect("crossings")[0].t_star;
        let direct = lobe_area(&traj, t_star);
        let spec = fourier_coefficients(&traj, FOURIER_K_MAX);
        let oracle = area_from_fourier(&spec, circuit);
        worst = worst.max((direct - oracle).abs() / direct.abs());
    }
    outcome(
        worst <= FOURIER_AREA_REL,
        format!("{} runs, worst relative difference {worst:.2e}", runs.len()),
    )
}

fn criterion_6() -> Outcome {
    // (a) linear RL circuit with a fixed conductance
    let circuit = CircuitParameters {
        r: 0.2,
        l: 1e-3,
        e_m: 75.0,
        f: 50.0,
    };
    let g0 = 0.5;
    let mut settings = RunSettings::default();
    settings.integrator = settings.integrator.with_tolerance(INTEGRATOR_TOL);
    settings.settle.tol = 1e-13;
    settings.initial_state = ArcState::new(0.0, g0);
    let settled = settle_to_periodic(
        &FixedConductance(g0),
        &circuit,
        settings.initial_state,
        &settings.integrator,
        &settings.settle,
    )
    .expect("linear circuit settles");
    let amplitude = fourier_coefficients(&settled.trajectory, 3).fundamental_current();
    let analytic = circuit.e_m / (circuit.r + 1.0 / g0).hypot(circuit.angular_frequency() * circuit.l);
    let err_a = (amplitude - analytic).abs() / analytic;

    // (b) zero-current Mayr decay from g = 1 + G_min
    let arc = ArcParameters {
        g_min: 1e-8,
        ..preset("fig1").arc
    };
    let theta = 4e-4;
    let cfg = IntegratorConfig {
        max_step: theta / 50.0,
        ..IntegratorConfig::for_period(0.02)
    };
    let traj = integrate(
        |_t, s| Ok((0.0, mayr_rhs(&arc, 0.0, s.g))),
        ArcState::new(0.0, 1.0 + arc.g_min),
        (0.0, 10.0 * theta),
        &cfg,
    )
    .expect("decay integrates");
    let err_b = traj
        .uniform_times(5000)
        .into_iter()
        .map(|t| (traj.state_at(t).g - (arc.g_min + (-t / theta).exp())).abs())
        .fold(0.0, f64::max);

    // (c) closed-form Mayr conductance under i = I_m sin(2π f t)
    let mut arc = preset("table1").arc;
    arc.theta_law = arcmem::model::ThetaLaw::Constant { theta: 2e-4 };
    let (i_m, f) = (3.821, 3e3);
    let w = 2.0 * PI * f;
    let period = 1.0 / f;
    let periods = 40.0;
    let cfg = IntegratorConfig::for_period(period);
    let drive = |t: f64| i_m * (w * t).sin();
    let traj = integrate(
        |t, s| Ok((i_m * w * (w * t).cos(), mayr_rhs(&arc, drive(t), s.g))),
        ArcState::new(0.0, 0.1),
        (0.0, periods * period),
        &cfg,
    )
    .expect("driven Mayr integrates");
    let err_c = traj
        .uniform_times(5000)
        .into_iter()
        .filter(|&t| t >= (periods - 1.0) * period)
        .map(|t| {
            let exact = mayr_sinusoidal_g(&arc, i_m, f, t).unwrap();
            (traj.state_at(t).g - exact).abs() / exact
        })
        .fold(0.0, f64::max);

    outcome(
        err_a <= LINEAR_AMPLITUDE_REL && err_b <= MAYR_DECAY_ABS && err_c <= MAYR_CLOSED_FORM_REL,
        format!("(a) amplitude rel {err_a:.2e}; (b) decay abs {err_b:.2e}; (c) closed form rel {err_c:.2e}"),
    )
}

fn criterion_7() -> Outcome {
    let s = preset("fig1");
    let traj = settle(&s.arc, &s.circuit).trajectory;
    let half = 0.5 * s.circuit.period();
    let t0 = traj.t_start();
    let times: Vec<f64> = (0..4000).map(|k| t0 + half * k as f64 / 4000.0).collect();
    let (mut i_max, mut g_max, mut di, mut dg) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &t in &times {
        let (a, b) = (traj.state_at(t), traj.state_at(t + half));
        i_max = i_max.max(a.i.abs());
        g_max = g_max.max(a.g);
        di = di.max((b.i + a.i).abs());
        dg = dg.max((b.g - a.g).abs());
    }
    let (di, dg) = (di / i_max, dg / g_max);
    let spec = fourier_coefficients(&traj, 20);
    let fundamental = spec.fundamental_current();
    let even = (2..=20)
        .step_by(2)
        .map(|k| spec.current_harmonic(k))
        .fold(0.0, f64::max)
        / fundamental;
    let t_star = pinch_points(&traj).expect("crossings")[0].t_star;
    let (a1, a2) = (lobe_area(&traj, t_star), lobe_area(&traj, t_star + half));
    let lobe = (a1.abs() - a2.abs()).abs() / a1.abs();
    outcome(
        di <= HALF_WAVE_REL && dg <= HALF_WAVE_REL && even <= EVEN_HARMONIC_REL && lobe <= LOBE_SYMMETRY_REL,
        format!("i {di:.2e}, g {dg:.2e}, even harmonics {even:.2e}, lobes {lobe:.2e}"),
    )
}

fn criterion_8() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    let dir = std::env::temp_dir().join(format!("arcmem-acceptance-{}", std::process::id()));
    for name in ["fig2a", "fig4a", "fig4b", "fig4c"] {
        let s = preset(name);
        let out = dir.join(name);
        let opts = arcmem::cli::RunOptions {
            out: Some(out.clone()),
            ..Default::default()
        };
        let ran = arcmem::cli::run(arcmem::cli::Command::Sweep, &s, &opts);
        let sw = s.sweep.as_ref().unwrap();
        let points = parameter_sweep(&s.arc, &s.circuit, sw.axis, &sw.values, &s.run_settings(), 2000).expect("sweep");
        let converged = points
            .iter()
            .all(|p| p.outcome.as_ref().map(|r| r.settled.report.converged).unwrap_or(false));
        let csv_ok = ran.is_ok() && well_formed(&out.join("sweep_metrics.csv"), 9, sw.values.len());
        let mut worst: f64 = 0.0;
        for p in points.iter().filter_map(|p| p.outcome.as_ref().ok()) {
            let scale = p.waveform.iter().map(|w| (w.u * w.i).abs()).fold(0.0, f64::max);
            let low = p.waveform.iter().map(|w| w.u * w.i).fold(f64::INFINITY, f64::min);
            worst = worst.max(-low / scale);
        }
        let ok = converged && csv_ok && worst <= QUADRANT_EPS;
        pass &= ok;
        detail.push(format!(
            "{name}: {} points, worst negative u·i/scale {:.1e}{}",
            points.len(),
            worst,
            if ok { "" } else { " FAIL" }
        ));
    }
    let _ = std::fs::remove_dir_all(&dir);
    outcome(pass, detail.join("; "))
}

/// Header plus `rows` records of `cols` fields, numeric fields parse.
fn well_formed(path: &std::path::Path, cols: usize, rows: usize) -> bool {
    let Ok(mut r) = csv::Reader::from_path(path) else {
        return false;
    };
    let header_ok = r.headers().map(|h| h.len() == cols).unwrap_or(false);
    let records: Vec<_> = r.records().collect();
    header_ok
        && records.len() == rows
        && records.iter().all(|rec| {
            rec.as_ref()
                .map(|rec| rec.len() == cols && rec.get(0).unwrap().parse::<f64>().is_ok())
                .unwrap_or(false)
        })
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 table1 reproduction", criterion_1),
        ("2 pinched loop at fig1", criterion_2),
        ("3 zero-crossing coincidence", criterion_3),
        ("4 loop collapse over fig3 frequencies", criterion_4),
        ("5 time-domain vs Fourier lobe area", criterion_5),
        ("6 integrator oracles", criterion_6),
        ("7 half-wave symmetry", criterion_7),
        ("8 parameter sweeps", criterion_8),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {name}: {} ({})",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {}/{} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
