use rayon::prelude::*;

use crate::integrator::{settle_to_periodic, SettleReport, Settled};
use crate::model::{hf_limit_conductance, ArcParameters, CircuitParameters, ConductanceModel};

use super::{loop_metrics, pinch_points, sample_waveform, AnalysisError, LoopMetrics, PinchPoint, RunSettings};
use super::{Concavity, WaveformSample};

/// Source frequencies of the high-frequency conductance table (Hz).
pub const TABLE1_FREQUENCIES: [f64; 5] = [3e3, 5e3, 7e3, 9e3, 11e3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed relative spread of the pinch-point slopes.
    pub slope_rel: f64,
    /// Allowed `|u(t*)|` relative to the period's peak voltage.
    pub crossing_voltage_rel: f64,
    /// Loops with a width metric below this are treated as memoryless.
    pub memoryless_metric: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            slope_rel: 0.01,
            crossing_voltage_rel: 1e-3,
            memoryless_metric: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fp3Point {
    pub f: f64,
    pub outcome: Result<LoopMetrics, AnalysisError>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fp3Verdict {
    /// Lobe area and loop width both strictly decrease with frequency.
    Pass,
    Fail,
    /// Every loop is memoryless (or the sweep has a single point), so there is
    /// nothing to collapse.
    Vacuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FingerprintReport {
    pub f: f64,
    pub settle: SettleReport,
    pub pinch_points: Vec<PinchPoint>,
    /// `(max − min) / min` over the pinch-point slopes.
    pub slope_spread: f64,
    pub concavities_alternate: bool,
    /// `max |u(t*)| / max |u|` over the period.
    pub crossing_voltage_rel: f64,
    pub min_crossing_g: f64,
    pub g_floor: f64,
    pub fp1_pass: bool,
    pub fp2_pass: bool,
    /// Sweep evidence sorted by frequency.
    pub fp3_evidence: Vec<Fp3Point>,
    pub fp3_verdict: Fp3Verdict,
}

impl FingerprintReport {
    pub fn all_pass(&self) -> bool {
        self.fp1_pass && self.fp2_pass && self.fp3_verdict == Fp3Verdict::Pass
    }
}

pub(crate) fn slope_spread(points: &[PinchPoint]) -> f64 {
    let (lo, hi) = points
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p.slope), hi.max(p.slope)));
    (hi - lo) / lo
}

pub(crate) fn concavities_alternate(points: &[PinchPoint]) -> bool {
    points.iter().all(|p| p.concavity != Concavity::Degenerate)
        && points.windows(2).all(|w| w[0].concavity != w[1].concavity)
}

/// Slopes agree, concavities alternate and there are at least two crossings.
pub fn fp1_verdict(points: &[PinchPoint], tol: &Tolerances) -> bool {
    points.len() >= 2 && points.len() % 2 == 0 && slope_spread(points) <= tol.slope_rel && concavities_alternate(points)
}

pub fn fp2_verdict(crossing_voltage_rel: f64, min_crossing_g: f64, g_floor: f64, tol: &Tolerances) -> bool {
    crossing_voltage_rel <= tol.crossing_voltage_rel && min_crossing_g > 0.0 && min_crossing_g >= g_floor
}

pub fn fp3_verdict(points: &[Fp3Point], tol: &Tolerances) -> Fp3Verdict {
    let mut metrics = Vec::with_capacity(points.len());
    for p in points {
        match &p.outcome {
            Ok(m) => metrics.push(*m),
            Err(_) => return Fp3Verdict::Fail,
        }
    }
    if metrics.len() < 2 || metrics.iter().all(|m| m.loop_width_metric < tol.memoryless_metric) {
        return Fp3Verdict::Vacuous;
    }
    let decreasing = metrics
        .windows(2)
        .all(|w| w[1].lobe_area.abs() < w[0].lobe_area.abs() && w[1].loop_width_metric < w[0].loop_width_metric);
    if decreasing {
        Fp3Verdict::Pass
    } else {
        Fp3Verdict::Fail
    }
}

fn settle<M: ConductanceModel + ?Sized>(
    model: &M,
    circuit: &CircuitParameters,
    settings: &RunSettings,
) -> Result<Settled, AnalysisError> {
    Ok(settle_to_periodic(
        model,
        circuit,
        settings.initial_state,
        &settings.integrator,
        &settings.settle,
    )?)
}

/// Runs the settle/pinch/area pipeline at `circuit.f` and at every sweep
/// frequency, and fills in the three fingerprint verdicts.
///
/// A failing sweep point is recorded in `fp3_evidence` without aborting; only a
/// failure at the primary frequency is returned as an error.
pub fn fingerprint_report<M: ConductanceModel + ?Sized>(
    model: &M,
    circuit: &CircuitParameters,
    sweep_freqs: &[f64],
    settings: &RunSettings,
    tol: &Tolerances,
) -> Result<FingerprintReport, AnalysisError> {
    if sweep_freqs.is_empty() || !sweep_freqs.contains(&circuit.f) {
        return Err(AnalysisError::InvalidSweep(format!(
            "sweep frequencies {sweep_freqs:?} must include f = {}",
            circuit.f
        )));
    }
    let mut freqs = sweep_freqs.to_vec();
    freqs.sort_by(f64::total_cmp);
    freqs.dedup();

    let runs: Vec<(f64, Result<(Settled, LoopMetrics), AnalysisError>)> = freqs
        .par_iter()
        .map(|&f| {
            let c = circuit.with_frequency(f);
            let run = settle(model, &c, settings).and_then(|s| {
                let m = loop_metrics(&s.trajectory)?;
                Ok((s, m))
            });
            (f, run)
        })
        .collect();

    let (settled, _) = match &runs
        .iter()
        .find(|(f, _)| *f == circuit.f)
        .expect("primary frequency present")
        .1
    {
        Ok(v) => v.clone(),
        Err(e) => return Err(e.clone()),
    };
    let traj = &settled.trajectory;
    let pins = pinch_points(traj)?;
    let u_peak = traj
        .uniform_times(20_000)
        .into_iter()
        .map(|t| traj.voltage_at(t).abs())
        .fold(0.0, f64::max);
    let crossing_voltage_rel = pins.iter().map(|p| p.voltage_at.abs()).fold(0.0, f64::max) / u_peak;
    let min_crossing_g = pins.iter().map(|p| p.g_at).fold(f64::INFINITY, f64::min);
    let g_floor = model.conductance_floor();

    let fp3_evidence: Vec<Fp3Point> = runs
        .into_iter()
        .map(|(f, r)| Fp3Point {
            f,
            outcome: r.map(|(_, m)| m),
        })
        .collect();

    Ok(FingerprintReport {
        f: circuit.f,
        settle: settled.report,
        slope_spread: slope_spread(&pins),
        concavities_alternate: concavities_alternate(&pins),
        crossing_voltage_rel,
        min_crossing_g,
        g_floor,
        fp1_pass: fp1_verdict(&pins, tol),
        fp2_pass: fp2_verdict(crossing_voltage_rel, min_crossing_g, g_floor, tol),
        fp3_verdict: fp3_verdict(&fp3_evidence, tol),
        fp3_evidence,
        pinch_points: pins,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub f: f64,
    /// Peak `|i|` over the settled period (A).
    pub i_m: f64,
    /// Period average of `g` (S).
    pub g_mean: f64,
    /// `G_min + I_m²/(2 P_M)` from the measured `I_m`.
    pub hf_estimate: f64,
    pub rel_error: f64,
    pub settle: SettleReport,
}

/// Settles the arc at each of [`TABLE1_FREQUENCIES`] and compares the mean
/// conductance with the high-frequency Mayr estimate.
pub fn table1_reproduction(
    arc: &ArcParameters,
    circuit_base: &CircuitParameters,
    settings: &RunSettings,
) -> Result<Vec<Table1Row>, AnalysisError> {
    TABLE1_FREQUENCIES
        .par_iter()
        .map(|&f| {
            let c = circuit_base.with_frequency(f);
            let s = settle(arc, &c, settings)?;
            let m = loop_metrics(&s.trajectory)?;
            let hf = hf_limit_conductance(arc, m.i_peak);
            Ok(Table1Row {
                f,
                i_m: m.i_peak,
                g_mean: m.g_mean,
                hf_estimate: hf,
                rel_error: (m.g_mean - hf).abs() / hf,
                settle: s.report,
            })
        })
        .collect()
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    K,
    L,
    UC,
    I0,
    F,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::K => "k",
            SweepAxis::L => "l",
            SweepAxis::UC => "u_c",
            SweepAxis::I0 => "i0",
            SweepAxis::F => "f",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.trim().to_ascii_lowercase().as_str() {
            "k" => SweepAxis::K,
            "l" => SweepAxis::L,
            "u_c" | "uc" => SweepAxis::UC,
            "i0" => SweepAxis::I0,
            "f" => SweepAxis::F,
            _ => return None,
        })
    }

    pub fn validate(self, value: f64) -> Result<(), AnalysisError> {
        let ok = match self {
            SweepAxis::K => value.is_finite() && value >= 0.0,
            _ => value.is_finite() && value > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(AnalysisError::InvalidSweep(format!(
                "{} = {value} violates its positivity constraint",
                self.name()
            )))
        }
    }

    pub fn apply(
        self,
        arc: &ArcParameters,
        circuit: &CircuitParameters,
        value: f64,
    ) -> (ArcParameters, CircuitParameters) {
        let (mut a, mut c) = (*arc, *circuit);
        match self {
            SweepAxis::K => a.k = value,
            SweepAxis::L => c.l = value,
            SweepAxis::UC => a.u_c = value,
            SweepAxis::I0 => a.i0 = value,
            SweepAxis::F => c.f = value,
        }
        (a, c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRun {
    pub arc: ArcParameters,
    pub circuit: CircuitParameters,
    pub settled: Settled,
    pub metrics: LoopMetrics,
    pub waveform: Vec<WaveformSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub outcome: Result<SweepRun, AnalysisError>,
}

/// Settles and measures the loop for every value of `axis`.
///
/// Each point keeps `waveform_points` uniform samples of its settled period.
pub fn parameter_sweep(
    arc_base: &ArcParameters,
    circuit_base: &CircuitParameters,
    axis: SweepAxis,
    values: &[f64],
    settings: &RunSettings,
    waveform_points: usize,
) -> Result<Vec<SweepPoint>, AnalysisError> {
    if values.is_empty() {
        return Err(AnalysisError::InvalidSweep("no sweep values".into()));
    }
    for &v in values {
        axis.validate(v)?;
    }
    Ok(values
        .par_iter()
        .map(|&value| {
            let (arc, circuit) = axis.apply(arc_base, circuit_base, value);
            let outcome = settle(&arc, &circuit, settings).and_then(|settled| {
                let metrics = loop_metrics(&settled.trajectory)?;
                let waveform = sample_waveform(&settled.trajectory, &circuit, waveform_points);
                Ok(SweepRun {
                    arc,
                    circuit,
                    settled,
                    metrics,
                    waveform,
                })
            });
            SweepPoint { value, outcome }
        })
        .collect())
}
