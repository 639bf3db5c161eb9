use crate::integrator::Trajectory;
use crate::model::CircuitParameters;

use super::{periodic_integral, pinch_points, AnalysisError, Waveform};

/// `∮ u di = ∫ u (di/dt) dt` over the half period starting at `t_star`.
pub fn lobe_area<W: Waveform + ?Sized>(w: &W, t_star: f64) -> f64 {
    let half = 0.5 * w.period();
    periodic_integral(w, t_star, t_star + half, |t| w.voltage(t) * w.current_rate(t))
}

/// Width of the u–i loop relative to the voltage range.
///
/// For a grid of current levels strictly inside the current range, every
/// passage of the waveform through the level is located and the spread of the
/// voltages found there is measured. The metric is the largest spread divided
/// by the global voltage range; it is zero for any single-valued u(i) curve.
pub fn single_valuedness_metric<W: Waveform + ?Sized>(w: &W) -> Result<f64, AnalysisError> {
    const SAMPLES: usize = 8000;
    const LEVELS: usize = 400;
    let (a, b) = w.span();
    let samples: Vec<(f64, f64)> = (0..=SAMPLES)
        .map(|k| {
            let t = if k == SAMPLES {
                b
            } else {
                a + (b - a) * k as f64 / SAMPLES as f64
            };
            (w.current(t), w.voltage(t))
        })
        .collect();
    let (i_lo, i_hi) = samples
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), &(i, _)| (lo.min(i), hi.max(i)));
    let (u_lo, u_hi) = samples
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), &(_, u)| (lo.min(u), hi.max(u)));
    let i_range = i_hi - i_lo;
    if !(i_range > 1e-12 * i_hi.abs().max(i_lo.abs()).max(1e-300)) {
        return Err(AnalysisError::DegenerateRange(i_range));
    }
    let u_range = u_hi - u_lo;
    if u_range == 0.0 {
        return Ok(0.0);
    }

    let mut worst: f64 = 0.0;
    let mut hits = Vec::new();
    for j in 0..LEVELS {
        let level = i_lo + i_range * (j as f64 + 0.5) / LEVELS as f64;
        hits.clear();
        for pair in samples.windows(2) {
            let ((i0, u0), (i1, u1)) = (pair[0], pair[1]);
            let (d0, d1) = (i0 - level, i1 - level);
            if d0 == 0.0 {
                hits.push(u0);
            } else if d0 * d1 < 0.0 {
                let s = d0 / (d0 - d1);
                hits.push(u0 + s * (u1 - u0));
            }
        }
        if hits.len() >= 2 {
            let (lo, hi) = hits
                .iter()
                .fold((f64::MAX, f64::MIN), |(lo, hi), &u| (lo.min(u), hi.max(u)));
            worst = worst.max(hi - lo);
        }
    }
    Ok(worst / u_range)
}

/// Period average of the conductance.
pub fn g_mean(traj: &Trajectory) -> f64 {
    let (a, b) = (traj.t_start(), traj.t_end());
    periodic_integral(traj, a, b, |t| traj.state_at(t).g) / (b - a)
}

/// Relative RMS difference between the interpolant's `di/dt` and the circuit
/// equation `(E − u − R i)/L` over the period.
pub fn rate_consistency(traj: &Trajectory, circuit: &CircuitParameters) -> f64 {
    let (a, b) = (traj.t_start(), traj.t_end());
    let diff = periodic_integral(traj, a, b, |t| {
        let s = traj.state_at(t);
        let eq = (circuit.source(t) - s.voltage() - circuit.r * s.i) / circuit.l;
        (traj.derivative_at(t).0 - eq).powi(2)
    });
    let norm = periodic_integral(traj, a, b, |t| traj.derivative_at(t).0.powi(2));
    (diff / norm).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopMetrics {
    /// `∫ u di` over the half period starting at the first pinch point (V·A).
    pub lobe_area: f64,
    pub loop_width_metric: f64,
    pub i_peak: f64,
    pub g_mean: f64,
    pub g_min_observed: f64,
    pub g_max_observed: f64,
}

pub fn loop_metrics(traj: &Trajectory) -> Result<LoopMetrics, AnalysisError> {
    let pins = pinch_points(traj)?;
    let lobe = lobe_area(traj, pins[0].t_star);
    let width = single_valuedness_metric(traj)?;
    let mut i_peak: f64 = 0.0;
    let (mut g_lo, mut g_hi) = (f64::MAX, f64::MIN);
    let mut visit = |t: f64| {
        let s = traj.state_at(t);
        i_peak = i_peak.max(s.i.abs());
        g_lo = g_lo.min(s.g);
        g_hi = g_hi.max(s.g);
    };
    for t in traj.uniform_times(20_000) {
        visit(t);
    }
    for t in traj.node_times() {
        visit(t);
    }
    Ok(LoopMetrics {
        lobe_area: lobe,
        loop_width_metric: width,
        i_peak,
        g_mean: g_mean(traj),
        g_min_observed: g_lo,
        g_max_observed: g_hi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveformSample {
    pub t: f64,
    pub i: f64,
    pub g: f64,
    pub u: f64,
    pub e: f64,
}

/// `points` uniform samples of the period (the closing end point excluded).
pub fn sample_waveform(traj: &Trajectory, circuit: &CircuitParameters, points: usize) -> Vec<WaveformSample> {
    let times = traj.uniform_times(points);
    times[..points]
        .iter()
        .map(|&t| {
            let s = traj.state_at(t);
            WaveformSample {
                t,
                i: s.i,
                g: s.g,
                u: s.voltage(),
                e: circuit.source(t),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::AnalyticWaveform;
    use std::f64::consts::PI;

    /// Trapezoid sum of u di along n + 1 points of the parametrisation.
    fn brute_force_area(u: impl Fn(f64) -> f64, i: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let mut total = 0.0;
        let mut prev = (i(a), u(a));
        for k in 1..=n {
            let t = a + (b - a) * k as f64 / n as f64;
            let cur = (i(t), u(t));
            total += 0.5 * (cur.1 + prev.1) * (cur.0 - prev.0);
            prev = cur;
        }
        total
    }

    fn circle(f: f64) -> impl Waveform {
        let w = 2.0 * PI * f;
        AnalyticWaveform {
            t0: 0.0,
            period: 1.0 / f,
            current: move |t: f64| (w * t).cos(),
            current_rate: move |t: f64| -w * (w * t).sin(),
            voltage: move |t: f64| (w * t).sin(),
        }
    }

    #[test]
    fn circle_half_period_area() {
        let f = 50.0;
        let w = 2.0 * PI * f;
        let oracle = brute_force_area(|t| (w * t).sin(), |t| (w * t).cos(), 0.0, 0.5 / f, 1_000_000);
        assert!((oracle + PI / 2.0).abs() < 1e-9);
        let area = lobe_area(&circle(f), 0.0);
        assert!((area - oracle).abs() < 1e-9);
        // full loop is −π regardless of the start point
        let full = lobe_area(&circle(f), 0.0031) + lobe_area(&circle(f), 0.0031 + 0.01);
        assert!((full + PI).abs() < 1e-12);
    }

    #[test]
    fn memoryless_loop_has_no_area_or_width() {
        let (f, g0) = (50.0, 0.3);
        let w = 2.0 * PI * f;
        let wf = AnalyticWaveform {
            t0: 0.0,
            period: 1.0 / f,
            current: move |t: f64| 5.0 * (w * t).sin(),
            current_rate: move |t: f64| 5.0 * w * (w * t).cos(),
            voltage: move |t: f64| 5.0 * (w * t).sin() / g0,
        };
        assert!(lobe_area(&wf, 0.0).abs() < 1e-12);
        assert!(single_valuedness_metric(&wf).unwrap() < 1e-12);
    }

    #[test]
    fn circle_is_maximally_multivalued() {
        let m = single_valuedness_metric(&circle(50.0)).unwrap();
        assert!(m > 0.99 && m <= 1.0, "{m}");
    }

    #[test]
    fn constant_current_is_degenerate() {
        let wf = AnalyticWaveform {
            t0: 0.0,
            period: 1.0,
            current: |_t: f64| 1.0,
            current_rate: |_t: f64| 0.0,
            voltage: |t: f64| t,
        };
        assert!(matches!(
            single_valuedness_metric(&wf),
            Err(AnalysisError::DegenerateRange(_))
        ));
    }
}
