//! Memristive fingerprint evidence extracted from settled periods.

mod area;
mod fourier;
mod pinch;
mod report;

use thiserror::Error;

use crate::integrator::{IntegrationError, IntegratorConfig, SettleConfig, Trajectory};
use crate::model::{ArcState, ModelError};

pub use area::{
    g_mean, lobe_area, loop_metrics, rate_consistency, sample_waveform, single_valuedness_metric, LoopMetrics,
    WaveformSample,
};
pub use fourier::{
    area_from_fourier, fourier_coefficients, half_period_product_integral, FourierSpectrum, ProductKind,
};
pub use pinch::{pinch_points, Concavity, PinchPoint};
pub use report::{
    fingerprint_report, fp1_verdict, fp2_verdict, fp3_verdict, parameter_sweep, table1_reproduction, FingerprintReport,
    Fp3Point, Fp3Verdict, SweepAxis, SweepPoint, SweepRun, Table1Row, Tolerances, TABLE1_FREQUENCIES,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("the current never changes sign")]
    NoCrossings,
    #[error("current range {0:e} is below the numeric floor")]
    DegenerateRange(f64),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Integration and settle settings shared by every analysis pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub integrator: IntegratorConfig,
    pub settle: SettleConfig,
    pub initial_state: ArcState,
}

impl Default for RunSettings {
    /// Tolerances 1e-10, settle tolerance 1e-8, start from `(i, g) = (0, 1 S)`.
    /// The step cap of `T/200` is applied per frequency by the settle loop.
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig {
                abs_tol: 1e-10,
                rel_tol: 1e-10,
                max_step: 1.0,
                initial_step: 1e-9,
                max_steps: 20_000_000,
            },
            settle: SettleConfig::default(),
            initial_state: ArcState::new(0.0, 1.0),
        }
    }
}

/// Periodic voltage/current signal over one period.
///
/// Evaluations outside the span wrap around by whole periods.
pub trait Waveform {
    fn span(&self) -> (f64, f64);
    fn current(&self, t: f64) -> f64;
    fn current_rate(&self, t: f64) -> f64;
    fn voltage(&self, t: f64) -> f64;
    /// Quadrature panel boundaries within `[a, b]`, including both ends.
    fn knots(&self, a: f64, b: f64) -> Vec<f64>;

    fn period(&self) -> f64 {
        let (a, b) = self.span();
        b - a
    }
}

impl Waveform for Trajectory {
    fn span(&self) -> (f64, f64) {
        (self.t_start(), self.t_end())
    }

    fn current(&self, t: f64) -> f64 {
        self.current_at(t)
    }

    fn current_rate(&self, t: f64) -> f64 {
        self.derivative_at(t).0
    }

    fn voltage(&self, t: f64) -> f64 {
        self.voltage_at(t)
    }

    fn knots(&self, a: f64, b: f64) -> Vec<f64> {
        let mut v = vec![a];
        v.extend(self.node_times().into_iter().filter(|&t| t > a && t < b));
        v.push(b);
        v
    }
}

/// Waveform given by closed-form functions of time, used for synthetic loops.
pub struct AnalyticWaveform<I, D, U> {
    pub t0: f64,
    pub period: f64,
    pub current: I,
    pub current_rate: D,
    pub voltage: U,
}

impl<I, D, U> Waveform for AnalyticWaveform<I, D, U>
where
    I: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
    U: Fn(f64) -> f64,
{
    fn span(&self) -> (f64, f64) {
        (self.t0, self.t0 + self.period)
    }

    fn current(&self, t: f64) -> f64 {
        (self.current)(t)
    }

    fn current_rate(&self, t: f64) -> f64 {
        (self.current_rate)(t)
    }

    fn voltage(&self, t: f64) -> f64 {
        (self.voltage)(t)
    }

    fn knots(&self, a: f64, b: f64) -> Vec<f64> {
        let n = ((b - a) / self.period * 512.0).ceil().max(1.0) as usize;
        (0..=n)
            .map(|k| if k == n { b } else { a + (b - a) * k as f64 / n as f64 })
            .collect()
    }
}

// 8-point Gauss–Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

fn push_gauss_nodes(knots: &[f64], sink: &mut impl FnMut(f64, f64)) {
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, wt) in GL_NODES.iter().zip(GL_WEIGHTS) {
            sink(mid + half * x, half * wt);
        }
    }
}

/// Gauss nodes and weights for `∫_a^b` with times wrapped into the span.
pub(crate) fn quadrature_rule<W: Waveform + ?Sized>(w: &W, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (s, e) = w.span();
    let period = e - s;
    let mut rule = Vec::new();
    let mut cur = a;
    while b - cur > 1e-12 * period {
        let mut lo = s + (cur - s).rem_euclid(period);
        if lo >= e - 1e-12 * period {
            lo = s;
        }
        let shift = cur - lo;
        let hi = (b - shift).min(e);
        push_gauss_nodes(&w.knots(lo, hi), &mut |t, wt| rule.push((t, wt)));
        cur = hi + shift;
    }
    rule
}

/// `∫_a^b f(t) dt`; the integrand receives times wrapped into the span.
pub(crate) fn periodic_integral<W: Waveform + ?Sized>(w: &W, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    quadrature_rule(w, a, b).into_iter().map(|(t, wt)| wt * f(t)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gauss_panels(knots: &[f64], mut f: impl FnMut(f64) -> f64) -> f64 {
        let mut total = 0.0;
        push_gauss_nodes(knots, &mut |t, wt| total += wt * f(t));
        total
    }

    #[test]
    fn gauss_is_exact_for_polynomials() {
        let v = gauss_panels(&[0.0, 1.0], |x| x.powi(15));
        assert!((v - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn periodic_integral_wraps() {
        let w = AnalyticWaveform {
            t0: 2.0,
            period: 1.0,
            current: |t: f64| (2.0 * PI * t).sin(),
            current_rate: |t: f64| 2.0 * PI * (2.0 * PI * t).cos(),
            voltage: |t: f64| (2.0 * PI * t).sin(),
        };
        // integral of sin² over any half period is 1/4
        for a in [2.0, 2.3, 2.77, 1.1, 4.9] {
            let v = periodic_integral(&w, a, a + 0.5, |t| w.voltage(t) * w.current(t));
            assert!((v - 0.25).abs() < 1e-14, "a = {a}: {v}");
        }
        let v = periodic_integral(&w, 2.5, 3.8, |_| 1.0);
        assert!((v - 1.3).abs() < 1e-13);
    }
}
