//! Adaptive Dormand–Prince 5(4) integration of the two-state arc circuit.
//!
//! Accepted steps keep the coefficients of the free 4th-order interpolant, so a
//! [`Trajectory`] can be evaluated (and differentiated) anywhere in its span.
//! On top of that sit sign-change event location and a period-by-period settle
//! loop that stops once the Poincaré map at `t = nT` has a fixed point.

use thiserror::Error;

use crate::model::{circuit_rhs, ArcState, CircuitParameters, ConductanceModel, ModelError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("maximum number of steps ({steps}) exceeded at t = {t:e}")]
    MaxStepsExceeded { t: f64, steps: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no periodic steady state after {} periods (residual {:e})", .report.periods_integrated, .report.period_map_residual)]
    NotConverged { report: SettleReport },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_step: f64,
    pub initial_step: f64,
    pub max_steps: usize,
}

impl IntegratorConfig {
    /// Tolerances of 1e-10 with the step capped at `period / 200`.
    pub fn for_period(period: f64) -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_step: period / 200.0,
            initial_step: period * 1e-6,
            max_steps: 20_000_000,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.abs_tol = tol;
        self.rel_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<(), IntegrationError> {
        let ok = self.abs_tol > 0.0
            && self.rel_tol > 0.0
            && self.initial_step > 0.0
            && self.initial_step <= self.max_step
            && self.max_step.is_finite()
            && self.max_steps > 0;
        if ok {
            Ok(())
        } else {
            Err(IntegrationError::InvalidConfig(format!("{self:?}")))
        }
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

type Vec2 = [f64; 2];

#[inline]
fn axpy(y: Vec2, h: f64, terms: &[(f64, Vec2)]) -> Vec2 {
    let mut out = y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

fn to_vec(s: ArcState) -> Vec2 {
    [s.i, s.g]
}

fn to_state(v: Vec2) -> ArcState {
    ArcState { i: v[0], g: v[1] }
}

/// One accepted step with its dense-output coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub t0: f64,
    pub h: f64,
    t_end: f64,
    pub y0: ArcState,
    pub y1: ArcState,
    /// Estimated local error divided by the mixed tolerance (≤ 1 when accepted).
    pub error_ratio: f64,
    cont: [Vec2; 5],
}

impl Step {
    pub fn t1(&self) -> f64 {
        self.t_end
    }

    /// Cubic Hermite step through two nodes with known derivatives.
    pub fn hermite(t0: f64, t1: f64, y0: ArcState, f0: (f64, f64), y1: ArcState, f1: (f64, f64)) -> Self {
        let h = t1 - t0;
        let (a, b) = (to_vec(y0), to_vec(y1));
        let d = [b[0] - a[0], b[1] - a[1]];
        let bspl = [h * f0.0 - d[0], h * f0.1 - d[1]];
        let c3 = [d[0] - h * f1.0 - bspl[0], d[1] - h * f1.1 - bspl[1]];
        Self {
            t0,
            h,
            t_end: t1,
            y0,
            y1,
            error_ratio: 0.0,
            cont: [a, d, bspl, c3, [0.0; 2]],
        }
    }

    fn eval(&self, t: f64) -> ArcState {
        if t == self.t0 {
            return self.y0;
        }
        if t == self.t1() {
            return self.y1;
        }
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let c = &self.cont;
        let mut out = [0.0; 2];
        for j in 0..2 {
            out[j] = c[0][j] + s * (c[1][j] + s1 * (c[2][j] + s * (c[3][j] + s1 * c[4][j])));
        }
        to_state(out)
    }

    fn eval_derivative(&self, t: f64) -> (f64, f64) {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let c = &self.cont;
        let mut out = [0.0; 2];
        for j in 0..2 {
            let cc = c[3][j] + s1 * c[4][j];
            let dcc = -c[4][j];
            let b = c[2][j] + s * cc;
            let db = cc + s * dcc;
            let a = c[1][j] + s1 * b;
            let da = -b + s1 * db;
            out[j] = (a + s * da) / self.h;
        }
        (out[0], out[1])
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub max_error_ratio: f64,
}

/// Dense solution over `[t_start, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    steps: Vec<Step>,
    pub stats: IntegrationStats,
}

/// Which signal to examine for sign changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    Current,
    Voltage,
}

impl Trajectory {
    /// Builds a trajectory from sampled nodes and derivatives with cubic Hermite
    /// interpolation between them.
    pub fn from_samples(times: &[f64], states: &[ArcState], derivatives: &[(f64, f64)]) -> Self {
        assert!(times.len() >= 2 && times.len() == states.len() && states.len() == derivatives.len());
        let steps = (0..times.len() - 1)
            .map(|k| {
                Step::hermite(
                    times[k],
                    times[k + 1],
                    states[k],
                    derivatives[k],
                    states[k + 1],
                    derivatives[k + 1],
                )
            })
            .collect::<Vec<_>>();
        let stats = IntegrationStats {
            accepted: steps.len(),
            ..Default::default()
        };
        Self { steps, stats }
    }

    /// Samples `f(t) -> (state, derivative)` on `n` uniform intervals.
    pub fn from_fn(t0: f64, t1: f64, n: usize, f: impl Fn(f64) -> (ArcState, (f64, f64))) -> Self {
        let times: Vec<f64> = (0..=n).map(|k| t0 + (t1 - t0) * k as f64 / n as f64).collect();
        let (states, derivs): (Vec<_>, Vec<_>) = times.iter().map(|&t| f(t)).unzip();
        Self::from_samples(&times, &states, &derivs)
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn t_start(&self) -> f64 {
        self.steps[0].t0
    }

    pub fn t_end(&self) -> f64 {
        self.steps[self.steps.len() - 1].t1()
    }

    pub fn final_state(&self) -> ArcState {
        self.steps[self.steps.len() - 1].y1
    }

    /// Node times: every step start plus the final end point.
    pub fn node_times(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.steps.iter().map(|s| s.t0).collect();
        v.push(self.t_end());
        v
    }

    fn locate(&self, t: f64) -> &Step {
        let idx = self.steps.partition_point(|s| s.t0 <= t);
        &self.steps[idx.saturating_sub(1).min(self.steps.len() - 1)]
    }

    pub fn state_at(&self, t: f64) -> ArcState {
        self.locate(t).eval(t)
    }

    /// `(di/dt, dg/dt)` of the interpolant.
    pub fn derivative_at(&self, t: f64) -> (f64, f64) {
        self.locate(t).eval_derivative(t)
    }

    pub fn current_at(&self, t: f64) -> f64 {
        self.state_at(t).i
    }

    pub fn voltage_at(&self, t: f64) -> f64 {
        self.state_at(t).voltage()
    }

    pub fn signal_at(&self, signal: Signal, t: f64) -> f64 {
        match signal {
            Signal::Current => self.current_at(t),
            Signal::Voltage => self.voltage_at(t),
        }
    }

    /// `n + 1` uniform sample times covering the span.
    pub fn uniform_times(&self, n: usize) -> Vec<f64> {
        let (a, b) = (self.t_start(), self.t_end());
        (0..=n)
            .map(|k| if k == n { b } else { a + (b - a) * k as f64 / n as f64 })
            .collect()
    }
}

fn error_ratio(y0: Vec2, y1: Vec2, err: Vec2, cfg: &IntegratorConfig) -> f64 {
    (0..2)
        .map(|c| {
            let sc = cfg.abs_tol + cfg.rel_tol * y0[c].abs().max(y1[c].abs());
            (err[c] / sc).abs()
        })
        .fold(0.0, f64::max)
}

/// Integrates `dy/dt = rhs(t, y)` over `t_span` with a Dormand–Prince 5(4) pair.
pub fn integrate<F>(
    mut rhs: F,
    s0: ArcState,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegrationError>
where
    F: FnMut(f64, ArcState) -> Result<(f64, f64), ModelError>,
{
    cfg.validate()?;
    let (t0, t1) = t_span;
    if !(t1 > t0) {
        return Err(IntegrationError::InvalidConfig(format!("empty span [{t0}, {t1}]")));
    }
    if !(s0.g > 0.0) {
        return Err(ModelError::NonPositiveConductance { t: t0, g: s0.g }.into());
    }

    let mut f = |t: f64, y: Vec2| -> Result<Vec2, ModelError> {
        let (a, b) = rhs(t, to_state(y))?;
        Ok([a, b])
    };

    let mut stats = IntegrationStats::default();
    let mut steps = Vec::new();
    let mut t = t0;
    let mut y = to_vec(s0);
    let mut k1 = f(t, y)?;
    stats.rhs_evals += 1;
    let mut h = cfg.initial_step.min(cfg.max_step).min(t1 - t0);
    let mut last_rejected = false;
    let mut failed_stages = 0usize;

    loop {
        if steps.len() + stats.rejected >= cfg.max_steps {
            return Err(IntegrationError::MaxStepsExceeded {
                t,
                steps: cfg.max_steps,
            });
        }
        let remaining = t1 - t;
        let last = h >= remaining * (1.0 - 1e-12);
        if last {
            h = remaining;
        }
        if h <= 16.0 * f64::EPSILON * t.abs().max(t1.abs()).max(f64::MIN_POSITIVE) {
            return Err(IntegrationError::StepUnderflow { t, h });
        }

        let trial = (|| -> Result<(Vec2, [Vec2; 6]), ModelError> {
            let k2 = f(t + C2 * h, axpy(y, h, &[(A21, k1)]))?;
            let k3 = f(t + C3 * h, axpy(y, h, &[(A31, k1), (A32, k2)]))?;
            let k4 = f(t + C4 * h, axpy(y, h, &[(A41, k1), (A42, k2), (A43, k3)]))?;
            let k5 = f(t + C5 * h, axpy(y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]))?;
            let k6 = f(
                t + h,
                axpy(y, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]),
            )?;
            let y_new = axpy(y, h, &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)]);
            let t_new = if last { t1 } else { t + h };
            let k7 = f(t_new, y_new)?;
            Ok((y_new, [k2, k3, k4, k5, k6, k7]))
        })();
        stats.rhs_evals += 6;
        let (y_new, [_k2, k3, k4, k5, k6, k7]) = match trial {
            Ok(v) => v,
            // A trial step that drives a stage through g <= 0 is retried with a
            // smaller step; persistent failure is reported.
            Err(e @ ModelError::NonPositiveConductance { .. }) => {
                stats.rejected += 1;
                failed_stages += 1;
                if failed_stages > 60 {
                    return Err(e.into());
                }
                last_rejected = true;
                h *= 0.25;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        failed_stages = 0;
        let t_new = if last { t1 } else { t + h };

        let err = axpy(
            [0.0; 2],
            h,
            &[(E1, k1), (E3, k3), (E4, k4), (E5, k5), (E6, k6), (E7, k7)],
        );
        let ratio = error_ratio(y, y_new, err, cfg);

        if ratio <= 1.0 {
            let ydiff = [y_new[0] - y[0], y_new[1] - y[1]];
            let bspl = [h * k1[0] - ydiff[0], h * k1[1] - ydiff[1]];
            let c3 = [ydiff[0] - h * k7[0] - bspl[0], ydiff[1] - h * k7[1] - bspl[1]];
            let c4 = axpy(
                [0.0; 2],
                h,
                &[(D1, k1), (D3, k3), (D4, k4), (D5, k5), (D6, k6), (D7, k7)],
            );
            steps.push(Step {
                t0: t,
                h: t_new - t,
                t_end: t_new,
                y0: to_state(y),
                y1: to_state(y_new),
                error_ratio: ratio,
                cont: [y, ydiff, bspl, c3, c4],
            });
            stats.accepted += 1;
            stats.max_error_ratio = stats.max_error_ratio.max(ratio);
            t = t_new;
            y = y_new;
            k1 = k7;
            if last {
                break;
            }
            let mut fac = 0.9 * ratio.max(1e-10).powf(-0.2);
            fac = fac.clamp(0.2, if last_rejected { 1.0 } else { 10.0 });
            h = (h * fac).min(cfg.max_step);
            last_rejected = false;
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h *= (0.9 * ratio.powf(-0.2)).max(0.2);
        }
    }

    Ok(Trajectory { steps, stats })
}

/// Brent's method on a bracketing interval.
fn brent(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 1e-300;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return b;
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    b
}

/// Sign-changing zeros of the current or voltage inside `window`, ascending.
///
/// Each step is scanned on four sub-intervals and every bracket is refined with
/// Brent's method on the interpolant. Zeros where the signal touches zero
/// without changing sign are not reported.
pub fn find_zero_crossings(traj: &Trajectory, signal: Signal, window: (f64, f64)) -> Vec<f64> {
    const SUBDIV: usize = 4;
    let (ta, tb) = (window.0.max(traj.t_start()), window.1.min(traj.t_end()));
    let mut grid = Vec::new();
    for s in traj.steps() {
        for k in 0..SUBDIV {
            let t = s.t0 + s.h * k as f64 / SUBDIV as f64;
            if t > ta && t < tb {
                grid.push(t);
            }
        }
    }
    grid.insert(0, ta);
    grid.push(tb);

    let mut out = Vec::new();
    let mut last_nonzero: Option<(f64, f64)> = None;
    for &t in &grid {
        let v = traj.signal_at(signal, t);
        if v == 0.0 {
            continue;
        }
        if let Some((tp, vp)) = last_nonzero {
            if vp.signum() != v.signum() {
                let root = brent(|x| traj.signal_at(signal, x), tp, t, vp, v);
                out.push(root);
            }
        }
        last_nonzero = Some((t, v));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SettleConfig {
    pub tol: f64,
    pub min_periods: usize,
    pub max_periods: usize,
}

impl Default for SettleConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            min_periods: 2,
            max_periods: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SettleReport {
    pub periods_integrated: usize,
    pub converged: bool,
    pub period_map_residual: f64,
}

/// Steady period of a driven model, aligned with the source phase.
#[derive(Debug, Clone, PartialEq)]
pub struct Settled {
    /// Exactly one period, starting at an integer multiple of `T`.
    pub trajectory: Trajectory,
    pub report: SettleReport,
}

impl Settled {
    pub fn period_start(&self) -> f64 {
        self.trajectory.t_start()
    }
}

fn period_map_residual(a: ArcState, b: ArcState) -> f64 {
    let di = (a.i - b.i).abs() / (1.0 + a.i.abs().max(b.i.abs()));
    let dg = (a.g - b.g).abs() / (1.0 + a.g.abs().max(b.g.abs()));
    di.max(dg)
}

/// Integrates period by period until the state at successive period boundaries
/// agrees to `settle.tol`, then integrates one more period and returns it.
///
/// The step is capped at `T / 200` regardless of `cfg.max_step`.
pub fn settle_to_periodic<M: ConductanceModel + ?Sized>(
    model: &M,
    circuit: &CircuitParameters,
    s0: ArcState,
    cfg: &IntegratorConfig,
    settle: &SettleConfig,
) -> Result<Settled, IntegrationError> {
    if settle.min_periods < 1 || settle.max_periods < settle.min_periods || !(settle.tol > 0.0) {
        return Err(IntegrationError::InvalidConfig(format!("{settle:?}")));
    }
    let period = circuit.period();
    let mut cfg = *cfg;
    cfg.max_step = cfg.max_step.min(period / 200.0);
    cfg.initial_step = cfg.initial_step.min(cfg.max_step);

    let rhs = |t: f64, s: ArcState| circuit_rhs(model, circuit, t, s);
    let mut state = s0;
    let mut residual = f64::INFINITY;
    let mut n = 0;
    while n < settle.max_periods {
        let span = (n as f64 * period, (n + 1) as f64 * period);
        let traj = integrate(rhs, state, span, &cfg)?;
        let next = traj.final_state();
        residual = period_map_residual(state, next);
        state = next;
        n += 1;
        if n >= settle.min_periods && residual <= settle.tol {
            let span = (n as f64 * period, (n + 1) as f64 * period);
            let trajectory = integrate(rhs, state, span, &cfg)?;
            let report = SettleReport {
                periods_integrated: n,
                converged: true,
                period_map_residual: residual,
            };
            return Ok(Settled { trajectory, report });
        }
    }
    Err(IntegrationError::NotConverged {
        report: SettleReport {
            periods_integrated: n,
            converged: false,
            period_map_residual: residual,
        },
    })
}
