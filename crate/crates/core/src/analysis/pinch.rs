use crate::integrator::{find_zero_crossings, Signal, Trajectory};

use super::AnalysisError;

/// Side of the u–i curve the loop bends towards as it passes the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Concavity {
    Up,
    Down,
    /// `dg/dt` vanishes at the crossing, as for a linear resistor.
    Degenerate,
}

impl Concavity {
    pub fn sign(self) -> i8 {
        match self {
            Concavity::Up => 1,
            Concavity::Down => -1,
            Concavity::Degenerate => 0,
        }
    }
}

/// A sign-changing zero of the current, where the loop passes the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinchPoint {
    pub t_star: f64,
    pub g_at: f64,
    /// `du/di = 1/g` at the crossing (Ω).
    pub slope: f64,
    pub concavity: Concavity,
    pub voltage_at: f64,
    pub di_dt_at: f64,
    pub dg_dt_at: f64,
}

/// Relative conductance change per period below which concavity is degenerate.
const DEGENERATE_RATE: f64 = 1e-9;

/// Pinch points of one settled period.
///
/// With `i = 0` the slope is `du/di = 1/g` and the curvature is
/// `d²u/di² = −(dg/dt)/(g² di/dt)`, whose sign is recorded.
pub fn pinch_points(traj: &Trajectory) -> Result<Vec<PinchPoint>, AnalysisError> {
    let span = (traj.t_start(), traj.t_end());
    let period = span.1 - span.0;
    let times = find_zero_crossings(traj, Signal::Current, span);
    if times.is_empty() {
        return Err(AnalysisError::NoCrossings);
    }
    let points = times
        .into_iter()
        .map(|t_star| {
            let s = traj.state_at(t_star);
            let (di_dt, dg_dt) = traj.derivative_at(t_star);
            let concavity = if dg_dt.abs() * period <= DEGENERATE_RATE * s.g {
                Concavity::Degenerate
            } else if -dg_dt / di_dt > 0.0 {
                Concavity::Up
            } else {
                Concavity::Down
            };
            PinchPoint {
                t_star,
                g_at: s.g,
                slope: 1.0 / s.g,
                concavity,
                voltage_at: s.voltage(),
                di_dt_at: di_dt,
                dg_dt_at: dg_dt,
            }
        })
        .collect();
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ArcState;
    use std::f64::consts::PI;

    #[test]
    fn memoryless_resistor_has_degenerate_pinch() {
        let (g0, f) = (0.4, 50.0);
        let w = 2.0 * PI * f;
        let traj = Trajectory::from_fn(0.0, 1.0 / f, 500, |t| {
            (ArcState::new(3.0 * (w * t).sin(), g0), (3.0 * w * (w * t).cos(), 0.0))
        });
        let pts = pinch_points(&traj).unwrap();
        assert_eq!(pts.len(), 1, "the zero at t = 0 sits on the span edge");
        assert!((pts[0].slope - 1.0 / g0).abs() < 1e-15);
        assert_eq!(pts[0].concavity, Concavity::Degenerate);
    }

    #[test]
    fn decaying_conductance_gives_alternating_concavity() {
        // g relaxing downwards at both crossings, current slopes of opposite sign
        let f = 50.0;
        let w = 2.0 * PI * f;
        let traj = Trajectory::from_fn(0.1 / f, 1.1 / f, 800, |t| {
            let g = 1.0 + 0.5 * (2.0 * w * t).sin();
            let dg = w * (2.0 * w * t).cos();
            (ArcState::new((w * t).sin(), g), (w * (w * t).cos(), dg))
        });
        let pts = pinch_points(&traj).unwrap();
        assert_eq!(pts.len(), 2);
        assert_ne!(pts[0].concavity, pts[1].concavity);
        assert!(pts.iter().all(|p| p.concavity != Concavity::Degenerate));
        assert!((pts[0].slope - pts[1].slope).abs() < 1e-9);
    }

    #[test]
    fn no_crossings() {
        let traj = Trajectory::from_fn(0.0, 1.0, 10, |_| (ArcState::new(2.0, 1.0), (0.0, 0.0)));
        assert_eq!(pinch_points(&traj), Err(AnalysisError::NoCrossings));
    }
}
