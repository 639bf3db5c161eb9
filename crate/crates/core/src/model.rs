//! Hybrid Cassie–Mayr arc conductance and the series RL drive circuit.
//!
//! Everything here is a pure function of its inputs. The arc voltage is never
//! stored: it is always derived as `u = i / g` at evaluation time.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("non-positive conductance g = {g:e} at t = {t:e}")]
    NonPositiveConductance { t: f64, g: f64 },
    #[error("closed form requires a constant time constant")]
    UnsupportedThetaLaw,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Relaxation time law of the arc conductance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaLaw {
    Constant {
        theta: f64,
    },
    /// `theta0 + theta1 * exp(-alpha |i|)`.
    CurrentDependent {
        theta0: f64,
        theta1: f64,
        alpha: f64,
    },
}

/// Weighting between the Mayr (small current) and Cassie (large current) branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaLaw {
    /// `exp(-i^2 / I0^2)`
    Gaussian,
    /// `exp(-(|i| / I0)^a)`
    PowerExp { a: f64 },
    /// `exp(-(|i| / I0)^(a / (delta + |i|)))`. Non-increasing only while
    /// `ln(|i|/I0) < 1 + delta/|i|`; beyond that it rises back towards `e^-1`.
    ShieldedExp { a: f64, delta: f64 },
    /// `1 / (1 + exp(beta (|i| - I0)))`
    Logistic { beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcParameters {
    /// Residual conductance with no arc (S).
    pub g_min: f64,
    /// Mayr/Cassie transition current (A).
    pub i0: f64,
    /// Radiation loss coefficient (Ω).
    pub k: f64,
    /// Cassie voltage constant (V).
    pub u_c: f64,
    /// Mayr power constant (W).
    pub p_m: f64,
    pub theta_law: ThetaLaw,
    pub sigma_law: SigmaLaw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParameters {
    /// Series resistance (Ω).
    pub r: f64,
    /// Series inductance (H).
    pub l: f64,
    /// Source amplitude (V).
    pub e_m: f64,
    /// Source frequency (Hz).
    pub f: f64,
}

/// Integrated state of the arc circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcState {
    pub i: f64,
    pub g: f64,
}

impl ArcState {
    pub fn new(i: f64, g: f64) -> Self {
        Self { i, g }
    }

    /// Arc voltage `u = i / g`.
    pub fn voltage(&self) -> f64 {
        self.i / self.g
    }
}

fn positive(name: &str, v: f64) -> Result<(), ModelError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter(format!("{name} must be > 0, got {v}")))
    }
}

impl ThetaLaw {
    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            ThetaLaw::Constant { theta } => positive("theta", theta),
            ThetaLaw::CurrentDependent { theta0, theta1, alpha } => {
                positive("theta0", theta0)?;
                positive("theta1", theta1)?;
                positive("alpha", alpha)?;
                if theta0 < theta1 {
                    Ok(())
                } else {
                    Err(ModelError::InvalidParameter(format!(
                        "theta0 must be < theta1, got {theta0} >= {theta1}"
                    )))
                }
            }
        }
    }
}

impl SigmaLaw {
    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            SigmaLaw::Gaussian => Ok(()),
            SigmaLaw::PowerExp { a } => positive("sigma a", a),
            SigmaLaw::ShieldedExp { a, delta } => {
                positive("sigma a", a)?;
                positive("sigma delta", delta)
            }
            SigmaLaw::Logistic { beta } => positive("sigma beta", beta),
        }
    }
}

impl ArcParameters {
    pub fn validate(&self) -> Result<(), ModelError> {
        positive("g_min", self.g_min)?;
        positive("i0", self.i0)?;
        positive("u_c", self.u_c)?;
        positive("p_m", self.p_m)?;
        if !(self.k.is_finite() && self.k >= 0.0) {
            return Err(ModelError::InvalidParameter(format!("k must be >= 0, got {}", self.k)));
        }
        self.theta_law.validate()?;
        self.sigma_law.validate()
    }
}

impl CircuitParameters {
    pub fn validate(&self) -> Result<(), ModelError> {
        positive("r", self.r)?;
        positive("l", self.l)?;
        positive("e_m", self.e_m)?;
        positive("f", self.f)
    }

    pub fn period(&self) -> f64 {
        1.0 / self.f
    }

    pub fn angular_frequency(&self) -> f64 {
        2.0 * PI * self.f
    }

    /// Source voltage `E(t) = E_m sin(2π f t)`.
    pub fn source(&self, t: f64) -> f64 {
        self.e_m * (self.angular_frequency() * t).sin()
    }

    pub fn with_frequency(mut self, f: f64) -> Self {
        self.f = f;
        self
    }
}

/// Mayr/Cassie weight σ(i), in (0, 1].
pub fn sigma(law: SigmaLaw, i0: f64, i: f64) -> f64 {
    let x = i.abs();
    match law {
        SigmaLaw::Gaussian => (-(x * x) / (i0 * i0)).exp(),
        SigmaLaw::PowerExp { a } => (-(x / i0).powf(a)).exp(),
        SigmaLaw::ShieldedExp { a, delta } => (-(x / i0).powf(a / (delta + x))).exp(),
        SigmaLaw::Logistic { beta } => 1.0 / (1.0 + (beta * (x - i0)).exp()),
    }
}

/// Conductance relaxation time θ(i).
pub fn theta(law: ThetaLaw, i: f64) -> f64 {
    match law {
        ThetaLaw::Constant { theta } => theta,
        ThetaLaw::CurrentDependent { theta0, theta1, alpha } => theta0 + theta1 * (-alpha * i.abs()).exp(),
    }
}

/// Mayr fixed point `G_min + i²/P_M`.
pub fn mayr_target(arc: &ArcParameters, i: f64) -> f64 {
    arc.g_min + i * i / arc.p_m
}

/// Cassie fixed point `G_min + (u i − K i²)/U_C²`.
pub fn cassie_target(arc: &ArcParameters, i: f64, u: f64) -> f64 {
    arc.g_min + (u * i - arc.k * i * i) / (arc.u_c * arc.u_c)
}

/// The conductance the hybrid arc relaxes towards at the instantaneous (i, u).
pub fn target_conductance(arc: &ArcParameters, i: f64, u: f64) -> f64 {
    if i == 0.0 {
        return arc.g_min;
    }
    let s = sigma(arc.sigma_law, arc.i0, i);
    let cassie = (u * i - arc.k * i * i) / (arc.u_c * arc.u_c);
    let mayr = i * i / arc.p_m;
    arc.g_min + (1.0 - s) * cassie + s * mayr
}

/// Pure Mayr conductance rate `(G_min + i²/P_M − g)/θ(i)`.
pub fn mayr_rhs(arc: &ArcParameters, i: f64, g: f64) -> f64 {
    (mayr_target(arc, i) - g) / theta(arc.theta_law, i)
}

/// Pure Cassie conductance rate `(G_min + (u i − K i²)/U_C² − g)/θ(i)`.
pub fn cassie_rhs(arc: &ArcParameters, i: f64, u: f64, g: f64) -> f64 {
    (cassie_target(arc, i, u) - g) / theta(arc.theta_law, i)
}

/// Conductance dynamics driven in the RL circuit.
///
/// Implemented by the hybrid arc and by reference elements used as controls.
pub trait ConductanceModel: Sync {
    /// `dg/dt` at current `i` and conductance `g > 0`.
    fn conductance_rate(&self, i: f64, g: f64) -> f64;

    /// Lower bound the conductance is expected to respect.
    fn conductance_floor(&self) -> f64 {
        0.0
    }
}

impl ConductanceModel for ArcParameters {
    fn conductance_rate(&self, i: f64, g: f64) -> f64 {
        (target_conductance(self, i, i / g) - g) / theta(self.theta_law, i)
    }

    fn conductance_floor(&self) -> f64 {
        self.g_min
    }
}

/// Memoryless resistor with conductance `g`, the degenerate control case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedConductance(pub f64);

impl ConductanceModel for FixedConductance {
    fn conductance_rate(&self, _i: f64, _g: f64) -> f64 {
        0.0
    }
}

/// Right-hand side of the circuit equation coupled to any conductance model.
pub fn circuit_rhs<M: ConductanceModel + ?Sized>(
    model: &M,
    circuit: &CircuitParameters,
    t: f64,
    s: ArcState,
) -> Result<(f64, f64), ModelError> {
    if !(s.g > 0.0) {
        return Err(ModelError::NonPositiveConductance { t, g: s.g });
    }
    let u = s.i / s.g;
    let di_dt = (circuit.source(t) - circuit.r * s.i - u) / circuit.l;
    let dg_dt = model.conductance_rate(s.i, s.g);
    Ok((di_dt, dg_dt))
}

/// `(di/dt, dg/dt)` of the hybrid arc in the RL circuit.
pub fn arc_rhs(
    arc: &ArcParameters,
    circuit: &CircuitParameters,
    t: f64,
    s: ArcState,
) -> Result<(f64, f64), ModelError> {
    circuit_rhs(arc, circuit, t, s)
}

/// Periodic steady-state Mayr conductance under the current drive
/// `i(t) = i_m sin(2π f t)` with constant θ.
///
/// The particular solution is `G_min + i_m²/(2 P_M) (1 − cos(4π f t − φ)/√(1 + (4π f θ)²))`
/// with `φ = atan(4π f θ)`.
pub fn mayr_sinusoidal_g(arc: &ArcParameters, i_m: f64, f: f64, t: f64) -> Result<f64, ModelError> {
    let th = match arc.theta_law {
        ThetaLaw::Constant { theta } => theta,
        ThetaLaw::CurrentDependent { .. } => return Err(ModelError::UnsupportedThetaLaw),
    };
    let x = 4.0 * PI * f * th;
    let phi = x.atan();
    let mean = i_m * i_m / (2.0 * arc.p_m);
    Ok(arc.g_min + mean * (1.0 - (4.0 * PI * f * t - phi).cos() / (1.0 + x * x).sqrt()))
}

/// High-frequency limit of the Mayr conductance, `G_min + i_m²/(2 P_M)`.
pub fn hf_limit_conductance(arc: &ArcParameters, i_m: f64) -> f64 {
    arc.g_min + i_m * i_m / (2.0 * arc.p_m)
}
