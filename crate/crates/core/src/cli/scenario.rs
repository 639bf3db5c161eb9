//! Scenario files and built-in presets.
//!
//! A scenario file is flat UTF-8 text with one `section.key = value` per line.
//! `#` starts a comment. An optional top-level `preset = NAME` line selects the
//! preset the remaining keys override (default `fig1`). Unknown keys are errors.
//!
//! ```text
//! preset = fig3
//! circuit.f = 5000
//! sweep.axis = k
//! sweep.values = 0, 0.5, 1
//! ```

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analysis::{RunSettings, SweepAxis};
use crate::integrator::{IntegratorConfig, SettleConfig};
use crate::model::{ArcParameters, ArcState, CircuitParameters, SigmaLaw, ThetaLaw};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub directory: PathBuf,
    pub formats: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub arc: ArcParameters,
    pub circuit: CircuitParameters,
    pub integrator: IntegratorConfig,
    pub settle: SettleConfig,
    pub initial_state: ArcState,
    pub sweep: Option<Sweep>,
    pub output: OutputSpec,
}

pub const PRESETS: [&str; 7] = ["fig1", "fig2a", "fig3", "fig4a", "fig4b", "fig4c", "table1"];

fn fig1_arc() -> ArcParameters {
    ArcParameters {
        g_min: 1e-8,
        i0: 4.8,
        k: 0.1,
        u_c: 30.0,
        p_m: 20.0,
        theta_law: ThetaLaw::Constant { theta: 4e-4 },
        sigma_law: SigmaLaw::Gaussian,
    }
}

fn fig1_circuit() -> CircuitParameters {
    CircuitParameters {
        r: 0.2,
        l: 1e-3,
        e_m: 75.0,
        f: 50.0,
    }
}

impl Scenario {
    fn base(name: &str) -> Self {
        let circuit = fig1_circuit();
        Scenario {
            name: name.to_string(),
            arc: fig1_arc(),
            circuit,
            integrator: IntegratorConfig::for_period(circuit.period()),
            settle: SettleConfig::default(),
            initial_state: ArcState::new(0.0, 1.0),
            sweep: None,
            output: OutputSpec {
                directory: PathBuf::from("out"),
                formats: vec!["csv".into(), "txt".into()],
            },
        }
    }

    fn with_sweep(mut self, axis: SweepAxis, values: &[f64]) -> Self {
        self.sweep = Some(Sweep {
            axis,
            values: values.to_vec(),
        });
        self
    }

    /// Fig. 3 arc, driven at the lowest frequency of its sweep.
    fn with_fig3_arc(mut self, f: f64) -> Self {
        self.arc.theta_law = ThetaLaw::Constant { theta: 2e-4 };
        self.arc.k = 0.5;
        self.circuit.f = f;
        self.integrator = IntegratorConfig::for_period(self.circuit.period());
        self
    }

    /// Built-in parameter sets of the published figures.
    pub fn preset(name: &str) -> Result<Self, ScenarioError> {
        let s = Self::base(name);
        Ok(match name {
            "fig1" => s.with_sweep(SweepAxis::F, &[50.0, 400.0, 3e3, 5e3, 7e3, 9e3]),
            // Only I0 = 16.8 is named for this figure; the rest bracket the Fig. 1 value.
            "fig2a" => s.with_sweep(SweepAxis::I0, &[1.2, 2.4, 4.8, 9.6, 16.8]),
            "fig3" => s
                .with_fig3_arc(400.0)
                .with_sweep(SweepAxis::F, &[400.0, 3e3, 5e3, 7e3, 9e3, 11e3]),
            "fig4a" => s.with_sweep(SweepAxis::K, &[0.0, 0.3, 1.0, 2.0, 5.0]),
            // The printed list has 5·10^4 as its third entry; 5·10^-4 fits the sequence.
            "fig4b" => s.with_sweep(SweepAxis::L, &[5e-5, 1e-4, 5e-4, 1e-3, 5e-3]),
            "fig4c" => s.with_sweep(SweepAxis::UC, &[1.0, 5.0, 10.0, 25.0, 50.0]),
            "table1" => s
                .with_fig3_arc(3e3)
                .with_sweep(SweepAxis::F, &[3e3, 5e3, 7e3, 9e3, 11e3]),
            other => return Err(ScenarioError::UnknownPreset(other.to_string())),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut entries = Vec::new();
        let mut preset = None;
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ScenarioError::Parse {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key == "preset" {
                if preset.is_some() {
                    return Err(ScenarioError::Parse {
                        line,
                        message: "preset given twice".into(),
                    });
                }
                preset = Some((line, value.to_string()));
            } else {
                entries.push((line, key.to_string(), value.to_string()));
            }
        }

        let mut s = match &preset {
            Some((line, name)) => Self::preset(name).map_err(|e| ScenarioError::Parse {
                line: *line,
                message: e.to_string(),
            })?,
            None => Self::preset("fig1")?,
        };
        let mut theta = ThetaOverrides::default();
        let mut sigma = SigmaOverrides::default();
        let mut sweep_axis = s.sweep.as_ref().map(|sw| sw.axis);
        let mut sweep_values = s.sweep.as_ref().map(|sw| sw.values.clone());
        let mut max_step_set = false;

        for (line, key, value) in &entries {
            let line = *line;
            let num = || parse_f64(line, value);
            let count = || {
                value.parse::<usize>().map_err(|_| ScenarioError::Parse {
                    line,
                    message: format!("`{value}` is not a count"),
                })
            };
            match key.as_str() {
                "arc.g_min" => s.arc.g_min = num()?,
                "arc.i0" => s.arc.i0 = num()?,
                "arc.k" => s.arc.k = num()?,
                "arc.u_c" => s.arc.u_c = num()?,
                "arc.p_m" => s.arc.p_m = num()?,
                "arc.theta" => theta.constant = Some(num()?),
                "arc.theta0" => theta.theta0 = Some(num()?),
                "arc.theta1" => theta.theta1 = Some(num()?),
                "arc.alpha" => theta.alpha = Some(num()?),
                "arc.sigma" => sigma.kind = Some((line, value.to_ascii_lowercase())),
                "arc.sigma_a" => sigma.a = Some(num()?),
                "arc.sigma_delta" => sigma.delta = Some(num()?),
                "arc.sigma_beta" => sigma.beta = Some(num()?),
                "circuit.r" => s.circuit.r = num()?,
                "circuit.l" => s.circuit.l = num()?,
                "circuit.e_m" => s.circuit.e_m = num()?,
                "circuit.f" => s.circuit.f = num()?,
                "integrator.abs_tol" => s.integrator.abs_tol = num()?,
                "integrator.rel_tol" => s.integrator.rel_tol = num()?,
                "integrator.max_step" => {
                    s.integrator.max_step = num()?;
                    max_step_set = true;
                }
                "integrator.initial_step" => s.integrator.initial_step = num()?,
                "integrator.max_steps" => s.integrator.max_steps = count()?,
                "settle.tol" => s.settle.tol = num()?,
                "settle.min_periods" => s.settle.min_periods = count()?,
                "settle.max_periods" => s.settle.max_periods = count()?,
                "initial.i" => s.initial_state.i = num()?,
                "initial.g" => s.initial_state.g = num()?,
                "sweep.axis" => {
                    sweep_axis = Some(SweepAxis::parse(value).ok_or_else(|| ScenarioError::Parse {
                        line,
                        message: format!("unknown sweep axis `{value}`"),
                    })?)
                }
                "sweep.values" => {
                    let vals = value
                        .split(',')
                        .map(|v| parse_f64(line, v.trim()))
                        .collect::<Result<Vec<_>, _>>()?;
                    sweep_values = Some(vals);
                }
                "output.directory" => s.output.directory = PathBuf::from(value),
                "output.formats" => {
                    s.output.formats = value.split(',').map(|v| v.trim().to_ascii_lowercase()).collect();
                }
                other => {
                    return Err(ScenarioError::Parse {
                        line,
                        message: format!("unknown key `{other}`"),
                    })
                }
            }
        }

        if let Some(law) = theta.resolve()? {
            s.arc.theta_law = law;
        }
        if let Some(law) = sigma.resolve()? {
            s.arc.sigma_law = law;
        }
        if !max_step_set {
            s.integrator.max_step = s.circuit.period() / 200.0;
            s.integrator.initial_step = s.integrator.initial_step.min(s.integrator.max_step);
        }
        s.sweep = match (sweep_axis, sweep_values) {
            (Some(axis), Some(values)) => Some(Sweep { axis, values }),
            (None, None) => None,
            _ => {
                return Err(ScenarioError::Validation(
                    "sweep.axis and sweep.values must be given together".into(),
                ))
            }
        };
        if preset.is_none() {
            s.name = "custom".into();
        }
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let v = |e: String| ScenarioError::Validation(e);
        self.arc.validate().map_err(|e| v(e.to_string()))?;
        self.circuit.validate().map_err(|e| v(e.to_string()))?;
        self.integrator.validate().map_err(|e| v(e.to_string()))?;
        if !(self.settle.tol > 0.0) || self.settle.min_periods < 1 || self.settle.max_periods < self.settle.min_periods
        {
            return Err(v(format!("settle: {:?}", self.settle)));
        }
        if !(self.initial_state.g > 0.0) {
            return Err(v(format!("initial.g must be > 0, got {}", self.initial_state.g)));
        }
        if let Some(sw) = &self.sweep {
            if sw.values.is_empty() {
                return Err(v("sweep.values is empty".into()));
            }
            for &x in &sw.values {
                sw.axis.validate(x).map_err(|e| v(e.to_string()))?;
            }
        }
        for f in &self.output.formats {
            if f != "csv" && f != "txt" {
                return Err(v(format!("unsupported output format `{f}`")));
            }
        }
        Ok(())
    }

    pub fn run_settings(&self) -> RunSettings {
        RunSettings {
            integrator: self.integrator,
            settle: self.settle,
            initial_state: self.initial_state,
        }
    }
}

fn parse_f64(line: usize, value: &str) -> Result<f64, ScenarioError> {
    value
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| ScenarioError::Parse {
            line,
            message: format!("`{value}` is not a finite number"),
        })
}

#[derive(Default)]
struct ThetaOverrides {
    constant: Option<f64>,
    theta0: Option<f64>,
    theta1: Option<f64>,
    alpha: Option<f64>,
}

impl ThetaOverrides {
    fn resolve(&self) -> Result<Option<ThetaLaw>, ScenarioError> {
        match (self.constant, self.theta0, self.theta1, self.alpha) {
            (None, None, None, None) => Ok(None),
            (Some(theta), None, None, None) => Ok(Some(ThetaLaw::Constant { theta })),
            (None, Some(theta0), Some(theta1), Some(alpha)) => {
                Ok(Some(ThetaLaw::CurrentDependent { theta0, theta1, alpha }))
            }
            _ => Err(ScenarioError::Validation(
                "give either arc.theta or all of arc.theta0, arc.theta1, arc.alpha".into(),
            )),
        }
    }
}

#[derive(Default)]
struct SigmaOverrides {
    kind: Option<(usize, String)>,
    a: Option<f64>,
    delta: Option<f64>,
    beta: Option<f64>,
}

impl SigmaOverrides {
    fn resolve(&self) -> Result<Option<SigmaLaw>, ScenarioError> {
        let Some((line, kind)) = &self.kind else {
            if self.a.is_some() || self.delta.is_some() || self.beta.is_some() {
                return Err(ScenarioError::Validation(
                    "sigma parameters given without arc.sigma".into(),
                ));
            }
            return Ok(None);
        };
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| ScenarioError::Validation(format!("arc.sigma = {kind} requires arc.{name}")))
        };
        let law = match kind.as_str() {
            "gaussian" => SigmaLaw::Gaussian,
            "power_exp" => SigmaLaw::PowerExp {
                a: need(self.a, "sigma_a")?,
            },
            "shielded_exp" => SigmaLaw::ShieldedExp {
                a: need(self.a, "sigma_a")?,
                delta: need(self.delta, "sigma_delta")?,
            },
            "logistic" => SigmaLaw::Logistic {
                beta: need(self.beta, "sigma_beta")?,
            },
            other => {
                return Err(ScenarioError::Parse {
                    line: *line,
                    message: format!("unknown sigma law `{other}`"),
                })
            }
        };
        Ok(Some(law))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig1_preset_matches_caption() {
        let s = Scenario::preset("fig1").unwrap();
        assert_eq!(s.arc.theta_law, ThetaLaw::Constant { theta: 4e-4 });
        assert_eq!(s.arc.g_min, 1e-8);
        assert_eq!(s.arc.i0, 4.8);
        assert_eq!(s.arc.p_m, 20.0);
        assert_eq!(s.arc.u_c, 30.0);
        assert_eq!(s.arc.k, 0.1);
        assert_eq!(s.arc.sigma_law, SigmaLaw::Gaussian);
        assert_eq!(
            s.circuit,
            CircuitParameters {
                r: 0.2,
                l: 1e-3,
                e_m: 75.0,
                f: 50.0
            }
        );
        assert_eq!(s.integrator.abs_tol, 1e-10);
        assert_eq!(s.integrator.rel_tol, 1e-10);
    }

    #[test]
    fn figure_presets_match_captions() {
        let t = Scenario::preset("table1").unwrap();
        assert_eq!(t.arc.theta_law, ThetaLaw::Constant { theta: 2e-4 });
        assert_eq!(t.arc.k, 0.5);
        assert_eq!(t.arc.i0, 4.8);
        assert_eq!(
            t.sweep,
            Some(Sweep {
                axis: SweepAxis::F,
                values: vec![3e3, 5e3, 7e3, 9e3, 11e3]
            })
        );
        assert_eq!(t.circuit.f, 3e3);
        let f3 = Scenario::preset("fig3").unwrap();
        assert_eq!(f3.arc, t.arc);
        assert_eq!(
            f3.circuit,
            CircuitParameters {
                r: 0.2,
                l: 1e-3,
                e_m: 75.0,
                f: 400.0
            }
        );

        let a = Scenario::preset("fig4a").unwrap();
        assert_eq!(a.sweep.unwrap().values, vec![0.0, 0.3, 1.0, 2.0, 5.0]);
        assert_eq!((a.arc.u_c, a.circuit.l), (30.0, 1e-3));
        let b = Scenario::preset("fig4b").unwrap();
        assert_eq!(b.sweep.unwrap().values, vec![5e-5, 1e-4, 5e-4, 1e-3, 5e-3]);
        assert_eq!((b.arc.u_c, b.arc.k), (30.0, 0.1));
        let c = Scenario::preset("fig4c").unwrap();
        assert_eq!(c.sweep.unwrap().values, vec![1.0, 5.0, 10.0, 25.0, 50.0]);
        assert_eq!((c.arc.k, c.circuit.l), (0.1, 1e-3));
        let i = Scenario::preset("fig2a").unwrap().sweep.unwrap();
        assert_eq!(i.axis, SweepAxis::I0);
        assert!(i.values.contains(&16.8));
        for name in PRESETS {
            Scenario::preset(name).unwrap().validate().unwrap();
        }
        assert!(matches!(Scenario::preset("fig9"), Err(ScenarioError::UnknownPreset(_))));
    }

    #[test]
    fn parses_overrides_and_comments() {
        let s = Scenario::parse(
            "# comment\npreset = fig3\ncircuit.f = 5000 # inline\narc.sigma = logistic\narc.sigma_beta = 2\n\
             sweep.axis = k\nsweep.values = 0, 0.5,1\n",
        )
        .unwrap();
        assert_eq!(s.circuit.f, 5000.0);
        assert_eq!(s.arc.sigma_law, SigmaLaw::Logistic { beta: 2.0 });
        assert_eq!(
            s.sweep,
            Some(Sweep {
                axis: SweepAxis::K,
                values: vec![0.0, 0.5, 1.0]
            })
        );
        assert!((s.integrator.max_step - 1e-6).abs() < 1e-18);

        let s = Scenario::parse("arc.theta0 = 1e-5\narc.theta1 = 4e-4\narc.alpha = 0.2\n").unwrap();
        assert_eq!(
            s.arc.theta_law,
            ThetaLaw::CurrentDependent {
                theta0: 1e-5,
                theta1: 4e-4,
                alpha: 0.2
            }
        );
        assert_eq!(s.name, "custom");
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(
            Scenario::parse("arc.p_m = -1"),
            Err(ScenarioError::Validation(_))
        ));
        assert!(matches!(
            Scenario::parse("\n\narc.bogus = 1"),
            Err(ScenarioError::Parse { line: 3, .. })
        ));
        assert!(matches!(
            Scenario::parse("arc.k 3"),
            Err(ScenarioError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Scenario::parse("arc.k = abc"),
            Err(ScenarioError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Scenario::parse("arc.theta = 1e-4\narc.theta0 = 1e-5"),
            Err(ScenarioError::Validation(_))
        ));
        assert!(matches!(
            Scenario::parse("preset = nope"),
            Err(ScenarioError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Scenario::parse("sweep.axis = l\nsweep.values = 1e-3, 0"),
            Err(ScenarioError::Validation(_))
        ));
        assert!(matches!(
            Scenario::parse("arc.sigma = power_exp"),
            Err(ScenarioError::Validation(_))
        ));
    }
}
