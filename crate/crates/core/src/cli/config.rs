//! JSON experiment configuration. The accepted shape is documented in
//! `schema/config.schema.json`; unknown fields are rejected.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;

use crate::dynamics::TwoQubitState;
use crate::echo::EchoParams;
use crate::error::{Error, Result};
use crate::geometry::{
    CollinearStatic, RotatingApproach, SampledTrajectory, StateConfiguration, Trajectory, Vec3,
};
use crate::numerics::QuadratureSpec;
use crate::potentials::Potential;

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Constant {
        value: f64,
    },
    PowerLaw {
        coupling: f64,
        exponent: f64,
    },
    /// Keys are the inverse-power orders as strings, e.g. `{"1": 1.0}`.
    Laurent {
        coefficients: BTreeMap<String, f64>,
    },
}

impl PotentialConfig {
    pub fn build(&self) -> Result<Potential> {
        match self {
            Self::Constant { value } => Potential::constant(*value),
            Self::PowerLaw { coupling, exponent } => Potential::power_law(*coupling, *exponent),
            Self::Laurent { coefficients } => {
                let terms = coefficients
                    .iter()
                    .map(|(n, &c)| {
                        n.trim().parse::<u32>().map(|n| (n, c)).map_err(|_| {
                            Error::InvalidPotential(format!("term order {n:?} is not an integer"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Potential::laurent(terms)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigurationConfig {
    pub a1: Vec3,
    pub a2: Vec3,
    pub b1: Vec3,
    pub b2: Vec3,
}

impl ConfigurationConfig {
    pub fn build(&self) -> Result<StateConfiguration> {
        StateConfiguration::new(self.a1, self.a2, self.b1, self.b2)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub t: f64,
    pub a1: Vec3,
    pub a2: Vec3,
    pub b1: Vec3,
    pub b2: Vec3,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectoryConfig {
    Static {
        a1: Vec3,
        a2: Vec3,
        b1: Vec3,
        b2: Vec3,
    },
    CollinearStatic {
        x: f64,
        dx: f64,
    },
    RotatingApproach {
        separation: f64,
        speed: f64,
        angular_velocity: f64,
        state_separation: f64,
    },
    /// Either inline `samples` or a `csv` file, resolved relative to the
    /// config file.
    Sampled {
        #[serde(default)]
        samples: Option<Vec<SampleConfig>>,
        #[serde(default)]
        csv: Option<PathBuf>,
    },
}

impl TrajectoryConfig {
    pub fn build(&self, base_dir: &Path) -> std::result::Result<Trajectory, String> {
        let built = match self {
            Self::Static { a1, a2, b1, b2 } => {
                StateConfiguration::new(*a1, *a2, *b1, *b2).map(Trajectory::Static)
            }
            Self::CollinearStatic { x, dx } => {
                CollinearStatic::new(*x, *dx).map(Trajectory::CollinearStatic)
            }
            Self::RotatingApproach {
                separation,
                speed,
                angular_velocity,
                state_separation,
            } => RotatingApproach::new(*separation, *speed, *angular_velocity, *state_separation)
                .map(Trajectory::RotatingApproach),
            Self::Sampled { samples, csv } => match (samples, csv) {
                (Some(samples), None) => samples
                    .iter()
                    .map(|s| Ok((s.t, StateConfiguration::new(s.a1, s.a2, s.b1, s.b2)?)))
                    .collect::<Result<Vec<_>>>()
                    .and_then(SampledTrajectory::new)
                    .map(Trajectory::Sampled),
                (None, Some(path)) => {
                    let path = base_dir.join(path);
                    let file = fs::File::open(&path)
                        .map_err(|e| format!("cannot open {}: {e}", path.display()))?;
                    SampledTrajectory::from_csv(file).map(Trajectory::Sampled)
                }
                _ => {
                    return Err("sampled trajectory needs exactly one of `samples` or `csv`".into())
                }
            },
        };
        built.map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_subdivisions: Option<usize>,
}

impl QuadratureConfig {
    pub fn build(&self) -> Result<QuadratureSpec> {
        let d = QuadratureSpec::default();
        QuadratureSpec::new(
            self.abs_tol.unwrap_or(d.abs_tol),
            self.rel_tol.unwrap_or(d.rel_tol),
            self.max_subdivisions.unwrap_or(d.max_subdivisions),
        )
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Geometric,
}

/// A list of values, or `count` values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridConfig {
    List(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        count: usize,
        #[serde(default)]
        spacing: Spacing,
    },
}

impl GridConfig {
    pub fn values(&self) -> std::result::Result<Vec<f64>, String> {
        let values = match self {
            Self::List(v) => v.clone(),
            Self::Range {
                start,
                stop,
                count,
                spacing,
            } => {
                if *count == 0 {
                    return Err("grid count must be positive".into());
                }
                if *count == 1 {
                    vec![*start]
                } else {
                    let last = (*count - 1) as f64;
                    match spacing {
                        Spacing::Linear => (0..*count)
                            .map(|i| start + (stop - start) * i as f64 / last)
                            .collect(),
                        Spacing::Geometric => {
                            if !(*start > 0.0 && *stop > 0.0) {
                                return Err("geometric grids need positive end points".into());
                            }
                            let ratio = stop / start;
                            (0..*count)
                                .map(|i| start * ratio.powf(i as f64 / last))
                                .collect()
                        }
                    }
                }
            }
        };
        if values.is_empty() {
            return Err("grid must not be empty".into());
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err("grid values must be finite".into());
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub potential: PotentialConfig,
    pub trajectory: TrajectoryConfig,
    pub times: GridConfig,
    /// Four `[re, im]` amplitudes; defaults to the symmetric product state.
    #[serde(default)]
    pub initial_state: Option<[[f64; 2]; 4]>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl EvolveConfig {
    pub fn initial_state(&self) -> Result<TwoQubitState> {
        match self.initial_state {
            None => Ok(TwoQubitState::symmetric_product()),
            Some(amps) => TwoQubitState::new(amps.map(|[re, im]| Complex64::new(re, im))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintConfig {
    pub potential: PotentialConfig,
    pub configuration: ConfigurationConfig,
    /// `|h|` at or below this counts as satisfying the constraint.
    #[serde(default = "default_constraint_tolerance")]
    pub tolerance: f64,
    /// Finite-difference step; defaults to `1e-6` times the smallest distance.
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_constraint_tolerance() -> f64 {
    1e-10
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EchoConfig {
    pub separation: f64,
    pub state_separation: f64,
    #[serde(default = "one_u32")]
    pub leading_term: u32,
    #[serde(default = "two_u32")]
    pub probe_term: u32,
    #[serde(default = "one_f64")]
    pub leading_coefficient: f64,
    #[serde(default = "one_f64")]
    pub probe_coefficient: f64,
}

fn one_u32() -> u32 {
    1
}
fn two_u32() -> u32 {
    2
}
fn one_f64() -> f64 {
    1.0
}

impl EchoConfig {
    /// Template with the motion left at zero; the sweep fills it in.
    pub fn template(&self) -> EchoParams {
        EchoParams::new(self.separation, 0.0, 0.0, self.state_separation).with_terms(
            (self.leading_term, self.leading_coefficient),
            (self.probe_term, self.probe_coefficient),
        )
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub echo: EchoConfig,
    pub v_grid: GridConfig,
    pub omega_grid: GridConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub output: Option<PathBuf>,
}
