//! Command-line flags and their conversion into library types.

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use si2d_core::potentials::{preset, AngularPotential, PresetName, PresetParams, RadialFamily, RadialPotential};
use si2d_core::{Curvature, Rational};

use crate::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "si2d",
    version,
    about = "Superintegrable separable systems on 2D constant-curvature spaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Radial periods over a list of energies at fixed A.
    Periods(PeriodsArgs),
    /// Integrate one orbit and look for its closure.
    Orbit(OrbitArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
    /// Tabulate V(r), U(phi) or the effective potential W(rho).
    Potential(PotentialArgs),
    /// Radial and angular actions with closed-form comparison.
    Actions(ActionsArgs),
    /// Reconstruct an angular well from a family period law.
    Abel(AbelArgs),
    /// Superintegrability verdict.
    Classify(ClassifyArgs),
    /// Central-potential report: closure ratio q and one closed orbit.
    Bertrand(BertrandArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FamilyArg {
    Oscillator,
    Kepler,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum AngularArg {
    PoschlTeller,
    Free,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// Radial family and curvature.
#[derive(Args, Debug, Clone, Serialize)]
pub struct RadialArgs {
    /// Gaussian curvature of the configuration space.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub k: f64,
    /// Named model (ttw, pw, higgs, schroedinger_coulomb, flat_oscillator, flat_kepler).
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[serde(rename = "B")]
    #[arg(long = "B", allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[serde(rename = "D")]
    #[arg(long = "D", allow_hyphen_values = true)]
    pub d: Option<f64>,
    #[serde(rename = "F")]
    #[arg(long = "F", allow_hyphen_values = true)]
    pub f: Option<f64>,
}

/// Angular potential; ignored when a preset is given.
#[derive(Args, Debug, Clone, Default, Serialize)]
pub struct AngularArgs {
    #[arg(long, value_enum)]
    pub angular: Option<AngularArg>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Angular index; a rational such as 2 or 3/2.
    #[arg(long)]
    pub n: Option<String>,
    /// Length of the free angular domain.
    #[arg(long = "delta-phi")]
    pub delta_phi: Option<f64>,
    /// Period ratio used for closed forms when no preset fixes it.
    #[arg(long)]
    pub q: Option<String>,
}

/// A fully resolved system.
pub struct System {
    pub radial: RadialPotential,
    pub angular: AngularPotential,
    pub q: Option<Rational>,
}

pub fn parse_rational(field: &str, text: &str) -> Result<Rational, CliError> {
    text.parse().map_err(|e| CliError::Usage(format!("--{field}: {e}")))
}

fn require_finite(field: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Usage(format!("--{field} must be finite, got {x}")))
    }
}

impl RadialArgs {
    pub fn curvature(&self) -> Result<Curvature, CliError> {
        Ok(Curvature::new(require_finite("k", self.k)?)?)
    }

    pub fn preset_name(&self) -> Result<Option<PresetName>, CliError> {
        self.preset
            .as_deref()
            .map(str::parse)
            .transpose()
            .map_err(CliError::from)
    }

    pub fn family(&self) -> Result<RadialFamily, CliError> {
        let family = self
            .family
            .ok_or_else(|| CliError::Usage("either --preset or --family is required".into()))?;
        let get = |name: &str, v: Option<f64>, default: f64| require_finite(name, v.unwrap_or(default));
        Ok(match family {
            FamilyArg::Oscillator => {
                RadialFamily::oscillator(get("gamma", self.gamma, 0.0)?, get("delta", self.delta, 0.5)?)?
            }
            FamilyArg::Kepler => {
                RadialFamily::kepler(get("B", self.b, 0.0)?, get("D", self.d, 1.0)?, get("F", self.f, 0.0)?)?
            }
        })
    }

    pub fn radial(&self, angular: &AngularArgs) -> Result<RadialPotential, CliError> {
        Ok(self.system(angular)?.radial)
    }

    pub fn system(&self, angular: &AngularArgs) -> Result<System, CliError> {
        let k = self.curvature()?;
        if let Some(name) = self.preset_name()? {
            let defaults = PresetParams::default();
            let params = PresetParams {
                delta: require_finite("delta", self.delta.unwrap_or(defaults.delta))?,
                d: require_finite("D", self.d.unwrap_or(defaults.d))?,
                alpha: require_finite("alpha", angular.alpha.unwrap_or(defaults.alpha))?,
                beta: require_finite("beta", angular.beta.unwrap_or(defaults.beta))?,
                n: match &angular.n {
                    Some(text) => parse_rational("n", text)?,
                    None => defaults.n,
                },
            };
            let p = preset(name, k, &params)?;
            return Ok(System {
                radial: p.radial,
                angular: p.angular,
                q: Some(p.q),
            });
        }
        let radial = RadialPotential::new(self.family()?, k)?;
        let q = angular.q.as_deref().map(|t| parse_rational("q", t)).transpose()?;
        Ok(System {
            radial,
            angular: angular.potential()?,
            q,
        })
    }
}

impl AngularArgs {
    pub fn potential(&self) -> Result<AngularPotential, CliError> {
        let kind = self.angular.unwrap_or(if self.alpha.is_some() || self.beta.is_some() {
            AngularArg::PoschlTeller
        } else {
            AngularArg::Free
        });
        Ok(match kind {
            AngularArg::Free => AngularPotential::free(require_finite("delta-phi", self.delta_phi.unwrap_or(PI))?)?,
            AngularArg::PoschlTeller => {
                let n = match &self.n {
                    Some(text) => parse_rational("n", text)?.to_f64(),
                    None => 1.0,
                };
                AngularPotential::poschl_teller(
                    require_finite("alpha", self.alpha.unwrap_or(1.0))?,
                    require_finite("beta", self.beta.unwrap_or(1.0))?,
                    n,
                )?
            }
        })
    }
}

#[derive(Args, Debug, Serialize)]
pub struct PeriodsArgs {
    #[command(flatten)]
    pub radial: RadialArgs,
    #[command(flatten)]
    pub angular: AngularArgs,
    #[serde(rename = "A")]
    #[arg(long = "A", allow_hyphen_values = true)]
    pub a: f64,
    /// Comma-separated energies.
    #[serde(rename = "E")]
    #[arg(long = "E", value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub e: Vec<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct OrbitArgs {
    #[command(flatten)]
    pub radial: RadialArgs,
    #[command(flatten)]
    pub angular: AngularArgs,
    #[serde(rename = "A")]
    #[arg(long = "A", allow_hyphen_values = true)]
    pub a: f64,
    #[serde(rename = "E")]
    #[arg(long = "E", allow_hyphen_values = true)]
    pub e: f64,
    #[arg(long = "t-max", default_value_t = 60.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Phase-space tolerance for closure.
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    /// Trajectory CSV path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    /// Run every criterion.
    #[arg(long)]
    pub all: bool,
    /// Run selected criteria by number.
    #[arg(long, value_delimiter = ',')]
    pub criterion: Vec<u8>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Tabulate {
    Radial,
    Angular,
    Effective,
}

#[derive(Args, Debug, Serialize)]
pub struct PotentialArgs {
    #[command(flatten)]
    pub radial: RadialArgs,
    #[command(flatten)]
    pub angular: AngularArgs,
    #[arg(long, value_enum, default_value = "radial")]
    pub what: Tabulate,
    /// Separation constant for the effective potential.
    #[serde(rename = "A")]
    #[arg(long = "A", allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    /// Upper end of the tabulated range when the space is unbounded.
    #[arg(long = "max", default_value_t = 5.0)]
    pub max: f64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ActionsArgs {
    #[command(flatten)]
    pub radial: RadialArgs,
    #[command(flatten)]
    pub angular: AngularArgs,
    #[serde(rename = "A")]
    #[arg(long = "A", allow_hyphen_values = true)]
    pub a: f64,
    #[serde(rename = "E")]
    #[arg(long = "E", value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub e: Vec<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BranchArg {
    Constant,
    Ttw,
}

#[derive(Args, Debug, Serialize)]
pub struct AbelArgs {
    #[command(flatten)]
    pub radial: RadialArgs,
    #[command(flatten)]
    pub angular: AngularArgs,
    /// Height of the well bottom.
    #[serde(rename = "U0")]
    #[arg(long = "U0", allow_hyphen_values = true)]
    pub u0: Option<f64>,
    #[arg(long, value_enum)]
    pub branch: Option<BranchArg>,
    /// Constant branch offset.
    #[serde(rename = "G")]
    #[arg(long = "G", allow_hyphen_values = true)]
    pub g: Option<f64>,
    #[arg(long, default_value_t = 512)]
    pub points: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub radial: RadialArgs,
    #[command(flatten)]
    pub angular: AngularArgs,
    /// Comma-separated separation constants.
    #[serde(rename = "A")]
    #[arg(long = "A", value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub a: Vec<f64>,
    /// Comma-separated energies above the bottom of the effective well.
    #[serde(rename = "E")]
    #[arg(long = "E", value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub e: Vec<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct BertrandArgs {
    #[command(flatten)]
    pub radial: RadialArgs,
    #[serde(rename = "A")]
    #[arg(long = "A", default_value_t = 1.0)]
    pub a: f64,
    /// Energy above the bottom of the effective well.
    #[serde(rename = "E")]
    #[arg(long = "E", default_value_t = 0.5)]
    pub e: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
}
