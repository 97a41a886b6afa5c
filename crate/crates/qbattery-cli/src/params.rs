//! Parameter-source resolution shared by every subcommand.

use std::fs;
use std::path::PathBuf;

use clap::Args;

use qbattery::config;
use qbattery::experiments::{AxisSpec, ModelChoice, OutputKind, Spacing};
use qbattery::spectrum::EpVariable;
use qbattery::{Error, Result, SystemParams64};

/// Where the physical parameters come from. Exactly one source applies:
/// a named preset, a config file, or (neither given) the built-in baseline.
/// `--set` overrides are applied on top, in order.
#[derive(Debug, Args)]
pub struct ParamArgs {
    /// Built-in parameter set: `baseline` or `superconducting`.
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,

    /// Parameter file (`key = value` lines, `#` comments).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Override one parameter, e.g. `--set kappa_b=0.03`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl ParamArgs {
    pub fn resolve(&self) -> Result<SystemParams64> {
        let mut p = match (&self.preset, &self.config) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidParam {
                    name: "--preset",
                    message: "cannot combine --preset with --config; pick one parameter source"
                        .into(),
                })
            }
            (Some(name), None) => SystemParams64::preset(name)?,
            (None, Some(path)) => config::system_params_from_str(&fs::read_to_string(path)?)?,
            (None, None) => SystemParams64::baseline(),
        };
        for item in &self.set {
            let (key, value) = item.split_once('=').ok_or_else(|| Error::InvalidParam {
                name: "--set",
                message: format!("expected KEY=VALUE, got `{item}`"),
            })?;
            config::set_system_param(&mut p, key.trim(), value.trim(), 0).map_err(|e| {
                let reason = match e {
                    Error::UnknownKey { key, .. } => format!("unknown key `{key}`"),
                    Error::Config { message, .. } => message,
                    other => other.to_string(),
                };
                Error::InvalidParam {
                    name: "--set",
                    message: format!("`{item}`: {reason}"),
                }
            })?;
        }
        p.checked()
    }
}

pub fn parse_model(s: &str) -> Result<ModelChoice> {
    match s {
        "effective" => Ok(ModelChoice::Effective),
        "full" => Ok(ModelChoice::Full),
        "both" => Ok(ModelChoice::Both),
        other => Err(Error::InvalidParam {
            name: "--model",
            message: format!("expected effective|full|both, got `{other}`"),
        }),
    }
}

pub fn parse_output(s: &str) -> Result<OutputKind> {
    match s {
        "e_a" => Ok(OutputKind::EA),
        "e_b" => Ok(OutputKind::EB),
        "eta" => Ok(OutputKind::Eta),
        "power" => Ok(OutputKind::Power),
        "trajectory" => Ok(OutputKind::Trajectory),
        other => Err(Error::InvalidParam {
            name: "--output",
            message: format!("expected e_a|e_b|eta|power|trajectory, got `{other}`"),
        }),
    }
}

pub fn parse_ep_var(s: &str) -> Result<EpVariable> {
    match s {
        "j" | "J" => Ok(EpVariable::J),
        "phi" => Ok(EpVariable::Phi),
        "delta_b_p" => Ok(EpVariable::DeltaBP),
        "r" => Ok(EpVariable::R),
        other => Err(Error::InvalidParam {
            name: "--free",
            message: format!("expected j|phi|delta_b_p|r, got `{other}`"),
        }),
    }
}

pub fn ep_var_name(v: EpVariable) -> &'static str {
    match v {
        EpVariable::J => "j",
        EpVariable::Phi => "phi",
        EpVariable::DeltaBP => "delta_b_p",
        EpVariable::R => "r",
    }
}

/// `name:min:max:count[:linear|log]`, e.g. `r:0.01:100:41:log`.
pub fn parse_axis(s: &str) -> Result<AxisSpec<f64>> {
    let bad = |message: String| Error::InvalidParam {
        name: "--axis",
        message,
    };
    let parts: Vec<&str> = s.split(':').collect();
    if !(4..=5).contains(&parts.len()) {
        return Err(bad(format!(
            "expected name:min:max:count[:linear|log], got `{s}`"
        )));
    }
    let num = |what: &str, text: &str| -> Result<f64> {
        text.parse()
            .map_err(|_| bad(format!("{what} `{text}` is not a number in `{s}`")))
    };
    let min = num("min", parts[1])?;
    let max = num("max", parts[2])?;
    let count: usize = parts[3]
        .parse()
        .map_err(|_| bad(format!("count `{}` is not an integer in `{s}`", parts[3])))?;
    let spacing = match parts.get(4).copied().unwrap_or("linear") {
        "linear" => Spacing::Linear,
        "log" => Spacing::Log,
        other => return Err(bad(format!("spacing `{other}` is not linear|log in `{s}`"))),
    };
    Ok(AxisSpec {
        name: parts[0].to_string(),
        min,
        max,
        count,
        spacing,
    })
}
