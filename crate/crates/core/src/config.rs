//! TOML configuration files.
//!
//! Keys: `n_atoms`, `g`, `kappa`, `gamma`, `eta`, `phi_z`, `coupling_mode`,
//! `z1`, `z2`, `lambda_c`, `delta_a`, `delta_c`, `n_max`. Unknown keys are
//! rejected. `kappa` defaults to 1, the detunings and `phi_z` to 0 and
//! `coupling_mode` to `"phase"`.

use std::path::Path;

use serde::Deserialize;

use crate::model::{Coupling, SystemConfig};
use crate::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n_atoms: Option<usize>,
    g: Option<f64>,
    kappa: Option<f64>,
    gamma: Option<f64>,
    eta: Option<f64>,
    phi_z: Option<f64>,
    coupling_mode: Option<String>,
    z1: Option<f64>,
    z2: Option<f64>,
    lambda_c: Option<f64>,
    delta_a: Option<f64>,
    delta_c: Option<f64>,
    n_max: Option<usize>,
}

fn missing(key: &str) -> Error {
    Error::Config { key: key.into(), message: "required key is missing".into() }
}

fn not_applicable(key: &str, mode: &str) -> Error {
    Error::Config { key: key.into(), message: format!("not used with coupling_mode = \"{mode}\"") }
}

/// Extracts the key name from toml's unknown/invalid field messages.
fn parse_error(err: toml::de::Error) -> Error {
    let msg = err.message().to_string();
    let key = msg.strip_prefix("unknown field `").and_then(|rest| rest.split('`').next()).map(str::to_string);
    match key {
        Some(key) => Error::Config { key, message: "unknown key".into() },
        None => Error::ConfigParse(err.to_string().trim_end().to_string()),
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<SystemConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(parse_error)?;
    let mode = raw.coupling_mode.as_deref().unwrap_or("phase");
    let coupling = match mode {
        "phase" => {
            for (key, v) in [("z1", raw.z1), ("z2", raw.z2), ("lambda_c", raw.lambda_c)] {
                if v.is_some() {
                    return Err(not_applicable(key, mode));
                }
            }
            Coupling::Phase { phi_z: raw.phi_z.unwrap_or(0.0) }
        }
        "positions" => {
            if raw.phi_z.is_some() {
                return Err(not_applicable("phi_z", mode));
            }
            Coupling::Positions {
                z1: raw.z1.ok_or_else(|| missing("z1"))?,
                z2: raw.z2.ok_or_else(|| missing("z2"))?,
                lambda_c: raw.lambda_c.ok_or_else(|| missing("lambda_c"))?,
            }
        }
        other => {
            return Err(Error::Config {
                key: "coupling_mode".into(),
                message: format!("expected \"phase\" or \"positions\", got \"{other}\""),
            })
        }
    };
    let config = SystemConfig {
        n_atoms: raw.n_atoms.ok_or_else(|| missing("n_atoms"))?,
        g: raw.g.ok_or_else(|| missing("g"))?,
        kappa: raw.kappa.unwrap_or(1.0),
        gamma: raw.gamma.ok_or_else(|| missing("gamma"))?,
        eta: raw.eta.ok_or_else(|| missing("eta"))?,
        delta_a: raw.delta_a.unwrap_or(0.0),
        delta_c: raw.delta_c.unwrap_or(0.0),
        coupling,
        n_max: raw.n_max.ok_or_else(|| missing("n_max"))?,
    };
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<SystemConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Serializes a config back to the file format.
pub fn to_toml(config: &SystemConfig) -> String {
    let mut out = format!(
        "n_atoms = {}\ng = {:?}\nkappa = {:?}\ngamma = {:?}\neta = {:?}\ndelta_a = {:?}\ndelta_c = {:?}\nn_max = {}\n",
        config.n_atoms, config.g, config.kappa, config.gamma, config.eta, config.delta_a, config.delta_c, config.n_max
    );
    match config.coupling {
        Coupling::Phase { phi_z } => out += &format!("coupling_mode = \"phase\"\nphi_z = {phi_z:?}\n"),
        Coupling::Positions { z1, z2, lambda_c } => {
            out += &format!("coupling_mode = \"positions\"\nz1 = {z1:?}\nz2 = {z2:?}\nlambda_c = {lambda_c:?}\n")
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "n_atoms = 2\ng = 10.0\ngamma = 1.0\neta = 0.1\nn_max = 4\n";

    fn key_of(err: Error) -> String {
        match err {
            Error::Config { key, .. } => key,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn defaults_fill_optional_keys() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.kappa, 1.0);
        assert_eq!(c.coupling, Coupling::Phase { phi_z: 0.0 });
        assert_eq!((c.delta_a, c.delta_c), (0.0, 0.0));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config(&format!("{MINIMAL}kapa = 2.0\n")).unwrap_err();
        assert_eq!(key_of(err), "kapa");
    }

    #[test]
    fn invalid_values_are_named() {
        let err = parse_config(&MINIMAL.replace("gamma = 1.0", "gamma = -1.0")).unwrap_err();
        assert_eq!(key_of(err), "gamma");
        let err = parse_config(&MINIMAL.replace("n_max = 4", "n_max = 0")).unwrap_err();
        assert_eq!(key_of(err), "n_max");
        let err = parse_config(&MINIMAL.replace("n_atoms = 2\n", "")).unwrap_err();
        assert_eq!(key_of(err), "n_atoms");
        let err = parse_config(&format!("{MINIMAL}coupling_mode = \"ring\"\n")).unwrap_err();
        assert_eq!(key_of(err), "coupling_mode");
    }

    #[test]
    fn positions_mode() {
        let text = format!("{MINIMAL}coupling_mode = \"positions\"\nz1 = 0.0\nz2 = 0.25\nlambda_c = 1.0\n");
        let c = parse_config(&text).unwrap();
        assert!((c.phi_z() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let err = parse_config(&format!("{MINIMAL}coupling_mode = \"positions\"\nz1 = 0.0\nz2 = 0.25\n")).unwrap_err();
        assert_eq!(key_of(err), "lambda_c");
        let err = parse_config(&format!("{MINIMAL}z1 = 0.3\n")).unwrap_err();
        assert_eq!(key_of(err), "z1");
    }

    #[test]
    fn type_errors_are_parse_errors() {
        let err = parse_config(&MINIMAL.replace("g = 10.0", "g = \"ten\"")).unwrap_err();
        assert!(matches!(err, Error::ConfigParse(_)), "{err}");
    }

    #[test]
    fn round_trip() {
        let mut c = parse_config(MINIMAL).unwrap();
        c.coupling = Coupling::Phase { phi_z: 1.2345678901234567 };
        c.delta_a = -0.3;
        assert_eq!(parse_config(&to_toml(&c)).unwrap(), c);
    }
}
