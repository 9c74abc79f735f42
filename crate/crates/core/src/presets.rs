//! Named parameter sets shipped with the crate.
//!
//! All presets measure rates in units of the full cavity linewidth, so they
//! set `kappa = 0.5` (a field half-width) and give `gamma` as a half-width
//! too. Each preset's TOML carries its assumptions as comments; the same
//! notes are available programmatically through [`Preset::assumptions`].

use crate::config::parse_config;
use crate::model::SystemConfig;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub toml: &'static str,
    pub assumptions: &'static [&'static str],
}

const UNITS: &str = "rates in units of the full cavity linewidth (kappa = 0.5 half-width)";
const UNSTATED: &str = "g = 10 linewidths and equal atomic and cavity linewidths are assumed";

macro_rules! preset {
    ($name:literal, [$($note:expr),*]) => {
        Preset {
            name: $name,
            toml: include_str!(concat!("../presets/", $name, ".toml")),
            assumptions: &[UNITS, $($note),*],
        }
    };
}

pub const PRESETS: &[Preset] = &[
    preset!("fig2a", ["g = 10 linewidths; see fig2a-g1 for g = 1"]),
    preset!("fig2a-g1", []),
    preset!("fig2b", ["g = 10 linewidths; see fig2b-g1 for g = 1"]),
    preset!("fig2b-g1", []),
    preset!("fig3a", []),
    preset!("fig3b", []),
    preset!("fig4a", [UNSTATED]),
    preset!("fig4b", [UNSTATED]),
    preset!("fig4c", [UNSTATED]),
    preset!("fig4d", [UNSTATED]),
    preset!("fig5a", [UNSTATED]),
    preset!("fig5b", [UNSTATED]),
];

pub fn find(name: &str) -> Result<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| Error::Config {
        key: "preset".into(),
        message: format!(
            "unknown preset `{name}` (available: {})",
            PRESETS.iter().map(|p| p.name).collect::<Vec<_>>().join(", ")
        ),
    })
}

impl Preset {
    pub fn config(&self) -> SystemConfig {
        parse_config(self.toml).expect("shipped presets are valid")
    }
}

/// Parsed config of the named preset.
pub fn preset(name: &str) -> Result<SystemConfig> {
    Ok(find(name)?.config())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses() {
        for p in PRESETS {
            let c = p.config();
            assert_eq!(c.kappa, 0.5, "{}", p.name);
            assert!(!p.assumptions.is_empty());
        }
    }

    #[test]
    fn unknown_preset_names_the_flag() {
        assert!(matches!(find("fig9"), Err(Error::Config { key, .. }) if key == "preset"));
    }

    #[test]
    fn variants_differ_only_in_coupling_and_truncation() {
        for name in ["fig2a", "fig2b"] {
            let a = preset(name).unwrap();
            let b = preset(&format!("{name}-g1")).unwrap();
            assert_eq!(b.g, 1.0);
            assert_eq!(SystemConfig { g: a.g, n_max: a.n_max, ..b }, a);
        }
    }
}
