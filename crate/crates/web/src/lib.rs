//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes plain numbers or TOML text and returns a JSON string,
//! so the page needs no generated TypeScript types. The `*_json` functions
//! are ordinary Rust and are tested natively.

use cqed_blockade::config::parse_config;
use cqed_blockade::dressed::ladder_report;
use cqed_blockade::presets::PRESETS;
use cqed_blockade::sweep::{solve_point, sweep_detuning, to_json};
use cqed_blockade::SweepSpec;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest grid a browser sweep accepts.
pub const MAX_POINTS: usize = 401;

/// Name, TOML text and assumptions of every shipped preset.
pub fn presets_json() -> String {
    let list: Vec<_> =
        PRESETS.iter().map(|p| json!({ "name": p.name, "toml": p.toml, "assumptions": p.assumptions })).collect();
    serde_json::Value::Array(list).to_string()
}

/// Detuning sweep of the configuration in `toml`, serial.
pub fn sweep_json(toml: &str, delta_min: f64, delta_max: f64, points: usize) -> Result<String, String> {
    if points > MAX_POINTS {
        return Err(format!("points: at most {MAX_POINTS} in the browser"));
    }
    let base = parse_config(toml).map_err(|e| e.to_string())?;
    let spec = SweepSpec { base, delta_min, delta_max, n_points: points, lock_detunings: true };
    let result = sweep_detuning(&spec, 1).map_err(|e| e.to_string())?;
    Ok(to_json(&result))
}

/// Steady-state row at one detuning.
pub fn point_json(toml: &str, delta: f64) -> Result<String, String> {
    let config = parse_config(toml).map_err(|e| e.to_string())?;
    let row = solve_point(&config, delta, true);
    Ok(serde_json::to_string(&row).expect("rows serialize"))
}

/// Dressed-state ladder with the strongest pumped transitions.
pub fn ladder_json(n_atoms: usize, g: f64, phi_z: f64, eta: f64, top: usize) -> Result<String, String> {
    let report = ladder_report(n_atoms, g, phi_z, eta, top).map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&report).expect("reports serialize"))
}

#[wasm_bindgen]
pub fn presets() -> String {
    presets_json()
}

#[wasm_bindgen]
pub fn sweep(toml: &str, delta_min: f64, delta_max: f64, points: usize) -> Result<String, JsError> {
    sweep_json(toml, delta_min, delta_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn point(toml: &str, delta: f64) -> Result<String, JsError> {
    point_json(toml, delta).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn ladder(n_atoms: usize, g: f64, phi_z: f64, eta: f64, top: usize) -> Result<String, JsError> {
    ladder_json(n_atoms, g, phi_z, eta, top).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    const SMALL: &str = "n_atoms = 2\ng = 1.0\nkappa = 0.5\ngamma = 0.5\neta = 0.2\nn_max = 3\n";

    #[test]
    fn preset_listing_round_trips() {
        let v: Value = serde_json::from_str(&presets_json()).unwrap();
        let list = v.as_array().unwrap();
        assert_eq!(list.len(), PRESETS.len());
        for p in list {
            parse_config(p["toml"].as_str().unwrap()).unwrap();
        }
    }

    #[test]
    fn sweep_matches_native_serial_result() {
        let v: Value = serde_json::from_str(&sweep_json(SMALL, -3.0, 3.0, 13).unwrap()).unwrap();
        let rows = v["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 13);
        assert_eq!(v["meta"]["workers"], 1);
        let mid = point_json(SMALL, 0.0).unwrap();
        let mid: Value = serde_json::from_str(&mid).unwrap();
        assert_eq!(rows[6]["mean_n"], mid["mean_n"]);
    }

    #[test]
    fn errors_are_messages() {
        let e = sweep_json("n_atoms = 2\n", -1.0, 1.0, 5).unwrap_err();
        assert!(e.contains("g"), "{e}");
        assert!(sweep_json(SMALL, -1.0, 1.0, MAX_POINTS + 1).unwrap_err().contains("points"));
        assert!(ladder_json(3, 1.0, 0.0, 0.1, 3).is_err());
    }

    #[test]
    fn ladder_lists_manifolds() {
        let v: Value = serde_json::from_str(&ladder_json(2, 1.0, 0.0, 0.1, 3).unwrap()).unwrap();
        assert_eq!(v["n_atoms"], 2);
        assert!(!v["manifolds"].as_array().unwrap().is_empty());
    }
}
