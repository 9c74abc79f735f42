use std::f64::consts::PI;

use proptest::prelude::*;

use cqed_blockade::dressed::{dressed_one_photon, dressed_two_photon, ladder_config, numeric_manifold_eigs};
use cqed_blockade::liouvillian::{build_liouvillian, steady_state};
use cqed_blockade::model::{build_hamiltonian, collapse_operators, Coupling};
use cqed_blockade::sweep::format_sig12;
use cqed_blockade::SystemConfig;

fn config() -> impl Strategy<Value = SystemConfig> {
    (1usize..=2, 0.0..10.0f64, 0.1..1.0f64, 0.05..1.5f64, 0.0..2.0f64, 0.0..PI, -30.0..30.0f64, 2usize..=4).prop_map(
        |(n_atoms, g, kappa, gamma, eta, phi_z, delta, n_max)| {
            SystemConfig {
                n_atoms,
                g,
                kappa,
                gamma,
                eta,
                coupling: Coupling::Phase { phi_z },
                n_max,
                ..Default::default()
            }
            .with_detuning(delta)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hamiltonian_is_hermitian(cfg in config()) {
        let h = build_hamiltonian(&cfg).unwrap();
        prop_assert!(h.hermiticity_error() < 1e-14);
    }

    #[test]
    fn generator_preserves_trace(cfg in config()) {
        let l = build_liouvillian(&build_hamiltonian(&cfg).unwrap(), &collapse_operators(&cfg).unwrap()).unwrap();
        prop_assert!(l.trace_leak() < 1e-12, "leak {}", l.trace_leak());
    }

    #[test]
    fn steady_states_are_physical(cfg in config()) {
        let l = build_liouvillian(&build_hamiltonian(&cfg).unwrap(), &collapse_operators(&cfg).unwrap()).unwrap();
        let ss = steady_state(&l).unwrap();
        prop_assert!(ss.residual < 1e-10);
        prop_assert!(ss.diagnostics.hermiticity < 1e-10);
        prop_assert!(ss.diagnostics.trace_error < 1e-10);
        prop_assert!(ss.diagnostics.min_eigenvalue > -1e-8);
        prop_assert!(ss.diagnostics.purity <= 1.0 + 1e-10);
    }

    #[test]
    fn closed_form_levels_are_orthonormal(phi in 0.0..(2.0 * PI), g in 0.1..20.0f64) {
        for levels in [dressed_one_photon(g, phi).unwrap(), dressed_two_photon(g, phi).unwrap()] {
            for (i, a) in levels.iter().enumerate() {
                prop_assert!((a.norm() - 1.0).abs() < 1e-12);
                for b in &levels[i + 1..] {
                    prop_assert!(a.overlap(b).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn numeric_ladder_is_symmetric(phi in 0.0..PI, n in 1usize..=4) {
        // the interaction anticommutes with the excitation-parity grading
        let levels = numeric_manifold_eigs(&ladder_config(2, 1.0, phi, 4), n).unwrap();
        let k = levels.len();
        for i in 0..k {
            prop_assert!((levels[i].energy + levels[k - 1 - i].energy).abs() < 1e-12);
        }
    }

    #[test]
    fn sig12_keeps_twelve_digits(v in prop::num::f64::NORMAL) {
        let s = format_sig12(v);
        prop_assert!(!s.contains('e'));
        let back: f64 = s.parse().unwrap();
        prop_assert!(((back - v) / v).abs() < 5e-12, "{v} -> {s}");
    }
}
