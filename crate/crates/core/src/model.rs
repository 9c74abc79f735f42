//! Rotating-frame Hamiltonian and collapse operators.
//!
//! Units: `ħ = 1`; all rates and detunings share one unit (by default the
//! cavity half-width, `kappa = 1`). The dissipator uses the half-width
//! convention, so the cavity field decays at `kappa` and photon number at
//! `2 kappa`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::hilbert::{
    annihilation_op, atomic_lowering, atomic_sz, collective_lowering, collective_raising, number_op, Collective,
    HilbertLayout, OperatorMatrix,
};
use crate::{Error, Result};

/// How the per-atom coupling constants are derived from `g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "coupling_mode", rename_all = "lowercase")]
pub enum Coupling {
    /// `g₁ = g`, `g₂ = g cos φ_z`.
    Phase { phi_z: f64 },
    /// `gᵢ = g cos(2π zᵢ / λ_c)`.
    Positions { z1: f64, z2: f64, lambda_c: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystemConfig {
    /// 1 or 2; 0 selects the empty-cavity test mode, where the pump drives
    /// the cavity directly (`η(a + a†)`).
    pub n_atoms: usize,
    pub g: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub eta: f64,
    /// `Δ_A = ω_A − ω_L`.
    pub delta_a: f64,
    /// `Δ_c = ω_c − ω_L`.
    pub delta_c: f64,
    #[serde(flatten)]
    pub coupling: Coupling,
    pub n_max: usize,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            n_atoms: 2,
            g: 1.0,
            kappa: 1.0,
            gamma: 1.0,
            eta: 0.1,
            delta_a: 0.0,
            delta_c: 0.0,
            coupling: Coupling::Phase { phi_z: 0.0 },
            n_max: 6,
        }
    }
}

fn bad(key: &str, message: impl Into<String>) -> Error {
    Error::Config { key: key.to_string(), message: message.into() }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_atoms > 2 {
            return Err(bad("n_atoms", format!("must be 0, 1 or 2, got {}", self.n_atoms)));
        }
        let finite = [
            ("g", self.g),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("eta", self.eta),
            ("delta_a", self.delta_a),
            ("delta_c", self.delta_c),
        ];
        for (key, v) in finite {
            if !v.is_finite() {
                return Err(bad(key, "must be finite"));
            }
        }
        if self.kappa <= 0.0 {
            return Err(bad("kappa", "must be > 0"));
        }
        if self.gamma < 0.0 {
            return Err(bad("gamma", "must be >= 0"));
        }
        if self.eta < 0.0 {
            return Err(bad("eta", "must be >= 0"));
        }
        if self.g < 0.0 {
            return Err(bad("g", "must be >= 0"));
        }
        if self.n_max < 1 {
            return Err(bad("n_max", "must be >= 1"));
        }
        match self.coupling {
            Coupling::Phase { phi_z } if !phi_z.is_finite() => Err(bad("phi_z", "must be finite")),
            Coupling::Positions { lambda_c, .. } if !(lambda_c > 0.0 && lambda_c.is_finite()) => {
                Err(bad("lambda_c", "must be > 0"))
            }
            Coupling::Positions { z1, z2, .. } if !(z1.is_finite() && z2.is_finite()) => {
                Err(bad("z1", "atom positions must be finite"))
            }
            _ => Ok(()),
        }
    }

    pub fn layout(&self) -> Result<HilbertLayout> {
        HilbertLayout::new(self.n_atoms, self.n_max)
    }

    /// Sets `Δ_A = Δ_c = delta` (resonant atoms and cavity).
    pub fn set_detuning(&mut self, delta: f64) {
        self.delta_a = delta;
        self.delta_c = delta;
    }

    pub fn with_detuning(mut self, delta: f64) -> Self {
        self.set_detuning(delta);
        self
    }

    /// Radiation phase shift between the atoms, `2πΔz/λ_c` in positions mode.
    pub fn phi_z(&self) -> f64 {
        match self.coupling {
            Coupling::Phase { phi_z } => phi_z,
            Coupling::Positions { z1, z2, lambda_c } => 2.0 * PI * (z2 - z1) / lambda_c,
        }
    }
}

/// Per-atom coupling constants `(g₁, g₂)`. For one atom only `g₁` is used.
pub fn coupling_constants(config: &SystemConfig) -> (f64, f64) {
    match config.coupling {
        Coupling::Phase { phi_z } => (config.g, config.g * phi_z.cos()),
        Coupling::Positions { z1, z2, lambda_c } => {
            (config.g * (2.0 * PI * z1 / lambda_c).cos(), config.g * (2.0 * PI * z2 / lambda_c).cos())
        }
    }
}

/// `g±` of the collective-operator form, `g₁ ± g₂`.
pub fn collective_couplings(config: &SystemConfig) -> (f64, f64) {
    let (g1, g2) = coupling_constants(config);
    (g1 + g2, g1 - g2)
}

/// Pieces of `H` that do not depend on the detunings. The full Hamiltonian is
/// `delta_a * atomic_sz + delta_c * photon_number + rest`.
#[derive(Clone, Debug)]
pub struct HamiltonianParts {
    pub atomic_sz: OperatorMatrix,
    pub photon_number: OperatorMatrix,
    pub interaction: OperatorMatrix,
    pub drive: OperatorMatrix,
}

impl HamiltonianParts {
    pub fn new(config: &SystemConfig) -> Result<Self> {
        config.validate()?;
        let layout = config.layout()?;
        let a = annihilation_op(layout);
        let a_dag = a.adjoint();
        let (g1, g2) = coupling_constants(config);
        let mut sz = OperatorMatrix::zeros(layout);
        let mut interaction = OperatorMatrix::zeros(layout);
        let mut drive = OperatorMatrix::zeros(layout);
        for (i, gi) in [g1, g2].into_iter().enumerate().take(config.n_atoms) {
            let lower = atomic_lowering(layout, i + 1)?;
            let raise = lower.adjoint();
            sz = &sz + &atomic_sz(layout, i + 1)?;
            let jc = &(&a_dag * &lower) + &(&a * &raise);
            interaction = &interaction + &jc.scale(gi);
            drive = &drive + &(&lower + &raise).scale(config.eta);
        }
        if config.n_atoms == 0 {
            drive = (&a + &a_dag).scale(config.eta);
        }
        Ok(Self { atomic_sz: sz, photon_number: number_op(layout), interaction, drive })
    }

    pub fn at(&self, delta_a: f64, delta_c: f64) -> OperatorMatrix {
        let mut h = &self.interaction + &self.drive;
        if delta_a != 0.0 {
            h = &h + &self.atomic_sz.scale(delta_a);
        }
        if delta_c != 0.0 {
            h = &h + &self.photon_number.scale(delta_c);
        }
        h
    }
}

/// `H = Δ_A Σ S_zⁱ + Δ_c a†a + Σ gᵢ(a†S₋ⁱ + aS₊ⁱ) + η Σ (S₋ⁱ + S₊ⁱ)`.
pub fn build_hamiltonian(config: &SystemConfig) -> Result<OperatorMatrix> {
    Ok(HamiltonianParts::new(config)?.at(config.delta_a, config.delta_c))
}

/// Interaction written with collective operators, `Σ± g±(a D±† + a† D±)/√2`;
/// two atoms only. Equal to the `interaction` part of [`HamiltonianParts`].
pub fn collective_interaction(config: &SystemConfig) -> Result<OperatorMatrix> {
    let layout = config.layout()?;
    let a = annihilation_op(layout);
    let a_dag = a.adjoint();
    let (g_plus, g_minus) = collective_couplings(config);
    let mut h = OperatorMatrix::zeros(layout);
    for (which, gc) in [(Collective::Symmetric, g_plus), (Collective::Antisymmetric, g_minus)] {
        let up = collective_raising(layout, which)?;
        let down = collective_lowering(layout, which)?;
        let term = &(&a * &up) + &(&a_dag * &down);
        h = &h + &term.scale(gc * FRAC_1_SQRT_2);
    }
    Ok(h)
}

/// Collapse operators `√(2κ) a` and, when `γ > 0`, `√(2γ) S₋ⁱ` for each atom.
pub fn collapse_operators(config: &SystemConfig) -> Result<Vec<OperatorMatrix>> {
    config.validate()?;
    let layout = config.layout()?;
    let mut out = vec![annihilation_op(layout).scale((2.0 * config.kappa).sqrt())];
    if config.gamma > 0.0 {
        for i in 1..=config.n_atoms {
            out.push(atomic_lowering(layout, i)?.scale((2.0 * config.gamma).sqrt()));
        }
    }
    Ok(out)
}

/// `a†a + Σ (S_zⁱ + 1/2)`.
pub fn excitation_number(layout: HilbertLayout) -> Result<OperatorMatrix> {
    let mut n = number_op(layout);
    for i in 1..=layout.n_atoms() {
        let lower = atomic_lowering(layout, i)?;
        n = &n + &(&lower.adjoint() * &lower);
    }
    Ok(n)
}

/// Bare driven damped cavity, `H = Δ_c a†a + η(a + a†)` with collapse `√(2κ) a`.
/// Its steady state is the coherent state with `⟨a†a⟩ = η²/(Δ_c² + κ²)`.
pub fn driven_cavity(
    n_max: usize,
    delta_c: f64,
    eta: f64,
    kappa: f64,
) -> Result<(OperatorMatrix, Vec<OperatorMatrix>)> {
    if kappa <= 0.0 {
        return Err(Error::Parameter("kappa must be > 0".into()));
    }
    let layout = HilbertLayout::new(0, n_max)?;
    let a = annihilation_op(layout);
    let h = &number_op(layout).scale(delta_c) + &(&a + &a.adjoint()).scale(eta);
    Ok((h, vec![a.scale((2.0 * kappa).sqrt())]))
}
