//! Dressed-state ladder of the undriven atom-cavity system.
//!
//! Levels are expressed over the collective bare basis
//! `{|gg,n⟩, |−,n−1⟩, |+,n−1⟩, |ee,n−2⟩}` with `|±⟩ = (|eg⟩ ± |ge⟩)/√2`
//! (or `{|g,n⟩, |e,n−1⟩}` for one atom). Energies are relative to `n ω_c`
//! and measured in units of `g`. Every level is stored with its first
//! nonzero amplitude real-positive.
//!
//! The closed forms for the one- and two-photon manifolds follow the
//! collective-state construction with mixing coefficients
//! `α = (1 + cos φ)/√(1 + cos²φ)` and `β = (−1 + cos φ)/√(1 + cos²φ)`.
//! [`numeric_manifold_eigs`] diagonalizes the same manifolds directly; the
//! two-photon closed form agrees with it only where `cos²φ = 1`, and
//! [`compare_manifold`] reports the deviation.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Serialize, Serializer};

use crate::hilbert::{BasisState, HilbertLayout};
use crate::model::{Coupling, HamiltonianParts, SystemConfig};
use crate::{Error, Result, C64};

/// Amplitudes below this magnitude are treated as zero by the phase convention.
const AMPLITUDE_EPS: f64 = 1e-12;
/// Levels closer than this (in units of `g`) form one degenerate cluster.
const DEGENERACY_EPS: f64 = 1e-8;

/// Collective bare state; the payload is the photon number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BareState {
    Gg(usize),
    Minus(usize),
    Plus(usize),
    Ee(usize),
    /// Single-atom ground with `n` photons.
    G(usize),
    /// Single-atom excited with `n` photons.
    E(usize),
}

impl BareState {
    pub fn photons(self) -> usize {
        match self {
            BareState::Gg(n)
            | BareState::Minus(n)
            | BareState::Plus(n)
            | BareState::Ee(n)
            | BareState::G(n)
            | BareState::E(n) => n,
        }
    }

    pub fn excitations(self) -> usize {
        match self {
            BareState::Gg(n) | BareState::G(n) => n,
            BareState::Minus(n) | BareState::Plus(n) | BareState::E(n) => n + 1,
            BareState::Ee(n) => n + 2,
        }
    }

    pub fn n_atoms(self) -> usize {
        match self {
            BareState::G(_) | BareState::E(_) => 1,
            _ => 2,
        }
    }

    /// The state as a vector in the composite product basis.
    pub fn composite_vector(self, layout: HilbertLayout) -> Result<DVector<C64>> {
        if layout.n_atoms() != self.n_atoms() {
            return Err(Error::Parameter(format!("{self} does not live on {layout}")));
        }
        let n = self.photons();
        let h = FRAC_1_SQRT_2;
        let parts: Vec<(usize, f64)> = match self {
            BareState::Gg(_) | BareState::G(_) => vec![(0b00, 1.0)],
            BareState::E(_) => vec![(0b1, 1.0)],
            BareState::Ee(_) => vec![(0b11, 1.0)],
            BareState::Plus(_) => vec![(0b10, h), (0b01, h)],
            BareState::Minus(_) => vec![(0b10, h), (0b01, -h)],
        };
        let mut v = DVector::zeros(layout.dim());
        for (atoms, amp) in parts {
            let idx = layout
                .index(BasisState::new(atoms, n))
                .ok_or_else(|| Error::Parameter(format!("{self} exceeds truncation of {layout}")))?;
            v[idx] = C64::new(amp, 0.0);
        }
        Ok(v)
    }
}

impl fmt::Display for BareState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BareState::Gg(n) => write!(f, "|gg,{n}⟩"),
            BareState::Minus(n) => write!(f, "|−,{n}⟩"),
            BareState::Plus(n) => write!(f, "|+,{n}⟩"),
            BareState::Ee(n) => write!(f, "|ee,{n}⟩"),
            BareState::G(n) => write!(f, "|g,{n}⟩"),
            BareState::E(n) => write!(f, "|e,{n}⟩"),
        }
    }
}

impl Serialize for BareState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LevelLabel {
    Ground,
    PsiPlus,
    PsiZero,
    PhiZero,
    PsiMinus,
    Numeric,
}

impl fmt::Display for LevelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LevelLabel::Ground => "Ψ0",
            LevelLabel::PsiPlus => "Ψ+",
            LevelLabel::PsiZero => "Ψ0",
            LevelLabel::PhiZero => "Φ0",
            LevelLabel::PsiMinus => "Ψ−",
            LevelLabel::Numeric => "num",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DressedLevel {
    pub manifold: usize,
    /// Energy relative to `manifold · ω_c`, in units of `g`.
    pub energy: f64,
    pub amplitudes: Vec<(BareState, f64)>,
    pub label: LevelLabel,
}

impl DressedLevel {
    fn new(manifold: usize, energy: f64, amplitudes: Vec<(BareState, f64)>, label: LevelLabel) -> Self {
        let mut level = Self { manifold, energy, amplitudes, label };
        level.canonicalize_phase();
        level
    }

    fn canonicalize_phase(&mut self) {
        if let Some(&(_, first)) = self.amplitudes.iter().find(|(_, a)| a.abs() > AMPLITUDE_EPS) {
            if first < 0.0 {
                self.amplitudes.iter_mut().for_each(|(_, a)| *a = -*a);
            }
        }
    }

    pub fn amplitude(&self, state: BareState) -> f64 {
        self.amplitudes.iter().find(|(s, _)| *s == state).map_or(0.0, |(_, a)| *a)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|(_, a)| a * a).sum::<f64>().sqrt()
    }

    pub fn overlap(&self, other: &DressedLevel) -> f64 {
        self.amplitudes.iter().map(|&(s, a)| a * other.amplitude(s)).sum()
    }

    fn n_atoms(&self) -> usize {
        self.amplitudes.first().map_or(2, |(s, _)| s.n_atoms())
    }

    fn composite_vector(&self, layout: HilbertLayout) -> Result<DVector<C64>> {
        let mut v = DVector::zeros(layout.dim());
        for &(s, a) in &self.amplitudes {
            v += s.composite_vector(layout)? * C64::new(a, 0.0);
        }
        Ok(v)
    }
}

/// `(α, β) = ((1 + cos φ), (−1 + cos φ)) / √(1 + cos²φ)`; `α² + β² = 2`.
pub fn mixing_coefficients(phi_z: f64) -> (f64, f64) {
    let c = phi_z.cos();
    let norm = (1.0 + c * c).sqrt();
    ((1.0 + c) / norm, (-1.0 + c) / norm)
}

/// `|gg,0⟩` (or `|g,0⟩`).
pub fn ground_level(n_atoms: usize) -> DressedLevel {
    let state = if n_atoms == 1 { BareState::G(0) } else { BareState::Gg(0) };
    DressedLevel::new(0, 0.0, vec![(state, 1.0)], LevelLabel::Ground)
}

fn require_atoms(n_atoms: usize) -> Result<()> {
    if !(1..=2).contains(&n_atoms) {
        return Err(Error::Unsupported(format!("dressed ladder needs 1 or 2 atoms, got {n_atoms}")));
    }
    Ok(())
}

fn require_positive(g: f64) -> Result<()> {
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::Parameter(format!("dressed states need g > 0, got {g}")));
    }
    Ok(())
}

/// Closed-form one-photon manifold of two atoms: `Ψ₊`, `Ψ₀`, `Ψ₋` at
/// `{+1, 0, −1}·√(1 + cos²φ)`.
pub fn dressed_one_photon(g: f64, phi_z: f64) -> Result<Vec<DressedLevel>> {
    require_positive(g)?;
    let (alpha, beta) = mixing_coefficients(phi_z);
    let split = (1.0 + phi_z.cos().powi(2)).sqrt();
    let h = FRAC_1_SQRT_2;
    let coupled = |sign: f64| {
        vec![(BareState::Gg(1), sign * h), (BareState::Minus(0), -0.5 * beta), (BareState::Plus(0), 0.5 * alpha)]
    };
    Ok(vec![
        DressedLevel::new(1, split, coupled(1.0), LevelLabel::PsiPlus),
        DressedLevel::new(
            1,
            0.0,
            vec![(BareState::Minus(0), h * alpha), (BareState::Plus(0), h * beta)],
            LevelLabel::PsiZero,
        ),
        DressedLevel::new(1, -split, coupled(-1.0), LevelLabel::PsiMinus),
    ])
}

/// Closed-form two-photon manifold: `Ψ₊`, `Ψ₀`, `Φ₀`, `Ψ₋` with `Ψ±` at
/// `±√(3(1 + cos²φ))` and the two zero-energy levels.
pub fn dressed_two_photon(g: f64, phi_z: f64) -> Result<Vec<DressedLevel>> {
    require_positive(g)?;
    let (alpha, beta) = mixing_coefficients(phi_z);
    let split = (3.0 * (1.0 + phi_z.cos().powi(2))).sqrt();
    let (third, sixth) = (3f64.sqrt() / 3.0, 6f64.sqrt() / 6.0);
    let outer = |sign: f64| {
        vec![
            (BareState::Gg(2), third),
            (BareState::Minus(1), -sign * 0.5 * beta),
            (BareState::Plus(1), sign * 0.5 * alpha),
            (BareState::Ee(0), sixth),
        ]
    };
    Ok(vec![
        DressedLevel::new(2, split, outer(1.0), LevelLabel::PsiPlus),
        DressedLevel::new(
            2,
            0.0,
            vec![(BareState::Gg(2), -third), (BareState::Ee(0), 2.0 * sixth)],
            LevelLabel::PsiZero,
        ),
        DressedLevel::new(
            2,
            0.0,
            vec![(BareState::Minus(1), FRAC_1_SQRT_2 * alpha), (BareState::Plus(1), FRAC_1_SQRT_2 * beta)],
            LevelLabel::PhiZero,
        ),
        DressedLevel::new(2, -split, outer(-1.0), LevelLabel::PsiMinus),
    ])
}

/// Bare basis of the `n`-excitation manifold.
pub fn manifold_basis(n_atoms: usize, n: usize) -> Vec<BareState> {
    let mut out = Vec::new();
    if n_atoms == 1 {
        out.push(BareState::G(n));
        if n >= 1 {
            out.push(BareState::E(n - 1));
        }
    } else {
        out.push(BareState::Gg(n));
        if n >= 1 {
            out.push(BareState::Minus(n - 1));
            out.push(BareState::Plus(n - 1));
        }
        if n >= 2 {
            out.push(BareState::Ee(n - 2));
        }
    }
    out
}

/// Diagonalizes the atom-cavity interaction restricted to `n_exc` excitations.
///
/// The drive and detunings of `config` are ignored. Levels come back sorted
/// by energy, labelled [`LevelLabel::Numeric`].
pub fn numeric_manifold_eigs(config: &SystemConfig, n_exc: usize) -> Result<Vec<DressedLevel>> {
    require_positive(config.g)?;
    require_atoms(config.n_atoms)?;
    if n_exc > config.n_max {
        return Err(Error::Parameter(format!(
            "manifold {n_exc} needs n_max >= {n_exc}, config has n_max = {}",
            config.n_max
        )));
    }
    let layout = config.layout()?;
    let interaction = HamiltonianParts::new(config)?.interaction;
    let basis = manifold_basis(config.n_atoms, n_exc);
    let vectors = basis.iter().map(|s| s.composite_vector(layout)).collect::<Result<Vec<_>>>()?;
    let k = basis.len();
    let block = DMatrix::from_fn(k, k, |i, j| {
        (vectors[i].adjoint() * interaction.matrix() * &vectors[j])[(0, 0)].re / config.g
    });
    let eig = SymmetricEigen::new(block);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    Ok(order
        .into_iter()
        .map(|col| {
            let amps = basis.iter().enumerate().map(|(row, &s)| (s, eig.eigenvectors[(row, col)])).collect();
            DressedLevel::new(n_exc, eig.eigenvalues[col], amps, LevelLabel::Numeric)
        })
        .collect())
}

/// Config used for ladder diagonalization at given `(g, φ)`.
pub fn ladder_config(n_atoms: usize, g: f64, phi_z: f64, n_max: usize) -> SystemConfig {
    SystemConfig {
        n_atoms,
        g,
        eta: 0.0,
        delta_a: 0.0,
        delta_c: 0.0,
        coupling: Coupling::Phase { phi_z },
        n_max: n_max.max(1),
        ..Default::default()
    }
}

/// `|⟨to| η Σᵢ(S₊ⁱ + S₋ⁱ) |from⟩|²`, which for two atoms is the matrix
/// element of `√2 η (D₊† + D₊)`.
pub fn transition_strength(from: &DressedLevel, to: &DressedLevel, eta: f64) -> Result<f64> {
    let n_atoms = from.n_atoms();
    let all = from.amplitudes.iter().chain(&to.amplitudes);
    if all.clone().any(|(s, _)| s.n_atoms() != n_atoms) {
        return Err(Error::Parameter("levels are expressed over different bare bases".into()));
    }
    let n_max = all.map(|(s, _)| s.photons()).max().unwrap_or(0).max(1);
    let cfg = SystemConfig { eta, ..ladder_config(n_atoms, 1.0, 0.0, n_max) };
    let drive = HamiltonianParts::new(&cfg)?.drive;
    let layout = drive.layout();
    let (a, b) = (from.composite_vector(layout)?, to.composite_vector(layout)?);
    Ok((b.adjoint() * drive.matrix() * a)[(0, 0)].norm_sqr())
}

/// Agreement between two descriptions of one manifold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ManifoldComparison {
    /// Largest sorted-energy difference, units of `g`.
    pub energy_error: f64,
    /// Largest entrywise difference of the spectral projectors, cluster by
    /// cluster; insensitive to phases and rotations inside degenerate blocks.
    pub projector_error: f64,
}

fn projector(levels: &[&DressedLevel], basis: &[BareState]) -> DMatrix<f64> {
    let k = basis.len();
    let mut p = DMatrix::zeros(k, k);
    for level in levels {
        let v = DVector::from_iterator(k, basis.iter().map(|&s| level.amplitude(s)));
        p += &v * v.transpose();
    }
    p
}

pub fn compare_manifold(a: &[DressedLevel], b: &[DressedLevel]) -> ManifoldComparison {
    let sorted = |x: &[DressedLevel]| {
        let mut e: Vec<f64> = x.iter().map(|l| l.energy).collect();
        e.sort_by(f64::total_cmp);
        e
    };
    let (ea, eb) = (sorted(a), sorted(b));
    let energy_error = if ea.len() == eb.len() {
        ea.iter().zip(&eb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let mut basis: Vec<BareState> = Vec::new();
    for l in a.iter().chain(b) {
        for &(s, _) in &l.amplitudes {
            if !basis.contains(&s) {
                basis.push(s);
            }
        }
    }
    let mut projector_error = 0.0f64;
    for level in a.iter().chain(b) {
        let near = |l: &&DressedLevel| (l.energy - level.energy).abs() < DEGENERACY_EPS;
        let ca: Vec<&DressedLevel> = a.iter().filter(near).collect();
        let cb: Vec<&DressedLevel> = b.iter().filter(near).collect();
        let (pa, pb) = (projector(&ca, &basis), projector(&cb, &basis));
        projector_error = projector_error.max((pa - pb).amax());
    }
    ManifoldComparison { energy_error, projector_error }
}

/// One allowed pump transition between adjacent manifolds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderTransition {
    pub from_manifold: usize,
    pub from_index: usize,
    pub to_manifold: usize,
    pub to_index: usize,
    /// `|⟨to|V|from⟩|²` with `V` the pump operator.
    pub strength: f64,
    /// Pump detuning `Δ = ω_c − ω_L` at which `to` is multi-photon resonant
    /// from the ground state, in the same units as `g`.
    pub resonance_delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManifoldReport {
    pub manifold: usize,
    pub numeric: Vec<DressedLevel>,
    /// Closed-form levels where available (two atoms, manifolds 1 and 2).
    pub analytic: Option<Vec<DressedLevel>>,
    pub comparison: Option<ManifoldComparison>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderReport {
    pub n_atoms: usize,
    pub g: f64,
    pub phi_z: f64,
    pub eta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub manifolds: Vec<ManifoldReport>,
    pub transitions: Vec<LadderTransition>,
}

/// Numeric ladder up to `top` excitations with the closed forms and every
/// nonzero pump transition between adjacent manifolds.
pub fn ladder_report(n_atoms: usize, g: f64, phi_z: f64, eta: f64, top: usize) -> Result<LadderReport> {
    require_positive(g)?;
    require_atoms(n_atoms)?;
    let cfg = ladder_config(n_atoms, g, phi_z, top);
    let mut manifolds = Vec::new();
    for n in 0..=top {
        let numeric = if n == 0 { vec![ground_level(n_atoms)] } else { numeric_manifold_eigs(&cfg, n)? };
        let analytic = match (n_atoms, n) {
            (2, 1) => Some(dressed_one_photon(g, phi_z)?),
            (2, 2) => Some(dressed_two_photon(g, phi_z)?),
            _ => None,
        };
        let comparison = analytic.as_ref().map(|a| compare_manifold(a, &numeric));
        manifolds.push(ManifoldReport { manifold: n, numeric, analytic, comparison });
    }
    let mut transitions = Vec::new();
    for pair in manifolds.windows(2) {
        for (i, from) in pair[0].numeric.iter().enumerate() {
            for (j, to) in pair[1].numeric.iter().enumerate() {
                let strength = transition_strength(from, to, eta)?;
                if strength > 1e-12 * eta.max(1.0).powi(2) {
                    transitions.push(LadderTransition {
                        from_manifold: pair[0].manifold,
                        from_index: i,
                        to_manifold: pair[1].manifold,
                        to_index: j,
                        strength,
                        resonance_delta: -to.energy * g / to.manifold as f64,
                    });
                }
            }
        }
    }
    let (alpha, beta) = mixing_coefficients(phi_z);
    Ok(LadderReport { n_atoms, g, phi_z, eta, alpha, beta, manifolds, transitions })
}

impl fmt::Display for LadderReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "# dressed ladder: n_atoms={} g={} phi_z={:.6} ({:.4}π) eta={}",
            self.n_atoms,
            self.g,
            self.phi_z,
            self.phi_z / PI,
            self.eta
        )?;
        if self.n_atoms == 2 {
            writeln!(f, "# alpha={:.12} beta={:.12}", self.alpha, self.beta)?;
        }
        for m in &self.manifolds {
            writeln!(f, "\nmanifold {}", m.manifold)?;
            writeln!(f, "  {:>5} {:>16} {:>16}  amplitudes", "idx", "E/g (numeric)", "E/g (closed)")?;
            let analytic = m.analytic.as_deref().unwrap_or(&[]);
            let mut closed: Vec<f64> = analytic.iter().map(|l| l.energy).collect();
            closed.sort_by(f64::total_cmp);
            for (i, level) in m.numeric.iter().enumerate() {
                let amps: Vec<String> = level
                    .amplitudes
                    .iter()
                    .filter(|(_, a)| a.abs() > AMPLITUDE_EPS)
                    .map(|(s, a)| format!("{a:+.6}{s}"))
                    .collect();
                let closed_e = closed.get(i).map_or_else(|| "-".to_string(), |e| format!("{e:.12}"));
                writeln!(f, "  {:>5} {:>16.12} {:>16}  {}", i, level.energy, closed_e, amps.join(" "))?;
            }
            if let Some(c) = m.comparison {
                writeln!(
                    f,
                    "  closed form vs numeric: energy error {:.3e}, projector error {:.3e}",
                    c.energy_error, c.projector_error
                )?;
            }
        }
        writeln!(f, "\ntransitions (|<to|V|from>|^2, V = pump)")?;
        writeln!(f, "  {:>10} {:>10} {:>16} {:>16}", "from", "to", "strength", "resonance Δ")?;
        for t in &self.transitions {
            writeln!(
                f,
                "  {:>10} {:>10} {:>16.10} {:>16.10}",
                format!("{}[{}]", t.from_manifold, t.from_index),
                format!("{}[{}]", t.to_manifold, t.to_index),
                t.strength,
                t.resonance_delta
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{collective_lowering, collective_raising, Collective};

    const PHIS: [f64; 5] = [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI];

    fn sorted_energies(levels: &[DressedLevel]) -> Vec<f64> {
        let mut e: Vec<f64> = levels.iter().map(|l| l.energy).collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn mixing_coefficient_values() {
        let (a, b) = mixing_coefficients(0.0);
        assert!((a - 2f64.sqrt()).abs() < 1e-15 && b == 0.0);
        let (a, b) = mixing_coefficients(PI);
        assert!(a.abs() < 1e-15 && (b + 2f64.sqrt()).abs() < 1e-15);
        let (a, b) = mixing_coefficients(PI / 2.0);
        assert!((a - 1.0).abs() < 1e-15 && (b + 1.0).abs() < 1e-15);
    }

    #[test]
    fn one_photon_energies() {
        let e = sorted_energies(&dressed_one_photon(2.0, 0.0).unwrap());
        assert_eq!(e, vec![-(2f64.sqrt()), 0.0, 2f64.sqrt()]);
        let e = sorted_energies(&dressed_one_photon(2.0, PI / 2.0).unwrap());
        assert!((e[0] + 1.0).abs() < 1e-15 && (e[2] - 1.0).abs() < 1e-15);
        let e = sorted_energies(&dressed_one_photon(2.0, PI).unwrap());
        assert!((e[2] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn out_of_phase_dark_level_is_symmetric_state() {
        let levels = dressed_one_photon(1.0, PI).unwrap();
        let zero = levels.iter().find(|l| l.label == LevelLabel::PsiZero).unwrap();
        // raw closed form gives −|+,0⟩; the stored phase convention flips it
        assert!((zero.amplitude(BareState::Plus(0)) - 1.0).abs() < 1e-15);
        assert!(zero.amplitude(BareState::Minus(0)).abs() < 1e-15);
    }

    #[test]
    fn in_phase_one_photon_states() {
        let levels = dressed_one_photon(1.0, 0.0).unwrap();
        let h = FRAC_1_SQRT_2;
        for level in &levels {
            match level.label {
                LevelLabel::PsiPlus => {
                    assert!((level.amplitude(BareState::Gg(1)) - h).abs() < 1e-15);
                    assert!((level.amplitude(BareState::Plus(0)) - h).abs() < 1e-15);
                }
                LevelLabel::PsiMinus => {
                    assert!((level.amplitude(BareState::Gg(1)) - h).abs() < 1e-15);
                    assert!((level.amplitude(BareState::Plus(0)) + h).abs() < 1e-15);
                }
                LevelLabel::PsiZero => assert!((level.amplitude(BareState::Minus(0)) - 1.0).abs() < 1e-15),
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn two_photon_closed_form_energies() {
        let e = sorted_energies(&dressed_two_photon(1.0, 0.0).unwrap());
        assert!((e[3] - 6f64.sqrt()).abs() < 1e-15 && e[1] == 0.0 && e[2] == 0.0);
        let e = sorted_energies(&dressed_two_photon(1.0, PI).unwrap());
        assert!((e[3] - 6f64.sqrt()).abs() < 1e-14);
        let e = sorted_energies(&dressed_two_photon(1.0, PI / 2.0).unwrap());
        assert!((e[3] - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn closed_forms_are_orthonormal() {
        for phi in PHIS.into_iter().chain([0.3, 1.9, 2.8]) {
            for levels in [dressed_one_photon(1.0, phi).unwrap(), dressed_two_photon(1.0, phi).unwrap()] {
                for (i, a) in levels.iter().enumerate() {
                    assert!((a.norm() - 1.0).abs() < 1e-12);
                    for b in &levels[i + 1..] {
                        assert!(a.overlap(b).abs() < 1e-10);
                    }
                }
            }
            let (a, b) = mixing_coefficients(phi);
            assert!((a * a + b * b - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn one_photon_closed_form_matches_diagonalization() {
        for phi in PHIS {
            let g = 1.7;
            let numeric = numeric_manifold_eigs(&ladder_config(2, g, phi, 3), 1).unwrap();
            let cmp = compare_manifold(&dressed_one_photon(g, phi).unwrap(), &numeric);
            assert!(cmp.energy_error < 1e-10, "phi={phi} {cmp:?}");
            assert!(cmp.projector_error < 1e-10, "phi={phi} {cmp:?}");
        }
    }

    #[test]
    fn two_photon_closed_form_in_phase() {
        let numeric = numeric_manifold_eigs(&ladder_config(2, 1.0, 0.0, 3), 2).unwrap();
        let cmp = compare_manifold(&dressed_two_photon(1.0, 0.0).unwrap(), &numeric);
        assert!(cmp.energy_error < 1e-10 && cmp.projector_error < 1e-10, "{cmp:?}");
    }

    #[test]
    fn two_photon_closed_form_deviates_for_unequal_couplings() {
        // with |g₁| ≠ |g₂| the two-photon block has singular values
        // s² = [3(1+c²) ± √(9(1+c²)² − 8(1−c²)²)]/2 instead of {0, 3(1+c²)}
        let phi = PI / 2.0;
        let numeric = numeric_manifold_eigs(&ladder_config(2, 1.0, phi, 3), 2).unwrap();
        let e = sorted_energies(&numeric);
        let expected = [-(2f64.sqrt()), -1.0, 1.0, 2f64.sqrt()];
        for (x, y) in e.iter().zip(expected) {
            assert!((x - y).abs() < 1e-12, "{e:?}");
        }
        let cmp = compare_manifold(&dressed_two_photon(1.0, phi).unwrap(), &numeric);
        assert!(cmp.energy_error > 0.3);
        // at φ = π energies agree but the closed-form |ee,0⟩ sign does not
        let numeric = numeric_manifold_eigs(&ladder_config(2, 1.0, PI, 3), 2).unwrap();
        let cmp = compare_manifold(&dressed_two_photon(1.0, PI).unwrap(), &numeric);
        assert!(cmp.energy_error < 1e-10);
        assert!(cmp.projector_error > 0.1);
    }

    #[test]
    fn single_atom_jaynes_cummings_ladder() {
        let g = 2.0;
        let cfg = ladder_config(1, g, 0.0, 4);
        for n in 1..=4 {
            let e = sorted_energies(&numeric_manifold_eigs(&cfg, n).unwrap());
            let s = (n as f64).sqrt();
            assert!((e[0] + s).abs() < 1e-12 && (e[1] - s).abs() < 1e-12);
        }
        // two-photon drive resonance Δ = −E/2 = ±√2 g/2
        let e = sorted_energies(&numeric_manifold_eigs(&cfg, 2).unwrap());
        assert!((e[1] * g / 2.0 - 2f64.sqrt() * g / 2.0).abs() < 1e-12);
        assert!(numeric_manifold_eigs(&cfg, 5).is_err());
    }

    #[test]
    fn three_photon_manifold_by_brute_force() {
        // independent 4×4 block in the bare {|gg,3⟩, |eg,2⟩, |ge,2⟩, |ee,1⟩} basis
        let (g1, g2) = (1.0f64, 1.0f64);
        let s3 = 3f64.sqrt();
        let s2 = 2f64.sqrt();
        let block = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0,
                g1 * s3,
                g2 * s3,
                0.0,
                g1 * s3,
                0.0,
                0.0,
                g2 * s2,
                g2 * s3,
                0.0,
                0.0,
                g1 * s2,
                0.0,
                g2 * s2,
                g1 * s2,
                0.0,
            ],
        );
        let mut brute: Vec<f64> = SymmetricEigen::new(block).eigenvalues.iter().copied().collect();
        brute.sort_by(f64::total_cmp);
        let numeric = sorted_energies(&numeric_manifold_eigs(&ladder_config(2, 1.0, 0.0, 3), 3).unwrap());
        for (x, y) in numeric.iter().zip(&brute) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn ground_transition_strengths() {
        let eta = 0.7;
        let ground = ground_level(2);
        for level in dressed_one_photon(1.0, 0.0).unwrap() {
            let s = transition_strength(&ground, &level, eta).unwrap();
            match level.label {
                LevelLabel::PsiPlus | LevelLabel::PsiMinus => assert!((s - eta * eta).abs() < 1e-12),
                _ => assert!(s < 1e-30),
            }
        }
        for level in dressed_one_photon(1.0, PI).unwrap() {
            let s = transition_strength(&ground, &level, eta).unwrap();
            match level.label {
                LevelLabel::PsiZero => assert!((s - 2.0 * eta * eta).abs() < 1e-12),
                _ => assert!(s < 1e-24 * eta * eta),
            }
        }
    }

    #[test]
    fn pump_operator_equals_collective_form() {
        // √2 η (D₊† + D₊) and η Σ(S₊ + S₋) must give identical matrix elements
        let eta = 0.4;
        let layout = HilbertLayout::new(2, 3).unwrap();
        let up = collective_raising(layout, Collective::Symmetric).unwrap();
        let down = collective_lowering(layout, Collective::Symmetric).unwrap();
        let v = (&up + &down).scale(2f64.sqrt() * eta);
        let ground = ground_level(2);
        for phi in [0.0, 1.0, PI / 2.0] {
            for to in dressed_one_photon(1.0, phi).unwrap() {
                let a = ground.composite_vector(layout).unwrap();
                let b = to.composite_vector(layout).unwrap();
                let direct = (b.adjoint() * v.matrix() * a)[(0, 0)].norm_sqr();
                assert!((direct - transition_strength(&ground, &to, eta).unwrap()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn selection_rule_closes_monotonically() {
        let eta = 1.0;
        let ground = ground_level(2);
        let strength = |phi: f64| {
            let levels = dressed_one_photon(1.0, phi).unwrap();
            let plus = levels.iter().find(|l| l.label == LevelLabel::PsiPlus).unwrap();
            transition_strength(&ground, plus, eta).unwrap()
        };
        let samples: Vec<f64> = (0..=50).map(|k| strength(PI / 2.0 + k as f64 * PI / 100.0)).collect();
        assert!(samples.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        assert!(strength(PI) < 1e-24 * eta * eta);
    }

    #[test]
    fn mismatched_bases_rejected() {
        let a = ground_level(1);
        let b = dressed_one_photon(1.0, 0.0).unwrap().remove(0);
        assert!(transition_strength(&a, &b, 1.0).is_err());
        assert!(dressed_one_photon(0.0, 0.0).is_err());
    }

    #[test]
    fn ladder_report_lists_out_of_phase_transitions() {
        let report = ladder_report(2, 1.0, PI, 1.0, 3).unwrap();
        let first: Vec<_> = report.transitions.iter().filter(|t| t.from_manifold == 0).collect();
        // only the zero-energy one-photon level is reachable from the ground state
        assert_eq!(first.len(), 1);
        assert!(first[0].resonance_delta.abs() < 1e-12);
        let text = report.to_string();
        assert!(text.contains("manifold 3"));
    }
}
