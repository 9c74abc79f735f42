//! Truncated Fock space, two-level atoms and their tensor-product embedding.
//!
//! Basis ordering is frozen as `atom1 ⊗ atom2 ⊗ cavity`, with `|g⟩` before
//! `|e⟩` on each atom and Fock levels ascending. The cavity index runs
//! fastest, so a basis index is `atoms * (n_max + 1) + n` where `atoms` reads
//! the atomic configuration as a binary number with atom 1 as the most
//! significant bit and `e = 1`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::{CMatrix, Error, Result, C64};

const MAX_ATOMS: usize = 2;

/// Shape of the composite atom-cavity Hilbert space.
///
/// `n_atoms = 0` is a bare-cavity mode used by the driven-oscillator checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct HilbertLayout {
    n_atoms: usize,
    n_max: usize,
}

/// One element of the product basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisState {
    /// Atomic configuration bits, atom 1 most significant, `1 = excited`.
    pub atoms: usize,
    pub photons: usize,
}

impl HilbertLayout {
    pub fn new(n_atoms: usize, n_max: usize) -> Result<Self> {
        if n_atoms > MAX_ATOMS {
            return Err(Error::Unsupported(format!("n_atoms = {n_atoms}; at most {MAX_ATOMS} atoms are supported")));
        }
        if n_max < 1 {
            return Err(Error::Parameter("n_max must be at least 1".into()));
        }
        Ok(Self { n_atoms, n_max })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn atomic_dim(&self) -> usize {
        1 << self.n_atoms
    }

    pub fn dim(&self) -> usize {
        self.atomic_dim() * self.fock_dim()
    }

    pub fn index(&self, state: BasisState) -> Option<usize> {
        (state.atoms < self.atomic_dim() && state.photons <= self.n_max)
            .then(|| state.atoms * self.fock_dim() + state.photons)
    }

    pub fn state(&self, index: usize) -> Option<BasisState> {
        (index < self.dim()).then(|| BasisState { atoms: index / self.fock_dim(), photons: index % self.fock_dim() })
    }

    /// Whether atom `atom_index` (1-based) is excited in configuration `atoms`.
    pub fn atom_excited(&self, atoms: usize, atom_index: usize) -> bool {
        (atoms >> (self.n_atoms - atom_index)) & 1 == 1
    }

    /// Column vector of the basis state, or `None` if it lies outside the truncation.
    pub fn basis_vector(&self, state: BasisState) -> Option<nalgebra::DVector<C64>> {
        let idx = self.index(state)?;
        let mut v = nalgebra::DVector::zeros(self.dim());
        v[idx] = C64::new(1.0, 0.0);
        Some(v)
    }

    fn check_atom(&self, atom_index: usize) -> Result<()> {
        if atom_index == 0 || atom_index > self.n_atoms {
            return Err(Error::Parameter(format!("atom_index {atom_index} out of range 1..={}", self.n_atoms)));
        }
        Ok(())
    }
}

impl BasisState {
    pub fn new(atoms: usize, photons: usize) -> Self {
        Self { atoms, photons }
    }
}

impl fmt::Display for HilbertLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} atom(s) x Fock 0..={} (dim {})", self.n_atoms, self.n_max, self.dim())
    }
}

/// A dense operator on the composite space of a given layout.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    layout: HilbertLayout,
    matrix: CMatrix,
}

impl OperatorMatrix {
    pub fn from_matrix(layout: HilbertLayout, matrix: CMatrix) -> Result<Self> {
        let d = layout.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Parameter(format!(
                "operator is {}x{}, layout needs {d}x{d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { layout, matrix })
    }

    pub fn zeros(layout: HilbertLayout) -> Self {
        let d = layout.dim();
        Self { layout, matrix: DMatrix::zeros(d, d) }
    }

    pub fn identity(layout: HilbertLayout) -> Self {
        let d = layout.dim();
        Self { layout, matrix: DMatrix::identity(d, d) }
    }

    pub fn layout(&self) -> HilbertLayout {
        self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self { layout: self.layout, matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, factor: impl Into<C64>) -> Self {
        let factor = factor.into();
        Self { layout: self.layout, matrix: &self.matrix * factor }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self * other - other * self
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        self * other + other * self
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.matrix.iter().zip(other.matrix.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// `⟨bra|self|ket⟩` for basis states; `None` if either lies outside the truncation.
    pub fn element(&self, bra: BasisState, ket: BasisState) -> Option<C64> {
        Some(self.matrix[(self.layout.index(bra)?, self.layout.index(ket)?)])
    }

    /// Nonzero entries as `(row, col, value)` in column-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        let d = self.layout.dim();
        let mut out = Vec::new();
        for c in 0..d {
            for r in 0..d {
                let v = self.matrix[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    out.push((r, c, v));
                }
            }
        }
        out
    }
}

fn assert_same_layout(a: &OperatorMatrix, b: &OperatorMatrix) {
    assert_eq!(a.layout, b.layout, "operator layouts differ");
}

impl<'a> Add<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        assert_same_layout(self, rhs);
        OperatorMatrix { layout: self.layout, matrix: &self.matrix + &rhs.matrix }
    }
}

impl Add for OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: OperatorMatrix) -> OperatorMatrix {
        &self + &rhs
    }
}

impl<'a> Sub<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        assert_same_layout(self, rhs);
        OperatorMatrix { layout: self.layout, matrix: &self.matrix - &rhs.matrix }
    }
}

impl Sub for OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: OperatorMatrix) -> OperatorMatrix {
        &self - &rhs
    }
}

impl<'a> Mul<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        assert_same_layout(self, rhs);
        OperatorMatrix { layout: self.layout, matrix: &self.matrix * &rhs.matrix }
    }
}

impl Mul for OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: OperatorMatrix) -> OperatorMatrix {
        &self * &rhs
    }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn two_level_lowering() -> CMatrix {
    // |g⟩ = index 0, |e⟩ = index 1; S₋ = |g⟩⟨e|
    let mut m = DMatrix::zeros(2, 2);
    m[(0, 1)] = c(1.0);
    m
}

fn fock_lowering(n_max: usize) -> CMatrix {
    let mut m = DMatrix::zeros(n_max + 1, n_max + 1);
    for n in 1..=n_max {
        m[(n - 1, n)] = c((n as f64).sqrt());
    }
    m
}

/// Kronecker product of per-atom factors (identity where `None`) with a cavity factor.
fn embed(layout: HilbertLayout, atom_factors: &[Option<CMatrix>], cavity: &CMatrix) -> OperatorMatrix {
    let mut m: CMatrix = DMatrix::identity(1, 1);
    for factor in atom_factors.iter().take(layout.n_atoms) {
        let f = factor.clone().unwrap_or_else(|| DMatrix::identity(2, 2));
        m = m.kronecker(&f);
    }
    OperatorMatrix { layout, matrix: m.kronecker(cavity) }
}

/// Cavity annihilation operator `a` with hard truncation at `n_max`.
pub fn annihilation_op(layout: HilbertLayout) -> OperatorMatrix {
    embed(layout, &[None, None], &fock_lowering(layout.n_max))
}

/// Truncated `a†`; `a†|n_max⟩ = 0`.
pub fn creation_op(layout: HilbertLayout) -> OperatorMatrix {
    annihilation_op(layout).adjoint()
}

pub fn number_op(layout: HilbertLayout) -> OperatorMatrix {
    let a = annihilation_op(layout);
    &a.adjoint() * &a
}

/// `S₋ⁱ = |g⟩⟨e|` on atom `atom_index` (1-based).
pub fn atomic_lowering(layout: HilbertLayout, atom_index: usize) -> Result<OperatorMatrix> {
    layout.check_atom(atom_index)?;
    let mut factors = [None, None];
    factors[atom_index - 1] = Some(two_level_lowering());
    Ok(embed(layout, &factors, &DMatrix::identity(layout.fock_dim(), layout.fock_dim())))
}

pub fn atomic_raising(layout: HilbertLayout, atom_index: usize) -> Result<OperatorMatrix> {
    Ok(atomic_lowering(layout, atom_index)?.adjoint())
}

/// `S_zⁱ = S₊ⁱS₋ⁱ − 1/2`.
pub fn atomic_sz(layout: HilbertLayout, atom_index: usize) -> Result<OperatorMatrix> {
    let lower = atomic_lowering(layout, atom_index)?;
    Ok(&(&lower.adjoint() * &lower) - &OperatorMatrix::identity(layout).scale(0.5))
}

/// Sign selecting the symmetric (`D₊`) or antisymmetric (`D₋`) collective operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Collective {
    Symmetric,
    Antisymmetric,
}

impl Collective {
    fn sign(self) -> f64 {
        match self {
            Collective::Symmetric => 1.0,
            Collective::Antisymmetric => -1.0,
        }
    }
}

/// `D±† = (S₊¹ ± S₊²)/√2`. Requires exactly two atoms.
pub fn collective_raising(layout: HilbertLayout, which: Collective) -> Result<OperatorMatrix> {
    if layout.n_atoms != 2 {
        return Err(Error::Unsupported(format!("collective operators need 2 atoms, layout has {}", layout.n_atoms)));
    }
    let s1 = atomic_raising(layout, 1)?;
    let s2 = atomic_raising(layout, 2)?.scale(which.sign());
    Ok((&s1 + &s2).scale(std::f64::consts::FRAC_1_SQRT_2))
}

pub fn collective_lowering(layout: HilbertLayout, which: Collective) -> Result<OperatorMatrix> {
    Ok(collective_raising(layout, which)?.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;

    const GG: usize = 0b00;
    const GE: usize = 0b01;
    const EG: usize = 0b10;
    const EE: usize = 0b11;

    fn two(n_max: usize) -> HilbertLayout {
        HilbertLayout::new(2, n_max).unwrap()
    }

    fn ket(layout: HilbertLayout, atoms: usize, n: usize) -> nalgebra::DVector<C64> {
        layout.basis_vector(BasisState::new(atoms, n)).unwrap()
    }

    #[test]
    fn layout_dim_and_bijection() {
        for n_atoms in 0..=2 {
            for n_max in 1..5 {
                let l = HilbertLayout::new(n_atoms, n_max).unwrap();
                assert_eq!(l.dim(), (1 << n_atoms) * (n_max + 1));
                for i in 0..l.dim() {
                    assert_eq!(l.index(l.state(i).unwrap()), Some(i));
                }
                assert!(l.state(l.dim()).is_none());
            }
        }
        assert!(HilbertLayout::new(3, 2).is_err());
        assert!(HilbertLayout::new(1, 0).is_err());
    }

    #[test]
    fn bare_cavity_lowering_entries() {
        let l = HilbertLayout::new(0, 2).unwrap();
        let a = annihilation_op(l);
        let m = a.matrix();
        let mut expected = DMatrix::<C64>::zeros(3, 3);
        expected[(0, 1)] = c(1.0);
        expected[(1, 2)] = c(2f64.sqrt());
        assert_eq!(*m, expected);
    }

    #[test]
    fn number_operator_on_fock_state() {
        let l = two(4);
        let n = number_op(l);
        let v = ket(l, GG, 3);
        let out = n.matrix() * &v;
        assert!((out - v * c(3.0)).camax() < 1e-14);
    }

    #[test]
    fn truncated_commutator_is_identity_below_top_level() {
        let l = HilbertLayout::new(1, 5).unwrap();
        let a = annihilation_op(l);
        let comm = a.commutator(&a.adjoint());
        for i in 0..l.dim() {
            let s = l.state(i).unwrap();
            let diag = comm.matrix()[(i, i)];
            if s.photons < l.n_max() {
                assert!((diag - c(1.0)).norm() < 1e-14);
            } else {
                // [a, a†] = -n_max on the top level under hard truncation
                assert!((diag - c(-(l.n_max() as f64))).norm() < 1e-14);
            }
        }
        let off = comm.matrix().iter().enumerate().filter(|(k, _)| k % (l.dim() + 1) != 0);
        assert!(off.map(|(_, z)| z.norm()).fold(0.0, f64::max) < 1e-14);
    }

    #[test]
    fn lowering_is_superdiagonal_in_fock_index() {
        let l = two(4);
        let a = annihilation_op(l);
        for (r, col, v) in a.triplets() {
            let (sr, sc) = (l.state(r).unwrap(), l.state(col).unwrap());
            assert_eq!(sr.atoms, sc.atoms);
            assert_eq!(sr.photons + 1, sc.photons);
            assert!((v.norm() - (sc.photons as f64).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn atomic_lowering_acts_on_one_atom() {
        let l = two(2);
        let s1 = atomic_lowering(l, 1).unwrap();
        let out = s1.matrix() * ket(l, EG, 0);
        assert!((out - ket(l, GG, 0)).camax() < 1e-15);
        // atom 1 already in g
        assert!((s1.matrix() * ket(l, GE, 1)).camax() < 1e-15);
        assert!(atomic_lowering(l, 0).is_err());
        assert!(atomic_lowering(l, 3).is_err());
    }

    #[test]
    fn atomic_operators_nilpotent_and_complete() {
        let l = two(2);
        let id = OperatorMatrix::identity(l);
        for i in 1..=2 {
            let m = atomic_lowering(l, i).unwrap();
            let p = m.adjoint();
            assert_eq!((&m * &m).max_abs(), 0.0);
            assert!((&(&p * &m) + &(&m * &p)).max_abs_diff(&id) < 1e-15);
            let sz = atomic_sz(l, i).unwrap();
            assert!(sz.hermiticity_error() == 0.0);
        }
    }

    #[test]
    fn distinct_atoms_commute() {
        let l = two(3);
        let p1 = atomic_raising(l, 1).unwrap();
        let m2 = atomic_lowering(l, 2).unwrap();
        assert_eq!(p1.commutator(&m2).max_abs(), 0.0);
        let a = annihilation_op(l);
        assert_eq!(a.commutator(&p1).max_abs(), 0.0);
        assert_eq!(a.commutator(&m2).max_abs(), 0.0);
    }

    #[test]
    fn collective_states() {
        let l = two(2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = (ket(l, EG, 0) + ket(l, GE, 0)) * c(h);
        let minus = (ket(l, EG, 0) - ket(l, GE, 0)) * c(h);
        let dp = collective_raising(l, Collective::Symmetric).unwrap();
        let dm = collective_raising(l, Collective::Antisymmetric).unwrap();
        assert!((dp.matrix() * ket(l, GG, 0) - &plus).camax() < 1e-15);
        assert!((dm.matrix() * ket(l, GG, 0) - &minus).camax() < 1e-15);
        let amp = (ket(l, EE, 0).adjoint() * dp.matrix() * &plus)[(0, 0)];
        assert!((amp - c(1.0)).norm() < 1e-15);
        // the antisymmetric state is dark to the symmetric raising operator
        assert!((dp.matrix() * &minus).camax() < 1e-15);
        assert!(collective_raising(HilbertLayout::new(1, 2).unwrap(), Collective::Symmetric).is_err());
    }

    #[test]
    fn adjoint_is_involution() {
        let l = two(3);
        let ops = [
            annihilation_op(l),
            atomic_lowering(l, 2).unwrap(),
            collective_raising(l, Collective::Antisymmetric).unwrap(),
        ];
        for op in ops {
            assert_eq!(op.adjoint().adjoint(), op);
        }
    }
}
