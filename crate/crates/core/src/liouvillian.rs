//! Lindblad superoperator, stationary state and a time-stepping cross-check.
//!
//! Density matrices are vectorized column-major, `vec(ρ)[i + D j] = ρ[i, j]`,
//! which matches nalgebra's storage order. With that convention
//!
//! ```text
//! L = −i(I⊗H − Hᵀ⊗I) + Σ_k [ C̄_k⊗C_k − ½(I⊗C_k†C_k + (C_k†C_k)ᵀ⊗I) ]
//! ```
//!
//! The stationary state replaces the `ρ₀₀` row of `L` with the trace
//! functional and solves the bordered system with a sparse LU.

use std::sync::Once;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::hilbert::{BasisState, HilbertLayout, OperatorMatrix};
use crate::{CMatrix, Error, Result, C64};

/// Largest accepted `‖L vec(ρ)‖∞` for a stationary state.
pub const SOLVER_RESIDUAL_TOL: f64 = 1e-10;
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues in `(−PSD_TOL, 0)` are solver noise; below that is a hard error.
pub const PSD_TOL: f64 = 1e-8;
/// Largest trace drift tolerated by [`evolve_to_steady`].
pub const TRACE_DRIFT_TOL: f64 = 1e-8;

/// Inverse-norm estimate above which the bordered system is treated as singular.
const SINGULAR_GROWTH: f64 = 1e12;
/// Null-space dimension is only measured by dense SVD up to this superoperator size.
const NULLITY_SVD_MAX: usize = 1024;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Hermitian, unit-trace state of the composite system.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    layout: HilbertLayout,
    matrix: CMatrix,
}

/// Numerical health of a density matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StateDiagnostics {
    pub hermiticity: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
    pub purity: f64,
}

impl DensityMatrix {
    pub fn from_matrix(layout: HilbertLayout, matrix: CMatrix) -> Result<Self> {
        let d = layout.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Parameter(format!(
                "density matrix is {}x{}, layout needs {d}x{d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { layout, matrix })
    }

    /// `|state⟩⟨state|`.
    pub fn pure(layout: HilbertLayout, state: BasisState) -> Result<Self> {
        let idx = layout.index(state).ok_or_else(|| Error::Parameter(format!("{state:?} outside {layout}")))?;
        let d = layout.dim();
        let mut m = DMatrix::zeros(d, d);
        m[(idx, idx)] = ONE;
        Ok(Self { layout, matrix: m })
    }

    /// All atoms in `|g⟩`, cavity in vacuum.
    pub fn ground(layout: HilbertLayout) -> Self {
        Self::pure(layout, BasisState::new(0, 0)).expect("ground state is always in range")
    }

    pub fn layout(&self) -> HilbertLayout {
        self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ_ij ρ_ij ρ_ji = Σ_ij |ρ_ij|² for Hermitian ρ
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.layout.dim();
        let mut worst = 0.0f64;
        for j in 0..d {
            for i in 0..=j {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(hermitian_part(&self.matrix)).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    pub fn diagnostics(&self) -> StateDiagnostics {
        StateDiagnostics {
            hermiticity: self.hermiticity_error(),
            trace_error: (self.trace() - ONE).norm(),
            min_eigenvalue: self.eigenvalues().first().copied().unwrap_or(0.0),
            purity: self.purity(),
        }
    }

    /// Checks the density-matrix invariants and returns the measured diagnostics.
    pub fn validate(&self) -> Result<StateDiagnostics> {
        let diag = self.diagnostics();
        if diag.hermiticity >= HERMITICITY_TOL {
            return Err(Error::Parameter(format!(
                "density matrix not Hermitian (max |ρ − ρ†| = {:e})",
                diag.hermiticity
            )));
        }
        if diag.trace_error >= TRACE_TOL {
            return Err(Error::Parameter(format!("density matrix trace off by {:e}", diag.trace_error)));
        }
        if diag.min_eigenvalue <= -PSD_TOL {
            return Err(Error::NotPositive { min_eigenvalue: diag.min_eigenvalue });
        }
        Ok(diag)
    }

    pub fn vectorize(&self) -> Vec<C64> {
        self.matrix.as_slice().to_vec()
    }
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// `½ Σ |λᵢ(a − b)|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let diff = hermitian_part(&(&a.matrix - &b.matrix));
    0.5 * SymmetricEigen::new(diff).eigenvalues.iter().map(|x| x.abs()).sum::<f64>()
}

/// Row-compressed superoperator acting on column-major `vec(ρ)`.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    layout: HilbertLayout,
    size: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl Liouvillian {
    fn from_triplets(layout: HilbertLayout, mut entries: Vec<(usize, usize, C64)>) -> Self {
        let size = layout.dim() * layout.dim();
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        // entries that cancelled exactly are dropped
        merged.retain(|&(_, _, v)| v != ZERO);
        let mut row_ptr = vec![0usize; size + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for i in 0..size {
            row_ptr[i + 1] += row_ptr[i];
        }
        let (col_idx, values) = merged.into_iter().map(|(_, c, v)| (c, v)).unzip();
        Self { layout, size, row_ptr, col_idx, values }
    }

    pub fn layout(&self) -> HilbertLayout {
        self.layout
    }

    /// Side of the superoperator, `D²`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Nonzero entries `(row, col, value)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.size).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.size, "vector length does not match Liouvillian");
        (0..self.size)
            .map(|r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(|k| self.values[k] * v[self.col_idx[k]]).sum())
            .collect()
    }

    /// `L` applied to a density matrix, returned as a `D×D` matrix.
    pub fn apply_to(&self, rho: &CMatrix) -> CMatrix {
        let d = self.layout.dim();
        DMatrix::from_column_slice(d, d, &self.apply(rho.as_slice()))
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = DMatrix::zeros(self.size, self.size);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    /// `max_col |Σ_k L[k(D+1), col]|`, the violation of trace preservation.
    pub fn trace_leak(&self) -> f64 {
        let d = self.layout.dim();
        let mut col_sums = vec![ZERO; self.size];
        for k in 0..d {
            let r = k * (d + 1);
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                col_sums[self.col_idx[idx]] += self.values[idx];
            }
        }
        col_sums.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `‖L vec(ρ)‖∞`.
    pub fn residual(&self, rho: &DensityMatrix) -> f64 {
        self.apply(rho.matrix.as_slice()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn check_layouts(h: &OperatorMatrix, collapse: &[OperatorMatrix]) -> Result<()> {
    if let Some(c) = collapse.iter().find(|c| c.layout() != h.layout()) {
        return Err(Error::Parameter(format!(
            "collapse operator on {} does not match Hamiltonian on {}",
            c.layout(),
            h.layout()
        )));
    }
    Ok(())
}

/// Assembles the Lindblad generator for `H` and collapse operators `C_k`.
pub fn build_liouvillian(h: &OperatorMatrix, collapse: &[OperatorMatrix]) -> Result<Liouvillian> {
    check_layouts(h, collapse)?;
    let layout = h.layout();
    let d = layout.dim();
    let mut entries = Vec::new();

    // I⊗X contributes (i + Dj, k + Dj, x); Xᵀ⊗I contributes (q D + i, p D + i, x)
    let left = |entries: &mut Vec<(usize, usize, C64)>, x: &OperatorMatrix, scale: C64| {
        for (p, q, v) in x.triplets() {
            for j in 0..d {
                entries.push((p + d * j, q + d * j, scale * v));
            }
        }
    };
    let right = |entries: &mut Vec<(usize, usize, C64)>, x: &OperatorMatrix, scale: C64| {
        for (p, q, v) in x.triplets() {
            for i in 0..d {
                entries.push((q * d + i, p * d + i, scale * v));
            }
        }
    };

    left(&mut entries, h, -I);
    right(&mut entries, h, I);
    for c in collapse {
        let c_trip = c.triplets();
        for &(p, q, u) in &c_trip {
            for &(r, s, v) in &c_trip {
                entries.push((p * d + r, q * d + s, u.conj() * v));
            }
        }
        let cdc = &c.adjoint() * c;
        left(&mut entries, &cdc, C64::new(-0.5, 0.0));
        right(&mut entries, &cdc, C64::new(-0.5, 0.0));
    }
    Ok(Liouvillian::from_triplets(layout, entries))
}

/// Stationary state with its residual and state diagnostics.
#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// `‖L vec(ρ)‖∞` after Hermitian projection and renormalization.
    pub residual: f64,
    pub diagnostics: StateDiagnostics,
}

fn sequential_faer() {
    static INIT: Once = Once::new();
    INIT.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

/// Bordered system `A`: `L` with the `ρ₀₀` row replaced by the trace functional.
fn bordered(l: &Liouvillian) -> Vec<(usize, usize, C64)> {
    let d = l.layout.dim();
    let mut out: Vec<_> = l.entries().filter(|&(r, _, _)| r != 0).collect();
    out.extend((0..d).map(|k| (0, k * (d + 1), ONE)));
    out
}

fn bordered_apply(l: &Liouvillian, x: &[C64]) -> Vec<C64> {
    let d = l.layout.dim();
    let mut y = l.apply(x);
    y[0] = (0..d).map(|k| x[k * (d + 1)]).sum();
    y
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Number of (numerically) zero singular values of `L`, if small enough to measure.
pub fn null_space_dimension(l: &Liouvillian) -> Option<usize> {
    if l.size > NULLITY_SVD_MAX {
        return None;
    }
    let sv = l.to_dense().singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max).max(1.0);
    Some(sv.iter().filter(|&&s| s < 1e-9 * top).count())
}

fn degenerate(l: &Liouvillian) -> Error {
    Error::DegenerateSteadyState { null_dim: null_space_dimension(l) }
}

/// Solves `L vec(ρ) = 0` with `tr ρ = 1`.
///
/// Refuses degenerate generators instead of picking one stationary state.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyState> {
    sequential_faer();
    let n = l.size;
    let d = l.layout.dim();
    let triplets: Vec<Triplet<usize, usize, C64>> =
        bordered(l).into_iter().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
    let a = SparseColMat::<usize, C64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::Parameter(format!("sparse assembly failed: {e:?}")))?;
    let lu = a.sp_lu().map_err(|_| degenerate(l))?;

    let solve = |rhs: &[C64]| -> Vec<C64> {
        let mut m = Mat::<C64>::from_fn(n, 1, |i, _| rhs[i]);
        lu.solve_in_place(m.as_mut());
        (0..n).map(|i| m[(i, 0)]).collect()
    };

    let mut b = vec![ZERO; n];
    b[0] = ONE;
    let mut x = solve(&b);
    // one step of iterative refinement
    let r: Vec<C64> = bordered_apply(l, &x).iter().zip(&b).map(|(ax, bi)| bi - ax).collect();
    let dx = solve(&r);
    x.iter_mut().zip(&dx).for_each(|(xi, di)| *xi += di);

    // inverse-norm probe: a singular bordered system amplifies a generic vector enormously
    let probe: Vec<C64> = (0..n).map(|k| C64::new(((k + 1) as f64).sin(), 0.0)).collect();
    let growth = max_norm(&solve(&probe)) / max_norm(&probe);
    if !growth.is_finite() || growth > SINGULAR_GROWTH || x.iter().any(|z| !z.is_finite()) {
        return Err(degenerate(l));
    }

    let raw = DMatrix::from_column_slice(d, d, &x);
    let mut m = hermitian_part(&raw);
    let tr = m.trace().re;
    m /= C64::new(tr, 0.0);
    let rho = DensityMatrix { layout: l.layout, matrix: m };
    let residual = l.residual(&rho);
    if residual.is_nan() || residual >= SOLVER_RESIDUAL_TOL {
        return Err(Error::NonConvergence { residual });
    }
    let diagnostics = rho.validate()?;
    Ok(SteadyState { rho, residual, diagnostics })
}

/// Right-hand side of the master equation evaluated directly on `ρ`:
/// `−i[H, ρ] + Σ_k (C_k ρ C_k† − ½{C_k†C_k, ρ})`.
pub fn lindblad_rhs(h: &OperatorMatrix, collapse: &[OperatorMatrix], rho: &CMatrix) -> CMatrix {
    let hm = h.matrix();
    let mut out = (hm * rho - rho * hm) * (-I);
    for c in collapse {
        let cm = c.matrix();
        let cdc = cm.adjoint() * cm;
        out += cm * rho * cm.adjoint() - (&cdc * rho + rho * &cdc) * C64::new(0.5, 0.0);
    }
    out
}

/// Sparse row lists of a `D×D` operator, for cheap operator-matrix products.
struct SparseOp {
    entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    fn new(op: &CMatrix) -> Self {
        let mut entries = Vec::new();
        for c in 0..op.ncols() {
            for r in 0..op.nrows() {
                if op[(r, c)] != ZERO {
                    entries.push((r, c, op[(r, c)]));
                }
            }
        }
        Self { entries }
    }

    /// `out += scale · X ρ`
    fn left_into(&self, rho: &CMatrix, scale: C64, out: &mut CMatrix) {
        let d = rho.ncols();
        for &(i, k, x) in &self.entries {
            let f = scale * x;
            for j in 0..d {
                out[(i, j)] += f * rho[(k, j)];
            }
        }
    }

    /// `out += scale · ρ X`
    fn right_into(&self, rho: &CMatrix, scale: C64, out: &mut CMatrix) {
        let d = rho.nrows();
        for &(k, j, y) in &self.entries {
            let f = scale * y;
            for i in 0..d {
                out[(i, j)] += f * rho[(i, k)];
            }
        }
    }
}

/// Operator-form generator: `−i(H_eff ρ − ρ H_eff†) + Σ C ρ C†`.
struct MasterEquation {
    h_eff: SparseOp,
    h_eff_dag: SparseOp,
    jumps: Vec<(SparseOp, SparseOp)>,
}

impl MasterEquation {
    fn new(h: &OperatorMatrix, collapse: &[OperatorMatrix]) -> Self {
        let mut h_eff = h.matrix().clone();
        for c in collapse {
            let cm = c.matrix();
            h_eff -= cm.adjoint() * cm * C64::new(0.0, 0.5);
        }
        Self {
            h_eff_dag: SparseOp::new(&h_eff.adjoint()),
            h_eff: SparseOp::new(&h_eff),
            jumps: collapse.iter().map(|c| (SparseOp::new(c.matrix()), SparseOp::new(&c.matrix().adjoint()))).collect(),
        }
    }

    fn rhs(&self, rho: &CMatrix, scratch: &mut CMatrix) -> CMatrix {
        let d = rho.nrows();
        let mut out = DMatrix::zeros(d, d);
        self.h_eff.left_into(rho, -I, &mut out);
        self.h_eff_dag.right_into(rho, I, &mut out);
        for (c, c_dag) in &self.jumps {
            scratch.fill(ZERO);
            c.left_into(rho, ONE, scratch);
            c_dag.right_into(scratch, ONE, &mut out);
        }
        out
    }
}

/// Integrates the master equation from `rho0` with fixed-step RK4 and returns `ρ(t_final)`.
///
/// The step is shrunk so that an integer number of steps lands on `t_final`.
pub fn evolve_to_steady(
    h: &OperatorMatrix,
    collapse: &[OperatorMatrix],
    rho0: &DensityMatrix,
    t_final: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    check_layouts(h, collapse)?;
    if rho0.layout != h.layout() {
        return Err(Error::Parameter("initial state layout does not match Hamiltonian".into()));
    }
    if !(dt > 0.0 && t_final >= 0.0 && dt.is_finite() && t_final.is_finite()) {
        return Err(Error::Parameter(format!("invalid time grid t_final={t_final}, dt={dt}")));
    }
    let eq = MasterEquation::new(h, collapse);
    let steps = (t_final / dt).ceil() as usize;
    let d = rho0.layout.dim();
    let mut rho = rho0.matrix.clone();
    if steps == 0 {
        return Ok(rho0.clone());
    }
    let step = C64::new(t_final / steps as f64, 0.0);
    let half = step * 0.5;
    let sixth = step / 6.0;
    let two = C64::new(2.0, 0.0);
    let mut scratch = DMatrix::zeros(d, d);
    let tr0 = rho0.trace();
    for _ in 0..steps {
        let k1 = eq.rhs(&rho, &mut scratch);
        let k2 = eq.rhs(&(&rho + &k1 * half), &mut scratch);
        let k3 = eq.rhs(&(&rho + &k2 * half), &mut scratch);
        let k4 = eq.rhs(&(&rho + &k3 * step), &mut scratch);
        rho += (k1 + k2 * two + k3 * two + k4) * sixth;
    }
    let drift = (rho.trace() - tr0).norm();
    if drift.is_nan() || drift >= TRACE_DRIFT_TOL {
        return Err(Error::TraceDrift { drift: if drift.is_finite() { drift } else { f64::INFINITY } });
    }
    Ok(DensityMatrix { layout: rho0.layout, matrix: rho })
}

/// A conservative RK4 step for the given generator: half the inverse of a
/// Gershgorin bound on the spectral radius of `L`.
pub fn suggested_step(h: &OperatorMatrix, collapse: &[OperatorMatrix]) -> f64 {
    let row_bound =
        |m: &CMatrix| (0..m.nrows()).map(|r| m.row(r).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let mut bound = 2.0 * row_bound(h.matrix());
    for c in collapse {
        let cm = c.matrix();
        let n = row_bound(cm);
        bound += 2.0 * n * n;
    }
    if bound > 0.0 {
        0.5 / bound
    } else {
        1.0
    }
}
