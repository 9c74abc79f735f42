//! Detuning sweeps, truncation convergence and peak finding.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::liouvillian::{build_liouvillian, steady_state, StateDiagnostics};
use crate::model::{collapse_operators, HamiltonianParts, SystemConfig};
use crate::observables::photon_statistics;
use crate::{Error, Result};

/// Relative tolerance of the `±Δ` mirror-symmetry check.
pub const MIRROR_TOL: f64 = 1e-6;
/// Relative change between truncation levels accepted as converged.
pub const CONVERGENCE_TOL: f64 = 1e-3;
/// Points in the coarse scan that locates the most populated operating point.
pub const PRESCAN_POINTS: usize = 41;
/// Half-width of the default grid in units of `√2 g`.
pub const DEFAULT_SPAN: f64 = 2.5;
pub const DEFAULT_POINTS: usize = 201;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSpec {
    pub base: SystemConfig,
    pub delta_min: f64,
    pub delta_max: f64,
    pub n_points: usize,
    /// Sets `Δ_A = Δ_c = Δ` at every point. When false only `Δ_c` follows
    /// the grid and `Δ_A` keeps its base value.
    pub lock_detunings: bool,
}

impl SweepSpec {
    /// 201 points over `±2.5·√2·g`, detunings locked.
    pub fn default_for(base: SystemConfig) -> Self {
        let scale = if base.g > 0.0 { base.g } else { base.kappa };
        let half = DEFAULT_SPAN * std::f64::consts::SQRT_2 * scale;
        Self { base, delta_min: -half, delta_max: half, n_points: DEFAULT_POINTS, lock_detunings: true }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if !(self.delta_min.is_finite() && self.delta_max.is_finite()) {
            return Err(Error::Config { key: "delta-min".into(), message: "bounds must be finite".into() });
        }
        if self.delta_min >= self.delta_max {
            return Err(Error::Config {
                key: "delta-max".into(),
                message: format!("must exceed delta-min ({} >= {})", self.delta_min, self.delta_max),
            });
        }
        if self.n_points < 2 {
            return Err(Error::Config { key: "points".into(), message: "need at least 2 points".into() });
        }
        Ok(())
    }

    /// Uniform grid from `delta_min` to `delta_max` inclusive.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.n_points;
        let span = self.delta_max - self.delta_min;
        (0..n)
            .map(|i| if i + 1 == n { self.delta_max } else { self.delta_min + span * i as f64 / (n - 1) as f64 })
            .collect()
    }

    fn config_at(&self, delta: f64) -> SystemConfig {
        let mut c = self.base.clone();
        c.delta_c = delta;
        if self.lock_detunings {
            c.delta_a = delta;
        }
        c
    }

    fn with_n_max(&self, n_max: usize) -> Self {
        Self { base: SystemConfig { n_max, ..self.base.clone() }, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub mean_n: f64,
    pub g2: f64,
    pub g2_reliable: bool,
    pub g3: f64,
    pub g3_reliable: bool,
    pub purity: f64,
    pub residual: f64,
    pub diagnostics: Option<StateDiagnostics>,
    /// Set when the steady-state solve failed; the numeric fields are NaN.
    pub failure: Option<String>,
}

impl SweepRow {
    fn failed(delta: f64, reason: String) -> Self {
        Self {
            delta,
            mean_n: f64::NAN,
            g2: f64::NAN,
            g2_reliable: false,
            g3: f64::NAN,
            g3_reliable: false,
            purity: f64::NAN,
            residual: f64::NAN,
            diagnostics: None,
            failure: Some(reason),
        }
    }

    pub fn observable(&self, name: &str) -> Result<f64> {
        match name {
            "mean_n" => Ok(self.mean_n),
            "g2" => Ok(self.g2),
            "g3" => Ok(self.g3),
            "purity" => Ok(self.purity),
            other => Err(Error::UnknownObservable(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepMeta {
    pub config: SystemConfig,
    pub n_max: usize,
    pub delta_min: f64,
    pub delta_max: f64,
    pub n_points: usize,
    pub lock_detunings: bool,
    pub workers: usize,
    pub failed_rows: usize,
    pub mirror_warnings: Vec<String>,
    pub preset: Option<String>,
    pub assumptions: Vec<String>,
    /// Wall-clock seconds; `None` when timing is suppressed.
    pub elapsed_seconds: Option<f64>,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub meta: SweepMeta,
}

/// Shared per-sweep operators; each grid point only adds detuning terms.
struct Solver {
    parts: HamiltonianParts,
    collapse: Vec<crate::OperatorMatrix>,
}

impl Solver {
    fn new(config: &SystemConfig) -> Result<Self> {
        Ok(Self { parts: HamiltonianParts::new(config)?, collapse: collapse_operators(config)? })
    }

    fn row(&self, spec: &SweepSpec, delta: f64) -> SweepRow {
        let c = spec.config_at(delta);
        let h = self.parts.at(c.delta_a, c.delta_c);
        let solved = build_liouvillian(&h, &self.collapse).and_then(|l| steady_state(&l));
        match solved {
            Ok(ss) => {
                let stats = photon_statistics(&ss.rho);
                SweepRow {
                    delta,
                    mean_n: stats.mean_n,
                    g2: stats.g2.value,
                    g2_reliable: stats.g2.reliable,
                    g3: stats.g3.value,
                    g3_reliable: stats.g3.reliable,
                    purity: stats.purity,
                    residual: ss.residual,
                    diagnostics: Some(ss.diagnostics),
                    failure: None,
                }
            }
            Err(e) => SweepRow::failed(delta, e.to_string()),
        }
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn mirror_warnings(spec: &SweepSpec, rows: &[SweepRow]) -> Vec<String> {
    let symmetric = (spec.delta_min + spec.delta_max).abs() <= 1e-12 * spec.delta_max.abs();
    if !(spec.lock_detunings && symmetric) {
        return Vec::new();
    }
    let n = rows.len();
    let mut out = Vec::new();
    for i in 0..n / 2 {
        let (lo, hi) = (&rows[i], &rows[n - 1 - i]);
        if lo.failure.is_some() || hi.failure.is_some() {
            continue;
        }
        let mut checks = vec![("mean_n", lo.mean_n, hi.mean_n)];
        if lo.g2_reliable && hi.g2_reliable {
            checks.push(("g2", lo.g2, hi.g2));
        }
        if lo.g3_reliable && hi.g3_reliable {
            checks.push(("g3", lo.g3, hi.g3));
        }
        for (name, a, b) in checks {
            let gap = relative_gap(a, b);
            if gap > MIRROR_TOL {
                out.push(format!("{name} differs at ±{:.6}: relative gap {gap:.3e}", hi.delta));
            }
        }
    }
    out
}

/// `Instant` is unavailable on bare wasm32.
fn clock() -> Option<Instant> {
    if cfg!(all(target_arch = "wasm32", target_os = "unknown")) {
        None
    } else {
        Some(Instant::now())
    }
}

/// Solves the steady state at every grid point.
///
/// `workers = 1` runs serially; any other value uses a thread pool of that
/// size (0 picks the number of CPUs). Rows keep grid order and are
/// identical for every worker count. Failed points are recorded in the row
/// rather than aborting the sweep.
pub fn sweep_detuning(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    spec.validate()?;
    let start = clock();
    let solver = Solver::new(&spec.base)?;
    let grid = spec.grid();
    let rows: Vec<SweepRow> = if workers == 1 {
        grid.iter().map(|&d| solver.row(spec, d)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
        pool.install(|| grid.par_iter().map(|&d| solver.row(spec, d)).collect())
    };
    let mirror = mirror_warnings(spec, &rows);
    let meta = SweepMeta {
        config: spec.base.clone(),
        n_max: spec.base.n_max,
        delta_min: spec.delta_min,
        delta_max: spec.delta_max,
        n_points: spec.n_points,
        lock_detunings: spec.lock_detunings,
        workers,
        failed_rows: rows.iter().filter(|r| r.failure.is_some()).count(),
        mirror_warnings: mirror,
        preset: None,
        assumptions: Vec::new(),
        elapsed_seconds: start.map(|t| t.elapsed().as_secs_f64()),
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    Ok(SweepResult { rows, meta })
}

/// Steady-state statistics at a single detuning.
pub fn solve_point(config: &SystemConfig, delta: f64, lock_detunings: bool) -> SweepRow {
    let spec =
        SweepSpec { base: config.clone(), delta_min: delta, delta_max: delta + 1.0, n_points: 2, lock_detunings };
    match Solver::new(config) {
        Ok(s) => s.row(&spec, delta),
        Err(e) => SweepRow::failed(delta, e.to_string()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceLevel {
    pub n_max: usize,
    pub mean_n: f64,
    pub g2: f64,
    pub g3: f64,
    /// Largest relative change of the compared observables versus the next level.
    pub change_to_next: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub delta: f64,
    pub chosen_n_max: usize,
    pub levels: Vec<ConvergenceLevel>,
}

/// Picks the smallest truncation whose statistics at the most populated
/// operating point change by less than [`CONVERGENCE_TOL`] relative to the
/// next level in `n_max_list`.
///
/// The operating point is found by a coarse scan at the largest truncation.
/// `g2` and `g3` only enter the comparison where they are reliable.
pub fn convergence_check(spec: &SweepSpec, n_max_list: &[usize]) -> Result<ConvergenceReport> {
    spec.validate()?;
    if n_max_list.len() < 2 {
        return Err(Error::Parameter("convergence check needs at least two truncation levels".into()));
    }
    if n_max_list.windows(2).any(|w| w[0] >= w[1]) || n_max_list[0] < 1 {
        return Err(Error::Parameter(format!("truncation levels must be ascending and >= 1: {n_max_list:?}")));
    }
    let top = *n_max_list.last().expect("non-empty");
    let coarse = SweepSpec { n_points: PRESCAN_POINTS.min(spec.n_points).max(2), ..spec.with_n_max(top) };
    let scan = sweep_detuning(&coarse, 1)?;
    let best = scan
        .rows
        .iter()
        .filter(|r| r.failure.is_none())
        .max_by(|a, b| a.mean_n.total_cmp(&b.mean_n))
        .ok_or_else(|| Error::NotConverged { levels: n_max_list.to_vec() })?;
    let delta = best.delta;

    let rows: Vec<SweepRow> =
        n_max_list.iter().map(|&n| solve_point(&spec.with_n_max(n).base, delta, spec.lock_detunings)).collect();
    if let Some(failed) = rows.iter().find(|r| r.failure.is_some()) {
        return Err(Error::Parameter(format!(
            "solve failed during convergence check: {}",
            failed.failure.as_deref().unwrap_or_default()
        )));
    }
    let mut levels: Vec<ConvergenceLevel> = n_max_list
        .iter()
        .zip(&rows)
        .map(|(&n_max, r)| ConvergenceLevel { n_max, mean_n: r.mean_n, g2: r.g2, g3: r.g3, change_to_next: None })
        .collect();
    for i in 0..rows.len() - 1 {
        let (a, b) = (&rows[i], &rows[i + 1]);
        let mut change = relative_gap(a.mean_n, b.mean_n);
        if a.g2_reliable && b.g2_reliable {
            change = change.max(relative_gap(a.g2, b.g2));
        }
        if a.g3_reliable && b.g3_reliable {
            change = change.max(relative_gap(a.g3, b.g3));
        }
        levels[i].change_to_next = Some(change);
    }
    let chosen = levels
        .iter()
        .find(|l| l.change_to_next.is_some_and(|c| c < CONVERGENCE_TOL))
        .map(|l| l.n_max)
        .ok_or_else(|| Error::NotConverged { levels: n_max_list.to_vec() })?;
    Ok(ConvergenceReport { delta, chosen_n_max: chosen, levels })
}

/// A local maximum of a sweep observable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Extremum {
    pub delta: f64,
    pub value: f64,
}

/// Strict local maxima of `observable` with parabolic sub-grid refinement.
///
/// Rows that failed or that carry an unreliable correlation are skipped as
/// centre points.
pub fn locate_extrema(result: &SweepResult, observable: &str) -> Result<Vec<Extremum>> {
    if result.rows.len() < 3 {
        return Err(Error::Parameter(format!("need at least 3 rows, got {}", result.rows.len())));
    }
    let values = result.rows.iter().map(|r| r.observable(observable)).collect::<Result<Vec<_>>>()?;
    let usable = |r: &SweepRow| {
        r.failure.is_none()
            && match observable {
                "g2" => r.g2_reliable,
                "g3" => r.g3_reliable,
                _ => true,
            }
    };
    let mut out = Vec::new();
    for i in 1..values.len() - 1 {
        let (l, c, r) = (values[i - 1], values[i], values[i + 1]);
        if !(usable(&result.rows[i]) && c > l && c > r) {
            continue;
        }
        let (x0, x1, x2) = (result.rows[i - 1].delta, result.rows[i].delta, result.rows[i + 1].delta);
        // vertex of the parabola through three points (non-uniform spacing allowed)
        let d01 = (c - l) / (x1 - x0);
        let d12 = (r - c) / (x2 - x1);
        let curvature = (d12 - d01) / (x2 - x0);
        let (delta, value) = if curvature < 0.0 {
            let xv = (0.5 * (x0 + x1) - d01 / (2.0 * curvature)).clamp(x0, x2);
            (xv, l + d01 * (xv - x0) + curvature * (xv - x0) * (xv - x1))
        } else {
            (x1, c)
        };
        out.push(Extremum { delta, value });
    }
    Ok(out)
}

/// Twelve significant digits in plain decimal notation.
pub fn format_sig12(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0.00000000000".into();
    }
    let sci = format!("{:.11e}", v.abs());
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if v < 0.0 { "-" } else { "" };
    let body = if exp < 0 {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    } else {
        let int_len = exp as usize + 1;
        if int_len >= digits.len() {
            format!("{}{}", digits, "0".repeat(int_len - digits.len()))
        } else {
            format!("{}.{}", &digits[..int_len], &digits[int_len..])
        }
    };
    format!("{sign}{body}")
}

pub const CSV_HEADER: &str = "delta,mean_n,g2,g2_reliable,g3,g3_reliable,purity,residual";

pub fn to_csv(result: &SweepResult) -> String {
    let mut out = String::with_capacity(128 * (result.rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &result.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            format_sig12(r.delta),
            format_sig12(r.mean_n),
            format_sig12(r.g2),
            r.g2_reliable,
            format_sig12(r.g3),
            r.g3_reliable,
            format_sig12(r.purity),
            format_sig12(r.residual)
        );
    }
    out
}

/// Full result as pretty JSON; non-finite numbers become `null`.
pub fn to_json(result: &SweepResult) -> String {
    serde_json::to_string_pretty(result).expect("sweep result serializes")
}
