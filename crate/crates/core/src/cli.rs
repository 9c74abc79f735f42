//! Command-line front end (`blockade`).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::load_config;
use crate::dressed::ladder_report;
use crate::liouvillian::{build_liouvillian, steady_state, StateDiagnostics};
use crate::model::{build_hamiltonian, collapse_operators, SystemConfig};
use crate::observables::{photon_statistics, PhotonStatistics};
use crate::presets;
use crate::sweep::{convergence_check, format_sig12, sweep_detuning, to_csv, to_json, SweepResult, SweepSpec};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "blockade", version, about = "Steady-state photon statistics of driven atom-cavity systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Detuning sweep written as CSV (with a JSON sidecar) or JSON.
    Sweep(SweepArgs),
    /// Steady-state statistics at a single detuning.
    Point(PointArgs),
    /// Dressed-state ladder and pump transition table.
    Ladder(LadderArgs),
    /// Fock truncation convergence report.
    Converge(ConvergeArgs),
}

#[derive(Debug, Args)]
struct Source {
    /// TOML configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in parameter set (e.g. fig2b).
    #[arg(long)]
    preset: Option<String>,
    /// Replace the configured Fock truncation.
    #[arg(long)]
    n_max_override: Option<usize>,
}

#[derive(Debug, Args)]
struct Grid {
    /// Lower detuning bound [default: -2.5·√2·g]
    #[arg(long, allow_hyphen_values = true)]
    delta_min: Option<f64>,
    /// Upper detuning bound [default: +2.5·√2·g]
    #[arg(long, allow_hyphen_values = true)]
    delta_max: Option<f64>,
    /// Grid points, bounds included [default: 201]
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    grid: Grid,
    /// Output file; stdout when omitted. CSV output gets a `.json` sidecar.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Worker threads; 0 uses every CPU, 1 runs serially.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Omit wall-clock timing so repeated runs are byte-identical.
    #[arg(long)]
    seedless: bool,
}

#[derive(Debug, Args)]
struct PointArgs {
    #[command(flatten)]
    source: Source,
    /// Pump detuning Δ (Δ_A = Δ_c).
    #[arg(long, allow_hyphen_values = true)]
    delta: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct LadderArgs {
    /// Take n_atoms, g, phi_z and eta from a config file.
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    g: Option<f64>,
    /// Radiation phase shift in radians.
    #[arg(long, allow_hyphen_values = true)]
    phi_z: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    n_atoms: Option<usize>,
    /// Highest excitation manifold.
    #[arg(long, default_value_t = 3)]
    top: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct ConvergeArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    grid: Grid,
    /// Ascending truncation levels, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 4, 6, 8, 10, 12, 14, 16])]
    levels: Vec<usize>,
    #[arg(long)]
    json: bool,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config { .. } | Error::ConfigParse(_) | Error::Io(_) => EXIT_CONFIG,
            _ => EXIT_PARTIAL,
        };
        Self { code, message: e.to_string() }
    }
}

type Outcome = std::result::Result<i32, Failure>;

struct Resolved {
    config: SystemConfig,
    preset: Option<&'static presets::Preset>,
}

fn resolve(source: &Source) -> std::result::Result<Resolved, Failure> {
    let (mut config, preset) = match (&source.config, &source.preset) {
        (Some(path), _) => (load_config(path).map_err(|e| with_path(e, path))?, None),
        (None, Some(name)) => {
            let p = presets::find(name)?;
            (p.config(), Some(p))
        }
        (None, None) => {
            return Err(Failure { code: EXIT_CONFIG, message: "one of --config or --preset is required".into() })
        }
    };
    if let Some(n) = source.n_max_override {
        config.n_max = n;
        config.validate()?;
    }
    Ok(Resolved { config, preset })
}

fn with_path(e: Error, path: &Path) -> Failure {
    let mut f = Failure::from(e);
    f.message = format!("{}: {}", path.display(), f.message);
    f
}

fn spec_from(config: SystemConfig, grid: &Grid) -> std::result::Result<SweepSpec, Failure> {
    let mut spec = SweepSpec::default_for(config);
    if let Some(v) = grid.delta_min {
        spec.delta_min = v;
    }
    if let Some(v) = grid.delta_max {
        spec.delta_max = v;
    }
    if let Some(v) = grid.points {
        spec.n_points = v;
    }
    spec.validate()?;
    Ok(spec)
}

fn annotate(result: &mut SweepResult, resolved: &Resolved) {
    if let Some(p) = resolved.preset {
        result.meta.preset = Some(p.name.to_string());
        result.meta.assumptions = p.assumptions.iter().map(|s| s.to_string()).collect();
    }
}

fn write_output(path: Option<&Path>, text: &str) -> std::result::Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| with_path(e.into(), p)),
        None => emit(text),
    }
}

/// Writes to stdout; a closed pipe (`| head`) ends output quietly.
fn emit(text: &str) -> std::result::Result<(), Failure> {
    let mut stdout = std::io::stdout().lock();
    match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(Failure { code: EXIT_CONFIG, message: format!("writing stdout: {e}") })
        }
        _ => Ok(()),
    }
}

fn emit_json<T: Serialize>(value: &T) -> std::result::Result<(), Failure> {
    emit(&(serde_json::to_string_pretty(value).expect("serializable") + "\n"))
}

fn run_sweep(args: &SweepArgs) -> Outcome {
    let resolved = resolve(&args.source)?;
    let spec = spec_from(resolved.config.clone(), &args.grid)?;
    let mut result = sweep_detuning(&spec, args.workers)?;
    annotate(&mut result, &resolved);
    if args.seedless {
        result.meta.elapsed_seconds = None;
        result.meta.workers = 0;
    }
    match args.format {
        Format::Csv => {
            write_output(args.out.as_deref(), &to_csv(&result))?;
            if let Some(out) = &args.out {
                let sidecar = out.with_extension("json");
                if sidecar != *out {
                    write_output(Some(&sidecar), &(to_json(&result) + "\n"))?;
                }
            }
        }
        Format::Json => write_output(args.out.as_deref(), &(to_json(&result) + "\n"))?,
    }
    for w in &result.meta.mirror_warnings {
        eprintln!("warning: mirror symmetry: {w}");
    }
    for r in result.rows.iter().filter(|r| r.failure.is_some()) {
        eprintln!("row Δ={}: {}", format_sig12(r.delta), r.failure.as_deref().unwrap_or_default());
    }
    if result.meta.failed_rows > 0 {
        eprintln!("{} of {} rows failed", result.meta.failed_rows, result.rows.len());
        return Ok(EXIT_PARTIAL);
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct PointReport<'a> {
    config: &'a SystemConfig,
    preset: Option<&'a str>,
    delta: f64,
    statistics: &'a PhotonStatistics,
    residual: f64,
    diagnostics: StateDiagnostics,
}

fn run_point(args: &PointArgs) -> Outcome {
    let resolved = resolve(&args.source)?;
    let config = resolved.config.clone().with_detuning(args.delta);
    let lindbladian = build_liouvillian(&build_hamiltonian(&config)?, &collapse_operators(&config)?)?;
    let ss = steady_state(&lindbladian)?;
    let stats = photon_statistics(&ss.rho);
    let preset = resolved.preset.map(|p| p.name);
    if args.json {
        let report = PointReport {
            config: &config,
            preset,
            delta: args.delta,
            statistics: &stats,
            residual: ss.residual,
            diagnostics: ss.diagnostics,
        };
        emit_json(&report)?;
        return Ok(EXIT_OK);
    }
    let mut out = String::new();
    if let Some(name) = preset {
        let _ = writeln!(out, "preset    {name}");
    }
    let flag = |reliable: bool| if reliable { "" } else { "  (unreliable: <a†a> too small)" };
    let d = ss.diagnostics;
    let _ = writeln!(out, "delta     {}", format_sig12(args.delta));
    let _ = writeln!(out, "mean_n    {}", format_sig12(stats.mean_n));
    let _ = writeln!(out, "g2        {}{}", format_sig12(stats.g2.value), flag(stats.g2.reliable));
    let _ = writeln!(out, "g3        {}{}", format_sig12(stats.g3.value), flag(stats.g3.reliable));
    let _ = writeln!(out, "purity    {}", format_sig12(stats.purity));
    let _ = writeln!(out, "residual  {:.3e}", ss.residual);
    let _ = writeln!(
        out,
        "state     hermiticity {:.1e}, trace error {:.1e}, min eigenvalue {:.3e}",
        d.hermiticity, d.trace_error, d.min_eigenvalue
    );
    let _ = writeln!(out, "p(n)");
    for (n, p) in stats.photon_dist.iter().enumerate() {
        let _ = writeln!(out, "  {n:>3}  {p:.6e}");
    }
    emit(&out)?;
    Ok(EXIT_OK)
}

fn run_ladder(args: &LadderArgs) -> Outcome {
    let base = if args.source.config.is_some() || args.source.preset.is_some() {
        Some(resolve(&args.source)?.config)
    } else {
        None
    };
    let n_atoms = args.n_atoms.or(base.as_ref().map(|c| c.n_atoms)).unwrap_or(2);
    let g = args.g.or(base.as_ref().map(|c| c.g)).unwrap_or(1.0);
    let phi_z = args.phi_z.or(base.as_ref().map(|c| c.phi_z())).unwrap_or(0.0);
    let eta = args.eta.or(base.as_ref().map(|c| c.eta)).unwrap_or(1.0);
    if !(1..=2).contains(&n_atoms) {
        return Err(Failure { code: EXIT_CONFIG, message: format!("--n-atoms must be 1 or 2, got {n_atoms}") });
    }
    if !(g > 0.0 && g.is_finite()) {
        return Err(Failure { code: EXIT_CONFIG, message: format!("--g must be > 0, got {g}") });
    }
    if args.top < 1 {
        return Err(Failure { code: EXIT_CONFIG, message: "--top must be >= 1".into() });
    }
    let report = ladder_report(n_atoms, g, phi_z, eta, args.top)?;
    if args.json {
        emit_json(&report)?;
    } else {
        emit(&report.to_string())?;
    }
    Ok(EXIT_OK)
}

fn run_converge(args: &ConvergeArgs) -> Outcome {
    let resolved = resolve(&args.source)?;
    let spec = spec_from(resolved.config, &args.grid)?;
    let report = convergence_check(&spec, &args.levels)?;
    if args.json {
        emit_json(&report)?;
        return Ok(EXIT_OK);
    }
    let mut out = String::new();
    let _ = writeln!(out, "operating point Δ = {}", format_sig12(report.delta));
    let _ = writeln!(out, "{:>6} {:>20} {:>20} {:>20} {:>12}", "n_max", "mean_n", "g2", "g3", "change");
    for l in &report.levels {
        let change = l.change_to_next.map_or_else(|| "-".to_string(), |c| format!("{c:.3e}"));
        let _ = writeln!(
            out,
            "{:>6} {:>20} {:>20} {:>20} {:>12}",
            l.n_max,
            format_sig12(l.mean_n),
            format_sig12(l.g2),
            format_sig12(l.g3),
            change
        );
    }
    let _ = writeln!(out, "accepted n_max = {}", report.chosen_n_max);
    emit(&out)?;
    Ok(EXIT_OK)
}

/// Runs the CLI on `args` (including the program name) and returns the exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Sweep(a) => run_sweep(a),
        Command::Point(a) => run_point(a),
        Command::Ladder(a) => run_ladder(a),
        Command::Converge(a) => run_converge(a),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
