//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use super::check::run_checks;
use super::config::{check_step, load_config, ScenarioConfig, SolverConfig, Yp0Choice};
use crate::control::{
    asymptotic_fixed_points, calibrate_yp0, solve_optimal_trajectory, transversal_yp0,
    AsymptoticSolution, BoundaryHit, Calibration, CalibrationOptions,
};
use crate::model::ModelParams;
use crate::scenario::{
    audit_table, read_csv, simulate_years, write_csv, write_json, Format, OmegaSource,
    ScenarioError,
};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "effgrowth",
    version,
    about = "Optimal saving in a growth model with effectiveness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario config (JSON); for `audit`, the table to audit (CSV).
    input: Option<PathBuf>,
    /// Scenario config (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Integration step in years; must divide one year.
    #[arg(long)]
    step: Option<f64>,
    /// Horizon in whole years.
    #[arg(long)]
    horizon: Option<u32>,
    /// Initial costate: a number, `default` or `calibrate`.
    #[arg(long, allow_hyphen_values = true)]
    yp0: Option<Yp0Choice>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    /// `omega_series` when the config has one, the solver otherwise.
    Auto,
    Solver,
    Series,
    Asymptotic,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal saving-per-capital trajectory.
    Solve(Common),
    /// Yearly projection table with base-year indices.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Where the yearly saving per capital comes from.
        #[arg(long, value_enum, default_value = "auto")]
        source: SourceArg,
    },
    /// Fixed points and closed-form long-run trajectory.
    Asymptote(Common),
    /// Fit the initial costate to `omega_series`.
    Calibrate(Common),
    /// Audit a yearly table against the model identities.
    Audit(Common),
    /// Run the built-in consistency checks.
    Check(Common),
}

enum Failure {
    Usage(String),
    Domain(String),
}

impl<E: Into<Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Domain(e.into().to_string())
    }
}

type Outcome = Result<i32, Failure>;

/// Parse `args` (program name first), run the subcommand and return the exit
/// code. Artifacts go to `--out` or `stdout`; diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Solve(c) => solve(&c, stdout),
        Command::Simulate { common, source } => simulate(&common, source, stdout),
        Command::Asymptote(c) => asymptote(&c, stdout),
        Command::Calibrate(c) => calibrate(&c, stdout),
        Command::Audit(c) => audit(&c, stdout),
        Command::Check(c) => check(&c, stdout),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Domain(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_DOMAIN
        }
    }
}

fn config_path(c: &Common) -> Result<&Path, Failure> {
    match (&c.input, &c.config) {
        (Some(a), Some(b)) if a != b => Err(Failure::Usage(
            "config given both positionally and with --config".into(),
        )),
        (Some(p), _) | (None, Some(p)) => Ok(p),
        (None, None) => Err(Failure::Usage("a scenario config is required".into())),
    }
}

/// Load the config and apply command-line overrides.
fn load(c: &Common) -> Result<ScenarioConfig, Failure> {
    let mut cfg = load_config(config_path(c)?)?;
    if c.step.is_some() || c.horizon.is_some() || c.yp0.is_some() {
        let mut solver = cfg.solver.unwrap_or(SolverConfig {
            yp0: cfg.yp0(),
            horizon_years: cfg.horizon_years(),
            step: cfg.step(),
        });
        if let Some(step) = c.step {
            check_step("--step", step)?;
            solver.step = step;
        }
        if let Some(h) = c.horizon {
            if h < 1 {
                return Err(Failure::Usage("--horizon must be at least one year".into()));
            }
            solver.horizon_years = h;
        }
        if let Some(yp0) = c.yp0 {
            if yp0 == Yp0Choice::Calibrate && cfg.omega_series.is_none() {
                return Err(Failure::Usage(
                    "--yp0 calibrate requires omega_series in the config".into(),
                ));
            }
            solver.yp0 = yp0;
        }
        cfg.solver = Some(solver);
    }
    if let Some(f) = c.format {
        cfg.output.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    if let Some(out) = &c.out {
        cfg.output.path = Some(out.clone());
    }
    Ok(cfg)
}

fn header(command: &str, cfg: &ScenarioConfig, extra: &[(&str, String)]) -> String {
    let mut s = format!("# effgrowth {} {command}\n", env!("CARGO_PKG_VERSION"));
    for (k, v) in cfg
        .describe()
        .iter()
        .map(|(k, v)| (*k, v))
        .chain(extra.iter().map(|(k, v)| (*k, v)))
    {
        let _ = writeln!(s, "# {k}={v}");
    }
    s
}

fn config_map(
    cfg: &ScenarioConfig,
    extra: &[(&str, String)],
) -> serde_json::Map<String, serde_json::Value> {
    cfg.describe()
        .into_iter()
        .chain(extra.iter().map(|(k, v)| (*k, v.clone())))
        .map(|(k, v)| (k.to_string(), serde_json::Value::String(v)))
        .collect()
}

/// Write `bytes` to `path`, or to `stdout` when there is no path.
fn emit(path: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<bool, Failure> {
    let io = |p: &Path, source| ScenarioError::Io {
        path: p.display().to_string(),
        source,
    };
    match path {
        Some(p) => {
            std::fs::write(p, bytes).map_err(|e| io(p, e))?;
            Ok(true)
        }
        None => {
            stdout
                .write_all(bytes)
                .map_err(|e| io(Path::new("<stdout>"), e))?;
            Ok(false)
        }
    }
}

fn json_bytes(value: &impl Serialize) -> Result<Vec<u8>, Failure> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(ScenarioError::from)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn calibration_target(cfg: &ScenarioConfig) -> Result<&[f64], Failure> {
    let series = cfg
        .omega_series
        .as_deref()
        .ok_or_else(|| Failure::Usage("calibration requires omega_series in the config".into()))?;
    let n = (cfg.horizon_years() as usize + 1).min(series.len());
    Ok(&series[..n])
}

fn run_calibration(cfg: &ScenarioConfig) -> Result<Calibration, Failure> {
    let opts = CalibrationOptions {
        step: cfg.step(),
        ..CalibrationOptions::for_params(&cfg.params)
    };
    Ok(calibrate_yp0(&cfg.params, calibration_target(cfg)?, &opts)?)
}

/// Initial costate to use, with the calibration that produced it if any.
fn resolve_yp0(cfg: &ScenarioConfig) -> Result<(f64, Option<Calibration>), Failure> {
    match cfg.yp0() {
        Yp0Choice::Default => Ok((transversal_yp0(&cfg.params)?, None)),
        Yp0Choice::Value(v) => Ok((v, None)),
        Yp0Choice::Calibrate => {
            let cal = run_calibration(cfg)?;
            Ok((cal.yp0, Some(cal)))
        }
    }
}

fn yp0_extra(yp0: f64, cal: &Option<Calibration>) -> Vec<(&'static str, String)> {
    let mut extra = vec![("yp0_used", yp0.to_string())];
    if let Some(c) = cal {
        extra.push(("calibration_rms", c.rms.to_string()));
    }
    extra
}

#[derive(Serialize)]
struct SolveSample {
    t: f64,
    omega: f64,
    r: f64,
    p: f64,
    psi: f64,
    chi_over_yp: f64,
}

fn solve(c: &Common, stdout: &mut dyn Write) -> Outcome {
    let cfg = load(c)?;
    let (yp0, cal) = resolve_yp0(&cfg)?;
    let traj = solve_optimal_trajectory(
        &cfg.params,
        &cfg.initial_state(),
        yp0,
        cfg.horizon_years() as f64,
        cfg.step(),
    )?;
    let samples: Vec<SolveSample> = traj
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| SolveSample {
            t: s.t,
            omega: s.omega,
            r: s.r,
            p: s.p,
            psi: s.psi(),
            chi_over_yp: traj.chi_over_yp(i).unwrap_or(f64::NAN),
        })
        .collect();
    let extra = yp0_extra(yp0, &cal);
    let bytes = match cfg.output.format {
        Format::Csv => {
            let mut text = header("solve", &cfg, &extra);
            text.push_str("t,omega,r,p,psi,chi_over_yp\n");
            for s in &samples {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{}",
                    s.t, s.omega, s.r, s.p, s.psi, s.chi_over_yp
                );
            }
            text.into_bytes()
        }
        Format::Json => json_bytes(&serde_json::json!({
            "config": config_map(&cfg, &extra),
            "samples": samples,
        }))?,
    };
    emit(cfg.output.path.as_deref(), &bytes, stdout)?;
    Ok(EXIT_OK)
}

fn simulate(c: &Common, source: SourceArg, stdout: &mut dyn Write) -> Outcome {
    let cfg = load(c)?;
    let use_series = match source {
        SourceArg::Auto => cfg.omega_series.is_some(),
        SourceArg::Series => true,
        SourceArg::Solver | SourceArg::Asymptotic => false,
    };
    let mut extra = Vec::new();
    let omega_source = if use_series {
        let series = cfg.omega_series.as_deref().ok_or_else(|| {
            Failure::Usage("--source series requires omega_series in the config".into())
        })?;
        extra.push(("source", "series".to_string()));
        OmegaSource::Series(series)
    } else if matches!(source, SourceArg::Asymptotic) {
        extra.push(("source", "asymptotic".to_string()));
        OmegaSource::Asymptotic
    } else {
        let (yp0, cal) = resolve_yp0(&cfg)?;
        extra.push(("source", "solver".to_string()));
        extra.extend(yp0_extra(yp0, &cal));
        OmegaSource::Solver { yp0 }
    };
    let table = simulate_years(
        &cfg.params,
        &cfg.initial_state(),
        omega_source,
        cfg.horizon_years() as usize,
        cfg.base_year,
        cfg.step(),
    )?;
    let mut bytes = Vec::new();
    match cfg.output.format {
        Format::Csv => {
            bytes.extend_from_slice(header("simulate", &cfg, &extra).as_bytes());
            write_csv(&table, &mut bytes)?;
        }
        Format::Json => write_json(&table, &mut bytes)?,
    }
    emit(cfg.output.path.as_deref(), &bytes, stdout)?;
    Ok(EXIT_OK)
}

fn asymptote(c: &Common, stdout: &mut dyn Write) -> Outcome {
    let cfg = load(c)?;
    let params = &cfg.params;
    if !params.is_asymptotic_regime() {
        log::warn!("d <= mu: the asymptotic regime is never reached");
    }
    let fp = asymptotic_fixed_points(params);
    let sol = AsymptoticSolution::new(params, cfg.initial.omega0, cfg.initial.r0)?;
    let extra = vec![
        ("omega_minus", fp.omega_minus.to_string()),
        ("omega_plus", fp.omega_plus.to_string()),
        ("s", fp.s.to_string()),
        ("c", sol.c.to_string()),
        ("r_tilde", sol.r_tilde.to_string()),
    ];
    let step = cfg.step();
    let n = (cfg.horizon_years() as f64 / step).round() as usize;
    let points: Vec<(f64, f64, f64)> = (0..=n)
        .map(|i| {
            let t = i as f64 * step;
            (t, sol.omega(t), sol.capital(t, params))
        })
        .collect();
    let bytes = match cfg.output.format {
        Format::Csv => {
            let mut text = header("asymptote", &cfg, &extra);
            text.push_str("t,omega,r\n");
            for (t, w, r) in &points {
                let _ = writeln!(text, "{t},{w},{r}");
            }
            text.into_bytes()
        }
        Format::Json => {
            let series: Vec<_> = points
                .iter()
                .map(|(t, w, r)| serde_json::json!({"t": t, "omega": w, "r": r}))
                .collect();
            json_bytes(&serde_json::json!({
                "config": config_map(&cfg, &extra),
                "omega_minus": fp.omega_minus,
                "omega_plus": fp.omega_plus,
                "series": series,
            }))?
        }
    };
    if emit(cfg.output.path.as_deref(), &bytes, stdout)? {
        let _ = writeln!(stdout, "omega_minus={:.7}", fp.omega_minus);
        let _ = writeln!(stdout, "omega_plus={:.7}", fp.omega_plus);
    }
    Ok(EXIT_OK)
}

fn boundary_name(b: Option<BoundaryHit>) -> &'static str {
    match b {
        None => "none",
        Some(BoundaryHit::IntervalEnd) => "interval_end",
        Some(BoundaryHit::Feasibility) => "feasibility",
    }
}

fn calibrate(c: &Common, stdout: &mut dyn Write) -> Outcome {
    let cfg = load(c)?;
    let cal = run_calibration(&cfg)?;
    let fitted = calibration_target(&cfg)?.len() - 1;
    let results = vec![
        ("yp0", cal.yp0.to_string()),
        ("rms", cal.rms.to_string()),
        ("sse", cal.sse.to_string()),
        ("fitted_years", fitted.to_string()),
        ("evaluations", cal.evaluations.to_string()),
        ("boundary", boundary_name(cal.boundary).to_string()),
    ];
    let bytes = match cfg.output.format {
        Format::Csv => {
            let mut text = header("calibrate", &cfg, &[]);
            for (k, v) in &results {
                let _ = writeln!(text, "{k}={v}");
            }
            text.into_bytes()
        }
        Format::Json => json_bytes(&serde_json::json!({
            "config": config_map(&cfg, &[]),
            "yp0": cal.yp0,
            "rms": cal.rms,
            "sse": cal.sse,
            "fitted_years": fitted,
            "evaluations": cal.evaluations,
            "boundary": boundary_name(cal.boundary),
        }))?,
    };
    emit(cfg.output.path.as_deref(), &bytes, stdout)?;
    Ok(EXIT_OK)
}

fn audit(c: &Common, stdout: &mut dyn Write) -> Outcome {
    let input = c
        .input
        .as_deref()
        .ok_or_else(|| Failure::Usage("audit needs the table to audit (CSV)".into()))?;
    let cfg = match &c.config {
        Some(p) => Some(load_config(p)?),
        None => None,
    };
    let file = std::fs::File::open(input).map_err(|source| ScenarioError::Io {
        path: input.display().to_string(),
        source,
    })?;
    let rows = read_csv(file)?;
    let report = audit_table(&rows, cfg.as_ref().map(|c| c.params.lambda()))?;
    let format = match c.format {
        Some(FormatArg::Json) => Format::Json,
        _ => Format::Csv,
    };
    let bytes = match format {
        Format::Csv => {
            let mut text = format!(
                "# effgrowth {} audit {}\n",
                env!("CARGO_PKG_VERSION"),
                input.display()
            );
            if let Some(cfg) = &cfg {
                let _ = writeln!(text, "# lambda={}", cfg.params.lambda());
            }
            let _ = writeln!(text, "{report}");
            text.into_bytes()
        }
        Format::Json => json_bytes(&report)?,
    };
    emit(c.out.as_deref(), &bytes, stdout)?;
    Ok(EXIT_OK)
}

fn check(c: &Common, stdout: &mut dyn Write) -> Outcome {
    let params = match (&c.input, &c.config) {
        (None, None) => ModelParams::belarus(),
        _ => load(c)?.params,
    };
    let outcomes = run_checks(&params);
    let mut text = String::new();
    for o in &outcomes {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(text, "{tag} {}: {}", o.name, o.detail);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let _ = writeln!(
        text,
        "{} of {} checks passed",
        outcomes.len() - failed,
        outcomes.len()
    );
    emit(c.out.as_deref(), text.as_bytes(), stdout)?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_DOMAIN })
}
