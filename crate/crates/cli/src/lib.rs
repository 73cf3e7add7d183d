//! Command-line frontend: parses argv, dispatches to the numerical core and
//! writes CSV or JSON results behind a single `# meta:` header line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 budget or
//! capacity exceeded.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use qwiretap::channels::{degrading_distance_with, DegradingOptions};
use qwiretap::linalg::CMat;
use qwiretap::regions::{eve_assist_ensemble, RegionOptions};
use qwiretap::spc::{dense_coding_code, evaluate_code, generate_codebook, Rates};
use qwiretap::typicality::{covering_experiment, verify_state_properties};
use qwiretap::{
    baseline, regularized_points, BaselineKind, ChannelSpec, CodingConfig, Error, LabeledOperator, Register,
    WiretapChannel,
};
use serde::Serialize;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qwiretap", version, about = "Secrecy rate regions and code simulation for quantum wiretap channels")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Serialize)]
struct GlobalArgs {
    /// Channel as JSON `{"name": ..., "params": [...]}` or shorthand `name:p1:p2`.
    #[arg(long, global = true)]
    channel: Option<String>,
    /// File holding the channel JSON.
    #[arg(long, global = true, conflicts_with = "channel")]
    channel_file: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Objective evaluations (per weight for `region`).
    #[arg(long, global = true, default_value_t = 20_000)]
    budget: usize,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Secure rate-region frontier by weighted-sum search.
    Region(RegionArgs),
    /// Single-letter baseline: holevo, ea, private or sea.
    Baseline(BaselineArgs),
    /// Distance from the Bob-to-Eve degradedness witness.
    DegradedCheck(DegradedArgs),
    /// Random-codebook covering experiment.
    Covering(CoveringArgs),
    /// Exact evaluation of a random superposition code.
    Simulate(SimulateArgs),
    /// Typical-projector property checks for a diagonal state.
    Typicality(TypicalityArgs),
}

#[derive(Debug, Args, Serialize)]
struct RegionArgs {
    /// Number of evenly spaced weights on [0, 1].
    #[arg(long, default_value_t = 11)]
    weights: usize,
    /// Channel uses per letter (1 or 2).
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 16)]
    starts: usize,
    /// Replace Eve's output with a trivial register.
    #[arg(long)]
    no_eve: bool,
}

#[derive(Debug, Args, Serialize)]
struct BaselineArgs {
    #[arg(long)]
    kind: String,
}

#[derive(Debug, Args, Serialize)]
struct DegradedArgs {
    #[arg(long, default_value_t = 4)]
    restarts: usize,
}

#[derive(Debug, Args, Serialize)]
struct CoveringArgs {
    /// JSON file `{"probs": [...], "states": [...]}`; states are row-major
    /// matrices of reals or [re, im] pairs.
    #[arg(long)]
    ensemble: Option<PathBuf>,
    /// Derive the ensemble ω^x_{E G2} from the channel and this configuration.
    #[arg(long)]
    config: Option<String>,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 0.75, 1.0])]
    r0: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
}

#[derive(Debug, Args, Serialize)]
struct SimulateArgs {
    /// `dense-coding`, `classical`, a JSON file, or inline JSON.
    #[arg(long, default_value = "dense-coding")]
    config: String,
    /// Use the fixed n = 1 dense-coding code with Pauli satellites.
    #[arg(long)]
    dense_coding_code: bool,
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Guaranteed rate R.
    #[arg(long, default_value_t = 0.0)]
    rate: f64,
    /// Excess rate R'.
    #[arg(long, default_value_t = 0.0)]
    rate_excess: f64,
    #[arg(long, default_value_t = 0.0)]
    r0: f64,
    #[arg(long, default_value_t = 0.0)]
    r0_excess: f64,
}

#[derive(Debug, Args, Serialize)]
struct TypicalityArgs {
    /// Eigenvalues of the diagonal state.
    #[arg(long, value_delimiter = ',', required = true)]
    spectrum: Vec<f64>,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    delta: f64,
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_budget() => EXIT_BUDGET,
            CliError::Core(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => f.write_str(e),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Runs the tool on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    configure_threads();
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("QWIRETAP_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // Fails only if the pool already exists, e.g. on a second in-process run.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn execute(cli: &Cli) -> CliResult<()> {
    let g = &cli.global;
    let spec = channel_spec(g)?;
    let mut meta = json!({
        "tool": "qwiretap",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cli.command,
        "seed": g.seed,
        "budget": g.budget,
        "format": g.format,
        "channel": spec,
    });
    let body = match &cli.command {
        Command::Region(a) => region(a, g, require_channel(&spec)?, &mut meta)?,
        Command::Baseline(a) => baseline_cmd(a, g, require_channel(&spec)?)?,
        Command::DegradedCheck(a) => degraded(a, g, require_channel(&spec)?, &mut meta)?,
        Command::Covering(a) => covering(a, g, spec.as_ref(), &mut meta)?,
        Command::Simulate(a) => simulate(a, g, require_channel(&spec)?, &mut meta)?,
        Command::Typicality(a) => typicality(a, g)?,
    };
    let mut text = format!("# meta: {meta}\n");
    text.push_str(&body);
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &g.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn channel_spec(g: &GlobalArgs) -> CliResult<Option<ChannelSpec>> {
    let text = match (&g.channel, &g.channel_file) {
        (Some(s), _) => s.clone(),
        (None, Some(path)) => read_file(path)?,
        (None, None) => return Ok(None),
    };
    Ok(Some(ChannelSpec::parse(&text)?))
}

fn require_channel(spec: &Option<ChannelSpec>) -> CliResult<WiretapChannel> {
    match spec {
        Some(s) => Ok(s.build()?),
        None => Err(Error::Parameter("this command needs --channel or --channel-file".into()).into()),
    }
}

/// Round to 12 significant digits and print the shortest decimal form.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        return "0".into();
    }
    if rounded.abs() < 1e-4 || rounded.abs() >= 1e15 {
        format!("{rounded:e}")
    } else {
        rounded.to_string()
    }
}

struct Csv {
    text: String,
}

impl Csv {
    fn new(header: &[&str]) -> Self {
        Csv {
            text: header.join(",") + "\n",
        }
    }

    fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }
}

fn json_body(value: &Value) -> String {
    serde_json::to_string_pretty(value).expect("JSON values serialize") + "\n"
}

fn load_config(text: &str, channel: Option<&WiretapChannel>) -> CliResult<CodingConfig> {
    match text {
        "dense-coding" => Ok(CodingConfig::dense_coding()),
        "classical" => {
            let d = channel
                .map(|c| c.d_a())
                .ok_or_else(|| Error::Parameter("the classical configuration needs a channel".into()))?;
            Ok(CodingConfig::classical(vec![1.0 / d as f64; d], d)?)
        }
        t if t.trim_start().starts_with('{') => Ok(CodingConfig::from_json(t)?),
        path => Ok(CodingConfig::from_json(&read_file(Path::new(path))?)?),
    }
}

fn region(a: &RegionArgs, g: &GlobalArgs, channel: WiretapChannel, meta: &mut Value) -> CliResult<String> {
    if a.weights == 0 {
        return Err(Error::Parameter("--weights must be positive".into()).into());
    }
    let channel = if a.no_eve { channel.without_eve() } else { channel };
    let mut opts = RegionOptions::new(RegionOptions::evenly_spaced(a.weights), g.budget, g.seed);
    opts.starts = a.starts;
    let sample = regularized_points(&channel, a.n, &opts)?;
    meta["scalarization"] = json!("weighted sums trace the convex hull of the frontier");
    Ok(match g.format {
        Format::Csv => {
            let mut csv = Csv::new(&["lambda", "R_bits", "Rprime_bits", "n", "objective", "evals", "seed"]);
            for w in &sample.weights {
                csv.row(&[
                    format_number(w.lambda),
                    format_number(w.point.r),
                    format_number(w.point.rp),
                    w.point.n.to_string(),
                    format_number(w.objective),
                    w.evals.to_string(),
                    w.seed.to_string(),
                ]);
            }
            csv.text
        }
        Format::Json => {
            let rows: Vec<Value> = sample
                .weights
                .iter()
                .zip(&sample.frontier)
                .map(|(w, &on_frontier)| {
                    json!({
                        "lambda": w.lambda,
                        "R_bits": w.point.r,
                        "Rprime_bits": w.point.rp,
                        "n": w.point.n,
                        "objective": w.objective,
                        "evals": w.evals,
                        "seed": w.seed,
                        "frontier": on_frontier,
                        "config": w.point.config.as_ref().map(CodingConfig::to_json),
                    })
                })
                .collect();
            json_body(&json!({"weights": rows, "explored": sample.explored.len()}))
        }
    })
}

fn baseline_cmd(a: &BaselineArgs, g: &GlobalArgs, channel: WiretapChannel) -> CliResult<String> {
    let kind: BaselineKind = a.kind.parse()?;
    let res = baseline(kind, &channel, g.budget, g.seed)?;
    Ok(match g.format {
        Format::Csv => {
            let mut csv = Csv::new(&["kind", "value_bits", "evals", "seed"]);
            csv.row(&[kind.to_string(), format_number(res.value), res.evals.to_string(), res.seed.to_string()]);
            csv.text
        }
        Format::Json => json_body(&json!({
            "kind": kind, "value_bits": res.value, "evals": res.evals, "seed": res.seed,
        })),
    })
}

fn matrix_json(m: &CMat) -> Value {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect::<Vec<_>>())
        .collect()
}

fn degraded(a: &DegradedArgs, g: &GlobalArgs, channel: WiretapChannel, meta: &mut Value) -> CliResult<String> {
    if g.budget == 0 || a.restarts == 0 {
        return Err(Error::Parameter("budget and restarts must be positive".into()).into());
    }
    meta["metric"] = json!("Frobenius norm of the Choi-matrix difference, a surrogate for approximate degradedness");
    let report = degrading_distance_with(
        &channel,
        DegradingOptions {
            budget: g.budget,
            seed: g.seed,
            restarts: a.restarts,
        },
    );
    Ok(match g.format {
        Format::Csv => {
            let mut csv = Csv::new(&["distance", "verdict", "evals", "best_restart", "seed"]);
            csv.row(&[
                format_number(report.distance),
                report.verdict.to_string(),
                report.evals.to_string(),
                report.best_restart.to_string(),
                g.seed.to_string(),
            ]);
            csv.text
        }
        Format::Json => json_body(&json!({
            "distance": report.distance,
            "verdict": report.verdict.to_string(),
            "evals": report.evals,
            "best_restart": report.best_restart,
            "seed": g.seed,
            "witness_choi": matrix_json(report.witness.matrix()),
        })),
    })
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleJson {
    probs: Vec<f64>,
    states: Vec<Vec<Vec<Entry>>>,
}

#[derive(serde::Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

fn parse_ensemble(text: &str) -> CliResult<Vec<(f64, LabeledOperator)>> {
    let raw: EnsembleJson = serde_json::from_str(text)
        .map_err(|e| Error::Parameter(format!("ensemble JSON line {} column {}: {e}", e.line(), e.column())))?;
    if raw.probs.len() != raw.states.len() || raw.states.is_empty() {
        return Err(Error::Shape("ensemble needs one state per probability".into()).into());
    }
    let d = raw.states[0].len();
    raw.probs
        .iter()
        .zip(&raw.states)
        .map(|(&p, rows)| {
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(Error::Shape(format!("ensemble states must all be {d}x{d}")).into());
            }
            let m = CMat::from_fn(d, d, |i, j| match rows[i][j] {
                Entry::Real(x) => qwiretap::linalg::c(x, 0.0),
                Entry::Complex([x, y]) => qwiretap::linalg::c(x, y),
            });
            Ok((p, LabeledOperator::state(vec![Register::new("S", d)], m)?))
        })
        .collect()
}

fn covering(a: &CoveringArgs, g: &GlobalArgs, spec: Option<&ChannelSpec>, meta: &mut Value) -> CliResult<String> {
    let ensemble = match (&a.ensemble, &a.config) {
        (Some(path), None) => parse_ensemble(&read_file(path)?)?,
        (None, Some(cfg)) => {
            let channel = require_channel(&spec.cloned())?;
            let config = load_config(cfg, Some(&channel))?;
            meta["config"] = config.to_json();
            eve_assist_ensemble(&config, &channel)?
        }
        _ => return Err(Error::Parameter("covering needs exactly one of --ensemble or --config".into()).into()),
    };
    let mut runs = Vec::with_capacity(a.r0.len());
    for &r0 in &a.r0 {
        runs.push((r0, covering_experiment(&ensemble, a.n, r0, a.trials, g.seed)?));
    }
    Ok(match g.format {
        Format::Csv => {
            let mut csv = Csv::new(&["trial", "R0", "n", "distance", "seed"]);
            for (r0, stats) in &runs {
                for (t, d) in stats.distances.iter().enumerate() {
                    csv.row(&[t.to_string(), format_number(*r0), a.n.to_string(), format_number(*d), g.seed.to_string()]);
                }
            }
            csv.text
        }
        Format::Json => {
            let rows: Vec<Value> = runs
                .iter()
                .map(|(r0, s)| {
                    json!({
                        "R0": r0, "n": s.n, "trials": s.trials, "seed": s.seed,
                        "codebook_size": s.codebook_size, "median": s.median(), "mean": s.mean(),
                        "distances": s.distances,
                    })
                })
                .collect();
            json_body(&json!({ "runs": rows }))
        }
    })
}

fn simulate(a: &SimulateArgs, g: &GlobalArgs, channel: WiretapChannel, meta: &mut Value) -> CliResult<String> {
    let (config, codebook) = if a.dense_coding_code {
        dense_coding_code()
    } else {
        let config = load_config(&a.config, Some(&channel))?;
        let rates = Rates {
            r: a.rate,
            rp: a.rate_excess,
            r0: a.r0,
            r0p: a.r0_excess,
        };
        let codebook = generate_codebook(&config, rates, a.n, g.seed)?;
        (config, codebook)
    };
    meta["config"] = config.to_json();
    let eval = evaluate_code(&codebook, &config, &channel)?;
    Ok(match g.format {
        Format::Csv => {
            let mut csv = Csv::new(&[
                "n",
                "seed",
                "R",
                "Rprime",
                "R0",
                "R0prime",
                "R_realized",
                "Rprime_realized",
                "R0_realized",
                "R0prime_realized",
                "P_e",
                "P_e_star",
                "leakage_bits",
                "leakage_M_bits",
                "leakage_Mprime_given_M_bits",
                "leakage_without_assistance_bits",
                "ricochet_residual",
            ]);
            let (q, r) = (eval.rates_requested, eval.rates_realized);
            let mut cells = vec![eval.n.to_string(), eval.seed.to_string()];
            cells.extend(
                [
                    q.r,
                    q.rp,
                    q.r0,
                    q.r0p,
                    r.r,
                    r.rp,
                    r.r0,
                    r.r0p,
                    eval.p_e,
                    eval.p_e_star,
                    eval.leakage_bits,
                    eval.leakage_split[0],
                    eval.leakage_split[1],
                    eval.leakage_without_assistance_bits,
                    eval.ricochet_residual,
                ]
                .map(format_number),
            );
            csv.row(&cells);
            csv.text
        }
        Format::Json => json_body(&serde_json::to_value(&eval).expect("evaluation serializes")),
    })
}

fn typicality(a: &TypicalityArgs, g: &GlobalArgs) -> CliResult<String> {
    let rho = LabeledOperator::diagonal_state(Register::new("S", a.spectrum.len()), &a.spectrum)?;
    let report = verify_state_properties(&rho, a.n, a.delta)?;
    Ok(match g.format {
        Format::Csv => {
            let mut csv = Csv::new(&["check", "measured", "bound", "holds", "small_n", "fitted_exponent"]);
            for c in &report.checks {
                csv.row(&[
                    c.name.to_string(),
                    format_number(c.measured),
                    format_number(c.bound),
                    c.holds.to_string(),
                    c.small_n.to_string(),
                    format_number(c.fitted),
                ]);
            }
            let mut text = csv.text;
            let _ = writeln!(
                text,
                "# rank {} typical_set_size {} idempotence_error {}",
                report.rank,
                report.typical_set_size,
                format_number(report.idempotence_error)
            );
            text
        }
        Format::Json => json_body(&serde_json::to_value(&report).expect("report serializes")),
    })
}
