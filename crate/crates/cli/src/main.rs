use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use kawastar_core::bc_matrix::Lu;
use kawastar_core::dispersive::airy5;
use kawastar_core::search::{search_params, sweep_table, ParameterRule, SearchOptions, DEFAULT_DET_FLOOR};
use kawastar_core::verify::{run_suite, Suite};
use kawastar_core::{
    admissible_s_range, assemble, check_compatibility, is_contraction, AssemblyMode, EdgeTraces, Error as CoreError,
    GraphConfig, StarGraphSpec,
};
use serde::Serialize;

const SCHEMA: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "kawastar", version, about = "Coupling-matrix and vertex-condition checks for the Kawahara equation on star graphs")]
struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Determinant, normalized determinant and condition estimate of M(lambda, beta).
    Det {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::PaperBlocks)]
        mode: Mode,
        /// Tolerance of the contraction test on C.
        #[arg(long, default_value_t = 1e-9)]
        contraction_tol: f64,
    },
    /// Normalized determinants over 1..=kmax by 1..=mmax on the uniform graph.
    Sweep {
        #[arg(long)]
        kmax: usize,
        #[arg(long)]
        mmax: usize,
        #[arg(long, value_enum, default_value_t = Mode::PaperBlocks)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Search for forcing indices with the widest certified regularity range.
    Search {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::PaperBlocks)]
        mode: Mode,
        #[arg(long, default_value_t = DEFAULT_DET_FLOOR)]
        det_floor: f64,
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
    },
    /// Regularity range certified by the config's parameters.
    Admissible {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check initial-data vertex traces against the compatibility conditions.
    Compat {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        s: f64,
        /// JSON file `{"value": [...], "deriv": [...]}`, one entry per edge.
        #[arg(long)]
        traces: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        compat_tol: f64,
    },
    /// Run the built-in identity suites.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Evaluate the kernel B(x) with an error estimate.
    Kernel {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    PaperBlocks,
    AppendixCode,
}

impl From<Mode> for AssemblyMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::PaperBlocks => AssemblyMode::PaperBlocks,
            Mode::AppendixCode => AssemblyMode::AppendixCode,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    Trig,
    Energy,
    Fractional,
    Kernel,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Trig => Suite::Trig,
            SuiteArg::Energy => Suite::Energy,
            SuiteArg::Fractional => Suite::Fractional,
            SuiteArg::Kernel => Suite::Kernel,
            SuiteArg::All => Suite::All,
        }
    }
}

/// How a run ended, mapped onto the exit status.
enum Failure {
    /// Unreadable or invalid input: exit 1.
    Input(anyhow::Error),
    /// The matrix is not invertible where it has to be: exit 2.
    Singular(String),
    /// A check ran and failed: exit 3. The report has already been written.
    Verification(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<CoreError>() {
            Some(CoreError::Singular { .. } | CoreError::NoInvertiblePoint) => Failure::Singular(format!("{e:#}")),
            _ => Failure::Input(e),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        Failure::from(anyhow::Error::new(e))
    }
}

#[derive(Serialize)]
struct Versioned<T: Serialize> {
    schema: u32,
    #[serde(flatten)]
    body: T,
}

fn json<T: Serialize>(body: T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(&Versioned { schema: SCHEMA, body })?;
    s.push('\n');
    Ok(s)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {what} {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {what} {}", path.display()))
}

fn read_config(path: &Path) -> anyhow::Result<GraphConfig> {
    let cfg: GraphConfig = read_json(path, "config")?;
    cfg.validate().with_context(|| format!("invalid config {}", path.display()))?;
    Ok(cfg)
}

fn read_graph(path: &Path) -> anyhow::Result<StarGraphSpec> {
    let spec: StarGraphSpec = read_json(path, "config")?;
    spec.validate().with_context(|| format!("invalid graph in {}", path.display()))?;
    Ok(spec)
}

#[derive(Serialize)]
struct DetReport {
    mode: AssemblyMode,
    k: usize,
    m: usize,
    determinant: f64,
    normalized_determinant: f64,
    condition_estimate: Option<f64>,
    invertible: bool,
    verdict: &'static str,
    contraction: bool,
    coupling_norm: f64,
}

#[derive(Serialize)]
struct KernelReport {
    x: f64,
    value: f64,
    abs_error_estimate: f64,
}

/// Result text, and the failure to report after it has been written.
type Produced = (String, Option<Failure>);

fn run(command: Command) -> Result<Produced, Failure> {
    match command {
        Command::Det {
            config,
            mode,
            contraction_tol,
        } => {
            let cfg = read_config(&config)?;
            let cm = assemble(&cfg.graph, &cfg.params, mode.into())?;
            let singular = Lu::new(&cm.entries).is_singular();
            let cond = cm.condition_estimate();
            let c = is_contraction(&cfg.graph.c, contraction_tol)?;
            let report = DetReport {
                mode: mode.into(),
                k: cm.k,
                m: cm.m,
                determinant: cm.determinant(),
                normalized_determinant: cm.normalized_determinant(),
                condition_estimate: cond.is_finite().then_some(cond),
                invertible: !singular,
                verdict: if singular { "singular" } else { "invertible" },
                contraction: c.contraction,
                coupling_norm: c.sigma,
            };
            let failure = singular.then(|| Failure::Singular("matrix is not invertible at these parameters".into()));
            Ok((json(report)?, failure))
        }
        Command::Sweep {
            kmax,
            mmax,
            mode,
            format,
        } => {
            let sweep = sweep_table(kmax, mmax, ParameterRule::default(), mode.into())?;
            let text = match format {
                Format::Csv => sweep.to_csv(),
                Format::Json => json(&sweep)?,
            };
            Ok((text, None))
        }
        Command::Search {
            config,
            mode,
            det_floor,
            budget,
        } => {
            let spec = read_graph(&config)?;
            let opts = SearchOptions {
                det_floor,
                budget,
                mode: mode.into(),
                ..SearchOptions::default()
            };
            let outcome = search_params(&spec, &opts)?;
            Ok((json(outcome)?, None))
        }
        Command::Admissible { config } => {
            let cfg = read_config(&config)?;
            Ok((json(admissible_s_range(&cfg.params))?, None))
        }
        Command::Compat {
            config,
            s,
            traces,
            compat_tol,
        } => {
            let spec = read_graph(&config)?;
            let traces: EdgeTraces = read_json(&traces, "traces")?;
            let report = check_compatibility(&traces, s, &spec, compat_tol)?;
            let failure = (!report.pass).then(|| {
                let list: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
                Failure::Verification(format!("compatibility violated: {}", list.join(", ")))
            });
            Ok((json(report)?, failure))
        }
        Command::Verify { suite, seed } => {
            let report = run_suite(suite.into(), seed)?;
            for r in &report.results {
                eprintln!(
                    "{} {:<10} {} ({:.3e}, tol {:.0e})",
                    if r.pass { "pass" } else { "FAIL" },
                    format!("{:?}", r.suite).to_lowercase(),
                    r.property,
                    r.measured,
                    r.tolerance
                );
            }
            let failed = report.results.iter().filter(|r| !r.pass).count();
            let failure = (failed > 0).then(|| Failure::Verification(format!("{failed} properties failed")));
            Ok((json(report)?, failure))
        }
        Command::Kernel { x } => {
            let b = airy5(x)?;
            let report = KernelReport {
                x,
                value: b.value,
                abs_error_estimate: b.abs_error_estimate,
            };
            Ok((json(report)?, None))
        }
    }
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("KAWASTAR_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| anyhow!("KAWASTAR_THREADS must be a nonnegative integer, got '{raw}'"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn emit(text: &str, output: Option<&Path>) -> anyhow::Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    let failure = match run(cli.command) {
        Ok((text, failure)) => match emit(&text, cli.output.as_deref()) {
            Ok(()) => failure,
            Err(e) => Some(Failure::Input(e)),
        },
        Err(f) => Some(f),
    };
    match failure {
        None => ExitCode::SUCCESS,
        Some(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Some(Failure::Singular(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Some(Failure::Verification(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
