//! Batch runner for the tanfold check suites.
//!
//! Every subcommand loads a corpus (shipped defaults or `--corpus` files),
//! runs one family of seeded checks, and emits a report — a human-readable
//! summary by default, deterministic pretty JSON with `--json`. The process
//! exit code is the verdict: `0` when every check passed, `1` when any
//! check failed, `2` for usage errors (bad flags, malformed corpora,
//! unknown spaces). Identical invocations produce byte-identical reports.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tanfold::corpus::{self, Corpus};
use tanfold::report::{dec, ConfigEcho, SuiteReport};

mod commands;

use commands::ProbeSpec;

#[derive(Parser)]
#[command(
    name = "tanfold",
    version,
    about = "Check suites for jet arithmetic, tangent-structure laws, the Cartan \
             calculus, and tangent spaces of presented smooth spaces"
)]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    cmd: Cmd,
}

/// Flags shared by every subcommand, each overridable through a `TF_`
/// environment variable of the same name.
#[derive(Args)]
struct RunArgs {
    /// RNG seed; reruns with the same configuration are byte-identical.
    #[arg(long, global = true, default_value_t = 42, env = "TF_SEED")]
    pub(crate) seed: u64,

    /// Trials per randomized check (must be at least 1).
    #[arg(
        long,
        global = true,
        default_value_t = 100,
        env = "TF_TRIALS",
        value_parser = clap::value_parser!(u64).range(1..)
    )]
    pub(crate) trials: u64,

    /// Replace every residual gate with one absolute tolerance.
    #[arg(
        long,
        global = true,
        env = "TF_TOL",
        value_parser = parse_positive,
        allow_hyphen_values = true
    )]
    pub(crate) tol: Option<f64>,

    /// Evaluation budget for search probes.
    #[arg(long, global = true, default_value_t = 20_000, env = "TF_BUDGET")]
    pub(crate) budget: usize,

    /// Corpus file(s) to load instead of the shipped corpora; repeatable,
    /// comma-separated in TF_CORPUS.
    #[arg(long, global = true, env = "TF_CORPUS", value_delimiter = ',')]
    pub(crate) corpus: Vec<PathBuf>,

    /// Also write the JSON report to this path.
    #[arg(long, global = true, env = "TF_OUT")]
    pub(crate) out: Option<PathBuf>,

    /// Print the JSON report on stdout instead of the text summary.
    #[arg(long, global = true, env = "TF_JSON")]
    pub(crate) json: bool,
}

impl RunArgs {
    pub(crate) fn trials(&self) -> usize {
        self.trials as usize
    }

    /// The tolerance for one gate: the `--tol` override if given, otherwise
    /// the gate's own default.
    pub(crate) fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err("tolerance must be a positive real".into())
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the tangent-structure laws on the euclidean instance over the
    /// corpus maps.
    Axioms {
        /// Negative control: replace the order-swap map with the identity.
        /// The symmetry-sensitive checks must then fail.
        #[arg(long)]
        corrupt_tau: bool,
    },
    /// Check the graded commutation relations between d, contraction, and
    /// the Lie derivative, plus d∘d = 0 and the two-path differential.
    Cartan,
    /// Compare the bundle-theoretic bracket against the coordinate bracket
    /// and check the Jacobi identity.
    Bracket,
    /// Probe the tangent spaces of a presented smooth space.
    Diffeo {
        /// A built-in space spec such as `axis_cross`, `folded_line`,
        /// `half_line`, `pasta(3,1)`, or `gl(2)` — or the name of a space
        /// declared in the corpus.
        space: String,
        /// What to probe: `theta<k>` (surjectivity search), `theta2-inj`
        /// (injectivity scan), `halfline` (boundary fiber tabulation), or
        /// `group` (matrix-group trivialization round-trip).
        #[arg(long, default_value = "theta2", value_parser = commands::parse_probe)]
        probe: ProbeSpec,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            if let Err(e) = emit(&cli.run, &report) {
                eprintln!("tanfold: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(if report.pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("tanfold: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}

fn run(cli: &Cli) -> tanfold::Result<SuiteReport> {
    let args = &cli.run;
    let corpus = load_corpus(&args.corpus)?;
    let echo = ConfigEcho {
        seed: args.seed,
        trials: args.trials(),
        tol: args.tol.map(dec).unwrap_or_else(|| "default".into()),
        budget: args.budget,
        corpus: corpus_label(&args.corpus),
    };
    match &cli.cmd {
        Cmd::Axioms { corrupt_tau } => commands::axioms(&corpus, args, echo, *corrupt_tau),
        Cmd::Cartan => commands::cartan(&corpus, args, echo),
        Cmd::Bracket => commands::bracket(&corpus, args, echo),
        Cmd::Diffeo { space, probe } => commands::diffeo(&corpus, args, echo, space, probe),
    }
}

/// The shipped corpora when no `--corpus` was given, otherwise the merged
/// contents of every listed file.
fn load_corpus(paths: &[PathBuf]) -> tanfold::Result<Corpus> {
    if paths.is_empty() {
        return Ok(corpus::builtin_default());
    }
    let mut all = Corpus::default();
    for path in paths {
        all.merge(Corpus::from_path(path)?)?;
    }
    Ok(all)
}

fn corpus_label(paths: &[PathBuf]) -> String {
    if paths.is_empty() {
        "builtin".into()
    } else {
        paths
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Write the report to stdout (text or JSON) and, when `--out` is set, the
/// JSON form to that file.
fn emit(args: &RunArgs, report: &SuiteReport) -> tanfold::Result<()> {
    let json = report.to_json();
    if let Some(path) = &args.out {
        std::fs::write(path, &json)?;
    }
    if args.json {
        print!("{json}");
    } else {
        print!("{}", text_summary(report));
    }
    Ok(())
}

fn text_summary(r: &SuiteReport) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "tanfold {} :: {}", r.version, r.command);
    let _ = writeln!(
        out,
        "seed {}  trials {}  tol {}  budget {}  corpus {}",
        r.config.seed, r.config.trials, r.config.tol, r.config.budget, r.config.corpus
    );
    for c in &r.checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        let _ = write!(
            out,
            "{verdict} {} (trials {}, max residual {})",
            c.name, c.trials, c.max_residual
        );
        match &c.detail {
            Some(d) => {
                let _ = writeln!(out, "\n     {d}");
            }
            None => {
                let _ = writeln!(out);
            }
        }
    }
    let _ = writeln!(out, "overall: {}", if r.pass { "PASS" } else { "FAIL" });
    out
}
