//! qrt: build random-like regular tournaments and check what makes them
//! random-like — spectra, consistent-edge rankings, mixing, domination.

mod canon;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qrt_core::{
    bisection_certificate, certify, circulant_spectrum, exact_max_consistent, has_schutte,
    heuristic_max_consistent, mixing_audit, tournament_spectrum, AuditMode, AuditOptions,
    CertifyOptions, HeuristicOptions, Spectrum, DEFAULT_DP_CAP, DEFAULT_SCHUTTE_BUDGET,
    MAX_DP_CAP,
};
use serde_json::{json, Value};
use thiserror::Error;

use input::{InputArgs, ResolvedInput, SpecArgs};

#[derive(Debug, Error)]
enum CliError {
    /// Bad flags, unreadable input, or an unmet precondition → exit 2.
    #[error("{0}")]
    Usage(String),
    /// The run finished but an invariant it checks did not hold → exit 1.
    #[error("{0}")]
    Invariant(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Invariant(_) => 1,
        }
    }
}

type CliResult = Result<(), CliError>;

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Parser)]
#[command(
    name = "qrt",
    version,
    about = "Random-like regular tournaments: construction, spectra, rankings, certification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a tournament and emit its text form
    Construct(ConstructArgs),
    /// Produce the full quasi-randomness certificate report
    Certify(CertifyArgs),
    /// Rank vertices to maximize consistent edges (exact DP or local search)
    Rank(RankArgs),
    /// Eigenvalue magnitudes and the spectral gap λ
    Spectrum(SpectrumArgs),
    /// Check the Schütte domination property S_k exhaustively
    Schutte(SchutteArgs),
    /// Audit the expander-mixing bounds over vertex-set pairs
    Audit(AuditArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the result here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

impl OutputArgs {
    fn render(&self, value: Value) -> String {
        let value = canon::canonicalize(value);
        match self.format {
            Format::Json => canon::to_json_line(&value),
            Format::Text => canon::to_text(&value),
        }
    }

    fn emit(&self, value: Value) -> CliResult {
        let rendered = self.render(value);
        match &self.out {
            Some(path) => std::fs::write(path, rendered)
                .map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
            None => {
                print!("{rendered}");
                Ok(())
            }
        }
    }
}

/// Attach the input's content hash so every report is traceable to its
/// tournament bytes.
fn with_hash(value: Value, hash: &str) -> Value {
    let Value::Object(mut map) = value else { panic!("reports are JSON objects") };
    map.insert("content_hash".into(), Value::String(hash.into()));
    Value::Object(map)
}

/// QRT_THREADS overrides --threads when set.
fn effective_threads(flag: usize) -> Result<usize, CliError> {
    let threads = match std::env::var("QRT_THREADS") {
        Ok(raw) => raw
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Usage(format!("QRT_THREADS must be a positive integer, got {raw:?}")))?,
        Err(_) => flag,
    };
    positive(threads, "threads")?;
    Ok(threads)
}

fn positive<T: PartialOrd + Default + std::fmt::Display>(value: T, name: &str) -> Result<T, CliError> {
    if value <= T::default() {
        return Err(CliError::Usage(format!("{name} must be positive")));
    }
    Ok(value)
}

fn dp_cap_in_range(cap: usize) -> Result<usize, CliError> {
    if !(1..=MAX_DP_CAP).contains(&cap) {
        return Err(CliError::Usage(format!("--dp-cap must be in 1..={MAX_DP_CAP}")));
    }
    Ok(cap)
}

/// Spectrum via the character-sum path when the input is circulant, else via
/// the symmetric eigenproblem on MMᵗ.
fn spectrum_for(resolved: &ResolvedInput) -> Result<Spectrum, CliError> {
    match &resolved.residues {
        Some(set) => circulant_spectrum(set, resolved.tournament.n() as u64).map_err(usage),
        None => tournament_spectrum(&resolved.tournament).map_err(usage),
    }
}

#[derive(Args)]
struct ConstructArgs {
    #[command(flatten)]
    spec: SpecArgs,

    #[command(flatten)]
    output: OutputArgs,
}

fn cmd_construct(args: &ConstructArgs) -> CliResult {
    if args.spec.spec_json.is_none() && args.spec.family.is_none() {
        return Err(CliError::Usage(
            "provide a construction via --family or --spec-json".into(),
        ));
    }
    let spec = args.spec.to_spec()?;
    let built = spec.build().map_err(usage)?;
    let text = built.tournament.to_text();
    let valid = built.tournament.validate().is_ok();
    let status = json!({
        "family": spec.family_name(),
        "n": built.tournament.n(),
        "regular": built.tournament.is_regular(),
        "valid": valid,
        "spec": serde_json::to_value(&spec).expect("spec serializes"),
        "content_hash": input::content_hash(&text),
    });
    match &args.output.out {
        Some(path) => {
            std::fs::write(path, &text)
                .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
            print!("{}", args.output.render(status));
        }
        None => {
            // tournament text owns stdout so it can be piped; status goes to stderr
            print!("{text}");
            eprint!("{}", args.output.render(status));
        }
    }
    if !valid {
        return Err(CliError::Invariant("constructed tournament failed validation".into()));
    }
    Ok(())
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Require the exact DP ranking; fail instead of degrading to the heuristic
    #[arg(long)]
    exact: bool,

    #[arg(long, default_value_t = DEFAULT_DP_CAP)]
    dp_cap: usize,

    #[arg(long, default_value_t = 8)]
    restarts: u32,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Schütte levels to check, comma separated
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    schutte_k: Vec<u32>,

    /// Subset-enumeration budget for the Schütte checks
    #[arg(long, default_value_t = DEFAULT_SCHUTTE_BUDGET)]
    budget: u64,

    #[arg(long, value_enum, default_value_t = AuditModeArg::Sampled)]
    audit_mode: AuditModeArg,

    /// Sampled-audit trial count
    #[arg(long, default_value_t = 10_000)]
    trials: u64,

    #[arg(long, default_value_t = 1)]
    threads: usize,

    #[command(flatten)]
    output: OutputArgs,
}

fn cmd_certify(args: &CertifyArgs) -> CliResult {
    let resolved = args.input.resolve()?;
    let options = CertifyOptions {
        dp_cap: dp_cap_in_range(args.dp_cap)?,
        require_exact: args.exact,
        restarts: positive(args.restarts, "--restarts")?,
        seed: args.seed,
        schutte_ks: args.schutte_k.clone(),
        schutte_budget: positive(args.budget, "--budget")?,
        audit: AuditOptions {
            mode: args.audit_mode.into(),
            trials: positive(args.trials, "--trials")?,
            seed: args.seed,
            threads: 1, // certify overrides from its own threads field
        },
        pattern_tol: 1e-6,
        threads: effective_threads(args.threads)?,
    };
    // every certify error (over-cap with --exact, bad construction, audit
    // preconditions) is a usage/precondition failure → exit 2
    let report =
        certify(&resolved.tournament, resolved.spec.as_ref(), &options).map_err(usage)?;
    let violations = report.invariant_violations();
    let value = serde_json::to_value(&report).expect("report serializes");
    args.output.emit(with_hash(value, &resolved.content_hash))?;
    if !violations.is_empty() {
        return Err(CliError::Invariant(violations.join("; ")));
    }
    Ok(())
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Exact subset DP (errors when n exceeds the cap)
    #[arg(long, conflicts_with = "heuristic")]
    exact: bool,

    /// Insertion local search with seeded restarts (the default)
    #[arg(long)]
    heuristic: bool,

    #[arg(long, default_value_t = DEFAULT_DP_CAP)]
    dp_cap: usize,

    #[arg(long, default_value_t = 8)]
    restarts: u32,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, default_value_t = 1)]
    threads: usize,

    /// Also emit the recursive-bisection certificate for the best ranking
    #[arg(long)]
    certificate: bool,

    #[command(flatten)]
    output: OutputArgs,
}

fn cmd_rank(args: &RankArgs) -> CliResult {
    let resolved = args.input.resolve()?;
    let result = if args.exact {
        exact_max_consistent(&resolved.tournament, dp_cap_in_range(args.dp_cap)?).map_err(usage)?
    } else {
        heuristic_max_consistent(
            &resolved.tournament,
            &HeuristicOptions {
                restarts: positive(args.restarts, "--restarts")?,
                seed: args.seed,
                threads: effective_threads(args.threads)?,
            },
        )
    };
    let mut value = serde_json::to_value(&result).expect("result serializes");
    if args.certificate {
        let lambda = spectrum_for(&resolved).ok().map(|s| s.lambda);
        let cert = bisection_certificate(&resolved.tournament, &result.best_sigma, lambda);
        value
            .as_object_mut()
            .expect("ranking result is an object")
            .insert("certificate".into(), serde_json::to_value(&cert).expect("certificate serializes"));
    }
    args.output.emit(with_hash(value, &resolved.content_hash))
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    input: InputArgs,

    #[command(flatten)]
    output: OutputArgs,
}

fn cmd_spectrum(args: &SpectrumArgs) -> CliResult {
    let resolved = args.input.resolve()?;
    let spectrum = spectrum_for(&resolved)?;
    let value = serde_json::to_value(&spectrum).expect("spectrum serializes");
    args.output.emit(with_hash(value, &resolved.content_hash))
}

#[derive(Args)]
struct SchutteArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Subset size k of the S_k property
    #[arg(short, long)]
    k: u32,

    /// Subset-enumeration budget
    #[arg(long, default_value_t = DEFAULT_SCHUTTE_BUDGET)]
    budget: u64,

    #[command(flatten)]
    output: OutputArgs,
}

fn cmd_schutte(args: &SchutteArgs) -> CliResult {
    let resolved = args.input.resolve()?;
    let result = has_schutte(&resolved.tournament, args.k, positive(args.budget, "--budget")?)
        .map_err(usage)?;
    let value = serde_json::to_value(&result).expect("result serializes");
    args.output.emit(with_hash(value, &resolved.content_hash))
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AuditModeArg {
    Exhaustive,
    Sampled,
}

impl From<AuditModeArg> for AuditMode {
    fn from(arg: AuditModeArg) -> Self {
        match arg {
            AuditModeArg::Exhaustive => AuditMode::Exhaustive,
            AuditModeArg::Sampled => AuditMode::Sampled,
        }
    }
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    input: InputArgs,

    #[arg(long, value_enum, default_value_t = AuditModeArg::Sampled)]
    mode: AuditModeArg,

    /// Sampled-mode trial count
    #[arg(long, default_value_t = 10_000)]
    trials: u64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, default_value_t = 1)]
    threads: usize,

    #[command(flatten)]
    output: OutputArgs,
}

fn cmd_audit(args: &AuditArgs) -> CliResult {
    let resolved = args.input.resolve()?;
    let spectrum = spectrum_for(&resolved)?;
    let audit = mixing_audit(
        &resolved.tournament,
        &spectrum,
        &AuditOptions {
            mode: args.mode.into(),
            trials: positive(args.trials, "--trials")?,
            seed: args.seed,
            threads: effective_threads(args.threads)?,
        },
    )
    .map_err(usage)?;
    let violations = audit.violations;
    let value = serde_json::to_value(&audit).expect("audit serializes");
    args.output.emit(with_hash(value, &resolved.content_hash))?;
    if violations > 0 {
        return Err(CliError::Invariant(format!(
            "mixing audit found {violations} violation(s)"
        )));
    }
    Ok(())
}

fn run(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Construct(args) => cmd_construct(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Rank(args) => cmd_rank(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Schutte(args) => cmd_schutte(args),
        Command::Audit(args) => cmd_audit(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
