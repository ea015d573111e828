use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use super::{
    env_seed, read_json, resolve_seed, run_protocol, to_json, write_json, AuditFile, FixtureFile, HarnessError,
    InputsFile, InstanceConfig, Schema, SchemeFile, SchemeSpec, Transcript,
};
use crate::audit::{audit_scheme, capacity_coded, capacity_groupwise, AuditReport, MiOutcome, MiValue, DEFAULT_MI_LIMIT};
use crate::field::FieldSpec;
use crate::hypergraph::{feasibility, HypergraphInstance};
use crate::schemes::{general_keygen, symmetric_keygen, Scheme, SchemeParams, SymmetricRequest, DEFAULT_MAX_ATTEMPTS};
use crate::stream::RandomStream;

#[derive(Debug, Parser)]
#[command(name = "securesum", version, about = "Secure summation schemes over prime fields")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimal rate region for coded keys, or for symmetric groupwise keys with --G.
    Capacity(CapacityArgs),
    /// Check that a key hypergraph survives every listed colluding set.
    Feasibility {
        /// JSON: {"K": 4, "edges": [[1,2,4],[2,3],[3,4]], "collusion": [[4]]}
        file: PathBuf,
    },
    /// Build a scheme from an instance config or a precoding fixture.
    Keygen(KeygenArgs),
    /// Run the protocol once and write a transcript.
    Run(RunArgs),
    /// Rank certificates, optional exact mutual information, and rates.
    Audit(AuditArgs),
}

#[derive(Debug, Args)]
struct CapacityArgs {
    #[arg(long = "K")]
    users: usize,
    #[arg(long = "T")]
    max_colluders: usize,
    #[arg(long = "G")]
    group_size: Option<usize>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "source")]
struct KeygenSource {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Externally supplied symmetric precoding blocks.
    #[arg(long)]
    fixture: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct KeygenArgs {
    #[command(flatten)]
    source: KeygenSource,
    #[arg(long)]
    seed: Option<u64>,
    /// Defaults to the config's "output", else standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    scheme: PathBuf,
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    inputs: Option<PathBuf>,
    /// Draw inputs uniformly from the seeded stream.
    #[arg(long)]
    random: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    redact_keys: bool,
}

#[derive(Debug, Args)]
struct AuditArgs {
    #[arg(long)]
    scheme: PathBuf,
    /// Also compute exact mutual information by enumeration.
    #[arg(long)]
    mi: bool,
    #[arg(long)]
    mi_limit: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut stdout = std::io::stdout().lock();
    match execute(cli, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = stdout.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Runs one command, printing human-readable output to `out`.
pub fn execute(cli: Cli, out: &mut dyn std::io::Write) -> Result<(), HarnessError> {
    let outcome = match cli.command {
        Command::Capacity(args) => capacity(args)?,
        Command::Feasibility { file } => feasibility_cmd(&file)?,
        Command::Keygen(args) => keygen(args)?,
        Command::Run(args) => run(args)?,
        Command::Audit(args) => audit(args)?,
    };
    // a failing check still prints its findings before the error
    let (text, err) = match outcome {
        Outcome::Ok(t) => (t, None),
        Outcome::Fail(t, e) => (t, Some(e)),
    };
    out.write_all(text.as_bytes()).map_err(|source| HarnessError::Io { path: "<stdout>".into(), source })?;
    err.map_or(Ok(()), Err)
}

enum Outcome {
    Ok(String),
    Fail(String, HarnessError),
}

fn capacity(args: CapacityArgs) -> Result<Outcome, HarnessError> {
    let usage = |e: crate::audit::AuditError| HarnessError::Usage(e.to_string());
    match args.group_size {
        None => Ok(Outcome::Ok(format!("{}\n", capacity_coded(args.users, args.max_colluders).map_err(usage)?))),
        Some(g) => {
            let region = capacity_groupwise(args.users, args.max_colluders, g).map_err(usage)?;
            let line = format!("{region}\n");
            if region.is_feasible() {
                Ok(Outcome::Ok(line))
            } else {
                Ok(Outcome::Fail(line, HarnessError::Infeasible(format!("no secure scheme for K={}, T={}, G={g}", args.users, args.max_colluders))))
            }
        }
    }
}

#[derive(Deserialize)]
struct FeasibilityFile {
    #[serde(default)]
    schema: Option<Schema>,
    #[serde(flatten)]
    instance: HypergraphInstance,
}

fn feasibility_cmd(path: &Path) -> Result<Outcome, HarnessError> {
    let file: FeasibilityFile = read_json(path)?;
    let _ = file.schema;
    let (graph, family) = file.instance.build().map_err(|e| HarnessError::InvalidFile { path: path.into(), message: e.to_string() })?;
    let verdict = feasibility(&graph, &family).map_err(|e| HarnessError::InvalidFile { path: path.into(), message: e.to_string() })?;
    let line = format!("{verdict}\n");
    if verdict.is_feasible() {
        Ok(Outcome::Ok(line))
    } else {
        Ok(Outcome::Fail(line, HarnessError::Infeasible("the key hypergraph does not survive collusion".into())))
    }
}

fn certificate_lines(scheme: &Scheme) -> String {
    let mut s = String::new();
    for c in scheme.certificate() {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "certificate T={}: rank {}/{} {verdict}", c.collusion, c.found, c.required);
    }
    s
}

fn keygen(args: KeygenArgs) -> Result<Outcome, HarnessError> {
    let env = env_seed();
    let (scheme, seed, mi_limit, output) = if let Some(path) = &args.source.fixture {
        let fixture: FixtureFile = read_json(path)?;
        let seed = resolve_seed(args.seed, env.as_deref(), None)?;
        (fixture.build(path)?, seed, None, None)
    } else {
        let path = args.source.config.as_ref().expect("clap requires one source");
        let config: InstanceConfig = read_json(path)?;
        let seed = resolve_seed(args.seed, env.as_deref(), config.seed)?;
        let field = FieldSpec::new(config.q).map_err(|e| HarnessError::InvalidFile { path: path.clone(), message: e.to_string() })?;
        let scheme = build_from_config(&config, field, seed, path)?;
        (scheme, seed, config.mi_limit, config.output.clone())
    };
    let summary = certificate_lines(&scheme);
    let file = SchemeFile::new(scheme, seed, mi_limit);
    let mut text = match args.out.or(output) {
        Some(path) => {
            write_json(&path, &file)?;
            format!("wrote {}\n", path.display())
        }
        None => to_json(&file),
    };
    text.push_str(&summary);
    if file.scheme.certified() {
        Ok(Outcome::Ok(text))
    } else {
        Ok(Outcome::Fail(text, HarnessError::Insecure("some rank certificates fail".into())))
    }
}

fn build_from_config(config: &InstanceConfig, field: FieldSpec, seed: Option<u64>, path: &Path) -> Result<Scheme, HarnessError> {
    let need_seed = || HarnessError::Usage(format!("a seed is required: pass --seed, set {}, or add \"seed\" to the config", super::SEED_ENV));
    match &config.scheme {
        SchemeSpec::Coded { users, input_len } => {
            // coded keys are drawn per run; the scheme itself has no random precoding
            let params = SchemeParams::coded(*users, *input_len, field)?;
            Ok(Scheme::from_parts(params, Vec::new())?)
        }
        &SchemeSpec::Symmetric { users, max_colluders, group_size, multiplier } => {
            let request = SymmetricRequest {
                users,
                max_colluders,
                group_size,
                multiplier,
                max_attempts: config.max_attempts.unwrap_or(DEFAULT_MAX_ATTEMPTS),
            };
            let seed = seed.ok_or_else(need_seed)?;
            Ok(symmetric_keygen(request, field, &RandomStream::new(seed))?)
        }
        SchemeSpec::General { hypergraph } => {
            let (graph, family) =
                hypergraph.build().map_err(|e| HarnessError::InvalidFile { path: path.into(), message: e.to_string() })?;
            Ok(general_keygen(graph, family, field)?)
        }
    }
}

fn load_scheme(path: &Path) -> Result<SchemeFile, HarnessError> {
    read_json(path)
}

fn run(args: RunArgs) -> Result<Outcome, HarnessError> {
    let file = load_scheme(&args.scheme)?;
    let seed = resolve_seed(args.seed, env_seed().as_deref(), None)?
        .ok_or_else(|| HarnessError::Usage(format!("run needs --seed or {}", super::SEED_ENV)))?;
    let inputs = match &args.inputs {
        Some(path) => Some(read_json::<InputsFile>(path)?.to_vectors(&file.scheme, path)?),
        None => None,
    };
    let transcript = run_protocol(&file.scheme, inputs, seed, args.redact_keys)?;
    let sum = transcript.decoded_sum.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
    let mut text = match &args.out {
        Some(path) => {
            write_json(path, &transcript)?;
            format!("wrote {}\n", path.display())
        }
        None => to_json(&transcript),
    };
    let _ = writeln!(text, "decoded sum: {sum}");
    if transcript.summary.decoded_matches {
        Ok(Outcome::Ok(text))
    } else {
        Ok(Outcome::Fail(text, HarnessError::Insecure("decoded sum differs from the sum of the inputs".into())))
    }
}

fn mi_cell(outcome: &MiOutcome) -> String {
    match outcome {
        MiOutcome::Computed { mi: MiValue::Exact { value }, .. } => value.to_string(),
        MiOutcome::Computed { mi: MiValue::Approximate { value, abs_error }, .. } => format!("{value:.6}±{abs_error:.1e}"),
        MiOutcome::Skipped { .. } => "skipped".into(),
        MiOutcome::Error { .. } => "error".into(),
    }
}

/// Table with one row per colluding set, followed by the rate comparison.
pub fn render_report(report: &AuditReport) -> String {
    let mut rows: Vec<[String; 5]> = vec![["T".into(), "rank".into(), "required".into(), "MI".into(), "result".into()]];
    let mut sets: Vec<_> = report.per_collusion.iter().map(|c| c.collusion.clone()).collect();
    for m in &report.mi_checks {
        if !sets.contains(&m.collusion) {
            sets.push(m.collusion.clone());
        }
    }
    for t in &sets {
        let cert = report.per_collusion.iter().find(|c| &c.collusion == t);
        let mi = report.mi_checks.iter().find(|m| &m.collusion == t);
        let pass = cert.is_none_or(|c| c.pass)
            && mi.is_none_or(|m| match &m.outcome {
                MiOutcome::Computed { mi, .. } => mi.is_zero(),
                MiOutcome::Skipped { .. } => true,
                MiOutcome::Error { .. } => false,
            });
        rows.push([
            t.to_string(),
            cert.map_or("-".into(), |c| c.found.to_string()),
            cert.map_or("-".into(), |c| c.required.to_string()),
            mi.map_or("-".into(), |m| mi_cell(&m.outcome)),
            if pass { "PASS".into() } else { "FAIL".into() },
        ]);
    }
    let widths: Vec<usize> = (0..5).map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0)).collect();
    let mut s = String::new();
    for r in &rows {
        let cells: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(s, "{}", cells.join("  ").trim_end());
    }
    for e in &report.errors {
        let _ = writeln!(s, "error T={}: {}", e.collusion, e.message);
    }
    for c in &report.rates.coordinates {
        let bound = c.bound.map_or("unknown".into(), |b| b.to_string());
        let verdict = match c.optimal {
            Some(true) => "optimal",
            Some(false) => "suboptimal",
            None => "no bound",
        };
        let _ = writeln!(s, "{} = {} (bound {bound}, {verdict})", c.name, c.achieved);
    }
    s
}

fn audit(args: AuditArgs) -> Result<Outcome, HarnessError> {
    let file = load_scheme(&args.scheme)?;
    let family = file.scheme.params().default_family();
    let limit = args.mi.then(|| args.mi_limit.or(file.mi_limit).unwrap_or(DEFAULT_MI_LIMIT));
    let report = audit_scheme(&file.scheme, &family, limit).map_err(|e| HarnessError::Usage(e.to_string()))?;
    let mut text = render_report(&report);
    if let Some(path) = &args.out {
        write_json(path, &AuditFile { schema: Schema, report: report.clone() })?;
        let _ = writeln!(text, "wrote {}", path.display());
    }
    if !report.secure() {
        return Ok(Outcome::Fail(text, HarnessError::Insecure("audit found a failing check".into())));
    }
    if report.mi_skipped() {
        return Ok(Outcome::Fail(text, HarnessError::ResourceLimit("mutual information skipped: state space above --mi-limit".into())));
    }
    Ok(Outcome::Ok(text))
}

/// Parses a transcript file, validating its sums.
pub fn load_transcript(path: &Path) -> Result<Transcript, HarnessError> {
    read_json(path)
}
