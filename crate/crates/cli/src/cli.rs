//! Argument parsing and the subcommands.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ksrti_core::gen::{
    classify, generate, lists_completeness, mutual_acceptability_rate, GenSpec, Preset,
    DEFAULT_CHOICES,
};
use ksrti_core::solver::{brute_force_oracle, enumerate_k_stable, find_k_stable, verify_k_stable};
use ksrti_core::{k_extend, Budget, Certificate, Instance, Outcome, PreferenceLists};

use crate::bench::{run_bench, BenchConfig};
use crate::format::{
    parse_instance, parse_matching, serialize_instance, to_json, write_matching, InstanceFile,
};
use crate::{read_file, write_atomic, CliError, Exit};

/// Default cap on the number of matchings printed by `solve --all`.
pub const DEFAULT_LIMIT: usize = 1000;

#[derive(Debug, Parser)]
#[command(
    name = "ksrti",
    version,
    about = "Stable roommates with ties, personalized and network-extended lists"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate random instances.
    Generate(GenerateArgs),
    /// Write the k-extended lists of an instance.
    Extend(ExtendArgs),
    /// Find one or all k-stable matchings.
    Solve(SolveArgs),
    /// Check a matching for k-blocking pairs.
    Verify(VerifyArgs),
    /// Solve every instance in a directory and record the results as CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    Hma,
    Lma,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Hma => Preset::Hma,
            PresetArg::Lma => Preset::Lma,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub agents: usize,
    #[arg(long, conflicts_with = "preset")]
    pub edge_prob: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep only the first L entries of every list.
    #[arg(long, conflicts_with = "preset")]
    pub truncate: Option<usize>,
    /// Number of habit criteria (0 for no profiles).
    #[arg(long, default_value_t = 0)]
    pub criteria: usize,
    #[arg(long, default_value_t = DEFAULT_CHOICES)]
    pub choices: usize,
    /// Fraction of agents that get a profile.
    #[arg(long, default_value_t = 0.0)]
    pub response: f64,
    /// Defaults to --seed.
    #[arg(long)]
    pub profile_seed: Option<u64>,
    #[arg(long, default_value_t = 0.0)]
    pub unwanted_prob: f64,
    #[arg(long, value_enum)]
    pub preset: Option<PresetArg>,
    /// Number of instances; with more than one, --out names a directory.
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExtendArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub k: u32,
    /// Defaults to standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, Args)]
pub struct BudgetArgs {
    /// Search node limit (default 10000000).
    #[arg(long)]
    pub budget_nodes: Option<u64>,
    /// Time limit in seconds (default 60).
    #[arg(long)]
    pub budget_secs: Option<f64>,
}

impl BudgetArgs {
    pub fn budget(&self) -> Result<Budget, CliError> {
        let secs = self
            .budget_secs
            .unwrap_or(Budget::DEFAULT_TIME.as_secs_f64());
        let time = Duration::try_from_secs_f64(secs)
            .map_err(|_| CliError::Usage(format!("invalid --budget-secs {secs}")))?;
        Ok(Budget {
            max_nodes: Some(self.budget_nodes.unwrap_or(Budget::DEFAULT_NODES)),
            time_limit: Some(time),
        })
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub k: u32,
    /// Print every stable matching (up to --limit).
    #[arg(long)]
    pub all: bool,
    #[arg(long, requires = "all")]
    pub limit: Option<usize>,
    /// Use exhaustive enumeration (at most 10 agents).
    #[arg(long)]
    pub oracle: bool,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// Defaults to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub k: u32,
    #[arg(long)]
    pub matching: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub dir: PathBuf,
    /// Comma-separated values of k.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub k: Vec<u32>,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> Exit
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                Exit::InputError
            } else {
                let _ = write!(out, "{text}");
                Exit::Success
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            Exit::InputError
        }
    }
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<Exit, CliError> {
    match command {
        Command::Generate(args) => cmd_generate(&args, out),
        Command::Extend(args) => cmd_extend(&args, out),
        Command::Solve(args) => cmd_solve(&args, out, err),
        Command::Verify(args) => cmd_verify(&args, out),
        Command::Bench(args) => {
            let config = BenchConfig {
                dir: args.dir,
                ks: args.k,
                budget: args.budget.budget()?,
                out: args.out,
                jobs: args.jobs,
            };
            let summary = run_bench(&config)?;
            let _ = writeln!(
                err,
                "{} rows ({} new, {} errors)",
                summary.rows, summary.solved, summary.errors
            );
            Ok(summary.exit())
        }
    }
}

pub fn load_instance(path: &Path) -> Result<Instance, CliError> {
    parse_instance(&read_file(path)?)
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            let _ = out.write_all(text.as_bytes());
            Ok(())
        }
    }
}

/// `cd=… map=… class=…` for a set of lists; map and class are `-` when
/// the lists are empty.
pub fn describe_lists(n: usize, lists: &PreferenceLists) -> Result<String, CliError> {
    let cd = lists_completeness(n, lists)?;
    Ok(match mutual_acceptability_rate(lists) {
        Ok(map) => format!("cd={cd:.4}\tmap={map:.4}\tclass={}", classify(map).label()),
        Err(_) => format!("cd={cd:.4}\tmap=-\tclass=-"),
    })
}

fn cmd_generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<Exit, CliError> {
    let mut spec = match (args.preset, args.edge_prob) {
        (Some(preset), _) => Preset::from(preset).spec(args.agents, args.seed),
        (None, Some(p)) => GenSpec {
            truncate: args.truncate,
            ..GenSpec::new(args.agents, p, args.seed)
        },
        (None, None) => {
            return Err(CliError::Usage(
                "either --edge-prob or --preset is required".into(),
            ))
        }
    };
    spec.criteria_count = args.criteria;
    spec.choices_per_criterion = args.choices;
    spec.response_rate = args.response;
    spec.profile_seed = args.profile_seed.unwrap_or(args.seed);
    spec.unwanted_prob = args.unwanted_prob;
    spec.validate()?;
    if args.count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    if args.count > 1 {
        std::fs::create_dir_all(&args.out).map_err(|source| CliError::Io {
            path: args.out.clone(),
            source,
        })?;
    }
    for i in 0..args.count {
        let (spec, path) = if args.count == 1 {
            (spec.clone(), args.out.clone())
        } else {
            (
                spec.for_instance(i),
                args.out.join(format!("inst-{i:03}.json")),
            )
        };
        let inst = generate(&spec)?;
        write_atomic(&path, serialize_instance(&inst).as_bytes())?;
        let mut line = format!(
            "{}\t{}",
            path.display(),
            describe_lists(inst.len(), &inst.stated)?
        );
        if spec.criteria_count > 0 {
            let extended = k_extend(&inst, 0)?;
            let ext = describe_lists(inst.len(), &extended.lists)?;
            line.push_str(&format!("\textended:\t{ext}"));
        }
        let _ = writeln!(out, "{line}");
    }
    Ok(Exit::Success)
}

fn cmd_extend(args: &ExtendArgs, out: &mut dyn Write) -> Result<Exit, CliError> {
    let inst = load_instance(&args.input)?;
    let ext = k_extend(&inst, args.k)?;
    let text = to_json(&InstanceFile::from_extension(&inst, &ext));
    emit(args.output.as_deref(), &text, out)?;
    Ok(Exit::Success)
}

fn cmd_solve(args: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<Exit, CliError> {
    let inst = load_instance(&args.input)?;
    let budget = args.budget.budget()?;
    let limit = if args.all {
        args.limit.unwrap_or(DEFAULT_LIMIT)
    } else {
        1
    };
    if limit == 0 {
        return Err(CliError::Usage("--limit must be at least 1".into()));
    }

    let (matchings, exit) = if args.oracle {
        let mut all = brute_force_oracle(&inst, args.k)?;
        all.truncate(limit);
        let _ = writeln!(err, "oracle: {} stable matching(s)", all.len());
        let exit = if all.is_empty() {
            Exit::Negative
        } else {
            Exit::Success
        };
        (all, exit)
    } else if args.all {
        let e = enumerate_k_stable(&inst, args.k, limit, budget)?;
        let exit = match (e.matchings.is_empty(), e.complete) {
            (false, _) => Exit::Success,
            (true, true) => Exit::Negative,
            (true, false) => Exit::Budget,
        };
        let _ = writeln!(
            err,
            "{} matching(s) nodes={} ms={:.3}",
            e.matchings.len(),
            e.stats.nodes,
            e.stats.elapsed.as_secs_f64() * 1e3
        );
        if !e.complete && e.matchings.len() < limit {
            let _ = writeln!(err, "search budget exhausted; the list may be incomplete");
        }
        (e.matchings, exit)
    } else {
        let r = find_k_stable(&inst, args.k, budget)?;
        let _ = writeln!(
            err,
            "{} nodes={} ms={:.3}",
            r.outcome.label(),
            r.stats.nodes,
            r.stats.elapsed.as_secs_f64() * 1e3
        );
        match r.outcome {
            Outcome::Satisfiable(m) => (vec![m], Exit::Success),
            Outcome::Unsatisfiable => (Vec::new(), Exit::Negative),
            Outcome::Timeout => (Vec::new(), Exit::Budget),
        }
    };

    if !matchings.is_empty() {
        let text: Vec<String> = matchings.iter().map(write_matching).collect();
        emit(args.out.as_deref(), &text.join("\n"), out)?;
    }
    Ok(exit)
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<Exit, CliError> {
    let inst = load_instance(&args.input)?;
    let m = parse_matching(&read_file(&args.matching)?)?;
    match verify_k_stable(&inst, args.k, &m)? {
        Certificate::StableOk => {
            let _ = writeln!(out, "stable");
            Ok(Exit::Success)
        }
        Certificate::Blocked(pairs) => {
            let _ = writeln!(out, "blocked");
            for p in pairs {
                let _ = writeln!(out, "{}\t{}", p.first(), p.second());
            }
            Ok(Exit::Negative)
        }
    }
}
