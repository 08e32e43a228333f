//! The `disarm` command line: `check`, `query` and `simulate`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use clap::{Parser, Subcommand};
use serde::Deserialize;

use crate::engine::{Engine, EngineError, SubstDisplay};
use crate::estimator::Theory;
use crate::number::Number;
use crate::syntax::{parse_literal, parse_program, write_literal, SourceProgram};
use crate::testbed::{run_simulation, Policy, SimConfig, SimError};

#[derive(Debug, Parser)]
#[command(name = "disarm", version, about = "Defeasible reputation rules and marketplace simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse rule files and run the static checks.
    Check {
        #[arg(long, num_args = 1.., required = true)]
        rules: Vec<PathBuf>,
    },
    /// Evaluate rule files over a fact file and print matching conclusions.
    Query {
        #[arg(long, num_args = 1.., required = true)]
        rules: Vec<PathBuf>,
        #[arg(long)]
        facts: Option<PathBuf>,
        /// Literal pattern, e.g. `WL(trustee->?x)`.
        #[arg(long)]
        pattern: String,
        /// Value of `now()`.
        #[arg(long)]
        now: Option<i64>,
    },
    /// Run the marketplace simulation and write ug.csv, storage.csv and
    /// messages.csv.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Simulate only this DISARM theory next to the baselines.
        #[arg(long, value_parser = ["t1", "t2", "t3"])]
        theory: Option<String>,
        #[arg(long)]
        ttl: Option<u32>,
        #[arg(long)]
        rounds: Option<u64>,
    },
}

/// Flat simulation settings file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub providers: Option<usize>,
    pub densities: Option<[f64; 4]>,
    pub policies: Option<Vec<String>>,
    pub consumers_per_policy: Option<usize>,
    pub rounds: Option<u64>,
    pub seed: Option<u64>,
    pub ttl_limit: Option<u32>,
    pub lookups_per_round: Option<usize>,
    pub acquaintances: Option<usize>,
    pub weights: Option<[f64; 6]>,
    pub social_weights: Option<[f64; 4]>,
    pub score_threshold: Option<f64>,
    pub confidence_threshold: Option<f64>,
    pub transaction_value_threshold: Option<f64>,
    pub rating_weight_min: Option<f64>,
    pub rating_weight_max: Option<f64>,
}

pub fn parse_policy(s: &str) -> anyhow::Result<Policy> {
    let lower = s.to_ascii_lowercase();
    Ok(match lower.as_str() {
        "none" => Policy::None,
        "direct_only" => Policy::DirectOnly,
        _ => match lower.strip_prefix("disarm-") {
            Some(t) => Policy::Disarm(t.parse::<Theory>()?),
            None => anyhow::bail!("unknown policy `{s}`"),
        },
    })
}

impl ConfigFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("{}", path.display()))
    }

    pub fn apply(&self, c: &mut SimConfig) -> anyhow::Result<()> {
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field.clone() { $target = v; })*
            };
        }
        set! {
            providers => c.providers,
            densities => c.densities,
            consumers_per_policy => c.consumers_per_policy,
            rounds => c.rounds,
            seed => c.seed,
            ttl_limit => c.ttl_limit,
            lookups_per_round => c.lookups_per_round,
            acquaintances => c.acquaintances,
            weights => c.estimation.weights,
            social_weights => c.estimation.social_weights,
            confidence_threshold => c.thresholds.confidence,
            transaction_value_threshold => c.thresholds.transaction_value,
            rating_weight_min => c.rating_weight_range.0,
            rating_weight_max => c.rating_weight_range.1,
        }
        if let Some(s) = self.score_threshold {
            c.thresholds.scores = [s; 6];
        }
        if let Some(ps) = &self.policies {
            c.policies = ps.iter().map(|p| parse_policy(p)).collect::<anyhow::Result<_>>()?;
        }
        Ok(())
    }
}

/// Exit status 1: bad input. Exit status 2: failure while running.
#[derive(Debug)]
pub enum Failure {
    Invalid(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Invalid(e) | Failure::Runtime(e) => e,
        }
    }
}

fn invalid(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Invalid(e.into())
}

fn engine_failure(e: EngineError) -> Failure {
    match e {
        EngineError::Builtin { .. } => Failure::Runtime(e.into()),
        _ => Failure::Invalid(e.into()),
    }
}

fn load_rules(paths: &[PathBuf]) -> Result<SourceProgram, Failure> {
    let mut program = SourceProgram::default();
    for path in paths {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))
            .map_err(invalid)?;
        let part = parse_program(&text)
            .with_context(|| path.display().to_string())
            .map_err(invalid)?;
        program = program.merge(part).map_err(invalid)?;
    }
    Ok(program)
}

pub fn cmd_check(rules: &[PathBuf], out: &mut dyn Write) -> Result<(), Failure> {
    let program = load_rules(rules)?;
    let rule_count = program.rules.len();
    let fact_count = program.facts.len();
    let engine = Engine::new(program).map_err(invalid)?;
    writeln!(out, "ok: {rule_count} rules, {fact_count} facts, {} strata", engine.strata().len())
        .map_err(|e| Failure::Runtime(e.into()))
}

pub fn cmd_query(
    rules: &[PathBuf],
    facts: Option<&Path>,
    pattern: &str,
    now: Option<i64>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let pattern = parse_literal(pattern).context("bad pattern").map_err(invalid)?;
    let mut paths = rules.to_vec();
    paths.extend(facts.map(Path::to_path_buf));
    let program = load_rules(&paths)?;
    let engine = Engine::new(program).map_err(engine_failure)?;
    let answers = engine
        .query(&[], now.map(Number::from_int), &pattern)
        .map_err(engine_failure)?;
    for a in answers {
        let mut line = String::new();
        write_literal(&mut line, &a.literal);
        writeln!(out, "{line} {} {}", a.tag, SubstDisplay(&a.subst)).map_err(|e| Failure::Runtime(e.into()))?;
    }
    Ok(())
}

pub struct SimulateArgs<'a> {
    pub config: Option<&'a Path>,
    pub seed: Option<u64>,
    pub out: &'a Path,
    pub theory: Option<&'a str>,
    pub ttl: Option<u32>,
    pub rounds: Option<u64>,
}

/// Builds the run configuration: defaults, then the file, then flags.
pub fn sim_config(args: &SimulateArgs) -> anyhow::Result<SimConfig> {
    let mut c = SimConfig::default();
    if let Some(path) = args.config {
        ConfigFile::load(path)?.apply(&mut c)?;
    }
    if let Some(s) = args.seed {
        c.seed = s;
    }
    if let Some(t) = args.ttl {
        c.ttl_limit = t;
    }
    if let Some(r) = args.rounds {
        c.rounds = r;
    }
    if let Some(t) = args.theory {
        let theory: Theory = t.parse()?;
        c.policies.retain(|p| !matches!(p, Policy::Disarm(_)));
        c.policies.insert(0, Policy::Disarm(theory));
    }
    c.validate()?;
    Ok(c)
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let config = sim_config(args).map_err(invalid)?;
    let outcome = run_simulation(&config).map_err(|e| match e {
        SimError::Config(_) => invalid(e),
        _ => Failure::Runtime(e.into()),
    })?;
    outcome.write_csvs(args.out).map_err(|e| Failure::Runtime(e.into()))?;
    write!(out, "{}", outcome.summary()).map_err(|e| Failure::Runtime(e.into()))
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn main_with(args: impl IntoIterator<Item = impl Into<OsString> + Clone>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 1;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    let result = match &cli.command {
        Command::Check { rules } => cmd_check(rules, out),
        Command::Query { rules, facts, pattern, now } => cmd_query(rules, facts.as_deref(), pattern, *now, out),
        Command::Simulate { config, seed, out: dir, theory, ttl, rounds } => cmd_simulate(
            &SimulateArgs {
                config: config.as_deref(),
                seed: *seed,
                out: dir,
                theory: theory.as_deref(),
                ttl: *ttl,
                rounds: *rounds,
            },
            out,
        ),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {:#}", f.error());
            f.code()
        }
    }
}
