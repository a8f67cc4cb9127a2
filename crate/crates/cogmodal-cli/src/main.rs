//! Scriptable front end for the cognitive-attitude model checker.
//!
//! Exit codes follow one convention across subcommands: `0` when the query
//! ran and the answer is positive (formula holds, model valid, equilibria
//! found, fuzz suite clean, counterexample no longer reproduces); `1` when
//! the query ran but the answer is negative; `2` for usage or input errors.
//! With `--json` every stdout line is a self-contained JSON object carrying
//! a `version` field.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cogmodal_core::dynamics::{apply, eval_dynamic, reduce_with_budget};
use cogmodal_core::games::{enumerate_equilibria, game_report, JointAction};
use cogmodal_core::genfuzz::{replay, run_suite, suites, CounterExample, FuzzReport};
use cogmodal_core::syntax::{
    parse_formula, render_formula, Dim, Flavor, Formula, Mode, RevisionOp,
};
use cogmodal_core::Model;
use serde_json::json;

const OUTPUT_VERSION: u32 = 1;
const DEFAULT_BUDGET: u64 = 4096;
const REWRITE_NODE_BUDGET: usize = 1_000_000;

#[derive(Parser)]
#[command(
    name = "cogmodal",
    version,
    about = "Model checking for graded beliefs, desires and preferences"
)]
struct Cli {
    /// Emit line-oriented JSON instead of human-readable text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelArg {
    /// Path to a model file (JSON).
    #[arg(long, value_name = "PATH")]
    model: PathBuf,
}

impl ModelArg {
    fn load(&self) -> Result<Model> {
        Model::load(&self.model)
            .with_context(|| format!("loading model `{}`", self.model.display()))
    }
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct FormulaArg {
    /// Formula source text.
    #[arg(long, value_name = "STR")]
    formula: Option<String>,
    /// Read the formula from a file instead.
    #[arg(long, value_name = "PATH")]
    formula_file: Option<PathBuf>,
}

impl FormulaArg {
    fn parse(&self) -> Result<Formula> {
        let src = match (&self.formula, &self.formula_file) {
            (Some(s), _) => s.clone(),
            (None, Some(path)) => std::fs::read_to_string(path)
                .with_context(|| format!("reading formula file `{}`", path.display()))?,
            (None, None) => unreachable!("clap enforces the group"),
        };
        parse_formula(src.trim()).map_err(|e| anyhow!("parsing formula: {e}"))
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum ModeArg {
    Opt,
    Pess,
}

impl ModeArg {
    fn mode(self) -> Mode {
        match self {
            ModeArg::Opt => Mode::Opt,
            ModeArg::Pess => Mode::Pess,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ModeArg::Opt => "opt",
            ModeArg::Pess => "pess",
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum OpArg {
    /// Radical plausibility upgrade (revise beliefs).
    #[value(name = "radB")]
    RadB,
    /// Radical desirability upgrade (revise desires).
    #[value(name = "radD")]
    RadD,
    /// Conservative plausibility upgrade.
    #[value(name = "conB")]
    ConB,
    /// Conservative desirability upgrade.
    #[value(name = "conD")]
    ConD,
}

impl OpArg {
    fn parts(self) -> (Flavor, Dim) {
        match self {
            OpArg::RadB => (Flavor::Radical, Dim::P),
            OpArg::RadD => (Flavor::Radical, Dim::D),
            OpArg::ConB => (Flavor::Conservative, Dim::P),
            OpArg::ConD => (Flavor::Conservative, Dim::D),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a formula at one world or at every world of a model.
    Check {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        formula: FormulaArg,
        /// Evaluate only at this world (default: all worlds).
        #[arg(long, value_name = "ID")]
        world: Option<String>,
    },
    /// List the worlds of a model where a formula holds.
    Truthset {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        formula: FormulaArg,
    },
    /// Check a model file against the structural constraints.
    Validate {
        #[command(flatten)]
        model: ModelArg,
    },
    /// Apply a revision operator and print or save the upgraded model.
    Transform {
        #[command(flatten)]
        model: ModelArg,
        /// Which upgrade to apply.
        #[arg(long)]
        op: OpArg,
        /// The revising agent.
        #[arg(long, value_name = "ID")]
        agent: String,
        /// The input formula the agent revises towards.
        #[arg(long, value_name = "STR")]
        input: String,
        /// Write the upgraded model here (plus a `.changes.json` sidecar
        /// with the rank movements) instead of printing it.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Rewrite away revision operators, printing an equivalent static formula.
    Rewrite {
        #[command(flatten)]
        formula: FormulaArg,
    },
    /// Enumerate subjective equilibria of a model with action structure.
    Game {
        #[command(flatten)]
        model: ModelArg,
        /// Restrict to one assessment mode (default: report both).
        #[arg(long)]
        mode: Option<ModeArg>,
        /// Enumerate at this world only (default: group worlds by cells).
        #[arg(long, value_name = "ID")]
        world: Option<String>,
        /// Also write the full report (equilibria, best responses,
        /// rationality per world) as JSON.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Run a seeded fuzz suite and report counterexamples.
    Fuzz {
        /// Suite name (see `fuzz --suite list`).
        #[arg(long, value_name = "NAME")]
        suite: String,
        /// Number of generated models.
        #[arg(long, value_name = "N", default_value_t = 500)]
        models: usize,
        /// Generation seed; identical seeds reproduce identical reports.
        #[arg(long, value_name = "S", default_value_t = 1)]
        seed: u64,
        /// Persist the full report (with embedded counterexamples) here.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Re-check a persisted counterexample (or every failure in a report).
    Replay {
        /// A counterexample file or a fuzz report with embedded failures.
        #[arg(long, value_name = "PATH")]
        file: PathBuf,
    },
}

fn main() -> ExitCode {
    // Die quietly when the consumer closes the pipe (`cogmodal ... | head`)
    // instead of panicking in the print machinery.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn budget() -> Result<u64> {
    match std::env::var("COGMODAL_BUDGET") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| anyhow!("COGMODAL_BUDGET must be a non-negative integer, got `{s}`")),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Check { model, formula, world } => check(cli, model, formula, world.as_deref()),
        Command::Truthset { model, formula } => truthset(cli, model, formula),
        Command::Validate { model } => validate(cli, model),
        Command::Transform { model, op, agent, input, out } => {
            transform(cli, model, *op, agent, input, out.as_deref())
        }
        Command::Rewrite { formula } => rewrite(cli, formula),
        Command::Game { model, mode, world, out } => {
            game(cli, model, *mode, world.as_deref(), out.as_deref())
        }
        Command::Fuzz { suite, models, seed, out } => {
            fuzz(cli, suite, *models, *seed, out.as_deref())
        }
        Command::Replay { file } => replay_file(cli, file),
    }
}

fn check(cli: &Cli, model: &ModelArg, formula: &FormulaArg, world: Option<&str>) -> Result<u8> {
    let m = model.load()?;
    let f = formula.parse()?;
    let rendered = render_formula(&f);
    let worlds: Vec<String> = match world {
        Some(id) => vec![id.to_string()],
        None => (0..m.n_worlds()).map(|w| m.world_id(w).to_string()).collect(),
    };
    let mut all = true;
    for id in &worlds {
        let value = eval_dynamic(&m, id, &f)?;
        all &= value;
        if cli.json {
            println!(
                "{}",
                json!({
                    "version": OUTPUT_VERSION,
                    "command": "check",
                    "world": id,
                    "formula": rendered,
                    "value": value,
                })
            );
        } else {
            println!("{id}\t{value}");
        }
    }
    Ok(if all { 0 } else { 1 })
}

fn truthset(cli: &Cli, model: &ModelArg, formula: &FormulaArg) -> Result<u8> {
    let m = model.load()?;
    let f = formula.parse()?;
    let mut worlds = Vec::new();
    for w in 0..m.n_worlds() {
        let id = m.world_id(w);
        if eval_dynamic(&m, id, &f)? {
            worlds.push(id.to_string());
        }
    }
    if cli.json {
        println!(
            "{}",
            json!({
                "version": OUTPUT_VERSION,
                "command": "truthset",
                "formula": render_formula(&f),
                "worlds": worlds,
            })
        );
    } else if worlds.is_empty() {
        println!("(empty)");
    } else {
        println!("{}", worlds.join(" "));
    }
    Ok(if worlds.is_empty() { 1 } else { 0 })
}

fn validate(cli: &Cli, model: &ModelArg) -> Result<u8> {
    let m = model.load()?;
    let report = m.validate();
    if cli.json {
        for v in &report.violations {
            println!(
                "{}",
                json!({
                    "version": OUTPUT_VERSION,
                    "command": "validate",
                    "violation": v,
                    "text": v.to_string(),
                })
            );
        }
        println!(
            "{}",
            json!({
                "version": OUTPUT_VERSION,
                "command": "validate",
                "ok": report.is_ok(),
                "violations": report.violations.len(),
            })
        );
    } else {
        println!("{report}");
    }
    Ok(if report.is_ok() { 0 } else { 1 })
}

fn transform(
    cli: &Cli,
    model: &ModelArg,
    op: OpArg,
    agent: &str,
    input: &str,
    out: Option<&std::path::Path>,
) -> Result<u8> {
    let m = model.load()?;
    let (flavor, dim) = op.parts();
    let op = RevisionOp {
        flavor,
        dim,
        agent: agent.to_string(),
        input: Box::new(parse_formula(input).map_err(|e| anyhow!("parsing input: {e}"))?),
    };
    let result = apply(&m, &op)?;
    let changes = serde_json::to_value(&result.changes)?;
    match out {
        Some(path) => {
            result
                .model
                .save(path)
                .with_context(|| format!("writing `{}`", path.display()))?;
            let sidecar = path.with_extension("changes.json");
            std::fs::write(&sidecar, serde_json::to_string_pretty(&changes)? + "\n")
                .with_context(|| format!("writing `{}`", sidecar.display()))?;
            if cli.json {
                println!(
                    "{}",
                    json!({
                        "version": OUTPUT_VERSION,
                        "command": "transform",
                        "model": path.display().to_string(),
                        "changes": sidecar.display().to_string(),
                        "moved": result.changes.len(),
                    })
                );
            } else {
                println!(
                    "wrote {} (rank movements in {})",
                    path.display(),
                    sidecar.display()
                );
            }
        }
        None => {
            if cli.json {
                println!(
                    "{}",
                    json!({
                        "version": OUTPUT_VERSION,
                        "command": "transform",
                        "model": serde_json::to_value(result.model.to_file())?,
                        "changes": changes,
                    })
                );
            } else {
                // Keep stdout a single loadable model document; the rank
                // movements go to stderr.
                println!("{}", result.model.to_json());
                for c in &result.changes {
                    eprintln!(
                        "# {} {:?} cell {} world {}: rank {} -> {}",
                        c.agent, c.dim, c.cell, c.world, c.old_rank, c.new_rank
                    );
                }
            }
        }
    }
    Ok(0)
}

fn rewrite(cli: &Cli, formula: &FormulaArg) -> Result<u8> {
    let f = formula.parse()?;
    let reduced = reduce_with_budget(&f, REWRITE_NODE_BUDGET)
        .map_err(|e| anyhow!("rewriting: {e}"))?;
    if cli.json {
        println!(
            "{}",
            json!({
                "version": OUTPUT_VERSION,
                "command": "rewrite",
                "formula": render_formula(&f),
                "reduced": render_formula(&reduced),
            })
        );
    } else {
        println!("{}", render_formula(&reduced));
    }
    Ok(0)
}

fn profile_text(profile: &JointAction) -> String {
    profile
        .iter()
        .map(|(agent, action)| format!("{agent}:{action}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn equilibria_line(
    cli: &Cli,
    worlds: &[String],
    mode: &str,
    equilibria: &[JointAction],
) {
    if cli.json {
        println!(
            "{}",
            json!({
                "version": OUTPUT_VERSION,
                "command": "game",
                "worlds": worlds,
                "mode": mode,
                "equilibria": equilibria,
            })
        );
    } else {
        let listed = if equilibria.is_empty() {
            "(none)".to_string()
        } else {
            equilibria.iter().map(profile_text).collect::<Vec<_>>().join(" | ")
        };
        println!("{}\t{mode}\t{listed}", worlds.join(","));
    }
}

fn game(
    cli: &Cli,
    model: &ModelArg,
    mode: Option<ModeArg>,
    world: Option<&str>,
    out: Option<&std::path::Path>,
) -> Result<u8> {
    if out.is_some() && world.is_some() {
        bail!("--out captures the grouped report; drop --world to use it");
    }
    let m = model.load()?;
    let budget = budget()?;
    let modes: Vec<ModeArg> = match mode {
        Some(m) => vec![m],
        None => vec![ModeArg::Opt, ModeArg::Pess],
    };
    let mut any = false;
    match world {
        Some(id) => {
            for mode in &modes {
                let eq = enumerate_equilibria(&m, id, mode.mode(), budget)?;
                any |= !eq.is_empty();
                equilibria_line(cli, &[id.to_string()], mode.name(), &eq);
            }
        }
        None => {
            let report = game_report(&m, budget)?;
            for group in &report.groups {
                for mode in &modes {
                    let eq = match mode {
                        ModeArg::Opt => &group.equilibria_optimistic,
                        ModeArg::Pess => &group.equilibria_pessimistic,
                    };
                    any |= !eq.is_empty();
                    equilibria_line(cli, &group.worlds, mode.name(), eq);
                }
            }
            if let Some(path) = out {
                std::fs::write(path, serde_json::to_string_pretty(&report)? + "\n")
                    .with_context(|| format!("writing `{}`", path.display()))?;
            }
        }
    }
    Ok(if any { 0 } else { 1 })
}

fn fuzz(cli: &Cli, suite: &str, models: usize, seed: u64, out: Option<&std::path::Path>) -> Result<u8> {
    if suite == "list" {
        for name in suites() {
            println!("{name}");
        }
        return Ok(0);
    }
    let report = run_suite(suite, models, seed).map_err(|e| {
        anyhow!("suite `{suite}`: {e} (available: {})", suites().join(", "))
    })?;
    if let Some(path) = out {
        std::fs::write(path, serde_json::to_string_pretty(&report)? + "\n")
            .with_context(|| format!("writing `{}`", path.display()))?;
    }
    if cli.json {
        println!("{}", serde_json::to_string(&report)?);
    } else {
        println!(
            "suite {}: {} models (seed {}), {} checks, {} failures",
            report.suite, report.models, report.seed, report.checks, report.failure_count
        );
        for (name, count) in &report.check_counts {
            println!("  {name}: {count}");
        }
        for f in &report.failures {
            println!("  counterexample: `{}` fails at {}", f.formula, f.world);
        }
        if report.failure_count > 0 && out.is_none() {
            println!("  (use --out to persist counterexamples for replay)");
        }
    }
    Ok(if report.failure_count == 0 { 0 } else { 1 })
}

fn replay_file(cli: &Cli, file: &std::path::Path) -> Result<u8> {
    let text = std::fs::read_to_string(file)
        .with_context(|| format!("reading `{}`", file.display()))?;
    let cases: Vec<CounterExample> = match serde_json::from_str::<CounterExample>(&text) {
        Ok(one) => vec![one],
        Err(_) => {
            let report: FuzzReport = serde_json::from_str(&text).with_context(|| {
                format!("`{}` is neither a counterexample nor a fuzz report", file.display())
            })?;
            report.failures
        }
    };
    if cases.is_empty() {
        if !cli.json {
            println!("no embedded counterexamples to replay");
        }
        return Ok(0);
    }
    let mut reproduced = 0usize;
    for ce in &cases {
        let holds = replay(ce)?;
        if !holds {
            reproduced += 1;
        }
        if cli.json {
            println!(
                "{}",
                json!({
                    "version": OUTPUT_VERSION,
                    "command": "replay",
                    "suite": ce.suite,
                    "world": ce.world,
                    "formula": ce.formula,
                    "reproduces": !holds,
                })
            );
        } else {
            println!(
                "{}: `{}` at {} {}",
                ce.suite,
                ce.formula,
                ce.world,
                if holds { "no longer fails" } else { "still fails" }
            );
        }
    }
    Ok(if reproduced > 0 { 1 } else { 0 })
}
