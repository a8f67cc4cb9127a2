//! Deterministic random generation of models and formulas, plus the fuzz
//! suites that hammer the kernel with schema instances and cross-checks.
//!
//! Everything is reproducible: a suite is identified by `(name, seed,
//! models)`, and model number `k` is generated from a ChaCha stream derived
//! from `seed` and `k`, so runs parallelize without losing determinism.
//!
//! Counterexamples are self-contained: they embed the offending model, the
//! world and the rendered formula, so `replay` can re-evaluate them without
//! any other state. For oracle suites that compare relations rather than
//! formulas (transform agreement, rank roundtrips) the recorded formula is
//! a best-effort witness built from a nominal of the offending world.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checker::{check_wt, eval_at, valid_on, Session};
use crate::dynamics::{apply, eval_dynamic, reduce, valid_on_dynamic};
use crate::games::{self, GameError, JointAction};
use crate::model::{Model, ModelError, ModelFile, PairSet, WorldSet};
use crate::syntax::{
    expand_attitudes, parse_formula, render_formula, Attitude, Dim, Flavor, Formula,
    Mode, ParseError, PrefArg, Program, RevisionOp,
};

// ---------------------------------------------------------------------------
// Generation

/// Bounds for random model generation.
#[derive(Debug, Clone)]
pub struct GenSpec {
    pub max_worlds: usize,
    pub max_agents: usize,
    pub max_atoms: usize,
    pub max_cells: usize,
    pub max_rank: u64,
    /// Equip the model with an action alphabet and a choice function that
    /// satisfies choice independence by construction.
    pub with_choices: bool,
    pub max_actions: usize,
    /// Couple desirability to plausibility so that every cell's most
    /// plausible worlds sit at one desirability extreme.
    pub wt_bias: bool,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            max_worlds: 6,
            max_agents: 3,
            max_atoms: 3,
            max_cells: 3,
            max_rank: 3,
            with_choices: false,
            max_actions: 3,
            wt_bias: false,
        }
    }
}

/// The vocabulary of a model, used to keep generated formulas well-formed.
#[derive(Debug, Clone)]
pub struct GenCtx {
    pub agents: Vec<String>,
    pub atoms: Vec<String>,
    pub actions: Vec<String>,
    pub nominals: Vec<String>,
}

impl GenCtx {
    pub fn of(m: &Model) -> GenCtx {
        GenCtx {
            agents: m.agents.clone(),
            atoms: m.atoms.iter().cloned().collect(),
            actions: m.actions.clone().unwrap_or_default(),
            nominals: m
                .worlds
                .iter()
                .flat_map(|w| w.nominals.iter().cloned())
                .collect(),
        }
    }
}

/// The generator stream for model number `index` of a run seeded by `seed`.
pub fn model_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> &'a T {
    &items[rng.gen_range(0..items.len())]
}

fn gen_dim(rng: &mut ChaCha8Rng) -> Dim {
    if rng.gen_bool(0.5) {
        Dim::P
    } else {
        Dim::D
    }
}

fn gen_mode(rng: &mut ChaCha8Rng) -> Mode {
    if rng.gen_bool(0.5) {
        Mode::Opt
    } else {
        Mode::Pess
    }
}

/// Generate a model within the bounds of `spec`. The result always passes
/// validation: the rank encoding yields the order constraints for free, and
/// game models realize a full grid of action profiles inside every cell.
pub fn gen_model(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Model {
    const AGENT_POOL: [&str; 3] = ["1", "2", "3"];
    const ATOM_POOL: [&str; 4] = ["p", "q", "r", "s"];
    const ACTION_POOL: [&str; 3] = ["a", "b", "c"];

    let n_agents = rng.gen_range(1..=spec.max_agents.clamp(1, AGENT_POOL.len()));
    let agents: Vec<String> = AGENT_POOL[..n_agents].iter().map(|s| s.to_string()).collect();
    let n_atoms = rng.gen_range(1..=spec.max_atoms.clamp(1, ATOM_POOL.len()));
    let atoms: Vec<String> = ATOM_POOL[..n_atoms].iter().map(|s| s.to_string()).collect();

    // Skeleton: a free pool of worlds, or `copies` stacked copies of a full
    // grid of action profiles (which makes choice independence immediate:
    // any union of copies realizes every combination of played actions).
    let max_worlds = spec.max_worlds.max(2);
    let (n_worlds, actions, profiles, copy_of): (
        usize,
        Option<Vec<String>>,
        Vec<Vec<String>>,
        Vec<usize>,
    ) = if spec.with_choices {
        let n_actions = rng.gen_range(2..=spec.max_actions.clamp(2, ACTION_POOL.len()));
        let actions: Vec<String> =
            ACTION_POOL[..n_actions].iter().map(|s| s.to_string()).collect();
        let mut sizes = vec![1usize; n_agents];
        loop {
            let grid: usize = sizes.iter().product();
            let growable: Vec<usize> = (0..n_agents)
                .filter(|&i| sizes[i] < n_actions && grid / sizes[i] * (sizes[i] + 1) <= max_worlds)
                .collect();
            if growable.is_empty() || rng.gen_bool(0.3) {
                break;
            }
            sizes[*pick(rng, &growable)] += 1;
        }
        let played: Vec<Vec<String>> = sizes
            .iter()
            .map(|&s| actions.choose_multiple(rng, s).cloned().collect())
            .collect();
        let mut grid_profiles: Vec<Vec<String>> = vec![Vec::new()];
        for options in &played {
            grid_profiles = grid_profiles
                .into_iter()
                .flat_map(|partial| {
                    options.iter().map(move |a| {
                        let mut next = partial.clone();
                        next.push(a.clone());
                        next
                    })
                })
                .collect();
        }
        let grid = grid_profiles.len();
        let mut copies = rng.gen_range(1..=(max_worlds / grid).max(1));
        if grid * copies < 2 {
            copies = 2;
        }
        let mut profiles = Vec::with_capacity(grid * copies);
        let mut copy_of = Vec::with_capacity(grid * copies);
        for c in 0..copies {
            for t in &grid_profiles {
                profiles.push(t.clone());
                copy_of.push(c);
            }
        }
        (grid * copies, Some(actions), profiles, copy_of)
    } else {
        let n = rng.gen_range(2..=max_worlds);
        (n, None, vec![Vec::new(); n], (0..n).collect())
    };

    // Cells: per agent, a random label per world — except that game models
    // label whole grid copies, keeping every cell a union of full grids.
    let units = copy_of.iter().max().copied().unwrap_or(0) + 1;
    let cell_of: Vec<Vec<String>> = (0..n_agents)
        .map(|_| {
            let n_cells = rng.gen_range(1..=spec.max_cells.clamp(1, units));
            let unit_cell: Vec<usize> =
                (0..units).map(|_| rng.gen_range(0..n_cells)).collect();
            (0..n_worlds).map(|w| format!("c{}", unit_cell[copy_of[w]])).collect()
        })
        .collect();

    let wt_mirror: Vec<bool> = (0..n_agents).map(|_| rng.gen_bool(0.5)).collect();
    let worlds = (0..n_worlds)
        .map(|w| {
            let world_atoms: Vec<String> =
                atoms.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
            let states = (0..n_agents)
                .map(|i| {
                    let rank_p = rng.gen_range(0..=spec.max_rank);
                    let rank_d = if spec.wt_bias {
                        if wt_mirror[i] {
                            spec.max_rank - rank_p
                        } else {
                            rank_p
                        }
                    } else {
                        rng.gen_range(0..=spec.max_rank)
                    };
                    let choice = profiles[w].get(i).cloned();
                    (
                        agents[i].clone(),
                        crate::model::AgentStateFile {
                            cell: cell_of[i][w].clone(),
                            rank_p,
                            rank_d,
                            choice,
                        },
                    )
                })
                .collect();
            crate::model::WorldFile {
                id: format!("w{}", w + 1),
                nominals: Vec::new(),
                atoms: world_atoms,
                agents: states,
            }
        })
        .collect();

    let file = ModelFile { version: 1, agents, atoms, actions, worlds };
    Model::from_file(file).expect("generated models are well-formed")
}

/// Generate a program over the model's vocabulary.
pub fn gen_program(ctx: &GenCtx, rng: &mut ChaCha8Rng, depth: usize) -> Program {
    let agent = pick(rng, &ctx.agents).clone();
    let dim = gen_dim(rng);
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..10) {
            0..=2 => Program::Eq(agent),
            3..=4 => Program::Le(agent, dim),
            5..=6 => Program::Nle(agent, dim),
            7 => Program::Ge(agent, dim),
            8 => Program::Lt(agent, dim),
            _ => match rng.gen_range(0..3) {
                0 => Program::Gt(agent, dim),
                1 => Program::Nge(agent, dim),
                _ => Program::Sim(agent, dim),
            },
        };
    }
    match rng.gen_range(0..5) {
        0 => Program::seq(gen_program(ctx, rng, depth - 1), gen_program(ctx, rng, depth - 1)),
        1 => Program::union(gen_program(ctx, rng, depth - 1), gen_program(ctx, rng, depth - 1)),
        2 => Program::inter(gen_program(ctx, rng, depth - 1), gen_program(ctx, rng, depth - 1)),
        3 => Program::conv(gen_program(ctx, rng, depth - 1)),
        _ => Program::test(gen_formula(ctx, rng, depth - 1)),
    }
}

/// Generate a static formula (no revision operators) over the vocabulary.
pub fn gen_formula(ctx: &GenCtx, rng: &mut ChaCha8Rng, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        let mut roll = rng.gen_range(0..12);
        if ctx.actions.is_empty() && roll >= 10 {
            roll = rng.gen_range(0..10);
        }
        if ctx.nominals.is_empty() && roll == 9 {
            roll = 2;
        }
        return match roll {
            0 => Formula::True,
            1 => Formula::False,
            2..=8 => Formula::Atom(pick(rng, &ctx.atoms).clone()),
            9 => Formula::Nominal(pick(rng, &ctx.nominals).clone()),
            _ => Formula::Play(pick(rng, &ctx.agents).clone(), pick(rng, &ctx.actions).clone()),
        };
    }
    match rng.gen_range(0..9) {
        0 => Formula::not(gen_formula(ctx, rng, depth - 1)),
        1 => Formula::and(gen_formula(ctx, rng, depth - 1), gen_formula(ctx, rng, depth - 1)),
        2 => Formula::or(gen_formula(ctx, rng, depth - 1), gen_formula(ctx, rng, depth - 1)),
        3 => Formula::implies(gen_formula(ctx, rng, depth - 1), gen_formula(ctx, rng, depth - 1)),
        4 => Formula::iff(gen_formula(ctx, rng, depth - 1), gen_formula(ctx, rng, depth - 1)),
        5 => Formula::box_(gen_program(ctx, rng, depth - 1), gen_formula(ctx, rng, depth - 1)),
        6 => Formula::diamond(gen_program(ctx, rng, depth - 1), gen_formula(ctx, rng, depth - 1)),
        _ => Formula::attitude(gen_attitude(ctx, rng, depth - 1)),
    }
}

/// Generate a formula from the rank-independent fragment: boolean
/// combinations of truth constants, atoms, nominals, and played actions.
/// A rank revision never moves the extension of such a formula, which is
/// the precondition for the revision success laws; richer inputs that
/// mention attitudes or comparative modalities can refute themselves
/// (revising towards them changes what they say).
pub fn gen_boolean_formula(ctx: &GenCtx, rng: &mut ChaCha8Rng, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        let mut roll = rng.gen_range(0..12);
        if ctx.actions.is_empty() && roll >= 10 {
            roll = rng.gen_range(0..10);
        }
        if ctx.nominals.is_empty() && roll == 9 {
            roll = 2;
        }
        return match roll {
            0 => Formula::True,
            1 => Formula::False,
            2..=8 => Formula::Atom(pick(rng, &ctx.atoms).clone()),
            9 => Formula::Nominal(pick(rng, &ctx.nominals).clone()),
            _ => Formula::Play(pick(rng, &ctx.agents).clone(), pick(rng, &ctx.actions).clone()),
        };
    }
    match rng.gen_range(0..5) {
        0 => Formula::not(gen_boolean_formula(ctx, rng, depth - 1)),
        1 => Formula::and(
            gen_boolean_formula(ctx, rng, depth - 1),
            gen_boolean_formula(ctx, rng, depth - 1),
        ),
        2 => Formula::or(
            gen_boolean_formula(ctx, rng, depth - 1),
            gen_boolean_formula(ctx, rng, depth - 1),
        ),
        3 => Formula::implies(
            gen_boolean_formula(ctx, rng, depth - 1),
            gen_boolean_formula(ctx, rng, depth - 1),
        ),
        _ => Formula::iff(
            gen_boolean_formula(ctx, rng, depth - 1),
            gen_boolean_formula(ctx, rng, depth - 1),
        ),
    }
}

/// Generate one attitude operator with arguments of the given depth.
pub fn gen_attitude(ctx: &GenCtx, rng: &mut ChaCha8Rng, depth: usize) -> Attitude {
    let agent = pick(rng, &ctx.agents).clone();
    let d = depth.min(2);
    match rng.gen_range(0..7) {
        0 => Attitude::Belief { agent, prop: gen_formula(ctx, rng, d) },
        1 => Attitude::StrongBelief { agent, prop: gen_formula(ctx, rng, d) },
        2 => Attitude::CondBelief {
            agent,
            cond: gen_formula(ctx, rng, d),
            prop: gen_formula(ctx, rng, d),
        },
        3 => Attitude::Desire { agent, prop: gen_formula(ctx, rng, d) },
        4 => Attitude::StrongDesire { agent, prop: gen_formula(ctx, rng, d) },
        5 => Attitude::CondDesire {
            agent,
            cond: gen_formula(ctx, rng, d),
            prop: gen_formula(ctx, rng, d),
        },
        _ => Attitude::Pref {
            agent,
            mode: gen_mode(rng),
            realistic: rng.gen_bool(0.5),
            arg: match rng.gen_range(0..3) {
                0 => PrefArg::Weak(gen_formula(ctx, rng, d), gen_formula(ctx, rng, d)),
                1 => PrefArg::Strict(gen_formula(ctx, rng, d), gen_formula(ctx, rng, d)),
                _ => PrefArg::Monadic(gen_formula(ctx, rng, d)),
            },
        },
    }
}

/// Generate a revision operator with a static input.
pub fn gen_revision_op(ctx: &GenCtx, rng: &mut ChaCha8Rng) -> RevisionOp {
    RevisionOp {
        flavor: if rng.gen_bool(0.5) { Flavor::Radical } else { Flavor::Conservative },
        dim: gen_dim(rng),
        agent: pick(rng, &ctx.agents).clone(),
        input: Box::new(gen_formula(ctx, rng, 2)),
    }
}

/// Generate a formula with one or two nested revision operators.
pub fn gen_dynamic_formula(ctx: &GenCtx, rng: &mut ChaCha8Rng) -> Formula {
    let mut f = Formula::dyn_(gen_revision_op(ctx, rng), gen_formula(ctx, rng, 2));
    if rng.gen_bool(0.5) {
        f = Formula::and(f, gen_formula(ctx, rng, 1));
    }
    if rng.gen_bool(0.4) {
        f = Formula::dyn_(gen_revision_op(ctx, rng), f);
    }
    if rng.gen_bool(0.3) {
        f = Formula::not(f);
    }
    f
}

// ---------------------------------------------------------------------------
// Reports

/// A self-contained failed check: the embedded model, a world and a formula
/// that was expected to hold there.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CounterExample {
    pub version: u32,
    pub suite: String,
    pub world: String,
    pub formula: String,
    pub model: ModelFile,
}

/// Outcome of one fuzz suite run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FuzzReport {
    pub version: u32,
    pub suite: String,
    pub seed: u64,
    pub models: u64,
    /// Total number of individual checks performed.
    pub checks: u64,
    /// Checks by name (schema, law or oracle).
    pub check_counts: BTreeMap<String, u64>,
    /// Total number of failed checks.
    pub failure_count: u64,
    /// The first few failures, each with its model embedded.
    pub failures: Vec<CounterExample>,
}

/// Cap on the number of counterexamples embedded in a report.
const MAX_EMBEDDED_FAILURES: usize = 25;

#[derive(Debug, thiserror::Error)]
pub enum FuzzError {
    #[error("unknown suite `{0}` (see `suites()` for the registry)")]
    UnknownSuite(String),
    #[error(transparent)]
    Eval(#[from] crate::checker::EvalError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Re-evaluate a counterexample on its embedded model. Returns the truth
/// value of the recorded formula at the recorded world: `false` means the
/// counterexample still reproduces.
pub fn replay(ce: &CounterExample) -> Result<bool, FuzzError> {
    let m = Model::from_file(ce.model.clone())?;
    let f = parse_formula(&ce.formula)?;
    Ok(eval_dynamic(&m, &ce.world, &f)?)
}

// ---------------------------------------------------------------------------
// Engine

struct Outcome {
    suite: &'static str,
    checks: u64,
    counts: BTreeMap<String, u64>,
    failures: Vec<CounterExample>,
}

impl Outcome {
    fn new(suite: &'static str) -> Outcome {
        Outcome { suite, checks: 0, counts: BTreeMap::new(), failures: Vec::new() }
    }

    fn count(&mut self, name: &str) {
        self.checks += 1;
        *self.counts.entry(name.to_string()).or_default() += 1;
    }

    fn fail(&mut self, m: &Model, world: &str, formula: String) {
        self.failures.push(CounterExample {
            version: 1,
            suite: self.suite.to_string(),
            world: world.to_string(),
            formula,
            model: m.to_file(),
        });
    }

    /// Expect `f` to hold at every world of `m`.
    fn check_valid(&mut self, m: &Model, name: &str, f: &Formula) -> Result<(), FuzzError> {
        self.count(name);
        if !valid_on(m, f)? {
            let world = first_false_world(m, f, false)?.expect("some world falsifies");
            self.fail(m, &world, render_formula(f));
        }
        Ok(())
    }

    /// Like `check_valid`, but `f` may contain revision operators.
    fn check_valid_dynamic(
        &mut self,
        m: &Model,
        name: &str,
        f: &Formula,
    ) -> Result<(), FuzzError> {
        self.count(name);
        if !valid_on_dynamic(m, f)? {
            let world = first_false_world(m, f, true)?.expect("some world falsifies");
            self.fail(m, &world, render_formula(f));
        }
        Ok(())
    }

    /// Expect the relation of `prog` on `m` to equal `want`. The witness
    /// formula steps from the offending source world to a nominal of the
    /// offending target.
    fn check_relation(
        &mut self,
        m: &Model,
        name: &str,
        prog: &Program,
        got: &PairSet,
        want: &PairSet,
    ) {
        self.count(name);
        if got == want {
            return;
        }
        if let Some((w, v)) = want.iter().find(|&(w, v)| !got.contains(w, v)) {
            let (world, f) = step_witness(m, prog, w, v);
            self.fail(m, &world, render_formula(&f));
        } else if let Some((w, v)) = got.iter().find(|&(w, v)| !want.contains(w, v)) {
            let (world, f) = step_witness(m, prog, w, v);
            self.fail(m, &world, render_formula(&Formula::not(f)));
        }
    }
}

fn first_false_world(m: &Model, f: &Formula, dynamic: bool) -> Result<Option<String>, FuzzError> {
    for w in 0..m.n_worlds() {
        let id = m.world_id(w);
        let holds = if dynamic { eval_dynamic(m, id, f)? } else { eval_at(m, id, f)? };
        if !holds {
            return Ok(Some(id.to_string()));
        }
    }
    Ok(None)
}

/// `⟨prog⟩x_v` evaluated at `w`, where `x_v` names world `v`.
fn step_witness(m: &Model, prog: &Program, w: usize, v: usize) -> (String, Formula) {
    let nominal = m.worlds[v]
        .nominals
        .iter()
        .next()
        .cloned()
        .unwrap_or_else(|| m.world_id(v).to_string());
    (
        m.world_id(w).to_string(),
        Formula::diamond(prog.clone(), Formula::Nominal(nominal)),
    )
}

fn run<F>(
    suite: &'static str,
    models: usize,
    seed: u64,
    spec: &GenSpec,
    per_model: F,
) -> Result<FuzzReport, FuzzError>
where
    F: Fn(&Model, &GenCtx, &mut ChaCha8Rng, &mut Outcome) -> Result<(), FuzzError> + Sync,
{
    let outcomes = (0..models)
        .into_par_iter()
        .map(|i| {
            let mut rng = model_rng(seed, i as u64);
            let m = gen_model(spec, &mut rng);
            let ctx = GenCtx::of(&m);
            let mut outcome = Outcome::new(suite);
            per_model(&m, &ctx, &mut rng, &mut outcome)?;
            Ok::<Outcome, FuzzError>(outcome)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut report = FuzzReport {
        version: 1,
        suite: suite.to_string(),
        seed,
        models: models as u64,
        checks: 0,
        check_counts: BTreeMap::new(),
        failure_count: 0,
        failures: Vec::new(),
    };
    for outcome in outcomes {
        report.checks += outcome.checks;
        for (name, n) in outcome.counts {
            *report.check_counts.entry(name).or_default() += n;
        }
        report.failure_count += outcome.failures.len() as u64;
        for ce in outcome.failures {
            if report.failures.len() < MAX_EMBEDDED_FAILURES {
                report.failures.push(ce);
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Axiom schemas

type Schema = fn(&GenCtx, &mut ChaCha8Rng) -> Formula;

fn agent_of(ctx: &GenCtx, rng: &mut ChaCha8Rng) -> String {
    pick(rng, &ctx.agents).clone()
}

/// The static axiom schemas, instantiated with random programs, formulas,
/// agents, dimensions and nominals.
pub const DLCA_SCHEMAS: &[(&str, Schema)] = &[
    ("modal-distribution", |ctx, rng| {
        let p = gen_program(ctx, rng, 2);
        let (f, g) = (gen_formula(ctx, rng, 2), gen_formula(ctx, rng, 2));
        Formula::implies(
            Formula::box_(p.clone(), Formula::implies(f.clone(), g.clone())),
            Formula::implies(Formula::box_(p.clone(), f), Formula::box_(p, g)),
        )
    }),
    ("knowledge-reflexive", |ctx, rng| {
        let f = gen_formula(ctx, rng, 2);
        Formula::implies(Formula::box_(Program::Eq(agent_of(ctx, rng)), f.clone()), f)
    }),
    ("knowledge-transitive", |ctx, rng| {
        let i = agent_of(ctx, rng);
        let f = gen_formula(ctx, rng, 2);
        Formula::implies(
            Formula::box_(Program::Eq(i.clone()), f.clone()),
            Formula::box_(Program::Eq(i.clone()), Formula::box_(Program::Eq(i), f)),
        )
    }),
    ("knowledge-euclidean", |ctx, rng| {
        let i = agent_of(ctx, rng);
        let f = gen_formula(ctx, rng, 2);
        Formula::implies(
            Formula::not(Formula::box_(Program::Eq(i.clone()), f.clone())),
            Formula::box_(
                Program::Eq(i.clone()),
                Formula::not(Formula::box_(Program::Eq(i), f)),
            ),
        )
    }),
    ("rank-reflexive", |ctx, rng| {
        let f = gen_formula(ctx, rng, 2);
        Formula::implies(
            Formula::box_(Program::Le(agent_of(ctx, rng), gen_dim(rng)), f.clone()),
            f,
        )
    }),
    ("rank-transitive", |ctx, rng| {
        let le = Program::Le(agent_of(ctx, rng), gen_dim(rng));
        let f = gen_formula(ctx, rng, 2);
        Formula::implies(
            Formula::box_(le.clone(), f.clone()),
            Formula::box_(le.clone(), Formula::box_(le, f)),
        )
    }),
    ("knowledge-rank-inclusion", |ctx, rng| {
        let i = agent_of(ctx, rng);
        let f = gen_formula(ctx, rng, 2);
        Formula::implies(
            Formula::box_(Program::Eq(i.clone()), f.clone()),
            Formula::box_(Program::Le(i, gen_dim(rng)), f),
        )
    }),
    ("rank-total", |ctx, rng| {
        let i = agent_of(ctx, rng);
        let dim = gen_dim(rng);
        let f = gen_formula(ctx, rng, 2);
        Formula::implies(
            Formula::diamond(Program::Eq(i.clone()), f.clone()),
            Formula::or(
                Formula::diamond(Program::Le(i.clone(), dim), f.clone()),
                Formula::diamond(Program::conv(Program::Le(i, dim)), f),
            ),
        )
    }),
    ("sequence-unfold", |ctx, rng| {
        let (p, q) = (gen_program(ctx, rng, 1), gen_program(ctx, rng, 1));
        let f = gen_formula(ctx, rng, 2);
        Formula::iff(
            Formula::box_(Program::seq(p.clone(), q.clone()), f.clone()),
            Formula::box_(p, Formula::box_(q, f)),
        )
    }),
    ("union-unfold", |ctx, rng| {
        let (p, q) = (gen_program(ctx, rng, 1), gen_program(ctx, rng, 1));
        let f = gen_formula(ctx, rng, 2);
        Formula::iff(
            Formula::box_(Program::union(p.clone(), q.clone()), f.clone()),
            Formula::and(Formula::box_(p, f.clone()), Formula::box_(q, f)),
        )
    }),
    ("intersection-left", |ctx, rng| {
        let (p, q) = (gen_program(ctx, rng, 1), gen_program(ctx, rng, 1));
        let f = gen_formula(ctx, rng, 2);
        Formula::implies(
            Formula::box_(p.clone(), f.clone()),
            Formula::box_(Program::inter(p, q), f),
        )
    }),
    ("intersection-right", |ctx, rng| {
        let (p, q) = (gen_program(ctx, rng, 1), gen_program(ctx, rng, 1));
        let f = gen_formula(ctx, rng, 2);
        Formula::implies(
            Formula::box_(q.clone(), f.clone()),
            Formula::box_(Program::inter(p, q), f),
        )
    }),
    ("converse-forth", |ctx, rng| {
        let p = gen_program(ctx, rng, 2);
        let f = gen_formula(ctx, rng, 2);
        Formula::implies(
            f.clone(),
            Formula::box_(p.clone(), Formula::diamond(Program::conv(p), f)),
        )
    }),
    ("converse-back", |ctx, rng| {
        let p = gen_program(ctx, rng, 2);
        let f = gen_formula(ctx, rng, 2);
        Formula::implies(
            f.clone(),
            Formula::box_(Program::conv(p.clone()), Formula::diamond(p, f)),
        )
    }),
    ("complement-partition", |ctx, rng| {
        let i = agent_of(ctx, rng);
        let dim = gen_dim(rng);
        let f = gen_formula(ctx, rng, 2);
        Formula::iff(
            Formula::and(
                Formula::box_(Program::Le(i.clone(), dim), f.clone()),
                Formula::box_(Program::Nle(i.clone(), dim), f.clone()),
            ),
            Formula::box_(Program::Eq(i), f),
        )
    }),
    ("complement-disjoint", |ctx, rng| {
        let i = agent_of(ctx, rng);
        let dim = gen_dim(rng);
        let x = Formula::Nominal(pick(rng, &ctx.nominals).clone());
        Formula::implies(
            Formula::diamond(Program::Le(i.clone(), dim), x.clone()),
            Formula::box_(Program::Nle(i, dim), Formula::not(x)),
        )
    }),
    ("test-unfold", |ctx, rng| {
        let (f, g) = (gen_formula(ctx, rng, 2), gen_formula(ctx, rng, 2));
        Formula::iff(
            Formula::box_(Program::test(f.clone()), g.clone()),
            Formula::implies(f, g),
        )
    }),
    ("nominal-functional", |ctx, rng| {
        let p = gen_program(ctx, rng, 2);
        let x = Formula::Nominal(pick(rng, &ctx.nominals).clone());
        let f = gen_formula(ctx, rng, 2);
        Formula::implies(
            Formula::diamond(p.clone(), Formula::and(x.clone(), f.clone())),
            Formula::box_(p, Formula::implies(x, f)),
        )
    }),
];

// ---------------------------------------------------------------------------
// Suites

/// The registry of fuzz suites.
pub fn suites() -> &'static [&'static str] {
    &[
        "dlca-axioms",
        "dlcag-axioms",
        "wellfounded-axioms",
        "attitude-encodings",
        "attitude-validities",
        "finite-model",
        "wt-bridge",
        "transform-agreement",
        "revision-laws",
        "reduction",
        "game-propositions",
        "negative-control",
        "rank-roundtrip",
        "program-algebra",
    ]
}

/// Run a named suite over `models` generated models.
pub fn run_suite(suite: &str, models: usize, seed: u64) -> Result<FuzzReport, FuzzError> {
    let free = GenSpec::default();
    let game = GenSpec { with_choices: true, ..GenSpec::default() };
    let wt = GenSpec { wt_bias: true, ..GenSpec::default() };
    match suite {
        "dlca-axioms" => run("dlca-axioms", models, seed, &free, dlca_axioms),
        "dlcag-axioms" => run("dlcag-axioms", models, seed, &game, dlcag_axioms),
        "wellfounded-axioms" => {
            run("wellfounded-axioms", models, seed, &free, wellfounded_axioms)
        }
        "attitude-encodings" => {
            run("attitude-encodings", models, seed, &free, attitude_encodings)
        }
        "attitude-validities" => {
            run("attitude-validities", models, seed, &free, attitude_validities)
        }
        "finite-model" => run("finite-model", models, seed, &free, finite_model),
        "wt-bridge" => run("wt-bridge", models, seed, &wt, wt_bridge),
        "transform-agreement" => {
            run("transform-agreement", models, seed, &free, transform_agreement)
        }
        "revision-laws" => run("revision-laws", models, seed, &free, revision_laws),
        "reduction" => run("reduction", models, seed, &free, reduction_agreement),
        "game-propositions" => {
            run("game-propositions", models, seed, &game, game_propositions)
        }
        "negative-control" => run("negative-control", models, seed, &free, negative_control),
        "rank-roundtrip" => run("rank-roundtrip", models, seed, &free, rank_roundtrip),
        "program-algebra" => run("program-algebra", models, seed, &free, program_algebra),
        other => Err(FuzzError::UnknownSuite(other.to_string())),
    }
}

fn dlca_axioms(
    m: &Model,
    ctx: &GenCtx,
    rng: &mut ChaCha8Rng,
    o: &mut Outcome,
) -> Result<(), FuzzError> {
    for (name, make) in DLCA_SCHEMAS {
        for _ in 0..2 {
            let f = make(ctx, rng);
            o.check_valid(m, name, &f)?;
        }
    }
    // Necessitation, checked indirectly: whenever an instance is valid on
    // the model, so is its boxing. The tautology-shaped instance keeps the
    // check from being vacuous.
    for _ in 0..2 {
        let p = gen_program(ctx, rng, 2);
        let g = gen_formula(ctx, rng, 2);
        let f = if rng.gen_bool(0.5) {
            Formula::implies(g.clone(), g)
        } else {
            Formula::or(g.clone(), Formula::not(g))
        };
        o.count("necessitation");
        if valid_on(m, &f)? {
            let boxed = Formula::box_(p, f);
            if !valid_on(m, &boxed)? {
                let world = first_false_world(m, &boxed, false)?.expect("falsified");
                o.fail(m, &world, render_formula(&boxed));
            }
        }
        let h = gen_formula(ctx, rng, 2);
        if valid_on(m, &h)? {
            o.count("necessitation");
            let boxed = Formula::box_(gen_program(ctx, rng, 2), h);
            if !valid_on(m, &boxed)? {
                let world = first_false_world(m, &boxed, false)?.expect("falsified");
                o.fail(m, &world, render_formula(&boxed));
            }
        }
    }
    Ok(())
}

fn dlcag_axioms(
    m: &Model,
    ctx: &GenCtx,
    rng: &mut ChaCha8Rng,
    o: &mut Outcome,
) -> Result<(), FuzzError> {
    for _ in 0..2 {
        let i = agent_of(ctx, rng);
        let a = pick(rng, &ctx.actions).clone();
        let b = ctx
            .actions
            .iter()
            .find(|x| **x != a)
            .expect("game models have at least two actions")
            .clone();
        o.check_valid(
            m,
            "action-exclusivity",
            &Formula::implies(
                Formula::Play(i.clone(), a.clone()),
                Formula::not(Formula::Play(i.clone(), b)),
            ),
        )?;
        o.check_valid(
            m,
            "action-totality",
            &Formula::disj(
                ctx.actions.iter().map(|x| Formula::Play(i.clone(), x.clone())),
            ),
        )?;
        // Choice independence: actions individually envisaged inside the
        // agent's cell are jointly envisaged.
        let profile: Vec<(String, String)> = ctx
            .agents
            .iter()
            .map(|j| (j.clone(), pick(rng, &ctx.actions).clone()))
            .collect();
        let each = Formula::conj(profile.iter().map(|(j, a)| {
            Formula::diamond(Program::Eq(i.clone()), Formula::Play(j.clone(), a.clone()))
        }));
        let jointly = Formula::diamond(
            Program::Eq(i.clone()),
            Formula::conj(
                profile.iter().map(|(j, a)| Formula::Play(j.clone(), a.clone())),
            ),
        );
        o.check_valid(m, "choice-independence", &Formula::implies(each, jointly))?;
    }
    Ok(())
}

fn wellfounded_axioms(
    m: &Model,
    ctx: &GenCtx,
    rng: &mut ChaCha8Rng,
    o: &mut Outcome,
) -> Result<(), FuzzError> {
    for _ in 0..2 {
        let i = agent_of(ctx, rng);
        let f = gen_formula(ctx, rng, 2);
        // Some envisaged f-world has no strictly more plausible f-world.
        o.check_valid(
            m,
            "plausibility-wellfounded",
            &Formula::implies(
                Formula::diamond(Program::Eq(i.clone()), f.clone()),
                Formula::diamond(
                    Program::Eq(i.clone()),
                    Formula::and(
                        f.clone(),
                        Formula::box_(Program::Lt(i.clone(), Dim::P), Formula::not(f.clone())),
                    ),
                ),
            ),
        )?;
        let g = gen_formula(ctx, rng, 2);
        // Some envisaged g-world has no strictly less desirable g-world.
        o.check_valid(
            m,
            "desirability-wellfounded",
            &Formula::implies(
                Formula::diamond(Program::Eq(i.clone()), g.clone()),
                Formula::diamond(
                    Program::Eq(i.clone()),
                    Formula::and(
                        g.clone(),
                        Formula::box_(Program::Gt(i, Dim::D), Formula::not(g)),
                    ),
                ),
            ),
        )?;
    }
    Ok(())
}

fn attitude_encodings(
    m: &Model,
    ctx: &GenCtx,
    rng: &mut ChaCha8Rng,
    o: &mut Outcome,
) -> Result<(), FuzzError> {
    const KINDS: [(&str, usize); 7] = [
        ("belief-encoding", 0),
        ("strong-belief-encoding", 1),
        ("conditional-belief-encoding", 2),
        ("desire-encoding", 3),
        ("strong-desire-encoding", 4),
        ("conditional-desire-encoding", 5),
        ("preference-encoding", 6),
    ];
    for (name, kind) in KINDS {
        for _ in 0..2 {
            let agent = agent_of(ctx, rng);
            let att = match kind {
                0 => Attitude::Belief { agent, prop: gen_formula(ctx, rng, 2) },
                1 => Attitude::StrongBelief { agent, prop: gen_formula(ctx, rng, 2) },
                2 => Attitude::CondBelief {
                    agent,
                    cond: gen_formula(ctx, rng, 2),
                    prop: gen_formula(ctx, rng, 2),
                },
                3 => Attitude::Desire { agent, prop: gen_formula(ctx, rng, 2) },
                4 => Attitude::StrongDesire { agent, prop: gen_formula(ctx, rng, 2) },
                5 => Attitude::CondDesire {
                    agent,
                    cond: gen_formula(ctx, rng, 2),
                    prop: gen_formula(ctx, rng, 2),
                },
                _ => Attitude::Pref {
                    agent,
                    mode: gen_mode(rng),
                    realistic: rng.gen_bool(0.5),
                    arg: match rng.gen_range(0..3) {
                        0 => PrefArg::Weak(
                            gen_formula(ctx, rng, 2),
                            gen_formula(ctx, rng, 2),
                        ),
                        1 => PrefArg::Strict(
                            gen_formula(ctx, rng, 2),
                            gen_formula(ctx, rng, 2),
                        ),
                        _ => PrefArg::Monadic(gen_formula(ctx, rng, 2)),
                    },
                },
            };
            let direct = Formula::attitude(att);
            let encoded = expand_attitudes(&direct).expect("static attitudes expand");
            o.check_valid(m, name, &Formula::iff(direct, encoded))?;
        }
    }
    Ok(())
}

fn attitude_validities(
    m: &Model,
    ctx: &GenCtx,
    rng: &mut ChaCha8Rng,
    o: &mut Outcome,
) -> Result<(), FuzzError> {
    for _ in 0..2 {
        let i = agent_of(ctx, rng);
        let f = gen_formula(ctx, rng, 2);
        let g = gen_formula(ctx, rng, 2);
        let belief = |prop: Formula| {
            Formula::attitude(Attitude::Belief { agent: i.clone(), prop })
        };
        let desire = |prop: Formula| {
            Formula::attitude(Attitude::Desire { agent: i.clone(), prop })
        };
        o.check_valid(
            m,
            "strong-belief-collapse",
            &Formula::implies(
                Formula::and(
                    Formula::attitude(Attitude::StrongBelief {
                        agent: i.clone(),
                        prop: f.clone(),
                    }),
                    Formula::diamond(Program::Eq(i.clone()), f.clone()),
                ),
                belief(f.clone()),
            ),
        )?;
        o.check_valid(
            m,
            "desire-strengthening",
            &Formula::implies(desire(f.clone()), desire(Formula::and(f.clone(), g.clone()))),
        )?;
        o.check_valid(
            m,
            "strong-desire-collapse",
            &Formula::implies(
                Formula::and(
                    Formula::attitude(Attitude::StrongDesire {
                        agent: i.clone(),
                        prop: f.clone(),
                    }),
                    Formula::diamond(Program::Eq(i.clone()), Formula::not(f.clone())),
                ),
                desire(f.clone()),
            ),
        )?;
        let mode = gen_mode(rng);
        let weak = |lo: Formula, hi: Formula, realistic: bool| {
            Formula::attitude(Attitude::Pref {
                agent: i.clone(),
                mode,
                realistic,
                arg: PrefArg::Weak(lo, hi),
            })
        };
        o.check_valid(
            m,
            "preference-totality",
            &Formula::or(
                weak(f.clone(), g.clone(), false),
                weak(g.clone(), f.clone(), false),
            ),
        )?;
        o.check_valid(
            m,
            "realistic-preference-totality",
            &Formula::or(
                weak(f.clone(), g.clone(), true),
                weak(g.clone(), f.clone(), true),
            ),
        )?;
        o.check_valid(
            m,
            "desire-as-pessimistic-preference",
            &Formula::implies(
                Formula::not(desire(Formula::True)),
                Formula::iff(
                    desire(f.clone()),
                    Formula::attitude(Attitude::Pref {
                        agent: i.clone(),
                        mode: Mode::Pess,
                        realistic: false,
                        arg: PrefArg::Monadic(f.clone()),
                    }),
                ),
            ),
        )?;
    }
    Ok(())
}

fn finite_model(
    m: &Model,
    ctx: &GenCtx,
    rng: &mut ChaCha8Rng,
    o: &mut Outcome,
) -> Result<(), FuzzError> {
    for _ in 0..2 {
        let i = agent_of(ctx, rng);
        let f = gen_formula(ctx, rng, 2);
        let belief = |prop: Formula| {
            Formula::attitude(Attitude::Belief { agent: i.clone(), prop })
        };
        o.check_valid(
            m,
            "belief-consistency",
            &Formula::not(Formula::and(
                belief(f.clone()),
                belief(Formula::not(f.clone())),
            )),
        )?;
        o.check_valid(m, "no-impossible-belief", &Formula::not(belief(Formula::False)))?;
        o.check_valid(
            m,
            "no-trivial-desire",
            &Formula::not(Formula::attitude(Attitude::Desire {
                agent: i.clone(),
                prop: Formula::True,
            })),
        )?;
    }
    Ok(())
}

fn wt_bridge(
    m: &Model,
    ctx: &GenCtx,
    rng: &mut ChaCha8Rng,
    o: &mut Outcome,
) -> Result<(), FuzzError> {
    for i in &ctx.agents {
        o.count("worthiness-of-generated-model");
        if !check_wt(m, i)? {
            o.fail(m, m.world_id(0), render_formula(&Formula::False));
        }
    }
    for _ in 0..2 {
        let i = agent_of(ctx, rng);
        let f = gen_formula(ctx, rng, 2);
        let bridge = Formula::implies(
            Formula::and(
                Formula::attitude(Attitude::StrongDesire {
                    agent: i.clone(),
                    prop: f.clone(),
                }),
                Formula::not(Formula::attitude(Attitude::Belief {
                    agent: i.clone(),
                    prop: Formula::not(f.clone()),
                })),
            ),
            Formula::attitude(Attitude::Belief { agent: i.clone(), prop: f.clone() }),
        );
        o.check_valid(m, "desire-belief-bridge", &bridge)?;
    }
    Ok(())
}

/// Rebuild the post-revision comparison relation directly from the
/// definition of each revision policy, as a second route independent of the
/// rank renumbering done by `dynamics::apply`.
fn upgraded_le_comprehension(
    m: &Model,
    agent: usize,
    flavor: Flavor,
    dim: Dim,
    input: &WorldSet,
) -> PairSet {
    let mut out = PairSet::new();
    for (_, members) in m.cells_of(agent) {
        let moved: WorldSet = match flavor {
            Flavor::Radical => members.iter().copied().filter(|w| input.contains(w)).collect(),
            Flavor::Conservative => match dim {
                Dim::P => {
                    // The most plausible input worlds of the cell move up.
                    let candidates: Vec<usize> =
                        members.iter().copied().filter(|w| input.contains(w)).collect();
                    crate::checker::argmax_rank(m, agent, Dim::P, candidates)
                }
                Dim::D => {
                    // The least desirable non-input worlds move down.
                    let candidates: Vec<usize> =
                        members.iter().copied().filter(|w| !input.contains(w)).collect();
                    crate::checker::argmin_rank(m, agent, Dim::D, candidates)
                }
            },
        };
        let moved_is_low = flavor == Flavor::Conservative && dim == Dim::D;
        for &w in members {
            for &v in members {
                let old = m.rank(agent, dim, w) <= m.rank(agent, dim, v);
                let le = match (moved.contains(&w), moved.contains(&v)) {
                    (true, true) => match flavor {
                        Flavor::Radical => old,
                        // A conservative tier is flat: all moved worlds tie.
                        Flavor::Conservative => true,
                    },
                    (false, false) => old,
                    (false, true) => !moved_is_low,
                    (true, false) => moved_is_low,
                };
                if le {
                    out.insert(w, v);
                }
            }
        }
    }
    out
}

fn transform_agreement(
    m: &Model,
    ctx: &GenCtx,
    rng: &mut ChaCha8Rng,
    o: &mut Outcome,
) -> Result<(), FuzzError> {
    let op = gen_revision_op(ctx, rng);
    let agent = m.agent_index(&op.agent).expect("generated agent exists");
    let input: WorldSet =
        (*Session::new(m).truth_set(&op.input)?).clone();
    let upgraded = apply(m, &op)?.model;

    let le_prog = Program::Le(op.agent.clone(), op.dim);
    let got_le = upgraded.atomic_rel(&le_prog).expect("atomic");
    let want_le = upgraded_le_comprehension(m, agent, op.flavor, op.dim, &input);
    o.check_relation(&upgraded, "upgraded-comparison", &le_prog, &got_le, &want_le);

    // The complement row stays the exact complement inside the cell.
    let nle_prog = Program::Nle(op.agent.clone(), op.dim);
    let got_nle = upgraded.atomic_rel(&nle_prog).expect("atomic");
    let eq = upgraded.atomic_rel(&Program::Eq(op.agent.clone())).expect("atomic");
    let want_nle = eq.difference(&want_le);
    o.check_relation(&upgraded, "upgraded-complement", &nle_prog, &got_nle, &want_nle);

    // Every other agent/dimension pair is untouched.
    for j in &ctx.agents {
        for d in [Dim::P, Dim::D] {
            if *j == op.agent && d == op.dim {
                continue;
            }
            let prog = Program::Le(j.clone(), d);
            let before = m.atomic_rel(&prog).expect("atomic");
            let after = upgraded.atomic_rel(&prog).expect("atomic");
            o.check_relation(&upgraded, "untouched-dimensions", &prog, &after, &before);
        }
    }

    // The revised agent/dimension pair comes out with dense ranks per cell
    // (untouched pairs keep whatever ranks the source model had).
    o.count("dense-after-revision");
    let dense = upgraded.cells_of(agent).all(|(_, members)| {
        let ranks: std::collections::BTreeSet<u64> =
            members.iter().map(|&w| upgraded.rank(agent, op.dim, w)).collect();
        ranks.iter().copied().eq(0..ranks.len() as u64)
    });
    if !dense {
        o.fail(&upgraded, upgraded.world_id(0), render_formula(&Formula::False));
    }
    Ok(())
}

fn revision_laws(
    m: &Model,
    ctx: &GenCtx,
    rng: &mut ChaCha8Rng,
    o: &mut Outcome,
) -> Result<(), FuzzError> {
    let i = agent_of(ctx, rng);
    // Success laws hold for inputs whose extension the revision cannot
    // move, so draw from the boolean fragment only.
    let f = gen_boolean_formula(ctx, rng, 2);
    let envisaged = |prop: Formula| Formula::diamond(Program::Eq(i.clone()), prop);
    let op = |flavor: Flavor, dim: Dim| RevisionOp {
        flavor,
        dim,
        agent: i.clone(),
        input: Box::new(f.clone()),
    };
    let belief = |prop: Formula| Formula::attitude(Attitude::Belief { agent: i.clone(), prop });
    let strong_belief =
        |prop: Formula| Formula::attitude(Attitude::StrongBelief { agent: i.clone(), prop });
    let desire = |prop: Formula| Formula::attitude(Attitude::Desire { agent: i.clone(), prop });
    let strong_desire =
        |prop: Formula| Formula::attitude(Attitude::StrongDesire { agent: i.clone(), prop });

    o.check_valid_dynamic(
        m,
        "radical-plausibility-success",
        &Formula::implies(
            envisaged(f.clone()),
            Formula::dyn_(
                op(Flavor::Radical, Dim::P),
                Formula::and(belief(f.clone()), strong_belief(f.clone())),
            ),
        ),
    )?;
    // Desire needs something worse to avoid: the law only binds when the
    // cell also envisages a world outside the input.
    o.check_valid_dynamic(
        m,
        "radical-desirability-success",
        &Formula::implies(
            Formula::and(envisaged(f.clone()), envisaged(Formula::not(f.clone()))),
            Formula::dyn_(
                op(Flavor::Radical, Dim::D),
                Formula::and(desire(f.clone()), strong_desire(f.clone())),
            ),
        ),
    )?;
    o.check_valid_dynamic(
        m,
        "conservative-plausibility-success",
        &Formula::implies(
            envisaged(f.clone()),
            Formula::dyn_(op(Flavor::Conservative, Dim::P), belief(f.clone())),
        ),
    )?;
    o.check_valid_dynamic(
        m,
        "conservative-desirability-success",
        &Formula::implies(
            envisaged(Formula::not(f.clone())),
            Formula::dyn_(op(Flavor::Conservative, Dim::D), desire(f.clone())),
        ),
    )?;
    Ok(())
}

fn reduction_agreement(
    m: &Model,
    ctx: &GenCtx,
    rng: &mut ChaCha8Rng,
    o: &mut Outcome,
) -> Result<(), FuzzError> {
    for _ in 0..2 {
        let f = gen_dynamic_formula(ctx, rng);
        let reduced = reduce(&f);
        o.count("reduction-eliminates-dynamics");
        if reduced.has_dynamics() {
            o.fail(m, m.world_id(0), render_formula(&f));
        }
        o.count("reduction-preserves-truth");
        for w in 0..m.n_worlds() {
            let id = m.world_id(w);
            if eval_dynamic(m, id, &f)? != eval_at(m, id, &reduced)? {
                o.fail(m, id, render_formula(&Formula::iff(f.clone(), reduced.clone())));
                break;
            }
        }
    }
    Ok(())
}

fn game_propositions(
    m: &Model,
    ctx: &GenCtx,
    rng: &mut ChaCha8Rng,
    o: &mut Outcome,
) -> Result<(), FuzzError> {
    // Only the optimistic comparison survives unilateral strengthening of
    // its left side, so these two laws hold for optimistic assessment only;
    // the pessimistic variants fail whenever some alternative action is
    // missing from (or badly placed in) the agent's most plausible region.
    let mode = Mode::Opt;
    for _ in 0..2 {
        let i = agent_of(ctx, rng);
        let a = pick(rng, &ctx.actions).clone();
        let rational = games::rational_formula(m, &i, mode)?;

        // A rational agent weakly prefers its played action to any other.
        let play = Formula::Play(i.clone(), a.clone());
        let conclusion = Formula::conj(ctx.actions.iter().map(|b| {
            Formula::attitude(Attitude::Pref {
                agent: i.clone(),
                mode,
                realistic: true,
                arg: PrefArg::Weak(Formula::Play(i.clone(), b.clone()), play.clone()),
            })
        }));
        o.check_valid(
            m,
            "rationality-grounds-preference",
            &Formula::implies(Formula::and(rational.clone(), play.clone()), conclusion),
        )?;

        // Playing a profile rationally, with mutual belief in the others'
        // parts, lands in an equilibrium.
        let profile: JointAction = ctx
            .agents
            .iter()
            .map(|j| (j.clone(), pick(rng, &ctx.actions).clone()))
            .collect();
        let premises = Formula::conj(ctx.agents.iter().map(|j| {
            let mut others = profile.clone();
            others.remove(j);
            Formula::and(
                games::rational_formula(m, j, mode).expect("agent exists"),
                Formula::attitude(Attitude::Belief {
                    agent: j.clone(),
                    prop: games::play_formula(&others),
                }),
            )
        }));
        let antecedent = Formula::and(games::play_formula(&profile), premises);
        let nash = games::nash_formula(m, &profile, mode)?;
        o.check_valid(
            m,
            "equilibrium-characterization",
            &Formula::implies(antecedent, nash),
        )?;
    }
    Ok(())
}

fn negative_control(
    m: &Model,
    ctx: &GenCtx,
    rng: &mut ChaCha8Rng,
    o: &mut Outcome,
) -> Result<(), FuzzError> {
    // Beliefs are not factive: this schema is expected to fail on many
    // generated models, exercising the counterexample pipeline end to end.
    for _ in 0..2 {
        let i = agent_of(ctx, rng);
        let f = gen_formula(ctx, rng, 2);
        o.check_valid(
            m,
            "belief-factivity-control",
            &Formula::implies(
                Formula::attitude(Attitude::Belief { agent: i, prop: f.clone() }),
                f,
            ),
        )?;
    }
    Ok(())
}

fn rank_roundtrip(
    m: &Model,
    ctx: &GenCtx,
    _rng: &mut ChaCha8Rng,
    o: &mut Outcome,
) -> Result<(), FuzzError> {
    for i in &ctx.agents {
        let agent = m.agent_index(i).expect("agent exists");
        for dim in [Dim::P, Dim::D] {
            let prog = Program::Le(i.clone(), dim);
            let le = m.atomic_rel(&prog).expect("atomic");

            // Reconstruct dense ranks from the relation alone: a world's
            // rank is the number of strictly-below classes, distinguished
            // by the sizes of their own below-sets.
            let mut rebuilt_rank = vec![0u64; m.n_worlds()];
            for (_, members) in m.cells_of(agent) {
                let below = |w: usize| -> Vec<usize> {
                    members
                        .iter()
                        .copied()
                        .filter(|&v| le.contains(v, w) && !le.contains(w, v))
                        .collect()
                };
                for &w in members {
                    let mut class_sizes: Vec<usize> =
                        below(w).iter().map(|&v| below(v).len()).collect();
                    class_sizes.sort_unstable();
                    class_sizes.dedup();
                    rebuilt_rank[w] = class_sizes.len() as u64;
                }
            }

            // The reconstructed ranks generate the original relation...
            let mut rebuilt = PairSet::new();
            for (_, members) in m.cells_of(agent) {
                for &w in members {
                    for &v in members {
                        if rebuilt_rank[w] <= rebuilt_rank[v] {
                            rebuilt.insert(w, v);
                        }
                    }
                }
            }
            o.check_relation(m, "relation-rank-roundtrip", &prog, &rebuilt, &le);

            // ...and agree with the normalizer's dense renumbering.
            o.count("dense-rank-agreement");
            let mut normalized = m.clone();
            normalized.normalize_ranks();
            if let Some(w) =
                (0..m.n_worlds()).find(|&w| normalized.rank(agent, dim, w) != rebuilt_rank[w])
            {
                let (world, witness) = step_witness(m, &prog, w, w);
                o.fail(m, &world, render_formula(&witness));
            }
        }
    }
    Ok(())
}

fn program_algebra(
    m: &Model,
    ctx: &GenCtx,
    rng: &mut ChaCha8Rng,
    o: &mut Outcome,
) -> Result<(), FuzzError> {
    let session = Session::new(m);
    let rel = |p: &Program| -> Result<PairSet, FuzzError> {
        Ok((*session.rel(p)?).clone())
    };
    let (p, q, r) =
        (gen_program(ctx, rng, 2), gen_program(ctx, rng, 2), gen_program(ctx, rng, 2));

    let pairs: [(&str, Program, Program); 8] = [
        (
            "sequence-associative",
            Program::seq(p.clone(), Program::seq(q.clone(), r.clone())),
            Program::seq(Program::seq(p.clone(), q.clone()), r.clone()),
        ),
        (
            "union-commutative",
            Program::union(p.clone(), q.clone()),
            Program::union(q.clone(), p.clone()),
        ),
        ("union-idempotent", Program::union(p.clone(), p.clone()), p.clone()),
        (
            "intersection-commutative",
            Program::inter(p.clone(), q.clone()),
            Program::inter(q.clone(), p.clone()),
        ),
        ("intersection-idempotent", Program::inter(p.clone(), p.clone()), p.clone()),
        ("converse-involution", Program::conv(Program::conv(p.clone())), p.clone()),
        (
            "converse-over-sequence",
            Program::conv(Program::seq(p.clone(), q.clone())),
            Program::seq(Program::conv(q.clone()), Program::conv(p.clone())),
        ),
        (
            "converse-over-union",
            Program::conv(Program::union(p.clone(), q.clone())),
            Program::union(Program::conv(p.clone()), Program::conv(q.clone())),
        ),
    ];
    for (name, lhs, rhs) in &pairs {
        let (got, want) = (rel(lhs)?, rel(rhs)?);
        o.count(name);
        if got != want {
            if let Some((w, v)) = got
                .iter()
                .chain(want.iter())
                .find(|&(w, v)| got.contains(w, v) != want.contains(w, v))
            {
                let witness = Formula::iff(
                    step_witness(m, lhs, w, v).1,
                    step_witness(m, rhs, w, v).1,
                );
                o.fail(m, m.world_id(w), render_formula(&witness));
            }
        }
    }

    // Comparators against the rank comprehension.
    let i = agent_of(ctx, rng);
    let agent = m.agent_index(&i).expect("agent exists");
    let dim = gen_dim(rng);
    let by_rank = |cmp: fn(u64, u64) -> bool| -> PairSet {
        let mut out = PairSet::new();
        for (_, members) in m.cells_of(agent) {
            for &w in members {
                for &v in members {
                    if cmp(m.rank(agent, dim, w), m.rank(agent, dim, v)) {
                        out.insert(w, v);
                    }
                }
            }
        }
        out
    };
    let comparators: [(&str, Program, fn(u64, u64) -> bool); 7] = [
        ("comparator-le", Program::Le(i.clone(), dim), |a, b| a <= b),
        ("comparator-nle", Program::Nle(i.clone(), dim), |a, b| a > b),
        ("comparator-ge", Program::Ge(i.clone(), dim), |a, b| a >= b),
        ("comparator-lt", Program::Lt(i.clone(), dim), |a, b| a < b),
        ("comparator-gt", Program::Gt(i.clone(), dim), |a, b| a > b),
        ("comparator-nge", Program::Nge(i.clone(), dim), |a, b| a < b),
        ("comparator-sim", Program::Sim(i.clone(), dim), |a, b| a == b),
    ];
    for (name, prog, cmp) in comparators {
        let got = rel(&prog)?;
        let want = by_rank(cmp);
        o.check_relation(m, name, &prog, &got, &want);
    }

    // Tests denote the diagonal of their formula's extension.
    let f = gen_formula(ctx, rng, 2);
    let test = Program::test(f.clone());
    let got = rel(&test)?;
    let truth = session.truth_set(&f)?;
    let want = PairSet::diagonal(&truth);
    o.check_relation(m, "test-diagonal", &test, &got, &want);
    Ok(())
}
