//! Evaluation of static formulas and cognitive-program relations.
//!
//! A [`Session`] wraps one model and memoizes program relations and formula
//! truth sets, so repeated queries against the same model (validity sweeps,
//! fuzz suites, game analysis) stay cheap. Attitudes are evaluated directly
//! from their quantifier definitions — not by expanding them into programs —
//! which keeps the program route available as an independent cross-check.
//!
//! Attitude truth only depends on the agent's cell, so each attitude is
//! decided once per cell and stamped onto all of the cell's worlds.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use crate::model::{AtomicRelError, Model, PairSet, WorldSet};
use crate::syntax::{desugar_program, Attitude, Dim, Formula, Mode, PrefArg, Program};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("`play` requires a model with a non-empty action alphabet")]
    NoActions,
    #[error("agent `{agent}` has no choice at world `{world}`")]
    MissingChoice { agent: String, world: String },
    #[error("formula contains a revision operator; rewrite it to the core language or use the dynamic evaluator")]
    DynamicOperator,
}

// ---------------------------------------------------------------------------
// Rank helpers shared by the checker and the dynamic evaluator

/// Members of `worlds` with the highest `dim`-rank (empty input, empty out).
pub(crate) fn argmax_rank(
    m: &Model,
    agent: usize,
    dim: Dim,
    worlds: impl IntoIterator<Item = usize>,
) -> WorldSet {
    let mut best: Option<u64> = None;
    let mut out = WorldSet::new();
    for w in worlds {
        let r = m.rank(agent, dim, w);
        match best {
            Some(b) if r < b => {}
            Some(b) if r == b => {
                out.insert(w);
            }
            _ => {
                best = Some(r);
                out = WorldSet::from([w]);
            }
        }
    }
    out
}

/// Members of `worlds` with the lowest `dim`-rank.
pub(crate) fn argmin_rank(
    m: &Model,
    agent: usize,
    dim: Dim,
    worlds: impl IntoIterator<Item = usize>,
) -> WorldSet {
    let mut worst: Option<u64> = None;
    let mut out = WorldSet::new();
    for w in worlds {
        let r = m.rank(agent, dim, w);
        match worst {
            Some(b) if r > b => {}
            Some(b) if r == b => {
                out.insert(w);
            }
            _ => {
                worst = Some(r);
                out = WorldSet::from([w]);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Attitude kernel

/// Truth-set provider for the attitude kernel. Implemented by the static
/// [`Session`] and by the dynamic evaluator, so both routes share a single
/// implementation of the attitude quantifier conditions.
pub(crate) trait TruthOracle {
    fn model(&self) -> &Model;
    fn truth(&self, f: &Formula) -> Result<Rc<WorldSet>, EvalError>;
}

/// Worlds at which the attitude holds, computed cell by cell from the
/// quantifier definitions.
pub(crate) fn attitude_set<O: TruthOracle>(
    oracle: &O,
    att: &Attitude,
) -> Result<WorldSet, EvalError> {
    let m = oracle.model();
    let agent = m
        .agent_index(att.agent())
        .ok_or_else(|| EvalError::UnknownAgent(att.agent().to_string()))?;

    let mut out = WorldSet::new();
    let mut stamp = |members: &[usize], holds: bool| {
        if holds {
            out.extend(members.iter().copied());
        }
    };

    match att {
        Attitude::Belief { prop, .. } => {
            let tp = oracle.truth(prop)?;
            for (_, members) in m.cells_of(agent) {
                let best = argmax_rank(m, agent, Dim::P, members.iter().copied());
                stamp(members, best.iter().all(|w| tp.contains(w)));
            }
        }
        Attitude::StrongBelief { prop, .. } => {
            let tp = oracle.truth(prop)?;
            for (_, members) in m.cells_of(agent) {
                stamp(members, strictly_separated(m, agent, Dim::P, members, &tp));
            }
        }
        Attitude::CondBelief { cond, prop, .. } => {
            let tc = oracle.truth(cond)?;
            let tp = oracle.truth(prop)?;
            for (_, members) in m.cells_of(agent) {
                let candidates = members.iter().copied().filter(|w| tc.contains(w));
                let best = argmax_rank(m, agent, Dim::P, candidates);
                stamp(members, best.iter().all(|w| tp.contains(w)));
            }
        }
        Attitude::Desire { prop, .. } => {
            let tp = oracle.truth(prop)?;
            for (_, members) in m.cells_of(agent) {
                let worst = argmin_rank(m, agent, Dim::D, members.iter().copied());
                stamp(members, worst.iter().all(|w| !tp.contains(w)));
            }
        }
        Attitude::StrongDesire { prop, .. } => {
            let tp = oracle.truth(prop)?;
            for (_, members) in m.cells_of(agent) {
                stamp(members, strictly_separated(m, agent, Dim::D, members, &tp));
            }
        }
        Attitude::CondDesire { cond, prop, .. } => {
            let tc = oracle.truth(cond)?;
            let tp = oracle.truth(prop)?;
            for (_, members) in m.cells_of(agent) {
                let candidates = members.iter().copied().filter(|w| !tc.contains(w));
                let worst = argmin_rank(m, agent, Dim::D, candidates);
                stamp(members, worst.iter().all(|w| !tp.contains(w)));
            }
        }
        Attitude::Pref { mode, realistic, arg, .. } => {
            let (lo, hi, negate) = match arg {
                PrefArg::Weak(lo, hi) => {
                    (oracle.truth(lo)?, oracle.truth(hi)?, false)
                }
                // `lo < hi` abbreviates the negation of `hi <= lo`.
                PrefArg::Strict(lo, hi) => {
                    (oracle.truth(hi)?, oracle.truth(lo)?, true)
                }
                // `P{i} f` abbreviates `P{i}(!f < f)`.
                PrefArg::Monadic(f) => {
                    let tf = oracle.truth(f)?;
                    let co: WorldSet =
                        (0..m.n_worlds()).filter(|w| !tf.contains(w)).collect();
                    (tf, Rc::new(co), true)
                }
            };
            for (_, members) in m.cells_of(agent) {
                let holds = weak_pref_cell(m, agent, *mode, *realistic, members, &lo, &hi);
                stamp(members, holds ^ negate);
            }
        }
    }
    Ok(out)
}

/// Strong belief/desire condition: every prop-world of the cell outranks
/// every non-prop-world (in the given dimension).
fn strictly_separated(
    m: &Model,
    agent: usize,
    dim: Dim,
    members: &[usize],
    prop: &WorldSet,
) -> bool {
    members.iter().filter(|w| prop.contains(w)).all(|&v| {
        members
            .iter()
            .filter(|w| !prop.contains(w))
            .all(|&u| m.rank(agent, dim, u) < m.rank(agent, dim, v))
    })
}

/// Weak preference of `hi` over `lo` inside one cell: the optimistic agent
/// asks every lo-world to be matched by a hi-world at least as desirable;
/// the pessimistic agent asks every hi-world to be backed by a lo-world at
/// most as desirable. Realistic preferences restrict both sides to the
/// cell's most plausible worlds.
fn weak_pref_cell(
    m: &Model,
    agent: usize,
    mode: Mode,
    realistic: bool,
    members: &[usize],
    lo: &WorldSet,
    hi: &WorldSet,
) -> bool {
    let base: Vec<usize> = if realistic {
        argmax_rank(m, agent, Dim::P, members.iter().copied()).into_iter().collect()
    } else {
        members.to_vec()
    };
    let lo_side: Vec<usize> = base.iter().copied().filter(|w| lo.contains(w)).collect();
    let hi_side: Vec<usize> = base.iter().copied().filter(|w| hi.contains(w)).collect();
    let rank = |w: usize| m.rank(agent, Dim::D, w);
    match mode {
        Mode::Opt => lo_side
            .iter()
            .all(|&u| hi_side.iter().any(|&v| rank(u) <= rank(v))),
        Mode::Pess => hi_side
            .iter()
            .all(|&v| lo_side.iter().any(|&u| rank(u) <= rank(v))),
    }
}

// ---------------------------------------------------------------------------
// Session

/// Memoizing evaluator for one model.
pub struct Session<'m> {
    model: &'m Model,
    rels: RefCell<HashMap<Program, Rc<PairSet>>>,
    truths: RefCell<HashMap<Formula, Rc<WorldSet>>>,
}

impl<'m> Session<'m> {
    pub fn new(model: &'m Model) -> Self {
        Session { model, rels: RefCell::new(HashMap::new()), truths: RefCell::new(HashMap::new()) }
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    /// The binary relation a program denotes. Handles the full program
    /// algebra including the derived comparators.
    pub fn rel(&self, p: &Program) -> Result<Rc<PairSet>, EvalError> {
        if let Some(hit) = self.rels.borrow().get(p).cloned() {
            return Ok(hit);
        }
        let value: PairSet = match p {
            Program::Eq(_) | Program::Le(..) | Program::Nle(..) => {
                self.model.atomic_rel(p).map_err(|e| match e {
                    AtomicRelError::UnknownAgent(a) => EvalError::UnknownAgent(a),
                    AtomicRelError::NotAtomic(_) => unreachable!("atomic arm"),
                })?
            }
            Program::Seq(a, b) => {
                let (ra, rb) = (self.rel(a)?, self.rel(b)?);
                ra.compose(&rb)
            }
            Program::Union(a, b) => {
                let (ra, rb) = (self.rel(a)?, self.rel(b)?);
                ra.union(&rb)
            }
            Program::Inter(a, b) => {
                let (ra, rb) = (self.rel(a)?, self.rel(b)?);
                ra.inter(&rb)
            }
            Program::Conv(a) => self.rel(a)?.transpose(),
            Program::Test(f) => {
                let tf = self.truth_set(f)?;
                PairSet::diagonal(&tf)
            }
            Program::Ge(..)
            | Program::Lt(..)
            | Program::Gt(..)
            | Program::Nge(..)
            | Program::Sim(..) => (*self.rel(&desugar_program(p))?).clone(),
        };
        let rc = Rc::new(value);
        self.rels.borrow_mut().insert(p.clone(), rc.clone());
        Ok(rc)
    }

    /// Worlds at which the formula holds. Errors on revision operators —
    /// those belong to the dynamic evaluator or the reduction rewriter.
    pub fn truth_set(&self, f: &Formula) -> Result<Rc<WorldSet>, EvalError> {
        if let Some(hit) = self.truths.borrow().get(f).cloned() {
            return Ok(hit);
        }
        let n = self.model.n_worlds();
        let value: WorldSet = match f {
            Formula::True => (0..n).collect(),
            Formula::False => WorldSet::new(),
            Formula::Atom(a) => (0..n)
                .filter(|&w| self.model.worlds[w].atoms.contains(a))
                .collect(),
            Formula::Nominal(x) => (0..n)
                .filter(|&w| self.model.worlds[w].nominals.contains(x))
                .collect(),
            Formula::Play(i, a) => self.play_set(i, a)?,
            Formula::Not(g) => {
                let tg = self.truth_set(g)?;
                (0..n).filter(|w| !tg.contains(w)).collect()
            }
            Formula::And(a, b) => {
                let (ta, tb) = (self.truth_set(a)?, self.truth_set(b)?);
                ta.intersection(&tb).copied().collect()
            }
            Formula::Or(a, b) => {
                let (ta, tb) = (self.truth_set(a)?, self.truth_set(b)?);
                ta.union(&tb).copied().collect()
            }
            Formula::Implies(a, b) => {
                let (ta, tb) = (self.truth_set(a)?, self.truth_set(b)?);
                (0..n).filter(|w| !ta.contains(w) || tb.contains(w)).collect()
            }
            Formula::Iff(a, b) => {
                let (ta, tb) = (self.truth_set(a)?, self.truth_set(b)?);
                (0..n).filter(|w| ta.contains(w) == tb.contains(w)).collect()
            }
            Formula::Box_(p, g) => {
                let r = self.rel(p)?;
                let tg = self.truth_set(g)?;
                (0..n)
                    .filter(|&w| r.successors(w).all(|v| tg.contains(&v)))
                    .collect()
            }
            Formula::Diamond(p, g) => {
                let r = self.rel(p)?;
                let tg = self.truth_set(g)?;
                (0..n)
                    .filter(|&w| r.successors(w).any(|v| tg.contains(&v)))
                    .collect()
            }
            Formula::Attitude(att) => attitude_set(self, att)?,
            Formula::Dyn(..) => return Err(EvalError::DynamicOperator),
        };
        let rc = Rc::new(value);
        self.truths.borrow_mut().insert(f.clone(), rc.clone());
        Ok(rc)
    }

    fn play_set(&self, agent: &str, action: &str) -> Result<WorldSet, EvalError> {
        let actions = match &self.model.actions {
            Some(actions) if !actions.is_empty() => actions,
            _ => return Err(EvalError::NoActions),
        };
        if !actions.iter().any(|a| a == action) {
            return Err(EvalError::UnknownAction(action.to_string()));
        }
        let i = self
            .model
            .agent_index(agent)
            .ok_or_else(|| EvalError::UnknownAgent(agent.to_string()))?;
        let mut out = WorldSet::new();
        for (w, world) in self.model.worlds.iter().enumerate() {
            match &world.states[i].choice {
                Some(c) if c == action => {
                    out.insert(w);
                }
                Some(_) => {}
                None => {
                    return Err(EvalError::MissingChoice {
                        agent: agent.to_string(),
                        world: world.id.clone(),
                    })
                }
            }
        }
        Ok(out)
    }

    pub fn eval(&self, w: usize, f: &Formula) -> Result<bool, EvalError> {
        Ok(self.truth_set(f)?.contains(&w))
    }

    /// True when the formula holds at every world of the model.
    pub fn valid(&self, f: &Formula) -> Result<bool, EvalError> {
        Ok(self.truth_set(f)?.len() == self.model.n_worlds())
    }

    /// Most plausible worlds of `w`'s cell for the agent, optionally
    /// restricted to worlds satisfying `cond` first.
    pub fn best_p(
        &self,
        agent: usize,
        w: usize,
        cond: Option<&Formula>,
    ) -> Result<WorldSet, EvalError> {
        self.extremal(agent, w, cond, Dim::P, true)
    }

    /// Least desirable worlds of `w`'s cell, optionally restricted.
    pub fn worst_d(
        &self,
        agent: usize,
        w: usize,
        cond: Option<&Formula>,
    ) -> Result<WorldSet, EvalError> {
        self.extremal(agent, w, cond, Dim::D, false)
    }

    /// Most desirable worlds of `w`'s cell (used by the wishful-thinking
    /// frame check).
    pub fn best_d(&self, agent: usize, w: usize) -> WorldSet {
        argmax_rank(self.model, agent, Dim::D, self.model.cell_worlds(agent, w).iter().copied())
    }

    fn extremal(
        &self,
        agent: usize,
        w: usize,
        cond: Option<&Formula>,
        dim: Dim,
        max: bool,
    ) -> Result<WorldSet, EvalError> {
        let members = self.model.cell_worlds(agent, w);
        let filtered: Vec<usize> = match cond {
            Some(f) => {
                let tf = self.truth_set(f)?;
                members.iter().copied().filter(|v| tf.contains(v)).collect()
            }
            None => members.to_vec(),
        };
        Ok(if max {
            argmax_rank(self.model, agent, dim, filtered)
        } else {
            argmin_rank(self.model, agent, dim, filtered)
        })
    }
}

impl<'m> TruthOracle for Session<'m> {
    fn model(&self) -> &Model {
        self.model
    }

    fn truth(&self, f: &Formula) -> Result<Rc<WorldSet>, EvalError> {
        self.truth_set(f)
    }
}

// ---------------------------------------------------------------------------
// One-shot, id-based helpers

fn world_index(m: &Model, id: &str) -> Result<usize, EvalError> {
    m.world_index(id).ok_or_else(|| EvalError::UnknownWorld(id.to_string()))
}

fn agent_index(m: &Model, name: &str) -> Result<usize, EvalError> {
    m.agent_index(name).ok_or_else(|| EvalError::UnknownAgent(name.to_string()))
}

fn to_ids(m: &Model, set: &WorldSet) -> Vec<String> {
    set.iter().map(|&w| m.worlds[w].id.clone()).collect()
}

pub fn eval_at(m: &Model, world: &str, f: &Formula) -> Result<bool, EvalError> {
    Session::new(m).eval(world_index(m, world)?, f)
}

pub fn valid_on(m: &Model, f: &Formula) -> Result<bool, EvalError> {
    Session::new(m).valid(f)
}

/// Ids of the worlds where the formula holds.
pub fn truth_set_ids(m: &Model, f: &Formula) -> Result<Vec<String>, EvalError> {
    let ts = Session::new(m).truth_set(f)?;
    Ok(to_ids(m, &ts))
}

/// Ids of the worlds of `world`'s cell (for `agent`) where the formula
/// holds — the agent-relative extension used by the attitude definitions.
pub fn truth_set_agent(
    m: &Model,
    agent: &str,
    world: &str,
    f: &Formula,
) -> Result<Vec<String>, EvalError> {
    let i = agent_index(m, agent)?;
    let w = world_index(m, world)?;
    let tf = Session::new(m).truth_set(f)?;
    Ok(m.cell_worlds(i, w)
        .iter()
        .filter(|v| tf.contains(v))
        .map(|&v| m.worlds[v].id.clone())
        .collect())
}

pub fn best_p_ids(
    m: &Model,
    agent: &str,
    world: &str,
    cond: Option<&Formula>,
) -> Result<Vec<String>, EvalError> {
    let s = Session::new(m);
    let set = s.best_p(agent_index(m, agent)?, world_index(m, world)?, cond)?;
    Ok(to_ids(m, &set))
}

pub fn worst_d_ids(
    m: &Model,
    agent: &str,
    world: &str,
    cond: Option<&Formula>,
) -> Result<Vec<String>, EvalError> {
    let s = Session::new(m);
    let set = s.worst_d(agent_index(m, agent)?, world_index(m, world)?, cond)?;
    Ok(to_ids(m, &set))
}

/// Wishful-thinking frame condition for one agent: in every cell, the most
/// plausible worlds sit among the most desirable ones or among the least
/// desirable ones.
pub fn check_wt(m: &Model, agent: &str) -> Result<bool, EvalError> {
    let i = agent_index(m, agent)?;
    for (_, members) in m.cells_of(i) {
        let bp = argmax_rank(m, i, Dim::P, members.iter().copied());
        let bd = argmax_rank(m, i, Dim::D, members.iter().copied());
        let wd = argmin_rank(m, i, Dim::D, members.iter().copied());
        if !(bp.is_subset(&bd) || bp.is_subset(&wd)) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn believes(m: &Model, agent: &str, world: &str, prop: &Formula) -> Result<bool, EvalError> {
    let att = Attitude::Belief { agent: agent.to_string(), prop: prop.clone() };
    eval_at(m, world, &Formula::attitude(att))
}

pub fn strong_believes(
    m: &Model,
    agent: &str,
    world: &str,
    prop: &Formula,
) -> Result<bool, EvalError> {
    let att = Attitude::StrongBelief { agent: agent.to_string(), prop: prop.clone() };
    eval_at(m, world, &Formula::attitude(att))
}

pub fn cond_believes(
    m: &Model,
    agent: &str,
    world: &str,
    cond: &Formula,
    prop: &Formula,
) -> Result<bool, EvalError> {
    let att = Attitude::CondBelief {
        agent: agent.to_string(),
        cond: cond.clone(),
        prop: prop.clone(),
    };
    eval_at(m, world, &Formula::attitude(att))
}

pub fn desires(m: &Model, agent: &str, world: &str, prop: &Formula) -> Result<bool, EvalError> {
    let att = Attitude::Desire { agent: agent.to_string(), prop: prop.clone() };
    eval_at(m, world, &Formula::attitude(att))
}

pub fn strong_desires(
    m: &Model,
    agent: &str,
    world: &str,
    prop: &Formula,
) -> Result<bool, EvalError> {
    let att = Attitude::StrongDesire { agent: agent.to_string(), prop: prop.clone() };
    eval_at(m, world, &Formula::attitude(att))
}

pub fn cond_desires(
    m: &Model,
    agent: &str,
    world: &str,
    cond: &Formula,
    prop: &Formula,
) -> Result<bool, EvalError> {
    let att = Attitude::CondDesire {
        agent: agent.to_string(),
        cond: cond.clone(),
        prop: prop.clone(),
    };
    eval_at(m, world, &Formula::attitude(att))
}

pub fn prefers(
    m: &Model,
    agent: &str,
    world: &str,
    mode: Mode,
    realistic: bool,
    arg: &PrefArg,
) -> Result<bool, EvalError> {
    let att =
        Attitude::Pref { agent: agent.to_string(), mode, realistic, arg: arg.clone() };
    eval_at(m, world, &Formula::attitude(att))
}
