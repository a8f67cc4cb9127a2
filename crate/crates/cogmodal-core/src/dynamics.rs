//! Attitude revision: rank transforms on models, the matching relation
//! transformer on programs, the rewriter that eliminates revision operators
//! from formulas, and a direct evaluator for formulas that still contain
//! them.
//!
//! The two evaluation routes are deliberately independent: `eval_dynamic`
//! applies the rank transforms and evaluates the suffix on the upgraded
//! model, while [`reduce`] rewrites the formula into the static language so
//! the plain checker can evaluate it on the *original* model. Agreement of
//! the two routes is checked by tests and fuzz suites.
//!
//! Rank transforms (always per cell of the revised agent, in the revised
//! dimension only):
//!
//! * radical (`radB`/`radD`): all input-worlds are moved strictly above all
//!   non-input-worlds; inside each block the old order is kept;
//! * conservative `conB`: the *most plausible* input-worlds are promoted to
//!   a fresh top rank, everything else keeps its order;
//! * conservative `conD`: the *least desirable* non-input-worlds are
//!   demoted to a fresh bottom rank, everything else keeps its order.
//!
//! All transforms renumber every touched cell densely from 0, so the output
//! is in the same canonical form the generators produce.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use serde::Serialize;

use crate::checker::{attitude_set, EvalError, Session, TruthOracle};
use crate::model::{Model, PairSet, WorldSet};
use crate::syntax::{
    desugar_program, expand_attitude, Dim, Flavor, Formula, Program, RevisionOp,
};

// ---------------------------------------------------------------------------
// Model transforms

/// One world's rank movement, recorded per cell when a transform runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankChange {
    pub agent: String,
    pub dim: Dim,
    pub cell: String,
    pub world: String,
    pub old_rank: u64,
    pub new_rank: u64,
}

/// The upgraded model together with the complete old-rank/new-rank mapping
/// of every cell the transform touched.
#[derive(Debug, Clone)]
pub struct TransformResult {
    pub model: Model,
    pub changes: Vec<RankChange>,
}

/// Apply a parsed revision operator to a model. The input formula may
/// itself contain revision operators; they are evaluated dynamically.
pub fn apply(m: &Model, op: &RevisionOp) -> Result<TransformResult, EvalError> {
    let agent = m
        .agent_index(&op.agent)
        .ok_or_else(|| EvalError::UnknownAgent(op.agent.clone()))?;
    let truth = dyn_truth_set(m, &op.input)?;
    Ok(upgrade_with_truth(m, agent, op.flavor, op.dim, &truth))
}

/// Two-tier upgrade: input-worlds above non-input-worlds, old order kept
/// inside each tier.
pub fn radical_upgrade(
    m: &Model,
    agent: &str,
    dim: Dim,
    input: &Formula,
) -> Result<TransformResult, EvalError> {
    apply(m, &RevisionOp { flavor: Flavor::Radical, dim, agent: agent.to_string(), input: Box::new(input.clone()) })
}

/// Minimal-change upgrade (promote best input-worlds for `P`, demote worst
/// non-input-worlds for `D`).
pub fn conservative_upgrade(
    m: &Model,
    agent: &str,
    dim: Dim,
    input: &Formula,
) -> Result<TransformResult, EvalError> {
    apply(m, &RevisionOp { flavor: Flavor::Conservative, dim, agent: agent.to_string(), input: Box::new(input.clone()) })
}

pub(crate) fn upgrade_with_truth(
    m: &Model,
    agent: usize,
    flavor: Flavor,
    dim: Dim,
    truth: &WorldSet,
) -> TransformResult {
    let mut out = m.clone();
    let mut changes = Vec::new();
    for (label, members) in m.cells_of(agent) {
        let new_ranks = match (flavor, dim) {
            (Flavor::Radical, _) => radical_cell(m, agent, dim, members, truth),
            (Flavor::Conservative, Dim::P) => conservative_promote(m, agent, members, truth),
            (Flavor::Conservative, Dim::D) => conservative_demote(m, agent, members, truth),
        };
        for (w, new_rank) in new_ranks {
            let old_rank = m.rank(agent, dim, w);
            *out.worlds[w].states[agent].rank_mut(dim) = new_rank;
            changes.push(RankChange {
                agent: m.agents[agent].clone(),
                dim,
                cell: label.to_string(),
                world: m.worlds[w].id.clone(),
                old_rank,
                new_rank,
            });
        }
    }
    TransformResult { model: out, changes }
}

/// Dense renumbering of `worlds` by old rank, starting at `base`; returns
/// the assignments and the number of distinct ranks seen.
fn dense(
    m: &Model,
    agent: usize,
    dim: Dim,
    worlds: &[usize],
    base: u64,
) -> (Vec<(usize, u64)>, u64) {
    let mut ranks: Vec<u64> = worlds.iter().map(|&w| m.rank(agent, dim, w)).collect();
    ranks.sort_unstable();
    ranks.dedup();
    let assignments = worlds
        .iter()
        .map(|&w| {
            let idx = ranks.binary_search(&m.rank(agent, dim, w)).expect("present") as u64;
            (w, base + idx)
        })
        .collect();
    (assignments, ranks.len() as u64)
}

fn radical_cell(
    m: &Model,
    agent: usize,
    dim: Dim,
    members: &[usize],
    truth: &WorldSet,
) -> Vec<(usize, u64)> {
    let (input, rest): (Vec<usize>, Vec<usize>) =
        members.iter().partition(|w| truth.contains(w));
    let (mut low, tiers) = dense(m, agent, dim, &rest, 0);
    let (high, _) = dense(m, agent, dim, &input, tiers);
    low.extend(high);
    low
}

fn conservative_promote(
    m: &Model,
    agent: usize,
    members: &[usize],
    truth: &WorldSet,
) -> Vec<(usize, u64)> {
    let input: Vec<usize> = members.iter().copied().filter(|w| truth.contains(w)).collect();
    let Some(top) = input.iter().map(|&w| m.rank(agent, Dim::P, w)).max() else {
        // Nothing to promote: keep the order, just renumber densely.
        return dense(m, agent, Dim::P, members, 0).0;
    };
    let promoted: Vec<usize> =
        input.iter().copied().filter(|&w| m.rank(agent, Dim::P, w) == top).collect();
    let rest: Vec<usize> =
        members.iter().copied().filter(|w| !promoted.contains(w)).collect();
    let (mut out, tiers) = dense(m, agent, Dim::P, &rest, 0);
    out.extend(promoted.into_iter().map(|w| (w, tiers)));
    out
}

fn conservative_demote(
    m: &Model,
    agent: usize,
    members: &[usize],
    truth: &WorldSet,
) -> Vec<(usize, u64)> {
    let outside: Vec<usize> =
        members.iter().copied().filter(|w| !truth.contains(w)).collect();
    let Some(bottom) = outside.iter().map(|&w| m.rank(agent, Dim::D, w)).min() else {
        return dense(m, agent, Dim::D, members, 0).0;
    };
    let demoted: Vec<usize> =
        outside.iter().copied().filter(|&w| m.rank(agent, Dim::D, w) == bottom).collect();
    let rest: Vec<usize> =
        members.iter().copied().filter(|w| !demoted.contains(w)).collect();
    let (rest_out, _) = dense(m, agent, Dim::D, &rest, 1);
    let mut out: Vec<(usize, u64)> = demoted.into_iter().map(|w| (w, 0)).collect();
    out.extend(rest_out);
    out
}

// ---------------------------------------------------------------------------
// Relation transformer

/// The program denoting, in the *original* model, the relation that `p`
/// denotes in the model upgraded by `op`. Only `le`/`nle` atoms of the
/// revised agent and dimension are rewritten; tests are wrapped so their
/// formulas are still evaluated after the revision.
pub fn f_transform(op: &RevisionOp, p: &Program) -> Program {
    match p {
        Program::Eq(_) => p.clone(),
        Program::Le(j, t) if *j == op.agent && *t == op.dim => {
            guarded_rows(op, p.clone(), false)
        }
        Program::Nle(j, t) if *j == op.agent && *t == op.dim => {
            guarded_rows(op, p.clone(), true)
        }
        Program::Le(..) | Program::Nle(..) => p.clone(),
        Program::Seq(a, b) => Program::seq(f_transform(op, a), f_transform(op, b)),
        Program::Union(a, b) => Program::union(f_transform(op, a), f_transform(op, b)),
        Program::Inter(a, b) => Program::inter(f_transform(op, a), f_transform(op, b)),
        Program::Conv(a) => Program::conv(f_transform(op, a)),
        Program::Test(f) => Program::test(Formula::dyn_(op.clone(), (**f).clone())),
        Program::Ge(..)
        | Program::Lt(..)
        | Program::Gt(..)
        | Program::Nge(..)
        | Program::Sim(..) => f_transform(op, &desugar_program(p)),
    }
}

/// Worlds moved by the revision: the whole input extension for radical
/// upgrades, the promoted/demoted extremal block for conservative ones.
fn moved_guard(op: &RevisionOp) -> Formula {
    let input = (*op.input).clone();
    match op.flavor {
        Flavor::Radical => input,
        Flavor::Conservative => match op.dim {
            // Most plausible input-worlds: input holds and every strictly
            // more plausible world falsifies it.
            Dim::P => Formula::and(
                input.clone(),
                Formula::box_(Program::Lt(op.agent.clone(), Dim::P), Formula::not(input)),
            ),
            // Least desirable non-input-worlds: input fails and every
            // strictly less desirable world satisfies it.
            Dim::D => Formula::and(
                Formula::not(input.clone()),
                Formula::box_(Program::Gt(op.agent.clone(), Dim::D), input),
            ),
        },
    }
}

/// Assemble the three-way union for a rewritten `le`/`nle` atom. The moved
/// block ends up strictly above (radical, conservative `P`) or strictly
/// below (conservative `D`) the rest; `complement` selects the `nle` row.
fn guarded_rows(op: &RevisionOp, atom: Program, complement: bool) -> Program {
    let g = moved_guard(op);
    let moved = Program::test(g.clone());
    let kept = Program::test(Formula::not(g));
    let eq = Program::Eq(op.agent.clone());
    let seq3 = |a: Program, b: Program, c: Program| Program::seq(Program::seq(a, b), c);
    let within = Program::union(
        seq3(moved.clone(), atom.clone(), moved.clone()),
        seq3(kept.clone(), atom, kept.clone()),
    );
    let moved_is_low = op.flavor == Flavor::Conservative && op.dim == Dim::D;
    let cross = match (moved_is_low, complement) {
        // Moved block sits on top: everything reaches it weakly, it reaches
        // the rest strictly.
        (false, false) => seq3(kept, eq, moved),
        (false, true) => seq3(moved, eq, kept),
        // Moved block sits at the bottom: dual directions.
        (true, false) => seq3(moved, eq, kept),
        (true, true) => seq3(kept, eq, moved),
    };
    Program::union(within, cross)
}

// ---------------------------------------------------------------------------
// Reduction to the static language

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReduceError {
    #[error("reduction exceeded the budget of {0} rewrite steps")]
    Budget(usize),
}

/// Rewrite a formula into one without revision operators, denoting the same
/// truth set on every model. Unbudgeted; prefer [`reduce_with_budget`] on
/// untrusted input, since nested revisions can blow up the output size.
pub fn reduce(f: &Formula) -> Formula {
    reduce_with_budget(f, usize::MAX).expect("unbounded reduction cannot run out of budget")
}

pub fn reduce_with_budget(f: &Formula, budget: usize) -> Result<Formula, ReduceError> {
    let mut fuel = Fuel { budget, remaining: budget };
    red(f, &mut fuel)
}

struct Fuel {
    budget: usize,
    remaining: usize,
}

impl Fuel {
    fn spend(&mut self) -> Result<(), ReduceError> {
        if self.remaining == 0 {
            return Err(ReduceError::Budget(self.budget));
        }
        self.remaining -= 1;
        Ok(())
    }
}

fn red(f: &Formula, fuel: &mut Fuel) -> Result<Formula, ReduceError> {
    fuel.spend()?;
    Ok(match f {
        Formula::True
        | Formula::False
        | Formula::Atom(_)
        | Formula::Nominal(_)
        | Formula::Play(..) => f.clone(),
        Formula::Not(g) => Formula::not(red(g, fuel)?),
        Formula::And(a, b) => Formula::and(red(a, fuel)?, red(b, fuel)?),
        Formula::Or(a, b) => Formula::or(red(a, fuel)?, red(b, fuel)?),
        Formula::Implies(a, b) => Formula::implies(red(a, fuel)?, red(b, fuel)?),
        Formula::Iff(a, b) => Formula::iff(red(a, fuel)?, red(b, fuel)?),
        Formula::Box_(p, g) => Formula::box_(red_prog(p, fuel)?, red(g, fuel)?),
        Formula::Diamond(p, g) => Formula::diamond(red_prog(p, fuel)?, red(g, fuel)?),
        Formula::Attitude(att) => {
            let mut att = (**att).clone();
            for arg in att.args_mut() {
                *arg = red(arg, fuel)?;
            }
            Formula::attitude(att)
        }
        Formula::Dyn(op, g) => {
            let op = RevisionOp {
                flavor: op.flavor,
                dim: op.dim,
                agent: op.agent.clone(),
                input: Box::new(red(&op.input, fuel)?),
            };
            let suffix = red(g, fuel)?;
            push(&op, &suffix, fuel)?
        }
    })
}

fn red_prog(p: &Program, fuel: &mut Fuel) -> Result<Program, ReduceError> {
    fuel.spend()?;
    Ok(match p {
        Program::Eq(_)
        | Program::Le(..)
        | Program::Nle(..)
        | Program::Ge(..)
        | Program::Lt(..)
        | Program::Gt(..)
        | Program::Nge(..)
        | Program::Sim(..) => p.clone(),
        Program::Seq(a, b) => Program::seq(red_prog(a, fuel)?, red_prog(b, fuel)?),
        Program::Union(a, b) => Program::union(red_prog(a, fuel)?, red_prog(b, fuel)?),
        Program::Inter(a, b) => Program::inter(red_prog(a, fuel)?, red_prog(b, fuel)?),
        Program::Conv(a) => Program::conv(red_prog(a, fuel)?),
        Program::Test(f) => Program::test(red(f, fuel)?),
    })
}

/// Push one revision operator through a revision-free suffix. `op.input`
/// is already reduced.
fn push(op: &RevisionOp, h: &Formula, fuel: &mut Fuel) -> Result<Formula, ReduceError> {
    fuel.spend()?;
    Ok(match h {
        // Revisions reorder ranks only: valuation, nominals and choices are
        // untouched, so facts pass through unchanged.
        Formula::True
        | Formula::False
        | Formula::Atom(_)
        | Formula::Nominal(_)
        | Formula::Play(..) => h.clone(),
        Formula::Not(g) => Formula::not(push(op, g, fuel)?),
        Formula::And(a, b) => Formula::and(push(op, a, fuel)?, push(op, b, fuel)?),
        Formula::Or(a, b) => Formula::or(push(op, a, fuel)?, push(op, b, fuel)?),
        Formula::Implies(a, b) => {
            Formula::implies(push(op, a, fuel)?, push(op, b, fuel)?)
        }
        Formula::Iff(a, b) => Formula::iff(push(op, a, fuel)?, push(op, b, fuel)?),
        Formula::Box_(p, g) => {
            Formula::box_(red_prog(&f_transform(op, p), fuel)?, push(op, g, fuel)?)
        }
        Formula::Diamond(p, g) => {
            Formula::diamond(red_prog(&f_transform(op, p), fuel)?, push(op, g, fuel)?)
        }
        // No reduction law is stated for attitudes directly; unfold the
        // attitude into its program encoding and push through that.
        Formula::Attitude(att) => push(op, &expand_attitude(att), fuel)?,
        Formula::Dyn(..) => {
            unreachable!("suffix was reduced before pushing the operator")
        }
    })
}

// ---------------------------------------------------------------------------
// Direct dynamic evaluation

/// Evaluate a formula that may contain revision operators by actually
/// applying the rank transforms. Transformed models are memoized per
/// operator, and each level shares one set of truth/relation caches.
pub fn eval_dynamic(m: &Model, world: &str, f: &Formula) -> Result<bool, EvalError> {
    let w = m
        .world_index(world)
        .ok_or_else(|| EvalError::UnknownWorld(world.to_string()))?;
    Ok(DynEval::new(Rc::new(m.clone())).truth(f)?.contains(&w))
}

/// Per-model validity under the direct dynamic semantics.
pub fn valid_on_dynamic(m: &Model, f: &Formula) -> Result<bool, EvalError> {
    let n = m.n_worlds();
    Ok(DynEval::new(Rc::new(m.clone())).truth(f)?.len() == n)
}

fn dyn_truth_set(m: &Model, f: &Formula) -> Result<WorldSet, EvalError> {
    if !f.has_dynamics() {
        return Ok((*Session::new(m).truth_set(f)?).clone());
    }
    Ok((*DynEval::new(Rc::new(m.clone())).truth(f)?).clone())
}

/// Evaluator level for one model; `Dyn` subformulas spawn child levels on
/// the upgraded models. World indices line up across levels because the
/// transforms never reorder the world list.
struct DynEval {
    model: Rc<Model>,
    truths: RefCell<HashMap<Formula, Rc<WorldSet>>>,
    rels: RefCell<HashMap<Program, Rc<PairSet>>>,
    children: RefCell<HashMap<RevisionOp, Rc<DynEval>>>,
}

impl DynEval {
    fn new(model: Rc<Model>) -> Self {
        DynEval {
            model,
            truths: RefCell::new(HashMap::new()),
            rels: RefCell::new(HashMap::new()),
            children: RefCell::new(HashMap::new()),
        }
    }

    fn child(&self, op: &RevisionOp) -> Result<Rc<DynEval>, EvalError> {
        if let Some(hit) = self.children.borrow().get(op).cloned() {
            return Ok(hit);
        }
        let agent = self
            .model
            .agent_index(&op.agent)
            .ok_or_else(|| EvalError::UnknownAgent(op.agent.clone()))?;
        let input = self.truth(&op.input)?;
        let upgraded =
            upgrade_with_truth(&self.model, agent, op.flavor, op.dim, &input).model;
        let child = Rc::new(DynEval::new(Rc::new(upgraded)));
        self.children.borrow_mut().insert(op.clone(), child.clone());
        Ok(child)
    }

    fn rel(&self, p: &Program) -> Result<Rc<PairSet>, EvalError> {
        if let Some(hit) = self.rels.borrow().get(p).cloned() {
            return Ok(hit);
        }
        let value: PairSet = match p {
            Program::Eq(_) | Program::Le(..) | Program::Nle(..) => {
                self.model.atomic_rel(p).map_err(|e| match e {
                    crate::model::AtomicRelError::UnknownAgent(a) => {
                        EvalError::UnknownAgent(a)
                    }
                    crate::model::AtomicRelError::NotAtomic(_) => unreachable!(),
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
                let tf = self.truth(f)?;
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
}

impl TruthOracle for DynEval {
    fn model(&self) -> &Model {
        &self.model
    }

    fn truth(&self, f: &Formula) -> Result<Rc<WorldSet>, EvalError> {
        if let Some(hit) = self.truths.borrow().get(f).cloned() {
            return Ok(hit);
        }
        let n = self.model.n_worlds();
        let value: WorldSet = match f {
            Formula::Dyn(op, g) => {
                let child = self.child(op)?;
                (*child.truth(g)?).clone()
            }
            Formula::True => (0..n).collect(),
            Formula::False => WorldSet::new(),
            Formula::Atom(_) | Formula::Nominal(_) | Formula::Play(..) => {
                // Facts never contain further dynamics; reuse the checker.
                (*Session::new(&self.model).truth_set(f)?).clone()
            }
            Formula::Not(g) => {
                let tg = self.truth(g)?;
                (0..n).filter(|w| !tg.contains(w)).collect()
            }
            Formula::And(a, b) => {
                let (ta, tb) = (self.truth(a)?, self.truth(b)?);
                ta.intersection(&tb).copied().collect()
            }
            Formula::Or(a, b) => {
                let (ta, tb) = (self.truth(a)?, self.truth(b)?);
                ta.union(&tb).copied().collect()
            }
            Formula::Implies(a, b) => {
                let (ta, tb) = (self.truth(a)?, self.truth(b)?);
                (0..n).filter(|w| !ta.contains(w) || tb.contains(w)).collect()
            }
            Formula::Iff(a, b) => {
                let (ta, tb) = (self.truth(a)?, self.truth(b)?);
                (0..n).filter(|w| ta.contains(w) == tb.contains(w)).collect()
            }
            Formula::Box_(p, g) => {
                let r = self.rel(p)?;
                let tg = self.truth(g)?;
                (0..n).filter(|&w| r.successors(w).all(|v| tg.contains(&v))).collect()
            }
            Formula::Diamond(p, g) => {
                let r = self.rel(p)?;
                let tg = self.truth(g)?;
                (0..n).filter(|&w| r.successors(w).any(|v| tg.contains(&v))).collect()
            }
            Formula::Attitude(att) => attitude_set(self, att)?,
        };
        let rc = Rc::new(value);
        self.truths.borrow_mut().insert(f.clone(), rc.clone());
        Ok(rc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::eval_at;
    use crate::syntax::{parse_formula, parse_program};

    fn fixture(name: &str) -> Model {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/");
        Model::load(format!("{path}{name}")).expect("fixture loads")
    }

    fn f(s: &str) -> Formula {
        parse_formula(s).expect("formula parses")
    }

    fn p(s: &str) -> Program {
        parse_program(s).expect("program parses")
    }

    fn ranks(m: &Model, agent: &str, dim: Dim) -> Vec<(String, u64)> {
        let i = m.agent_index(agent).unwrap();
        m.worlds.iter().map(|w| (w.id.clone(), w.states[i].rank(dim))).collect()
    }

    fn rank_list(pairs: &[(&str, u64)]) -> Vec<(String, u64)> {
        pairs.iter().map(|(w, r)| (w.to_string(), *r)).collect()
    }

    #[test]
    fn radical_upgrade_moves_input_worlds_on_top() {
        let m = fixture("m1.json");
        let t = radical_upgrade(&m, "1", Dim::P, &f("!p")).unwrap();
        assert_eq!(
            ranks(&t.model, "1", Dim::P),
            rank_list(&[("w1", 0), ("w2", 2), ("w3", 1)])
        );
        assert!(eval_at(&t.model, "w1", &f("SB{1} !p & B{1} !p")).unwrap());
        // The log records the full mapping of the touched cell.
        let logged: Vec<(String, u64, u64)> = t
            .changes
            .iter()
            .map(|c| (c.world.clone(), c.old_rank, c.new_rank))
            .collect();
        assert_eq!(
            logged,
            vec![
                ("w1".to_string(), 2, 0),
                ("w2".to_string(), 1, 2),
                ("w3".to_string(), 0, 1)
            ]
        );
    }

    #[test]
    fn conservative_promotion_keeps_the_rest_of_the_order() {
        let m = fixture("m1.json");
        let t = conservative_upgrade(&m, "1", Dim::P, &f("!p")).unwrap();
        assert_eq!(
            ranks(&t.model, "1", Dim::P),
            rank_list(&[("w1", 1), ("w2", 2), ("w3", 0)])
        );
        assert!(eval_at(&t.model, "w1", &f("B{1} !p")).unwrap());
        assert!(!eval_at(&t.model, "w1", &f("SB{1} !p")).unwrap());
    }

    #[test]
    fn radical_desire_upgrade_on_the_crossroad_model() {
        let m = fixture("mcross.json");
        let t = radical_upgrade(&m, "1", Dim::D, &f("!lo2")).unwrap();
        assert_eq!(
            ranks(&t.model, "1", Dim::D),
            rank_list(&[("w1", 0), ("w2", 3), ("w3", 2), ("w4", 1)])
        );
        // Agent 1 now desires (even strongly) that agent 2 loses time, and
        // keeps desiring not to lose time itself, though no longer strongly.
        assert!(eval_dynamic(
            &m,
            "w1",
            &f("[radD{1} !lo2](SD{1} !lo2 & D{1} !lo2 & D{1} !lo1 & !SD{1} !lo1)")
        )
        .unwrap());
    }

    #[test]
    fn conservative_belief_upgrade_makes_the_announcement_believed() {
        let m = fixture("mcross.json");
        let announcement = f("(lo1 & lo2) -> !co");
        let t = conservative_upgrade(&m, "2", Dim::P, &announcement).unwrap();
        assert_eq!(
            ranks(&t.model, "2", Dim::P),
            rank_list(&[("w1", 0), ("w2", 1), ("w3", 1), ("w4", 1)])
        );
        assert!(valid_on_dynamic(&m, &f("[conB{2}((lo1 & lo2) -> !co)] B{2} !co")).unwrap());
    }

    #[test]
    fn upgrades_touch_only_the_revised_dimension() {
        let m = fixture("mcross.json");
        let t = radical_upgrade(&m, "1", Dim::D, &f("!lo2")).unwrap();
        assert_eq!(ranks(&t.model, "1", Dim::P), ranks(&m, "1", Dim::P));
        assert_eq!(ranks(&t.model, "2", Dim::D), ranks(&m, "2", Dim::D));
        for (a, b) in m.worlds.iter().zip(&t.model.worlds) {
            assert_eq!(a.atoms, b.atoms);
            assert_eq!(a.nominals, b.nominals);
        }
    }

    #[test]
    fn upgrade_by_a_constant_preserves_the_order() {
        for name in ["m0.json", "m1.json", "mcross.json"] {
            let m = fixture(name);
            for (flavor, dim, input) in [
                (Flavor::Radical, Dim::P, "true"),
                (Flavor::Radical, Dim::D, "false"),
                (Flavor::Conservative, Dim::P, "false"),
                (Flavor::Conservative, Dim::D, "true"),
            ] {
                let op = RevisionOp {
                    flavor,
                    dim,
                    agent: "1".to_string(),
                    input: Box::new(f(input)),
                };
                let t = apply(&m, &op).unwrap();
                let atom = Program::Le("1".to_string(), dim);
                assert_eq!(
                    t.model.atomic_rel(&atom).unwrap(),
                    m.atomic_rel(&atom).unwrap(),
                    "{name} {flavor:?} {dim:?} {input}"
                );
            }
        }
    }

    /// Independent comprehension of the upgraded order, written directly
    /// from the two-tier / promote / demote descriptions over the *old*
    /// model.
    fn upgraded_le_oracle(
        m: &Model,
        agent: usize,
        flavor: Flavor,
        dim: Dim,
        truth: &WorldSet,
    ) -> PairSet {
        let mut out = PairSet::new();
        for (_, members) in m.cells_of(agent) {
            let moved: Vec<usize> = match flavor {
                Flavor::Radical => {
                    members.iter().copied().filter(|w| truth.contains(w)).collect()
                }
                Flavor::Conservative if dim == Dim::P => {
                    let input: Vec<usize> =
                        members.iter().copied().filter(|w| truth.contains(w)).collect();
                    match input.iter().map(|&w| m.rank(agent, Dim::P, w)).max() {
                        Some(top) => input
                            .into_iter()
                            .filter(|&w| m.rank(agent, Dim::P, w) == top)
                            .collect(),
                        None => vec![],
                    }
                }
                Flavor::Conservative => {
                    let outside: Vec<usize> =
                        members.iter().copied().filter(|w| !truth.contains(w)).collect();
                    match outside.iter().map(|&w| m.rank(agent, Dim::D, w)).min() {
                        Some(bottom) => outside
                            .into_iter()
                            .filter(|&w| m.rank(agent, Dim::D, w) == bottom)
                            .collect(),
                        None => vec![],
                    }
                }
            };
            let moved_is_low = flavor == Flavor::Conservative && dim == Dim::D;
            for &w in members {
                for &v in members {
                    let keep = match (moved.contains(&w), moved.contains(&v)) {
                        (true, true) | (false, false) => {
                            m.rank(agent, dim, w) <= m.rank(agent, dim, v)
                        }
                        (false, true) => !moved_is_low,
                        (true, false) => moved_is_low,
                    };
                    if keep {
                        out.insert(w, v);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn upgraded_relations_match_the_comprehension_oracle() {
        let inputs = ["p", "!p", "true", "false"];
        let m0 = fixture("m0.json");
        let m1 = fixture("m1.json");
        let sd = fixture("sd-witness.json");
        for m in [&m0, &m1, &sd] {
            for input in inputs {
                let truth_rc = Session::new(m).truth_set(&f(input)).unwrap();
                let truth = (*truth_rc).clone();
                for flavor in [Flavor::Radical, Flavor::Conservative] {
                    for dim in [Dim::P, Dim::D] {
                        let t = upgrade_with_truth(m, 0, flavor, dim, &truth);
                        let got = t
                            .model
                            .atomic_rel(&Program::Le("1".to_string(), dim))
                            .unwrap();
                        let want = upgraded_le_oracle(m, 0, flavor, dim, &truth);
                        assert_eq!(got, want, "{flavor:?} {dim:?} by {input}");
                    }
                }
            }
        }
    }

    #[test]
    fn relation_transformer_produces_the_guarded_union() {
        let op = RevisionOp {
            flavor: Flavor::Radical,
            dim: Dim::P,
            agent: "1".to_string(),
            input: Box::new(f("p")),
        };
        assert_eq!(
            f_transform(&op, &p("le(1,P)")),
            p("(?(p);le(1,P);?(p)) | (?(!p);le(1,P);?(!p)) | (?(!p);eq(1);?(p))")
        );
        assert_eq!(
            f_transform(&op, &p("nle(1,P)")),
            p("(?(p);nle(1,P);?(p)) | (?(!p);nle(1,P);?(!p)) | (?(p);eq(1);?(!p))")
        );
        // Other agents, the other dimension and cell programs are unchanged.
        assert_eq!(f_transform(&op, &p("le(2,P)")), p("le(2,P)"));
        assert_eq!(f_transform(&op, &p("le(1,D)")), p("le(1,D)"));
        assert_eq!(f_transform(&op, &p("eq(1)")), p("eq(1)"));
        // Tests are re-evaluated after the revision.
        assert_eq!(f_transform(&op, &p("?(q)")), p("?([radB{1} p] q)"));
        // The transformer is homomorphic on combinators.
        assert_eq!(
            f_transform(&op, &p("eq(2); le(1,D)")),
            p("eq(2); le(1,D)")
        );
    }

    #[test]
    fn conservative_transformer_guards_on_the_moved_block() {
        let op = RevisionOp {
            flavor: Flavor::Conservative,
            dim: Dim::P,
            agent: "1".to_string(),
            input: Box::new(f("p")),
        };
        let g = "p & [lt(1,P)] !p";
        assert_eq!(
            f_transform(&op, &p("le(1,P)")),
            p(&format!("(?({g});le(1,P);?({g})) | (?(!({g}));le(1,P);?(!({g}))) | (?(!({g}));eq(1);?({g}))"))
        );
        let opd = RevisionOp {
            flavor: Flavor::Conservative,
            dim: Dim::D,
            agent: "1".to_string(),
            input: Box::new(f("p")),
        };
        let h = "!p & [gt(1,D)] p";
        assert_eq!(
            f_transform(&opd, &p("le(1,D)")),
            p(&format!("(?({h});le(1,D);?({h})) | (?(!({h}));le(1,D);?(!({h}))) | (?({h});eq(1);?(!({h})))"))
        );
        assert_eq!(
            f_transform(&opd, &p("nle(1,D)")),
            p(&format!("(?({h});nle(1,D);?({h})) | (?(!({h}));nle(1,D);?(!({h}))) | (?(!({h}));eq(1);?({h}))"))
        );
    }

    #[test]
    fn transformed_programs_denote_the_upgraded_relations() {
        // Interpreting F(π) on the old model must equal interpreting π on
        // the upgraded model, for every atom and a compound.
        let cases = [
            ("m0.json", "radB", "p"),
            ("m1.json", "radB", "!p"),
            ("m1.json", "conB", "!p"),
            ("sd-witness.json", "radD", "p & !q"),
            ("sd-witness.json", "conD", "q"),
            ("mcross.json", "conD", "lo1 -> co"),
        ];
        for (name, keyword, input) in cases {
            let m = fixture(name);
            let full = f(&format!("[{keyword}{{1}} {input}] true"));
            let Formula::Dyn(op, _) = &full else { panic!("dyn") };
            let upgraded = apply(&m, op).unwrap().model;
            for prog in ["le(1,P)", "nle(1,P)", "le(1,D)", "nle(1,D)", "eq(1)",
                         "le(1,P); nle(1,D)", "lt(1,D)", "?(p | co)"] {
                let prog = match (name, prog) {
                    // The crossroad fixture has different atoms.
                    ("mcross.json", "?(p | co)") => "?(co | lo1)",
                    _ => prog,
                };
                let direct = Session::new(&upgraded).rel(&p(prog)).unwrap();
                let via_f = Session::new(&m).rel(&f_transform(op, &p(prog)));
                // F-images contain dynamic tests; evaluate them dynamically
                // by reducing first.
                let via_f = match via_f {
                    Ok(r) => r,
                    Err(EvalError::DynamicOperator) => {
                        let reduced = red_prog_public(&f_transform(op, &p(prog)));
                        Session::new(&m).rel(&reduced).unwrap()
                    }
                    Err(e) => panic!("{e}"),
                };
                assert_eq!(*direct, *via_f, "{keyword} {input} on {name}: {prog}");
            }
        }
    }

    fn red_prog_public(p: &Program) -> Program {
        let mut fuel = Fuel { budget: usize::MAX, remaining: usize::MAX };
        red_prog(p, &mut fuel).unwrap()
    }

    #[test]
    fn reduction_eliminates_revision_operators() {
        let cases = [
            "[radB{1} p] B{1} p",
            "[radB{1} !p] SB{1} !p",
            "[conB{1} !p](B{1} !p & !SB{1} !p)",
            "[radD{1} p] D{1} p",
            "[conD{1} p] D{1} p",
            "[radB{1} p][le(1,P)] q",
            "[radB{1} p][conD{1} q] Ppes{1}(q <= p)",
            "[radB{1} (q & [conD{1} q] D{1} q)] B{1} q",
        ];
        for src in cases {
            let original = f(src);
            let reduced = reduce(&original);
            assert!(!reduced.has_dynamics(), "{src}");
        }
    }

    #[test]
    fn reduction_preserves_truth_on_fixtures() {
        let cases = [
            "[radB{1} p] B{1} p",
            "[radB{1} !p](SB{1} !p & B{1} !p)",
            "[conB{1} !p](B{1} !p & !SB{1} !p)",
            "[radD{1} !p] SD{1} !p",
            "[conD{1} p] D{1} p",
            "[radB{1} p][le(1,P)] p",
            "[radB{1} p]<nle(1,P)> !p",
            "[conD{1} p][radB{1} !p] B{1} !p",
            "[radB{1} [conD{1} p] D{1} p] B{1} p",
            "[radD{1} p] Popt{1}(p <= !p)",
            "[conB{1} p] RPpes{1}(!p <= p)",
        ];
        for name in ["m0.json", "m1.json", "sd-witness.json"] {
            let m = fixture(name);
            for src in cases {
                let original = f(src);
                let reduced = reduce(&original);
                for w in 0..m.n_worlds() {
                    let id = m.world_id(w).to_string();
                    assert_eq!(
                        eval_dynamic(&m, &id, &original).unwrap(),
                        eval_at(&m, &id, &reduced).unwrap(),
                        "{src} at {id} of {name}"
                    );
                }
            }
        }
    }

    #[test]
    fn reduction_is_identity_on_static_formulas() {
        for src in ["B{1} p & [le(1,P)] q", "<eq(1)>(p -> @w1)", "Popt{1}(p < q)"] {
            assert_eq!(reduce(&f(src)), f(src));
        }
    }

    #[test]
    fn reduction_respects_its_budget() {
        let nested = f("[radB{1} p][radB{1} q][radB{1} (p & q)] B{1}(p & q)");
        assert!(matches!(
            reduce_with_budget(&nested, 10),
            Err(ReduceError::Budget(10))
        ));
        assert!(reduce_with_budget(&nested, 1_000_000).is_ok());
    }

    #[test]
    fn success_laws_hold_on_fixtures() {
        let laws = [
            "<eq(1)> !p -> [radB{1} !p](B{1} !p & SB{1} !p)",
            // Desire needs something worse to avoid, hence the two-sided guard.
            "(<eq(1)> !p & <eq(1)> p) -> [radD{1} !p](D{1} !p & SD{1} !p)",
            "<eq(1)> p -> [conB{1} p] B{1} p",
            "<eq(1)> !p -> [conD{1} p] D{1} p",
        ];
        for name in ["m0.json", "m1.json", "sd-witness.json"] {
            let m = fixture(name);
            for law in laws {
                assert!(valid_on_dynamic(&m, &f(law)).unwrap(), "{law} on {name}");
            }
        }
    }

    #[test]
    fn dynamic_evaluation_agrees_with_the_checker_on_static_formulas() {
        let m = fixture("mcross.json");
        for src in ["SD{1}(!lo1 & lo2)", "[eq(2)](co -> lo1)", "Ppes{2}(lo2 <= lo1)"] {
            for w in ["w1", "w2", "w3", "w4"] {
                assert_eq!(
                    eval_dynamic(&m, w, &f(src)).unwrap(),
                    eval_at(&m, w, &f(src)).unwrap(),
                    "{src} at {w}"
                );
            }
        }
    }

    #[test]
    fn apply_reports_unknown_agents() {
        let m = fixture("m0.json");
        assert!(matches!(
            radical_upgrade(&m, "9", Dim::P, &f("p")),
            Err(EvalError::UnknownAgent(_))
        ));
    }
}
