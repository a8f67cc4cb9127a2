//! Game-theoretic notions over models with action structure: best
//! responses, subjective Nash equilibria and rationality, for optimistic
//! and pessimistic agents.
//!
//! All notions are *defined formulas* — conjunctions of `play` facts and
//! realistic preference attitudes — and are evaluated by constructing those
//! formulas and handing them to the checker. There is deliberately no
//! second semantics here.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::checker::{EvalError, Session};
use crate::model::Model;
use crate::syntax::{Attitude, Formula, Mode, PrefArg};

/// A joint action: one chosen action per agent name.
pub type JointAction = BTreeMap<String, String>;

#[derive(Debug, thiserror::Error)]
pub enum GameError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("model has no action alphabet or an incomplete choice function")]
    NoActions,
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("joint action {0}")]
    BadProfile(String),
    #[error("{profiles} action profiles exceed the budget of {budget}")]
    BudgetExceeded { profiles: u128, budget: u64 },
}

fn actions_of(m: &Model) -> Result<&[String], GameError> {
    match &m.actions {
        Some(actions) if !actions.is_empty() => Ok(actions),
        _ => Err(GameError::NoActions),
    }
}

fn check_agent(m: &Model, agent: &str) -> Result<(), GameError> {
    if m.agent_index(agent).is_none() {
        return Err(GameError::UnknownAgent(agent.to_string()));
    }
    Ok(())
}

fn check_action(m: &Model, action: &str) -> Result<(), GameError> {
    if !actions_of(m)?.iter().any(|a| a == action) {
        return Err(GameError::UnknownAction(action.to_string()));
    }
    Ok(())
}

/// `others` must assign an action to every agent except `agent`.
fn check_others(m: &Model, agent: &str, others: &JointAction) -> Result<(), GameError> {
    for (j, b) in others {
        check_agent(m, j)?;
        check_action(m, b)?;
        if j == agent {
            return Err(GameError::BadProfile(format!(
                "assigns an action to `{agent}` itself"
            )));
        }
    }
    for j in &m.agents {
        if j != agent && !others.contains_key(j) {
            return Err(GameError::BadProfile(format!("misses agent `{j}`")));
        }
    }
    Ok(())
}

fn check_profile(m: &Model, profile: &JointAction) -> Result<(), GameError> {
    for (j, b) in profile {
        check_agent(m, j)?;
        check_action(m, b)?;
    }
    for j in &m.agents {
        if !profile.contains_key(j) {
            return Err(GameError::BadProfile(format!("misses agent `{j}`")));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Formula constructors

/// Conjunction of `play(i, a)` facts for a (possibly partial) joint action.
pub fn play_formula(profile: &JointAction) -> Formula {
    Formula::conj(profile.iter().map(|(i, a)| Formula::Play(i.clone(), a.clone())))
}

fn realistic_pref(agent: &str, mode: Mode, lo: Formula, hi: Formula) -> Formula {
    Formula::attitude(Attitude::Pref {
        agent: agent.to_string(),
        mode,
        realistic: true,
        arg: PrefArg::Weak(lo, hi),
    })
}

/// Playing `action` against `others` is at least as good, in the agent's
/// (optimistic or pessimistic) realistic assessment, as any alternative.
pub fn best_response_formula(
    m: &Model,
    agent: &str,
    action: &str,
    others: &JointAction,
    mode: Mode,
) -> Result<Formula, GameError> {
    check_agent(m, agent)?;
    check_action(m, action)?;
    check_others(m, agent, others)?;
    let mut played = vec![Formula::Play(agent.to_string(), action.to_string())];
    played.extend(others.iter().map(|(j, b)| Formula::Play(j.clone(), b.clone())));
    let hi = Formula::conj(played);
    Ok(Formula::conj(actions_of(m)?.iter().map(|b| {
        let mut alt = vec![Formula::Play(agent.to_string(), b.clone())];
        alt.extend(others.iter().map(|(j, c)| Formula::Play(j.clone(), c.clone())));
        realistic_pref(agent, mode, Formula::conj(alt), hi.clone())
    })))
}

/// No agent wants to unilaterally deviate from the joint action.
pub fn nash_formula(
    m: &Model,
    profile: &JointAction,
    mode: Mode,
) -> Result<Formula, GameError> {
    check_profile(m, profile)?;
    let conjuncts = m
        .agents
        .iter()
        .map(|i| {
            let mut others = profile.clone();
            let own = others.remove(i).expect("profile is total");
            best_response_formula(m, i, &own, &others, mode)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Formula::conj(conjuncts))
}

/// The agent never plays an action it assesses as better to avoid.
pub fn rational_formula(m: &Model, agent: &str, mode: Mode) -> Result<Formula, GameError> {
    check_agent(m, agent)?;
    Ok(Formula::conj(actions_of(m)?.iter().map(|a| {
        let play = Formula::Play(agent.to_string(), a.clone());
        Formula::implies(
            play.clone(),
            realistic_pref(agent, mode, Formula::not(play.clone()), play),
        )
    })))
}

// ---------------------------------------------------------------------------
// Evaluation

fn eval_at(m: &Model, world: &str, f: &Formula) -> Result<bool, GameError> {
    let w = m
        .world_index(world)
        .ok_or_else(|| EvalError::UnknownWorld(world.to_string()))?;
    Ok(Session::new(m).eval(w, f)?)
}

pub fn best_response(
    m: &Model,
    world: &str,
    agent: &str,
    action: &str,
    others: &JointAction,
    mode: Mode,
) -> Result<bool, GameError> {
    let f = best_response_formula(m, agent, action, others, mode)?;
    eval_at(m, world, &f)
}

pub fn is_nash(
    m: &Model,
    world: &str,
    profile: &JointAction,
    mode: Mode,
) -> Result<bool, GameError> {
    let f = nash_formula(m, profile, mode)?;
    eval_at(m, world, &f)
}

pub fn is_rational(
    m: &Model,
    world: &str,
    agent: &str,
    mode: Mode,
) -> Result<bool, GameError> {
    let f = rational_formula(m, agent, mode)?;
    eval_at(m, world, &f)
}

/// All action profiles, in lexicographic order of the action lists.
fn all_profiles(m: &Model) -> Result<Vec<JointAction>, GameError> {
    let actions = actions_of(m)?;
    let mut out = vec![JointAction::new()];
    for agent in &m.agents {
        out = out
            .into_iter()
            .flat_map(|partial| {
                actions.iter().map(move |a| {
                    let mut next = partial.clone();
                    next.insert(agent.clone(), a.clone());
                    next
                })
            })
            .collect();
    }
    Ok(out)
}

fn profile_count(m: &Model) -> Result<u128, GameError> {
    let actions = actions_of(m)?.len() as u128;
    let mut count: u128 = 1;
    for _ in &m.agents {
        count = count.saturating_mul(actions);
    }
    Ok(count)
}

/// Joint actions that are subjective Nash equilibria at `world`. The sweep
/// over all |Act|^|Agt| profiles is capped by `budget`.
pub fn enumerate_equilibria(
    m: &Model,
    world: &str,
    mode: Mode,
    budget: u64,
) -> Result<Vec<JointAction>, GameError> {
    let profiles = profile_count(m)?;
    if profiles > budget as u128 {
        return Err(GameError::BudgetExceeded { profiles, budget });
    }
    let w = m
        .world_index(world)
        .ok_or_else(|| EvalError::UnknownWorld(world.to_string()))?;
    let session = Session::new(m);
    let mut out = Vec::new();
    for profile in all_profiles(m)? {
        let f = nash_formula(m, &profile, mode)?;
        if session.eval(w, &f)? {
            out.push(profile);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Whole-model report

#[derive(Debug, Clone, Serialize)]
pub struct GameReport {
    pub version: u32,
    pub agents: Vec<String>,
    pub actions: Vec<String>,
    /// One entry per joint information state (tuple of cells, one per
    /// agent); equilibria and best responses are constant on each group.
    pub groups: Vec<GameGroup>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GameGroup {
    pub worlds: Vec<String>,
    pub equilibria_optimistic: Vec<JointAction>,
    pub equilibria_pessimistic: Vec<JointAction>,
    pub best_responses: Vec<BestResponseEntry>,
    /// Rationality depends on the world's actual choices, so it is listed
    /// per world.
    pub rationality: Vec<RationalityEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BestResponseEntry {
    pub agent: String,
    pub action: String,
    pub others: JointAction,
    pub optimistic: bool,
    pub pessimistic: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RationalityEntry {
    pub world: String,
    pub agent: String,
    pub optimistic: bool,
    pub pessimistic: bool,
}

/// Analyze the whole model: equilibria and the best-response table per
/// joint information state, rationality per world.
pub fn game_report(m: &Model, budget: u64) -> Result<GameReport, GameError> {
    let actions = actions_of(m)?.to_vec();
    if !m.has_choices() {
        return Err(GameError::NoActions);
    }
    let profiles = profile_count(m)?;
    if profiles > budget as u128 {
        return Err(GameError::BudgetExceeded { profiles, budget });
    }

    // Group worlds by the tuple of every agent's cell.
    let mut groups: BTreeMap<Vec<String>, Vec<usize>> = BTreeMap::new();
    for (w, world) in m.worlds.iter().enumerate() {
        let key: Vec<String> = world.states.iter().map(|st| st.cell.clone()).collect();
        groups.entry(key).or_default().push(w);
    }

    let session = Session::new(m);
    let rational: BTreeMap<(String, Mode), Formula> = m
        .agents
        .iter()
        .flat_map(|i| [Mode::Opt, Mode::Pess].map(|mode| (i, mode)))
        .map(|(i, mode)| {
            rational_formula(m, i, mode).map(|f| ((i.clone(), mode), f))
        })
        .collect::<Result<_, _>>()?;

    let mut out_groups = Vec::new();
    for members in groups.values() {
        let rep = m.world_id(members[0]);
        let equilibria_optimistic = enumerate_equilibria(m, rep, Mode::Opt, budget)?;
        let equilibria_pessimistic = enumerate_equilibria(m, rep, Mode::Pess, budget)?;

        let mut best_responses = Vec::new();
        for agent in &m.agents {
            let others_space: Vec<JointAction> = {
                let mut reduced = m.clone();
                reduced.agents.retain(|j| j != agent);
                all_profiles(&reduced)?
            };
            for others in others_space {
                for action in &actions {
                    let w = m.world_index(rep).expect("known world");
                    let opt_f =
                        best_response_formula(m, agent, action, &others, Mode::Opt)?;
                    let pess_f =
                        best_response_formula(m, agent, action, &others, Mode::Pess)?;
                    best_responses.push(BestResponseEntry {
                        agent: agent.clone(),
                        action: action.clone(),
                        others: others.clone(),
                        optimistic: session.eval(w, &opt_f)?,
                        pessimistic: session.eval(w, &pess_f)?,
                    });
                }
            }
        }

        let mut rationality = Vec::new();
        for &w in members {
            for agent in &m.agents {
                rationality.push(RationalityEntry {
                    world: m.world_id(w).to_string(),
                    agent: agent.clone(),
                    optimistic: session
                        .eval(w, &rational[&(agent.clone(), Mode::Opt)])?,
                    pessimistic: session
                        .eval(w, &rational[&(agent.clone(), Mode::Pess)])?,
                });
            }
        }

        out_groups.push(GameGroup {
            worlds: members.iter().map(|&w| m.world_id(w).to_string()).collect(),
            equilibria_optimistic,
            equilibria_pessimistic,
            best_responses,
            rationality,
        });
    }

    Ok(GameReport { version: 1, agents: m.agents.clone(), actions, groups: out_groups })
}
