//! Finite multi-agent cognitive models.
//!
//! A model is a finite set of worlds; each world carries a valuation
//! (atoms + nominals) and, per agent, a cell label and two natural-number
//! ranks. Agent `i`'s relations are all induced by that data:
//!
//! * `eq(i)`  — same cell;
//! * `le(i,t)` — same cell and `rank_t(w) <= rank_t(v)` (higher rank means
//!   more plausible / more desirable);
//! * `nle(i,t)` — same cell and `rank_t(w) > rank_t(v)`.
//!
//! Encoding the orders as ranks makes two of the usual frame conditions
//! hold by construction (orders live inside cells; same-cell worlds are
//! always comparable), so [`Model::validate`] only has to check the
//! remaining data-level constraints: at least one nominal per world and no
//! shared nominals, plus — when an action alphabet is present — total
//! choice functions and subjective choice independence (every combination
//! of actions individually played inside a cell is jointly played there).

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use crate::syntax::{Dim, Program};

/// Current model file format version.
pub const FORMAT_VERSION: u32 = 1;

// ---------------------------------------------------------------------------
// Shared set types

/// Set of world indices into `Model::worlds`.
pub type WorldSet = BTreeSet<usize>;

/// A binary relation over world indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PairSet(BTreeSet<(usize, usize)>);

impl PairSet {
    pub fn new() -> Self {
        PairSet(BTreeSet::new())
    }

    pub fn insert(&mut self, w: usize, v: usize) {
        self.0.insert((w, v));
    }

    pub fn contains(&self, w: usize, v: usize) -> bool {
        self.0.contains(&(w, v))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Worlds reachable from `w` in one step.
    pub fn successors(&self, w: usize) -> impl Iterator<Item = usize> + '_ {
        self.0.range((w, 0)..=(w, usize::MAX)).map(|&(_, v)| v)
    }

    pub fn union(&self, other: &PairSet) -> PairSet {
        PairSet(self.0.union(&other.0).copied().collect())
    }

    pub fn inter(&self, other: &PairSet) -> PairSet {
        PairSet(self.0.intersection(&other.0).copied().collect())
    }

    pub fn difference(&self, other: &PairSet) -> PairSet {
        PairSet(self.0.difference(&other.0).copied().collect())
    }

    /// Relational composition: `(w,u)` when `(w,v) ∈ self` and `(v,u) ∈ other`.
    pub fn compose(&self, other: &PairSet) -> PairSet {
        let mut by_first: HashMap<usize, Vec<usize>> = HashMap::new();
        for (v, u) in other.iter() {
            by_first.entry(v).or_default().push(u);
        }
        let mut out = PairSet::new();
        for (w, v) in self.iter() {
            if let Some(us) = by_first.get(&v) {
                for &u in us {
                    out.insert(w, u);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> PairSet {
        PairSet(self.0.iter().map(|&(w, v)| (v, w)).collect())
    }

    /// Identity relation restricted to `worlds`.
    pub fn diagonal(worlds: &WorldSet) -> PairSet {
        PairSet(worlds.iter().map(|&w| (w, w)).collect())
    }

    /// Render as a set of world-id pairs for assertions and reports.
    pub fn to_ids(&self, m: &Model) -> BTreeSet<(String, String)> {
        self.0
            .iter()
            .map(|&(w, v)| (m.worlds[w].id.clone(), m.worlds[v].id.clone()))
            .collect()
    }
}

impl FromIterator<(usize, usize)> for PairSet {
    fn from_iter<T: IntoIterator<Item = (usize, usize)>>(iter: T) -> Self {
        PairSet(iter.into_iter().collect())
    }
}

// ---------------------------------------------------------------------------
// File format

/// Serialized form of a model (the on-disk JSON schema).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    pub agents: Vec<String>,
    pub atoms: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<Vec<String>>,
    pub worlds: Vec<WorldFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorldFile {
    pub id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nominals: Vec<String>,
    #[serde(default)]
    pub atoms: Vec<String>,
    pub agents: BTreeMap<String, AgentStateFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentStateFile {
    pub cell: String,
    pub rank_p: u64,
    pub rank_d: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choice: Option<String>,
}

// ---------------------------------------------------------------------------
// In-memory model

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentState {
    pub cell: String,
    pub rank_p: u64,
    pub rank_d: u64,
    pub choice: Option<String>,
}

impl AgentState {
    pub fn rank(&self, dim: Dim) -> u64 {
        match dim {
            Dim::P => self.rank_p,
            Dim::D => self.rank_d,
        }
    }

    pub fn rank_mut(&mut self, dim: Dim) -> &mut u64 {
        match dim {
            Dim::P => &mut self.rank_p,
            Dim::D => &mut self.rank_d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct World {
    pub id: String,
    pub nominals: BTreeSet<String>,
    pub atoms: BTreeSet<String>,
    /// Aligned with `Model::agents`.
    pub states: Vec<AgentState>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub agents: Vec<String>,
    pub atoms: Vec<String>,
    pub actions: Option<Vec<String>>,
    pub worlds: Vec<World>,
    agent_lookup: HashMap<String, usize>,
    world_lookup: HashMap<String, usize>,
    /// Per agent: cell label -> member world indices (sorted).
    cells: Vec<BTreeMap<String, Vec<usize>>>,
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported model format version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("duplicate world id `{0}`")]
    DuplicateWorld(String),
    #[error("duplicate {kind} name `{name}`")]
    DuplicateName { kind: &'static str, name: String },
    #[error("world `{world}` is missing state for agent `{agent}`")]
    MissingAgentState { world: String, agent: String },
    #[error("world `{world}` has state for undeclared agent `{agent}`")]
    UndeclaredAgentState { world: String, agent: String },
}

impl Model {
    /// Build the indexed model from its file form. Worlds without nominals
    /// get one named after their id.
    pub fn from_file(file: ModelFile) -> Result<Model, ModelError> {
        if file.version != FORMAT_VERSION {
            return Err(ModelError::Version(file.version));
        }
        let mut agent_lookup = HashMap::new();
        for (i, a) in file.agents.iter().enumerate() {
            if agent_lookup.insert(a.clone(), i).is_some() {
                return Err(ModelError::DuplicateName { kind: "agent", name: a.clone() });
            }
        }
        let mut seen_atoms = BTreeSet::new();
        for a in &file.atoms {
            if !seen_atoms.insert(a.clone()) {
                return Err(ModelError::DuplicateName { kind: "atom", name: a.clone() });
            }
        }
        if let Some(actions) = &file.actions {
            let mut seen = BTreeSet::new();
            for a in actions {
                if !seen.insert(a.clone()) {
                    return Err(ModelError::DuplicateName { kind: "action", name: a.clone() });
                }
            }
        }

        let mut world_lookup = HashMap::new();
        let mut worlds = Vec::with_capacity(file.worlds.len());
        for (w, wf) in file.worlds.iter().enumerate() {
            if world_lookup.insert(wf.id.clone(), w).is_some() {
                return Err(ModelError::DuplicateWorld(wf.id.clone()));
            }
            for agent in wf.agents.keys() {
                if !agent_lookup.contains_key(agent) {
                    return Err(ModelError::UndeclaredAgentState {
                        world: wf.id.clone(),
                        agent: agent.clone(),
                    });
                }
            }
            let mut states = Vec::with_capacity(file.agents.len());
            for agent in &file.agents {
                let st = wf.agents.get(agent).ok_or_else(|| ModelError::MissingAgentState {
                    world: wf.id.clone(),
                    agent: agent.clone(),
                })?;
                states.push(AgentState {
                    cell: st.cell.clone(),
                    rank_p: st.rank_p,
                    rank_d: st.rank_d,
                    choice: st.choice.clone(),
                });
            }
            let mut nominals: BTreeSet<String> = wf.nominals.iter().cloned().collect();
            if nominals.is_empty() {
                nominals.insert(wf.id.clone());
            }
            worlds.push(World {
                id: wf.id.clone(),
                nominals,
                atoms: wf.atoms.iter().cloned().collect(),
                states,
            });
        }

        let cells = compute_cells(&file.agents, &worlds);
        Ok(Model {
            agents: file.agents,
            atoms: file.atoms,
            actions: file.actions,
            worlds,
            agent_lookup,
            world_lookup,
            cells,
        })
    }

    /// Convert back to the file form (inverse of [`Model::from_file`] up to
    /// auto-assigned nominals).
    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            version: FORMAT_VERSION,
            agents: self.agents.clone(),
            atoms: self.atoms.clone(),
            actions: self.actions.clone(),
            worlds: self
                .worlds
                .iter()
                .map(|w| WorldFile {
                    id: w.id.clone(),
                    nominals: w.nominals.iter().cloned().collect(),
                    atoms: w.atoms.iter().cloned().collect(),
                    agents: self
                        .agents
                        .iter()
                        .zip(&w.states)
                        .map(|(a, st)| {
                            (
                                a.clone(),
                                AgentStateFile {
                                    cell: st.cell.clone(),
                                    rank_p: st.rank_p,
                                    rank_d: st.rank_d,
                                    choice: st.choice.clone(),
                                },
                            )
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Model, ModelError> {
        let file: ModelFile = serde_json::from_str(text)?;
        Model::from_file(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("model serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Model, ModelError> {
        let text = std::fs::read_to_string(path)?;
        Model::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn n_worlds(&self) -> usize {
        self.worlds.len()
    }

    pub fn agent_index(&self, name: &str) -> Option<usize> {
        self.agent_lookup.get(name).copied()
    }

    pub fn world_index(&self, id: &str) -> Option<usize> {
        self.world_lookup.get(id).copied()
    }

    pub fn world_id(&self, w: usize) -> &str {
        &self.worlds[w].id
    }

    pub fn state(&self, agent: usize, w: usize) -> &AgentState {
        &self.worlds[w].states[agent]
    }

    pub fn rank(&self, agent: usize, dim: Dim, w: usize) -> u64 {
        self.state(agent, w).rank(dim)
    }

    /// The worlds sharing `w`'s cell for `agent` (sorted, includes `w`).
    pub fn cell_worlds(&self, agent: usize, w: usize) -> &[usize] {
        let label = &self.worlds[w].states[agent].cell;
        &self.cells[agent][label]
    }

    /// All cells of an agent, as (label, member worlds).
    pub fn cells_of(&self, agent: usize) -> impl Iterator<Item = (&str, &[usize])> {
        self.cells[agent].iter().map(|(l, ws)| (l.as_str(), ws.as_slice()))
    }

    /// True when the model carries a usable action structure: a non-empty
    /// alphabet and a total choice function.
    pub fn has_choices(&self) -> bool {
        match &self.actions {
            Some(actions) if !actions.is_empty() => self
                .worlds
                .iter()
                .all(|w| w.states.iter().all(|st| st.choice.is_some())),
            _ => false,
        }
    }

    /// Recompute internal indexes after direct mutation of `worlds`.
    pub fn reindex(&mut self) {
        self.world_lookup =
            self.worlds.iter().enumerate().map(|(i, w)| (w.id.clone(), i)).collect();
        self.cells = compute_cells(&self.agents, &self.worlds);
    }

    /// Relation of an atomic program. Errors on combinators (callers use
    /// `checker::rel` for those) and on unknown agents.
    pub fn atomic_rel(&self, p: &Program) -> Result<PairSet, AtomicRelError> {
        let (agent_name, kind) = match p {
            Program::Eq(i) => (i, AtomicKind::Eq),
            Program::Le(i, t) => (i, AtomicKind::Le(*t)),
            Program::Nle(i, t) => (i, AtomicKind::Nle(*t)),
            other => return Err(AtomicRelError::NotAtomic(format!("{other:?}"))),
        };
        let agent = self
            .agent_index(agent_name)
            .ok_or_else(|| AtomicRelError::UnknownAgent(agent_name.clone()))?;
        let mut out = PairSet::new();
        for (_, members) in self.cells_of(agent) {
            for &w in members {
                for &v in members {
                    let keep = match kind {
                        AtomicKind::Eq => true,
                        AtomicKind::Le(t) => self.rank(agent, t, w) <= self.rank(agent, t, v),
                        AtomicKind::Nle(t) => self.rank(agent, t, w) > self.rank(agent, t, v),
                    };
                    if keep {
                        out.insert(w, v);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Compress every cell's ranks (both dimensions, every agent) to
    /// consecutive naturals starting at 0, preserving the order. This is the
    /// canonical form produced by the generators and the upgrade operations.
    pub fn normalize_ranks(&mut self) {
        for agent in 0..self.agents.len() {
            let cell_members: Vec<Vec<usize>> =
                self.cells[agent].values().cloned().collect();
            for members in cell_members {
                for dim in [Dim::P, Dim::D] {
                    let mut ranks: Vec<u64> =
                        members.iter().map(|&w| self.rank(agent, dim, w)).collect();
                    ranks.sort_unstable();
                    ranks.dedup();
                    for &w in &members {
                        let old = self.rank(agent, dim, w);
                        let dense = ranks.binary_search(&old).expect("rank present") as u64;
                        *self.worlds[w].states[agent].rank_mut(dim) = dense;
                    }
                }
            }
        }
    }

    /// Run all data-level constraint checks. Violations are returned, not
    /// raised; an empty report means the model is well-formed.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.worlds.is_empty() {
            violations.push(Violation::NoWorlds);
        }
        if self.agents.is_empty() {
            violations.push(Violation::NoAgents);
        }
        let declared_atoms: BTreeSet<&str> = self.atoms.iter().map(|s| s.as_str()).collect();
        let mut nominal_owner: BTreeMap<&str, &str> = BTreeMap::new();
        for w in &self.worlds {
            if w.nominals.is_empty() {
                violations.push(Violation::MissingNominal { world: w.id.clone() });
            }
            for x in &w.nominals {
                if let Some(prev) = nominal_owner.insert(x, &w.id) {
                    violations.push(Violation::SharedNominal {
                        nominal: x.clone(),
                        worlds: (prev.to_string(), w.id.clone()),
                    });
                }
            }
            for a in &w.atoms {
                if !declared_atoms.contains(a.as_str()) {
                    violations.push(Violation::UndeclaredAtom {
                        world: w.id.clone(),
                        atom: a.clone(),
                    });
                }
            }
        }
        self.validate_choices(&mut violations);
        ValidationReport { violations }
    }

    fn validate_choices(&self, violations: &mut Vec<Violation>) {
        let actions: BTreeSet<&str> = match &self.actions {
            Some(actions) if !actions.is_empty() => {
                actions.iter().map(|s| s.as_str()).collect()
            }
            _ => {
                // No (usable) alphabet: any recorded choice is stray data.
                for w in &self.worlds {
                    for (agent, st) in self.agents.iter().zip(&w.states) {
                        if st.choice.is_some() {
                            violations.push(Violation::ChoiceWithoutAlphabet {
                                world: w.id.clone(),
                                agent: agent.clone(),
                            });
                        }
                    }
                }
                return;
            }
        };
        let mut total = true;
        for w in &self.worlds {
            for (agent, st) in self.agents.iter().zip(&w.states) {
                match &st.choice {
                    None => {
                        total = false;
                        violations.push(Violation::MissingChoice {
                            world: w.id.clone(),
                            agent: agent.clone(),
                        });
                    }
                    Some(c) if !actions.contains(c.as_str()) => {
                        total = false;
                        violations.push(Violation::UndeclaredAction {
                            world: w.id.clone(),
                            agent: agent.clone(),
                            action: c.clone(),
                        });
                    }
                    Some(_) => {}
                }
            }
        }
        if !total {
            return; // Independence is only meaningful for total choices.
        }
        // Subjective choice independence: inside each cell, every profile
        // assembled from individually played actions must be jointly played.
        for agent in 0..self.agents.len() {
            for (label, members) in self.cells_of(agent) {
                let mut played: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); self.agents.len()];
                let mut joint: BTreeSet<Vec<&str>> = BTreeSet::new();
                for &w in members {
                    let profile: Vec<&str> = self.worlds[w]
                        .states
                        .iter()
                        .map(|st| st.choice.as_deref().expect("total"))
                        .collect();
                    for (j, a) in profile.iter().enumerate() {
                        played[j].insert(a);
                    }
                    joint.insert(profile);
                }
                let combinations: u128 =
                    played.iter().map(|s| s.len() as u128).product();
                if combinations > C5_CHECK_LIMIT {
                    violations.push(Violation::IndependenceCheckTooLarge {
                        agent: self.agents[agent].clone(),
                        cell: label.to_string(),
                        combinations,
                    });
                    continue;
                }
                let mut profile: Vec<&str> = Vec::with_capacity(self.agents.len());
                check_combinations(&played, &mut profile, &joint, &mut |missing| {
                    violations.push(Violation::DependentChoices {
                        agent: self.agents[agent].clone(),
                        cell: label.to_string(),
                        profile: self
                            .agents
                            .iter()
                            .cloned()
                            .zip(missing.iter().map(|s| s.to_string()))
                            .collect(),
                    });
                });
            }
        }
    }
}

/// Cap on the number of action profiles enumerated per cell while checking
/// choice independence.
const C5_CHECK_LIMIT: u128 = 1 << 20;

fn check_combinations<'a>(
    played: &[BTreeSet<&'a str>],
    profile: &mut Vec<&'a str>,
    joint: &BTreeSet<Vec<&'a str>>,
    report: &mut impl FnMut(&[&'a str]),
) {
    if profile.len() == played.len() {
        if !joint.contains(profile) {
            report(profile);
        }
        return;
    }
    for &a in &played[profile.len()] {
        profile.push(a);
        check_combinations(played, profile, joint, report);
        profile.pop();
    }
}

fn compute_cells(agents: &[String], worlds: &[World]) -> Vec<BTreeMap<String, Vec<usize>>> {
    (0..agents.len())
        .map(|agent| {
            let mut map: BTreeMap<String, Vec<usize>> = BTreeMap::new();
            for (w, world) in worlds.iter().enumerate() {
                map.entry(world.states[agent].cell.clone()).or_default().push(w);
            }
            map
        })
        .collect()
}

enum AtomicKind {
    Eq,
    Le(Dim),
    Nle(Dim),
}

#[derive(Debug, thiserror::Error)]
pub enum AtomicRelError {
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("not an atomic program: {0}")]
    NotAtomic(String),
}

// ---------------------------------------------------------------------------
// Validation report

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NoWorlds,
    NoAgents,
    MissingNominal { world: String },
    SharedNominal { nominal: String, worlds: (String, String) },
    UndeclaredAtom { world: String, atom: String },
    ChoiceWithoutAlphabet { world: String, agent: String },
    MissingChoice { world: String, agent: String },
    UndeclaredAction { world: String, agent: String, action: String },
    DependentChoices { agent: String, cell: String, profile: BTreeMap<String, String> },
    IndependenceCheckTooLarge { agent: String, cell: String, combinations: u128 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NoWorlds => write!(f, "model has no worlds"),
            Violation::NoAgents => write!(f, "model has no agents"),
            Violation::MissingNominal { world } => {
                write!(f, "world `{world}` has no nominal")
            }
            Violation::SharedNominal { nominal, worlds } => write!(
                f,
                "nominal `{nominal}` names two worlds (`{}` and `{}`)",
                worlds.0, worlds.1
            ),
            Violation::UndeclaredAtom { world, atom } => {
                write!(f, "world `{world}` uses undeclared atom `{atom}`")
            }
            Violation::ChoiceWithoutAlphabet { world, agent } => write!(
                f,
                "world `{world}` records a choice for agent `{agent}` but the model declares no actions"
            ),
            Violation::MissingChoice { world, agent } => {
                write!(f, "agent `{agent}` has no choice at world `{world}`")
            }
            Violation::UndeclaredAction { world, agent, action } => write!(
                f,
                "agent `{agent}` plays undeclared action `{action}` at world `{world}`"
            ),
            Violation::DependentChoices { agent, cell, profile } => {
                let parts: Vec<String> =
                    profile.iter().map(|(i, a)| format!("{i}:{a}")).collect();
                write!(
                    f,
                    "cell `{cell}` of agent `{agent}`: profile {{{}}} is assembled from played actions but jointly played nowhere in the cell",
                    parts.join(", ")
                )
            }
            Violation::IndependenceCheckTooLarge { agent, cell, combinations } => write!(
                f,
                "cell `{cell}` of agent `{agent}`: independence check skipped ({combinations} profiles exceed the limit)"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            write!(f, "ok")
        } else {
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(name: &str) -> Model {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/");
        Model::load(format!("{path}{name}")).expect("fixture loads")
    }

    fn ids(pairs: &PairSet, m: &Model) -> Vec<(String, String)> {
        pairs.to_ids(m).into_iter().collect()
    }

    #[test]
    fn two_world_fixture_relations_follow_the_ranks() {
        let m = fixture("m0.json");
        let le = m.atomic_rel(&Program::Le("1".into(), Dim::P)).unwrap();
        assert_eq!(
            ids(&le, &m),
            vec![
                ("w1".to_string(), "w1".to_string()),
                ("w2".to_string(), "w1".to_string()),
                ("w2".to_string(), "w2".to_string()),
            ]
        );
        let nle = m.atomic_rel(&Program::Nle("1".into(), Dim::P)).unwrap();
        assert_eq!(ids(&nle, &m), vec![("w1".to_string(), "w2".to_string())]);
        let eq = m.atomic_rel(&Program::Eq("1".into())).unwrap();
        assert_eq!(eq.len(), 4);
    }

    #[test]
    fn le_and_nle_partition_eq() {
        let m = fixture("mcross.json");
        for agent in ["1", "2"] {
            for dim in [Dim::P, Dim::D] {
                let eq = m.atomic_rel(&Program::Eq(agent.into())).unwrap();
                let le = m.atomic_rel(&Program::Le(agent.into(), dim)).unwrap();
                let nle = m.atomic_rel(&Program::Nle(agent.into(), dim)).unwrap();
                assert_eq!(le.union(&nle), eq);
                assert!(le.inter(&nle).is_empty());
            }
        }
    }

    #[test]
    fn atomic_rel_rejects_unknown_agents_and_combinators() {
        let m = fixture("m0.json");
        assert!(matches!(
            m.atomic_rel(&Program::Eq("9".into())),
            Err(AtomicRelError::UnknownAgent(_))
        ));
        assert!(matches!(
            m.atomic_rel(&Program::conv(Program::Eq("1".into()))),
            Err(AtomicRelError::NotAtomic(_))
        ));
    }

    #[test]
    fn load_assigns_missing_nominals_from_world_ids() {
        let m = fixture("m1.json");
        assert!(m.worlds[0].nominals.contains("w1"));
        assert!(m.validate().is_ok());
    }

    #[test]
    fn load_rejects_duplicate_worlds_and_missing_agent_state() {
        let dup = r#"{"version":1,"agents":["1"],"atoms":[],"worlds":[
            {"id":"w","atoms":[],"agents":{"1":{"cell":"c","rank_p":0,"rank_d":0}}},
            {"id":"w","atoms":[],"agents":{"1":{"cell":"c","rank_p":0,"rank_d":0}}}]}"#;
        assert!(matches!(Model::from_json(dup), Err(ModelError::DuplicateWorld(_))));

        let missing = r#"{"version":1,"agents":["1","2"],"atoms":[],"worlds":[
            {"id":"w","atoms":[],"agents":{"1":{"cell":"c","rank_p":0,"rank_d":0}}}]}"#;
        assert!(matches!(Model::from_json(missing), Err(ModelError::MissingAgentState { .. })));
    }

    #[test]
    fn load_rejects_negative_ranks() {
        let neg = r#"{"version":1,"agents":["1"],"atoms":[],"worlds":[
            {"id":"w","atoms":[],"agents":{"1":{"cell":"c","rank_p":-1,"rank_d":0}}}]}"#;
        assert!(matches!(Model::from_json(neg), Err(ModelError::Json(_))));
    }

    #[test]
    fn save_load_round_trips() {
        let m = fixture("mcross-g.json");
        let again = Model::from_json(&m.to_json()).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn validate_flags_shared_nominals() {
        let shared = r#"{"version":1,"agents":["1"],"atoms":[],"worlds":[
            {"id":"u","nominals":["x"],"atoms":[],"agents":{"1":{"cell":"c","rank_p":0,"rank_d":0}}},
            {"id":"v","nominals":["x"],"atoms":[],"agents":{"1":{"cell":"c","rank_p":0,"rank_d":0}}}]}"#;
        let m = Model::from_json(shared).unwrap();
        let report = m.validate();
        assert!(matches!(report.violations[..], [Violation::SharedNominal { .. }]));
    }

    #[test]
    fn validate_checks_choice_totality_and_alphabet() {
        let partial = r#"{"version":1,"agents":["1"],"atoms":[],"actions":["a","b"],"worlds":[
            {"id":"u","atoms":[],"agents":{"1":{"cell":"c","rank_p":0,"rank_d":0,"choice":"a"}}},
            {"id":"v","atoms":[],"agents":{"1":{"cell":"c","rank_p":0,"rank_d":0}}}]}"#;
        let m = Model::from_json(partial).unwrap();
        assert!(m
            .validate()
            .violations
            .iter()
            .any(|v| matches!(v, Violation::MissingChoice { .. })));

        let undeclared = r#"{"version":1,"agents":["1"],"atoms":[],"actions":["a"],"worlds":[
            {"id":"u","atoms":[],"agents":{"1":{"cell":"c","rank_p":0,"rank_d":0,"choice":"z"}}}]}"#;
        let m = Model::from_json(undeclared).unwrap();
        assert!(m
            .validate()
            .violations
            .iter()
            .any(|v| matches!(v, Violation::UndeclaredAction { .. })));
    }

    #[test]
    fn validate_detects_dependent_choices() {
        // Both agents flip together: the mixed profiles (a,b) and (b,a) are
        // assembled from played actions but never jointly played.
        let dependent = r#"{"version":1,"agents":["1","2"],"atoms":[],"actions":["a","b"],"worlds":[
            {"id":"u","atoms":[],"agents":{
                "1":{"cell":"c","rank_p":0,"rank_d":0,"choice":"a"},
                "2":{"cell":"c","rank_p":0,"rank_d":0,"choice":"a"}}},
            {"id":"v","atoms":[],"agents":{
                "1":{"cell":"c","rank_p":0,"rank_d":0,"choice":"b"},
                "2":{"cell":"c","rank_p":0,"rank_d":0,"choice":"b"}}}]}"#;
        let m = Model::from_json(dependent).unwrap();
        let report = m.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::DependentChoices { .. })));
    }

    #[test]
    fn crossroad_game_fixture_is_clean() {
        let m = fixture("mcross-g.json");
        assert!(m.has_choices());
        assert!(m.validate().is_ok(), "{}", m.validate());
    }

    #[test]
    fn normalize_compresses_ranks_per_cell() {
        let gappy = r#"{"version":1,"agents":["1"],"atoms":[],"worlds":[
            {"id":"u","atoms":[],"agents":{"1":{"cell":"c","rank_p":7,"rank_d":3}}},
            {"id":"v","atoms":[],"agents":{"1":{"cell":"c","rank_p":2,"rank_d":3}}},
            {"id":"x","atoms":[],"agents":{"1":{"cell":"d","rank_p":5,"rank_d":0}}}]}"#;
        let mut m = Model::from_json(gappy).unwrap();
        let le_before = m.atomic_rel(&Program::Le("1".into(), Dim::P)).unwrap();
        m.normalize_ranks();
        assert_eq!(m.rank(0, Dim::P, 0), 1);
        assert_eq!(m.rank(0, Dim::P, 1), 0);
        assert_eq!(m.rank(0, Dim::P, 2), 0);
        assert_eq!(m.rank(0, Dim::D, 0), 0);
        assert_eq!(m.rank(0, Dim::D, 1), 0);
        let le_after = m.atomic_rel(&Program::Le("1".into(), Dim::P)).unwrap();
        assert_eq!(le_before, le_after, "normalization preserves the relation");
    }
}
