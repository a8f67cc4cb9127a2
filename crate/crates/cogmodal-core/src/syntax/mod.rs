//! Abstract syntax for cognitive programs and formulas, plus the surface
//! parser/renderer and the macro layer that unfolds attitude operators into
//! program modalities.
//!
//! The surface language has two sorts:
//!
//! * *programs* — relational expressions over an agent's information cells
//!   and its plausibility/desirability orders (`eq`, `le`, `nle`, the
//!   regular combinators `;`, `|`, `&`, converse `-`, tests `?(..)`, and the
//!   derived comparators `ge`, `lt`, `gt`, `nge`, `sim`);
//! * *formulas* — boolean logic with nominals, `[p]f` / `<p>f` modalities,
//!   attitude operators (`B`, `SB`, `CB`, `D`, `SD`, `CD`, `Popt`, `Ppes`,
//!   `RPopt`, `RPpes`, `play`) and the four upgrade prefixes `radB`, `radD`,
//!   `conB`, `conD`.
//!
//! [`desugar`] rewrites derived comparators, `<p>f`, `->`, `<->` and `|`
//! away; [`expand_attitudes`] replaces every attitude operator by its
//! defining program modality.

mod lexer;
mod parser;
mod render;

pub use parser::{parse_formula, parse_formula_core, parse_program, parse_program_core, ParseError};
pub use render::{render_formula, render_program};

impl std::fmt::Display for Formula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&render_formula(self))
    }
}

impl std::fmt::Display for Program {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&render_program(self))
    }
}

use std::fmt;

/// The two grading dimensions an agent carries: `P` orders worlds by
/// plausibility, `D` by desirability.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
pub enum Dim {
    P,
    D,
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dim::P => write!(f, "P"),
            Dim::D => write!(f, "D"),
        }
    }
}

/// Relational program over a model.
///
/// `Eq(i)` is agent `i`'s indistinguishability relation, `Le(i, t)` its weak
/// graded order in dimension `t` ("at least as plausible/desirable"), and
/// `Nle(i, t)` the complement of `Le` inside `Eq` ("indistinguishable but
/// not `Le`"). The last five variants are surface sugar for the derived
/// comparators and never survive [`desugar`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Program {
    Eq(String),
    Le(String, Dim),
    Nle(String, Dim),
    Seq(Box<Program>, Box<Program>),
    Union(Box<Program>, Box<Program>),
    Inter(Box<Program>, Box<Program>),
    Conv(Box<Program>),
    Test(Box<Formula>),
    /// `-Le` — converse of the weak order.
    Ge(String, Dim),
    /// `Le & -Nle` — the strict order.
    Lt(String, Dim),
    /// `-Le & Nle` read from the other side: `Conv(Le) & Nle`.
    Gt(String, Dim),
    /// `-Nle` — converse of the complement.
    Nge(String, Dim),
    /// `Le & -Le` both ways — the induced equivalence ("equally ranked").
    Sim(String, Dim),
}

impl Program {
    pub fn seq(a: Program, b: Program) -> Program {
        Program::Seq(Box::new(a), Box::new(b))
    }
    pub fn union(a: Program, b: Program) -> Program {
        Program::Union(Box::new(a), Box::new(b))
    }
    pub fn inter(a: Program, b: Program) -> Program {
        Program::Inter(Box::new(a), Box::new(b))
    }
    pub fn conv(a: Program) -> Program {
        Program::Conv(Box::new(a))
    }
    pub fn test(f: Formula) -> Program {
        Program::Test(Box::new(f))
    }

    /// True when the program contains none of the sugar comparators.
    pub fn is_core(&self) -> bool {
        match self {
            Program::Eq(..) | Program::Le(..) | Program::Nle(..) => true,
            Program::Seq(a, b) | Program::Union(a, b) | Program::Inter(a, b) => {
                a.is_core() && b.is_core()
            }
            Program::Conv(a) => a.is_core(),
            Program::Test(f) => f.is_core(),
            Program::Ge(..)
            | Program::Lt(..)
            | Program::Gt(..)
            | Program::Nge(..)
            | Program::Sim(..) => false,
        }
    }
}

/// Which side of the optimism/pessimism split a preference operator uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Opt,
    Pess,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Opt => write!(f, "opt"),
            Mode::Pess => write!(f, "pess"),
        }
    }
}

/// Argument shape of a preference operator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PrefArg {
    /// `P{i}(g <= f)` — f is weakly preferred to g.
    Weak(Formula, Formula),
    /// `P{i}(g < f)` — strictly preferred; shorthand for `!P{i}(f <= g)`.
    Strict(Formula, Formula),
    /// `P{i} f` — shorthand for `P{i}(!f < f)`.
    Monadic(Formula),
}

/// The attitude operators. Each one is definable as a program modality;
/// [`expand_attitudes`] performs that unfolding.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Attitude {
    /// `B{i} f` — truth in all most plausible worlds of the cell.
    Belief { agent: String, prop: Formula },
    /// `SB{i} f` — every f-world of the cell is strictly above every !f-world.
    StrongBelief { agent: String, prop: Formula },
    /// `CB{i}(cond, f)` — truth in the most plausible cond-worlds.
    CondBelief { agent: String, cond: Formula, prop: Formula },
    /// `D{i} f` — the least desirable worlds of the cell avoid f.
    Desire { agent: String, prop: Formula },
    /// `SD{i} f` — every f-world of the cell is strictly above every !f-world.
    StrongDesire { agent: String, prop: Formula },
    /// `CD{i}(cond, f)` — the least desirable !cond-worlds avoid f.
    CondDesire { agent: String, cond: Formula, prop: Formula },
    /// The preference family: `Popt`/`Ppes` compare arbitrary cell worlds,
    /// the realistic variants `RPopt`/`RPpes` compare only maximally
    /// plausible ones.
    Pref { agent: String, mode: Mode, realistic: bool, arg: PrefArg },
}

impl Attitude {
    pub fn agent(&self) -> &str {
        match self {
            Attitude::Belief { agent, .. }
            | Attitude::StrongBelief { agent, .. }
            | Attitude::CondBelief { agent, .. }
            | Attitude::Desire { agent, .. }
            | Attitude::StrongDesire { agent, .. }
            | Attitude::CondDesire { agent, .. }
            | Attitude::Pref { agent, .. } => agent,
        }
    }

    /// Mutable access to the attitude's formula arguments, in surface order.
    pub fn args_mut(&mut self) -> Vec<&mut Formula> {
        match self {
            Attitude::Belief { prop, .. }
            | Attitude::StrongBelief { prop, .. }
            | Attitude::Desire { prop, .. }
            | Attitude::StrongDesire { prop, .. } => vec![prop],
            Attitude::CondBelief { cond, prop, .. }
            | Attitude::CondDesire { cond, prop, .. } => vec![cond, prop],
            Attitude::Pref { arg, .. } => match arg {
                PrefArg::Weak(lo, hi) | PrefArg::Strict(lo, hi) => vec![lo, hi],
                PrefArg::Monadic(f) => vec![f],
            },
        }
    }
}

/// Flavor of a rank upgrade: `Radical` reorders the whole cell around the
/// input, `Conservative` only promotes/demotes the boundary tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavor {
    Radical,
    Conservative,
}

/// A dynamic prefix `[radB{i} g]`, `[radD{i} g]`, `[conB{i} g]` or
/// `[conD{i} g]`: revise agent `agent`'s `dim`-ranking by formula `input`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RevisionOp {
    pub flavor: Flavor,
    pub dim: Dim,
    pub agent: String,
    pub input: Box<Formula>,
}

impl RevisionOp {
    /// Surface keyword for this operator (`radB`, `radD`, `conB`, `conD`).
    pub fn keyword(&self) -> &'static str {
        match (self.flavor, self.dim) {
            (Flavor::Radical, Dim::P) => "radB",
            (Flavor::Radical, Dim::D) => "radD",
            (Flavor::Conservative, Dim::P) => "conB",
            (Flavor::Conservative, Dim::D) => "conD",
        }
    }
}

/// Formula AST. `Box_`/`Diamond` carry a program; `Dyn` carries a revision
/// prefix. `Or`, `Implies`, `Iff` and `Diamond` are surface forms removed by
/// [`desugar`]; attitude operators are removed by [`expand_attitudes`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(String),
    Nominal(String),
    /// `play(i, a)` — agent `i` is choosing action `a` at the current world.
    Play(String, String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Box_(Program, Box<Formula>),
    Diamond(Program, Box<Formula>),
    Attitude(Box<Attitude>),
    Dyn(RevisionOp, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }
    pub fn box_(p: Program, f: Formula) -> Formula {
        Formula::Box_(p, Box::new(f))
    }
    pub fn diamond(p: Program, f: Formula) -> Formula {
        Formula::Diamond(p, Box::new(f))
    }
    pub fn attitude(a: Attitude) -> Formula {
        Formula::Attitude(Box::new(a))
    }
    pub fn dyn_(op: RevisionOp, f: Formula) -> Formula {
        Formula::Dyn(op, Box::new(f))
    }

    /// Conjunction of a non-empty list, associated to the left.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = items.into_iter();
        let first = it.next().unwrap_or(Formula::True);
        it.fold(first, Formula::and)
    }

    /// Disjunction of a non-empty list, associated to the left.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = items.into_iter();
        let first = it.next().unwrap_or(Formula::False);
        it.fold(first, Formula::or)
    }

    /// True when no derived connective, comparator or diamond remains.
    /// Attitudes and dynamic prefixes are allowed: they are separate layers
    /// removed by [`expand_attitudes`] and `dynamics::reduce`.
    pub fn is_core(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) | Formula::Nominal(_) | Formula::Play(..) => true,
            Formula::Not(f) => f.is_core(),
            Formula::And(a, b) => a.is_core() && b.is_core(),
            Formula::Or(..) | Formula::Implies(..) | Formula::Iff(..) | Formula::Diamond(..) => false,
            Formula::Box_(p, f) => p.is_core() && f.is_core(),
            Formula::Attitude(a) => attitude_args_core(a),
            Formula::Dyn(op, f) => op.input.is_core() && f.is_core(),
        }
    }

    /// Does any `Dyn` node occur anywhere in the formula (including inside
    /// tests and attitude arguments)?
    pub fn has_dynamics(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) | Formula::Nominal(_) | Formula::Play(..) => false,
            Formula::Not(f) => f.has_dynamics(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.has_dynamics() || b.has_dynamics()
            }
            Formula::Box_(p, f) | Formula::Diamond(p, f) => program_has_dynamics(p) || f.has_dynamics(),
            Formula::Attitude(a) => match a.as_ref() {
                Attitude::Belief { prop, .. }
                | Attitude::StrongBelief { prop, .. }
                | Attitude::Desire { prop, .. }
                | Attitude::StrongDesire { prop, .. } => prop.has_dynamics(),
                Attitude::CondBelief { cond, prop, .. } | Attitude::CondDesire { cond, prop, .. } => {
                    cond.has_dynamics() || prop.has_dynamics()
                }
                Attitude::Pref { arg, .. } => match arg {
                    PrefArg::Weak(a, b) | PrefArg::Strict(a, b) => a.has_dynamics() || b.has_dynamics(),
                    PrefArg::Monadic(f) => f.has_dynamics(),
                },
            },
            Formula::Dyn(..) => true,
        }
    }

    /// Does any attitude operator occur anywhere in the formula?
    pub fn has_attitudes(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) | Formula::Nominal(_) | Formula::Play(..) => false,
            Formula::Not(f) => f.has_attitudes(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.has_attitudes() || b.has_attitudes()
            }
            Formula::Box_(p, f) | Formula::Diamond(p, f) => program_has_attitudes(p) || f.has_attitudes(),
            Formula::Attitude(_) => true,
            Formula::Dyn(op, f) => op.input.has_attitudes() || f.has_attitudes(),
        }
    }

    /// Number of AST nodes (formulas and programs), used for rewrite budgets.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) | Formula::Nominal(_) | Formula::Play(..) => 1,
            Formula::Not(f) => 1 + f.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                1 + a.size() + b.size()
            }
            Formula::Box_(p, f) | Formula::Diamond(p, f) => 1 + program_size(p) + f.size(),
            Formula::Attitude(a) => {
                1 + match a.as_ref() {
                    Attitude::Belief { prop, .. }
                    | Attitude::StrongBelief { prop, .. }
                    | Attitude::Desire { prop, .. }
                    | Attitude::StrongDesire { prop, .. } => prop.size(),
                    Attitude::CondBelief { cond, prop, .. } | Attitude::CondDesire { cond, prop, .. } => {
                        cond.size() + prop.size()
                    }
                    Attitude::Pref { arg, .. } => match arg {
                        PrefArg::Weak(a, b) | PrefArg::Strict(a, b) => a.size() + b.size(),
                        PrefArg::Monadic(f) => f.size(),
                    },
                }
            }
            Formula::Dyn(op, f) => 1 + op.input.size() + f.size(),
        }
    }
}

fn attitude_args_core(a: &Attitude) -> bool {
    match a {
        Attitude::Belief { prop, .. }
        | Attitude::StrongBelief { prop, .. }
        | Attitude::Desire { prop, .. }
        | Attitude::StrongDesire { prop, .. } => prop.is_core(),
        Attitude::CondBelief { cond, prop, .. } | Attitude::CondDesire { cond, prop, .. } => {
            cond.is_core() && prop.is_core()
        }
        Attitude::Pref { arg, .. } => match arg {
            PrefArg::Weak(a, b) | PrefArg::Strict(a, b) => a.is_core() && b.is_core(),
            PrefArg::Monadic(f) => f.is_core(),
        },
    }
}

fn program_has_dynamics(p: &Program) -> bool {
    match p {
        Program::Eq(..)
        | Program::Le(..)
        | Program::Nle(..)
        | Program::Ge(..)
        | Program::Lt(..)
        | Program::Gt(..)
        | Program::Nge(..)
        | Program::Sim(..) => false,
        Program::Seq(a, b) | Program::Union(a, b) | Program::Inter(a, b) => {
            program_has_dynamics(a) || program_has_dynamics(b)
        }
        Program::Conv(a) => program_has_dynamics(a),
        Program::Test(f) => f.has_dynamics(),
    }
}

fn program_has_attitudes(p: &Program) -> bool {
    match p {
        Program::Eq(..)
        | Program::Le(..)
        | Program::Nle(..)
        | Program::Ge(..)
        | Program::Lt(..)
        | Program::Gt(..)
        | Program::Nge(..)
        | Program::Sim(..) => false,
        Program::Seq(a, b) | Program::Union(a, b) | Program::Inter(a, b) => {
            program_has_attitudes(a) || program_has_attitudes(b)
        }
        Program::Conv(a) => program_has_attitudes(a),
        Program::Test(f) => f.has_attitudes(),
    }
}

pub fn program_size(p: &Program) -> usize {
    match p {
        Program::Eq(..)
        | Program::Le(..)
        | Program::Nle(..)
        | Program::Ge(..)
        | Program::Lt(..)
        | Program::Gt(..)
        | Program::Nge(..)
        | Program::Sim(..) => 1,
        Program::Seq(a, b) | Program::Union(a, b) | Program::Inter(a, b) => {
            1 + program_size(a) + program_size(b)
        }
        Program::Conv(a) => 1 + program_size(a),
        Program::Test(f) => 1 + f.size(),
    }
}

/// `ge(i,t)` as a core program: the converse of the weak order.
pub fn ge_core(agent: &str, dim: Dim) -> Program {
    Program::conv(Program::Le(agent.to_string(), dim))
}

/// `lt(i,t)` as a core program: `le & -nle` — strictly below.
pub fn lt_core(agent: &str, dim: Dim) -> Program {
    Program::inter(
        Program::Le(agent.to_string(), dim),
        Program::conv(Program::Nle(agent.to_string(), dim)),
    )
}

/// `gt(i,t)` as a core program: `-le & nle` — strictly above.
pub fn gt_core(agent: &str, dim: Dim) -> Program {
    Program::inter(
        Program::conv(Program::Le(agent.to_string(), dim)),
        Program::Nle(agent.to_string(), dim),
    )
}

/// `nge(i,t)` as a core program: the converse of `nle`.
pub fn nge_core(agent: &str, dim: Dim) -> Program {
    Program::conv(Program::Nle(agent.to_string(), dim))
}

/// `sim(i,t)` as a core program: `le & -le` — equally ranked.
pub fn sim_core(agent: &str, dim: Dim) -> Program {
    Program::inter(
        Program::Le(agent.to_string(), dim),
        Program::conv(Program::Le(agent.to_string(), dim)),
    )
}

/// Remove derived comparators from a program and desugar all test bodies.
pub fn desugar_program(p: &Program) -> Program {
    match p {
        Program::Eq(i) => Program::Eq(i.clone()),
        Program::Le(i, t) => Program::Le(i.clone(), *t),
        Program::Nle(i, t) => Program::Nle(i.clone(), *t),
        Program::Seq(a, b) => Program::seq(desugar_program(a), desugar_program(b)),
        Program::Union(a, b) => Program::union(desugar_program(a), desugar_program(b)),
        Program::Inter(a, b) => Program::inter(desugar_program(a), desugar_program(b)),
        Program::Conv(a) => Program::conv(desugar_program(a)),
        Program::Test(f) => Program::test(desugar(f)),
        Program::Ge(i, t) => ge_core(i, *t),
        Program::Lt(i, t) => lt_core(i, *t),
        Program::Gt(i, t) => gt_core(i, *t),
        Program::Nge(i, t) => nge_core(i, *t),
        Program::Sim(i, t) => sim_core(i, *t),
    }
}

/// Rewrite a formula to the `true/false/atom/!/&/[p]` core. `<p>f` becomes
/// `!([p]!f)`, `f | g` becomes `!(!f & !g)`, `->` and `<->` unfold in the
/// usual way. Attitude operators and dynamic prefixes stay put (their
/// arguments are desugared recursively).
pub fn desugar(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Atom(_) | Formula::Nominal(_) | Formula::Play(..) => f.clone(),
        Formula::Not(g) => Formula::not(desugar(g)),
        Formula::And(a, b) => Formula::and(desugar(a), desugar(b)),
        Formula::Or(a, b) => Formula::not(Formula::and(
            Formula::not(desugar(a)),
            Formula::not(desugar(b)),
        )),
        Formula::Implies(a, b) => Formula::not(Formula::and(desugar(a), Formula::not(desugar(b)))),
        Formula::Iff(a, b) => {
            let a = desugar(a);
            let b = desugar(b);
            // (a -> b) & (b -> a), each implication in core form.
            Formula::and(
                Formula::not(Formula::and(a.clone(), Formula::not(b.clone()))),
                Formula::not(Formula::and(b, Formula::not(a))),
            )
        }
        Formula::Box_(p, g) => Formula::box_(desugar_program(p), desugar(g)),
        Formula::Diamond(p, g) => Formula::not(Formula::box_(
            desugar_program(p),
            Formula::not(desugar(g)),
        )),
        Formula::Attitude(a) => Formula::attitude(desugar_attitude(a)),
        Formula::Dyn(op, g) => Formula::dyn_(
            RevisionOp {
                flavor: op.flavor,
                dim: op.dim,
                agent: op.agent.clone(),
                input: Box::new(desugar(&op.input)),
            },
            desugar(g),
        ),
    }
}

fn desugar_attitude(a: &Attitude) -> Attitude {
    match a {
        Attitude::Belief { agent, prop } => Attitude::Belief { agent: agent.clone(), prop: desugar(prop) },
        Attitude::StrongBelief { agent, prop } => {
            Attitude::StrongBelief { agent: agent.clone(), prop: desugar(prop) }
        }
        Attitude::CondBelief { agent, cond, prop } => Attitude::CondBelief {
            agent: agent.clone(),
            cond: desugar(cond),
            prop: desugar(prop),
        },
        Attitude::Desire { agent, prop } => Attitude::Desire { agent: agent.clone(), prop: desugar(prop) },
        Attitude::StrongDesire { agent, prop } => {
            Attitude::StrongDesire { agent: agent.clone(), prop: desugar(prop) }
        }
        Attitude::CondDesire { agent, cond, prop } => Attitude::CondDesire {
            agent: agent.clone(),
            cond: desugar(cond),
            prop: desugar(prop),
        },
        Attitude::Pref { agent, mode, realistic, arg } => Attitude::Pref {
            agent: agent.clone(),
            mode: *mode,
            realistic: *realistic,
            arg: match arg {
                PrefArg::Weak(a, b) => PrefArg::Weak(desugar(a), desugar(b)),
                PrefArg::Strict(a, b) => PrefArg::Strict(desugar(a), desugar(b)),
                PrefArg::Monadic(f) => PrefArg::Monadic(desugar(f)),
            },
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExpandError {
    #[error("attitude expansion requires a static formula; found dynamic prefix [{0}]")]
    DynamicPrefix(String),
}

/// Test `?([lt(i,P)]false)` — "no strictly more plausible world exists",
/// i.e. the current world is maximally plausible in its cell.
fn maximal_test(agent: &str) -> Program {
    Program::test(Formula::box_(lt_core(agent, Dim::P), Formula::False))
}

/// Test `?([gt(i,D)]false)` — the current world is minimally desirable.
fn minimal_test(agent: &str) -> Program {
    Program::test(Formula::box_(gt_core(agent, Dim::D), Formula::False))
}

/// Unfold one attitude operator into its defining program modality. The
/// arguments are taken as already expanded/desugared by the caller.
pub fn expand_attitude(a: &Attitude) -> Formula {
    match a {
        // Truth in all maximally plausible cell worlds.
        Attitude::Belief { agent, prop } => Formula::box_(
            Program::seq(Program::Eq(agent.clone()), maximal_test(agent)),
            prop.clone(),
        ),
        // From any prop-world, everything weakly above still satisfies prop.
        Attitude::StrongBelief { agent, prop } => Formula::box_(
            Program::seq(
                Program::seq(Program::Eq(agent.clone()), Program::test(prop.clone())),
                Program::Le(agent.clone(), Dim::P),
            ),
            prop.clone(),
        ),
        // Truth in all maximally plausible cond-worlds: a cond-world with no
        // strictly better cond-world above it.
        Attitude::CondBelief { agent, cond, prop } => Formula::box_(
            Program::seq(
                Program::Eq(agent.clone()),
                Program::test(Formula::and(
                    cond.clone(),
                    Formula::box_(lt_core(agent, Dim::P), Formula::not(cond.clone())),
                )),
            ),
            prop.clone(),
        ),
        // All minimally desirable cell worlds avoid prop.
        Attitude::Desire { agent, prop } => Formula::box_(
            Program::seq(Program::Eq(agent.clone()), minimal_test(agent)),
            Formula::not(prop.clone()),
        ),
        Attitude::StrongDesire { agent, prop } => Formula::box_(
            Program::seq(
                Program::seq(Program::Eq(agent.clone()), Program::test(prop.clone())),
                Program::Le(agent.clone(), Dim::D),
            ),
            prop.clone(),
        ),
        // All minimally desirable !cond-worlds avoid prop.
        Attitude::CondDesire { agent, cond, prop } => Formula::box_(
            Program::seq(
                Program::Eq(agent.clone()),
                Program::test(Formula::and(
                    Formula::not(cond.clone()),
                    Formula::box_(gt_core(agent, Dim::D), cond.clone()),
                )),
            ),
            Formula::not(prop.clone()),
        ),
        Attitude::Pref { agent, mode, realistic, arg } => match arg {
            PrefArg::Weak(lo, hi) => expand_weak_pref(agent, *mode, *realistic, lo, hi),
            // Strict preference is the negation of the swapped weak one.
            PrefArg::Strict(lo, hi) => Formula::not(expand_weak_pref(agent, *mode, *realistic, hi, lo)),
            // The monadic operator prefers the formula to its negation,
            // strictly.
            PrefArg::Monadic(f) => Formula::not(expand_weak_pref(
                agent,
                *mode,
                *realistic,
                f,
                &Formula::not(f.clone()),
            )),
        },
    }
}

/// Weak preference `hi` over `lo`.
///
/// Optimistic: from every lo-world some weakly more desirable hi-world is
/// reachable. Pessimistic: every hi-world sits weakly above some lo-world.
/// Realistic variants relativize both sides to the maximally plausible part
/// of the cell.
fn expand_weak_pref(agent: &str, mode: Mode, realistic: bool, lo: &Formula, hi: &Formula) -> Formula {
    let eq = Program::Eq(agent.to_string());
    let le_d = Program::Le(agent.to_string(), Dim::D);
    let ge_d = ge_core(agent, Dim::D);
    if realistic {
        let into_best = Program::seq(eq.clone(), maximal_test(agent));
        let (walk, source, target) = match mode {
            Mode::Opt => (le_d, lo, hi),
            Mode::Pess => (ge_d, hi, lo),
        };
        Formula::box_(
            Program::seq(
                Program::seq(eq, maximal_test(agent)),
                Program::test(source.clone()),
            ),
            Formula::diamond(Program::inter(walk, into_best), target.clone()),
        )
    } else {
        let (walk, source, target) = match mode {
            Mode::Opt => (le_d, lo, hi),
            Mode::Pess => (ge_d, hi, lo),
        };
        Formula::box_(
            Program::seq(eq, Program::test(source.clone())),
            Formula::diamond(walk, target.clone()),
        )
    }
}

/// Replace every attitude operator in `f` by its program-modality
/// definition. The result contains no `Attitude` nodes; all other structure
/// is preserved. Fails if a dynamic prefix occurs anywhere (reduce those
/// first with `dynamics::reduce`).
pub fn expand_attitudes(f: &Formula) -> Result<Formula, ExpandError> {
    match f {
        Formula::True | Formula::False | Formula::Atom(_) | Formula::Nominal(_) | Formula::Play(..) => {
            Ok(f.clone())
        }
        Formula::Not(g) => Ok(Formula::not(expand_attitudes(g)?)),
        Formula::And(a, b) => Ok(Formula::and(expand_attitudes(a)?, expand_attitudes(b)?)),
        Formula::Or(a, b) => Ok(Formula::or(expand_attitudes(a)?, expand_attitudes(b)?)),
        Formula::Implies(a, b) => Ok(Formula::implies(expand_attitudes(a)?, expand_attitudes(b)?)),
        Formula::Iff(a, b) => Ok(Formula::iff(expand_attitudes(a)?, expand_attitudes(b)?)),
        Formula::Box_(p, g) => Ok(Formula::box_(expand_attitudes_program(p)?, expand_attitudes(g)?)),
        Formula::Diamond(p, g) => Ok(Formula::diamond(expand_attitudes_program(p)?, expand_attitudes(g)?)),
        Formula::Attitude(a) => {
            let expanded_args = expand_attitude_args(a)?;
            Ok(expand_attitude(&expanded_args))
        }
        Formula::Dyn(op, _) => Err(ExpandError::DynamicPrefix(op.keyword().to_string())),
    }
}

fn expand_attitudes_program(p: &Program) -> Result<Program, ExpandError> {
    Ok(match p {
        Program::Eq(..)
        | Program::Le(..)
        | Program::Nle(..)
        | Program::Ge(..)
        | Program::Lt(..)
        | Program::Gt(..)
        | Program::Nge(..)
        | Program::Sim(..) => p.clone(),
        Program::Seq(a, b) => Program::seq(expand_attitudes_program(a)?, expand_attitudes_program(b)?),
        Program::Union(a, b) => Program::union(expand_attitudes_program(a)?, expand_attitudes_program(b)?),
        Program::Inter(a, b) => Program::inter(expand_attitudes_program(a)?, expand_attitudes_program(b)?),
        Program::Conv(a) => Program::conv(expand_attitudes_program(a)?),
        Program::Test(f) => Program::test(expand_attitudes(f)?),
    })
}

fn expand_attitude_args(a: &Attitude) -> Result<Attitude, ExpandError> {
    Ok(match a {
        Attitude::Belief { agent, prop } => {
            Attitude::Belief { agent: agent.clone(), prop: expand_attitudes(prop)? }
        }
        Attitude::StrongBelief { agent, prop } => {
            Attitude::StrongBelief { agent: agent.clone(), prop: expand_attitudes(prop)? }
        }
        Attitude::CondBelief { agent, cond, prop } => Attitude::CondBelief {
            agent: agent.clone(),
            cond: expand_attitudes(cond)?,
            prop: expand_attitudes(prop)?,
        },
        Attitude::Desire { agent, prop } => {
            Attitude::Desire { agent: agent.clone(), prop: expand_attitudes(prop)? }
        }
        Attitude::StrongDesire { agent, prop } => {
            Attitude::StrongDesire { agent: agent.clone(), prop: expand_attitudes(prop)? }
        }
        Attitude::CondDesire { agent, cond, prop } => Attitude::CondDesire {
            agent: agent.clone(),
            cond: expand_attitudes(cond)?,
            prop: expand_attitudes(prop)?,
        },
        Attitude::Pref { agent, mode, realistic, arg } => Attitude::Pref {
            agent: agent.clone(),
            mode: *mode,
            realistic: *realistic,
            arg: match arg {
                PrefArg::Weak(a, b) => PrefArg::Weak(expand_attitudes(a)?, expand_attitudes(b)?),
                PrefArg::Strict(a, b) => PrefArg::Strict(expand_attitudes(a)?, expand_attitudes(b)?),
                PrefArg::Monadic(f) => PrefArg::Monadic(expand_attitudes(f)?),
            },
        },
    })
}
