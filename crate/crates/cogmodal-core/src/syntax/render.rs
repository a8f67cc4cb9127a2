//! Pretty-printer emitting the surface syntax. Output uses the minimal
//! parenthesization that survives a round trip through the parser: children
//! at strictly looser precedence get parens, and so do same-precedence
//! children on the non-associating side.

use super::{Attitude, Formula, Mode, PrefArg, Program, RevisionOp};
use std::fmt::Write;

// Formula precedence levels.
const F_IFF: u8 = 1;
const F_IMP: u8 = 2;
const F_OR: u8 = 3;
const F_AND: u8 = 4;
const F_UNARY: u8 = 5;
const F_ATOMIC: u8 = 6;

// Program precedence levels.
const P_UNION: u8 = 1;
const P_INTER: u8 = 2;
const P_SEQ: u8 = 3;
const P_UNARY: u8 = 4;

pub fn render_formula(f: &Formula) -> String {
    let mut s = String::new();
    fmt_formula(f, &mut s);
    s
}

pub fn render_program(p: &Program) -> String {
    let mut s = String::new();
    fmt_program(p, &mut s);
    s
}

fn f_prec(f: &Formula) -> u8 {
    match f {
        Formula::Iff(..) => F_IFF,
        Formula::Implies(..) => F_IMP,
        Formula::Or(..) => F_OR,
        Formula::And(..) => F_AND,
        Formula::Not(..) | Formula::Box_(..) | Formula::Diamond(..) | Formula::Dyn(..) => F_UNARY,
        Formula::Attitude(a) => match a.as_ref() {
            // Attitudes with a trailing unary argument bind like prefixes;
            // the fully bracketed ones are self-delimiting.
            Attitude::Belief { .. }
            | Attitude::StrongBelief { .. }
            | Attitude::Desire { .. }
            | Attitude::StrongDesire { .. } => F_UNARY,
            Attitude::CondBelief { .. } | Attitude::CondDesire { .. } => F_ATOMIC,
            Attitude::Pref { arg, .. } => match arg {
                PrefArg::Monadic(_) => F_UNARY,
                _ => F_ATOMIC,
            },
        },
        _ => F_ATOMIC,
    }
}

fn p_prec(p: &Program) -> u8 {
    match p {
        Program::Union(..) => P_UNION,
        Program::Inter(..) => P_INTER,
        Program::Seq(..) => P_SEQ,
        Program::Conv(..) => P_UNARY,
        _ => P_UNARY + 1, // atoms and tests are self-delimiting
    }
}

fn fmt_formula_at(f: &Formula, min: u8, out: &mut String) {
    if f_prec(f) < min {
        out.push('(');
        fmt_formula(f, out);
        out.push(')');
    } else {
        fmt_formula(f, out);
    }
}

fn fmt_formula(f: &Formula, out: &mut String) {
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Atom(a) => out.push_str(a),
        Formula::Nominal(x) => {
            out.push('@');
            out.push_str(x);
        }
        Formula::Play(i, a) => {
            let _ = write!(out, "play({i},{a})");
        }
        Formula::Not(g) => {
            out.push('!');
            fmt_formula_at(g, F_UNARY, out);
        }
        Formula::And(a, b) => {
            fmt_formula_at(a, F_AND, out);
            out.push_str(" & ");
            fmt_formula_at(b, F_AND + 1, out);
        }
        Formula::Or(a, b) => {
            fmt_formula_at(a, F_OR, out);
            out.push_str(" | ");
            fmt_formula_at(b, F_OR + 1, out);
        }
        Formula::Implies(a, b) => {
            // Right-associative: the left child needs parens at equal level.
            fmt_formula_at(a, F_IMP + 1, out);
            out.push_str(" -> ");
            fmt_formula_at(b, F_IMP, out);
        }
        Formula::Iff(a, b) => {
            fmt_formula_at(a, F_IFF, out);
            out.push_str(" <-> ");
            fmt_formula_at(b, F_IFF + 1, out);
        }
        Formula::Box_(p, g) => {
            out.push('[');
            fmt_program(p, out);
            out.push_str("] ");
            fmt_formula_at(g, F_UNARY, out);
        }
        Formula::Diamond(p, g) => {
            out.push('<');
            fmt_program(p, out);
            out.push_str("> ");
            fmt_formula_at(g, F_UNARY, out);
        }
        Formula::Attitude(a) => fmt_attitude(a, out),
        Formula::Dyn(op, g) => {
            fmt_revision_op(op, out);
            out.push(' ');
            fmt_formula_at(g, F_UNARY, out);
        }
    }
}

fn fmt_revision_op(op: &RevisionOp, out: &mut String) {
    let _ = write!(out, "[{}{{{}}} ", op.keyword(), op.agent);
    fmt_formula(&op.input, out);
    out.push(']');
}

fn fmt_attitude(a: &Attitude, out: &mut String) {
    match a {
        Attitude::Belief { agent, prop } => fmt_prefix_attitude("B", agent, prop, out),
        Attitude::StrongBelief { agent, prop } => fmt_prefix_attitude("SB", agent, prop, out),
        Attitude::Desire { agent, prop } => fmt_prefix_attitude("D", agent, prop, out),
        Attitude::StrongDesire { agent, prop } => fmt_prefix_attitude("SD", agent, prop, out),
        Attitude::CondBelief { agent, cond, prop } => {
            let _ = write!(out, "CB{{{agent}}}(");
            fmt_formula(cond, out);
            out.push_str(", ");
            fmt_formula(prop, out);
            out.push(')');
        }
        Attitude::CondDesire { agent, cond, prop } => {
            let _ = write!(out, "CD{{{agent}}}(");
            fmt_formula(cond, out);
            out.push_str(", ");
            fmt_formula(prop, out);
            out.push(')');
        }
        Attitude::Pref { agent, mode, realistic, arg } => {
            let name = match (mode, realistic) {
                (Mode::Opt, false) => "Popt",
                (Mode::Pess, false) => "Ppes",
                (Mode::Opt, true) => "RPopt",
                (Mode::Pess, true) => "RPpes",
            };
            let _ = write!(out, "{name}{{{agent}}}");
            match arg {
                PrefArg::Weak(lo, hi) => {
                    out.push('(');
                    fmt_formula(lo, out);
                    out.push_str(" <= ");
                    fmt_formula(hi, out);
                    out.push(')');
                }
                PrefArg::Strict(lo, hi) => {
                    out.push('(');
                    fmt_formula(lo, out);
                    out.push_str(" < ");
                    fmt_formula(hi, out);
                    out.push(')');
                }
                PrefArg::Monadic(f) => {
                    out.push(' ');
                    fmt_formula_at(f, F_UNARY, out);
                }
            }
        }
    }
}

fn fmt_prefix_attitude(kind: &str, agent: &str, prop: &Formula, out: &mut String) {
    let _ = write!(out, "{kind}{{{agent}}} ");
    fmt_formula_at(prop, F_UNARY, out);
}

fn fmt_program_at(p: &Program, min: u8, out: &mut String) {
    if p_prec(p) < min {
        out.push('(');
        fmt_program(p, out);
        out.push(')');
    } else {
        fmt_program(p, out);
    }
}

fn fmt_program(p: &Program, out: &mut String) {
    match p {
        Program::Eq(i) => {
            let _ = write!(out, "eq({i})");
        }
        Program::Le(i, t) => {
            let _ = write!(out, "le({i},{t})");
        }
        Program::Nle(i, t) => {
            let _ = write!(out, "nle({i},{t})");
        }
        Program::Ge(i, t) => {
            let _ = write!(out, "ge({i},{t})");
        }
        Program::Lt(i, t) => {
            let _ = write!(out, "lt({i},{t})");
        }
        Program::Gt(i, t) => {
            let _ = write!(out, "gt({i},{t})");
        }
        Program::Nge(i, t) => {
            let _ = write!(out, "nge({i},{t})");
        }
        Program::Sim(i, t) => {
            let _ = write!(out, "sim({i},{t})");
        }
        Program::Seq(a, b) => {
            fmt_program_at(a, P_SEQ, out);
            out.push_str("; ");
            fmt_program_at(b, P_SEQ + 1, out);
        }
        Program::Union(a, b) => {
            fmt_program_at(a, P_UNION, out);
            out.push_str(" | ");
            fmt_program_at(b, P_UNION + 1, out);
        }
        Program::Inter(a, b) => {
            fmt_program_at(a, P_INTER, out);
            out.push_str(" & ");
            fmt_program_at(b, P_INTER + 1, out);
        }
        Program::Conv(a) => {
            out.push('-');
            fmt_program_at(a, P_UNARY, out);
        }
        Program::Test(f) => {
            out.push_str("?(");
            fmt_formula(f, out);
            out.push(')');
        }
    }
}
