//! Recursive-descent parser for formulas and programs.
//!
//! Formula precedence, loosest to tightest: `<->` (left) < `->` (right) <
//! `|` < `&` < prefixes (`!`, `[p]`, `<p>`, `[radB{i} g]`, attitude
//! operators). Program precedence: `|` < `&` < `;` < prefixes (`-`,
//! `?(..)`).
//!
//! All keywords are contextual: `B` is an attitude only when followed by
//! `{`, `play`/`eq`/`le`/... only when followed by `(`, so they remain
//! usable as propositional atoms.

use super::lexer::{lex, Pos, Spanned, Tok};
use super::{Attitude, Dim, Flavor, Formula, Mode, PrefArg, Program, RevisionOp};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at {pos}: {msg}")]
pub struct ParseError {
    pub pos: Pos,
    pub msg: String,
}

/// Parse a formula in the full surface syntax.
pub fn parse_formula(input: &str) -> Result<Formula, ParseError> {
    Parser::new(input, false)?.run_formula()
}

/// Parse a formula, rejecting the derived program comparators
/// (`ge`, `lt`, `gt`, `nge`, `sim`).
pub fn parse_formula_core(input: &str) -> Result<Formula, ParseError> {
    Parser::new(input, true)?.run_formula()
}

/// Parse a program in the full surface syntax.
pub fn parse_program(input: &str) -> Result<Program, ParseError> {
    Parser::new(input, false)?.run_program()
}

/// Parse a program, rejecting the derived comparators.
pub fn parse_program_core(input: &str) -> Result<Program, ParseError> {
    Parser::new(input, true)?.run_program()
}

const ATTITUDE_KINDS: [&str; 10] =
    ["B", "SB", "CB", "D", "SD", "CD", "Popt", "Ppes", "RPopt", "RPpes"];
const DYN_KINDS: [&str; 4] = ["radB", "radD", "conB", "conD"];
const PROGRAM_ATOMS: [&str; 8] = ["eq", "le", "nle", "ge", "lt", "gt", "nge", "sim"];
const SUGAR_ATOMS: [&str; 5] = ["ge", "lt", "gt", "nge", "sim"];

struct Parser {
    toks: Vec<Spanned>,
    at: usize,
    core_only: bool,
}

impl Parser {
    fn new(input: &str, core_only: bool) -> Result<Self, ParseError> {
        let toks = lex(input).map_err(|e| ParseError { pos: e.pos, msg: e.msg })?;
        Ok(Parser { toks, at: 0, core_only })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, want: &Tok) -> Result<(), ParseError> {
        if self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected {}, found {}", want, self.peek())))
        }
    }

    fn err(&self, msg: String) -> ParseError {
        ParseError { pos: self.pos(), msg }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            other => Err(self.err(format!("expected {what}, found {other}"))),
        }
    }

    fn run_formula(mut self) -> Result<Formula, ParseError> {
        let f = self.formula()?;
        self.eat(&Tok::Eof)?;
        Ok(f)
    }

    fn run_program(mut self) -> Result<Program, ParseError> {
        let p = self.program()?;
        self.eat(&Tok::Eof)?;
        Ok(p)
    }

    // ---- formulas -------------------------------------------------------

    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.iff()
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.imp()?;
        while self.peek() == &Tok::DArrow {
            self.bump();
            let rhs = self.imp()?;
            f = Formula::iff(f, rhs);
        }
        Ok(f)
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.peek() == &Tok::Arrow {
            self.bump();
            let rhs = self.imp()?; // right-associative
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.and()?;
        while self.peek() == &Tok::Pipe {
            self.bump();
            let rhs = self.and()?;
            f = Formula::or(f, rhs);
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unary()?;
        while self.peek() == &Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            f = Formula::and(f, rhs);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LBracket => {
                self.bump();
                // Either `[radB{i} g] f` or `[p] f`.
                if let Tok::Ident(kw) = self.peek() {
                    if DYN_KINDS.contains(&kw.as_str()) && self.peek2() == &Tok::LBrace {
                        let op = self.revision_op()?;
                        self.eat(&Tok::RBracket)?;
                        let body = self.unary()?;
                        return Ok(Formula::dyn_(op, body));
                    }
                }
                let p = self.program()?;
                self.eat(&Tok::RBracket)?;
                let body = self.unary()?;
                Ok(Formula::box_(p, body))
            }
            Tok::Lt => {
                self.bump();
                let p = self.program()?;
                self.eat(&Tok::Gt)?;
                let body = self.unary()?;
                Ok(Formula::diamond(p, body))
            }
            _ => self.primary(),
        }
    }

    fn revision_op(&mut self) -> Result<RevisionOp, ParseError> {
        let kw = self.ident("revision operator")?;
        let (flavor, dim) = match kw.as_str() {
            "radB" => (Flavor::Radical, Dim::P),
            "radD" => (Flavor::Radical, Dim::D),
            "conB" => (Flavor::Conservative, Dim::P),
            "conD" => (Flavor::Conservative, Dim::D),
            other => return Err(self.err(format!("unknown revision operator `{other}`"))),
        };
        self.eat(&Tok::LBrace)?;
        let agent = self.ident("agent name")?;
        self.eat(&Tok::RBrace)?;
        let input = self.formula()?;
        Ok(RevisionOp { flavor, dim, agent, input: Box::new(input) })
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.eat(&Tok::RParen)?;
                Ok(f)
            }
            Tok::Nominal(x) => {
                self.bump();
                Ok(Formula::Nominal(x))
            }
            Tok::Ident(name) => {
                if name == "true" {
                    self.bump();
                    return Ok(Formula::True);
                }
                if name == "false" {
                    self.bump();
                    return Ok(Formula::False);
                }
                if ATTITUDE_KINDS.contains(&name.as_str()) && self.peek2() == &Tok::LBrace {
                    return self.attitude(&name);
                }
                if name == "play" && self.peek2() == &Tok::LParen {
                    self.bump();
                    self.bump();
                    let agent = self.ident("agent name")?;
                    self.eat(&Tok::Comma)?;
                    let action = self.ident("action name")?;
                    self.eat(&Tok::RParen)?;
                    return Ok(Formula::Play(agent, action));
                }
                self.bump();
                Ok(Formula::Atom(name))
            }
            other => Err(self.err(format!("expected a formula, found {other}"))),
        }
    }

    fn attitude(&mut self, kind: &str) -> Result<Formula, ParseError> {
        self.bump(); // kind
        self.eat(&Tok::LBrace)?;
        let agent = self.ident("agent name")?;
        self.eat(&Tok::RBrace)?;
        let att = match kind {
            "B" => Attitude::Belief { agent, prop: self.unary()? },
            "SB" => Attitude::StrongBelief { agent, prop: self.unary()? },
            "D" => Attitude::Desire { agent, prop: self.unary()? },
            "SD" => Attitude::StrongDesire { agent, prop: self.unary()? },
            "CB" | "CD" => {
                self.eat(&Tok::LParen)?;
                let cond = self.formula()?;
                self.eat(&Tok::Comma)?;
                let prop = self.formula()?;
                self.eat(&Tok::RParen)?;
                if kind == "CB" {
                    Attitude::CondBelief { agent, cond, prop }
                } else {
                    Attitude::CondDesire { agent, cond, prop }
                }
            }
            _ => {
                let (mode, realistic) = match kind {
                    "Popt" => (Mode::Opt, false),
                    "Ppes" => (Mode::Pess, false),
                    "RPopt" => (Mode::Opt, true),
                    "RPpes" => (Mode::Pess, true),
                    other => return Err(self.err(format!("unknown attitude `{other}`"))),
                };
                let arg = if self.peek() == &Tok::LParen {
                    self.bump();
                    let first = self.formula()?;
                    let arg = match self.peek() {
                        Tok::LtEq => {
                            self.bump();
                            let second = self.formula()?;
                            PrefArg::Weak(first, second)
                        }
                        Tok::Lt => {
                            self.bump();
                            let second = self.formula()?;
                            PrefArg::Strict(first, second)
                        }
                        // A parenthesized monadic argument.
                        _ => PrefArg::Monadic(first),
                    };
                    self.eat(&Tok::RParen)?;
                    arg
                } else {
                    PrefArg::Monadic(self.unary()?)
                };
                Attitude::Pref { agent, mode, realistic, arg }
            }
        };
        Ok(Formula::attitude(att))
    }

    // ---- programs -------------------------------------------------------

    fn program(&mut self) -> Result<Program, ParseError> {
        self.p_union()
    }

    fn p_union(&mut self) -> Result<Program, ParseError> {
        let mut p = self.p_inter()?;
        while self.peek() == &Tok::Pipe {
            self.bump();
            let rhs = self.p_inter()?;
            p = Program::union(p, rhs);
        }
        Ok(p)
    }

    fn p_inter(&mut self) -> Result<Program, ParseError> {
        let mut p = self.p_seq()?;
        while self.peek() == &Tok::Amp {
            self.bump();
            let rhs = self.p_seq()?;
            p = Program::inter(p, rhs);
        }
        Ok(p)
    }

    fn p_seq(&mut self) -> Result<Program, ParseError> {
        let mut p = self.p_unary()?;
        while self.peek() == &Tok::Semi {
            self.bump();
            let rhs = self.p_unary()?;
            p = Program::seq(p, rhs);
        }
        Ok(p)
    }

    fn p_unary(&mut self) -> Result<Program, ParseError> {
        match self.peek().clone() {
            Tok::Minus => {
                self.bump();
                Ok(Program::conv(self.p_unary()?))
            }
            Tok::Question => {
                self.bump();
                self.eat(&Tok::LParen)?;
                let f = self.formula()?;
                self.eat(&Tok::RParen)?;
                Ok(Program::test(f))
            }
            Tok::LParen => {
                self.bump();
                let p = self.program()?;
                self.eat(&Tok::RParen)?;
                Ok(p)
            }
            Tok::Ident(name) if PROGRAM_ATOMS.contains(&name.as_str()) => {
                if self.core_only && SUGAR_ATOMS.contains(&name.as_str()) {
                    return Err(self.err(format!(
                        "derived comparator `{name}` is not allowed in core-only mode"
                    )));
                }
                self.bump();
                self.eat(&Tok::LParen)?;
                let agent = self.ident("agent name")?;
                let p = if name == "eq" {
                    Program::Eq(agent)
                } else {
                    self.eat(&Tok::Comma)?;
                    let dim = match self.ident("dimension (P or D)")?.as_str() {
                        "P" => Dim::P,
                        "D" => Dim::D,
                        other => {
                            return Err(self.err(format!(
                                "expected dimension P or D, found `{other}`"
                            )))
                        }
                    };
                    match name.as_str() {
                        "le" => Program::Le(agent, dim),
                        "nle" => Program::Nle(agent, dim),
                        "ge" => Program::Ge(agent, dim),
                        "lt" => Program::Lt(agent, dim),
                        "gt" => Program::Gt(agent, dim),
                        "nge" => Program::Nge(agent, dim),
                        "sim" => Program::Sim(agent, dim),
                        _ => unreachable!(),
                    }
                };
                self.eat(&Tok::RParen)?;
                Ok(p)
            }
            other => Err(self.err(format!("expected a program, found {other}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::render::{render_formula, render_program};

    #[test]
    fn precedence_layers_formulas() {
        let f = parse_formula("!p & q | r -> s <-> t").unwrap();
        // ((((!p & q) | r) -> s) <-> t)
        assert_eq!(
            f,
            Formula::iff(
                Formula::implies(
                    Formula::or(
                        Formula::and(Formula::not(Formula::Atom("p".into())), Formula::Atom("q".into())),
                        Formula::Atom("r".into())
                    ),
                    Formula::Atom("s".into())
                ),
                Formula::Atom("t".into())
            )
        );
    }

    #[test]
    fn implication_is_right_associative() {
        let f = parse_formula("p -> q -> r").unwrap();
        assert_eq!(
            f,
            Formula::implies(
                Formula::Atom("p".into()),
                Formula::implies(Formula::Atom("q".into()), Formula::Atom("r".into()))
            )
        );
    }

    #[test]
    fn box_binds_tighter_than_conjunction() {
        let f = parse_formula("[eq(1)] p & q").unwrap();
        assert_eq!(
            f,
            Formula::and(
                Formula::box_(Program::Eq("1".into()), Formula::Atom("p".into())),
                Formula::Atom("q".into())
            )
        );
    }

    #[test]
    fn sequence_binds_tighter_than_intersection_than_union() {
        let p = parse_program("eq(1) ; le(1,P) & nle(1,P) | eq(2)").unwrap();
        assert_eq!(
            p,
            Program::union(
                Program::inter(
                    Program::seq(Program::Eq("1".into()), Program::Le("1".into(), Dim::P)),
                    Program::Nle("1".into(), Dim::P)
                ),
                Program::Eq("2".into())
            )
        );
    }

    #[test]
    fn diamond_over_converse_parses() {
        let f = parse_formula("<-le(1,D)>p").unwrap();
        assert_eq!(
            f,
            Formula::diamond(
                Program::conv(Program::Le("1".into(), Dim::D)),
                Formula::Atom("p".into())
            )
        );
    }

    #[test]
    fn attitude_keywords_are_contextual() {
        // `B` without braces is an ordinary atom.
        assert_eq!(parse_formula("B").unwrap(), Formula::Atom("B".into()));
        assert_eq!(parse_formula("play").unwrap(), Formula::Atom("play".into()));
        let f = parse_formula("B{1} p").unwrap();
        assert_eq!(
            f,
            Formula::attitude(Attitude::Belief { agent: "1".into(), prop: Formula::Atom("p".into()) })
        );
    }

    #[test]
    fn preference_arguments_come_in_three_shapes() {
        let weak = parse_formula("Popt{1}(g <= f)").unwrap();
        let strict = parse_formula("RPpes{2}(g < f)").unwrap();
        let monadic = parse_formula("Ppes{1} !f").unwrap();
        let monadic_paren = parse_formula("Ppes{1} (g & f)").unwrap();
        match (weak, strict, monadic, monadic_paren) {
            (
                Formula::Attitude(a),
                Formula::Attitude(b),
                Formula::Attitude(c),
                Formula::Attitude(d),
            ) => {
                assert!(matches!(
                    *a,
                    Attitude::Pref { mode: Mode::Opt, realistic: false, arg: PrefArg::Weak(..), .. }
                ));
                assert!(matches!(
                    *b,
                    Attitude::Pref { mode: Mode::Pess, realistic: true, arg: PrefArg::Strict(..), .. }
                ));
                assert!(matches!(
                    *c,
                    Attitude::Pref { mode: Mode::Pess, realistic: false, arg: PrefArg::Monadic(..), .. }
                ));
                assert!(matches!(
                    *d,
                    Attitude::Pref { arg: PrefArg::Monadic(Formula::And(..)), .. }
                ));
            }
            _ => panic!("expected attitudes"),
        }
    }

    #[test]
    fn dynamic_prefix_parses_with_full_formula_input() {
        let f = parse_formula("[radB{1} p -> q] B{1} q").unwrap();
        match f {
            Formula::Dyn(op, body) => {
                assert_eq!(op.flavor, Flavor::Radical);
                assert_eq!(op.dim, Dim::P);
                assert_eq!(op.agent, "1");
                assert_eq!(*op.input, parse_formula("p -> q").unwrap());
                assert_eq!(*body, parse_formula("B{1} q").unwrap());
            }
            other => panic!("expected dynamic prefix, got {other:?}"),
        }
    }

    #[test]
    fn core_only_rejects_derived_comparators() {
        assert!(parse_formula_core("[le(1,P)] p").is_ok());
        let err = parse_formula_core("[lt(1,P)] p").unwrap_err();
        assert!(err.msg.contains("core-only"));
        assert!(parse_program_core("ge(1,D)").is_err());
        assert!(parse_program_core("eq(1); ?(sim)").is_ok(), "sim as an atom is fine");
    }

    #[test]
    fn error_positions_point_at_the_offender() {
        let err = parse_formula("p & (q |)").unwrap_err();
        assert_eq!(err.pos.line, 1);
        assert_eq!(err.pos.col, 9);
    }

    #[test]
    fn nominals_parse_in_formulas() {
        assert_eq!(parse_formula("@x1").unwrap(), Formula::Nominal("x1".into()));
    }

    #[test]
    fn renders_round_trip_through_the_parser() {
        for src in [
            "B{1} p",
            "SD{1}(!lo1 & !co)",
            "Popt{1}(g <= f) -> Ppes{1}(g < f)",
            "[eq(1); ?(p); le(1,P)] p",
            "<le(1,D) & (eq(1); ?([lt(1,P)]false))> p",
            "[radB{1} p -> q] (B{1} q | @x1)",
            "[conD{2} play(1,C) & !co] SD{2} !co",
            "p <-> q <-> r",
            "p -> q -> r",
            "[-(eq(1) | le(2,D))] false",
        ] {
            let f = parse_formula(src).unwrap();
            let printed = render_formula(&f);
            let again = parse_formula(&printed).unwrap();
            assert_eq!(f, again, "round trip failed for {src} -> {printed}");
        }
    }

    #[test]
    fn program_renders_round_trip() {
        for src in [
            "eq(1)",
            "le(1,P); nle(2,D) | -eq(1) & sim(1,P)",
            "?(B{1} p); (eq(1) | eq(2))",
            "-(le(1,P); le(1,D))",
            "gt(1,D) & nge(2,P)",
        ] {
            let p = parse_program(src).unwrap();
            let printed = render_program(&p);
            let again = parse_program(&printed).unwrap();
            assert_eq!(p, again, "round trip failed for {src} -> {printed}");
        }
    }
}
