//! End-to-end acceptance gate.
//!
//! Each test covers one release criterion and prints a single `[PASS]`/
//! `[FAIL]` line (visible with `cargo test --test acceptance -- --nocapture`).
//! The fuzz-based criteria run the seeded suites at the agreed scale, so a
//! run of this target re-derives every headline property on fresh random
//! models rather than trusting frozen fixtures alone.

use std::time::Instant;

use cogmodal_core::checker::valid_on;
use cogmodal_core::dynamics::{eval_dynamic, reduce_with_budget};
use cogmodal_core::games::{best_response, enumerate_equilibria, JointAction};
use cogmodal_core::genfuzz::{
    gen_dynamic_formula, gen_model, model_rng, replay, run_suite, FuzzReport, GenCtx, GenSpec,
};
use cogmodal_core::syntax::parse_formula;
use cogmodal_core::{Formula, Mode, Model};

const SEED: u64 = 0xA11CE;

fn criterion(name: &str, body: impl FnOnce() + std::panic::UnwindSafe) {
    match std::panic::catch_unwind(body) {
        Ok(()) => println!("[PASS] {name}"),
        Err(cause) => {
            println!("[FAIL] {name}");
            std::panic::resume_unwind(cause);
        }
    }
}

fn fixture(name: &str) -> Model {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/");
    Model::load(format!("{path}{name}")).expect("fixture loads")
}

fn f(src: &str) -> Formula {
    parse_formula(src).expect("formula parses")
}

fn clean_suite(suite: &str, models: usize, seed: u64) -> FuzzReport {
    let report = run_suite(suite, models, seed).expect("suite runs");
    assert_eq!(
        report.failure_count, 0,
        "{suite}: unexpected counterexamples: {:?}",
        report.failures
    );
    report
}

#[test]
fn axiom_soundness_fuzz() {
    criterion(
        "every base-logic axiom schema holds on 500 random models",
        || {
            let started = Instant::now();
            let report = clean_suite("dlca-axioms", 500, SEED);
            let schemas = [
                "modal-distribution",
                "knowledge-reflexive",
                "knowledge-transitive",
                "knowledge-euclidean",
                "rank-reflexive",
                "rank-transitive",
                "knowledge-rank-inclusion",
                "rank-total",
                "sequence-unfold",
                "union-unfold",
                "intersection-left",
                "intersection-right",
                "converse-forth",
                "converse-back",
                "complement-partition",
                "complement-disjoint",
                "test-unfold",
                "nominal-functional",
            ];
            for schema in schemas {
                let n = report.check_counts.get(schema).copied().unwrap_or(0);
                assert!(n >= 20, "{schema}: only {n} instances checked");
            }
            let nec = report.check_counts.get("necessitation").copied().unwrap_or(0);
            assert!(nec >= 20, "necessitation: only {nec} instances checked");
            assert!(
                started.elapsed().as_secs() < 60,
                "axiom fuzz took {:?}",
                started.elapsed()
            );
        },
    );
}

#[test]
fn game_structure_and_wellfoundedness_axioms() {
    criterion(
        "action-structure and well-foundedness axioms hold on 500 random models",
        || {
            let games = clean_suite("dlcag-axioms", 500, SEED);
            for name in ["action-exclusivity", "action-totality", "choice-independence"] {
                assert!(games.check_counts.get(name).copied().unwrap_or(0) >= 500, "{name}");
            }
            let wf = clean_suite("wellfounded-axioms", 500, SEED);
            for name in ["plausibility-wellfounded", "desirability-wellfounded"] {
                assert!(wf.check_counts.get(name).copied().unwrap_or(0) >= 500, "{name}");
            }
        },
    );
}

#[test]
fn attitude_encoding_oracle() {
    criterion(
        "direct attitude semantics equals the program encodings on 500 random models",
        || {
            let report = clean_suite("attitude-encodings", 500, SEED);
            // The preference family randomizes over weak/strict/monadic
            // arguments, both assessment modes and the realistic restriction,
            // so these seven names jointly exercise all ten operator shapes.
            for name in [
                "belief-encoding",
                "strong-belief-encoding",
                "conditional-belief-encoding",
                "desire-encoding",
                "strong-desire-encoding",
                "conditional-desire-encoding",
                "preference-encoding",
            ] {
                assert!(
                    report.check_counts.get(name).copied().unwrap_or(0) >= 500,
                    "{name}"
                );
            }
        },
    );
}

#[test]
fn attitude_validity_fuzz() {
    criterion(
        "the headline attitude validities hold on 500 random models",
        || {
            let report = clean_suite("attitude-validities", 500, SEED);
            for name in [
                "strong-belief-collapse",
                "desire-strengthening",
                "strong-desire-collapse",
                "preference-totality",
                "realistic-preference-totality",
                "desire-as-pessimistic-preference",
            ] {
                assert!(
                    report.check_counts.get(name).copied().unwrap_or(0) >= 500,
                    "{name}"
                );
            }
        },
    );
}

#[test]
fn crossroad_static_scenario() {
    criterion(
        "the crossroad model satisfies its hypotheses and derived attitudes in under a second",
        || {
            let m = fixture("mcross.json");
            let started = Instant::now();

            let knowledge_hypothesis = "[eq(1)](((lo1 & !lo2) -> !co) & ((!lo1 & lo2) -> !co) & !(!lo1 & !lo2)) \
                 & [eq(2)](((lo1 & !lo2) -> !co) & ((!lo1 & lo2) -> !co) & !(!lo1 & !lo2))";
            let envisaged_situations = "(<eq(1)>co & <eq(1)>(lo1 & !lo2) & <eq(1)>(!lo1 & lo2) & <eq(1)>(lo1 & lo2 & !co)) \
                 & (<eq(2)>co & <eq(2)>(lo1 & !lo2) & <eq(2)>(!lo1 & lo2) & <eq(2)>(lo1 & lo2 & !co))";
            let desire_hypothesis = "(SD{1}!lo1 & SD{1}!co) & (SD{2}!lo2 & SD{2}!co)";
            for hypothesis in [knowledge_hypothesis, envisaged_situations, desire_hypothesis] {
                assert!(valid_on(&m, &f(hypothesis)).unwrap(), "{hypothesis}");
            }

            // What each agent can derive: a collision means both lose time;
            // conditional on not losing itself, it believes the other loses;
            // both one-sided outcomes are desirable, but only the outcome
            // where the *other* agent loses is strongly desired.
            let consequences = [
                "[eq(1)](co -> (lo1 & lo2))",
                "[eq(2)](co -> (lo1 & lo2))",
                "CB{1}(!lo1, lo2)",
                "CB{2}(!lo2, lo1)",
                "D{1}(lo1 & !lo2)",
                "D{1}(!lo1 & lo2)",
                "D{2}(lo1 & !lo2)",
                "D{2}(!lo1 & lo2)",
                "SD{1}(!lo1 & lo2)",
                "!SD{1}(lo1 & !lo2)",
                "SD{2}(lo1 & !lo2)",
                "!SD{2}(!lo1 & lo2)",
            ];
            for conclusion in consequences {
                assert!(valid_on(&m, &f(conclusion)).unwrap(), "{conclusion}");
            }
            assert!(
                started.elapsed().as_millis() < 1000,
                "crossroad checks took {:?}",
                started.elapsed()
            );
        },
    );
}

#[test]
fn crossroad_game_scenario() {
    criterion(
        "the crossroad game yields the swerve/stay equilibria and clean rationality fuzz",
        || {
            let m = fixture("mcross-g.json");

            let action_effects_hypothesis = "[eq(1)](((play(1,C) & play(2,C)) -> co) \
                 & ((play(1,C) & play(2,S)) -> (!lo1 & lo2)) \
                 & ((play(1,S) & play(2,C)) -> (lo1 & !lo2)) \
                 & ((play(1,S) & play(2,S)) -> (lo1 & lo2 & !co)))";
            assert!(valid_on(&m, &f(action_effects_hypothesis)).unwrap());
            assert!(valid_on(&m, &f(&action_effects_hypothesis.replace("eq(1)", "eq(2)"))).unwrap());
            let ex_ante_beliefs = "((!B{1}!(play(1,C) & play(2,C))) <-> (!B{1}!(play(1,S) & play(2,C)))) \
                 & ((!B{1}!(play(1,C) & play(2,S))) <-> (!B{1}!(play(1,S) & play(2,S)))) \
                 & ((!B{2}!(play(1,C) & play(2,C))) <-> (!B{2}!(play(1,C) & play(2,S)))) \
                 & ((!B{2}!(play(1,S) & play(2,C))) <-> (!B{2}!(play(1,S) & play(2,S))))";
            assert!(valid_on(&m, &f(ex_ante_beliefs)).unwrap());

            let joint = |entries: &[(&str, &str)]| -> JointAction {
                entries.iter().map(|(i, a)| (i.to_string(), a.to_string())).collect()
            };
            for mode in [Mode::Opt, Mode::Pess] {
                // Staying is the best answer to a swerver and vice versa,
                // for both agents and under both assessments.
                for (agent, action, others) in [
                    ("1", "S", joint(&[("2", "C")])),
                    ("1", "C", joint(&[("2", "S")])),
                    ("2", "S", joint(&[("1", "C")])),
                    ("2", "C", joint(&[("1", "S")])),
                ] {
                    assert!(
                        best_response(&m, "w1", agent, action, &others, mode).unwrap(),
                        "{agent} {action} {mode:?}"
                    );
                }
                assert_eq!(
                    enumerate_equilibria(&m, "w1", mode, 16).unwrap(),
                    vec![joint(&[("1", "C"), ("2", "S")]), joint(&[("1", "S"), ("2", "C")])],
                    "{mode:?}"
                );
            }

            clean_suite("game-propositions", 300, SEED);
        },
    );
}

#[test]
fn revision_transforms_and_laws() {
    criterion(
        "revision transforms match their relational descriptions and the success laws hold",
        || {
            let agreement = clean_suite("transform-agreement", 500, SEED);
            assert!(
                agreement.check_counts.get("upgraded-comparison").copied().unwrap_or(0) >= 500
            );
            let laws = clean_suite("revision-laws", 500, SEED);
            for name in [
                "radical-plausibility-success",
                "radical-desirability-success",
                "conservative-plausibility-success",
                "conservative-desirability-success",
            ] {
                assert!(laws.check_counts.get(name).copied().unwrap_or(0) >= 500, "{name}");
            }

            // Frozen contrast pair: the conservative upgrade makes the input
            // believed but (unlike the radical one) not strongly believed.
            let m1 = fixture("m1.json");
            assert!(eval_dynamic(&m1, "w1", &f("[radB{1} !p](B{1} !p & SB{1} !p)")).unwrap());
            assert!(eval_dynamic(&m1, "w1", &f("[conB{1} !p](B{1} !p & !SB{1} !p)")).unwrap());

            // After a radical desire upgrade towards "the other driver loses
            // time", agent 1 strongly desires that outcome, keeps a plain
            // desire not to lose time itself, but no longer strongly so.
            let mcross = fixture("mcross.json");
            assert!(eval_dynamic(
                &mcross,
                "w1",
                &f("[radD{1} !lo2](SD{1} !lo2 & D{1} !lo2 & D{1} !lo1 & !SD{1} !lo1)")
            )
            .unwrap());
        },
    );
}

#[test]
fn reduction_soundness() {
    criterion(
        "rewriting removes every revision operator and preserves truth on 1000 formulas",
        || {
            let spec = GenSpec::default();
            let mut checked = 0u64;
            for index in 0..500u64 {
                let mut rng = model_rng(SEED ^ 0x8ed, index);
                let m = gen_model(&spec, &mut rng);
                let ctx = GenCtx::of(&m);
                for _ in 0..2 {
                    let dynamic = gen_dynamic_formula(&ctx, &mut rng);
                    let reduced = reduce_with_budget(&dynamic, 1_000_000)
                        .expect("rewriting stays within the node budget");
                    assert!(!reduced.has_dynamics());
                    for w in 0..m.n_worlds() {
                        let id = m.world_id(w);
                        assert_eq!(
                            eval_dynamic(&m, id, &dynamic).unwrap(),
                            cogmodal_core::checker::eval_at(&m, id, &reduced).unwrap(),
                            "world {id}, model {index}"
                        );
                    }
                    checked += 1;
                }
            }
            assert_eq!(checked, 1000);
        },
    );
}

#[test]
fn finite_model_strengthenings() {
    criterion(
        "finite models validate consistent belief and non-trivial desire",
        || {
            let report = clean_suite("finite-model", 500, SEED);
            for name in ["belief-consistency", "no-impossible-belief", "no-trivial-desire"] {
                assert!(
                    report.check_counts.get(name).copied().unwrap_or(0) >= 500,
                    "{name}"
                );
            }
        },
    );
}

#[test]
fn negative_control_sensitivity() {
    criterion(
        "a deliberately unsound schema is caught and its counterexample replays",
        || {
            let report = run_suite("negative-control", 500, SEED).expect("suite runs");
            assert!(
                report.check_counts.get("belief-factivity-control").copied().unwrap_or(0) > 0
            );
            assert!(report.failure_count > 0, "the planted flaw went undetected");
            let first = report.failures.first().expect("an embedded counterexample");
            assert!(!replay(first).unwrap(), "replay must reproduce the failure");
        },
    );
}
