//! The eight acceptance criteria, run in order. Each prints one PASS or FAIL
//! line straight to stdout, past the test harness's capture.

use std::collections::HashMap;
use std::io::Write as _;
use std::time::{Duration, Instant};

use kinlog_cli::commands::{check_simplifier, cmd_check_interpretation, cmd_roundtrip, simplifier_models};
use kinlog_cli::lemmas::{check_lemmas, Field};
use kinlog_cli::mm::mm_demo;
use kinlog_cli::report::{Status, SuiteReport};
use kinlog_core::logic::{alpha_normalize, axiom, parse, parse_many};
use kinlog_core::models::{build_model, eval, recheck, standard_spec, EvalOptions, Model, TheoryTag, Truth, Val, Verdict};
use kinlog_core::scalar::{Rat, Scalar};
use kinlog_core::spacetime::Event;
use kinlog_core::transforms::core_map;
use kinlog_core::translate::{simplify_eoi, Translator};

const CORPUS: &str = include_str!("../data/corpus.kl");

const SIMPLIFIED_SELF: &str = "(forall-in ((k IOb)) (forall-in ((e Ether)) (-> (< (speed e k) c_e) (forall ((y0 Q) (y1 Q) (y2 Q) (y3 Q)) (<-> (W k k (rad-inv k e (pt y0 y1 y2 y3))) (and (= y1 0) (= y2 0) (= y3 0)))))))";

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn r(s: &str) -> Rat {
    s.parse().unwrap()
}

fn summary(rep: &SuiteReport) -> String {
    let bad: Vec<String> = rep.cases.iter().filter(|c| c.status != Status::Pass).map(|c| format!("{} {}", c.name, c.status.label())).collect();
    let mut s = format!("{} cases, {} pass", rep.cases.len(), rep.count(Status::Pass));
    if !bad.is_empty() {
        s.push_str(&format!(" [{}]", bad.join(", ")));
    }
    s
}

fn every_case_has(rep: &SuiteReport, n: usize) -> bool {
    rep.cases.iter().all(|c| c.samples >= n)
}

fn rad_suite() -> Outcome {
    let start = Instant::now();
    let rep = check_lemmas(Some("rad"), 7, 100, Field::Exact).unwrap();
    let wall = start.elapsed();
    let ok = rep.all_pass() && rep.cases.len() == 6 && every_case_has(&rep, 100) && wall < Duration::from_secs(10);
    outcome(ok, format!("{}, 100 velocities each, {:.2}s", summary(&rep), wall.as_secs_f64()))
}

fn cannon_mosquito() -> Outcome {
    let cannon = check_lemmas(Some("cannon"), 7, 50, Field::Exact).unwrap();
    let mosquito = check_lemmas(Some("mosquito"), 7, 50, Field::Exact).unwrap();
    let names: Vec<&str> = cannon.cases.iter().chain(&mosquito.cases).map(|c| c.name.as_str()).collect();
    let ok = cannon.all_pass()
        && mosquito.all_pass()
        && every_case_has(&cannon, 50)
        && every_case_has(&mosquito, 50)
        && names == ["cannon-poincare", "cannon-ether-choice", "mosquito-galilean", "mosquito-ether-choice"];
    outcome(ok, format!("cannon {}; mosquito {}", summary(&cannon), summary(&mosquito)))
}

fn xy_suite() -> Outcome {
    let rep = check_lemmas(Some("xy"), 7, 100, Field::Exact).unwrap();
    // the sampled |V| has to span at least three decades
    let range = rep.cases.iter().find(|c| c.name == "xy-inverse").and_then(|c| {
        let (lo, hi) = c.detail.split_once("|V| from ")?.1.split_once(" to ")?;
        Some((lo.parse::<f64>().ok()?, hi.parse::<f64>().ok()?))
    });
    let spread = range.is_some_and(|(lo, hi)| hi / lo >= 1000.0);
    let shown = range.map_or(String::new(), |(lo, hi)| format!(", |V| from {lo} to {hi}"));
    outcome(rep.all_pass() && every_case_has(&rep, 100) && spread, format!("{}{shown}", summary(&rep)))
}

fn interpretations() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (direction, model) in [("tr", "ck"), ("tr+", "ck-stl"), ("tr+inv", "sr-e"), ("tr*", "ck"), ("tr*inv", "ck-stl")] {
        let rep = cmd_check_interpretation(model, direction, 10_000, 7).unwrap();
        let clean = rep.all_pass() && rep.cases.iter().all(|c| c.verdict == Some(Verdict::HoldsOnSamples) && c.counterexample.is_none());
        ok &= clean;
        parts.push(format!("{direction}/{model} {}", if clean { rep.cases.len().to_string() } else { summary(&rep) }));
    }
    let wall = start.elapsed();
    ok &= wall < Duration::from_secs(300);
    outcome(ok, format!("axioms holding at budget 10000: {}; {:.1}s", parts.join(", "), wall.as_secs_f64()))
}

fn round_trips() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (pair, model) in [("plus", "sr-e"), ("plus", "ck-stl"), ("star", "ck"), ("star", "ck-stl"), ("composed", "ck-composed")] {
        let rep = cmd_roundtrip(model, pair, 1000, 7).unwrap();
        let clean = rep.all_pass() && rep.cases.len() == 4 && rep.cases.iter().all(|c| c.samples >= 1000 && c.failed == 0 && c.unknown == 0);
        ok &= clean;
        parts.push(format!("{pair}/{model} {}", if clean { "4x1000".to_string() } else { summary(&rep) }));
    }
    outcome(ok, parts.join(", "))
}

fn q(bindings: &HashMap<&str, &Val>, name: &str) -> Rat {
    match bindings[name] {
        Val::Q(x) => x.as_rat().expect("exact binding").clone(),
        Val::Body(_) => panic!("{name} is a body"),
    }
}

fn point(b: &HashMap<&str, &Val>, p: &str) -> Event<Rat> {
    Event(std::array::from_fn(|i| q(b, &format!("{p}{i}"))))
}

/// Rechecks the absolute-time counterexample with the observers' frames
/// alone: both event pairs correspond, yet their time differences differ.
fn abs_time_oracle(m: &Model, bindings: &[(String, Val)]) -> bool {
    let b: HashMap<&str, &Val> = bindings.iter().map(|(n, v)| (n.as_str(), v)).collect();
    let frame = |name: &str| match b[name] {
        Val::Body(id) => m.bodies[*id].frame.clone().expect("observer"),
        Val::Q(_) => panic!("{name} is a number"),
    };
    let w = frame("k2").compose(&frame("k").inverse().unwrap());
    let (x, y, xp, yp) = (point(&b, "x"), point(&b, "y"), point(&b, "xp"), point(&b, "yp"));
    w.apply(&x) == xp && w.apply(&y) == yp && x.t().clone() - y.t().clone() != xp.t().clone() - yp.t().clone()
}

/// In a moving classical observer's coordinates the photons sent along and
/// against its motion have different speeds, so no single `c` fits.
fn light_speed_oracle(m: &Model) -> bool {
    let c = m.c.clone();
    let Some(f) = m.body("k1").ok().and_then(|k| k.frame.clone()) else {
        return false;
    };
    let speed = |dir: i64| {
        let a = f.apply(&Event::origin());
        let e = f.apply(&Event::new(Rat::int(1), c.clone() * Rat::int(dir), Rat::int(0), Rat::int(0)));
        let d = &e - &a;
        d.spatial().norm_sq().div(&d.t().square()).unwrap()
    };
    let photons = ["1", "-1"].iter().all(|dir| {
        let f = parse(&format!("(exists-in ((p Ph)) (and (in-wl e0 p 0 0 0 0) (in-wl e0 p 1 (* {dir} {c}) 0 0)))")).unwrap();
        eval(m, &f, &EvalOptions::default()).unwrap().verdict == Verdict::HoldsOnSamples
    });
    photons && speed(1) != speed(-1)
}

fn negative_control() -> Outcome {
    let opts = EvalOptions::default();
    let sr = build_model(&standard_spec(TheoryTag::Sr)).unwrap();
    let ck = build_model(&standard_spec(TheoryTag::Ck)).unwrap();
    let a = eval(&sr, &axiom("AxAbsTime").unwrap(), &opts).unwrap();
    let b = eval(&ck, &axiom("AxPh_c").unwrap(), &opts).unwrap();
    let (Some(ca), Some(cb)) = (&a.counterexample, &b.counterexample) else {
        return outcome(false, format!("verdicts {} and {} without counterexamples", a.verdict.label(), b.verdict.label()));
    };
    let moving = ck.observers().filter(|o| o.name != "e0").count() >= 2;
    let ok = a.verdict == Verdict::Fails
        && b.verdict == Verdict::Fails
        && recheck(&sr, ca, &opts) == Truth::False
        && recheck(&ck, cb, &opts) == Truth::False
        && abs_time_oracle(&sr, &ca.bindings)
        && moving
        && light_speed_oracle(&ck);
    outcome(ok, format!("SR AxAbsTime {}, CK AxPh_c {}; both counterexamples recheck false", a.verdict.label(), b.verdict.label()))
}

fn michelson_morley() -> Outcome {
    let (v, l, c) = (r("3/5"), r("1"), r("1"));
    let d = match mm_demo(&v, &l, &c) {
        Ok(d) => d,
        Err(e) => return outcome(false, e.to_string()),
    };
    let core = core_map(&v, &c).unwrap();
    let inv = core.inverse().unwrap();
    let images = d.right.iter().zip(&d.left).all(|(a, b)| inv.apply(a) == *b);
    // classical light in k's frame with the ether wind at -v: c - v up the x
    // arm, c + v back, sqrt(c² - v²) across the y arm and back
    let arm_x = d.left[1].0[1].clone();
    let arm_y = d.left[2].0[2].clone();
    let emit = d.left[0].t().clone();
    let hit_x = emit.clone() + arm_x.div(&(c.clone() - v.clone())).unwrap();
    let back_x = hit_x.clone() + arm_x.div(&(c.clone() + v.clone())).unwrap();
    let cross = (c.square() - v.square()).perfect_sqrt().unwrap();
    let hit_y = emit.clone() + arm_y.div(&cross).unwrap();
    let back_y = hit_y.clone() + arm_y.div(&cross).unwrap();
    let kinematics = *d.left[1].t() == hit_x && *d.left[2].t() == hit_y && back_x == *d.left[3].t() && back_y == *d.left[3].t();
    // frozen classical events
    let frozen = [["-5/4", "0", "0", "0"], ["3/4", "4/5", "0", "0"], ["0", "0", "1", "0"], ["5/4", "0", "0", "0"]];
    let frozen_ok = d.left.iter().zip(frozen).all(|(e, f)| *e == Event(f.map(r)));
    let null = d.right[3].t() == &l;
    let unequal = d.left[1].t() != d.left[2].t();
    let ok = d.all_ok() && images && kinematics && frozen_ok && null && unequal;
    outcome(
        ok,
        format!("reception at t = {} on both arms; classical mirror hits at t = {} and {}; C_v⁻¹ images match", d.right[3].t(), d.left[1].t(), d.left[2].t()),
    )
}

fn simplifier() -> Outcome {
    let mech = Translator::from_name("tr").unwrap().apply(&axiom("AxSelf").unwrap()).unwrap();
    let shape = alpha_normalize(&simplify_eoi(&mech)) == alpha_normalize(&parse(SIMPLIFIED_SELF).unwrap());
    let n = parse_many(CORPUS).unwrap().len();
    let models = simplifier_models(7).len();
    let rep = check_simplifier(CORPUS, 200, 7).unwrap();
    let merged = rep.cases.iter().filter(|c| c.detail.starts_with("merged")).count();
    let per_case = rep.cases.iter().all(|c| c.samples == models && c.failed == 0 && c.unknown == 0);
    let ok = shape && n >= 50 && models == 5 && rep.all_pass() && per_case && merged > 0;
    outcome(
        ok,
        format!(
            "tr(AxSelf) {} the simplified form; {n} formulas x {models} models, {merged} merged, {}",
            if shape { "matches" } else { "does not match" },
            summary(&rep)
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("radarization lemma suite", rad_suite),
        ("cannon and mosquito suites", cannon_mosquito),
        ("X/Y suite", xy_suite),
        ("interpretation suites", interpretations),
        ("definitional-equivalence round trips", round_trips),
        ("negative control", negative_control),
        ("Michelson-Morley demo", michelson_morley),
        ("ether-quantifier simplifier", simplifier),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        let tag = if o.ok { "PASS" } else { "FAIL" };
        let _ = writeln!(std::io::stdout(), "{tag} [{}] {name}: {}", i + 1, o.detail);
        if !o.ok {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
