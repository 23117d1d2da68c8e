use kinlog_core::logic::{axiom, parse};
use kinlog_core::models::*;
use kinlog_core::scalar::{Rat, Scalar};
use kinlog_core::spacetime::{time, Event};
use kinlog_core::transforms::lorentz_boost;
use proptest::prelude::*;

fn ck() -> Model {
    build_model(&standard_spec(TheoryTag::Ck)).unwrap()
}

fn sr() -> Model {
    build_model(&standard_spec(TheoryTag::Sr)).unwrap()
}

fn opts() -> EvalOptions {
    EvalOptions { budget: 400, seed: 11 }
}

fn point(cex: &Cex, base: &str) -> Event<Rat> {
    let coord = |i: usize| {
        let name = format!("{base}{i}");
        match cex.bindings.iter().find(|(n, _)| *n == name) {
            Some((_, Val::Q(x))) => x.as_rat().expect("rational sample").clone(),
            _ => panic!("{name} unbound"),
        }
    };
    Event(std::array::from_fn(coord))
}

fn body(m: &Model, cex: &Cex, var: &str) -> String {
    match cex.bindings.iter().find(|(n, _)| n == var) {
        Some((_, Val::Body(id))) => m.bodies[*id].name.clone(),
        _ => panic!("{var} unbound"),
    }
}

#[test]
fn absolute_time_holds_classically() {
    let r = eval(&ck(), &axiom("AxAbsTime").unwrap(), &opts()).unwrap();
    assert_eq!(r.verdict, Verdict::HoldsOnSamples);
}

#[test]
fn absolute_time_fails_relativistically() {
    let m = sr();
    let r = eval(&m, &axiom("AxAbsTime").unwrap(), &opts()).unwrap();
    assert_eq!(r.verdict, Verdict::Fails);
    let cex = r.counterexample.unwrap();
    assert_eq!(recheck(&m, &cex, &opts()), Truth::False);
    // the named events really are shared and really disagree on elapsed time
    let w = worldview_transform(&m, &body(&m, &cex, "k"), &body(&m, &cex, "k2")).unwrap();
    let (x, y) = (point(&cex, "x"), point(&cex, "y"));
    let (xp, yp) = (point(&cex, "xp"), point(&cex, "yp"));
    assert_eq!(w.apply(&x), xp);
    assert_eq!(w.apply(&y), yp);
    assert_ne!(time(&x, &y), time(&xp, &yp));
}

#[test]
fn boosted_simultaneous_events_are_not_simultaneous() {
    // (0,0,0,0) and (0,1,0,0) under L at v = 3/5: gamma = 5/4, so the second
    // image has time -gamma*v = -3/4
    let l = lorentz_boost(&Rat::new(3, 5), &Rat::int(1)).unwrap();
    let a = l.apply(&Event::from_ints([0, 0, 0, 0]));
    let b = l.apply(&Event::from_ints([0, 1, 0, 0]));
    assert_eq!(time(&a, &b), Rat::new(3, 4));
}

#[test]
fn light_speed_axiom_fails_classically() {
    let m = ck();
    let r = eval(&m, &axiom("AxPh_c").unwrap(), &opts()).unwrap();
    assert_eq!(r.verdict, Verdict::Fails);
    assert_eq!(recheck(&m, &r.counterexample.unwrap(), &opts()), Truth::False);
    let s = eval(&sr(), &axiom("AxPh_c").unwrap(), &opts()).unwrap();
    assert_eq!(s.verdict, Verdict::HoldsOnSamples);
}

#[test]
fn reflexivity_holds_everywhere() {
    let f = parse("(forall ((x Q)) (= x x))").unwrap();
    for tag in [TheoryTag::Ck, TheoryTag::CkStl, TheoryTag::Sr, TheoryTag::SrE] {
        let m = build_model(&standard_spec(tag)).unwrap();
        assert_eq!(eval(&m, &f, &opts()).unwrap().verdict, Verdict::HoldsOnSamples);
    }
}

#[test]
fn empty_budget_is_unknown() {
    let f = parse("(forall ((x Q)) (= x x))").unwrap();
    let r = eval(&ck(), &f, &EvalOptions { budget: 0, seed: 1 }).unwrap();
    assert_eq!(r.verdict, Verdict::Unknown);
}

#[test]
fn wrong_language_is_rejected() {
    let f = parse("(forall-in ((e Ether)) (IOb e))").unwrap();
    assert!(matches!(eval(&sr(), &f, &opts()), Err(ModelError::SignatureViolation(_))));
}

#[test]
fn fixed_seed_gives_identical_results() {
    let f = axiom("AxAbsTime").unwrap();
    let a = serde_json::to_string(&eval(&sr(), &f, &opts()).unwrap()).unwrap();
    let b = serde_json::to_string(&eval(&sr(), &f, &opts()).unwrap()).unwrap();
    assert_eq!(a, b);
}

fn lit(n: i64, d: i64) -> String {
    Rat::new(n, d).to_string()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_arithmetic_matches_direct_computation(
        a in (-20i64..20, 1i64..9), b in (-20i64..20, 1i64..9), c in (-20i64..20, 1i64..9),
    ) {
        let (ra, rb, rc) = (Rat::new(a.0, a.1), Rat::new(b.0, b.1), Rat::new(c.0, c.1));
        let (sa, sb, sc) = (lit(a.0, a.1), lit(b.0, b.1), lit(c.0, c.1));
        let m = ck();
        let cases = [
            (format!("(< (+ {sa} {sb}) (* {sb} {sc}))"), ra.clone() + rb.clone() < rb.clone() * rc.clone()),
            (format!("(= (- {sa} {sb}) {sc})"), ra.clone() - rb.clone() == rc),
            (format!("(or (< {sa} 0) (= (* {sa} {sa}) {sc}))"), ra < Rat::zero() || ra.clone() * ra.clone() == rc),
        ];
        for (text, expected) in cases {
            let r = eval(&m, &parse(&text).unwrap(), &opts()).unwrap();
            prop_assert_eq!(r.verdict, if expected { Verdict::HoldsOnSamples } else { Verdict::Fails }, "{}", text);
        }
    }

    #[test]
    fn distances_match_squared_comparison(x in proptest::array::uniform4(-6i64..6), y in proptest::array::uniform4(-6i64..6)) {
        let (ex, ey) = (Event::<Rat>::from_ints(x), Event::<Rat>::from_ints(y));
        let pt = |p: [i64; 4]| format!("(pt {} {} {} {})", p[0], p[1], p[2], p[3]);
        let text = format!("(< (space {} {}) (* 2 (time {} {})))", pt(x), pt(y), pt(x), pt(y));
        let t = time(&ex, &ey);
        let expected = kinlog_core::spacetime::space_sq(&ex, &ey) < Rat::int(4) * t.clone() * t;
        let r = eval(&ck(), &parse(&text).unwrap(), &opts()).unwrap();
        prop_assert_eq!(r.verdict, if expected { Verdict::HoldsOnSamples } else { Verdict::Fails });
    }
}
