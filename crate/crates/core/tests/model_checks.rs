use kinlog_core::logic::axiom;
use kinlog_core::models::*;
use kinlog_core::scalar::{pythagorean_velocity, Rat};
use kinlog_core::spacetime::{on_cone, LightCone, Velocity};
use kinlog_core::transforms::classify;
use kinlog_core::translate::Translator;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn observer(name: &str, v: Velocity<Rat>) -> BodySpec {
    BodySpec {
        name: Some(name.into()),
        kind: BodyKind::Observer,
        velocity: Some(v.0),
        offset: None,
        rotation: None,
        trivial_orbit: 0,
        ether: false,
        e: false,
    }
}

/// A classical model with `n` observers at random Pythagorean speeds below `c = 1`.
fn random_spec(theory: TheoryTag, n: usize, seed: u64) -> ModelSpec {
    let mut g = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = standard_spec(theory);
    spec.bodies.truncate(1);
    for i in 0..n {
        let t = Rat::new(g.random_range(0..30), 31);
        let speed = pythagorean_velocity(&t, &Rat::int(1)).unwrap().v;
        spec.bodies.push(observer(&format!("r{i}"), rational_unit_vector(&mut g).scale(&speed)));
    }
    spec
}

#[test]
fn ether_observer_is_fixed_by_the_model_transform() {
    let m = build_model(&standard_spec(TheoryTag::Ck)).unwrap();
    let s = transform_model(&m).unwrap();
    assert_eq!(s.theory, TheoryTag::Sr);
    assert_eq!(s.e0().frame, m.e0().frame);
}

#[test]
fn transformed_photons_sit_on_right_cones() {
    let m = build_model(&standard_spec(TheoryTag::Ck)).unwrap();
    let s = transform_model(&m).unwrap();
    for k in s.observers() {
        let f = k.frame.as_ref().unwrap();
        for p in s.bodies.iter().filter(|b| b.ph) {
            let apex = f.apply(&p.line.at(&Rat::int(0)));
            let cone = LightCone::right(apex, s.c.clone()).unwrap();
            for t in [-3, 1, 7] {
                assert!(on_cone(&f.apply(&p.line.at(&Rat::int(t))), &cone), "{} sees {}", k.name, p.name);
            }
        }
    }
}

#[test]
fn transformed_worldviews_are_poincare() {
    let m = build_model(&random_spec(TheoryTag::Ck, 8, 3)).unwrap();
    let s = transform_model(&m).unwrap();
    let names: Vec<String> = s.observers().map(|b| b.name.clone()).collect();
    for k in &names {
        for h in &names {
            assert!(classify(&worldview_transform(&s, k, h).unwrap(), &s.c).poincare);
        }
    }
}

#[test]
fn faster_than_light_observers_block_the_transform() {
    let m = build_model(&composed_spec()).unwrap();
    assert!(matches!(transform_model(&m), Err(ModelError::FtlObserverPresent(_))));
}

#[test]
fn corollaries_hold_on_every_test_model() {
    let mut models: Vec<Model> = [TheoryTag::Ck, TheoryTag::CkStl, TheoryTag::Sr, TheoryTag::SrE]
        .into_iter()
        .map(|t| build_model(&standard_spec(t)).unwrap())
        .collect();
    for seed in 0..4 {
        models.push(build_model(&random_spec(TheoryTag::Ck, 6, seed)).unwrap());
        models.push(build_model(&random_spec(TheoryTag::Sr, 6, seed)).unwrap());
    }
    models.push(build_model(&composed_spec()).unwrap());
    for m in &models {
        let r = check_corollaries(m);
        assert!(r.all_ok(), "{:?}", r);
        assert!(!r.checks.is_empty());
    }
}

#[test]
fn ether_velocity_zero_is_kept_by_every_translator() {
    for tag in [TheoryTag::CkStl, TheoryTag::SrE] {
        let m = build_model(&standard_spec(tag)).unwrap();
        let r = check_velocity_remap(&m);
        let zero = Velocity([Rat::int(0), Rat::int(0), Rat::int(0)]);
        let rows: Vec<_> = r.rows.iter().filter(|row| row.observer == "e0").collect();
        assert!(!rows.is_empty());
        for row in rows {
            assert_eq!(row.after.as_ref(), Some(&zero), "{}", row.translator);
        }
    }
}

#[test]
fn half_light_speed_remaps_to_unit_speed() {
    // v/(c - v) at v = 1/2, c = 1 is 1
    let mut spec = standard_spec(TheoryTag::CkStl);
    spec.bodies.truncate(1);
    spec.bodies.push(observer("half", Velocity([Rat::new(-1, 2), Rat::int(0), Rat::int(0)])));
    let m = build_model(&spec).unwrap();
    let r = check_velocity_remap(&m);
    let row = r.rows.iter().find(|row| row.observer == "half" && row.translator == "tr*inv").unwrap();
    assert_eq!(row.before, Velocity([Rat::new(1, 2), Rat::int(0), Rat::int(0)]));
    assert_eq!(row.after, Some(Velocity([Rat::int(1), Rat::int(0), Rat::int(0)])));
    let star = r.rows.iter().find(|row| row.observer == "half" && row.translator == "tr*").unwrap();
    // c*V/(1 + V) at V = 1/2 is 1/3
    assert_eq!(star.after, Some(Velocity([Rat::new(1, 3), Rat::int(0), Rat::int(0)])));
    assert!(r.all_ok());
}

#[test]
fn plus_translator_preserves_ether_velocity_on_sampled_observers() {
    let m = build_model(&random_spec(TheoryTag::CkStl, 20, 9)).unwrap();
    let r = check_velocity_remap(&m);
    let rows: Vec<_> = r.rows.iter().filter(|row| row.translator == "tr+" && row.observer.starts_with('r')).collect();
    assert_eq!(rows.len(), 20);
    for row in rows {
        assert_eq!(row.after.as_ref(), Some(&row.before), "{}", row.observer);
    }
    assert!(r.all_ok() && r.inexact.is_empty());
}

#[test]
fn round_trips_agree_on_small_samples() {
    for (pair, m) in [
        (RoundtripPair::Plus, build_model(&standard_spec(TheoryTag::SrE)).unwrap()),
        (RoundtripPair::Star, build_model(&standard_spec(TheoryTag::Ck)).unwrap()),
        (RoundtripPair::Composed, build_model(&composed_spec()).unwrap()),
    ] {
        let r = roundtrip(&m, pair, 60, 5).unwrap();
        assert!(r.all_agree(), "{r:?}");
    }
    let sr = build_model(&standard_spec(TheoryTag::Sr)).unwrap();
    assert!(roundtrip(&sr, RoundtripPair::Plus, 10, 5).is_err());
}

#[test]
fn translated_axioms_hold_at_small_budget() {
    let m = build_model(&standard_spec(TheoryTag::Ck)).unwrap();
    let t = Translator::from_name("tr").unwrap();
    let opts = EvalOptions { budget: 60, seed: 2 };
    for name in ["AxSelf", "AxPh_c", "AxThExp"] {
        let f = t.apply(&axiom(name).unwrap()).unwrap();
        assert_eq!(eval(&m, &f, &opts).unwrap().verdict, Verdict::HoldsOnSamples, "{name}");
    }
}

#[test]
fn witness_synthesis_leaves_the_model_untouched() {
    let m = build_model(&standard_spec(TheoryTag::Ck)).unwrap();
    let before = m.bodies.len();
    let r = eval(&m, &axiom("AxThExp+").unwrap(), &EvalOptions { budget: 40, seed: 4 }).unwrap();
    assert_eq!(r.verdict, Verdict::HoldsOnSamples);
    assert_eq!(m.bodies.len(), before);
    assert!(m.bodies.iter().all(|b| !b.synthesized));
}
