use kinlog_core::logic::{alpha_normalize, axiom, axiom_names, expand_macros, parse, Formula, TrKind};
use kinlog_core::models::{rational_unit_vector, random_trivial};
use kinlog_core::scalar::{gamma_inv, pythagorean_velocity, Rat, Scalar};
use kinlog_core::spacetime::{collinear, on_cone, space_sq, Event, LightCone, Velocity};
use kinlog_core::transforms::{
    classify, galilean_boost, radarization, radarization_closed, x_map, y_map, AffineMap4,
};
use kinlog_core::translate::{translate, Translator};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rat() -> impl Strategy<Value = Rat> {
    (-60i64..60, 1i64..25).prop_map(|(n, d)| Rat::new(n, d))
}

fn event() -> impl Strategy<Value = Event<Rat>> {
    proptest::array::uniform4(rat()).prop_map(Event)
}

/// Pythagorean speed below `c = 1` along a rational unit direction.
fn stl_velocity() -> impl Strategy<Value = Velocity<Rat>> {
    (0i64..40, 41i64..60, any::<u64>()).prop_map(|(p, q, seed)| {
        let t = Rat::new(p, q);
        let v = pythagorean_velocity(&t, &Rat::int(1)).unwrap().v;
        let dir = rational_unit_vector(&mut ChaCha8Rng::seed_from_u64(seed));
        dir.scale(&v)
    })
}

fn to_f64_map(m: &AffineMap4<Rat>) -> AffineMap4<f64> {
    m.map_scalars(|x| x.to_f64())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn field_laws(a in rat(), b in rat(), c in rat()) {
        prop_assert_eq!((a.clone() + b.clone()) + c.clone(), a.clone() + (b.clone() + c.clone()));
        prop_assert_eq!(a.clone() * (b.clone() + c.clone()), a.clone() * b.clone() + a.clone() * c.clone());
        prop_assert_eq!(a.clone() + b.clone(), b.clone() + a.clone());
        if !a.is_zero() {
            prop_assert_eq!(a.clone() * a.inv().unwrap(), Rat::one());
        }
    }

    #[test]
    fn pythagorean_speeds_have_rational_contraction(p in 0i64..200, q in 201i64..400, c in 1i64..9) {
        let c = Rat::int(c);
        let pv = pythagorean_velocity(&Rat::new(p, q), &c).unwrap();
        prop_assert_eq!(gamma_inv(&pv.v, &c).unwrap(), pv.gamma_inv.clone());
        prop_assert_eq!(pv.v.square().div(&c.square()).unwrap() + pv.gamma_inv.square(), Rat::one());
    }

    #[test]
    fn float_backend_tracks_exact_radarization(v in stl_velocity()) {
        let c = Rat::int(1);
        let exact = to_f64_map(&radarization(&v, &c).unwrap());
        let approx = radarization(&v.map(|x| x.to_f64()), &1.0).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let (e, a) = (exact.linear[i][j], approx.linear[i][j]);
                prop_assert!((e - a).abs() <= 1e-12 * e.abs().max(1.0), "{} vs {}", e, a);
            }
        }
    }

    #[test]
    fn space_sq_is_symmetric(x in event(), y in event()) {
        let d = space_sq(&x, &y);
        prop_assert_eq!(d.clone(), space_sq(&y, &x));
        prop_assert!(d >= Rat::zero());
    }

    #[test]
    fn cones_move_with_their_apex(x in event(), apex in event(), shift in event(), v in stl_velocity()) {
        let c = Rat::int(1);
        let cone = LightCone::new(apex.clone(), v.clone(), c.clone()).unwrap();
        let moved = LightCone::new(&apex + &shift, v, c).unwrap();
        prop_assert_eq!(on_cone(&x, &cone), on_cone(&(&x + &shift), &moved));
    }

    #[test]
    fn inverse_composes_to_identity(v in stl_velocity(), seed in any::<u64>()) {
        let c = Rat::int(1);
        let mut g = ChaCha8Rng::seed_from_u64(seed);
        for m in [
            radarization_closed(&v, &c).unwrap(),
            galilean_boost(&v),
            x_map(&v, &c).unwrap(),
            y_map(&v, &c).unwrap(),
            random_trivial(&mut g),
        ] {
            prop_assert!(m.inverse().unwrap().compose(&m).is_identity());
        }
    }

    #[test]
    fn radarization_forms_agree(v in stl_velocity()) {
        let c = Rat::int(1);
        let rad = radarization(&v, &c).unwrap();
        prop_assert_eq!(&rad, &radarization_closed(&v, &c).unwrap());
        // the ether frame becomes a relativistic frame; Galilean ones stay Galilean only at rest
        prop_assert_eq!(classify(&rad, &c).galilean, v.is_zero());
    }
}

/// Collinearity oracle: the two difference vectors span at most a line.
fn rank_at_most_one(u: [i64; 4], w: [i64; 4]) -> bool {
    (0..4).all(|i| (0..4).all(|j| u[i] * w[j] == u[j] * w[i]))
}

#[test]
fn collinear_matches_rank_oracle_on_grid() {
    let grid: Vec<[i64; 4]> = (0..81).map(|n| [n % 3 - 1, n / 3 % 3 - 1, n / 9 % 3 - 1, n / 27 - 1]).collect();
    let ev = |p: &[i64; 4]| Event::<Rat>::from_ints(*p);
    let diff = |a: &[i64; 4], b: &[i64; 4]| std::array::from_fn::<i64, 4, _>(|i| b[i] - a[i]);
    let x = &grid[40];
    for y in &grid {
        for z in &grid {
            let expected = rank_at_most_one(diff(x, y), diff(x, z));
            assert_eq!(collinear(&ev(x), &ev(y), &ev(z)), expected, "{x:?} {y:?} {z:?}");
        }
    }
    // a few triples away from the centre as well
    for (a, b, c) in [(0, 1, 2), (0, 4, 8), (3, 40, 77), (5, 13, 80), (1, 2, 4)] {
        let expected = rank_at_most_one(diff(&grid[a], &grid[b]), diff(&grid[a], &grid[c]));
        assert_eq!(collinear(&ev(&grid[a]), &ev(&grid[b]), &ev(&grid[c])), expected);
    }
}

fn formula() -> impl Strategy<Value = Formula> {
    let atoms = prop_oneof![
        Just("(IOb k)"),
        Just("(Ph b)"),
        Just("(W k b (pt x y z t))"),
        Just("(= (+ x y) z)"),
        Just("(< x (* y 2))"),
        Just("(= k b)"),
    ]
    .prop_map(|s| parse(s).unwrap());
    atoms.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| parse(&format!("(not {a})")).unwrap()),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| parse(&format!("(and {a} {b})")).unwrap()),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| parse(&format!("(or {a} {b})")).unwrap()),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| parse(&format!("(-> {a} {b})")).unwrap()),
            inner.clone().prop_map(|a| parse(&format!("(forall ((x Q)) {a})")).unwrap()),
            inner.clone().prop_map(|a| parse(&format!("(exists ((b B)) {a})")).unwrap()),
            inner.prop_map(|a| parse(&format!("(forall-in ((k IOb)) {a})")).unwrap()),
        ]
    })
}

fn contains(f: &Formula, pred: &dyn Fn(&Formula) -> bool) -> bool {
    let mut found = false;
    f.visit(&mut |g| found |= pred(g));
    found
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printing_then_parsing_is_identity(f in formula()) {
        prop_assert_eq!(parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn expansion_is_idempotent(f in formula()) {
        let once = expand_macros(&f);
        prop_assert_eq!(expand_macros(&once), once);
    }

    #[test]
    fn translators_commute_with_connectives(a in formula(), b in formula()) {
        for t in TrKind::ALL {
            let both = Formula::and(vec![a.clone(), b.clone()]);
            let whole = translate(t, &both).unwrap();
            let parts = Formula::and(vec![translate(t, &a).unwrap(), translate(t, &b).unwrap()]);
            prop_assert_eq!(alpha_normalize(&whole), alpha_normalize(&parts));
            let neg = translate(t, &Formula::not(a.clone())).unwrap();
            prop_assert_eq!(alpha_normalize(&neg), alpha_normalize(&Formula::not(translate(t, &a).unwrap())));
        }
    }

    #[test]
    fn relativistic_translations_never_mention_e(f in formula()) {
        for t in [TrKind::Tr, TrKind::TrPlus] {
            let g = translate(t, &f).unwrap();
            prop_assert!(!g.mentions_e());
        }
        let g = translate(TrKind::TrPlusInv, &f).unwrap();
        prop_assert!(!contains(&g, &|x| matches!(x, Formula::Ether(_))));
    }
}

#[test]
fn catalog_round_trips_through_the_printer() {
    for name in axiom_names() {
        let f = axiom(name).unwrap();
        assert_eq!(parse(&f.to_string()).unwrap(), f, "{name}");
        let e = expand_macros(&f);
        assert_eq!(expand_macros(&e), e, "{name}");
    }
    assert!(Translator::from_name("tr*∘tr+").is_some());
}
