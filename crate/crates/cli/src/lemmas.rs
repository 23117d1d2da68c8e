//! Property suites for the coordinate maps behind the translations: the
//! radarization, its conjugation of worldview transformations in both
//! directions, transport of trivial transformations, the faster-than-light
//! maps `X`/`Y`, and the ether predicates and velocities under translation.
//!
//! Instances are drawn in exact rationals from a seeded generator and then
//! evaluated in the selected backend, so both backends see the same inputs.

use kinlog_core::logic::{Formula, TrKind};
use kinlog_core::models::{
    build_model, check_velocity_remap, composed_spec, random_trivial, rational_unit_vector, standard_spec, Evaluator,
    ModelSpec, TheoryTag, Truth, Val,
};
use kinlog_core::scalar::{pythagorean_velocity, Rat, Scalar};
use kinlog_core::spacetime::{on_cone, Event, LightCone, Velocity};
use kinlog_core::transforms::{
    boost_to_rest, classify, ftl_of_stl, galilean_to_rest, radarization, stl_of_ftl, x_map, y_map, AffineMap4,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::report::{Case, SuiteReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Exact,
    F64,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::Exact => "exact",
            Field::F64 => "f64",
        }
    }

    pub fn from_name(s: &str) -> Option<Field> {
        match s {
            "exact" => Some(Field::Exact),
            "f64" => Some(Field::F64),
            _ => None,
        }
    }
}

pub const SUITES: [&str; 7] = ["rad", "cannon", "mosquito", "trivial-transport", "xy", "tr-ether", "velocity-remap"];

/// Runs the suite named `filter`, or the cases whose names start with it. `budget` is the number of sampled instances per case.
pub fn check_lemmas(filter: Option<&str>, seed: u64, budget: usize, field: Field) -> Result<SuiteReport, String> {
    let start = std::time::Instant::now();
    let wanted: Vec<&str> = SUITES
        .iter()
        .copied()
        .filter(|s| filter.is_none_or(|f| *s == f || case_names(s).iter().any(|c| c.starts_with(f))))
        .collect();
    if wanted.is_empty() {
        return Err(format!("no suite matches {:?}; suites are {}", filter.unwrap_or(""), SUITES.join(", ")));
    }
    let suite_cases: Vec<Vec<Case>> = std::thread::scope(|s| {
        let handles: Vec<_> = wanted
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let seed = seed.wrapping_add(i as u64 * 0x9e37_79b9);
                s.spawn(move || run_suite(name, seed, budget, field))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("suite panicked")).collect()
    });
    let mut report = SuiteReport::new("check-lemmas", field.name(), seed, budget);
    for (name, cases) in wanted.iter().zip(suite_cases) {
        let keep_all = filter.is_none_or(|f| *name == f);
        report.cases.extend(cases.into_iter().filter(|c| keep_all || filter.is_some_and(|f| c.name.starts_with(f))));
    }
    report.wall = start.elapsed();
    Ok(report)
}

fn case_names(suite: &str) -> &'static [&'static str] {
    match suite {
        "rad" => &["rad-bijection", "rad-time-axis", "rad-time-scale", "rad-cone", "rad-perp", "rad-velocity-line"],
        "cannon" => &["cannon-poincare", "cannon-ether-choice"],
        "mosquito" => &["mosquito-galilean", "mosquito-ether-choice"],
        "trivial-transport" => &["transport-rad", "transport-rad-inv", "transport-x", "transport-y"],
        "xy" => &["xy-inverse", "xy-compose-identity", "xy-speed-round-trip"],
        _ => &[],
    }
}

fn run_suite(name: &str, seed: u64, n: usize, field: Field) -> Vec<Case> {
    let mut g = ChaCha8Rng::seed_from_u64(seed);
    match (name, field) {
        ("rad", Field::Exact) => rad_suite::<Rat>(&mut g, n),
        ("rad", Field::F64) => rad_suite::<f64>(&mut g, n),
        ("cannon", Field::Exact) => cannon_suite::<Rat>(&mut g, n),
        ("cannon", Field::F64) => cannon_suite::<f64>(&mut g, n),
        ("mosquito", Field::Exact) => mosquito_suite::<Rat>(&mut g, n),
        ("mosquito", Field::F64) => mosquito_suite::<f64>(&mut g, n),
        ("trivial-transport", Field::Exact) => transport_suite::<Rat>(&mut g, n),
        ("trivial-transport", Field::F64) => transport_suite::<f64>(&mut g, n),
        ("xy", Field::Exact) => xy_suite::<Rat>(&mut g, n),
        ("xy", Field::F64) => xy_suite::<f64>(&mut g, n),
        ("tr-ether", _) => tr_ether_suite(seed, n),
        ("velocity-remap", _) => velocity_remap_suite(seed, n),
        _ => unreachable!("registered suite"),
    }
}

// ---------------------------------------------------------------------------
// sampling

fn small(g: &mut impl Rng) -> Rat {
    Rat::new(g.random_range(-40..=40), g.random_range(1..=12))
}

fn event(g: &mut impl Rng) -> Event<Rat> {
    Event(std::array::from_fn(|_| small(g)))
}

fn nonzero(g: &mut impl Rng) -> Rat {
    loop {
        let r = small(g);
        if !r.is_zero() {
            return r;
        }
    }
}

/// A slower-than-light velocity with rational speed and contraction factor.
struct Stl {
    v: Velocity<Rat>,
    c: Rat,
    /// `sqrt(1 - |v|²/c²)`, from the parametrisation
    contraction: Rat,
}

fn stl(g: &mut impl Rng) -> Stl {
    let c = [Rat::int(1), Rat::int(1), Rat::int(3), Rat::new(1, 2)][g.random_range(0..4)].clone();
    let t = Rat::new(g.random_range(0..=60), 61);
    let pv = pythagorean_velocity(&t, &c).expect("parameter below 1");
    Stl { v: rational_unit_vector(g).scale(&pv.v), c, contraction: pv.gamma_inv }
}

/// The list every rad case walks: rest first, then sampled velocities.
fn stl_list(g: &mut impl Rng, n: usize) -> Vec<Stl> {
    let mut out: Vec<Stl> = (0..n).map(|_| stl(g)).collect();
    if let Some(first) = out.first_mut() {
        *first = Stl { v: Velocity::zero(), c: Rat::int(1), contraction: Rat::int(1) };
    }
    out
}

fn lift<S: Scalar>(r: &Rat) -> S {
    S::from_rat(r)
}

fn lift_v<S: Scalar>(v: &Velocity<Rat>) -> Velocity<S> {
    v.map(lift)
}

fn lift_e<S: Scalar>(x: &Event<Rat>) -> Event<S> {
    x.map(lift)
}

fn lift_m<S: Scalar>(m: &AffineMap4<Rat>) -> AffineMap4<S> {
    m.map_scalars(lift)
}

fn show_v(v: &Velocity<Rat>) -> String {
    format!("{v}")
}

// ---------------------------------------------------------------------------
// radarization

fn rad_suite<S: Scalar>(g: &mut impl Rng, n: usize) -> Vec<Case> {
    let vels = stl_list(g, n);
    let mut bij = Case::tally("rad-bijection");
    let mut axis = Case::tally("rad-time-axis");
    let mut scale = Case::tally("rad-time-scale");
    let mut cone = Case::tally("rad-cone");
    let mut perp = Case::tally("rad-perp");
    let mut line = Case::tally("rad-velocity-line");
    let mut cone_points = 0;
    for s in &vels {
        let (v, c): (Velocity<S>, S) = (lift_v(&s.v), lift(&s.c));
        let desc = || json!({ "velocity": show_v(&s.v), "c": s.c.to_string() });
        let Ok(rad) = radarization(&v, &c) else {
            for case in [&mut bij, &mut axis, &mut scale, &mut cone, &mut perp, &mut line] {
                case.record(None, desc);
            }
            continue;
        };
        let inv = rad.inverse().ok();

        // linear, invertible, identity at rest
        let ok = rad.is_linear()
            && inv.as_ref().is_some_and(|i| i.compose(&rad).is_identity() && rad.compose(i).is_identity())
            && (!s.v.is_zero() || rad.is_identity());
        bij.record(Some(ok), desc);

        // x on the time axis iff Rad(x) on it
        let t: S = lift(&nonzero(g));
        let on = rad.apply(&Event::on_time_axis(t.clone())).spatial().is_zero();
        let back = inv.as_ref().is_some_and(|i| i.apply(&Event::on_time_axis(t.clone())).spatial().is_zero());
        let mut off_pt = Event::on_time_axis(t);
        off_pt.0[1 + g.random_range(0..3)] = lift(&nonzero(g));
        let off = !rad.apply(&off_pt).spatial().is_zero();
        axis.record(Some(on && back && off), desc);

        // Rad(1,0,0,0) = (sqrt(1 - v²/c²), 0, 0, 0)
        let img = rad.apply(&Event::basis(0));
        scale.record(Some(img.near(&Event::on_time_axis(lift(&s.contraction)))), || {
            json!({ "velocity": show_v(&s.v), "c": s.c.to_string(), "image": format!("{img}") })
        });

        // cones moving with v become right cones
        let mut all = true;
        for _ in 0..4 {
            let apex = event(g);
            let dt = nonzero(g);
            let dir = rational_unit_vector(g);
            let reach = dir.scale(&(s.c.clone() * dt.clone().abs()));
            let spatial = &s.v.scale(&dt) + &reach;
            let x = Event::new(apex.0[0].clone() + dt, apex.0[1].clone() + spatial.0[0].clone(), apex.0[2].clone() + spatial.0[1].clone(), apex.0[3].clone() + spatial.0[2].clone());
            let (ax, xs): (Event<S>, Event<S>) = (lift_e(&apex), lift_e(&x));
            let moving = LightCone::new(ax.clone(), v.clone(), c.clone()).expect("positive c");
            let right = LightCone::right(rad.apply(&ax), c.clone()).expect("positive c");
            all &= on_cone(&xs, &moving) && on_cone(&rad.apply(&xs), &right);
            cone_points += 1;
        }
        cone.record(Some(all), desc);

        // spatial vectors orthogonal to v are fixed
        let r = Velocity::new(small(g), small(g), small(g));
        let w = if s.v.is_zero() { r } else { cross(&s.v, &r) };
        let x: Event<S> = lift_e(&Event::new(Rat::int(0), w.0[0].clone(), w.0[1].clone(), w.0[2].clone()));
        perp.record(Some(rad.apply(&x).near(&x)), desc);

        // the line through the origin moving with v, and its parallels
        let t: S = lift(&nonzero(g));
        let on_line = v.at_time(&t);
        let img = rad.apply(&on_line);
        let through = img.spatial().near(&v.scale(img.t()));
        let a: Event<S> = lift_e(&event(g));
        let d = &rad.apply(&(&a + &on_line)) - &rad.apply(&a);
        let parallel = d.spatial().near(&v.scale(d.t())) && !d.t().near_zero();
        line.record(Some(through && parallel), desc);
    }
    vec![
        bij.finish("linear bijection, identity at rest"),
        axis.finish("time axis maps onto the time axis"),
        scale.finish("Rad(1,0,0,0) = (sqrt(1 - v²/c²), 0, 0, 0)"),
        cone.finish(format!("{cone_points} points on cones moving with v land on right cones")),
        perp.finish("vectors orthogonal to t and v are fixed"),
        line.finish("velocity-v lines map to themselves and parallels to parallels"),
    ]
}

fn cross(a: &Velocity<Rat>, b: &Velocity<Rat>) -> Velocity<Rat> {
    let [a1, a2, a3] = &a.0;
    let [b1, b2, b3] = &b.0;
    Velocity::new(
        a2.clone() * b3.clone() - a3.clone() * b2.clone(),
        a3.clone() * b1.clone() - a1.clone() * b3.clone(),
        a1.clone() * b2.clone() - a2.clone() * b1.clone(),
    )
}

// ---------------------------------------------------------------------------
// worldview transformations conjugated by Rad

/// Velocity of `e`'s worldline in the coordinates of frame `fk`.
fn seen<S: Scalar>(fk: &AffineMap4<S>, fe: &AffineMap4<S>) -> Option<Velocity<S>> {
    let inv = fe.inverse().ok()?;
    let a = fk.apply(&inv.apply(&Event::origin()));
    let b = fk.apply(&inv.apply(&Event::basis(0)));
    let d = &b - &a;
    Some(d.spatial().scale(&d.t().inv().ok()?))
}

struct Scene {
    c: Rat,
    /// two members of the ether roster
    ethers: [AffineMap4<Rat>; 2],
    k: AffineMap4<Rat>,
    h: AffineMap4<Rat>,
}

/// Two observers moving with Pythagorean speeds against the ether, oriented
/// and placed by random trivial transformations, and a second ether
/// observer. `relativistic` picks Lorentz rather than Galilean frames.
fn scene(g: &mut impl Rng, relativistic: bool) -> Scene {
    let c = [Rat::int(1), Rat::int(2)][g.random_range(0..2)].clone();
    let frame = |g: &mut ChaCha8Rng| {
        let t = Rat::new(g.random_range(0..=40), 41);
        let u = rational_unit_vector(g).scale(&pythagorean_velocity(&t, &c).expect("below 1").v);
        let rest = if relativistic { boost_to_rest(&u, &c).expect("slower than light") } else { galilean_to_rest(&u) };
        random_trivial(g).compose(&rest).compose(&AffineMap4::translation(event(g)))
    };
    let mut inner = ChaCha8Rng::seed_from_u64(g.random());
    let k = frame(&mut inner);
    let h = frame(&mut inner);
    let other = random_trivial(&mut inner);
    Scene { c, ethers: [AffineMap4::identity(), other], k, h }
}

fn cannon_suite<S: Scalar>(g: &mut impl Rng, n: usize) -> Vec<Case> {
    let mut poincare = Case::tally("cannon-poincare");
    let mut choice = Case::tally("cannon-ether-choice");
    for _ in 0..n {
        let sc = scene(g, false);
        let c: S = lift(&sc.c);
        let (k, h): (AffineMap4<S>, AffineMap4<S>) = (lift_m(&sc.k), lift_m(&sc.h));
        // w_hk: h coordinates to k coordinates
        let w = k.compose(&h.inverse().expect("frame"));
        let image = |e: &AffineMap4<Rat>| -> Option<AffineMap4<S>> {
            let e: AffineMap4<S> = lift_m(e);
            let rk = radarization(&seen(&k, &e)?, &c).ok()?;
            let rh = radarization(&seen(&h, &e)?, &c).ok()?;
            Some(rk.compose(&w).compose(&rh.inverse().ok()?))
        };
        let (a, b) = (image(&sc.ethers[0]), image(&sc.ethers[1]));
        let desc = || json!({ "k": format!("{:?}", sc.k), "h": format!("{:?}", sc.h), "c": sc.c.to_string() });
        let galilean_in = classify(&w, &c).galilean;
        poincare.record(a.as_ref().map(|m| galilean_in && classify(m, &c).poincare), desc);
        choice.record(a.as_ref().zip(b.as_ref()).map(|(x, y)| x.near(y)), desc);
    }
    vec![
        poincare.finish("Rad_v ∘ w ∘ Rad_u⁻¹ is Poincaré for Galilean w"),
        choice.finish("same map from two ether observers"),
    ]
}

fn mosquito_suite<S: Scalar>(g: &mut impl Rng, n: usize) -> Vec<Case> {
    let mut galilean = Case::tally("mosquito-galilean");
    let mut choice = Case::tally("mosquito-ether-choice");
    for _ in 0..n {
        let sc = scene(g, true);
        let c: S = lift(&sc.c);
        let (k, h): (AffineMap4<S>, AffineMap4<S>) = (lift_m(&sc.k), lift_m(&sc.h));
        // w_kh: k coordinates to h coordinates
        let w = h.compose(&k.inverse().expect("frame"));
        let image = |e: &AffineMap4<Rat>| -> Option<AffineMap4<S>> {
            let e: AffineMap4<S> = lift_m(e);
            let rk = radarization(&seen(&k, &e)?, &c).ok()?;
            let rh = radarization(&seen(&h, &e)?, &c).ok()?;
            Some(rh.inverse().ok()?.compose(&w).compose(&rk))
        };
        let (a, b) = (image(&sc.ethers[0]), image(&sc.ethers[1]));
        let desc = || json!({ "k": format!("{:?}", sc.k), "h": format!("{:?}", sc.h), "c": sc.c.to_string() });
        let poincare_in = classify(&w, &c).poincare;
        galilean.record(a.as_ref().map(|m| poincare_in && classify(m, &c).galilean), desc);
        choice.record(a.as_ref().zip(b.as_ref()).map(|(x, y)| x.near(y)), desc);
    }
    vec![
        galilean.finish("Rad_v⁻¹ ∘ w ∘ Rad_u is Galilean for Poincaré w"),
        choice.finish("same map from two primitive ether observers"),
    ]
}

// ---------------------------------------------------------------------------
// trivial transformations

fn transport_suite<S: Scalar>(g: &mut impl Rng, n: usize) -> Vec<Case> {
    let mut cases = [
        Case::tally("transport-rad"),
        Case::tally("transport-rad-inv"),
        Case::tally("transport-x"),
        Case::tally("transport-y"),
    ];
    for _ in 0..n {
        let t_lin = random_trivial(g).linear_part();
        let z = event(g);
        let s = stl(g);
        let decade = g.random_range(-2..2);
        let big = ftl_velocity(g, decade);
        let rotate = |v: &Velocity<Rat>| t_lin.apply_linear(&Event::new(Rat::int(0), v.0[0].clone(), v.0[1].clone(), v.0[2].clone())).spatial();
        let c: S = lift(&s.c);
        let tl: AffineMap4<S> = lift_m(&t_lin);
        let zs: Event<S> = lift_e(&z);
        let w = AffineMap4::translation(zs.clone()).compose(&tl);
        let (u, uk): (Velocity<S>, Velocity<S>) = (lift_v(&s.v), lift_v(&rotate(&s.v)));
        let (bu, buk): (Velocity<S>, Velocity<S>) = (lift_v(&big), lift_v(&rotate(&big)));
        // conjugate w by (outer, inner) and compare with translation by outer(z) after T
        let check = |outer: Option<AffineMap4<S>>, inner: Option<AffineMap4<S>>| -> Option<bool> {
            let (outer, inner) = (outer?, inner?);
            let lhs = outer.compose(&w).compose(&inner.inverse().ok()?);
            let rhs = AffineMap4::translation(outer.apply(&zs)).compose(&tl);
            Some(lhs.near(&rhs) && classify(&lhs, &c).trivial)
        };
        let rad = |v: &Velocity<S>| radarization(v, &c).ok();
        let rad_inv = |v: &Velocity<S>| radarization(v, &c).ok().and_then(|m| m.inverse().ok());
        let results = [
            check(rad(&uk), rad(&u)),
            check(rad_inv(&uk), rad_inv(&u)),
            check(x_map(&buk, &c).ok(), x_map(&bu, &c).ok()),
            check(y_map(&uk, &c).ok(), y_map(&u, &c).ok()),
        ];
        for (case, r) in cases.iter_mut().zip(results) {
            case.record(r, || json!({ "T": format!("{t_lin:?}"), "z": format!("{z}"), "v": show_v(&s.v), "V": show_v(&big), "c": s.c.to_string() }));
        }
    }
    let [a, b, x, y] = cases;
    vec![
        a.finish("Rad conjugation keeps T and moves the translation to Rad(z)"),
        b.finish("Rad⁻¹ conjugation keeps T and moves the translation to Rad⁻¹(z)"),
        x.finish("X conjugation keeps T and moves the translation to X(z)"),
        y.finish("Y conjugation keeps T and moves the translation to Y(z)"),
    ]
}

// ---------------------------------------------------------------------------
// faster-than-light maps

/// A velocity of rational norm whose magnitude is drawn from one of four
/// decades, `[1/100, 1/10)` up to `[10, 100)`.
fn ftl_velocity(g: &mut impl Rng, decade: i32) -> Velocity<Rat> {
    let mantissa = Rat::new(g.random_range(100..1000), 100);
    let scale = if decade >= 0 { Rat::int(10i64.pow(decade as u32)) } else { Rat::new(1, 10i64.pow((-decade) as u32)) };
    rational_unit_vector(g).scale(&(mantissa * scale))
}

fn xy_suite<S: Scalar>(g: &mut impl Rng, n: usize) -> Vec<Case> {
    let mut inverse = Case::tally("xy-inverse");
    let mut identity = Case::tally("xy-compose-identity");
    let mut round = Case::tally("xy-speed-round-trip");
    let (mut lo, mut hi) = (None::<Rat>, None::<Rat>);
    for i in 0..n {
        let big_r = ftl_velocity(g, (i % 4) as i32 - 2);
        let norm = big_r.norm_sq();
        lo = Some(lo.map_or(norm.clone(), |x| if norm < x { norm.clone() } else { x }));
        hi = Some(hi.map_or(norm.clone(), |x| if norm > x { norm.clone() } else { x }));
        let c_r = [Rat::int(1), Rat::int(3), Rat::new(1, 4)][g.random_range(0..3)].clone();
        let (big, c): (Velocity<S>, S) = (lift_v(&big_r), lift(&c_r));
        let desc = || json!({ "V": show_v(&big_r), "c": c_r.to_string() });
        let small_v = stl_of_ftl(&big, &c).ok();
        let x = x_map(&big, &c).ok();
        let y = small_v.as_ref().and_then(|v| y_map(v, &c).ok());
        inverse.record(x.as_ref().zip(y.as_ref()).and_then(|(x, y)| Some(x.inverse().ok()?.near(y))), desc);
        identity.record(x.as_ref().zip(y.as_ref()).map(|(x, y)| x.compose(y).is_identity() && y.compose(x).is_identity()), desc);
        // V -> v -> V, and a slower-than-light v -> V -> v
        let s = stl(g);
        let (v2, c2): (Velocity<S>, S) = (lift_v(&s.v), lift(&s.c));
        let there = small_v.as_ref().and_then(|v| ftl_of_stl(v, &c).ok()).map(|back| back.near(&big));
        let back = ftl_of_stl(&v2, &c2).ok().and_then(|bv| stl_of_ftl(&bv, &c2).ok()).map(|v| v.near(&v2));
        round.record(there.zip(back).map(|(a, b)| a && b), desc);
    }
    let range = match (lo, hi) {
        (Some(lo), Some(hi)) => format!(", |V| from {:.4} to {:.2}", lo.to_f64().sqrt(), hi.to_f64().sqrt()),
        _ => String::new(),
    };
    vec![
        inverse.finish(format!("X_V⁻¹ = Y_v with v = cV/(1+|V|){range}")),
        identity.finish("X_V ∘ Y_v and Y_v ∘ X_V are the identity"),
        round.finish("V ↦ cV/(1+|V|) and v ↦ v/(c-|v|) are mutually inverse"),
    ]
}

// ---------------------------------------------------------------------------
// ether predicates and velocities under translation

fn seeded(mut spec: ModelSpec, seed: u64) -> ModelSpec {
    spec.seed = seed;
    spec
}

fn tr_ether_suite(seed: u64, n: usize) -> Vec<Case> {
    let ether = |b: &str| Formula::Ether(b.to_string());
    let e = |b: &str| Formula::E(b.to_string());
    let setups: [(&str, ModelSpec, TrKind, fn(&str) -> Formula, fn(&str) -> Formula); 5] = [
        ("tr-ether tr* on CK", standard_spec(TheoryTag::Ck), TrKind::TrStar, ether, ether),
        ("tr-ether tr* on CK with FTL observers", composed_spec(), TrKind::TrStar, ether, ether),
        ("tr-ether tr*inv on CK-STL", standard_spec(TheoryTag::CkStl), TrKind::TrStarInv, ether, ether),
        ("tr-ether tr+inv on SR-e", standard_spec(TheoryTag::SrE), TrKind::TrPlusInv, ether, e),
        ("tr-ether tr+ on CK-STL", standard_spec(TheoryTag::CkStl), TrKind::TrPlus, e, ether),
    ];
    let mut out = Vec::new();
    for (name, spec, t, source, base) in setups {
        let m = build_model(&seeded(spec, seed)).expect("standard specs build");
        let mut ev = Evaluator::new(&m, 64, seed);
        let mut case = Case::tally(name);
        let mut ethers = 0;
        for b in m.bodies.iter().take(n) {
            let bind = [("b".to_string(), Val::Body(b.id))];
            let translated = Formula::Trans(t, Box::new(source("b")));
            let (x, _) = ev.evaluate(&translated, &bind);
            let (y, _) = ev.evaluate(&base("b"), &bind);
            ethers += usize::from(y == Truth::True);
            let ok = match (x, y) {
                (Truth::Unknown, _) | (_, Truth::Unknown) => None,
                (x, y) => Some(x == y),
            };
            case.record(ok, || json!({ "body": b.name, "translated": format!("{x:?}"), "base": format!("{y:?}") }));
        }
        let shown = format!("{}", Formula::Trans(t, Box::new(source("b"))));
        out.push(case.finish(format!("{shown} ↔ {} on every body, {ethers} satisfy it", base("b"))));
    }
    out
}

fn velocity_remap_suite(seed: u64, n: usize) -> Vec<Case> {
    let setups: [(&str, ModelSpec, &str); 5] = [
        ("velocity-remap tr* on CK with FTL observers", composed_spec(), "tr*"),
        ("velocity-remap tr*inv on CK-STL", standard_spec(TheoryTag::CkStl), "tr*inv"),
        ("velocity-remap tr+ on CK-STL", standard_spec(TheoryTag::CkStl), "tr+"),
        ("velocity-remap tr on CK", standard_spec(TheoryTag::Ck), "tr"),
        ("velocity-remap tr+inv on SR-e", standard_spec(TheoryTag::SrE), "tr+inv"),
    ];
    let mut out = Vec::new();
    for (name, spec, t) in setups {
        let m = build_model(&seeded(spec, seed)).expect("standard specs build");
        let r = check_velocity_remap(&m);
        let mut case = Case::tally(name);
        let rows = r.rows.iter().filter(|row| row.translator == t);
        let inexact = r.inexact.iter().filter(|(_, tt)| tt == t).count();
        for row in rows.take(n) {
            case.record(Some(row.ok), || {
                json!({
                    "observer": row.observer,
                    "before": format!("{}", row.before),
                    "after": row.after.as_ref().map(|v| format!("{v}")),
                    "expected": row.expected.as_ref().map(|v| format!("{v}")),
                })
            });
        }
        for _ in 0..inexact.min(n.saturating_sub(case.samples)) {
            case.record(None, || Value::Null);
        }
        let rule = match t {
            "tr*" => "ether velocity V seen as cV/(1+|V|)",
            "tr*inv" => "ether velocity v seen as v/(c-|v|)",
            _ => "ether velocity unchanged",
        };
        out.push(case.finish(rule));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Status;

    #[test]
    fn small_budget_runs_every_suite() {
        let r = check_lemmas(None, 3, 4, Field::Exact).unwrap();
        assert!(r.all_pass(), "{}", r.table());
        let names: Vec<&str> = r.cases.iter().map(|c| c.name.as_str()).collect();
        for s in ["rad", "cannon", "mosquito", "trivial-transport", "xy"] {
            for c in case_names(s) {
                assert!(names.contains(c), "{c}");
            }
        }
    }

    #[test]
    fn empty_budget_decides_nothing() {
        let r = check_lemmas(None, 3, 0, Field::Exact).unwrap();
        assert!(r.cases.iter().all(|c| c.status == Status::Unknown));
        assert_eq!(r.exit_code(), crate::report::EXIT_UNKNOWN);
    }

    #[test]
    fn filters_select_suites_and_cases() {
        let r = check_lemmas(Some("xy"), 1, 3, Field::Exact).unwrap();
        assert_eq!(r.cases.len(), 3);
        let r = check_lemmas(Some("rad-perp"), 1, 3, Field::Exact).unwrap();
        assert_eq!(r.cases.len(), 1);
        let r = check_lemmas(Some("rad"), 1, 3, Field::Exact).unwrap();
        assert!(r.cases.iter().all(|c| c.name.starts_with("rad-")) && r.cases.len() == 6);
        let r = check_lemmas(Some("transport"), 1, 3, Field::Exact).unwrap();
        assert_eq!(r.cases.len(), 4);
        assert!(check_lemmas(Some("nonsense"), 1, 3, Field::Exact).is_err());
    }

    #[test]
    fn float_backend_agrees_on_small_samples() {
        let r = check_lemmas(Some("rad"), 5, 10, Field::F64).unwrap();
        assert!(r.all_pass(), "{}", r.table());
        assert_eq!(r.backend, "f64");
    }

    #[test]
    fn cross_product_is_orthogonal() {
        let a = Velocity::new(Rat::int(1), Rat::int(2), Rat::int(3));
        let b = Velocity::new(Rat::int(-4), Rat::new(1, 2), Rat::int(0));
        let c = cross(&a, &b);
        assert!(c.dot(&a).is_zero() && c.dot(&b).is_zero());
        assert_eq!(c, Velocity::new(Rat::new(-3, 2), Rat::int(-12), Rat::new(17, 2)));
    }
}
