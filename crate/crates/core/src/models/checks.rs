//! Verdict-level checks built on the evaluator: single formulas, translated
//! axiom sets, atom round trips, ether velocity remapping, model
//! transformation and the corollary facts every model must satisfy.
//!
//! `holds-on-samples` is a falsification-failure verdict: no counterexample
//! was found within the sample budget. It is not a proof.

use rand::Rng;
use serde::Serialize;

use super::eval::{Cex, Evaluator, Truth, Val};
use super::num::Num;
use super::random::{pool_value, rng};
use super::view::{base_view, derive, ether_velocity, seen_velocity};
use super::{validate, Body, Model, ModelError, TheoryTag};
use crate::logic::{theory, Formula, Point, Theory, TrKind};
use crate::scalar::Rat;
use crate::spacetime::{Event, Velocity};
use crate::transforms::{classify, ftl_of_stl, radarization_closed, stl_of_ftl};
use crate::translate::{check_signature, Translator};

#[derive(Clone, Debug)]
pub struct EvalOptions {
    /// quantity samples per universal block
    pub budget: usize,
    pub seed: u64,
}

impl Default for EvalOptions {
    fn default() -> EvalOptions {
        EvalOptions { budget: 10_000, seed: 7 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    HoldsOnSamples,
    Fails,
    Unknown,
}

impl Verdict {
    pub fn of(t: Truth) -> Verdict {
        match t {
            Truth::True => Verdict::HoldsOnSamples,
            Truth::False => Verdict::Fails,
            Truth::Unknown => Verdict::Unknown,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::HoldsOnSamples => "holds-on-samples",
            Verdict::Fails => "fails",
            Verdict::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EvalResult {
    pub verdict: Verdict,
    pub counterexample: Option<Cex>,
    pub samples: usize,
}

fn strip_translated(f: &Formula) -> Formula {
    let rec = |xs: &[Formula]| xs.iter().map(strip_translated).collect();
    match f {
        Formula::Trans(..) => Formula::True,
        Formula::Not(a) => Formula::Not(Box::new(strip_translated(a))),
        Formula::And(xs) => Formula::And(rec(xs)),
        Formula::Or(xs) => Formula::Or(rec(xs)),
        Formula::Implies(a, b) => Formula::Implies(Box::new(strip_translated(a)), Box::new(strip_translated(b))),
        Formula::Iff(a, b) => Formula::Iff(Box::new(strip_translated(a)), Box::new(strip_translated(b))),
        Formula::Forall(bs, a) => Formula::Forall(bs.clone(), Box::new(strip_translated(a))),
        Formula::Exists(bs, a) => Formula::Exists(bs.clone(), Box::new(strip_translated(a))),
        Formula::ForallIn(bs, a) => Formula::ForallIn(bs.clone(), Box::new(strip_translated(a))),
        Formula::ExistsIn(bs, a) => Formula::ExistsIn(bs.clone(), Box::new(strip_translated(a))),
        atom => atom.clone(),
    }
}

/// The formula must be in the model's language; translated atoms carry
/// their own signature.
fn check_language(m: &Model, f: &Formula) -> Result<(), ModelError> {
    let reader = match m.theory {
        TheoryTag::Ck | TheoryTag::CkStl => TrKind::TrStar,
        TheoryTag::Sr => TrKind::Tr,
        TheoryTag::SrE => TrKind::TrPlus,
    };
    check_signature(reader, &strip_translated(f)).map_err(|e| {
        let reason = e.to_string();
        let reason = reason.split(": ").last().unwrap_or(&reason).to_string();
        ModelError::SignatureViolation(format!("{reason} for a {} model", m.theory.name()))
    })
}

pub fn eval(m: &Model, f: &Formula, opts: &EvalOptions) -> Result<EvalResult, ModelError> {
    check_language(m, f)?;
    let mut ev = Evaluator::new(m, opts.budget, opts.seed);
    let (t, cex) = ev.evaluate(f, &[]);
    Ok(EvalResult { verdict: Verdict::of(t), counterexample: cex, samples: ev.samples_used() })
}

/// Evaluates the falsified instance a counterexample names, in a fresh
/// evaluator that only knows the model and the counterexample's bodies.
pub fn recheck(m: &Model, cex: &Cex, opts: &EvalOptions) -> Truth {
    let mut ev = Evaluator::new(m, opts.budget, opts.seed ^ 0x5eed);
    ev.add_bodies(&cex.bodies);
    ev.evaluate(&cex.focus, &cex.bindings).0
}

// ---------------------------------------------------------------------------
// interpretations

/// The theory whose translated axioms a translator is checked on, and the
/// kind of model they are evaluated in.
pub fn axioms_for(t: &Translator) -> Option<(Theory, TheoryTag)> {
    use TrKind::*;
    Some(match t.steps() {
        [Tr] => (Theory::SpecRelFull, TheoryTag::Ck),
        [TrPlus] => (Theory::SpecRelE, TheoryTag::CkStl),
        [TrPlusInv] => (Theory::ClassicalKinStl, TheoryTag::SrE),
        [TrStar] => (Theory::ClassicalKinStl, TheoryTag::Ck),
        [TrStarInv] => (Theory::ClassicalKinFull, TheoryTag::CkStl),
        [TrStar, TrPlus] => (Theory::SpecRelE, TheoryTag::Ck),
        _ => return None,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomVerdict {
    pub axiom: String,
    pub verdict: Verdict,
    pub counterexample: Option<Cex>,
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct InterpretationReport {
    pub translator: String,
    pub theory: String,
    pub model: String,
    pub budget: usize,
    pub seed: u64,
    pub rows: Vec<AxiomVerdict>,
}

impl InterpretationReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.verdict == Verdict::HoldsOnSamples)
    }
}

/// Evaluates the translation of every axiom of the translator's source
/// theory in `m`, one thread per axiom.
pub fn check_translated_axioms(m: &Model, t: &Translator, opts: &EvalOptions) -> Result<InterpretationReport, ModelError> {
    let (th, tag) = axioms_for(t).ok_or_else(|| ModelError::InvalidSpec(format!("no axiom set is checked through {t}")))?;
    if m.theory != tag {
        return Err(ModelError::InvalidSpec(format!("{t} is checked on {} models, not {}", tag.name(), m.theory.name())));
    }
    let axioms = theory(th);
    let mut translated = Vec::new();
    for (name, ax) in &axioms {
        let f = t.apply(ax).map_err(|e| ModelError::SignatureViolation(e.to_string()))?;
        check_language(m, &f)?;
        translated.push((name.to_string(), f));
    }
    let rows = std::thread::scope(|s| {
        let handles: Vec<_> = translated
            .iter()
            .enumerate()
            .map(|(i, (name, f))| {
                s.spawn(move || {
                    let mut ev = Evaluator::new(m, opts.budget, opts.seed.wrapping_add(i as u64 * 7919));
                    let (t, cex) = ev.evaluate(f, &[]);
                    AxiomVerdict { axiom: name.clone(), verdict: Verdict::of(t), counterexample: cex, samples: ev.samples_used() }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("axiom check panicked")).collect()
    });
    Ok(InterpretationReport {
        translator: t.to_string(),
        theory: th.name().to_string(),
        model: m.theory.name().to_string(),
        budget: opts.budget,
        seed: opts.seed,
        rows,
    })
}

// ---------------------------------------------------------------------------
// round trips

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundtripPair {
    Plus,
    Star,
    Composed,
}

impl RoundtripPair {
    pub fn from_name(s: &str) -> Option<RoundtripPair> {
        match s {
            "plus" => Some(RoundtripPair::Plus),
            "star" => Some(RoundtripPair::Star),
            "composed" => Some(RoundtripPair::Composed),
            _ => None,
        }
    }

    /// The round-trip translator for models of `tag`.
    pub fn translator(self, tag: TheoryTag) -> Option<Translator> {
        let name = match (self, tag) {
            (RoundtripPair::Plus, TheoryTag::SrE) => "tr+inv∘tr+",
            (RoundtripPair::Plus, TheoryTag::CkStl) => "tr+∘tr+inv",
            (RoundtripPair::Star, TheoryTag::Ck) => "tr*∘tr*inv",
            (RoundtripPair::Star, TheoryTag::CkStl) => "tr*inv∘tr*",
            (RoundtripPair::Composed, TheoryTag::Ck) => "tr*∘tr+∘tr+inv∘tr*inv",
            (RoundtripPair::Composed, TheoryTag::SrE) => "tr+inv∘tr*inv∘tr*∘tr+",
            _ => return None,
        };
        Translator::from_name(name)
    }
}

/// Primitive atoms of a language, with body slots `k`, `b` and point `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AtomPattern {
    W,
    IOb,
    Ph,
    E,
    Ether,
}

impl AtomPattern {
    pub fn for_model(tag: TheoryTag) -> Vec<AtomPattern> {
        match tag {
            TheoryTag::Ck | TheoryTag::CkStl => vec![AtomPattern::W, AtomPattern::IOb, AtomPattern::Ph, AtomPattern::Ether],
            TheoryTag::Sr => vec![AtomPattern::W, AtomPattern::IOb, AtomPattern::Ph],
            TheoryTag::SrE => vec![AtomPattern::W, AtomPattern::IOb, AtomPattern::Ph, AtomPattern::E],
        }
    }

    pub fn formula(self) -> Formula {
        match self {
            AtomPattern::W => Formula::w("k", "b", Point::vars(["x0", "x1", "x2", "x3"])),
            AtomPattern::IOb => Formula::IOb("k".into()),
            AtomPattern::Ph => Formula::Ph("k".into()),
            AtomPattern::E => Formula::E("k".into()),
            AtomPattern::Ether => Formula::Ether("k".into()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundtripRow {
    pub pattern: String,
    pub samples: usize,
    pub agree: usize,
    pub discrepancies: usize,
    pub undecided: usize,
    pub first_discrepancy: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundtripReport {
    pub pair: RoundtripPair,
    pub translator: String,
    pub model: String,
    pub seed: u64,
    pub rows: Vec<RoundtripRow>,
}

impl RoundtripReport {
    pub fn all_agree(&self) -> bool {
        self.rows.iter().all(|r| r.discrepancies == 0 && r.undecided == 0)
    }
}

/// Compares every primitive atom with its round-trip translation on
/// `samples` assignments per atom. Half of the points are placed on the
/// worldline of `b` as `k` sees it, so both truth values occur.
pub fn roundtrip(m: &Model, pair: RoundtripPair, samples: usize, seed: u64) -> Result<RoundtripReport, ModelError> {
    let t = pair
        .translator(m.theory)
        .ok_or_else(|| ModelError::InvalidSpec(format!("no {pair:?} round trip for {} models", m.theory.name())))?;
    let patterns = AtomPattern::for_model(m.theory);
    let mut work = Vec::new();
    for p in patterns {
        let f = p.formula();
        let back = t.apply(&f).map_err(|e| ModelError::SignatureViolation(e.to_string()))?;
        work.push((p, f, back));
    }
    let rows = std::thread::scope(|s| {
        let handles: Vec<_> = work
            .iter()
            .enumerate()
            .map(|(i, (p, f, back))| s.spawn(move || roundtrip_row(m, *p, f, back, samples, seed.wrapping_add(i as u64))))
            .collect();
        handles.into_iter().map(|h| h.join().expect("round trip panicked")).collect()
    });
    Ok(RoundtripReport { pair, translator: t.to_string(), model: m.theory.name().to_string(), seed, rows })
}

fn roundtrip_row(m: &Model, p: AtomPattern, f: &Formula, back: &Formula, samples: usize, seed: u64) -> RoundtripRow {
    let mut g = rng(seed);
    let mut ev = Evaluator::new(m, 64, seed);
    let mut row = RoundtripRow { pattern: f.to_string(), samples, agree: 0, discrepancies: 0, undecided: 0, first_discrepancy: None };
    let n = m.bodies.len();
    for _ in 0..samples {
        let k = g.random_range(0..n);
        let b = g.random_range(0..n);
        let mut bindings = vec![("k".to_string(), Val::Body(k)), ("b".to_string(), Val::Body(b))];
        if p == AtomPattern::W {
            let x = match (&m.bodies[k].frame, g.random_bool(0.5)) {
                (Some(frame), true) => frame.apply(&m.bodies[b].line.at(&pool_value(&mut g, &m.c))),
                _ => Event(std::array::from_fn(|_| pool_value(&mut g, &m.c))),
            };
            for (i, c) in x.0.iter().enumerate() {
                bindings.push((format!("x{i}"), Val::Q(Num::rat(c.clone()))));
            }
        }
        let a = ev.evaluate(f, &bindings).0;
        let r = ev.evaluate(back, &bindings).0;
        match (a, r) {
            (Truth::Unknown, _) | (_, Truth::Unknown) => row.undecided += 1,
            (x, y) if x == y => row.agree += 1,
            _ => {
                row.discrepancies += 1;
                if row.first_discrepancy.is_none() {
                    let names: Vec<String> = bindings.iter().map(|(n, v)| format!("{n}={}", show(m, v))).collect();
                    row.first_discrepancy = Some(format!("{} ({a:?} vs {r:?})", names.join(" ")));
                }
            }
        }
    }
    row
}

fn show(m: &Model, v: &Val) -> String {
    match v {
        Val::Body(id) => m.bodies.get(*id).map(|b| b.name.clone()).unwrap_or_else(|| format!("#{id}")),
        Val::Q(x) => x.to_string(),
    }
}

// ---------------------------------------------------------------------------
// ether velocity under translation

#[derive(Clone, Debug, Serialize)]
pub struct VelocityRemapRow {
    pub observer: String,
    pub translator: String,
    pub before: Velocity<Rat>,
    /// `None` when the observer is not an inertial observer of the derived structure
    pub after: Option<Velocity<Rat>>,
    pub expected: Option<Velocity<Rat>>,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VelocityRemapReport {
    pub model: String,
    pub rows: Vec<VelocityRemapRow>,
    /// (observer, translator) pairs whose derived frame leaves the rationals
    pub inexact: Vec<(String, String)>,
}

impl VelocityRemapReport {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.ok)
    }
}

/// Ether velocity seen by each observer before and after each translator
/// that reads this kind of model. The plus translators and `tr` keep it,
/// the star pair remaps it between slower- and faster-than-light.
pub fn check_velocity_remap(m: &Model) -> VelocityRemapReport {
    let translators: &[TrKind] = match m.theory {
        TheoryTag::Ck | TheoryTag::CkStl => &[TrKind::Tr, TrKind::TrPlus, TrKind::TrStar, TrKind::TrStarInv],
        TheoryTag::SrE => &[TrKind::TrPlusInv],
        TheoryTag::Sr => &[],
    };
    let c = &m.c;
    let mut rows = Vec::new();
    let mut inexact = Vec::new();
    for b in m.observers() {
        let p = base_view(b);
        let Some(before) = ether_velocity(b.frame.as_ref().expect("observer")) else { continue };
        let stl = before.norm_sq() < c * c;
        for &t in translators {
            let Ok(derived) = derive(t, &p, c) else {
                inexact.push((b.name.clone(), t.name().to_string()));
                continue;
            };
            let after = derived.frame.as_ref().and_then(ether_velocity);
            let expected = match t {
                TrKind::Tr | TrKind::TrPlus | TrKind::TrPlusInv => stl.then(|| before.clone()),
                TrKind::TrStar => stl_of_ftl(&before, c).ok(),
                TrKind::TrStarInv => {
                    if stl {
                        ftl_of_stl(&before, c).ok()
                    } else {
                        None
                    }
                }
            };
            let ok = after == expected;
            rows.push(VelocityRemapRow { observer: b.name.clone(), translator: t.name().to_string(), before: before.clone(), after, expected, ok });
        }
    }
    VelocityRemapReport { model: m.theory.name().to_string(), rows, inexact }
}

// ---------------------------------------------------------------------------
// transforming models

/// The special-relativistic model `tr` reads off a classical one: every
/// observer's frame is radarized with the ether velocity it sees, photons
/// keep their worldlines.
pub fn transform_model(m: &Model) -> Result<Model, ModelError> {
    if !matches!(m.theory, TheoryTag::Ck | TheoryTag::CkStl) {
        return Err(ModelError::InvalidSpec(format!("expected a classical model, got {}", m.theory.name())));
    }
    let c = &m.c;
    if let Some(b) = m.observers().find(|b| !ether_velocity(b.frame.as_ref().expect("observer")).is_some_and(|v| v.norm_sq() < c * c)) {
        return Err(ModelError::FtlObserverPresent(b.name.clone()));
    }
    let mut bodies = Vec::new();
    for b in &m.bodies {
        let nb = match &b.frame {
            None => b.clone(),
            Some(frame) => {
                let v = ether_velocity(frame).expect("checked above");
                let rad = radarization_closed(&v, c).map_err(|e| ModelError::InvalidSpec(format!("{}: {e}", b.name)))?;
                Body { frame: Some(rad.compose(frame)), e: false, ..b.clone() }
            }
        };
        bodies.push(nb);
    }
    let out = Model { theory: TheoryTag::Sr, c: c.clone(), bodies, seed: m.seed };
    validate(&out)?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// corollaries

#[derive(Clone, Debug, Serialize)]
pub struct CorollaryCheck {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorollaryReport {
    pub model: String,
    pub checks: Vec<CorollaryCheck>,
}

impl CorollaryReport {
    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }
}

/// Classical models: ether observers are mutually at rest and agree on
/// every observer's velocity. Relativistic models: observers move slower
/// than light relative to each other.
pub fn check_corollaries(m: &Model) -> CorollaryReport {
    let c = &m.c;
    let mut checks = Vec::new();
    let observers: Vec<&Body> = m.observers().collect();
    match m.theory {
        TheoryTag::Ck | TheoryTag::CkStl => {
            let ethers: Vec<&Body> =
                observers.iter().copied().filter(|b| super::cone_scale(b.frame.as_ref().expect("observer"), c).is_some()).collect();
            let mut at_rest = true;
            for a in &ethers {
                for b in &ethers {
                    let v = seen_velocity(a.frame.as_ref().expect("observer"), &b.line);
                    at_rest &= v.is_some_and(|v| v.norm_sq() == Rat::int(0));
                }
            }
            checks.push(CorollaryCheck {
                name: "ether observers are mutually stationary".into(),
                ok: at_rest && !ethers.is_empty(),
                detail: format!("{} ether observers", ethers.len()),
            });
            let mut same_speed = true;
            let mut same_velocity_of_ether = true;
            for k in &observers {
                let speeds: Vec<Option<Rat>> = ethers
                    .iter()
                    .map(|e| seen_velocity(e.frame.as_ref().expect("observer"), &k.line).map(|v| v.norm_sq()))
                    .collect();
                same_speed &= speeds.windows(2).all(|w| w[0] == w[1]);
                let seen: Vec<Option<Velocity<Rat>>> =
                    ethers.iter().map(|e| seen_velocity(k.frame.as_ref().expect("observer"), &e.line)).collect();
                same_velocity_of_ether &= seen.windows(2).all(|w| w[0] == w[1]);
            }
            checks.push(CorollaryCheck {
                name: "every ether observer sees the same speed of each observer".into(),
                ok: same_speed,
                detail: format!("{} observers", observers.len()),
            });
            checks.push(CorollaryCheck {
                name: "each observer sees all ether observers move with one velocity".into(),
                ok: same_velocity_of_ether,
                detail: format!("{} observers", observers.len()),
            });
        }
        TheoryTag::Sr | TheoryTag::SrE => {
            let mut slow = true;
            let mut worst = String::new();
            for k in &observers {
                for h in &observers {
                    let v = seen_velocity(k.frame.as_ref().expect("observer"), &h.line);
                    if !v.as_ref().is_some_and(|v| v.norm_sq() < c * c) {
                        slow = false;
                        worst = format!("{} sees {}", k.name, h.name);
                    }
                }
            }
            checks.push(CorollaryCheck {
                name: "observers move slower than light relative to each other".into(),
                ok: slow,
                detail: if slow { format!("{} observers", observers.len()) } else { worst },
            });
            let poincare = observers.iter().all(|b| classify(b.frame.as_ref().expect("observer"), c).poincare);
            checks.push(CorollaryCheck {
                name: "worldview transformations are Poincaré".into(),
                ok: poincare,
                detail: format!("{} observers", observers.len()),
            });
        }
    }
    CorollaryReport { model: m.theory.name().to_string(), checks }
}
