//! Translations between the kinematic theories, and the simplifier that merges
//! ether quantifiers whose bodies do not depend on the choice of ether
//! observer.
//!
//! Translators rewrite the primitive atoms (`W`, `IOb`, `Ph`, `E`) by their
//! clause tables and keep arithmetic unchanged. Atoms built from defined
//! concepts of the source language (ether, speed, worldview transformations,
//! light speed, ...) are wrapped as [`Formula::Trans`]: they denote the same
//! concept read in the translated structure, and [`expand_translated`] turns
//! them into plain formulas by expanding the definition first.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::logic::{
    expand_macros_with, free_vars, Binder, Formula, Fresh, Guard, LightKind, MapKind, Point, Subst, Term, TrKind,
};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error("{translator} cannot translate this formula: {reason}")]
    SignatureViolation { translator: String, reason: String },
}

/// Signatures the translators read and write.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Language {
    /// relativistic, no primitive ether
    Rel,
    /// relativistic with the primitive ether predicate `E`
    RelE,
    /// classical kinematics
    Classical,
}

impl TrKind {
    pub fn source(self) -> Language {
        match self {
            TrKind::Tr => Language::Rel,
            TrKind::TrPlus => Language::RelE,
            TrKind::TrPlusInv | TrKind::TrStar | TrKind::TrStarInv => Language::Classical,
        }
    }

    pub fn target(self) -> Language {
        match self {
            TrKind::Tr | TrKind::TrPlus | TrKind::TrStar | TrKind::TrStarInv => Language::Classical,
            TrKind::TrPlusInv => Language::RelE,
        }
    }
}

fn accepts(source: Language, produced: Language) -> bool {
    match source {
        Language::Rel => produced == Language::Rel,
        Language::RelE => matches!(produced, Language::Rel | Language::RelE),
        Language::Classical => produced == Language::Classical,
    }
}

fn violation(t: TrKind, reason: &str) -> TranslateError {
    TranslateError::SignatureViolation { translator: t.name().to_string(), reason: reason.to_string() }
}

fn term_light(t: &Term, found: &mut BTreeSet<&'static str>) {
    match t {
        Term::Light(LightKind::Ether) => {
            found.insert("c_e");
        }
        Term::Light(LightKind::Rel) => {
            found.insert("c_sr");
        }
        Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => {
            term_light(a, found);
            term_light(b, found);
        }
        Term::Neg(a) => term_light(a, found),
        Term::Space(p, q) | Term::Time(p, q) => {
            point_light(p, found);
            point_light(q, found);
        }
        _ => {}
    }
}

fn point_light(p: &Point, found: &mut BTreeSet<&'static str>) {
    match p {
        Point::Coords(ts) => ts.iter().for_each(|t| term_light(t, found)),
        Point::Map(kind, _, _, a) => {
            found.insert(if kind.light() == LightKind::Ether { "c_e" } else { "c_sr" });
            point_light(a, found);
        }
        Point::Wv(_, _, a) => point_light(a, found),
    }
}

/// Symbols that tie a formula to one language: `E`, `Ether`, `c_e`, `c_sr`.
fn signature_marks(f: &Formula) -> BTreeSet<&'static str> {
    let mut found = BTreeSet::new();
    f.visit(&mut |g| {
        match g {
            Formula::E(_) => {
                found.insert("E");
            }
            Formula::ForallIn(bs, _) | Formula::ExistsIn(bs, _) => {
                for (_, guard) in bs {
                    match guard {
                        Guard::E => {
                            found.insert("E");
                        }
                        Guard::Ether => {
                            found.insert("Ether");
                        }
                        _ => {}
                    }
                }
            }
            Formula::Ether(_) => {
                found.insert("Ether");
            }
            _ => {}
        }
        for t in atom_terms_of(g) {
            term_light(t, &mut found);
        }
        for p in atom_points_of(g) {
            point_light(p, &mut found);
        }
    });
    found
}

fn atom_terms_of(f: &Formula) -> Vec<&Term> {
    match f {
        Formula::Eq(a, b) | Formula::Le(a, b) | Formula::Lt(a, b) => vec![a, b],
        Formula::VelocityIs(_, _, v) => v.iter().collect(),
        Formula::WvIs(_, _, q) | Formula::Triv(q) => q.iter().collect(),
        _ => Vec::new(),
    }
}

fn atom_points_of(f: &Formula) -> Vec<&Point> {
    match f {
        Formula::W(_, _, p) | Formula::Wl(_, _, p) => vec![p],
        Formula::EvEq(_, p, _, q) | Formula::PointEq(p, q) => vec![p, q],
        _ => Vec::new(),
    }
}

/// Checks that `f` is written in the source signature of `t`.
pub fn check_signature(t: TrKind, f: &Formula) -> Result<(), TranslateError> {
    let marks = signature_marks(f);
    let bad: &[&str] = match t.source() {
        Language::Rel => &["E", "c_e", "Ether"],
        Language::RelE => &["c_e", "Ether"],
        Language::Classical => &["E", "c_sr"],
    };
    for m in bad {
        if marks.contains(m) {
            return Err(violation(t, &format!("{m} is not in its source signature")));
        }
    }
    Ok(())
}

fn term_is_math(t: &Term) -> bool {
    match t {
        Term::Var(_) | Term::Lit(_) => true,
        Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => term_is_math(a) && term_is_math(b),
        Term::Neg(a) => term_is_math(a),
        Term::Space(p, q) | Term::Time(p, q) => point_is_math(p) && point_is_math(q),
        Term::Light(_) | Term::Speed(..) => false,
    }
}

fn point_is_math(p: &Point) -> bool {
    matches!(p, Point::Coords(ts) if ts.iter().all(term_is_math))
}

struct Translating {
    kind: TrKind,
    fresh: Fresh,
}

impl Translating {
    fn ether_guard(&self) -> Guard {
        match self.kind {
            TrKind::TrPlusInv => Guard::E,
            _ => Guard::Ether,
        }
    }

    fn atom(&mut self, f: &Formula) -> Formula {
        let t = self.kind;
        match f {
            Formula::True | Formula::False | Formula::EField | Formula::BodyEq(..) | Formula::Ph(_) => f.clone(),
            Formula::Eq(a, b) | Formula::Le(a, b) | Formula::Lt(a, b) if term_is_math(a) && term_is_math(b) => f.clone(),
            Formula::PointEq(p, q) if point_is_math(p) && point_is_math(q) => f.clone(),
            Formula::Triv(q) if q.iter().all(term_is_math) => f.clone(),
            Formula::IOb(k) => match t {
                TrKind::Tr | TrKind::TrPlus => {
                    let e = self.fresh.name("e");
                    let slow = Formula::Lt(Term::Speed(e.clone(), k.clone()), Term::Light(LightKind::Ether));
                    Formula::And(vec![f.clone(), Formula::forall_in(&e, Guard::Ether, slow)])
                }
                _ => f.clone(),
            },
            Formula::E(x) if t == TrKind::TrPlus => Formula::Ether(x.clone()),
            Formula::W(k, b, p) | Formula::Wl(k, b, p) if point_is_math(p) => self.w(k, b, p),
            other => Formula::Trans(t, Box::new(other.clone())),
        }
    }

    fn w(&mut self, k: &str, b: &str, p: &Point) -> Formula {
        let e = self.fresh.name("e");
        let guard = self.ether_guard();
        let map = |kind: MapKind, k: &str, arg: Point| Point::map(kind, k, &e, arg);
        let body = match self.kind {
            TrKind::Tr | TrKind::TrPlus => Formula::w(k, b, map(MapKind::RadInv, k, p.clone())),
            TrKind::TrPlusInv => Formula::w(k, b, map(MapKind::Rad, k, p.clone())),
            TrKind::TrStar | TrKind::TrStarInv => {
                let inv = if self.kind == TrKind::TrStar { MapKind::XInv } else { MapKind::YInv };
                let s = self.fresh.name("t");
                let on_axis = Point::coords([Term::var(&s), Term::int(0), Term::int(0), Term::int(0)]);
                let seen = map(inv, k, p.clone());
                let observer = Formula::exists(
                    vec![Binder::quantity(&s)],
                    Formula::PointEq(Point::Wv(k.to_string(), b.to_string(), Box::new(seen.clone())), map(inv, b, on_axis)),
                );
                Formula::And(vec![
                    Formula::implies(Formula::not(Formula::IOb(b.to_string())), Formula::w(k, b, seen)),
                    Formula::implies(Formula::IOb(b.to_string()), observer),
                ])
            }
        };
        Formula::forall_in(&e, guard, body)
    }

    fn formula(&mut self, f: &Formula) -> Formula {
        match f {
            Formula::Not(a) => Formula::not(self.formula(a)),
            Formula::And(xs) => Formula::And(xs.iter().map(|x| self.formula(x)).collect()),
            Formula::Or(xs) => Formula::Or(xs.iter().map(|x| self.formula(x)).collect()),
            Formula::Implies(a, b) => Formula::implies(self.formula(a), self.formula(b)),
            Formula::Iff(a, b) => Formula::iff(self.formula(a), self.formula(b)),
            Formula::Forall(bs, a) => Formula::Forall(bs.clone(), Box::new(self.formula(a))),
            Formula::Exists(bs, a) => Formula::Exists(bs.clone(), Box::new(self.formula(a))),
            Formula::ForallIn(bs, a) | Formula::ExistsIn(bs, a) => {
                let universal = matches!(f, Formula::ForallIn(..));
                let guards: Vec<Formula> = bs.iter().map(|(v, g)| self.atom(&g.atom(v))).collect();
                let body = self.formula(a);
                let resugared: Option<Vec<(String, Guard)>> = bs
                    .iter()
                    .zip(&guards)
                    .map(|((v, _), tg)| {
                        [Guard::IOb, Guard::Ph, Guard::E, Guard::Ether].into_iter().find(|g| g.atom(v) == *tg).map(|g| (v.clone(), g))
                    })
                    .collect();
                match (resugared, universal) {
                    (Some(nbs), true) => Formula::ForallIn(nbs, Box::new(body)),
                    (Some(nbs), false) => Formula::ExistsIn(nbs, Box::new(body)),
                    (None, true) => Formula::Forall(
                        bs.iter().map(|(v, _)| Binder::body(v)).collect(),
                        Box::new(Formula::implies(Formula::and(guards), body)),
                    ),
                    (None, false) => {
                        let mut parts = guards;
                        parts.push(body);
                        Formula::Exists(bs.iter().map(|(v, _)| Binder::body(v)).collect(), Box::new(Formula::And(parts)))
                    }
                }
            }
            atom => self.atom(atom),
        }
    }
}

/// Applies one translator.
pub fn translate(t: TrKind, f: &Formula) -> Result<Formula, TranslateError> {
    check_signature(t, f)?;
    let mut tr = Translating { kind: t, fresh: Fresh::avoiding(f) };
    Ok(tr.formula(f))
}

pub fn tr(f: &Formula) -> Result<Formula, TranslateError> {
    translate(TrKind::Tr, f)
}

pub fn tr_plus(f: &Formula) -> Result<Formula, TranslateError> {
    translate(TrKind::TrPlus, f)
}

pub fn tr_plus_inv(f: &Formula) -> Result<Formula, TranslateError> {
    translate(TrKind::TrPlusInv, f)
}

pub fn tr_star(f: &Formula) -> Result<Formula, TranslateError> {
    translate(TrKind::TrStar, f)
}

pub fn tr_star_inv(f: &Formula) -> Result<Formula, TranslateError> {
    translate(TrKind::TrStarInv, f)
}

/// A chain of translators; `steps[0]` is applied last.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Translator {
    steps: Vec<TrKind>,
}

impl Translator {
    pub fn identity() -> Translator {
        Translator { steps: Vec::new() }
    }

    pub fn single(t: TrKind) -> Translator {
        Translator { steps: vec![t] }
    }

    pub fn steps(&self) -> &[TrKind] {
        &self.steps
    }

    /// Source signature, `None` for the identity.
    pub fn source(&self) -> Option<Language> {
        self.steps.last().map(|t| t.source())
    }

    pub fn target(&self) -> Option<Language> {
        self.steps.first().map(|t| t.target())
    }

    pub fn apply(&self, f: &Formula) -> Result<Formula, TranslateError> {
        self.steps.iter().rev().try_fold(f.clone(), |acc, t| translate(*t, &acc))
    }

    /// Parses `tr`, `tr*∘tr+`, `tr*.tr+`, or `id`.
    pub fn from_name(s: &str) -> Option<Translator> {
        if s == "id" || s.is_empty() {
            return Some(Translator::identity());
        }
        let steps: Option<Vec<TrKind>> = s.split(['∘', '.']).map(|p| TrKind::from_name(p.trim())).collect();
        let steps = steps?;
        steps.windows(2).all(|w| accepts(w[0].source(), w[1].target())).then_some(Translator { steps })
    }
}

impl fmt::Display for Translator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps.is_empty() {
            return write!(f, "id");
        }
        let names: Vec<&str> = self.steps.iter().map(|t| t.name()).collect();
        write!(f, "{}", names.join("∘"))
    }
}

/// `t1 ∘ t2`: apply `t2`, then `t1`.
pub fn compose(t1: &Translator, t2: &Translator) -> Result<Translator, TranslateError> {
    if let (Some(src), Some(tgt)) = (t1.source(), t2.target()) {
        if !accepts(src, tgt) {
            let first = t1.steps.last().copied().expect("non-empty");
            return Err(violation(first, &format!("cannot read the output of {t2}")));
        }
    }
    let mut steps = t1.steps.clone();
    steps.extend(t2.steps.iter().copied());
    Ok(Translator { steps })
}

/// Expands every defined concept, resolving translated atoms by translating
/// their expanded definitions.
pub fn expand_translated(f: &Formula) -> Formula {
    expand_macros_with(f, &|t, inner| translate(t, inner).unwrap_or_else(|_| Formula::Trans(t, Box::new(inner.clone()))))
}

// ---------------------------------------------------------------------------
// ether-observer independence

/// `EOI^{k1..kn}_b[φ]`: the truth of `formula` does not depend on which ether
/// observer `b` denotes, provided the `side_conditions` are inertial observers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EoiCertificate {
    pub formula: Formula,
    pub var: String,
    pub side_conditions: BTreeSet<String>,
}

/// Side conditions under which a term is independent of the ether observer `b`.
/// `speed_b(k)` and `speed_k(b)` need `k` inertial; any other use of `b` fails.
fn term_eoi(t: &Term, b: &str, side: &mut BTreeSet<String>) -> bool {
    match t {
        Term::Var(_) | Term::Lit(_) | Term::Light(_) => true,
        Term::Add(x, y) | Term::Sub(x, y) | Term::Mul(x, y) => term_eoi(x, b, side) && term_eoi(y, b, side),
        Term::Neg(x) => term_eoi(x, b, side),
        Term::Speed(k, h) => {
            if k == b && h == b {
                true
            } else if k == b {
                side.insert(h.clone());
                true
            } else if h == b {
                side.insert(k.clone());
                true
            } else {
                true
            }
        }
        Term::Space(p, q) | Term::Time(p, q) => point_eoi(p, b, side) && point_eoi(q, b, side),
    }
}

/// Coordinate maps depend on `b` only through `v̄_k(b)`, which is the same for
/// every ether observer when `k` is inertial.
fn point_eoi(p: &Point, b: &str, side: &mut BTreeSet<String>) -> bool {
    match p {
        Point::Coords(ts) => ts.iter().all(|t| term_eoi(t, b, side)),
        Point::Map(_, k, e, a) => {
            if k == b {
                return false;
            }
            if e == b {
                side.insert(k.clone());
            }
            point_eoi(a, b, side)
        }
        Point::Wv(k, h, a) => k != b && h != b && point_eoi(a, b, side),
    }
}

fn eoi_side(f: &Formula, b: &str) -> Option<BTreeSet<String>> {
    if !free_vars(f).contains_key(b) {
        return Some(BTreeSet::new());
    }
    let mut side = BTreeSet::new();
    let ok = match f {
        Formula::Eq(x, y) | Formula::Le(x, y) | Formula::Lt(x, y) => term_eoi(x, b, &mut side) && term_eoi(y, b, &mut side),
        Formula::BodyEq(x, y) => x == b && y == b,
        Formula::IOb(_) | Formula::Ph(_) => true,
        Formula::W(k, h, p) | Formula::Wl(k, h, p) => k != b && h != b && point_eoi(p, b, &mut side),
        Formula::PointEq(p, q) => point_eoi(p, b, &mut side) && point_eoi(q, b, &mut side),
        Formula::Not(a) => return eoi_side(a, b),
        Formula::And(xs) | Formula::Or(xs) => {
            for x in xs {
                side.extend(eoi_side(x, b)?);
            }
            true
        }
        Formula::Implies(x, y) | Formula::Iff(x, y) => {
            side.extend(eoi_side(x, b)?);
            side.extend(eoi_side(y, b)?);
            true
        }
        Formula::Forall(bs, a) | Formula::Exists(bs, a) => {
            let inner = eoi_side(a, b)?;
            if bs.iter().any(|x| inner.contains(&x.name)) {
                return None;
            }
            side = inner;
            true
        }
        Formula::ForallIn(bs, a) | Formula::ExistsIn(bs, a) => {
            let mut inner = eoi_side(a, b)?;
            for (v, g) in bs {
                if inner.remove(v) && !matches!(g, Guard::IOb | Guard::Ether) {
                    return None;
                }
            }
            side = inner;
            true
        }
        _ => false,
    };
    ok.then_some(side)
}

/// Builds an EOI certificate for `f` in `b`, when the rules allow one.
pub fn eoi_certificate(f: &Formula, b: &str) -> Option<EoiCertificate> {
    eoi_side(f, b).map(|side_conditions| EoiCertificate { formula: f.clone(), var: b.to_string(), side_conditions })
}

fn ether_quantified(f: &Formula) -> Option<(&str, &Formula)> {
    match f {
        Formula::ForallIn(bs, a) if bs.len() == 1 && bs[0].1 == Guard::Ether => Some((bs[0].0.as_str(), a)),
        _ => None,
    }
}

/// IOb atoms among the conjuncts of `f`.
fn iob_conjuncts(f: &Formula) -> Vec<String> {
    match f {
        Formula::IOb(k) => vec![k.clone()],
        Formula::And(xs) => xs.iter().flat_map(iob_conjuncts).collect(),
        _ => Vec::new(),
    }
}

struct Simplifier {
    fresh: Fresh,
}

enum Conn {
    And,
    Or,
    Implies,
    Iff,
    Not,
}

impl Simplifier {
    fn run(&mut self, f: &Formula, ctx: &BTreeSet<String>) -> Formula {
        match f {
            Formula::Forall(bs, a) if bs.len() == 1 && bs[0].sort == crate::logic::Sort::Body => {
                let k = &bs[0].name;
                if let Formula::Implies(ante, cons) = &**a {
                    if let Some(rest) = split_guard(ante, k) {
                        let inner = match rest {
                            None => (**cons).clone(),
                            Some(r) => Formula::implies(r, (**cons).clone()),
                        };
                        return self.run(&Formula::forall_in(k, Guard::IOb, inner), ctx);
                    }
                }
                self.quantifier(f, ctx)
            }
            Formula::Forall(..) | Formula::Exists(..) => self.quantifier(f, ctx),
            Formula::ForallIn(bs, a) | Formula::ExistsIn(bs, a) => {
                let mut inner_ctx = ctx.clone();
                for (v, g) in bs {
                    if matches!(g, Guard::IOb | Guard::Ether) {
                        inner_ctx.insert(v.clone());
                    } else {
                        inner_ctx.remove(v);
                    }
                }
                let body = self.run(a, &inner_ctx);
                if matches!(f, Formula::ForallIn(..)) {
                    Formula::ForallIn(bs.clone(), Box::new(body))
                } else {
                    Formula::ExistsIn(bs.clone(), Box::new(body))
                }
            }
            Formula::Not(a) => {
                let a = self.run(a, ctx);
                self.merge(Conn::Not, vec![a], ctx)
            }
            Formula::And(xs) => {
                let parts: Vec<Formula> = xs
                    .iter()
                    .enumerate()
                    .map(|(i, x)| {
                        let mut c = ctx.clone();
                        for (j, y) in xs.iter().enumerate() {
                            if i != j {
                                c.extend(iob_conjuncts(y));
                            }
                        }
                        self.run(x, &c)
                    })
                    .collect();
                self.merge(Conn::And, parts, ctx)
            }
            Formula::Or(xs) => {
                let parts = xs.iter().map(|x| self.run(x, ctx)).collect();
                self.merge(Conn::Or, parts, ctx)
            }
            Formula::Implies(a, b) => {
                let mut c = ctx.clone();
                c.extend(iob_conjuncts(a));
                let a2 = self.run(a, ctx);
                let b2 = self.run(b, &c);
                let mut merge_ctx = ctx.clone();
                merge_ctx.extend(iob_conjuncts(&a2));
                self.merge(Conn::Implies, vec![a2, b2], &merge_ctx)
            }
            Formula::Iff(a, b) => {
                let a2 = self.run(a, ctx);
                let b2 = self.run(b, ctx);
                self.merge(Conn::Iff, vec![a2, b2], ctx)
            }
            atom => atom.clone(),
        }
    }

    fn quantifier(&mut self, f: &Formula, ctx: &BTreeSet<String>) -> Formula {
        let (bs, a, universal) = match f {
            Formula::Forall(bs, a) => (bs, a, true),
            Formula::Exists(bs, a) => (bs, a, false),
            _ => unreachable!(),
        };
        let mut inner_ctx = ctx.clone();
        for b in bs {
            inner_ctx.remove(&b.name);
        }
        let body = self.run(a, &inner_ctx);
        if universal {
            if let Some((e, inner)) = ether_quantified(&body) {
                if bs.iter().all(|b| b.name != e) {
                    return Formula::forall_in(e, Guard::Ether, Formula::Forall(bs.clone(), Box::new(inner.clone())));
                }
            }
            Formula::Forall(bs.clone(), Box::new(body))
        } else {
            Formula::Exists(bs.clone(), Box::new(body))
        }
    }

    /// Merges ether quantifiers across a connective when every operand is
    /// ether-observer-independent under the known inertial observers.
    fn merge(&mut self, conn: Conn, parts: Vec<Formula>, ctx: &BTreeSet<String>) -> Formula {
        let rebuild = |parts: Vec<Formula>| match conn {
            Conn::And => Formula::And(parts),
            Conn::Or => Formula::Or(parts),
            Conn::Implies => {
                let mut it = parts.into_iter();
                Formula::implies(it.next().unwrap(), it.next().unwrap())
            }
            Conn::Iff => {
                let mut it = parts.into_iter();
                Formula::iff(it.next().unwrap(), it.next().unwrap())
            }
            Conn::Not => Formula::not(parts.into_iter().next().unwrap()),
        };
        let Some(e) = parts.iter().find_map(|p| ether_quantified(p).map(|(e, _)| e.to_string())) else {
            return rebuild(parts);
        };
        let clash = parts.iter().any(|p| ether_quantified(p).is_none() && free_vars(p).contains_key(&e));
        let e = if clash { self.fresh.name("e") } else { e };
        let mut bodies = Vec::new();
        for p in &parts {
            let body = match ether_quantified(p) {
                Some((pe, inner)) if pe == e => inner.clone(),
                Some((pe, inner)) => match crate::logic::substitute(inner, pe, Subst::Body(e.clone())) {
                    Ok(b) => b,
                    Err(_) => return rebuild(parts),
                },
                None => p.clone(),
            };
            match eoi_side(&body, &e) {
                Some(side) if side.is_subset(ctx) => bodies.push(body),
                _ => return rebuild(parts),
            }
        }
        Formula::forall_in(&e, Guard::Ether, rebuild(bodies))
    }
}

/// For an antecedent `IOb(k) ∧ rest`, returns `Some(rest)` (`Some(None)` when
/// the antecedent is exactly `IOb(k)`).
fn split_guard(ante: &Formula, k: &str) -> Option<Option<Formula>> {
    match ante {
        Formula::IOb(x) if x == k => Some(None),
        Formula::And(xs) => {
            let pos = xs.iter().position(|x| matches!(x, Formula::IOb(y) if y == k))?;
            let mut rest = xs.clone();
            rest.remove(pos);
            Some(Some(Formula::and(rest)))
        }
        _ => None,
    }
}

/// Merges ether-bounded universal quantifiers whose bodies are certified
/// ether-observer-independent, and folds `∀k(IOb(k) ∧ φ → ψ)` into
/// `∀k∈IOb(φ → ψ)`. Formulas without certificates are left unchanged.
pub fn simplify_eoi(f: &Formula) -> Formula {
    let mut s = Simplifier { fresh: Fresh::avoiding(f) };
    let mut current = f.clone();
    loop {
        let next = s.run(&current, &BTreeSet::new());
        if next == current {
            return current;
        }
        current = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{alpha_normalize, axiom, is_core, parse, Theory};

    #[test]
    fn arithmetic_is_translated_into_itself() {
        let f = parse("(= (+ a b) c)").unwrap();
        for t in TrKind::ALL {
            assert_eq!(translate(t, &f).unwrap(), f, "{}", t.name());
        }
    }

    #[test]
    fn tr_of_iob() {
        let f = tr(&parse("(IOb k)").unwrap()).unwrap();
        assert_eq!(f.to_string(), "(and (IOb k) (forall-in ((_e1 Ether)) (< (speed _e1 k) c_e)))");
    }

    #[test]
    fn tr_is_homomorphic() {
        let a = parse("(IOb k)").unwrap();
        let b = parse("(Ph p)").unwrap();
        let both = Formula::And(vec![a.clone(), b.clone()]);
        let Formula::And(parts) = tr(&both).unwrap() else { panic!() };
        assert_eq!(parts[0].to_string(), tr(&a).unwrap().to_string());
        assert_eq!(parts[1], tr(&b).unwrap());
    }

    #[test]
    fn tr_of_w_uses_inverse_radarization() {
        let f = tr(&parse("(W k b x0 x1 x2 x3)").unwrap()).unwrap();
        assert_eq!(f.to_string(), "(forall-in ((_e1 Ether)) (W k b (rad-inv k _e1 (pt x0 x1 x2 x3))))");
    }

    #[test]
    fn plus_pair_clauses() {
        assert_eq!(tr_plus(&parse("(E x)").unwrap()).unwrap(), Formula::Ether("x".into()));
        assert_eq!(tr_plus_inv(&parse("(IOb b)").unwrap()).unwrap(), Formula::IOb("b".into()));
        let w = tr_plus_inv(&parse("(W k b x0 x1 x2 x3)").unwrap()).unwrap();
        assert_eq!(w.to_string(), "(forall-in ((_e1 E)) (W k b (rad k _e1 (pt x0 x1 x2 x3))))");
        let ether = tr_plus_inv(&parse("(Ether b)").unwrap()).unwrap();
        assert_eq!(ether, Formula::Trans(TrKind::TrPlusInv, Box::new(Formula::Ether("b".into()))));
    }

    #[test]
    fn star_w_clause_has_two_cases() {
        let f = tr_star(&parse("(W k b x0 x1 x2 x3)").unwrap()).unwrap();
        let text = f.to_string();
        assert!(text.contains("(-> (not (IOb b)) (W k b (xmap-inv k _e1 (pt x0 x1 x2 x3))))"), "{text}");
        assert!(text.contains("(pt= (wv k b (xmap-inv k _e1 (pt x0 x1 x2 x3))) (xmap-inv b _e1 (pt _t2 0 0 0)))"), "{text}");
        assert_eq!(tr_star(&parse("(IOb k)").unwrap()).unwrap(), parse("(IOb k)").unwrap());
        let inv = tr_star_inv(&parse("(W k b x0 x1 x2 x3)").unwrap()).unwrap().to_string();
        assert!(inv.contains("ymap-inv"));
    }

    #[test]
    fn signature_violations() {
        assert!(tr(&parse("(E x)").unwrap()).is_err());
        assert!(tr(&parse("(< v c_e)").unwrap()).is_err());
        assert!(tr_plus(&parse("(< v c_e)").unwrap()).is_err());
        for t in [TrKind::TrStar, TrKind::TrStarInv, TrKind::TrPlusInv] {
            assert!(translate(t, &parse("(E x)").unwrap()).is_err());
            assert!(translate(t, &parse("(< v c_sr)").unwrap()).is_err());
        }
        assert!(tr_star(&axiom("AxPh_c").unwrap()).is_ok());
        assert!(tr_star(&axiom("AxThExp").unwrap()).is_err());
    }

    #[test]
    fn translated_output_avoids_e() {
        for (_, ax) in crate::logic::theory(Theory::SpecRelFull) {
            assert!(!tr(&ax).unwrap().mentions_e());
        }
        for (_, ax) in crate::logic::theory(Theory::SpecRelE) {
            assert!(!tr_plus(&ax).unwrap().mentions_e());
        }
    }

    #[test]
    fn composition() {
        let star_plus = compose(&Translator::single(TrKind::TrStar), &Translator::single(TrKind::TrPlus)).unwrap();
        assert_eq!(star_plus.to_string(), "tr*∘tr+");
        let ph = axiom("AxPh_c").unwrap();
        let direct = tr_star(&tr_plus(&ph).unwrap()).unwrap();
        assert_eq!(star_plus.apply(&ph).unwrap(), direct);
        assert!(!direct.mentions_e());
        let id = Translator::identity();
        assert_eq!(compose(&id, &star_plus).unwrap().apply(&ph).unwrap(), direct);
        assert!(compose(&Translator::single(TrKind::Tr), &Translator::single(TrKind::TrPlusInv)).is_err());
        assert_eq!(Translator::from_name("tr*∘tr+"), Some(star_plus));
    }

    #[test]
    fn composition_is_associative() {
        let a = Translator::single(TrKind::TrStarInv);
        let b = Translator::single(TrKind::TrStar);
        let c = Translator::single(TrKind::TrPlus);
        let left = compose(&compose(&a, &b).unwrap(), &c).unwrap();
        let right = compose(&a, &compose(&b, &c).unwrap()).unwrap();
        for name in ["AxSelf", "AxPh_c", "AxPrimitiveEther"] {
            let f = axiom(name).unwrap();
            assert_eq!(left.apply(&f).unwrap(), right.apply(&f).unwrap());
        }
    }

    #[test]
    fn expand_translated_reaches_core() {
        let f = tr(&parse("(W k b x0 x1 x2 x3)").unwrap()).unwrap();
        assert!(is_core(&expand_translated(&f)));
        let g = tr_plus_inv(&parse("(Ether b)").unwrap()).unwrap();
        assert!(is_core(&expand_translated(&g)));
    }

    const SIMPLIFIED_SELF: &str = "(forall-in ((k IOb)) (forall-in ((e Ether)) (-> (< (speed e k) c_e) (forall ((y0 Q) (y1 Q) (y2 Q) (y3 Q)) (<-> (W k k (rad-inv k e (pt y0 y1 y2 y3))) (and (= y1 0) (= y2 0) (= y3 0)))))))";

    #[test]
    fn translated_self_axiom_simplifies() {
        let mech = tr(&axiom("AxSelf").unwrap()).unwrap();
        assert!(mech.to_string().starts_with("(forall ((k B)) (-> (and (IOb k) (forall-in ((_e1 Ether))"));
        let simplified = simplify_eoi(&mech);
        assert_eq!(alpha_normalize(&simplified), alpha_normalize(&parse(SIMPLIFIED_SELF).unwrap()), "{simplified}");
    }

    #[test]
    fn simplifier_fixes_formulas_without_ether_quantifiers() {
        for name in ["AxSelf", "AxEv", "AxLine"] {
            let f = axiom(name).unwrap();
            assert_eq!(simplify_eoi(&f), f);
        }
    }

    #[test]
    fn body_equation_with_ether_variable_blocks_merge() {
        assert!(eoi_certificate(&Formula::BodyEq("b".into(), "h".into()), "b").is_none());
        assert!(eoi_certificate(&Formula::BodyEq("b".into(), "b".into()), "b").is_some());
        let f = parse("(forall-in ((k IOb)) (and (forall-in ((e Ether)) (= e h)) (forall-in ((e Ether)) (IOb e))))").unwrap();
        assert_eq!(simplify_eoi(&f), f);
    }

    #[test]
    fn certificates_follow_the_rules() {
        let c = eoi_certificate(&parse("(< (speed b k) c_e)").unwrap(), "b").unwrap();
        assert_eq!(c.side_conditions.into_iter().collect::<Vec<_>>(), vec!["k"]);
        let w = eoi_certificate(&parse("(W k h (rad-inv k b (pt y0 y1 y2 y3)))").unwrap(), "b").unwrap();
        assert!(w.side_conditions.contains("k"));
        assert!(eoi_certificate(&parse("(W b h y0 y1 y2 y3)").unwrap(), "b").is_none());
        assert!(eoi_certificate(&parse("(velocity= b k v1 v2 v3)").unwrap(), "b").is_none());
        let free = eoi_certificate(&parse("(IOb k)").unwrap(), "b").unwrap();
        assert!(free.side_conditions.is_empty());
    }

    #[test]
    fn merge_needs_side_conditions_in_context() {
        let f = parse("(and (forall-in ((e Ether)) (< (speed e k) c_e)) (Ph p))").unwrap();
        assert_eq!(simplify_eoi(&f), f);
        let g = parse("(forall-in ((k IOb)) (and (forall-in ((e Ether)) (< (speed e k) c_e)) (Ph p)))").unwrap();
        let s = simplify_eoi(&g);
        assert_eq!(s.to_string(), "(forall-in ((k IOb)) (forall-in ((e Ether)) (and (< (speed e k) c_e) (Ph p))))");
    }
}
