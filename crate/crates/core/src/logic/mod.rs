//! The two-sorted kinematic language.
//!
//! Formulas keep the defined concepts (ether, speed, worldview
//! transformations, radarization applications, ...) as first-class nodes so
//! that translators and the evaluator can reason about them directly.
//! [`expand_macros`] rewrites every such node into the core signature
//! `W, IOb, Ph, E, =, ≤, +, ·`.

mod catalog;
mod expand;
mod parse;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Rat;

pub use catalog::{axiom, axiom_names, theory, Theory, AXIOM_NAMES};
pub use expand::{expand_macros, expand_macros_with, is_core};
pub use parse::{parse, parse_many, ParseError, ParseErrorKind};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("unknown axiom {0:?}")]
    UnknownAxiom(String),
    #[error("unknown theory {0:?}")]
    UnknownTheory(String),
    #[error("variable {var} has sort {expected:?} but the replacement has sort {found:?}")]
    SortMismatch { var: String, expected: Sort, found: Sort },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sort {
    Body,
    Quantity,
}

impl Sort {
    pub fn tag(self) -> &'static str {
        match self {
            Sort::Body => "B",
            Sort::Quantity => "Q",
        }
    }
}

/// Which light-speed constant a term refers to: the classical ether light
/// speed (`c_e`) or the relativistic one (`c_sr`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LightKind {
    Ether,
    Rel,
}

/// Coordinate maps indexed by a velocity `v̄_k(e)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MapKind {
    Rad,
    RadInv,
    X,
    XInv,
    Y,
    YInv,
}

impl MapKind {
    pub fn keyword(self) -> &'static str {
        match self {
            MapKind::Rad => "rad",
            MapKind::RadInv => "rad-inv",
            MapKind::X => "xmap",
            MapKind::XInv => "xmap-inv",
            MapKind::Y => "ymap",
            MapKind::YInv => "ymap-inv",
        }
    }

    pub fn from_keyword(s: &str) -> Option<MapKind> {
        [MapKind::Rad, MapKind::RadInv, MapKind::X, MapKind::XInv, MapKind::Y, MapKind::YInv]
            .into_iter()
            .find(|m| m.keyword() == s)
    }

    /// The light constant the map is built from in the language it lives in.
    pub fn light(self) -> LightKind {
        match self {
            MapKind::Rad => LightKind::Rel,
            _ => LightKind::Ether,
        }
    }
}

/// The five translators between the kinematic theories.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TrKind {
    /// relativistic → classical (radarization)
    Tr,
    /// relativistic with primitive ether → classical slower-than-light
    TrPlus,
    /// classical slower-than-light → relativistic with primitive ether
    TrPlusInv,
    /// classical slower-than-light → classical with faster-than-light observers
    TrStar,
    /// classical with faster-than-light observers → classical slower-than-light
    TrStarInv,
}

impl TrKind {
    pub const ALL: [TrKind; 5] = [TrKind::Tr, TrKind::TrPlus, TrKind::TrPlusInv, TrKind::TrStar, TrKind::TrStarInv];

    pub fn name(self) -> &'static str {
        match self {
            TrKind::Tr => "tr",
            TrKind::TrPlus => "tr+",
            TrKind::TrPlusInv => "tr+inv",
            TrKind::TrStar => "tr*",
            TrKind::TrStarInv => "tr*inv",
        }
    }

    pub fn from_name(s: &str) -> Option<TrKind> {
        TrKind::ALL.into_iter().find(|t| t.name() == s)
    }
}

/// Unary predicates allowed as bounds of body quantifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Guard {
    IOb,
    Ph,
    E,
    Ether,
}

impl Guard {
    pub fn keyword(self) -> &'static str {
        match self {
            Guard::IOb => "IOb",
            Guard::Ph => "Ph",
            Guard::E => "E",
            Guard::Ether => "Ether",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Guard> {
        [Guard::IOb, Guard::Ph, Guard::E, Guard::Ether].into_iter().find(|g| g.keyword() == s)
    }

    pub fn atom(self, var: &str) -> Formula {
        let v = var.to_string();
        match self {
            Guard::IOb => Formula::IOb(v),
            Guard::Ph => Formula::Ph(v),
            Guard::E => Formula::E(v),
            Guard::Ether => Formula::Ether(v),
        }
    }
}

/// Quantity-sorted terms. Body terms are plain variable names.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Lit(Rat),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    Neg(Box<Term>),
    Light(LightKind),
    /// `speed_k(b)`
    Speed(String, String),
    Space(Box<Point>, Box<Point>),
    Time(Box<Point>, Box<Point>),
}

/// Quantity 4-tuples.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Point {
    Coords(Box<[Term; 4]>),
    /// `M_{v̄_k(e)}(p)`
    Map(MapKind, String, String, Box<Point>),
    /// `w_kh(p)`
    Wv(String, String, Box<Point>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Binder {
    pub name: String,
    pub sort: Sort,
}

impl Binder {
    pub fn body(name: &str) -> Binder {
        Binder { name: name.to_string(), sort: Sort::Body }
    }

    pub fn quantity(name: &str) -> Binder {
        Binder { name: name.to_string(), sort: Sort::Quantity }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    /// Marker for the field axiom; the numeric backend provides it.
    EField,
    W(String, String, Point),
    /// `p ∈ wl_k(b)`
    Wl(String, String, Point),
    IOb(String),
    Ph(String),
    E(String),
    BodyEq(String, String),
    Eq(Term, Term),
    Le(Term, Term),
    Lt(Term, Term),
    Ether(String),
    Ob(String),
    /// `ev_k(p) = ev_h(q)`
    EvEq(String, Point, String, Point),
    PointEq(Point, Point),
    /// `v̄_k(b) = v̄`
    VelocityIs(String, String, Box<[Term; 3]>),
    /// `w_kh = T` for the affine map with 16 matrix and 4 translation parameters.
    WvIs(String, String, Vec<Term>),
    /// the 20 parameters describe a trivial transformation
    Triv(Vec<Term>),
    /// an atom of a source language, read through a translator
    Trans(TrKind, Box<Formula>),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(Vec<Binder>, Box<Formula>),
    Exists(Vec<Binder>, Box<Formula>),
    ForallIn(Vec<(String, Guard)>, Box<Formula>),
    ExistsIn(Vec<(String, Guard)>, Box<Formula>),
}

// ---------------------------------------------------------------------------
// construction helpers

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn int(n: i64) -> Term {
        Term::Lit(Rat::int(n))
    }

    pub fn lit(r: Rat) -> Term {
        Term::Lit(r)
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::Mul(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Term) -> Term {
        Term::Neg(Box::new(a))
    }

    /// Sum of the terms; `0` when empty.
    pub fn sum(terms: Vec<Term>) -> Term {
        let mut it = terms.into_iter();
        match it.next() {
            None => Term::int(0),
            Some(first) => it.fold(first, Term::add),
        }
    }

    /// Whether the term uses only variables, literals and ring operations.
    pub fn is_core(&self) -> bool {
        match self {
            Term::Var(_) | Term::Lit(_) => true,
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => a.is_core() && b.is_core(),
            Term::Neg(a) => a.is_core(),
            _ => false,
        }
    }
}

impl Point {
    pub fn coords(t: [Term; 4]) -> Point {
        Point::Coords(Box::new(t))
    }

    /// `(n0, n1, n2, n3)` as quantity variables.
    pub fn vars(names: [&str; 4]) -> Point {
        Point::coords(names.map(Term::var))
    }

    /// Variables `{base}0 .. {base}3`.
    pub fn vector(base: &str) -> Point {
        Point::coords([0, 1, 2, 3].map(|i| Term::Var(format!("{base}{i}"))))
    }

    pub fn map(kind: MapKind, k: &str, e: &str, arg: Point) -> Point {
        Point::Map(kind, k.to_string(), e.to_string(), Box::new(arg))
    }

    pub fn is_core(&self) -> bool {
        matches!(self, Point::Coords(ts) if ts.iter().all(Term::is_core))
    }
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(binders: Vec<Binder>, body: Formula) -> Formula {
        if binders.is_empty() {
            body
        } else {
            Formula::Forall(binders, Box::new(body))
        }
    }

    pub fn exists(binders: Vec<Binder>, body: Formula) -> Formula {
        if binders.is_empty() {
            body
        } else {
            Formula::Exists(binders, Box::new(body))
        }
    }

    pub fn forall_in(var: &str, guard: Guard, body: Formula) -> Formula {
        Formula::ForallIn(vec![(var.to_string(), guard)], Box::new(body))
    }

    pub fn exists_in(var: &str, guard: Guard, body: Formula) -> Formula {
        Formula::ExistsIn(vec![(var.to_string(), guard)], Box::new(body))
    }

    pub fn w(k: &str, b: &str, p: Point) -> Formula {
        Formula::W(k.to_string(), b.to_string(), p)
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    /// Conjunction that avoids a one-element `and` node.
    pub fn and(mut parts: Vec<Formula>) -> Formula {
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::And(parts)
        }
    }

    pub fn or(mut parts: Vec<Formula>) -> Formula {
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::Or(parts)
        }
    }

    /// Whether the node is an atom (including macro atoms and translated atoms).
    pub fn is_atom(&self) -> bool {
        !matches!(
            self,
            Formula::Not(_)
                | Formula::And(_)
                | Formula::Or(_)
                | Formula::Implies(..)
                | Formula::Iff(..)
                | Formula::Forall(..)
                | Formula::Exists(..)
                | Formula::ForallIn(..)
                | Formula::ExistsIn(..)
        )
    }

    /// Whether the formula mentions the primitive ether predicate `E`.
    pub fn mentions_e(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| {
            if matches!(f, Formula::E(_)) || matches!(f, Formula::ForallIn(bs, _) | Formula::ExistsIn(bs, _) if bs.iter().any(|(_, g)| *g == Guard::E)) {
                found = true;
            }
        });
        found
    }

    /// Pre-order traversal of formula nodes, not descending into translated atoms.
    pub fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::Not(a) => a.visit(f),
            Formula::And(xs) | Formula::Or(xs) => xs.iter().for_each(|x| x.visit(f)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Formula::Forall(_, a) | Formula::Exists(_, a) | Formula::ForallIn(_, a) | Formula::ExistsIn(_, a) => a.visit(f),
            _ => {}
        }
    }

    /// Every term occurring directly in atoms (not inside translated atoms).
    pub fn atom_terms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        self.visit(&mut |f| collect_atom_terms(f, &mut out));
        out
    }

    /// Node count, used to report formula sizes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

fn collect_atom_terms<'a>(f: &'a Formula, out: &mut Vec<&'a Term>) {
    fn point<'a>(p: &'a Point, out: &mut Vec<&'a Term>) {
        match p {
            Point::Coords(ts) => out.extend(ts.iter()),
            Point::Map(_, _, _, a) | Point::Wv(_, _, a) => point(a, out),
        }
    }
    match f {
        Formula::W(_, _, p) | Formula::Wl(_, _, p) => point(p, out),
        Formula::EvEq(_, p, _, q) | Formula::PointEq(p, q) => {
            point(p, out);
            point(q, out);
        }
        Formula::Eq(a, b) | Formula::Le(a, b) | Formula::Lt(a, b) => {
            out.push(a);
            out.push(b);
        }
        Formula::VelocityIs(_, _, v) => out.extend(v.iter()),
        Formula::WvIs(_, _, q) | Formula::Triv(q) => out.extend(q.iter()),
        _ => {}
    }
}

// ---------------------------------------------------------------------------
// printing

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Lit(r) => write!(f, "{r}"),
            Term::Add(a, b) => write!(f, "(+ {a} {b})"),
            Term::Sub(a, b) => write!(f, "(- {a} {b})"),
            Term::Mul(a, b) => write!(f, "(* {a} {b})"),
            Term::Neg(a) => write!(f, "(- {a})"),
            Term::Light(LightKind::Ether) => write!(f, "c_e"),
            Term::Light(LightKind::Rel) => write!(f, "c_sr"),
            Term::Speed(k, b) => write!(f, "(speed {k} {b})"),
            Term::Space(p, q) => write!(f, "(space {p} {q})"),
            Term::Time(p, q) => write!(f, "(time {p} {q})"),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Coords(ts) => write!(f, "(pt {} {} {} {})", ts[0], ts[1], ts[2], ts[3]),
            Point::Map(kind, k, e, p) => write!(f, "({} {k} {e} {p})", kind.keyword()),
            Point::Wv(k, h, p) => write!(f, "(wv {k} {h} {p})"),
        }
    }
}

fn write_point_args(f: &mut fmt::Formatter<'_>, p: &Point) -> fmt::Result {
    match p {
        Point::Coords(ts) => write!(f, "{} {} {} {}", ts[0], ts[1], ts[2], ts[3]),
        other => write!(f, "{other}"),
    }
}

fn write_terms(f: &mut fmt::Formatter<'_>, ts: &[Term]) -> fmt::Result {
    for t in ts {
        write!(f, " {t}")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::EField => write!(f, "(euclidean-field)"),
            Formula::W(k, b, p) => {
                write!(f, "(W {k} {b} ")?;
                write_point_args(f, p)?;
                write!(f, ")")
            }
            Formula::Wl(k, b, p) => {
                write!(f, "(in-wl {k} {b} ")?;
                write_point_args(f, p)?;
                write!(f, ")")
            }
            Formula::IOb(k) => write!(f, "(IOb {k})"),
            Formula::Ph(k) => write!(f, "(Ph {k})"),
            Formula::E(k) => write!(f, "(E {k})"),
            Formula::BodyEq(a, b) => write!(f, "(= {a} {b})"),
            Formula::Eq(a, b) => write!(f, "(= {a} {b})"),
            Formula::Le(a, b) => write!(f, "(<= {a} {b})"),
            Formula::Lt(a, b) => write!(f, "(< {a} {b})"),
            Formula::Ether(e) => write!(f, "(Ether {e})"),
            Formula::Ob(k) => write!(f, "(Ob {k})"),
            Formula::EvEq(k, p, h, q) => write!(f, "(ev= {k} {p} {h} {q})"),
            Formula::PointEq(p, q) => write!(f, "(pt= {p} {q})"),
            Formula::VelocityIs(k, b, v) => {
                write!(f, "(velocity= {k} {b}")?;
                write_terms(f, &v[..])?;
                write!(f, ")")
            }
            Formula::WvIs(k, h, q) => {
                write!(f, "(wv= {k} {h}")?;
                write_terms(f, q)?;
                write!(f, ")")
            }
            Formula::Triv(q) => {
                write!(f, "(triv")?;
                write_terms(f, q)?;
                write!(f, ")")
            }
            Formula::Trans(t, a) => write!(f, "(tr {} {a})", t.name()),
            Formula::Not(a) => write!(f, "(not {a})"),
            Formula::And(xs) => {
                write!(f, "(and")?;
                for x in xs {
                    write!(f, " {x}")?;
                }
                write!(f, ")")
            }
            Formula::Or(xs) => {
                write!(f, "(or")?;
                for x in xs {
                    write!(f, " {x}")?;
                }
                write!(f, ")")
            }
            Formula::Implies(a, b) => write!(f, "(-> {a} {b})"),
            Formula::Iff(a, b) => write!(f, "(<-> {a} {b})"),
            Formula::Forall(bs, a) | Formula::Exists(bs, a) => {
                let q = if matches!(self, Formula::Forall(..)) { "forall" } else { "exists" };
                write!(f, "({q} (")?;
                for (i, b) in bs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "({} {})", b.name, b.sort.tag())?;
                }
                write!(f, ") {a})")
            }
            Formula::ForallIn(bs, a) | Formula::ExistsIn(bs, a) => {
                let q = if matches!(self, Formula::ForallIn(..)) { "forall-in" } else { "exists-in" };
                write!(f, "({q} (")?;
                for (i, (v, g)) in bs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "({v} {})", g.keyword())?;
                }
                write!(f, ") {a})")
            }
        }
    }
}

/// Canonical text of a formula.
pub fn print(f: &Formula) -> String {
    f.to_string()
}

/// Indented multi-line rendering for files meant to be read by people.
/// Parses back to the same formula.
pub fn pretty(f: &Formula, width: usize) -> String {
    let mut out = String::new();
    pretty_into(&f.to_string(), 0, width, &mut out);
    out
}

fn pretty_into(text: &str, indent: usize, width: usize, out: &mut String) {
    if text.len() + indent <= width || !text.starts_with('(') {
        out.push_str(text);
        return;
    }
    let items = split_top_level(&text[1..text.len() - 1]);
    let inline = if matches!(items[0], "forall" | "exists" | "forall-in" | "exists-in") { 2 } else { 1 };
    out.push('(');
    out.push_str(&items[..inline.min(items.len())].join(" "));
    for item in items.iter().skip(inline) {
        out.push('\n');
        out.push_str(&" ".repeat(indent + 2));
        pretty_into(item, indent + 2, width, out);
    }
    out.push(')');
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut items = Vec::new();
    let mut depth = 0usize;
    let mut start = None;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => {
                if depth == 0 && start.is_none() {
                    start = Some(i);
                }
                depth += 1;
            }
            ')' => {
                depth -= 1;
                if depth == 0 {
                    if let Some(st) = start.take() {
                        items.push(&s[st..=i]);
                    }
                }
            }
            c if c.is_whitespace() => {
                if depth == 0 {
                    if let Some(st) = start.take() {
                        items.push(&s[st..i]);
                    }
                }
            }
            _ => {
                if start.is_none() {
                    start = Some(i);
                }
            }
        }
    }
    if let Some(st) = start {
        items.push(&s[st..]);
    }
    items
}

// ---------------------------------------------------------------------------
// variables

fn term_vars(t: &Term, out: &mut BTreeMap<String, Sort>) {
    match t {
        Term::Var(v) => {
            out.insert(v.clone(), Sort::Quantity);
        }
        Term::Lit(_) | Term::Light(_) => {}
        Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => {
            term_vars(a, out);
            term_vars(b, out);
        }
        Term::Neg(a) => term_vars(a, out),
        Term::Speed(k, b) => {
            out.insert(k.clone(), Sort::Body);
            out.insert(b.clone(), Sort::Body);
        }
        Term::Space(p, q) | Term::Time(p, q) => {
            point_vars(p, out);
            point_vars(q, out);
        }
    }
}

fn point_vars(p: &Point, out: &mut BTreeMap<String, Sort>) {
    match p {
        Point::Coords(ts) => ts.iter().for_each(|t| term_vars(t, out)),
        Point::Map(_, k, e, a) | Point::Wv(k, e, a) => {
            out.insert(k.clone(), Sort::Body);
            out.insert(e.clone(), Sort::Body);
            point_vars(a, out);
        }
    }
}

fn body(out: &mut BTreeMap<String, Sort>, names: &[&String]) {
    for n in names {
        out.insert((*n).clone(), Sort::Body);
    }
}

/// Free variables with their sorts, ordered by name.
pub fn free_vars(f: &Formula) -> BTreeMap<String, Sort> {
    let mut out = BTreeMap::new();
    match f {
        Formula::True | Formula::False | Formula::EField => {}
        Formula::W(k, b, p) | Formula::Wl(k, b, p) => {
            body(&mut out, &[k, b]);
            point_vars(p, &mut out);
        }
        Formula::IOb(k) | Formula::Ph(k) | Formula::E(k) | Formula::Ether(k) | Formula::Ob(k) => body(&mut out, &[k]),
        Formula::BodyEq(a, b) => body(&mut out, &[a, b]),
        Formula::Eq(a, b) | Formula::Le(a, b) | Formula::Lt(a, b) => {
            term_vars(a, &mut out);
            term_vars(b, &mut out);
        }
        Formula::EvEq(k, p, h, q) => {
            body(&mut out, &[k, h]);
            point_vars(p, &mut out);
            point_vars(q, &mut out);
        }
        Formula::PointEq(p, q) => {
            point_vars(p, &mut out);
            point_vars(q, &mut out);
        }
        Formula::VelocityIs(k, b, v) => {
            body(&mut out, &[k, b]);
            v.iter().for_each(|t| term_vars(t, &mut out));
        }
        Formula::WvIs(k, h, q) => {
            body(&mut out, &[k, h]);
            q.iter().for_each(|t| term_vars(t, &mut out));
        }
        Formula::Triv(q) => q.iter().for_each(|t| term_vars(t, &mut out)),
        Formula::Trans(_, a) | Formula::Not(a) => out = free_vars(a),
        Formula::And(xs) | Formula::Or(xs) => {
            for x in xs {
                out.extend(free_vars(x));
            }
        }
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            out = free_vars(a);
            out.extend(free_vars(b));
        }
        Formula::Forall(bs, a) | Formula::Exists(bs, a) => {
            out = free_vars(a);
            for b in bs {
                out.remove(&b.name);
            }
        }
        Formula::ForallIn(bs, a) | Formula::ExistsIn(bs, a) => {
            out = free_vars(a);
            for (v, _) in bs {
                out.remove(v);
            }
        }
    }
    out
}

/// Every variable name occurring in the formula, free or bound.
pub fn all_names(f: &Formula) -> BTreeSet<String> {
    let mut names: BTreeSet<String> = BTreeSet::new();
    fn go(f: &Formula, names: &mut BTreeSet<String>) {
        names.extend(free_vars_shallow(f));
        match f {
            Formula::Trans(_, a) | Formula::Not(a) => go(a, names),
            Formula::And(xs) | Formula::Or(xs) => xs.iter().for_each(|x| go(x, names)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                go(a, names);
                go(b, names);
            }
            Formula::Forall(bs, a) | Formula::Exists(bs, a) => {
                names.extend(bs.iter().map(|b| b.name.clone()));
                go(a, names);
            }
            Formula::ForallIn(bs, a) | Formula::ExistsIn(bs, a) => {
                names.extend(bs.iter().map(|b| b.0.clone()));
                go(a, names);
            }
            _ => {}
        }
    }
    fn free_vars_shallow(f: &Formula) -> Vec<String> {
        if f.is_atom() && !matches!(f, Formula::Trans(..)) {
            free_vars(f).into_keys().collect()
        } else {
            Vec::new()
        }
    }
    go(f, &mut names);
    names
}

/// Generator of variable names in the reserved `_` namespace.
#[derive(Clone, Debug, Default)]
pub struct Fresh {
    avoid: BTreeSet<String>,
    counter: usize,
}

impl Fresh {
    pub fn avoiding(f: &Formula) -> Fresh {
        Fresh { avoid: all_names(f), counter: 0 }
    }

    pub fn avoid(&mut self, name: &str) {
        self.avoid.insert(name.to_string());
    }

    pub fn name(&mut self, base: &str) -> String {
        loop {
            self.counter += 1;
            let candidate = format!("_{base}{}", self.counter);
            if !self.avoid.contains(&candidate) {
                self.avoid.insert(candidate.clone());
                return candidate;
            }
        }
    }

    pub fn point(&mut self, base: &str) -> ([String; 4], Point) {
        let stem = self.name(base);
        let names = [0, 1, 2, 3].map(|i| format!("{stem}_{i}"));
        for n in &names {
            self.avoid.insert(n.clone());
        }
        let p = Point::coords(names.clone().map(Term::Var));
        (names, p)
    }
}

/// Replacement for [`substitute`]: a body variable or a quantity term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Subst {
    Body(String),
    Quantity(Term),
}

impl Subst {
    fn sort(&self) -> Sort {
        match self {
            Subst::Body(_) => Sort::Body,
            Subst::Quantity(_) => Sort::Quantity,
        }
    }

    fn free(&self) -> BTreeSet<String> {
        match self {
            Subst::Body(b) => [b.clone()].into_iter().collect(),
            Subst::Quantity(t) => {
                let mut m = BTreeMap::new();
                term_vars(t, &mut m);
                m.into_keys().collect()
            }
        }
    }
}

/// Capture-avoiding replacement of the free occurrences of `var`.
pub fn substitute(f: &Formula, var: &str, replacement: Subst) -> Result<Formula, LogicError> {
    let fv = free_vars(f);
    let Some(&sort) = fv.get(var) else {
        return Ok(f.clone());
    };
    if sort != replacement.sort() {
        return Err(LogicError::SortMismatch { var: var.to_string(), expected: sort, found: replacement.sort() });
    }
    let mut map = HashMap::new();
    map.insert(var.to_string(), replacement);
    let mut fresh = Fresh::avoiding(f);
    for r in map.values() {
        for n in r.free() {
            fresh.avoid(&n);
        }
    }
    Ok(subst_formula(f, &map, &mut fresh))
}

/// Simultaneous substitution; keys absent from the formula are ignored.
pub fn substitute_all(f: &Formula, map: &HashMap<String, Subst>) -> Formula {
    let mut fresh = Fresh::avoiding(f);
    for r in map.values() {
        for n in r.free() {
            fresh.avoid(&n);
        }
    }
    subst_formula(f, map, &mut fresh)
}

fn subst_body(name: &str, map: &HashMap<String, Subst>) -> String {
    match map.get(name) {
        Some(Subst::Body(b)) => b.clone(),
        _ => name.to_string(),
    }
}

fn subst_term(t: &Term, map: &HashMap<String, Subst>) -> Term {
    match t {
        Term::Var(v) => match map.get(v) {
            Some(Subst::Quantity(r)) => r.clone(),
            _ => t.clone(),
        },
        Term::Lit(_) | Term::Light(_) => t.clone(),
        Term::Add(a, b) => Term::add(subst_term(a, map), subst_term(b, map)),
        Term::Sub(a, b) => Term::sub(subst_term(a, map), subst_term(b, map)),
        Term::Mul(a, b) => Term::mul(subst_term(a, map), subst_term(b, map)),
        Term::Neg(a) => Term::neg(subst_term(a, map)),
        Term::Speed(k, b) => Term::Speed(subst_body(k, map), subst_body(b, map)),
        Term::Space(p, q) => Term::Space(Box::new(subst_point(p, map)), Box::new(subst_point(q, map))),
        Term::Time(p, q) => Term::Time(Box::new(subst_point(p, map)), Box::new(subst_point(q, map))),
    }
}

fn subst_point(p: &Point, map: &HashMap<String, Subst>) -> Point {
    match p {
        Point::Coords(ts) => Point::Coords(Box::new([0, 1, 2, 3].map(|i| subst_term(&ts[i], map)))),
        Point::Map(kind, k, e, a) => Point::Map(*kind, subst_body(k, map), subst_body(e, map), Box::new(subst_point(a, map))),
        Point::Wv(k, h, a) => Point::Wv(subst_body(k, map), subst_body(h, map), Box::new(subst_point(a, map))),
    }
}

fn subst_formula(f: &Formula, map: &HashMap<String, Subst>, fresh: &mut Fresh) -> Formula {
    let b = |n: &String| subst_body(n, map);
    let t = |x: &Term| subst_term(x, map);
    let p = |x: &Point| subst_point(x, map);
    match f {
        Formula::True | Formula::False | Formula::EField => f.clone(),
        Formula::W(k, h, x) => Formula::W(b(k), b(h), p(x)),
        Formula::Wl(k, h, x) => Formula::Wl(b(k), b(h), p(x)),
        Formula::IOb(k) => Formula::IOb(b(k)),
        Formula::Ph(k) => Formula::Ph(b(k)),
        Formula::E(k) => Formula::E(b(k)),
        Formula::Ether(k) => Formula::Ether(b(k)),
        Formula::Ob(k) => Formula::Ob(b(k)),
        Formula::BodyEq(x, y) => Formula::BodyEq(b(x), b(y)),
        Formula::Eq(x, y) => Formula::Eq(t(x), t(y)),
        Formula::Le(x, y) => Formula::Le(t(x), t(y)),
        Formula::Lt(x, y) => Formula::Lt(t(x), t(y)),
        Formula::EvEq(k, x, h, y) => Formula::EvEq(b(k), p(x), b(h), p(y)),
        Formula::PointEq(x, y) => Formula::PointEq(p(x), p(y)),
        Formula::VelocityIs(k, h, v) => Formula::VelocityIs(b(k), b(h), Box::new([t(&v[0]), t(&v[1]), t(&v[2])])),
        Formula::WvIs(k, h, q) => Formula::WvIs(b(k), b(h), q.iter().map(t).collect()),
        Formula::Triv(q) => Formula::Triv(q.iter().map(t).collect()),
        Formula::Trans(tk, a) => Formula::Trans(*tk, Box::new(subst_formula(a, map, fresh))),
        Formula::Not(a) => Formula::not(subst_formula(a, map, fresh)),
        Formula::And(xs) => Formula::And(xs.iter().map(|x| subst_formula(x, map, fresh)).collect()),
        Formula::Or(xs) => Formula::Or(xs.iter().map(|x| subst_formula(x, map, fresh)).collect()),
        Formula::Implies(x, y) => Formula::implies(subst_formula(x, map, fresh), subst_formula(y, map, fresh)),
        Formula::Iff(x, y) => Formula::iff(subst_formula(x, map, fresh), subst_formula(y, map, fresh)),
        Formula::Forall(bs, a) | Formula::Exists(bs, a) => {
            let names: Vec<(String, Sort)> = bs.iter().map(|x| (x.name.clone(), x.sort)).collect();
            let (names, body) = subst_under_binders(&names, a, map, fresh);
            let bs = names.into_iter().map(|(name, sort)| Binder { name, sort }).collect();
            if matches!(f, Formula::Forall(..)) {
                Formula::Forall(bs, Box::new(body))
            } else {
                Formula::Exists(bs, Box::new(body))
            }
        }
        Formula::ForallIn(bs, a) | Formula::ExistsIn(bs, a) => {
            let names: Vec<(String, Sort)> = bs.iter().map(|x| (x.0.clone(), Sort::Body)).collect();
            let (names, body) = subst_under_binders(&names, a, map, fresh);
            let bs = names.into_iter().zip(bs.iter()).map(|((n, _), (_, g))| (n, *g)).collect();
            if matches!(f, Formula::ForallIn(..)) {
                Formula::ForallIn(bs, Box::new(body))
            } else {
                Formula::ExistsIn(bs, Box::new(body))
            }
        }
    }
}

fn subst_under_binders(
    binders: &[(String, Sort)],
    body: &Formula,
    map: &HashMap<String, Subst>,
    fresh: &mut Fresh,
) -> (Vec<(String, Sort)>, Formula) {
    let mut inner: HashMap<String, Subst> = map.clone();
    for (n, _) in binders {
        inner.remove(n);
    }
    if inner.is_empty() {
        return (binders.to_vec(), body.clone());
    }
    let body_free = free_vars(body);
    let live: BTreeSet<String> = inner
        .iter()
        .filter(|(k, _)| body_free.contains_key(*k))
        .flat_map(|(_, r)| r.free())
        .collect();
    let mut out = Vec::new();
    for (n, s) in binders {
        if live.contains(n) {
            let renamed = fresh.name(n.trim_start_matches('_'));
            inner.insert(
                n.clone(),
                match s {
                    Sort::Body => Subst::Body(renamed.clone()),
                    Sort::Quantity => Subst::Quantity(Term::Var(renamed.clone())),
                },
            );
            out.push((renamed, *s));
        } else {
            out.push((n.clone(), *s));
        }
    }
    (out, subst_formula(body, &inner, fresh))
}

/// Consistently renames bound variables to `v1, v2, ...` in binding order, so
/// that alpha-equivalent formulas compare equal.
pub fn alpha_normalize(f: &Formula) -> Formula {
    let mut counter = 0usize;
    alpha_go(f, &HashMap::new(), &mut counter)
}

fn alpha_go(f: &Formula, env: &HashMap<String, Subst>, counter: &mut usize) -> Formula {
    let mut bind = |names: Vec<(String, Sort)>, env: &HashMap<String, Subst>| {
        let mut inner = env.clone();
        let mut out = Vec::new();
        for (n, s) in names {
            *counter += 1;
            let fresh = format!("#{}", *counter);
            inner.insert(
                n,
                match s {
                    Sort::Body => Subst::Body(fresh.clone()),
                    Sort::Quantity => Subst::Quantity(Term::Var(fresh.clone())),
                },
            );
            out.push(fresh);
        }
        (out, inner)
    };
    match f {
        Formula::Forall(bs, a) | Formula::Exists(bs, a) => {
            let (names, inner) = bind(bs.iter().map(|b| (b.name.clone(), b.sort)).collect(), env);
            let body = alpha_go(a, &inner, counter);
            let bs = names.into_iter().zip(bs).map(|(name, b)| Binder { name, sort: b.sort }).collect();
            if matches!(f, Formula::Forall(..)) {
                Formula::Forall(bs, Box::new(body))
            } else {
                Formula::Exists(bs, Box::new(body))
            }
        }
        Formula::ForallIn(bs, a) | Formula::ExistsIn(bs, a) => {
            let (names, inner) = bind(bs.iter().map(|b| (b.0.clone(), Sort::Body)).collect(), env);
            let body = alpha_go(a, &inner, counter);
            let bs = names.into_iter().zip(bs).map(|(n, (_, g))| (n, *g)).collect();
            if matches!(f, Formula::ForallIn(..)) {
                Formula::ForallIn(bs, Box::new(body))
            } else {
                Formula::ExistsIn(bs, Box::new(body))
            }
        }
        Formula::Trans(t, a) => Formula::Trans(*t, Box::new(alpha_go(a, env, counter))),
        Formula::Not(a) => Formula::not(alpha_go(a, env, counter)),
        Formula::And(xs) => Formula::And(xs.iter().map(|x| alpha_go(x, env, counter)).collect()),
        Formula::Or(xs) => Formula::Or(xs.iter().map(|x| alpha_go(x, env, counter)).collect()),
        Formula::Implies(a, b) => Formula::implies(alpha_go(a, env, counter), alpha_go(b, env, counter)),
        Formula::Iff(a, b) => Formula::iff(alpha_go(a, env, counter), alpha_go(b, env, counter)),
        atom => {
            let mut fresh = Fresh::default();
            subst_formula(atom, env, &mut fresh)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_vars_of_equation() {
        let f = parse("(= x y)").unwrap();
        let fv: Vec<_> = free_vars(&f).into_keys().collect();
        assert_eq!(fv, vec!["x", "y"]);
    }

    #[test]
    fn substitute_body_variable() {
        let f = parse("(IOb b)").unwrap();
        let g = substitute(&f, "b", Subst::Body("e".into())).unwrap();
        assert_eq!(g, Formula::IOb("e".into()));
    }

    #[test]
    fn substitute_leaves_bound_occurrences() {
        let f = parse("(exists ((b B)) (IOb b))").unwrap();
        assert_eq!(substitute(&f, "b", Subst::Body("e".into())).unwrap(), f);
    }

    #[test]
    fn substitute_avoids_capture() {
        let f = parse("(exists ((y Q)) (< x y))").unwrap();
        let g = substitute(&f, "x", Subst::Quantity(Term::var("y"))).unwrap();
        let Formula::Exists(bs, body) = &g else { panic!() };
        assert_ne!(bs[0].name, "y");
        assert_eq!(**body, Formula::Lt(Term::var("y"), Term::Var(bs[0].name.clone())));
    }

    #[test]
    fn substitute_rejects_wrong_sort() {
        let f = parse("(IOb b)").unwrap();
        assert!(matches!(substitute(&f, "b", Subst::Quantity(Term::int(1))), Err(LogicError::SortMismatch { .. })));
    }

    #[test]
    fn alpha_normalize_identifies_renamings() {
        let a = parse("(forall ((x Q)) (exists-in ((k IOb)) (W k k x 0 0 0)))").unwrap();
        let b = parse("(forall ((t Q)) (exists-in ((h IOb)) (W h h t 0 0 0)))").unwrap();
        assert_eq!(alpha_normalize(&a), alpha_normalize(&b));
    }

    #[test]
    fn pretty_output_parses_back() {
        for name in AXIOM_NAMES {
            let f = axiom(name).unwrap();
            assert_eq!(parse(&pretty(&f, 60)).unwrap(), f, "{name}");
        }
    }
}
