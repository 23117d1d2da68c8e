//! Choosing values for blocks of quantity variables.
//!
//! Atoms of the quantified formula suggest values: an incidence atom puts a
//! point on a worldline, an equation is solved for its last free variable, a
//! cone comparison puts two points on or inside a light cone, a `wv=` atom
//! reads off the worldview transformation. Hints are applied in random order
//! and skipped at random, so samples mix constrained and free values.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::eval::{wv_coefficients, Env, Evaluator, Fail, Truth, Val};
use super::num::Num;
use super::random::{pool_value, pythagorean_fraction, random_trivial, rational_unit_vector};
use super::view::seen_velocity;
use crate::logic::{free_vars, Formula, Guard, Point, Sort, Term, TrKind};
use crate::scalar::Rat;
use crate::spacetime::{Event, Velocity};

#[derive(Clone, Debug)]
pub(crate) enum HintKind {
    Incidence(String, String, Point),
    PointEq(Point, Point),
    EvEq(String, Point, String, Point),
    Linear(Term, Term),
    Cone { p: Point, q: Point, c: Term, light: bool },
    Triv(Vec<Term>),
    WvIs(String, String, Vec<Term>),
    VelocityIs(String, String, [Term; 3]),
}

#[derive(Clone, Debug)]
pub(crate) struct Hint {
    chain: Vec<TrKind>,
    kind: HintKind,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Hints {
    list: Vec<Hint>,
    bodies: Vec<(String, Option<Guard>, Vec<TrKind>)>,
    quantities: Vec<String>,
}

fn term_vars(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(n) => {
            out.insert(n.clone());
        }
        Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => {
            term_vars(a, out);
            term_vars(b, out);
        }
        Term::Neg(a) => term_vars(a, out),
        Term::Space(p, q) | Term::Time(p, q) => {
            point_vars(p, out);
            point_vars(q, out);
        }
        Term::Lit(_) | Term::Light(_) | Term::Speed(..) => {}
    }
}

fn point_vars(p: &Point, out: &mut BTreeSet<String>) {
    match p {
        Point::Coords(ts) => ts.iter().for_each(|t| term_vars(t, out)),
        Point::Map(_, _, _, a) | Point::Wv(_, _, a) => point_vars(a, out),
    }
}

fn is_zero_lit(t: &Term) -> bool {
    matches!(t, Term::Lit(r) if *r == Rat::int(0))
}

/// `space(P,Q) ~ c·time(P,Q)`
fn cone_shape(a: &Term, b: &Term) -> Option<(Point, Point, Term)> {
    let Term::Space(p, q) = a else { return None };
    let Term::Mul(c, time) = b else { return None };
    let Term::Time(p2, q2) = time.as_ref() else { return None };
    (p == p2 && q == q2).then(|| ((**p).clone(), (**q).clone(), (**c).clone()))
}

fn atom_hints(f: &Formula) -> Vec<HintKind> {
    match f {
        Formula::W(k, b, p) | Formula::Wl(k, b, p) => vec![HintKind::Incidence(k.clone(), b.clone(), p.clone())],
        Formula::PointEq(p, q) => vec![HintKind::PointEq(p.clone(), q.clone())],
        Formula::EvEq(k, p, h, q) => vec![HintKind::EvEq(k.clone(), p.clone(), h.clone(), q.clone())],
        Formula::Triv(q) => vec![HintKind::Triv(q.clone())],
        Formula::WvIs(k, h, q) => vec![HintKind::WvIs(k.clone(), h.clone(), q.clone())],
        Formula::VelocityIs(k, b, v) => vec![HintKind::VelocityIs(k.clone(), b.clone(), (**v).clone())],
        Formula::Eq(a, b) | Formula::Lt(a, b) | Formula::Le(a, b) => {
            if let Some((p, q, c)) = cone_shape(a, b) {
                return vec![HintKind::Cone { p, q, c, light: matches!(f, Formula::Eq(..)) }];
            }
            if !matches!(f, Formula::Eq(..)) {
                return Vec::new();
            }
            match (a, b) {
                (Term::Time(p, q), z) if is_zero_lit(z) => match (p.as_ref(), q.as_ref()) {
                    (Point::Coords(x), Point::Coords(y)) => vec![HintKind::Linear(x[0].clone(), y[0].clone())],
                    _ => Vec::new(),
                },
                (Term::Space(p, q), z) if is_zero_lit(z) => match (p.as_ref(), q.as_ref()) {
                    (Point::Coords(x), Point::Coords(y)) => {
                        (1..4).map(|i| HintKind::Linear(x[i].clone(), y[i].clone())).collect()
                    }
                    _ => Vec::new(),
                },
                _ => vec![HintKind::Linear(a.clone(), b.clone())],
            }
        }
        _ => Vec::new(),
    }
}

impl Evaluator<'_> {
    pub(crate) fn collect_hints(&mut self, block: &[String], body: &Formula, _env: &Env) -> Hints {
        let mut hints = Hints::default();
        let chain = self.chain.clone();
        walk(body, &chain, block, &mut hints);
        hints
    }

    fn unassigned(block: &[String], env: &Env, name: &str) -> bool {
        block.iter().any(|b| b == name) && Self::lookup(env, name).is_none()
    }

    /// One assignment to `block`, in block order.
    pub(crate) fn sample(&mut self, block: &[String], hints: &Hints, env: &Env, universal: bool) -> Vec<Rat> {
        let mut scratch: Env = env.iter().filter(|(n, _)| !block.contains(n)).cloned().collect();
        let c = self.c().clone();
        for q in &hints.quantities {
            let v = pool_value(&mut self.rng, &c);
            scratch.push((q.clone(), Val::Q(Num::rat(v))));
        }
        let saved = self.chain.clone();
        for (name, guard, chain) in &hints.bodies {
            self.chain = chain.clone();
            let mut ids = self.active_ids();
            ids.shuffle(&mut self.rng);
            for id in ids {
                scratch.push((name.clone(), Val::Body(id)));
                let ok = guard.is_none_or(|g| self.atom(&g.atom(name), &scratch) == Truth::True);
                if ok {
                    break;
                }
                scratch.pop();
            }
        }
        self.chain = saved.clone();
        let use_hints = !universal || self.rng.random_bool(0.8);
        if use_hints {
            let mut order: Vec<usize> = (0..hints.list.len()).collect();
            order.shuffle(&mut self.rng);
            for i in order {
                if self.rng.random_bool(0.85) {
                    let h = &hints.list[i];
                    self.chain = h.chain.clone();
                    self.apply(&h.kind, block, &mut scratch);
                    self.chain = saved.clone();
                }
            }
        }
        block
            .iter()
            .map(|v| match Self::lookup(&scratch, v) {
                Some(Val::Q(x)) => x.as_rat().cloned().expect("assignments are rational"),
                _ => pool_value(&mut self.rng, &c),
            })
            .collect()
    }

    fn commit(env: &mut Env, pending: Vec<(String, Rat)>) {
        for (n, v) in pending {
            env.push((n, Val::Q(Num::rat(v))));
        }
    }

    /// The single unassigned variable value making the term `t` vanish, if
    /// `t` is affine in it with non-zero slope.
    pub(crate) fn solve_linear(&mut self, t: &Term, var: &str, env: &mut Env) -> Option<Rat> {
        let mut r = Vec::new();
        for x in 0..3 {
            env.push((var.to_string(), Val::Q(Num::int(x))));
            let v = self.term(t, env);
            env.pop();
            r.push(v.ok()?.into_rat()?);
        }
        let slope = &r[1] - &r[0];
        if &r[2] - &r[1] != slope || slope == Rat::int(0) {
            return None;
        }
        Some(Rat(&(-&r[0]).0 / &slope.0))
    }

    /// New assignments making `p` evaluate to `target`.
    fn invert_point(&mut self, p: &Point, target: &Event<Rat>, block: &[String], env: &mut Env) -> Option<Vec<(String, Rat)>> {
        match p {
            Point::Coords(ts) => {
                let base = env.len();
                let mut pending = Vec::new();
                let mut ok = true;
                for (t, want) in ts.iter().zip(&target.0) {
                    match t {
                        Term::Var(n) if Self::unassigned(block, env, n) => {
                            pending.push((n.clone(), want.clone()));
                            env.push((n.clone(), Val::Q(Num::rat(want.clone()))));
                        }
                        _ => match self.term(t, env) {
                            Ok(v) => {
                                if v != Num::rat(want.clone()) {
                                    ok = false;
                                    break;
                                }
                            }
                            Err(_) => {
                                let mut vars = BTreeSet::new();
                                term_vars(t, &mut vars);
                                let free: Vec<String> =
                                    vars.into_iter().filter(|n| Self::unassigned(block, env, n)).collect();
                                let diff = Term::sub(t.clone(), Term::lit(want.clone()));
                                match free.as_slice() {
                                    [one] => match self.solve_linear(&diff, one, env) {
                                        Some(x) => {
                                            pending.push((one.clone(), x.clone()));
                                            env.push((one.clone(), Val::Q(Num::rat(x))));
                                        }
                                        None => {
                                            ok = false;
                                            break;
                                        }
                                    },
                                    _ => {
                                        ok = false;
                                        break;
                                    }
                                }
                            }
                        },
                    }
                }
                env.truncate(base);
                ok.then_some(pending)
            }
            Point::Map(kind, k, e, a) => {
                let m = self.map_of(*kind, k, e, env).ok()?;
                let inv = m.inverse().ok()?;
                self.invert_point(a, &inv.apply(target), block, env)
            }
            Point::Wv(k, h, a) => {
                let w = self.worldview(k, h, env).ok()?;
                let inv = w.inverse().ok()?;
                self.invert_point(a, &inv.apply(target), block, env)
            }
        }
    }

    fn assign_terms(&mut self, terms: &[Term], values: &[Rat], block: &[String], env: &mut Env) -> bool {
        let mut any = false;
        for (t, v) in terms.iter().zip(values) {
            if let Term::Var(n) = t {
                if Self::unassigned(block, env, n) {
                    env.push((n.clone(), Val::Q(Num::rat(v.clone()))));
                    any = true;
                }
            }
        }
        any
    }

    fn random_event(&mut self) -> Event<Rat> {
        let c = self.c().clone();
        Event(std::array::from_fn(|_| pool_value(&mut self.rng, &c)))
    }

    fn nonzero(&mut self) -> Rat {
        let c = self.c().clone();
        loop {
            let v = pool_value(&mut self.rng, &c);
            if v != Rat::int(0) {
                return v;
            }
        }
    }

    /// Applies a hint; returns whether anything was assigned.
    fn apply(&mut self, h: &HintKind, block: &[String], env: &mut Env) -> bool {
        match h {
            HintKind::Incidence(k, b, p) => {
                let (Ok(line), Ok(kid)) = (self.line_of(b, env), self.body_of(env, k)) else { return false };
                let Ok(kv) = self.view(kid) else { return false };
                let Some(frame) = kv.view.frame.clone() else { return false };
                let c = self.c().clone();
                let s = pool_value(&mut self.rng, &c);
                let target = frame.apply(&line.at(&s));
                match self.invert_point(p, &target, block, env) {
                    Some(pending) if !pending.is_empty() => {
                        Self::commit(env, pending);
                        true
                    }
                    _ => false,
                }
            }
            HintKind::PointEq(p, q) => {
                self.seed_point(p, q, block, env);
                self.match_points(p, q, block, env)
            }
            HintKind::EvEq(k, p, h, q) => {
                self.seed_point(p, q, block, env);
                self.ev_match(k, p, h, q, block, env) || self.ev_match(h, q, k, p, block, env)
            }
            HintKind::Linear(a, b) => {
                let diff = Term::sub(a.clone(), b.clone());
                let mut vars = BTreeSet::new();
                term_vars(&diff, &mut vars);
                let free: Vec<String> = vars.into_iter().filter(|n| Self::unassigned(block, env, n)).collect();
                let Some((last, rest)) = free.split_last() else { return false };
                let c = self.c().clone();
                for v in rest {
                    let x = pool_value(&mut self.rng, &c);
                    env.push((v.clone(), Val::Q(Num::rat(x))));
                }
                match self.solve_linear(&diff, last, env) {
                    Some(x) => {
                        env.push((last.clone(), Val::Q(Num::rat(x))));
                        true
                    }
                    None => !rest.is_empty(),
                }
            }
            HintKind::Cone { p, q, c, light } => {
                let Ok(cv) = self.term(c, env) else { return false };
                let Some(cv) = cv.into_rat().filter(|x| x.is_positive()) else { return false };
                let (from, to) = match (self.point(p, env), self.point(q, env)) {
                    (Ok(_), Ok(_)) => return false,
                    (Ok(x), Err(_)) => (x, q),
                    (Err(_), Ok(y)) => (y, p),
                    (Err(_), Err(_)) => {
                        let x = self.random_event();
                        match self.invert_point(p, &x, block, env) {
                            Some(pending) => Self::commit(env, pending),
                            None => return false,
                        }
                        (x, q)
                    }
                };
                let dt = self.nonzero();
                let n = rational_unit_vector(&mut self.rng);
                let f = if *light {
                    Rat::int(1)
                } else if self.rng.random_bool(0.3) {
                    Rat::int(0)
                } else {
                    pythagorean_fraction(&mut self.rng)
                };
                let r = &(&cv * &f) * &(if dt.is_negative() { -&dt } else { dt.clone() });
                let shift = Event([dt, &r * &n.0[0], &r * &n.0[1], &r * &n.0[2]]);
                let target = &from + &shift;
                match self.invert_point(to, &target, block, env) {
                    Some(pending) => {
                        Self::commit(env, pending);
                        true
                    }
                    None => false,
                }
            }
            HintKind::Triv(q) => {
                let m = random_trivial(&mut self.rng);
                self.assign_terms(q, &wv_coefficients(&m), block, env)
            }
            HintKind::WvIs(k, h, q) => match self.worldview(k, h, env) {
                Ok(w) => self.assign_terms(q, &wv_coefficients(&w), block, env),
                Err(_) => false,
            },
            HintKind::VelocityIs(k, b, v) => {
                let r = (|| {
                    let kv = self.view(self.body_of(env, k)?).map_err(|_| Fail::Unknown)?;
                    let frame = kv.view.frame.clone().ok_or(Fail::Undef)?;
                    let line = self.line_of(b, env)?;
                    seen_velocity(&frame, &line).ok_or(Fail::Undef)
                })();
                match r {
                    Ok(Velocity(vel)) => self.assign_terms(v, &vel, block, env),
                    Err(_) => false,
                }
            }
        }
    }

    /// When neither side has a value yet, gives `p` a random one.
    fn seed_point(&mut self, p: &Point, q: &Point, block: &[String], env: &mut Env) {
        if self.point(p, env).is_ok() || self.point(q, env).is_ok() {
            return;
        }
        let x = self.random_event();
        if let Some(pending) = self.invert_point(p, &x, block, env) {
            Self::commit(env, pending);
        }
    }

    fn ev_match(&mut self, k: &str, p: &Point, h: &str, q: &Point, block: &[String], env: &mut Env) -> bool {
        let Ok(x) = self.point(p, env) else { return false };
        let Ok(base) = self.event_of(k, &x, env) else { return false };
        let Ok(hid) = self.body_of(env, h) else { return false };
        let Ok(hv) = self.view(hid) else { return false };
        let Some(frame) = hv.view.frame.clone() else { return false };
        match self.invert_point(q, &frame.apply(&base), block, env) {
            Some(pending) if !pending.is_empty() => {
                Self::commit(env, pending);
                true
            }
            _ => false,
        }
    }

    fn match_points(&mut self, p: &Point, q: &Point, block: &[String], env: &mut Env) -> bool {
        for (from, to) in [(p, q), (q, p)] {
            if let Ok(x) = self.point(from, env) {
                if let Some(pending) = self.invert_point(to, &x, block, env) {
                    if !pending.is_empty() {
                        Self::commit(env, pending);
                        return true;
                    }
                }
                return false;
            }
        }
        false
    }

    /// Exact truth of `∃block body` when conjuncts of `body` force every
    /// variable of the block.
    pub(crate) fn determined(&mut self, block: &[String], body: &Formula, env: &Env) -> Option<Truth> {
        let mut conj = Vec::new();
        let chain = self.chain.clone();
        conjuncts(body, &chain, &mut conj);
        let mut scratch: Env = env.iter().filter(|(n, _)| !block.contains(n)).cloned().collect();
        let saved = self.chain.clone();
        let mut progress = true;
        let mut forced_false = false;
        while progress && !forced_false {
            progress = false;
            for (chain, atom) in &conj {
                let fv = free_vars(atom);
                let pending: Vec<&String> = fv.keys().filter(|v| Self::unassigned(block, &scratch, v)).collect();
                if pending.is_empty() {
                    continue;
                }
                if fv.iter().any(|(v, s)| {
                    !block.contains(v) && Self::lookup(&scratch, v).is_none() && (*s == Sort::Quantity || self.body_id(v).is_none())
                }) {
                    continue;
                }
                self.chain = chain.clone();
                let step = self.force(atom, block, &mut scratch);
                self.chain = saved.clone();
                match step {
                    Some(true) => progress = true,
                    Some(false) => {}
                    None => forced_false = true,
                }
            }
        }
        if forced_false {
            return Some(Truth::False);
        }
        if block.iter().any(|v| Self::lookup(&scratch, v).is_none()) {
            return None;
        }
        let out = self.eval(body, &mut scratch);
        (out.t != Truth::Unknown).then_some(out.t)
    }

    /// Assigns the values an atom forces. `None` when the atom is false for
    /// every value of the block.
    fn force(&mut self, atom: &Formula, block: &[String], env: &mut Env) -> Option<bool> {
        match atom {
            Formula::EvEq(k, p, h, q) => {
                for (a, x, b, y) in [(k, p, h, q), (h, q, k, p)] {
                    if let Ok(px) = self.point(x, env) {
                        let base = match self.event_of(a, &px, env) {
                            Ok(e) => e,
                            Err(_) => return Some(false),
                        };
                        let Ok(bid) = self.body_of(env, b) else { return Some(false) };
                        let Ok(bv) = self.view(bid) else { return Some(false) };
                        let Some(frame) = bv.view.frame.clone() else { return Some(false) };
                        return match self.invert_point(y, &frame.apply(&base), block, env) {
                            Some(pending) if !pending.is_empty() && self.forces_all(y, block, env) => {
                                Self::commit(env, pending);
                                Some(true)
                            }
                            _ => Some(false),
                        };
                    }
                }
                Some(false)
            }
            Formula::PointEq(p, q) => {
                for (x, y) in [(p, q), (q, p)] {
                    if let Ok(px) = self.point(x, env) {
                        return match self.invert_point(y, &px, block, env) {
                            Some(pending) if !pending.is_empty() && self.forces_all(y, block, env) => {
                                Self::commit(env, pending);
                                Some(true)
                            }
                            _ => Some(false),
                        };
                    }
                }
                Some(false)
            }
            Formula::WvIs(k, h, q) => match self.worldview(k, h, env) {
                Ok(w) => Some(self.assign_terms(q, &wv_coefficients(&w), block, env)),
                Err(Fail::Undef) => None,
                Err(Fail::Unknown) => Some(false),
            },
            Formula::Eq(a, b) => {
                let diff = Term::sub(a.clone(), b.clone());
                let mut vars = BTreeSet::new();
                term_vars(&diff, &mut vars);
                let free: Vec<String> = vars.into_iter().filter(|n| Self::unassigned(block, env, n)).collect();
                let [one] = free.as_slice() else { return Some(false) };
                match self.solve_linear(&diff, one, env) {
                    Some(x) => {
                        env.push((one.clone(), Val::Q(Num::rat(x))));
                        Some(true)
                    }
                    None => Some(false),
                }
            }
            _ => Some(false),
        }
    }

    /// Whether every coordinate of `p` that mentions the block is a plain
    /// variable or affine in one variable, so the preimage is unique.
    fn forces_all(&mut self, p: &Point, block: &[String], env: &Env) -> bool {
        match p {
            Point::Coords(ts) => {
                let mut seen = BTreeSet::new();
                for t in ts.iter() {
                    let mut vars = BTreeSet::new();
                    term_vars(t, &mut vars);
                    let free: Vec<String> = vars.into_iter().filter(|n| Self::unassigned(block, env, n)).collect();
                    if free.len() > 1 {
                        return false;
                    }
                    if let Some(v) = free.first() {
                        if !seen.insert(v.clone()) {
                            return false;
                        }
                    }
                }
                true
            }
            Point::Map(_, _, _, a) | Point::Wv(_, _, a) => self.forces_all(a, block, env),
        }
    }
}

fn mentions_block(f: &Formula, block: &[String]) -> bool {
    let fv = free_vars(f);
    block.iter().any(|b| fv.contains_key(b))
}

fn walk(f: &Formula, chain: &[TrKind], block: &[String], hints: &mut Hints) {
    match f {
        Formula::Trans(t, a) => {
            let mut c = chain.to_vec();
            c.push(*t);
            walk(a, &c, block, hints);
        }
        Formula::Not(a) => walk(a, chain, block, hints),
        Formula::And(xs) | Formula::Or(xs) => xs.iter().for_each(|x| walk(x, chain, block, hints)),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            walk(a, chain, block, hints);
            walk(b, chain, block, hints);
        }
        Formula::Forall(bs, a) | Formula::Exists(bs, a) => {
            for b in bs {
                match b.sort {
                    Sort::Body => hints.bodies.push((b.name.clone(), None, chain.to_vec())),
                    Sort::Quantity => hints.quantities.push(b.name.clone()),
                }
            }
            walk(a, chain, block, hints);
        }
        Formula::ForallIn(bs, a) | Formula::ExistsIn(bs, a) => {
            for (v, g) in bs {
                hints.bodies.push((v.clone(), Some(*g), chain.to_vec()));
            }
            walk(a, chain, block, hints);
        }
        atom => {
            if mentions_block(atom, block) {
                for kind in atom_hints(atom) {
                    hints.list.push(Hint { chain: chain.to_vec(), kind });
                }
            }
        }
    }
}

/// Atoms that are conjuncts of `f`, with the translator chain they sit under.
fn conjuncts(f: &Formula, chain: &[TrKind], out: &mut Vec<(Vec<TrKind>, Formula)>) {
    match f {
        Formula::Trans(t, a) => {
            let mut c = chain.to_vec();
            c.push(*t);
            conjuncts(a, &c, out);
        }
        Formula::And(xs) => xs.iter().for_each(|x| conjuncts(x, chain, out)),
        atom if atom.is_atom() => out.push((chain.to_vec(), atom.clone())),
        _ => {}
    }
}
