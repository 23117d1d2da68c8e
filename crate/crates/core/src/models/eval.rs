//! Three-valued evaluation of kinematic formulas in a model.
//!
//! Body quantifiers range over the roster plus bodies synthesized for the
//! current scope. Universal quantity blocks are sampled; `True` for them
//! means no counterexample was found. Existential quantity blocks are
//! decided exactly when their conjuncts pin the witness down or when a single
//! variable enters every atom linearly; otherwise witnesses are searched for
//! and failure to find one is `Unknown`.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::num::Num;
use super::view::{base_view, cone_scale_of_inverse, derive, seen_velocity, Inexact, View};
use super::{Body, Model};
use crate::logic::{free_vars, Binder, Formula, Guard, LightKind, MapKind, Point, Sort, Term, TrKind};
use crate::scalar::Rat;
use crate::spacetime::{Event, Line};
use crate::transforms::{radarization_closed, x_map, y_map, AffineMap4, TransformError};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Val {
    Body(usize),
    Q(Num),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    pub fn from_bool(b: bool) -> Truth {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }

    pub fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }

    pub fn and(self, o: Truth) -> Truth {
        match (self, o) {
            (Truth::False, _) | (_, Truth::False) => Truth::False,
            (Truth::True, Truth::True) => Truth::True,
            _ => Truth::Unknown,
        }
    }

    pub fn or(self, o: Truth) -> Truth {
        self.not().and(o.not()).not()
    }

    pub fn implies(self, o: Truth) -> Truth {
        self.not().or(o)
    }
}

/// A falsified instance: under `bindings` (on top of the enclosing
/// assignment) `focus` is false, and so is the formula it came from.
#[derive(Clone, Debug, Serialize)]
pub struct Cex {
    pub bindings: Vec<(String, Val)>,
    #[serde(serialize_with = "display")]
    pub focus: Formula,
    /// synthesized bodies referenced by the bindings
    pub bodies: Vec<Body>,
}

fn display<S: serde::Serializer>(f: &Formula, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&f.to_string())
}

#[derive(Clone, Debug)]
pub(crate) struct Out {
    pub t: Truth,
    pub cex: Option<Cex>,
}

impl Out {
    fn of(t: Truth) -> Out {
        Out { t, cex: None }
    }

    fn fail(focus: &Formula) -> Out {
        Out { t: Truth::False, cex: Some(Cex { bindings: Vec::new(), focus: focus.clone(), bodies: Vec::new() }) }
    }
}

/// Why a term or point has no value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Fail {
    /// the defining condition fails, so atoms over it are false
    Undef,
    /// exact arithmetic cannot represent the value, or a variable is unbound
    Unknown,
}

pub(crate) type Env = Vec<(String, Val)>;

pub(crate) struct ViewData {
    pub view: View,
    pub inv: Option<AffineMap4<Rat>>,
    cone: std::cell::OnceCell<Option<Num>>,
}

impl ViewData {
    /// Light speed in this frame when it is isotropic there.
    pub fn cone(&self, c: &Rat) -> Option<&Num> {
        self.cone.get_or_init(|| self.inv.as_ref().and_then(|inv| cone_scale_of_inverse(inv, c))).as_ref()
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Dom {
    Body(Option<Guard>),
    Quantity,
}

const MIN_SAMPLES: usize = 12;
const SEARCH_TRIES: usize = 200;
const ONE_D_ROUNDS: usize = 16;

pub struct Evaluator<'m> {
    pub(crate) model: &'m Model,
    pub(crate) synth: Vec<Body>,
    next_id: usize,
    pub(crate) chain: Vec<TrKind>,
    views: HashMap<(Vec<TrKind>, usize), Result<Rc<ViewData>, Inexact>>,
    synth_views: HashMap<(Vec<TrKind>, usize), Result<Rc<ViewData>, Inexact>>,
    maps: HashMap<(Vec<TrKind>, MapKind, usize, usize), Result<AffineMap4<Rat>, Fail>>,
    lights: HashMap<(Vec<TrKind>, LightKind), Result<Num, Fail>>,
    pub(crate) rng: ChaCha8Rng,
    pub(crate) budget: usize,
    pub(crate) fanout: usize,
    samples: usize,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m Model, budget: usize, seed: u64) -> Evaluator<'m> {
        Evaluator {
            model,
            synth: Vec::new(),
            next_id: model.bodies.len(),
            chain: Vec::new(),
            views: HashMap::new(),
            synth_views: HashMap::new(),
            maps: HashMap::new(),
            lights: HashMap::new(),
            rng: super::random::rng(seed),
            budget,
            fanout: 1,
            samples: 0,
        }
    }

    /// Quantity assignments tried so far.
    pub fn samples_used(&self) -> usize {
        self.samples
    }

    /// Makes bodies (for instance from a counterexample) part of the domain.
    pub fn add_bodies(&mut self, bodies: &[Body]) {
        for b in bodies {
            if self.body(b.id).is_none() {
                self.next_id = self.next_id.max(b.id + 1);
                self.synth.push(b.clone());
            }
        }
    }

    pub fn evaluate(&mut self, f: &Formula, bindings: &[(String, Val)]) -> (Truth, Option<Cex>) {
        let mut env: Env = bindings.to_vec();
        let out = self.eval(f, &mut env);
        (out.t, out.cex)
    }

    pub fn body_id(&self, name: &str) -> Option<usize> {
        self.model.bodies.iter().chain(&self.synth).find(|b| b.name == name).map(|b| b.id)
    }

    pub(crate) fn body(&self, id: usize) -> Option<&Body> {
        if id < self.model.bodies.len() {
            Some(&self.model.bodies[id])
        } else {
            self.synth.iter().find(|b| b.id == id)
        }
    }

    pub(crate) fn active_ids(&self) -> Vec<usize> {
        (0..self.model.bodies.len()).chain(self.synth.iter().map(|b| b.id)).collect()
    }

    pub(crate) fn fresh_id(&mut self) -> usize {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    pub(crate) fn c(&self) -> &Rat {
        &self.model.c
    }

    pub(crate) fn view_in(&mut self, chain: &[TrKind], id: usize) -> Result<Rc<ViewData>, Inexact> {
        let key = (chain.to_vec(), id);
        let roster = id < self.model.bodies.len();
        let cached = if roster { self.views.get(&key) } else { self.synth_views.get(&key) };
        if let Some(v) = cached {
            return v.clone();
        }
        let view = match chain.split_last() {
            None => Ok(base_view(self.body(id).expect("known body"))),
            Some((t, rest)) => match self.view_in(rest, id) {
                Ok(p) => derive(*t, &p.view, &self.model.c),
                Err(e) => Err(e),
            },
        };
        let data = view.map(|view| {
            let inv = view.frame.as_ref().and_then(|f| f.inverse().ok());
            Rc::new(ViewData { view, inv, cone: std::cell::OnceCell::new() })
        });
        if roster {
            self.views.insert(key, data.clone());
        } else {
            self.synth_views.insert(key, data.clone());
        }
        data
    }

    fn forget(&mut self, id: usize) {
        self.synth_views.retain(|(_, i), _| *i != id);
    }

    pub(crate) fn view(&mut self, id: usize) -> Result<Rc<ViewData>, Inexact> {
        let chain = self.chain.clone();
        self.view_in(&chain, id)
    }

    // ------------------------------------------------------------------
    // terms and points

    pub(crate) fn lookup<'e>(env: &'e Env, name: &str) -> Option<&'e Val> {
        env.iter().rev().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub(crate) fn body_of(&self, env: &Env, name: &str) -> Result<usize, Fail> {
        match Self::lookup(env, name) {
            Some(Val::Body(id)) => Ok(*id),
            _ => self.body_id(name).ok_or(Fail::Unknown),
        }
    }

    fn light(&mut self, kind: LightKind) -> Result<Num, Fail> {
        let key = (self.chain.clone(), kind);
        if let Some(v) = self.lights.get(&key) {
            return v.clone();
        }
        let mut value: Result<Num, Fail> = Err(Fail::Undef);
        match kind {
            LightKind::Ether => {
                for id in 0..self.model.bodies.len() {
                    match self.view(id) {
                        Ok(v) if v.view.iob && v.cone(&self.model.c).is_some() => {
                            value = v.cone(&self.model.c).cloned().ok_or(Fail::Undef);
                            break;
                        }
                        Ok(_) => {}
                        Err(_) => value = Err(Fail::Unknown),
                    }
                }
            }
            LightKind::Rel => {
                let mut common: Option<Num> = None;
                value = Ok(Num::zero());
                for id in 0..self.model.bodies.len() {
                    let v = match self.view(id) {
                        Ok(v) => v,
                        Err(_) => {
                            value = Err(Fail::Unknown);
                            break;
                        }
                    };
                    if !v.view.iob || v.view.frame.is_none() {
                        continue;
                    }
                    match v.cone(&self.model.c).cloned() {
                        Some(s) if common.as_ref().is_none_or(|x| *x == s) => common = Some(s),
                        _ => {
                            value = Err(Fail::Undef);
                            break;
                        }
                    }
                }
                if value.is_ok() {
                    value = common.ok_or(Fail::Undef);
                }
            }
        }
        self.lights.insert(key, value.clone());
        value
    }

    pub(crate) fn term(&mut self, t: &Term, env: &Env) -> Result<Num, Fail> {
        Ok(match t {
            Term::Var(n) => match Self::lookup(env, n) {
                Some(Val::Q(x)) => x.clone(),
                _ => return Err(Fail::Unknown),
            },
            Term::Lit(r) => Num::rat(r.clone()),
            Term::Add(a, b) => self.term(a, env)?.add(&self.term(b, env)?).ok_or(Fail::Unknown)?,
            Term::Sub(a, b) => self.term(a, env)?.sub(&self.term(b, env)?).ok_or(Fail::Unknown)?,
            Term::Mul(a, b) => {
                let x = self.term(a, env)?;
                x.mul(&self.term(b, env)?)
            }
            Term::Neg(a) => self.term(a, env)?.neg(),
            Term::Light(kind) => self.light(*kind)?,
            Term::Speed(k, b) => {
                let kv = self.view(self.body_of(env, k)?).map_err(|_| Fail::Unknown)?;
                let bv = self.view(self.body_of(env, b)?).map_err(|_| Fail::Unknown)?;
                let frame = kv.view.frame.as_ref().ok_or(Fail::Undef)?;
                let line = bv.view.line.as_ref().ok_or(Fail::Undef)?;
                let v = seen_velocity(frame, line).ok_or(Fail::Undef)?;
                Num::sqrt(&v.norm_sq()).expect("non-negative")
            }
            Term::Space(p, q) => {
                let (x, y) = (self.point(p, env)?, self.point(q, env)?);
                Num::sqrt(&crate::spacetime::space_sq(&x, &y)).expect("non-negative")
            }
            Term::Time(p, q) => {
                let (x, y) = (self.point(p, env)?, self.point(q, env)?);
                let d = x.t() - y.t();
                Num::rat(if d.is_negative() { -d } else { d })
            }
        })
    }

    pub(crate) fn map_of(&mut self, kind: MapKind, k: &str, e: &str, env: &Env) -> Result<AffineMap4<Rat>, Fail> {
        let (kid, eid) = (self.body_of(env, k)?, self.body_of(env, e)?);
        let n = self.model.bodies.len();
        if kid < n && eid < n {
            let key = (self.chain.clone(), kind, kid, eid);
            if let Some(m) = self.maps.get(&key) {
                return m.clone();
            }
            let m = self.compute_map(kind, kid, eid);
            self.maps.insert(key, m.clone());
            return m;
        }
        self.compute_map(kind, kid, eid)
    }

    fn compute_map(&mut self, kind: MapKind, kid: usize, eid: usize) -> Result<AffineMap4<Rat>, Fail> {
        let kv = self.view(kid).map_err(|_| Fail::Unknown)?;
        let ev = self.view(eid).map_err(|_| Fail::Unknown)?;
        let frame = kv.view.frame.as_ref().ok_or(Fail::Undef)?;
        let line = ev.view.line.as_ref().ok_or(Fail::Undef)?;
        let v = seen_velocity(frame, line).ok_or(Fail::Undef)?;
        let c = self.light(kind.light())?.into_rat().ok_or(Fail::Unknown)?;
        let conv = |r: Result<AffineMap4<Rat>, TransformError>| match r {
            Ok(m) => Ok(m),
            Err(TransformError::SpeedNotSTL(_)) => Err(Fail::Undef),
            Err(_) => Err(Fail::Unknown),
        };
        let inv = |m: AffineMap4<Rat>| m.inverse().map_err(|_| Fail::Unknown);
        match kind {
            MapKind::Rad => conv(radarization_closed(&v, &c)),
            MapKind::RadInv => inv(conv(radarization_closed(&v, &c))?),
            MapKind::X => conv(x_map(&v, &c)),
            MapKind::XInv => inv(conv(x_map(&v, &c))?),
            MapKind::Y => conv(y_map(&v, &c)),
            MapKind::YInv => inv(conv(y_map(&v, &c))?),
        }
    }

    /// `w_kh` in the current structure.
    pub(crate) fn worldview(&mut self, k: &str, h: &str, env: &Env) -> Result<AffineMap4<Rat>, Fail> {
        let kv = self.view(self.body_of(env, k)?).map_err(|_| Fail::Unknown)?;
        let hv = self.view(self.body_of(env, h)?).map_err(|_| Fail::Unknown)?;
        let inv = kv.inv.as_ref().ok_or(Fail::Undef)?;
        let fh = hv.view.frame.as_ref().ok_or(Fail::Undef)?;
        Ok(fh.compose(inv))
    }

    pub(crate) fn point(&mut self, p: &Point, env: &Env) -> Result<Event<Rat>, Fail> {
        match p {
            Point::Coords(ts) => {
                let mut out = Vec::with_capacity(4);
                for t in ts.iter() {
                    out.push(self.term(t, env)?.into_rat().ok_or(Fail::Unknown)?);
                }
                Ok(Event(out.try_into().expect("four coordinates")))
            }
            Point::Map(kind, k, e, a) => {
                let m = self.map_of(*kind, k, e, env)?;
                Ok(m.apply(&self.point(a, env)?))
            }
            Point::Wv(k, h, a) => {
                let x = self.point(a, env)?;
                let kv = self.view(self.body_of(env, k)?).map_err(|_| Fail::Unknown)?;
                let hv = self.view(self.body_of(env, h)?).map_err(|_| Fail::Unknown)?;
                let inv = kv.inv.as_ref().ok_or(Fail::Undef)?;
                let fh = hv.view.frame.as_ref().ok_or(Fail::Undef)?;
                Ok(fh.apply(&inv.apply(&x)))
            }
        }
    }

    /// `e0`-coordinates of the event `k` sees at `x`.
    pub(crate) fn event_of(&mut self, k: &str, x: &Event<Rat>, env: &Env) -> Result<Event<Rat>, Fail> {
        let kv = self.view(self.body_of(env, k)?).map_err(|_| Fail::Unknown)?;
        let inv = kv.inv.as_ref().ok_or(Fail::Undef)?;
        Ok(inv.apply(x))
    }

    pub(crate) fn line_of(&mut self, b: &str, env: &Env) -> Result<Line<Rat>, Fail> {
        let bv = self.view(self.body_of(env, b)?).map_err(|_| Fail::Unknown)?;
        bv.view.line.clone().ok_or(Fail::Undef)
    }

    // ------------------------------------------------------------------
    // atoms

    fn truth<T>(r: Result<T, Fail>, f: impl FnOnce(T) -> bool) -> Truth {
        match r {
            Ok(x) => Truth::from_bool(f(x)),
            Err(Fail::Undef) => Truth::False,
            Err(Fail::Unknown) => Truth::Unknown,
        }
    }

    fn flag(&mut self, env: &Env, name: &str, f: impl FnOnce(&ViewData, &Rat) -> bool) -> Truth {
        let id = match self.body_of(env, name) {
            Ok(id) => id,
            Err(_) => return Truth::Unknown,
        };
        match self.view(id) {
            Ok(v) => Truth::from_bool(f(&v, &self.model.c)),
            Err(_) => Truth::Unknown,
        }
    }

    pub(crate) fn atom(&mut self, f: &Formula, env: &Env) -> Truth {
        match f {
            Formula::True | Formula::EField => Truth::True,
            Formula::False => Truth::False,
            Formula::IOb(k) => self.flag(env, k, |v, _| v.view.iob),
            Formula::Ph(k) => self.flag(env, k, |v, _| v.view.ph),
            Formula::E(k) => self.flag(env, k, |v, _| v.view.e),
            Formula::Ether(k) => self.flag(env, k, |v, c| v.view.iob && v.cone(c).is_some()),
            Formula::Ob(k) => self.flag(env, k, |v, _| v.view.frame.is_some()),
            Formula::BodyEq(a, b) => match (self.body_of(env, a), self.body_of(env, b)) {
                (Ok(x), Ok(y)) => Truth::from_bool(x == y),
                _ => Truth::Unknown,
            },
            Formula::W(k, b, p) | Formula::Wl(k, b, p) => {
                let r = (|| {
                    let x = self.point(p, env)?;
                    let ev = self.event_of(k, &x, env)?;
                    Ok(self.line_of(b, env)?.contains(&ev))
                })();
                Self::truth(r, |x| x)
            }
            Formula::Eq(a, b) => Self::truth(self.term(a, env).and_then(|x| Ok((x, self.term(b, env)?))), |(x, y)| x == y),
            Formula::Le(a, b) => Self::truth(self.term(a, env).and_then(|x| Ok((x, self.term(b, env)?))), |(x, y)| x <= y),
            Formula::Lt(a, b) => Self::truth(self.term(a, env).and_then(|x| Ok((x, self.term(b, env)?))), |(x, y)| x < y),
            Formula::PointEq(p, q) => Self::truth(self.point(p, env).and_then(|x| Ok((x, self.point(q, env)?))), |(x, y)| x == y),
            Formula::EvEq(k, p, h, q) => {
                let r = (|| {
                    let x = self.point(p, env)?;
                    let y = self.point(q, env)?;
                    let a = self.event_of(k, &x, env);
                    let b = self.event_of(h, &y, env);
                    match (a, b) {
                        (Ok(a), Ok(b)) => Ok(a == b),
                        (Err(Fail::Undef), Err(Fail::Undef)) => Ok(true),
                        (Err(Fail::Unknown), _) | (_, Err(Fail::Unknown)) => Err(Fail::Unknown),
                        _ => Ok(false),
                    }
                })();
                Self::truth(r, |x| x)
            }
            Formula::VelocityIs(k, b, v) => {
                let r = (|| {
                    let kv = self.view(self.body_of(env, k)?).map_err(|_| Fail::Unknown)?;
                    let frame = kv.view.frame.clone().ok_or(Fail::Undef)?;
                    let line = self.line_of(b, env)?;
                    let vel = seen_velocity(&frame, &line).ok_or(Fail::Undef)?;
                    let mut ok = true;
                    for i in 0..3 {
                        ok &= self.term(&v[i], env)? == Num::rat(vel.0[i].clone());
                    }
                    Ok(ok)
                })();
                Self::truth(r, |x| x)
            }
            Formula::WvIs(k, h, q) => {
                let r = (|| {
                    let w = match self.worldview(k, h, env) {
                        Ok(w) => w,
                        Err(Fail::Undef) => return Err(Fail::Undef),
                        Err(e) => return Err(e),
                    };
                    let coeffs = wv_coefficients(&w);
                    let mut ok = true;
                    for (t, c) in q.iter().zip(coeffs) {
                        ok &= self.term(t, env)? == Num::rat(c);
                    }
                    Ok(ok)
                })();
                Self::truth(r, |x| x)
            }
            Formula::Triv(q) => {
                let r = (|| {
                    let mut vals = Vec::with_capacity(20);
                    for t in q {
                        vals.push(self.term(t, env)?);
                    }
                    Ok(is_trivial(&vals))
                })();
                Self::truth(r, |x| x)
            }
            other => unreachable!("not an atom: {other}"),
        }
    }

    // ------------------------------------------------------------------
    // formulas

    pub(crate) fn eval(&mut self, f: &Formula, env: &mut Env) -> Out {
        match f {
            Formula::Trans(t, a) => {
                self.chain.push(*t);
                let mut out = self.eval(a, env);
                self.chain.pop();
                if let Some(c) = out.cex.as_mut() {
                    c.focus = Formula::Trans(*t, Box::new(c.focus.clone()));
                }
                out
            }
            Formula::Not(a) => {
                let t = self.eval(a, env).t.not();
                if t == Truth::False {
                    Out::fail(f)
                } else {
                    Out::of(t)
                }
            }
            Formula::And(xs) => {
                let mut acc = Truth::True;
                for x in xs {
                    let o = self.eval(x, env);
                    if o.t == Truth::False {
                        return o;
                    }
                    acc = acc.and(o.t);
                }
                Out::of(acc)
            }
            Formula::Or(xs) => {
                let mut acc = Truth::False;
                for x in xs {
                    acc = acc.or(self.eval(x, env).t);
                    if acc == Truth::True {
                        return Out::of(acc);
                    }
                }
                if acc == Truth::False {
                    Out::fail(f)
                } else {
                    Out::of(acc)
                }
            }
            Formula::Implies(a, b) => {
                let ta = self.eval(a, env).t;
                if ta == Truth::False {
                    return Out::of(Truth::True);
                }
                let ob = self.eval(b, env);
                let t = ta.implies(ob.t);
                if t == Truth::False {
                    match ob.cex {
                        Some(mut c) => {
                            c.focus = Formula::Implies(a.clone(), Box::new(c.focus));
                            Out { t, cex: Some(c) }
                        }
                        None => Out::fail(f),
                    }
                } else {
                    Out::of(t)
                }
            }
            Formula::Iff(a, b) => {
                let ta = self.eval(a, env).t;
                let tb = self.eval(b, env).t;
                let t = match (ta, tb) {
                    (Truth::Unknown, _) | (_, Truth::Unknown) => Truth::Unknown,
                    _ => Truth::from_bool(ta == tb),
                };
                if t == Truth::False {
                    Out::fail(f)
                } else {
                    Out::of(t)
                }
            }
            Formula::Forall(bs, a) | Formula::Exists(bs, a) => {
                let vars: Vec<(String, Dom)> = bs
                    .iter()
                    .map(|b| (b.name.clone(), if b.sort == Sort::Body { Dom::Body(None) } else { Dom::Quantity }))
                    .collect();
                self.quant(matches!(f, Formula::Forall(..)), &vars, a, env)
            }
            Formula::ForallIn(bs, a) | Formula::ExistsIn(bs, a) => {
                let vars: Vec<(String, Dom)> = bs.iter().map(|(v, g)| (v.clone(), Dom::Body(Some(*g)))).collect();
                self.quant(matches!(f, Formula::ForallIn(..)), &vars, a, env)
            }
            atom => {
                let t = self.atom(atom, env);
                if t == Truth::False {
                    Out::fail(atom)
                } else {
                    Out::of(t)
                }
            }
        }
    }

    fn quant(&mut self, universal: bool, vars: &[(String, Dom)], body: &Formula, env: &mut Env) -> Out {
        let Some((first, _)) = vars.split_first() else { return self.eval(body, env) };
        match &first.1 {
            Dom::Body(guard) => self.body_quant(universal, &first.0, *guard, &vars[1..], body, env),
            Dom::Quantity => {
                let n = vars.iter().take_while(|(_, d)| matches!(d, Dom::Quantity)).count();
                let block: Vec<String> = vars[..n].iter().map(|(v, _)| v.clone()).collect();
                let rest = &vars[n..];
                let inner = rebuild(universal, rest, body);
                if universal {
                    self.forall_block(&block, &inner, env)
                } else {
                    self.exists_block(&block, &inner, env)
                }
            }
        }
    }

    fn guard_truth(&mut self, guard: Option<Guard>, var: &str, env: &mut Env) -> Truth {
        match guard {
            None => Truth::True,
            Some(g) => self.atom(&g.atom(var), env),
        }
    }

    fn body_quant(
        &mut self,
        universal: bool,
        var: &str,
        guard: Option<Guard>,
        rest: &[(String, Dom)],
        body: &Formula,
        env: &mut Env,
    ) -> Out {
        let mut candidates: Vec<(usize, Option<Body>)> = self.active_ids().into_iter().map(|id| (id, None)).collect();
        let mut incomplete = false;
        if !universal {
            let rebuilt;
            let scope = if rest.is_empty() {
                body
            } else {
                rebuilt = rebuild(false, rest, body);
                &rebuilt
            };
            let (bodies, inexact) = self.synthesize(var, guard, scope, env);
            incomplete = inexact;
            // witnesses built for this scope are the likeliest to succeed
            let roster = std::mem::take(&mut candidates);
            candidates = bodies.into_iter().map(|b| (b.id, Some(b))).collect();
            candidates.extend(roster);
        }
        let saved_fanout = self.fanout;
        self.fanout = self.fanout.saturating_mul(candidates.len().max(1));
        let mut acc = if universal { Truth::True } else { Truth::False };
        let mut result: Option<Out> = None;
        for (id, synthesized) in candidates {
            let pushed = synthesized.is_some();
            if let Some(b) = synthesized {
                self.synth.push(b);
            }
            env.push((var.to_string(), Val::Body(id)));
            let g = self.guard_truth(guard, var, env);
            let out = if g == Truth::False { Out::of(if universal { Truth::True } else { Truth::False }) } else { self.quant(universal, rest, body, env) };
            env.pop();
            let t = if universal { g.implies(out.t) } else { g.and(out.t) };
            if universal && t == Truth::False {
                let mut cex = out.cex.unwrap_or_else(|| Cex { bindings: Vec::new(), focus: rebuild(true, rest, body), bodies: Vec::new() });
                cex.bindings.insert(0, (var.to_string(), Val::Body(id)));
                if pushed {
                    cex.bodies.push(self.synth.last().expect("pushed").clone());
                }
                result = Some(Out { t: Truth::False, cex: Some(cex) });
            }
            if pushed {
                self.synth.pop();
                self.forget(id);
            }
            if result.is_some() {
                break;
            }
            if universal {
                acc = acc.and(t);
            } else {
                acc = acc.or(t);
                if acc == Truth::True {
                    break;
                }
            }
        }
        self.fanout = saved_fanout;
        if let Some(out) = result {
            return out;
        }
        if acc == Truth::False && incomplete {
            return Out::of(Truth::Unknown);
        }
        if acc == Truth::False {
            let node = rebuild(false, &[(var.to_string(), Dom::Body(guard))], &rebuild(false, rest, body));
            return Out::fail(&node);
        }
        Out::of(acc)
    }

    fn block_samples(&self) -> usize {
        if self.budget == 0 {
            return 0;
        }
        (self.budget / self.fanout.max(1)).clamp(MIN_SAMPLES.min(self.budget), self.budget)
    }

    fn forall_block(&mut self, block: &[String], body: &Formula, env: &mut Env) -> Out {
        let fv = free_vars(body);
        if !block.iter().any(|v| fv.contains_key(v)) {
            return self.eval(body, env);
        }
        let n = self.block_samples();
        if n == 0 {
            return Out::of(Truth::Unknown);
        }
        let hints = self.collect_hints(block, body, env);
        let saved = self.fanout;
        self.fanout = self.fanout.saturating_mul(n);
        let mut acc = Truth::True;
        let mut any_true = false;
        let mut failure = None;
        for _ in 0..n {
            let values = self.sample(block, &hints, env, true);
            self.samples += 1;
            let base = env.len();
            for (v, x) in block.iter().zip(&values) {
                env.push((v.clone(), Val::Q(Num::rat(x.clone()))));
            }
            let out = self.eval(body, env);
            env.truncate(base);
            match out.t {
                Truth::True => any_true = true,
                Truth::Unknown => acc = Truth::Unknown,
                Truth::False => {
                    let mut cex = out.cex.unwrap_or_else(|| Cex { bindings: Vec::new(), focus: body.clone(), bodies: Vec::new() });
                    let mut bindings: Vec<(String, Val)> =
                        block.iter().zip(values).map(|(v, x)| (v.clone(), Val::Q(Num::rat(x)))).collect();
                    bindings.append(&mut cex.bindings);
                    cex.bindings = bindings;
                    failure = Some(cex);
                    break;
                }
            }
        }
        self.fanout = saved;
        if let Some(cex) = failure {
            return Out { t: Truth::False, cex: Some(cex) };
        }
        if any_true {
            Out::of(Truth::True)
        } else {
            Out::of(acc)
        }
    }

    fn exists_block(&mut self, block: &[String], body: &Formula, env: &mut Env) -> Out {
        let node = Formula::Exists(block.iter().map(|v| Binder::quantity(v)).collect(), Box::new(body.clone()));
        let fv = free_vars(body);
        if !block.iter().any(|v| fv.contains_key(v)) {
            let out = self.eval(body, env);
            return if out.t == Truth::False { Out::fail(&node) } else { out };
        }
        if let Some(t) = self.determined(block, body, env) {
            return if t == Truth::False { Out::fail(&node) } else { Out::of(t) };
        }
        if block.len() == 1 {
            if let Some(t) = self.decide_one(&block[0], body, env) {
                return if t == Truth::False { Out::fail(&node) } else { Out::of(t) };
            }
        }
        let tries = SEARCH_TRIES.min(self.budget);
        let hints = self.collect_hints(block, body, env);
        for _ in 0..tries {
            let values = self.sample(block, &hints, env, false);
            self.samples += 1;
            let base = env.len();
            for (v, x) in block.iter().zip(&values) {
                env.push((v.clone(), Val::Q(Num::rat(x.clone()))));
            }
            let t = self.eval(body, env).t;
            env.truncate(base);
            if t == Truth::True {
                return Out::of(Truth::True);
            }
        }
        Out::of(Truth::Unknown)
    }

    // ------------------------------------------------------------------
    // one existential quantity variable entering linearly

    /// Values of `var` where the truth of some atom of `f` may change, and
    /// whether every atom mentioning `var` could be analysed.
    fn criticals(&mut self, f: &Formula, var: &str, env: &mut Env, out: &mut Vec<Num>) -> bool {
        match f {
            Formula::Trans(t, a) => {
                self.chain.push(*t);
                let ok = self.criticals(a, var, env, out);
                self.chain.pop();
                ok
            }
            Formula::Not(a) => self.criticals(a, var, env, out),
            Formula::And(xs) | Formula::Or(xs) => {
                let mut ok = true;
                for x in xs {
                    ok &= self.criticals(x, var, env, out);
                }
                ok
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                let x = self.criticals(a, var, env, out);
                let y = self.criticals(b, var, env, out);
                x && y
            }
            Formula::Forall(bs, a) | Formula::Exists(bs, a) => {
                if bs.iter().any(|b| b.name == var) {
                    return true;
                }
                let fv = free_vars(a);
                !fv.contains_key(var) || self.criticals_under(a, var, env, out, bs.iter().map(|b| b.name.clone()).collect())
            }
            Formula::ForallIn(bs, a) | Formula::ExistsIn(bs, a) => {
                if bs.iter().any(|(b, _)| b == var) {
                    return true;
                }
                self.criticals_under(a, var, env, out, bs.iter().map(|(b, _)| b.clone()).collect())
            }
            atom => {
                let fv = free_vars(atom);
                if !fv.contains_key(var) {
                    return true;
                }
                if fv.keys().any(|v| v != var && Self::lookup(env, v).is_none() && self.body_id(v).is_none()) {
                    return false;
                }
                self.atom_roots(atom, var, env, out)
            }
        }
    }

    fn criticals_under(&mut self, a: &Formula, var: &str, env: &mut Env, out: &mut Vec<Num>, bound: BTreeSet<String>) -> bool {
        let mut ok = true;
        a.visit(&mut |g| {
            if g.is_atom() {
                let fv = free_vars(g);
                if fv.contains_key(var) && fv.keys().any(|v| bound.contains(v)) {
                    ok = false;
                }
            }
        });
        ok && self.criticals_flat(a, var, env, out)
    }

    fn criticals_flat(&mut self, a: &Formula, var: &str, env: &mut Env, out: &mut Vec<Num>) -> bool {
        match a {
            Formula::Forall(_, b) | Formula::Exists(_, b) | Formula::ForallIn(_, b) | Formula::ExistsIn(_, b) => {
                self.criticals_flat(b, var, env, out)
            }
            other => self.criticals(other, var, env, out),
        }
    }

    /// Pairs of numbers whose comparisons decide the atom.
    fn residuals(&mut self, atom: &Formula, env: &Env) -> Result<Vec<(Num, Num)>, Fail> {
        let rat = |x: &Rat| Num::rat(x.clone());
        match atom {
            Formula::Eq(a, b) | Formula::Le(a, b) | Formula::Lt(a, b) => {
                let x = self.term(a, env)?;
                let y = self.term(b, env)?;
                Ok(vec![(x, y)])
            }
            Formula::PointEq(p, q) => {
                let x = self.point(p, env)?;
                let y = self.point(q, env)?;
                Ok((0..4).map(|i| (rat(&x.0[i]), rat(&y.0[i]))).collect())
            }
            Formula::EvEq(k, p, h, q) => {
                let x = self.point(p, env)?;
                let y = self.point(q, env)?;
                let a = self.event_of(k, &x, env)?;
                let b = self.event_of(h, &y, env)?;
                Ok((0..4).map(|i| (rat(&a.0[i]), rat(&b.0[i]))).collect())
            }
            Formula::W(k, b, p) | Formula::Wl(k, b, p) => {
                let x = self.point(p, env)?;
                let ev = self.event_of(k, &x, env)?;
                let line = self.line_of(b, env)?;
                let rel = &ev - &line.point;
                let mut out = Vec::new();
                for i in 0..4 {
                    for j in i + 1..4 {
                        out.push((rat(&(&rel.0[i] * &line.dir.0[j])), rat(&(&rel.0[j] * &line.dir.0[i]))));
                    }
                }
                Ok(out)
            }
            Formula::VelocityIs(k, b, v) => {
                let kv = self.view(self.body_of(env, k)?).map_err(|_| Fail::Unknown)?;
                let frame = kv.view.frame.clone().ok_or(Fail::Undef)?;
                let line = self.line_of(b, env)?;
                let vel = seen_velocity(&frame, &line).ok_or(Fail::Undef)?;
                let mut out = Vec::new();
                for i in 0..3 {
                    out.push((self.term(&v[i], env)?, rat(&vel.0[i])));
                }
                Ok(out)
            }
            Formula::WvIs(k, h, q) => {
                let w = self.worldview(k, h, env)?;
                let mut out = Vec::new();
                for (t, c) in q.iter().zip(wv_coefficients(&w)) {
                    out.push((self.term(t, env)?, Num::rat(c)));
                }
                Ok(out)
            }
            _ => Err(Fail::Unknown),
        }
    }

    fn atom_roots(&mut self, atom: &Formula, var: &str, env: &mut Env, out: &mut Vec<Num>) -> bool {
        let mut rs = Vec::new();
        for x in 0..3 {
            env.push((var.to_string(), Val::Q(Num::int(x))));
            let r = self.residuals(atom, env);
            env.pop();
            rs.push(r);
        }
        match (&rs[0], &rs[1], &rs[2]) {
            (Err(Fail::Undef), Err(Fail::Undef), Err(Fail::Undef)) => true,
            (Ok(r0), Ok(r1), Ok(r2)) => {
                for i in 0..r0.len() {
                    match side_root([&r0[i], &r1[i], &r2[i]]) {
                        Some(Some(root)) => out.push(root),
                        Some(None) => {}
                        None => return false,
                    }
                }
                true
            }
            _ => false,
        }
    }

    fn has_quantity_quantifier(f: &Formula) -> bool {
        let mut found = false;
        f.visit(&mut |g| {
            if let Formula::Forall(bs, _) | Formula::Exists(bs, _) = g {
                found |= bs.iter().any(|b| b.sort == Sort::Quantity);
            }
        });
        found
    }

    /// Exact decision of `∃var body` when `var` enters linearly: the truth of
    /// every collected instance is constant between its critical values, so
    /// checking one value per piece covers the whole line.
    fn decide_one(&mut self, var: &str, body: &Formula, env: &mut Env) -> Option<Truth> {
        let mut instances: Vec<Cex> = Vec::new();
        let mut crit: Vec<Num> = Vec::new();
        let top_ok = self.criticals(body, var, env, &mut crit);
        if top_ok && !Self::has_quantity_quantifier(body) {
            instances.push(Cex { bindings: Vec::new(), focus: body.clone(), bodies: Vec::new() });
        }
        let mut unknown = false;
        for _ in 0..ONE_D_ROUNDS {
            crit.sort();
            crit.dedup();
            let points = sample_points(&crit);
            let mut grew = false;
            unknown = false;
            for s in points {
                if self.refuted(&instances, var, &s, env) {
                    continue;
                }
                env.push((var.to_string(), Val::Q(s.clone())));
                let out = self.eval(body, env);
                env.pop();
                match out.t {
                    Truth::True => return Some(Truth::True),
                    Truth::Unknown => unknown = true,
                    Truth::False => {
                        let Some(cex) = out.cex else {
                            unknown = true;
                            continue;
                        };
                        if Self::has_quantity_quantifier(&cex.focus) {
                            unknown = true;
                            continue;
                        }
                        let before = crit.len();
                        let base = env.len();
                        self.add_bodies(&cex.bodies);
                        env.extend(cex.bindings.iter().cloned());
                        let ok = self.criticals(&cex.focus, var, env, &mut crit);
                        env.truncate(base);
                        if !ok {
                            unknown = true;
                            continue;
                        }
                        instances.push(cex);
                        if crit.len() > before {
                            grew = true;
                            break;
                        }
                    }
                }
            }
            if !grew {
                break;
            }
        }
        if unknown {
            None
        } else {
            Some(Truth::False)
        }
    }

    fn refuted(&mut self, instances: &[Cex], var: &str, s: &Num, env: &mut Env) -> bool {
        for inst in instances {
            let base = env.len();
            env.push((var.to_string(), Val::Q(s.clone())));
            env.extend(inst.bindings.iter().cloned());
            let t = self.eval(&inst.focus, env).t;
            env.truncate(base);
            if t == Truth::False {
                return true;
            }
        }
        false
    }
}

/// Where `a(s) = b(s)` for sides sampled at `s = 0, 1, 2`, when both are
/// affine in `s`: `Some(None)` for parallel sides, `None` when not affine or
/// not representable.
fn side_root(r: [&(Num, Num); 3]) -> Option<Option<Num>> {
    let affine = |v: [&Num; 3]| -> Option<Num> {
        let d1 = v[1].sub(v[0])?;
        let d2 = v[2].sub(v[1])?;
        (d1 == d2).then_some(d1)
    };
    let sa = affine([&r[0].0, &r[1].0, &r[2].0])?;
    let sb = affine([&r[0].1, &r[1].1, &r[2].1])?;
    let slope = sa.sub(&sb)?;
    if slope.is_zero() {
        return Some(None);
    }
    let gap = r[0].1.sub(&r[0].0)?;
    Some(Some(gap.div(&slope)?))
}

/// One value in each piece of the line cut at `crit` (sorted), plus the
/// cut points themselves.
fn sample_points(crit: &[Num]) -> Vec<Num> {
    if crit.is_empty() {
        return vec![Num::zero(), Num::int(1)];
    }
    let mut out = Vec::new();
    let (lo, _) = crit[0].bounds(4);
    out.push(Num::rat(&lo - &Rat::int(1)));
    for (i, c) in crit.iter().enumerate() {
        out.push(c.clone());
        if let Some(next) = crit.get(i + 1) {
            out.push(Num::rat(Num::rational_between(c, next)));
        }
    }
    let (_, hi) = crit[crit.len() - 1].bounds(4);
    out.push(Num::rat(&hi + &Rat::int(1)));
    out
}

/// Rebuilds the quantifier prefix `vars` over `body`.
pub(crate) fn rebuild(universal: bool, vars: &[(String, Dom)], body: &Formula) -> Formula {
    vars.iter().rev().fold(body.clone(), |acc, (v, d)| match (d, universal) {
        (Dom::Body(Some(g)), true) => Formula::ForallIn(vec![(v.clone(), *g)], Box::new(acc)),
        (Dom::Body(Some(g)), false) => Formula::ExistsIn(vec![(v.clone(), *g)], Box::new(acc)),
        (Dom::Body(None), true) => Formula::Forall(vec![Binder::body(v)], Box::new(acc)),
        (Dom::Body(None), false) => Formula::Exists(vec![Binder::body(v)], Box::new(acc)),
        (Dom::Quantity, true) => Formula::Forall(vec![Binder::quantity(v)], Box::new(acc)),
        (Dom::Quantity, false) => Formula::Exists(vec![Binder::quantity(v)], Box::new(acc)),
    })
}

/// The twenty numbers `(M row-major, translation)` of an affine map.
pub fn wv_coefficients(w: &AffineMap4<Rat>) -> Vec<Rat> {
    let mut out: Vec<Rat> = w.linear.iter().flat_map(|row| row.iter().cloned()).collect();
    out.extend(w.translation.0.iter().cloned());
    out
}

pub fn map_of_coefficients(q: &[Rat]) -> AffineMap4<Rat> {
    let linear = std::array::from_fn(|i| std::array::from_fn(|j| q[4 * i + j].clone()));
    AffineMap4 { linear, translation: Event(std::array::from_fn(|i| q[16 + i].clone())) }
}

fn is_trivial(q: &[Num]) -> bool {
    let one = Num::int(1);
    if q[0] != one || [1, 2, 3, 4, 8, 12].iter().any(|&i| !q[i].is_zero()) {
        return false;
    }
    for i in 1..4 {
        for j in i..4 {
            let mut dot = Some(Num::zero());
            for m in 1..4 {
                dot = dot.and_then(|d| d.add(&q[4 * i + m].mul(&q[4 * j + m])));
            }
            let expected = if i == j { Num::int(1) } else { Num::zero() };
            if dot != Some(expected) {
                return false;
            }
        }
    }
    true
}
