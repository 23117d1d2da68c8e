//! Bodies synthesized as witnesses for body existentials.
//!
//! A scope `∃b φ` where `φ` puts two given points on the worldline of `b`
//! gets a new body through the two events: a photon when the events are
//! lightlike, else an observer at rest on that line. A `wv=` conjunct fixes
//! the frame of the new observer directly. Frames are built in the structure
//! the atom is read in and pulled back through the translator chain to a
//! frame of the base model.

use super::eval::{map_of_coefficients, Env, Evaluator, Fail, Truth, Val};
use super::view::{chain_kinematics, preimage, Kinematics};
use super::{Body, TheoryTag};
use crate::logic::{free_vars, Formula, Guard, MapKind, Point, Sort, Term, TrKind};
use crate::scalar::{Rat, Scalar};
use crate::spacetime::{Event, Line};
use crate::transforms::{boost_to_rest, classify, galilean_to_rest, AffineMap4};

enum Seed {
    /// events (e0 coordinates) on the new body's worldline
    Events(Vec<TrKind>, Vec<Event<Rat>>),
    Frame(Vec<TrKind>, AffineMap4<Rat>),
}

/// A body variable the locator sits under, with the condition guarding it
/// and the structure the condition is read in.
#[derive(Clone)]
struct Binder {
    var: String,
    guard: Formula,
    chain: Vec<TrKind>,
}

/// An atom locating the new body, with the structure it is read in and the
/// guarded body variables it sits under.
struct Locator {
    chain: Vec<TrKind>,
    binders: Vec<Binder>,
    atom: Formula,
}

fn collect(f: &Formula, var: &str, chain: &[TrKind], binders: &[Binder], out: &mut Vec<Locator>) {
    let push = |out: &mut Vec<Locator>, chain: Vec<TrKind>, atom: &Formula| {
        out.push(Locator { chain, binders: binders.to_vec(), atom: atom.clone() })
    };
    match f {
        Formula::Trans(t, a) => {
            let mut c = chain.to_vec();
            c.push(*t);
            collect(a, var, &c, binders, out);
        }
        Formula::And(xs) => xs.iter().for_each(|x| collect(x, var, chain, binders, out)),
        Formula::Implies(_, b) => collect(b, var, chain, binders, out),
        Formula::ForallIn(bs, a) if bs.iter().all(|(v, _)| v != var) => {
            let mut inner = binders.to_vec();
            inner.extend(bs.iter().map(|(v, g)| Binder { var: v.clone(), guard: g.atom(v), chain: chain.to_vec() }));
            collect(a, var, chain, &inner, out);
        }
        // a guard the translator could not keep as a `forall-in`
        Formula::Forall(bs, a) if bs.len() == 1 && bs[0].sort == Sort::Body && bs[0].name != var => {
            if let Formula::Implies(g, b) = a.as_ref() {
                let v = &bs[0].name;
                if free_vars(g).keys().all(|x| x == v) {
                    let mut inner = binders.to_vec();
                    inner.push(Binder { var: v.clone(), guard: (**g).clone(), chain: chain.to_vec() });
                    collect(b, var, chain, &inner, out);
                }
            }
        }
        // the observer clause of the star translators: `b` sits in the
        // structure one step further
        Formula::Exists(_, a) => {
            if let Formula::PointEq(Point::Wv(_, b, _), Point::Map(kind, b2, _, _)) = a.as_ref() {
                let t = match kind {
                    MapKind::XInv => TrKind::TrStar,
                    MapKind::YInv => TrKind::TrStarInv,
                    _ => return,
                };
                if b == var && b2 == var {
                    let mut c = chain.to_vec();
                    c.push(t);
                    push(out, c, a);
                }
            }
        }
        Formula::W(_, b, _) | Formula::Wl(_, b, _) if b == var => push(out, chain.to_vec(), f),
        Formula::WvIs(k, h, _) if (k == var) != (h == var) => push(out, chain.to_vec(), f),
        _ => {}
    }
}

impl Evaluator<'_> {
    /// Candidate witnesses for `∃var∈guard scope`, and whether some
    /// candidate could not be built exactly.
    pub(crate) fn synthesize(&mut self, var: &str, guard: Option<Guard>, scope: &Formula, env: &mut Env) -> (Vec<Body>, bool) {
        let mut atoms = Vec::new();
        let chain = self.chain.clone();
        collect(scope, var, &chain, &[], &mut atoms);
        if atoms.is_empty() {
            return (Vec::new(), false);
        }
        let saved = self.chain.clone();
        let mut seeds: Vec<Seed> = Vec::new();
        let mut inexact = false;
        for loc in &atoms {
            // the clause of a structure one step further is evaluated here
            let here = match &loc.atom {
                Formula::PointEq(..) => &loc.chain[..loc.chain.len() - 1],
                _ => &loc.chain[..],
            };
            self.chain = here.to_vec();
            let base = env.len();
            if !self.bind_guarded(&loc.binders, env) {
                env.truncate(base);
                continue;
            }
            let located: Option<(&String, &Point)> = match &loc.atom {
                Formula::W(k, _, p) | Formula::Wl(k, _, p) => Some((k, p)),
                Formula::PointEq(Point::Wv(k, _, p), _) => Some((k, p.as_ref())),
                _ => None,
            };
            match &loc.atom {
                _ if located.is_some() => {
                    let (k, p) = located.expect("checked");
                    let ev = self.point(p, env).and_then(|x| self.event_of(k, &x, env));
                    match ev {
                        Ok(ev) => match seeds.iter_mut().find(|s| matches!(s, Seed::Events(c, _) if *c == loc.chain)) {
                            Some(Seed::Events(_, evs)) => {
                                if !evs.contains(&ev) {
                                    evs.push(ev)
                                }
                            }
                            _ => seeds.push(Seed::Events(loc.chain.clone(), vec![ev])),
                        },
                        Err(Fail::Unknown) => inexact = true,
                        Err(Fail::Undef) => {}
                    }
                }
                Formula::WvIs(k, h, q) => {
                    if let Some(frame) = self.frame_from_wv(var, k, h, q, env, &mut inexact) {
                        seeds.push(Seed::Frame(loc.chain.clone(), frame));
                    }
                }
                _ => {}
            }
            env.truncate(base);
        }
        self.chain = saved;
        let mut out = Vec::new();
        let wants_observer = !matches!(guard, Some(Guard::Ph));
        let wants_photon = matches!(guard, None | Some(Guard::Ph));
        for seed in seeds {
            match seed {
                Seed::Frame(chain, g) => {
                    if wants_observer {
                        match self.observer_from_frame(&chain, g) {
                            Ok(Some(b)) => out.push(b),
                            Ok(None) => {}
                            Err(()) => inexact = true,
                        }
                    }
                }
                Seed::Events(chain, evs) => {
                    let [a, b] = match evs.as_slice() {
                        [a, b] => [a.clone(), b.clone()],
                        [a] => [a.clone(), a + &Event::basis(0)],
                        _ => continue,
                    };
                    let d = &b - &a;
                    let c = self.c().clone();
                    let space = d.spatial().norm_sq();
                    let time_sq = &(d.t() * d.t()) * &(&c * &c);
                    let Ok(line) = Line::through(&a, &b) else { continue };
                    if wants_photon && space == time_sq && !d.t().is_zero() {
                        let id = self.fresh_id();
                        out.push(Body::photon(id, &format!("_{var}{id}"), line.clone(), true));
                    }
                    if wants_observer {
                        let Some(u) = line.velocity() else { continue };
                        let kin = chain_kinematics(self.model.theory.kinematics(), &chain);
                        let rest = match kin {
                            Kinematics::Classical => galilean_to_rest(&u),
                            Kinematics::Relativistic => {
                                if u.norm_sq() >= &c * &c {
                                    continue;
                                }
                                match boost_to_rest(&u, &c) {
                                    Ok(m) => m,
                                    Err(_) => {
                                        inexact = true;
                                        continue;
                                    }
                                }
                            }
                        };
                        let g = rest.compose(&AffineMap4::translation(a.scale(&Rat::int(-1))));
                        match self.observer_from_frame(&chain, g) {
                            Ok(Some(b)) => out.push(b),
                            Ok(None) => {}
                            Err(()) => inexact = true,
                        }
                    }
                }
            }
        }
        let out = out.into_iter().filter(|b| !self.duplicates(b)).collect();
        (out, inexact)
    }

    /// Binds each guarded variable to some body satisfying its guard.
    fn bind_guarded(&mut self, binders: &[Binder], env: &mut Env) -> bool {
        let saved = std::mem::take(&mut self.chain);
        let mut ok = true;
        for b in binders {
            self.chain = b.chain.clone();
            let found = self.active_ids().into_iter().find(|&id| {
                env.push((b.var.clone(), Val::Body(id)));
                let ok = self.eval(&b.guard, env).t == Truth::True;
                env.pop();
                ok
            });
            match found {
                Some(id) => env.push((b.var.clone(), Val::Body(id))),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        self.chain = saved;
        ok
    }

    fn frame_from_wv(&mut self, var: &str, k: &str, h: &str, q: &[Term], env: &Env, inexact: &mut bool) -> Option<AffineMap4<Rat>> {
        let mut vals = Vec::new();
        for t in q {
            vals.push(self.term(t, env).ok()?.into_rat()?);
        }
        let map = map_of_coefficients(&vals);
        let map_inv = map.inverse().ok()?;
        let other = if k == var { h } else { k };
        let oid = self.body_of(env, other).ok()?;
        let Ok(ov) = self.view(oid) else {
            *inexact = true;
            return None;
        };
        let fo = ov.view.frame.clone()?;
        // w_kh = F_h ∘ F_k⁻¹
        Some(if h == var { map.compose(&fo) } else { map_inv.compose(&fo) })
    }

    fn duplicates(&self, b: &Body) -> bool {
        self.active_ids().into_iter().filter_map(|id| self.body(id)).any(|o| o.frame == b.frame && o.ph == b.ph && o.line == b.line)
    }

    /// A base observer whose frame in the structure reached through `chain`
    /// is `g`. `Ok(None)` when the base theory has no such observer.
    fn observer_from_frame(&mut self, chain: &[TrKind], g: AffineMap4<Rat>) -> Result<Option<Body>, ()> {
        let c = self.c().clone();
        let mut frame = g;
        for t in chain.iter().rev() {
            frame = match preimage(*t, &frame, &c) {
                Ok(f) => f,
                Err(super::view::NoPreimage::NotStl) => return Ok(None),
                Err(super::view::NoPreimage::Inexact) => return Err(()),
            };
        }
        let theory = self.model.theory;
        // pulled-back frames have the base kinematics already
        if theory == TheoryTag::CkStl && !super::view::ether_velocity(&frame).is_some_and(|v| v.norm_sq() < &c * &c) {
            return Ok(None);
        }
        let e = theory == TheoryTag::SrE && classify(&frame, &c).trivial;
        let id = self.fresh_id();
        Ok(Some(Body::observer(id, &format!("_k{id}"), frame, e, true)))
    }
}
