//! Elimination of defined concepts.
//!
//! Partial functions (speed, space, light speed, coordinate maps, worldview
//! applications) are removed by lifting them out of their atom: the atom
//! `φ[f(a)]` becomes `∃y (f(a) = y ∧ φ[y])` with the graph of `f` written in
//! the core signature. Square roots are introduced as non-negative solutions
//! of `s·s = a`, so no division or radical ever appears in the output.

use super::{Binder, Formula, Fresh, Guard, LightKind, MapKind, Point, Term, TrKind};

/// Rewrites every defined concept into the core signature. Translated atoms
/// keep their wrapper (with an expanded body); see
/// [`expand_macros_with`] to resolve them.
pub fn expand_macros(f: &Formula) -> Formula {
    let mut ex = Expander { fresh: Fresh::avoiding(f), hook: None };
    ex.formula(f)
}

/// Like [`expand_macros`], resolving each translated atom `Trans(t, a)` as
/// `expand(hook(t, expand(a)))`.
pub fn expand_macros_with(f: &Formula, hook: &dyn Fn(TrKind, &Formula) -> Formula) -> Formula {
    let mut ex = Expander { fresh: Fresh::avoiding(f), hook: Some(hook) };
    ex.formula(f)
}

struct Expander<'h> {
    fresh: Fresh,
    hook: Option<&'h dyn Fn(TrKind, &Formula) -> Formula>,
}

struct Defs {
    binders: Vec<Binder>,
    formulas: Vec<Formula>,
}

fn tv(name: &str) -> Term {
    Term::var(name)
}

fn sq(t: Term) -> Term {
    Term::mul(t.clone(), t)
}

fn dot(a: &[Term], b: &[Term]) -> Term {
    Term::sum(a.iter().zip(b).map(|(x, y)| Term::mul(x.clone(), y.clone())).collect())
}

fn coords(p: &Point) -> &[Term; 4] {
    match p {
        Point::Coords(ts) => ts,
        _ => unreachable!("lifted points are coordinate tuples"),
    }
}

impl<'h> Expander<'h> {
    fn point_binders(&mut self, base: &str) -> (Vec<Binder>, Point) {
        let (names, p) = self.fresh.point(base);
        (names.iter().map(|n| Binder::quantity(n)).collect(), p)
    }

    fn wrap(&mut self, defs: Defs, atom: Formula) -> Formula {
        if defs.binders.is_empty() && defs.formulas.is_empty() {
            return atom;
        }
        let mut parts: Vec<Formula> = defs.formulas;
        parts.push(atom);
        Formula::exists(defs.binders, Formula::And(parts))
    }

    fn formula(&mut self, f: &Formula) -> Formula {
        let mut defs = Defs { binders: Vec::new(), formulas: Vec::new() };
        match f {
            Formula::True | Formula::False | Formula::EField | Formula::IOb(_) | Formula::Ph(_) | Formula::E(_) | Formula::BodyEq(..) => {
                f.clone()
            }
            Formula::W(k, b, p) | Formula::Wl(k, b, p) => {
                let p = self.lift_point(p, &mut defs);
                self.wrap(defs, Formula::W(k.clone(), b.clone(), p))
            }
            Formula::Eq(a, b) => {
                let a = self.lift_term(a, &mut defs);
                let b = self.lift_term(b, &mut defs);
                self.wrap(defs, Formula::Eq(a, b))
            }
            Formula::Le(a, b) => {
                let a = self.lift_term(a, &mut defs);
                let b = self.lift_term(b, &mut defs);
                self.wrap(defs, Formula::Le(a, b))
            }
            Formula::Lt(a, b) => {
                let a = self.lift_term(a, &mut defs);
                let b = self.lift_term(b, &mut defs);
                let core = Formula::And(vec![Formula::Le(a.clone(), b.clone()), Formula::not(Formula::Eq(a, b))]);
                self.wrap(defs, core)
            }
            Formula::Ether(e) => {
                let def = self.ether_def(e);
                self.formula(&def)
            }
            Formula::Ob(k) => {
                let b = self.fresh.name("b");
                let (mut bs, x) = self.point_binders("x");
                bs.insert(0, Binder::body(&b));
                Formula::exists(bs, Formula::w(k, &b, x))
            }
            Formula::EvEq(k, p, h, q) => {
                let p = self.lift_point(p, &mut defs);
                let q = self.lift_point(q, &mut defs);
                let b = self.fresh.name("b");
                let core = Formula::forall(vec![Binder::body(&b)], Formula::iff(Formula::w(k, &b, p), Formula::w(h, &b, q)));
                self.wrap(defs, core)
            }
            Formula::PointEq(p, q) => {
                let p = self.lift_point(p, &mut defs);
                let q = self.lift_point(q, &mut defs);
                let (p, q) = (coords(&p), coords(&q));
                let core = Formula::And((0..4).map(|i| Formula::Eq(p[i].clone(), q[i].clone())).collect());
                self.wrap(defs, core)
            }
            Formula::VelocityIs(k, b, v) => {
                let v: Vec<Term> = v.iter().map(|t| self.lift_term(t, &mut defs)).collect();
                let def = self.velocity_def(k, b, &v);
                let core = self.formula(&def);
                self.wrap(defs, core)
            }
            Formula::WvIs(k, h, q) => {
                let q: Vec<Term> = q.iter().map(|t| self.lift_term(t, &mut defs)).collect();
                let (mut bs, x) = self.point_binders("x");
                let (bs_y, y) = self.point_binders("y");
                bs.extend(bs_y);
                let xs = coords(&x).clone();
                let ys = coords(&y).clone();
                let image: Vec<Formula> = (0..4)
                    .map(|i| {
                        let lin: Vec<Term> = (0..4).map(|j| Term::mul(q[4 * i + j].clone(), xs[j].clone())).collect();
                        Formula::Eq(ys[i].clone(), Term::add(Term::sum(lin), q[16 + i].clone()))
                    })
                    .collect();
                let def = Formula::forall(bs, Formula::iff(Formula::EvEq(k.clone(), x, h.clone(), y), Formula::And(image)));
                let core = self.formula(&def);
                self.wrap(defs, core)
            }
            Formula::Triv(q) => {
                let q: Vec<Term> = q.iter().map(|t| self.lift_term(t, &mut defs)).collect();
                let mut parts = vec![Formula::Eq(q[0].clone(), Term::int(1))];
                for i in [1, 2, 3, 4, 8, 12] {
                    parts.push(Formula::Eq(q[i].clone(), Term::int(0)));
                }
                for i in 1..4 {
                    for j in i..4 {
                        let row = |r: usize| -> Vec<Term> { (1..4).map(|m| q[4 * r + m].clone()).collect() };
                        let delta = if i == j { 1 } else { 0 };
                        parts.push(Formula::Eq(dot(&row(i), &row(j)), Term::int(delta)));
                    }
                }
                self.wrap(defs, Formula::And(parts))
            }
            Formula::Trans(t, a) => {
                let inner = self.formula(a);
                match self.hook {
                    Some(hook) => {
                        let translated = hook(*t, &inner);
                        for n in super::all_names(&translated) {
                            self.fresh.avoid(&n);
                        }
                        self.formula(&translated)
                    }
                    None => Formula::Trans(*t, Box::new(inner)),
                }
            }
            Formula::Not(a) => Formula::not(self.formula(a)),
            Formula::And(xs) => Formula::And(xs.iter().map(|x| self.formula(x)).collect()),
            Formula::Or(xs) => Formula::Or(xs.iter().map(|x| self.formula(x)).collect()),
            Formula::Implies(a, b) => Formula::implies(self.formula(a), self.formula(b)),
            Formula::Iff(a, b) => Formula::iff(self.formula(a), self.formula(b)),
            Formula::Forall(bs, a) => Formula::Forall(bs.clone(), Box::new(self.formula(a))),
            Formula::Exists(bs, a) => Formula::Exists(bs.clone(), Box::new(self.formula(a))),
            Formula::ForallIn(bs, a) => {
                let guards = Formula::and(bs.iter().map(|(v, g)| self.formula(&g.atom(v))).collect());
                let body = self.formula(a);
                Formula::Forall(bs.iter().map(|(v, _)| Binder::body(v)).collect(), Box::new(Formula::implies(guards, body)))
            }
            Formula::ExistsIn(bs, a) => {
                let mut parts: Vec<Formula> = bs.iter().map(|(v, g)| self.formula(&g.atom(v))).collect();
                parts.push(self.formula(a));
                Formula::Exists(bs.iter().map(|(v, _)| Binder::body(v)).collect(), Box::new(Formula::And(parts)))
            }
        }
    }

    /// Pushes the defining formula (expanded) and its binders.
    fn define(&mut self, defs: &mut Defs, binders: Vec<Binder>, def: Formula) {
        let expanded = self.formula(&def);
        defs.binders.extend(binders);
        defs.formulas.push(expanded);
    }

    fn lift_term(&mut self, t: &Term, defs: &mut Defs) -> Term {
        match t {
            Term::Var(_) | Term::Lit(_) => t.clone(),
            Term::Add(a, b) => Term::add(self.lift_term(a, defs), self.lift_term(b, defs)),
            Term::Sub(a, b) => Term::sub(self.lift_term(a, defs), self.lift_term(b, defs)),
            Term::Mul(a, b) => Term::mul(self.lift_term(a, defs), self.lift_term(b, defs)),
            Term::Neg(a) => Term::neg(self.lift_term(a, defs)),
            Term::Light(kind) => {
                let c = self.fresh.name("c");
                let def = self.light_def(*kind, &tv(&c));
                self.define(defs, vec![Binder::quantity(&c)], def);
                tv(&c)
            }
            Term::Speed(k, b) => {
                let s = self.fresh.name("s");
                let def = self.speed_def(k, b, &tv(&s));
                self.define(defs, vec![Binder::quantity(&s)], def);
                tv(&s)
            }
            Term::Space(p, q) | Term::Time(p, q) => {
                let p = self.lift_point(p, defs);
                let q = self.lift_point(q, defs);
                let (p, q) = (coords(&p), coords(&q));
                let range = if matches!(t, Term::Space(..)) { 1..4 } else { 0..1 };
                let s = self.fresh.name("s");
                let sum = Term::sum(range.map(|i| sq(Term::sub(q[i].clone(), p[i].clone()))).collect());
                let def = Formula::And(vec![Formula::Eq(sq(tv(&s)), sum), Formula::Le(Term::int(0), tv(&s))]);
                self.define(defs, vec![Binder::quantity(&s)], def);
                tv(&s)
            }
        }
    }

    fn lift_point(&mut self, p: &Point, defs: &mut Defs) -> Point {
        match p {
            Point::Coords(ts) => Point::coords([0, 1, 2, 3].map(|i| self.lift_term(&ts[i], defs))),
            Point::Map(kind, k, e, a) => {
                let x = self.lift_point(a, defs);
                let c = self.lift_term(&Term::Light(kind.light()), defs);
                let v_names: Vec<String> = (0..3).map(|_| self.fresh.name("v")).collect();
                let v: Vec<Term> = v_names.iter().map(|n| tv(n)).collect();
                let (mut bs, y) = self.point_binders("y");
                bs.extend(v_names.iter().map(|n| Binder::quantity(n)));
                let vel = Formula::VelocityIs(k.clone(), e.clone(), Box::new([v[0].clone(), v[1].clone(), v[2].clone()]));
                let rel = match kind {
                    MapKind::Rad => self.rad_graph(&v, coords(&x), coords(&y), &c),
                    MapKind::RadInv => self.rad_graph(&v, coords(&y), coords(&x), &c),
                    MapKind::X => self.x_graph(&v, coords(&x), coords(&y), &c),
                    MapKind::XInv => self.x_graph(&v, coords(&y), coords(&x), &c),
                    MapKind::Y => self.y_graph(&v, coords(&x), coords(&y), &c),
                    MapKind::YInv => self.y_graph(&v, coords(&y), coords(&x), &c),
                };
                self.define(defs, bs, Formula::And(vec![vel, rel]));
                y
            }
            Point::Wv(k, h, a) => {
                let x = self.lift_point(a, defs);
                let (bs, y) = self.point_binders("y");
                let def = Formula::EvEq(k.clone(), x, h.clone(), y.clone());
                self.define(defs, bs, def);
                y
            }
        }
    }

    /// `Rad_v(x) = y` with `g = √(1 − v²/c²)`:
    /// `y₀ = g·x₀ + v·x/(c²g)` and `y = x + (v·x)v/(c²g(1+g))`.
    fn rad_graph(&mut self, v: &[Term], x: &[Term; 4], y: &[Term; 4], c: &Term) -> Formula {
        let g = self.fresh.name("g");
        let gt = tv(&g);
        let cc = sq(c.clone());
        let vx = dot(v, &x[1..]);
        let one_plus_g = Term::add(Term::int(1), gt.clone());
        let mut parts = vec![
            Formula::Eq(Term::mul(sq(gt.clone()), cc.clone()), Term::sub(cc.clone(), dot(v, v))),
            Formula::Lt(Term::int(0), gt.clone()),
            Formula::Eq(Term::mul(Term::mul(cc.clone(), gt.clone()), y[0].clone()), Term::add(Term::mul(Term::mul(cc.clone(), sq(gt.clone())), x[0].clone()), vx.clone())),
        ];
        let scale = Term::mul(Term::mul(cc, gt.clone()), one_plus_g);
        for i in 0..3 {
            parts.push(Formula::Eq(
                Term::mul(scale.clone(), y[i + 1].clone()),
                Term::add(Term::mul(scale.clone(), x[i + 1].clone()), Term::mul(vx.clone(), v[i].clone())),
            ));
        }
        Formula::exists(vec![Binder::quantity(&g)], Formula::And(parts))
    }

    /// `X_V(x) = y`: Galilean boost by `cV/(1+|V|) − V`.
    fn x_graph(&mut self, big_v: &[Term], x: &[Term; 4], y: &[Term; 4], c: &Term) -> Formula {
        let n = self.fresh.name("n");
        let nt = tv(&n);
        let mut parts = vec![
            Formula::Eq(sq(nt.clone()), dot(big_v, big_v)),
            Formula::Le(Term::int(0), nt.clone()),
            Formula::Eq(y[0].clone(), x[0].clone()),
        ];
        let factor = Term::sub(Term::sub(c.clone(), Term::int(1)), nt.clone());
        for i in 0..3 {
            parts.push(Formula::Eq(
                Term::mul(Term::add(Term::int(1), nt.clone()), Term::sub(y[i + 1].clone(), x[i + 1].clone())),
                Term::mul(Term::mul(x[0].clone(), big_v[i].clone()), factor.clone()),
            ));
        }
        Formula::exists(vec![Binder::quantity(&n)], Formula::And(parts))
    }

    /// `Y_v(x) = y`: Galilean boost by `v/(c−|v|) − v`.
    fn y_graph(&mut self, v: &[Term], x: &[Term; 4], y: &[Term; 4], c: &Term) -> Formula {
        let n = self.fresh.name("n");
        let nt = tv(&n);
        let mut parts = vec![
            Formula::Eq(sq(nt.clone()), dot(v, v)),
            Formula::Le(Term::int(0), nt.clone()),
            Formula::Lt(nt.clone(), c.clone()),
            Formula::Eq(y[0].clone(), x[0].clone()),
        ];
        let factor = Term::add(Term::sub(Term::int(1), c.clone()), nt.clone());
        for i in 0..3 {
            parts.push(Formula::Eq(
                Term::mul(Term::sub(c.clone(), nt.clone()), Term::sub(y[i + 1].clone(), x[i + 1].clone())),
                Term::mul(Term::mul(x[0].clone(), v[i].clone()), factor.clone()),
            ));
        }
        Formula::exists(vec![Binder::quantity(&n)], Formula::And(parts))
    }

    /// Both points on `wl_k(b)`, and they differ.
    fn two_distinct_sightings(&mut self, k: &str, b: &str) -> Formula {
        let (mut bs, x) = self.point_binders("x");
        let (bs_y, y) = self.point_binders("y");
        bs.extend(bs_y);
        Formula::exists(
            bs,
            Formula::And(vec![Formula::w(k, b, x.clone()), Formula::w(k, b, y.clone()), Formula::not(Formula::PointEq(x, y))]),
        )
    }

    fn speed_def(&mut self, k: &str, b: &str, s: &Term) -> Formula {
        let some = self.two_distinct_sightings(k, b);
        let (mut bs, x) = self.point_binders("x");
        let (bs_y, y) = self.point_binders("y");
        bs.extend(bs_y);
        let all = Formula::forall(
            bs,
            Formula::implies(
                Formula::And(vec![Formula::w(k, b, x.clone()), Formula::w(k, b, y.clone())]),
                Formula::Eq(
                    Term::Space(Box::new(x.clone()), Box::new(y.clone())),
                    Term::mul(s.clone(), Term::Time(Box::new(x), Box::new(y))),
                ),
            ),
        );
        Formula::And(vec![some, all])
    }

    fn velocity_def(&mut self, k: &str, b: &str, v: &[Term]) -> Formula {
        let some = self.two_distinct_sightings(k, b);
        let (mut bs, x) = self.point_binders("x");
        let (bs_y, y) = self.point_binders("y");
        bs.extend(bs_y);
        let (xs, ys) = (coords(&x).clone(), coords(&y).clone());
        let dt = Term::sub(ys[0].clone(), xs[0].clone());
        let comps = (0..3)
            .map(|i| Formula::Eq(Term::sub(ys[i + 1].clone(), xs[i + 1].clone()), Term::mul(v[i].clone(), dt.clone())))
            .collect();
        let all = Formula::forall(
            bs,
            Formula::implies(Formula::And(vec![Formula::w(k, b, x), Formula::w(k, b, y)]), Formula::And(comps)),
        );
        Formula::And(vec![some, all])
    }

    fn light_def(&mut self, kind: LightKind, c: &Term) -> Formula {
        let k = self.fresh.name(if kind == LightKind::Ether { "e" } else { "k" });
        let p = self.fresh.name("p");
        let guard = match kind {
            LightKind::Ether => Guard::Ether,
            LightKind::Rel => Guard::IOb,
        };
        let inner = Formula::forall(vec![Binder::body(&p)], Formula::implies(Formula::Ph(p.clone()), self.speed_def(&k, &p, c)));
        Formula::forall(vec![Binder::body(&k)], Formula::implies(guard.atom(&k), inner))
    }

    fn ether_def(&mut self, e: &str) -> Formula {
        let c = self.fresh.name("c");
        let p = self.fresh.name("p");
        let (mut bs, x) = self.point_binders("x");
        let (bs_y, y) = self.point_binders("y");
        bs.extend(bs_y);
        let photon = Formula::exists(
            vec![Binder::body(&p)],
            Formula::And(vec![Formula::Ph(p.clone()), Formula::w(e, &p, x.clone()), Formula::w(e, &p, y.clone())]),
        );
        let cone = Formula::Eq(
            Term::Space(Box::new(x.clone()), Box::new(y.clone())),
            Term::mul(tv(&c), Term::Time(Box::new(x), Box::new(y))),
        );
        Formula::And(vec![
            Formula::IOb(e.to_string()),
            Formula::exists(
                vec![Binder::quantity(&c)],
                Formula::And(vec![Formula::Lt(Term::int(0), tv(&c)), Formula::forall(bs, Formula::iff(photon, cone))]),
            ),
        ])
    }
}

/// Whether the formula uses only the core signature.
pub fn is_core(f: &Formula) -> bool {
    let mut ok = true;
    f.visit(&mut |g| match g {
        Formula::W(_, _, p) => ok &= p.is_core(),
        Formula::Eq(a, b) | Formula::Le(a, b) => ok &= a.is_core() && b.is_core(),
        Formula::True | Formula::False | Formula::EField | Formula::IOb(_) | Formula::Ph(_) | Formula::E(_) | Formula::BodyEq(..) => {}
        Formula::Not(_) | Formula::And(_) | Formula::Or(_) | Formula::Implies(..) | Formula::Iff(..) | Formula::Forall(..) | Formula::Exists(..) => {}
        _ => ok = false,
    });
    ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{axiom, parse, AXIOM_NAMES};

    #[test]
    fn worldline_membership_is_w() {
        let f = parse("(in-wl k b x0 x1 x2 x3)").unwrap();
        assert_eq!(expand_macros(&f), parse("(W k b x0 x1 x2 x3)").unwrap());
    }

    #[test]
    fn ether_expands_to_cone_biconditional() {
        let f = expand_macros(&parse("(Ether e)").unwrap());
        assert!(is_core(&f));
        let text = f.to_string();
        assert!(text.starts_with("(and (IOb e) (exists ((_c"), "{text}");
        assert!(text.contains("(Ph _p"), "{text}");
        assert!(text.contains("<->"), "{text}");
    }

    #[test]
    fn speed_expands_to_two_conjuncts() {
        let f = expand_macros(&parse("(= (speed k b) v)").unwrap());
        assert!(is_core(&f));
        let Formula::Exists(bs, body) = &f else { panic!("{f}") };
        assert_eq!(bs.len(), 1);
        let Formula::And(parts) = &**body else { panic!() };
        let Formula::And(def) = &parts[0] else { panic!() };
        assert!(matches!(def[0], Formula::Exists(..)));
        assert!(matches!(def[1], Formula::Forall(..)));
    }

    #[test]
    fn every_axiom_expands_to_core_and_is_idempotent() {
        for name in AXIOM_NAMES {
            let f = expand_macros(&axiom(name).unwrap());
            assert!(is_core(&f), "{name}");
            assert_eq!(expand_macros(&f), f, "{name}");
        }
    }

    #[test]
    fn map_applications_expand() {
        for kw in ["rad", "rad-inv", "xmap", "xmap-inv", "ymap", "ymap-inv"] {
            let f = parse(&format!("(W k b ({kw} k e (pt t 0 0 0)))")).unwrap();
            let g = expand_macros(&f);
            assert!(is_core(&g), "{kw}: {g}");
        }
    }

    #[test]
    fn translated_atoms_keep_wrapper_without_hook() {
        let f = parse("(tr tr (Ether e))").unwrap();
        assert!(matches!(expand_macros(&f), Formula::Trans(TrKind::Tr, _)));
        let resolved = expand_macros_with(&f, &|_, g| g.clone());
        assert!(is_core(&resolved));
    }
}
