//! S-expression reader for formulas.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::{Binder, Formula, Guard, LightKind, MapKind, Point, Sort, Term, TrKind};
use crate::scalar::Rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    Sort,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub message: String,
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::Sort => "sort error",
        };
        write!(f, "{}:{}: {kind}: {}", self.line, self.column, self.message)
    }
}

#[derive(Clone, Debug)]
enum Sexp {
    Atom(String, usize),
    List(Vec<Sexp>, usize),
}

impl Sexp {
    fn pos(&self) -> usize {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }

    fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s, _) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(s, _) => write!(f, "{s}"),
            Sexp::List(xs, _) => {
                write!(f, "(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

struct Reader<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() {
            let c = self.bytes[self.pos];
            if c == b';' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Option<Sexp>, ParseError> {
        self.skip_ws();
        if self.pos >= self.bytes.len() {
            return Ok(None);
        }
        let start = self.pos;
        match self.bytes[self.pos] {
            b'(' => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    if self.pos >= self.bytes.len() {
                        return Err(error(self.text, ParseErrorKind::Syntax, start, "unclosed parenthesis".into()));
                    }
                    if self.bytes[self.pos] == b')' {
                        self.pos += 1;
                        return Ok(Some(Sexp::List(items, start)));
                    }
                    items.push(self.read()?.expect("input remains"));
                }
            }
            b')' => Err(error(self.text, ParseErrorKind::Syntax, start, "unexpected ')'".into())),
            _ => {
                while self.pos < self.bytes.len() {
                    let c = self.bytes[self.pos];
                    if c.is_ascii_whitespace() || c == b'(' || c == b')' || c == b';' {
                        break;
                    }
                    self.pos += 1;
                }
                Ok(Some(Sexp::Atom(self.text[start..self.pos].to_string(), start)))
            }
        }
    }
}

fn error(text: &str, kind: ParseErrorKind, offset: usize, message: String) -> ParseError {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.chars().count(), |i| before[i + 1..].chars().count()) + 1;
    ParseError { kind, message, offset, line, column }
}

/// Parses exactly one formula.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut forms = parse_many(text)?;
    match forms.len() {
        1 => Ok(forms.pop().unwrap()),
        0 => Err(error(text, ParseErrorKind::Syntax, text.len(), "expected a formula".into())),
        _ => Err(error(text, ParseErrorKind::Syntax, 0, format!("expected one formula, found {}", forms.len()))),
    }
}

/// Parses every top-level form of a formula file.
pub fn parse_many(text: &str) -> Result<Vec<Formula>, ParseError> {
    let mut reader = Reader { text, bytes: text.as_bytes(), pos: 0 };
    let mut out = Vec::new();
    while let Some(sexp) = reader.read()? {
        let mut body_names = HashSet::new();
        collect_body_positions(&sexp, &mut body_names);
        let mut conv = Converter { text, scopes: Vec::new(), free_body: body_names };
        out.push(conv.formula(&sexp)?);
    }
    Ok(out)
}

const RESERVED: &[&str] = &["c_e", "c_sr", "true", "false"];

fn body_positions(head: &str) -> &'static [usize] {
    match head {
        "W" | "in-wl" | "velocity=" | "wv=" | "speed" | "wv" | "rad" | "rad-inv" | "xmap" | "xmap-inv" | "ymap" | "ymap-inv" => &[1, 2],
        "IOb" | "Ph" | "E" | "Ether" | "Ob" => &[1],
        "ev=" => &[1, 3],
        _ => &[],
    }
}

fn collect_body_positions(s: &Sexp, out: &mut HashSet<String>) {
    if let Sexp::List(items, _) = s {
        if let Some(head) = items.first().and_then(Sexp::atom) {
            for &i in body_positions(head) {
                if let Some(name) = items.get(i).and_then(Sexp::atom) {
                    out.insert(name.to_string());
                }
            }
        }
        items.iter().for_each(|x| collect_body_positions(x, out));
    }
}

struct Converter<'a> {
    text: &'a str,
    scopes: Vec<(String, Sort)>,
    free_body: HashSet<String>,
}

fn is_number(s: &str) -> bool {
    let t = s.strip_prefix('-').unwrap_or(s);
    t.starts_with(|c: char| c.is_ascii_digit())
}

impl<'a> Converter<'a> {
    fn err<T>(&self, at: &Sexp, msg: String) -> Result<T, ParseError> {
        Err(error(self.text, ParseErrorKind::Syntax, at.pos(), msg))
    }

    fn sort_err<T>(&self, at: &Sexp, msg: String) -> Result<T, ParseError> {
        Err(error(self.text, ParseErrorKind::Sort, at.pos(), msg))
    }

    fn sort_of(&self, name: &str) -> Sort {
        if let Some((_, s)) = self.scopes.iter().rev().find(|(n, _)| n == name) {
            return *s;
        }
        if self.free_body.contains(name) {
            Sort::Body
        } else {
            Sort::Quantity
        }
    }

    fn identifier(&self, s: &Sexp) -> Result<String, ParseError> {
        match s {
            Sexp::Atom(a, _) if !is_number(a) && !RESERVED.contains(&a.as_str()) => Ok(a.clone()),
            _ => self.err(s, format!("expected a variable, found {s}")),
        }
    }

    fn body(&self, s: &Sexp, context: &Sexp) -> Result<String, ParseError> {
        let name = self.identifier(s)?;
        let bound = self.scopes.iter().any(|(n, _)| *n == name);
        if bound && self.sort_of(&name) != Sort::Body {
            return self.sort_err(s, format!("{name} is a quantity variable but is used as a body in {context}"));
        }
        Ok(name)
    }

    fn arity(&self, items: &[Sexp], n: usize, whole: &Sexp) -> Result<(), ParseError> {
        if items.len() != n + 1 {
            return self.err(whole, format!("{} expects {n} argument(s), found {}", items[0], items.len() - 1));
        }
        Ok(())
    }

    fn term(&self, s: &Sexp) -> Result<Term, ParseError> {
        match s {
            Sexp::Atom(a, _) => {
                if a == "c_e" {
                    return Ok(Term::Light(LightKind::Ether));
                }
                if a == "c_sr" {
                    return Ok(Term::Light(LightKind::Rel));
                }
                if is_number(a) {
                    return Rat::from_str(a).map(Term::Lit).or_else(|_| self.err(s, format!("bad numeral {a}")));
                }
                let name = self.identifier(s)?;
                if self.sort_of(&name) != Sort::Quantity {
                    return self.sort_err(s, format!("{name} is a body variable but is used as a quantity"));
                }
                Ok(Term::Var(name))
            }
            Sexp::List(items, _) => {
                let Some(head) = items.first().and_then(Sexp::atom) else {
                    return self.err(s, format!("expected a term, found {s}"));
                };
                match head {
                    "+" | "*" => {
                        if items.len() < 3 {
                            return self.err(s, format!("{head} expects at least 2 arguments"));
                        }
                        let mut acc = self.term(&items[1])?;
                        for x in &items[2..] {
                            let t = self.term(x)?;
                            acc = if head == "+" { Term::add(acc, t) } else { Term::mul(acc, t) };
                        }
                        Ok(acc)
                    }
                    "-" => match items.len() {
                        2 => Ok(Term::neg(self.term(&items[1])?)),
                        3 => Ok(Term::sub(self.term(&items[1])?, self.term(&items[2])?)),
                        _ => self.err(s, "- expects 1 or 2 arguments".into()),
                    },
                    "speed" => {
                        self.arity(items, 2, s)?;
                        Ok(Term::Speed(self.body(&items[1], s)?, self.body(&items[2], s)?))
                    }
                    "space" | "time" => {
                        self.arity(items, 2, s)?;
                        let p = Box::new(self.point(&items[1])?);
                        let q = Box::new(self.point(&items[2])?);
                        Ok(if head == "space" { Term::Space(p, q) } else { Term::Time(p, q) })
                    }
                    _ => self.err(s, format!("unknown term constructor {head}")),
                }
            }
        }
    }

    fn point(&self, s: &Sexp) -> Result<Point, ParseError> {
        let Sexp::List(items, _) = s else {
            return self.err(s, format!("expected a point, found {s}"));
        };
        let Some(head) = items.first().and_then(Sexp::atom) else {
            return self.err(s, format!("expected a point, found {s}"));
        };
        if head == "pt" {
            self.arity(items, 4, s)?;
            return Ok(Point::coords([
                self.term(&items[1])?,
                self.term(&items[2])?,
                self.term(&items[3])?,
                self.term(&items[4])?,
            ]));
        }
        if head == "wv" {
            self.arity(items, 3, s)?;
            return Ok(Point::Wv(self.body(&items[1], s)?, self.body(&items[2], s)?, Box::new(self.point(&items[3])?)));
        }
        if let Some(kind) = MapKind::from_keyword(head) {
            self.arity(items, 3, s)?;
            return Ok(Point::Map(kind, self.body(&items[1], s)?, self.body(&items[2], s)?, Box::new(self.point(&items[3])?)));
        }
        self.err(s, format!("unknown point constructor {head}"))
    }

    /// Either four coordinate terms or a single point expression.
    fn point_args(&self, args: &[Sexp], whole: &Sexp) -> Result<Point, ParseError> {
        match args.len() {
            4 => Ok(Point::coords([self.term(&args[0])?, self.term(&args[1])?, self.term(&args[2])?, self.term(&args[3])?])),
            1 => self.point(&args[0]),
            _ => self.err(whole, "expected four coordinates or one point".into()),
        }
    }

    fn terms(&self, args: &[Sexp], n: usize, whole: &Sexp) -> Result<Vec<Term>, ParseError> {
        if args.len() != n {
            return self.err(whole, format!("expected {n} quantity arguments, found {}", args.len()));
        }
        args.iter().map(|a| self.term(a)).collect()
    }

    fn formula(&mut self, s: &Sexp) -> Result<Formula, ParseError> {
        let items = match s {
            Sexp::Atom(a, _) if a == "true" => return Ok(Formula::True),
            Sexp::Atom(a, _) if a == "false" => return Ok(Formula::False),
            Sexp::Atom(..) => return self.err(s, format!("expected a formula, found {s}")),
            Sexp::List(items, _) => items,
        };
        let Some(head) = items.first().and_then(Sexp::atom) else {
            return self.err(s, format!("expected a formula, found {s}"));
        };
        let unary_body = |conv: &Self, f: fn(String) -> Formula| -> Result<Formula, ParseError> {
            conv.arity(items, 1, s)?;
            Ok(f(conv.body(&items[1], s)?))
        };
        match head {
            "euclidean-field" => {
                self.arity(items, 0, s)?;
                Ok(Formula::EField)
            }
            "W" | "in-wl" => {
                if items.len() < 4 {
                    return self.err(s, format!("{head} expects two bodies and a point"));
                }
                let k = self.body(&items[1], s)?;
                let b = self.body(&items[2], s)?;
                let p = self.point_args(&items[3..], s)?;
                Ok(if head == "W" { Formula::W(k, b, p) } else { Formula::Wl(k, b, p) })
            }
            "IOb" => unary_body(self, Formula::IOb),
            "Ph" => unary_body(self, Formula::Ph),
            "E" => unary_body(self, Formula::E),
            "Ether" => unary_body(self, Formula::Ether),
            "Ob" => unary_body(self, Formula::Ob),
            "=" => {
                self.arity(items, 2, s)?;
                let is_body = |x: &Sexp| matches!(x, Sexp::Atom(a, _) if !is_number(a) && !RESERVED.contains(&a.as_str()) && self.sort_of(a) == Sort::Body);
                if is_body(&items[1]) || is_body(&items[2]) {
                    Ok(Formula::BodyEq(self.body(&items[1], s)?, self.body(&items[2], s)?))
                } else {
                    Ok(Formula::Eq(self.term(&items[1])?, self.term(&items[2])?))
                }
            }
            "<=" | "<" => {
                self.arity(items, 2, s)?;
                let a = self.term(&items[1])?;
                let b = self.term(&items[2])?;
                Ok(if head == "<=" { Formula::Le(a, b) } else { Formula::Lt(a, b) })
            }
            "ev=" => {
                self.arity(items, 4, s)?;
                Ok(Formula::EvEq(self.body(&items[1], s)?, self.point(&items[2])?, self.body(&items[3], s)?, self.point(&items[4])?))
            }
            "pt=" => {
                self.arity(items, 2, s)?;
                Ok(Formula::PointEq(self.point(&items[1])?, self.point(&items[2])?))
            }
            "velocity=" => {
                self.arity(items, 5, s)?;
                let k = self.body(&items[1], s)?;
                let b = self.body(&items[2], s)?;
                let v = self.terms(&items[3..], 3, s)?;
                let [a, b2, c]: [Term; 3] = v.try_into().expect("three terms");
                Ok(Formula::VelocityIs(k, b, Box::new([a, b2, c])))
            }
            "wv=" => {
                if items.len() < 3 {
                    return self.err(s, "wv= expects two bodies and 20 parameters".into());
                }
                let k = self.body(&items[1], s)?;
                let h = self.body(&items[2], s)?;
                Ok(Formula::WvIs(k, h, self.terms(&items[3..], 20, s)?))
            }
            "triv" => Ok(Formula::Triv(self.terms(&items[1..], 20, s)?)),
            "tr" => {
                self.arity(items, 2, s)?;
                let name = items[1].atom().unwrap_or("");
                let Some(t) = TrKind::from_name(name) else {
                    return self.err(&items[1], format!("unknown translator {}", items[1]));
                };
                Ok(Formula::Trans(t, Box::new(self.formula(&items[2])?)))
            }
            "not" => {
                self.arity(items, 1, s)?;
                Ok(Formula::not(self.formula(&items[1])?))
            }
            "and" | "or" => {
                let parts = items[1..].iter().map(|x| self.formula(x)).collect::<Result<Vec<_>, _>>()?;
                Ok(if head == "and" { Formula::And(parts) } else { Formula::Or(parts) })
            }
            "->" | "<->" => {
                self.arity(items, 2, s)?;
                let a = self.formula(&items[1])?;
                let b = self.formula(&items[2])?;
                Ok(if head == "->" { Formula::implies(a, b) } else { Formula::iff(a, b) })
            }
            "forall" | "exists" => {
                self.arity(items, 2, s)?;
                let Sexp::List(binders, _) = &items[1] else {
                    return self.err(&items[1], "expected a binder list".into());
                };
                let mut bs = Vec::new();
                for b in binders {
                    let pair = match b {
                        Sexp::List(p, _) if p.len() == 2 => p,
                        _ => return self.err(b, format!("expected (name sort), found {b}")),
                    };
                    let name = self.identifier(&pair[0])?;
                    let sort = match pair[1].atom() {
                        Some("B") => Sort::Body,
                        Some("Q") => Sort::Quantity,
                        _ => return self.err(&pair[1], format!("unknown sort {}", pair[1])),
                    };
                    bs.push(Binder { name, sort });
                }
                let depth = self.scopes.len();
                self.scopes.extend(bs.iter().map(|b| (b.name.clone(), b.sort)));
                let body = self.formula(&items[2]);
                self.scopes.truncate(depth);
                let body = Box::new(body?);
                Ok(if head == "forall" { Formula::Forall(bs, body) } else { Formula::Exists(bs, body) })
            }
            "forall-in" | "exists-in" => {
                self.arity(items, 2, s)?;
                let Sexp::List(binders, _) = &items[1] else {
                    return self.err(&items[1], "expected a binder list".into());
                };
                let mut bs = Vec::new();
                for b in binders {
                    let pair = match b {
                        Sexp::List(p, _) if p.len() == 2 => p,
                        _ => return self.err(b, format!("expected (name predicate), found {b}")),
                    };
                    let name = self.identifier(&pair[0])?;
                    let Some(guard) = pair[1].atom().and_then(Guard::from_keyword) else {
                        return self.err(&pair[1], format!("unknown bounding predicate {}", pair[1]));
                    };
                    bs.push((name, guard));
                }
                let depth = self.scopes.len();
                self.scopes.extend(bs.iter().map(|(n, _)| (n.clone(), Sort::Body)));
                let body = self.formula(&items[2]);
                self.scopes.truncate(depth);
                let body = Box::new(body?);
                Ok(if head == "forall-in" { Formula::ForallIn(bs, body) } else { Formula::ExistsIn(bs, body) })
            }
            _ => self.err(s, format!("unknown formula constructor {head}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equation_atom() {
        assert_eq!(parse("(= x x)").unwrap(), Formula::Eq(Term::var("x"), Term::var("x")));
    }

    #[test]
    fn body_equation_inferred_from_usage() {
        let f = parse("(and (IOb k) (= k h))").unwrap();
        assert_eq!(f, Formula::And(vec![Formula::IOb("k".into()), Formula::BodyEq("k".into(), "h".into())]));
    }

    #[test]
    fn quantity_in_body_position_is_a_sort_error() {
        let e = parse("(forall ((k Q)) (W k b x0 x1 x2 x3))").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Sort);
        assert!(e.message.contains("(W k b x0 x1 x2 x3)"), "{}", e.message);
    }

    #[test]
    fn body_in_term_position_is_a_sort_error() {
        let e = parse("(forall ((k B)) (< k 1))").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Sort);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse("(and (IOb k)\n  (frob x))").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Syntax);
        assert_eq!((e.line, e.column), (2, 3));
        let e = parse("(and (IOb k)").unwrap_err();
        assert!(e.message.contains("unclosed"));
    }

    #[test]
    fn literals_and_light_constants() {
        let f = parse("(< (* -3/5 x) c_e)").unwrap();
        assert_eq!(f, Formula::Lt(Term::mul(Term::Lit(Rat::new(-3, 5)), Term::var("x")), Term::Light(LightKind::Ether)));
    }

    #[test]
    fn comments_and_many_forms() {
        let fs = parse_many("; two formulas\n(IOb k) ; first\n(Ph p)").unwrap();
        assert_eq!(fs.len(), 2);
    }

    #[test]
    fn point_forms_in_w() {
        let f = parse("(W k b (rad-inv k e (pt t 0 0 0)))").unwrap();
        assert_eq!(f.to_string(), "(W k b (rad-inv k e (pt t 0 0 0)))");
        let g = parse("(W k b (pt t 0 0 0))").unwrap();
        assert_eq!(g.to_string(), "(W k b t 0 0 0)");
    }
}
