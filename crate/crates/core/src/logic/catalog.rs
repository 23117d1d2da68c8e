//! The axioms of the kinematic theories and the theory sets built from them.

use std::sync::OnceLock;
use std::collections::HashMap;

use super::{parse, Formula, LogicError};

/// Every catalog entry, in a stable order.
pub const AXIOM_NAMES: [&str; 15] = [
    "AxEField",
    "AxEv",
    "AxSelf",
    "AxSymD",
    "AxLine",
    "AxTriv",
    "AxNoAcc",
    "AxAbsTime",
    "AxThExp+",
    "AxEther",
    "AxPh_c",
    "AxThExp",
    "AxNoFTL",
    "AxThExpSTL",
    "AxPrimitiveEther",
];

pub fn axiom_names() -> &'static [&'static str] {
    &AXIOM_NAMES
}

fn binders(names: &[String], sort: &str) -> String {
    names.iter().map(|n| format!("({n} {sort})")).collect::<Vec<_>>().join(" ")
}

fn vector(base: &str) -> Vec<String> {
    (0..4).map(|i| format!("{base}{i}")).collect()
}

fn pt(base: &str) -> String {
    format!("(pt {})", vector(base).join(" "))
}

fn quantities(bases: &[&str]) -> String {
    let names: Vec<String> = bases.iter().flat_map(|b| vector(b)).collect();
    binders(&names, "Q")
}

fn params() -> Vec<String> {
    (1..=20).map(|i| format!("q{i}")).collect()
}

/// "the segment between x and y lies on a line of speed `c` per `k`"
fn light_like(c: &str) -> String {
    format!("(= (space {} {}) (* {c} (time {} {})))", pt("x"), pt("y"), pt("x"), pt("y"))
}

fn source(name: &str) -> Option<String> {
    let x = pt("x");
    let y = pt("y");
    let xs = vector("x").join(" ");
    let ys = vector("y").join(" ");
    let text = match name {
        "AxEField" => "(euclidean-field)".to_string(),
        "AxEv" => format!(
            "(forall-in ((k IOb) (h IOb)) (forall ({}) (exists ({}) (ev= k {x} h {y}))))",
            quantities(&["x"]),
            quantities(&["y"])
        ),
        "AxSelf" => "(forall-in ((k IOb)) (forall ((t Q) (x Q) (y Q) (z Q)) (<-> (W k k t x y z) (and (= x 0) (= y 0) (= z 0)))))".to_string(),
        "AxSymD" => format!(
            "(forall-in ((k IOb) (k2 IOb)) (forall ({}) (-> (and (= (time {x} {y}) 0) (= (time {xp} {yp}) 0) (ev= k {x} k2 {xp}) (ev= k {y} k2 {yp})) (= (space {x} {y}) (space {xp} {yp})))))",
            quantities(&["x", "y", "xp", "yp"]),
            xp = pt("xp"),
            yp = pt("yp")
        ),
        "AxLine" => {
            let zs = vector("z").join(" ");
            let along = |a: &str, b: &str, c: &str, d: &str| {
                let eqs: Vec<String> = (0..4).map(|i| format!("(= (- {a}{i} {b}{i}) (* a (- {c}{i} {d}{i})))")).collect();
                format!("(and {})", eqs.join(" "))
            };
            format!(
                "(forall-in ((k IOb) (h IOb)) (forall ({}) (-> (and (in-wl k h {xs}) (in-wl k h {ys}) (in-wl k h {zs})) (exists ((a Q)) (or {} {})))))",
                quantities(&["x", "y", "z"]),
                along("z", "x", "y", "x"),
                along("y", "z", "z", "x")
            )
        }
        "AxTriv" => {
            let q = params();
            format!(
                "(forall ({}) (-> (triv {qs}) (forall-in ((k IOb)) (exists-in ((k2 IOb)) (wv= k k2 {qs})))))",
                binders(&q, "Q"),
                qs = q.join(" ")
            )
        }
        "AxNoAcc" => "(forall ((k B)) (-> (Ob k) (IOb k)))".to_string(),
        "AxAbsTime" => format!(
            "(forall-in ((k IOb) (k2 IOb)) (forall ({}) (-> (and (ev= k {x} k2 {xp}) (ev= k {y} k2 {yp})) (= (time {x} {y}) (time {xp} {yp})))))",
            quantities(&["x", "y", "xp", "yp"]),
            xp = pt("xp"),
            yp = pt("yp")
        ),
        "AxThExp+" => format!(
            "(and (exists ((h B)) (IOb h)) (forall-in ((k IOb)) (forall ({}) (-> (not (= x0 y0)) (exists-in ((k2 IOb)) (and (in-wl k k2 {xs}) (in-wl k k2 {ys})))))))",
            quantities(&["x", "y"])
        ),
        "AxEther" => "(exists ((e B)) (Ether e))".to_string(),
        "AxPh_c" => format!(
            "(exists ((c Q)) (and (< 0 c) (forall-in ((k IOb)) (forall ({}) (<-> (exists-in ((p Ph)) (and (in-wl k p {xs}) (in-wl k p {ys}))) {})))))",
            quantities(&["x", "y"]),
            light_like("c")
        ),
        "AxThExp" => format!(
            "(and (exists ((h B)) (IOb h)) (forall-in ((k IOb)) (forall ({}) (-> (< (space {x} {y}) (* c_sr (time {x} {y}))) (exists-in ((k2 IOb)) (and (in-wl k k2 {xs}) (in-wl k k2 {ys})))))))",
            quantities(&["x", "y"])
        ),
        "AxNoFTL" => "(forall-in ((k IOb)) (forall-in ((e Ether)) (< (speed e k) c_e)))".to_string(),
        "AxThExpSTL" => format!(
            "(and (exists ((h B)) (IOb h)) (forall-in ((e Ether)) (forall ({}) (-> (< (space {x} {y}) (* c_e (time {x} {y}))) (exists-in ((k IOb)) (and (in-wl e k {xs}) (in-wl e k {ys})))))))",
            quantities(&["x", "y"])
        ),
        "AxPrimitiveEther" => {
            let q = params();
            format!(
                "(exists-in ((e IOb)) (forall ((k B)) (<-> (and (IOb k) (exists ({}) (and (triv {qs}) (wv= e k {qs})))) (E k))))",
                binders(&q, "Q"),
                qs = q.join(" ")
            )
        }
        _ => return None,
    };
    Some(text)
}

fn canonical(name: &str) -> Option<&'static str> {
    let alias = match name {
        "AxThExp_plus" | "AxThExpPlus" | "AxThExp₊" => "AxThExp+",
        "AxThExp^STL" | "AxThExp_STL" => "AxThExpSTL",
        "AxPh" => "AxPh_c",
        other => other,
    };
    AXIOM_NAMES.iter().copied().find(|n| *n == alias)
}

fn cache() -> &'static HashMap<&'static str, Formula> {
    static CACHE: OnceLock<HashMap<&'static str, Formula>> = OnceLock::new();
    CACHE.get_or_init(|| {
        AXIOM_NAMES
            .iter()
            .map(|n| (*n, parse(&source(n).expect("catalog entry")).expect("catalog entries parse")))
            .collect()
    })
}

/// The named axiom.
pub fn axiom(name: &str) -> Result<Formula, LogicError> {
    let key = canonical(name).ok_or_else(|| LogicError::UnknownAxiom(name.to_string()))?;
    Ok(cache()[key].clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Theory {
    KinFull,
    ClassicalKinFull,
    ClassicalKinStl,
    SpecRelFull,
    SpecRelE,
}

impl Theory {
    pub const ALL: [Theory; 5] = [Theory::KinFull, Theory::ClassicalKinFull, Theory::ClassicalKinStl, Theory::SpecRelFull, Theory::SpecRelE];

    pub fn name(self) -> &'static str {
        match self {
            Theory::KinFull => "Kin_Full",
            Theory::ClassicalKinFull => "ClassicalKin_Full",
            Theory::ClassicalKinStl => "ClassicalKin_STL",
            Theory::SpecRelFull => "SpecRel_Full",
            Theory::SpecRelE => "SpecRel_e",
        }
    }

    pub fn from_name(s: &str) -> Result<Theory, LogicError> {
        Theory::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| LogicError::UnknownTheory(s.to_string()))
    }

    /// Member axiom names in catalog order.
    pub fn members(self) -> Vec<&'static str> {
        let kin = ["AxEField", "AxEv", "AxSelf", "AxSymD", "AxLine", "AxTriv", "AxNoAcc"];
        let mut out: Vec<&'static str> = kin.to_vec();
        match self {
            Theory::KinFull => {}
            Theory::ClassicalKinFull => out.extend(["AxAbsTime", "AxThExp+", "AxEther"]),
            Theory::ClassicalKinStl => out.extend(["AxAbsTime", "AxEther", "AxNoFTL", "AxThExpSTL"]),
            Theory::SpecRelFull => out.extend(["AxPh_c", "AxThExp"]),
            Theory::SpecRelE => out.extend(["AxPh_c", "AxThExp", "AxPrimitiveEther"]),
        }
        out
    }
}

/// The axioms of a theory, paired with their names.
pub fn theory(t: Theory) -> Vec<(&'static str, Formula)> {
    t.members().into_iter().map(|n| (n, axiom(n).expect("member of catalog"))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Guard, Point, Term};

    #[test]
    fn every_axiom_round_trips() {
        for name in AXIOM_NAMES {
            let f = axiom(name).unwrap();
            assert_eq!(parse(&f.to_string()).unwrap(), f, "{name}");
            assert_eq!(f.to_string(), source(name).unwrap(), "{name} source is in normal form");
        }
    }

    #[test]
    fn self_axiom_shape() {
        let f = axiom("AxSelf").unwrap();
        let expected = Formula::forall_in(
            "k",
            Guard::IOb,
            Formula::forall(
                ["t", "x", "y", "z"].iter().map(|n| crate::logic::Binder::quantity(n)).collect(),
                Formula::iff(
                    Formula::w("k", "k", Point::vars(["t", "x", "y", "z"])),
                    Formula::And(vec![
                        Formula::eq(Term::var("x"), Term::int(0)),
                        Formula::eq(Term::var("y"), Term::int(0)),
                        Formula::eq(Term::var("z"), Term::int(0)),
                    ]),
                ),
            ),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn field_axiom_is_a_marker() {
        assert_eq!(axiom("AxEField").unwrap(), Formula::EField);
    }

    #[test]
    fn no_acceleration_reads_ob_implies_iob() {
        assert_eq!(axiom("AxNoAcc").unwrap().to_string(), "(forall ((k B)) (-> (Ob k) (IOb k)))");
    }

    #[test]
    fn unknown_axiom() {
        assert_eq!(axiom("AxFoo"), Err(LogicError::UnknownAxiom("AxFoo".into())));
    }

    #[test]
    fn aliases_resolve() {
        assert_eq!(axiom("AxThExp_plus").unwrap(), axiom("AxThExp+").unwrap());
    }

    #[test]
    fn theory_memberships() {
        let names = |t: Theory| {
            let mut v = t.members();
            v.sort();
            v
        };
        let kin = names(Theory::KinFull);
        assert_eq!(kin, vec!["AxEField", "AxEv", "AxLine", "AxNoAcc", "AxSelf", "AxSymD", "AxTriv"]);
        let ck = names(Theory::ClassicalKinFull);
        assert_eq!(ck.len(), 10);
        assert!(ck.contains(&"AxAbsTime") && ck.contains(&"AxThExp+") && ck.contains(&"AxEther"));
        let stl = names(Theory::ClassicalKinStl);
        assert!(!stl.contains(&"AxThExp+") && stl.contains(&"AxNoFTL") && stl.contains(&"AxThExpSTL"));
        assert_eq!(stl.len(), 11);
        let sr = names(Theory::SpecRelFull);
        assert_eq!(sr.len(), 9);
        assert!(sr.contains(&"AxPh_c") && sr.contains(&"AxThExp"));
        let sre = names(Theory::SpecRelE);
        assert_eq!(sre.len(), 10);
        assert!(sre.contains(&"AxPrimitiveEther"));
    }

    #[test]
    fn primitive_ether_only_in_extended_relativity() {
        for t in Theory::ALL {
            let mentions = theory(t).iter().any(|(_, f)| f.mentions_e());
            assert_eq!(mentions, t == Theory::SpecRelE, "{}", t.name());
        }
    }
}
