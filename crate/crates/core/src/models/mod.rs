//! Desk-scale models of the kinematic theories and a model checker for
//! formulas of the kinematic language.
//!
//! A model is intensional: every inertial observer carries an exact affine
//! frame `F` taking coordinates of the distinguished ether frame `e0` to its
//! own coordinates, and every other body a straight worldline in `e0`
//! coordinates. `W(k, b, x̄)` holds when `F_k⁻¹(x̄)` lies on the worldline of
//! `b`. The roster is finite; the intended model also contains every
//! observer and photon the theory permits, and the evaluator synthesizes
//! such bodies when an existential quantifier asks for one.

mod checks;
mod eval;
mod num;
mod random;
mod sample;
mod synth;
mod view;

pub use checks::{
    axioms_for, check_corollaries, check_translated_axioms, check_velocity_remap, eval, recheck, roundtrip,
    transform_model, AtomPattern, AxiomVerdict, CorollaryCheck, CorollaryReport, EvalOptions, EvalResult, InterpretationReport,
    RoundtripPair, RoundtripReport, RoundtripRow, VelocityRemapReport, VelocityRemapRow, Verdict,
};
pub use eval::{Cex, Evaluator, Truth, Val};
pub use num::Num;
pub use random::{pythagorean_fraction, rational_rotation, rational_unit_vector, random_trivial};
pub use view::{cone_scale, Kinematics, View};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Rat;
use crate::spacetime::{Event, Line, Velocity};
use crate::transforms::{boost_to_rest, classify, galilean_to_rest, AffineMap4};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("{0} is not an observer")]
    NotAnObserver(String),
    #[error("unknown body {0}")]
    UnknownBody(String),
    #[error("observer {0} is not slower than light relative to the ether")]
    FtlObserverPresent(String),
    #[error("the formula does not fit the model: {0}")]
    SignatureViolation(String),
}

/// Which theory a model is meant to satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoryTag {
    #[serde(rename = "CK")]
    Ck,
    #[serde(rename = "CK-STL")]
    CkStl,
    #[serde(rename = "SR")]
    Sr,
    #[serde(rename = "SR-e")]
    SrE,
}

impl TheoryTag {
    pub fn name(self) -> &'static str {
        match self {
            TheoryTag::Ck => "CK",
            TheoryTag::CkStl => "CK-STL",
            TheoryTag::Sr => "SR",
            TheoryTag::SrE => "SR-e",
        }
    }

    pub fn from_name(s: &str) -> Option<TheoryTag> {
        [TheoryTag::Ck, TheoryTag::CkStl, TheoryTag::Sr, TheoryTag::SrE].into_iter().find(|t| t.name() == s)
    }

    pub fn kinematics(self) -> Kinematics {
        match self {
            TheoryTag::Ck | TheoryTag::CkStl => Kinematics::Classical,
            TheoryTag::Sr | TheoryTag::SrE => Kinematics::Relativistic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BodyKind {
    Observer,
    Photon,
}

/// One roster entry of a model spec.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BodySpec {
    #[serde(default)]
    pub name: Option<String>,
    pub kind: BodyKind,
    /// observer velocity, or photon direction (a unit vector), in `e0` coordinates
    #[serde(default)]
    pub velocity: Option<[Rat; 3]>,
    /// event where the body's own origin sits, in `e0` coordinates
    #[serde(default)]
    pub offset: Option<[Rat; 4]>,
    /// spatial orientation as a quaternion `(a, b, c, d)`, any non-zero scale
    #[serde(default)]
    pub rotation: Option<[Rat; 4]>,
    /// also add this many images of the body under random trivial transformations
    #[serde(default)]
    pub trivial_orbit: usize,
    #[serde(default)]
    pub ether: bool,
    #[serde(default, rename = "E")]
    pub e: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelSpec {
    pub theory: TheoryTag,
    pub c: Rat,
    #[serde(default)]
    pub bodies: Vec<BodySpec>,
    #[serde(default)]
    pub seed: u64,
    /// add photons through the origin along the six axis directions
    #[serde(default = "yes")]
    pub photon_templates: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Body {
    pub id: usize,
    pub name: String,
    /// `e0` coordinates to own coordinates; present exactly for inertial observers
    pub frame: Option<AffineMap4<Rat>>,
    pub line: Line<Rat>,
    pub ph: bool,
    /// primitive ether flag of relativistic models
    pub e: bool,
    pub synthesized: bool,
}

impl Body {
    pub fn is_observer(&self) -> bool {
        self.frame.is_some()
    }

    pub fn observer(id: usize, name: &str, frame: AffineMap4<Rat>, e: bool, synthesized: bool) -> Body {
        let line = observer_line(&frame);
        Body { id, name: name.to_string(), frame: Some(frame), line, ph: false, e, synthesized }
    }

    pub fn photon(id: usize, name: &str, line: Line<Rat>, synthesized: bool) -> Body {
        Body { id, name: name.to_string(), frame: None, line, ph: true, e: false, synthesized }
    }
}

/// Worldline of an observer with the given frame: the preimage of its time axis.
pub fn observer_line(frame: &AffineMap4<Rat>) -> Line<Rat> {
    let inv = frame.inverse().expect("frames are invertible");
    let a = inv.apply(&Event::origin());
    let b = inv.apply(&Event::basis(0));
    Line::through(&a, &b).expect("distinct points")
}

#[derive(Clone, Debug, Serialize)]
pub struct Model {
    pub theory: TheoryTag,
    pub c: Rat,
    pub bodies: Vec<Body>,
    pub seed: u64,
}

impl Model {
    pub fn body(&self, name: &str) -> Result<&Body, ModelError> {
        self.bodies.iter().find(|b| b.name == name).ok_or_else(|| ModelError::UnknownBody(name.to_string()))
    }

    pub fn observers(&self) -> impl Iterator<Item = &Body> {
        self.bodies.iter().filter(|b| b.is_observer())
    }

    /// Index of the distinguished ether frame.
    pub fn e0(&self) -> &Body {
        &self.bodies[0]
    }

    pub fn from_json(text: &str) -> Result<Model, ModelError> {
        let spec: ModelSpec = serde_json::from_str(text).map_err(|e| ModelError::InvalidSpec(e.to_string()))?;
        build_model(&spec)
    }
}

fn rat(n: i64) -> Rat {
    Rat::int(n)
}

fn invalid(msg: impl Into<String>) -> ModelError {
    ModelError::InvalidSpec(msg.into())
}

/// Frame of an observer moving with `u` whose origin sits at `offset`,
/// oriented by `rotation`.
pub fn placement(
    kin: Kinematics,
    c: &Rat,
    u: &Velocity<Rat>,
    offset: &Event<Rat>,
    rotation: &AffineMap4<Rat>,
) -> Result<AffineMap4<Rat>, ModelError> {
    let to_rest = match kin {
        Kinematics::Classical => galilean_to_rest(u),
        Kinematics::Relativistic => {
            boost_to_rest(u, c).map_err(|e| invalid(format!("velocity {u} is not usable in a relativistic model: {e}")))?
        }
    };
    let shift = AffineMap4::translation(Event(offset.0.clone().map(|x| -x)));
    Ok(rotation.compose(&to_rest).compose(&shift))
}

pub fn build_model(spec: &ModelSpec) -> Result<Model, ModelError> {
    if !spec.c.is_positive() {
        return Err(invalid("light speed must be positive"));
    }
    let c = &spec.c;
    let kin = spec.theory.kinematics();
    let mut rng = random::rng(spec.seed);
    let mut bodies: Vec<Body> = Vec::new();
    let mut names = BTreeSet::new();
    let is_e0 = |b: &BodySpec| {
        b.kind == BodyKind::Observer
            && b.name.as_deref() == Some("e0")
            && b.velocity.as_ref().is_none_or(|v| v.iter().all(|x| x.0 == rat(0).0))
            && b.offset.as_ref().is_none_or(|v| v.iter().all(|x| x.0 == rat(0).0))
            && b.rotation.is_none()
    };
    if !spec.bodies.first().is_some_and(is_e0) {
        let mut e0 = Body::observer(0, "e0", AffineMap4::identity(), spec.theory == TheoryTag::SrE, false);
        e0.e = spec.theory == TheoryTag::SrE;
        bodies.push(e0);
        names.insert("e0".to_string());
    }
    for (i, b) in spec.bodies.iter().enumerate() {
        let base_name = b.name.clone().unwrap_or_else(|| format!("b{}", i + 1));
        if b.e && spec.theory != TheoryTag::SrE {
            return Err(invalid(format!("{base_name}: the E flag belongs to SR-e models")));
        }
        if b.ether && kin == Kinematics::Relativistic {
            return Err(invalid(format!("{base_name}: ether flags belong to classical models")));
        }
        let zero = [rat(0), rat(0), rat(0)];
        let offset = Event(b.offset.clone().unwrap_or([rat(0), rat(0), rat(0), rat(0)]));
        let mut made: Vec<Body> = Vec::new();
        match b.kind {
            BodyKind::Observer => {
                let u = Velocity(b.velocity.clone().unwrap_or(zero));
                let speed_sq = u.norm_sq();
                let c2 = c * c;
                if spec.theory != TheoryTag::Ck && speed_sq >= c2 {
                    return Err(invalid(format!("{base_name}: observer speed is not below the light speed")));
                }
                if (b.ether || b.e) && !u.is_zero() {
                    return Err(invalid(format!("{base_name}: ether bodies must be at rest relative to e0")));
                }
                let rot = match &b.rotation {
                    Some(q) => random::rotation_from_quaternion(q).ok_or_else(|| invalid(format!("{base_name}: zero quaternion")))?,
                    None => AffineMap4::identity(),
                };
                let frame = placement(kin, c, &u, &offset, &rot)?;
                made.push(Body::observer(0, &base_name, frame, b.e, false));
            }
            BodyKind::Photon => {
                let dir = Velocity(b.velocity.clone().unwrap_or([rat(1), rat(0), rat(0)]));
                if dir.norm_sq() != rat(1) {
                    return Err(invalid(format!("{base_name}: photon direction must be a unit vector")));
                }
                if b.ether || b.e || b.rotation.is_some() {
                    return Err(invalid(format!("{base_name}: photons carry no frame data")));
                }
                let line = Line::moving(offset.clone(), &dir.scale(c));
                made.push(Body::photon(0, &base_name, line, false));
            }
        }
        for n in 0..b.trivial_orbit {
            let t = random::random_trivial(&mut rng);
            let mut copy = made[0].clone();
            copy.name = format!("{base_name}~{}", n + 1);
            match &copy.frame {
                Some(f) => {
                    let frame = t.compose(f);
                    copy.line = observer_line(&frame);
                    copy.frame = Some(frame);
                }
                None => {
                    let inv = t.inverse().expect("trivial maps are invertible");
                    let p = inv.apply(&copy.line.point);
                    let d = inv.apply_linear(&copy.line.dir);
                    copy.line = Line::new(p, d).expect("non-zero direction");
                }
            }
            made.push(copy);
        }
        for m in made {
            if !names.insert(m.name.clone()) {
                return Err(invalid(format!("duplicate body name {}", m.name)));
            }
            bodies.push(m);
        }
    }
    if spec.photon_templates {
        let axes = [("+x", [1, 0, 0]), ("-x", [-1, 0, 0]), ("+y", [0, 1, 0]), ("-y", [0, -1, 0]), ("+z", [0, 0, 1]), ("-z", [0, 0, -1])];
        for (label, d) in axes {
            let name = format!("ph{label}");
            if names.insert(name.clone()) {
                let line = Line::moving(Event::origin(), &Velocity::from_ints(d).scale(c));
                bodies.push(Body::photon(0, &name, line, false));
            }
        }
    }
    for (i, b) in bodies.iter_mut().enumerate() {
        b.id = i;
    }
    let model = Model { theory: spec.theory, c: spec.c.clone(), bodies, seed: spec.seed };
    validate(&model)?;
    Ok(model)
}

fn validate(m: &Model) -> Result<(), ModelError> {
    let frames: Vec<(&str, &AffineMap4<Rat>, bool)> =
        m.bodies.iter().filter_map(|b| b.frame.as_ref().map(|f| (b.name.as_str(), f, b.e))).collect();
    for (name, f, _) in &frames {
        let cls = classify(*f, &m.c);
        let ok = match m.theory.kinematics() {
            Kinematics::Classical => cls.galilean,
            Kinematics::Relativistic => cls.poincare,
        };
        if !ok {
            return Err(invalid(format!("{name}: placement is not a {} map", if m.theory.kinematics() == Kinematics::Classical { "Galilean" } else { "Poincaré" })));
        }
    }
    if m.theory == TheoryTag::SrE {
        let members: Vec<_> = frames.iter().filter(|(_, _, e)| *e).collect();
        for (name, f, _) in &members {
            let w = f.compose(&m.e0().frame.as_ref().expect("e0 is an observer").inverse().expect("invertible"));
            if !classify(&w, &m.c).trivial {
                return Err(invalid(format!("{name}: E-members must be related by trivial transformations")));
            }
        }
    }
    Ok(())
}

/// `w_kh = F_h ∘ F_k⁻¹`, taking `k`-coordinates of an event to its `h`-coordinates.
pub fn worldview_transform(m: &Model, k: &str, h: &str) -> Result<AffineMap4<Rat>, ModelError> {
    let fk = m.body(k)?.frame.as_ref().ok_or_else(|| ModelError::NotAnObserver(k.to_string()))?;
    let fh = m.body(h)?.frame.as_ref().ok_or_else(|| ModelError::NotAnObserver(h.to_string()))?;
    Ok(fh.compose(&fk.inverse().expect("frames are invertible")))
}

/// The standard classical model: the ether `e0` with a trivial orbit, six
/// slower-than-light observers in assorted directions and the photon templates.
pub fn standard_spec(theory: TheoryTag) -> ModelSpec {
    let r = |s: &str| -> Rat { s.parse().expect("literal") };
    let v = |a: &str, b: &str, c: &str| Some([r(a), r(b), r(c)]);
    let obs = |name: &str, velocity: Option<[Rat; 3]>, offset: [&str; 4]| BodySpec {
        name: Some(name.to_string()),
        kind: BodyKind::Observer,
        velocity,
        offset: Some(offset.map(r)),
        rotation: None,
        trivial_orbit: 0,
        ether: false,
        e: false,
    };
    let classical = theory.kinematics() == Kinematics::Classical;
    let mut bodies = vec![BodySpec {
        name: Some("e0".into()),
        kind: BodyKind::Observer,
        velocity: None,
        offset: None,
        rotation: None,
        trivial_orbit: 2,
        ether: classical,
        e: theory == TheoryTag::SrE,
    }];
    bodies.push(obs("k1", v("3/5", "0", "0"), ["0", "0", "0", "0"]));
    bodies.push(obs("k2", v("0", "-4/5", "0"), ["1", "2", "0", "-1"]));
    bodies.push(obs("k3", v("6/35", "9/35", "18/35"), ["0", "1", "1", "1"]));
    bodies.push(obs("k4", v("-5/13", "0", "0"), ["-2", "0", "3", "0"]));
    bodies.push(obs("k5", v("0", "0", "12/13"), ["1/2", "0", "0", "0"]));
    let mut k6 = obs("k6", v("8/17", "0", "0"), ["0", "-1", "0", "2"]);
    k6.rotation = Some([r("1"), r("1"), r("0"), r("0")]);
    bodies.push(k6);
    ModelSpec { theory, c: r("1"), bodies, seed: 7, photon_templates: true }
}

/// A classical model for the `tr*∘tr+` chain. Every speed `s` makes `1+2s`
/// a square, so the speed `s/(1+s)` seen after `tr*` has a rational
/// contraction factor. Two observers are faster than light.
pub fn composed_spec() -> ModelSpec {
    let mut spec = standard_spec(TheoryTag::Ck);
    let r = |s: &str| -> Rat { s.parse().expect("literal") };
    let velocities = [
        ["12/25", "0", "0"],
        ["0", "-5/8", "0"],
        ["7/30", "0", "-14/45"],
        ["-3/2", "0", "0"],
        ["0", "12/5", "16/5"],
        ["3/8", "1/2", "0"],
    ];
    for (b, v) in spec.bodies.iter_mut().skip(1).zip(velocities) {
        b.velocity = Some(v.map(r));
    }
    spec
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn standard_models_build() {
        for t in [TheoryTag::Ck, TheoryTag::CkStl, TheoryTag::Sr, TheoryTag::SrE] {
            let m = build_model(&standard_spec(t)).unwrap();
            assert_eq!(m.e0().name, "e0");
            assert!(m.e0().frame.as_ref().unwrap().is_identity());
            assert_eq!(m.observers().count(), 9);
            assert_eq!(m.bodies.iter().filter(|b| b.ph).count(), 6);
        }
    }

    #[test]
    fn minimal_classical_model() {
        let spec: ModelSpec = serde_json::from_str(r#"{"theory": "CK", "c": "1"}"#).unwrap();
        let m = build_model(&spec).unwrap();
        assert_eq!(m.bodies.len(), 7);
    }

    #[test]
    fn faster_than_light_observer_rejected_in_stl_model() {
        let text = r#"{"theory": "CK-STL", "c": "1", "bodies": [{"kind": "observer", "velocity": ["2", "0", "0"]}]}"#;
        assert!(matches!(Model::from_json(text), Err(ModelError::InvalidSpec(_))));
        let text = text.replace("CK-STL", "CK");
        assert!(Model::from_json(&text).is_ok());
    }

    #[test]
    fn boosted_primitive_ether_rejected() {
        let text = r#"{"theory": "SR-e", "c": "1", "bodies": [{"kind": "observer", "velocity": ["3/5", "0", "0"], "E": true}]}"#;
        assert!(matches!(Model::from_json(text), Err(ModelError::InvalidSpec(_))));
    }

    #[test]
    fn non_pythagorean_relativistic_velocity_rejected() {
        let text = r#"{"theory": "SR", "c": "1", "bodies": [{"kind": "observer", "velocity": ["1/2", "0", "0"]}]}"#;
        assert!(Model::from_json(text).is_err());
        let text = r#"{"theory": "SR", "c": "1", "bodies": [{"kind": "observer", "velocity": ["1/2", "1/2", "1/2"]}]}"#;
        assert!(Model::from_json(text).is_ok());
    }

    #[test]
    fn photon_direction_must_be_unit() {
        let text = r#"{"theory": "CK", "c": "2", "bodies": [{"kind": "photon", "velocity": ["3/5", "4/5", "0"]}]}"#;
        let m = Model::from_json(text).unwrap();
        let p = m.body("b1").unwrap();
        assert_eq!(p.line.velocity().unwrap(), Velocity([r("6/5"), r("8/5"), r("0")]));
        let bad = text.replace("4/5", "1");
        assert!(Model::from_json(&bad).is_err());
    }

    #[test]
    fn worldview_transforms() {
        for t in [TheoryTag::Ck, TheoryTag::Sr] {
            let m = build_model(&standard_spec(t)).unwrap();
            assert!(worldview_transform(&m, "k1", "k1").unwrap().is_identity());
            let w = worldview_transform(&m, "k1", "k3").unwrap();
            let cls = classify(&w, &m.c);
            match t {
                TheoryTag::Ck => assert!(cls.galilean),
                _ => assert!(cls.poincare),
            }
            let fk = m.body("k1").unwrap().frame.clone().unwrap();
            let fh = m.body("k3").unwrap().frame.clone().unwrap();
            let x = Event([r("1"), r("2"), r("-1"), r("1/3")]);
            assert_eq!(w.apply(&x), fh.apply(&fk.inverse().unwrap().apply(&x)));
            assert!(matches!(worldview_transform(&m, "k1", "ph+x"), Err(ModelError::NotAnObserver(_))));
        }
    }

    #[test]
    fn trivial_orbit_members_are_ether() {
        let m = build_model(&standard_spec(TheoryTag::SrE)).unwrap();
        let members: Vec<_> = m.bodies.iter().filter(|b| b.e).collect();
        assert_eq!(members.len(), 3);
        let m = build_model(&standard_spec(TheoryTag::Ck)).unwrap();
        let ethers = m.bodies.iter().filter(|b| b.name.starts_with("e0")).count();
        assert_eq!(ethers, 3);
    }
}
