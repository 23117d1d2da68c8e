//! Coordinate geometry of `Q^4`: events, separations, worldline segments,
//! straight lines and light cones.
//!
//! Coordinates are ordered time first: `(x0, x1, x2, x3) = (t, x, y, z)`.

use std::fmt;
use std::ops::{Add, Index, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Scalar, ScalarError};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum GeometryError {
    #[error("segment endpoints are simultaneous; speed is undefined")]
    HorizontalSegment,
    #[error("segment endpoints coincide")]
    DegenerateSegment,
    #[error("light speed must be positive")]
    NonPositiveLightSpeed,
    #[error("line direction must be non-zero")]
    ZeroDirection,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// A point of `Q^4`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(bound = "S: Serialize + for<'a> Deserialize<'a>")]
pub struct Event<S>(pub [S; 4]);

/// A vector of `Q^3`, used for velocities and spatial directions.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(bound = "S: Serialize + for<'a> Deserialize<'a>")]
pub struct Velocity<S>(pub [S; 3]);

impl<S: Scalar> Event<S> {
    pub fn new(t: S, x: S, y: S, z: S) -> Event<S> {
        Event([t, x, y, z])
    }

    pub fn origin() -> Event<S> {
        Event([S::zero(), S::zero(), S::zero(), S::zero()])
    }

    pub fn from_ints(c: [i64; 4]) -> Event<S> {
        Event(c.map(S::from_int))
    }

    /// The `i`-th unit basis vector.
    pub fn basis(i: usize) -> Event<S> {
        let mut e = Event::origin();
        e.0[i] = S::one();
        e
    }

    /// The point `(t, 0, 0, 0)` of the time axis.
    pub fn on_time_axis(t: S) -> Event<S> {
        Event([t, S::zero(), S::zero(), S::zero()])
    }

    pub fn t(&self) -> &S {
        &self.0[0]
    }

    pub fn spatial(&self) -> Velocity<S> {
        Velocity([self.0[1].clone(), self.0[2].clone(), self.0[3].clone()])
    }

    pub fn scale(&self, k: &S) -> Event<S> {
        Event(self.0.clone().map(|c| c * k.clone()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.near_zero())
    }

    pub fn near(&self, other: &Event<S>) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a.near(b))
    }

    pub fn map<T>(&self, f: impl Fn(&S) -> T) -> Event<T> {
        Event([f(&self.0[0]), f(&self.0[1]), f(&self.0[2]), f(&self.0[3])])
    }

    /// True when the spatial part vanishes.
    pub fn on_time_axis_p(&self) -> bool {
        self.0[1..].iter().all(|c| c.near_zero())
    }
}

impl<S: Scalar> Velocity<S> {
    pub fn new(vx: S, vy: S, vz: S) -> Velocity<S> {
        Velocity([vx, vy, vz])
    }

    pub fn zero() -> Velocity<S> {
        Velocity([S::zero(), S::zero(), S::zero()])
    }

    pub fn from_ints(c: [i64; 3]) -> Velocity<S> {
        Velocity(c.map(S::from_int))
    }

    pub fn norm_sq(&self) -> S {
        self.0
            .iter()
            .fold(S::zero(), |acc, c| acc + c.square())
    }

    pub fn norm(&self) -> Result<S, ScalarError> {
        self.norm_sq().sqrt()
    }

    pub fn dot(&self, other: &Velocity<S>) -> S {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }

    pub fn scale(&self, k: &S) -> Velocity<S> {
        Velocity(self.0.clone().map(|c| c * k.clone()))
    }

    pub fn neg(&self) -> Velocity<S> {
        Velocity(self.0.clone().map(|c| -c))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.near_zero())
    }

    pub fn near(&self, other: &Velocity<S>) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a.near(b))
    }

    /// The event `(t, t*v)` on the line through the origin with this velocity.
    pub fn at_time(&self, t: &S) -> Event<S> {
        Event([
            t.clone(),
            self.0[0].clone() * t.clone(),
            self.0[1].clone() * t.clone(),
            self.0[2].clone() * t.clone(),
        ])
    }

    pub fn map<T>(&self, f: impl Fn(&S) -> T) -> Velocity<T> {
        Velocity([f(&self.0[0]), f(&self.0[1]), f(&self.0[2])])
    }
}

impl<S: Scalar> Add for &Event<S> {
    type Output = Event<S>;
    fn add(self, rhs: &Event<S>) -> Event<S> {
        Event(std::array::from_fn(|i| self.0[i].clone() + rhs.0[i].clone()))
    }
}

impl<S: Scalar> Sub for &Event<S> {
    type Output = Event<S>;
    fn sub(self, rhs: &Event<S>) -> Event<S> {
        Event(std::array::from_fn(|i| self.0[i].clone() - rhs.0[i].clone()))
    }
}

impl<S: Scalar> Add for &Velocity<S> {
    type Output = Velocity<S>;
    fn add(self, rhs: &Velocity<S>) -> Velocity<S> {
        Velocity(std::array::from_fn(|i| self.0[i].clone() + rhs.0[i].clone()))
    }
}

impl<S: Scalar> Sub for &Velocity<S> {
    type Output = Velocity<S>;
    fn sub(self, rhs: &Velocity<S>) -> Velocity<S> {
        Velocity(std::array::from_fn(|i| self.0[i].clone() - rhs.0[i].clone()))
    }
}

impl<S> Index<usize> for Event<S> {
    type Output = S;
    fn index(&self, i: usize) -> &S {
        &self.0[i]
    }
}

impl<S> Index<usize> for Velocity<S> {
    type Output = S;
    fn index(&self, i: usize) -> &S {
        &self.0[i]
    }
}

impl<S: fmt::Display> fmt::Display for Event<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = &self.0;
        write!(f, "({a}, {b}, {c}, {d})")
    }
}

impl<S: fmt::Display> fmt::Debug for Event<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<S: fmt::Display> fmt::Display for Velocity<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = &self.0;
        write!(f, "({a}, {b}, {c})")
    }
}

impl<S: fmt::Display> fmt::Debug for Velocity<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Squared spatial distance; never fails.
pub fn space_sq<S: Scalar>(x: &Event<S>, y: &Event<S>) -> S {
    (x - y).spatial().norm_sq()
}

/// Spatial distance. In the exact backend the squared distance must be a
/// perfect square.
pub fn space<S: Scalar>(x: &Event<S>, y: &Event<S>) -> Result<S, ScalarError> {
    space_sq(x, y).sqrt()
}

/// Absolute time difference `|x0 - y0|`.
pub fn time<S: Scalar>(x: &Event<S>, y: &Event<S>) -> S {
    (x.t().clone() - y.t().clone()).abs()
}

/// `c^2 time^2 - space^2`, the quantity preserved by Poincaré maps.
pub fn interval<S: Scalar>(x: &Event<S>, y: &Event<S>, c: &S) -> S {
    c.square() * time(x, y).square() - space_sq(x, y)
}

/// `true` iff `u = a * w` for some scalar `a`.
pub fn is_multiple<S: Scalar>(u: &[S], w: &[S]) -> bool {
    match w.iter().position(|c| !c.near_zero()) {
        None => u.iter().all(|c| c.near_zero()),
        Some(i) => {
            let a = match u[i].div(&w[i]) {
                Ok(a) => a,
                Err(_) => return false,
            };
            u.iter()
                .zip(w.iter())
                .all(|(ui, wi)| ui.near(&(a.clone() * wi.clone())))
        }
    }
}

/// Collinearity in the sense of the straight-worldline axiom: some `a`
/// satisfies `z - x = a(y - x)` or `y - z = a(z - x)`.
pub fn collinear<S: Scalar>(x: &Event<S>, y: &Event<S>, z: &Event<S>) -> bool {
    is_multiple(&(z - x).0, &(y - x).0) || is_multiple(&(y - z).0, &(z - x).0)
}

/// Two distinct events, the finite witness of a worldline.
#[derive(Clone, PartialEq)]
pub struct WorldlineSegment<S: Scalar> {
    a: Event<S>,
    b: Event<S>,
}

impl<S: Scalar> WorldlineSegment<S> {
    pub fn new(a: Event<S>, b: Event<S>) -> Result<WorldlineSegment<S>, GeometryError> {
        if a.near(&b) {
            return Err(GeometryError::DegenerateSegment);
        }
        Ok(WorldlineSegment { a, b })
    }

    pub fn endpoints(&self) -> (&Event<S>, &Event<S>) {
        (&self.a, &self.b)
    }

    pub fn is_horizontal(&self) -> bool {
        self.a.t().near(self.b.t())
    }
}

impl<S: Scalar> fmt::Debug for WorldlineSegment<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -- {}", self.a, self.b)
    }
}

/// `(Δx1, Δx2, Δx3) / Δx0`.
pub fn segment_velocity<S: Scalar>(seg: &WorldlineSegment<S>) -> Result<Velocity<S>, GeometryError> {
    if seg.is_horizontal() {
        return Err(GeometryError::HorizontalSegment);
    }
    let d = &seg.b - &seg.a;
    let dt = d.t().clone();
    let s = d.spatial();
    Ok(Velocity(s.0.map(|c| c.div(&dt).expect("non-zero time step"))))
}

/// A cone `{(t,x): |x - v t| = c t}` translated to `apex`.
#[derive(Clone, PartialEq)]
pub struct LightCone<S: Scalar> {
    pub apex: Event<S>,
    pub velocity: Velocity<S>,
    c: S,
}

impl<S: Scalar> LightCone<S> {
    pub fn new(apex: Event<S>, velocity: Velocity<S>, c: S) -> Result<LightCone<S>, GeometryError> {
        if c <= S::zero() {
            return Err(GeometryError::NonPositiveLightSpeed);
        }
        Ok(LightCone { apex, velocity, c })
    }

    /// A cone at rest.
    pub fn right(apex: Event<S>, c: S) -> Result<LightCone<S>, GeometryError> {
        LightCone::new(apex, Velocity::zero(), c)
    }

    pub fn c(&self) -> &S {
        &self.c
    }
}

impl<S: Scalar> fmt::Debug for LightCone<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cone(apex {}, velocity {}, c {})", self.apex, self.velocity, self.c)
    }
}

pub fn on_cone<S: Scalar>(x: &Event<S>, cone: &LightCone<S>) -> bool {
    let d = x - &cone.apex;
    let t = d.t().clone();
    let moved = &d.spatial() - &cone.velocity.scale(&t);
    moved.norm_sq().near(&(cone.c.clone() * t).square())
}

impl<S: fmt::Display> fmt::Debug for Line<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + s{}", self.point, self.dir)
    }
}

/// A straight line of `Q^4` given by a point and a non-zero direction.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Serialize + for<'a> Deserialize<'a>")]
pub struct Line<S> {
    pub point: Event<S>,
    pub dir: Event<S>,
}

impl<S: Scalar> Line<S> {
    pub fn new(point: Event<S>, dir: Event<S>) -> Result<Line<S>, GeometryError> {
        if dir.is_zero() {
            return Err(GeometryError::ZeroDirection);
        }
        Ok(Line { point, dir })
    }

    pub fn through(a: &Event<S>, b: &Event<S>) -> Result<Line<S>, GeometryError> {
        Line::new(a.clone(), b - a)
    }

    /// Line through `point` moving with `velocity`.
    pub fn moving(point: Event<S>, velocity: &Velocity<S>) -> Line<S> {
        Line { point, dir: velocity.at_time(&S::one()) }
    }

    pub fn time_axis() -> Line<S> {
        Line { point: Event::origin(), dir: Event::basis(0) }
    }

    pub fn contains(&self, x: &Event<S>) -> bool {
        is_multiple(&(x - &self.point).0, &self.dir.0)
    }

    pub fn at(&self, s: &S) -> Event<S> {
        &self.point + &self.dir.scale(s)
    }

    pub fn is_horizontal(&self) -> bool {
        self.dir.t().near_zero()
    }

    /// Velocity of a body moving along this line, if it is not horizontal.
    pub fn velocity(&self) -> Option<Velocity<S>> {
        if self.is_horizontal() {
            return None;
        }
        let dt = self.dir.t().clone();
        Some(Velocity(self.dir.spatial().0.map(|c| c.div(&dt).expect("non-zero"))))
    }

    pub fn same_as(&self, other: &Line<S>) -> bool {
        self.contains(&other.point) && is_multiple(&other.dir.0, &self.dir.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rat;

    fn e(c: [i64; 4]) -> Event<Rat> {
        Event::from_ints(c)
    }

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn space_examples() {
        assert_eq!(space(&e([0, 0, 0, 0]), &e([0, 3, 4, 0])), Ok(Rat::int(5)));
        let x = e([7, -1, 2, 9]);
        assert_eq!(space(&x, &x), Ok(Rat::int(0)));
        assert_eq!(space_sq(&e([1, 1, 2, 2]), &e([0, 0, 0, 0])), Rat::int(9));
        assert!(space(&e([0, 0, 0, 0]), &e([0, 1, 1, 0])).is_err());
    }

    #[test]
    fn time_examples() {
        assert_eq!(time(&e([3, 0, 0, 0]), &e([1, 5, 5, 5])), Rat::int(2));
        assert_eq!(time(&e([4, 1, 1, 1]), &e([4, 1, 1, 1])), Rat::int(0));
        assert_eq!(time(&e([-1, 0, 0, 0]), &e([1, 0, 0, 0])), Rat::int(2));
    }

    #[test]
    fn cone_examples() {
        let one = Rat::int(1);
        let rest = LightCone::right(Event::origin(), one.clone()).unwrap();
        assert!(on_cone(&e([1, 1, 0, 0]), &rest));
        assert!(!on_cone(&e([1, 0, 0, 0]), &rest));
        let v = r("3/5");
        let moving = LightCone::new(Event::origin(), Velocity::new(v.clone(), Rat::int(0), Rat::int(0)), one.clone()).unwrap();
        assert!(!on_cone(&e([1, 0, 0, 0]), &moving));
        assert!(on_cone(&Event::new(one.clone(), v + one.clone(), Rat::int(0), Rat::int(0)), &moving));
        let luminal = LightCone::new(Event::origin(), Velocity::from_ints([1, 0, 0]), one).unwrap();
        assert!(on_cone(&e([1, 0, 0, 0]), &luminal));
        assert!(LightCone::right(Event::<Rat>::origin(), Rat::int(0)).is_err());
    }

    #[test]
    fn segment_velocity_examples() {
        let seg = WorldlineSegment::new(e([0, 0, 0, 0]), Event::new(Rat::int(1), r("3/5"), Rat::int(0), Rat::int(0))).unwrap();
        assert_eq!(segment_velocity(&seg).unwrap(), Velocity::new(r("3/5"), Rat::int(0), Rat::int(0)));
        let flat = WorldlineSegment::new(e([0, 0, 0, 0]), e([0, 1, 0, 0])).unwrap();
        assert_eq!(segment_velocity(&flat), Err(GeometryError::HorizontalSegment));
        let seg = WorldlineSegment::new(e([1, 1, 1, 1]), e([3, 5, 1, 1])).unwrap();
        assert_eq!(segment_velocity(&seg).unwrap(), Velocity::from_ints([2, 0, 0]));
        assert!(WorldlineSegment::new(e([1, 1, 1, 1]), e([1, 1, 1, 1])).is_err());
    }

    #[test]
    fn collinear_examples() {
        let x = e([2, 3, 5, 7]);
        assert!(collinear(&x, &x, &x));
        assert!(collinear(&e([0, 0, 0, 0]), &e([1, 1, 0, 0]), &e([2, 2, 0, 0])));
        assert!(!collinear(&e([0, 0, 0, 0]), &e([1, 0, 0, 0]), &e([1, 1, 0, 0])));
        assert!(collinear(&x, &x, &e([0, 0, 0, 0])));
    }

    #[test]
    fn lines() {
        let l = Line::moving(e([1, 0, 0, 0]), &Velocity::new(r("1/2"), Rat::int(0), Rat::int(0)));
        assert!(l.contains(&Event::new(Rat::int(3), Rat::int(1), Rat::int(0), Rat::int(0))));
        assert!(!l.contains(&e([3, 2, 0, 0])));
        assert_eq!(l.velocity().unwrap(), Velocity::new(r("1/2"), Rat::int(0), Rat::int(0)));
        let m = Line::through(&e([5, 2, 0, 0]), &e([7, 3, 0, 0])).unwrap();
        assert!(l.same_as(&m));
        assert!(Line::through(&e([1, 1, 1, 1]), &e([1, 1, 1, 1])).is_err());
    }
}
