//! Affine maps of `Q^4` and the concrete coordinate changes built from them:
//! Galilean boosts, the axis rotation `R`, the synchronisation map `E`, the
//! scaling `S`, Lorentz boosts, the core map `C`, radarization `Rad` and the
//! speed-remapping maps `X` and `Y`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Scalar, ScalarError};
use crate::spacetime::{Event, Velocity};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum TransformError {
    #[error("speed {0} is not slower than light")]
    SpeedNotSTL(String),
    #[error("light speed must be positive")]
    NonPositiveLightSpeed,
    #[error("linear part is singular")]
    Singular,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

pub type Matrix4<S> = [[S; 4]; 4];

/// `x ↦ linear · x + translation`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Serialize + for<'a> Deserialize<'a>")]
pub struct AffineMap4<S> {
    pub linear: Matrix4<S>,
    pub translation: Event<S>,
}

fn mat_from_fn<S>(f: impl Fn(usize, usize) -> S) -> Matrix4<S> {
    std::array::from_fn(|i| std::array::from_fn(|j| f(i, j)))
}

fn mat_mul<S: Scalar>(a: &Matrix4<S>, b: &Matrix4<S>) -> Matrix4<S> {
    mat_from_fn(|i, j| S::dot4([&a[i][0], &a[i][1], &a[i][2], &a[i][3]], [&b[0][j], &b[1][j], &b[2][j], &b[3][j]]))
}

fn mat_vec<S: Scalar>(a: &Matrix4<S>, x: &Event<S>) -> Event<S> {
    Event(std::array::from_fn(|i| S::dot4([&a[i][0], &a[i][1], &a[i][2], &a[i][3]], [&x.0[0], &x.0[1], &x.0[2], &x.0[3]])))
}

/// Gauss–Jordan elimination with largest-pivot selection.
pub(crate) fn gauss_inverse<S: Scalar>(a: &Matrix4<S>) -> Option<Matrix4<S>> {
    let mut m = a.clone();
    let mut inv = mat_from_fn(|i, j| if i == j { S::one() } else { S::zero() });
    for col in 0..4 {
        let pivot = (col..4)
            .filter(|&r| !m[r][col].near_zero())
            .max_by(|&r, &s| m[r][col].abs().cmp_total(&m[s][col].abs()))?;
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let p = m[col][col].inv().ok()?;
        for j in 0..4 {
            m[col][j] = m[col][j].clone() * p.clone();
            inv[col][j] = inv[col][j].clone() * p.clone();
        }
        for r in 0..4 {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for j in 0..4 {
                m[r][j] = m[r][j].clone() - f.clone() * m[col][j].clone();
                inv[r][j] = inv[r][j].clone() - f.clone() * inv[col][j].clone();
            }
        }
    }
    Some(inv)
}

fn det<S: Scalar>(a: &Matrix4<S>) -> S {
    let mut m = a.clone();
    let mut d = S::one();
    for col in 0..4 {
        let Some(pivot) = (col..4).find(|&r| !m[r][col].near_zero()) else {
            return S::zero();
        };
        if pivot != col {
            m.swap(col, pivot);
            d = -d;
        }
        d = d * m[col][col].clone();
        let p = m[col][col].inv().expect("non-zero pivot");
        for r in col + 1..4 {
            let f = m[r][col].clone() * p.clone();
            for j in col..4 {
                m[r][j] = m[r][j].clone() - f.clone() * m[col][j].clone();
            }
        }
    }
    d
}

impl<S: Scalar> AffineMap4<S> {
    pub fn new(linear: Matrix4<S>, translation: Event<S>) -> Result<AffineMap4<S>, TransformError> {
        if det(&linear).near_zero() {
            return Err(TransformError::Singular);
        }
        Ok(AffineMap4 { linear, translation })
    }

    pub fn linear(linear: Matrix4<S>) -> Result<AffineMap4<S>, TransformError> {
        AffineMap4::new(linear, Event::origin())
    }

    pub fn identity() -> AffineMap4<S> {
        AffineMap4 {
            linear: mat_from_fn(|i, j| if i == j { S::one() } else { S::zero() }),
            translation: Event::origin(),
        }
    }

    pub fn translation(z: Event<S>) -> AffineMap4<S> {
        AffineMap4 { translation: z, ..AffineMap4::identity() }
    }

    /// Multiplication by a non-zero scalar.
    pub fn scaling(k: S) -> Result<AffineMap4<S>, TransformError> {
        AffineMap4::linear(mat_from_fn(|i, j| if i == j { k.clone() } else { S::zero() }))
    }

    pub fn diag(d: [S; 4]) -> Result<AffineMap4<S>, TransformError> {
        AffineMap4::linear(mat_from_fn(|i, j| if i == j { d[i].clone() } else { S::zero() }))
    }

    pub fn from_ints(rows: [[i64; 4]; 4], translation: [i64; 4]) -> Result<AffineMap4<S>, TransformError> {
        AffineMap4::new(rows.map(|r| r.map(S::from_int)), Event::from_ints(translation))
    }

    pub fn apply(&self, x: &Event<S>) -> Event<S> {
        &mat_vec(&self.linear, x) + &self.translation
    }

    /// Image of a difference vector (the linear part only).
    pub fn apply_linear(&self, d: &Event<S>) -> Event<S> {
        mat_vec(&self.linear, d)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &AffineMap4<S>) -> AffineMap4<S> {
        AffineMap4 {
            linear: mat_mul(&self.linear, &other.linear),
            translation: self.apply(&other.translation),
        }
    }

    pub fn inverse(&self) -> Result<AffineMap4<S>, TransformError> {
        let inv = S::invert4(&self.linear).ok_or(TransformError::Singular)?;
        let t = mat_vec(&inv, &self.translation);
        Ok(AffineMap4 { linear: inv, translation: t.scale(&-S::one()) })
    }

    pub fn determinant(&self) -> S {
        det(&self.linear)
    }

    pub fn linear_part(&self) -> AffineMap4<S> {
        AffineMap4 { linear: self.linear.clone(), translation: Event::origin() }
    }

    pub fn is_linear(&self) -> bool {
        self.translation.is_zero()
    }

    pub fn near(&self, other: &AffineMap4<S>) -> bool {
        self.translation.near(&other.translation)
            && (0..4).all(|i| (0..4).all(|j| self.linear[i][j].near(&other.linear[i][j])))
    }

    pub fn is_identity(&self) -> bool {
        self.near(&AffineMap4::identity())
    }

    pub fn map_scalars<T>(&self, f: impl Fn(&S) -> T) -> AffineMap4<T> {
        AffineMap4 {
            linear: mat_from_fn(|i, j| f(&self.linear[i][j])),
            translation: self.translation.map(&f),
        }
    }
}

impl<S: fmt::Display> fmt::Debug for AffineMap4<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.linear.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{} {} {} {}", row[0], row[1], row[2], row[3])?;
        }
        write!(f, "] + {}", self.translation)
    }
}

fn check_c<S: Scalar>(c: &S) -> Result<(), TransformError> {
    if *c <= S::zero() {
        return Err(TransformError::NonPositiveLightSpeed);
    }
    Ok(())
}

fn check_speed<S: Scalar>(v: &S, c: &S) -> Result<(), TransformError> {
    check_c(c)?;
    if *v < S::zero() || *v >= *c {
        return Err(TransformError::SpeedNotSTL(v.to_string()));
    }
    Ok(())
}

/// `1 - v²/c²`.
fn q_factor<S: Scalar>(v: &S, c: &S) -> Result<S, TransformError> {
    Ok(S::one() - v.square().div(&c.square())?)
}

/// `(t, x̄) ↦ (t, x̄ + t·v̄)`.
pub fn galilean_boost<S: Scalar>(v: &Velocity<S>) -> AffineMap4<S> {
    let mut m = AffineMap4::identity();
    for i in 0..3 {
        m.linear[i + 1][0] = v.0[i].clone();
    }
    m
}

/// Spatial rotation (or point reflection) taking `(1, v̄)` to `(1, -|v̄|, 0, 0)`.
pub fn rotation_to_axis<S: Scalar>(v: &Velocity<S>) -> Result<AffineMap4<S>, TransformError> {
    let [vx, vy, vz] = &v.0;
    if vy.near_zero() && vz.near_zero() {
        if *vx <= S::zero() {
            return Ok(AffineMap4::identity());
        }
        let m = -S::one();
        return AffineMap4::diag([S::one(), m.clone(), m.clone(), m]);
    }
    let n = v.norm()?;
    let s = vy.square() + vz.square();
    let k = (n.clone() - vx.clone()).div(&s)?;
    let z = S::zero();
    let rows = [
        [n.clone(), z.clone(), z.clone(), z.clone()],
        [z.clone(), -vx.clone(), -vy.clone(), -vz.clone()],
        [
            z.clone(),
            vy.clone(),
            -vx.clone() - vz.square() * k.clone(),
            vy.clone() * vz.clone() * k.clone(),
        ],
        [
            z,
            vz.clone(),
            vy.clone() * vz.clone() * k.clone(),
            -vx.clone() - vy.square() * k,
        ],
    ];
    let inv_n = n.inv()?;
    AffineMap4::linear(rows.map(|r| r.map(|x| x * inv_n.clone())))
}

/// Synchronisation map `E_v` for an observer moving with speed `v` along
/// the x axis.
pub fn einstein_sync<S: Scalar>(v: &S, c: &S) -> Result<AffineMap4<S>, TransformError> {
    check_speed(v, c)?;
    let q = q_factor(v, c)?;
    let g = q.sqrt()?;
    let iq = q.inv()?;
    let ig = g.inv()?;
    let z = S::zero();
    let b = -v.div(&c.square())? * iq.clone();
    AffineMap4::linear([
        [iq.clone(), b, z.clone(), z.clone()],
        [-v.clone() * iq.clone(), iq, z.clone(), z.clone()],
        [z.clone(), z.clone(), ig.clone(), z.clone()],
        [z.clone(), z.clone(), z, ig],
    ])
}

/// `S_v`: multiplication by `sqrt(1 - v²/c²)`.
pub fn scale_map<S: Scalar>(v: &S, c: &S) -> Result<AffineMap4<S>, TransformError> {
    check_speed(v, c)?;
    AffineMap4::scaling(q_factor(v, c)?.sqrt()?)
}

/// `L_v = S_v ∘ E_v`.
pub fn lorentz_boost<S: Scalar>(v: &S, c: &S) -> Result<AffineMap4<S>, TransformError> {
    Ok(scale_map(v, c)?.compose(&einstein_sync(v, c)?))
}

/// `C_v = S_v ∘ E_v ∘ G_v` with the boost along the x axis.
pub fn core_map<S: Scalar>(v: &S, c: &S) -> Result<AffineMap4<S>, TransformError> {
    let g = galilean_boost(&Velocity::new(v.clone(), S::zero(), S::zero()));
    Ok(lorentz_boost(v, c)?.compose(&g))
}

/// `Rad_v̄ = R⁻¹ ∘ C_|v̄| ∘ R`.
pub fn radarization<S: Scalar>(v: &Velocity<S>, c: &S) -> Result<AffineMap4<S>, TransformError> {
    check_c(c)?;
    let speed = v.norm()?;
    if speed >= *c {
        return Err(TransformError::SpeedNotSTL(speed.to_string()));
    }
    let r = rotation_to_axis(v)?;
    let core = core_map(&speed, c)?;
    Ok(r.inverse()?.compose(&core).compose(&r))
}

/// `sqrt(1 - |v̄|²/c²)` for a slower-than-light `v̄`. Only this square root
/// has to exist, not `|v̄|` itself.
pub fn contraction<S: Scalar>(v: &Velocity<S>, c: &S) -> Result<S, TransformError> {
    check_c(c)?;
    let q = S::one() - v.norm_sq().div(&c.square())?;
    if q <= S::zero() {
        return Err(TransformError::SpeedNotSTL(format!("{v}")));
    }
    Ok(q.sqrt()?)
}

/// Radarization written out with `g = sqrt(1 - v²/c²)`:
/// `(t, x̄) ↦ (g·t + (v̄·x̄)/(c²g), x̄ + (v̄·x̄)·v̄/(c²g(1+g)))`.
/// Agrees with [`radarization`] and needs no rational `|v̄|`.
pub fn radarization_closed<S: Scalar>(v: &Velocity<S>, c: &S) -> Result<AffineMap4<S>, TransformError> {
    let g = contraction(v, c)?;
    let c2g = c.square() * g.clone();
    let a = c2g.inv()?;
    let b = (c2g * (S::one() + g.clone())).inv()?;
    let mut m = [[S::zero(), S::zero(), S::zero(), S::zero()], [S::zero(), S::zero(), S::zero(), S::zero()], [S::zero(), S::zero(), S::zero(), S::zero()], [S::zero(), S::zero(), S::zero(), S::zero()]];
    m[0][0] = g;
    for j in 0..3 {
        m[0][j + 1] = v.0[j].clone() * a.clone();
        for i in 0..3 {
            let delta = if i == j { S::one() } else { S::zero() };
            m[i + 1][j + 1] = delta + v.0[i].clone() * v.0[j].clone() * b.clone();
        }
    }
    AffineMap4::linear(m)
}

/// Lorentz boost into the rest frame of a body moving with `u` through the
/// origin: `(t, x̄) ↦ ((t - u·x̄/c²)/g, x̄ + (u·x̄)·u/(c²g(1+g)) - t·u/g)`.
pub fn boost_to_rest<S: Scalar>(u: &Velocity<S>, c: &S) -> Result<AffineMap4<S>, TransformError> {
    let g = contraction(u, c)?;
    let ig = g.inv()?;
    let c2 = c.square();
    let a = (c2.clone() * g.clone()).inv()?;
    let b = (c2 * g.clone() * (S::one() + g)).inv()?;
    let mut m = [[S::zero(), S::zero(), S::zero(), S::zero()], [S::zero(), S::zero(), S::zero(), S::zero()], [S::zero(), S::zero(), S::zero(), S::zero()], [S::zero(), S::zero(), S::zero(), S::zero()]];
    m[0][0] = ig.clone();
    for j in 0..3 {
        m[0][j + 1] = -u.0[j].clone() * a.clone();
        m[j + 1][0] = -u.0[j].clone() * ig.clone();
        for i in 0..3 {
            let delta = if i == j { S::one() } else { S::zero() };
            m[i + 1][j + 1] = delta + u.0[i].clone() * u.0[j].clone() * b.clone();
        }
    }
    AffineMap4::linear(m)
}

/// Galilean change to the rest frame of a body moving with `u` through the
/// origin: `(t, x̄) ↦ (t, x̄ - t·u)`.
pub fn galilean_to_rest<S: Scalar>(u: &Velocity<S>) -> AffineMap4<S> {
    galilean_boost(&u.neg())
}

/// `v̄ = c·V̄ / (1 + |V̄|)`.
pub fn stl_of_ftl<S: Scalar>(big_v: &Velocity<S>, c: &S) -> Result<Velocity<S>, TransformError> {
    check_c(c)?;
    let n = big_v.norm()?;
    let k = c.div(&(S::one() + n))?;
    Ok(big_v.scale(&k))
}

/// `V̄ = v̄ / (c - |v̄|)`.
pub fn ftl_of_stl<S: Scalar>(v: &Velocity<S>, c: &S) -> Result<Velocity<S>, TransformError> {
    check_c(c)?;
    let n = v.norm()?;
    if n >= *c {
        return Err(TransformError::SpeedNotSTL(n.to_string()));
    }
    let k = (c.clone() - n).inv()?;
    Ok(v.scale(&k))
}

/// `X_V̄ = G⁻¹_v̄ ∘ G_V̄` where `G_w` brings bodies moving with `w` to rest
/// and `v̄ = stl_of_ftl(V̄)`.
pub fn x_map<S: Scalar>(big_v: &Velocity<S>, c: &S) -> Result<AffineMap4<S>, TransformError> {
    let v = stl_of_ftl(big_v, c)?;
    Ok(galilean_boost(&(&v - big_v)))
}

/// `Y_v̄ = G⁻¹_V̄ ∘ G_v̄` where `V̄ = ftl_of_stl(v̄)`.
pub fn y_map<S: Scalar>(v: &Velocity<S>, c: &S) -> Result<AffineMap4<S>, TransformError> {
    let big_v = ftl_of_stl(v, c)?;
    Ok(galilean_boost(&(&big_v - v)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub galilean: bool,
    pub poincare: bool,
    pub trivial: bool,
}

/// Decides the three transformation classes by checking the defining
/// identities on the ten pairs drawn from `{0, e0, e1, e2, e3}`.
///
/// Why ten pairs suffice: for an affine `f(x) = Mx + b` every identity
/// involving `f(x) - f(y)` only sees `M(x - y)`, so translates of the pairs
/// add nothing and the checks reduce to the difference vectors
/// `e_i` and `e_i - e_j`.
///
/// * Poincaré: `Q(Md) = Q(d)` with `Q(d) = c²d0² - |d̄|²`. Both sides are
///   quadratic forms in `d`; a quadratic form is fixed by its values on
///   `e_i` and `e_i - e_j` through polarisation,
///   `B(e_i, e_j) = (Q(e_i) + Q(e_j) - Q(e_i - e_j)) / 2`.
/// * Galilean: `|(Md)_0| = |d0|` for all `d`. The left side is the absolute
///   value of a linear form `l`; `|l(e_i)| = 0` for `i > 0` and
///   `|l(e0)| = 1` force `l = ±d0`. On the hyperplane `d0 = 0` the spatial
///   quadratic form `|(Md)_{1..3}|²` must equal `|d̄|²`, and it is fixed by its
///   values on `e_i`, `e_i - e_j` with `i, j > 0`.
/// * Trivial: Galilean, and in addition `M e0 = e0` (no boost, no time
///   reversal), which makes `M = diag(1, R)` with `R` orthogonal.
///
/// Invertibility follows from each class (`det M = ±1`), and is checked
/// separately so singular maps get all three flags false.
pub fn classify<S: Scalar>(map: &AffineMap4<S>, c: &S) -> Classification {
    if map.determinant().near_zero() {
        return Classification { galilean: false, poincare: false, trivial: false };
    }
    let mut diffs: Vec<Event<S>> = (0..4).map(Event::basis).collect();
    for i in 0..4 {
        for j in i + 1..4 {
            diffs.push(&Event::basis(i) - &Event::basis(j));
        }
    }
    let o = Event::origin();
    let c2 = c.square();
    let quad = |d: &Event<S>| c2.clone() * d.t().square() - crate::spacetime::space_sq(d, &o);

    let poincare = diffs.iter().all(|d| quad(&map.apply_linear(d)).near(&quad(d)));

    let time_ok = (0..4).all(|i| {
        let d = Event::basis(i);
        map.apply_linear(&d).t().abs().near(&d.t().abs())
    });
    let space_ok = diffs
        .iter()
        .filter(|d| d.t().near_zero())
        .all(|d| {
            let img = map.apply_linear(d);
            crate::spacetime::space_sq(&img, &o).near(&crate::spacetime::space_sq(d, &o))
        });
    let galilean = time_ok && space_ok;
    let trivial = galilean && map.apply_linear(&Event::basis(0)).near(&Event::basis(0));
    Classification { galilean, poincare, trivial }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rat;
    use proptest::prelude::*;

    fn arb_matrix() -> impl Strategy<Value = Matrix4<Rat>> {
        proptest::array::uniform4(proptest::array::uniform4((-9i64..10, 1i64..7)))
            .prop_map(|m| m.map(|row| row.map(|(n, d)| Rat::new(n, d))))
    }

    proptest! {
        #[test]
        fn adjugate_inverse_matches_elimination(m in arb_matrix()) {
            prop_assert_eq!(Rat::invert4(&m), gauss_inverse(&m));
        }

        #[test]
        fn lazy_dot_matches_fold(m in arb_matrix()) {
            let folded = (0..4).fold(Rat::zero(), |acc, k| acc + m[0][k].clone() * m[1][k].clone());
            prop_assert_eq!(Rat::dot4([&m[0][0], &m[0][1], &m[0][2], &m[0][3]], [&m[1][0], &m[1][1], &m[1][2], &m[1][3]]), folded);
        }
    }

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn ev(c: [&str; 4]) -> Event<Rat> {
        Event(c.map(r))
    }

    fn vel(c: [&str; 3]) -> Velocity<Rat> {
        Velocity(c.map(r))
    }

    #[test]
    fn closed_form_radarization() {
        let one = Rat::int(1);
        for v in [["3/5", "0", "0"], ["0", "-4/5", "0"], ["6/35", "9/35", "18/35"], ["0", "0", "0"]] {
            let v = vel(v);
            assert_eq!(radarization_closed(&v, &one).unwrap(), radarization(&v, &one).unwrap());
        }
        let v = vel(["1/2", "1/2", "1/2"]);
        assert!(radarization(&v, &one).is_err());
        let rad = radarization_closed(&v, &one).unwrap();
        assert_eq!(contraction(&v, &one).unwrap(), r("1/2"));
        assert!(!classify(&rad, &one).galilean);
        assert_eq!(rad.apply(&ev(["1", "0", "0", "0"])), ev(["1/2", "0", "0", "0"]));
    }

    #[test]
    fn boost_to_rest_examples() {
        let one = Rat::int(1);
        let u = vel(["3/5", "0", "0"]);
        assert_eq!(boost_to_rest(&u, &one).unwrap(), lorentz_boost(&r("3/5"), &one).unwrap());
        let u = vel(["1/2", "1/2", "1/2"]);
        let b = boost_to_rest(&u, &one).unwrap();
        assert!(classify(&b, &one).poincare);
        assert_eq!(b.apply(&ev(["2", "1", "1", "1"])), ev(["1", "0", "0", "0"]));
        assert!(boost_to_rest(&vel(["1", "0", "0"]), &one).is_err());
        let g = galilean_to_rest(&vel(["2", "0", "0"]));
        assert_eq!(g.apply(&ev(["1", "2", "0", "0"])), ev(["1", "0", "0", "0"]));
    }

    #[test]
    fn boost_examples() {
        assert!(galilean_boost(&Velocity::<Rat>::zero()).is_identity());
        let g = galilean_boost(&vel(["1/2", "0", "0"]));
        assert_eq!(g.apply(&ev(["2", "-1", "0", "0"])), ev(["2", "0", "0", "0"]));
        let g = galilean_boost(&vel(["1", "2", "3"]));
        assert_eq!(g.apply(&ev(["1", "0", "0", "0"])), ev(["1", "1", "2", "3"]));
    }

    #[test]
    fn rotation_examples() {
        assert!(rotation_to_axis(&vel(["-3", "0", "0"])).unwrap().is_identity());
        let m = rotation_to_axis(&vel(["3", "0", "0"])).unwrap();
        assert_eq!(m, AffineMap4::from_ints([[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, -1, 0], [0, 0, 0, -1]], [0; 4]).unwrap());
        let m = rotation_to_axis(&vel(["0", "4", "3"])).unwrap();
        assert_eq!(m.apply(&ev(["1", "0", "4", "3"])), ev(["1", "-5", "0", "0"]));
        assert!(rotation_to_axis(&vel(["1", "1", "0"])).is_err());
    }

    #[test]
    fn sync_examples() {
        let one = Rat::int(1);
        assert!(einstein_sync(&Rat::int(0), &one).unwrap().is_identity());
        let e = einstein_sync(&r("3/5"), &one).unwrap();
        assert_eq!(e.apply(&ev(["1", "3/5", "0", "0"])), ev(["1", "0", "0", "0"]));
        assert_eq!(e.apply(&ev(["0", "0", "1", "1"])), ev(["0", "0", "5/4", "5/4"]));
        assert!(matches!(einstein_sync(&one, &one), Err(TransformError::SpeedNotSTL(_))));
        assert!(matches!(einstein_sync(&r("1/2"), &one), Err(TransformError::Scalar(ScalarError::NotPerfectSquare(_)))));
    }

    #[test]
    fn lorentz_examples() {
        let one = Rat::int(1);
        assert!(lorentz_boost(&Rat::int(0), &one).unwrap().is_identity());
        let l = lorentz_boost(&r("3/5"), &one).unwrap();
        let expected = AffineMap4::linear([
            [r("5/4"), r("-3/4"), r("0"), r("0")],
            [r("-3/4"), r("5/4"), r("0"), r("0")],
            [r("0"), r("0"), r("1"), r("0")],
            [r("0"), r("0"), r("0"), r("1")],
        ])
        .unwrap();
        assert_eq!(l, expected);
        assert!(classify(&l, &one).poincare);
    }

    #[test]
    fn core_examples() {
        let one = Rat::int(1);
        assert!(core_map(&Rat::int(0), &one).unwrap().is_identity());
        let cm = core_map(&r("3/5"), &one).unwrap();
        assert_eq!(cm.apply(&ev(["1", "-3/5", "0", "0"])), ev(["5/4", "-3/4", "0", "0"]));
        assert_eq!(cm.apply(&ev(["1", "0", "0", "0"])), ev(["4/5", "0", "0", "0"]));
        let cm = core_map(&r("12/5"), &Rat::int(3)).unwrap();
        assert_eq!(cm.apply(&ev(["1", "0", "0", "0"])), ev(["3/5", "0", "0", "0"]));
    }

    #[test]
    fn radarization_examples() {
        let one = Rat::int(1);
        assert!(radarization(&Velocity::<Rat>::zero(), &one).unwrap().is_identity());
        let rad = radarization(&vel(["3/5", "0", "0"]), &one).unwrap();
        assert_eq!(rad.apply(&ev(["0", "0", "1", "0"])), ev(["0", "0", "1", "0"]));
        // time axis goes to time axis, shrunk by 4/5
        assert_eq!(rad.apply(&ev(["1", "0", "0", "0"])), ev(["4/5", "0", "0", "0"]));
        assert_eq!(rad.apply(&ev(["1", "3/5", "0", "0"])), ev(["5/4", "3/4", "0", "0"]));
        assert!(matches!(radarization(&vel(["1", "0", "0"]), &one), Err(TransformError::SpeedNotSTL(_))));
    }

    #[test]
    fn remap_examples() {
        let one = Rat::int(1);
        assert_eq!(stl_of_ftl(&Velocity::<Rat>::zero(), &one).unwrap(), Velocity::zero());
        assert_eq!(ftl_of_stl(&Velocity::<Rat>::zero(), &one).unwrap(), Velocity::zero());
        let big = ftl_of_stl(&vel(["1/2", "0", "0"]), &one).unwrap();
        assert_eq!(big.norm().unwrap(), Rat::int(1));
        let v = vel(["0", "12/25", "9/25"]);
        assert_eq!(stl_of_ftl(&ftl_of_stl(&v, &one).unwrap(), &one).unwrap(), v);
        assert!(ftl_of_stl(&vel(["1", "0", "0"]), &one).is_err());
    }

    #[test]
    fn x_and_y_maps() {
        let one = Rat::int(1);
        assert!(x_map(&Velocity::<Rat>::zero(), &one).unwrap().is_identity());
        let big = vel(["3", "4", "0"]);
        let v = stl_of_ftl(&big, &one).unwrap();
        assert_eq!(v, vel(["1/2", "2/3", "0"]));
        let x = x_map(&big, &one).unwrap();
        assert_eq!(x.inverse().unwrap(), y_map(&v, &one).unwrap());
        assert_eq!(x.apply(&big.at_time(&one)), v.at_time(&one));
    }

    #[test]
    fn classify_examples() {
        let one = Rat::int(1);
        let all = Classification { galilean: true, poincare: true, trivial: true };
        assert_eq!(classify(&AffineMap4::<Rat>::identity(), &one), all);
        let g = galilean_boost(&vel(["1/2", "0", "0"]));
        assert_eq!(classify(&g, &one), Classification { galilean: true, poincare: false, trivial: false });
        let l = lorentz_boost(&r("3/5"), &one).unwrap();
        assert_eq!(classify(&l, &one), Classification { galilean: false, poincare: true, trivial: false });
        let flip = AffineMap4::<Rat>::from_ints([[-1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], [5, 0, 0, 0]).unwrap();
        assert_eq!(classify(&flip, &one), Classification { galilean: true, poincare: true, trivial: false });
    }

    #[test]
    fn inverse_and_compose() {
        let m = AffineMap4::<Rat>::from_ints([[0, 1, 0, 0], [2, 0, 0, 1], [0, 0, 3, 0], [1, 0, 0, 1]], [1, 2, 3, 4]).unwrap();
        assert!(m.inverse().unwrap().compose(&m).is_identity());
        assert!(m.compose(&m.inverse().unwrap()).is_identity());
        assert!(AffineMap4::<Rat>::from_ints([[1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], [0; 4]).is_err());
    }

    #[test]
    fn float_backend_matches() {
        let l = lorentz_boost(&0.6f64, &1.0).unwrap();
        let exact = lorentz_boost(&r("3/5"), &Rat::int(1)).unwrap();
        assert!(l.near(&exact.map_scalars(|x| x.to_f64())));
        let vh = Velocity::new(0.0, 0.3, 0.4);
        let w = galilean_boost(&Velocity::new(0.6, -0.3, -0.4));
        let vk = w.apply(&vh.at_time(&1.0)).spatial();
        let rad_h = radarization(&vh, &1.0).unwrap();
        let rad_k = radarization(&vk, &1.0).unwrap();
        assert!(!classify(&rad_h, &1.0).poincare);
        let conj = rad_k.compose(&w).compose(&rad_h.inverse().unwrap());
        assert!(classify(&conj, &1.0).poincare);
    }
}
