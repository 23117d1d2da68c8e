//! How a body looks in a structure derived from a model by a translator.
//!
//! Translating a formula and reading it in a model is the same as reading the
//! untranslated formula in a derived structure with the same bodies. The
//! derived structure of every translator keeps photons and non-observers on
//! their worldlines and changes the frames of inertial observers:
//!
//! | translator | derived frame      | velocity `v`                        |
//! |------------|--------------------|-------------------------------------|
//! | `tr`, `tr+`| `Rad_v ∘ F`        | ether velocity seen in `F`          |
//! | `tr+inv`   | `Rad_v⁻¹ ∘ F`      | primitive-ether velocity seen in `F`|
//! | `tr*`      | `X_v ∘ F`          | ether velocity seen in `F`          |
//! | `tr*inv`   | `Y_v ∘ F`          | ether velocity seen in `F`          |
//!
//! `tr` and `tr+` drop observers that are not slower than light; `tr+`
//! marks the classical ethers as the primitive ether. Under `tr*` and
//! `tr*inv` an observer's own worldline moves with its frame. The
//! distinguished frame `e0` sees the ether at rest, so it is fixed by every
//! translator and its time axis is the ether worldline in every structure.

use serde::Serialize;

use super::num::Num;
use super::Body;
use crate::logic::TrKind;
use crate::scalar::{Rat, Scalar};
use crate::spacetime::{Event, Line, Velocity};
use crate::transforms::{ftl_of_stl, radarization_closed, stl_of_ftl, x_map, y_map, AffineMap4};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Kinematics {
    Classical,
    Relativistic,
}

/// Kinematics of the structure reached through `chain` (outermost first).
pub fn chain_kinematics(base: Kinematics, chain: &[TrKind]) -> Kinematics {
    match chain.last() {
        Some(TrKind::Tr | TrKind::TrPlus) => Kinematics::Relativistic,
        Some(_) => Kinematics::Classical,
        None => base,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct View {
    pub iob: bool,
    pub ph: bool,
    pub e: bool,
    pub frame: Option<AffineMap4<Rat>>,
    /// `None` when the body is seen nowhere
    pub line: Option<Line<Rat>>,
}

/// The derived data would leave the rationals (an irrational contraction
/// factor or speed).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Inexact;

pub fn base_view(b: &Body) -> View {
    View { iob: b.frame.is_some(), ph: b.ph, e: b.e, frame: b.frame.clone(), line: Some(b.line.clone()) }
}

/// Velocity of the ether (the `e0` time axis) in the coordinates of `frame`.
pub fn ether_velocity(frame: &AffineMap4<Rat>) -> Option<Velocity<Rat>> {
    let d = frame.apply_linear(&Event::basis(0));
    Line::new(Event::origin(), d).ok()?.velocity()
}

/// Light speed seen in `frame` when light is isotropic there, given light
/// speed `c` in `e0` coordinates: the pulled-back cone form must be
/// proportional to `diag(c'², -1, -1, -1)`.
pub fn cone_scale(frame: &AffineMap4<Rat>, c: &Rat) -> Option<Num> {
    cone_scale_of_inverse(&frame.inverse().ok()?, c)
}

/// [`cone_scale`] given the inverse of the frame.
pub(crate) fn cone_scale_of_inverse(inv: &AffineMap4<Rat>, c: &Rat) -> Option<Num> {
    let b = &inv.linear;
    let eta = [c * c, Rat::int(-1), Rat::int(-1), Rat::int(-1)];
    let form = |i: usize, j: usize| -> Rat {
        (0..4).fold(Rat::int(0), |acc, k| &acc + &(&(&b[k][i] * &eta[k]) * &b[k][j]))
    };
    let lambda = -form(1, 1);
    if !lambda.is_positive() {
        return None;
    }
    for i in 0..4 {
        for j in 0..4 {
            let v = form(i, j);
            let expected = match (i, j) {
                (0, 0) => continue,
                (i, j) if i == j => -&lambda,
                _ => Rat::int(0),
            };
            if v != expected {
                return None;
            }
        }
    }
    let c2 = Rat(&form(0, 0).0 / &lambda.0);
    if !c2.is_positive() {
        return None;
    }
    Num::sqrt(&c2)
}

fn inexact<T, E>(r: Result<T, E>) -> Result<T, Inexact> {
    r.map_err(|_| Inexact)
}

/// The view of a body in the structure derived by `t` from a structure in
/// which it has view `p`.
pub fn derive(t: TrKind, p: &View, c: &Rat) -> Result<View, Inexact> {
    let mut out = View { iob: p.iob, ph: p.ph, e: false, frame: None, line: p.line.clone() };
    let Some(frame) = p.frame.as_ref().filter(|_| p.iob) else {
        if matches!(t, TrKind::Tr | TrKind::TrPlus) {
            out.iob = false;
        }
        return Ok(out);
    };
    let v = ether_velocity(frame).ok_or(Inexact)?;
    let stl = v.norm_sq() < c * c;
    match t {
        TrKind::Tr | TrKind::TrPlus => {
            if !stl {
                out.iob = false;
                return Ok(out);
            }
            out.e = t == TrKind::TrPlus && cone_scale(frame, c).is_some();
            out.frame = Some(inexact(radarization_closed(&v, c))?.compose(frame));
        }
        TrKind::TrPlusInv => {
            let rad = inexact(radarization_closed(&v, c))?;
            out.frame = Some(inexact(rad.inverse())?.compose(frame));
        }
        TrKind::TrStar => {
            out.frame = Some(inexact(x_map(&v, c))?.compose(frame));
        }
        TrKind::TrStarInv => {
            if !stl {
                out.line = None;
                return Ok(out);
            }
            out.frame = Some(inexact(y_map(&v, c))?.compose(frame));
        }
    }
    if matches!(t, TrKind::TrStar | TrKind::TrStarInv) {
        out.line = Some(super::observer_line(out.frame.as_ref().expect("set above")));
    }
    Ok(out)
}

/// Why a frame of a derived structure has no preimage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoPreimage {
    Inexact,
    /// the ether is not seen slower than light in the target frame
    NotStl,
}

/// A frame `F` of the parent structure whose derived frame under `t` is `g`.
pub fn preimage(t: TrKind, g: &AffineMap4<Rat>, c: &Rat) -> Result<AffineMap4<Rat>, NoPreimage> {
    let v = ether_velocity(g).ok_or(NoPreimage::NotStl)?;
    if t != TrKind::TrStarInv && v.norm_sq() >= c * c {
        return Err(NoPreimage::NotStl);
    }
    let ex = |_| NoPreimage::Inexact;
    let map = match t {
        TrKind::Tr | TrKind::TrPlus => radarization_closed(&v, c).and_then(|r| r.inverse()).map_err(ex)?,
        TrKind::TrPlusInv => radarization_closed(&v, c).map_err(ex)?,
        TrKind::TrStar => {
            let big = ftl_of_stl(&v, c).map_err(ex)?;
            x_map(&big, c).and_then(|m| m.inverse()).map_err(ex)?
        }
        TrKind::TrStarInv => {
            let small = stl_of_ftl(&v, c).map_err(ex)?;
            y_map(&small, c).and_then(|m| m.inverse()).map_err(ex)?
        }
    };
    Ok(map.compose(g))
}

/// Velocity of the worldline `line` seen in `frame`, if it is not horizontal there.
pub fn seen_velocity(frame: &AffineMap4<Rat>, line: &Line<Rat>) -> Option<Velocity<Rat>> {
    let d = frame.apply_linear(&line.dir);
    if d.t().is_zero() {
        return None;
    }
    Line::new(Event::origin(), d).ok()?.velocity()
}
