//! Seeded generators of exact geometric data: rational rotations, rational
//! unit vectors, Pythagorean speeds and trivial transformations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Rat;
use crate::spacetime::{Event, Velocity};
use crate::transforms::AffineMap4;

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Spatial rotation of the quaternion `(a, b, c, d)`; rational for rational
/// input.
pub fn rotation_from_quaternion(q: &[Rat; 4]) -> Option<AffineMap4<Rat>> {
    let [a, b, c, d] = q;
    let n = &(&(a * a) + &(b * b)) + &(&(c * c) + &(d * d));
    if n.0 == Rat::int(0).0 {
        return None;
    }
    let two = Rat::int(2);
    let s = |x: Rat| Rat(&x.0 / &n.0);
    let r = [
        [
            s(&(&(a * a) + &(b * b)) - &(&(c * c) + &(d * d))),
            s(&two * &(&(b * c) - &(a * d))),
            s(&two * &(&(b * d) + &(a * c))),
        ],
        [
            s(&two * &(&(b * c) + &(a * d))),
            s(&(&(a * a) - &(b * b)) + &(&(c * c) - &(d * d))),
            s(&two * &(&(c * d) - &(a * b))),
        ],
        [
            s(&two * &(&(b * d) - &(a * c))),
            s(&two * &(&(c * d) + &(a * b))),
            s(&(&(a * a) - &(b * b)) - &(&(c * c) - &(d * d))),
        ],
    ];
    let z = || Rat::int(0);
    let mut m = [[Rat::int(1), z(), z(), z()], [z(), z(), z(), z()], [z(), z(), z(), z()], [z(), z(), z(), z()]];
    for i in 0..3 {
        for j in 0..3 {
            m[i + 1][j + 1] = r[i][j].clone();
        }
    }
    AffineMap4::linear(m).ok()
}

fn small(rng: &mut impl Rng, span: i64) -> Rat {
    Rat::int(rng.random_range(-span..=span))
}

pub fn rational_rotation(rng: &mut impl Rng) -> AffineMap4<Rat> {
    loop {
        let q = [small(rng, 4), small(rng, 4), small(rng, 4), small(rng, 4)];
        if let Some(m) = rotation_from_quaternion(&q) {
            return m;
        }
    }
}

/// Unit vector with rational coordinates, by inverse stereographic projection.
pub fn rational_unit_vector(rng: &mut impl Rng) -> Velocity<Rat> {
    let a = Rat::new(rng.random_range(-6..=6), rng.random_range(1..=4));
    let b = Rat::new(rng.random_range(-6..=6), rng.random_range(1..=4));
    let s = &(&a * &a) + &(&b * &b);
    let d = &Rat::int(1) + &s;
    let two = Rat::int(2);
    let v = Velocity([
        Rat(&(&two * &a).0 / &d.0),
        Rat(&(&two * &b).0 / &d.0),
        Rat(&(&Rat::int(1) - &s).0 / &d.0),
    ]);
    debug_assert_eq!(v.norm_sq(), Rat::int(1));
    v
}

/// A fraction `f` in `(0, 1)` with `sqrt(1 - f²)` rational: `2mn/(m²+n²)` or
/// `(m²-n²)/(m²+n²)`.
pub fn pythagorean_fraction(rng: &mut impl Rng) -> Rat {
    loop {
        let m: i64 = rng.random_range(2..=12);
        let n: i64 = rng.random_range(1..m);
        let h = m * m + n * n;
        let f = if rng.random_bool(0.5) { Rat::new(2 * m * n, h) } else { Rat::new(m * m - n * n, h) };
        if f.is_positive() && f < Rat::int(1) {
            return f;
        }
    }
}

/// A random trivial transformation: rational rotation plus translation.
pub fn random_trivial(rng: &mut impl Rng) -> AffineMap4<Rat> {
    let rot = rational_rotation(rng);
    let shift = Event([small(rng, 3), small(rng, 3), small(rng, 3), small(rng, 3)]);
    AffineMap4::translation(shift).compose(&rot)
}

/// Quantity values the sampler draws from when no constraint applies.
pub(crate) fn pool_value(rng: &mut impl Rng, c: &Rat) -> Rat {
    match rng.random_range(0..10) {
        0 => Rat::int(0),
        1 => Rat::int(if rng.random_bool(0.5) { 1 } else { -1 }),
        2 => {
            if rng.random_bool(0.5) {
                c.clone()
            } else {
                -c
            }
        }
        3..=5 => small(rng, 5),
        _ => Rat::new(rng.random_range(-24..=24), rng.random_range(1..=6)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::classify;

    #[test]
    fn quaternion_rotations_are_trivial() {
        let mut g = rng(3);
        for _ in 0..50 {
            let m = rational_rotation(&mut g);
            assert!(classify(&m, &Rat::int(1)).trivial);
            assert!(classify(&random_trivial(&mut g), &Rat::int(1)).trivial);
        }
        let q = [Rat::int(1), Rat::int(1), Rat::int(0), Rat::int(0)];
        let m = rotation_from_quaternion(&q).unwrap();
        assert_eq!(m.apply(&Event::from_ints([0, 0, 1, 0])), Event::from_ints([0, 0, 0, 1]));
    }

    #[test]
    fn unit_vectors_and_fractions() {
        let mut g = rng(5);
        for _ in 0..100 {
            assert_eq!(rational_unit_vector(&mut g).norm_sq(), Rat::int(1));
            let f = pythagorean_fraction(&mut g);
            assert!((&Rat::int(1) - &(&f * &f)).perfect_sqrt().is_some());
        }
    }
}
