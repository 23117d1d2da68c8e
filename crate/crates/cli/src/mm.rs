//! The Michelson–Morley setup seen from both sides of the radarization.
//!
//! Observer `k` sends two light signals at time `-L` along perpendicular
//! arms of length `L` to mirrors and receives both reflections. In `k`'s
//! relativistic coordinates the picture is symmetric. The classical
//! coordinates are recovered with the inverse core map `C_v⁻¹`; there the
//! ether drifts past `k` with velocity `(-v, 0, 0)` and the two mirror hits
//! are no longer simultaneous.

use std::fmt::Write as _;

use kinlog_core::scalar::{Rat, Scalar};
use kinlog_core::spacetime::{Event, Velocity};
use kinlog_core::transforms::{core_map, galilean_boost, AffineMap4};
use serde::Serialize;

pub const EVENT_NAMES: [&str; 4] = ["emission", "mirror-x", "mirror-y", "reception"];

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct MmDemo {
    pub v: Rat,
    pub l: Rat,
    pub c: Rat,
    /// relativistic coordinates of `k`
    pub right: Vec<Event<Rat>>,
    /// classical coordinates of `k`, `C_v⁻¹` of the right-hand events
    pub left: Vec<Event<Rat>>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MmError {
    #[error("speed {0} is not slower than light")]
    SpeedNotStl(String),
    #[error("arm length must be positive, got {0}")]
    BadLength(String),
    #[error("light speed must be positive, got {0}")]
    BadLightSpeed(String),
    #[error("sqrt(1 - v²/c²) is irrational at v = {0}; pick a Pythagorean speed such as 3/5")]
    Inexact(String),
}

/// Time at which a light signal sent from `from` at `t0` (ether
/// coordinates) reaches a point moving with `u` that sits at `target` at
/// time `t0`. `None` when the answer is irrational.
fn light_arrival(from: &Velocity<Rat>, target: &Velocity<Rat>, u: &Velocity<Rat>, c: &Rat) -> Option<Rat> {
    // |d + u τ|² = c² τ²  with d = target - from
    let d = target - from;
    let a = c.clone() * c.clone() - u.norm_sq();
    let b = d.dot(u);
    let disc = b.clone() * b.clone() + a.clone() * d.norm_sq();
    let root = disc.perfect_sqrt()?;
    (b + root).div(&a).ok()
}

pub fn mm_demo(v: &Rat, l: &Rat, c: &Rat) -> Result<MmDemo, MmError> {
    if !c.is_positive() {
        return Err(MmError::BadLightSpeed(c.to_string()));
    }
    if !l.is_positive() {
        return Err(MmError::BadLength(l.to_string()));
    }
    if v.is_negative() || v >= c {
        return Err(MmError::SpeedNotStl(v.to_string()));
    }
    let core = core_map(v, c).map_err(|_| MmError::Inexact(v.to_string()))?;
    let inv = core.inverse().expect("core map is invertible");
    let z = Rat::int(0);
    let right = vec![
        Event::new(-l.clone(), z.clone(), z.clone(), z.clone()),
        Event::new(z.clone(), l.clone(), z.clone(), z.clone()),
        Event::new(z.clone(), z.clone(), l.clone(), z.clone()),
        Event::new(l.clone(), z.clone(), z.clone(), z.clone()),
    ];
    let left: Vec<Event<Rat>> = right.iter().map(|x| inv.apply(x)).collect();
    let checks = checks(v, l, c, &core, &right, &left);
    Ok(MmDemo { v: v.clone(), l: l.clone(), c: c.clone(), right, left, checks })
}

fn checks(v: &Rat, l: &Rat, c: &Rat, core: &AffineMap4<Rat>, right: &[Event<Rat>], left: &[Event<Rat>]) -> Vec<Check> {
    let mut out = Vec::new();
    let mut push = |name: &str, ok: bool, detail: String| out.push(Check { name: name.into(), ok, detail });

    // relativistic side: light out to each mirror and back at speed c
    let arm_times: Vec<Option<Rat>> = [&right[1], &right[2]]
        .iter()
        .map(|m| {
            let dist = m.spatial().norm_sq().perfect_sqrt()?;
            let out_ok = dist == c.clone() * (m.t().clone() - right[0].t().clone());
            out_ok.then(|| m.t().clone() + dist.div(c).expect("c > 0"))
        })
        .collect();
    let null = arm_times.iter().all(|t| t.as_ref() == Some(l)) && right[3].t() == l;
    push(
        "both arms return at time L",
        null,
        format!("reception times {}", arm_times.iter().map(|t| t.as_ref().map_or("-".into(), |t| t.to_string())).collect::<Vec<_>>().join(", ")),
    );

    // classical side: propagate light at c in the ether frame, where k and
    // the mirrors drift with +v
    let to_ether = galilean_boost(&Velocity::new(v.clone(), Rat::int(0), Rat::int(0)));
    let from_ether = to_ether.inverse().expect("invertible");
    let u = Velocity::new(v.clone(), Rat::int(0), Rat::int(0));
    let emit = to_ether.apply(&left[0]);
    let mut propagated = vec![left[0].clone()];
    let mut receptions = Vec::new();
    for m in &left[1..3] {
        // the mirror rests in k's classical frame at m's spatial position
        let at_emit = to_ether.apply(&Event::new(emit.t().clone(), m.0[1].clone(), m.0[2].clone(), m.0[3].clone()));
        let hit = light_arrival(&emit.spatial(), &at_emit.spatial(), &u, c).map(|tau| {
            let t = emit.t().clone() + tau.clone();
            let p = &at_emit.spatial() + &u.scale(&tau);
            Event::new(t, p.0[0].clone(), p.0[1].clone(), p.0[2].clone())
        });
        let Some(hit) = hit else {
            propagated.push(Event::origin());
            receptions.push(None);
            continue;
        };
        // back to k, who sits at the classical origin
        let k_now = to_ether.apply(&Event::on_time_axis(hit.t().clone()));
        let back = light_arrival(&hit.spatial(), &k_now.spatial(), &u, c).map(|tau| {
            from_ether.apply(&Event::on_time_axis(hit.t().clone() + tau)).t().clone()
        });
        propagated.push(from_ether.apply(&hit));
        receptions.push(back.map(Event::on_time_axis));
    }
    let meets = receptions.iter().all(|r| r.as_ref() == Some(&left[3]));
    propagated.push(left[3].clone());
    let matches = propagated.as_slice() == left && meets;
    push(
        "classical events are C_v⁻¹ images",
        matches && left.iter().zip(right).all(|(a, b)| core.apply(a) == *b),
        "light propagated at c in the ether frame hits the mirrors and k at the C_v⁻¹ images".into(),
    );

    let (tx, ty) = (left[1].t(), left[2].t());
    let at_rest = v.is_zero();
    push(
        "mirror hits are simultaneous only at rest",
        (tx == ty) == at_rest,
        format!("classical mirror hit times {tx} and {ty}"),
    );
    if at_rest {
        push("at rest both panels coincide", left == right, String::new());
    }
    out
}

impl MmDemo {
    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Michelson-Morley at v = {}, L = {}, c = {}", self.v, self.l, self.c);
        let _ = writeln!(out, "  {:<10}  {:<28}  classical (t, x, y, z)", "event", "relativistic (t, x, y, z)");
        for (i, name) in EVENT_NAMES.iter().enumerate() {
            let _ = writeln!(out, "  {:<10}  {:<28}  {}", name, self.right[i].to_string(), self.left[i]);
        }
        for c in &self.checks {
            let _ = writeln!(out, "  [{}] {}: {}", if c.ok { "ok" } else { "FAILED" }, c.name, c.detail);
        }
        out
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("frame,event,t,x,y,z\n");
        for (frame, events) in [("relativistic", &self.right), ("classical", &self.left)] {
            for (name, e) in EVENT_NAMES.iter().zip(events.iter()) {
                let _ = writeln!(out, "{frame},{name},{},{},{},{}", e.0[0], e.0[1], e.0[2], e.0[3]);
            }
        }
        out
    }

    /// Two spacetime diagrams with time upwards. The x arm is drawn to the
    /// right of `k`'s worldline and the y arm, folded over, to the left.
    pub fn svg(&self) -> String {
        const W: f64 = 320.0;
        const H: f64 = 360.0;
        const PAD: f64 = 40.0;
        // horizontal coordinate of an event: +x on the right, -y on the left
        let h = |e: &Event<Rat>| e.0[1].to_f64() - e.0[2].to_f64();
        let all = self.right.iter().chain(&self.left);
        let extent = all.flat_map(|e| [e.t().to_f64().abs(), h(e).abs()]).fold(0.0f64, f64::max).max(1e-9) * 1.15;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="monospace" font-size="11">"#,
            w = 2.0 * W,
            h = H
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let panels = [("relativistic coordinates", &self.right, 0.0), ("classical coordinates", &self.left, W)];
        for (title, events, x0) in panels {
            let sx = |x: f64| x0 + W / 2.0 + x / extent * (W / 2.0 - PAD);
            let sy = |t: f64| H / 2.0 - t / extent * (H / 2.0 - PAD);
            let _ = writeln!(s, r#"<text x="{:.2}" y="18" text-anchor="middle">{title}</text>"#, x0 + W / 2.0);
            // k's worldline and the line t = 0
            let _ = writeln!(s, r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#444"/>"##, sx(0.0), sy(-extent), sx(0.0), sy(extent));
            let _ = writeln!(s, r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#bbb"/>"##, sx(-extent), sy(0.0), sx(extent), sy(0.0));
            let _ = writeln!(s, r##"<text x="{:.2}" y="{:.2}" fill="#777">x</text>"##, sx(extent) - 10.0, sy(0.0) + 14.0);
            let _ = writeln!(s, r##"<text x="{:.2}" y="{:.2}" fill="#777">y</text>"##, sx(-extent) + 2.0, sy(0.0) + 14.0);
            for (arm, colour) in [(1usize, "#c0392b"), (2usize, "#2471a3")] {
                let m = &events[arm];
                let path: Vec<String> = [&events[0], m, &events[3]].iter().map(|e| format!("{:.2},{:.2}", sx(h(e)), sy(e.t().to_f64()))).collect();
                let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#, path.join(" "));
                // the mirror is at rest in both coordinate systems
                let _ = writeln!(
                    s,
                    r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{colour}" stroke-dasharray="4 3"/>"#,
                    sy(-extent),
                    sy(extent),
                    x = sx(h(m))
                );
                let (anchor, dx, dy) = if arm == 1 { ("end", -6.0, 16.0) } else { ("start", 6.0, -8.0) };
                let _ = writeln!(
                    s,
                    r#"<text x="{:.2}" y="{:.2}" fill="{colour}" text-anchor="{anchor}">{} t={:.2}</text>"#,
                    sx(h(m)) + dx,
                    sy(m.t().to_f64()) + dy,
                    EVENT_NAMES[arm],
                    m.t().to_f64()
                );
            }
            for (i, e) in events.iter().enumerate() {
                let (cx, cy) = (sx(h(e)), sy(e.t().to_f64()));
                let _ = writeln!(s, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3" fill="black"/>"#);
                if i == 0 || i == 3 {
                    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{} t={:.2}</text>"#, cx + 5.0, cy + 12.0, EVENT_NAMES[i], e.t().to_f64());
                }
            }
        }
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">v = {}, L = {}, c = {}</text>"#, W, H - 10.0, self.v, self.l, self.c);
        s.push_str("</svg>\n");
        s
    }
}
