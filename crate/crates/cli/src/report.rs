//! Suite reports: what every command prints and what its exit code means.

use std::fmt::Write as _;
use std::time::Duration;

use kinlog_core::models::{Cex, Model, Val, Verdict};
use serde::Serialize;
use serde_json::{json, Value};

/// Bumped whenever the JSON layout changes.
pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Unknown,
}

impl Status {
    pub fn of(v: Verdict) -> Status {
        match v {
            Verdict::HoldsOnSamples => Status::Pass,
            Verdict::Fails => Status::Fail,
            Verdict::Unknown => Status::Unknown,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Case {
    pub name: String,
    pub status: Status,
    /// evaluator verdict for formula checks, absent for direct computations
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    pub samples: usize,
    pub failed: usize,
    pub unknown: usize,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
}

impl Case {
    /// A case that checks `samples` instances one by one.
    pub fn tally(name: impl Into<String>) -> Case {
        Case {
            name: name.into(),
            status: Status::Unknown,
            verdict: None,
            samples: 0,
            failed: 0,
            unknown: 0,
            detail: String::new(),
            counterexample: None,
        }
    }

    /// Records one instance; the first failure is kept as the counterexample.
    pub fn record(&mut self, ok: Option<bool>, describe: impl FnOnce() -> Value) {
        self.samples += 1;
        match ok {
            Some(true) => {}
            Some(false) => {
                self.failed += 1;
                if self.counterexample.is_none() {
                    self.counterexample = Some(describe());
                }
            }
            None => self.unknown += 1,
        }
    }

    /// Fixes the status from the tally. No samples means nothing was shown.
    pub fn finish(mut self, detail: impl Into<String>) -> Case {
        self.status = if self.failed > 0 {
            Status::Fail
        } else if self.samples == 0 || self.unknown > 0 {
            Status::Unknown
        } else {
            Status::Pass
        };
        self.detail = detail.into();
        self
    }

    pub fn verdict(name: impl Into<String>, verdict: Verdict, samples: usize, detail: impl Into<String>, cex: Option<Value>) -> Case {
        let status = Status::of(verdict);
        Case {
            name: name.into(),
            status,
            verdict: Some(verdict),
            samples,
            failed: usize::from(status == Status::Fail),
            unknown: usize::from(status == Status::Unknown),
            detail: detail.into(),
            counterexample: cex,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub tool: String,
    pub suite: String,
    pub backend: String,
    pub seed: u64,
    pub budget: usize,
    pub cases: Vec<Case>,
    /// kept out of the JSON so reports with a fixed seed are byte-identical
    #[serde(skip)]
    pub wall: Duration,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, backend: &str, seed: u64, budget: usize) -> SuiteReport {
        SuiteReport {
            schema: SCHEMA_VERSION,
            tool: format!("kinlog {}", env!("CARGO_PKG_VERSION")),
            suite: suite.into(),
            backend: backend.to_string(),
            seed,
            budget,
            cases: Vec::new(),
            wall: Duration::ZERO,
        }
    }

    pub fn count(&self, s: Status) -> usize {
        self.cases.iter().filter(|c| c.status == s).count()
    }

    pub fn all_pass(&self) -> bool {
        !self.cases.is_empty() && self.cases.iter().all(|c| c.status == Status::Pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.count(Status::Fail) > 0 {
            EXIT_FAIL
        } else if self.count(Status::Unknown) > 0 || self.cases.is_empty() {
            EXIT_UNKNOWN
        } else {
            EXIT_PASS
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let width = self.cases.iter().map(|c| c.name.chars().count()).max().unwrap_or(4).max(4);
        let _ = writeln!(out, "{} [{} backend, seed {}, budget {}]", self.suite, self.backend, self.seed, self.budget);
        for c in &self.cases {
            let pad = width - c.name.chars().count();
            let _ = writeln!(out, "  {}{}  {:<7}  {:>6}  {}", c.name, " ".repeat(pad), c.status.label(), c.samples, c.detail);
        }
        let _ = writeln!(
            out,
            "{} pass, {} fail, {} unknown in {:.2}s",
            self.count(Status::Pass),
            self.count(Status::Fail),
            self.count(Status::Unknown),
            self.wall.as_secs_f64()
        );
        out
    }
}

/// A counterexample with body ids replaced by names.
pub fn cex_json(m: &Model, cex: &Cex) -> Value {
    let name = |id: usize| {
        m.bodies
            .get(id)
            .map(|b| b.name.clone())
            .or_else(|| cex.bodies.iter().find(|b| b.id == id).map(|b| b.name.clone()))
            .unwrap_or_else(|| format!("#{id}"))
    };
    let bindings: Vec<Value> = cex
        .bindings
        .iter()
        .map(|(n, v)| match v {
            Val::Body(id) => json!([n, name(*id)]),
            Val::Q(x) => json!([n, x.to_string()]),
        })
        .collect();
    let bodies: Vec<Value> = cex
        .bodies
        .iter()
        .map(|b| {
            json!({
                "name": b.name,
                "photon": b.ph,
                "frame": b.frame.as_ref().map(|f| format!("{f:?}")),
                "line": format!("{:?}", b.line),
            })
        })
        .collect();
    json!({ "focus": cex.focus.to_string(), "bindings": bindings, "bodies": bodies })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_worst_case() {
        let mut r = SuiteReport::new("s", "exact", 1, 1);
        assert_eq!(r.exit_code(), EXIT_UNKNOWN);
        let mut ok = Case::tally("a");
        ok.record(Some(true), || Value::Null);
        r.cases.push(ok.finish(""));
        assert_eq!(r.exit_code(), EXIT_PASS);
        r.cases.push(Case::tally("b").finish(""));
        assert_eq!(r.exit_code(), EXIT_UNKNOWN);
        let mut bad = Case::tally("c");
        bad.record(Some(false), || json!("x"));
        bad.record(Some(false), || json!("y"));
        let bad = bad.finish("");
        assert_eq!(bad.counterexample, Some(json!("x")));
        r.cases.push(bad);
        assert_eq!(r.exit_code(), EXIT_FAIL);
    }

    #[test]
    fn wall_time_stays_out_of_the_json() {
        let mut r = SuiteReport::new("s", "exact", 1, 1);
        let a = r.to_json();
        r.wall = Duration::from_secs(3);
        assert_eq!(a, r.to_json());
        assert!(r.table().contains("3.00s"));
    }
}
