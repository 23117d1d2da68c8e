//! The formula-level commands: translation, translated-axiom checks, atom
//! round trips and the simplifier check.

use std::path::Path;
use std::time::Instant;

use kinlog_core::logic::{parse_many, pretty, Formula};
use kinlog_core::models::{
    build_model, check_translated_axioms, composed_spec, eval, pythagorean_fraction, rational_unit_vector, roundtrip,
    standard_spec, BodyKind, BodySpec, EvalOptions, Model, ModelError, ModelSpec, RoundtripPair, TheoryTag,
};
use kinlog_core::scalar::pythagorean_velocity;
use kinlog_core::translate::{simplify_eoi, Translator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::report::{cex_json, Case, Status, SuiteReport};

#[derive(Error, Debug)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Names accepted by `--model` besides paths to spec files.
pub const BUILTIN_MODELS: [&str; 5] = ["ck", "ck-stl", "sr", "sr-e", "ck-composed"];

pub fn builtin_spec(name: &str) -> Option<ModelSpec> {
    Some(match name {
        "ck" => standard_spec(TheoryTag::Ck),
        "ck-stl" => standard_spec(TheoryTag::CkStl),
        "sr" => standard_spec(TheoryTag::Sr),
        "sr-e" => standard_spec(TheoryTag::SrE),
        "ck-composed" => composed_spec(),
        _ => return None,
    })
}

/// A built-in model name or a JSON spec file.
pub fn load_model(arg: &str) -> Result<Model, CliError> {
    if let Some(spec) = builtin_spec(arg) {
        return Ok(build_model(&spec)?);
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(CliError::Usage(format!("{arg} is neither a spec file nor one of {}", BUILTIN_MODELS.join(", "))));
    }
    let text = std::fs::read_to_string(path)?;
    Ok(Model::from_json(&text)?)
}

/// Classical spec with `n` observers at random Pythagorean speeds below
/// light speed, in random rational directions.
pub fn random_classical_spec(theory: TheoryTag, n: usize, seed: u64) -> ModelSpec {
    let mut g = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = standard_spec(theory);
    spec.seed = seed;
    spec.bodies.truncate(1);
    for i in 0..n {
        let t = pythagorean_fraction(&mut g);
        let speed = pythagorean_velocity(&t, &spec.c).expect("fraction below 1").v;
        spec.bodies.push(BodySpec {
            name: Some(format!("r{i}")),
            kind: BodyKind::Observer,
            velocity: Some(rational_unit_vector(&mut g).scale(&speed).0),
            offset: None,
            rotation: None,
            trivial_orbit: 0,
            ether: false,
            e: false,
        });
    }
    spec
}

fn translator(name: &str) -> Result<Translator, CliError> {
    Translator::from_name(name).ok_or_else(|| {
        CliError::Usage(format!("unknown translator {name:?}; use tr, tr+, tr+inv, tr*, tr*inv or a chain such as tr*∘tr+"))
    })
}

/// Translates every formula in `text`, optionally merging ether quantifiers.
pub fn translate_text(text: &str, source: &str, translator_name: &str, simplify: bool) -> Result<String, CliError> {
    let t = translator(translator_name)?;
    let formulas = parse_many(text).map_err(|e| CliError::Parse { path: source.to_string(), message: e.to_string() })?;
    let mut out = String::new();
    for (i, f) in formulas.iter().enumerate() {
        let g = t.apply(f).map_err(|e| CliError::Parse { path: source.to_string(), message: format!("formula {}: {e}", i + 1) })?;
        let g = if simplify { simplify_eoi(&g) } else { g };
        out.push_str(&pretty(&g, 100));
        out.push('\n');
    }
    Ok(out)
}

pub fn cmd_translate(input: &Path, output: &Path, translator_name: &str, simplify: bool) -> Result<usize, CliError> {
    let text = std::fs::read_to_string(input)?;
    let out = translate_text(&text, &input.display().to_string(), translator_name, simplify)?;
    std::fs::write(output, &out)?;
    Ok(parse_many(&text).map(|v| v.len()).unwrap_or(0))
}

/// Every axiom of the direction's source theory, translated and evaluated
/// in the model.
pub fn cmd_check_interpretation(model: &str, direction: &str, budget: usize, seed: u64) -> Result<SuiteReport, CliError> {
    let start = Instant::now();
    let m = load_model(model)?;
    let t = translator(direction)?;
    let r = check_translated_axioms(&m, &t, &EvalOptions { budget, seed })?;
    let mut report = SuiteReport::new(format!("check-interpretation {t} on {model} ({})", r.theory), "exact", seed, budget);
    for row in &r.rows {
        let cex = row.counterexample.as_ref().filter(|_| row.verdict != kinlog_core::models::Verdict::HoldsOnSamples);
        let detail = format!("{} of {}", row.verdict.label(), r.theory);
        report.cases.push(Case::verdict(row.axiom.clone(), row.verdict, row.samples, detail, cex.map(|c| cex_json(&m, c))));
    }
    report.wall = start.elapsed();
    Ok(report)
}

pub fn cmd_roundtrip(model: &str, pair: &str, samples: usize, seed: u64) -> Result<SuiteReport, CliError> {
    let start = Instant::now();
    let m = load_model(model)?;
    let p = RoundtripPair::from_name(pair).ok_or_else(|| CliError::Usage(format!("unknown pair {pair:?}; use plus, star or composed")))?;
    let r = roundtrip(&m, p, samples, seed)?;
    let mut report = SuiteReport::new(format!("roundtrip {pair} on {model} via {}", r.translator), "exact", seed, samples);
    for row in &r.rows {
        let mut case = Case::tally(row.pattern.clone());
        case.samples = row.samples;
        case.failed = row.discrepancies;
        case.unknown = row.undecided;
        case.counterexample = row.first_discrepancy.as_ref().map(|d| json!(d));
        report.cases.push(case.finish(format!("{} agree, {} differ, {} undecided", row.agree, row.discrepancies, row.undecided)));
    }
    report.wall = start.elapsed();
    Ok(report)
}

/// The models the simplifier check evaluates on: the two standard
/// classical ones and three random ones. Every observer is slower than
/// light with a rational contraction, so `tr` images stay decidable.
pub fn simplifier_models(seed: u64) -> Vec<(String, Model)> {
    let mut out = Vec::new();
    for name in ["ck", "ck-stl"] {
        out.push((name.to_string(), build_model(&builtin_spec(name).expect("builtin")).expect("builtin builds")));
    }
    let random = [("random-ck-a", TheoryTag::Ck), ("random-ck-b", TheoryTag::Ck), ("random-ck-stl", TheoryTag::CkStl)];
    for (i, (name, theory)) in random.into_iter().enumerate() {
        let spec = random_classical_spec(theory, 6, seed.wrapping_add(i as u64));
        out.push((name.to_string(), build_model(&spec).expect("random spec builds")));
    }
    out
}

/// Translates each relativistic corpus formula with `tr` and checks that
/// merging its ether quantifiers keeps the verdict on every model.
pub fn check_simplifier(corpus: &str, budget: usize, seed: u64) -> Result<SuiteReport, CliError> {
    let start = Instant::now();
    let formulas = parse_many(corpus).map_err(|e| CliError::Parse { path: "corpus".into(), message: e.to_string() })?;
    let models = simplifier_models(seed);
    let tr = translator("tr")?;
    let mut report = SuiteReport::new("check-simplifier", "exact", seed, budget);
    let opts = EvalOptions { budget, seed };
    let cases: Vec<Case> = std::thread::scope(|s| {
        let handles: Vec<_> = formulas
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let (models, tr, opts) = (&models, &tr, &opts);
                s.spawn(move || simplifier_case(i, f, tr, models, opts))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("simplifier case panicked")).collect::<Result<_, _>>()
    })?;
    report.cases = cases;
    report.wall = start.elapsed();
    Ok(report)
}

fn simplifier_case(i: usize, f: &Formula, tr: &Translator, models: &[(String, Model)], opts: &EvalOptions) -> Result<Case, CliError> {
    let g = tr.apply(f).map_err(|e| CliError::Parse { path: "corpus".into(), message: format!("formula {}: {e}", i + 1) })?;
    let s = simplify_eoi(&g);
    let changed = s != g;
    let mut case = Case::tally(format!("corpus {:02}", i + 1));
    let mut verdicts = Vec::new();
    for (name, m) in models {
        let a = eval(m, &g, opts)?.verdict;
        let b = eval(m, &s, opts)?.verdict;
        let ok = match (a, b) {
            (x, y) if x == y && x != kinlog_core::models::Verdict::Unknown => Some(true),
            (kinlog_core::models::Verdict::Unknown, _) | (_, kinlog_core::models::Verdict::Unknown) => None,
            _ => Some(false),
        };
        case.record(ok, || json!({ "model": name, "translated": a.label(), "simplified": b.label(), "formula": f.to_string() }));
        verdicts.push(a.label());
    }
    let mut detail = if changed { format!("merged ({} → {} nodes)", g.size(), s.size()) } else { "unchanged".to_string() };
    detail.push_str(&format!("; {}", verdicts.join(" ")));
    Ok(case.finish(detail))
}

/// Cases of a report that did not pass, for error messages.
pub fn failures(r: &SuiteReport) -> Vec<String> {
    r.cases.iter().filter(|c| c.status != Status::Pass).map(|c| format!("{}: {} ({})", c.name, c.status.label(), c.detail)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_models_build() {
        for name in BUILTIN_MODELS {
            assert!(load_model(name).is_ok(), "{name}");
        }
        assert!(matches!(load_model("no-such-model"), Err(CliError::Usage(_))));
    }

    #[test]
    fn arithmetic_translates_into_itself() {
        for t in ["tr", "tr+", "tr+inv", "tr*", "tr*inv"] {
            let out = translate_text("(= (+ a b) c)", "-", t, false).unwrap();
            assert_eq!(out.trim(), "(= (+ a b) c)");
        }
    }

    #[test]
    fn wrong_source_language_is_reported() {
        let err = translate_text("(forall-in ((k IOb)) (E k))", "in.kl", "tr*", false).unwrap_err();
        assert!(err.to_string().contains("in.kl: formula 1"), "{err}");
        let err = translate_text("(forall ((x Q)) (= x", "in.kl", "tr", false).unwrap_err();
        assert!(err.to_string().starts_with("in.kl: 1:"), "{err}");
    }

    /// `KINLOG_BLESS=1 cargo test` rewrites the files from the builtins.
    #[test]
    fn bundled_spec_files_match_builtins() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/models");
        for name in BUILTIN_MODELS {
            let path = dir.join(format!("{name}.json"));
            let spec = serde_json::to_value(builtin_spec(name).unwrap()).unwrap();
            if std::env::var_os("KINLOG_BLESS").is_some() {
                std::fs::create_dir_all(&dir).unwrap();
                std::fs::write(&path, serde_json::to_string_pretty(&spec).unwrap() + "\n").unwrap();
            }
            let text = std::fs::read_to_string(&path).unwrap();
            let on_disk: serde_json::Value = serde_json::from_str(&text).unwrap();
            assert_eq!(on_disk, spec, "{name}");
            assert!(load_model(path.to_str().unwrap()).is_ok(), "{name}");
        }
    }

    #[test]
    fn random_specs_are_slower_than_light() {
        let m = build_model(&random_classical_spec(TheoryTag::CkStl, 5, 3)).unwrap();
        assert_eq!(m.observers().count(), 6 + 2);
    }
}
