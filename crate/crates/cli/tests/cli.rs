use std::path::PathBuf;
use std::process::{Command, Output};

use kinlog_core::logic::parse_many;

fn kinlog(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kinlog")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn exit_codes() {
    assert_eq!(code(&kinlog(&["check-lemmas", "--filter", "rad-perp", "--budget", "5"])), 0);
    assert_eq!(code(&kinlog(&["check-lemmas", "--filter", "xy", "--budget", "0"])), 2);
    assert_eq!(code(&kinlog(&["check-lemmas", "--filter", "nothing-like-this"])), 3);
    assert_eq!(code(&kinlog(&["check-lemmas", "--field", "complex"])), 3);
    assert_eq!(code(&kinlog(&["no-such-command"])), 3);
    assert_eq!(code(&kinlog(&["--help"])), 0);
    assert_eq!(code(&kinlog(&["mm-demo", "--v", "1"])), 3);
    assert_eq!(code(&kinlog(&["roundtrip", "--model", "ck", "--pair", "sideways"])), 3);
    assert_eq!(code(&kinlog(&["check-interpretation", "--model", "nowhere.json", "--direction", "tr"])), 3);
}

#[test]
fn model_of_the_wrong_theory_is_a_usage_error() {
    let o = kinlog(&["check-interpretation", "--model", "sr", "--direction", "tr+inv", "--budget", "20"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("SR-e"));
}

#[test]
fn json_reports_are_byte_identical_for_a_seed() {
    let args = ["check-lemmas", "--filter", "cannon", "--budget", "8", "--seed", "11", "--json"];
    let a = kinlog(&args);
    let b = kinlog(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["seed"], 11);
    assert_eq!(v["cases"].as_array().unwrap().len(), 2);
    let c = kinlog(&["check-lemmas", "--filter", "cannon", "--budget", "8", "--seed", "12", "--json"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn roundtrip_json_is_deterministic() {
    let args = ["roundtrip", "--model", "ck-stl", "--pair", "plus", "--samples", "50", "--json"];
    assert_eq!(kinlog(&args).stdout, kinlog(&args).stdout);
}

#[test]
fn translate_writes_parseable_formulas() {
    let input = scratch("axioms.kl");
    std::fs::write(&input, "(forall-in ((k IOb)) (W k k 0 0 0 0))\n(forall-in ((k IOb)) (in-wl k k 1 0 0 0))\n").unwrap();
    for simplify in [false, true] {
        let out = scratch(if simplify { "simplified.kl" } else { "translated.kl" });
        let mut args = vec!["translate", "--translator", "tr", input.to_str().unwrap(), out.to_str().unwrap()];
        if simplify {
            args.insert(3, "--simplify");
        }
        let o = kinlog(&args);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(parse_many(&text).unwrap().len(), 2, "{text}");
        // merging leaves a single ether quantifier per formula
        assert_eq!(text.starts_with("(forall-in ((k IOb))"), simplify, "{text}");
        assert_eq!(text.matches("Ether").count() == 2, simplify, "{text}");
    }
}

#[test]
fn translate_reports_parse_errors_with_the_path() {
    let input = scratch("broken.kl");
    std::fs::write(&input, "(forall ((x Q))").unwrap();
    let o = kinlog(&["translate", "--translator", "tr", input.to_str().unwrap(), scratch("never.kl").to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("broken.kl"));
}

#[test]
fn mm_demo_writes_deterministic_files() {
    let (svg, csv) = (scratch("mm.svg"), scratch("mm.csv"));
    let run = || {
        let o = kinlog(&["mm-demo", "--v", "3/5", "--L", "1", "--svg", svg.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
        (std::fs::read(&svg).unwrap(), std::fs::read_to_string(&csv).unwrap())
    };
    let (a, table) = run();
    let (b, _) = run();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
    assert!(!text.contains("<image") && !text.contains("href"));
    assert!(table.contains("classical,mirror-x,3/4,4/5,0,0"), "{table}");
}
