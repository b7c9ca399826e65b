//! End-to-end checks of the command-line contract: file shapes, exit codes,
//! deterministic reruns, and the replay round-trip, all through the binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fsjn(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsjn"))
        .args(args)
        .args(["--out", dir.to_str().unwrap()])
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

/// The last stdout line must be one valid JSON object — the verdict.
fn verdict(out: &Output) -> Value {
    let text = stdout(out);
    let line = text.lines().last().expect("stdout has a verdict line");
    serde_json::from_str(line).expect("verdict line parses as JSON")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).expect("file exists")
}

#[test]
fn generate_product_embeds_twelve_measures_at_horizon_12() {
    let dir = tempfile::tempdir().unwrap();
    let out = fsjn(dir.path(), &["generate", "product", "--horizon", "12"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let v = verdict(&out);
    assert_eq!(v["pass"], Value::Bool(true));

    let file = dir.path().join("product.json");
    let doc: Value = serde_json::from_str(&read(&file)).unwrap();
    assert_eq!(doc["format"], "fsjn-handle/1");
    assert_eq!(doc["space"]["id"], "product");
    assert_eq!(doc["indexOrigin"], 1);
    let measures = doc["measures"].as_array().unwrap();
    assert_eq!(measures.len(), 12);
    // the n-th element has n·2^n atoms, all with coefficient ±1/(n·2^n)
    for (i, m) in measures.iter().enumerate() {
        let n = (i + 1) as u64;
        assert_eq!(m["atoms"].as_array().unwrap().len(), (n << n) as usize);
    }

    // rerunning with the same flags rewrites the identical bytes
    let before = read(&file);
    let again = fsjn(dir.path(), &["generate", "product", "--horizon", "12"]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(before, read(&file), "reruns must be byte-identical");
}

#[test]
fn decay_cylinders_report_contains_the_reciprocal_law() {
    let dir = tempfile::tempdir().unwrap();
    let gen = fsjn(dir.path(), &["generate", "product", "--horizon", "12"]);
    assert_eq!(gen.status.code(), Some(0));
    let input = dir.path().join("product.json");
    let out = fsjn(
        dir.path(),
        &["verify", input.to_str().unwrap(), "--suite", "decay", "--family", "cylinders"],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let csv = read(&dir.path().join("product-decay.report.csv"));
    // the one-sign-pinned unconstrained rectangle takes value exactly 1/(2n)
    assert!(csv.contains("rect-s0plus-all,1,1/2,0.5\n"));
    assert!(csv.contains("rect-s0plus-all,4,1/8,0.125\n"));
    assert!(csv.contains("rect-s0plus-all,8,1/16,0.0625\n"));
    let json: Value = serde_json::from_str(&read(&dir.path().join("product-decay.report.json"))).unwrap();
    assert_eq!(json["pass"], Value::Bool(true));
    assert_eq!(json["suite"], "decay");
}

#[test]
fn restrict_to_limit_pipeline_replays_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fsjn(dir.path(), &["generate", "square4"]).status.code(), Some(0));
    let input = dir.path().join("square4.json");
    let tr = fsjn(
        dir.path(),
        &["transform", input.to_str().unwrap(), "--pipeline", "restrict-to-L"],
    );
    assert_eq!(tr.status.code(), Some(0), "stderr: {}", stderr(&tr));
    let derived = dir.path().join("square4-restrict-to-L.json");
    assert!(derived.exists());

    let rp = fsjn(dir.path(), &["replay", derived.to_str().unwrap()]);
    assert_eq!(rp.status.code(), Some(0), "stderr: {}", stderr(&rp));
    assert_eq!(verdict(&rp)["pass"], Value::Bool(true));

    // tampering with one stored coefficient must break the byte comparison
    let mut doc: Value = serde_json::from_str(&read(&derived)).unwrap();
    doc["measures"][0]["atoms"][0]["coef"] = Value::String(String::from("1/7"));
    std::fs::write(&derived, serde_json::to_string_pretty(&doc).unwrap() + "\n").unwrap();
    let bad = fsjn(dir.path(), &["replay", derived.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1), "tampered replay must fail");
}

#[test]
fn chained_transforms_propagate_the_replay_base() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fsjn(dir.path(), &["generate", "square1"]).status.code(), Some(0));
    let input = dir.path().join("square1.json");
    let first = fsjn(
        dir.path(),
        &["transform", input.to_str().unwrap(), "--pipeline", "disjointify", "--horizon", "12"],
    );
    assert_eq!(first.status.code(), Some(0), "stderr: {}", stderr(&first));
    let mid = dir.path().join("square1-disjointify.json");
    let second = fsjn(
        dir.path(),
        &["transform", mid.to_str().unwrap(), "--pipeline", "normalize", "--horizon", "12"],
    );
    assert_eq!(second.status.code(), Some(0), "stderr: {}", stderr(&second));
    let last = dir.path().join("square1-disjointify-normalize.json");
    let rp = fsjn(dir.path(), &["replay", last.to_str().unwrap()]);
    assert_eq!(rp.status.code(), Some(0), "stderr: {}", stderr(&rp));

    // the chained file still embeds the original generator as its base
    let doc: Value = serde_json::from_str(&read(&last)).unwrap();
    assert_eq!(doc["replayBase"]["source"]["spec"]["name"], "square1");
    assert_eq!(doc["provenance"].as_array().unwrap().len(), 2);
}

#[test]
fn usage_problems_exit_2() {
    let dir = tempfile::tempdir().unwrap();

    let unknown = fsjn(dir.path(), &["generate", "no-such-family"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(stderr(&unknown).contains("unknown generator"));

    let alpha = fsjn(dir.path(), &["generate", "square3", "--alpha", "3/2"]);
    assert_eq!(alpha.status.code(), Some(2));
    assert!(stderr(&alpha).contains("strictly between 0 and 1"));

    let suite = fsjn(dir.path(), &["verify", "--suite", "nonsense"]);
    assert_eq!(suite.status.code(), Some(2));

    assert_eq!(fsjn(dir.path(), &["generate", "square1"]).status.code(), Some(0));
    let input = dir.path().join("square1.json");
    let stage = fsjn(
        dir.path(),
        &["transform", input.to_str().unwrap(), "--pipeline", "frobnicate"],
    );
    assert_eq!(stage.status.code(), Some(2));
    assert!(stderr(&stage).contains("unknown pipeline stage"));

    // clap itself reports malformed invocations with the same code
    let noargs = Command::new(env!("CARGO_BIN_EXE_fsjn")).output().unwrap();
    assert_eq!(noargs.status.code(), Some(2));
}

#[test]
fn limit_mass_without_oracle_is_refused_with_the_documented_message() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        fsjn(dir.path(), &["generate", "product", "--horizon", "8"]).status.code(),
        Some(0)
    );
    let input = dir.path().join("product.json");
    let mut doc: Value = serde_json::from_str(&read(&input)).unwrap();
    doc.as_object_mut().unwrap().remove("oracle");
    std::fs::write(&input, serde_json::to_string_pretty(&doc).unwrap() + "\n").unwrap();

    let out = fsjn(dir.path(), &["verify", input.to_str().unwrap(), "--suite", "l-mass"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("limit oracle required"));
}

#[test]
fn tampered_generator_measures_are_rejected_on_load() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fsjn(dir.path(), &["generate", "square1"]).status.code(), Some(0));
    let input = dir.path().join("square1.json");
    let mut doc: Value = serde_json::from_str(&read(&input)).unwrap();
    doc["measures"][0]["atoms"][0]["coef"] = Value::String(String::from("1/3"));
    std::fs::write(&input, serde_json::to_string_pretty(&doc).unwrap() + "\n").unwrap();

    let out = fsjn(dir.path(), &["verify", input.to_str().unwrap(), "--suite", "balance"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("disagrees"));
}

#[test]
fn failed_tail_checks_exit_1_and_still_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fsjn(dir.path(), &["generate", "square1"]).status.code(), Some(0));
    let input = dir.path().join("square1.json");
    // an extreme tolerance makes the (correct, slowly decaying) tail fail
    let out = fsjn(
        dir.path(),
        &[
            "verify",
            input.to_str().unwrap(),
            "--suite",
            "decay",
            "--family",
            "bump-half-axis",
            "--tolerance",
            "1/100000",
        ],
    );
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("FAILED"), "the failing certificate is printed");
    let v = verdict(&out);
    assert_eq!(v["pass"], Value::Bool(false));
    assert!(dir.path().join("square1-decay.report.json").exists());
    assert!(dir.path().join("square1-decay.report.csv").exists());
}

#[test]
fn bollobas_suite_needs_no_input_and_respects_the_exact_range() {
    let dir = tempfile::tempdir().unwrap();
    let out = fsjn(
        dir.path(),
        &["verify", "--suite", "bollobas", "--eps", "1/12", "--n-max", "300"],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let csv = read(&dir.path().join("bollobas.report.csv"));
    assert!(csv.lines().count() > 20);
    assert!(csv.starts_with("n,tail,tailApprox,boundLower,boundLowerApprox,holds"));

    let too_far = fsjn(
        dir.path(),
        &["verify", "--suite", "bollobas", "--n-max", "5000"],
    );
    assert_eq!(too_far.status.code(), Some(2), "past the exact range is a usage error");
}

#[test]
fn rademacher_writes_a_cylinder_family_file_that_rechecks() {
    let dir = tempfile::tempdir().unwrap();
    let gen = fsjn(dir.path(), &["generate", "rademacher"]);
    assert_eq!(gen.status.code(), Some(0), "stderr: {}", stderr(&gen));
    let file = dir.path().join("rademacher.json");
    let doc: Value = serde_json::from_str(&read(&file)).unwrap();
    assert_eq!(doc["format"], "fsjn-cylinders/1");
    assert_eq!(doc["count"], 12);
    assert_eq!(doc["checkDepth"], 12);
    assert_eq!(doc["allChecksPass"], Value::Bool(true));
    assert_eq!(doc["elements"].as_array().unwrap().len(), 12);

    let v = fsjn(dir.path(), &["verify", file.to_str().unwrap(), "--suite", "decay"]);
    assert_eq!(v.status.code(), Some(0), "stderr: {}", stderr(&v));

    let wrong = fsjn(dir.path(), &["verify", file.to_str().unwrap(), "--suite", "balance"]);
    assert_eq!(wrong.status.code(), Some(2), "only decay applies to cylinder files");
}

#[test]
fn concentrate_takes_a_parenthesized_point_through_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fsjn(dir.path(), &["generate", "conv-pair"]).status.code(), Some(0));
    let input = dir.path().join("conv-pair.json");
    let out = fsjn(
        dir.path(),
        &["transform", input.to_str().unwrap(), "--pipeline", "concentrate=(1/3,0)"],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(dir.path().join("conv-pair-concentrate.json").exists());
}

#[test]
fn report_battery_writes_combined_json_and_per_suite_csvs() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fsjn(dir.path(), &["generate", "square4"]).status.code(), Some(0));
    let input = dir.path().join("square4.json");
    let out = fsjn(dir.path(), &["report", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));

    let combined: Value =
        serde_json::from_str(&read(&dir.path().join("square4.report.json"))).unwrap();
    assert_eq!(combined["pass"], Value::Bool(true));
    for key in ["balance", "limit-sets", "decay", "l-mass"] {
        assert!(combined.get(key).is_some(), "missing section {key}");
        let suffix = format!("square4-{key}.report.csv");
        assert!(dir.path().join(&suffix).exists(), "missing {suffix}");
    }
}

#[test]
fn seeded_sweeps_embed_their_seed_and_change_with_it() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        fsjn(dir.path(), &["generate", "product", "--horizon", "8"]).status.code(),
        Some(0)
    );
    let input = dir.path().join("product.json");
    let run = |seed: &str, tag: &str| {
        let out = fsjn(
            dir.path(),
            &[
                "verify",
                input.to_str().unwrap(),
                "--suite",
                "product-audit",
                "--seed",
                seed,
            ],
        );
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
        let path = dir.path().join("product-product-audit.report.json");
        let kept = dir.path().join(format!("audit-{tag}.json"));
        std::fs::rename(&path, &kept).unwrap();
        read(&kept)
    };
    let a1 = run("7", "a1");
    let a2 = run("7", "a2");
    let b = run("8", "b");
    assert_eq!(a1, a2, "same seed, same bytes");
    assert_ne!(a1, b, "different seed, different sampled rectangles");
    let doc: Value = serde_json::from_str(&a1).unwrap();
    assert_eq!(doc["seed"], 7);
    assert_eq!(doc["pairs"], 51);
}
