//! End-to-end runs of the `varmc` binary.

use std::process::{Command, Output};

use jsonschema::JSONSchema;
use serde_json::Value;

use varmc_core::dsl::parse_model;
use varmc_core::{bundled, parse_feat_expr, Validate};

fn varmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varmc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = varmc(&full);
    let value = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)));
    (code(&out), value)
}

fn schema() -> JSONSchema {
    let text = include_str!("../report.schema.json");
    let schema: Value = serde_json::from_str(text).unwrap();
    JSONSchema::compile(&schema).expect("schema compiles")
}

fn assert_schema_valid(report: &Value) {
    let schema = schema();
    let msgs: Vec<String> = match schema.validate(report) {
        Ok(()) => return,
        Err(errors) => errors
            .map(|e| format!("{} at {}", e, e.instance_path))
            .collect(),
    };
    panic!("report violates schema: {msgs:#?}");
}

fn configs_with(report: &Value, verdict: &str) -> Vec<Vec<String>> {
    report["variants"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|v| v["verdict"] == verdict)
        .map(|v| serde_json::from_value(v["config"].clone()).unwrap())
        .collect()
}

fn sorted(list: &[&str]) -> Vec<String> {
    let mut v: Vec<String> = list.iter().map(|s| s.to_string()).collect();
    v.sort();
    v
}

#[test]
fn partition_check_fails_exactly_the_cancel_variants() {
    let (code, report) = json(&[
        "check",
        "vending.fts",
        "P1",
        "--strategy",
        "partition",
        "c;!c",
        "--abstract",
        "join",
    ]);
    assert_eq!(code, 1);
    assert_schema_valid(&report);
    let mut fails = configs_with(&report, "fails");
    fails.sort();
    let mut expected = vec![
        sorted(&["v", "s", "c"]),
        sorted(&["v", "s", "t", "c"]),
        sorted(&["v", "s", "c", "f"]),
        sorted(&["v", "s", "t", "c", "f"]),
    ];
    expected.sort();
    assert_eq!(fails, expected);
    assert_eq!(configs_with(&report, "holds").len(), 4);
    assert_eq!(report["summary"]["inconclusive"], 0);
    assert_eq!(report["cells"].as_array().unwrap().len(), 2);
}

#[test]
fn join_proves_p2_for_all_variants() {
    let (code, report) = json(&["check", "vending.fts", "P2", "--strategy", "join"]);
    assert_eq!(code, 0);
    assert_schema_valid(&report);
    assert_eq!(configs_with(&report, "holds").len(), 8);
    let cell = &report["cells"][0]["abstract_configs"][0];
    assert_eq!(cell["may"], "holds");
    assert_eq!(cell["must"], "holds");
}

#[test]
fn join_proves_p3_with_a_must_lasso() {
    let (code, report) = json(&["check", "vending.fts", "P3", "--strategy", "join"]);
    assert_eq!(code, 0);
    assert_schema_valid(&report);
    assert_eq!(configs_with(&report, "holds").len(), 8);
    let evidence = &report["evidence"][0];
    assert_eq!(evidence["kind"], "abstract-witness");
    let main = evidence["paths"][0].as_str().unwrap();
    assert_eq!(
        main,
        "1 -pay-> 2 -change-> 3 -soda-> 5 -serveSoda-> 7 -open-> 8 -take-> 1 loop 0"
    );

    // The lasso replays on the must graph of the join abstraction.
    let (_, fts) = bundled::vending().unwrap();
    let mfts = fts.abstract_fts(&varmc_core::Abstraction::Join).unwrap();
    let must = mfts
        .project_variant(mfts.space.valid_configs()[0])
        .unwrap()
        .must;
    let path = varmc_core::dsl::parse_path(&fts, main).unwrap();
    assert!(path.replays_on(&must));
    assert_eq!(path.states[0], 0);
}

#[test]
fn brute_force_agrees_with_join_on_p2() {
    let (code, report) = json(&["check", "vending.fts", "P2"]);
    assert_eq!(code, 0);
    assert_schema_valid(&report);
    assert_eq!(report["strategy"], "brute");
    assert_eq!(configs_with(&report, "holds").len(), 8);
}

#[test]
fn join_leaves_p1_partly_inconclusive_until_refined() {
    let (code, report) = json(&["check", "vending.fts", "P1", "--strategy", "join"]);
    assert_eq!(
        code, 1,
        "the attributed counterexample fails the cancel variants"
    );
    assert_schema_valid(&report);
    assert_eq!(report["summary"]["inconclusive"], 4);
    assert_eq!(
        code_of(&["check", "vending.fts", "P1", "--no-such-flag"]),
        3
    );

    let (code, report) = json(&[
        "check",
        "vending.fts",
        "AG AF start",
        "--strategy",
        "join",
        "--refine",
        "brute",
    ]);
    assert_eq!(code, 1);
    assert_schema_valid(&report);
    assert_eq!(report["refined"], true);
    assert_eq!(report["property"]["name"], Value::Null);
    assert_eq!(report["summary"]["inconclusive"], 0);
    assert_eq!(report["summary"]["fails"], 4);
}

fn temp_model(name: &str, text: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("varmc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn undecided_existential_exits_two() {
    // Join keeps both branches as may-only, so `EF goal` is neither proved nor refuted.
    let model = temp_model(
        "branch.fts",
        "format-version 1\nfeatures a;\nconfigs true;\nstate 0 init;\nstate 1 label goal;\nstate 2;\n\
         trans 0 -> 1 on go when a;\ntrans 0 -> 2 on go when !a;\n",
    );
    let m = model.to_str().unwrap();
    let (code, report) = json(&["check", m, "EF goal", "--strategy", "join"]);
    assert_schema_valid(&report);
    assert_eq!(code, 2);
    assert_eq!(report["summary"]["inconclusive"], 2);
    assert_eq!(
        report["cells"][0]["abstract_configs"][0]["outcome"],
        "unknown"
    );

    let (code, report) = json(&[
        "check",
        m,
        "EF goal",
        "--strategy",
        "join",
        "--refine",
        "brute",
    ]);
    assert_schema_valid(&report);
    assert_eq!(code, 1);
    assert_eq!(configs_with(&report, "holds"), vec![vec!["a".to_string()]]);
    assert_eq!(configs_with(&report, "fails"), vec![Vec::<String>::new()]);
}

#[test]
fn reports_are_deterministic_across_worker_counts() {
    let strip = |mut v: Value| {
        v["timings_ms"] = Value::Null;
        v
    };
    let (_, one) = json(&[
        "check",
        "vending.fts",
        "P1",
        "--strategy",
        "partition",
        "c;!c",
        "--jobs",
        "1",
    ]);
    let (_, four) = json(&[
        "check",
        "vending.fts",
        "P1",
        "--strategy",
        "partition",
        "c;!c",
        "--jobs",
        "4",
    ]);
    assert_eq!(strip(one), strip(four));
}

#[test]
fn usage_and_parse_errors_exit_three() {
    assert_eq!(code(&varmc(&["frobnicate"])), 3);
    assert_eq!(code(&varmc(&["check", "vending.fts", "AG ("])), 3);
    assert_eq!(code(&varmc(&["check", "vending.fts", "AG nosuchprop"])), 3);
    assert_eq!(code(&varmc(&["check", "no/such/model.fts", "P1"])), 3);
    assert_eq!(
        code(&varmc(&[
            "check",
            "vending.fts",
            "P1",
            "--strategy",
            "partition",
            "c;c"
        ])),
        3
    );
    assert_eq!(
        code(&varmc(&[
            "check",
            "vending.fts",
            "P1",
            "--strategy",
            "partition",
            "c;!c",
            "--abstract",
            "join;join;join"
        ])),
        3
    );
    assert_eq!(
        code(&varmc(&[
            "check",
            "vending.fts",
            "P1",
            "--strategy",
            "ignore=zz"
        ])),
        3
    );
    assert_eq!(
        code(&varmc(&["project", "vending.fts", "--constraint", "!v"])),
        3
    );
    assert_eq!(code(&varmc(&["explain", "vending.fts", "1 -> 5"])), 3);
    assert_eq!(code(&varmc(&["--help"])), 0);
}

#[test]
fn validate_reports_ok_and_model_errors() {
    let (code, report) = json(&["validate", "vending.fts"]);
    assert_eq!(code, 0);
    assert_eq!(report["ok"], true);
    assert_eq!(report["states"], 8);
    assert_eq!(report["transitions"], 13);
    assert_eq!(report["configurations"], 8);

    let empty = temp_model(
        "empty.fts",
        "format-version 1\nfeatures a;\nconfigs a & !a;\nstate 0 init;\n",
    );
    let (code, report) = json(&["validate", empty.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(report["diagnostics"][0]["code"], "EMPTY_CONFIG_SPACE");

    let dead = temp_model(
        "dead.fts",
        "format-version 1\nfeatures a;\nconfigs a;\nstate 0 init;\ntrans 0 -> 0 on go when !a;\n",
    );
    let (code, report) = json(&["validate", dead.to_str().unwrap()]);
    assert_eq!(code, 0, "warnings do not fail validation");
    let codes: Vec<&str> = report["diagnostics"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["code"].as_str().unwrap())
        .collect();
    assert!(codes.contains(&"DEAD_TRANSITION"), "{codes:?}");

    let broken = temp_model(
        "broken.fts",
        "format-version 1\nfeatures a;\nstate 0 init;\ntrans 0 -> 9 on go;\n",
    );
    assert_eq!(code_of(&["validate", broken.to_str().unwrap()]), 3);
}

fn code_of(args: &[&str]) -> i32 {
    code(&varmc(args))
}

#[test]
fn abstract_join_must_keeps_the_six_solid_transitions() {
    let out = varmc(&["abstract", "vending.fts", "--op", "join", "--mode", "must"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let (doc, fts) = parse_model(&text).unwrap();
    assert_eq!(fts.transitions.len(), 6);
    assert!(doc.features.is_empty());
    let actions: Vec<&str> = doc.transitions.iter().map(|t| t.action.as_str()).collect();
    assert_eq!(
        actions,
        ["pay", "change", "soda", "serveSoda", "open", "take"]
    );
}

#[test]
fn project_not_cancel_keeps_four_configurations() {
    let out = varmc(&["project", "vending.fts", "--constraint", "!c"]);
    assert_eq!(code(&out), 0);
    let (_, fts) = parse_model(&stdout(&out)).unwrap();
    assert_eq!(fts.space.len(), 4);
    let (_, vm) = bundled::vending().unwrap();
    let expected = vm.project_subset(&parse_feat_expr("!c").unwrap()).unwrap();
    assert!(varmc_core::models::fts_equivalent(&fts, &expected));
    assert!(!fts.has_errors());
}

#[test]
fn ignore_after_projection_gives_the_reduced_pair() {
    let run = |mode| {
        let out = varmc(&[
            "abstract",
            "vending.fts",
            "--constraint",
            "v & s",
            "--op",
            "ignore=t,f",
            "--mode",
            mode,
        ]);
        assert_eq!(code(&out), 0);
        parse_model(&stdout(&out)).unwrap()
    };
    let (may_doc, may) = run("may");
    let (must_doc, must) = run("must");
    for doc in [&may_doc, &must_doc] {
        assert_eq!(doc.features, ["v", "s", "c"]);
    }
    assert_eq!(may.space.len(), 2);
    assert_eq!(must.space.len(), 2);
    assert_eq!(may.transitions.len(), 13);
    assert_eq!(must.transitions.len(), 9);
}

#[test]
fn explain_attributes_paths() {
    let (code, report) = json(&["explain", "vending.fts", "1 -> 3 -> 5 -> 7 -> 3 loop 1"]);
    assert_eq!(code, 0);
    assert_eq!(report["attributed"], "f & s & c");
    assert_eq!(report["variants"].as_array().unwrap().len(), 2);

    let (_, pay) = json(&["explain", "vending.fts", "1 -pay-> 2"]);
    assert_eq!(pay["attributed"], "v");
    assert_eq!(pay["variants"].as_array().unwrap().len(), 8);

    let (_, twice) = json(&[
        "explain",
        "vending.fts",
        "1 -> 3 -> 5 -> 7 -> 3 -> 5 loop 2",
    ]);
    assert_eq!(twice["attributed"], report["attributed"]);
    assert_eq!(twice["variants"], report["variants"]);
}

#[test]
fn bench_small_counter_family() {
    let (code, report) = json(&["bench", "--n", "2", "--strategy", "brute"]);
    assert_eq!(code, 0);
    assert_eq!(report["variants"], 4);
    assert_eq!(report["runs"][0]["holds"], 4);

    let (code, report) = json(&[
        "bench",
        "--n",
        "2",
        "--property",
        "AF(x > 0)",
        "--strategy",
        "brute",
    ]);
    assert_eq!(code, 1);
    assert_eq!(report["runs"][0]["fails"], 1);
    assert_eq!(report["runs"][0]["holds"], 3);

    let (code, report) = json(&["bench", "--n", "10", "--strategy", "brute,join"]);
    assert_eq!(code, 0);
    assert_eq!(report["variants"], 1024);
    assert_eq!(report["identical"], true);

    let (code, report) = json(&["bench", "--n", "13", "--strategy", "brute,join"]);
    assert_eq!(code, 0);
    assert_eq!(report["runs"][0]["status"], "refused");
    assert_eq!(report["runs"][1]["status"], "ok");

    assert_eq!(code_of(&["bench", "--n", "18", "--state-budget", "100"]), 3);
    assert_eq!(code_of(&["bench", "--n", "0"]), 3);
}

#[test]
fn selftest_small_run_passes() {
    let (code, report) = json(&[
        "selftest",
        "--seed",
        "7",
        "--cases",
        "10",
        "--max-features",
        "1",
    ]);
    assert_eq!(code, 0, "{report:#}");
    assert_eq!(report["passed"], true);
    assert_eq!(report["suites"].as_array().unwrap().len(), 8);
}
