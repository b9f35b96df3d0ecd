//! CLI surface tests: exit codes, report files, and the self-containedness
//! of machine-readable reports (every recorded certificate can be recomputed
//! from the report's own inputs).

use myoeq::cli::run;
use myoeq::document::{parse_document, GameDocument};
use myoeq::myopic::equilibrium_residual;
use myoeq::profile::MixedProfile;

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn argv(parts: &[&str]) -> Vec<String> {
    std::iter::once("myoeq")
        .chain(parts.iter().cloned())
        .map(String::from)
        .collect()
}

#[test]
fn project_command() {
    assert_eq!(run(argv(&["project", "2,0"])), 0);
    assert_eq!(run(argv(&["project", "2,oops"])), 2);
}

#[test]
fn solve_report_is_self_contained() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let code = run(argv(&[
        "solve",
        &fixture("voting1.game"),
        "--seed",
        "5",
        "--json-out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["seed"], 5);
    assert!(report["certificates"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["pass"].as_bool().unwrap()));

    // recompute the recorded residual from the report's own input source
    let source = report["input_source"].as_str().unwrap();
    let GameDocument::Myopic(doc) = parse_document(source).unwrap() else {
        panic!("embedded source is not a myopic document");
    };
    let game = doc.compile().unwrap();
    let eq = &report["results"]["equilibria"][0];
    let profile: MixedProfile = serde_json::from_value(eq["profile"].clone()).unwrap();
    let recomputed = equilibrium_residual(&profile, &game.family, 1e-9).unwrap();
    let recorded = eq["residual"].as_f64().unwrap();
    assert!((recomputed - recorded).abs() < 1e-15);
    // the reported equilibrium and contrast match the document's story
    assert!((profile.prob(0, 0) - 1.0).abs() < 1e-6);
    assert!((report["results"]["contrast"]["value"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn solve_voting2_contrast() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    assert_eq!(
        run(argv(&[
            "solve",
            &fixture("voting2.game"),
            "--json-out",
            out.to_str().unwrap(),
        ])),
        0
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let eq = &report["results"]["equilibria"][0];
    let profile: MixedProfile = serde_json::from_value(eq["profile"].clone()).unwrap();
    assert!((profile.prob(0, 0) - 0.2).abs() < 1e-6);
    let contrast = &report["results"]["contrast"];
    let opt: MixedProfile = serde_json::from_value(contrast["profile"].clone()).unwrap();
    assert!((opt.prob(0, 0) - 0.1).abs() < 1e-3);
    assert!((contrast["value"].as_f64().unwrap() - 0.05).abs() < 1e-6);
}

#[test]
fn value_command_both_forms() {
    assert_eq!(run(argv(&["value", &fixture("pennies.matrix")])), 0);
    assert_eq!(
        run(argv(&["value", &fixture("neyman_third.game"), "--p", "0.3,0.7"])),
        0
    );
    assert_eq!(
        run(argv(&["value", &fixture("neyman_third.game"), "--p", "0.3,0.3,0.4"])),
        2
    );
}

#[test]
fn structure_roundtrip_flag() {
    assert_eq!(
        run(argv(&[
            "structure",
            &fixture("voting1.game"),
            "--check-roundtrip",
            "--samples",
            "10",
        ])),
        0
    );
}

#[test]
fn tree_solve_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tree.json");
    assert_eq!(
        run(argv(&[
            "tree-solve",
            &fixture("composite_demo.game"),
            "--json-out",
            out.to_str().unwrap(),
        ])),
        0
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report["results"]["epsilons"].as_array().unwrap().len() >= 2);
}

#[test]
fn verify_plan_and_failure_exit_code() {
    assert_eq!(run(argv(&["verify-plan", &fixture("plan_demo.game")])), 0);

    // breaking the plan's y must flip the exit code to the numeric class
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.game");
    let text = std::fs::read_to_string(fixture("plan_demo.game")).unwrap();
    std::fs::write(&broken, text.replace("y = [0.3, 0.3]", "y = [0.5, 0.3]")).unwrap();
    assert_eq!(run(argv(&["verify-plan", broken.to_str().unwrap()])), 3);
}

#[test]
fn configuration_errors_use_exit_code_two() {
    // malformed document
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.game");
    std::fs::write(&bad, "schema = 9\nkind = \"myopic\"\n").unwrap();
    assert_eq!(run(argv(&["solve", bad.to_str().unwrap()])), 2);
    // missing file
    assert_eq!(run(argv(&["solve", "/nonexistent/x.game"])), 2);
    // wrong document kind for the command
    assert_eq!(run(argv(&["tree-solve", &fixture("voting1.game")])), 2);
    // unknown flags
    assert_eq!(run(argv(&["solve", "--bogus"])), 2);
}
