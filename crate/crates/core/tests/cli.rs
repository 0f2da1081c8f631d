use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("corpus")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn imprex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imprex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> String {
    let dir = std::env::temp_dir().join(format!("imprex-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn eval_reports_both_routes() {
    let out = imprex(&[
        "eval",
        "--tree",
        &corpus("two_vertex.json"),
        "--var",
        &corpus("variables_binary.json"),
        "--name",
        "same_twice",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let r = &v["results"][0];
    let game = r["game"]["upper"]["value"].as_f64().unwrap();
    assert!((game - 0.67).abs() < 1e-9, "{game}");
    assert!(r["oracle"]["upper"].is_object());
}

#[test]
fn reach_is_certain_on_the_fair_coin() {
    let out = imprex(&[
        "eval",
        "--tree",
        &corpus("fair_coin.json"),
        "--var",
        &corpus("variables_binary.json"),
        "--name",
        "reach_b",
        "--route",
        "game",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let value = json(&out)["results"][0]["game"]["lower"]["value"].as_f64().unwrap();
    assert!((value - 1.0).abs() < 1e-6);
}

#[test]
fn supermartingale_round_trip() {
    let path = scratch("witness.json");
    let base = [
        "supermartingale",
        "--tree",
        &corpus("two_vertex.json"),
        "--var",
        &corpus("variables_binary.json"),
        "--name",
        "same_twice",
    ];
    let export = imprex(&[&base[..], &["--export", &path]].concat());
    assert_eq!(export.status.code(), Some(0), "{}", String::from_utf8_lossy(&export.stderr));

    let verify = imprex(&[&base[..], &["--verify", &path]].concat());
    assert_eq!(verify.status.code(), Some(0));
    let v = json(&verify);
    assert_eq!(v["hedging"]["verdict"], "no_counterexample_found");
    assert_eq!(v["hedging"]["exhaustive"], true);

    // Lowering the root capital breaks the supermartingale inequality there.
    let mut file: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let root = &mut file["values"][0][1];
    *root = serde_json::json!(root.as_f64().unwrap() - 0.5);
    let bad = scratch("tampered.json");
    std::fs::write(&bad, file.to_string()).unwrap();
    let verify = imprex(&[&base[..], &["--verify", &bad]].concat());
    assert_eq!(verify.status.code(), Some(1));
}

#[test]
fn injected_fault_exits_with_violations() {
    let tree = corpus("two_vertex.json");
    let clean = imprex(&["check", "axioms", "--tree", &tree, "--samples", "20"]);
    assert_eq!(clean.status.code(), Some(0));
    let faulty = imprex(&["check", "axioms", "--tree", &tree, "--samples", "20", "--fault", "negated"]);
    assert_eq!(faulty.status.code(), Some(1));
    assert!(!json(&faulty)[0]["violations"].as_array().unwrap().is_empty());
    assert!(String::from_utf8_lossy(&faulty.stderr).starts_with("FAIL"));
}

#[test]
fn bad_input_exits_with_error() {
    let out = imprex(&["eval", "--tree", "/nonexistent/tree.json", "--var", "/nonexistent/var.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seed_comes_from_environment() {
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_imprex"))
            .args(["check", "coherence", "--tree", &corpus("two_vertex.json")])
            .env("IMPREX_SEED", seed)
            .output()
            .unwrap()
    };
    let v = json(&run("11"));
    assert_eq!(v[0]["seed"], 11);
    assert_eq!(v[0]["config"]["seed"], 11);
}
