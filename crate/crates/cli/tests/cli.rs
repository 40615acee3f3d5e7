use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treefiid")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("treefiid-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Data rows of a table report, split on whitespace.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(String::from).collect())
        .collect()
}

fn header(text: &str, key: &str) -> String {
    let prefix = format!("# {key} = ");
    text.lines().find_map(|l| l.strip_prefix(&prefix)).unwrap_or_else(|| panic!("no `{key}` in\n{text}")).to_string()
}

#[test]
fn spectrum_moments_table() {
    let o = run(&["spectrum", "--d", "3", "--moments", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 11);
    assert_eq!(r[2][0], "2");
    assert_eq!(r[2][1].parse::<f64>().unwrap(), 3.0);
    assert_eq!(r[2][2], "3");
    assert!(r.iter().all(|row| row[4] == "true"));
}

#[test]
fn spectrum_density_points() {
    let o = run(&["spectrum", "--d", "3", "--density", "--points", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 100);
    assert_eq!(r[0][1].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn usage_errors_exit_2() {
    let o = run(&["spectrum", "--d", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("degree"));
    assert_eq!(run(&["spectrum", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--process", "gauss-markov"]).status.code(), Some(2));
    let o = run(&["simulate", "--process", "iid", "--depth", "3", "--max-n", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn synthesize_gauss_markov() {
    let o = run(&["synthesize", "gauss_markov:0.5", "--d", "3", "--radius", "40"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(header(&text, "d"), "3");
    assert_eq!(header(&text, "R"), "40");
    assert!(header(&text, "truncation_error").parse::<f64>().unwrap() <= 1e-4);
    let r = rows(&text);
    assert_eq!(r.len(), 41);
    assert_eq!(r[3][2], "12");
}

#[test]
fn synthesize_constant_is_identity() {
    let o = run(&["synthesize", "constant:1", "--radius", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 1);
    assert!((r[0][1].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn synthesize_refuses_atoms() {
    let o = run(&["synthesize", "atom:2.0", "--d", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("classification: WeakLimitOnly"), "{e}");
    assert!(e.contains("not absolutely continuous"), "{e}");
}

#[test]
fn simulate_gauss_markov() {
    let args = [
        "simulate",
        "--process",
        "gauss-markov",
        "--rho",
        "0.5",
        "--d",
        "3",
        "--depth",
        "8",
        "--samples",
        "100000",
        "--seed",
        "7",
    ];
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    let four = &r[4];
    assert_eq!(four[0], "4");
    assert!((four[1].parse::<f64>().unwrap() - 0.0625).abs() < 0.01);
    assert_eq!(four[3].parse::<f64>().unwrap(), 0.0625);
    assert_eq!(four[5], "true");
}

#[test]
fn simulate_is_deterministic() {
    let args = ["simulate", "--process", "ising", "--rho", "0.4", "--depth", "4", "--samples", "20000", "--seed", "3"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let r = rows(&stdout(&a));
    assert!((r[2][1].parse::<f64>().unwrap() - 0.16).abs() < 0.03);
    assert_eq!(r[2][5], "true");
}

#[test]
fn linear_factor_from_coefficient_file() {
    let path = scratch("coeffs.txt");
    let p = path.to_str().unwrap();
    let o = run(&["synthesize", "gauss_markov:0.5", "--radius", "6", "--out", p]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    let o = run(&["simulate", "--process", "linear-factor", "--coeffs", p, "--depth", "8", "--samples", "20000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 3);
    assert!((r[1][3].parse::<f64>().unwrap() - 0.5).abs() < 0.01);
    let o = run(&["simulate", "--process", "linear-factor", "--coeffs", p, "--depth", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dbar_reports() {
    let o = run(&["dbar", "atom:2.0", "atom:2.2", "--d", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let t = stdout(&o);
    let bound: f64 = header(&t, "dbar_lower_bound").parse().unwrap();
    assert!((bound - 2f64.sqrt()).abs() < 1e-9);
    assert_eq!(header(&t, "orthogonal_in_every_coupling"), "true");

    let t = stdout(&run(&["dbar", "gauss_markov:0.3", "gauss_markov:0.3"]));
    assert_eq!(header(&t, "dbar_lower_bound").parse::<f64>().unwrap(), 0.0);

    let o = run(&["dbar", "gauss_markov:0.3", "gauss_markov:0.6", "--format", "doc"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let b = doc["dbar_lower_bound"].as_f64().unwrap();
    assert!(b > 0.0 && b < 2f64.sqrt());
    assert_eq!(doc["orthogonal_in_every_coupling"], serde_json::json!(false));
}

#[test]
fn dbar_degree_mismatch() {
    let x = scratch("x.toml");
    let y = scratch("y.toml");
    std::fs::write(&x, "degree = 3\n[density]\nkind = \"constant\"\nparameters = [1.0]\n").unwrap();
    std::fs::write(&y, "degree = 4\n[density]\nkind = \"constant\"\nparameters = [1.0]\n").unwrap();
    let o = run(&["dbar", x.to_str().unwrap(), y.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn classify_examples() {
    let c = |m: &str| header(&stdout(&run(&["classify", m, "--d", "3"])), "classification");
    assert_eq!(c("gauss_markov:0.5"), "FactorOfIID");
    assert_eq!(c("atom:2.8"), "WeakLimitOnly");
    assert_eq!(c("atom:3.0"), "NotWeakLimit");
}

#[test]
fn classify_spec_file_and_parse_errors() {
    let good = scratch("good.toml");
    std::fs::write(&good, "degree = 3\n\n[[atoms]]\nlocation = 2.8\nmass = 1.0\n").unwrap();
    let o = run(&["classify", good.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(header(&stdout(&o), "classification"), "WeakLimitOnly");

    let bad = scratch("bad.toml");
    std::fs::write(&bad, "degree = 3\n[density]\nkind = \"gauss_markov\"\nparameters = [0.5,\n").unwrap();
    let o = run(&["classify", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));

    let wrong = scratch("wrong.toml");
    std::fs::write(&wrong, "degree = 3\n[density]\nkind = \"gauss_markov\"\nparameters = [0.5, 0.1]\n").unwrap();
    let o = run(&["classify", wrong.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("density.parameters"), "{}", stderr(&o));
}
