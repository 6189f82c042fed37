use std::path::PathBuf;
use std::process::{Command, Output};

fn data(rel: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", rel].iter().collect();
    p.to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubic-bm")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn example(name: &str) -> (String, String) {
    (data(&format!("sextics/{name}.sextic")), data(&format!("surfaces/{name}.surface")))
}

#[test]
fn census_summary() {
    let text = stdout(&["census"]);
    assert!(text.starts_with("cubic-bm report v1\n# manifest {"));
    assert!(text.contains("158 classes / 56 sixer / 26 extra-trivial / 76 nontrivial\n"));
    assert_eq!(text, stdout(&["census"]));
}

#[test]
fn published_critical_lists() {
    let (f, s) = example("sqrt10");
    let text = stdout(&["surface", "--sextic", &f, "--surface", &s, "--annotate", "9265613761"]);
    assert!(text.ends_with("L = {2}\n"), "{text}");
    let (f, s) = example("sqrtm15");
    let text = stdout(&["surface", "--sextic", &f, "--surface", &s]);
    assert!(text.ends_with("L = {3, inf}\n"), "{text}");
}

#[test]
fn usage_and_input_errors() {
    let (_, s) = example("sqrt10");
    let out = run(&["surface", "--surface", &s]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--sextic"));

    let out = run(&["surface", "--sextic", &s, "--surface", &s]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"), "{}", String::from_utf8_lossy(&out.stderr));

    let out = run(&["search", "--surface", "/nonexistent/file", "--bound", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn resource_limit_exit_code() {
    let out = run(&["census", "--max-seconds", "0"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("resource limit"));
}

#[test]
fn fractions_from_published_tables() {
    let t = |n: &str| data(&format!("mass_tables/{n}.mass"));
    let text =
        stdout(&["evaluate", "--published-tables", "--table", &t("sqrt2_triple_p2"), "--table", &t("sqrt2_triple_p5")]);
    assert!(text.contains("fraction 111/340  [computed]"), "{text}");
    assert!(text.contains("[paper-published]"));
    let text = stdout(&["evaluate", "--table", &t("sqrt2_a6_p2"), "--table", &t("sqrt2_a6_p3")]);
    assert!(text.contains("fraction 4/7  [computed]"));
    assert!(text.contains("[user-supplied]"));
    let text = stdout(&["evaluate"]);
    assert!(text.contains("critical places: 0\nfraction 1/1"));
}

#[test]
fn peyre_report() {
    let (f, s) = example("sqrt10");
    let text = stdout(&["peyre", "--sextic", &f, "--surface", &s, "--tau-published", "1.7005", "--cutoff", "2000"]);
    for line in [
        "alpha          1/3 [computed]",
        "beta           2 [computed]",
        "tau_published  1.7005 [paper-published]",
        "predicted_count(4000) = 6802  [from paper-published tau]",
        "heuristic truncation",
        "adelic_mass    absent",
    ] {
        assert!(text.contains(line), "{line:?} missing from\n{text}");
    }
    let (f, s) = example("sqrt2_triple");
    let text = stdout(&[
        "peyre",
        "--sextic",
        &f,
        "--surface",
        &s,
        "--cutoff",
        "2000",
        "--l-value",
        "1/2",
        "--adelic-mass",
        "3",
    ]);
    assert!(text.contains("beta           4 [computed]"));
    assert!(text.contains("tau_recomputed 2/1 [computed]"), "{text}");
}

#[test]
fn reports_are_byte_identical_across_thread_counts() {
    let (_, s) = example("sqrt2_a6");
    let one = stdout(&["--threads", "1", "search", "--surface", &s, "--bound", "30"]);
    let four = stdout(&["--threads", "4", "search", "--surface", &s, "--bound", "30"]);
    assert_eq!(one, four);
    let (f, s) = example("sqrtm3");
    let args = ["count", "--surface", &s, "--sextic", &f, "--prime", "7", "--real-samples", "4000", "--seed", "9"];
    assert_eq!(stdout(&args), stdout(&[&["--threads", "3"], &args[..]].concat()));
}

#[test]
fn point_files() {
    let (_, s) = example("sqrtm5");
    let dir = std::env::temp_dir().join(format!("cubic-bm-points-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("points.txt");
    let text = stdout(&["search", "--surface", &s, "--bound", "12", "--points", path.to_str().unwrap()]);
    let count: usize = text
        .lines()
        .find_map(|l| l.strip_prefix("count "))
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    let points = std::fs::read_to_string(&path).unwrap();
    assert_eq!(points.lines().count(), count);
    assert!(points.lines().all(|l| l.split_whitespace().filter(|t| t.parse::<i64>().is_ok()).count() == 4));
    std::fs::remove_dir_all(dir).unwrap();
}
