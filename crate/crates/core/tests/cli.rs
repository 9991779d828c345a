use std::path::Path;
use std::process::{Command, Output};

use blockgraver::format::parse_matrix;
use blockgraver::lowerbound::gen_harmonic;

fn blockgraver(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blockgraver")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const INFEASIBLE: &str = r#"
kind = "two-stage"
n = 1
r = 1
s = 1
t = 1
a_blocks = [[[1]]]
b_blocks = [[[1]]]
rhs = [5]
lower = [0, 0]
upper = [1, 1]
objective = [1, 1]
"#;

#[test]
fn missing_file_is_an_io_error() {
    let out = blockgraver(&["solve", "missing.file"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.file"));
}

#[test]
fn harmonic_certificate_for_three() {
    let out = blockgraver(&["lb-gen", "--family", "harmonic", "--delta", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# min_first_coordinate = 6"), "{text}");
    assert!(text.contains("# witness = [6, 3, 2]"));
    // The certificate lines are comments, so the output is a matrix file.
    assert_eq!(parse_matrix(&text).unwrap(), gen_harmonic(3).unwrap());
}

#[test]
fn gen_instance_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.toml");
    let b = dir.path().join("b.toml");
    for path in [&a, &b] {
        let out = blockgraver(&["gen-instance", "--seed", "7", "--n", "3", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let other = blockgraver(&["gen-instance", "--seed", "8", "--n", "3"]);
    assert_ne!(std::fs::read(&a).unwrap(), other.stdout);
}

#[test]
fn exit_code_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let feasible = String::from_utf8(blockgraver(&["gen-instance", "--seed", "1"]).stdout).unwrap();
    let feasible = write(dir.path(), "feasible.toml", &feasible);
    let infeasible = write(dir.path(), "infeasible.toml", INFEASIBLE);
    let floats = write(dir.path(), "floats.toml", &INFEASIBLE.replace("rhs = [5]", "rhs = [5.0]"));
    let broken = write(dir.path(), "broken.toml", "kind = \"two-stage\"\nn = ");
    let tree = String::from_utf8(blockgraver(&["gen-instance", "--seed", "2", "--tree"]).stdout).unwrap();
    let tree = write(dir.path(), "tree.toml", &tree);

    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["solve", &feasible], 0),
        (vec!["solve", &feasible, "--tree"], 0),
        (vec!["solve", &tree], 0),
        (vec!["solve", &feasible, "--exact-L"], 0),
        (vec!["solve", &feasible, "--exact-L", "3"], 0),
        (vec!["solve", "--seed", "47"], 0),
        (vec!["solve", &infeasible], 2),
        (vec!["solve", &infeasible, "--tree"], 2),
        (vec!["solve", "--seed", "47", "--max-iter", "1"], 3),
        (vec!["solve", &floats], 4),
        (vec!["solve", &broken], 4),
        (vec!["graver", &broken], 4),
        (vec!["solve"], 1),
        (vec!["solve", &feasible, "--exact-L", "0"], 1),
        (vec!["solve", &feasible, "--max-iter", "0"], 1),
        (vec!["frobnicate"], 1),
        (vec!["lb-gen", "--family", "cubic", "--delta", "2"], 1),
        (vec!["--help"], 0),
        (vec!["solve", "--help"], 0),
    ];
    for (args, code) in cases {
        let out = blockgraver(&args);
        assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn report_is_stable_and_timing_goes_to_stderr() {
    let a = blockgraver(&["solve", "--seed", "47", "--report"]);
    let b = blockgraver(&["solve", "--seed", "47", "--report", "--parallel-width", "1"]);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("[report]\nstatus = \"optimal\""));
    assert_eq!(text.matches("[[augmentation]]").count(), 2);
    assert!(!text.contains("wall"));
    assert!(String::from_utf8_lossy(&a.stderr).contains("wall time"));
}

#[test]
fn structural_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let cones = write(
        dir.path(),
        "cones.toml",
        "dim = 1\ndelta = 3\n[[set]]\ngenerators = [[2]]\n[[set]]\ngenerators = [[3]]\n",
    );
    let out = blockgraver(&["cone-intersect", &cones]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("vector = [6]\nwitnesses = [[3], [2]]"), "{text}");

    let vectors = write(dir.path(), "v.toml", "vectors = [[2, 0], [-2, 0], [0, 2], [0, -2]]\n");
    let text = String::from_utf8(blockgraver(&["steinitz", &vectors]).stdout).unwrap();
    assert!(text.contains("within_bound = true"), "{text}");

    let sets = write(
        dir.path(),
        "m.toml",
        "dim = 1\ndelta = 3\n[[multiset]]\nvectors = [[3], [3]]\n[[multiset]]\nvectors = [[2], [2], [2]]\n",
    );
    let text = String::from_utf8(blockgraver(&["verify-lemma1", &sets]).stdout).unwrap();
    assert!(text.contains("common_sum = [6]") && text.contains("bound_check = \"pass\""), "{text}");

    let matrix = write(dir.path(), "a.toml", "entries = [[1, 1, 1]]\n");
    let text = String::from_utf8(blockgraver(&["graver", &matrix]).stdout).unwrap();
    assert!(text.contains("count = 6") && text.contains("truncated = false"), "{text}");
}
