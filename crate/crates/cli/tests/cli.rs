use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use checkmat::patterns::gen_checkered;
use checkmat::{Alphabet, AlphabetKind, Matrix, Phase};
use serde_json::Value;
use tempfile::TempDir;

fn checkmat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_checkmat"))
        .args(args)
        .env_remove("CHECKMAT_TOL")
        .output()
        .expect("spawn checkmat")
}

fn stdout_of(args: &[&str]) -> String {
    let out = checkmat(args);
    assert!(
        out.status.success(),
        "checkmat {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json_of(args: &[&str]) -> Value {
    serde_json::from_str(&stdout_of(args)).unwrap()
}

fn code(args: &[&str]) -> i32 {
    checkmat(args).status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_zero_one_matches_worked_matrix() {
    let csv = stdout_of(&["gen", "4", "5", "--alphabet", "zero-one"]);
    assert_eq!(csv, "1,0,1,0,1\n0,1,0,1,0\n1,0,1,0,1\n0,1,0,1,0\n");
}

#[test]
fn gen_round_trips_through_csv() {
    for kind in ["zero-one", "plus-minus"] {
        for phase in ["high-first", "low-first"] {
            let csv = stdout_of(&["gen", "7", "11", "--alphabet", kind, "--phase", phase]);
            let parsed = Matrix::from_csv(&csv).unwrap();
            let kind = if kind == "zero-one" { AlphabetKind::ZeroOne } else { AlphabetKind::PlusMinus };
            let phase = if phase == "high-first" { Phase::HighFirst } else { Phase::LowFirst };
            assert_eq!(parsed, gen_checkered(7, 11, Alphabet::new(kind, phase)).unwrap());
        }
    }
}

#[test]
fn gen_renders_pgm_and_ascii() {
    let pgm = stdout_of(&["gen", "2", "3", "--format", "pgm"]);
    assert!(pgm.starts_with("P2\n3 2\n255\n"), "{pgm}");
    assert_eq!(pgm.lines().skip(3).collect::<Vec<_>>(), ["255 0 255", "0 255 0"]);

    let ascii = stdout_of(&["gen", "2", "2", "--format", "ascii"]);
    assert_eq!(ascii.trim_end(), "█ ·\n· █");
}

#[test]
fn rank_of_worked_matrix_is_two() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.csv", "1,0,1,0,1\n0,1,0,1,0\n1,0,1,0,1\n0,1,0,1,0\n");
    let report = json_of(&["rank", s(&a)]);
    assert_eq!(report["rank"], 2);
    assert_eq!(report["pivots"].as_array().unwrap().len(), 2);

    let echelon = dir.path().join("echelon.csv");
    stdout_of(&["rank", s(&a), "--echelon", s(&echelon)]);
    let e = Matrix::from_csv(&fs::read_to_string(&echelon).unwrap()).unwrap();
    assert_eq!(e.shape(), (4, 5));
    assert!(e.row(2).iter().chain(e.row(3).iter()).all(|&v| v == 0.0));
}

#[test]
fn tolerance_from_environment() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "m.csv", "1,0\n0,1e-6\n");
    assert_eq!(json_of(&["rank", s(&m)])["rank"], 2);

    let out = Command::new(env!("CARGO_BIN_EXE_checkmat"))
        .args(["rank", s(&m)])
        .env("CHECKMAT_TOL", "1e-3")
        .output()
        .unwrap();
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["rank"], 1);
    assert_eq!(report["tolerance"], 1e-3);

    // An explicit flag wins over the environment.
    let out = Command::new(env!("CARGO_BIN_EXE_checkmat"))
        .args(["rank", s(&m), "--tol", "1e-9"])
        .env("CHECKMAT_TOL", "1e-3")
        .output()
        .unwrap();
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["rank"], 2);
}

#[test]
fn sweep_three_points() {
    let csv = stdout_of(&["sweep-alpha", "6", "6", "--alphas", "0,0.5,1"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "alpha,analytic_rank,numerical_rank,min_pivot");
    let ranks: Vec<(&str, &str)> = lines[1..]
        .iter()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1], f[2])
        })
        .collect();
    assert_eq!(ranks, [("1", "1"), ("2", "2"), ("1", "1")]);
}

#[test]
fn sweep_without_alphas_is_header_only() {
    let csv = stdout_of(&["sweep-alpha", "6", "6"]);
    assert_eq!(csv, "alpha,analytic_rank,numerical_rank,min_pivot\n");
}

#[test]
fn sweep_grid_agrees_everywhere() {
    let csv = stdout_of(&["sweep-alpha", "6", "6", "--grid", "-2,3,101", "--tol", "1e-9"]);
    let rows: Vec<Vec<String>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    assert_eq!(rows.len(), 101);
    for r in &rows {
        let alpha: f64 = r[0].parse().unwrap();
        let expected = if alpha == 0.0 || alpha == 1.0 { "1" } else { "2" };
        assert_eq!(r[1], expected, "alpha {alpha}");
        assert_eq!(r[1], r[2], "alpha {alpha}");
    }
}

#[test]
fn factor_json_reconstructs_pattern() {
    let v = json_of(&["factor", "3", "4", "--pattern", "zero-one"]);
    let factors = v["factors"].as_array().unwrap();
    assert_eq!(factors.len(), 2);
    let expected = gen_checkered(3, 4, Alphabet::ZERO_ONE).unwrap();
    for i in 0..3 {
        for j in 0..4 {
            let sum: f64 = factors
                .iter()
                .map(|f| {
                    let sigma = f["sigma"].as_f64().unwrap();
                    (sigma * f["left"][i].as_f64().unwrap()) * f["right"][j].as_f64().unwrap()
                })
                .sum();
            assert_eq!(sum, expected.get(i, j), "({i},{j})");
        }
    }
}

#[test]
fn svd_of_zero_matrix() {
    let dir = TempDir::new().unwrap();
    let z = write(dir.path(), "z.csv", "0,0,0\n0,0,0\n");
    let v = json_of(&["svd", s(&z)]);
    let sigmas = v["singular_values"].as_array().unwrap();
    assert_eq!(sigmas.len(), 2);
    assert!(sigmas.iter().all(|x| x.as_f64() == Some(0.0)));
}

#[test]
fn bench_flop_ratio() {
    let csv = stdout_of(&["bench", "--sizes", "30x30", "--rank", "1", "--trials", "1"]);
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..4], ["30x30", "1", "90", "1770"]);
    assert_eq!(row[4].parse::<f64>().unwrap(), 90.0 / 1770.0);
}

#[test]
fn embed_then_retrieve_recovers_block() {
    let dir = TempDir::new().unwrap();
    for (alphabet, fill, components) in [("plus-minus", 0.0, 2), ("zero-one", 0.5, 3)] {
        let e = dir.path().join(format!("{alphabet}.csv"));
        let spec = dir.path().join(format!("{alphabet}.json"));
        stdout_of(&[
            "embed", "30", "30", "--alphabet", alphabet, "--out", s(&e), "--spec-out", s(&spec),
        ]);
        let spec: Value = serde_json::from_str(&fs::read_to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec["block_top_left"], serde_json::json!([14, 14]));

        let report = json_of(&["retrieve", s(&e), "--alphabet", alphabet]);
        assert_eq!(report["block"]["top_left"], serde_json::json!([14, 14]));
        assert_eq!(report["block"]["dims"], serde_json::json!([2, 2]));
        assert!((report["fill_value"].as_f64().unwrap() - fill).abs() < 1e-6);
        assert_eq!(report["svd_sigmas"].as_array().unwrap().len(), components);
    }
}

#[test]
fn retrieve_pristine_pattern_has_empty_payload() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("p.csv");
    stdout_of(&["gen", "12", "9", "--alphabet", "zero-one", "--out", s(&p)]);
    let report = json_of(&["retrieve", s(&p), "--alphabet", "zero-one"]);
    assert!(report["payload_sigmas"].as_array().unwrap().is_empty());
    assert!(report["block"].is_null());
}

#[test]
fn retrieve_writes_component_panels() {
    let dir = TempDir::new().unwrap();
    for (alphabet, expected) in [("zero-one", 3), ("plus-minus", 2)] {
        let e = dir.path().join(format!("{alphabet}.csv"));
        let panels = dir.path().join(alphabet);
        stdout_of(&["embed", "30", "30", "--alphabet", alphabet, "--out", s(&e)]);
        stdout_of(&["retrieve", s(&e), "--alphabet", alphabet, "--components-dir", s(&panels)]);
        let count = fs::read_dir(&panels)
            .unwrap()
            .filter(|f| f.as_ref().unwrap().file_name().to_string_lossy().starts_with("component_"))
            .count();
        assert_eq!(count, expected, "{alphabet}");
        for name in ["input.pgm", "background.pgm", "payload.pgm"] {
            let body = fs::read_to_string(panels.join(name)).unwrap();
            assert!(body.starts_with("P2\n30 30\n255\n"), "{name}");
        }
    }
}

#[test]
fn render_csv_input() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "m.csv", "0,1\n2,3\n");
    let pgm = stdout_of(&["render", s(&m), "--format", "pgm"]);
    assert_eq!(pgm, "P2\n2 2\n255\n0 85\n170 255\n");
    let fixed = stdout_of(&["render", s(&m), "--format", "pgm", "--range", "0,6"]);
    assert!(fixed.ends_with("0 43\n85 128\n"), "{fixed}");
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let e = dir.path().join("e.csv");
    stdout_of(&["embed", "16", "20", "--alphabet", "zero-one", "--block", "3x2", "--out", s(&e)]);
    for args in [
        vec!["svd", s(&e)],
        vec!["rank", s(&e)],
        vec!["retrieve", s(&e), "--alphabet", "zero-one"],
        vec!["render", s(&e), "--format", "pgm"],
        vec!["factor", "9", "13", "--pattern", "ones"],
        vec!["sweep-alpha", "5", "7", "--grid", "-1,2,31"],
    ] {
        assert_eq!(stdout_of(&args), stdout_of(&args), "{args:?}");
    }
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&["gen", "2", "2"]), 0);
    assert_eq!(code(&["--help"]), 0);

    // Usage: unknown subcommand, bad flag value, empty dimension.
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["gen", "2", "2", "--alphabet", "ternary"]), 1);
    assert_eq!(code(&["gen", "0", "3"]), 1);

    // I/O: missing file, ragged and non-numeric CSV.
    assert_eq!(code(&["rank", s(&dir.path().join("absent.csv"))]), 2);
    let ragged = write(dir.path(), "ragged.csv", "1,2\n3\n");
    let out = checkmat(&["rank", s(&ragged)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let junk = write(dir.path(), "junk.csv", "1,2\n3,x\n");
    assert_eq!(code(&["svd", s(&junk)]), 2);

    // Numeric: sweep budget exhausted.
    let hilbert: String = (0..6)
        .map(|i| (0..6).map(|j| format!("{}", 1.0 / (i + j + 1) as f64)).collect::<Vec<_>>().join(",") + "\n")
        .collect();
    let h = write(dir.path(), "h.csv", &hilbert);
    assert_eq!(code(&["svd", s(&h), "--tol", "1e-15", "--max-sweeps", "1"]), 3);

    // Classification: a generic matrix has components that are neither
    // background nor payload.
    let generic: String = (0..6)
        .map(|i| (0..6).map(|j| ((i * 5 + j * 3) % 7).to_string()).collect::<Vec<_>>().join(",") + "\n")
        .collect();
    let g = write(dir.path(), "g.csv", &generic);
    let out = checkmat(&["retrieve", s(&g), "--alphabet", "plus-minus"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("component"));
}
