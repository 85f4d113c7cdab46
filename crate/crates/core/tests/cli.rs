use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn isosym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isosym"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn write(path: &Path, body: &str) -> String {
    std::fs::write(path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn profile_table_shape_and_symmetry() {
    let out = isosym(&["profile", "--r", "2", "--grid", "16"]);
    assert!(out.status.success());
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(header, ["t", "I", "asymptotic", "ratio"]);
    assert_eq!(rows.len(), 16);
    let num = |s: &str| s.parse::<f64>().unwrap();
    let first = &rows[0];
    assert!((num(&first[3]) - 1.0).abs() < 0.2, "{first:?}");
    for (a, b) in rows.iter().zip(rows.iter().rev()) {
        if (num(&a[0]) + num(&b[0]) - 1.0).abs() < 1e-12 {
            assert!((num(&a[1]) - num(&b[1])).abs() < 1e-10);
        }
    }

    let out = isosym(&["profile", "--r", "1", "--grid", "16"]);
    let (_, rows) = csv_rows(&stdout(&out));
    assert!(rows.iter().all(|r| r[2].is_empty() && r[3].is_empty()));
}

#[test]
fn verify_of_a_constant_passes() {
    let dir = tempfile::tempdir().unwrap();
    let body: String = std::iter::once("value,grad\n".to_string())
        .chain((0..200).map(|_| "2.0,0.0\n".to_string()))
        .collect();
    let input = write(&dir.path().join("c.csv"), &body);
    let report = dir.path().join("r.json");
    let summary = dir.path().join("s.csv");
    let out = isosym(&[
        "verify",
        "--skip-builtin",
        "--r",
        "1.5",
        "--dim",
        "1",
        "--in",
        &input,
        "--out",
        report.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["schema"], 1);
    let reports = json["reports"].as_array().unwrap();
    assert!(!reports.is_empty());
    assert!(reports.iter().all(|r| r["pass"] == true));
    let (header, rows) = csv_rows(&std::fs::read_to_string(&summary).unwrap());
    assert_eq!(header[0], "checker");
    assert_eq!(rows.len(), reports.len());
}

#[test]
fn verify_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = isosym(&[
            "verify",
            "--r",
            "2",
            "--dim",
            "2",
            "--points",
            "20000",
            "--seed",
            "3",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.code().is_some_and(|c| c <= 1));
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn oracle_against_continuum_profile() {
    let dir = tempfile::tempdir().unwrap();
    let space = write(
        &dir.path().join("grid.json"),
        r#"{"grid": {"r": 1.0, "lo": -0.99, "hi": 0.99, "count": 12}}"#,
    );
    let out = isosym(&["oracle", "--in", &space, "--grid", "16"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["points"], 12);
    let rows = json["continuum"].as_array().unwrap();
    let errors: Vec<f64> = rows
        .iter()
        .filter(|r| {
            let m = r["measure"].as_f64().unwrap();
            m > 0.2 && m < 0.8
        })
        .map(|r| r["relative_error"].as_f64().unwrap())
        .collect();
    assert!(!errors.is_empty());
    assert!(errors.iter().all(|&e| e < 0.1), "{errors:?}");
}

#[test]
fn oracle_refuses_large_spaces() {
    let dir = tempfile::tempdir().unwrap();
    let coords: Vec<String> = (0..23).map(|i| i.to_string()).collect();
    let space = write(
        &dir.path().join("big.json"),
        &format!(r#"{{"coords": [{}], "h": 1.0}}"#, coords.join(",")),
    );
    let out = isosym(&["oracle", "--in", &space]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("22"));
}

#[test]
fn rearrange_norms_and_sample() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        &dir.path().join("f.csv"),
        "value,grad,weight\n1,1,0.25\n-3,0,0.25\n2,2,0.5\n",
    );
    let out = isosym(&["rearrange", "--in", &input]);
    assert!(out.status.success());
    let (_, rows) = csv_rows(&stdout(&out));
    let values: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(values, [3.0, 2.0, 1.0]);

    let out = isosym(&["norms", "--in", &input, "--norm", "L1", "--norm", "Linf"]);
    assert!(out.status.success());
    let json: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let norms = json["norms"].as_array().unwrap();
    assert!((norms[0]["value"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(norms[1]["value"].as_f64().unwrap(), 3.0);
    assert_eq!(norms[1]["gradient"].as_f64().unwrap(), 2.0);

    let sampled = dir.path().join("s.csv");
    let out = isosym(&[
        "sample",
        "--function",
        "clamped_ramp",
        "--points",
        "500",
        "--dim",
        "2",
        "--out",
        sampled.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let (header, rows) = csv_rows(&std::fs::read_to_string(&sampled).unwrap());
    assert_eq!(header, ["value", "grad", "weight"]);
    assert_eq!(rows.len(), 500);
    assert!(rows
        .iter()
        .all(|r| r[0].parse::<f64>().unwrap().abs() <= 1.0));
}

#[test]
fn bad_arguments_exit_with_two() {
    for args in [
        &["profile", "--r", "2.5"][..],
        &["norms"],
        &["rearrange", "--in", "/nonexistent/f.csv"],
    ] {
        let out = isosym(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}
