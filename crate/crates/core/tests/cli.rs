use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn sparsedom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparsedom"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn every_subcommand_writes_report_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    for sub in [
        "domination",
        "norm",
        "modular",
        "median",
        "hp-compare",
        "weights",
        "young",
    ] {
        let out_dir = dir.path().join(sub);
        let config = configs().join(format!("{sub}.toml"));
        let out = sparsedom(&[
            sub,
            "--config",
            config.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--resolution",
            "7",
            "--trials",
            "8",
            "--seed",
            "3",
            "--quiet",
        ]);
        assert!(out.status.code().is_some_and(|c| c <= 1), "{sub}: {}", stderr(&out));
        assert!(out.stdout.is_empty(), "{sub}: --quiet still printed");

        let report: serde_json::Value =
            serde_json::from_slice(&std::fs::read(out_dir.join("report.json")).unwrap()).unwrap();
        assert_eq!(report["experiment"], sub);
        assert_eq!(report["config_digest"].as_str().unwrap().len(), 64);
        assert!(report["rows"].as_array().is_some_and(|r| !r.is_empty()), "{sub}");
        for key in ["max_ratio", "empirical_C", "characteristics"] {
            assert!(report["summary"].get(key).is_some(), "{sub}: summary.{key}");
        }

        let csv = std::fs::read_to_string(out_dir.join("rows.csv")).unwrap();
        assert_eq!(csv.lines().next(), Some("trial,lhs,rhs,ratio,notes"));
        assert_eq!(csv.lines().count(), report["rows"].as_array().unwrap().len() + 1);
    }
}

#[test]
fn young_kit_on_half_square_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "kind = \"young\"\nphi.kind = \"power\"\nphi.p = 2.0\nphi.coef = 0.5\n",
    );
    let out_dir = dir.path().join("out");
    let out = sparsedom(&["young", "--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("report.json")).unwrap()).unwrap();
    let ratio = report["summary"]["characteristics"]["max_inverse_product_ratio"]
        .as_f64()
        .unwrap();
    assert!((ratio - 2.0).abs() < 1e-12);
}

#[test]
fn missing_config_exits_two_and_names_flag() {
    let out = sparsedom(&["norm", "--config", "/definitely/not/here.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--config"), "{}", stderr(&out));
}

#[test]
fn unknown_key_exits_two_and_names_key() {
    let dir = tempfile::tempdir().unwrap();
    for (text, key) in [
        ("kind = \"norm\"\nsmoothing = 3\n", "smoothing"),
        ("kind = \"norm\"\ndomain.width = 3\n", "width"),
        ("kind = \"young\"\nphi.kind = \"power\"\nphi.exponent = 2\n", "exponent"),
    ] {
        let config = write_config(dir.path(), text);
        let out = sparsedom(&["norm", "--config", &config, "--out", dir.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(stderr(&out).contains(key), "{key}: {}", stderr(&out));
    }
}

#[test]
fn invalid_range_exits_two_and_names_key() {
    let dir = tempfile::tempdir().unwrap();
    for (text, key) in [
        ("kind = \"norm\"\ndomain.J = 40\n", "domain.J"),
        ("kind = \"norm\"\ndomain.len = -1.0\n", "domain.len"),
        (
            "kind = \"norm\"\nspace.family = \"lebesgue\"\nspace.p = 0.5\n",
            "space.p",
        ),
        ("kind = \"norm\"\ntrials = 0\n", "trials"),
    ] {
        let config = write_config(dir.path(), text);
        let out = sparsedom(&["norm", "--config", &config, "--out", dir.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(stderr(&out).contains(key), "{key}: {}", stderr(&out));
    }
}

#[test]
fn mismatched_kind_exits_two() {
    let out = sparsedom(&["norm", "--config", configs().join("young.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("kind"));
}

#[test]
fn numerical_failure_exits_three_with_digest() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "kind = \"weights\"\ndomain.J = 6\nweight.kind = \"step\"\nweight.values = [1e300, 1e-300]\n",
    );
    let out = sparsedom(&["weights", "--config", &config, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let msg = stderr(&out);
    let digest = msg.split(['(', ')']).nth(1).unwrap_or_default();
    assert_eq!(digest.len(), 16, "{msg}");
    assert!(digest.chars().all(|c| c.is_ascii_hexdigit()), "{msg}");
}

#[test]
fn seed_flag_changes_rows() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs().join("domination.toml");
    let rows = |seed: &str| {
        let out_dir = dir.path().join(seed);
        let out = sparsedom(&[
            "domination",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--resolution",
            "6",
            "--trials",
            "6",
            "--seed",
            seed,
            "--quiet",
        ]);
        assert!(out.status.code().is_some_and(|c| c <= 1), "{}", stderr(&out));
        std::fs::read(out_dir.join("rows.csv")).unwrap()
    };
    assert_eq!(rows("5"), rows("5"));
    assert_ne!(rows("5"), rows("6"));
}
