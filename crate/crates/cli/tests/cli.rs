use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn phasecat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phasecat"))
        .args(args)
        .output()
        .expect("binary runs")
}

struct Run {
    dir: TempDir,
}

impl Run {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn config(&self, name: &str, json: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, json).unwrap();
        p
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn exec(&self, sub: &str, json: &str, out: &str) -> (Output, PathBuf) {
        let cfg = self.config(&format!("{out}.json"), json);
        let out = self.out(out);
        let o = phasecat(&[
            sub,
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        (o, out)
    }

    fn ok(&self, sub: &str, json: &str, out: &str) -> PathBuf {
        let (o, dir) = self.exec(sub, json, out);
        assert!(
            o.status.success(),
            "{sub} failed: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        dir
    }
}

fn report(dir: &Path, name: &str) -> Value {
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap();
    assert_eq!(v["schema"], "phasecat/1");
    v["result"].clone()
}

fn grid_values(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn table(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(2)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

const SMALL_GRID: &str =
    r#""grid": {"q": {"min": -5, "max": 5, "count": 41}, "p": {"min": -5, "max": 5, "count": 31}}"#;

#[test]
fn coherent_pair_has_straight_fringes() {
    let run = Run::new();
    let dir = run.ok(
        "cat",
        &format!(r#"{{{SMALL_GRID}, "cat": {{"preset": "coherent_pair", "separation": 4}}}}"#),
        "pair",
    );
    let r = report(&dir, "cat_report.json");
    assert_eq!(r["classification"], "Linear");
    assert!(r["thetas"][0].as_f64().unwrap().abs() < 1e-12);
    assert!((r["integral"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!((r["purity"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    let g = grid_values(&dir.join("cat_wigner.csv"));
    assert_eq!(g.len(), 31);
    assert!(g.iter().all(|row| row.len() == 41));
}

#[test]
fn squeezed_partner_bends_fringes() {
    let run = Run::new();
    for s in [1.5f64, 2.0, 3.0] {
        let dir = run.ok(
            "cat",
            &format!(
                r#"{{{SMALL_GRID}, "cat": {{"preset": "coherent_squeezed", "squeeze": {s}}}}}"#
            ),
            &format!("sq{s}"),
        );
        let r = report(&dir, "cat_report.json");
        assert_eq!(r["classification"], "Hyperbolic");
        let theta = r["thetas"][0].as_f64().unwrap();
        let expected = (s * s - 1.0) / (s * s + 1.0);
        assert!(
            (theta - expected).abs() < 1e-10,
            "s={s}: {theta} vs {expected}"
        );
    }
}

#[test]
fn orthogonal_squeezing_centers_fringes() {
    let run = Run::new();
    let dir = run.ok(
        "cat",
        &format!(r#"{{{SMALL_GRID}, "cat": {{"preset": "orthogonal_squeezed", "squeeze": 2}}}}"#),
        "orth",
    );
    let r = report(&dir, "cat_report.json");
    assert_eq!(r["classification"], "Hyperbolic");
    for e in r["interference"]["eta"].as_array().unwrap() {
        assert!(e.as_f64().unwrap().abs() < 1e-12);
    }
}

#[test]
fn decoherence_starts_from_cat_and_keeps_signatures() {
    let run = Run::new();
    let cat =
        r#""cat": {"preset": "coherent_squeezed", "squeeze": 2, "separation": 3}"#.to_string();
    let cat_dir = run.ok("cat", &format!("{{{SMALL_GRID}, {cat}}}"), "cat");
    let dec_dir = run.ok(
        "decohere",
        &format!(
            r#"{{{SMALL_GRID}, {cat}, "channel": {{"kind": "damped", "kappa": 0.3, "nbar": 0.2}}, "times": [0, 0.25, 1, 3]}}"#
        ),
        "dec",
    );
    assert_eq!(
        grid_values(&cat_dir.join("cat_wigner.csv")),
        grid_values(&dec_dir.join("decohere_t00.csv"))
    );
    let r = report(&dec_dir, "decohere_report.json");
    assert_eq!(r["signatures_constant"], true);
    assert_eq!(r["ratio_nonincreasing"], true);
    let rows = r["signatures"].as_array().unwrap();
    for term in 0..4 {
        let sigs: Vec<&Value> = rows
            .iter()
            .filter(|row| row["term"] == term)
            .map(|row| &row["re_inverse"])
            .collect();
        assert!(sigs.len() >= 2);
        assert!(sigs.windows(2).all(|w| w[0] == w[1]));
    }
    for i in r["integrals"].as_array().unwrap() {
        assert!((i.as_f64().unwrap() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn kerr_coefficients_share_modulus_and_fringes_narrow() {
    let run = Run::new();
    let dir = run.ok(
        "kerr",
        &format!(
            r#"{{{SMALL_GRID}, "kerr": {{"mu": 1, "nu": 4, "nbar": 0.5, "displacement": [3, 0]}}}}"#
        ),
        "kerr",
    );
    let coeffs = table(&dir.join("kerr_coefficients.csv"));
    assert_eq!(coeffs.len(), 4);
    let m0 = coeffs[0][4];
    assert!(coeffs.iter().all(|c| (c[4] - m0).abs() < 1e-12));
    let fwhm = table(&dir.join("kerr_fwhm.csv"));
    assert!(fwhm.windows(2).all(|w| w[1][1] < w[0][1]));
    for row in &fwhm {
        assert!((row[1] - row[2]).abs() < 1e-6 * row[2], "{row:?}");
    }
    let r = report(&dir, "kerr_report.json");
    assert_eq!(r["component_count"], 4);
    assert_eq!(r["cross_terms"].as_array().unwrap().len(), 6);
}

#[test]
fn kicked_oscillator_without_kick_matches_exactly() {
    let run = Run::new();
    let dir = run.ok("kho", r#"{"kho": {"k": 0.0, "section_q": 0.0}}"#, "kho");
    let r = report(&dir, "kho_report.json");
    assert!(r["section_l2"].as_f64().unwrap() < 1e-8);
    assert!((r["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    let section = table(&dir.join("kho_section.csv"));
    let peak = section.iter().fold(0.0f64, |m, r| m.max(r[1].abs()));
    assert!(section.iter().all(|r| (r[1] - r[2]).abs() <= 1e-8 * peak));
}

#[test]
fn outputs_are_deterministic() {
    let run = Run::new();
    let cfg = format!(
        r#"{{{SMALL_GRID}, "cat": {{"preset": "coherent_squeezed"}}, "channel": {{"kind": "damped", "kappa": 0.5, "nbar": 0.1}}}}"#
    );
    let a = run.ok("decohere", &cfg, "a");
    let b = run.ok("decohere", &cfg, "b");
    let mut names: Vec<_> = std::fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 5);
    for n in names {
        assert_eq!(
            std::fs::read(a.join(&n)).unwrap(),
            std::fs::read(b.join(&n)).unwrap(),
            "{n:?}"
        );
    }
}

#[test]
fn cli_seed_overrides_config() {
    let run = Run::new();
    let cfg = run.config(
        "c.json",
        &format!(r#"{{"seed": 7, {SMALL_GRID}, "cat": {{"preset": "coherent_pair"}}}}"#),
    );
    let out = run.out("o");
    let o = phasecat(&[
        "cat",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "11",
    ]);
    assert!(o.status.success());
    let v: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("cat_report.json")).unwrap())
            .unwrap();
    assert_eq!(v["seed"], 11);
}

fn rejected(json: &str, sub: &str) -> String {
    let run = Run::new();
    let (o, _) = run.exec(sub, json, "bad");
    assert_eq!(o.status.code(), Some(2));
    String::from_utf8(o.stderr).unwrap()
}

#[test]
fn unknown_field_names_path_and_position() {
    let err = rejected(
        r#"{"cat": {"preset": "coherent_pair", "sqeeze": 2}}"#,
        "cat",
    );
    assert!(err.contains("cat.sqeeze"), "{err}");
    assert!(err.contains("line 1"), "{err}");
}

#[test]
fn invalid_values_are_rejected() {
    let err = rejected(
        r#"{"channel": {"kind": "damped", "kappa": -1, "nbar": 0}}"#,
        "decohere",
    );
    assert!(err.contains("channel.kappa"), "{err}");
    let err = rejected(r#"{"hbar": 0}"#, "cat");
    assert!(err.contains("hbar"), "{err}");
    let err = rejected(r#"{"kho": {"grid_points": 100}}"#, "kho");
    assert!(err.contains("grid_points"), "{err}");
}

#[test]
fn subcommand_mismatch_is_rejected() {
    let err = rejected(r#"{"subcommand": "kerr"}"#, "cat");
    assert!(err.contains("subcommand"), "{err}");
}

#[test]
fn missing_config_is_an_error() {
    let o = phasecat(&["cat", "--config", "/nonexistent/phasecat.json"]);
    assert_eq!(o.status.code(), Some(2));
}
