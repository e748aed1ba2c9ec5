use std::process::Command;

use carnot_acf::cli::run;
use carnot_acf::formats::{Certificate, GroupFile};
use carnot_core::CarnotGroup;

fn carnot(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("carnot-acf").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn construct_engel_certificate() {
    let (code, out, err) = carnot(&["construct", "--group", "engel", "--b", "1", "--p", "0", "--q", "1/2"]);
    assert_eq!(code, 0, "{err}");
    let cert = Certificate::from_toml(&out).unwrap();
    assert_eq!(cert.u, "x2 - 1/2*x1*y + 1/2*x1^2*x2 - 1/6*x2^3");
    assert_eq!(cert.coefficients, ["0", "-1/2", "0", "1/6", "1/2"]);
    assert!(cert.harmonic && cert.inner_matches_pq);
    assert!(err.contains("certificate: PASS"));
}

#[test]
fn construct_errors() {
    let (code, _, err) = carnot(&["construct", "--group", "euclidean:3", "--b", "1", "--p", "0", "--q", "1/2"]);
    assert_eq!(code, 2);
    assert!(err.contains("no admissible pair"), "{err}");
    assert_eq!(carnot(&["construct", "--group", "heisenberg:1", "--b", "0"]).0, 2);
    assert_eq!(carnot(&["construct", "--group", "heisenberg:1", "--p", "0", "--q", "0"]).0, 2);
    assert_eq!(carnot(&["construct", "--group", "heisenberg:1", "--b", "1/0"]).0, 1);
    assert_eq!(carnot(&["construct", "--group", "nowhere"]).0, 1);
}

#[test]
fn construct_heisenberg_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.toml");
    let (code, out, _) = carnot(&[
        "construct", "--group", "heisenberg:1", "--b", "1", "--p", "1", "--q", "1", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("certificate: PASS"));
    let cert = Certificate::from_toml(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(cert.harmonic);
    assert_eq!(cert.inner_product, "x1^2 + x2^2");
}

#[test]
fn check_reports() {
    let (code, out, _) = carnot(&["check", "--group", "engel", "x2 + 1/2*x1^2*x2 - 1/6*x2^3 - 1/2*x1*y"]);
    assert_eq!(code, 0);
    assert!(out.contains("harmonic: yes"), "{out}");
    assert!(out.contains("degree 1: x2"));

    let p5 = "x1*y^2 - 2*y*x1^2*x2 + 2*t*x1*x2 + 1/2*x1^3*x2^2 + x1^2*x2^3";
    let (code, out, _) = carnot(&["check", "--group", "engel", "--u", p5]);
    assert_eq!(code, 0);
    assert!(out.contains("harmonic: no") && out.contains("intrinsic-odd: yes"), "{out}");

    let (code, _, err) = carnot(&["check", "--group", "engel", "x1 +"]);
    assert_eq!(code, 1);
    assert!(err.contains("syntax error at position"), "{err}");
}

#[test]
fn validate_presets_and_files() {
    for g in ["engel", "heisenberg:2", "heisenberg:1:polarized", "euclidean:4"] {
        let (code, out, _) = carnot(&["validate", "--group", g]);
        assert_eq!(code, 0, "{g}: {out}");
        assert!(!out.contains("FAIL"));
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("engel.toml");
    let file = GroupFile::from_group(&CarnotGroup::preset("engel").unwrap());
    std::fs::write(&path, file.to_toml().unwrap()).unwrap();
    let (code, out, _) = carnot(&["validate", "--group", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("PASS law associativity"));

    // wrong inverse
    let mut broken = file.clone();
    broken.inverse.as_mut().unwrap()[3] = "-t".into();
    std::fs::write(&path, broken.to_toml().unwrap()).unwrap();
    let (code, out, _) = carnot(&["validate", "--group", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.contains("FAIL law inverse"), "{out}");
}

#[test]
fn numerics_reject_engel() {
    for cmd in ["phi", "coeffs", "jay"] {
        let (code, _, err) = carnot(&[cmd, "--group", "engel", "--samples", "100"]);
        assert_eq!(code, 3, "{cmd}");
        assert!(err.contains("not explicit"));
    }
}

#[test]
fn coeffs_verdict() {
    let (code, out, err) = carnot(&[
        "coeffs", "--group", "heisenberg:1", "--b", "1", "--p", "0", "--q", "1/2", "--samples", "1000000", "--seed", "0",
    ]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "name,estimate,stderr");
    assert_eq!(lines.len(), 5);
    let a2: Vec<f64> = lines[2].split(',').skip(1).map(|s| s.parse().unwrap()).collect();
    assert!(a2[0] > 5.0 * a2[1], "{out}");
    assert!(err.contains("verdict: Φ decreasing on (0, r*)"));
}

#[test]
fn coeffs_needs_p1_minus_p3() {
    let (code, _, err) = carnot(&["coeffs", "--group", "heisenberg:1", "--u", "x1 + y", "--samples", "100"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn phi_csv_shape_and_polarized_input() {
    let args = ["--samples", "20000", "--steps", "4", "--seed", "3", "--precision", "6"];
    let (code, canonical, _) = carnot(&[&["phi", "--group", "heisenberg:1"][..], &args].concat());
    assert_eq!(code, 0);
    let lines: Vec<&str> = canonical.lines().collect();
    assert_eq!(lines[0], "r,phi,stderr,phi_quartic,quartic_stderr");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].split(',').all(|f| f.contains('e')), "{}", lines[1]);

    // polarized input is transported to canonical coordinates first
    let (code, polarized, _) = carnot(&[&["phi", "--group", "heisenberg:1:polarized"][..], &args].concat());
    assert_eq!(code, 0);
    assert_eq!(polarized.lines().count(), 5);
}

#[test]
fn jay_symmetry_columns() {
    let (code, out, err) =
        carnot(&["jay", "--group", "heisenberg:1", "--samples", "100000", "--steps", "5", "--seed", "1"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "r,J,J_stderr,I_plus,I_plus_stderr,I_minus,I_minus_stderr");
    for line in &lines[1..] {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let se = v[4].hypot(v[6]);
        assert!((v[3] - v[5]).abs() < 3.0 * se, "{line}");
    }
    assert!(err.contains("|I+ - I-| < 3 stderr at every radius: yes"), "{err}");
}

#[test]
fn outputs_do_not_depend_on_workers() {
    let base = ["phi", "--group", "heisenberg:1", "--samples", "30000", "--steps", "3", "--workers"];
    let (_, one, _) = carnot(&[&base[..], &["1"]].concat());
    let (_, four, _) = carnot(&[&base[..], &["4"]].concat());
    assert_eq!(one, four);
}

#[test]
fn euclid_ortho() {
    let (code, out, _) = carnot(&["euclid-ortho", "--n", "3", "--ph", "x1", "--pk", "x1^3 - 3*x1*x2^2", "--samples", "200000"]);
    assert_eq!(code, 0);
    assert!(out.trim_end().ends_with("PASS"), "{out}");
    assert_eq!(carnot(&["euclid-ortho", "--ph", "x1", "--pk", "x2"]).0, 2);
    assert_eq!(carnot(&["euclid-ortho", "--ph", "x1", "--pk", "x1^2"]).0, 2);
}

#[test]
fn det_check() {
    let (code, out, _) = carnot(&["det-check", "--alpha", "0,0,1,0", "--b", "1"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("det = -72\n") && out.trim_end().ends_with("PASS"), "{out}");
    let (_, out, _) = carnot(&["det-check", "--alpha", "1,3/2,3/2,-2", "--b", "5"]);
    assert!(out.contains("det = 0") && out.trim_end().ends_with("SINGULAR"), "{out}");
    let (_, out, _) = carnot(&["det-check", "--alpha", "1/3,-2,7,1", "--b", "-2/5"]);
    assert!(out.trim_end().ends_with("PASS"), "{out}");
    assert_eq!(carnot(&["det-check", "--alpha", "1,2,3"]).0, 1);
    assert_eq!(carnot(&["det-check", "--alpha", "1,2,3,x"]).0, 1);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_carnot-acf");
    let code = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code().unwrap();
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&[]), 1);
    assert_eq!(code(&["construct"]), 1);
    assert_eq!(code(&["construct", "--group", "euclidean:3"]), 2);
    assert_eq!(code(&["phi", "--group", "engel"]), 3);
    let out = Command::new(bin)
        .args(["coeffs", "--group", "heisenberg:1", "--samples", "5000"])
        .env("CARNOT_ACF_WORKERS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("name,estimate,stderr"));
}
