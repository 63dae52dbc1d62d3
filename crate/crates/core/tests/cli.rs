use std::path::PathBuf;
use std::process::{Command, Output};

use metastab::rates::{
    compute_k, delta_tilde, fejer_modulus_chi, BoundInputs, Counterfunction, Lipschitz, Saturation,
};
use metastab::AmbientSet;

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn metastab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metastab")).args(args).output().expect("binary runs")
}

fn path_str(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let cubic = scenario("cubic.toml");
    for out in [&a, &b] {
        let o = metastab(&["verify", path_str(&cubic), "--out", path_str(out)]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = metastab(&["verify", path_str(&scenario("adversarial.toml")), "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert!(report["reports"].as_array().unwrap().iter().any(|r| r["outcome"] == "fail"));

    let o = metastab(&["verify", "/nonexistent/scenario.toml"]);
    assert_eq!(o.status.code(), Some(64));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "operator = \"cubic\"\nx0 = [3.0]\n").unwrap();
    let o = metastab(&["bounds", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&o.stderr).contains("x0-not-in-domain"));
}

#[test]
fn strict_turns_inconclusive_into_failure() {
    let dir = tempfile::tempdir().unwrap();
    let short = dir.path().join("short.toml");
    std::fs::write(
        &short,
        "operator = \"cubic\"\nx0 = [0.9]\nsteps = 3\nsuites = [\"metastability\"]\n[[queries]]\nk = 1000000\ng = \"const(1)\"\n",
    )
    .unwrap();
    let out = dir.path().join("r.json");
    let relaxed = metastab(&["verify", path_str(&short), "--out", path_str(&out)]);
    assert_eq!(relaxed.status.code(), Some(0));
    let strict = metastab(&["verify", path_str(&short), "--out", path_str(&out), "--strict"]);
    assert_eq!(strict.status.code(), Some(2));
}

#[test]
fn bounds_match_the_library() {
    let o = metastab(&["bounds", path_str(&scenario("cubic.toml")), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let table: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let sat = Saturation::default();
    let lip = Lipschitz::integer(2).unwrap();
    let beta = Counterfunction::shifted_square();
    let theta = Counterfunction::Power(4);
    let shift = compute_k(lip, &beta, &sat);
    assert_eq!(table["K"], sat.render(&shift));
    for l in [0, 5, 10] {
        for k in 0..4 {
            assert_eq!(
                table[format!("delta_tilde(l={l},k={k})")],
                sat.render(&delta_tilde(2, &theta, &shift, l, k, &sat))
            );
        }
    }
    assert_eq!(table["chi(n=0,m=3,r=2)"], fejer_modulus_chi(2, 0, 3, 2).to_string());
    let gamma = AmbientSet::new_box(
        metastab::Point::new(vec![-1.0]).unwrap(),
        metastab::Point::new(vec![1.0]).unwrap(),
    )
    .unwrap()
    .total_boundedness_modulus();
    let inputs = BoundInputs { b: 2, lipschitz: lip, rate_beta: &beta, rate_theta: &theta, gamma: &gamma };
    let zero = Counterfunction::Const(0);
    assert_eq!(table["sigma(k=0,g=const(0))"], sat.render(&inputs.sigma(0, &zero, &sat)));
    assert_eq!(table["sigma(k=0,g=const(0))"], (4u64.pow(10) + 36).to_string());
}

#[test]
fn iterate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = metastab(&["iterate", path_str(&scenario("negation.toml")), "--steps", "10", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,c0,c1,residual");
    assert_eq!(lines.len(), 12);
}

#[test]
fn gallery_and_metastable() {
    let o = metastab(&["gallery"]);
    let text = String::from_utf8(o.stdout).unwrap();
    for id in metastab::operators::GALLERY_IDS {
        assert!(text.contains(id));
    }
    let o = metastab(&["metastable", path_str(&scenario("cubic.toml")), "--k", "2", "--g", "affine(1,1)", "--cap", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    let o = metastab(&["metastable", path_str(&scenario("cubic.toml")), "--k", "2", "--g", "nonsense"]);
    assert_eq!(o.status.code(), Some(64));
}
