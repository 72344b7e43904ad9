use std::process::{Command, Output};

fn gkpsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gkpsim")).args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn optimal_squeeze_record() {
    let out = gkpsim(&["optimal-squeeze", "--sigma", "0.01", "--json"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["s_star"].as_f64().unwrap() - 3.42).abs() < 0.15);
    assert!((v["sigma_ln_asy"].as_f64().unwrap() - 4.976e-4).abs() < 1e-7);
    assert_eq!(v["method"], "analytic");
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| gkpsim(args).status.code().unwrap();
    assert_eq!(code(&["optimal-squeeze", "--sigma", "-1"]), 2);
    assert_eq!(code(&["optimal-squeeze", "--sigma", "1.5"]), 1);
    assert_eq!(code(&["sweep", "--sigmas", "1e-2:1e-3:log10"]), 2);
    assert_eq!(code(&["sweep", "--sigmas", "1e-3:1e-2:log10", "--out", "/nonexistent/dir/x.csv"]), 3);
    assert_eq!(code(&["simulate", "--circuit", "/nonexistent/c.toml"]), 3);
    assert_eq!(code(&["simulate", "--builtin", "cat", "--beta", "-2"]), 2);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "cutoff = 10\n[[gates]]\nkind = \"warp\"\n").unwrap();
    let out = gkpsim(&["simulate", "--circuit", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let starved = dir.path().join("starved.toml");
    std::fs::write(
        &starved,
        "cutoff = 10\n[noise]\nsigma_p = 0.01\ntrotter_n = 4\n[[gates]]\nkind = \"sqr\"\ntheta = 0.001\nphi = 0.0\n[[gates]]\nkind = \"measure\"\nbasis = \"z\"\npostselect = -1\n",
    )
    .unwrap();
    let args = ["simulate", "--circuit", starved.to_str().unwrap(), "--trials", "5", "--seed", "1"];
    assert_eq!(code(&[&args[..], &["--postselection", "sampled"]].concat()), 4);
}

#[test]
fn sweep_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("n.csv");
    let out = gkpsim(&["sweep", "--trotter", "25,100,400", "--sigma-p", "0.1", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("sigma_p,n,sigma_step,s_star,sigma_l,sigma_l_asy"));
    let sigma_l: Vec<f64> = lines.map(|l| l.split(',').nth(4).unwrap().parse().unwrap()).collect();
    assert_eq!(sigma_l.len(), 3);
    assert!((sigma_l[1] - 4.9151e-3).abs() < 1e-6);
}

#[test]
fn simulate_echoes_parameters_and_seed() {
    let out = gkpsim(&["simulate", "--builtin", "cat", "--mode", "logical", "--s", "auto", "--trials", "8"]);
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    let v = json(&out);
    let seed = v["seed"].as_u64().unwrap();
    assert!(stderr.contains(&format!("seed: {seed}")));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["mode"], "logical");
    assert_eq!(v["source"], "builtin:cat");
    assert_eq!(v["trotter_n"], 100);
    assert!((v["s_used"].as_f64().unwrap() - 3.386).abs() < 1e-2);
}

#[test]
fn wigner_export() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    let out = gkpsim(&[
        "simulate", "--builtin", "cat", "--trials", "4", "--seed", "2", "--wigner", path.to_str().unwrap(),
        "--wigner-extent", "8", "--wigner-points", "41",
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1 + 41 * 41);
    assert!(json(&out)["wigner_min"].as_f64().unwrap() < 0.0);
}

#[test]
fn threads_env_fallback() {
    let out = Command::new(env!("CARGO_BIN_EXE_gkpsim"))
        .env("GKPSIM_THREADS", "2")
        .args(["optimal-squeeze", "--sigma", "0.003"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("s_star"));
}
