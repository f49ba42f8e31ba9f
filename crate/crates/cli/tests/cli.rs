use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_medwit");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn medwit(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("MEDWIT_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn medwit")
}

fn run_to(dir: &Path, mode: &str, config: &Path, extra: &[&str]) -> (Output, PathBuf) {
    let out = dir.join(format!("{mode}.csv"));
    let mut args = vec![mode, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"];
    args.extend_from_slice(extra);
    (medwit(&args, &[]), out)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn sweep_t_writes_csv_json_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (o, csv) = run_to(dir.path(), "sweep_t", &configs().join("canonical_sweep_t.toml"), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "mode,seed,t,p,dim_A,T,dim_B,comm_norm,rhs_bound,sup_bound,measure,delta_q,lhs,slack,wall_ms"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 9);

    let json = read_json(&dir.path().join("sweep_t.json"));
    let jrows = json["rows"].as_array().unwrap();
    assert_eq!(jrows.len(), rows.len());
    for (cells, j) in rows.iter().zip(jrows) {
        assert_eq!(cells[0], "sweep_t");
        assert_eq!(cells[4..7], ["2", "1", "2"]);
        assert_eq!(j["dim_A"], 2);
        for (col, name) in [(2, "t"), (7, "comm_norm"), (8, "rhs_bound"), (11, "delta_q"), (13, "slack")] {
            assert_eq!(cells[col].parse::<f64>().unwrap(), j[name].as_f64().unwrap(), "{name}");
        }
        assert!(cells[13].parse::<f64>().unwrap() > 0.0);
    }

    let m = read_json(&dir.path().join("sweep_t.manifest.json"));
    assert_eq!(m["status"], "ok");
    assert_eq!(m["mode"], "sweep_t");
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    assert!(m["core_version"].is_string() && m["cli_version"].is_string());
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("chain_ensemble.toml");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let base = ["sweep_t", "--config", cfg.to_str().unwrap(), "--quiet", "--out"];
    let oa = medwit(&[&base[..], &[a.to_str().unwrap()]].concat(), &[("MEDWIT_THREADS", "1")]);
    let ob = medwit(&[&base[..], &[b.to_str().unwrap()]].concat(), &[("MEDWIT_THREADS", "3")]);
    assert!(oa.status.success() && ob.status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(std::fs::read(dir.path().join("a.json")).unwrap(), std::fs::read(dir.path().join("b.json")).unwrap());
}

#[test]
fn seed_flag_overrides_config_seed() {
    let cfg = configs().join("chain_ensemble.toml");
    let run = |seed: &str| medwit(&["evolve", "--config", cfg.to_str().unwrap(), "--seed", seed, "--quiet"], &[]);
    // chain_ensemble has no single t; evolve needs one.
    assert_eq!(run("3").status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(&cfg).unwrap().replace("[experiment]", "[experiment]\nt = 0.3");
    let cfg = write(dir.path(), "e.toml", &text);
    let run = |seed: &str| medwit(&["evolve", "--config", cfg.to_str().unwrap(), "--seed", seed, "--quiet"], &[]);
    let (a, b, c) = (run("3"), run("3"), run("4"));
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let line = String::from_utf8(a.stdout).unwrap();
    assert_eq!(line.lines().nth(1).unwrap().split(',').nth(1), Some("3"));
}

#[test]
fn invalid_config_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let base = std::fs::read_to_string(configs().join("canonical_sweep_t.toml")).unwrap();
    let cases = [
        "[layout]\ndim_a = 2\nmediator_qubits = 1\ndim_b = 2\ncolour = 1\n".to_string(),
        base.replace("t_grid = [0.05, 0.1,", "t_grid = [0.5, 0.1,"),
        format!("{base}\n[measure]\nkind = \"concurrence\"\n"),
        format!("{base}\n[bound]\nc = \"constant\"\nconstant = 0.5\n"),
        base.replace("\"+i\"", "\"+q\""),
    ];
    for (n, text) in cases.iter().enumerate() {
        let cfg = write(dir.path(), &format!("bad{n}.toml"), text);
        let (o, csv) = run_to(dir.path(), "sweep_t", &cfg, &[]);
        assert_eq!(o.status.code(), Some(2), "case {n}: {}", stderr(&o));
        assert!(!csv.exists());
        assert!(!dir.path().join("sweep_t.manifest.json").exists());
    }
    let o = medwit(&["verify", "--config", "/nonexistent/medwit.toml"], &[]);
    assert_eq!(o.status.code(), Some(4));
    let o = medwit(&["verify", "--config", configs().join("verify.toml").to_str().unwrap()], &[("MEDWIT_THREADS", "0")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing/sub/out.csv");
    let cfg = configs().join("canonical_bound.toml");
    let o = medwit(&["bound", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn complex_coefficient_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("canonical_bound.toml"))
        .unwrap()
        .replacen("coeff = 1.0", "coeff = 1.0\ncoeff_im = 0.25", 1);
    let cfg = write(dir.path(), "c.toml", &text);
    let o = medwit(&["bound", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("not Hermitian"));
}

#[test]
fn tampered_tolerance_names_property() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.toml",
        "[experiment.verify]\nonly = [\"canonical_closed_form\", \"classical_null\"]\n\
         [experiment.verify.tolerances]\nclosed_form = 1e-30\n",
    );
    let (o, csv) = run_to(dir.path(), "verify", &cfg, &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("canonical_closed_form"));
    assert!(!stderr(&o).contains("classical_null"));
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.contains("canonical_closed_form,false"));
    assert!(text.contains("classical_null,true"));
    let m = read_json(&dir.path().join("verify.manifest.json"));
    assert_eq!(m["status"], "validation_failed");
}

fn verify_json(dir: &Path, name: &str, body: &str) -> (Option<i32>, Value) {
    let cfg = write(dir, &format!("{name}.toml"), body);
    let out = dir.join(format!("{name}.csv"));
    let o = medwit(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"], &[]);
    (o.status.code(), read_json(&dir.join(format!("{name}.json"))))
}

#[test]
fn failing_seeds_replay() {
    let dir = tempfile::tempdir().unwrap();
    // Tight enough that some but not all instances fail.
    let tol = "[experiment.verify.tolerances]\nzassenhaus_slope = 3e-4\n";
    let (code, json) = verify_json(
        dir.path(),
        "all",
        &format!("[experiment.verify]\nseed = 40\nzassenhaus_instances = 12\nonly = [\"zassenhaus_order\"]\n{tol}"),
    );
    assert_eq!(code, Some(3));
    let prop = &json["properties"][0];
    let failing: Vec<u64> = prop["failing_seeds"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert!(!failing.is_empty() && failing.len() < 12, "{failing:?}");
    let (_, again) = verify_json(
        dir.path(),
        "again",
        &format!("[experiment.verify]\nseed = 40\nzassenhaus_instances = 12\nonly = [\"zassenhaus_order\"]\n{tol}"),
    );
    assert_eq!(again, json);
    for &s in &failing {
        let (code, json) = verify_json(
            dir.path(),
            &format!("s{s}"),
            &format!("[experiment.verify]\nseed = {s}\nzassenhaus_instances = 1\nonly = [\"zassenhaus_order\"]\n{tol}"),
        );
        assert_eq!(code, Some(3), "seed {s}");
        assert_eq!(json["properties"][0]["failing_seeds"], serde_json::json!([s]));
    }
}

#[test]
fn sweep_p_orders_and_encodes_vectors() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
[layout]
dim_a = 2
mediator_qubits = 2
dim_b = 2

[[hamiltonians.am]]
coeff = 1.0
a = "X"
mediator = "XI"

[[hamiltonians.mb]]
coeff = 0.7
mediator = "YZ"
b = "Z"

[initial_state]
kind = "product"
sites = ["0", "+i", "0", "+"]

[experiment]
t = 0.4
p_vectors = [[1.0, 0.5], [0.2, 0.9], [0.2, 0.2]]
"#;
    let cfg = write(dir.path(), "p.toml", text);
    let (o, csv) = run_to(dir.path(), "sweep_p", &cfg, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(csv).unwrap();
    let ps: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(
        ps,
        [
            "2.0000000000000001e-1",
            "2.0000000000000001e-1;9.0000000000000002e-1",
            "1.0000000000000000e0;5.0000000000000000e-1"
        ]
    );
}

#[test]
fn randcheck_runs_clean() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "r.toml",
        "[experiment.randcheck]\nseed = 5\ninstances = 6\nkind = \"commuting\"\nt_grid = [0.5, 1.0]\n",
    );
    let (o, _) = run_to(dir.path(), "randcheck", &cfg, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = read_json(&dir.path().join("randcheck.manifest.json"));
    assert_eq!(m["stats"]["rows"], 12);
    assert_eq!(m["stats"]["negative_slack_rows"], 0);
    assert_eq!(m["seed"], 5);
}
