use serde_json::Value;
use smq_cli::config::parse_classes;
use smq_cli::{round_half_even, table_csv, FileConfig, Overrides, RunConfig, Selector, TableRow};
use smq_conic::import_problem;
use smq_core::boolean::{npn_canonical, BooleanFunction};
use smq_core::process::ProcessClass;
use std::collections::BTreeMap;
use std::process::Command;

fn smq(args: &[&str]) -> (i32, Vec<Value>) {
    smq_env(args, &[])
}

fn smq_env(args: &[&str], env: &[(&str, &str)]) -> (i32, Vec<Value>) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_smq"));
    cmd.args(args);
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("SMQ_")) {
        cmd.env_remove(k);
    }
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines = stdout
        .lines()
        .map(|l| serde_json::from_str(l).unwrap_or_else(|_| panic!("not JSON: {l}")))
        .collect();
    (out.status.code().unwrap_or(-1), lines)
}

#[test]
fn half_even_rounding() {
    assert_eq!(round_half_even(0.125, 2), "0.12");
    assert_eq!(round_half_even(0.375, 2), "0.38");
    assert_eq!(round_half_even(0.046473, 5), "0.04647");
    assert_eq!(round_half_even(-0.000001, 5), "0.00000");
    assert_eq!(round_half_even(0.0094699, 5), "0.00947");
}

#[test]
fn csv_layout() {
    let rows = vec![
        TableRow {
            id: 5865,
            eps: BTreeMap::from([(ProcessClass::Fo, 0.046473), (ProcessClass::Gen, 0.037003)]),
        },
        TableRow {
            id: 7,
            eps: BTreeMap::from([(ProcessClass::Fo, -2e-9)]),
        },
    ];
    let csv = table_csv(&[ProcessClass::Gen, ProcessClass::Fo], &rows);
    assert_eq!(csv, "id,eps_fo,eps_gen,gap\n5865,0.04647,0.03700,0.00947\n7,0.00000,NA,NA\n");
}

#[test]
fn precedence_is_flags_then_environment_then_file() {
    let file: FileConfig = toml::from_str("n = 3\nT = 1\ntol = 1e-4\nworkers = 2\nclasses = [\"Gen\"]").unwrap();
    let cfg = RunConfig::resolve(&Overrides::default(), Some(&file)).unwrap();
    assert_eq!((cfg.n, cfg.t, cfg.tol, cfg.workers), (3, 1, 1e-4, 2));
    assert_eq!(cfg.classes, vec![ProcessClass::Gen]);
    let over = Overrides {
        n: Some(2),
        classes: Some("FO,Gen".into()),
        ..Overrides::default()
    };
    let cfg = RunConfig::resolve(&over, Some(&file)).unwrap();
    assert_eq!((cfg.n, cfg.t), (2, 1));
    assert_eq!(cfg.classes.len(), 2);
    assert_eq!(RunConfig::resolve(&Overrides::default(), None).unwrap(), RunConfig::default());

    for bad in [
        Overrides { workers: Some(0), ..Overrides::default() },
        Overrides { n: Some(2), select: Some("16".into()), ..Overrides::default() },
        Overrides { select: Some("some".into()), ..Overrides::default() },
        Overrides { tol: Some(-1.0), ..Overrides::default() },
    ] {
        assert!(RunConfig::resolve(&bad, None).is_err());
    }
    assert!(parse_classes("FO,XX").is_err());
    assert!(toml::from_str::<FileConfig>("colour = 1").is_err());
    assert_eq!("npn".parse::<Selector>().unwrap(), Selector::Npn);
}

#[test]
fn environment_and_file_reach_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("smq.toml");
    std::fs::write(&cfg, "n = 2\nT = 1\n").unwrap();
    let c = cfg.to_str().unwrap();
    // the file supplies n = 2
    let (code, out) = smq(&["--config", c, "solve", "--id", "8", "--class", "FO"]);
    assert_eq!(code, 0);
    assert_eq!(out[0]["n"], 2);
    // the environment beats the file
    let (code, out) = smq_env(&["--config", c, "solve", "--id", "8", "--class", "FO"], &[("SMQ_N", "3")]);
    assert_eq!(code, 0);
    assert_eq!(out[0]["n"], 3);
    // and the flag beats both
    let (_, out) = smq_env(&["--config", c, "solve", "--id", "8", "--class", "FO", "--n", "4", "--T", "1"], &[("SMQ_N", "3")]);
    assert_eq!(out[0]["n"], 4);
}

#[test]
fn solve_reports_records_and_errors() {
    let (code, out) = smq(&["solve", "--id", "0", "--n", "4", "--T", "2", "--class", "FO"]);
    assert_eq!(code, 0);
    let r = &out[0];
    assert_eq!(r["status"], "optimal");
    assert!(r["eps_dual"].as_f64().unwrap() <= r["eps_primal"].as_f64().unwrap());
    assert!(r["eps_primal"].as_f64().unwrap().abs() < 5e-3);
    assert_eq!(r["T"], 2);

    let (code, out) = smq(&["solve", "--id", "65536", "--n", "4", "--T", "2", "--class", "FO"]);
    assert_eq!(code, 2);
    assert_eq!(out[0]["error"], "usage");

    let (code, out) = smq(&["solve", "--id", "3", "--n", "2", "--T", "1", "--class", "QC"]);
    assert_ne!(code, 0);
    assert!(out[0]["message"].as_str().unwrap().contains("QC"));

    let (code, out) = smq(&["solve", "--id", "3", "--n", "5", "--T", "2", "--class", "FO"]);
    assert_eq!(code, 1);
    assert_eq!(out[0]["error"], "size_cap");
}

#[test]
fn dumped_problems_read_back() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.cpi");
    let d = dir.path().join("sub/d.cpi");
    let (code, out) = smq(&[
        "solve", "--id", "8", "--n", "2", "--T", "1", "--class", "Gen", "--dump-problem", p.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{out:?}");
    let primal = import_problem(&std::fs::read_to_string(&p).unwrap()).unwrap();
    assert!(primal.num_vars() > 0);
    let (code, _) = smq(&[
        "dump-problem", "--id", "8", "--n", "2", "--T", "1", "--class", "Gen", "--dual", "--out", d.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    import_problem(&std::fs::read_to_string(&d).unwrap()).unwrap();
}

#[test]
fn full_two_bit_table_is_npn_invariant_and_resumable() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    let args = ["table", "--n", "2", "--T", "1", "--select", "all", "--npn-only", "false", "--tol", "1e-7", "--out-dir", o];
    let (code, out) = smq(&args);
    assert_eq!(code, 0);
    assert_eq!(out.len(), 32);
    let csv = std::fs::read_to_string(dir.path().join("table_n2_T1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 17);

    let mut eps: BTreeMap<(u64, String), f64> = BTreeMap::new();
    for r in &out {
        assert!(r["eps_dual"].as_f64().unwrap() <= r["eps_primal"].as_f64().unwrap() + 1e-12);
        eps.insert((r["id"].as_u64().unwrap(), r["class"].as_str().unwrap().into()), r["eps_dual"].as_f64().unwrap());
    }
    for ((id, class), v) in &eps {
        let f = BooleanFunction::from_id(2, *id).unwrap();
        let rep = npn_canonical(&f).0.id();
        let w = eps[&(rep, class.clone())];
        assert!((v - w).abs() <= 2e-6, "id {id} vs representative {rep}: {v} vs {w}");
    }

    // a second run finds everything in the checkpoint and solves nothing
    let ck = dir.path().join("records_n2_T1.jsonl");
    let before = std::fs::read_to_string(&ck).unwrap();
    let (code, again) = smq(&args);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_to_string(&ck).unwrap(), before);
    let strip = |v: &Vec<Value>| -> Vec<Value> {
        v.iter()
            .map(|r| {
                let mut r = r.clone();
                r.as_object_mut().unwrap().remove("wall_time");
                r
            })
            .collect()
    };
    assert_eq!(strip(&again), strip(&out));

    // dropping a line makes exactly that solve run again
    let kept: Vec<&str> = before.lines().skip(1).collect();
    std::fs::write(&ck, kept.join("\n") + "\n").unwrap();
    let (code, _) = smq(&args);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_to_string(&ck).unwrap().lines().count(), 32);
}

#[test]
fn npn_table_has_one_row_per_class() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = smq(&["table", "--n", "2", "--T", "1", "--classes", "FO", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(out.len(), 4);
}

#[test]
fn certify_and_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    // constant function: with an accurate solve the upper bound is exactly zero
    let (code, out) = smq(&[
        "certify", "--id", "15", "--n", "2", "--T", "1", "--classes", "FO", "--side", "upper", "--tol", "1e-9", "--out-dir", o,
    ]);
    assert_eq!(code, 0, "{out:?}");
    assert_eq!(out[0]["exact"], "0");
    assert_eq!(out[0]["verified"], true);

    let (code, out) = smq(&["certify", "--id", "8", "--n", "2", "--T", "1", "--out-dir", o]);
    assert_eq!(code, 0, "{out:?}");
    assert_eq!(out.len(), 5);
    let last = &out[4];
    assert_eq!(last["separated"], false);
    for r in &out[..4] {
        let file = r["file"].as_str().unwrap();
        let (code, v) = smq(&["verify-certificate", file]);
        assert_eq!(code, 0);
        assert_eq!(v[0]["valid"], true);
        assert_eq!(v[0]["exact"], r["exact"]);
    }

    // tamper with the first matrix entry of an upper-bound certificate
    let file = out[0]["file"].as_str().unwrap();
    let text = std::fs::read_to_string(file).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let k = lines.iter().position(|l| l.starts_with("matrix W0")).unwrap() + 1;
    let parts: Vec<&str> = lines[k].split(' ').collect();
    lines[k] = format!("{} {} -7 {}", parts[0], parts[1], parts[3]);
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, lines.join("\n")).unwrap();
    let (code, v) = smq(&["verify-certificate", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(v[0]["error"], "verification");
    let msg = v[0]["message"].as_str().unwrap();
    assert!(msg.contains("W0"), "{msg}");
}

#[test]
fn degree_and_qc_reports() {
    // id 1 is AND: only the last table position is 1
    let (code, out) = smq(&["degree", "--n", "3", "--id", "1"]);
    assert_eq!(code, 0);
    assert_eq!(out[0]["degree"], 3);
    assert_eq!(out[0]["exact_query_lower_bound"], 2);
    assert_eq!(out[0]["polynomial"], "x1x2x3");

    let (code, out) = smq(&["verify-qc", "--trials", "6", "--unitaries", "5"]);
    assert_eq!(code, 0);
    let r = &out[0];
    assert!(r["max_deviation"].as_f64().unwrap() <= 1e-9);
    assert!(r["switch_deviation"].as_f64().unwrap() <= 1e-12);
    assert!(r["distinct_max_deviation"].as_f64().unwrap() > 1e-2);
}
