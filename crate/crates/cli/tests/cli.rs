use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cohcert(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cohcert"));
    c.args(args).env_remove("COHCERT_OUT").env_remove("COHCERT_THREADS");
    if let Some(d) = env_out {
        c.env("COHCERT_OUT", d);
    }
    c.output().expect("binary runs")
}

fn body(text: &str) -> String {
    let i = text.find("\"body\"").expect("body present");
    text[i..].to_string()
}

fn parse(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn maximally_coherent_measure() {
    let out = cohcert(&["measure", "--maxcoh", "4"], None);
    assert_eq!(out.status.code(), Some(0));
    let r = &parse(&out)["body"]["report"];
    for key in ["c_max", "c_min", "c_r"] {
        assert!((r[key].as_f64().unwrap() - 2.0).abs() < 1e-7, "{key}");
    }
}

#[test]
fn floats_carry_seventeen_digits() {
    let out = cohcert(&["measure", "--pure", "0.6,0.8"], None);
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.contains("\"c_l1\"")).unwrap();
    let num = line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    let mantissa = num.split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17, "{num}");
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"dim\": 2, \"re\": [[1, 0]]}").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["measure", "--state", bad.to_str().unwrap()],
        vec!["measure", "--state", "/nonexistent/rho.json"],
        vec!["measure", "--random", "3,4,1"],
        vec!["measure", "--random", "3,x"],
        vec!["measure", "--maxcoh", "65"],
        vec!["measure", "--maxcoh", "2", "--pure", "1,0"],
        vec!["measure"],
        vec!["oneshot", "--maxcoh", "2", "--eps", "1.5"],
        vec!["certify", "--dim", "2", "--count", "0"],
    ];
    for args in cases {
        let out = cohcert(&args, None);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn certify_bodies_are_identical_and_written_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = ["certify", "--dim", "2", "--count", "2", "--seed", "7", "--trials", "5000", "--m-max", "3"];
    let mut first = args.to_vec();
    first.extend(["--out", a.to_str().unwrap()]);
    let mut second = args.to_vec();
    second.extend(["--sequential", "--out", b.to_str().unwrap()]);
    assert_eq!(cohcert(&first, None).status.code(), Some(0));
    assert_eq!(cohcert(&second, None).status.code(), Some(0));
    let ta = std::fs::read_to_string(&a).unwrap();
    let tb = std::fs::read_to_string(&b).unwrap();
    assert_eq!(body(&ta), body(&tb));
    let v: Value = serde_json::from_str(&ta).unwrap();
    assert_eq!(v["body"]["passed"], Value::Bool(true));
    assert!(v["header"]["check_runtimes"].as_array().unwrap().len() > 10);
    for r in v["body"]["records"].as_array().unwrap() {
        assert!(!r["anchor"].as_str().unwrap().is_empty());
    }
    // only the two reports, no leftover temporaries
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn impossible_tolerance_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = cohcert(
        &["certify", "--dim", "2", "--count", "1", "--tol", "0", "--trials", "1000", "--m-max", "2"],
        Some(dir.path()),
    );
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("certify.json")).unwrap()).unwrap();
    assert_eq!(v["body"]["passed"], Value::Bool(false));
}

#[test]
fn game_channel_oneshot_sweep_demo() {
    let g = cohcert(&["game", "--random", "3,2,1", "--trials", "20000", "--seed", "3"], None);
    assert_eq!(g.status.code(), Some(0));
    let b = &parse(&g)["body"];
    assert!((b["ratio"].as_f64().unwrap() - b["two_pow_c_max"].as_f64().unwrap()).abs() < 1e-5);
    assert!((b["p_ico"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-7);

    let p = cohcert(&["game", "--maxcoh", "2", "--instrument", "phase", "--trials", "0"], None);
    assert_eq!(p.status.code(), Some(0));
    assert!((parse(&p)["body"]["p_succ"].as_f64().unwrap() - 1.0).abs() < 1e-7);

    let dir = tempfile::tempdir().unwrap();
    let chan = dir.path().join("ch.json");
    let c = cohcert(&["channel", "--random", "2,2,4"], None);
    assert_eq!(c.status.code(), Some(0));
    let cv = parse(&c);
    assert_eq!(cv["body"]["class"]["is_sio"], Value::Bool(true));
    std::fs::write(&chan, cv["body"]["channel"].to_string()).unwrap();
    let applied = cohcert(&["channel", "--random", "2,2,9", "--apply", chan.to_str().unwrap()], None);
    assert_eq!(applied.status.code(), Some(0));
    let av = &parse(&applied)["body"];
    assert!(av["c_max_after"].as_f64().unwrap() <= av["c_max_before"].as_f64().unwrap() + 1e-7);

    let o = cohcert(&["oneshot", "--maxcoh", "2", "--eps", "0.04", "--m-max", "4", "--witness"], None);
    assert_eq!(o.status.code(), Some(0));
    let e = &parse(&o)["body"]["entries"][0];
    assert_eq!(e["distill"]["m_star"], 2);
    assert!(e["distill_certificate"].is_object());

    let csv = dir.path().join("s.csv");
    let s = cohcert(
        &["sweep", "--maxcoh", "2", "--eps", "0", "--n-max", "3", "--csv", csv.to_str().unwrap()],
        None,
    );
    assert_eq!(s.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 4);

    let d = cohcert(&["demo"], None);
    assert_eq!(d.status.code(), Some(0));
    let v = &parse(&d)["body"];
    assert!(
        v["violation"]["average_c_min_after"].as_f64().unwrap()
            > v["violation"]["c_min_before"].as_f64().unwrap() + 1e-3
    );
    assert_eq!(v["mixed_example"]["c_min"].as_f64().unwrap(), 0.0);
}

#[test]
fn solver_trace_csv() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("trace.csv");
    let out = cohcert(&["measure", "--random", "3,3,2", "--trace", t.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&t).unwrap();
    assert!(text.starts_with("iter,primal_obj"));
    assert!(text.lines().count() > 3);
}
