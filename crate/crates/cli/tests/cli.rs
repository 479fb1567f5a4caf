use std::process::{Command, Output};

use serde_json::Value;

fn hbern(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hbern")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn num(v: &Value, path: &[&str]) -> f64 {
    let mut v = v;
    for k in path {
        v = &v[*k];
    }
    v.as_f64().unwrap_or_else(|| panic!("{path:?} is not a number: {v}"))
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("hbern-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn strip_curvature_vanishes() {
    let out = hbern(&["curvature", "--strip", "G=tan(tanh(t))", "--I=-3,3", "--window=-6,6", "--grid", "41"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(num(&v, &["max_abs_h"]) < 1e-8);
    assert!(num(&v, &["error_estimate"]) < 1e-8);
    assert_eq!(num(&v, &["points_evaluated"]), 41.0 * 41.0);
}

#[test]
fn xy_graph_is_minimal_off_the_axis() {
    let out = hbern(&["curvature", "--graph-xy", "f=x*y/2", "--grid", "31"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(num(&v, &["max_abs_h"]) < 1e-8);
    assert!(num(&v, &["sigma", "count"]) > 0.0);
    for k in 0..2 {
        assert!(v["sigma"]["y"][k].as_f64().unwrap().abs() < 1e-6, "{}", v["sigma"]["y"]);
    }
}

#[test]
fn input_errors_exit_with_two() {
    for args in [
        &["curvature", "--graph-xy", "x*(y"][..],
        &["variation", "--family", "random"][..],
        &["curvature", "--strip", "tan_tanh", "--plane", "1,0,0"][..],
        &["highdim", "--n", "0"][..],
        &["highdim", "--n", "9"][..],
        &["curvature", "--strip", "tan_tanh", "--grid", "many"][..],
    ] {
        let out = hbern(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = hbern(&["curvature", "--graph-xy", "x*(y"]);
    let v = json(&out);
    assert_eq!(v["status"], "error");
    assert_eq!(v["class"], "input");
    assert!(!out.stderr.is_empty());
}

#[test]
fn non_strict_strip_is_not_applicable() {
    let out = hbern(&["instability", "--strip", "0.5"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["class"], "not_applicable");
}

#[test]
fn vertical_plane_is_rejected_then_reported_stable() {
    let out = hbern(&["reduce", "--psi", "2*y"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert_eq!(v["status"], "rejected");
    let last = v["stages"].as_array().unwrap().last().unwrap().clone();
    assert_eq!(last["stage"], "psi_t");

    let out = hbern(&["reduce", "--psi", "2*y", "--then-certify"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["status"], "stable");
    assert!(num(&v, &["stability", "min_v2"]) >= -1e-8);
}

#[test]
fn plane_random_deformations_are_stable() {
    let out = hbern(&["variation", "--plane", "1,0,0", "--window=-1,1", "--family", "random", "--count", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(num(&v, &["min_v2"]) >= -1e-8);
    assert!(num(&v, &["max_abs_v1"]) < 1e-6);
}

#[test]
fn certificate_field_decreases_the_perimeter() {
    let out = hbern(&["variation", "--strip", "tan_tanh", "--I=-3,3", "--family", "hk"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let e = &v["entries"][0];
    let (fd, closed) = (num(e, &["v2_numeric", "value"]), num(e, &["v2_strip", "value"]));
    assert!(fd < 0.0);
    assert!((fd - closed).abs() < 1e-3 * closed.abs(), "{fd} vs {closed}");
}

#[test]
fn affine_strip_is_certified() {
    let out = hbern(&["instability", "--strip", "affine(2,0.5)", "--J=-1,1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(num(&json(&out), &["certificate", "gap"]) < 0.0);
}

#[test]
fn highdim_tables() {
    let out = hbern(&["highdim", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(num(&v, &["sphere", "max_abs_error"]) < 1e-8);
    for row in v["perimeter"].as_array().unwrap() {
        assert!(num(row, &["rel_diff"]) < 1e-9);
    }
    assert!(num(&v, &["negative_example", "max_abs_div"]) < 1e-7);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let args = |tag: &str| {
        vec![
            "variation".to_string(),
            "--plane".into(),
            "1,0.5,0".into(),
            "--window=-1,1".into(),
            "--family".into(),
            "random".into(),
            "--count".into(),
            "2".into(),
            "--seed".into(),
            "7".into(),
            "--json".into(),
            tmp(&format!("{tag}.json")).display().to_string(),
        ]
    };
    let run = |tag: &str, threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_hbern"))
            .args(args(tag))
            .env("HBERN_THREADS", threads)
            .output()
            .unwrap()
    };
    let a = run("a", "1");
    let b = run("b", "3");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let fa = std::fs::read(tmp("a.json")).unwrap();
    assert_eq!(fa, std::fs::read(tmp("b.json")).unwrap());
    assert_eq!(fa.trim_ascii_end(), a.stdout.trim_ascii_end());

    let c1 = tmp("c1.csv");
    let c2 = tmp("c2.csv");
    for c in [&c1, &c2] {
        let out = hbern(&["curvature", "--cylinder", "0,0,1", "--grid", "15", "--csv", &c.display().to_string()]);
        assert_eq!(out.status.code(), Some(0));
    }
    let csv = std::fs::read_to_string(&c1).unwrap();
    assert_eq!(csv, std::fs::read_to_string(&c2).unwrap());
    assert!(csv.starts_with("u,v,H\n"));
    assert_eq!(csv.lines().count(), 1 + 15 * 15);
}

#[test]
fn config_file_with_flag_override() {
    let path = tmp("run.cfg");
    std::fs::write(
        &path,
        "command = curvature\n[surface]\nstrip = tan_tanh\nI = -3, 3\n[curvature]\ngrid = 11\nwindow = -2, 2\n",
    )
    .unwrap();
    let cfg = path.display().to_string();
    let v = json(&hbern(&["curvature", "--config", &cfg]));
    assert_eq!(v["grid"], 11);
    assert_eq!(v["window"]["u0"], -2.0);
    let v = json(&hbern(&["curvature", "--config", &cfg, "--grid", "5"]));
    assert_eq!(v["grid"], 5);
    // a config for another command is refused
    assert_eq!(hbern(&["variation", "--config", &cfg]).status.code(), Some(2));
}
