use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adrefine")).args(args).output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn member_reports_answer() {
    let v = json(&["member", "--ideal", "Z", "--set", "squares"]);
    assert_eq!(v["answer"], "In");
}

#[test]
fn measure_bound_is_exact() {
    let v = json(&["mix", "measure-bound", "--Y", "evens", "--n", "0", "--k", "3"]);
    assert_eq!(v["epsilon"], "1/3");
    assert_eq!(v["bound"], "1/27");
}

#[test]
fn jtree_lists_images() {
    let v = json(&["reduce", "jtree", "--tree", "0,1;1"]);
    assert_eq!(v["in_tree_prime"], true);
    assert_eq!(v["nodes"].as_array().unwrap().len(), 4);
}

#[test]
fn rado_edge() {
    assert_eq!(json(&["rado", "edge", "1", "2"])["edge"], true);
}

#[test]
fn bad_input_exits_one() {
    let out = run(&["member", "--ideal", "Z", "--set", "notaset 7"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error"));
    assert!(out.stdout.is_empty());
}

#[test]
fn pretty_output_is_json_too() {
    let v = json(&["--format", "pretty", "rado", "edge", "0", "1"]);
    assert_eq!(v["m"], 0);
}
