use std::process::Command;

use carlitz_core::cli::{run, EXIT_FAILED, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

fn crk(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("crk").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json_lines(s: &str) -> Vec<Value> {
    s.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn nu_p_row() {
    let (code, out, _) = crk(&["nu-p", "--p", "11"]);
    assert_eq!(code, EXIT_OK);
    let lines = json_lines(&out);
    assert_eq!(lines[0]["command"], "nu-p");
    assert!(lines[0]["seed"].is_u64());
    assert_eq!(lines[1]["p"], 11);
    assert_eq!(lines[1]["nu"], 3);
    assert!(lines[1]["argmax"].as_array().unwrap().contains(&Value::from(7)));
}

#[test]
fn expand_example_chain() {
    let (code, out, _) = crk(&["expand", "--field", "p=5", "--chain", "-1,1,4,0"]);
    assert_eq!(code, EXIT_OK);
    let r = &json_lines(&out)[1];
    assert_eq!(r["display"], "x + x^2 + 2x^3");
    assert_eq!(r["poly"]["coeffs"], serde_json::json!([0, 1, 1, 2, 0]));
}

#[test]
fn weight_of_zero_polynomial() {
    let (code, out, _) = crk(&["weight", "--poly", r#"{"field":"p=5","coeffs":[]}"#]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json_lines(&out)[1]["weight"], 0);
}

#[test]
fn polynomial_from_file() {
    let dir = std::env::temp_dir().join(format!("crk-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("f1.json");
    let (_, out, _) = crk(&["example-f11"]);
    let poly = json_lines(&out)[1]["poly"].clone();
    std::fs::write(&path, poly.to_string()).unwrap();
    let (code, out, _) = crk(&["rank", "--poly", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json_lines(&out)[1]["rank"], "2");
    let (code, out, _) = crk(&["blahut", "--poly", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let r = &json_lines(&out)[1];
    assert_eq!((r["lc"].as_u64(), r["folded_weight"].as_u64()), (Some(6), Some(6)));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn usage_errors_exit_two_and_name_the_flag() {
    let (code, _, err) = crk(&["nu-p", "--p", "9"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("--p"), "{err}");
    let (code, _, err) = crk(&["expand", "--field", "p=5", "--chain", "0,1"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("--chain"), "{err}");
    let (code, _, _) = crk(&["no-such-command"]);
    assert_eq!(code, EXIT_USAGE);
    let (code, _, err) = crk(&["--cap", "100", "field-info", "--p", "11", "--n", "2"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("--p"), "{err}");
    let (code, _, err) = crk(&["--format", "csv", "expand", "--field", "p=5", "--chain", "1,0"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("--format"), "{err}");
    let (code, _, _) = crk(&["scan-nu", "--range", "10-20"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn verification_failures_exit_one() {
    // inclusive window [1, 4] over F_5 holds three solutions
    let (code, out, _) = crk(&["count-window", "--field", "p=5", "--gamma", "2", "--c", "1", "--d", "3", "--l", "1", "--m", "3"]);
    assert_eq!(code, EXIT_FAILED);
    assert_eq!(json_lines(&out)[1]["count"], 3);
    let poly = r#"{"field":"p=7","coeffs":[1,0,0,0,0,0,1]}"#;
    assert_eq!(crk(&["blahut", "--poly", poly]).0, EXIT_OK);
    assert_eq!(crk(&["blahut", "--poly", poly, "--no-fold"]).0, EXIT_FAILED);
    // no permutation of F_5 has rank exactly 2
    let (code, out, _) = crk(&["sweep-rank2", "--field", "p=5"]);
    assert_eq!(code, EXIT_FAILED);
    assert_eq!(json_lines(&out).last().unwrap()["sharp"], false);
}

#[test]
fn sweep_csv_schema() {
    let (code, out, _) = crk(&["--format", "csv", "sweep-rank2", "--field", "p=11"]);
    assert_eq!(code, EXIT_OK);
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("# crk sweep-rank2 seed="));
    assert_eq!(lines.next().unwrap(), "q,p,case,min_weight,bound_thm33,bound_cor35,violations");
    let all: Vec<&str> = lines.last().unwrap().split(',').collect();
    assert_eq!(all[..4], ["11", "11", "all", "6"]);
    assert_eq!(all[5..], ["6", "0"]);
}

#[test]
fn scan_csv_and_json_agree() {
    let (_, csv_out, _) = crk(&["--format", "csv", "scan-nu", "--range", "3:60"]);
    let (code, json_out, _) = crk(&["scan-nu", "--range", "3:60"]);
    assert_eq!(code, EXIT_OK);
    let rows = json_lines(&json_out);
    let csv_rows: Vec<&str> = csv_out.lines().skip(2).collect();
    assert_eq!(csv_rows.len(), rows.len() - 2);
    for (c, j) in csv_rows.iter().zip(&rows[1..]) {
        let p: u64 = c.split(',').next().unwrap().parse().unwrap();
        assert_eq!(j["p"].as_u64(), Some(p));
    }
    assert_eq!(rows.last().unwrap()["summary"]["max_ratio"]["p"], 53);
}

#[test]
fn output_is_identical_across_worker_counts() {
    let a = crk(&["--jobs", "1", "sweep-rank2", "--field", "p=3,n=2", "--no-normalize"]);
    let b = crk(&["--jobs", "4", "sweep-rank2", "--field", "p=3,n=2", "--no-normalize"]);
    assert_eq!(a, b);
    let c = crk(&["--jobs", "1", "--seed", "7", "scan-nu", "--range", "3:200"]);
    let d = crk(&["--jobs", "3", "--seed", "7", "scan-nu", "--range", "3:200"]);
    assert_eq!(c, d);
}

#[test]
fn chain_json_and_extension_elements() {
    let chain = r#"{"field":"p=3,n=2,mod=1,0,1","a":[[1,1],0,1,[0,2]]}"#;
    let (code, out, _) = crk(&["rank2-coeffs", "--chain", chain]);
    assert_eq!(code, EXIT_OK, "{out}");
    let (code, out, _) = crk(&["count-full", "--field", "p=3,n=2", "--gamma", "[0,1]"]);
    assert_eq!(code, EXIT_OK);
    assert!(json_lines(&out)[1]["within_bound"].as_bool().unwrap());
}

#[test]
fn remaining_subcommands_run() {
    for args in [
        vec!["field-info", "--field", "p=3,n=2"],
        vec!["bounds", "--p", "13"],
        vec!["sweep-rank1", "--field", "p=3,n=2"],
        vec!["count-full", "--p", "11", "--gamma", "7"],
    ] {
        let (code, out, err) = crk(&args);
        assert_eq!(code, EXIT_OK, "{args:?}: {err}");
        assert_eq!(json_lines(&out).len(), 2);
    }
    let (code, _, err) = crk(&["example-f11", "--n", "2"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let (code, _, _) = crk(&["example-f11", "--n", "3"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_crk");
    let ok = Command::new(bin).args(["nu-p", "--p", "5"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let usage = Command::new(bin).args(["nu-p"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(EXIT_USAGE));
    let failed = Command::new(bin).args(["sweep-rank2", "--field", "p=5"]).output().unwrap();
    assert_eq!(failed.status.code(), Some(EXIT_FAILED));
}
