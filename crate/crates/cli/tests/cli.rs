use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn twistlab(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_twistlab"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn twistlab");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("JSONL output"))
        .collect()
}

const E0: &str = r#"{"a":[0,-1,1,0,0]}"#;

#[test]
fn analyze_e0() {
    let out = twistlab(&["analyze", "--curve", E0], "");
    assert_eq!(out.status.code(), Some(0));
    let v = &lines(&out)[0];
    assert_eq!(v["disc"], -11);
    assert_eq!(v["galoisType"], "S3");
    assert_eq!(
        v["reduction"],
        serde_json::json!([{ "p": 11, "type": "mult_split", "ordDelta": 1 }])
    );
}

#[test]
fn descend_congruent_one() {
    let out = twistlab(&["descend", "--curve", r#"{"e":[0,1,-1]}"#], "");
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(lines(&out)[0]["d2"], 2);
}

#[test]
fn trivial_twist_has_no_flip() {
    let out = twistlab(&["twist", "--curve", E0, "--d", "1"], "");
    assert_eq!(lines(&out)[0]["flip"], 0);
}

#[test]
fn negative_twist_flag() {
    let out = twistlab(&["twist", "--curve", E0, "--d", "-7"], "");
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(lines(&out)[0]["flip"], 1);
}

#[test]
fn batch_isolates_failures() {
    let input = format!(
        "{{\"command\":\"analyze\",\"inputs\":{E0}}}\n\
         {{\"command\":\"descend\",\"inputs\":{{\"e\":[0,1,-1]}}}}\n\
         not json\n\
         {{\"command\":\"twist\",\"inputs\":{{\"a\":[0,-1,1,0,0],\"d\":5}}}}\n"
    );
    let out = twistlab(&["batch"], &input);
    assert_eq!(out.status.code(), Some(0));
    let v = lines(&out);
    assert_eq!(v.len(), 5);
    assert_eq!(v[0]["command"], "analyze");
    assert_eq!(v[1]["command"], "descend");
    assert_eq!(v[2]["line"], 3);
    assert_eq!(v[3]["command"], "twist");
    assert_eq!(v[4]["summary"]["ok"], 3);
    assert_eq!(v[4]["summary"]["failed"], 1);
    assert!(v[0].get("elapsedMillis").is_none());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn empty_batch() {
    let out = twistlab(&["batch"], "");
    let v = lines(&out);
    assert_eq!(v.len(), 1);
    assert_eq!(v[0]["summary"]["ok"], 0);
    assert_eq!(v[0]["summary"]["failed"], 0);
}

#[test]
fn parallel_output_is_deterministic() {
    let input: String = (1..=40)
        .map(|k| format!("{{\"e\":[0,{k},-{}]}}\n", k + 1))
        .collect();
    let a = twistlab(&["descend", "--jobs", "4"], &input);
    let b = twistlab(&["descend", "--jobs", "1"], &input);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = lines(&a);
    assert_eq!(v.len(), 40);
    assert_eq!(v[4]["e"], serde_json::json!([0, 5, -6]));
}

#[test]
fn strict_escalates_unsupported() {
    let args = ["twist", "--curve", r#"{"a":[0,0,0,-1,0]}"#, "--d", "3"];
    let out = twistlab(&args, "");
    assert_eq!(out.status.code(), Some(0));
    assert!(lines(&out)[0]["flip"].is_null());
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(twistlab(&strict, "").status.code(), Some(3));
}

#[test]
fn input_errors_exit_two() {
    let out = twistlab(&["analyze", "--curve", r#"{"a":[0,0,0,0,0]}"#], "");
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(twistlab(&["nonsense"], "").status.code(), Some(2));
    assert_eq!(
        twistlab(&["analyze", "--curve", "{"], "").status.code(),
        Some(2)
    );
}

#[test]
fn large_integers_are_strings() {
    // y^2 = x^3 + 2^60 is isomorphic to y^2 = x^3 + 1
    let out = twistlab(
        &[
            "analyze",
            "--curve",
            r#"{"a":[0,0,0,0,"1152921504606846976"]}"#,
        ],
        "",
    );
    let v = &lines(&out)[0];
    assert_eq!(v["curve"][4], "1152921504606846976");
    assert_eq!(v["minimalModel"], serde_json::json!([0, 0, 0, 0, 1]));
    assert_eq!(v["disc"], -432);
}

#[test]
fn timing_is_opt_in() {
    let out = twistlab(&["analyze", "--curve", E0, "--timing"], "");
    assert!(lines(&out)[0]["elapsedMillis"].is_u64());
}

#[test]
fn search_modes() {
    let out = twistlab(
        &["search", "--mode", "stable", "--curve", E0, "--max-x", "2"],
        "",
    );
    assert_eq!(lines(&out)[0]["primes"], serde_json::json!([]));
    let out = twistlab(&["search", "--mode", "family", "--p", "2"], "");
    assert_eq!(out.status.code(), Some(2));
    let out = twistlab(
        &["search", "--mode", "family", "--p", "11", "--eta", "0"],
        "",
    );
    assert_eq!(lines(&out)[0]["disc"], -11);
}

#[test]
fn sampled_descents_follow_seed() {
    let a = twistlab(&["descend", "--sample", "5", "--seed", "7"], "");
    let b = twistlab(&["descend", "--sample", "5", "--seed", "7"], "");
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(lines(&a).len(), 5);
}

#[test]
fn gmodule_regular_three() {
    let out = twistlab(
        &["gmodule", "--p", "3", "--action", r#"["010","001","100"]"#],
        "",
    );
    let v = &lines(&out)[0];
    assert_eq!(v["fixedDim"], 1);
    assert_eq!(v["newDim"], 2);
    assert_eq!(v["multiplicities"][0]["multiplicity"], 1);
}

#[test]
fn out_file() {
    let dir = std::env::temp_dir().join(format!("twistlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("out.jsonl");
    let out = twistlab(
        &["analyze", "--curve", E0, "--out", path.to_str().unwrap()],
        "",
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"disc\":-11"));
    std::fs::remove_dir_all(&dir).ok();
}
