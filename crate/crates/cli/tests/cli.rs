use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_rootfrac");
const ROOT2: &str = "exp-quadratic:(0+1*sqrt(2))/1";

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("run rootfrac")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn members(v: &Value) -> Vec<String> {
    v["members"].as_array().unwrap().iter().map(|m| m.as_str().unwrap().to_string()).collect()
}

fn row(v: &Value, n: i64) -> &Value {
    v["rows"].as_array().unwrap().iter().find(|r| r["n"] == n).unwrap()
}

#[test]
fn mtheta_log2_flags_n1() {
    let out = run(&["mtheta", "--theta", "rational:2/1", "--n", "1..10"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["schema"], "rootfrac.mtheta/1");
    assert_eq!(v["rows"].as_array().unwrap().len(), 10);
    assert_eq!(row(&v, 1)["atypical"], true);
    assert_eq!(row(&v, 1)["m_prime"], "1");
    assert_eq!(row(&v, 1)["typical"], "0");
    assert!(v["rows"].as_array().unwrap().iter().skip(1).all(|r| r["atypical"] == false));
}

#[test]
fn mtheta_root2_symmetry() {
    let v = json(&run(&["mtheta", "--theta", ROOT2, "--n", "-5..5"]));
    assert_eq!(v["rows"].as_array().unwrap().len(), 10);
    for n in 1..=5 {
        let p: i64 = row(&v, n)["m_prime"].as_str().unwrap().parse().unwrap();
        let m: i64 = row(&v, -n)["m_prime"].as_str().unwrap().parse().unwrap();
        assert_eq!(m, -p - 2, "n = {n}");
        assert_eq!(row(&v, -n)["atypical"], false);
    }
}

#[test]
fn mtheta_e3_at_one() {
    let v = json(&run(&["mtheta", "--theta", "exp-rational:3/1", "--n", "1"]));
    let r = row(&v, 1);
    assert_eq!(r["m_prime"], "0");
    assert_eq!(r["typical"], "-1");
    assert_eq!(r["m_theta"], "11");
}

#[test]
fn atypical_log2_continuant() {
    let out = run(&["atypical", "--theta", "rational:2/1", "--limit", "1e15", "--method", "continuant"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["schema"], "rootfrac.enumeration/1");
    assert_eq!(members(&v), ["1", "777451915729368"]);
    assert_eq!(v["complete"], true);
}

#[test]
fn atypical_root2_empty() {
    let v = json(&run(&["atypical", "--theta", ROOT2, "--limit", "1e6"]));
    assert!(members(&v).is_empty());
    assert_eq!(v["method"], "continuant");
}

#[test]
fn atypical_rational_log_below_bound() {
    let out = run(&["atypical", "--theta", "exp-rational:10/1", "--limit", "1000", "--method", "direct"]);
    assert_eq!(code(&out), 0);
    let m = members(&json(&out));
    assert!(!m.is_empty());
    assert!(m.iter().all(|n| n.parse::<u64>().unwrap() < 17));
}

#[test]
fn atypical_both_agree() {
    let out = run(&["atypical", "--theta", "exp-quadratic:(1+1*sqrt(3))/2", "--limit", "3000", "--method", "both"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["method"], "both");
}

#[test]
fn cf_examples() {
    let v = json(&run(&["cf", "--value", "2/log(rational:2/1)", "--terms", "36"]));
    assert_eq!(v["rows"][35]["B"], "777451915729368");
    assert_eq!(v["complete"], true);

    let v = json(&run(&["cf", "--value", "quad:(0+1*sqrt(2))/1", "--terms", "10"]));
    assert_eq!(v["expansion"]["kind"], "periodic");
    let a: Vec<&str> = v["rows"].as_array().unwrap().iter().map(|r| r["a"].as_str().unwrap()).collect();
    assert_eq!(a, ["1", "2", "2", "2", "2", "2", "2", "2", "2", "2", "2"]);
    assert!(v["rows"][3]["lambda_exact"].is_string());

    let v = json(&run(&["cf", "--value", "1/log(from-cf:[0;2,period(4)])", "--terms", "4"]));
    let a: Vec<&str> = v["rows"].as_array().unwrap().iter().map(|r| r["a"].as_str().unwrap()).collect();
    assert_eq!(a, ["0", "4", "2", "8", "2"]);
}

#[test]
fn cf_shortfall_is_exit_1() {
    let out = run(&["cf", "--value", "2/log(rational:2/1)", "--terms", "2000", "--precision-cap", "256"]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["complete"], false);
    assert!(v["certified_upto"].as_u64().unwrap() < 2000);
}

#[test]
fn verify_cases_pass() {
    for args in [
        vec!["verify", "--case", "log2-endpoints"],
        vec!["verify", "--case", "family-infinite", "--params", "c=4", "--depth", "20"],
        vec!["verify", "--case", "family-empty", "--params", "c=3"],
        vec!["verify", "--case", "family-empty", "--params", "a=[2;period(4,1)]"],
        vec!["verify", "--case", "rational-bound", "--params", "p=10,q=1"],
        vec!["verify", "--case", "root2-identity", "--limit", "2000"],
    ] {
        let out = run(&args);
        let v = json(&out);
        assert_eq!(code(&out), 0, "{args:?}: {}", v["checks"]);
        assert_eq!(v["pass"], true);
        assert_eq!(v["schema"], "rootfrac.verify/1");
    }
}

#[test]
fn verify_bad_params_are_input_errors() {
    assert_eq!(code(&run(&["verify", "--case", "rational-bound", "--params", "p=1,q=2"])), 2);
    assert_eq!(code(&run(&["verify", "--case", "family-empty", "--params", "family=infinite:c=4"])), 2);
    assert_eq!(code(&run(&["verify", "--case", "family-infinite", "--params", "c=0"])), 2);
}

#[test]
fn stats_is_deterministic_csv() {
    let args = [
        "stats",
        "--samples",
        "5",
        "--limit",
        "1e9",
        "--seed",
        "11",
        "--force-theta",
        "exp-quadratic:(-1+1*sqrt(5))/1",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 1 + 5 + 1);
    assert!(lines[0].starts_with("sample,theta,limit,count,expected,ratio"));
    assert!(lines[1].starts_with("forced,exp-quadratic:(-1+1*sqrt(5))/1,1000000000,0,"));
    assert!(lines[7].starts_with("aggregate,"));
    let other = run(&["stats", "--samples", "5", "--limit", "1e9", "--seed", "12"]);
    assert_ne!(text.as_bytes(), &other.stdout[..]);
}

#[test]
fn classify_e2r5() {
    let out = run(&["classify", "--theta", "from-cf:[0;2,period(4)]", "--k", "3..5"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    for r in v["rows"].as_array().unwrap() {
        assert_eq!(r["class"], "atypical");
        assert_eq!(r["k0"], 3);
    }
    assert_eq!(
        code(&run(&["classify", "--theta", "from-cf:[0;2,period(4)]", "--k", "3", "--delta", "rat:1/1000000"])),
        2
    );
}

#[test]
fn replay_roundtrip() {
    let out = run(&["atypical", "--theta", "rational:2/1", "--limit", "1e15"]);
    let mut child = Command::new(BIN)
        .args(["replay", "--input", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(&out.stdout).unwrap();
    let r = child.wait_with_output().unwrap();
    assert_eq!(code(&r), 0);
    let v = json(&r);
    assert_eq!(v["reproduced"], true);
    assert_eq!(members(&v), ["1", "777451915729368"]);
}

#[test]
fn replay_detects_tampering() {
    let out = run(&["atypical", "--theta", "exp-rational:10/1", "--limit", "100", "--method", "direct"]);
    let mut v = json(&out);
    v["theta"] = Value::String("exp-rational:11/1".into());
    let path = std::env::temp_dir().join(format!("rootfrac-tamper-{}.json", std::process::id()));
    std::fs::write(&path, serde_json::to_vec(&v).unwrap()).unwrap();
    let r = run(&["replay", "--input", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(code(&r), 4);
    assert_eq!(json(&r)["reproduced"], false);
}

#[test]
fn json_is_byte_identical() {
    let args = ["atypical", "--theta", "exp-quadratic:(1+1*sqrt(3))/2", "--limit", "1e9"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&run(&["mtheta", "--theta", "bogus", "--n", "1"])), 2);
    assert_eq!(code(&run(&["mtheta", "--theta", "rational:1/2", "--n", "1"])), 2);
    assert_eq!(code(&run(&["atypical", "--theta", "exp-rational:4/1", "--limit", "10", "--method", "continuant"])), 2);
    assert_eq!(code(&run(&["atypical", "--theta", "exp-rational:7/1", "--limit", "10", "--method", "continuant"])), 2);
    assert_eq!(code(&run(&["atypical", "--theta", "rational:2/1", "--limit", "1.5"])), 2);
    assert_eq!(code(&run(&["replay", "--input", "/nonexistent/report.json"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn table_and_csv_formats() {
    let out = run(&["mtheta", "--theta", "rational:2/1", "--n", "1..3", "--format", "table"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n  m_theta  m_prime  typical  atypical  status\n"));
    let out = run(&["cf", "--value", "quad:(0+1*sqrt(2))/1", "--terms", "2", "--format", "table"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("2.41421356237e0"), "{text}");
    assert!(text.lines().next().unwrap().contains('±'));
    let out = run(&["mtheta", "--theta", "rational:2/1", "--n", "2", "--format", "csv"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "n,m_theta,m_prime,typical,atypical,status\n2,2,2,2,false,ok\n");
}

#[test]
fn env_overrides_and_print_config() {
    let out = Command::new(BIN)
        .args(["--print-config", "atypical", "--theta", "rational:2/1", "--limit", "10"])
        .env("ROOTFRAC_PRECISION_CAP", "512")
        .env("ROOTFRAC_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["common"]["precision_cap"], 512);
    assert_eq!(v["common"]["seed"], 9);
    assert_eq!(v["command"]["command"], "atypical");
    let out = Command::new(BIN)
        .args(["mtheta", "--theta", "rational:2/1", "--n", "2"])
        .env("ROOTFRAC_FORMAT", "csv")
        .output()
        .unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("n,m_theta"));
}
