use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pe-repair"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn plan_construction_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["plan", "--construction", "2", "--base-bits", "2", "--r", "8", "--primes", "2,3,5"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("n=17 k=9"), "{out}");
    assert!(out.contains("L=30"), "{out}");
    assert!(dir.path().join("plan.json").exists());
}

#[test]
fn plan_construction_1_toy() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["--json", "plan", "--construction", "1", "--s", "2", "--primes", "3,5", "--t", "3,3", "--k", "2"],
    );
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["n"], 6);
    assert_eq!(v["k"], 2);
    assert_eq!(v["L"], 30);
    assert_eq!(v["field_bits"], 30);
}

#[test]
fn plan_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let conflicting = ["plan", "--construction", "1", "--s", "2", "--d", "5", "--primes", "3,5", "--t", "3,3", "--k", "2"];
    assert_eq!(code(&run(dir.path(), &conflicting)), 2);
    let c2_with_s = ["plan", "--construction", "2", "--r", "8", "--primes", "2,3", "--s", "2"];
    assert_eq!(code(&run(dir.path(), &c2_with_s)), 2);
    assert_eq!(code(&run(dir.path(), &["plan"])), 2);
    assert_eq!(code(&run(dir.path(), &["plan", "--construction", "3"])), 2);
}

#[test]
fn plan_validation_error_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--json", "plan", "--construction", "1", "--s", "2", "--primes", "3,5", "--t", "3,3", "--k", "5"]);
    assert_eq!(code(&o), 3);
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "RATE_VIOLATION");
}

#[test]
fn unproven_generator_exit_5() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["plan", "--construction", "1", "--s", "2", "--k", "8", "--t", "3,3,3,3", "--primes", "3,5,7,11"];
    let o = run(dir.path(), &args);
    assert_eq!(code(&o), 5, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FACTORIZATION_TIMEOUT"));
}

#[test]
fn example2_cluster_repair() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&run(d, &["plan", "--example", "example2", "--out", "p.json"])), 0);
    assert_eq!(code(&run(d, &["cluster", "init", "--plan", "p.json", "--seed", "42", "--out", "c.txt"])), 0);
    let o = run(d, &["repair", "--cluster", "c.txt", "--node", "0", "--transcript", "t.json", "--log", "l.csv"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "bits=300 cutset=300 verified=true");
    let t: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("t.json")).unwrap()).unwrap();
    assert_eq!(t["bits_transmitted"], 300);
    let log = std::fs::read_to_string(d.join("l.csv")).unwrap();
    assert_eq!(log.lines().next(), Some("from,to,bits,purpose"));
    assert_eq!(log.lines().count(), 11);

    let o = run(d, &["repair", "--cluster", "c.txt", "--node", "16"]);
    assert_eq!(stdout(&o).trim(), "bits=156 cutset=156 verified=true");
    let o = run(d, &["repair", "--cluster", "c.txt", "--node", "3", "--strategy", "naive"]);
    assert_eq!(stdout(&o).trim(), "bits=540 verified=true");
    assert_eq!(code(&run(d, &["repair", "--cluster", "c.txt", "--node", "17"])), 2);
}

#[test]
fn tampered_cluster_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run(d, &["plan", "--construction", "2", "--base-bits", "2", "--r", "8", "--primes", "2,3", "--out", "p.json"]);
    run(d, &["cluster", "init", "--plan", "p.json", "--out", "c.txt"]);
    let text = std::fs::read_to_string(d.join("c.txt")).unwrap();
    let line = text.lines().find(|l| l.starts_with("node 1 ")).unwrap();
    let flipped = format!("{}{}", &line[..line.len() - 1], if line.ends_with('0') { '1' } else { '0' });
    std::fs::write(d.join("c.txt"), text.replace(line, &flipped)).unwrap();
    let o = run(d, &["repair", "--cluster", "c.txt", "--node", "0"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("DIGEST_MISMATCH"));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut files = Vec::new();
    for round in 0..2 {
        let (p, c, t) = (format!("p{round}.json"), format!("c{round}.txt"), format!("t{round}.json"));
        run(d, &["plan", "--construction", "1", "--s", "2", "--primes", "3,5", "--t", "3,3", "--k", "2", "--out", &p]);
        run(d, &["cluster", "init", "--plan", &p, "--seed", "7", "--out", &c]);
        run(d, &["repair", "--cluster", &c, "--node", "4", "--transcript", &t]);
        files.push([p, c, t].map(|f| std::fs::read(d.join(f)).unwrap()));
    }
    assert_eq!(files[0][0], files[1][0]);
    assert_eq!(files[0][2], files[1][2]);
    // cluster files differ only in the plan file name they reference
    let c0 = String::from_utf8(files[0][1].clone()).unwrap().replace("p0.json", "p1.json");
    assert_eq!(c0.as_bytes(), &files[1][1][..]);
}

#[test]
fn encode_writes_codeword() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run(d, &["plan", "--construction", "2", "--base-bits", "2", "--r", "8", "--primes", "2,3", "--out", "p.json"]);
    let o = run(d, &["encode", "--plan", "p.json", "--message", "001,002,003,004,005", "--out", "cw.txt"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let cw = std::fs::read_to_string(d.join("cw.txt")).unwrap();
    assert_eq!(cw.lines().count(), 3 + 13);
    let o = run(d, &["encode", "--plan", "p.json", "--message", "001", "--out", "cw.txt"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bounds_and_tradeoff() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(stdout(&run(d, &["bound", "--k", "8", "--t", "1"])).trim(), "510510");
    assert_eq!(stdout(&run(d, &["bound", "--k", "3", "--t", "3"])).trim(), "1");
    assert_eq!(code(&run(d, &["bound", "--k", "3"])), 2);
    let csv = stdout(&run(d, &["tradeoff", "--n", "14", "--k", "10"]));
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[1], "1,223092870,13,13,4");
    assert_eq!(code(&run(d, &["tradeoff", "--n", "5", "--k", "5"])), 2);
}

#[test]
fn reproduce_examples() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["reproduce", "example2"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(out.matches("PASS").count(), 18);
    assert!(out.ends_with("example2: PASS\n"));

    let o = run(dir.path(), &["--json", "reproduce", "example1"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["rows"][0]["bits"], 10395);
    assert_eq!(v["rows"][2]["bits"], 18480);

    assert_eq!(code(&run(dir.path(), &["reproduce", "example3"])), 2);
}
