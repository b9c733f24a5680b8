use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_market-mech"))
}

fn run(args: &[&str]) -> String {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("market-mech-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn gen_is_deterministic_and_parseable() {
    let a = run(&["gen", "--n", "8", "--seed", "5"]);
    assert_eq!(a, run(&["gen", "--n", "8", "--seed", "5"]));
    assert_ne!(a, run(&["gen", "--n", "8", "--seed", "6"]));
    assert!(a.starts_with("deadline 10\n"));
    assert_eq!(a.lines().count(), 9);
    let w = run(&["gen", "--witness", "fast-expensive(5,0.01,0.1)"]);
    assert!(w.contains("0.96 0.1"));
}

#[test]
fn bench_reports_original_indices() {
    let p = scratch("bench.txt", "deadline 10\n0.6 2\n0.2 9\n0.3 8\n");
    let out = run(&[
        "bench",
        "--instance",
        p.to_str().unwrap(),
        "--k",
        "2",
        "--brute-force",
    ]);
    let mut lines = out.lines();
    assert_eq!(
        lines.next(),
        Some("kstar,alpha,time_guarantee,k,k_best_set")
    );
    // Agents 2 (0.2) and 1 (0.6) form the 2-best set.
    assert_eq!(lines.next(), Some("2,1,2,2,1 2"));
    assert_eq!(lines.next(), Some("# brute force agrees"));
}

#[test]
fn solve_equal_and_oracle() {
    let p = scratch("solve.txt", "deadline 1\n2/3 1\n1/3 1\n");
    let err = bin()
        .args([
            "solve",
            "--rule",
            "equal",
            "--instance",
            p.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    // The witness pair is not strictly monotone, so the file loader refuses it.
    assert!(!err.status.success());

    let p = scratch("solve2.txt", "deadline 10\n0.4 7\n0.2 9\n0.3 8\n");
    let out = run(&[
        "solve",
        "--rule",
        "equal",
        "--instance",
        p.to_str().unwrap(),
    ]);
    assert_eq!(out.lines().nth(1), Some("2 3,2,2/3,8,"));
    let oracle = run(&[
        "solve",
        "--rule",
        "equal",
        "--instance",
        p.to_str().unwrap(),
        "--oracle",
        "--format",
        "text",
    ]);
    assert!(oracle.lines().all(|l| l.contains("size 2")));
}

#[test]
fn solve_best_set_with_buckets() {
    let inst = scratch("bs.txt", "deadline 10\n0.2 9\n0.2 8\n0.7 5\n");
    let buckets = scratch("buckets.txt", "7 10 0.2\n4 6 0.7\n");
    let out = run(&[
        "solve",
        "--rule",
        "best-set",
        "--k",
        "2",
        "--instance",
        inst.to_str().unwrap(),
        "--buckets",
        buckets.to_str().unwrap(),
    ]);
    assert!(out.lines().nth(1).unwrap().starts_with("2 3,2,"));
}

#[test]
fn auction_table_and_audits() {
    let p = scratch("auction.txt", "deadline 10\n0.1 10\n0.2 8\n0.3 6\n0.4 4\n");
    let out = run(&[
        "auction",
        "--mechanism",
        "igsp",
        "--k",
        "3",
        "--instance",
        p.to_str().unwrap(),
        "--audit",
        "ic",
    ]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[1], "1,0.1,10,1,0.2");
    assert_eq!(lines[4], "4,0.4,4,1,0.8");
    assert_eq!(
        lines.last(),
        Some(&"agent,reported_cost,reported_time,truthful_utility,deviant_utility")
    );
    let out = run(&[
        "auction",
        "--mechanism",
        "inverse-k-price",
        "--instance",
        p.to_str().unwrap(),
        "--audit",
        "ir",
    ]);
    assert!(out.trim_end().ends_with("agent,reward,cost"));
}

#[test]
fn experiments_write_csv() {
    let dir = scratch("x", "");
    let out = dir.with_file_name("exp1.csv");
    run(&[
        "exp1",
        "--n-min",
        "5",
        "--n-max",
        "25",
        "--n-step",
        "10",
        "--replications",
        "2",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text
        .starts_with("n,replication,kstar,participants_eq,participants_harm,ratio_eq,ratio_harm,"));
    assert_eq!(text.lines().count(), 1 + 6 + 3);
    let e2 = run(&[
        "exp2",
        "--n-min",
        "5",
        "--n-max",
        "5",
        "--replications",
        "2",
        "--dist",
        "exp1-normalized",
    ]);
    assert_eq!(
        e2,
        run(&[
            "exp2",
            "--n-min",
            "5",
            "--n-max",
            "5",
            "--replications",
            "2",
            "--dist",
            "exp1-normalized"
        ])
    );
}

#[test]
fn bad_input_is_reported() {
    for args in [
        vec!["exp1", "--dist", "normal"],
        vec![
            "auction",
            "--mechanism",
            "vcg",
            "--instance",
            "/nonexistent",
        ],
        vec!["gen", "--witness", "nope"],
    ] {
        let out = bin().args(&args).output().unwrap();
        assert!(!out.status.success(), "{args:?}");
    }
}
