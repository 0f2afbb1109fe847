use std::path::Path;
use std::process::{Command, Output};

fn treesched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treesched"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write_fork(dir: &Path, name: &str, p: &str, k: &str) -> String {
    let path = dir.join(name).to_string_lossy().into_owned();
    let out = treesched(&["gen", "fork", "--p", p, "--k", k, "-o", &path]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    path
}

#[test]
fn gen_fork_to_stdout() {
    let out = treesched(&["gen", "fork", "--p", "2", "--k", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "3\n1 0 1 0 1\n2 1 1 0 1\n3 1 1 0 1\n");
}

#[test]
fn gen_3partition_emits_bounds_comment_and_roundtrips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("part.tree");
    let out = treesched(&[
        "gen",
        "3partition",
        "--elements",
        "3,3,4",
        "--b",
        "10",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# p=30 b_mem=33 b_cmax=3\n34\n"), "{text}");

    // The comment header must not break consumers of the file.
    let run = treesched(&[
        "run",
        path.to_str().unwrap(),
        "--heuristic",
        "par-subtrees",
        "-p",
        "4",
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
}

#[test]
fn gen_rejects_bad_parameters() {
    let out = treesched(&["gen", "fork", "--p", "0", "--k", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("at least 1"), "{}", stderr(&out));

    let out = treesched(&["gen", "3partition", "--elements", "3,3,5", "--b", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_is_deterministic() {
    let a = treesched(&["gen", "eta-mu", "--nodes", "60", "--seed", "5"]);
    let b = treesched(&["gen", "eta-mu", "--nodes", "60", "--seed", "5"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(stdout(&a), stdout(&b));
    let c = treesched(&["gen", "eta-mu", "--nodes", "60", "--seed", "6"]);
    assert_ne!(stdout(&a), stdout(&c));
}

#[test]
fn run_reports_fork_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_fork(dir.path(), "fork.tree", "2", "3");
    let out = treesched(&["run", &path, "--heuristic", "par-subtrees", "-p", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("makespan: 6\n"), "{text}");
    assert!(text.contains("peak_memory: 7\n"), "{text}");
    assert!(text.contains("norm_memory: 1\n"), "{text}");
}

#[test]
fn oracle_prints_front_and_flags_heuristics() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_fork(dir.path(), "fork.tree", "2", "3");
    let out = treesched(&["oracle", &path, "-p", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(
        stdout(&out),
        "makespan,memory\n\
         4,7\n\
         # par-subtrees: makespan=6 memory=7 dominated\n\
         # par-subtrees-optim: makespan=4 memory=7 on-front\n\
         # par-inner-first: makespan=4 memory=7 on-front\n\
         # par-deepest-first: makespan=4 memory=7 on-front\n"
    );
}

#[test]
fn oracle_enforces_node_limit() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_fork(dir.path(), "wide.tree", "19", "1"); // 20 nodes
    let out = treesched(&["oracle", &path, "-p", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("20 nodes"), "{}", stderr(&out));

    let out = treesched(&["oracle", &path, "-p", "2", "--limit", "20"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("makespan,memory\n11,20\n"));
}

#[test]
fn oracle_bounded_mode_answers_feasibility() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_fork(dir.path(), "fork.tree", "2", "3");
    let yes = treesched(&[
        "oracle",
        &path,
        "-p",
        "2",
        "--max-makespan",
        "4",
        "--max-memory",
        "7",
    ]);
    assert_eq!(yes.status.code(), Some(0), "{}", stderr(&yes));
    assert_eq!(stdout(&yes), "feasible: true\n");
    let no = treesched(&["oracle", &path, "-p", "2", "--max-memory", "6"]);
    assert_eq!(stdout(&no), "feasible: false\n");
}

#[test]
fn trace_single_node() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.tree");
    std::fs::write(&path, "1\n1 0 5 2 3\n").unwrap();
    let out = treesched(&[
        "trace",
        path.to_str().unwrap(),
        "--heuristic",
        "seq-postorder",
        "-p",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out), "time,memory\n0,5\n5,3\n");
}

#[test]
fn bench_is_byte_identical_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..3 {
        let out = treesched(&[
            "gen",
            "random",
            "--nodes",
            "40",
            "--seed",
            &seed.to_string(),
            "-o",
            dir.path().join(format!("t{seed}.tree")).to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let csv1 = dir.path().join("a.csv");
    let csv2 = dir.path().join("b.csv");
    let corpus = dir.path().to_str().unwrap();
    let one = treesched(&[
        "bench",
        corpus,
        "--procs",
        "2,4",
        "--jobs",
        "1",
        "-o",
        csv1.to_str().unwrap(),
    ]);
    assert_eq!(one.status.code(), Some(0), "{}", stderr(&one));
    let four = treesched(&[
        "bench",
        corpus,
        "--procs",
        "2,4",
        "--jobs",
        "4",
        "-o",
        csv2.to_str().unwrap(),
    ]);
    assert_eq!(four.status.code(), Some(0), "{}", stderr(&four));
    let a = std::fs::read(&csv1).unwrap();
    let b = std::fs::read(&csv2).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
    // 3 trees x 4 default heuristics x 2 processor counts, header, summary.
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 25);
    assert!(!csv1.with_extension("skipped").exists());
}

#[test]
fn bench_logs_skipped_files_in_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    write_fork(dir.path(), "ok.tree", "2", "2");
    std::fs::write(dir.path().join("bad.tree"), "garbage\n").unwrap();
    let csv = dir.path().join("out.csv");
    let out = treesched(&[
        "bench",
        dir.path().to_str().unwrap(),
        "--procs",
        "2",
        "--heuristics",
        "par-subtrees",
        "-o",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let sidecar = csv.with_extension("skipped");
    let log = std::fs::read_to_string(&sidecar).unwrap();
    assert!(log.starts_with("bad.tree,"), "{log}");
}

#[test]
fn exit_codes_for_bad_usage_and_bad_input() {
    // Unknown subcommand and unknown heuristic are usage errors.
    assert_eq!(treesched(&["frobnicate"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let path = write_fork(dir.path(), "fork.tree", "2", "2");
    let out = treesched(&["run", &path, "--heuristic", "nope", "-p", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        treesched(&["run", &path, "--heuristic", "par-subtrees", "-p", "0"])
            .status
            .code(),
        Some(1)
    );

    // Missing and malformed files are input errors.
    let missing = treesched(&[
        "run",
        "/nonexistent.tree",
        "--heuristic",
        "par-subtrees",
        "-p",
        "2",
    ]);
    assert_eq!(missing.status.code(), Some(2));
    let bad = dir.path().join("bad.tree");
    std::fs::write(&bad, "2\n1 0 1 0 1\n2 9 1 0 1\n").unwrap();
    let parse = treesched(&[
        "run",
        bad.to_str().unwrap(),
        "--heuristic",
        "par-subtrees",
        "-p",
        "2",
    ]);
    assert_eq!(parse.status.code(), Some(2));
    assert!(stderr(&parse).contains("parsing"), "{}", stderr(&parse));

    // --help exits cleanly.
    assert_eq!(treesched(&["--help"]).status.code(), Some(0));
}
