use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL_SPEC: &str = r#"
[data]
classes = 4
samples_per_class = 40
noise = 0.3
seed = 3

[train]
epochs = 4
learning_rate = 0.05
batch_size = 16
seed = 3
"#;

fn bitsiege(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bitsiege"))
        .args(args)
        .output()
        .expect("spawn bitsiege")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn train_small(dir: &Path) {
    let spec = dir.join("spec.toml");
    fs::write(&spec, SMALL_SPEC).unwrap();
    let out = bitsiege(&["train", "--config", p(&spec), "--out", p(dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn sweep_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    let text = format!("victim = \"victim.bsm\"\neval = \"test.bsd\"\nbit_widths = [8]\n{body}");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(bitsiege(&[]).status.code(), Some(1));
    assert_eq!(bitsiege(&["explode"]).status.code(), Some(1));
    assert_eq!(bitsiege(&["sweep"]).status.code(), Some(1));
    assert_eq!(
        bitsiege(&["quantize", "--model", "m", "--bits", "x", "--out", "o"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn help_exits_zero() {
    let out = bitsiege(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("sweep"));
}

#[test]
fn missing_files_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.bsm");
    let out = bitsiege(&[
        "quantize",
        "--model",
        p(&missing),
        "--bits",
        "8",
        "--out",
        p(&dir.path().join("q")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let out = bitsiege(&["report", "--out", p(&dir.path().join("nothing"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_prints_a_line_per_check() {
    let out = bitsiege(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 5, "{text}");
    assert!(!text.contains("[FAIL]"));
}

#[test]
fn train_quantize_attack_round() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    train_small(d);
    for f in ["victim.bsm", "train.bsd", "test.bsd"] {
        assert!(d.join(f).is_file(), "{f} missing");
    }

    let q = d.join("victim.q4");
    let out = bitsiege(&[
        "quantize",
        "--model",
        p(&d.join("victim.bsm")),
        "--bits",
        "4",
        "--out",
        p(&q),
    ]);
    assert!(out.status.success());
    assert!(q.is_file());
    let out = bitsiege(&[
        "quantize",
        "--model",
        p(&d.join("victim.bsm")),
        "--bits",
        "5",
        "--out",
        p(&q),
    ]);
    assert_eq!(out.status.code(), Some(1));

    let single = sweep_config(
        d,
        "one.toml",
        "recovery_rates = [0.9]\nseeds = [4]\nrankings = [\"fl2r\"]\nreconstructions = [\"czr\"]\nn_bf = 5\n",
    );
    let out = bitsiege(&["attack", "--config", p(&single), "--out", p(&d.join("res"))]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let traces: Vec<_> = fs::read_dir(d.join("res/traces")).unwrap().collect();
    assert_eq!(traces.len(), 1);
    let out = bitsiege(&["report", "--out", p(&d.join("res"))]);
    assert!(out.status.success());
    let results = fs::read_to_string(d.join("res/results.csv")).unwrap();
    assert_eq!(results.lines().count(), 1 + 6);

    let many = sweep_config(
        d,
        "many.toml",
        "recovery_rates = [0.9, 1.0]\nseeds = [4]\nrankings = [\"fl2r\"]\nreconstructions = [\"czr\"]\nn_bf = 5\n",
    );
    let out = bitsiege(&["attack", "--config", p(&many), "--out", p(&d.join("res2"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_is_deterministic_across_jobs_and_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    train_small(d);
    let cfg = sweep_config(
        d,
        "sweep.toml",
        "recovery_rates = [0.7, 1.0]\nseed_count = 3\nrankings = [\"fl2r\", \"random\"]\n\
         reconstructions = [\"czr\", \"all-zeros\"]\nn_bf = 8\n",
    );
    let run = |name: &str, jobs: &str| {
        let out = bitsiege(&["sweep", "--config", p(&cfg), "--out", p(&d.join(name)), "--jobs", jobs]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    };
    run("a", "1");
    run("b", "1");
    run("c", "4");
    for csv in ["results.csv", "series.csv", "summary.csv"] {
        let a = fs::read(d.join("a").join(csv)).unwrap();
        assert_eq!(
            a,
            fs::read(d.join("b").join(csv)).unwrap(),
            "{csv} differs between reruns"
        );
        assert_eq!(
            a,
            fs::read(d.join("c").join(csv)).unwrap(),
            "{csv} differs between job counts"
        );
    }
    let rows = fs::read_to_string(d.join("a/results.csv")).unwrap().lines().count() - 1;
    assert_eq!(rows, 2 * 3 * 2 * 2 * (8 + 1));

    // report regenerates the same bytes from the trace files alone
    let summary = fs::read(d.join("a/summary.csv")).unwrap();
    fs::remove_file(d.join("a/summary.csv")).unwrap();
    assert!(bitsiege(&["report", "--out", p(&d.join("a"))]).status.success());
    assert_eq!(summary, fs::read(d.join("a/summary.csv")).unwrap());
}

#[test]
fn seed_base_shifts_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    train_small(d);
    let cfg = sweep_config(
        d,
        "s.toml",
        "recovery_rates = [1.0]\nseeds = [0, 1]\nrankings = [\"random\"]\nreconstructions = [\"czr\"]\nn_bf = 2\n",
    );
    let out = bitsiege(&[
        "sweep",
        "--config",
        p(&cfg),
        "--out",
        p(&d.join("r")),
        "--seed-base",
        "100",
    ]);
    assert!(out.status.success());
    let csv = fs::read_to_string(d.join("r/results.csv")).unwrap();
    let seeds: std::collections::BTreeSet<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(seeds.into_iter().collect::<Vec<_>>(), ["100", "101"]);
}
