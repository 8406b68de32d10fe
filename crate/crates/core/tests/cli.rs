use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lra-cmaes"));
    cmd.env_remove("LRA_CMAES_OUT");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                files.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn run_hits_target_and_writes_history() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = run(&[
        "run",
        "--problem",
        "sphere",
        "--dim",
        "10",
        "--optimizer",
        "lra",
        "--seed",
        "1",
        "--out",
        out,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("t=1 evals=10 ")));
    assert!(stdout.lines().last().unwrap().starts_with("termination=target_hit"));

    let csv = fs::read_to_string(tmp.path().join("history_sphere-d10_lra_seed1.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,evals,f_m,sigma,eta_m,eta_Sigma,snr_m,snr_Sigma"));
    assert!(lines.count() > 100);
}

#[test]
fn exit_codes_partition_outcomes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    assert_eq!(code(&run(&["run", "--problem", "nosuch"])), 2);
    assert_eq!(code(&run(&["run", "--problem", "sphere", "--max-evals", "abc"])), 2);
    assert_eq!(
        code(&run(&[
            "run",
            "--problem",
            "sphere",
            "--optimizer",
            "lra",
            "--eta-m",
            "0.5",
            "--out",
            out
        ])),
        2
    );
    assert_eq!(code(&run(&["bogus"])), 2);
    assert_eq!(code(&run(&["--help"])), 0);

    let budget = run(&[
        "run",
        "--problem",
        "sphere",
        "--max-evals",
        "200",
        "--log-every",
        "0",
        "--out",
        out,
    ]);
    assert_eq!(code(&budget), 1);

    let numerical = run(&[
        "run",
        "--problem",
        "rastrigin",
        "--dim",
        "10",
        "--optimizer",
        "fixed",
        "--eta-m",
        "1",
        "--eta-sigma",
        "1",
        "--max-evals",
        "1e7",
        "--seed",
        "1",
        "--log-every",
        "0",
        "--out",
        out,
    ]);
    assert_eq!(code(&numerical), 3);
}

#[test]
fn output_directory_defaults_to_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["run", "--problem", "sphere", "--dim", "4", "--log-every", "0"])
        .env("LRA_CMAES_OUT", tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(tmp.path().join("history_sphere-d4_lra_seed1.csv").exists());
}

const SMALL_SUITE: &str = r#"
base_seed = 3
trials = 3
max_evals = 2e4
history_every = 25

[problems]
names = ["sphere", "ellipsoid"]
dims = [4]
noise_variances = [0.0, 1.0]

[[optimizers]]
kind = "lra"

[[optimizers]]
kind = "fixed"
eta_m = 1.0
eta_sigma = 1.0
"#;

#[test]
fn suite_outputs_are_byte_identical_across_runs_and_job_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("suite.toml");
    fs::write(&cfg, SMALL_SUITE).unwrap();
    let cfg = cfg.to_str().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(
        code(&run(&[
            "suite",
            "--config",
            cfg,
            "--jobs",
            "1",
            "--out",
            a.to_str().unwrap()
        ])),
        0
    );
    assert_eq!(
        code(&run(&[
            "suite",
            "--config",
            cfg,
            "--jobs",
            "3",
            "--out",
            b.to_str().unwrap()
        ])),
        0
    );
    let (ta, tb) = (read_tree(&a), read_tree(&b));
    assert_eq!(ta, tb);

    let names: Vec<&str> = ta.iter().map(|(n, _)| n.as_str()).collect();
    assert!(names.contains(&"trials.csv") && names.contains(&"summary.csv") && names.contains(&"summary.json"));
    assert_eq!(names.iter().filter(|n| n.starts_with("ecdf/")).count(), 8);
    assert_eq!(names.iter().filter(|n| n.starts_with("histories/")).count(), 24);
    let trials = String::from_utf8(ta.iter().find(|(n, _)| n == "trials.csv").unwrap().1.clone()).unwrap();
    assert!(trials.starts_with("problem,d,optimizer,eta_m,eta_Sigma,seed,success,evals,termination,"));
    assert_eq!(trials.lines().count(), 1 + 24);
}

#[test]
fn single_point_sweep_matches_suite() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("suite.toml");
    fs::write(&cfg, SMALL_SUITE).unwrap();
    let cfg = cfg.to_str().unwrap();
    let suite_dir = tmp.path().join("suite");
    let sweep_dir = tmp.path().join("sweep");
    assert_eq!(
        code(&run(&["suite", "--config", cfg, "--out", suite_dir.to_str().unwrap()])),
        0
    );
    let o = run(&[
        "sweep",
        "--config",
        cfg,
        "--parameter",
        "alpha",
        "--values",
        "1.4",
        "--out",
        sweep_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_tree(&suite_dir), read_tree(&sweep_dir.join("alpha-1.4")));

    let sweep = fs::read_to_string(sweep_dir.join("sweep.csv")).unwrap();
    assert!(sweep.starts_with("parameter,value,problem,d,noise_var,optimizer,"));
    assert_eq!(sweep.lines().count(), 1 + 8);
}

#[test]
fn malformed_configs_exit_with_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        (
            format!("{SMALL_SUITE}\n[sweep]\nparameter = \"alpha\"\nvalues = []\n"),
            "sweep.values",
        ),
        (SMALL_SUITE.replace("trials = 3", "trials = 3\ntrails = 4"), "line 4"),
        (SMALL_SUITE.replace("dims = [4]", "dims = []"), "problems.dims"),
        (
            SMALL_SUITE.replace("max_evals = 2e4", "max_evals = \"lots\""),
            "max_evals",
        ),
    ];
    for (i, (text, needle)) in cases.iter().enumerate() {
        let path = tmp.path().join(format!("bad{i}.toml"));
        fs::write(&path, text).unwrap();
        let out = tmp.path().join(format!("out{i}"));
        let o = run(&[
            "sweep",
            "--config",
            path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 2);
        let stderr = String::from_utf8_lossy(&o.stderr);
        assert!(stderr.contains(needle), "case {i}: {stderr}");
    }
    assert_eq!(code(&run(&["suite", "--preset", "nosuch"])), 2);
    assert_eq!(code(&run(&["sweep", "--config", "/nonexistent/x.toml"])), 2);
    // a suite config without a [sweep] section cannot be swept
    let path = tmp.path().join("nosweep.toml");
    fs::write(&path, SMALL_SUITE).unwrap();
    assert_eq!(
        code(&run(&[
            "sweep",
            "--config",
            path.to_str().unwrap(),
            "--out",
            tmp.path().to_str().unwrap()
        ])),
        2
    );
}

#[test]
fn presets_run_at_reduced_scale() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("noisy");
    let o = run(&[
        "suite",
        "--preset",
        "benchmark-noisy",
        "--trials",
        "1",
        "--max-evals",
        "2000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    // 8 problems × 2 noise levels × 2 optimizers
    assert_eq!(fs::read_dir(out.join("ecdf")).unwrap().count(), 32);
}
