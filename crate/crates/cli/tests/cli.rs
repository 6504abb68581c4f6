use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn skewlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skewlab"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

#[test]
fn generate_then_solve_a_saved_dataset() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.toml"), "[sweep]\nn = [4]\np = [0.5]\n").unwrap();
    let o = skewlab(&["gen", "--config", "g.toml", "--out", "gen"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let data = "gen/datasets/p0.5_b1_n4_s0.csv";
    assert!(dir.path().join("gen/datasets/p0.5_b1_n4_s0.meta").exists());

    let o = skewlab(
        &["maxmargin", "--data", data, "--mask", "full", "--out", "mm"],
        dir.path(),
    );
    assert!(o.status.success());
    let kv = String::from_utf8(o.stdout).unwrap();
    assert!(kv.contains("w_inv=1\n") || kv.contains("w_inv=0.99999"), "{kv}");
    assert!(kv.contains("converged=true"));

    let o = skewlab(
        &[
            "maxmargin",
            "--data",
            data,
            "--subset",
            "min",
            "--mask",
            "inv",
            "--out",
            "mm2",
        ],
        dir.path(),
    );
    assert!(o.status.success());
}

#[test]
fn worked_instance_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("w.toml"), "[gen]\ngenerator = \"geometric\"\n").unwrap();
    let o = skewlab(&["skews", "--config", "w.toml", "--out", "s"], dir.path());
    assert!(o.status.success());
    let kv = String::from_utf8(o.stdout).unwrap();
    assert!(
        kv.lines()
            .any(|l| l.starts_with("upper_bound=10") || l.starts_with("upper_bound=9.99999")),
        "{kv}"
    );

    let o = skewlab(
        &[
            "maxmargin",
            "--config",
            "w.toml",
            "--targets",
            "balanced:0.05",
            "--out",
            "b",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let kv = String::from_utf8(o.stdout).unwrap();
    let w_sp: f64 = kv
        .lines()
        .find_map(|l| l.strip_prefix("w_sp="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(w_sp.abs() < 1e-6);
}

#[test]
fn dynamics_report_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("d.toml"),
        "[sweep]\np = [0.5, 0.9]\nn = [32]\n[gen]\ncounts = \"paired\"\n[dynamics]\nloss = \"logistic\"\nmode = \"discrete\"\nlr = 0.01\nbatch_size = 8\nblock = 2\ncheckpoints = [1, 10, 100]\n",
    )
    .unwrap();
    let o = skewlab(
        &["dynamics", "--config", "d.toml", "--out", "o", "--jobs", "2"],
        dir.path(),
    );
    assert!(o.status.success());
    let traj = fs::read_to_string(dir.path().join("o/trajectories/p0.5_b1_n32_s0.csv")).unwrap();
    assert_eq!(
        traj.lines().next().unwrap(),
        "t,loss,w_inv_norm,w_sp,beta,beta_2d,residual_norm"
    );
    for line in traj.lines().skip(1) {
        assert_eq!(line.split(',').nth(3).unwrap(), "0");
    }
    let svg = fs::read_to_string(dir.path().join("o/dynamics.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);

    let o = skewlab(&["report", "--out", "o"], dir.path());
    assert!(o.status.success());
    assert!(dir.path().join("o/report/fig5a.svg").exists());
}

#[test]
fn exit_status_reflects_failures() {
    let dir = tempfile::tempdir().unwrap();
    // contradictory labels on identical points cannot be separated
    fs::write(dir.path().join("bad.csv"), "label,sp0,inv0\n1,1,1\n-1,1,1\n").unwrap();
    let o = skewlab(&["maxmargin", "--data", "bad.csv", "--out", "o"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let f = fs::read_to_string(dir.path().join("o/failures.csv")).unwrap();
    assert_eq!(f.lines().count(), 2);

    let o = skewlab(&["gen", "--config", "missing.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = skewlab(&["verify", "--only", "99"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_subset_prints_one_line_per_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let o = skewlab(&["verify", "--only", "2,4,12"], dir.path());
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().count(), 3);
    assert!(out.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        skewlab_cli::ExperimentConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        n += 1;
    }
    assert!(n >= 4);
}

#[test]
fn config_kind_must_match_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("k.toml"), "kind = \"skews\"\n").unwrap();
    let o = skewlab(&["dynamics", "--config", "k.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
