use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cellfree::io::read_topology;

const TINY: &[&str] = &[
    "--sim.L=24",
    "--sim.K=3",
    "--sim.n_user_topologies=2",
    "--sim.n_antenna_topologies=2",
    "--sim.n_small_scale=8",
];

fn cellfree(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cellfree"))
        .current_dir(dir)
        .env_remove("CELLFREE_SEED")
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn reruns_write_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["rates", "--sweep.sim.csi=perfect,imperfect"];
    args.extend_from_slice(TINY);
    for out in ["a", "b"] {
        let mut a = args.clone();
        a.extend(["--out", out]);
        assert_eq!(code(&cellfree(tmp.path(), &a)), 0);
    }
    let single = Command::new(env!("CARGO_BIN_EXE_cellfree"))
        .current_dir(tmp.path())
        .env("RAYON_NUM_THREADS", "1")
        .env_remove("CELLFREE_SEED")
        .args(&args)
        .args(["--out", "c"])
        .status()
        .unwrap();
    assert!(single.success());
    let a = fs::read(tmp.path().join("a/rates.csv")).unwrap();
    assert_eq!(a, fs::read(tmp.path().join("b/rates.csv")).unwrap());
    assert_eq!(a, fs::read(tmp.path().join("c/rates.csv")).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 1 + 2 * 7);
    assert!(tmp.path().join("a/points/p001/rae_lb_pct.csv").exists());
    assert!(tmp.path().join("a/rates.gp").exists());
}

#[test]
fn manifest_replays_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["rates", "--fast", "--out", "first"];
    args.extend_from_slice(TINY);
    assert_eq!(code(&cellfree(tmp.path(), &args)), 0);
    let manifest = fs::read_to_string(tmp.path().join("first/manifest.txt")).unwrap();
    assert!(manifest.contains("experiment.preset=fast"));
    assert!(manifest.contains("wall_time_s="));
    assert!(manifest.contains("sim.seed=2024"));
    let replay = cellfree(tmp.path(), &["rates", "--config", "first/manifest.txt", "--out", "second"]);
    assert_eq!(code(&replay), 0);
    assert_eq!(
        fs::read(tmp.path().join("first/rates.csv")).unwrap(),
        fs::read(tmp.path().join("second/rates.csv")).unwrap()
    );
}

#[test]
fn seed_env_changes_the_draws() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |out: &str, seed: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_cellfree"));
        c.current_dir(tmp.path()).env_remove("CELLFREE_SEED").args(["rates", "--out", out]).args(TINY);
        if let Some(s) = seed {
            c.env("CELLFREE_SEED", s);
        }
        assert!(c.status().unwrap().success());
        fs::read(tmp.path().join(out).join("rates.csv")).unwrap()
    };
    assert_ne!(run("x", None), run("y", Some("7")));
    let manifest = fs::read_to_string(tmp.path().join("y/manifest.txt")).unwrap();
    assert!(manifest.contains("sim.seed=7"));
}

#[test]
fn single_realization_cdf_is_a_unit_step() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cellfree(
        tmp.path(),
        &[
            "reproduce",
            "fig3a",
            "--sim.L=30",
            "--sim.n_user_topologies=1",
            "--sim.n_antenna_topologies=1",
            "--sim.n_small_scale=4",
            "--out",
            "cdf",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(tmp.path().join("cdf/fig3a.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[2].parse::<f64>().unwrap(), 1.0, "{row}");
    }
}

#[test]
fn cdf_rows_are_sorted_per_series() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["reproduce", "fig3b", "--out", "cdf"];
    args.extend_from_slice(TINY);
    assert_eq!(code(&cellfree(tmp.path(), &args)), 0);
    let text = fs::read_to_string(tmp.path().join("cdf/fig3b.csv")).unwrap();
    let mut last: Option<(String, f64, f64)> = None;
    for row in text.lines().skip(1) {
        let c: Vec<&str> = row.split(',').collect();
        let (x, f): (f64, f64) = (c[1].parse().unwrap(), c[2].parse().unwrap());
        if let Some((s, px, pf)) = &last {
            if s == c[0] {
                assert!(x >= *px && f > *pf);
            }
        }
        last = Some((c[0].to_string(), x, f));
    }
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.cfg"), "sim.L=300\nsim.warp=9\n").unwrap();
    fs::write(tmp.path().join("noeq.cfg"), "sim.L 300\n").unwrap();
    let cases: &[&[&str]] = &[
        &["rates", "--config", "bad.cfg"],
        &["rates", "--config", "noeq.cfg"],
        &["rates", "--config", "missing.cfg"],
        &["rates", "--sim.L=ten"],
        &["rates", "--sim.L=3", "--sim.K=5"],
        &["rates", "--sweep.sim.csi=perfect,psychic"],
        &["rates", "--experiment.metrics=speed"],
        &["reproduce", "fig9"],
        &["topology", "--placement", "1"],
        &["frobnicate"],
    ];
    for args in cases {
        let o = cellfree(tmp.path(), args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = Command::new(env!("CARGO_BIN_EXE_cellfree"))
        .current_dir(tmp.path())
        .env("CELLFREE_SEED", "not-a-number")
        .arg("rates")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn numerical_failure_exits_with_three_and_leaves_partials() {
    let tmp = tempfile::tempdir().unwrap();
    // Path gains overflow with so steep a path loss.
    let mut args = vec!["rates", "--sim.alpha=400", "--out", "r"];
    args.extend_from_slice(TINY);
    let o = cellfree(tmp.path(), &args);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(tmp.path().join("r/rates.csv.partial").exists());
    assert!(!tmp.path().join("r/rates.csv").exists());
    let manifest = fs::read_to_string(tmp.path().join("r/manifest.txt.partial")).unwrap();
    assert!(manifest.contains("# error="));
}

#[test]
fn topology_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cellfree(tmp.path(), &["topology", "--sim.L=12", "--sim.K=4", "--large-scale", "ls.csv"]);
    assert_eq!(code(&o), 0);
    let t = read_topology::<f64>(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!((t.num_antennas(), t.num_users()), (12, 4));
    let ls = fs::read_to_string(tmp.path().join("ls.csv")).unwrap();
    assert_eq!(ls.lines().count(), 1 + 12 * 4);
}

#[test]
fn approx_table_has_both_deployments() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cellfree(tmp.path(), &["approx", "--sim.L=40", "--sim.K=4"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 4 * 4);
    for user in 0..4 {
        let value = |kind: &str, coloc: &str| -> f64 {
            let prefix = format!("{user},{kind},{coloc},");
            let row = text.lines().find(|l| l.starts_with(&prefix)).unwrap();
            row.rsplit(',').next().unwrap().parse().unwrap()
        };
        assert!(value("lb_perfect", "false") <= value("ub_perfect", "false"));
        assert!(value("lb_perfect", "true") <= value("ub_perfect", "true"));
    }
}

#[test]
fn asymptotics_table() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cellfree(tmp.path(), &["asymptotics", "--sim.K=10", "--antennas", "150,300", "--orders", "1,2"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("l,L,K,alpha,q_numeric,q_error,q_asymptotic\n"));
    assert_eq!(text.lines().count(), 5);
    assert_eq!(code(&cellfree(tmp.path(), &["asymptotics", "--orders", "0"])), 2);
}
