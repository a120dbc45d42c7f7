use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const PARAMS: &str = "\
# two-mode lambda system, no diamagnetic terms
delta = 0.1
big_delta = 1.0
omega1 = 1.0
omega2 = 0.9
g1 = 0.1
g2 = 0.1
chi1 = 0
chi2 = 0
kappa1 = 0
kappa2 = 0
kappa3 = 0
";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lambda-dicke"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn params(dir: &TempDir) -> String {
    let p = dir.path().join("params.cfg");
    fs::write(&p, PARAMS).unwrap();
    p.to_string_lossy().into_owned()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn body_lines(file: &Path) -> Vec<String> {
    fs::read_to_string(file)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

#[test]
fn weak_coupling_minimize_is_normal() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "min.txt");
    let o = run(&["--params", &params(&dir), "--out", &out, "minimize"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).trim(), "phase=Normal e0=0");
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# lambda-dicke "));
    assert!(text.contains("# command = minimize\n"));
    assert!(text.contains("# omega2 = "));
    assert!(text.contains("\nphase = Normal\n"));
}

#[test]
fn overrides_reach_the_solver() {
    let dir = TempDir::new().unwrap();
    let o = run(&["--params", &params(&dir), "--set", "g2=1.5", "minimize"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("phase = Superradiant"), "{s}");
    assert!(s.contains("# g2 = "));
}

#[test]
fn repeated_scans_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let p = params(&dir);
    let a = path(&dir, "a.csv");
    let scan = || {
        run(&[
            "--params", &p, "--out", &a, "--gnuplot", "scan", "--n1", "9", "--n2", "4", "--g1-max", "1.2",
            "--g2-max", "0.5",
        ])
    };
    assert_eq!(scan().status.code(), Some(0));
    let first = fs::read(&a).unwrap();
    assert_eq!(scan().status.code(), Some(0));
    assert_eq!(first, fs::read(&a).unwrap());

    let rows = body_lines(Path::new(&a));
    assert_eq!(rows.len(), 1 + 9 * 4);
    assert!(rows[0].starts_with("g1,g2,g1_over_trk"));
    assert!(rows[1..].iter().all(|r| r.split(',').count() == 11));

    let boundary = dir.path().join("a.boundary.csv");
    let lines = body_lines(&boundary);
    assert_eq!(lines[0], "g2,g1_star,jump,order");
    // every row crosses g1c = 0.5 inside [0, 1.2]
    assert_eq!(lines.len(), 1 + 4);
    assert!(dir.path().join("a.plot.gp").exists());
}

#[test]
fn sweep_writes_one_row_per_entry() {
    let dir = TempDir::new().unwrap();
    let o = run(&[
        "--params", &params(&dir), "sweep", "--chi", "0,0.4", "--kappa", "0", "--rays", "g1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let rows: Vec<&str> = s.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "chi,kappa,ray,g_c");
    assert!(rows[1].starts_with("0.0000000000000000e0,0.0000000000000000e0,g1,"));
    let gc: f64 = rows[1].rsplit(',').next().unwrap().parse().unwrap();
    assert!((gc - 0.5).abs() < 1e-6);
}

#[test]
fn nogo_reports_positive_definite() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("ml.cfg");
    // kappa large enough for the sum rule to hold at every level
    fs::write(&file, "energies = 0, 1, 2.5\nomega = 1.3\nkappa = 1.25\ng = 0.5, 0.5, 0.3\n").unwrap();
    let o = run(&["--params", &file.to_string_lossy(), "nogo"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("positive_definite = true"), "{s}");
    assert!(s.lines().last().unwrap().starts_with("positive-definite, X="));

    let o = run(&["--seed", "3", "nogo", "--random", "25"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().last().unwrap(), "models=25 positive_definite=25 x_ge_omega=25");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let p = params(&dir);
    // validation errors
    assert_eq!(run(&["minimize"]).status.code(), Some(1));
    assert_eq!(run(&["--params", &p, "--set", "gamma=1", "minimize"]).status.code(), Some(1));
    assert_eq!(run(&["--params", &p, "--set", "omega1=-1", "minimize"]).status.code(), Some(1));
    assert_eq!(run(&["--params", &p, "--tol", "nonsense=1", "minimize"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    // numerical: superradiant already at g1 = 0, so there is no bracket
    let o = run(&["--params", &p, "--set", "g2=1.5", "boundary", "--g2", "1.5"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn small_ed_run() {
    let dir = TempDir::new().unwrap();
    let o = run(&["--params", &params(&dir), "ed", "--n", "1", "--cutoff1", "4", "--cutoff2", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    // 3 matter states for one atom, 5 x 5 photon states
    assert!(s.contains("dim = 75\n"), "{s}");
    assert!(s.lines().last().unwrap().starts_with("E/N="));
}
