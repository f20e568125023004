use std::path::Path;
use std::process::{Command, Output};

fn ldg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ldg")).args(args).output().expect("run ldg")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

#[test]
fn builtin_main_writes_twenty_finite_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let out = ldg(&["simulate", "--config", "paper-main", "--output-dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("step ")).count(), 20);
    assert!(text.contains("wall time"));
    for step in 1..=20 {
        let vtu = std::fs::read_to_string(dir.path().join(format!("solution.{step}.vtu"))).unwrap();
        assert!(!vtu.contains("NaN") && !vtu.contains("inf"));
        assert!(vtu.contains("NumberOfPoints=\"768\" NumberOfCells=\"128\""));
    }
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 20);
}

#[test]
fn order_five_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "[discretization]\np = 5\n").unwrap();
    let out = ldg(&["simulate", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("Polynomial order must be zero to four"));
}

#[test]
fn quiet_prints_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = ldg(&["simulate", "--config", &fixture("square.toml"), "--quiet", "--output-dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    assert!(dir.path().join("square.2.vtu").exists());
}

#[test]
fn mesh_info_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("half.toml");
    std::fs::write(&config, "[mesh]\nh_max = 0.5\n").unwrap();
    let out = ldg(&["mesh-info", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("numT = 8\nnumE = 16\nnumV = 9\n"));
    let again = ldg(&["mesh-info", "--config", config.to_str().unwrap()]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn mesh_info_reads_medit_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = ldg(&["mesh-info", "--config", &fixture("square.toml"), "--vtu", "--output-dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("numT = 4\nnumE = 8\nnumV = 5\nboundary edges = 4\n"), "{text}");
    assert!(text.contains("boundary IDs = [1, 2, 3, 4]"));
    assert!(dir.path().join("square_mesh.0.vtu").exists());
}

#[test]
fn missing_config_is_an_error() {
    let out = ldg(&["mesh-info", "--config", "/nonexistent/config.toml"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("cannot read config"));
}

#[test]
fn missing_mesh_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("m.toml");
    std::fs::write(&config, "[mesh]\nfile = \"nowhere.mesh\"\n").unwrap();
    let out = ldg(&["mesh-info", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("nowhere.mesh"));
}

#[test]
fn convergence_table_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = ldg(&["convergence", "--levels", "2", "--orders", "0,1", "--output-dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("K = 18"));
    let csv = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "p,j,h,K,error,alpha");
    assert_eq!(lines.len(), 7);
    assert!(lines[1].starts_with("0,0,") && lines[1].ends_with(','));
    assert!(lines[6].starts_with("1,2,") && lines[6].contains(",288,"));
}

#[test]
fn bad_thread_count_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ldg"))
        .args(["convergence", "--levels", "0", "--orders", "0", "--output-dir", dir.path().to_str().unwrap()])
        .env("LDG_THREADS", "many")
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(stderr(&out).contains("LDG_THREADS"));
}
