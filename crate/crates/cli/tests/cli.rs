use std::path::Path;
use std::process::{Command, Output};

fn kdvist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kdvist")).args(args).output().expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&read(dir, "manifest.json")).unwrap()
}

const SMALL_GRID: [&str; 4] = ["--set", "grid.x={start=-4, stop=4, count=9}", "--set", "grid.t=[0.1, 0.3]"];

fn solve(potential: &str, out: &Path) -> Output {
    let pot = format!("potential={potential:?}");
    let mut args = vec!["solve", "--set", &pot, "-o", out.to_str().unwrap()];
    args.extend(SMALL_GRID);
    kdvist(&args)
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(solve("box(1, 1)", &a).status.success());
    assert!(solve("box(1, 1)", &b).status.success());
    assert_eq!(read(&a, "solution.csv"), read(&b, "solution.csv"));
    let (ma, mb) = (manifest(&a), manifest(&b));
    assert_eq!(ma["outputs"], mb["outputs"]);
}

#[test]
fn manifest_lists_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scatter");
    let run = kdvist(&["scatter", "--set", "potential=\"one_soliton(1, 2)\"", "-o", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let m = manifest(&out);
    assert_eq!(m["tool"], "kdvist");
    assert_eq!(m["command"], "scatter");
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    assert!(m["config"].as_str().unwrap().contains("one_soliton(1, 2)"));
    let outputs = m["outputs"].as_array().unwrap();
    let names: Vec<&str> = outputs.iter().map(|o| o["path"].as_str().unwrap()).collect();
    assert_eq!(names, ["scattering.dat", "summary.txt"]);
    for o in outputs {
        let text = read(&out, o["path"].as_str().unwrap());
        assert_eq!(o["bytes"].as_u64().unwrap() as usize, text.len());
    }
    let atoms = m["certificates"]["atoms"].as_array().unwrap();
    assert_eq!(atoms.len(), 1);
    assert!((atoms[0]["kappa"].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn bad_configuration_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "potential = \"box(1, 1)\"\n[hankel]\nnodez = 64\n").unwrap();
    let run = kdvist(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("nodez"));

    let run = kdvist(&["scatter", "--set", "potential=\"box(1, -1)\""]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn zero_potential_solves_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("zero");
    let run = solve("zero", &out);
    assert!(run.status.success());
    let csv = read(&out, "solution.csv");
    let mut rows = csv.lines();
    assert_eq!(rows.next().unwrap(), "x,t,q,logdet,lambda_min,residual,n,length,converged,status");
    let mut count = 0;
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[2].parse::<f64>().unwrap(), 0.0, "{row}");
        assert_eq!(cols[9], "ok");
        count += 1;
    }
    assert_eq!(count, 18);
}

fn validate(extra: &[&str], out: &Path) -> Output {
    let mut args = vec!["validate", "--set", "potential=\"one_soliton(1, 2)\"", "--set", "validate.oracle=false", "-o", out.to_str().unwrap()];
    args.extend(SMALL_GRID);
    args.extend(extra);
    kdvist(&args)
}

fn status_of(csv: &str, check: &str) -> String {
    csv.lines().find(|l| l.starts_with(&format!("{check},"))).unwrap().split(',').nth(1).unwrap().to_string()
}

#[test]
fn validation_passes_and_negative_control_fails() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good");
    assert_eq!(validate(&[], &good).status.code(), Some(0));
    let csv = read(&good, "validate.csv");
    assert_eq!(status_of(&csv, "soliton_round_trip"), "pass");
    assert_eq!(status_of(&csv, "split_identity"), "pass");

    let bad = dir.path().join("bad");
    assert_eq!(validate(&["--set", "validate.negative_control=true"], &bad).status.code(), Some(1));
    let csv = read(&bad, "validate.csv");
    assert_eq!(status_of(&csv, "soliton_round_trip"), "fail");
    assert_eq!(status_of(&csv, "split_identity"), "fail");
    assert_eq!(manifest(&bad)["certificates"]["negative_control"], true);
}

#[test]
fn initial_time_is_advisory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t0");
    let run = kdvist(&[
        "solve",
        "--set",
        "potential=\"one_soliton(1, 2)\"",
        "--set",
        "grid.x=[-1, 0, 1]",
        "--set",
        "grid.t=[0, 0.2]",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let csv = read(&out, "solution.csv");
    for row in csv.lines().skip(1) {
        let t: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(row.ends_with(",advisory"), t == 0.0, "{row}");
    }

    let v = dir.path().join("v");
    assert_eq!(validate(&["--set", "grid.t=[0, 0.2]"], &v).status.code(), Some(0));
    assert_eq!(status_of(&read(&v, "validate.csv"), "positivity_t0"), "advisory");
}
