use std::fs;
use std::path::Path;
use std::process::Command;

fn aggsim(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_aggsim")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("case.conf");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const QUICK: &str = "potential.kind = quadratic\ninit = rho1\nh = 0.04\ndt = 1e-3\nT = 0.05\n";

#[test]
fn run_writes_csv_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), QUICK);
    let out = dir.path().join("out");
    let o = aggsim(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--set", "output.every=10"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let ts = fs::read_to_string(out.join("timeseries.csv")).unwrap();
    let mut lines = ts.lines();
    assert_eq!(lines.next().unwrap(), "step,t,mass,centroid,min_j,max_j,min_h,max_speed,rho_max");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    assert!(rows[1].split(',').nth(1).unwrap().contains('e'));
    let profile = fs::read_to_string(out.join("profile_000050.csv")).unwrap();
    assert!(profile.starts_with("x,rho_h,u_h,size_h,rho_exact\n"));
    assert!(out.join("run_info.csv").exists() && out.join("config.txt").exists());

    // identical runs give identical files
    let again = dir.path().join("again");
    aggsim(&["run", "--config", &cfg, "--out", again.to_str().unwrap(), "--set", "output.every=10"]);
    for name in ["timeseries.csv", "profile_000050.csv", "profile_000000.csv"] {
        assert_eq!(fs::read(out.join(name)).unwrap(), fs::read(again.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn converge_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), QUICK);
    let out = dir.path().join("conv");
    let o = aggsim(&["converge", "--config", &cfg, "--h", "0.04,0.02,0.01", "--mode", "vs_exact", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let errors = fs::read_to_string(out.join("errors.csv")).unwrap();
    assert!(errors.starts_with("h,dt,steps,l1,lp,linf,dbl\n"));
    assert_eq!(errors.lines().count(), 4);
    assert!(fs::read_to_string(out.join("rates.csv")).unwrap().starts_with("metric,slope,intercept,residual\n"));

    let out = dir.path().join("sweep");
    let o = aggsim(&["sweep", "--config", &cfg, "--eps", "0.02,0.04,0.08", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let sweep = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(sweep.starts_with("method,epsilon,h,dt,l1,linf\nltp,,"));
    assert_eq!(sweep.lines().count(), 5);
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), QUICK);
    assert_eq!(aggsim(&["validate", "--config", &cfg]).status.code(), Some(0));
    assert_eq!(aggsim(&["validate", "--config", &cfg, "--set", "dt=0.03"]).status.code(), Some(2));
    assert_eq!(aggsim(&["validate", "--config", &cfg, "--set", "colour=blue"]).status.code(), Some(2));
    assert_eq!(aggsim(&["validate", "--config", "/nonexistent/case.conf"]).status.code(), Some(2));
    assert_eq!(aggsim(&["converge", "--config", &cfg, "--h", "0.04,0.02"]).status.code(), Some(2));
    assert_eq!(aggsim(&["bogus"]).status.code(), Some(2));
    let bad = write_config(dir.path(), "h = 0.01\nh = 0.02\n");
    assert_eq!(aggsim(&["run", "--config", &bad]).status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "potential.kind = power\npotential.a = 1.5\ninit = rho2\nh = 0.05\ndt = 0.5\nT = 1\njacobian = linearized\n",
    );
    let out = dir.path().join("o");
    let o = aggsim(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--set", "potential.kind=quadratic", "--set", "dt=1"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("timeseries.csv").exists());

    // a blow-up is a clean stop
    let o = aggsim(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--set", "domain.radius=0.5", "--set", "jacobian=exponential"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("stopped at step"));
}
