use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_swbound"));
    c.env_remove("SWBOUND_OUTPUT_DIR");
    c
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    assert!(!fs::read_to_string(path).unwrap().contains('\r'));
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn zeno_example1_saturates_at_the_predicted_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("z1.csv");
    let cfg = write_config(
        dir.path(),
        "z1.cfg",
        &format!(
            "scenario = zeno-example1\ndelta0 = 1\nomega = 0.05\nt_max = 40\ndt = 0.1\noutput = {}\n",
            out.display()
        ),
    );
    let o = bin().arg("run").arg(&cfg).output().unwrap();
    assert!(o.status.success(), "{}", stdout(&o));
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["t", "epsilon", "bound_exact", "bound_asymptotic"]);
    assert_eq!(rows.len(), 401);
    let target = 2.0 * 0.05 / (2.0 + 0.05 * 0.05);
    let last = num(&rows[400][1]);
    assert!((last - target).abs() < 0.02 * target, "{last} vs {target}");
    for r in &rows {
        assert!(num(&r[1]) <= num(&r[2]));
        // 17 significant digits in scientific notation.
        assert_eq!(r[0].split('e').next().unwrap().replace(['-', '.'], "").len(), 17);
    }
}

#[test]
fn bound_table_slopes_cross_near_the_crossover() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tables.csv");
    let cfg = write_config(
        dir.path(),
        "t.cfg",
        &format!("scenario = bound-tables\nx_min = 0.1\nx_max = 0.3\nx_count = 201\noutput = {}\n", out.display()),
    );
    assert!(bin().arg("run").arg(&cfg).status().unwrap().success());
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["x", "slope_b1", "slope_b2", "intercept_b1", "intercept_b2"]);
    let diff: Vec<(f64, f64)> = rows.iter().map(|r| (num(&r[0]), num(&r[1]) - num(&r[2]))).collect();
    let k = diff.windows(2).position(|w| w[0].1.signum() != w[1].1.signum()).expect("slopes cross");
    let ((x0, d0), (x1, d1)) = (diff[k], diff[k + 1]);
    let x = x0 - d0 * (x1 - x0) / (d1 - d0);
    assert!((x - 0.1887).abs() < 5e-4, "crossing at {x}");
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let body = |name: &str| {
        format!(
            "scenario = closed-bound\nmodel = random\nseed = 42\nt_max = 50\ndt = 0.5\noutput = {}\n",
            dir.path().join(name).display()
        )
    };
    for name in ["a.csv", "b.csv"] {
        let cfg = write_config(dir.path(), &format!("{name}.cfg"), &body(name));
        assert!(bin().arg("run").arg(&cfg).status().unwrap().success());
    }
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    let b = fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    let (header, _) = read_csv(&dir.path().join("a.csv"));
    assert_eq!(header, ["t", "epsilon", "b1", "b2", "asymptotic"]);
}

#[test]
fn output_directory_override() {
    let dir = tempfile::tempdir().unwrap();
    let redirect = dir.path().join("redirected");
    let cfg = write_config(
        dir.path(),
        "s.cfg",
        "scenario = single-state\ndelta0 = 10\nomega = 1\nt_max = 10\ndt = 0.1\noutput = nowhere/s.csv\n",
    );
    let o = bin().arg("run").arg(&cfg).env("SWBOUND_OUTPUT_DIR", &redirect).output().unwrap();
    assert!(o.status.success());
    let (header, rows) = read_csv(&redirect.join("s.csv"));
    assert_eq!(header, ["t", "epsilon", "const_bound"]);
    assert_eq!(rows.len(), 101);
    assert!(!Path::new("nowhere").exists());
}

#[test]
fn validate_reports_keys() {
    let dir = tempfile::tempdir().unwrap();
    let bad =
        write_config(dir.path(), "bad.cfg", "scenario = pxp-lightcone\ndelta0 = -1\nomega = 2\nt_max = 5\ndt = 0.1\n");
    let o = bin().arg("validate").arg(&bad).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("N: required"), "{text}");
    assert!(text.contains("delta0: must be a positive number"), "{text}");
    let good = write_config(
        dir.path(),
        "good.cfg",
        "scenario = pxp-lightcone\nN = 6\ndelta0 = 10\nomega = 2\nt_max = 5\ndt = 0.1\n",
    );
    let o = bin().arg("validate").arg(&good).output().unwrap();
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "ok");
    let o = bin().arg("run").arg(&bad).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn lightcone_writes_long_table_and_crossings() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lc.csv");
    let cfg = write_config(
        dir.path(),
        "lc.cfg",
        &format!(
            "scenario = pxp-lightcone\nN = 6\ndelta0 = 10\nomega = 2\nt_max = 4\ndt = 0.1\noutput = {}\n",
            out.display()
        ),
    );
    let o = bin().arg("run").arg(&cfg).output().unwrap();
    assert!(o.status.success(), "{}", stdout(&o));
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["t", "site", "commutator_norm"]);
    assert_eq!(rows.len(), 41 * 6);
    assert!(rows.iter().all(|r| (0.0..=2.0 + 1e-12).contains(&num(&r[2]))));
    let (header, crossings) = read_csv(&dir.path().join("lc_crossings.csv"));
    assert_eq!(header, ["site", "crossing_time"]);
    let times: Vec<f64> = crossings.iter().map(|r| num(&r[1])).collect();
    assert!(times.len() >= 4);
    assert!(times.windows(2).all(|w| w[0] < w[1]), "front advances: {times:?}");
}

#[test]
fn sweep_writes_runs_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let cfg = write_config(
        dir.path(),
        "b.cfg",
        &format!("scenario = bound-tables\nx_max = 0.4\noutput = {}\n", out.display()),
    );
    let o = bin().args(["sweep"]).arg(&cfg).args(["--axis", "x_max", "--values", "0.3,0.45,0.7"]).output().unwrap();
    // One member is out of range, so the sweep reports failure but finishes.
    assert_eq!(o.status.code(), Some(1));
    let (header, rows) = read_csv(&dir.path().join("b_x_max_summary.csv"));
    assert_eq!(header, ["x_max", "status", "crossover", "max_curve_deviation"]);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][1], "ok");
    assert_eq!(rows[1][1], "ok");
    assert!(rows[2][1].starts_with("failed: "), "{}", rows[2][1]);
    assert!(rows[2][2].is_empty());
    assert!(dir.path().join("b_x_max_0.3.csv").exists());
    assert!(dir.path().join("b_x_max_0.45.csv").exists());

    let o = bin().args(["sweep"]).arg(&cfg).args(["--axis", "x_max", "--values", ""]).output().unwrap();
    assert!(o.status.success());
    let (_, rows) = read_csv(&dir.path().join("b_x_max_summary.csv"));
    assert!(rows.is_empty());

    let o = bin().args(["sweep"]).arg(&cfg).args(["--axis", "delta0", "--values", "1"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let o = bin().arg("selftest").output().unwrap();
    let text = stdout(&o);
    assert!(o.status.success(), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 7, "{text}");
}
