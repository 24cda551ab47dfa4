use std::path::Path;
use std::process::{Command, Output};

fn quasihelm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quasihelm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn halfline_on_constant_medium() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = quasihelm(&[
        "halfline", "--mu", "constant(1)", "--rho", "constant(1)", "--h", "1/16", "--h-theta", "1/200",
        "--guide-n", "4", "--samples", "11", "--output", out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let u = read_rows(&dir.path().join("u.csv"));
    assert_eq!(u[0], ["x", "u_re", "u_im"]);
    assert_eq!(u.len(), 12);
    let u0: f64 = u[1][1].parse().unwrap();
    assert!((u0 - 1.0).abs() < 1e-12);

    let d = read_rows(&dir.path().join("dtn.csv"));
    let re: f64 = d[1][0].parse().unwrap();
    let im: f64 = d[1][1].parse().unwrap();
    // -i w for (mu, rho) = (1, 1), w = 8 + 0.25i; P1 dispersion at h_theta = 1/200
    assert!((re - 0.25).abs() < 1e-2 && (im + 8.0).abs() < 1e-2, "{re} {im}");
    assert!(dir.path().join("guide.csv").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = quasihelm(&["halfline", "--h", "1/8", "--output", d.path().to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["u.csv", "dtn.csv", "guide.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
}

#[test]
fn fibrage_points_stay_in_the_unit_square() {
    let dir = tempfile::tempdir().unwrap();
    let o = quasihelm(&["fibrage", "--length", "5", "--step", "0.5", "--output", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let rows = read_rows(&dir.path().join("points.csv"));
    assert_eq!(rows[0], ["y1", "y2"]);
    assert_eq!(rows.len(), 12);
    for r in &rows[1..] {
        for v in r {
            let v: f64 = v.parse().unwrap();
            assert!((0.0..1.0).contains(&v));
        }
    }
}

#[test]
fn config_file_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# constant medium\nmu = constant(2)\nrho = constant(0.5)\nh = 1/8\noutput = res\n").unwrap();
    let o = quasihelm(&["halfline", "--config", conf.to_str().unwrap(), "--cells", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // output resolves against the config file's directory
    assert!(dir.path().join("res/u.csv").exists());
}

#[test]
fn bad_configuration_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for args in [
        vec!["halfline", "--omega", "8, -1", "--output", out],
        vec!["halfline", "--no-such-key", "1", "--output", out],
        vec!["halfline", "--h", "zero", "--output", out],
    ] {
        let o = quasihelm(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.starts_with("error [cli]"), "{err}");
    }
}

#[test]
fn missing_config_file_exits_with_2() {
    let o = quasihelm(&["halfline", "--config", "/nonexistent/run.conf"]);
    assert_eq!(o.status.code(), Some(2));
}
