use std::path::Path;
use std::process::{Command, Output};

fn selprior(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selprior"))
        .args(args)
        .current_dir(cwd)
        .env_remove("SELPRIOR_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout_value(o: &Output) -> f64 {
    let s = String::from_utf8_lossy(&o.stdout);
    s.lines().last().expect("value line").trim().parse().expect("numeric value")
}

#[test]
fn eval_prior_at_threshold() {
    let d = tempfile::tempdir().unwrap();
    let o = selprior(
        &["eval", "prior", "--model", "normal", "--theta", "0", "--n", "20", "--gamma", "1", "--t", "0", "--prior", "jeffreys"],
        d.path(),
    );
    assert!(o.status.success());
    let v = stdout_value(&o);
    assert!((v - (1.0 - 2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-9, "{v}");
    let echo = String::from_utf8_lossy(&o.stdout);
    assert!(echo.contains("gamma=1") && echo.contains("theta=0"), "{echo}");
}

#[test]
fn eval_coverage_cell_matches_table() {
    let d = tempfile::tempdir().unwrap();
    let o = selprior(
        &["eval", "coverage-cell", "--theta", "-0.5", "--gamma", "1", "--alpha", "0.25", "--prior", "uniform"],
        d.path(),
    );
    assert!(o.status.success());
    assert!((stdout_value(&o) - 0.110).abs() <= 2e-3);
}

#[test]
fn eval_quantile_is_posterior_median() {
    let d = tempfile::tempdir().unwrap();
    let base = ["--model", "normal", "--n", "20", "--gamma", "1", "--t", "0", "--y", "0.2", "--prior", "jeffreys"];
    let mut q = vec!["eval", "quantile", "--alpha", "0.5"];
    q.extend(base);
    let med = stdout_value(&selprior(&q, d.path()));
    let ms = med.to_string();
    let mut p = vec!["eval", "posterior", "--theta", ms.as_str()];
    p.extend(base);
    let cdf = stdout_value(&selprior(&p, d.path()));
    assert!((cdf - 0.5).abs() < 1e-6, "{med} {cdf}");
}

#[test]
fn table1_layout() {
    let d = tempfile::tempdir().unwrap();
    let o = selprior(&["run", "table1", "--scale", "paper", "--out", "res"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(d.path().join("res/table1.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("theta,gamma,alpha,prior,coverage"));
    assert_eq!(lines.count(), 2 * 3 * 3 * 7);
    assert!(!csv.contains('\r'));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("res/table1.json")).unwrap()).unwrap();
    assert_eq!(meta["experiment"], "table1");
    assert_eq!(meta["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn fig2_columns() {
    let d = tempfile::tempdir().unwrap();
    let o = selprior(&["run", "fig2", "--out", "."], d.path());
    assert!(o.status.success());
    let csv = std::fs::read_to_string(d.path().join("fig2.csv")).unwrap();
    assert_eq!(
        csv.lines().next(),
        Some("theta,uniform_prior,pmp_prior,jeffreys_prior,posterior_u,posterior_pmp,posterior_j")
    );
}

#[test]
fn same_seed_same_bytes() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("c.ini"), "experiment = fig5\nseed = 7\n[fig5]\nns = 10\nqs = 0.5\nreps = 200\n").unwrap();
    for out in ["a", "b"] {
        let o = selprior(&["run", "--config", "c.ini", "--out", out], d.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(d.path().join("a/fig5.csv")).unwrap();
    let b = std::fs::read(d.path().join("b/fig5.csv")).unwrap();
    assert_eq!(a, b);
    let o = selprior(&["run", "--config", "c.ini", "--out", "c", "--seed", "8"], d.path());
    assert!(o.status.success());
    assert_ne!(a, std::fs::read(d.path().join("c/fig5.csv")).unwrap());
}

#[test]
fn malformed_config_writes_nothing() {
    let d = tempfile::tempdir().unwrap();
    let cases = [
        "experiment = table1\n[table1]\nthetas\n",
        "experiment = table1\n[table1]\nbogus = 1\n",
        "experiment = nope\n",
        "experiment = table1\nscale = huge\n",
        "experiment = table1\n[table1]\ngammas = 2\n",
    ];
    for (i, body) in cases.iter().enumerate() {
        let cfg = format!("c{i}.ini");
        std::fs::write(d.path().join(&cfg), body).unwrap();
        let o = selprior(&["run", "--config", &cfg, "--out", "res"], d.path());
        assert_eq!(o.status.code(), Some(2), "case {i}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert!(!d.path().join("res").exists());
}

#[test]
fn low_acceptance_exit_code() {
    let d = tempfile::tempdir().unwrap();
    // Selection probability near 1e-12: rejection sampling gives up.
    std::fs::write(
        d.path().join("c.ini"),
        "experiment = custom\n[custom]\nmethod = monte_carlo\nt = 1.6\nthetas = -0.5\nreps = 20\n",
    )
    .unwrap();
    let o = selprior(&["run", "--config", "c.ini", "--out", "res"], d.path());
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!d.path().join("res").exists());
}

#[test]
fn env_overrides_config_out() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("c.ini"), "experiment = fig4\nout = from_config\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_selprior"))
        .args(["run", "--config", "c.ini"])
        .current_dir(d.path())
        .env("SELPRIOR_OUT_DIR", "from_env")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(d.path().join("from_env/fig4.csv").exists());
    assert!(!d.path().join("from_config").exists());
}

#[test]
fn describe_lists_defaults() {
    let d = tempfile::tempdir().unwrap();
    let o = selprior(&["describe", "table2", "--scale", "paper"], d.path());
    let s = String::from_utf8_lossy(&o.stdout);
    assert!(s.contains("[table2]") && s.contains("ms = 2, 5, 10, 20") && s.contains("reps = 5000"), "{s}");
    let o = selprior(&["list"], d.path());
    let s = String::from_utf8_lossy(&o.stdout);
    for id in ["table1", "table2", "fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "custom"] {
        assert!(s.lines().any(|l| l.starts_with(id)), "{id}");
    }
}

#[test]
fn sole_section_names_the_experiment() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("c.ini"), "out = here\n\n[fig2]\nthetas = -1:0.5:1\n").unwrap();
    let o = selprior(&["run", "--config", "c.ini"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(d.path().join("here/fig2.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
}
