use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

const BF: &str = r#"
seed = 1
samples = 200

[kernel]
family = "bargmann_fock"
width = 1.0
normalize_sigma = true

[grid]
n = 48
side = 24.0
"#;

const AUDIT: &str = r#"
samples = 100

[kernel]
family = "bargmann_fock"
width = 1.0
normalize_sigma = true

[grid]
n = 40
side = 20.0

[experiment]
glue_level = 0.4
"#;

fn gfperc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfperc")).args(args).output().expect("binary runs")
}

struct Run {
    dir: TempDir,
}

impl Run {
    fn new(config: &str) -> Self {
        let dir = TempDir::new().unwrap();
        fs::write(dir.path().join("run.toml"), config).unwrap();
        Self { dir }
    }

    fn config(&self) -> String {
        self.dir.path().join("run.toml").to_string_lossy().into_owned()
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// Runs with `--config` and `--out <name>` prepended.
    fn exec(&self, out: &str, args: &[&str]) -> Output {
        let o = self.out(out);
        let mut all = vec!["--config", &self.config(), "--out", o.to_str().unwrap()].into_iter().map(String::from).collect::<Vec<_>>();
        all.extend(args.iter().map(|s| s.to_string()));
        gfperc(&all.iter().map(String::as_str).collect::<Vec<_>>())
    }
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_kernel_accepts_bargmann_fock() {
    let r = Run::new(BF);
    let o = r.exec("v", &["validate-kernel"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let j: serde_json::Value = serde_json::from_str(&read(&r.out("v/conditions.json"))).unwrap();
    assert_eq!(j["result"]["report"]["symmetry"]["pass"], true);
    assert!(j["artifact_version"].as_str().unwrap().starts_with("gfperc "));
    assert!(stderr(&o).contains("wall clock"));
}

#[test]
fn validate_kernel_names_the_symmetry_failure() {
    // q(x) = x1 exp(-|x|^2) on minimum-image displacements is odd
    let n = 16;
    let h = 0.5;
    let disp = |i: usize| if i <= n / 2 { i as f64 * h } else { (i as f64 - n as f64) * h };
    let values: Vec<String> = (0..n * n)
        .map(|i| {
            let (x, y) = (disp(i % n), disp(i / n));
            format!("{}", x * (-(x * x + y * y)).exp())
        })
        .collect();
    let cfg = format!("[kernel]\nfamily = \"custom_table\"\nvalues = [{}]\n[grid]\nn = {n}\nside = 8.0\n", values.join(", "));
    let r = Run::new(&cfg);
    let o = r.exec("v", &["validate-kernel"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("symmetry"), "{}", stderr(&o));
}

#[test]
fn malformed_config_writes_nothing() {
    for bad in [format!("{BF}\ncolour = \"red\"\n"), BF.replace("width = 1.0", "width = \"wide\""), BF.replace("[grid]", "[grid]\nd = 2\nn2 = 3")] {
        let r = Run::new(&bad);
        for args in [&["validate-kernel"][..], &["threshold"], &["experiment", "quarter-bound"]] {
            let o = r.exec("out", args);
            assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
            assert!(!r.out("out").exists());
        }
    }
    let o = gfperc(&["threshold"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_experiment_is_a_usage_error() {
    let r = Run::new(BF);
    let o = r.exec("out", &["experiment", "percolate-everything"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!r.out("out").exists());
}

#[test]
fn threshold_is_deterministic() {
    let r = Run::new(BF);
    for out in ["a", "b"] {
        let o = r.exec(out, &["threshold", "--samples", "1", "--seed", "7", "--event", "loop", "--event", "cross"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = fs::read(r.out("a/thresholds.csv")).unwrap();
    assert_eq!(a, fs::read(r.out("b/thresholds.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# gfperc threshold schema v1");
    assert_eq!(lines.len(), 4);
}

#[test]
fn constant_field_threshold_is_minus_the_value() {
    let cfg = "[kernel]\nfamily = \"constant\"\nvalue = 0.7\n[grid]\nn = 8\nside = 4.0\n";
    let r = Run::new(cfg);
    let o = r.exec("c", &["threshold", "--samples", "3", "--event", "loop", "--export", "bin"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = read(&r.out("c/thresholds.csv"));
    let header: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "t_value").unwrap();
    for (i, line) in text.lines().skip(2).enumerate() {
        let t: f64 = line.split(',').nth(col).unwrap().parse().unwrap();
        let f = gfperc_core::io::read_field_binary(fs::File::open(r.out(&format!("c/field_{i:06}.bin"))).unwrap()).unwrap();
        assert!(f.values.iter().all(|&v| v == f.values[0]));
        assert_eq!(t, -f.values[0]);
    }
}

#[test]
fn quarter_bound_summary_has_two_checks_and_a_config_digest() {
    let r = Run::new(BF);
    let o = r.exec("q", &["experiment", "quarter-bound"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let j: serde_json::Value = serde_json::from_str(&read(&r.out("q/quarter-bound.json"))).unwrap();
    let checks = j["result"]["summary"]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 2);
    assert!(checks.iter().all(|c| c["rhs"].as_f64().unwrap() >= 0.0));
    // the digest covers the echoed config minus the output location
    let digest = j["config_digest"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    let echo: toml::Table = toml::from_str(&read(&r.out("q/config.resolved.toml"))).unwrap();
    let mut portable = echo.clone();
    portable.remove("out");
    let expect: String = Sha256::digest(toml::to_string(&portable).unwrap().as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(digest, expect);
    let csv = read(&r.out("q/quarter-bound.csv"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn echoed_config_reproduces_outputs() {
    let r = Run::new(BF);
    let o = r.exec("first", &["experiment", "crossing-curve", "--seed", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let echo = r.out("first/config.resolved.toml");
    let second = r.out("second");
    let o = gfperc(&["--config", echo.to_str().unwrap(), "--out", second.to_str().unwrap(), "experiment", "crossing-curve"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["crossing-curve.csv", "crossing-curve.json"] {
        assert_eq!(fs::read(r.out("first").join(f)).unwrap(), fs::read(second.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn thread_count_does_not_change_outputs() {
    let r = Run::new(BF);
    for (out, jobs) in [("one", "1"), ("three", "3")] {
        let o = r.exec(out, &["experiment", "tails", "--jobs", jobs]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["tails.csv", "tails.json"] {
        assert_eq!(fs::read(r.out("one").join(f)).unwrap(), fs::read(r.out("three").join(f)).unwrap());
    }
}

#[test]
fn audit_exit_status_tracks_violations() {
    let r = Run::new(AUDIT);
    let o = r.exec("clean", &["experiment", "audit"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(read(&r.out("clean/audit.csv")).lines().nth(2).unwrap().starts_with("100,200,"));
    let o = r.exec("broken", &["experiment", "audit", "--inject-fault", "drop-conclusions"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(r.out("broken/audit.json").exists());
}

#[test]
fn every_experiment_runs_at_small_scale() {
    let small = format!("{BF}\n[experiment]\nsides = [12.0, 24.0]\nr_list = [1.0]\nl_list = [2.0, 4.0]\n");
    let r = Run::new(&small);
    for name in ["variance-scan", "tails", "fkg", "circuit-scan"] {
        let o = r.exec(name, &["experiment", name, "--samples", "120"]);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        let csv = read(&r.out(name).join(format!("{name}.csv")));
        assert_eq!(csv.lines().next().unwrap(), format!("# gfperc {name} schema v1"));
        let cols = csv.lines().nth(1).unwrap().split(',').count();
        assert!(csv.lines().skip(2).all(|l| l.split(',').count() == cols), "{name}: {csv}");
    }
}
