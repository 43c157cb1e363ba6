use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proxgrad::fixture::{Fixture, ReferenceFile, SmoothData};
use proxgrad::io::{RunReport, Table};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_proxgrad"));
    c.env_remove("PROXGRAD_OUT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn gen_lasso(dir: &Path) -> PathBuf {
    let o = run(&[
        "gen",
        "--kind",
        "lasso",
        "--n",
        "20",
        "--L",
        "10",
        "--lambda",
        "0.5",
        "--seed",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    dir.join("lasso-n20-s1.problem.json")
}

fn golden(name: &str) -> String {
    fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/golden")
            .join(name),
    )
    .unwrap()
}

fn head2(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap();
    text.lines().take(2).map(|l| format!("{l}\n")).collect()
}

#[test]
fn gen_writes_fixture_and_tight_reference() {
    let d = TempDir::new().unwrap();
    let pp = gen_lasso(d.path());
    let fx = Fixture::load(&pp).unwrap();
    assert_eq!(fx.spec.seed, 1);
    let r = ReferenceFile::load(&d.path().join("lasso-n20-s1.reference.json")).unwrap();
    assert_eq!(r.seed, 1);
    assert!(r.residual <= 1e-12);
}

#[test]
fn gen_is_byte_identical_for_same_seed() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    gen_lasso(a.path());
    gen_lasso(b.path());
    for f in ["lasso-n20-s1.problem.json", "lasso-n20-s1.reference.json"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap()
        );
    }
}

#[test]
fn gen_one_dimensional_quadratic() {
    let d = TempDir::new().unwrap();
    let o = run(&[
        "gen",
        "--kind",
        "quadratic",
        "--n",
        "1",
        "--mu",
        "1",
        "--L",
        "1",
        "--out",
        d.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let fx = Fixture::load(&d.path().join("quadratic-n1-s0.problem.json")).unwrap();
    let SmoothData::Quadratic { matrix, .. } = fx.smooth else {
        panic!()
    };
    assert_eq!(matrix[(0, 0)], 1.0);
}

#[test]
fn run_pgd_and_apg_pass_their_checks() {
    let d = TempDir::new().unwrap();
    let pp = gen_lasso(d.path());
    let out = d.path().join("out");
    let o = run(&[
        "run",
        "--fixture",
        pp.to_str().unwrap(),
        "--solver",
        "pgd",
        "--eta",
        "1",
        "--K",
        "500",
        "--check",
        "pgd-potential,norm-monotone",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let o = run(&[
        "run",
        "--fixture",
        pp.to_str().unwrap(),
        "--solver",
        "apg",
        "--K",
        "200",
        "--check",
        "apg-potential,rates",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let bounds = out.join("lasso-n20-s1.apg.bounds.csv");
    let (_, cols, rows) = Table::read_csv(&fs::read_to_string(&bounds).unwrap()).unwrap();
    assert_eq!(rows.len(), 201);
    let min_i = cols.iter().position(|c| c == "min_norm_sq").unwrap();
    let env_i = cols.iter().position(|c| c == "norm_sq_envelope").unwrap();
    assert!(rows.iter().all(|r| r[min_i].unwrap() <= r[env_i].unwrap()));
    let report = RunReport::from_json(
        &fs::read_to_string(out.join("lasso-n20-s1.apg.report.json")).unwrap(),
    )
    .unwrap();
    assert!(report.passed);
    assert_eq!(report.checks.len(), 2);
}

#[test]
fn invalid_eta_is_a_usage_error() {
    let d = TempDir::new().unwrap();
    let pp = gen_lasso(d.path());
    let o = run(&[
        "run",
        "--fixture",
        pp.to_str().unwrap(),
        "--solver",
        "pgd",
        "--eta",
        "1.5",
        "--out",
        d.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid argument"));
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(code(&run(&["run", "--bogus"])), 1);
    assert_eq!(code(&run(&[])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(
        code(&run(&[
            "run",
            "--fixture",
            "/nonexistent/x.problem.json",
            "--solver",
            "pgd"
        ])),
        1
    );
}

#[test]
fn fgm_requires_smooth_fixture() {
    let d = TempDir::new().unwrap();
    let pp = gen_lasso(d.path());
    let o = run(&[
        "run",
        "--fixture",
        pp.to_str().unwrap(),
        "--solver",
        "fgm",
        "--out",
        d.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn failing_certificate_exits_two() {
    let d = TempDir::new().unwrap();
    let dir = d.path().to_str().unwrap();
    assert_eq!(
        code(&run(&[
            "gen",
            "--kind",
            "quadratic",
            "--n",
            "4",
            "--mu",
            "0.5",
            "--L",
            "8",
            "--seed",
            "2",
            "--out",
            dir
        ])),
        0
    );
    // Declare half the true smoothness constant.
    let path = d.path().join("quadratic-n4-s2.problem.json");
    let mut fx = Fixture::load(&path).unwrap();
    if let SmoothData::Quadratic { lip, .. } = &mut fx.smooth {
        *lip = 4.0;
    }
    fs::write(&path, fx.to_json().unwrap()).unwrap();
    let o = run(&[
        "run",
        "--fixture",
        path.to_str().unwrap(),
        "--solver",
        "pgd",
        "--K",
        "50",
        "--x0-seed",
        "3",
        "--check",
        "function-class,refined-descent",
        "--out",
        dir,
    ]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn csv_headers_match_golden_files() {
    let d = TempDir::new().unwrap();
    let dir = d.path().to_str().unwrap();
    assert_eq!(
        code(&run(&[
            "gen", "--kind", "box", "--n", "2", "--mu", "0.5", "--L", "2", "--seed", "3", "--out",
            dir
        ])),
        0
    );
    let pp = d.path().join("box-n2-s3.problem.json");
    for solver in ["pgd", "apg"] {
        assert_eq!(
            code(&run(&[
                "run",
                "--fixture",
                pp.to_str().unwrap(),
                "--solver",
                solver,
                "--K",
                "3",
                "--out",
                dir
            ])),
            0
        );
    }
    let o = run(&[
        "compare",
        "--fixture",
        pp.to_str().unwrap(),
        "--a",
        d.path().join("box-n2-s3.pgd.trace.json").to_str().unwrap(),
        "--b",
        d.path().join("box-n2-s3.apg.trace.json").to_str().unwrap(),
        "--out",
        d.path().join("cmp.csv").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        head2(&d.path().join("box-n2-s3.pgd.trace.csv")),
        golden("trace_header.csv")
    );
    assert_eq!(
        head2(&d.path().join("box-n2-s3.pgd.bounds.csv")),
        golden("bounds_pgd_header.csv")
    );
    assert_eq!(
        head2(&d.path().join("box-n2-s3.apg.bounds.csv")),
        golden("bounds_apg_header.csv")
    );
    assert_eq!(
        head2(&d.path().join("cmp.csv")),
        golden("compare_header.csv")
    );
}

#[test]
fn compare_pgd_apg_and_conventions() {
    let d = TempDir::new().unwrap();
    let pp = gen_lasso(d.path());
    let dir = d.path().to_str().unwrap();
    for (solver, extra) in [("pgd", "1"), ("apg", "1")] {
        let o = run(&[
            "run",
            "--fixture",
            pp.to_str().unwrap(),
            "--solver",
            solver,
            "--eta",
            extra,
            "--K",
            "200",
            "--out",
            dir,
        ]);
        assert_eq!(code(&o), 0);
    }
    let pgd = d.path().join("lasso-n20-s1.pgd.trace.json");
    let apg = d.path().join("lasso-n20-s1.apg.trace.json");
    let cmp = d.path().join("cmp.csv");
    let o = run(&[
        "compare",
        "--fixture",
        pp.to_str().unwrap(),
        "--a",
        pgd.to_str().unwrap(),
        "--b",
        apg.to_str().unwrap(),
        "--out",
        cmp.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let t = fs::read_to_string(&cmp).unwrap();
    let (_, cols, rows) = Table::read_csv(&t).unwrap();
    let col = |n: &str| cols.iter().position(|c| c == n).unwrap();
    assert_eq!(rows[0][col("envelope_a")], None);
    assert!(rows[1][col("envelope_a")].is_some());
    for r in &rows {
        assert!(r[col("min_norm_sq_b")].unwrap() <= r[col("envelope_b")].unwrap());
    }

    // identical inputs give identical columns
    let o = run(&[
        "compare",
        "--fixture",
        pp.to_str().unwrap(),
        "--a",
        apg.to_str().unwrap(),
        "--b",
        apg.to_str().unwrap(),
        "--out",
        cmp.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let (_, _, rows) = Table::read_csv(&fs::read_to_string(&cmp).unwrap()).unwrap();
    assert!(rows
        .iter()
        .all(|r| r[col("norm_a")] == r[col("norm_b")]
            && r[col("envelope_a")] == r[col("envelope_b")]));
}

#[test]
fn compare_rejects_other_fixture() {
    let d = TempDir::new().unwrap();
    let pp = gen_lasso(d.path());
    let dir = d.path().to_str().unwrap();
    assert_eq!(
        code(&run(&[
            "gen", "--kind", "lasso", "--n", "20", "--L", "10", "--seed", "2", "--out", dir
        ])),
        0
    );
    let other = d.path().join("lasso-n20-s2.problem.json");
    assert_eq!(
        code(&run(&[
            "run",
            "--fixture",
            other.to_str().unwrap(),
            "--solver",
            "pgd",
            "--K",
            "5",
            "--out",
            dir
        ])),
        0
    );
    let tr = d.path().join("lasso-n20-s2.pgd.trace.json");
    let o = run(&[
        "compare",
        "--fixture",
        pp.to_str().unwrap(),
        "--a",
        tr.to_str().unwrap(),
        "--b",
        tr.to_str().unwrap(),
        "--out",
        d.path().join("c.csv").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn config_file_with_flag_override() {
    let d = TempDir::new().unwrap();
    let cfg = d.path().join("exp.json");
    fs::write(
        &cfg,
        r#"{"problem": {"kind": "nonneg", "n": 3, "mu": 0.2, "L": 3, "seed": 4},
            "solver": {"kind": "apg", "K": 30},
            "checks": ["apg-potential", "rates"],
            "out": "ignored"}"#,
    )
    .unwrap();
    let dir = d.path().to_str().unwrap();
    let o = run(&[
        "gen",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "5",
        "--out",
        dir,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let pp = d.path().join("nonneg-n3-s5.problem.json");
    assert!(pp.exists());
    let o = run(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--fixture",
        pp.to_str().unwrap(),
        "--K",
        "40",
        "--out",
        dir,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = RunReport::from_json(
        &fs::read_to_string(d.path().join("nonneg-n3-s5.apg.report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report.iterations, 40);
    assert_eq!(report.checks.len(), 2);
    assert!(!d.path().join("ignored").exists());
}

#[test]
fn output_root_from_environment() {
    let d = TempDir::new().unwrap();
    let o = bin()
        .env("PROXGRAD_OUT", d.path())
        .args([
            "gen", "--kind", "logistic", "--n", "3", "--m", "24", "--seed", "6",
        ])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.path().join("logistic-n3-s6.reference.json").exists());
}
