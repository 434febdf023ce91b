use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fermion_witness::experiments::tfim_ground_state;
use fermion_witness::flo::{fock_covariance, FockString};
use fermion_witness::io::{load_covariance, save_matrix, MatrixFile};
use serde_json::Value;
use tempfile::TempDir;

/// Run the binary in `dir` with whitespace-separated arguments.
fn fwit(dir: &Path, args: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fwit"))
        .current_dir(dir)
        .args(args.split_whitespace())
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &str) -> String {
    let out = fwit(dir, args);
    assert!(
        out.status.success(),
        "{args} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

fn fock_file(dir: &Path, name: &str, bits: Vec<u8>) {
    let m = fock_covariance(&FockString::new(bits).unwrap());
    save_matrix(dir.join(name), &MatrixFile::covariance(&m)).unwrap();
}

#[test]
fn zero_time_target_is_the_fock_state() {
    let dir = TempDir::new().unwrap();
    let out = json(&ok(dir.path(), "target -L 2 --t 0"));
    assert_eq!(out["kind"], "covariance");
    let entries: Vec<f64> = serde_json::from_value(out["entries"].clone()).unwrap();
    let expected = fock_covariance(&FockString::zeros(2));
    assert_eq!(entries, expected.to_row_major());
}

#[test]
fn ground_state_target() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        "target -L 4 --mode ground --b 2 --output g.json",
    );
    let m = load_covariance(dir.path().join("g.json")).unwrap();
    assert!(m.max_abs_diff(&tfim_ground_state(4, 1.0, 2.0).unwrap()) < 1e-15);
}

#[test]
fn heatmap_csv() {
    let dir = TempDir::new().unwrap();
    let text = ok(dir.path(), "--format csv target -L 3");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "j,k,abs_m");
    assert_eq!(lines.len(), 1 + 36);
    assert!(lines[1].starts_with("1,1,"));
    assert!(!text.contains('\r'));
}

#[test]
fn witness_values() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fock_file(d, "vac.json", vec![0]);
    fock_file(d, "occ.json", vec![1]);
    let same = json(&ok(d, "witness --target vac.json --prep vac.json"));
    assert_eq!(same["f_w"], 1.0);
    let flip = json(&ok(d, "witness --target vac.json --prep occ.json"));
    assert_eq!(flip["f_w"], 0.0);

    ok(d, "target -L 8 --output t.json");
    let mut last = f64::NEG_INFINITY;
    for steps in ["4", "8", "16"] {
        ok(
            d,
            &format!("target -L 8 --trotter-steps {steps} --output p.json"),
        );
        let r = json(&ok(d, "witness --target t.json --prep p.json"));
        let f = r["f_w"].as_f64().unwrap();
        assert!(f < 1.0 && f > last, "T={steps}: {f}");
        last = f;
    }
}

#[test]
fn sample_is_deterministic_and_feeds_robust() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, "target -L 4 --output t.json");
    let args = "--seed 11 sample --target t.json --prep t.json --epsilon 0.1 --records r.csv";
    let first = ok(d, args);
    let records = fs::read_to_string(d.join("r.csv")).unwrap();
    assert_eq!(first, ok(d, args));
    assert_eq!(records, fs::read_to_string(d.join("r.csv")).unwrap());
    let est = json(&first);
    assert_eq!(est["scheme"], "importance");
    assert_eq!(est["seed"], 11);
    assert_eq!(
        records.lines().count() as u64,
        2 + est["n"].as_u64().unwrap()
    );

    let robust = "robust --records r.csv --target t.json --threshold 0.8 --gap 0.15 --epsilon 0.05";
    let out = fwit(d, robust);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(report["decision"], "Accept");
    assert_eq!(report["f_w_star"], est["f_w_star"]);

    // All-down preparation against the all-up target.
    fock_file(d, "down.json", vec![1, 1, 1, 1]);
    ok(d, "target -L 4 --t 0 --output up.json");
    ok(
        d,
        "sample --target up.json --prep down.json --records o.csv",
    );
    let out = fwit(
        d,
        "robust --records o.csv --target up.json --threshold 0.8 --gap 0.15 --epsilon 0.05",
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        json(&String::from_utf8(out.stdout).unwrap())["decision"],
        "Reject"
    );
}

#[test]
fn entrywise_records_round_trip() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, "target -L 3 --output t.json");
    ok(d, "target -L 3 --trotter-steps 8 --output p.json");
    let est = json(&ok(
        d,
        "sample --scheme entrywise --eta 200 --target t.json --prep p.json --records r.csv",
    ));
    assert_eq!(est["scheme"], "entrywise");
    let text = fs::read_to_string(d.join("r.csv")).unwrap();
    assert!(text.starts_with("scheme,entrywise\nrun,j,k,beta,setting\n"));
    let out = fwit(
        d,
        "robust --records r.csv --target t.json --threshold 0.5 --gap 0.3 --epsilon 0.1",
    );
    let report = json(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(report["f_w_star"], est["f_w_star"]);
    assert_eq!(report["n"], est["n"]);
}

#[test]
fn boundary_estimate_is_accepted() {
    // Vacuum target at L=1: F_W* = (number of β = -1 outcomes) / n = 3/4,
    // exactly F_T + ε for F_T = 5/8, ε = 1/8.
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fock_file(d, "vac.json", vec![0]);
    fs::write(
        d.join("r.csv"),
        "scheme,importance\nrun,j,k,beta,setting\n0,1,2,-1,-1\n1,1,2,-1,-1\n2,1,2,-1,-1\n3,1,2,1,-1\n",
    )
    .unwrap();
    let args = |eps: &str| {
        format!(
            "robust --records r.csv --target vac.json --threshold 0.625 --gap 0.3 --epsilon {eps}"
        )
    };
    let out = fwit(d, &args("0.125"));
    assert_eq!(out.status.code(), Some(0));
    let report = json(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(report["f_w_star"], 0.75);
    assert_eq!(report["acceptance_level"], 0.75);
    assert_eq!(fwit(d, &args("0.126")).status.code(), Some(1));
}

#[test]
fn errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fock_file(d, "vac.json", vec![0]);
    let missing = fwit(
        d,
        "robust --records nope.csv --target vac.json --threshold 0.9 --gap 0.06 --epsilon 0.02",
    );
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nope.csv"));

    fs::write(
        d.join("mixed.csv"),
        "scheme,importance\n0,1,2,1,-1\n1,1,2,1,0\n",
    )
    .unwrap();
    let mixed = fwit(
        d,
        "robust --records mixed.csv --target vac.json --threshold 0.9 --gap 0.06 --epsilon 0.02",
    );
    assert_eq!(mixed.status.code(), Some(2));

    let bad_params = fwit(
        d,
        "robust --records mixed.csv --target vac.json --threshold 0.9 --gap 0.01 --epsilon 0.02",
    );
    assert_eq!(bad_params.status.code(), Some(2));
    assert_eq!(fwit(d, "witness --target vac.json").status.code(), Some(2));
    assert_ne!(fwit(d, "target").status.code(), Some(0));
}

#[test]
fn fig2_bundle_from_config() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(
        d.join("cfg.json"),
        r#"{"seed": 4, "fig2": {"ls": [4, 6, 8, 10], "trotter_ls": [4, 6], "trotter_steps": [2, 4, 8], "max_draws": 2000}}"#,
    )
    .unwrap();
    let summary = json(&ok(d, "--config cfg.json --output out fig2"));
    assert_eq!(summary["largest_l"], 10);
    for f in [
        "heatmap.csv",
        "zstring.csv",
        "abs_sum.csv",
        "trotter.csv",
        "fit.json",
    ] {
        assert!(d.join("out").join(f).exists(), "{f}");
    }
    let trotter = fs::read_to_string(d.join("out/trotter.csv")).unwrap();
    let lines: Vec<&str> = trotter.lines().collect();
    assert_eq!(lines[0], "L,T,f_w,n_bound,n_used,f_w_star");
    assert_eq!(lines.len(), 1 + 6);
    for row in &lines[1..] {
        let cols: Vec<u64> = row
            .split(',')
            .skip(3)
            .take(2)
            .map(|c| c.parse().unwrap())
            .collect();
        assert_eq!(cols[1], cols[0].min(2000), "{row}");
    }
    assert_eq!(
        fs::read_to_string(d.join("out/zstring.csv"))
            .unwrap()
            .lines()
            .count(),
        11
    );

    // Same config, same seed: identical Monte Carlo column. A flag overrides it.
    ok(d, "--config cfg.json --output again fig2");
    assert_eq!(
        trotter,
        fs::read_to_string(d.join("again/trotter.csv")).unwrap()
    );
    ok(d, "--config cfg.json --seed 5 --output other fig2");
    assert_ne!(
        trotter,
        fs::read_to_string(d.join("other/trotter.csv")).unwrap()
    );

    let upper = json(&ok(d, "fit --input out/abs_sum.csv"));
    let full = json(&ok(d, "fit --input out/abs_sum.csv --column full_sum"));
    let ratio = full["prefactor"].as_f64().unwrap() / upper["prefactor"].as_f64().unwrap();
    assert!((ratio - 2.0).abs() < 1e-12);
    assert!(
        (upper["exponent"].as_f64().unwrap() - full["exponent"].as_f64().unwrap()).abs() < 1e-12
    );
    let fits = json(&fs::read_to_string(d.join("out/fit.json")).unwrap());
    assert!(
        (fits["full_sum"]["exponent"].as_f64().unwrap() - full["exponent"].as_f64().unwrap()).abs()
            < 1e-15
    );
}

#[test]
fn fit_exact_power() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(d.join("p.csv"), "2,12\n3,27\n5,75\n8,192\n").unwrap();
    let fit = json(&ok(d, "fit --input p.csv"));
    assert!((fit["prefactor"].as_f64().unwrap() - 3.0).abs() < 1e-12);
    assert!((fit["exponent"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    let csv = ok(d, "--format csv fit --input p.csv");
    assert!(csv.starts_with("prefactor,exponent,residual\n"));
    fs::write(d.join("few.csv"), "L,v\n2,1\n3,2\n4,3\n").unwrap();
    assert_eq!(fwit(d, "fit --input few.csv").status.code(), Some(2));
}
