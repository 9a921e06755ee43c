//! End-to-end runs of the `spread` binary.

use spread_cli::formats::Table;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn spread(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spread")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) {
    let o = spread(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn table(path: &Path) -> Table {
    Table::parse(&fs::read(path).unwrap()).unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn out_arg(p: &Path) -> String {
    p.to_str().unwrap().to_owned()
}

/// Every file under `dir` except the manifest, by relative path.
fn contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = vec![];
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "manifest.json" {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn gaussian_and_semicircle_coefficients() {
    let tmp = tempfile::tempdir().unwrap();
    let g = tmp.path().join("g");
    ok(&["model", "--variant", "gaussian", "--sigma0", "2", "--K", "12", "--out", &out_arg(&g)]);
    let t = table(&g.join("coeffs.csv"));
    for (n, b) in t.column("n").unwrap().iter().zip(t.column("b_n").unwrap()).skip(1) {
        assert!((b - 2.0 * n.sqrt()).abs() < 1e-12);
    }
    assert!(t.column("a_n").unwrap().iter().all(|a| a.abs() < 1e-12));
    let fits = json(&g.join("fits.json"));
    assert!((fits["power"]["n2"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!(g.join("series.csv").exists() && g.join("manifest.json").exists());

    let s = tmp.path().join("s");
    ok(&["model", "--variant", "semicircle", "--alpha", "1.5", "--K", "10", "--out", &out_arg(&s)]);
    let b = table(&s.join("coeffs.csv"));
    assert!(b.column("b_n").unwrap()[1..].iter().all(|b| (b - 1.5).abs() < 1e-12));
}

#[test]
fn exit_codes_and_no_partial_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let o = out_arg(&out);
    for args in [
        vec!["model", "--sigma0", "1", "--out", &o],
        vec!["model", "--variant", "cubic", "--sigma0", "1", "--out", &o],
        vec!["frm", "--dim", "1", "--out", &o],
        vec!["spin", "--L", "13", "--out", &o],
        vec!["spin", "--L", "4", "--h", "-1", "--out", &o],
    ] {
        let r = spread(&args);
        assert_eq!(r.status.code(), Some(2), "{args:?}");
        assert!(!out.exists(), "{args:?} left output behind");
    }
    let r = spread(&["model", "--variant", "truncated-quadratic", "--sigma0", "1", "--K", "4", "--out", &o]);
    assert_eq!(r.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&r.stderr).contains("moment-lanczos"));
    assert!(!out.exists());
    assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 0, "staging directory left behind");
}

#[test]
fn missing_parameter_names_flag_and_key() {
    let tmp = tempfile::tempdir().unwrap();
    let r = spread(&["frm", "--out", &out_arg(&tmp.path().join("x"))]);
    assert_eq!(r.status.code(), Some(2));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("--dim") && err.contains("\"dim\""), "{err}");
}

#[test]
fn formal_mode_keeps_the_sign() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("f");
    ok(&[
        "model",
        "--variant",
        "truncated-quadratic",
        "--sigma0",
        "2",
        "--K",
        "4",
        "--formal",
        "--out",
        &out_arg(&out),
    ]);
    assert_eq!(table(&out.join("coeffs.csv")).column("b_n").unwrap(), [0.0, 2.0, -2.0]);
    let fits = json(&out.join("fits.json"));
    assert_eq!(fits["positive_depth"], 1);
    assert!(fits["hankel_determinants"][2].as_f64().unwrap() < 0.0);
}

#[test]
fn refusing_and_forcing_an_existing_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let o = out_arg(tmp.path());
    fs::write(tmp.path().join("keep.txt"), "x").unwrap();
    let r = spread(&["b2-table", "--out", &o]);
    assert_eq!(r.status.code(), Some(2));
    assert!(tmp.path().join("keep.txt").exists());
    ok(&["b2-table", "--out", &o, "--force"]);
    assert!(!tmp.path().join("keep.txt").exists());
    let t = table(&tmp.path().join("b2.csv"));
    assert_eq!(t.column("t").unwrap(), [0.0, 0.5, 1.0, 2.0, 10.0]);
    assert_eq!(t.column("B2").unwrap()[0], 1.0);
    assert!((t.column("B2").unwrap()[2] - (3f64.ln() - 1.0)).abs() < 1e-15);
}

#[test]
fn outputs_do_not_depend_on_threads_or_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = tmp.path().join(name);
        ok(&[
            "frm",
            "--dim",
            "40",
            "--realizations",
            "4",
            "--seed",
            "9",
            "--threads",
            threads,
            "--dump-matrix",
            "--out",
            &out_arg(&out),
        ]);
        contents(&out)
    };
    let a = run("a", "1");
    assert_eq!(a, run("b", "1"));
    assert_eq!(a, run("c", "3"));
    assert!(a.iter().any(|(n, _)| n == "hamiltonian_s12.ksh1"));

    let spin = |name: &str, threads: &str| {
        let out = tmp.path().join(name);
        ok(&["spin", "--L", "8", "--realizations", "3", "--threads", threads, "--out", &out_arg(&out)]);
        contents(&out)
    };
    assert_eq!(spin("s1", "1"), spin("s2", "2"));
}

#[test]
fn manifest_records_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("m");
    ok(&["frm", "--dim", "20", "--realizations", "2", "--seed", "5", "--out", &out_arg(&out)]);
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["command"], "frm");
    assert_eq!(m["seeds"], serde_json::json!([5, 6]));
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    let names: Vec<&str> = m["files"].as_array().unwrap().iter().map(|f| f["name"].as_str().unwrap()).collect();
    for want in ["fits.json", "series.csv", "series_s5.csv", "series_s6.csv"] {
        assert!(names.contains(&want), "{want} missing from {names:?}");
    }
    for f in m["files"].as_array().unwrap() {
        let bytes = fs::read(out.join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(spread_cli::output::sha256_hex(&bytes), f["sha256"].as_str().unwrap());
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    fs::write(&cfg, r#"{ "variant": "gaussian", "sigma0": 3.0, "K": 6 }"#).unwrap();
    let a = tmp.path().join("a");
    ok(&["model", "--config", cfg.to_str().unwrap(), "--out", &out_arg(&a)]);
    let b = table(&a.join("coeffs.csv"));
    assert_eq!(b.column("n").unwrap().len(), 6);
    assert!((b.column("b_n").unwrap()[1] - 3.0).abs() < 1e-12);

    let c = tmp.path().join("c");
    ok(&["model", "--config", cfg.to_str().unwrap(), "--sigma0", "0.5", "--out", &out_arg(&c)]);
    assert!((table(&c.join("coeffs.csv")).column("b_n").unwrap()[1] - 0.5).abs() < 1e-12);

    fs::write(&cfg, "{\n  \"variant\": \"gaussian\",\n  \"sigma0\": oops\n}").unwrap();
    let r = spread(&["model", "--config", cfg.to_str().unwrap(), "--out", &out_arg(&tmp.path().join("d"))]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains(":3:"), "{}", String::from_utf8_lossy(&r.stderr));

    fs::write(&cfg, r#"{ "variant": "gaussian", "sigma": 1 }"#).unwrap();
    let r = spread(&["model", "--config", cfg.to_str().unwrap(), "--out", &out_arg(&tmp.path().join("e"))]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("sigma"));
}

#[test]
fn spin_sector_and_frm_plateau() {
    let tmp = tempfile::tempdir().unwrap();
    let s = tmp.path().join("s");
    ok(&["spin", "--L", "4", "--h", "0", "--out", &out_arg(&s)]);
    assert_eq!(json(&s.join("fits.json"))["dim"], 6);
    assert!(s.join("hist_a.csv").exists() && s.join("stats.json").exists());

    let f = tmp.path().join("f");
    ok(&["frm", "--dim", "100", "--realizations", "3", "--out", &out_arg(&f)]);
    let fits = json(&f.join("fits.json"));
    let series = json(&f.join("series.json"));
    let plateau = fits["peak_plateau"]["C_plateau"].as_f64().unwrap();
    let c_bar = series["C_bar"].as_f64().unwrap();
    assert!(((plateau - c_bar) / c_bar).abs() < 0.02, "{plateau} vs {c_bar}");
}

#[test]
fn refitting_written_coefficients() {
    let tmp = tempfile::tempdir().unwrap();
    let g = tmp.path().join("g");
    ok(&["model", "--variant", "gaussian", "--sigma0", "1", "--K", "30", "--out", &out_arg(&g)]);
    let f = tmp.path().join("f");
    let input = g.join("coeffs.csv");
    ok(&["fit", "--input", input.to_str().unwrap(), "--kind", "power", "--window", "1,29", "--out", &out_arg(&f)]);
    let fit = &json(&f.join("fits.json"))["fit"];
    assert!((fit["n1"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((fit["n2"].as_f64().unwrap() - 0.5).abs() < 1e-9);

    let bad = tmp.path().join("bad.csv");
    fs::write(&bad, "t,F\n1,0.5\n2,x\n").unwrap();
    let r = spread(&[
        "fit",
        "--input",
        bad.to_str().unwrap(),
        "--kind",
        "decay",
        "--window",
        "1,2",
        "--out",
        &out_arg(&tmp.path().join("h")),
    ]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("line 3"));
}
