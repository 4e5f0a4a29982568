use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn ergolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ergolab"))
        .args(args)
        .env_remove("ERGOLAB_BUDGET")
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("ergolab-test-{}-{}", std::process::id(), name));
    p
}

#[test]
fn constant_function_has_unit_norm() {
    let out = ergolab(&["gowers", "--N", "8", "--k", "1", "--const", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["recursive"], 1.0);
    assert_eq!(v["agree"], true);
}

#[test]
fn gowers_reports_three_agreeing_paths() {
    let f = tmp("input.csv");
    let mut csv = String::from("index,re,im\n");
    for i in 0..16 {
        csv.push_str(&format!("{},{},{}\n", i, (i as f64 / 16.0).cos(), 0.25));
    }
    fs::write(&f, csv).unwrap();
    let out = ergolab(&["gowers", "--N", "16", "--k", "2", "--input", f.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    for key in ["recursive", "closed", "fourier"] {
        assert!(v[key].is_f64(), "missing path {}", key);
    }
    assert!(v["max_delta"].as_f64().unwrap() < 1e-9);
    fs::remove_file(f).ok();
}

#[test]
fn malformed_csv_exits_2_and_names_the_row() {
    let f = tmp("bad.csv");
    fs::write(&f, "index,re,im\n0,1.0,0.0\n1,oops,0.0\n").unwrap();
    let out = ergolab(&["gowers", "--N", "2", "--k", "2", "--input", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("row 2"), "stderr was: {}", err);
    fs::remove_file(f).ok();
}

#[test]
fn ap_report_matches_schema() {
    let out = ergolab(&["ap", "--N", "32", "--ell", "3", "--set", "0,4,8"]);
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(v["N"], 32);
    assert_eq!(v["ell"], 3);
    assert_eq!(v["set_size"], 3);
    assert_eq!(v["nondegenerate_count"], 2);
    assert_eq!(v["inclusive_count"], 5);
    assert_eq!(v["lambda_value"].as_f64().unwrap(), 5.0 / 1024.0);
}

#[test]
fn nil_orbit_dump_has_the_declared_metadata() {
    let out = ergolab(&[
        "nil", "--system", "skew", "--alpha", "1/4", "--steps", "3", "--mode", "orbit",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# alpha: 1/4 (exact rational)"));
    assert!(text.contains("# ergodicity: declared non-ergodic, periodic"));
    assert!(text.contains("n,x,y\n0,"));
    let out2 = ergolab(&[
        "nil", "--system", "skew", "--alpha", "golden", "--steps", "3", "--mode", "series",
        "--observable", "e_y",
    ]);
    let text2 = String::from_utf8(out2.stdout).unwrap();
    assert!(text2.contains("(declared irrational)"));
    assert!(text2.contains("# ergodicity: declared ergodic"));
    assert!(text2.contains("N,re,im,abs"));
    // heisenberg translation components carry their declarations too
    let out3 = ergolab(&[
        "nil", "--system", "heisenberg", "--t", "1/2,golden,0.25", "--steps", "2", "--mode",
        "orbit",
    ]);
    let text3 = String::from_utf8(out3.stdout).unwrap();
    assert!(text3.contains("# t1: 1/2 (exact rational)"));
    assert!(text3.contains("# t2: "));
    assert!(text3.contains("(declared irrational)"));
    assert!(text3.contains("rationally independent"));
}

#[test]
fn cube_budget_overflow_exits_3() {
    let out = ergolab(&["cube", "--N", "101", "--k", "2", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("oracle too large"), "stderr was: {}", err);
}

#[test]
fn identical_seeds_give_identical_files() {
    let a = tmp("avg-a.csv");
    let b = tmp("avg-b.csv");
    for path in [&a, &b] {
        let out = ergolab(&[
            "avg", "--mode", "cubic", "--k", "2", "--N", "16", "--seed", "42", "--output",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let bytes_a = fs::read(&a).unwrap();
    let bytes_b = fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b);
    assert!(String::from_utf8(bytes_a)
        .unwrap()
        .starts_with("N,value_re,value_im,l2_norm,cauchy_tail\n"));
    fs::remove_file(a).ok();
    fs::remove_file(b).ok();
}

#[test]
fn verify_quick_passes_and_is_quiet_about_replays() {
    let out = ergolab(&["verify", "--seed", "7", "--quick"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("32 properties, 0 failed"));
    assert!(!text.contains("replay:"));
}

#[test]
fn corrupted_tolerance_fails_with_replay_line() {
    let out = ergolab(&[
        "verify", "--seed", "7", "--quick", "--tol", "1e-16", "--only", "fourier_inversion",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("FAIL fourier_inversion"));
    assert!(
        text.contains("replay: ergolab verify --seed 7 --quick --only fourier_inversion"),
        "stdout was: {}",
        text
    );
}

#[test]
fn verify_list_names_every_property() {
    let out = ergolab(&["verify", "--list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["parseval", "cesaro_tail_decrease", "cube_symmetries"] {
        assert!(text.lines().any(|l| l == name));
    }
}

#[test]
fn unknown_property_is_an_input_error() {
    let out = ergolab(&["verify", "--only", "not_a_property"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cube_dump_writes_lex_ordered_support() {
    let dump = tmp("measure.csv");
    let out = ergolab(&[
        "cube", "--N", "3", "--k", "2", "--seed", "1", "--dump-measure",
        dump.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&dump).unwrap();
    assert!(text.starts_with("x_00,x_01,x_10,x_11,weight\n"));
    // 3^3 = 27 support atoms on Z/3
    assert_eq!(text.lines().count() - 1, 27);
    fs::remove_file(dump).ok();
}
