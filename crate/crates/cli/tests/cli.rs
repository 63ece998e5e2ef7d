use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ckn-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// CSV table lines, without the trailing `key=value` summary.
fn table_part(text: &str) -> String {
    text.lines()
        .take_while(|l| !l.contains('=') || l.contains(','))
        .map(|l| format!("{l}\n"))
        .collect()
}

fn summary_value(text: &str, key: &str) -> Option<f64> {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .map(|v| v.parse().unwrap())
}

fn records(text: &str) -> (csv::StringRecord, Vec<csv::StringRecord>) {
    let table = table_part(text);
    let mut r = csv::Reader::from_reader(table.as_bytes());
    let header = r.headers().unwrap().clone();
    let rows = r.records().map(|x| x.unwrap()).collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn params_report() {
    let out = lab(&["params", "--a", "-1", "--b", "-0.25"]);
    assert_eq!(out.status.code(), Some(0));
    let (h, rows) = records(&stdout(&out));
    let get = |k: &str| rows[0][h.iter().position(|x| x == k).unwrap()].to_string();
    assert_eq!(get("q"), "2.666667");
    assert_eq!(get("K"), "8.000000");
    assert_eq!(get("tau"), "3.000000");
    assert_eq!(get("region"), "StrictInterior");
    assert_eq!(get("bound_spectral"), "0.100826");
    assert_eq!(get("bound_two_bubble"), "0.318207");
}

#[test]
fn params_json_keys() {
    let out = lab(&["params", "--a", "-1", "--b", "-0.292893", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["region"], "OnFS");
    for key in [
        "a", "b", "q", "K", "tau", "C_ab", "c_ab", "S_ab", "b_fs", "b_fs_star", "region", "mu3_closed",
        "bound_spectral", "bound_two_bubble",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(v["mu3_closed"].is_null());
}

#[test]
fn invalid_parameters_exit_two() {
    for args in [
        &["params", "--a", "0.5", "--b", "0.7"][..],
        &["params", "--a", "-1"],
        &["spectrum", "--a", "-1", "--b", "-0.5"],
        &["deficit", "--a", "-1", "--b", "-0.25", "--family", "fs-kernel"],
        &["deficit", "--a", "-1", "--b", "-0.25", "--family", "two-bubble", "--points", "3"],
        &["params", "--a", "-1", "--b", "-0.25", "--precision", "x"],
        &["params", "--a", "-1", "--b", "-0.25", "--tol-quad", "2"],
        &["no-such-command"],
    ] {
        let out = lab(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(!err.trim().is_empty(), "{args:?}");
    }
}

#[test]
fn reference_table() {
    let out = lab(&["table-fig2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("a,b_fs,b_fs_star,b_star,selection\n"));
    let (_, rows) = records(&text);
    assert_eq!(rows.len(), 11);
    let row = |a: &str| rows.iter().find(|r| &r[0] == a).unwrap().clone();
    let r = row("-1.000000");
    assert_eq!(&r[1], "-0.292893");
    assert_eq!(&r[2], "-0.171573");
    assert!((num(&r[3]) + 0.181928).abs() <= 1.5e-6);
    assert_eq!(&r[4], format!("[{}, -0.171573)", &r[3]));
    assert_eq!(&row("-0.500000")[4], "empty");
    assert_eq!(&row("-0.600000")[4], "empty");
    assert_eq!(&row("-10.000000")[3], "-9.002933");
}

#[test]
fn spectrum_rows_and_kernel_line() {
    let out = lab(&["spectrum", "--a", "-1", "--b", "-0.25", "--modes", "0,1", "--count", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("k,index,eigenvalue,closed_form,abs_diff\n"));
    let (_, rows) = records(&text);
    assert_eq!(rows.len(), 6);
    let find = |k: &str, i: &str| rows.iter().find(|r| &r[0] == k && &r[1] == i).unwrap()[2].to_string();
    assert_eq!(find("0", "1"), "1.000000");
    assert_eq!(find("0", "2"), "1.666667");
    assert!(find("1", "1").starts_with("1.85355"));
    assert_eq!(summary_value(&text, "kernel_dim"), Some(1.0));

    let out = lab(&["spectrum", "--a", "-1", "--b", "-0.292893"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().any(|l| l == "kernel_dim=3"));
}

#[test]
fn deficit_families() {
    let out = lab(&["deficit", "--a", "-1", "--b", "-0.25", "--family", "two-bubble"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("param,grad_sq,star_norm,m,dist_sq,E\n"));
    assert!((summary_value(&text, "fit_E_limit").unwrap() - 0.318207).abs() < 1e-5);

    let out = lab(&["deficit", "--a", "-1", "--b", "-0.292893", "--family", "fs-kernel"]);
    assert_eq!(out.status.code(), Some(0));
    let (_, rows) = records(&stdout(&out));
    let e: Vec<f64> = rows.iter().map(|r| num(&r[5])).collect();
    assert_eq!(e.len(), 4);
    assert!(e.windows(2).all(|w| w[1] < w[0]), "{e:?}");

    let out = lab(&["deficit", "--a", "-1", "--b", "-0.25", "--family", "spectral"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!((summary_value(&text, "E_extrapolated").unwrap() - 0.100826).abs() < 1e-5);
}

#[test]
fn csv_round_trips_to_printed_precision() {
    for precision in ["3", "6", "9"] {
        let out = lab(&["table-fig2", "--precision", precision]);
        let p: i32 = precision.parse().unwrap();
        let (_, rows) = records(&stdout(&out));
        let a_values = [-0.5, -0.6, -0.641867, -0.7, -0.8, -1.0, -2.0, -3.0, -4.0, -5.0, -10.0];
        for (r, a) in rows.iter().zip(a_values) {
            assert!((num(&r[0]) - a).abs() <= 0.5 * 10f64.powi(-p));
            let lo = ckn_core::params::felli_schneider(a).unwrap();
            assert!((num(&r[1]) - lo).abs() <= 0.5 * 10f64.powi(-p) * (1.0 + 1e-9));
            assert_eq!(r[1].split('.').nth(1).unwrap().len(), p as usize);
        }
    }
}

#[test]
fn json_tables_are_row_objects() {
    let out = lab(&["table-fig2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[0]["selection"], "empty");
    assert_eq!(rows[0]["a"], -0.5);
}

#[test]
fn output_is_deterministic_and_can_go_to_a_file() {
    let args = ["deficit", "--a", "-1", "--b", "-0.25", "--family", "spectral"];
    let first = lab(&args).stdout;
    assert_eq!(first, lab(&args).stdout);
    let path = std::env::temp_dir().join(format!("ckn-lab-out-{}.csv", std::process::id()));
    let out = lab(&[&args[..], &["--out", path.to_str().unwrap()]].concat());
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), first);
    std::fs::remove_file(path).unwrap();
}

#[test]
fn no_negative_zero_in_output() {
    let out = lab(&["spectrum", "--a", "-1", "--b", "-0.25", "--precision", "2"]);
    assert!(!stdout(&out).contains("-0.00,") && !stdout(&out).contains("-0.00\n"));
}

#[test]
fn thresholds_report() {
    let out = lab(&["thresholds"]);
    let (_, rows) = records(&stdout(&out));
    assert_eq!(&rows[0][0], "6.698818");
    assert_eq!(&rows[0][1], "-0.641866");
}

#[test]
fn quick_verification_passes_and_catches_a_corrupted_constant() {
    let start = std::time::Instant::now();
    let out = lab(&["verify", "--quick"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(start.elapsed().as_secs_f64() < 30.0);
    assert_eq!(stdout(&out).lines().filter(|l| l.starts_with("[PASS]")).count(), 10);

    let out = lab(&["verify", "--quick", "--c-ab-scale", "1.01"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("[FAIL]"));
}
