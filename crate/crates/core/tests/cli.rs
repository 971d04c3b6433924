use std::process::Command;

fn hpq(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hpq"))
        .args(args)
        .env_remove("HPQ_SEED")
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

const HOPF: [&str; 9] = ["verify", "--model", "sphere:3", "--field", "hopf:1", "--p", "2", "--q", "1"];

#[test]
fn hopf_passes_and_rotation_fails() {
    let (code, out, _) = hpq(&HOPF);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["command"], "verify");
    assert_eq!(v["summary"]["pass"], true);
    assert_eq!(v["results"].as_array().unwrap().len(), 200);
    let (code, _, err) = hpq(&["verify", "--model", "sphere:2", "--field", "rotation", "--p", "1", "--q", "0"]);
    assert_eq!(code, 1);
    assert!(err.contains("tolerance"));
}

#[test]
fn exit_code_contract() {
    let corpus: &[(&[&str], i32)] = &[
        (&["verify", "--model", "sphere:3", "--field", "conformal:1,0,0,0", "--p", "4", "--q", "-1"], 0),
        (&["verify", "--model", "heisenberg", "--field", "frame:3", "--p", "1", "--q", "1", "--equation", "map-horizontal"], 0),
        (&["verify", "--model", "sphere:2", "--field", "hopf:1", "--p", "1", "--q", "0"], 2),
        (&["verify", "--model", "torus", "--field", "zero", "--p", "1", "--q", "0"], 2),
        (&["verify", "--model", "sphere:2", "--field", "conformal:1,0,0", "--p", "1", "--q", "0", "--equation", "killing"], 2),
        (&["verify", "--model", "sphere:3", "--field", "hopf:1", "--p", "2", "--q", "1", "--tolerance", "0"], 2),
        (&["verify", "--model", "sphere:3", "--field", "hopf:1", "--p", "2", "--q", "1", "--fd-step", "1e-12"], 2),
        (&["verify", "--model", "sphere:3", "--field", "hopf:1"], 2),
        (&["verify", "--model", "sphere:3", "--field", "hopf:1", "--p", "2", "--q", "1", "--output", "xml"], 2),
        (&["identities", "--n", "4", "--samples", "20"], 0),
        (&["identities", "--n", "2", "--matrix", "1,0;0,1"], 2),
        (&["classify", "--n", "5"], 0),
        (&["classify", "--n", "6"], 2),
        (&["classify"], 2),
        (&["scan", "--model", "sphere:2", "--field", "rotation", "--p-grid", "0.5,1", "--q-grid", "0:1:3"], 0),
        (&["scan", "--model", "sphere:2", "--field", "rotation", "--p-grid", "", "--q", "1"], 2),
        (&["tension", "--model", "sphere:3", "--field", "hopf:1", "--p", "2", "--q", "1", "--samples", "10"], 0),
        (&["tension", "--model", "sphere:2", "--field", "rotation", "--p", "1", "--q", "0", "--samples", "10"], 1),
        (&["energy", "--model", "sphere:2", "--field", "conformal:0,0,1", "--p", "0", "--q", "0"], 0),
        (&["energy", "--model", "heisenberg", "--field", "frame:1", "--p", "0", "--q", "0"], 2),
        (&["nope"], 2),
    ];
    for (args, expected) in corpus {
        let (code, _, err) = hpq(args);
        assert_eq!(code, *expected, "{args:?}: {err}");
    }
}

#[test]
fn reports_are_byte_identical() {
    for args in [
        &HOPF[..],
        &["classify", "--n", "7"],
        &["scan", "--model", "sphere:2", "--field", "rotation", "--p-grid", "0.5:2:4", "--q-grid", "0,1", "--output", "csv"],
        &["identities", "--n", "3", "--forms", "3", "--samples", "30"],
    ] {
        let (_, a, _) = hpq(args);
        let (_, b, _) = hpq(args);
        assert!(!a.is_empty());
        assert_eq!(a, b, "{args:?}");
    }
}

#[test]
fn seed_env_and_flag_agree() {
    let (_, via_flag, _) = hpq(&[&HOPF[..], &["--seed", "7", "--samples", "5"]].concat());
    let out = Command::new(env!("CARGO_BIN_EXE_hpq"))
        .args(HOPF)
        .args(["--samples", "5"])
        .env("HPQ_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), via_flag);
    let (_, default_seed, _) = hpq(&[&HOPF[..], &["--samples", "5"]].concat());
    assert_ne!(default_seed, via_flag);
}

#[test]
fn config_file_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"command": "verify", "model": "sphere:3", "field": "hopf:2", "p": 1.25, "q": 2.0, "samples": 15}"#,
    )
    .unwrap();
    let report = dir.path().join("report.json");
    let (code, stdout, _) = hpq(&["verify", "--config", cfg.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["config"]["samples"], 15);
    // explicit flags win over the file
    let (code, _, _) = hpq(&["verify", "--config", cfg.to_str().unwrap(), "--p", "3"]);
    assert_eq!(code, 1);
    std::fs::write(&cfg, r#"{"command": "classify", "n": 5}"#).unwrap();
    assert_eq!(hpq(&["verify", "--config", cfg.to_str().unwrap()]).0, 2);
    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    assert_eq!(hpq(&["verify", "--config", cfg.to_str().unwrap()]).0, 2);
}

#[test]
fn csv_scan_has_one_row_per_cell() {
    let (code, out, _) = hpq(&[
        "scan", "--model", "sphere:2", "--field", "rotation", "--p-grid", "0.5,1,2", "--q-grid", "0,1", "--scale-grid", "0.5,2",
        "--output", "csv", "--samples", "20",
    ]);
    assert_eq!(code, 0);
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["p", "q", "scale", "max", "mean"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 12);
    for r in rows {
        let max: f64 = r[3].parse().unwrap();
        assert!(max > 1e-3);
        assert!(!r[3].contains('e'));
    }
}

#[test]
fn json_floats_carry_17_significant_digits() {
    let (_, out, _) = hpq(&[&HOPF[..], &["--samples", "3"]].concat());
    let line = out.lines().find(|l| l.contains("\"tolerance\"")).unwrap();
    assert!(line.contains("1.0000000000000000e-8"), "{line}");
}
