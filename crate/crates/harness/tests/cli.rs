use std::process::Command;

use lattice_energy_harness::cli::{run, EXIT_ASSERTION, EXIT_OK, EXIT_USAGE};

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("latenergy").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn energy_of_unit_sphere() {
    let (code, out, _) = call(&["energy", "--d", "3", "--m", "1", "--s", "2", "--k", "2"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), "90");
    let (_, out, _) = call(&["energy", "--d", "3", "--m", "1", "--s", "2", "--k", "3", "--brute"]);
    assert_eq!(out.trim(), "318");
}

#[test]
fn empty_sphere_header() {
    let (code, out, _) = call(&["enumerate", "--d", "3", "--m", "7"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "3 7 sphere 0\n");
}

#[test]
fn paraboloid_translates_meet_in_a_line() {
    let (code, out, _) = call(&[
        "intersect",
        "--family",
        "paraboloid4",
        "--m",
        "5",
        "--shifts",
        "(0,0,0,0);(1,0,0,3);(0,1,0,3)",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().next(), Some("count 11"));
    assert_eq!(out.lines().count(), 12);
}

#[test]
fn enumerate_roundtrips_through_files() {
    let dir = std::env::temp_dir().join(format!("latenergy-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("s4_5.txt");
    let p = path.to_str().unwrap();
    assert_eq!(call(&["enumerate", "--d", "4", "--m", "5", "--out", p]).0, EXIT_OK);
    let (code, out, _) = call(&["energy", "--input", p, "--s", "2"]);
    assert_eq!(code, EXIT_OK);
    let (_, direct, _) = call(&["energy", "--d", "4", "--m", "5", "--s", "2"]);
    assert_eq!(out, direct);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn usage_errors_exit_two() {
    let (code, _, err) = call(&["energy", "--d", "3", "--m", "1", "--frobnicate"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("Usage"), "{err}");
    assert_eq!(call(&["teleport"]).0, EXIT_USAGE);
    assert_eq!(call(&["energy", "--d", "5", "--m", "1"]).0, EXIT_USAGE);
    assert_eq!(call(&["check", "--d", "3", "--m", "5", "--tags", "nope"]).0, EXIT_USAGE);
    assert_eq!(call(&["decompose", "--d", "3", "--m", "5", "--delta", "a/b"]).0, EXIT_USAGE);
    assert_eq!(call(&["--help"]).0, EXIT_OK);
}

#[test]
fn failed_assertions_exit_one() {
    // max_{n != 0} r_2(S_{3,1}, n) = 2 exceeds 1^0.49.
    let (code, out, _) = call(&["check", "--d", "3", "--m", "1", "--tags", "trives"]);
    assert_eq!(code, EXIT_ASSERTION);
    assert!(out.contains("trives,trives cap,2.000000e0,1.000000e0,2.000000e0,fail"), "{out}");
    let (code, _, _) = call(&["check", "--d", "4", "--m", "9", "--tags", "sio2,lowerbd,floma"]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn decompose_and_dft_check() {
    let (code, out, _) = call(&["decompose", "--d", "4", "--m", "25", "--positive"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["delta"], "1/1392");
    let (code, out, _) = call(&["decompose", "--d", "3", "--m", "1", "--threshold", "1", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "n,threshold,x_size,peels,verdict\n6,1,0,1,pass\n");
    let (code, out, _) = call(&["dft-check", "--d", "3", "--m", "1", "--s", "2"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("energy 90") && out.ends_with("match\n"), "{out}");
}

#[test]
fn incidences_of_bisectors() {
    let (code, out, _) = call(&["incidences", "--d", "3", "--m", "1", "--kst", "2"]);
    assert_eq!(code, EXIT_OK);
    // Every ordered pair (a, b) with a + b != 0 puts a on H_{a+b}.
    assert!(out.contains("incidences 30"), "{out}");
    assert!(out.contains("kst s=2"), "{out}");
}

#[test]
fn scan_writes_csv() {
    let (code, out, err) = call(&["scan", "--family", "sphere4", "--m-start", "1", "--m-end", "3", "--k", "2"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let mut lines = out.lines();
    assert_eq!(
        lines.next(),
        Some("family,d,m,seed,density,sizeA,s,k,energy,sup_rep,sumset_size,two_a_minus_a,peels,threshold,notes")
    );
    assert_eq!(lines.count(), 3);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_latenergy");
    let ok = Command::new(bin).args(["energy", "--d", "3", "--m", "1"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert_eq!(String::from_utf8_lossy(&ok.stdout).trim(), "90");
    let bad = Command::new(bin).args(["energy", "--bogus"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
    let fail = Command::new(bin).args(["check", "--d", "3", "--m", "1", "--tags", "trives"]).output().unwrap();
    assert_eq!(fail.status.code(), Some(EXIT_ASSERTION));
}
