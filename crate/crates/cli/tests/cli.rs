use std::path::PathBuf;
use std::process::{Command, Output};

use bibrace::format::Record;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bibrace")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn validate_good_and_bad() {
    let good = run(&["validate", "--algebra", &fixture("minimal.alg")]);
    assert_eq!(good.status.code(), Some(0));
    assert_eq!(stdout(&good).trim(), "valid");
    let bad = run(&["validate", "--algebra", &fixture("bad.alg")]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("condition (i)"), "{}", stdout(&bad));
}

#[test]
fn validate_cipher_and_theta() {
    let o = run(&["validate", "--spec", &fixture("trapdoor.cipher")]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["validate", "--theta", &fixture("square_full.theta")]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn info_reports() {
    let o = run(&["info", "--algebra", &fixture("square_full.alg")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("dim R² = 4"));
    let o = run(&["info", "--algebra", &fixture("minimal.alg")]);
    assert!(stdout(&o).contains("Soc = <e3>, weak keys: 2"));
    let o = run(&["info", "--algebra", &fixture("bad.alg")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn theta_round_trip() {
    let o = run(&["theta", "--algebra", &fixture("square_full.alg")]);
    assert_eq!(o.status.code(), Some(0));
    let theta_text = stdout(&o);
    assert_eq!(
        theta_text,
        std::fs::read_to_string(fixture("square_full.theta")).unwrap()
    );
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.theta");
    std::fs::write(&path, theta_text).unwrap();
    let back = run(&["theta", "--theta", path.to_str().unwrap()]);
    assert_eq!(
        stdout(&back),
        std::fs::read_to_string(fixture("square_full.alg")).unwrap()
    );
}

#[test]
fn aut_order_and_check() {
    let o = run(&["aut", "--algebra", &fixture("minimal.alg")]);
    assert!(stdout(&o).contains("6 * 1 * 2^2 = 24"));
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("g.mat");
    std::fs::write(&good, "3 3\n010\n100\n001\n").unwrap();
    assert_eq!(
        run(&[
            "aut",
            "--algebra",
            &fixture("minimal.alg"),
            "--check",
            good.to_str().unwrap()
        ])
        .status
        .code(),
        Some(0)
    );
    let bad = dir.path().join("b.mat");
    std::fs::write(&bad, "3 3\n100\n010\n101\n").unwrap();
    assert_eq!(
        run(&[
            "aut",
            "--algebra",
            &fixture("minimal.alg"),
            "--check",
            bad.to_str().unwrap()
        ])
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn iso_reason() {
    let o = run(&[
        "iso",
        "--algebra",
        &fixture("square_full.alg"),
        "--other",
        &fixture("square_deficient.alg"),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("not isomorphic: defining spans have dimensions 4 and 3"));
}

#[test]
fn ddt_summary_line() {
    let o = run(&["ddt", "--sbox", &fixture("toy.sbox")]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 17);
    assert!(text.lines().last().unwrap().starts_with("max-bias: "));
    let o = run(&["ddt", "--sbox", &fixture("present.sbox"), "--op", "circle"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn encrypt_decrypt_round_trip() {
    let spec = fixture("trapdoor.cipher");
    for block in ["00", "a5", "ff"] {
        let c = stdout(&run(&["encrypt", "--spec", &spec, "--in", block]));
        let p = stdout(&run(&["decrypt", "--spec", &spec, "--in", c.trim()]));
        assert_eq!(p.trim(), block);
    }
    assert_eq!(run(&["encrypt", "--spec", &spec, "--in", "abc"]).status.code(), Some(2));
}

#[test]
fn usage_and_parse_errors_exit_2() {
    assert_eq!(run(&["info", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(&["info", "--algebra", "/nonexistent/file.alg"]).status.code(),
        Some(2)
    );
    let o = run(&["info", "--algebra", &fixture("toy.sbox")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(!o.stderr.is_empty());
}

#[test]
fn structured_output_round_trips() {
    let cases: Vec<Vec<String>> = vec![
        vec!["info".into(), "--algebra".into(), fixture("minimal.alg")],
        vec!["aut".into(), "--algebra".into(), fixture("trapdoor.alg")],
        vec!["ddt".into(), "--sbox".into(), fixture("toy.sbox")],
        vec![
            "trail".into(),
            "--spec".into(),
            fixture("trapdoor.cipher"),
            "--algebra".into(),
            fixture("trapdoor.alg"),
        ],
        vec![
            "trapdoor".into(),
            "--sbox".into(),
            fixture("toy.sbox"),
            "--m".into(),
            "2".into(),
            "--d".into(),
            "2".into(),
        ],
    ];
    for mut args in cases {
        args.extend(["--format".into(), "structured".into()]);
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = run(&refs);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        let text = stdout(&o);
        let rec = Record::parse(&text).unwrap();
        assert_eq!(rec.emit(), text);
        assert!(!rec.fields().is_empty());
    }
}

#[test]
fn attack_and_trail_fields() {
    let o = run(&[
        "attack",
        "--spec",
        &fixture("trapdoor.cipher"),
        "--algebra",
        &fixture("trapdoor.alg"),
        "--pairs",
        "4096",
        "--seed",
        "0",
        "--format",
        "structured",
    ]);
    let rec = Record::parse(&stdout(&o)).unwrap();
    assert_eq!(rec.get("op"), Some("circle"));
    assert_eq!(rec.get("ranking").unwrap().split(' ').count(), 16);
    let o = run(&["attack", "--spec", &fixture("trapdoor.cipher"), "--pairs", "8"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&[
        "trail",
        "--spec",
        &fixture("trapdoor.cipher"),
        "--rounds",
        "2",
        "--format",
        "structured",
    ]);
    let rec = Record::parse(&stdout(&o)).unwrap();
    assert_eq!(rec.get("op"), Some("xor"));
    assert_eq!(rec.get("rounds"), Some("2"));
}
