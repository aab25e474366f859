use std::process::{Command, Output};

fn liftforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liftforge"))
        .args(args)
        .env_remove("LIFTFORGE_JOBS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_patt_is_proper() {
    let o = liftforge(&["verify", "(0★10)", "--exact"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "proper");
}

#[test]
fn verify_non_lifting_is_a_mismatch() {
    let o = liftforge(&["verify", "(0★11)"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.starts_with("not proper"), "{out}");
}

#[test]
fn landscape_census_line() {
    let o = liftforge(&["landscapes", "--k", "6", "--classes"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "count=72 classes=18");
}

#[test]
fn long_census_is_gated() {
    let o = liftforge(&["landscapes", "--k", "13"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scaled_du_of_patt() {
    let o = liftforge(&["du", "(0★10)", "--n", "4..12", "--scaled"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "192 224 240 216 216 216 216 216 216");
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["bogus"][..],
        &["parse", "(0★1"],
        &["verify", "(0★10)", "--exact", "--finite", "8"],
        &["du", "(0★10)", "--n", "9..4"],
        &["--jobs", "0", "parse", "(0★10)"],
        &["--n-cap", "25", "parse", "(0★10)"],
        &["families", "--k", "5", "--j", "2", "--set", "1,5"],
    ] {
        let o = liftforge(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn ascii_output() {
    let o = liftforge(&["--ascii", "compose", "(0★110)", "(0★10)"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("(0*110)o(0*10)\n"), "{out}");
    assert!(out.contains("  k       5\n"), "{out}");
}

#[test]
fn families_examples() {
    let o = liftforge(&["families", "--k", "7", "--j", "3", "--set", "1,7"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("proper  true"));
    let o = liftforge(&["families", "--r", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("order   F^3 = I: true"));
}

#[test]
fn search6_json_lines() {
    let o = liftforge(&["--format", "json", "search6", "--s", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<serde_json::Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 20);
    assert!(lines.iter().all(|v| v["s"] == 2 && v["rule"].is_string()));
}

#[test]
fn json_is_identical_across_job_counts() {
    for args in [
        &["du", "(0★10)", "(0★110)∘(0★10)", "--n", "5..9", "--scaled"][..],
        &["search6"],
        &["closure", "--max-diameter", "7", "--budget", "1500"],
    ] {
        let run = |jobs: &str| {
            let mut full = vec!["--format", "json", "--jobs", jobs];
            full.extend_from_slice(args);
            let o = liftforge(&full);
            assert_eq!(o.status.code(), Some(0), "{full:?}");
            o.stdout
        };
        assert_eq!(run("1"), run("3"), "{args:?}");
    }
}

#[test]
fn catalog_verifies() {
    let o = liftforge(&["catalog"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with(
        "entries=120 distinct_classes=120 orbit_functions=472 mismatches=0 missing_search6_classes=0"
    ));
}

#[test]
fn du_csv_table() {
    let o = liftforge(&["--format", "csv", "du", "(0★10)", "--n", "4..6", "--scaled"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "Function,k,deg,n=4,n=5,n=6\n(0★10),4,3,192,224,240\n"
    );
}
