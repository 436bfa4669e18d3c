//! End-to-end behavior of the command-line interface: argument handling,
//! config-file defaults, output plumbing, and exit codes.

use clap::Parser;
use relaytree_cli::{execute, run, Cli};

fn render(args: &[&str]) -> String {
    let cli = Cli::try_parse_from(args).expect("args should parse");
    execute(&cli).expect("command should succeed")
}

#[test]
fn height_and_sensors_agree() {
    let a = render(&[
        "relaytree", "evolve", "--alpha0", "0.1", "--beta0", "0.2", "--schedule",
        "constant:p=0.1", "--height", "4",
    ]);
    let b = render(&[
        "relaytree", "evolve", "--alpha0", "0.1", "--beta0", "0.2", "--schedule",
        "constant:p=0.1", "--sensors", "16",
    ]);
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 2 + 5, "header lines plus levels 0..=4");
}

#[test]
fn schedule_grammar_reaches_the_recursion() {
    // The explicit label and the generator form describe the same schedule.
    let gen = render(&[
        "relaytree", "evolve", "--alpha0", "0.1", "--beta0", "0.2", "--schedule",
        "geometric:p0=0.2,r=0.5", "--height", "3",
    ]);
    let exp = render(&[
        "relaytree", "evolve", "--alpha0", "0.1", "--beta0", "0.2", "--schedule",
        "explicit:0.2,0.1,0.05,0.025", "--height", "3",
    ]);
    assert_eq!(gen, exp);
    // Raw pairs combine per message: (0.1, 0.1) acts like p = 0.19.
    let raw = render(&[
        "relaytree", "evolve", "--alpha0", "0.1", "--beta0", "0.2", "--schedule",
        "raw:(0.1,0.1);(0.1,0.1)", "--height", "1",
    ]);
    let single = render(&[
        "relaytree", "evolve", "--alpha0", "0.1", "--beta0", "0.2", "--schedule",
        "constant:p=0.19", "--height", "1",
    ]);
    assert_eq!(raw, single);
}

#[test]
fn exit_codes_separate_failure_classes() {
    let base = ["--alpha0", "0.1", "--beta0", "0.2"];
    // Unparseable schedule → configuration error.
    assert_eq!(
        run(["relaytree", "evolve", "--schedule", "nope", "--height", "3"]
            .iter()
            .chain(&base)
            .copied()),
        2
    );
    // Missing height/sensors choice → configuration error.
    assert_eq!(
        run(["relaytree", "evolve", "--schedule", "constant:p=0.1"]
            .iter()
            .chain(&base)
            .copied()),
        2
    );
    // Schedule too short for the tree → configuration error.
    assert_eq!(
        run(["relaytree", "evolve", "--schedule", "explicit:0.1", "--height", "5"]
            .iter()
            .chain(&base)
            .copied()),
        2
    );
    // Invalid probabilities → domain error.
    assert_eq!(
        run([
            "relaytree", "evolve", "--alpha0", "0.8", "--beta0", "0.4", "--schedule",
            "constant:p=0.1", "--height", "3",
        ]),
        3
    );
    // Oracle beyond its tractable height → domain error.
    assert_eq!(
        run([
            "relaytree", "oracle", "--schedule", "constant:p=0.1", "--height", "7",
        ]
        .iter()
        .chain(&base)
        .copied()),
        3
    );
    // Unwritable output path → I/O error.
    assert_eq!(
        run([
            "relaytree", "evolve", "--alpha0", "0.1", "--beta0", "0.2", "--schedule",
            "constant:p=0.1", "--height", "3", "--out", "/proc/nonexistent/x.csv",
        ]),
        4
    );
    // Size bound that cannot be met → domain error.
    assert_eq!(run(["relaytree", "size", "--epsilon", "0.01", "--l0", "0.5", "--c", "1.0"]), 3);
}

#[test]
fn config_file_fills_gaps_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(
        &conf,
        "# shared experiment setup\nalpha0 = 0.1\nbeta0 = 0.2\nschedule = constant:p=0.1\nheight = 3\n",
    )
    .unwrap();
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    assert_eq!(
        run([
            "relaytree",
            "evolve",
            "--config",
            conf.to_str().unwrap(),
            "--out",
            out_a.to_str().unwrap(),
        ]),
        0
    );
    // Same run with --beta0 given explicitly: the flag overrides the file.
    assert_eq!(
        run([
            "relaytree",
            "evolve",
            "--config",
            conf.to_str().unwrap(),
            "--beta0",
            "0.3",
            "--out",
            out_b.to_str().unwrap(),
        ]),
        0
    );
    let a = std::fs::read_to_string(&out_a).unwrap();
    let b = std::fs::read_to_string(&out_b).unwrap();
    assert!(a.contains("2.0000000000000001e-1"));
    assert!(b.contains("2.9999999999999999e-1"));
    assert_ne!(a, b);
}

#[test]
fn malformed_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    std::fs::write(&conf, "alpha0 0.1\n").unwrap();
    assert_eq!(run(["relaytree", "evolve", "--config", conf.to_str().unwrap()]), 2);
    assert_eq!(run(["relaytree", "evolve", "--config", "/does/not/exist.conf"]), 2);
}

#[test]
fn regions_grid_covers_every_q() {
    let csv = render(&["relaytree", "regions", "--q", "0.0,0.25", "--alpha-step", "0.05"]);
    // 10 α values per q (0.00 … 0.45), two q values, two header lines.
    assert_eq!(csv.lines().count(), 2 + 20);
    assert!(csv.starts_with("# relaytree v"));
    assert_eq!(csv.lines().nth(1).unwrap(), "q,alpha,b_upper,ru_upper");
}

#[test]
fn bounds_kv_is_complete() {
    let kv = render(&[
        "relaytree", "bounds", "--alpha0", "0.1", "--beta0", "0.2", "--schedule",
        "quadratic:p0=0.1", "--sensors", "1024", "--prior0", "0.4",
    ]);
    for key in [
        "n_sensors = 1024",
        "height = 10",
        "parity = even",
        "c_constant = ",
        "lower_bits = ",
        "upper_bits = ",
        "measured_weighted_bits = ",
    ] {
        assert!(kv.contains(key), "missing `{key}` in:\n{kv}");
    }
}
