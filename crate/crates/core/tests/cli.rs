use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mvselect::report::{parse_ids, Report};
use mvselect::VersionId;

fn toy() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/toy")
}

fn mvtool(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvtool"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = mvtool(dir, args);
    assert!(
        out.status.success(),
        "mvtool {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    mvtool(dir, args).status.code().unwrap()
}

fn report(path: &Path) -> Report {
    Report::parse(&fs::read_to_string(path).unwrap()).unwrap()
}

fn value(r: &Report, section: &str, key: &str) -> f64 {
    r.get(section, key).unwrap().parse().unwrap()
}

/// Noise-free planted training set and a held-out test set with the same
/// regions.
fn planted(dir: &Path) {
    ok(
        dir,
        &[
            "gen",
            "--versions",
            "5",
            "--datasets",
            "150",
            "--features",
            "2",
            "--regions",
            "4",
            "--seed",
            "21",
            "--out",
            "train",
        ],
    );
    ok(
        dir,
        &[
            "gen",
            "--versions",
            "5",
            "--datasets",
            "80",
            "--features",
            "2",
            "--regions",
            "4",
            "--seed",
            "21",
            "--sample-seed",
            "22",
            "--first-dataset-id",
            "5000",
            "--out",
            "test",
        ],
    );
}

#[test]
fn gen_writes_four_files_deterministically() {
    let t = tempfile::tempdir().unwrap();
    let args = [
        "gen",
        "--versions",
        "4",
        "--datasets",
        "100",
        "--features",
        "2",
        "--seed",
        "7",
    ];
    let listed = ok(t.path(), &args);
    assert_eq!(listed.lines().count(), 4);
    let names = [
        "versions.csv",
        "datasets.csv",
        "runtimes.csv",
        "ground_truth.csv",
    ];
    let first: Vec<Vec<u8>> = names
        .iter()
        .map(|n| fs::read(t.path().join(n)).unwrap())
        .collect();
    assert_eq!(String::from_utf8_lossy(&first[2]).lines().count(), 401);
    ok(t.path(), &args);
    for (n, bytes) in names.iter().zip(&first) {
        assert_eq!(&fs::read(t.path().join(n)).unwrap(), bytes, "{n}");
    }
}

#[test]
fn missing_seed_is_a_usage_error() {
    let t = tempfile::tempdir().unwrap();
    let out = mvtool(
        t.path(),
        &[
            "gen",
            "--versions",
            "4",
            "--datasets",
            "100",
            "--features",
            "2",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--seed") && err.contains("Usage"), "{err}");
}

#[test]
fn bad_flags_and_help() {
    let t = tempfile::tempdir().unwrap();
    assert_eq!(code(t.path(), &["select", "--no-such-flag"]), 2);
    assert_eq!(code(t.path(), &["frobnicate"]), 2);
    for cmd in ["gen", "select", "train", "cv", "emit", "simulate"] {
        let out = mvtool(t.path(), &[cmd, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{cmd}");
        assert!(String::from_utf8_lossy(&out.stdout).contains("Usage: mvtool"));
    }
}

#[test]
fn toy_selection_matches_golden() {
    let t = tempfile::tempdir().unwrap();
    let toy = toy();
    let text = ok(
        t.path(),
        &[
            "select",
            "--scenario",
            toy.to_str().unwrap(),
            "--max-versions",
            "3",
        ],
    );
    let golden = fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/toy_selection.txt"),
    )
    .unwrap();
    assert_eq!(text, golden);
    let r = Report::parse(&text).unwrap();
    assert_eq!(
        parse_ids(r.get("selection", "selected").unwrap()).unwrap(),
        vec![VersionId(1), VersionId(2)]
    );
}

#[test]
fn zero_versions_rejected() {
    let t = tempfile::tempdir().unwrap();
    let toy = toy();
    assert_eq!(
        code(
            t.path(),
            &[
                "select",
                "--scenario",
                toy.to_str().unwrap(),
                "--max-versions",
                "0"
            ]
        ),
        2
    );
}

#[test]
fn invalid_scenario_is_a_validation_error_and_missing_dir_is_internal() {
    let t = tempfile::tempdir().unwrap();
    let bad = t.path().join("bad");
    fs::create_dir(&bad).unwrap();
    for f in ["versions.csv", "datasets.csv"] {
        fs::copy(toy().join(f), bad.join(f)).unwrap();
    }
    let runtimes = fs::read_to_string(toy().join("runtimes.csv")).unwrap();
    let broken = runtimes.replace("2,3,3\n", "").replace("0,1,1.5", "0,1,-1");
    fs::write(bad.join("runtimes.csv"), broken).unwrap();
    let out = mvtool(t.path(), &["select", "--scenario", "bad"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("incomplete matrix") && err.contains("non-positive"),
        "{err}"
    );
    assert_eq!(code(t.path(), &["select", "--scenario", "nowhere"]), 1);
}

#[test]
fn size_mode_reaches_full_oracle() {
    let t = tempfile::tempdir().unwrap();
    planted(t.path());
    ok(
        t.path(),
        &[
            "select",
            "--scenario",
            "train",
            "--mode",
            "size",
            "--loss-tol",
            "0",
            "--out",
            "sel.txt",
        ],
    );
    let r = report(&t.path().join("sel.txt"));
    assert_eq!(value(&r, "selection", "max_dataset_loss"), 0.0);
    assert_eq!(
        r.get("selection", "covered_datasets"),
        r.get("selection", "datasets")
    );
    assert_eq!(value(&r, "selection", "fraction_of_oracle"), 1.0);
}

#[test]
fn planted_pipeline_is_perfect() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    planted(d);
    ok(
        d,
        &[
            "select",
            "--scenario",
            "train",
            "--max-versions",
            "4",
            "--out",
            "sel.txt",
        ],
    );
    ok(
        d,
        &[
            "cv",
            "--scenario",
            "train",
            "--selection",
            "sel.txt",
            "--algorithm",
            "tree",
            "--seed",
            "5",
            "--out",
            "cv.txt",
        ],
    );
    assert_eq!(value(&report(&d.join("cv.txt")), "cv", "aggregate"), 0.0);

    ok(
        d,
        &[
            "train",
            "--scenario",
            "train",
            "--selection",
            "sel.txt",
            "--algorithm",
            "tree",
            "--out",
            "tree.json",
        ],
    );
    ok(
        d,
        &["emit", "--model", "tree.json", "--out", "tree.dispatch"],
    );
    let parsed = mvselect::dispatch::DispatcherSpec::deserialize(
        &fs::read_to_string(d.join("tree.dispatch")).unwrap(),
    )
    .unwrap();
    assert!(parsed.leaf_count() >= 4);

    ok(
        d,
        &[
            "simulate",
            "--scenario",
            "test",
            "--dispatcher",
            "tree.dispatch",
            "--selection",
            "sel.txt",
            "--out",
            "a.txt",
        ],
    );
    ok(
        d,
        &[
            "simulate",
            "--scenario",
            "test",
            "--model",
            "tree.json",
            "--out",
            "b.txt",
        ],
    );
    let a = report(&d.join("a.txt"));
    assert_eq!(
        value(&a, "simulation", "fraction_of_representative_oracle"),
        1.0
    );
    assert_eq!(value(&a, "simulation", "mispick_rate"), 0.0);
    // The emitted file and the in-memory model drive identical choices.
    assert_eq!(
        a.get_table("datasets"),
        report(&d.join("b.txt")).get_table("datasets")
    );

    ok(
        d,
        &[
            "simulate",
            "--scenario",
            "test",
            "--oracle",
            "--selection",
            "sel.txt",
            "--out",
            "o.txt",
        ],
    );
    assert_eq!(
        value(
            &report(&d.join("o.txt")),
            "simulation",
            "fraction_of_representative_oracle"
        ),
        1.0
    );
    ok(
        d,
        &[
            "simulate",
            "--scenario",
            "test",
            "--fixed",
            "0",
            "--selection",
            "sel.txt",
            "--out",
            "f.txt",
        ],
    );
    assert_eq!(
        value(&report(&d.join("f.txt")), "simulation", "geomean_realized"),
        1.0
    );
}

#[test]
fn emit_renders_template_alongside() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    planted(d);
    ok(
        d,
        &[
            "train",
            "--scenario",
            "train",
            "--representatives",
            "1,2,3,4",
            "--algorithm",
            "rules",
            "--out",
            "rules.json",
        ],
    );
    ok(
        d,
        &[
            "emit",
            "--model",
            "rules.json",
            "--out",
            "r.dispatch",
            "--reference-template",
        ],
    );
    let rendered = fs::read_to_string(d.join("r.dispatch.rendered")).unwrap();
    assert!(rendered.starts_with("int mv_select(const double *x)"));

    fs::write(
        d.join("t.tmpl"),
        "{{BRANCH c a b}}\n({{c}}) ? {{a}} : {{b}}\n{{FEAT i}}\nf[{{i}}]\n{{VER v}}\n{{v}}\n{{CMP_LE}}\n<=\n",
    )
    .unwrap();
    ok(
        d,
        &[
            "emit",
            "--model",
            "rules.json",
            "--out",
            "r2.dispatch",
            "--template",
            "t.tmpl",
            "--rendered",
            "r2.txt",
        ],
    );
    assert!(fs::read_to_string(d.join("r2.txt"))
        .unwrap()
        .contains("f[0] <="));
    assert_eq!(
        fs::read(d.join("r.dispatch")).unwrap(),
        fs::read(d.join("r2.dispatch")).unwrap()
    );

    fs::write(d.join("broken.tmpl"), "{{BRANCH c a b}}\nif {{c}}\n").unwrap();
    assert_eq!(
        code(
            d,
            &[
                "emit",
                "--model",
                "rules.json",
                "--out",
                "x",
                "--template",
                "broken.tmpl"
            ]
        ),
        2
    );
}

#[test]
fn ppm_models_simulate_but_do_not_emit() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    planted(d);
    ok(
        d,
        &[
            "train",
            "--scenario",
            "train",
            "--representatives",
            "1 2 3 4",
            "--algorithm",
            "regtree",
            "--out",
            "ppm.json",
        ],
    );
    assert_eq!(code(d, &["emit", "--model", "ppm.json", "--out", "x"]), 2);
    ok(
        d,
        &[
            "simulate",
            "--scenario",
            "test",
            "--model",
            "ppm.json",
            "--out",
            "s.txt",
        ],
    );
    let r = report(&d.join("s.txt"));
    assert_eq!(r.get("simulation", "selector"), Some("ppm"));
    assert!(value(&r, "simulation", "fraction_of_representative_oracle") > 0.9);
    assert!(r.get("code_growth", "selector_bytes").is_none());

    ok(
        d,
        &[
            "cv",
            "--scenario",
            "train",
            "--representatives",
            "1,2",
            "--algorithm",
            "linreg",
            "--folds",
            "5",
            "--seed",
            "1",
            "--out",
            "cv.txt",
        ],
    );
    let cv = report(&d.join("cv.txt"));
    assert_eq!(cv.get("cv", "metric"), Some("rrse_percent"));
    assert!(cv.get("cv version=1", "aggregate").is_some());
    assert!(cv.get_table("folds version=2").is_some());
}

#[test]
fn too_many_folds_rejected() {
    let t = tempfile::tempdir().unwrap();
    let toy = toy();
    let out = mvtool(
        t.path(),
        &[
            "cv",
            "--scenario",
            toy.to_str().unwrap(),
            "--representatives",
            "1,2",
            "--algorithm",
            "tree",
            "--folds",
            "4",
            "--seed",
            "1",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("too few samples"));
}

#[test]
fn overlap_warning_when_test_reuses_training_ids() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    planted(d);
    ok(
        d,
        &[
            "gen",
            "--versions",
            "5",
            "--datasets",
            "20",
            "--features",
            "2",
            "--regions",
            "4",
            "--seed",
            "21",
            "--sample-seed",
            "9",
            "--out",
            "overlap",
        ],
    );
    ok(
        d,
        &[
            "train",
            "--scenario",
            "train",
            "--representatives",
            "1,2,3,4",
            "--algorithm",
            "tree",
            "--out",
            "m.json",
        ],
    );
    ok(
        d,
        &[
            "simulate",
            "--scenario",
            "overlap",
            "--model",
            "m.json",
            "--out",
            "s.txt",
        ],
    );
    let warning = report(&d.join("s.txt"))
        .get("simulation", "overlap_warning")
        .unwrap()
        .to_string();
    assert!(
        warning.starts_with("20 test datasets also occur in training"),
        "{warning}"
    );
    ok(
        d,
        &[
            "simulate",
            "--scenario",
            "test",
            "--model",
            "m.json",
            "--out",
            "s2.txt",
        ],
    );
    assert_eq!(
        report(&d.join("s2.txt")).get("simulation", "overlap_warning"),
        Some("none")
    );
}

#[test]
fn config_file_supplies_flags_and_command_line_wins() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    fs::write(
        d.join("run.toml"),
        "seed = 4\nformat = \"human\"\n[gen]\nversions = 4\ndatasets = 30\nfeatures = 1\nout = \"from_config\"\n",
    )
    .unwrap();
    ok(d, &["--config", "run.toml", "gen", "--datasets", "12"]);
    let datasets = fs::read_to_string(d.join("from_config/datasets.csv")).unwrap();
    assert_eq!(datasets.lines().count(), 13);
    assert_eq!(datasets.lines().next(), Some("id,f0"));

    let text = ok(
        d,
        &[
            "--config",
            "run.toml",
            "select",
            "--scenario",
            "from_config",
        ],
    );
    assert!(text.contains("[run]\nelapsed_ms = "), "{text}");
    let text = ok(
        d,
        &[
            "--config",
            "run.toml",
            "select",
            "--scenario",
            "from_config",
            "--format",
            "machine",
        ],
    );
    assert!(!text.contains("[run]"));

    fs::write(d.join("bad.toml"), "[select]\nversions = 3\n").unwrap();
    assert_eq!(
        code(
            d,
            &[
                "--config",
                "bad.toml",
                "select",
                "--scenario",
                "from_config"
            ]
        ),
        2
    );
}
