use std::fs;
use std::process::{Command, Output};

fn distdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_distdp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn list_names_the_experiments() {
    let o = distdp(&["list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in ["rr-sum-error", "hoeffding-tail", "compile-to-local", "phase-transition", "message-accounting"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing from\n{text}");
    }
}

#[test]
fn reruns_with_the_same_seed_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let o = distdp(&["run", "--experiment", "rr-sum-error", "--n", "500", "--trials", "50", "--seed", "7", "--out", path.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let (a, b) = (fs::read(a).unwrap(), fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);

    let other = distdp(&["run", "--experiment", "rr-sum-error", "--n", "500", "--trials", "50", "--seed", "8"]);
    assert_ne!(other.stdout, a);
}

#[test]
fn csv_has_the_documented_columns() {
    let o = distdp(&["run", "--experiment", "laplace-tail", "--trials", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut reader = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(reader.headers().unwrap(), vec!["experiment", "trial", "param_json", "metric", "value"]);
    let records: Vec<_> = reader.records().map(Result::unwrap).collect();
    assert_eq!(records.iter().filter(|r| &r[1] != "all").count(), 20);
    for r in &records {
        assert_eq!(&r[0], "laplace-tail");
        let params: serde_json::Value = serde_json::from_str(&r[2]).unwrap();
        assert_eq!(params["trials"], 20);
        assert!(r[4].parse::<f64>().is_ok(), "{}", &r[4]);
    }
}

#[test]
fn invalid_parameters_name_the_field() {
    for (args, field) in [
        (vec!["--eps=-1"], "`eps`"),
        (vec!["--delta", "2"], "`delta`"),
        (vec!["--trials", "0"], "`trials`"),
        (vec!["--n", "0"], "`n`"),
    ] {
        let mut all = vec!["run", "--experiment", "rr-sum-error"];
        all.extend(args);
        let o = distdp(&all);
        assert!(!o.status.success());
        assert!(stderr(&o).contains(field), "{field}: {}", stderr(&o));
    }
    let o = distdp(&["run", "--experiment", "dist-alpha", "--n", "8", "--t", "4"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("`t`"), "{}", stderr(&o));
}

#[test]
fn unknown_experiment_is_rejected_with_the_choices() {
    let o = distdp(&["run", "--experiment", "no-such-thing"]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("no-such-thing") && err.contains("rr-sum-error"), "{err}");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "experiment = \"exact-epsilon\"\neps = 0.5\nseed = 3\n").unwrap();
    let o = distdp(&["run", "--config", cfg.to_str().unwrap(), "--eps", "2.0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("\"\"eps\"\":2.0") && text.contains("\"\"seed\"\":3"), "{text}");

    fs::write(&cfg, "experiment = \"exact-epsilon\"\nepsilon = 0.5\n").unwrap();
    let o = distdp(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("epsilon"));
}

#[test]
fn message_accounting_matches_the_closed_forms() {
    let o = distdp(&["run", "--experiment", "message-accounting", "--n", "256", "--t", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut values = std::collections::HashMap::new();
    for r in csv::Reader::from_reader(o.stdout.as_slice()).records() {
        let r = r.unwrap();
        values.insert(r[3].to_owned(), r[4].parse::<f64>().unwrap());
    }
    for proto in ["dist_alpha", "star_rr", "gaussian_aggregator"] {
        assert_eq!(values[&format!("{proto}_message_count")], values[&format!("{proto}_closed_form")], "{proto}");
    }
    assert_eq!(values["star_rr_message_count"], 510.0);
}

#[test]
fn phase_transition_accepts_a_single_tau() {
    let o = distdp(&["run", "--experiment", "phase-transition", "--n", "400", "--trials", "50", "--tau", "200"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.contains(",total_error,")).count(), 1);
    assert!(text.contains("\"\"tau\"\":200.0"));
}
