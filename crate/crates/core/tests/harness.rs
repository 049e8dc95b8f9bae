use std::path::Path;
use std::process::Command;

use proptest::prelude::*;
use rideshare::harness::instance::parse_instance;
use rideshare::harness::{self, Instance, InstanceRecord, RunConfig};
use rideshare::harness::report::{batches_csv, Summary};
use rideshare::matchers::MatcherKind;

const SMALL: &[&str] = &["--drivers", "5", "--riders", "15", "--horizon-seconds", "300", "--grid", "8"];

fn cli(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rideshare"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn record() -> impl Strategy<Value = InstanceRecord> {
    (0u64..1000, 0u64..1000, 0.0f64..1e5, 0.0f64..1e4, prop_oneof![-4i64..0, 1i64..5]).prop_map(
        |(origin, destination, early, width, load)| InstanceRecord {
            id: 0,
            origin,
            destination,
            early,
            late: early + width,
            load,
        },
    )
}

proptest! {
    #[test]
    fn instance_text_round_trips(mut records in prop::collection::vec(record(), 0..40)) {
        for (i, r) in records.iter_mut().enumerate() {
            r.id = i as u64 + 1;
        }
        let inst = Instance { records };
        let back = parse_instance(inst.to_text().as_bytes()).unwrap();
        prop_assert_eq!(back, inst);
    }
}

#[test]
fn compare_writes_one_row_per_matcher() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["compare"];
    args.extend_from_slice(SMALL);
    let out = cli(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("compare.csv")).unwrap();
    let labels: Vec<String> = rdr.deserialize::<Summary>().map(|r| r.unwrap().label).collect();
    assert_eq!(labels, ["greedy", "nn", "sa", "bbo"]);
}

#[test]
fn repeated_runs_write_identical_outputs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut args = vec!["run", "--seed", "9"];
    args.extend_from_slice(SMALL);
    for d in [&a, &b] {
        assert!(cli(&args, d.path()).status.success());
    }
    for f in ["bbo.json", "bbo_batches.csv", "bbo_events.log"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{f} differs");
    }
}

#[test]
fn bad_input_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["run", "--matcher", "tabu"],
        vec!["run", "--no-such-flag", "1"],
        vec!["frobnicate"],
        vec!["run", "--instance", "/nonexistent/instance.txt"],
    ] {
        let out = cli(&args, dir.path());
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(!out.stderr.is_empty(), "{args:?} printed nothing");
    }
}

#[test]
fn sweep_defaults_to_four_cases() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["sweep", "--generation-limit", "3"];
    args.extend_from_slice(SMALL);
    let out = cli(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("case,"));
}

#[test]
fn generated_files_feed_a_run() {
    let gen = tempfile::tempdir().unwrap();
    let mut args = vec!["generate", "--seed", "4"];
    args.extend_from_slice(SMALL);
    assert!(cli(&args, gen.path()).status.success());
    let p = |f: &str| gen.path().join(f).display().to_string();
    let (inst, nodes, edges, cfg) = (p("instance.txt"), p("nodes.txt"), p("edges.txt"), p("config.toml"));
    let run = tempfile::tempdir().unwrap();
    let args = [
        "run", "--instance", &inst, "--network-nodes", &nodes, "--network-edges", &edges, "--config", &cfg,
        "--matcher", "greedy",
    ];
    let out = cli(&args, run.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // the same run without the files regenerates identical inputs
    let direct = tempfile::tempdir().unwrap();
    let mut args = vec!["run", "--seed", "4", "--matcher", "greedy"];
    args.extend_from_slice(SMALL);
    assert!(cli(&args, direct.path()).status.success());
    let read = |d: &Path| std::fs::read_to_string(d.join("greedy.json")).unwrap();
    assert_eq!(read(run.path()), read(direct.path()));
}

#[test]
fn batch_table_sums_to_the_cumulative_figures() {
    let cfg = RunConfig { drivers: 6, riders: 30, horizon_seconds: 600, grid: 10, seed: 2, ..Default::default() };
    let net = harness::network(&cfg, None, None).unwrap();
    let inst = harness::instance(&cfg, &net, None).unwrap();
    let r = harness::run_one(&cfg, MatcherKind::Sa, &inst, &net).unwrap();
    let table = batches_csv(&r);
    let mut rdr = csv::Reader::from_reader(table.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (m, a, arr) = (col("matched"), col("added_distance"), col("rider_arrivals"));
    let (mut matched, mut added, mut arrivals) = (0usize, 0.0f64, 0usize);
    for row in rdr.records() {
        let row = row.unwrap();
        matched += row[m].parse::<usize>().unwrap();
        added += row[a].parse::<f64>().unwrap();
        arrivals += row[arr].parse::<usize>().unwrap();
    }
    let json: serde_json::Value = serde_json::from_str(&rideshare::harness::report::to_json(&r)).unwrap();
    let cum = &json["cumulative"];
    assert_eq!(matched as u64, cum["matched_count"].as_u64().unwrap());
    assert!((added - cum["overhead_sum"].as_f64().unwrap()).abs() < 1e-6);
    assert_eq!(arrivals, inst.riders().count());
}

#[test]
fn config_keys_ignore_case_and_dashes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    std::fs::write(&path, "Population-Size = 7\nALPHA = 0.25\nmatcher = \"sa\"\n").unwrap();
    let cfg = RunConfig::load(&path).unwrap();
    assert_eq!((cfg.population_size, cfg.alpha, cfg.matcher.as_str()), (7, 0.25, "sa"));
    std::fs::write(&path, "populaton_size = 7\n").unwrap();
    assert!(RunConfig::load(&path).is_err());
}
