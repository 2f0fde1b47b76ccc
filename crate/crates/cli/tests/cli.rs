use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Command, Output, Stdio};
use std::time::Duration;

fn wfid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wfid")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn simulate_small_nbiot(dir: &Path) -> std::path::PathBuf {
    let scenario = dir.join("small.toml");
    std::fs::write(&scenario, "kind = \"nbiot\"\npackets_per_device = 40\n").unwrap();
    let out = dir.join("nbiot.csv");
    let o = wfid(&["simulate", "--scenario", p(&scenario), "--out", p(&out), "--seed", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(wfid(&["--help"]).status.code(), Some(0));
    assert_eq!(wfid(&["--version"]).status.code(), Some(0));
    assert_eq!(wfid(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn simulate_default_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nbiot.csv");
    let o = wfid(&["simulate", "--default", "nbiot", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("rows: 5425"), "{text}");
    assert!(text.contains("classes: 5"));
    assert!(text.contains("# seed: 7"));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 5426);

    let out = dir.path().join("csi.csv");
    let o = wfid(&["simulate", "--default", "csi", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("rows: 24720"), "{text}");
    assert!(text.contains("classes: 20"));
    assert!(text.contains("trace length: 52"));
}

#[test]
fn simulate_is_deterministic_and_reports_parse_lines() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate_small_nbiot(dir.path());
    let first = std::fs::read(&a).unwrap();
    let b = simulate_small_nbiot(dir.path());
    assert_eq!(first, std::fs::read(b).unwrap());

    let missing = wfid(&["simulate", "--scenario", "/nonexistent/s.toml", "--out", p(&dir.path().join("x.csv"))]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).contains("no such file"));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "kind = \"nbiot\"\npackets_per_device = 10\nwobble = 3\n").unwrap();
    let o = wfid(&["simulate", "--scenario", p(&bad), "--out", p(&dir.path().join("x.csv"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = wfid(&["simulate", "--default", "nbiot", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn evaluate_writes_one_row_per_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate_small_nbiot(dir.path());
    let out = dir.path().join("report");
    let o = wfid(&[
        "evaluate", "--data", p(&data), "--algorithms", "nb,dt,knn", "--protocol", "nested_cv",
        "--samples", "2", "--inner-folds", "2", "--outer-folds", "3", "--no-benchmark", "--seed", "9", "--out", p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(table.starts_with("# protocol: nested_cv, seed: 9"));
    for name in ["NB", "DT", "KNN"] {
        assert!(table.lines().any(|l| l.starts_with(name)), "{table}");
    }
    let records = std::fs::read_to_string(out.join("report.jsonl")).unwrap();
    assert_eq!(records.lines().count(), 6);

    let again = dir.path().join("again");
    let o = wfid(&[
        "evaluate", "--data", p(&data), "--algorithms", "nb,dt,knn", "--samples", "2", "--inner-folds", "2",
        "--outer-folds", "3", "--no-benchmark", "--seed", "9", "--out", p(&again),
    ]);
    assert!(o.status.success());
    assert_eq!(records, std::fs::read_to_string(again.join("report.jsonl")).unwrap());
}

#[test]
fn evaluate_sequence_holdout() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("csi.toml");
    std::fs::write(&scenario, "kind = \"csi\"\nnum_devices = 3\npackets_per_device = 20\ntrace_length = 16\n").unwrap();
    let data = dir.path().join("csi.csv");
    assert!(wfid(&["simulate", "--scenario", p(&scenario), "--out", p(&data)]).status.success());
    let out = dir.path().join("report");
    let o = wfid(&[
        "evaluate", "--data", p(&data), "--algorithms", "rocket_ridge", "--protocol", "holdout", "--kernels", "50",
        "--no-benchmark", "--out", p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let records = std::fs::read_to_string(out.join("report.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(records.lines().next().unwrap()).unwrap();
    assert_eq!(first["model"], "rocket_ridge");
    assert_eq!(first["n"], 9);
}

#[test]
fn evaluate_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate_small_nbiot(dir.path());
    let out = dir.path().join("r");
    let o = wfid(&["evaluate", "--data", p(&data), "--algorithms", "nb,xgb", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("rocket_ridge"), "{}", stderr(&o));
    let o = wfid(&["evaluate", "--data", p(&data), "--algorithms", "onenn", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("kind mismatch"));
    let o = wfid(&["evaluate", "--data", p(&data), "--algorithms", "nb", "--outer-folds", "1", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let o = wfid(&["evaluate", "--data", p(&data), "--algorithms", "nb", "--protocol", "loo", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let o = wfid(&["evaluate", "--data", "/nonexistent.csv", "--algorithms", "nb", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn project_shapes_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate_small_nbiot(dir.path());
    let out = dir.path().join("proj.csv");
    let o = wfid(&["project", "--data", p(&data), "--dims", "3", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), 4);
    assert_eq!(lines.clone().count(), 200);
    assert!(lines.all(|l| l.split(',').count() == 4));

    let o = wfid(&["project", "--data", p(&data), "--dims", "4", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));

    let constant = dir.path().join("constant.csv");
    let mut csv = format!("{}\n", wfid::io::tabular_header());
    for i in 0..6 {
        csv.push_str(&format!("{},-80,-70,-10,5,1\n", i % 2));
    }
    std::fs::write(&constant, csv).unwrap();
    let o = wfid(&["project", "--data", p(&constant), "--dims", "2", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no variance"), "{}", stderr(&o));
}

#[test]
fn importance_ranks_every_attribute() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate_small_nbiot(dir.path());
    let out = dir.path().join("imp.csv");
    let o = wfid(&["importance", "--data", p(&data), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 6);
    let mdi: f64 = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!((mdi - 1.0).abs() < 1e-9);
    let o = wfid(&["importance", "--data", p(&data), "--algorithm", "knn", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
}

#[cfg(unix)]
#[test]
fn serve_health_interrupt_and_port_in_use() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store");
    let mut child = Command::new(env!("CARGO_BIN_EXE_wfid"))
        .args(["serve", "--listen", "127.0.0.1:0", "--store", p(&store), "--threads", "1"])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on ").expect("address line").to_string();

    let rt = tokio::runtime::Runtime::new().unwrap();
    let (health, ingest) = rt.block_on(async {
        let client = reqwest::Client::new();
        let health = client.get(format!("http://{addr}/v1/health")).send().await.unwrap().status();
        let burst = serde_json::json!({
            "source": "t", "kind": "tabular", "timestamp": 1,
            "records": [{ "device_id": 0, "values": [-90.0, -80.0, -10.0, 3.0, 0.5] }]
        });
        let ingest = client.post(format!("http://{addr}/v1/fingerprints")).json(&burst).send().await.unwrap().status();
        (health, ingest)
    });
    assert_eq!(health, 200);
    assert_eq!(ingest, 202);

    // A second instance cannot take the same port.
    let busy = wfid(&["serve", "--listen", &addr, "--store", p(&dir.path().join("other"))]);
    assert_eq!(busy.status.code(), Some(2));

    Command::new("kill").args(["-INT", &child.id().to_string()]).status().unwrap();
    let mut waited = Duration::ZERO;
    let status = loop {
        if let Some(s) = child.try_wait().unwrap() {
            break s;
        }
        assert!(waited < Duration::from_secs(20), "server ignored the interrupt");
        std::thread::sleep(Duration::from_millis(50));
        waited += Duration::from_millis(50);
    };
    assert_eq!(status.code(), Some(0));
    let log = std::fs::read_to_string(store.join("records.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 1);
}

#[test]
fn shipped_scenarios_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            wfid::Scenario::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 4);
    let csi = wfid::Scenario::load(dir.join("csi.toml")).unwrap();
    assert_eq!(csi, wfid::Scenario::Csi(wfid::CsiScenario::default()));
}
