use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};

use nyts_core::answers::answers_from_features;
use nyts_core::metrics::read_comparison_csv;
use nyts_core::persistence::load_from_path;
use nyts_core::{Dataset, QuestionCatalog};

fn nyts(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nyts"))
        .args(args)
        .current_dir(dir)
        .env_remove("SOURCE_DATE_EPOCH")
        .env_remove("NYTS_CATALOG")
        .env_remove("NYTS_SEED")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = nyts(dir, args);
    assert!(
        out.status.success(),
        "nyts {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Generated raw survey plus its prepared cohort.
fn pipeline(dir: &Path, rows: usize) -> (PathBuf, PathBuf) {
    let rows = rows.to_string();
    ok(
        dir,
        &[
            "synth",
            "--rows",
            &rows,
            "--seed",
            "3",
            "--signal",
            "Q6=1.5,Q27=-1,Q61=0.8,noise=0.3",
            "--out",
            "raw.csv",
        ],
    );
    ok(
        dir,
        &["prepare", "--input", "raw.csv", "--out", "prepared.csv"],
    );
    (dir.join("raw.csv"), dir.join("prepared.csv"))
}

#[test]
fn prepared_rows_match_an_independent_recount() {
    let dir = tempfile::tempdir().unwrap();
    let (raw, prepared) = pipeline(dir.path(), 1000);
    let catalog = QuestionCatalog::nyts2018();

    let text = std::fs::read_to_string(raw).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |id: &str| header.iter().position(|h| *h == id).unwrap();
    let cohort: Vec<(usize, Vec<u32>)> = ["Q7", "Q19", "Q24", "Q39"]
        .iter()
        .map(|id| (col(id), catalog.question(id).unwrap().pass_codes.clone()))
        .collect();
    let q16 = catalog.question("Q16").unwrap();
    let labelled: Vec<u32> = q16.yes_codes.iter().chain(&q16.no_codes).copied().collect();
    let q16_at = col("Q16");

    let mut expected = 0;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let code = |i: usize| cells[i].parse::<u32>().ok();
        let never = cohort
            .iter()
            .all(|(i, pass)| code(*i).is_some_and(|c| pass.contains(&c)));
        if never && code(q16_at).is_some_and(|c| labelled.contains(&c)) {
            expected += 1;
        }
    }
    let ds = Dataset::read_csv(std::fs::File::open(&prepared).unwrap()).unwrap();
    assert_eq!(ds.n_rows(), expected);
    assert!(expected > 0);

    let report: serde_json::Value = serde_json::from_slice(
        &std::fs::read(dir.path().join("prepared.csv.report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["input_rows"], 1000);
    assert_eq!(report["output_rows"], expected);
}

#[test]
fn preparing_a_prepared_file_changes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let (_, prepared) = pipeline(dir.path(), 400);
    ok(
        dir.path(),
        &["prepare", "--input", "prepared.csv", "--out", "again.csv"],
    );
    assert_eq!(
        std::fs::read(prepared).unwrap(),
        std::fs::read(dir.path().join("again.csv")).unwrap()
    );
}

#[test]
fn synth_is_reproducible_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["synth", "--rows", "200", "--seed", "9", "--out", "a.csv"],
    );
    ok(
        dir.path(),
        &["synth", "--rows", "200", "--seed", "9", "--out", "b.csv"],
    );
    ok(
        dir.path(),
        &["synth", "--rows", "200", "--seed", "10", "--out", "c.csv"],
    );
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_ne!(read("a.csv"), read("c.csv"));
}

#[test]
fn memorising_tree_scores_one_on_its_training_data() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("a,b,__label__\n");
    for _ in 0..10 {
        for (a, b, y) in [
            (1, 1, 0),
            (1, 2, 1),
            (2, 1, 1),
            (2, 2, 0),
            (3, 1, 0),
            (3, 2, 1),
        ] {
            csv.push_str(&format!("{a},{b},{y}\n"));
        }
    }
    std::fs::write(dir.path().join("xor.csv"), csv).unwrap();
    ok(
        dir.path(),
        &[
            "train",
            "--model",
            "tree",
            "--data",
            "xor.csv",
            "--out",
            "tree.imodel",
        ],
    );
    let out = ok(
        dir.path(),
        &["evaluate", "--model", "tree.imodel", "--data", "xor.csv"],
    );
    let accuracy = out.lines().find(|l| l.starts_with("Accuracy")).unwrap();
    assert_eq!(
        accuracy.split_whitespace().collect::<Vec<_>>(),
        ["Accuracy", "1.00", "60"]
    );
}

#[test]
fn comparison_file_reproduces_the_printed_table() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path(), 700);
    let out = ok(
        dir.path(),
        &[
            "compare",
            "--data",
            "prepared.csv",
            "--folds",
            "3",
            "--out",
            "cmp.csv",
            "--plot",
            "plot.svg",
        ],
    );
    let records =
        read_comparison_csv(std::fs::File::open(dir.path().join("cmp.csv")).unwrap()).unwrap();
    let names: Vec<&str> = records.iter().map(|r| r.model.as_str()).collect();
    assert_eq!(names, ["tree", "nb", "logistic", "forest", "gb"]);

    let row = |label: &str| -> Vec<String> {
        let line = out.lines().find(|l| l.starts_with(label)).unwrap();
        line[label.len()..]
            .split_whitespace()
            .map(str::to_owned)
            .collect()
    };
    let train: Vec<String> = records
        .iter()
        .map(|r| format!("{:.4}", r.train_score))
        .collect();
    let test: Vec<String> = records
        .iter()
        .map(|r| format!("{:.4}", r.test_score))
        .collect();
    assert_eq!(row("Training Score"), train);
    assert_eq!(row("Test Score"), test);

    let svg = std::fs::read_to_string(dir.path().join("plot.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}

#[test]
fn exit_codes_separate_input_and_internal_errors() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| nyts(dir.path(), args).status.code();

    assert_eq!(
        code(&[
            "train",
            "--model",
            "nb",
            "--data",
            "missing.csv",
            "--out",
            "m.imodel"
        ]),
        Some(2)
    );
    assert_eq!(
        code(&["synth", "--rows", "10", "--signal", "Q999=1", "--out", "x.csv"]),
        Some(2)
    );
    assert_eq!(
        code(&["train", "--model", "bogus", "--data", "x", "--out", "y"]),
        Some(2)
    );

    std::fs::write(dir.path().join("blocker"), "a file, not a directory").unwrap();
    assert_eq!(
        code(&["synth", "--rows", "10", "--out", "blocker/raw.csv"]),
        Some(3)
    );

    pipeline(dir.path(), 300);
    assert_eq!(
        code(&[
            "train",
            "--model",
            "nb",
            "--trees",
            "5",
            "--data",
            "prepared.csv",
            "--out",
            "m.imodel"
        ]),
        Some(2)
    );
    std::fs::write(dir.path().join("broken.imodel"), "IMODEL 1\n").unwrap();
    assert_eq!(
        code(&[
            "evaluate",
            "--model",
            "broken.imodel",
            "--data",
            "prepared.csv"
        ]),
        Some(2)
    );
}

#[test]
fn train_honours_source_date_epoch() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path(), 300);
    let out = Command::new(env!("CARGO_BIN_EXE_nyts"))
        .args([
            "train",
            "--model",
            "nb",
            "--data",
            "prepared.csv",
            "--out",
            "m.imodel",
        ])
        .current_dir(dir.path())
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .unwrap();
    assert!(out.status.success());
    let (model, _) = load_from_path(&dir.path().join("m.imodel")).unwrap();
    assert_eq!(model.meta.created, 1_700_000_000);
    assert_eq!(
        model.meta.catalog_version,
        QuestionCatalog::nyts2018().version
    );
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn start_server(dir: &Path, args: &[&str]) -> (Server, SocketAddr) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_nyts"))
        .arg("serve")
        .args(args)
        .args(["--port", "0"])
        .current_dir(dir)
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(child.stdout.take().unwrap()).lines();
    let addr = loop {
        let line = lines
            .next()
            .expect("server exited before listening")
            .unwrap();
        if let Some(addr) = line.strip_prefix("listening on http://") {
            break addr.parse().unwrap();
        }
    };
    (Server(child), addr)
}

fn http(addr: SocketAddr, method: &str, path: &str, body: &str) -> (u16, serde_json::Value) {
    let mut stream = TcpStream::connect(addr).unwrap();
    write!(
        stream,
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    let (head, payload) = response.split_once("\r\n\r\n").unwrap();
    let status = head.split_whitespace().nth(1).unwrap().parse().unwrap();
    (status, serde_json::from_str(payload).unwrap())
}

#[test]
fn served_predictions_match_the_model_file() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path(), 800);
    ok(
        dir.path(),
        &[
            "train",
            "--model",
            "gb",
            "--stages",
            "25",
            "--data",
            "prepared.csv",
            "--out",
            "gb.imodel",
        ],
    );
    let (model, id) = load_from_path(&dir.path().join("gb.imodel")).unwrap();
    let (_server, addr) = start_server(dir.path(), &["--model", "gb.imodel"]);

    let (status, health) = http(addr, "GET", "/api/health", "");
    assert_eq!(status, 200);
    assert_eq!(health["status"], "ok");
    assert_eq!(health["model_id"], id.as_str());

    let catalog = QuestionCatalog::nyts2018();
    let ds =
        Dataset::read_csv(std::fs::File::open(dir.path().join("prepared.csv")).unwrap()).unwrap();
    for row in ds.x.rows().into_iter().take(5) {
        let row = row.to_vec();
        let body = serde_json::json!({ "answers": answers_from_features(&catalog, &row).unwrap() })
            .to_string();
        let (status, resp) = http(addr, "POST", "/api/predict", &body);
        assert_eq!(status, 200, "{resp}");
        let expected = model.predict(&row).unwrap();
        assert_eq!(
            resp["probability_yes"].as_f64().unwrap().to_bits(),
            expected.probability_yes.to_bits()
        );
        assert_eq!(resp["model_id"], id.as_str());
    }
}

#[test]
fn serve_without_model_is_degraded() {
    let dir = tempfile::tempdir().unwrap();
    let (_server, addr) = start_server(dir.path(), &["--no-model"]);
    let (status, health) = http(addr, "GET", "/api/health", "");
    assert_eq!(status, 200);
    assert_eq!(health["status"], "degraded");
    let (status, _) = http(addr, "POST", "/api/predict", r#"{"answers": {}}"#);
    assert_eq!(status, 503);
    let (status, questions) = http(addr, "GET", "/api/questions", "");
    assert_eq!(status, 200);
    assert_eq!(questions["questions"].as_array().unwrap().len(), 47);
}

#[test]
fn one_hot_preparation_trains() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["synth", "--rows", "500", "--seed", "2", "--out", "raw.csv"],
    );
    ok(
        dir.path(),
        &["prepare", "--input", "raw.csv", "--out", "plain.csv"],
    );
    ok(
        dir.path(),
        &[
            "prepare",
            "--input",
            "raw.csv",
            "--one-hot",
            "--out",
            "hot.csv",
        ],
    );
    let plain =
        Dataset::read_csv(std::fs::File::open(dir.path().join("plain.csv")).unwrap()).unwrap();
    let hot = Dataset::read_csv(std::fs::File::open(dir.path().join("hot.csv")).unwrap()).unwrap();
    assert_eq!(hot.y, plain.y);
    assert!(hot.feature_names.contains(&"Q1=5".to_string()));
    assert!(hot.feature_names.contains(&"Q4A".to_string()));
    assert!(hot.x.iter().all(|&v| v <= 1));
    ok(
        dir.path(),
        &[
            "train",
            "--model",
            "logistic",
            "--max-iters",
            "200",
            "--data",
            "hot.csv",
            "--out",
            "m.imodel",
        ],
    );
}
