//! End-to-end tests running the `qbnf` binary: the staged pipeline, the
//! chained roundtrip, determinism of outputs, and the error contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qbnf_core::fixtures::{roundtrip_symbol, standard_window};
use qbnf_core::{birkhoff_normalize, NormalForm};

fn qbnf() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qbnf"))
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("spawn qbnf")
}

fn assert_success(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

struct Workspace {
    #[allow(dead_code)]
    dir: tempfile::TempDir,
    root: PathBuf,
}

impl Workspace {
    fn new() -> Self {
        let dir = tempfile::tempdir().expect("tempdir");
        let root = dir.path().to_path_buf();
        Workspace { dir, root }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Write the shared fixture inputs: symbol and window files.
    fn write_fixtures(&self) -> (PathBuf, PathBuf) {
        let symbol = roundtrip_symbol();
        let symbol_path = self.path("symbol.json");
        std::fs::write(&symbol_path, symbol.to_json()).unwrap();

        let freq = qbnf_core::fixtures::golden_frequency(12);
        let nf = birkhoff_normalize(&symbol, &freq, 6).unwrap().normal_form;
        let win = standard_window(&nf);
        let window_path = self.path("window.json");
        std::fs::write(&window_path, serde_json::to_string_pretty(&win).unwrap()).unwrap();
        (symbol_path, window_path)
    }
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn staged_pipeline_matches_itself() {
    let ws = Workspace::new();
    let (symbol, window) = ws.write_fixtures();
    let nf_path = ws.path("nf.json");
    let ds_path = ws.path("ds.jsonl");
    let labeled_path = ws.path("labeled.jsonl");
    let report_path = ws.path("report.json");

    let out = run(qbnf()
        .arg("normalize")
        .arg("--symbol")
        .arg(&symbol)
        .arg("--order")
        .arg("6")
        .arg("--out")
        .arg(&nf_path));
    assert_success(&out, "normalize");
    assert!(nf_path.exists());
    assert!(ws.path("nf.json.manifest.json").exists());

    let out = run(qbnf()
        .arg("spectrum")
        .arg("--nf")
        .arg(&nf_path)
        .arg("--window")
        .arg(&window)
        .arg("--h-grid")
        .arg("1e-2,7e-3,5e-3")
        .arg("--eps-schedule")
        .arg("free")
        .arg("--seed")
        .arg("7")
        .arg("--out")
        .arg(&ds_path));
    assert_success(&out, "spectrum");

    // Strip the labels to make association do real work.
    let ds = qbnf_core::SpectralDataset::from_jsonl(&read(&ds_path)).unwrap();
    let stripped = ds.strip_labels();
    std::fs::write(&ds_path, stripped.to_jsonl()).unwrap();

    let out = run(qbnf()
        .arg("associate")
        .arg("--ds")
        .arg(&ds_path)
        .arg("--nf-header")
        .arg(&nf_path)
        .arg("--out")
        .arg(&labeled_path));
    assert_success(&out, "associate");
    let stats: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for record in stats["records"].as_array().unwrap() {
        assert_eq!(
            record["match_rate"].as_f64().unwrap(),
            1.0,
            "pipeline fixture must associate fully: {record}"
        );
    }

    // Labels must agree with what the generator emitted.
    let labeled = qbnf_core::SpectralDataset::from_jsonl(&read(&labeled_path)).unwrap();
    for (orig, lab) in ds.records.iter().zip(&labeled.records) {
        assert_eq!(orig.labels.as_ref(), lab.labels.as_ref());
    }

    let out = run(qbnf()
        .arg("recover")
        .arg("--ds")
        .arg(&labeled_path)
        .arg("--seed-nf")
        .arg(&nf_path)
        .arg("--schedule")
        .arg("free")
        .arg("--delta")
        .arg("0.2")
        .arg("--out")
        .arg(&report_path));
    assert_success(&out, "recover");

    let report = qbnf_core::RecoveryReport::from_json(&read(&report_path)).unwrap();
    let (nf, _) = NormalForm::from_json(&read(&nf_path)).unwrap();
    let rc = report.find_class((0, 1, 0)).unwrap();
    let got = rc.coeffs.as_ref().unwrap();
    let want = nf.class_sum(&rc.class.members);
    assert!(got.max_diff(&want) / want.max_coeff() < 1e-6);
}

#[test]
fn spectrum_outputs_are_byte_identical() {
    let ws = Workspace::new();
    let (symbol, window) = ws.write_fixtures();
    let nf_path = ws.path("nf.json");
    assert_success(
        &run(qbnf()
            .arg("normalize")
            .arg("--symbol")
            .arg(&symbol)
            .arg("--order")
            .arg("6")
            .arg("--out")
            .arg(&nf_path)),
        "normalize",
    );
    let mut outputs = Vec::new();
    // Different thread caps must not change the bytes.
    for (name, threads) in [("a.jsonl", "1"), ("b.jsonl", "4")] {
        let ds_path = ws.path(name);
        assert_success(
            &run(qbnf()
                .env("QBNF_THREADS", threads)
                .arg("spectrum")
                .arg("--nf")
                .arg(&nf_path)
                .arg("--window")
                .arg(&window)
                .arg("--h-grid")
                .arg("1e-2,5e-3")
                .arg("--eps-schedule")
                .arg("free")
                .arg("--beta")
                .arg("2.4")
                .arg("--seed")
                .arg("42")
                .arg("--out")
                .arg(&ds_path)
                .arg("--csv")
                .arg(ws.path("points.csv"))),
            "spectrum",
        );
        outputs.push(std::fs::read(&ds_path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let csv = read(&ws.path("points.csv"));
    assert!(csv.starts_with("h,eps,re,im\n"));
    assert!(csv.lines().count() > 100);
    // Manifests are likewise identical apart from the output name.
    let m1 = read(&ws.path("a.jsonl.manifest.json")).replace("a.jsonl", "OUT");
    let m2 = read(&ws.path("b.jsonl.manifest.json")).replace("b.jsonl", "OUT");
    assert_eq!(m1, m2);
}

#[test]
fn missing_file_exits_2_with_path_in_error() {
    let ws = Workspace::new();
    let out = run(qbnf()
        .arg("normalize")
        .arg("--symbol")
        .arg(ws.path("nope.json"))
        .arg("--order")
        .arg("4")
        .arg("--out")
        .arg(ws.path("out.json")));
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).expect("error JSON");
    assert!(err["path"].as_str().unwrap().contains("nope.json"));
    assert!(err["error"].is_string());
}

#[test]
fn domain_error_exits_1() {
    let ws = Workspace::new();
    // Rationally dependent frequencies cannot certify.
    let freq_path = ws.path("freq.json");
    std::fs::write(
        &freq_path,
        r#"{"a":[1.0,2.0],"c0":3.0,"n0":2.0,"radius":8}"#,
    )
    .unwrap();
    let (symbol, _) = ws.write_fixtures();
    let out = run(qbnf()
        .arg("normalize")
        .arg("--symbol")
        .arg(&symbol)
        .arg("--order")
        .arg("4")
        .arg("--freq")
        .arg(&freq_path)
        .arg("--out")
        .arg(ws.path("nf.json")));
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).expect("error JSON");
    assert!(err["error"].as_str().unwrap().contains("Diophantine"));
}

#[test]
fn roundtrip_fixed_unit_schedule_passes() {
    let ws = Workspace::new();
    let (symbol, _) = ws.write_fixtures();
    let out = run(qbnf()
        .arg("roundtrip")
        .arg("--symbol")
        .arg(&symbol)
        .arg("--order")
        .arg("6")
        .arg("--schedule")
        .arg("fixed:1"));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(
        out.status.success(),
        "fixed-schedule roundtrip failed:\n{table}"
    );
    assert!(table.contains("overall: PASS"));
}

#[test]
fn roundtrip_emits_pass_table() {
    let ws = Workspace::new();
    let (symbol, _) = ws.write_fixtures();
    let out = run(qbnf()
        .arg("roundtrip")
        .arg("--symbol")
        .arg(&symbol)
        .arg("--order")
        .arg("6")
        .arg("--schedule")
        .arg("free")
        .arg("--h-grid")
        .arg("2e-2,1.2e-2,8e-3,5.5e-3,4e-3"));
    assert_success(&out, "roundtrip");
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("association"));
    assert!(table.contains("overall: PASS"));
    assert!(!table.contains("FAIL"));
}
