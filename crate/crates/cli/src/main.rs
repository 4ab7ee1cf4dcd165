//! `qbnf` — configuration-driven front end for the normal-form pipeline.
//!
//! Subcommands: `normalize` (symbol → normal form), `spectrum` (normal form
//! → eigenvalue lattice), `associate` (re-derive lattice labels from raw
//! eigenvalues), `recover` (labeled spectra → coefficient report), and
//! `roundtrip` (the whole chain with a pass/fail table).
//!
//! Every command writes a `<out>.manifest.json` with content hashes of its
//! inputs, the effective parameters, and the seed, so identical
//! configurations reproduce byte-identical outputs. `QBNF_THREADS` caps the
//! thread pool used for per-record generation.

mod util;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use qbnf_core::fixtures;
use qbnf_core::recover::{geometric_h_grid, noise_tolerance};
use qbnf_core::spectral::generate_spectrum_auto;
use qbnf_core::{
    associate, birkhoff_normalize, check_diophantine, inject_noise, recover, FrequencyData,
    NormalForm, NormalFormHeader, QuantizationData, Schedule, SpectralDataset, SpectralRecord,
    SpectralWindow, TruncatedSymbol,
};

use util::{read_to_string, write_string, Manifest};

#[derive(Parser)]
#[command(name = "qbnf", version, about = "Quantum Birkhoff normal forms on the torus: forward eigenvalue lattices and inverse coefficient recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a symbol to quantum Birkhoff normal form.
    Normalize(NormalizeArgs),
    /// Generate the eigenvalue lattice of a normal form over an (h, ε) grid.
    Spectrum(SpectrumArgs),
    /// Re-derive lattice labels for raw eigenvalues from real parts.
    Associate(AssociateArgs),
    /// Recover normal-form coefficients from a labeled dataset.
    Recover(RecoverArgs),
    /// Full chain: normalize → spectrum → associate → recover → compare.
    Roundtrip(RoundtripArgs),
}

#[derive(Args)]
struct NormalizeArgs {
    /// Symbol literal (JSON).
    #[arg(long)]
    symbol: PathBuf,
    /// Normalization order N.
    #[arg(long)]
    order: u32,
    /// Output normal-form file.
    #[arg(long)]
    out: PathBuf,
    /// Frequency file {a, c0, n0, radius}; golden-mean defaults when absent.
    #[arg(long)]
    freq: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Normal-form file from `normalize`.
    #[arg(long)]
    nf: PathBuf,
    /// Window file {delta, c, f}.
    #[arg(long)]
    window: PathBuf,
    /// Comma-separated h values, e.g. `1e-2,7e-3,5e-3`.
    #[arg(long, value_delimiter = ',')]
    h_grid: Vec<f64>,
    /// `free` or `fixed:<s>`.
    #[arg(long)]
    eps_schedule: String,
    /// Noise exponent β (omit for a noiseless dataset).
    #[arg(long)]
    beta: Option<f64>,
    /// Noise seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output dataset (JSON lines).
    #[arg(long)]
    out: PathBuf,
    /// Quantization file {k0, s}; trivial when absent.
    #[arg(long)]
    quant: Option<PathBuf>,
    /// Override the lattice search radius (auto-grown otherwise).
    #[arg(long)]
    k_bound: Option<u32>,
    /// Lower admissibility exponent M in ε ∈ [h^M, h^δ].
    #[arg(long, default_value_t = 16.0)]
    m_exp: f64,
    /// Emit each h at a second ε value (ε/2) under the free schedule.
    #[arg(long, default_value_t = true)]
    split_eps: bool,
    /// Also write the eigenvalues as plot-ready CSV (h,eps,re,im).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct AssociateArgs {
    /// Dataset to label (labels, if present, are ignored and re-derived).
    #[arg(long)]
    ds: PathBuf,
    /// Normal-form file whose header provides the frequencies.
    #[arg(long)]
    nf_header: PathBuf,
    /// Output labeled dataset.
    #[arg(long)]
    out: PathBuf,
    /// Runner-up guard as a fraction of the separation floor.
    #[arg(long, default_value_t = 0.5)]
    guard: f64,
    /// Candidate radius override (per-record bound is used otherwise).
    #[arg(long)]
    k_bound: Option<u32>,
    /// Diophantine certification radius for the header frequencies.
    #[arg(long, default_value_t = 64)]
    cert_radius: u32,
    /// Quantization file {k0, s}; trivial when absent.
    #[arg(long)]
    quant: Option<PathBuf>,
}

#[derive(Args)]
struct RecoverArgs {
    /// Labeled dataset.
    #[arg(long)]
    ds: PathBuf,
    /// Normal form holding the known ε-independent terms.
    #[arg(long)]
    seed_nf: PathBuf,
    /// `free` or `fixed:<s>`.
    #[arg(long)]
    schedule: String,
    /// Window exponent δ.
    #[arg(long)]
    delta: f64,
    /// Noise floor exponent β (omit when noiseless).
    #[arg(long)]
    beta: Option<f64>,
    /// Output report.
    #[arg(long)]
    out: PathBuf,
    /// Largest grading to recover.
    #[arg(long, default_value_t = 6)]
    max_grading: u32,
    /// Quantization file {k0, s}; trivial when absent.
    #[arg(long)]
    quant: Option<PathBuf>,
}

#[derive(Args)]
struct RoundtripArgs {
    /// Symbol literal (JSON).
    #[arg(long)]
    symbol: PathBuf,
    /// Normalization order.
    #[arg(long, default_value_t = 6)]
    order: u32,
    /// `free` or `fixed:<s>`.
    #[arg(long)]
    schedule: String,
    /// Window exponent δ.
    #[arg(long, default_value_t = 0.2)]
    delta: f64,
    /// Window constant C.
    #[arg(long, default_value_t = 4.0)]
    window_c: f64,
    /// Comma-separated h grid; geometric 0.02..0.004 × 8 when absent.
    #[arg(long, value_delimiter = ',')]
    h_grid: Option<Vec<f64>>,
    /// Noise exponent β (omit for noiseless).
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Frequency file; golden-mean defaults when absent.
    #[arg(long)]
    freq: Option<PathBuf>,
    /// Optional report output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct FreqFile {
    a: [f64; 2],
    c0: f64,
    n0: f64,
    radius: u32,
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("QBNF_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            let (payload, code) = match err.downcast_ref::<util::FileError>() {
                Some(fe) => (
                    json!({"error": fe.source.to_string(), "path": fe.path.display().to_string()}),
                    ExitCode::from(2),
                ),
                None => (json!({ "error": format!("{err:#}") }), ExitCode::from(1)),
            };
            eprintln!("{payload}");
            code
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Normalize(args) => cmd_normalize(args).map(|_| ExitCode::SUCCESS),
        Command::Spectrum(args) => cmd_spectrum(args).map(|_| ExitCode::SUCCESS),
        Command::Associate(args) => cmd_associate(args).map(|_| ExitCode::SUCCESS),
        Command::Recover(args) => cmd_recover(args).map(|_| ExitCode::SUCCESS),
        Command::Roundtrip(args) => cmd_roundtrip(args),
    }
}

fn load_freq(path: Option<&Path>, manifest: &mut Manifest) -> Result<FrequencyData> {
    match path {
        Some(p) => {
            let text = read_to_string(p)?;
            manifest.record_input(p, &text);
            let file: FreqFile =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            Ok(check_diophantine(file.a, file.c0, file.n0, file.radius)?)
        }
        None => Ok(fixtures::golden_frequency(64)),
    }
}

fn load_quant(path: Option<&Path>, manifest: &mut Manifest) -> Result<QuantizationData> {
    match path {
        Some(p) => {
            let text = read_to_string(p)?;
            manifest.record_input(p, &text);
            Ok(serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", p.display()))?)
        }
        None => Ok(QuantizationData::trivial()),
    }
}

fn parse_schedule(text: &str, delta: f64) -> Result<Schedule> {
    if text == "free" {
        return Ok(Schedule::free(delta));
    }
    if let Some(s) = text.strip_prefix("fixed:") {
        let s: f64 = s.parse().context("parsing fixed schedule exponent")?;
        return Ok(Schedule::fixed(s));
    }
    bail!("schedule must be `free` or `fixed:<s>`, got `{text}`");
}

fn cmd_normalize(args: NormalizeArgs) -> Result<()> {
    let mut manifest = Manifest::new(
        "normalize",
        json!({"order": args.order, "out": args.out.display().to_string()}),
        None,
    );
    let text = read_to_string(&args.symbol)?;
    manifest.record_input(&args.symbol, &text);
    let symbol = TruncatedSymbol::from_json(&text)?;
    let freq = load_freq(args.freq.as_deref(), &mut manifest)?;
    let result = birkhoff_normalize(&symbol, &freq, args.order)?;
    let out = result.normal_form.to_json(&NormalFormHeader::from(&freq));
    write_string(&args.out, &out)?;
    manifest.write_next_to(&args.out)?;
    eprintln!(
        "normalized to order {}: {} coefficient polynomials, residual terms {}",
        args.order,
        result.normal_form.len(),
        result.residual.len()
    );
    Ok(())
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<()> {
    if args.h_grid.is_empty() {
        bail!("--h-grid needs at least one value");
    }
    let schedule = parse_schedule(&args.eps_schedule, window_delta_peek(&args.window)?)?;
    let mut manifest = Manifest::new(
        "spectrum",
        json!({
            "h_grid": args.h_grid,
            "eps_schedule": args.eps_schedule,
            "beta": args.beta,
            "k_bound": args.k_bound,
            "m_exp": args.m_exp,
            "split_eps": args.split_eps,
            "out": args.out.display().to_string(),
        }),
        Some(args.seed),
    );
    let nf_text = read_to_string(&args.nf)?;
    manifest.record_input(&args.nf, &nf_text);
    let (nf, header) = NormalForm::from_json(&nf_text)?;
    let win_text = read_to_string(&args.window)?;
    manifest.record_input(&args.window, &win_text);
    let win: SpectralWindow = serde_json::from_str(&win_text)
        .with_context(|| format!("parsing {}", args.window.display()))?;
    let quant = load_quant(args.quant.as_deref(), &mut manifest)?;

    let mut tasks: Vec<(f64, f64)> = Vec::new();
    for &h in &args.h_grid {
        let eps = schedule.eps_for(h);
        tasks.push((h, eps));
        if args.split_eps && schedule.is_free() {
            tasks.push((h, eps / 2.0));
        }
    }
    let records: Result<Vec<SpectralRecord>> = tasks
        .par_iter()
        .map(|&(h, eps)| match args.k_bound {
            Some(bound) => Ok(qbnf_core::generate_spectrum(
                &nf, &quant, &win, h, eps, bound, args.m_exp,
            )?),
            None => Ok(generate_spectrum_auto(
                &nf, header.a, &quant, &win, h, eps, args.m_exp,
            )?),
        })
        .collect();
    let mut ds = SpectralDataset { records: records? };
    if let Some(beta) = args.beta {
        ds = inject_noise(&ds, beta, args.seed);
    }
    write_string(&args.out, &ds.to_jsonl())?;
    manifest.write_next_to(&args.out)?;
    if let Some(csv_path) = &args.csv {
        let mut csv = String::from("h,eps,re,im\n");
        for record in &ds.records {
            for z in &record.eigenvalues {
                csv.push_str(&format!("{},{},{},{}\n", record.h, record.eps, z.re, z.im));
            }
        }
        write_string(csv_path, &csv)?;
    }
    let total: usize = ds.records.iter().map(|r| r.eigenvalues.len()).sum();
    eprintln!("{} records, {} eigenvalues", ds.records.len(), total);
    Ok(())
}

/// The schedule parser needs δ before the window file is formally loaded.
fn window_delta_peek(path: &Path) -> Result<f64> {
    let text = read_to_string(path)?;
    let win: SpectralWindow =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(win.delta)
}

#[derive(Serialize)]
struct RecordStats {
    h: f64,
    eps: f64,
    total: usize,
    matched: usize,
    unmatched: usize,
    collisions: usize,
    match_rate: f64,
}

fn cmd_associate(args: AssociateArgs) -> Result<()> {
    let mut manifest = Manifest::new(
        "associate",
        json!({
            "guard": args.guard,
            "k_bound": args.k_bound,
            "cert_radius": args.cert_radius,
            "out": args.out.display().to_string(),
        }),
        None,
    );
    let ds_text = read_to_string(&args.ds)?;
    manifest.record_input(&args.ds, &ds_text);
    let ds = SpectralDataset::from_jsonl(&ds_text)?;
    let nf_text = read_to_string(&args.nf_header)?;
    manifest.record_input(&args.nf_header, &nf_text);
    let (_, header) = NormalForm::from_json(&nf_text)?;
    let freq = check_diophantine(header.a, header.c0, header.n0, args.cert_radius)?;
    let quant = load_quant(args.quant.as_deref(), &mut manifest)?;

    let mut labeled = Vec::with_capacity(ds.records.len());
    let mut stats = Vec::with_capacity(ds.records.len());
    for record in &ds.records {
        let bound = args
            .k_bound
            .or(record.k_bound)
            .ok_or_else(|| anyhow!("record at h = {} carries no k_bound; pass --k-bound", record.h))?;
        let outcome = associate(
            &record.eigenvalues,
            &freq,
            &quant,
            record.h,
            args.guard,
            bound,
        );
        let mut eigenvalues = Vec::new();
        let mut labels = Vec::new();
        for (z, label) in record.eigenvalues.iter().zip(&outcome.labels) {
            if let Some(k) = label {
                eigenvalues.push(*z);
                labels.push(*k);
            }
        }
        stats.push(RecordStats {
            h: record.h,
            eps: record.eps,
            total: record.eigenvalues.len(),
            matched: outcome.matched,
            unmatched: outcome.unmatched,
            collisions: outcome.collisions,
            match_rate: outcome.match_rate(),
        });
        labeled.push(SpectralRecord {
            h: record.h,
            eps: record.eps,
            beta: record.beta,
            eigenvalues,
            labels: Some(labels),
            k_bound: Some(bound),
        });
    }
    let labeled = SpectralDataset { records: labeled };
    write_string(&args.out, &labeled.to_jsonl())?;
    manifest.write_next_to(&args.out)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({ "records": stats }))?
    );
    Ok(())
}

fn cmd_recover(args: RecoverArgs) -> Result<()> {
    let schedule = parse_schedule(&args.schedule, args.delta)?;
    let mut manifest = Manifest::new(
        "recover",
        json!({
            "schedule": args.schedule,
            "delta": args.delta,
            "beta": args.beta,
            "max_grading": args.max_grading,
            "out": args.out.display().to_string(),
        }),
        None,
    );
    let ds_text = read_to_string(&args.ds)?;
    manifest.record_input(&args.ds, &ds_text);
    let ds = SpectralDataset::from_jsonl(&ds_text)?;
    let nf_text = read_to_string(&args.seed_nf)?;
    manifest.record_input(&args.seed_nf, &nf_text);
    let (seed_nf, _) = NormalForm::from_json(&nf_text)?;
    let quant = load_quant(args.quant.as_deref(), &mut manifest)?;
    let report = recover(
        &ds,
        &seed_nf.seed_only(),
        &schedule,
        args.delta,
        args.beta,
        args.max_grading,
        &quant,
    )?;
    write_string(&args.out, &report.to_json())?;
    manifest.write_next_to(&args.out)?;
    eprintln!(
        "recovered {} classes, {} indices below floor",
        report.classes.iter().filter(|c| c.coeffs.is_some()).count(),
        report.excluded.len()
    );
    Ok(())
}

fn cmd_roundtrip(args: RoundtripArgs) -> Result<ExitCode> {
    let schedule = parse_schedule(&args.schedule, args.delta)?;
    let mut manifest = Manifest::new(
        "roundtrip",
        json!({
            "order": args.order,
            "schedule": args.schedule,
            "delta": args.delta,
            "window_c": args.window_c,
            "beta": args.beta,
        }),
        Some(args.seed),
    );
    let text = read_to_string(&args.symbol)?;
    manifest.record_input(&args.symbol, &text);
    let symbol = TruncatedSymbol::from_json(&text)?;
    let freq = load_freq(args.freq.as_deref(), &mut manifest)?;
    let quant = QuantizationData::trivial();

    let result = birkhoff_normalize(&symbol, &freq, args.order)?;
    let nf = result.normal_form;
    let win = SpectralWindow::new(args.delta, args.window_c, nf.window_center());
    let hs = args
        .h_grid
        .clone()
        .unwrap_or_else(|| geometric_h_grid(0.02, 0.004, 8));

    // Forward generation, one or two ε per h.
    let mut tasks: Vec<(f64, f64)> = Vec::new();
    for &h in &hs {
        let eps = schedule.eps_for(h);
        tasks.push((h, eps));
        if schedule.is_free() {
            tasks.push((h, eps / 2.0));
        }
    }
    let generated: Result<Vec<SpectralRecord>> = tasks
        .par_iter()
        .map(|&(h, eps)| {
            Ok(generate_spectrum_auto(
                &nf,
                freq.a(),
                &quant,
                &win,
                h,
                eps,
                16.0,
            )?)
        })
        .collect();
    let mut ds = SpectralDataset {
        records: generated?,
    };
    if let Some(beta) = args.beta {
        ds = inject_noise(&ds, beta, args.seed);
    }

    // Strip, associate, relabel; count the label agreement on the way.
    let mut rows = Vec::new();
    let mut all_pass = true;
    let mut labeled = Vec::new();
    let mut total_points = 0usize;
    let mut total_matched = 0usize;
    let mut mislabels = 0usize;
    for record in &ds.records {
        let truth = record.labels.clone().expect("generator labels");
        let outcome = associate(
            &record.eigenvalues,
            &freq,
            &quant,
            record.h,
            0.5,
            record.k_bound.expect("generator bound"),
        );
        total_points += truth.len();
        total_matched += outcome.matched;
        let mut eigenvalues = Vec::new();
        let mut labels = Vec::new();
        for ((z, label), want) in record
            .eigenvalues
            .iter()
            .zip(&outcome.labels)
            .zip(&truth)
        {
            if let Some(k) = label {
                if k != want {
                    mislabels += 1;
                }
                eigenvalues.push(*z);
                labels.push(*k);
            }
        }
        labeled.push(SpectralRecord {
            h: record.h,
            eps: record.eps,
            beta: record.beta,
            eigenvalues,
            labels: Some(labels),
            k_bound: record.k_bound,
        });
    }
    let match_rate = total_matched as f64 / total_points.max(1) as f64;
    let assoc_ok = mislabels == 0 && (args.beta.is_some() || total_matched == total_points);
    all_pass &= assoc_ok;
    rows.push((
        "association".to_string(),
        format!("match rate {:.4}, {} mislabels", match_rate, mislabels),
        assoc_ok,
    ));

    let report = recover(
        &SpectralDataset { records: labeled },
        &nf.seed_only(),
        &schedule,
        args.delta,
        args.beta,
        args.order,
        &quant,
    )?;

    let h_min = hs.iter().copied().fold(f64::INFINITY, f64::min);
    for rc in &report.classes {
        let want = nf.class_sum(&rc.class.members);
        let name = format!("class {:?}", rc.class.members);
        match &rc.coeffs {
            None => {
                rows.push((name, "below noise floor".to_string(), true));
            }
            Some(got) => {
                let err = got.max_diff(&want);
                let (tol, shown) = match args.beta {
                    // Fixture-calibrated conditioning factor, matching the
                    // acceptance suite.
                    Some(beta) => {
                        let t = 15.0 * noise_tolerance(h_min, beta, rc.class.rate);
                        (t * want.max_coeff().max(1e-9), t)
                    }
                    None => (1e-6 * want.max_coeff().max(1.0), 1e-6),
                };
                let ok = err <= tol;
                all_pass &= ok;
                rows.push((name, format!("err {err:.3e} tol {shown:.3e}"), ok));
            }
        }
    }

    println!("{:<34} {:<36} result", "check", "detail");
    println!("{}", "-".repeat(80));
    for (name, detail, ok) in &rows {
        println!(
            "{:<34} {:<36} {}",
            name,
            detail,
            if *ok { "PASS" } else { "FAIL" }
        );
    }
    println!("{}", "-".repeat(80));
    println!("overall: {}", if all_pass { "PASS" } else { "FAIL" });

    if let Some(out) = &args.out {
        write_string(out, &report.to_json())?;
        manifest.write_next_to(out)?;
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
