use clap::{Parser, Subcommand};
use ddf_core::harness::{
    default_grid, line_chart, parse_grid, prepare, preprocess, run_experiment, sweep_threshold, synth_dataset,
    write_atomic, write_run, Corpus, EvalSplit, ExperimentConfig, HarnessError, PreprocessSpec, ResultsTable,
    SynthSpec,
};
use ddf_core::signal::io::read_recording;
use ddf_core::ssl::Method;
use ddf_core::tfr::{compute_ckd_tfr, CkdParams, TfrConfig};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Dual-domain fusion semi-supervised experiments.
#[derive(Debug, Parser)]
#[command(name = "ddf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic multi-class corpus.
    Synth {
        /// Synthetic spec (JSON); defaults apply when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decimate and/or corrupt every segment of a corpus with white noise.
    Preprocess {
        #[arg(long = "in")]
        input: PathBuf,
        /// Target per-segment SNR in dB.
        #[arg(long, allow_hyphen_values = true)]
        snr: Option<f64>,
        /// Target sample rate in Hz.
        #[arg(long)]
        rate: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compact kernel distribution of one raw segment.
    Tfr {
        /// Raw little-endian f32 segment with a JSON sidecar, or CSV.
        #[arg(long = "in")]
        input: PathBuf,
        /// TFR config or bare kernel parameters (JSON).
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run all repetitions of one method.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "ddf")]
        method: Method,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep the confidence threshold and report validation accuracy.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// `start:end:step`
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Merge result tables in a directory and optionally plot them.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        plots: bool,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

fn synth(spec: Option<&Path>, out: &Path) -> Result<(), HarnessError> {
    let spec: SynthSpec = spec.map(read_json).transpose()?.unwrap_or_default();
    let corpus = synth_dataset(&spec)?;
    corpus.write_dir(out)?;
    println!("wrote {} classes × {} segments to {}", corpus.class_count(), spec.segments_per_class, out.display());
    Ok(())
}

fn preprocess_cmd(input: &Path, spec: PreprocessSpec, out: &Path) -> Result<(), HarnessError> {
    let corpus = Corpus::read_dir(input)?;
    preprocess(&corpus, &spec)?.write_dir(out)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn tfr_params(path: Option<&Path>) -> Result<TfrConfig, HarnessError> {
    let Some(path) = path else {
        return Ok(TfrConfig::default());
    };
    let value: serde_json::Value = read_json(path)?;
    let bad = |e: serde_json::Error| HarnessError::Config(format!("{}: {e}", path.display()));
    let cfg = if value.get("ckd").is_some() {
        serde_json::from_value(value).map_err(bad)?
    } else {
        TfrConfig { ckd: serde_json::from_value::<CkdParams>(value).map_err(bad)?, ..Default::default() }
    };
    cfg.ckd.validate()?;
    Ok(cfg)
}

/// Writes every channel's matrix row-major as little-endian f32, with a
/// JSON sidecar describing the layout.
fn tfr(input: &Path, params: Option<&Path>, out: &Path) -> Result<(), HarnessError> {
    let cfg = tfr_params(params)?;
    let (rec, _) = read_recording(input)?;
    let t = compute_ckd_tfr(rec.samples().view(), rec.sample_rate_hz(), &cfg)?;
    let bytes: Vec<u8> = t.values.iter().flatten().flat_map(|&v| (v as f32).to_le_bytes()).collect();
    write_atomic(out, &bytes)?;
    let (rows, cols) = t.shape();
    let meta = serde_json::json!({
        "channels": t.channel_count(),
        "time_bins": rows,
        "freq_bins": cols,
        "time_step_s": t.time_step_s,
        "freq_step_hz": t.freq_step_hz,
        "layout": "channel, time, frequency; little-endian f32",
    });
    write_atomic(&out.with_extension("json"), serde_json::to_string_pretty(&meta).expect("json").as_bytes())?;
    println!("wrote {} channel(s) of {rows}×{cols} to {}", t.channel_count(), out.display());
    Ok(())
}

fn run(config: &Path, method: Method, out: &Path) -> Result<(), HarnessError> {
    let cfg = ExperimentConfig::from_file(config)?;
    let prepared = prepare(&cfg, method == Method::Ddf)?;
    let results = run_experiment(method, &cfg, &prepared)?;
    create_dir(out)?;
    write_run(out, &results)?;
    for row in results.table.rows.iter().filter(|r| r.split == EvalSplit::Test) {
        println!(
            "{} {:>3}% test accuracy {:.4} ± {:.4}",
            method.as_str(),
            row.training_pct,
            row.mean,
            row.std
        );
    }
    for g in &results.gate {
        println!(
            "repetition {}: edge model {:.4} -> {:.4}: {:?}",
            g.repetition, g.original_acc, g.updated_acc, g.decision
        );
    }
    Ok(())
}

fn sweep(config: &Path, grid: Option<&str>, out: &Path) -> Result<(), HarnessError> {
    let cfg = ExperimentConfig::from_file(config)?;
    let grid = grid.map(parse_grid).transpose()?.unwrap_or_else(default_grid);
    let prepared = prepare(&cfg, true)?;
    let table = sweep_threshold(&grid, &cfg, &prepared)?;
    create_dir(out)?;
    table.write(&out.join("sweep_results.csv"))?;
    for r in &table.rows {
        let mark = if r.selected { " *" } else { "" };
        println!("xi {:.2}: validation accuracy {:.4} ± {:.4}{mark}", r.xi, r.mean, r.std);
    }
    Ok(())
}

fn report(input: &Path, plots: bool) -> Result<(), HarnessError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(input)
        .map_err(|e| HarnessError::io(input, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with("_results.csv")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(HarnessError::Data(format!("no *_results.csv in {}", input.display())));
    }
    let mut merged = ResultsTable::default();
    for path in &files {
        let table = ResultsTable::read(path)?;
        if plots {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
            for split in [EvalSplit::Validation, EvalSplit::Test] {
                if table.rows.iter().any(|r| r.split == split) {
                    let name = format!("{stem}_{}.svg", if split == EvalSplit::Test { "test" } else { "validation" });
                    write_atomic(&input.join(&name), line_chart(&table, split, stem).as_bytes())?;
                    println!("wrote {}", input.join(name).display());
                }
            }
        }
        merged.extend(table);
    }
    merged.write(&input.join("report.csv"))?;
    println!("merged {} table(s), {} rows into {}", files.len(), merged.rows.len(), input.join("report.csv").display());
    Ok(())
}

fn configure_threads() -> Result<(), HarnessError> {
    let Ok(raw) = std::env::var("DDF_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| HarnessError::Config(format!("DDF_THREADS must be a non-negative integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))
}

fn dispatch(cli: Cli) -> Result<(), HarnessError> {
    configure_threads()?;
    match cli.command {
        Command::Synth { spec, out } => synth(spec.as_deref(), &out),
        Command::Preprocess { input, snr, rate, seed, out } => {
            preprocess_cmd(&input, PreprocessSpec { target_rate_hz: rate, snr_db: snr, seed }, &out)
        }
        Command::Tfr { input, params, out } => tfr(&input, params.as_deref(), &out),
        Command::Run { config, method, out } => run(&config, method, &out),
        Command::Sweep { config, grid, out } => sweep(&config, grid.as_deref(), &out),
        Command::Report { input, plots } => report(&input, plots),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.kind().exit_code() as u8)
        }
    }
}
