//! `zne-lab` command line: deterministic experiment runs with CSV/JSON
//! outputs and checksummed manifests.

mod config;
mod manifest;

use clap::{Parser, Subcommand, ValueEnum};
use config::{ExperimentConfig, ExperimentKind};
use manifest::RunManifest;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use zne_lab::drift::{illusion_report, run_scenario as run_drift_scenario, severity};
use zne_lab::report::{fmt12, heatmap_csv, power_csv, timeseries_csv};
use zne_lab::scenario::DEFAULT_MASTER_SEED;
use zne_lab::stats::{
    bootstrap_power, cliffs_delta, cohens_d, paired_t_test, special::student_t_critical,
    wilcoxon_signed_rank, PairedSample, TestResult,
};
use zne_lab::sweep::{classify, run_sweep, OutcomeClass};
use zne_lab::zne::{richardson_coefficients, ScaleFactorSet};

#[derive(Parser)]
#[command(
    name = "zne-lab",
    version,
    about = "Simulated ZNE benchmarks with a full inferential-statistics battery"
)]
struct Cli {
    /// Override the master seed from the config (or the built-in default)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; results do not depend on this
    #[arg(long, global = true)]
    parallelism: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CurveFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DriftScenarioName {
    /// 48 h diurnal-shift session
    Weekend,
    /// 12 h session with a step change at 9.5 h
    Day1,
    /// 12 h session with a gradual ramp
    Day2,
    /// drift-free control on the weekend grid
    Constant,
}

impl DriftScenarioName {
    fn config(self) -> ExperimentConfig {
        match self {
            DriftScenarioName::Weekend => ExperimentConfig::drift_weekend(),
            DriftScenarioName::Day1 => ExperimentConfig::drift_day1(),
            DriftScenarioName::Day2 => ExperimentConfig::drift_day2(),
            DriftScenarioName::Constant => ExperimentConfig::drift_constant_control(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Richardson coefficients and variance bounds for a scale-factor list,
    /// no simulation involved
    Coeffs {
        /// Comma-separated scale factors, e.g. 1,3,5
        #[arg(long, value_delimiter = ',', required = true)]
        factors: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// One-at-a-time parameter sweep: heatmap CSV + activity JSON + manifest
    Sweep {
        /// Experiment file; defaults to the shipped khan-oat-sweep
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Longitudinal drift study: time-series CSV + illusion JSON + manifest
    Drift {
        /// Experiment file; defaults to the selected shipped scenario
        #[arg(long, conflicts_with = "scenario")]
        config: Option<PathBuf>,
        /// One of the shipped drift scenarios
        #[arg(long, value_enum, default_value_t = DriftScenarioName::Weekend)]
        scenario: DriftScenarioName,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bootstrap power curve for the paired t-test
    Power {
        /// File with one delta per line (optional header)
        #[arg(long, conflicts_with = "synthetic")]
        deltas: Option<PathBuf>,
        /// Synthetic normal deltas as "effect_size,sample_size"
        #[arg(long)]
        synthetic: Option<String>,
        /// Candidate repetition counts
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 1000)]
        boot: usize,
        /// Write power.csv (+ manifest) here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = CurveFormat::Csv)]
        format: CurveFormat,
    },
    /// Full statistics battery over a CSV of paired errors (columns
    /// raw_error, mitigated_error), emitted as JSON
    Analyze {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
}

enum AppError {
    /// Bad usage, config, or input data -> exit 2.
    Config(String),
    /// Failure while running a valid experiment -> exit 3.
    Runtime(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.parallelism {
        // ignore "already initialised" in tests that call main twice
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(AppError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Coeffs { factors, format } => cmd_coeffs(&factors, format),
        Command::Sweep { config, out } => cmd_sweep(config.as_deref(), &out, cli.seed),
        Command::Drift { config, scenario, out } => {
            cmd_drift(config.as_deref(), scenario, &out, cli.seed)
        }
        Command::Power { deltas, synthetic, grid, alpha, boot, out, format } => cmd_power(
            deltas.as_deref(),
            synthetic.as_deref(),
            grid,
            alpha,
            boot,
            out.as_deref(),
            format,
            cli.seed,
        ),
        Command::Analyze { pairs, alpha } => cmd_analyze(&pairs, alpha),
    }
}

fn cmd_coeffs(factors: &[f64], format: Format) -> Result<(), AppError> {
    let set = ScaleFactorSet::new(factors.to_vec()).map_err(|e| AppError::Config(e.to_string()))?;
    let coeffs = richardson_coefficients(&set);
    let list = |v: &[f64]| v.iter().map(|x| fmt12(*x)).collect::<Vec<_>>().join(", ");
    match format {
        Format::Text => {
            println!("scale factors : {}", list(set.factors()));
            println!("c_k           : {}", list(coeffs.coefficients()));
            println!("sum c_k       : {}", fmt12(coeffs.sum()));
            println!("sum |c_k|     : {}", fmt12(coeffs.amplification_bound()));
            println!("sum c_k^2     : {}", fmt12(coeffs.variance_factor()));
        }
        Format::Json => {
            #[derive(Serialize)]
            struct CoeffsJson<'a> {
                factors: &'a [f64],
                coefficients: &'a [f64],
                sum: f64,
                sum_abs: f64,
                sum_sq: f64,
            }
            let json = serde_json::to_string_pretty(&CoeffsJson {
                factors: set.factors(),
                coefficients: coeffs.coefficients(),
                sum: coeffs.sum(),
                sum_abs: coeffs.amplification_bound(),
                sum_sq: coeffs.variance_factor(),
            })
            .expect("serialises");
            println!("{json}");
        }
    }
    Ok(())
}

fn load_config(path: &Path, expected: ExperimentKind) -> Result<ExperimentConfig, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config = ExperimentConfig::parse(&text).map_err(AppError::Config)?;
    if config.kind != expected {
        return Err(AppError::Config(format!(
            "config {} has kind {:?}, expected {:?}",
            path.display(),
            config.kind,
            expected
        )));
    }
    Ok(config)
}

fn write_output(
    dir: &Path,
    manifest: &mut RunManifest,
    name: &str,
    contents: &str,
) -> Result<(), AppError> {
    std::fs::write(dir.join(name), contents)
        .map_err(|e| AppError::Runtime(format!("cannot write {name}: {e}")))?;
    manifest.record(name, contents.as_bytes());
    Ok(())
}

fn prepare_out_dir(dir: &Path) -> Result<(), AppError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| AppError::Runtime(format!("cannot create {}: {e}", dir.display())))
}

fn cmd_sweep(config_path: Option<&Path>, out: &Path, seed: Option<u64>) -> Result<(), AppError> {
    let config = match config_path {
        Some(path) => load_config(path, ExperimentKind::Sweep)?,
        None => ExperimentConfig::khan_sweep(),
    };
    let scenario = config.to_sweep_scenario().map_err(AppError::Config)?;
    let master_seed = seed.unwrap_or(config.master_seed);
    let output =
        run_sweep(&scenario, master_seed).map_err(|e| AppError::Runtime(e.to_string()))?;

    prepare_out_dir(out)?;
    let mut manifest = RunManifest::new(config.name.clone(), config.digest_hex(), master_seed);
    write_output(out, &mut manifest, "heatmap.csv", &heatmap_csv(&output.results))?;

    #[derive(Serialize)]
    struct SweepJson<'a> {
        label: &'a str,
        master_seed: u64,
        alpha: f64,
        summary: &'a zne_lab::sweep::CorrectionSummary,
        families: &'a [zne_lab::sweep::FamilyActivity],
    }
    let json = serde_json::to_string_pretty(&SweepJson {
        label: &output.label,
        master_seed,
        alpha: output.alpha,
        summary: &output.summary,
        families: &output.families,
    })
    .expect("serialises");
    write_output(out, &mut manifest, "activity.json", &(json + "\n"))?;
    manifest
        .write(out)
        .map_err(|e| AppError::Runtime(format!("cannot write manifest: {e}")))?;
    eprintln!(
        "sweep '{}': {} configurations, {} significant raw ({} better / {} worse)",
        output.label,
        output.results.len(),
        output.summary.raw.significant(),
        output.summary.raw.better,
        output.summary.raw.worse,
    );
    Ok(())
}

fn cmd_drift(
    config_path: Option<&Path>,
    scenario_name: DriftScenarioName,
    out: &Path,
    seed: Option<u64>,
) -> Result<(), AppError> {
    let config = match config_path {
        Some(path) => load_config(path, ExperimentKind::Drift)?,
        None => scenario_name.config(),
    };
    let scenario = config.to_drift_scenario().map_err(AppError::Config)?;
    let master_seed = seed.unwrap_or(config.master_seed);
    let result = run_drift_scenario(&scenario, master_seed)
        .map_err(|e| AppError::Runtime(e.to_string()))?;
    let sev = severity(&result).map_err(|e| AppError::Runtime(e.to_string()))?;
    let report =
        illusion_report(&result, scenario.alpha).map_err(|e| AppError::Runtime(e.to_string()))?;

    prepare_out_dir(out)?;
    let mut manifest = RunManifest::new(config.name.clone(), config.digest_hex(), master_seed);
    let csv = timeseries_csv(&result, scenario.alpha)
        .map_err(|e| AppError::Runtime(e.to_string()))?;
    write_output(out, &mut manifest, "timeseries.csv", &csv)?;

    #[derive(Serialize)]
    struct DriftJson<'a> {
        label: &'a str,
        master_seed: u64,
        alpha: f64,
        time_points: usize,
        n_reps: usize,
        e_ideal: f64,
        report: &'a zne_lab::drift::IllusionReport,
    }
    let json = serde_json::to_string_pretty(&DriftJson {
        label: &result.label,
        master_seed,
        alpha: scenario.alpha,
        time_points: result.times.len(),
        n_reps: result.n_reps,
        e_ideal: result.e_ideal,
        report: &report,
    })
    .expect("serialises");
    write_output(out, &mut manifest, "illusion.json", &(json + "\n"))?;
    manifest
        .write(out)
        .map_err(|e| AppError::Runtime(format!("cannot write manifest: {e}")))?;
    eprintln!(
        "drift '{}': {} time points, eta^2 {:.3}, r1 {:.3}, d range [{:.2}, {:.2}]",
        result.label,
        result.times.len(),
        sev.eta_squared,
        sev.r1,
        sev.d_min,
        sev.d_max,
    );
    Ok(())
}

fn parse_deltas_file(path: &Path) -> Result<Vec<f64>, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut deltas = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) => deltas.push(v),
            Err(_) if i == 0 && line.eq_ignore_ascii_case("delta") => {}
            Err(e) => {
                return Err(AppError::Config(format!(
                    "{}: row {}: cannot parse '{line}': {e}",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(deltas)
}

fn cmd_power(
    deltas_path: Option<&Path>,
    synthetic: Option<&str>,
    grid: Option<Vec<usize>>,
    alpha: f64,
    boot: usize,
    out: Option<&Path>,
    seed: Option<u64>,
) -> Result<(), AppError> {
    let master_seed = seed.unwrap_or(DEFAULT_MASTER_SEED);
    let deltas = match (deltas_path, synthetic) {
        (Some(path), None) => parse_deltas_file(path)?,
        (None, Some(spec)) => {
            let parts: Vec<&str> = spec.split(',').collect();
            if parts.len() != 2 {
                return Err(AppError::Config(format!(
                    "--synthetic wants 'effect_size,sample_size', got '{spec}'"
                )));
            }
            let d: f64 = parts[0]
                .trim()
                .parse()
                .map_err(|e| AppError::Config(format!("bad effect size: {e}")))?;
            let n: usize = parts[1]
                .trim()
                .parse()
                .map_err(|e| AppError::Config(format!("bad sample size: {e}")))?;
            if n < 2 {
                return Err(AppError::Config("synthetic sample size must be >= 2".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
            (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    d + z
                })
                .collect()
        }
        _ => {
            return Err(AppError::Config(
                "power needs exactly one of --deltas or --synthetic".into(),
            ))
        }
    };
    let sample = PairedSample::new(deltas).map_err(|e| AppError::Config(e.to_string()))?;
    let grid = grid.unwrap_or_else(|| vec![2, 5, 10, 15, 20, 25, 30, 40, 50]);
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed.wrapping_add(1));
    let curve = bootstrap_power(&sample, &grid, alpha, boot, &mut rng)
        .map_err(|e| AppError::Config(e.to_string()))?;
    let csv = power_csv(&curve);
    match curve.smallest_n_reaching(0.8) {
        Some(n) => eprintln!("smallest n_reps with power >= 0.8: {n}"),
        None => eprintln!("no grid point reaches power 0.8"),
    }
    match out {
        Some(dir) => {
            prepare_out_dir(dir)?;
            let mut manifest =
                RunManifest::new("power".into(), format!("{boot}-boot"), master_seed);
            write_output(dir, &mut manifest, "power.csv", &csv)?;
            manifest
                .write(dir)
                .map_err(|e| AppError::Runtime(format!("cannot write manifest: {e}")))?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn parse_pairs_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| AppError::Config(format!("{}: empty file", path.display())))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["raw_error", "mitigated_error"] {
        return Err(AppError::Config(format!(
            "{}: row 1: expected header 'raw_error,mitigated_error', got '{header}'",
            path.display()
        )));
    }
    let mut raw = Vec::new();
    let mut mitigated = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(AppError::Config(format!(
                "{}: row {}: expected 2 columns, got {}",
                path.display(),
                i + 1,
                fields.len()
            )));
        }
        let parse = |s: &str, col: &str| -> Result<f64, AppError> {
            s.parse::<f64>().map_err(|e| {
                AppError::Config(format!(
                    "{}: row {}: bad {col} value '{s}': {e}",
                    path.display(),
                    i + 1
                ))
            })
        };
        raw.push(parse(fields[0], "raw_error")?);
        mitigated.push(parse(fields[1], "mitigated_error")?);
    }
    Ok((raw, mitigated))
}

#[derive(Serialize)]
struct AnalyzeJson {
    n: usize,
    alpha: f64,
    mean_delta: f64,
    ci_level: f64,
    ci_lo: Option<f64>,
    ci_hi: Option<f64>,
    t: Option<TestResult>,
    wilcoxon: Option<TestResult>,
    cohens_d: Option<f64>,
    cliffs_delta: f64,
    classification: &'static str,
    degenerate: bool,
}

fn cmd_analyze(pairs: &Path, alpha: f64) -> Result<(), AppError> {
    let (raw, mitigated) = parse_pairs_csv(pairs)?;
    let sample = PairedSample::from_abs_errors(&raw, &mitigated)
        .map_err(|e| AppError::Config(e.to_string()))?;
    let t = paired_t_test(&sample).ok();
    let d = cohens_d(&sample).ok();
    let classification = match (&t, d) {
        (Some(t), Some(d)) => classify(t, d, alpha),
        _ => OutcomeClass::Degenerate,
    };
    let ci = t.as_ref().map(|_| {
        let n = sample.n() as f64;
        let half = student_t_critical(alpha, n - 1.0) * sample.sd() / n.sqrt();
        (sample.mean() - half, sample.mean() + half)
    });
    let report = AnalyzeJson {
        n: sample.n(),
        alpha,
        mean_delta: sample.mean(),
        ci_level: 1.0 - alpha,
        ci_lo: ci.map(|c| c.0),
        ci_hi: ci.map(|c| c.1),
        t,
        wilcoxon: wilcoxon_signed_rank(&sample).ok(),
        cohens_d: d,
        cliffs_delta: cliffs_delta(&sample),
        classification: classification.label(),
        degenerate: classification == OutcomeClass::Degenerate,
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("serialises"));
    Ok(())
}
