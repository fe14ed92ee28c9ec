//! Command-line harness for the group-invariant graph Laplacian
//! experiments: dataset generation, the three reference studies on `S⁴`,
//! affinity-spectrum serialization, and a transform self-test.
//!
//! Every subcommand is a pure function of its flags: identical invocations
//! produce byte-identical output files regardless of thread count.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ginvlap::experiments::{
    convergence_run, denoise_run, embed_dataset, epsilon_grid, sample_s4, sample_s4_tube,
    spectrum_run_on, ConvergenceReport, DenoiseReport, ExperimentConfig, SpectrumReport,
};
use ginvlap::{fourier_blocks, BlockParams, Dataset, FftGrid, FourierCoeffs};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Lib(#[from] ginvlap::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serializing report: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Check(String),
}

type CliResult<T> = Result<T, CliError>;

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source })
}

#[derive(Parser)]
#[command(
    name = "ginvlap",
    version,
    about = "Group-invariant graph Laplacian experiments on SU(2)-closed data"
)]
struct Cli {
    /// Worker-thread cap for parallel sections (default: all cores). The
    /// GINVLAP_THREADS environment variable is consulted when the flag is
    /// absent; results never depend on the thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the kernel bandwidth and compare pointwise Laplace-Beltrami
    /// estimates of both Laplacians at a known harmonic.
    Convergence(ConvergenceArgs),
    /// Compare leading normalized eigenvalues and their multiplicity
    /// clusters.
    Spectrum(SpectrumArgs),
    /// Denoise a spherical shell with both Laplacians and report MSEs.
    Denoise(DenoiseArgs),
    /// Run round-trip and orthogonality self-tests of the group transform.
    FftSelftest(FftArgs),
    /// Sample a dataset and write it as JSON.
    MakeDataset(MakeDatasetArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Comma-separated values with a header row.
    Csv,
    /// Pretty-printed JSON of the full report.
    Json,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; when omitted the serialized report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report serialization format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

/// A parsed `lo:hi:count[log|lin]` bandwidth sweep.
#[derive(Clone)]
struct Sweep(Vec<f64>);

fn parse_sweep(text: &str) -> Result<Sweep, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected lo:hi:count[log|lin], got {text:?}"));
    }
    let lo: f64 = parts[0].parse().map_err(|_| format!("bad lower bound {:?}", parts[0]))?;
    let hi: f64 = parts[1].parse().map_err(|_| format!("bad upper bound {:?}", parts[1]))?;
    let (count_text, log) = if let Some(c) = parts[2].strip_suffix("log") {
        (c, true)
    } else if let Some(c) = parts[2].strip_suffix("lin") {
        (c, false)
    } else {
        // The reference sweep is logarithmic; a bare count follows suit.
        (parts[2], true)
    };
    let count: usize = count_text.parse().map_err(|_| format!("bad count {count_text:?}"))?;
    epsilon_grid(lo, hi, count, log).map(Sweep).map_err(|e| e.to_string())
}

fn parse_window(text: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 2 {
        return Err(format!("expected lo:hi, got {text:?}"));
    }
    let lo: f64 = parts[0].parse().map_err(|_| format!("bad lower bound {:?}", parts[0]))?;
    let hi: f64 = parts[1].parse().map_err(|_| format!("bad upper bound {:?}", parts[1]))?;
    if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
        return Err(format!("fit window must satisfy 0 < lo < hi, got {text:?}"));
    }
    Ok((lo, hi))
}

#[derive(Args)]
struct ConvergenceArgs {
    /// Number of sphere samples per trial (the base point is added on top).
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Group-quadrature resolution K; the grid holds 8K^3 nodes.
    #[arg(long, default_value_t = 16)]
    k: u32,
    /// Bandwidth sweep lo:hi:count[log|lin]; log-spaced when unsuffixed.
    #[arg(long, value_parser = parse_sweep, default_value = "0.1:1.0:10log")]
    epsilons: Sweep,
    /// Independent resamplings averaged (RMS) into each error value.
    #[arg(long, default_value_t = 4)]
    trials: usize,
    /// RNG seed.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Explicit slope-fit window as a bandwidth range lo:hi; default is
    /// automatic variance-region detection.
    #[arg(long, value_parser = parse_window)]
    fit_window: Option<(f64, f64)>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Number of sphere samples.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Group-quadrature resolution K.
    #[arg(long, default_value_t = 16)]
    k: u32,
    /// Largest doubled frequency carried by the affinity blocks.
    #[arg(long, default_value_t = 2)]
    band: u32,
    /// Kernel bandwidth.
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    /// Number of leading eigenvalues to report.
    #[arg(long, default_value_t = 20)]
    count: usize,
    /// RNG seed (ignored with --data).
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Load this dataset JSON (see make-dataset) instead of sampling.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Also write the per-frequency affinity blocks as JSON.
    #[arg(long)]
    blocks_out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct DenoiseArgs {
    /// Number of shell samples per noise level.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Group-quadrature resolution K.
    #[arg(long, default_value_t = 16)]
    k: u32,
    /// Shell half-width; repeat the flag for several noise levels.
    #[arg(long = "sigma", default_values_t = [0.1, 0.2])]
    sigmas: Vec<f64>,
    /// Override the per-noise-level default bandwidth for both routes.
    #[arg(long)]
    epsilon: Option<f64>,
    /// RNG seed.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct FftArgs {
    /// Grid resolution K.
    #[arg(long, default_value_t = 16)]
    k: u32,
    /// Largest doubled frequency of the random band-limited test signal.
    #[arg(long, default_value_t = 8)]
    band: u32,
    /// RNG seed for the test signal.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct MakeDatasetArgs {
    /// Number of samples.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Shell half-width; 0 samples the sphere itself.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// RNG seed.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output JSON file.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads(cli.threads) {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let outcome = match cli.command {
        Command::Convergence(args) => run_convergence(&args),
        Command::Spectrum(args) => run_spectrum(&args),
        Command::Denoise(args) => run_denoise(&args),
        Command::FftSelftest(args) => run_fft_selftest(&args),
        Command::MakeDataset(args) => run_make_dataset(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn configure_threads(flag: Option<usize>) -> Result<(), String> {
    let requested = match flag {
        Some(t) => Some(t),
        None => match std::env::var("GINVLAP_THREADS") {
            Ok(text) => Some(
                text.trim()
                    .parse()
                    .map_err(|_| format!("GINVLAP_THREADS must be a nonnegative integer, got {text:?}"))?,
            ),
            Err(_) => None,
        },
    };
    match requested {
        Some(t) if t > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| format!("configuring the thread pool: {e}")),
        _ => Ok(()),
    }
}

/// Writes a serialized report to `--out` (printing a one-line confirmation)
/// or to stdout when no path was given.
fn emit(output: &OutputArgs, text: &str, summary: &str) -> CliResult<()> {
    match &output.out {
        Some(path) => {
            write_file(path, text)?;
            println!("{summary}");
            println!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(report: &T) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    Ok(text)
}

/// Maps a bandwidth range onto inclusive indices of the sorted sweep.
fn window_indices(epsilons: &[f64], lo: f64, hi: f64) -> CliResult<(usize, usize)> {
    let first = epsilons.iter().position(|&e| e >= lo * (1.0 - 1e-12));
    let last = epsilons.iter().rposition(|&e| e <= hi * (1.0 + 1e-12));
    match (first, last) {
        (Some(a), Some(b)) if a < b => Ok((a, b)),
        _ => Err(CliError::Check(format!(
            "fit window {lo}:{hi} covers fewer than two sweep bandwidths"
        ))),
    }
}

fn convergence_csv(report: &ConvergenceReport) -> String {
    let mut text = String::from("epsilon,err_standard,err_ggl\n");
    for ((e, s), g) in report
        .epsilons
        .iter()
        .zip(&report.err_standard)
        .zip(&report.err_ggl)
    {
        let _ = writeln!(text, "{e},{s},{g}");
    }
    text
}

fn run_convergence(args: &ConvergenceArgs) -> CliResult<()> {
    let epsilons = args.epsilons.0.clone();
    let fit_window = match args.fit_window {
        Some((lo, hi)) => {
            let mut sorted = epsilons.clone();
            sorted.sort_by(f64::total_cmp);
            Some(window_indices(&sorted, lo, hi)?)
        }
        None => None,
    };
    let cfg = ExperimentConfig {
        n: args.n,
        k: args.k,
        epsilons,
        trials: args.trials,
        seed: args.seed,
        fit_window,
        ..ExperimentConfig::default()
    };
    let report = convergence_run(&cfg)?;
    let text = match args.output.format {
        Format::Csv => convergence_csv(&report),
        Format::Json => to_json(&report)?,
    };
    let summary = format!(
        "slopes over ε[{:.4}, {:.4}] ({}): standard {:.4}, invariant {:.4}",
        report.epsilons[report.fit_window.0],
        report.epsilons[report.fit_window.1],
        if report.window_is_auto { "auto" } else { "explicit" },
        report.slope_standard,
        report.slope_ggl,
    );
    emit(&args.output, &text, &summary)
}

fn spectrum_csv(report: &SpectrumReport) -> String {
    let mut text = String::from("rank,eigenvalue_standard,eigenvalue_ggl,cluster_id\n");
    for (i, ((s, g), c)) in report
        .eigen_standard
        .iter()
        .zip(&report.eigen_ggl)
        .zip(&report.cluster_ids)
        .enumerate()
    {
        let _ = writeln!(text, "{},{s},{g},{c}", i + 1);
    }
    text
}

fn run_spectrum(args: &SpectrumArgs) -> CliResult<()> {
    let data = match &args.data {
        Some(path) => Dataset::from_json(&read_file(path)?)?,
        None => embed_dataset(&sample_s4(args.n, args.seed))?,
    };
    if let Some(path) = &args.blocks_out {
        let params = BlockParams::new(args.epsilon, args.band, args.k as usize);
        let spectrum = fourier_blocks(&data, &params)?;
        write_file(path, &spectrum.to_json())?;
        println!("wrote affinity blocks to {}", path.display());
    }
    let cfg = ExperimentConfig {
        k: args.k,
        band: args.band,
        epsilon: Some(args.epsilon),
        count: args.count,
        ..ExperimentConfig::default()
    };
    let report = spectrum_run_on(&data, &cfg)?;
    let text = match args.output.format {
        Format::Csv => spectrum_csv(&report),
        Format::Json => to_json(&report)?,
    };
    let sizes: Vec<String> = report.clusters.iter().map(|c| c.size.to_string()).collect();
    let summary = format!(
        "{} eigenvalues in {} clusters of sizes [{}]",
        report.eigen_ggl.len(),
        report.clusters.len(),
        sizes.join(", "),
    );
    emit(&args.output, &text, &summary)
}

fn denoise_csv(report: &DenoiseReport) -> String {
    let mut text = String::from("sigma,mse_noisy,mse_standard,mse_ggl\n");
    for row in &report.rows {
        let _ = writeln!(
            text,
            "{},{},{},{}",
            row.sigma, row.mse_noisy, row.mse_standard, row.mse_ggl
        );
    }
    text
}

fn run_denoise(args: &DenoiseArgs) -> CliResult<()> {
    let cfg = ExperimentConfig {
        n: args.n,
        k: args.k,
        sigmas: args.sigmas.clone(),
        epsilon: args.epsilon,
        seed: args.seed,
        ..ExperimentConfig::default()
    };
    let report = denoise_run(&cfg)?;
    let text = match args.output.format {
        Format::Csv => denoise_csv(&report),
        Format::Json => to_json(&report)?,
    };
    let mut summary = String::new();
    for row in &report.rows {
        let _ = writeln!(
            summary,
            "σ = {}: noisy {:.3e}, standard {:.3e}, invariant {:.3e}",
            row.sigma, row.mse_noisy, row.mse_standard, row.mse_ggl
        );
    }
    emit(&args.output, &text, summary.trim_end())
}

fn run_fft_selftest(args: &FftArgs) -> CliResult<()> {
    let grid = FftGrid::new(args.k as usize, args.band)?;
    let mut rng = ChaCha12Rng::seed_from_u64(args.seed);
    let mut coeffs = FourierCoeffs::zeros(args.band);
    for two_l in 0..=args.band {
        let block = coeffs.block_mut(two_l).expect("bands cover their own frequencies");
        for r in 0..block.nrows() {
            for c in 0..block.ncols() {
                block[(r, c)] =
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
    }
    let samples = grid.sample(|g| coeffs.evaluate(g));
    let recovered = grid.forward(&samples)?;
    let round_trip = coeffs.max_block_distance(&recovered);
    println!("round-trip max coefficient error: {round_trip:.3e}");

    // Orthogonality of representation entries under the grid quadrature:
    // Σ_b μ_b U^ℓ_{mn}(b) conj(U^ℓ'_{m'n'}(b)) should be δ_{ℓℓ'}δ_{mm'}δ_{nn'}/(2ℓ+1).
    let schur_band = args.band.min(4);
    let mut entries = Vec::new();
    for two_l in 0..=schur_band {
        let d = two_l as usize + 1;
        for m in 0..d {
            for n in 0..d {
                entries.push((two_l, m, n));
            }
        }
    }
    let mut sums = vec![Complex64::new(0.0, 0.0); entries.len() * entries.len()];
    let mut values = vec![Complex64::new(0.0, 0.0); entries.len()];
    for (node, &mu) in grid.nodes().iter().zip(grid.weights()) {
        for (v, &(two_l, m, n)) in values.iter_mut().zip(&entries) {
            *v = ginvlap::wigner_d(two_l, node)?[(m, n)];
        }
        for (a, va) in values.iter().enumerate() {
            for (b, vb) in values.iter().enumerate() {
                sums[a * entries.len() + b] += mu * va * vb.conj();
            }
        }
    }
    let mut schur: f64 = 0.0;
    for (a, ea) in entries.iter().enumerate() {
        for (b, eb) in entries.iter().enumerate() {
            let expect = if ea == eb { 1.0 / (ea.0 as f64 + 1.0) } else { 0.0 };
            schur = schur.max((sums[a * entries.len() + b] - expect).norm());
        }
    }
    println!("orthogonality max quadrature deviation: {schur:.3e}");

    if round_trip > 1e-8 || schur > 1e-8 {
        return Err(CliError::Check(format!(
            "self-test tolerances exceeded: round trip {round_trip:.3e}, orthogonality {schur:.3e}"
        )));
    }
    Ok(())
}

fn run_make_dataset(args: &MakeDatasetArgs) -> CliResult<()> {
    let points = if args.sigma == 0.0 {
        sample_s4(args.n, args.seed)
    } else {
        sample_s4_tube(args.n, args.sigma, args.seed)?
    };
    let data = embed_dataset(&points)?;
    write_file(&args.out, &data.to_json())?;
    println!(
        "wrote {} embedded points (σ = {}) to {}",
        data.len(),
        args.sigma,
        args.out.display()
    );
    Ok(())
}
