//! The `printchan` command line.
//!
//! Exit codes: 0 success, 2 usage or config error, 3 I/O error.

pub mod config;

pub use config::{parse_sweep_config, ConfigError, DEFAULT_SMOOTHING};

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::channel::{gen_noise, transmit, Channel, ChannelConfig, NoiseKind, NoisePower};
use crate::halftone::{halftone, screens, Params};
use crate::imagery::{
    decode_binary, decode_gray, read_binary, read_gray, write_binary, BinaryImage, ImageError,
};
use crate::metrics::{
    binary_entropy, euclidean_distance, image_relative_entropy, noise_entropy_curve, HistogramMode,
    HistogramSpec, MetricsError, Smoothing,
};
use crate::robustness::{
    compare, corpus_average, difference_surface, read_records_csv, run_sweep, write_aggregate_csv,
    write_records_csv, write_surface_csv, AggregateRow, RobustnessRecord, SweepError, Verdict,
    DEFAULT_TIE_TOLERANCE,
};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(m) | Self::Io(m) => f.write_str(m),
        }
    }
}

impl From<ImageError> for CliError {
    fn from(e: ImageError) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Image { .. } | SweepError::Csv(_) => Self::Io(e.to_string()),
            _ => Self::Usage(e.to_string()),
        }
    }
}

fn usage(m: impl Into<String>) -> CliError {
    CliError::Usage(m.into())
}

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(
    name = "printchan",
    version,
    about = "Halftoning through a binary noisy printing channel"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Halftone a PGM into a PBM and print its ink density.
    Halftone {
        /// threshold, random, fs, bayer, cdot, dotdif or blockd
        #[arg(long)]
        algo: String,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Block size (blockd)
        #[arg(long)]
        h: Option<usize>,
        /// Normalized threshold in [0, 1] (threshold)
        #[arg(long)]
        level: Option<f64>,
        /// Screen order: 2, 4 or 8 (bayer), 4 or 8 (cdot)
        #[arg(long)]
        order: Option<usize>,
        /// RNG seed (random)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write a threshold noise field as PBM.
    Noise {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(long)]
        power: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Send a PBM through the noisy channel.
    Transmit {
        /// bitflip, erase or block-erase
        #[arg(long)]
        kind: String,
        #[arg(long)]
        power: f64,
        /// Odd block size >= 3 (block-erase only)
        #[arg(long)]
        block: Option<usize>,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Also write the noise field used
        #[arg(long)]
        noise_out: Option<PathBuf>,
    },
    /// Print euclid, kl or entropy for PBM/PGM inputs.
    Metric {
        /// euclid, kl or entropy
        #[arg(long)]
        name: String,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: Option<PathBuf>,
        /// binary or block:<block>:<bins>
        #[arg(long, default_value = "binary")]
        hist: String,
        /// none or additive:<lambda>
        #[arg(long, default_value = "none")]
        smoothing: String,
    },
    /// Mean entropy of threshold noise versus power, as CSV.
    EntropyCurve {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        /// Comma-separated powers
        #[arg(long)]
        t_grid: String,
        #[arg(long)]
        reps: usize,
        #[arg(long)]
        seed: u64,
        /// CSV path; standard output when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a robustness sweep described by a config file.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        /// Record CSV
        #[arg(long)]
        out: PathBuf,
        /// Aggregate CSV (default: <out stem>_aggregate.csv)
        #[arg(long)]
        agg: Option<PathBuf>,
        /// Difference surface CSV (default: <out stem>_surface.csv)
        #[arg(long)]
        surface: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Compare two algorithms from a record CSV.
    Compare {
        #[arg(long)]
        records: PathBuf,
        /// Algorithm id, e.g. fs or blockd:h=19
        #[arg(long = "k")]
        algo_k: String,
        #[arg(long = "t")]
        algo_t: String,
        #[arg(long, default_value_t = DEFAULT_TIE_TOLERANCE)]
        tie: f64,
    },
    /// Print the compiled-in screens and class matrix.
    Screens,
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let res = match cli.command {
        Command::Halftone {
            algo,
            input,
            output,
            h,
            level,
            order,
            seed,
        } => {
            let spec = Params {
                level,
                seed,
                order,
                h,
            }
            .build(&algo)
            .map_err(|e| usage(format!("--algo {algo}: {e}")))?;
            let img = read_gray(&input)?;
            let g = halftone(&img, &spec).map_err(|e| usage(e.to_string()))?;
            write_binary(&g, &output)?;
            writeln!(out, "{}", g.ink_density())
        }
        Command::Noise {
            width,
            height,
            power,
            seed,
            output,
        } => {
            if width == 0 || height == 0 {
                return Err(usage("--width and --height must be >= 1"));
            }
            let power = parse_power(power)?;
            let v = gen_noise(width, height, power, seed);
            write_binary(&v, &output)?;
            writeln!(
                out,
                "t={} achieved_density={} density={}",
                power.t(),
                power.achieved_density(),
                v.ink_density()
            )
        }
        Command::Transmit {
            kind,
            power,
            block,
            input,
            output,
            seed,
            noise_out,
        } => {
            let kind: NoiseKind = kind.parse().map_err(|e| usage(format!("--kind: {e}")))?;
            let channel =
                Channel::from_parts(kind, block).map_err(|m| usage(format!("--block: {m}")))?;
            let power = parse_power(power)?;
            let g = read_binary(&input)?;
            let g_out = transmit(
                &g,
                &ChannelConfig {
                    channel,
                    power,
                    seed,
                },
            );
            write_binary(&g_out, &output)?;
            if let Some(path) = noise_out {
                write_binary(&gen_noise(g.width(), g.height(), power, seed), path)?;
            }
            writeln!(
                out,
                "f_in={} f_out={}",
                g.ink_density(),
                g_out.ink_density()
            )
        }
        Command::Metric {
            name,
            a,
            b,
            hist,
            smoothing,
        } => {
            let mode: HistogramMode = hist
                .parse()
                .map_err(|e: MetricsError| usage(format!("--hist: {e}")))?;
            let smoothing: Smoothing<f64> = smoothing
                .parse()
                .map_err(|e: MetricsError| usage(format!("--smoothing: {e}")))?;
            let value = metric(&name, &a, b.as_deref(), HistogramSpec { mode, smoothing })?;
            writeln!(out, "{}", format_sig12(value))
        }
        Command::EntropyCurve {
            width,
            height,
            t_grid,
            reps,
            seed,
            out: path,
        } => {
            if width == 0 || height == 0 {
                return Err(usage("--width and --height must be >= 1"));
            }
            let grid = parse_t_grid(&t_grid)?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .map_err(|e| CliError::Io(e.to_string()))?;
            let curve = pool
                .install(|| noise_entropy_curve::<f64>(width, height, &grid, reps, seed))
                .map_err(|e| usage(e.to_string()))?;
            let mut text = String::from("t,mean,std,reps\n");
            for p in curve {
                text.push_str(&format!("{},{},{},{}\n", p.t, p.mean, p.std, p.reps));
            }
            match path {
                Some(path) => return fs::write(&path, text).map_err(|e| io_err(&path, e)),
                None => out.write_all(text.as_bytes()),
            }
        }
        Command::Sweep {
            spec,
            out: path,
            agg,
            surface,
            jobs,
        } => return cmd_sweep(&spec, &path, agg, surface, jobs, out),
        Command::Compare {
            records,
            algo_k,
            algo_t,
            tie,
        } => {
            let all = read_records_csv(&records)?;
            let pick = |id: &str| -> Result<Vec<RobustnessRecord>, CliError> {
                let rs: Vec<_> = all.iter().filter(|r| r.algorithm == id).cloned().collect();
                if rs.is_empty() {
                    Err(usage(format!("no records for algorithm '{id}'")))
                } else {
                    Ok(rs)
                }
            };
            let verdicts = compare(&pick(&algo_k)?, &pick(&algo_t)?, tie)?;
            writeln!(out, "t,mean_k,mean_t,diff,verdict").map_err(stdout_err)?;
            for v in verdicts {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    v.t,
                    fmt_num(v.mean_k),
                    fmt_num(v.mean_t),
                    fmt_num(v.difference),
                    verdict_text(v.verdict, &v.algorithm_k, &v.algorithm_t)
                )
                .map_err(stdout_err)?;
            }
            Ok(())
        }
        Command::Screens => {
            for s in screens::all_screens() {
                writeln!(out, "{} order {}", s.name, s.order).map_err(stdout_err)?;
                for row in s.rows() {
                    let cells: Vec<String> = row.iter().map(|c| format!("{c:2}")).collect();
                    writeln!(out, "  [{}]", cells.join(", ")).map_err(stdout_err)?;
                }
            }
            Ok(())
        }
    };
    res.map_err(stdout_err)
}

fn stdout_err(e: io::Error) -> CliError {
    CliError::Io(format!("stdout: {e}"))
}

fn parse_power(t: f64) -> Result<NoisePower, CliError> {
    NoisePower::new(t).map_err(|e| usage(format!("--power: {e}")))
}

fn parse_t_grid(s: &str) -> Result<Vec<NoisePower>, CliError> {
    let grid = s
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| {
            x.parse::<f64>()
                .map_err(|_| usage(format!("--t-grid: bad value '{x}'")))
                .and_then(parse_power)
        })
        .collect::<Result<Vec<_>, _>>()?;
    if grid.is_empty() {
        return Err(usage("--t-grid is empty"));
    }
    Ok(grid)
}

enum AnyImage {
    Gray(crate::imagery::GrayImage),
    Binary(BinaryImage),
}

fn read_any(path: &Path) -> Result<AnyImage, CliError> {
    let data = fs::read(path).map_err(|e| io_err(path, e))?;
    let wrap = |e: ImageError| CliError::Io(format!("{}: {e}", path.display()));
    match data.get(..2) {
        Some(b"P1") | Some(b"P4") => decode_binary(&data).map(AnyImage::Binary).map_err(wrap),
        _ => decode_gray(&data).map(AnyImage::Gray).map_err(wrap),
    }
}

fn read_pbm(path: &Path) -> Result<BinaryImage, CliError> {
    match read_any(path)? {
        AnyImage::Binary(b) => Ok(b),
        AnyImage::Gray(_) => Err(usage(format!("{} is not a PBM", path.display()))),
    }
}

fn metric(
    name: &str,
    a: &Path,
    b: Option<&Path>,
    spec: HistogramSpec<f64>,
) -> Result<f64, CliError> {
    let need_b = || b.ok_or_else(|| usage(format!("metric {name} requires --b")));
    let mismatch = |e: MetricsError| usage(e.to_string());
    match name {
        "euclid" => match (read_any(a)?, read_any(need_b()?)?) {
            (AnyImage::Binary(x), AnyImage::Binary(y)) => {
                euclidean_distance(&x, &y).map_err(mismatch)
            }
            (AnyImage::Gray(x), AnyImage::Gray(y)) => euclidean_distance(&x, &y).map_err(mismatch),
            _ => Err(usage("euclid needs two images of the same kind")),
        },
        "kl" => {
            let (x, y) = (read_pbm(a)?, read_pbm(need_b()?)?);
            image_relative_entropy(&x, &y, &spec)
                .map(|d| d.value())
                .map_err(mismatch)
        }
        "entropy" => Ok(binary_entropy::<f64>(&read_pbm(a)?)),
        other => Err(usage(format!(
            "unknown metric '{other}' (expected euclid, kl or entropy)"
        ))),
    }
}

/// 12 significant digits, trailing zeros trimmed; `inf` for +∞.
pub fn format_sig12(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn fmt_num(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".into()
    } else {
        v.to_string()
    }
}

fn verdict_text(v: Verdict, k: &str, t: &str) -> String {
    match v {
        Verdict::KMoreRobust => format!("{k} more robust"),
        Verdict::TMoreRobust => format!("{t} more robust"),
        Verdict::Tie => "tie".into(),
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sweep".into());
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn write_csv_file(
    path: &Path,
    write: impl FnOnce(BufWriter<File>) -> Result<(), SweepError>,
) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    write(BufWriter::new(file)).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn cmd_sweep(
    spec_path: &Path,
    out_path: &Path,
    agg: Option<PathBuf>,
    surface: Option<PathBuf>,
    jobs: usize,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if jobs == 0 {
        return Err(usage("--jobs must be >= 1"));
    }
    let text = fs::read_to_string(spec_path).map_err(|e| io_err(spec_path, e))?;
    let base = spec_path.parent().unwrap_or(Path::new("."));
    let spec = parse_sweep_config(&text, base)
        .map_err(|e| usage(format!("{}: {e}", spec_path.display())))?;

    let records = run_sweep(&spec, jobs)?;
    let rows = corpus_average(&records);

    let agg_path = agg.unwrap_or_else(|| sibling(out_path, "aggregate"));
    write_csv_file(out_path, |w| write_records_csv(w, &records))?;
    write_csv_file(&agg_path, |w| write_aggregate_csv(w, &rows))?;

    let baselines: Vec<String> = unique_ids(spec.algorithms.iter().filter(|a| !a.is_proxy()));
    let proxies: Vec<String> = unique_ids(spec.algorithms.iter().filter(|a| a.is_proxy()));
    let surface_data = if baselines.len() == 1 && !proxies.is_empty() {
        let first: Vec<_> = records
            .iter()
            .filter(|r| r.algorithm == baselines[0])
            .cloned()
            .collect();
        let second: Vec<_> = records.iter().filter(|r| r.h.is_some()).cloned().collect();
        let s = difference_surface(&first, &second)?;
        let path = surface.unwrap_or_else(|| sibling(out_path, "surface"));
        write_csv_file(&path, |w| write_surface_csv(w, &s))?;
        Some((s, path))
    } else {
        None
    };

    summary(
        out,
        &spec,
        &records,
        &rows,
        &agg_path,
        out_path,
        surface_data.as_ref(),
    )
    .map_err(stdout_err)
}

fn unique_ids<'a>(specs: impl Iterator<Item = &'a crate::halftone::HalftoneSpec>) -> Vec<String> {
    let mut ids: Vec<String> = Vec::new();
    for s in specs {
        let id = s.to_string();
        if !ids.contains(&id) {
            ids.push(id);
        }
    }
    ids
}

fn summary(
    out: &mut dyn Write,
    spec: &crate::robustness::SweepSpec,
    records: &[RobustnessRecord],
    rows: &[AggregateRow],
    agg_path: &Path,
    out_path: &Path,
    surface: Option<&(crate::robustness::DifferenceSurface, PathBuf)>,
) -> io::Result<()> {
    writeln!(
        out,
        "sweep: kind={} hist={} smoothing={} seed={} reps={} images={} records={}",
        spec.channel.kind(),
        spec.histogram.mode,
        spec.histogram.smoothing,
        spec.master_seed,
        spec.reps,
        spec.corpus.len(),
        records.len()
    )?;
    if spec.algorithms.iter().any(|a| a.is_proxy()) {
        writeln!(out, "note: blockd is a block-based proxy algorithm")?;
    }
    writeln!(out, "records: {}", out_path.display())?;
    writeln!(out, "aggregate: {}", agg_path.display())?;
    writeln!(out)?;
    writeln!(
        out,
        "{:<22} {:>8} {:>16} {:>14} {:>6}",
        "algo", "t", "mean_q", "stderr_q", "n"
    )?;
    for r in rows {
        writeln!(
            out,
            "{:<22} {:>8} {:>16} {:>14} {:>6}",
            r.algorithm,
            r.t,
            format_sig12(r.mean_q),
            format_sig12(r.stderr_q),
            r.n
        )?;
    }

    let ids = unique_ids(spec.algorithms.iter());
    if ids.len() >= 2 {
        writeln!(out)?;
        writeln!(
            out,
            "comparisons (tie tolerance {DEFAULT_TIE_TOLERANCE:e}):"
        )?;
        let of = |id: &str| -> Vec<RobustnessRecord> {
            records
                .iter()
                .filter(|r| r.algorithm == id)
                .cloned()
                .collect()
        };
        let base = of(&ids[0]);
        for other in &ids[1..] {
            match compare(&base, &of(other), DEFAULT_TIE_TOLERANCE) {
                Ok(vs) => {
                    for v in vs {
                        writeln!(
                            out,
                            "  {} vs {} at t={}: diff={} -> {}",
                            v.algorithm_k,
                            v.algorithm_t,
                            v.t,
                            format_sig12(v.difference),
                            verdict_text(v.verdict, &v.algorithm_k, &v.algorithm_t)
                        )?;
                    }
                }
                Err(e) => writeln!(out, "  {} vs {}: {e}", ids[0], other)?,
            }
        }
    }

    if let Some((s, path)) = surface {
        writeln!(out)?;
        writeln!(
            out,
            "difference surface (baseline minus blockd; > 0 means blockd more robust): {}",
            path.display()
        )?;
        write!(out, "{:>8}", "t \\ h")?;
        for h in &s.h_grid {
            write!(out, " {h:>14}")?;
        }
        writeln!(out)?;
        for (t, row) in s.t_grid.iter().zip(&s.values) {
            write!(out, "{t:>8}")?;
            for v in row {
                write!(out, " {:>14}", format_sig12(*v))?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}
