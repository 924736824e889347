//! Robustness sweeps over (algorithm × image × noise power × repetition).
//!
//! Every trial halftones an image, sends the halftone through the channel
//! and records `q = Q(g‖g')`. An algorithm is ε-robust when every q is at
//! most ε; of two algorithms the one with the smaller mean q is the more
//! robust at that noise power.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{derive_seed, transmit, Channel, ChannelConfig, NoiseKind, NoisePower};
use crate::halftone::{halftone, HalftoneError, HalftoneSpec};
use crate::imagery::{read_gray, BinaryImage, GrayImage, ImageError};
use crate::metrics::{
    euclidean_distance, image_relative_entropy, mean_std, Divergence, HistogramSpec, MetricsError,
};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),
    #[error("image {path}: {source}")]
    Image {
        path: String,
        #[source]
        source: ImageError,
    },
    #[error("halftone {algorithm} on {image}: {source}")]
    Halftone {
        algorithm: String,
        image: String,
        #[source]
        source: HalftoneError,
    },
    #[error("cell (algo {algorithm}, image {image}, t {t}, rep {rep}): {source}")]
    Cell {
        algorithm: String,
        image: String,
        t: f64,
        rep: usize,
        #[source]
        source: MetricsError,
    },
    #[error("empty record set")]
    Empty,
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("failed to start worker pool: {0}")]
    Pool(String),
    #[error("csv: {0}")]
    Csv(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub algorithms: Vec<HalftoneSpec>,
    pub channel: Channel,
    pub t_grid: Vec<NoisePower>,
    pub reps: usize,
    pub histogram: HistogramSpec<f64>,
    pub master_seed: u64,
    pub corpus: Vec<PathBuf>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.algorithms.is_empty() {
            return Err(SweepError::InvalidSpec("no algorithms".into()));
        }
        if self.t_grid.is_empty() {
            return Err(SweepError::InvalidSpec("empty t grid".into()));
        }
        if self.reps == 0 {
            return Err(SweepError::InvalidSpec("reps must be >= 1".into()));
        }
        for a in &self.algorithms {
            a.validate()
                .map_err(|e| SweepError::InvalidSpec(format!("{a}: {e}")))?;
        }
        self.histogram
            .smoothing
            .validate()
            .map_err(|e| SweepError::InvalidSpec(e.to_string()))
    }
}

/// A loaded corpus image and its id (the file name).
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusImage {
    pub id: String,
    pub image: GrayImage,
}

pub fn load_corpus(paths: &[PathBuf]) -> Result<Vec<CorpusImage>, SweepError> {
    paths
        .iter()
        .map(|p| {
            let image = read_gray(p).map_err(|source| SweepError::Image {
                path: p.display().to_string(),
                source,
            })?;
            let id = p
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string());
            Ok(CorpusImage { id, image })
        })
        .collect()
}

/// One trial.
#[derive(Clone, Debug, PartialEq)]
pub struct RobustnessRecord {
    /// Canonical algorithm id, e.g. `fs` or `blockd:h=19`.
    pub algorithm: String,
    pub h: Option<usize>,
    pub image: String,
    pub noise_kind: NoiseKind,
    pub t: f64,
    pub rep: usize,
    pub seed: u64,
    pub q: Divergence<f64>,
    pub e_dist: f64,
    pub f_in: f64,
    pub f_out: f64,
}

/// Reads the corpus named in `spec` and runs the sweep.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<Vec<RobustnessRecord>, SweepError> {
    if spec.corpus.is_empty() {
        return Err(SweepError::InvalidSpec("empty corpus".into()));
    }
    let corpus = load_corpus(&spec.corpus)?;
    run_sweep_on(spec, &corpus, jobs)
}

/// Runs the sweep on images already in memory (`spec.corpus` is ignored).
///
/// Records come back in canonical (algorithm, image, t, rep) order. Cell
/// `i` of that order uses seed `derive_seed(master_seed, i)`, so the output
/// is identical for every `jobs` value.
pub fn run_sweep_on(
    spec: &SweepSpec,
    corpus: &[CorpusImage],
    jobs: usize,
) -> Result<Vec<RobustnessRecord>, SweepError> {
    spec.validate()?;
    if corpus.is_empty() {
        return Err(SweepError::InvalidSpec("empty corpus".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    pool.install(|| sweep_cells(spec, corpus))
}

fn sweep_cells(
    spec: &SweepSpec,
    corpus: &[CorpusImage],
) -> Result<Vec<RobustnessRecord>, SweepError> {
    let pairs: Vec<(usize, usize)> = (0..spec.algorithms.len())
        .flat_map(|a| (0..corpus.len()).map(move |i| (a, i)))
        .collect();
    let halftones: Vec<BinaryImage> = pairs
        .par_iter()
        .map(|&(a, i)| {
            let algo = &spec.algorithms[a];
            halftone(&corpus[i].image, algo).map_err(|source| SweepError::Halftone {
                algorithm: algo.to_string(),
                image: corpus[i].id.clone(),
                source,
            })
        })
        .collect::<Result<_, _>>()?;

    let per_pair = spec.t_grid.len() * spec.reps;
    (0..pairs.len() * per_pair)
        .into_par_iter()
        .map(|cell| {
            let (a, i) = pairs[cell / per_pair];
            let (ti, rep) = ((cell % per_pair) / spec.reps, cell % spec.reps);
            let algo = &spec.algorithms[a];
            let g = &halftones[cell / per_pair];
            let power = spec.t_grid[ti];
            let seed = derive_seed(spec.master_seed, cell as u64);
            let cfg = ChannelConfig {
                channel: spec.channel,
                power,
                seed,
            };
            let g_out = transmit(g, &cfg);
            let cell_err = |source| SweepError::Cell {
                algorithm: algo.to_string(),
                image: corpus[i].id.clone(),
                t: power.t(),
                rep,
                source,
            };
            let q = image_relative_entropy(g, &g_out, &spec.histogram).map_err(cell_err)?;
            let e_dist = euclidean_distance::<f64, _>(g, &g_out).map_err(cell_err)?;
            Ok(RobustnessRecord {
                algorithm: algo.to_string(),
                h: algo.block_size(),
                image: corpus[i].id.clone(),
                noise_kind: spec.channel.kind(),
                t: power.t(),
                rep,
                seed,
                q,
                e_dist,
                f_in: g.ink_density(),
                f_out: g_out.ink_density(),
            })
        })
        .collect()
}

/// Outcome of an ε-robustness check.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonReport {
    pub robust: bool,
    /// Every q is exactly zero.
    pub perfect: bool,
    pub max_q: Divergence<f64>,
    /// The record holding the largest q (first one on ties).
    pub argmax: RobustnessRecord,
}

/// True iff every record's q is at most `epsilon`.
pub fn is_epsilon_robust(
    records: &[RobustnessRecord],
    epsilon: f64,
) -> Result<EpsilonReport, SweepError> {
    let first = records.first().ok_or(SweepError::Empty)?;
    let mut argmax = first;
    for r in records {
        if r.q.value() > argmax.q.value() {
            argmax = r;
        }
    }
    Ok(EpsilonReport {
        robust: argmax.q.value() <= epsilon,
        perfect: argmax.q.value() == 0.0,
        max_q: argmax.q,
        argmax: argmax.clone(),
    })
}

/// Mean q for one (algorithm, t) group.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub algorithm: String,
    pub h: Option<usize>,
    pub noise_kind: NoiseKind,
    pub t: f64,
    pub mean_q: f64,
    pub stderr_q: f64,
    pub n: usize,
}

/// (algorithm id, noise kind, t bits) -> (h, t, q values).
type Groups = BTreeMap<(String, NoiseKind, u64), (Option<usize>, f64, Vec<f64>)>;

/// Groups records by (algorithm, noise kind, t) and averages q over images
/// and reps. Sorted by algorithm id, then t. A group holding an infinite q
/// has infinite mean and standard error.
pub fn corpus_average(records: &[RobustnessRecord]) -> Vec<AggregateRow> {
    let mut groups = Groups::new();
    for r in records {
        groups
            .entry((r.algorithm.clone(), r.noise_kind, t_key(r.t)))
            .or_insert_with(|| (r.h, r.t, Vec::new()))
            .2
            .push(r.q.value());
    }
    groups
        .into_iter()
        .map(|((algorithm, noise_kind, _), (h, t, qs))| {
            let n = qs.len();
            let (mean_q, stderr_q) = if qs.iter().any(|q| q.is_infinite()) {
                (f64::INFINITY, f64::INFINITY)
            } else {
                let (mean, std) = mean_std(&qs);
                (mean, std / (n as f64).sqrt())
            };
            AggregateRow {
                algorithm,
                h,
                noise_kind,
                t,
                mean_q,
                stderr_q,
                n,
            }
        })
        .collect()
}

/// Order-preserving key for non-negative t values.
fn t_key(t: f64) -> u64 {
    t.to_bits()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    KMoreRobust,
    TMoreRobust,
    Tie,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonVerdict {
    pub algorithm_k: String,
    pub algorithm_t: String,
    pub t: f64,
    pub mean_k: f64,
    pub mean_t: f64,
    /// `mean_k - mean_t`.
    pub difference: f64,
    pub verdict: Verdict,
}

pub const DEFAULT_TIE_TOLERANCE: f64 = 1e-12;

fn grid_of(records: &[RobustnessRecord]) -> BTreeSet<(String, u64)> {
    records
        .iter()
        .map(|r| (r.image.clone(), t_key(r.t)))
        .collect()
}

fn single_algorithm(records: &[RobustnessRecord], side: &str) -> Result<String, SweepError> {
    let first = records.first().ok_or(SweepError::Empty)?;
    if records.iter().any(|r| r.algorithm != first.algorithm) {
        return Err(SweepError::GridMismatch(format!(
            "{side} records mix several algorithms"
        )));
    }
    Ok(first.algorithm.clone())
}

fn verdict_of(difference: f64, tie: f64) -> Verdict {
    if difference.is_nan() || difference.abs() <= tie {
        Verdict::Tie
    } else if difference < 0.0 {
        Verdict::KMoreRobust
    } else {
        Verdict::TMoreRobust
    }
}

/// Per-t comparison of two algorithms over a shared (image, t) grid. Means
/// come from [`corpus_average`].
pub fn compare(
    records_k: &[RobustnessRecord],
    records_t: &[RobustnessRecord],
    tie: f64,
) -> Result<Vec<ComparisonVerdict>, SweepError> {
    let algorithm_k = single_algorithm(records_k, "k")?;
    let algorithm_t = single_algorithm(records_t, "t")?;
    if grid_of(records_k) != grid_of(records_t) {
        return Err(SweepError::GridMismatch(format!(
            "{algorithm_k} and {algorithm_t} cover different (image, t) cells"
        )));
    }
    let mean_by_t = |rows: Vec<AggregateRow>| -> BTreeMap<u64, f64> {
        rows.into_iter().map(|r| (t_key(r.t), r.mean_q)).collect()
    };
    let means_k = mean_by_t(corpus_average(records_k));
    let means_t = mean_by_t(corpus_average(records_t));
    Ok(means_k
        .iter()
        .map(|(&key, &mean_k)| {
            let mean_t = means_t[&key];
            let difference = if mean_k.is_infinite() && mean_t.is_infinite() {
                0.0
            } else {
                mean_k - mean_t
            };
            ComparisonVerdict {
                algorithm_k: algorithm_k.clone(),
                algorithm_t: algorithm_t.clone(),
                t: f64::from_bits(key),
                mean_k,
                mean_t,
                difference,
                verdict: verdict_of(difference, tie),
            }
        })
        .collect())
}

/// Mean-q difference over a (t, h) grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferenceSurface {
    pub t_grid: Vec<f64>,
    pub h_grid: Vec<usize>,
    /// `values[ti][hi] = mean q_first(t) − mean q_second(t, h)`.
    pub values: Vec<Vec<f64>>,
}

/// Difference between a baseline and a block-size sweep of a second
/// algorithm. Positive cells are where the swept algorithm has the smaller
/// mean q.
///
/// When the baseline records carry block sizes too, each cell compares like
/// h with like h; otherwise the baseline mean at t is used for every h.
pub fn difference_surface(
    first: &[RobustnessRecord],
    second: &[RobustnessRecord],
) -> Result<DifferenceSurface, SweepError> {
    if first.is_empty() || second.is_empty() {
        return Err(SweepError::Empty);
    }
    if second.iter().any(|r| r.h.is_none()) {
        return Err(SweepError::GridMismatch(
            "second algorithm must carry a block size".into(),
        ));
    }
    let by_h = first.iter().all(|r| r.h.is_some());
    let key =
        |r: &RobustnessRecord, h_matters: bool| (t_key(r.t), if h_matters { r.h } else { None });

    let mut first_means: BTreeMap<(u64, Option<usize>), Vec<f64>> = BTreeMap::new();
    for r in first {
        first_means
            .entry(key(r, by_h))
            .or_default()
            .push(r.q.value());
    }
    let mut second_means: BTreeMap<(u64, Option<usize>), Vec<f64>> = BTreeMap::new();
    for r in second {
        second_means
            .entry(key(r, true))
            .or_default()
            .push(r.q.value());
    }
    let mean = |qs: &Vec<f64>| qs.iter().sum::<f64>() / qs.len() as f64;

    let t_keys: BTreeSet<u64> = second.iter().map(|r| t_key(r.t)).collect();
    let h_grid: Vec<usize> = second
        .iter()
        .filter_map(|r| r.h)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let first_t: BTreeSet<u64> = first.iter().map(|r| t_key(r.t)).collect();
    if first_t != t_keys {
        return Err(SweepError::GridMismatch("t grids differ".into()));
    }
    let mut values = Vec::with_capacity(t_keys.len());
    for &t in &t_keys {
        let mut row = Vec::with_capacity(h_grid.len());
        for &h in &h_grid {
            let missing =
                || SweepError::GridMismatch(format!("no records at t={} h={h}", f64::from_bits(t)));
            let b = second_means.get(&(t, Some(h))).ok_or_else(missing)?;
            let a = first_means
                .get(&(t, if by_h { Some(h) } else { None }))
                .ok_or_else(missing)?;
            let (ma, mb) = (mean(a), mean(b));
            row.push(if ma.is_infinite() && mb.is_infinite() {
                0.0
            } else {
                ma - mb
            });
        }
        values.push(row);
    }
    Ok(DifferenceSurface {
        t_grid: t_keys.into_iter().map(f64::from_bits).collect(),
        h_grid,
        values,
    })
}

pub const RECORD_HEADER: [&str; 11] = [
    "algo",
    "image",
    "noise_kind",
    "t",
    "h",
    "rep",
    "seed",
    "q_bits",
    "e_dist",
    "f_in",
    "f_out",
];

pub const AGGREGATE_HEADER: [&str; 7] = ["algo", "noise_kind", "t", "h", "mean_q", "stderr_q", "n"];

fn fmt_f64(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".into()
    } else {
        v.to_string()
    }
}

fn fmt_h(h: Option<usize>) -> String {
    h.map(|h| h.to_string()).unwrap_or_default()
}

fn csv_err(e: impl std::fmt::Display) -> SweepError {
    SweepError::Csv(e.to_string())
}

pub fn write_records_csv<W: Write>(out: W, records: &[RobustnessRecord]) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.algorithm.clone(),
            r.image.clone(),
            r.noise_kind.to_string(),
            fmt_f64(r.t),
            fmt_h(r.h),
            r.rep.to_string(),
            r.seed.to_string(),
            r.q.to_string(),
            fmt_f64(r.e_dist),
            fmt_f64(r.f_in),
            fmt_f64(r.f_out),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

pub fn write_aggregate_csv<W: Write>(out: W, rows: &[AggregateRow]) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.algorithm.clone(),
            r.noise_kind.to_string(),
            fmt_f64(r.t),
            fmt_h(r.h),
            fmt_f64(r.mean_q),
            fmt_f64(r.stderr_q),
            r.n.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

pub fn write_surface_csv<W: Write>(out: W, surface: &DifferenceSurface) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "h", "diff_q"]).map_err(csv_err)?;
    for (t, row) in surface.t_grid.iter().zip(&surface.values) {
        for (h, v) in surface.h_grid.iter().zip(row) {
            w.write_record([fmt_f64(*t), h.to_string(), fmt_f64(*v)])
                .map_err(csv_err)?;
        }
    }
    w.flush().map_err(csv_err)
}

fn parse_f64(s: &str, line: usize, col: &str) -> Result<f64, SweepError> {
    match s {
        "inf" => Ok(f64::INFINITY),
        _ => s
            .parse()
            .map_err(|_| SweepError::Csv(format!("line {line}: bad {col} '{s}'"))),
    }
}

/// Reads a record CSV written by [`write_records_csv`].
pub fn read_records_csv(path: &Path) -> Result<Vec<RobustnessRecord>, SweepError> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.iter().ne(RECORD_HEADER) {
        return Err(SweepError::Csv(format!(
            "unexpected header, expected {}",
            RECORD_HEADER.join(",")
        )));
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(csv_err)?;
        let line = i + 2;
        let bad = |col: &str| SweepError::Csv(format!("line {line}: bad {col}"));
        let h = match &row[4] {
            "" => None,
            s => Some(s.parse().map_err(|_| bad("h"))?),
        };
        out.push(RobustnessRecord {
            algorithm: row[0].to_string(),
            image: row[1].to_string(),
            noise_kind: row[2].parse().map_err(|_| bad("noise_kind"))?,
            t: parse_f64(&row[3], line, "t")?,
            h,
            rep: row[5].parse().map_err(|_| bad("rep"))?,
            seed: row[6].parse().map_err(|_| bad("seed"))?,
            q: Divergence::new(parse_f64(&row[7], line, "q_bits")?),
            e_dist: parse_f64(&row[8], line, "e_dist")?,
            f_in: parse_f64(&row[9], line, "f_in")?,
            f_out: parse_f64(&row[10], line, "f_out")?,
        });
    }
    Ok(out)
}
