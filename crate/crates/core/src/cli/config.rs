//! Sweep configuration files.
//!
//! One `key = value` per line; `#` starts a comment. Keys:
//!
//! ```text
//! algorithms = fs, blockd, bayer:order=8   # required
//! h_grid     = 5, 11, 19                   # expands a bare `blockd`
//! kind       = bitflip                     # required: bitflip | erase | block-erase
//! block      = 3                           # block-erase only
//! t_grid     = 0, 0.1, 0.2                 # required
//! reps       = 8                           # required
//! hist       = binary                      # binary | block:<block>:<bins>
//! smoothing  = additive:1e-9               # none | additive:<lambda>
//! seed       = 42                          # required
//! corpus     = images                      # required: directories and/or .pgm files
//! ```
//!
//! Relative corpus paths resolve against the config file's directory.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::channel::{Channel, NoiseKind, NoisePower};
use crate::halftone::HalftoneSpec;
use crate::metrics::{HistogramMode, HistogramSpec, Smoothing};
use crate::robustness::SweepSpec;

pub const DEFAULT_SMOOTHING: Smoothing<f64> = Smoothing::Additive(1e-9);

#[derive(Debug, PartialEq)]
pub struct ConfigError {
    /// 1-based line, or `None` for whole-file problems such as a missing key.
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

const KEYS: [&str; 10] = [
    "algorithms",
    "h_grid",
    "kind",
    "block",
    "t_grid",
    "reps",
    "hist",
    "smoothing",
    "seed",
    "corpus",
];

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Parses config text. `base` anchors relative corpus paths.
pub fn parse_sweep_config(text: &str, base: &Path) -> Result<SweepSpec, ConfigError> {
    let mut entries: HashMap<&str, (usize, &str)> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| ConfigError {
            line: Some(line),
            message,
        };
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(format!("expected key = value, got '{content}'")))?;
        let key = key.trim();
        let Some(&known) = KEYS.iter().find(|&&k| k == key) else {
            return Err(err(format!("unknown key '{key}'")));
        };
        if entries.insert(known, (line, value.trim())).is_some() {
            return Err(err(format!("duplicate key '{key}'")));
        }
    }

    let required = |key: &str| {
        entries.get(key).copied().ok_or_else(|| ConfigError {
            line: None,
            message: format!("missing required key '{key}'"),
        })
    };
    let at = |line: usize| {
        move |message: String| ConfigError {
            line: Some(line),
            message,
        }
    };

    let h_grid = match entries.get("h_grid") {
        Some(&(line, value)) => Some(
            list(value)
                .map(|h| match h.parse::<usize>() {
                    Ok(h) if h >= 1 => Ok(h),
                    _ => Err(at(line)(format!("bad block size '{h}'"))),
                })
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => None,
    };

    let (line, value) = required("algorithms")?;
    let mut algorithms = Vec::new();
    let mut expanded = false;
    for token in list(value) {
        if token == "blockd" {
            if let Some(hs) = &h_grid {
                algorithms.extend(hs.iter().map(|&h| HalftoneSpec::BlockD { h }));
                expanded = true;
                continue;
            }
        }
        algorithms.push(
            token
                .parse::<HalftoneSpec>()
                .map_err(|e| at(line)(format!("{token}: {e}")))?,
        );
    }
    if algorithms.is_empty() {
        return Err(at(line)("no algorithms listed".into()));
    }
    if let (Some(&(hline, _)), false) = (entries.get("h_grid"), expanded) {
        return Err(at(hline)(
            "h_grid given but algorithms has no bare 'blockd'".into(),
        ));
    }

    let (line, value) = required("kind")?;
    let kind: NoiseKind = value.parse().map_err(|e| at(line)(format!("{e}")))?;
    let block = match entries.get("block") {
        Some(&(bline, v)) => Some(
            v.parse::<usize>()
                .map_err(|_| at(bline)(format!("bad block size '{v}'")))?,
        ),
        None => None,
    };
    let channel = Channel::from_parts(kind, block).map_err(|m| {
        let line = entries.get("block").map_or(line, |&(l, _)| l);
        at(line)(m)
    })?;

    let (line, value) = required("t_grid")?;
    let t_grid = list(value)
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| format!("bad noise power '{t}'"))
                .and_then(|t| NoisePower::new(t).map_err(|e| e.to_string()))
                .map_err(at(line))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if t_grid.is_empty() {
        return Err(at(line)("empty t_grid".into()));
    }

    let (line, value) = required("reps")?;
    let reps = match value.parse::<usize>() {
        Ok(r) if r >= 1 => r,
        _ => {
            return Err(at(line)(format!(
                "reps must be a positive integer, got '{value}'"
            )))
        }
    };

    let mode = match entries.get("hist") {
        Some(&(line, v)) => v
            .parse::<HistogramMode>()
            .map_err(|e| at(line)(e.to_string()))?,
        None => HistogramMode::Binary,
    };
    let smoothing = match entries.get("smoothing") {
        Some(&(line, v)) => v
            .parse::<Smoothing<f64>>()
            .map_err(|e| at(line)(e.to_string()))?,
        None => DEFAULT_SMOOTHING,
    };

    let (line, value) = required("seed")?;
    let master_seed = value
        .parse::<u64>()
        .map_err(|_| at(line)(format!("bad seed '{value}'")))?;

    let (line, value) = required("corpus")?;
    let mut corpus = Vec::new();
    for entry in list(value) {
        let path = base.join(entry);
        if path.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(&path)
                .map_err(|e| at(line)(format!("{}: {e}", path.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgm"))
                })
                .collect();
            files.sort();
            corpus.extend(files);
        } else if path.is_file() {
            corpus.push(path);
        } else {
            return Err(at(line)(format!(
                "corpus entry {} not found",
                path.display()
            )));
        }
    }
    if corpus.is_empty() {
        return Err(at(line)("corpus contains no .pgm images".into()));
    }

    Ok(SweepSpec {
        algorithms,
        channel,
        t_grid,
        reps,
        histogram: HistogramSpec { mode, smoothing },
        master_seed,
        corpus,
    })
}
