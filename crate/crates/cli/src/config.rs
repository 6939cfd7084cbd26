//! Experiment configuration: JSON parsing, defaults and validation.

use std::fmt;
use std::path::{Path, PathBuf};

use bellfid_core::{NoiseParams, ProtocolKind};
use serde::{Deserialize, Serialize};

pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Iid,
    Correlated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Noise {
    pub kind: NoiseKind,
    pub p: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub p: Vec<f64>,
    pub d: Vec<f64>,
}

/// Fully resolved configuration with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub n_pairs: usize,
    pub m_sampled: usize,
    pub noise: Noise,
    pub protocols: Vec<ProtocolKind>,
    pub trials: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    pub output_path: PathBuf,
}

// Every field is optional here so that validation can report all missing
// fields at once instead of stopping at the first.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n_pairs: Option<i64>,
    m_sampled: Option<i64>,
    noise: Option<RawNoise>,
    protocols: Option<Vec<ProtocolKind>>,
    trials: Option<i64>,
    seed: Option<u64>,
    sweep: Option<RawSweep>,
    output_path: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    kind: Option<NoiseKind>,
    p: Option<f64>,
    d: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    p: Option<Vec<f64>>,
    d: Option<Vec<f64>>,
}

/// One violated invariant, tagged with the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// JSON syntax or type error, with 1-based position.
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    Invalid(Vec<Issue>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, source } => {
                write!(f, "cannot read {}: {source}", path.display())
            }
            ConfigError::Parse {
                line,
                column,
                message,
            } => {
                write!(f, "line {line}, column {column}: {message}")
            }
            ConfigError::Invalid(issues) => {
                write!(f, "{} invalid field(s)", issues.len())?;
                for issue in issues {
                    write!(f, "\n  {issue}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// Reads and validates a config. `output` overrides `output_path` and
/// stands in for it when missing.
pub fn load(path: &Path, output: Option<&Path>) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text, output)
}

pub fn parse(text: &str, output: Option<&Path>) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    resolve(raw, output)
}

fn resolve(raw: RawConfig, output: Option<&Path>) -> Result<ExperimentConfig, ConfigError> {
    let mut issues = Vec::new();
    let mut issue = |field: &str, message: String| {
        issues.push(Issue {
            field: field.to_string(),
            message,
        })
    };

    let n_pairs = match raw.n_pairs {
        None => {
            issue("n_pairs", "missing".into());
            0
        }
        Some(n) if n < 2 => {
            issue("n_pairs", format!("must be at least 2, got {n}"));
            0
        }
        Some(n) => n as usize,
    };
    let m_sampled = match raw.m_sampled {
        None => {
            issue("m_sampled", "missing".into());
            0
        }
        Some(m) if m < 1 => {
            issue("m_sampled", format!("must be at least 1, got {m}"));
            0
        }
        Some(m) => {
            if n_pairs > 0 && m as usize >= n_pairs {
                issue(
                    "m_sampled",
                    format!("must be less than n_pairs ({n_pairs}), got {m}"),
                );
            }
            m as usize
        }
    };

    let trials = match raw.trials {
        None => DEFAULT_TRIALS,
        Some(t) if t < 1 => {
            issue("trials", format!("must be at least 1, got {t}"));
            0
        }
        Some(t) => t as u64,
    };

    let protocols = match raw.protocols {
        None => ProtocolKind::ALL.to_vec(),
        Some(list) => {
            if list.is_empty() {
                issue("protocols", "must not be empty".into());
            }
            for (i, k) in list.iter().enumerate() {
                if list[..i].contains(k) {
                    issue("protocols", format!("{k} listed more than once"));
                }
            }
            list
        }
    };

    // A swept coordinate may be omitted from `noise`; it then resolves to
    // the first grid value.
    let swept_p = raw
        .sweep
        .as_ref()
        .and_then(|s| s.p.as_ref()?.first().copied());
    let swept_d = raw
        .sweep
        .as_ref()
        .and_then(|s| s.d.as_ref()?.first().copied());
    let p_swept = raw.sweep.as_ref().is_some_and(|s| s.p.is_some());
    let d_swept = raw.sweep.as_ref().is_some_and(|s| s.d.is_some());

    let (kind, p, d) = match raw.noise {
        None => {
            issue("noise", "missing".into());
            (NoiseKind::Iid, 0.0, 0.0)
        }
        Some(noise) => {
            let kind = noise.kind.unwrap_or_else(|| {
                issue(
                    "noise.kind",
                    "missing; expected \"iid\" or \"correlated\"".into(),
                );
                NoiseKind::Iid
            });
            let p = noise.p.or(swept_p).unwrap_or_else(|| {
                issue("noise.p", "missing".into());
                0.0
            });
            let d = match (kind, noise.d) {
                (NoiseKind::Iid, Some(d)) if d != 0.0 => {
                    issue(
                        "noise.d",
                        format!(
                            "iid noise has no correlation degree, got {d}; use kind \"correlated\""
                        ),
                    );
                    0.0
                }
                (NoiseKind::Iid, _) => 0.0,
                (NoiseKind::Correlated, Some(d)) => d,
                (NoiseKind::Correlated, None) if d_swept => swept_d.unwrap_or(0.0),
                (NoiseKind::Correlated, None) => {
                    issue("noise.d", "missing; required for correlated noise".into());
                    0.0
                }
            };
            (kind, p, d)
        }
    };
    if kind == NoiseKind::Correlated && n_pairs > 0 && n_pairs % 4 != 0 {
        issue(
            "n_pairs",
            format!("n_pairs must be a multiple of 4 for correlated noise, got {n_pairs}"),
        );
    }

    let sweep = raw.sweep.map(|s| {
        if s.p.is_none() && s.d.is_none() {
            issue("sweep", "must list p values, d values or both".into());
        }
        if s.p.as_ref().is_some_and(Vec::is_empty) {
            issue("sweep.p", "must not be empty".into());
        }
        if s.d.as_ref().is_some_and(Vec::is_empty) {
            issue("sweep.d", "must not be empty".into());
        }
        if kind == NoiseKind::Iid && s.d.as_ref().is_some_and(|d| d.iter().any(|x| *x != 0.0)) {
            issue(
                "sweep.d",
                "iid noise has no correlation degree; use kind \"correlated\"".into(),
            );
        }
        Sweep {
            p: s.p.unwrap_or_else(|| vec![p]),
            d: s.d.unwrap_or_else(|| vec![d]),
        }
    });

    // Every grid point must describe valid channels.
    let (p_field, p_grid) = match &sweep {
        Some(s) if p_swept => ("sweep.p", s.p.clone()),
        _ => ("noise.p", vec![p]),
    };
    let (d_field, d_grid) = match &sweep {
        Some(s) if d_swept => ("sweep.d", s.d.clone()),
        _ => ("noise.d", vec![d]),
    };
    for &pv in &p_grid {
        if !(0.0..=1.0).contains(&pv) {
            issue(
                p_field,
                format!("noise intensity must lie in [0, 1], got {pv}"),
            );
        }
    }
    if kind == NoiseKind::Correlated {
        for &dv in &d_grid {
            if !(0.0..=1.0).contains(&dv) {
                issue(
                    d_field,
                    format!("correlation degree must lie in [0, 1], got {dv}"),
                );
            }
        }
        for &pv in p_grid.iter().filter(|v| (0.0..=1.0).contains(*v)) {
            for &dv in d_grid.iter().filter(|v| (0.0..=1.0).contains(*v)) {
                if NoiseParams::new(pv, dv).is_err() {
                    issue(
                        d_field,
                        format!(
                            "p = {pv}, d = {dv} is infeasible: p - d/2 and p + d/2 must lie in [0, 1]"
                        ),
                    );
                }
            }
        }
    }

    let output_path = output
        .map(Path::to_path_buf)
        .or(raw.output_path)
        .unwrap_or_else(|| {
            issue("output_path", "missing".into());
            PathBuf::new()
        });

    if !issues.is_empty() {
        return Err(ConfigError::Invalid(issues));
    }
    Ok(ExperimentConfig {
        n_pairs,
        m_sampled,
        noise: Noise { kind, p, d },
        protocols,
        trials,
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        sweep,
        output_path,
    })
}

impl ExperimentConfig {
    /// Grid of `(p, d)` values in sweep order: p outer, d inner.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        let (ps, ds) = match &self.sweep {
            Some(s) => (s.p.clone(), s.d.clone()),
            None => (vec![self.noise.p], vec![self.noise.d]),
        };
        ps.iter()
            .flat_map(|&p| ds.iter().map(move |&d| (p, d)))
            .collect()
    }
}
