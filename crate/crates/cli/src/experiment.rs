//! Sweep execution and CSV output.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use bellfid_core::rng::derive_seed;
use bellfid_core::{
    correlated_model, iid_model, monte_carlo_error, ErrorReport, MixtureOfProducts, NoiseParams,
    ProtocolKind,
};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, NoiseKind};

pub const CSV_HEADER: [&str; 14] = [
    "p",
    "d",
    "protocol",
    "n_pairs",
    "m_sampled",
    "trials",
    "seed",
    "mse",
    "mse_stderr",
    "bias",
    "bias_stderr",
    "analytic_bound",
    "measurement_error",
    "sampling_error",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub index: u64,
    pub p: f64,
    pub d: f64,
    pub protocol: ProtocolKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub point: GridPoint,
    pub report: ErrorReport,
}

/// Grid points in output order: p, then d, then protocol.
pub fn grid_points(config: &ExperimentConfig) -> Vec<GridPoint> {
    config
        .grid()
        .into_iter()
        .flat_map(|(p, d)| config.protocols.iter().map(move |&k| (p, d, k)))
        .enumerate()
        .map(|(i, (p, d, protocol))| GridPoint {
            index: i as u64,
            p,
            d,
            protocol,
        })
        .collect()
}

/// Noise model at one grid point. Identical mixture components are merged,
/// so correlated noise with `d = 0` is treated as independent noise.
pub fn model_at(config: &ExperimentConfig, p: f64, d: f64) -> Result<MixtureOfProducts> {
    let model = match config.noise.kind {
        NoiseKind::Iid => iid_model(p, config.n_pairs)?,
        NoiseKind::Correlated => correlated_model(NoiseParams::new(p, d)?, config.n_pairs)?,
    };
    Ok(model.merge_identical())
}

/// Runs every grid point. Point `i` uses the base seed
/// `derive_seed(seed, i)`, so rows do not depend on scheduling.
pub fn run(config: &ExperimentConfig) -> Result<Vec<Row>> {
    grid_points(config)
        .into_par_iter()
        .map(|point| {
            let model = model_at(config, point.p, point.d)?;
            let report = monte_carlo_error(
                &model,
                config.m_sampled,
                point.protocol,
                config.trials,
                derive_seed(config.seed, point.index),
            )
            .with_context(|| {
                format!(
                    "grid point p = {}, d = {}, {}",
                    point.p, point.d, point.protocol
                )
            })?;
            Ok(Row { point, report })
        })
        .collect()
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn optional(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

pub fn write_csv<W: Write>(config: &ExperimentConfig, rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        let r = &row.report;
        let decomposition = r.decomposition;
        w.write_record([
            float(row.point.p),
            float(row.point.d),
            row.point.protocol.name().to_string(),
            config.n_pairs.to_string(),
            config.m_sampled.to_string(),
            r.trials.to_string(),
            config.seed.to_string(),
            float(r.mse),
            float(r.mse_stderr),
            float(r.bias),
            float(r.bias_stderr),
            optional(r.analytic_bound),
            optional(decomposition.map(|d| d.measurement_error)),
            optional(decomposition.map(|d| d.sampling_error)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the sweep and writes the CSV to `path`. The file is written only
/// once every grid point has finished.
pub fn run_to_file(config: &ExperimentConfig, path: &Path) -> Result<usize> {
    let rows = run(config)?;
    let mut buf = Vec::new();
    write_csv(config, &rows, &mut buf)?;
    std::fs::write(path, buf).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(rows.len())
}
