//! Experiment harness: batch generation, parallel QAOA runs over both
//! encodings, CSV records, and per-encoding relative-error and
//! evaluation-count distributions.
//!
//! Records are plain CSV with a frozen column order
//! (`instance_id,seed,encoding,p,optimal_cost,found_cost,relative_error,eval_count,wall_time_ms`),
//! sorted by `(instance_id, encoding)`. Per-record determinism comes from
//! per-instance seeds drawn up front from the master seed, so worker count
//! and scheduling never change the output. Wall-clock timing is off by
//! default precisely so that re-running a config reproduces the records file
//! byte for byte; enable it when runtime numbers matter more than
//! reproducibility.

pub mod verify;

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::EncodingKind;
use crate::exact::held_karp;
use crate::instance::TspInstance;
use crate::qaoa::{self, CostForm, OptimizerKind, QaoaConfig};
use crate::{Error, Result};

/// XOR salt separating the angle-init RNG stream from the instance stream.
pub const ANGLE_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Histogram bin width for relative errors.
pub const RELATIVE_ERROR_BIN_WIDTH: f64 = 0.05;
/// Histogram bin width for evaluation counts.
pub const EVAL_COUNT_BIN_WIDTH: f64 = 5.0;

/// Batch settings; the TOML config file maps onto this struct field by
/// field, and every field has a default so partial files work.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Number of random instances.
    pub count: usize,
    pub n: usize,
    pub weight_lo: u32,
    pub weight_hi: u32,
    pub encodings: Vec<EncodingKind>,
    pub layers: usize,
    pub optimizer: OptimizerKind,
    pub max_evals: usize,
    pub cost_form: CostForm,
    pub master_seed: u64,
    /// Worker threads; 0 means all available cores.
    pub workers: usize,
    /// Record wall-clock time per run. Off by default so records files are
    /// byte-reproducible.
    pub record_wall_time: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            count: 1000,
            n: 4,
            weight_lo: 1,
            weight_hi: 20,
            encodings: vec![EncodingKind::Edge, EncodingKind::OneHot],
            layers: qaoa::DEFAULT_LAYERS,
            optimizer: OptimizerKind::Cobyla,
            max_evals: qaoa::DEFAULT_MAX_EVALS,
            cost_form: CostForm::Plain,
            master_seed: 0,
            workers: 0,
            record_wall_time: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::BadConfig("count must be at least 1".into()));
        }
        if self.encodings.is_empty() {
            return Err(Error::BadConfig("at least one encoding required".into()));
        }
        let mut seen = self.encodings.clone();
        seen.sort_by_key(|k| k.name());
        seen.dedup();
        if seen.len() != self.encodings.len() {
            return Err(Error::BadConfig("duplicate encodings in list".into()));
        }
        self.qaoa_config(EncodingKind::Edge, 0).validate()
    }

    /// Per-run QAOA settings for one instance seed.
    pub fn qaoa_config(&self, encoding: EncodingKind, instance_seed: u64) -> QaoaConfig {
        QaoaConfig {
            layers: self.layers,
            encoding,
            optimizer: self.optimizer,
            max_evals: self.max_evals,
            initial_angles: None,
            seed: instance_seed ^ ANGLE_SEED_SALT,
            cost_form: self.cost_form,
        }
    }

    /// Per-instance seeds, drawn up front from the master seed.
    pub fn instance_seeds(&self) -> Vec<u64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(self.master_seed);
        (0..self.count).map(|_| rng.gen()).collect()
    }
}

/// One row of the records CSV. A failed run (which a valid config should
/// never produce) is recorded with NaN costs rather than dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub instance_id: u64,
    pub seed: u64,
    pub encoding: EncodingKind,
    pub p: usize,
    pub optimal_cost: f64,
    pub found_cost: f64,
    pub relative_error: f64,
    pub eval_count: u64,
    pub wall_time_ms: f64,
}

impl ExperimentRecord {
    pub fn is_failure(&self) -> bool {
        self.relative_error.is_nan()
    }
}

/// Runs the whole batch; one record per (instance, encoding), sorted by
/// `(instance_id, encoding)`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    config.validate()?;
    let seeds = config.instance_seeds();
    let mut jobs = Vec::with_capacity(config.count * config.encodings.len());
    for (id, &seed) in seeds.iter().enumerate() {
        for &encoding in &config.encodings {
            jobs.push((id as u64, seed, encoding));
        }
    }

    let run_all = || {
        jobs.par_iter()
            .map(|&(instance_id, seed, encoding)| run_one(config, instance_id, seed, encoding))
            .collect::<Vec<ExperimentRecord>>()
    };
    let mut records = if config.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::BadConfig(format!("worker pool: {e}")))?;
        pool.install(run_all)
    } else {
        run_all()
    };
    records.sort_by(|a, b| {
        (a.instance_id, a.encoding.name()).cmp(&(b.instance_id, b.encoding.name()))
    });
    Ok(records)
}

fn run_one(
    config: &ExperimentConfig,
    instance_id: u64,
    seed: u64,
    encoding: EncodingKind,
) -> ExperimentRecord {
    let started = Instant::now();
    let outcome = TspInstance::generate_random(config.n, seed, config.weight_lo, config.weight_hi)
        .and_then(|inst| {
            let optimal = held_karp(&inst)?;
            let result = qaoa::optimize(&inst, &config.qaoa_config(encoding, seed))?;
            Ok((optimal.cost, result))
        });
    let wall_time_ms = if config.record_wall_time {
        started.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    match outcome {
        Ok((optimal_cost, result)) => ExperimentRecord {
            instance_id,
            seed,
            encoding,
            p: config.layers,
            optimal_cost,
            found_cost: result.found_cost,
            relative_error: result.relative_error,
            eval_count: result.eval_count as u64,
            wall_time_ms,
        },
        Err(_) => ExperimentRecord {
            instance_id,
            seed,
            encoding,
            p: config.layers,
            optimal_cost: f64::NAN,
            found_cost: f64::NAN,
            relative_error: f64::NAN,
            eval_count: 0,
            wall_time_ms,
        },
    }
}

pub fn write_records(path: &Path, records: &[ExperimentRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for record in records {
        writer
            .serialize(record)
            .map_err(|e| Error::Format(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut records = Vec::new();
    for row in reader.deserialize() {
        records.push(row.map_err(|e| Error::Format(e.to_string()))?);
    }
    Ok(records)
}

/// Fixed-width non-overlapping bins anchored at 0: bin `i` covers
/// `[i*w, (i+1)*w)`.
#[derive(Debug, Clone, Serialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub mean: f64,
    pub median: f64,
    pub total: u64,
}

impl Histogram {
    pub fn new(values: &[f64], bin_width: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyRecords);
        }
        let max = values.iter().cloned().fold(0.0f64, f64::max);
        let bins = (max / bin_width).floor() as usize + 1;
        let mut counts = vec![0u64; bins];
        for &v in values {
            let i = ((v / bin_width).floor() as usize).min(bins - 1);
            counts[i] += 1;
        }
        Ok(Self {
            bin_width,
            bin_edges: (0..=bins).map(|i| i as f64 * bin_width).collect(),
            counts,
            mean: mean(values),
            median: median(values),
            total: values.len() as u64,
        })
    }

    /// Index of the fullest bin; ties go to the lower bin.
    pub fn modal_bin(&self) -> usize {
        let mut best = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = i;
            }
        }
        best
    }
}

/// Per-encoding statistics over the successful records.
#[derive(Debug, Clone, Serialize)]
pub struct EncodingSummary {
    pub encoding: EncodingKind,
    pub runs: u64,
    pub failures: u64,
    pub mean_relative_error: f64,
    pub median_relative_error: f64,
    pub fraction_zero_error: f64,
    pub mean_eval_count: f64,
    pub median_eval_count: f64,
    pub mean_wall_time_ms: f64,
    pub relative_error_histogram: Histogram,
    pub eval_count_histogram: Histogram,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub per_encoding: Vec<EncodingSummary>,
}

impl Summary {
    pub fn encoding(&self, kind: EncodingKind) -> Option<&EncodingSummary> {
        self.per_encoding.iter().find(|s| s.encoding == kind)
    }
}

/// Aggregates records into per-encoding histograms and statistics.
pub fn summarize(records: &[ExperimentRecord]) -> Result<Summary> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut kinds: Vec<EncodingKind> = records.iter().map(|r| r.encoding).collect();
    kinds.sort_by_key(|k| k.name());
    kinds.dedup();

    let mut per_encoding = Vec::new();
    for kind in kinds {
        let rows: Vec<&ExperimentRecord> = records.iter().filter(|r| r.encoding == kind).collect();
        let good: Vec<&ExperimentRecord> =
            rows.iter().copied().filter(|r| !r.is_failure()).collect();
        if good.is_empty() {
            return Err(Error::EmptyRecords);
        }
        let errors: Vec<f64> = good.iter().map(|r| r.relative_error).collect();
        let evals: Vec<f64> = good.iter().map(|r| r.eval_count as f64).collect();
        let times: Vec<f64> = good.iter().map(|r| r.wall_time_ms).collect();
        let zero = good.iter().filter(|r| r.relative_error == 0.0).count();
        per_encoding.push(EncodingSummary {
            encoding: kind,
            runs: rows.len() as u64,
            failures: (rows.len() - good.len()) as u64,
            mean_relative_error: mean(&errors),
            median_relative_error: median(&errors),
            fraction_zero_error: zero as f64 / good.len() as f64,
            mean_eval_count: mean(&evals),
            median_eval_count: median(&evals),
            mean_wall_time_ms: mean(&times),
            relative_error_histogram: Histogram::new(&errors, RELATIVE_ERROR_BIN_WIDTH)?,
            eval_count_histogram: Histogram::new(&evals, EVAL_COUNT_BIN_WIDTH)?,
        });
    }
    Ok(Summary { per_encoding })
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) / 2.0
    }
}

pub fn write_summary_json(path: &Path, summary: &Summary) -> Result<()> {
    let text = serde_json::to_string_pretty(summary).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

/// One CSV with all histogram bins: `metric,encoding,bin_lo,bin_hi,count`.
pub fn write_histograms_csv(path: &Path, summary: &Summary) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer
        .write_record(["metric", "encoding", "bin_lo", "bin_hi", "count"])
        .map_err(|e| Error::Format(e.to_string()))?;
    for s in &summary.per_encoding {
        for (metric, hist) in [
            ("relative_error", &s.relative_error_histogram),
            ("eval_count", &s.eval_count_histogram),
        ] {
            for (i, &count) in hist.counts.iter().enumerate() {
                writer
                    .write_record([
                        metric,
                        s.encoding.name(),
                        &hist.bin_edges[i].to_string(),
                        &hist.bin_edges[i + 1].to_string(),
                        &count.to_string(),
                    ])
                    .map_err(|e| Error::Format(e.to_string()))?;
            }
        }
    }
    writer.flush()?;
    Ok(())
}
