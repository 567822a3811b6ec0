//! File formats: binary datasets with JSON sidecars, trace CSVs, report
//! JSON. Every writer is deterministic — identical inputs produce
//! byte-identical files; wall-clock metadata lives in `meta.json` only.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use lwa_mcmc::samplers::{Trace, TraceRow};
use lwa_mcmc::{Dataset, Flavor};

pub const DATASET_BIN: &str = "dataset.bin";
pub const DATASET_META: &str = "dataset.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub n: usize,
    pub dim: usize,
    pub flavor: String,
    pub has_labels: bool,
    pub seed: u64,
    pub model: serde_json::Value,
    pub sha256: String,
}

fn flavor_str(flavor: Flavor) -> &'static str {
    match flavor {
        Flavor::Iid => "iid",
        Flavor::TimeSeries => "time_series",
    }
}

fn parse_flavor(s: &str) -> Result<Flavor> {
    match s {
        "iid" => Ok(Flavor::Iid),
        "time_series" => Ok(Flavor::TimeSeries),
        other => Err(anyhow!("unknown flavor {other}")),
    }
}

/// Little-endian payload: `n * dim` f64 observations, then `n` u32 labels
/// when present.
fn dataset_payload(data: &Dataset) -> Vec<u8> {
    let mut payload = Vec::with_capacity(data.raw().len() * 8);
    for v in data.raw() {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    if let Some(labels) = data.labels() {
        for l in labels {
            payload.extend_from_slice(&l.to_le_bytes());
        }
    }
    payload
}

pub fn write_dataset(
    dir: &Path,
    data: &Dataset,
    seed: u64,
    model: serde_json::Value,
) -> Result<DatasetMeta> {
    fs::create_dir_all(dir)?;
    let payload = dataset_payload(data);
    let sha256 = hex_digest(&payload);
    fs::write(dir.join(DATASET_BIN), &payload)
        .with_context(|| format!("writing {}", dir.join(DATASET_BIN).display()))?;
    let meta = DatasetMeta {
        n: data.len(),
        dim: data.dim(),
        flavor: flavor_str(data.flavor()).to_string(),
        has_labels: data.labels().is_some(),
        seed,
        model,
        sha256,
    };
    write_json(&dir.join(DATASET_META), &meta)?;
    Ok(meta)
}

pub fn read_dataset(dir: &Path) -> Result<(Dataset, DatasetMeta)> {
    let meta: DatasetMeta = read_json(&dir.join(DATASET_META))?;
    let payload = fs::read(dir.join(DATASET_BIN))
        .with_context(|| format!("reading {}", dir.join(DATASET_BIN).display()))?;
    if hex_digest(&payload) != meta.sha256 {
        return Err(anyhow!("dataset payload checksum mismatch in {}", dir.display()));
    }
    let value_bytes = meta.n * meta.dim * 8;
    let label_bytes = if meta.has_labels { meta.n * 4 } else { 0 };
    if payload.len() != value_bytes + label_bytes {
        return Err(anyhow!(
            "dataset payload is {} bytes, expected {}",
            payload.len(),
            value_bytes + label_bytes
        ));
    }
    let values: Vec<f64> = payload[..value_bytes]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let labels = meta.has_labels.then(|| {
        payload[value_bytes..]
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect::<Vec<u32>>()
    });
    let data = Dataset::new(values, meta.dim, labels, parse_flavor(&meta.flavor)?)
        .map_err(|e| anyhow!("invalid dataset payload: {e}"))?;
    Ok((data, meta))
}

fn hex_digest(payload: &[u8]) -> String {
    let digest = Sha256::digest(payload);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Trace CSV column order (fixed, documented in the README):
/// iteration, lik_evals, stat_touches, data_used, theta_0..theta_{d-1},
/// accepted_theta, refreshed_subset.
pub fn write_trace_csv(path: &Path, trace: &Trace) -> Result<()> {
    let file = fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    write!(w, "iteration,lik_evals,stat_touches,data_used")?;
    for d in 0..trace.param_dim {
        write!(w, ",theta_{d}")?;
    }
    writeln!(w, ",accepted_theta,refreshed_subset")?;
    for row in &trace.rows {
        write!(
            w,
            "{},{},{},{}",
            row.iteration, row.lik_evals, row.stat_touches, row.data_used
        )?;
        for v in &row.theta {
            write!(w, ",{v}")?;
        }
        writeln!(
            w,
            ",{},{}",
            u8::from(row.accepted_theta),
            u8::from(row.refreshed_subset)
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_csv(path: &Path) -> Result<Trace> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let param_dim = headers.iter().filter(|h| h.starts_with("theta_")).count();
    if param_dim == 0 {
        return Err(anyhow!("{} has no theta columns", path.display()));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let get = |i: usize| -> Result<&str> {
            record.get(i).ok_or_else(|| anyhow!("short row in {}", path.display()))
        };
        let mut theta = Vec::with_capacity(param_dim);
        for d in 0..param_dim {
            theta.push(get(4 + d)?.parse::<f64>()?);
        }
        rows.push(TraceRow {
            iteration: get(0)?.parse()?,
            lik_evals: get(1)?.parse()?,
            stat_touches: get(2)?.parse()?,
            data_used: get(3)?.parse()?,
            theta,
            accepted_theta: get(4 + param_dim)? == "1",
            refreshed_subset: get(5 + param_dim)? == "1",
        });
    }
    Ok(Trace { param_dim, rows })
}

/// Per-replication summary statistics recorded next to the traces.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicationSummary {
    pub replication: u32,
    pub stream_id: u64,
    pub iterations: u64,
    pub lik_evals: u64,
    pub stat_touches: u64,
    pub cost_units: u64,
    pub acceptance_rate: f64,
    pub refresh_rate: f64,
    pub mean_data_used: f64,
    pub posterior_mean: Vec<f64>,
    pub posterior_sd: Vec<f64>,
}

impl ReplicationSummary {
    pub fn from_trace(trace: &Trace, replication: u32, stream_id: u64, burn_in: u64) -> Self {
        let burn = if burn_in as usize >= trace.len() { 0 } else { burn_in };
        let rows = trace.post_burn_in(burn).expect("non-empty trace");
        let mean_data_used =
            rows.iter().map(|r| r.data_used as f64).sum::<f64>() / rows.len() as f64;
        let (lik_evals, stat_touches) = trace.total_cost();
        Self {
            replication,
            stream_id,
            iterations: trace.len() as u64,
            lik_evals,
            stat_touches,
            cost_units: lik_evals + stat_touches,
            acceptance_rate: trace.acceptance_rate(burn).expect("non-empty trace"),
            refresh_rate: trace.refresh_rate(burn).expect("non-empty trace"),
            mean_data_used,
            posterior_mean: trace.posterior_mean(burn).expect("non-empty trace"),
            posterior_sd: trace.posterior_sd(burn).expect("non-empty trace"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub sampler: String,
    pub burn_in: u64,
    pub replications: Vec<ReplicationSummary>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut buf = serde_json::to_vec_pretty(value)?;
    buf.push(b'\n');
    fs::write(path, buf).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let raw = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&raw)?)
}

pub fn trace_path(dir: &Path, replication: u32) -> PathBuf {
    dir.join(format!("trace_{replication:03}.csv"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use lwa_mcmc::RngStream;

    #[test]
    fn dataset_round_trip() {
        let mut rng = RngStream::new(1);
        let data =
            lwa_mcmc::models::simulate_gaussmix(50, [-1.0, 0.0], [1.0, 0.0], 0.25, 0.25, &mut rng);
        let dir = tempfile::tempdir().unwrap();
        let meta = write_dataset(dir.path(), &data, 1, serde_json::json!({"kind": "gaussmix"}))
            .unwrap();
        assert!(meta.has_labels);
        let (back, meta2) = read_dataset(dir.path()).unwrap();
        assert_eq!(back.raw(), data.raw());
        assert_eq!(back.labels(), data.labels());
        assert_eq!(meta.sha256, meta2.sha256);
    }

    #[test]
    fn corrupted_dataset_is_rejected() {
        let mut rng = RngStream::new(2);
        let data = lwa_mcmc::models::simulate_probit(20, 0.5, 1.0, &mut rng);
        let dir = tempfile::tempdir().unwrap();
        write_dataset(dir.path(), &data, 2, serde_json::json!({})).unwrap();
        let bin = dir.path().join(DATASET_BIN);
        let mut payload = fs::read(&bin).unwrap();
        payload[3] ^= 0xff;
        fs::write(&bin, payload).unwrap();
        assert!(read_dataset(dir.path()).is_err());
    }

    #[test]
    fn trace_round_trip_preserves_values() {
        let trace = Trace {
            param_dim: 2,
            rows: vec![
                TraceRow {
                    iteration: 1,
                    lik_evals: 10,
                    stat_touches: 5,
                    data_used: 5,
                    theta: vec![0.1, -2.5e-9],
                    accepted_theta: true,
                    refreshed_subset: false,
                },
                TraceRow {
                    iteration: 2,
                    lik_evals: 20,
                    stat_touches: 10,
                    data_used: 5,
                    theta: vec![std::f64::consts::PI, 1.0 / 3.0],
                    accepted_theta: false,
                    refreshed_subset: true,
                },
            ],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        write_trace_csv(&path, &trace).unwrap();
        let back = read_trace_csv(&path).unwrap();
        assert_eq!(back.param_dim, 2);
        assert_eq!(back.rows, trace.rows);
    }
}
