//! Recording ingest and export.
//!
//! Two on-disk layouts are supported, each with a JSON sidecar next to the
//! data file (same stem, `.json` extension):
//!
//! * CSV: header `ch0,ch1,...`, one row per sample instant. Sidecar carries
//!   `sample_rate_hz`.
//! * Raw: little-endian `f32`, channel-interleaved. Sidecar carries
//!   `channels` and `sample_rate_hz`.
//!
//! Sidecars may carry extra keys (e.g. `label`); they are preserved in
//! [`Sidecar::extra`].

use super::{Recording, SignalError};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub sample_rate_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channels: Option<usize>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

pub fn sidecar_path(data: &Path) -> PathBuf {
    data.with_extension("json")
}

pub fn read_sidecar(data: &Path) -> Result<Sidecar, SignalError> {
    let path = sidecar_path(data);
    let text = fs::read_to_string(&path)
        .map_err(|e| SignalError::Ingest(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| SignalError::Ingest(format!("{}: {e}", path.display())))
}

pub fn write_sidecar(data: &Path, sidecar: &Sidecar) -> Result<(), SignalError> {
    let text = serde_json::to_string_pretty(sidecar).map_err(|e| SignalError::Ingest(e.to_string()))?;
    fs::write(sidecar_path(data), text).map_err(|e| SignalError::Ingest(e.to_string()))
}

fn ingest_err(path: &Path, e: impl std::fmt::Display) -> SignalError {
    SignalError::Ingest(format!("{}: {e}", path.display()))
}

pub fn read_csv(path: &Path) -> Result<(Recording, Sidecar), SignalError> {
    let sidecar = read_sidecar(path)?;
    let mut reader = csv::Reader::from_path(path).map_err(|e| ingest_err(path, e))?;
    let headers = reader.headers().map_err(|e| ingest_err(path, e))?.clone();
    for (i, h) in headers.iter().enumerate() {
        if h.trim() != format!("ch{i}") {
            return Err(ingest_err(path, format!("unexpected header column {h:?}")));
        }
    }
    let q = headers.len();
    let mut channels = vec![Vec::new(); q];
    for record in reader.records() {
        let record = record.map_err(|e| ingest_err(path, e))?;
        for (ch, field) in channels.iter_mut().zip(record.iter()) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|e| ingest_err(path, format!("{field:?}: {e}")))?;
            ch.push(v);
        }
    }
    Ok((Recording::from_channels(channels, sidecar.sample_rate_hz)?, sidecar))
}

pub fn write_csv(path: &Path, rec: &Recording, sidecar: &Sidecar) -> Result<(), SignalError> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| ingest_err(path, e))?;
    let header: Vec<String> = (0..rec.channel_count()).map(|i| format!("ch{i}")).collect();
    writer.write_record(&header).map_err(|e| ingest_err(path, e))?;
    for col in rec.samples().columns() {
        writer
            .write_record(col.iter().map(|v| v.to_string()))
            .map_err(|e| ingest_err(path, e))?;
    }
    writer.flush().map_err(|e| ingest_err(path, e))?;
    write_sidecar(path, sidecar)
}

/// Decodes channel-interleaved little-endian `f32` samples.
pub fn decode_interleaved_f32(bytes: &[u8], channels: usize) -> Result<Vec<Vec<f64>>, SignalError> {
    if channels == 0 || bytes.len() % (4 * channels) != 0 {
        return Err(SignalError::Ingest(format!(
            "{} bytes is not a whole number of {channels}-channel f32 frames",
            bytes.len()
        )));
    }
    let mut out = vec![Vec::with_capacity(bytes.len() / 4 / channels); channels];
    for (i, chunk) in bytes.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().expect("chunk of 4"));
        out[i % channels].push(v as f64);
    }
    Ok(out)
}

pub fn encode_interleaved_f32(rec: &Recording) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(rec.len() * rec.channel_count() * 4);
    for col in rec.samples().columns() {
        for &v in col {
            bytes.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    bytes
}

pub fn read_raw(path: &Path) -> Result<(Recording, Sidecar), SignalError> {
    let sidecar = read_sidecar(path)?;
    let channels = sidecar
        .channels
        .ok_or_else(|| ingest_err(path, "sidecar lacks `channels`"))?;
    let mut bytes = Vec::new();
    BufReader::new(fs::File::open(path).map_err(|e| ingest_err(path, e))?)
        .read_to_end(&mut bytes)
        .map_err(|e| ingest_err(path, e))?;
    let data = decode_interleaved_f32(&bytes, channels)?;
    Ok((Recording::from_channels(data, sidecar.sample_rate_hz)?, sidecar))
}

pub fn write_raw(path: &Path, rec: &Recording, sidecar: &Sidecar) -> Result<(), SignalError> {
    let mut w = BufWriter::new(fs::File::create(path).map_err(|e| ingest_err(path, e))?);
    w.write_all(&encode_interleaved_f32(rec))
        .and_then(|_| w.flush())
        .map_err(|e| ingest_err(path, e))?;
    let mut sidecar = sidecar.clone();
    sidecar.channels = Some(rec.channel_count());
    write_sidecar(path, &sidecar)
}

/// Dispatches on extension: `.csv` or anything else as raw.
pub fn read_recording(path: &Path) -> Result<(Recording, Sidecar), SignalError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => read_csv(path),
        _ => read_raw(path),
    }
}
