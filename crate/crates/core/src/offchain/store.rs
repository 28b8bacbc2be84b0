use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::KvMap;
use crate::crypto::Digest32;

use super::{decode_record, encode_record, Anchor, OffchainError, SettlementRecord};

/// `<base>.log` and `<base>.manifest`.
pub fn store_paths(base: &Path) -> (PathBuf, PathBuf) {
    let with = |ext: &str| {
        let mut s = base.as_os_str().to_owned();
        s.push(ext);
        PathBuf::from(s)
    };
    (with(".log"), with(".manifest"))
}

/// Append-only writer of canonical-hex record lines.
pub struct RecordLog {
    out: BufWriter<File>,
    count: usize,
}

impl RecordLog {
    /// Opens `path` for appending, creating it if missing.
    pub fn open(path: &Path) -> Result<Self, OffchainError> {
        let existing = if path.exists() { read_log(path)?.len() } else { 0 };
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self { out: BufWriter::new(file), count: existing })
    }

    pub fn append(&mut self, record: &SettlementRecord) -> Result<usize, OffchainError> {
        writeln!(self.out, "{}", hex::encode(encode_record(record)?))?;
        self.count += 1;
        Ok(self.count - 1)
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn flush(&mut self) -> Result<(), OffchainError> {
        self.out.flush()?;
        Ok(())
    }
}

pub fn read_log(path: &Path) -> Result<Vec<SettlementRecord>, OffchainError> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        if let Some(r) = parse_log_line(i + 1, &line?)? {
            records.push(r);
        }
    }
    Ok(records)
}

/// The log body for `records`, one hex line each.
pub fn log_text(records: &[SettlementRecord]) -> Result<String, OffchainError> {
    let mut out = String::with_capacity(records.len() * (2 * super::ENCODED_LEN + 1));
    for r in records {
        out.push_str(&hex::encode(encode_record(r)?));
        out.push('\n');
    }
    Ok(out)
}

/// Parses log text; blank lines and `#` comment lines are skipped.
pub fn parse_log(text: &str) -> Result<Vec<SettlementRecord>, OffchainError> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(r) = parse_log_line(i + 1, line)? {
            records.push(r);
        }
    }
    Ok(records)
}

fn parse_log_line(line_no: usize, line: &str) -> Result<Option<SettlementRecord>, OffchainError> {
    let line = line.trim();
    if line.is_empty() || line.starts_with('#') {
        return Ok(None);
    }
    let err = |message: String| OffchainError::Log { line: line_no, message };
    let bytes = hex::decode(line).map_err(|e| err(e.to_string()))?;
    decode_record(&bytes).map(Some).map_err(|e| err(e.to_string()))
}

/// Sidecar describing a record log: provenance plus the record-to-anchor map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub seed: u64,
    pub config_digest: Digest32,
    pub count: usize,
    /// `anchors[i]` anchors record `i`.
    pub anchors: Vec<Anchor>,
}

impl Manifest {
    pub fn to_text(&self) -> String {
        let mut out = format!("seed={}\nconfig_digest={}\ncount={}\n", self.seed, self.config_digest, self.count);
        for (i, a) in self.anchors.iter().enumerate() {
            out.push_str(&format!("anchor.{i}={a}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, OffchainError> {
        let mut kv = KvMap::parse(text).map_err(|e| OffchainError::Manifest(e.to_string()))?;
        let mut take = |key: &str| kv.take(key).ok_or_else(|| OffchainError::Manifest(format!("missing `{key}`")));
        let bad = |key: &str| OffchainError::Manifest(format!("bad `{key}`"));
        let seed = take("seed")?.parse().map_err(|_| bad("seed"))?;
        let config_digest = take("config_digest")?.parse().map_err(|_| bad("config_digest"))?;
        let count: usize = take("count")?.parse().map_err(|_| bad("count"))?;
        let mut anchors = Vec::new();
        while let Some(raw) = kv.take(&format!("anchor.{}", anchors.len())) {
            anchors.push(raw.parse()?);
        }
        kv.ensure_empty().map_err(|e| OffchainError::Manifest(e.to_string()))?;
        Ok(Self { seed, config_digest, count, anchors })
    }
}

/// Writes a fresh log and manifest under `base`, replacing any previous pair.
pub fn write_store(base: &Path, records: &[SettlementRecord], manifest: &Manifest) -> Result<(), OffchainError> {
    if manifest.count != records.len() {
        return Err(OffchainError::Manifest(format!(
            "count {} does not match {} records",
            manifest.count,
            records.len()
        )));
    }
    let (log_path, manifest_path) = store_paths(base);
    if log_path.exists() {
        std::fs::remove_file(&log_path)?;
    }
    let mut log = RecordLog::open(&log_path)?;
    for r in records {
        log.append(r)?;
    }
    log.flush()?;
    std::fs::write(manifest_path, manifest.to_text())?;
    Ok(())
}

pub fn read_store(base: &Path) -> Result<(Vec<SettlementRecord>, Manifest), OffchainError> {
    let (log_path, manifest_path) = store_paths(base);
    let records = read_log(&log_path)?;
    let manifest = Manifest::parse(&std::fs::read_to_string(manifest_path)?)?;
    if manifest.count != records.len() {
        return Err(OffchainError::Manifest(format!(
            "manifest count {} but log holds {}",
            manifest.count,
            records.len()
        )));
    }
    Ok((records, manifest))
}
