//! Run records and their CSV persistence.
//!
//! One record per finished cell, keyed by (method, dataset, noise level,
//! sample, repetition). Records append to `records.csv` in the output
//! directory as cells finish; `wall_time_s` is a measurement, not part of
//! a record's deterministic identity.

use crate::datasets::Benchmark;
use crate::error::{Error, Result};
use crate::harness::plan::Method;
use crate::metrics::noise_permille;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: Method,
    pub dataset: Benchmark,
    pub noise_level: f64,
    pub sample_id: u32,
    pub rep_index: u32,
    pub seed: u64,
    pub final_train_nrmse: f64,
    pub final_test_nrmse: f64,
    pub wall_time_s: f64,
    pub config_hash: String,
}

/// Unique coordinates of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub method: Method,
    pub dataset: Benchmark,
    pub noise_permille: u32,
    pub sample_id: u32,
    pub rep_index: u32,
}

impl RunRecord {
    pub fn key(&self) -> CellKey {
        CellKey {
            method: self.method,
            dataset: self.dataset,
            noise_permille: noise_permille(self.noise_level),
            sample_id: self.sample_id,
            rep_index: self.rep_index,
        }
    }

    /// Bit-level equality of everything except the wall-time measurement.
    pub fn deterministic_eq(&self, other: &RunRecord) -> bool {
        self.key() == other.key()
            && self.seed == other.seed
            && self.noise_level.to_bits() == other.noise_level.to_bits()
            && self.final_train_nrmse.to_bits() == other.final_train_nrmse.to_bits()
            && self.final_test_nrmse.to_bits() == other.final_test_nrmse.to_bits()
            && self.config_hash == other.config_hash
    }
}

pub fn records_path(out_dir: &Path) -> PathBuf {
    out_dir.join("records.csv")
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut records = Vec::new();
    for row in reader.deserialize() {
        records.push(row?);
    }
    Ok(records)
}

/// Reads `records.csv` from an output directory.
pub fn read_records_dir(dir: &Path) -> Result<Vec<RunRecord>> {
    let path = records_path(dir);
    if !path.exists() {
        return Err(Error::IncompleteRecords(format!(
            "{} does not exist",
            path.display()
        )));
    }
    read_records(&path)
}

/// Appending CSV writer; emits the header only when creating the file.
pub struct RecordWriter {
    writer: csv::Writer<std::fs::File>,
}

impl RecordWriter {
    pub fn open(path: &Path) -> Result<Self> {
        let exists = path.exists();
        let file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        let writer = csv::WriterBuilder::new()
            .has_headers(!exists)
            .from_writer(file);
        Ok(RecordWriter { writer })
    }

    /// Serializes and flushes one record so interrupts lose at most the
    /// record being written.
    pub fn append(&mut self, record: &RunRecord) -> Result<()> {
        self.writer.serialize(record)?;
        self.writer
            .flush()
            .map_err(|e| Error::io("records.csv", e))?;
        Ok(())
    }
}

/// Keys already persisted in a record set.
pub fn existing_keys(records: &[RunRecord]) -> HashSet<CellKey> {
    records.iter().map(RunRecord::key).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(rep: u32) -> RunRecord {
        RunRecord {
            method: Method::Gsgp,
            dataset: Benchmark::Keijzer7,
            noise_level: 0.06,
            sample_id: 0,
            rep_index: rep,
            seed: 0xDEAD_BEEF,
            final_train_nrmse: 0.123456789012345,
            final_test_nrmse: 1.0 / 3.0,
            wall_time_s: 2.5,
            config_hash: "ab12".into(),
        }
    }

    #[test]
    fn csv_round_trip_preserves_every_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = records_path(dir.path());
        let mut w = RecordWriter::open(&path).unwrap();
        for rep in 0..3 {
            w.append(&record(rep)).unwrap();
        }
        drop(w);
        let back = read_records(&path).unwrap();
        assert_eq!(back.len(), 3);
        for (rep, r) in back.iter().enumerate() {
            assert_eq!(r, &record(rep as u32));
        }
    }

    #[test]
    fn append_mode_does_not_duplicate_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = records_path(dir.path());
        {
            let mut w = RecordWriter::open(&path).unwrap();
            w.append(&record(0)).unwrap();
        }
        {
            let mut w = RecordWriter::open(&path).unwrap();
            w.append(&record(1)).unwrap();
        }
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text.lines().filter(|l| l.starts_with("method")).count(),
            1,
            "exactly one header line"
        );
        assert_eq!(read_records(&path).unwrap().len(), 2);
    }

    #[test]
    fn deterministic_eq_ignores_wall_time() {
        let a = record(0);
        let mut b = record(0);
        b.wall_time_s = 99.0;
        assert!(a.deterministic_eq(&b));
        b.final_test_nrmse += 1e-16;
        assert!(a.deterministic_eq(&b) == (a.final_test_nrmse.to_bits() == b.final_test_nrmse.to_bits()));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn serialization_round_trips(
                train in proptest::num::f64::POSITIVE | proptest::num::f64::ZERO,
                test in proptest::num::f64::POSITIVE | proptest::num::f64::ZERO,
                seed in proptest::num::u64::ANY,
                rep in 0u32..100,
            ) {
                let dir = tempfile::tempdir().unwrap();
                let path = records_path(dir.path());
                let rec = RunRecord {
                    method: Method::Gp,
                    dataset: Benchmark::Vladislavleva5,
                    noise_level: 0.02,
                    sample_id: 3,
                    rep_index: rep,
                    seed,
                    final_train_nrmse: train,
                    final_test_nrmse: test,
                    wall_time_s: 0.25,
                    config_hash: "cafe".into(),
                };
                let mut w = RecordWriter::open(&path).unwrap();
                w.append(&rec).unwrap();
                drop(w);
                let back = read_records(&path).unwrap();
                prop_assert_eq!(&back[0], &rec);
            }
        }
    }
}
