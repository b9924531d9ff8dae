//! Flat per-sweep-point rows and their CSV/JSON encodings.

use std::io::{Read, Write};

use igs_core::SweepResult;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 11] = [
    "alpha",
    "snr_pu_db",
    "snr_su_db",
    "mean_r_su_proper",
    "mean_r_su_improper",
    "relative_gain_pct",
    "fraction_improper_beneficial",
    "se_proper",
    "se_improper",
    "trials",
    "seed",
];

/// One sweep point. `relative_gain_pct` is empty (CSV) or null (JSON) when
/// the proper mean rate is zero but the improper one is not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub alpha: f64,
    pub snr_pu_db: f64,
    pub snr_su_db: f64,
    pub mean_r_su_proper: f64,
    pub mean_r_su_improper: f64,
    pub relative_gain_pct: Option<f64>,
    pub fraction_improper_beneficial: f64,
    pub se_proper: f64,
    pub se_improper: f64,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SweepDocument {
    pub schema_version: u32,
    pub records: Vec<OutputRecord>,
}

/// Pairs each result point with the dB values the sweep was requested in.
pub fn records_from_sweep(result: &SweepResult, snr_pu_db: &[f64], snr_su_db: &[f64]) -> Vec<OutputRecord> {
    assert_eq!(result.points.len(), snr_pu_db.len() * snr_su_db.len());
    result
        .points
        .iter()
        .enumerate()
        .map(|(k, p)| OutputRecord {
            alpha: result.alpha,
            snr_pu_db: snr_pu_db[k / snr_su_db.len()],
            snr_su_db: snr_su_db[k % snr_su_db.len()],
            mean_r_su_proper: p.mean_r_su_proper,
            mean_r_su_improper: p.mean_r_su_improper,
            relative_gain_pct: p.relative_gain_pct,
            fraction_improper_beneficial: p.fraction_improper_beneficial,
            se_proper: p.se_proper,
            se_improper: p.se_improper,
            trials: result.trials as u64,
            seed: result.seed,
        })
        .collect()
}

/// 17 significant digits; enough to round-trip any `f64`.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(writer: W, records: &[OutputRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            sig17(r.alpha),
            sig17(r.snr_pu_db),
            sig17(r.snr_su_db),
            sig17(r.mean_r_su_proper),
            sig17(r.mean_r_su_improper),
            r.relative_gain_pct.map(sig17).unwrap_or_default(),
            sig17(r.fraction_improper_beneficial),
            sig17(r.se_proper),
            sig17(r.se_improper),
            r.trials.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> csv::Result<Vec<OutputRecord>> {
    csv::Reader::from_reader(reader).deserialize().collect()
}

pub fn write_json<W: Write>(mut writer: W, records: &[OutputRecord]) -> std::io::Result<()> {
    let doc = SweepDocument {
        schema_version: SCHEMA_VERSION,
        records: records.to_vec(),
    };
    serde_json::to_writer_pretty(&mut writer, &doc)?;
    writeln!(writer)
}
