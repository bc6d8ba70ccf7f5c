use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column order of the metrics CSV.
pub const METRICS_COLUMNS: [&str; 17] = [
    "period",
    "slot",
    "mt",
    "reward",
    "r_x",
    "r_l",
    "x_o",
    "l_o",
    "throughput",
    "link",
    "mcs",
    "level",
    "resource_fraction",
    "snr_db",
    "buffer_bytes",
    "epsilon",
    "avg_reward",
];

/// One MT in one monitoring slot.
///
/// `throughput` is in Mbps, `l_o` in seconds. `snr_db` is the SNR the slot
/// was transmitted under and `buffer_bytes` the queue left behind. `epsilon`
/// and `avg_reward` are the learner's values while the period ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub period: usize,
    pub slot: usize,
    pub mt: usize,
    pub reward: f64,
    pub r_x: f64,
    pub r_l: f64,
    pub x_o: f64,
    pub l_o: f64,
    pub throughput: f64,
    pub link: usize,
    pub mcs: usize,
    pub level: usize,
    pub resource_fraction: f64,
    pub snr_db: f64,
    pub buffer_bytes: u64,
    pub epsilon: f64,
    pub avg_reward: f64,
}

pub fn write_metrics<W: Write>(rows: &[MetricsRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metrics<R: Read>(input: R) -> Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != METRICS_COLUMNS {
        return Err(Error::Metrics(format!(
            "unexpected columns {header:?}, expected {METRICS_COLUMNS:?}"
        )));
    }
    Ok(r.deserialize()
        .collect::<std::result::Result<Vec<MetricsRow>, _>>()?)
}

pub fn write_metrics_file(rows: &[MetricsRow], path: &Path) -> Result<()> {
    write_metrics(rows, std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn read_metrics_file(path: &Path) -> Result<Vec<MetricsRow>> {
    read_metrics(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(slot: usize, mt: usize) -> MetricsRow {
        MetricsRow {
            period: slot,
            slot,
            mt,
            reward: 1.875,
            r_x: 0.9887165844441504,
            r_l: 0.1 + 0.2,
            x_o: 0.0,
            l_o: 0.0123,
            throughput: 1.0,
            link: 1,
            mcs: 7,
            level: 3,
            resource_fraction: 0.4,
            snr_db: 13.7,
            buffer_bytes: 1250,
            epsilon: 0.5 * 0.999,
            avg_reward: -0.25,
        }
    }

    #[test]
    fn header_and_roundtrip() {
        let rows = vec![row(0, 0), row(0, 1), row(1, 0)];
        let mut buf = Vec::new();
        write_metrics(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), METRICS_COLUMNS.join(","));
        assert_eq!(read_metrics(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn rejects_foreign_columns() {
        let text = "a,b\n1,2\n";
        assert!(matches!(
            read_metrics(text.as_bytes()),
            Err(Error::Metrics(_))
        ));
    }
}
