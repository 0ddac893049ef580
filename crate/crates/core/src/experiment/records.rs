//! JSON-lines record sink. One line per unit of work, flushed on write.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Status of one unit of work.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Converged,
    NotConverged,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::NotConverged => "not_converged",
        }
    }
}

/// Fields shared by every record of a run.
#[derive(Clone, Debug)]
pub struct RecordHeader {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    /// Seconds since the epoch from `SOURCE_DATE_EPOCH`; `None` otherwise so
    /// reruns stay byte-identical.
    pub timestamp: Option<i64>,
}

pub fn timestamp_from_env() -> Option<i64> {
    std::env::var("SOURCE_DATE_EPOCH").ok()?.trim().parse().ok()
}

pub struct RecordSink {
    out: BufWriter<File>,
    header: RecordHeader,
    written: usize,
}

impl RecordSink {
    /// Creates (truncates) the records file.
    pub fn create(path: &Path, header: RecordHeader) -> Result<Self> {
        let file = File::create(path)?;
        Ok(Self {
            out: BufWriter::new(file),
            header,
            written: 0,
        })
    }

    /// Appends one record. Keys of `metrics` must not collide with the
    /// header keys.
    pub fn write(&mut self, unit: &str, status: Status, metrics: Map<String, Value>) -> Result<()> {
        let mut rec = Map::new();
        rec.insert("experiment".into(), Value::from(self.header.experiment.clone()));
        rec.insert("unit".into(), Value::from(unit));
        rec.insert("timestamp".into(), self.header.timestamp.map_or(Value::Null, Value::from));
        rec.insert("config_hash".into(), Value::from(self.header.config_hash.clone()));
        rec.insert("seed".into(), Value::from(self.header.seed));
        rec.insert("status".into(), Value::from(status.as_str()));
        for (k, v) in metrics {
            if rec.contains_key(&k) {
                return Err(Error::InvalidInput(format!("metric '{k}' shadows a header field")));
            }
            rec.insert(k, v);
        }
        serde_json::to_writer(&mut self.out, &Value::Object(rec))?;
        self.out.write_all(b"\n")?;
        self.out.flush()?;
        self.written += 1;
        Ok(())
    }

    pub fn written(&self) -> usize {
        self.written
    }
}

/// Reads a records file. Blank lines are skipped; a malformed line is an
/// error carrying its line number.
pub fn read_records(path: &Path) -> Result<Vec<Map<String, Value>>> {
    let file = File::open(path)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Value>(&line) {
            Ok(Value::Object(m)) => out.push(m),
            Ok(_) => {
                return Err(Error::Config {
                    line: i + 1,
                    message: "record is not a JSON object".into(),
                })
            }
            Err(e) => {
                return Err(Error::Config {
                    line: i + 1,
                    message: format!("malformed record: {e}"),
                })
            }
        }
    }
    Ok(out)
}

/// Builds a metrics map from `(key, value)` pairs. Non-finite floats become
/// `null`.
#[macro_export]
macro_rules! metrics {
    ($($k:expr => $v:expr),* $(,)?) => {{
        let mut m = serde_json::Map::new();
        $( m.insert(String::from($k), serde_json::json!($v)); )*
        m
    }};
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lines_are_flushed_and_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        let header = RecordHeader {
            experiment: "weyl-sweep".into(),
            config_hash: "abc".into(),
            seed: 3,
            timestamp: None,
        };
        let mut sink = RecordSink::create(&path, header).unwrap();
        sink.write("h=0.4", Status::Converged, metrics! {"h" => 0.4, "rel_err" => f64::NAN})
            .unwrap();
        // readable before the sink is dropped
        let recs = read_records(&path).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0]["h"], 0.4);
        assert!(recs[0]["rel_err"].is_null());
        assert!(recs[0]["timestamp"].is_null());
        assert_eq!(recs[0]["status"], "converged");
        assert!(sink.write("x", Status::Converged, metrics! {"seed" => 1}).is_err());
        assert_eq!(sink.written(), 1);
    }

    #[test]
    fn malformed_line_is_located() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        std::fs::write(&path, "{\"a\":1}\n\n{oops\n").unwrap();
        match read_records(&path) {
            Err(Error::Config { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
