//! CSV tables from records files.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::experiment::records::read_records;

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

fn order(a: &Map<String, Value>, b: &Map<String, Value>) -> Ordering {
    let exp = |m: &Map<String, Value>| cell(m.get("experiment"));
    let h = |m: &Map<String, Value>| m.get("h").and_then(Value::as_f64);
    exp(a).cmp(&exp(b)).then_with(|| match (h(a), h(b)) {
        // descending h; records without h last
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    })
}

/// Writes the requested columns of every record to `out`, sorted by
/// experiment and then by descending `h` (stable otherwise). Returns the row
/// count. A column no record carries is an error listing the available ones.
pub fn emit_plot_data(records: &Path, columns: &[String], out: &Path) -> Result<usize> {
    if columns.is_empty() {
        return Err(Error::InvalidInput("no columns requested".into()));
    }
    let mut recs = read_records(records)?;
    if !recs.is_empty() {
        let available: BTreeSet<&str> = recs.iter().flat_map(|r| r.keys().map(String::as_str)).collect();
        let missing: Vec<&str> = columns
            .iter()
            .map(String::as_str)
            .filter(|c| !available.contains(c))
            .collect();
        if !missing.is_empty() {
            return Err(Error::InvalidInput(format!(
                "unknown column(s) {}; available: {}",
                missing.join(", "),
                available.into_iter().collect::<Vec<_>>().join(", ")
            )));
        }
    }
    recs.sort_by(order);
    let mut w = csv::Writer::from_path(out).map_err(csv_err)?;
    w.write_record(columns).map_err(csv_err)?;
    for r in &recs {
        w.write_record(columns.iter().map(|c| cell(r.get(c)))).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(recs.len())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
