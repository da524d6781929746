//! Time series CSV ingestion and emission.
//!
//! Input files need a header row. The value column is chosen by name; a `t`
//! or `timestamp` column, when present, must be strictly increasing. An
//! `is_anomaly` (or `label`) column is kept as per-sample metadata. Errors
//! name the 1-based line of the offending row in the file.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::series::{Origin, TimeSeries};

const TIME_COLUMNS: [&str; 2] = ["t", "timestamp"];
const LABEL_COLUMNS: [&str; 2] = ["is_anomaly", "label"];

pub fn load_csv(path: impl AsRef<Path>, column: &str) -> Result<TimeSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_series_csv(file, column)
}

#[derive(PartialEq, PartialOrd)]
enum Stamp {
    Num(f64),
    Text(String),
}

impl Stamp {
    fn parse(s: &str) -> Self {
        match s.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => Stamp::Num(v),
            _ => Stamp::Text(s.trim().to_owned()),
        }
    }

    fn increases_from(&self, prev: &Stamp) -> bool {
        match (prev, self) {
            (Stamp::Num(a), Stamp::Num(b)) => b > a,
            (Stamp::Text(a), Stamp::Text(b)) => b > a,
            _ => false,
        }
    }
}

fn parse_label(s: &str) -> Option<bool> {
    match s.trim() {
        "1" | "true" | "True" | "TRUE" => Some(true),
        "0" | "false" | "False" | "FALSE" => Some(false),
        _ => None,
    }
}

/// Reads a series from any CSV source; see the module docs for the format.
pub fn read_series_csv<R: Read>(r: R, column: &str) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(r);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let value_col = find(column).ok_or_else(|| Error::MissingColumn(column.to_owned()))?;
    let time_col = TIME_COLUMNS.iter().find_map(|c| find(c)).filter(|&c| c != value_col);
    let label_col = LABEL_COLUMNS.iter().find_map(|c| find(c)).filter(|&c| c != value_col);

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut prev: Option<Stamp> = None;
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map_or(0, |p| p.line());
        let cell = rec.get(value_col).unwrap_or("").trim();
        if cell.is_empty() {
            return Err(Error::Row { row, reason: format!("missing value in `{column}`") });
        }
        let v: f64 = cell
            .parse()
            .map_err(|_| Error::Row { row, reason: format!("non-numeric value `{cell}` in `{column}`") })?;
        if !v.is_finite() {
            return Err(Error::Row { row, reason: format!("non-finite value in `{column}`") });
        }
        if let Some(tc) = time_col {
            let stamp = Stamp::parse(rec.get(tc).unwrap_or(""));
            if let Some(p) = &prev {
                if !stamp.increases_from(p) {
                    return Err(Error::Row { row, reason: "timestamps must be strictly increasing".into() });
                }
            }
            prev = Some(stamp);
        }
        if let Some(lc) = label_col {
            let cell = rec.get(lc).unwrap_or("");
            let l = parse_label(cell)
                .ok_or_else(|| Error::Row { row, reason: format!("label `{cell}` is not 0/1") })?;
            labels.push(l);
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::SeriesTooShort { needed: 1, got: 0 });
    }
    let ts = TimeSeries::new(values, 1.0, Origin::File)?;
    if label_col.is_some() {
        ts.with_labels(labels)
    } else {
        Ok(ts)
    }
}

/// Writes `t,value` with one row per step.
pub fn write_series_csv<W: Write>(series: &TimeSeries, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["t", "value"])?;
    for (t, v) in series.values().iter().enumerate() {
        wtr.write_record([t.to_string(), v.to_string()])?;
    }
    wtr.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_file() {
        let ts = read_series_csv("t,value\n0,1.5\n1,2.5".as_bytes(), "value").unwrap();
        assert_eq!(ts.values(), &[1.5, 2.5]);
        assert!(ts.labels().is_none());
    }

    #[test]
    fn non_numeric_names_row() {
        let err = read_series_csv("t,value\n0,1.5\n1,abc\n".as_bytes(), "value").unwrap_err();
        match err {
            Error::Row { row, .. } => assert_eq!(row, 3),
            e => panic!("unexpected {e:?}"),
        }
        assert!(err_text("t,value\n0,1\n1,x\n").contains("row 3"));
    }

    fn err_text(s: &str) -> String {
        read_series_csv(s.as_bytes(), "value").unwrap_err().to_string()
    }

    #[test]
    fn yahoo_layout_keeps_flags() {
        let ts = read_series_csv("timestamp,value,is_anomaly\n1,10,0\n2,11,1\n".as_bytes(), "value").unwrap();
        assert_eq!(ts.values(), &[10.0, 11.0]);
        assert_eq!(ts.labels().unwrap(), &[false, true]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(read_series_csv("t,v\n0,1\n".as_bytes(), "value"), Err(Error::MissingColumn(_))));
        assert!(err_text("t,value\n0,1\n0,2\n").contains("increasing"));
        assert!(err_text("t,value\n0,1\n1,\n").contains("missing"));
        assert!(read_series_csv("t,value\n".as_bytes(), "value").is_err());
    }

    #[test]
    fn date_stamps_compare_as_text() {
        let ts = read_series_csv("timestamp,value\n2019-01-02,1\n2019-01-03,2\n".as_bytes(), "value").unwrap();
        assert_eq!(ts.len(), 2);
        assert!(read_series_csv("timestamp,value\n2019-01-03,1\n2019-01-02,2\n".as_bytes(), "value").is_err());
    }

    #[test]
    fn write_read_round_trip() {
        let ts = TimeSeries::from_values(vec![0.1, -2.5, 1e-7]).unwrap();
        let mut buf = Vec::new();
        write_series_csv(&ts, &mut buf).unwrap();
        assert!(buf.starts_with(b"t,value\n0,0.1\n"));
        let back = read_series_csv(buf.as_slice(), "value").unwrap();
        assert_eq!(back.values(), ts.values());
    }
}
