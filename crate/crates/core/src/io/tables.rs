//! CSV schemas.
//!
//! | table      | header                                          |
//! |------------|-------------------------------------------------|
//! | traces     | `path_id,step,p_0,...,p_{K-1}`                  |
//! | accuracies | `model_id,group,dataset_id,correct,total`       |
//! | metrics    | `model_id,metric_name,value,value_kind`         |
//! | labels     | `index,label`                                   |
//!
//! Parse errors carry the 1-based line number of the offending row.

use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use crate::error::{Error, Result};
use crate::path_metrics::{validate_row, PredictionTrace};
use crate::robustness_stats::{AccuracyRecord, MetricRecord};

fn open_csv(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

struct Ctx<'a> {
    path: &'a Path,
}

impl Ctx<'_> {
    fn err(&self, line: u64, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.display().to_string(),
            line,
            message: message.into(),
        }
    }

    fn csv_err(&self, e: csv::Error) -> Error {
        let line = e.position().map_or(0, |p| p.line());
        self.err(line, e.to_string())
    }

    fn headers(&self, reader: &mut csv::Reader<File>) -> Result<Vec<String>> {
        Ok(reader
            .headers()
            .map_err(|e| self.csv_err(e))?
            .iter()
            .map(str::to_string)
            .collect())
    }

    fn expect_headers(&self, got: &[String], want: &[&str]) -> Result<()> {
        if got != want {
            return Err(self.err(1, format!("expected header {}, got {}", want.join(","), got.join(","))));
        }
        Ok(())
    }

    fn field<T: std::str::FromStr>(&self, line: u64, rec: &csv::StringRecord, i: usize, name: &str) -> Result<T> {
        let raw = rec.get(i).ok_or_else(|| self.err(line, format!("missing {name}")))?;
        raw.parse()
            .map_err(|_| self.err(line, format!("cannot parse {name} from {raw:?}")))
    }
}

fn records(reader: &mut csv::Reader<File>, ctx: &Ctx<'_>) -> Result<Vec<(u64, csv::StringRecord)>> {
    reader
        .records()
        .map(|r| {
            let rec = r.map_err(|e| ctx.csv_err(e))?;
            let line = rec.position().map_or(0, |p| p.line());
            Ok((line, rec))
        })
        .collect()
}

fn write_rows(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_io = |e: csv::Error| Error::io(path, e.into());
    w.write_record(header).map_err(to_io)?;
    for row in rows {
        w.write_record(&row).map_err(to_io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    super::write_file(path, bytes)
}

/// Reads one trace per `path_id`, in order of first appearance.
pub fn read_traces(path: impl AsRef<Path>) -> Result<Vec<PredictionTrace>> {
    let path = path.as_ref();
    let ctx = Ctx { path };
    let mut reader = open_csv(path)?;
    let headers = ctx.headers(&mut reader)?;
    let classes = headers.len().saturating_sub(2);
    let want: Vec<String> = ["path_id".to_string(), "step".to_string()]
        .into_iter()
        .chain((0..classes).map(|k| format!("p_{k}")))
        .collect();
    if classes < 2 || headers != want {
        return Err(ctx.err(1, format!(
            "expected header path_id,step,p_0,...,p_{{K-1}} with K >= 2, got {}",
            headers.join(",")
        )));
    }

    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, Vec<(u64, usize, Vec<f64>)>> = HashMap::new();
    for (line, rec) in records(&mut reader, &ctx)? {
        let path_id = rec.get(0).unwrap_or_default().to_string();
        if path_id.is_empty() {
            return Err(ctx.err(line, "empty path_id"));
        }
        let step: usize = ctx.field(line, &rec, 1, "step")?;
        let probs = (0..classes)
            .map(|k| ctx.field(line, &rec, k + 2, &format!("p_{k}")))
            .collect::<Result<Vec<f64>>>()?;
        validate_row(&probs).map_err(|m| ctx.err(line, format!("path {path_id} step {step}: {m}")))?;
        if !rows.contains_key(&path_id) {
            order.push(path_id.clone());
        }
        rows.entry(path_id).or_default().push((line, step, probs));
    }

    order
        .into_iter()
        .map(|path_id| {
            let mut steps = rows.remove(&path_id).expect("recorded");
            steps.sort_by_key(|&(line, step, _)| (step, line));
            for (expected, (line, step, _)) in (1..).zip(&steps) {
                if *step != expected {
                    return Err(ctx.err(*line, format!(
                        "path {path_id}: steps are not contiguous from 1 (expected step {expected}, found {step})"
                    )));
                }
            }
            let probs: Vec<Vec<f64>> = steps.into_iter().map(|(_, _, p)| p).collect();
            PredictionTrace::from_rows(path_id.clone(), &probs)
                .map_err(|e| ctx.err(1, format!("path {path_id}: {e}")))
        })
        .collect()
}

pub fn write_traces(path: impl AsRef<Path>, traces: &[PredictionTrace]) -> Result<()> {
    let classes = traces
        .first()
        .ok_or_else(|| Error::invalid("no traces to write"))?
        .classes();
    if traces.iter().any(|t| t.classes() != classes) {
        return Err(Error::invalid("traces disagree on the number of classes"));
    }
    let header: Vec<String> = ["path_id".to_string(), "step".to_string()]
        .into_iter()
        .chain((0..classes).map(|k| format!("p_{k}")))
        .collect();
    let rows = traces.iter().flat_map(|t| {
        (0..t.steps()).map(move |s| {
            let mut row = vec![t.path_id.clone(), (s + 1).to_string()];
            row.extend(t.row(s).iter().map(|p| p.to_string()));
            row
        })
    });
    write_rows(path.as_ref(), &header, rows)
}

const ACCURACY_HEADER: [&str; 5] = ["model_id", "group", "dataset_id", "correct", "total"];
const METRIC_HEADER: [&str; 4] = ["model_id", "metric_name", "value", "value_kind"];

pub fn read_accuracies(path: impl AsRef<Path>) -> Result<Vec<AccuracyRecord>> {
    let path = path.as_ref();
    let ctx = Ctx { path };
    let mut reader = open_csv(path)?;
    let headers = ctx.headers(&mut reader)?;
    ctx.expect_headers(&headers, &ACCURACY_HEADER)?;
    records(&mut reader, &ctx)?
        .into_iter()
        .map(|(line, rec)| {
            let r = AccuracyRecord {
                model_id: ctx.field(line, &rec, 0, "model_id")?,
                group: ctx.field(line, &rec, 1, "group")?,
                dataset_id: ctx.field(line, &rec, 2, "dataset_id")?,
                correct: ctx.field(line, &rec, 3, "correct")?,
                total: ctx.field(line, &rec, 4, "total")?,
            };
            r.validate().map_err(|e| ctx.err(line, e.to_string()))?;
            Ok(r)
        })
        .collect()
}

pub fn write_accuracies(path: impl AsRef<Path>, records: &[AccuracyRecord]) -> Result<()> {
    let header: Vec<String> = ACCURACY_HEADER.iter().map(|s| s.to_string()).collect();
    let rows = records.iter().map(|r| {
        vec![
            r.model_id.clone(),
            r.group.clone(),
            r.dataset_id.clone(),
            r.correct.to_string(),
            r.total.to_string(),
        ]
    });
    write_rows(path.as_ref(), &header, rows)
}

pub fn read_metrics(path: impl AsRef<Path>) -> Result<Vec<MetricRecord>> {
    let path = path.as_ref();
    let ctx = Ctx { path };
    let mut reader = open_csv(path)?;
    let headers = ctx.headers(&mut reader)?;
    ctx.expect_headers(&headers, &METRIC_HEADER)?;
    records(&mut reader, &ctx)?
        .into_iter()
        .map(|(line, rec)| {
            let r = MetricRecord {
                model_id: ctx.field(line, &rec, 0, "model_id")?,
                metric_name: ctx.field(line, &rec, 1, "metric_name")?,
                value: ctx.field(line, &rec, 2, "value")?,
                value_kind: ctx.field(line, &rec, 3, "value_kind")?,
            };
            r.validate().map_err(|e| ctx.err(line, e.to_string()))?;
            Ok(r)
        })
        .collect()
}

pub fn write_metrics(path: impl AsRef<Path>, records: &[MetricRecord]) -> Result<()> {
    let header: Vec<String> = METRIC_HEADER.iter().map(|s| s.to_string()).collect();
    let rows = records.iter().map(|r| {
        vec![
            r.model_id.clone(),
            r.metric_name.clone(),
            r.value.to_string(),
            r.value_kind.to_string(),
        ]
    });
    write_rows(path.as_ref(), &header, rows)
}

/// Labels indexed `0..N`, each index exactly once (rows may be in any order).
pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<u32>> {
    let path = path.as_ref();
    let ctx = Ctx { path };
    let mut reader = open_csv(path)?;
    let headers = ctx.headers(&mut reader)?;
    ctx.expect_headers(&headers, &["index", "label"])?;
    let rows = records(&mut reader, &ctx)?;
    let mut labels = vec![None; rows.len()];
    for (line, rec) in rows {
        let index: usize = ctx.field(line, &rec, 0, "index")?;
        let label: u32 = ctx.field(line, &rec, 1, "label")?;
        match labels.get_mut(index) {
            Some(slot @ None) => *slot = Some(label),
            Some(Some(_)) => return Err(ctx.err(line, format!("index {index} listed twice"))),
            None => return Err(ctx.err(line, format!("index {index} outside 0..{}", labels.len()))),
        }
    }
    Ok(labels.into_iter().map(|l| l.expect("every slot filled")).collect())
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[u32]) -> Result<()> {
    let header = vec!["index".to_string(), "label".to_string()];
    let rows = labels
        .iter()
        .enumerate()
        .map(|(i, l)| vec![i.to_string(), l.to_string()]);
    write_rows(path.as_ref(), &header, rows)
}

/// Writes arbitrary string rows under `header`.
pub fn write_table(path: impl AsRef<Path>, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    write_rows(path.as_ref(), &header, rows)
}

/// Header plus `(line, fields)` rows.
pub type Table = (Vec<String>, Vec<(u64, Vec<String>)>);

/// Reads a whole table as `(header, rows)` with line numbers.
pub fn read_table(path: impl AsRef<Path>) -> Result<Table> {
    let path = path.as_ref();
    let ctx = Ctx { path };
    let mut reader = open_csv(path)?;
    let headers = ctx.headers(&mut reader)?;
    let rows = records(&mut reader, &ctx)?
        .into_iter()
        .map(|(line, rec)| (line, rec.iter().map(str::to_string).collect()))
        .collect();
    Ok((headers, rows))
}
