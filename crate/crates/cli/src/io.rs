//! CSV readers and writers.
//!
//! Loss panel: a header row of method ids, then one row of losses per time point.
//! A first column headed `time_index` or `date` is taken as the time index.
//!
//! State series: header `time_index,state`, one labelled row per time point.
//!
//! Risk factor: header `time,value`.
//!
//! ES by horizon: header `asset[,UC],LH10,LH20,...`, one row per asset.

use std::fs;
use std::path::{Path, PathBuf};

use cmcs_core::{LossPanel, StateSeries};

use crate::error::CliError;

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    parse_err(path, line, e.to_string())
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

fn parse_number(path: &Path, line: u64, field: &str, column: &str) -> Result<f64, CliError> {
    let x: f64 = field
        .parse()
        .map_err(|_| parse_err(path, line, format!("column `{column}`: `{field}` is not a number")))?;
    if !x.is_finite() {
        return Err(parse_err(path, line, format!("column `{column}`: non-finite value `{field}`")));
    }
    Ok(x)
}

fn is_time_header(h: &str) -> bool {
    h.eq_ignore_ascii_case("time_index") || h.eq_ignore_ascii_case("date")
}

pub fn parse_loss_csv(path: &Path, text: &str) -> Result<LossPanel, CliError> {
    let mut rdr = reader(text);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let has_time = headers.first().is_some_and(|h| is_time_header(h));
    let ids: Vec<String> = headers[usize::from(has_time)..].to_vec();
    if ids.len() < 2 {
        return Err(parse_err(path, 1, "need at least two method columns"));
    }
    let mut data = Vec::new();
    let mut times = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let mut fields = rec.iter();
        if has_time {
            times.push(fields.next().unwrap_or_default().to_string());
        }
        for (field, id) in fields.zip(&ids) {
            data.push(parse_number(path, line, field, id)?);
        }
    }
    if data.is_empty() {
        return Err(parse_err(path, 2, "no data rows"));
    }
    let panel = LossPanel::from_row_major(data, ids).map_err(|e| parse_err(path, 1, e.to_string()))?;
    if has_time {
        Ok(panel.with_time_index(times)?)
    } else {
        Ok(panel)
    }
}

pub fn read_loss_csv(path: &Path) -> Result<LossPanel, CliError> {
    parse_loss_csv(path, &read_text(path)?)
}

pub fn write_loss_csv(panel: &LossPanel) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let time = panel.time_index();
    let mut header: Vec<&str> = Vec::new();
    if time.is_some() {
        header.push("time_index");
    }
    header.extend(panel.method_ids().iter().map(String::as_str));
    w.write_record(&header).expect("in-memory write");
    for t in 0..panel.n() {
        let mut rec: Vec<String> = Vec::with_capacity(panel.m() + 1);
        if let Some(ti) = time {
            rec.push(ti[t].clone());
        }
        rec.extend(panel.row(t).iter().map(f64::to_string));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

/// A parsed state file: labels in file order plus the time index column.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFile {
    pub time_index: Vec<String>,
    pub states: StateSeries,
}

/// Parses a state CSV. With `alphabet = None` the alphabet is inferred from the labels.
pub fn parse_state_csv(
    path: &Path,
    text: &str,
    alphabet: Option<Vec<String>>,
) -> Result<StateFile, CliError> {
    let mut rdr = reader(text);
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    if headers.len() != 2 {
        return Err(parse_err(path, 1, "state file needs exactly two columns: time_index,state"));
    }
    let mut time_index = Vec::new();
    let mut labels = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let label = &rec[1];
        if label.is_empty() {
            return Err(parse_err(path, line, "empty state label"));
        }
        if let Some(a) = &alphabet {
            if !a.iter().any(|s| s == label) {
                return Err(parse_err(path, line, format!("state `{label}` not in the declared alphabet")));
            }
        }
        time_index.push(rec[0].to_string());
        labels.push(label.to_string());
    }
    if labels.is_empty() {
        return Err(parse_err(path, 2, "no data rows"));
    }
    let states = match alphabet {
        Some(a) => StateSeries::new(a, &labels)?,
        None => StateSeries::infer(&labels)?,
    };
    Ok(StateFile { time_index, states })
}

pub fn read_state_csv(path: &Path, alphabet: Option<Vec<String>>) -> Result<StateFile, CliError> {
    parse_state_csv(path, &read_text(path)?, alphabet)
}

pub fn write_state_csv(time_index: Option<&[String]>, states: &StateSeries) -> String {
    let mut out = String::from("time_index,state\n");
    for t in 0..states.len() {
        let ti = time_index.map_or_else(|| (t + 1).to_string(), |ti| ti[t].clone());
        out.push_str(&format!("{ti},{}\n", states.label(t)));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorSeries {
    pub time: Vec<String>,
    pub values: Vec<f64>,
}

pub fn parse_factor_csv(path: &Path, text: &str) -> Result<FactorSeries, CliError> {
    let mut rdr = reader(text);
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    if headers.len() != 2 {
        return Err(parse_err(path, 1, "factor file needs exactly two columns: time,value"));
    }
    let mut time = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        time.push(rec[0].to_string());
        values.push(parse_number(path, line, &rec[1], &headers[1])?);
    }
    if values.is_empty() {
        return Err(parse_err(path, 2, "no data rows"));
    }
    Ok(FactorSeries { time, values })
}

pub fn read_factor_csv(path: &Path) -> Result<FactorSeries, CliError> {
    parse_factor_csv(path, &read_text(path)?)
}

/// One asset row of an ES-by-horizon table.
#[derive(Debug, Clone, PartialEq)]
pub struct EsRow {
    pub asset: String,
    /// Unconditional ES column, carried through unchanged when present.
    pub uc: Option<f64>,
    pub es: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EsTable {
    pub horizons: Vec<u32>,
    pub has_uc: bool,
    pub rows: Vec<EsRow>,
}

fn parse_horizon(path: &Path, h: &str) -> Result<u32, CliError> {
    h.strip_prefix("LH")
        .or_else(|| h.strip_prefix("lh"))
        .and_then(|d| d.parse().ok())
        .filter(|&d: &u32| d > 0)
        .ok_or_else(|| parse_err(path, 1, format!("column `{h}` is not a liquidity horizon like LH10")))
}

pub fn parse_es_csv(path: &Path, text: &str) -> Result<EsTable, CliError> {
    let mut rdr = reader(text);
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let has_uc = headers.get(1).is_some_and(|h| h.eq_ignore_ascii_case("UC"));
    let first_lh = 1 + usize::from(has_uc);
    let horizons = headers
        .iter()
        .skip(first_lh)
        .filter(|h| !h.eq_ignore_ascii_case("ES_BCBS"))
        .map(|h| parse_horizon(path, h))
        .collect::<Result<Vec<_>, _>>()?;
    if horizons.is_empty() {
        return Err(parse_err(path, 1, "no liquidity horizon columns"));
    }
    if horizons.windows(2).any(|w| w[1] <= w[0]) {
        return Err(parse_err(path, 1, "liquidity horizons must be strictly increasing"));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let uc = if has_uc {
            Some(parse_number(path, line, &rec[1], "UC")?)
        } else {
            None
        };
        let es = (0..horizons.len())
            .map(|k| {
                let col = first_lh + k;
                parse_number(path, line, &rec[col], &headers[col])
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(EsRow {
            asset: rec[0].to_string(),
            uc,
            es,
        });
    }
    Ok(EsTable {
        horizons,
        has_uc,
        rows,
    })
}

pub fn read_es_csv(path: &Path) -> Result<EsTable, CliError> {
    parse_es_csv(path, &read_text(path)?)
}

/// Writes `text` to `out`, or to stdout when `out` is `None`.
pub fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.clone(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
