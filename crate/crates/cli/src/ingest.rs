//! Daily gauge CSV ingestion and the log(1+value) transform.
//!
//! A record's value may be missing (unparseable or empty cell). The transform
//! splits the record list into maximal gap-free segments: a missing value or
//! a skipped calendar day ends the current segment, so no downstream lag
//! window can ever mix observations from opposite sides of a hole.

use crate::error::{CliError, CliResult};
use chrono::NaiveDate;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct DailyRecord {
    pub date: NaiveDate,
    pub value: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ParsedDaily {
    /// Strictly increasing by date.
    pub records: Vec<DailyRecord>,
    /// Count of cells that did not parse as numbers and became missing.
    pub value_warnings: usize,
}

pub fn parse_daily_csv(
    path: &Path,
    date_column: &str,
    value_column: &str,
    date_format: &str,
) -> CliResult<ParsedDaily> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::data(format!("cannot open {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let date_idx = headers
        .iter()
        .position(|h| h == date_column)
        .ok_or_else(|| {
            CliError::data(format!(
                "{}: no column named {date_column:?}",
                path.display()
            ))
        })?;
    let value_idx = headers
        .iter()
        .position(|h| h == value_column)
        .ok_or_else(|| {
            CliError::data(format!(
                "{}: no column named {value_column:?}",
                path.display()
            ))
        })?;

    let mut records = Vec::new();
    let mut value_warnings = 0usize;
    for (row_no, row) in reader.records().enumerate() {
        let row = row?;
        let date_cell = row.get(date_idx).unwrap_or("");
        let date = NaiveDate::parse_from_str(date_cell, date_format).map_err(|_| {
            CliError::data(format!(
                "{} row {}: cannot parse date {date_cell:?} with format {date_format:?}",
                path.display(),
                row_no + 2
            ))
        })?;
        let value_cell = row.get(value_idx).unwrap_or("");
        let value = match value_cell.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(v),
            _ => {
                value_warnings += 1;
                None
            }
        };
        records.push(DailyRecord { date, value });
    }
    if records.is_empty() {
        return Err(CliError::data(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    records.sort_by_key(|r| r.date);
    for pair in records.windows(2) {
        if pair[0].date == pair[1].date {
            return Err(CliError::data(format!(
                "{}: duplicate date {}",
                path.display(),
                pair[0].date
            )));
        }
    }
    Ok(ParsedDaily {
        records,
        value_warnings,
    })
}

/// A maximal run of consecutive days with observed values, after transform.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Maps value to ln(1+value) and splits at missing values and calendar gaps.
pub fn transform_log1p(records: &[DailyRecord]) -> CliResult<Vec<Segment>> {
    let mut segments = Vec::new();
    let mut current = Segment {
        dates: Vec::new(),
        values: Vec::new(),
    };
    let close = |current: &mut Segment, segments: &mut Vec<Segment>| {
        if !current.is_empty() {
            segments.push(std::mem::replace(
                current,
                Segment {
                    dates: Vec::new(),
                    values: Vec::new(),
                },
            ));
        }
    };
    for record in records {
        let Some(v) = record.value else {
            close(&mut current, &mut segments);
            continue;
        };
        if v < 0.0 {
            return Err(CliError::data(format!(
                "negative value {v} on {}",
                record.date
            )));
        }
        if let Some(&last) = current.dates.last() {
            if last.succ_opt() != Some(record.date) {
                close(&mut current, &mut segments);
            }
        }
        current.dates.push(record.date);
        current.values.push(v.ln_1p());
    }
    close(&mut current, &mut segments);
    Ok(segments)
}
