//! CSV ingestion.
//!
//! Comma separated, `.` decimal point, UTF-8, mandatory header row.
//! Columns are matched by case-insensitive header name in any order and
//! fields are trimmed. Line numbers in errors count the header as line 1.

use std::collections::HashSet;

use csv::{ReaderBuilder, StringRecord, Trim};

use crate::agreement::{OrdinalRecord, PairRecord, PairedSample};
use crate::error::{Error, Result};

struct Table {
    columns: Vec<String>,
    rows: Vec<(u64, StringRecord)>,
}

impl Table {
    fn read(text: &str) -> Result<Self> {
        let mut reader = ReaderBuilder::new().has_headers(true).trim(Trim::All).from_reader(text.as_bytes());
        let columns = reader
            .headers()
            .map_err(|e| Error::Csv(e.to_string()))?
            .iter()
            .map(str::to_ascii_lowercase)
            .collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::Csv(e.to_string()))?;
            let line = record.position().map_or(0, |p| p.line());
            rows.push((line, record));
        }
        Ok(Table { columns, rows })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.columns.iter().position(|c| c == name).ok_or_else(|| Error::MissingColumn(name.to_owned()))
    }

    fn optional_column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

fn number(record: &StringRecord, col: usize, line: u64) -> Result<f64> {
    record
        .get(col)
        .and_then(|s| s.parse::<f64>().ok())
        .filter(|v| v.is_finite())
        .ok_or(Error::BadNumber(line))
}

fn text(record: &StringRecord, col: usize) -> String {
    record.get(col).unwrap_or_default().to_owned()
}

/// Parses `id,a,b` rows into a [`PairedSample`] without scale bounds.
pub fn parse_paired_csv(input: &str) -> Result<PairedSample> {
    let table = Table::read(input)?;
    let (id, a, b) = (table.column("id")?, table.column("a")?, table.column("b")?);
    let records = table
        .rows
        .iter()
        .map(|(line, row)| Ok(PairRecord::new(text(row, id), number(row, a, *line)?, number(row, b, *line)?)))
        .collect::<Result<Vec<_>>>()?;
    // also rejects duplicate ids
    PairedSample::new(records, None)
}

/// Parses `id,group,score[,event]` rows. A missing `event` column means
/// every subject had the event.
pub fn parse_grouped_csv(input: &str) -> Result<Vec<OrdinalRecord>> {
    let table = Table::read(input)?;
    let (id, group, score) = (table.column("id")?, table.column("group")?, table.column("score")?);
    let event = table.optional_column("event");
    let mut seen = HashSet::new();
    let mut records = Vec::with_capacity(table.rows.len());
    for (line, row) in &table.rows {
        let label = text(row, group);
        if label.is_empty() {
            return Err(Error::EmptyGroupLabel(*line));
        }
        let flag = match event {
            None => None,
            Some(col) => match row.get(col) {
                Some("1") => Some(true),
                Some("0") => Some(false),
                _ => return Err(Error::BadEventFlag(*line)),
            },
        };
        let rec =
            OrdinalRecord { id: text(row, id), group: label, score: number(row, score, *line)?, event: flag };
        if !seen.insert(rec.id.clone()) {
            return Err(Error::DuplicateId(rec.id));
        }
        records.push(rec);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paired_happy_path() {
        let s = parse_paired_csv("id,a,b\n1,3,3\n2,2,4\n3,5,1").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.abs_differences(), vec![0.0, 2.0, 4.0]);
    }

    #[test]
    fn columns_in_any_order_and_case() {
        let s = parse_paired_csv("B , ID,A\n 4, x , 2 \n").unwrap();
        assert_eq!(s.records()[0], PairRecord::new("x", 2.0, 4.0));
    }

    #[test]
    fn paired_errors() {
        assert_eq!(parse_paired_csv("id,a\n1,3"), Err(Error::MissingColumn("b".into())));
        assert_eq!(parse_paired_csv("id,a,b\n1,x,3"), Err(Error::BadNumber(2)));
        assert_eq!(parse_paired_csv("id,a,b\n1,1,3\n2,1,inf"), Err(Error::BadNumber(3)));
        assert_eq!(parse_paired_csv("id,a,b\n1,1,3\n1,2,2"), Err(Error::DuplicateId("1".into())));
        assert!(matches!(parse_paired_csv("id,a,b\n1,1"), Err(Error::Csv(_))));
    }

    #[test]
    fn grouped_happy_path() {
        let r = parse_grouped_csv("id,group,score\n1,healthy,16\n2,affected,4").unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].group, "healthy");
        assert_eq!(r[1].group, "affected");
        assert!(r.iter().all(|x| x.event.is_none()));
    }

    #[test]
    fn grouped_event_flag() {
        let r = parse_grouped_csv("id,group,score,event\n1,g1,5,0").unwrap();
        assert_eq!(r[0].event, Some(false));
        assert_eq!(parse_grouped_csv("id,group,score,event\n1,g1,5,2"), Err(Error::BadEventFlag(2)));
    }

    #[test]
    fn grouped_errors() {
        assert_eq!(parse_grouped_csv("id,group,score\n1,g1,abc"), Err(Error::BadNumber(2)));
        assert_eq!(parse_grouped_csv("id,score\n1,3"), Err(Error::MissingColumn("group".into())));
        assert_eq!(parse_grouped_csv("id,group,score\n1,,3"), Err(Error::EmptyGroupLabel(2)));
        assert_eq!(parse_grouped_csv("id,group,score\n").unwrap(), vec![]);
    }
}
