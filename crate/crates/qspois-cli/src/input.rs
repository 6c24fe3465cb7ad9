//! Input-side parsing: a CSV column of counts with an optional `count`
//! header and an optional second column of region labels.

use std::path::Path;

use crate::CliError;

/// Parsed counts plus the label column, when the file has one.
pub struct CountTable {
    pub counts: Vec<u64>,
    /// One label per count when the file has a second column.
    pub labels: Option<Vec<String>>,
}

/// Reads a count table. Filesystem failures are I/O errors; anything wrong
/// with the file's *contents* is a usage error naming the offending row.
pub fn read_count_table(path: &Path) -> Result<CountTable, CliError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|error| CliError::Io(format!("cannot read {}: {error}", path.display())))?;
    parse_count_table(&raw)
        .map_err(|message| CliError::Usage(format!("{}: {message}", path.display())))
}

fn parse_count_table(raw: &str) -> Result<CountTable, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(raw.as_bytes());
    let mut counts = Vec::new();
    let mut labels: Option<Vec<String>> = None;
    for (row, record) in reader.records().enumerate() {
        let line = row + 1;
        let record = record.map_err(|error| format!("row {line}: {error}"))?;
        let is_header = row == 0
            && record
                .get(0)
                .is_some_and(|field| field.eq_ignore_ascii_case("count"));
        if is_header {
            continue;
        }
        if record.len() > 2 {
            return Err(format!(
                "row {line}: expected 1 or 2 columns, found {}",
                record.len()
            ));
        }
        let field = record.get(0).unwrap_or("");
        let count: u64 = field.parse().map_err(|_| {
            format!("row {line}: cannot parse count '{field}' as a nonnegative integer")
        })?;
        counts.push(count);
        if record.len() == 2 {
            labels
                .get_or_insert_with(Vec::new)
                .push(record.get(1).unwrap_or("").to_string());
        }
    }
    if counts.is_empty() {
        return Err("the file contains no counts".to_string());
    }
    Ok(CountTable { counts, labels })
}
