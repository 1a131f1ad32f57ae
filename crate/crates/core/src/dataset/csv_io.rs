use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{Dataset, FeatureSchema, ProcessRecord, Features, N_FEATURES, NT_COLUMN};
use crate::error::{Error, Result};

const OPTIONAL_COLUMNS: [&str; 3] = [NT_COLUMN, "outlier", "timestamp"];

#[derive(Debug, Default)]
struct Layout {
    nt: Option<usize>,
    outlier: Option<usize>,
    timestamp: Option<usize>,
    width: usize,
}

fn parse_header(header: &csv::StringRecord, schema: &FeatureSchema) -> Result<Layout> {
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names.len() < N_FEATURES {
        return Err(Error::SchemaMismatch(format!(
            "header has {} columns, need at least {N_FEATURES}",
            names.len()
        )));
    }
    FeatureSchema::from_names(&names[..N_FEATURES])?;
    debug_assert_eq!(schema.len(), N_FEATURES);

    let mut layout = Layout {
        width: names.len(),
        ..Layout::default()
    };
    // Trailing columns must be a subsequence of `nt, outlier, timestamp`.
    let mut next_allowed = 0;
    for (col, name) in names.iter().enumerate().skip(N_FEATURES) {
        let pos = OPTIONAL_COLUMNS
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::SchemaMismatch(format!("unknown column `{name}`")))?;
        if pos < next_allowed {
            return Err(Error::SchemaMismatch(format!("column `{name}` is out of order")));
        }
        next_allowed = pos + 1;
        match pos {
            0 => layout.nt = Some(col),
            1 => layout.outlier = Some(col),
            _ => layout.timestamp = Some(col),
        }
    }
    Ok(layout)
}

fn parse_real(token: &str, column: &str, row: usize) -> Result<f64> {
    let v: f64 = token.parse().map_err(|_| Error::MalformedRow {
        row,
        reason: format!("`{token}` in `{column}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::MalformedRow {
            row,
            reason: format!("non-finite value `{token}` in `{column}`"),
        });
    }
    Ok(v)
}

/// Read process data from any CSV source. Row numbers in errors are
/// 1-based data rows (the header is not counted).
pub fn read_csv<R: Read>(reader: R, schema: &FeatureSchema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let layout = parse_header(rdr.headers()?, schema)?;

    let mut records = Vec::new();
    let mut last_timestamp: Option<i64> = None;
    for (i, row) in rdr.records().enumerate() {
        let row_no = i + 1;
        let row = row?;
        if row.len() != layout.width {
            return Err(Error::MalformedRow {
                row: row_no,
                reason: format!("expected {} fields, found {}", layout.width, row.len()),
            });
        }
        let mut features: Features = [0.0; N_FEATURES];
        for (j, slot) in features.iter_mut().enumerate() {
            *slot = parse_real(row[j].trim(), schema.names()[j], row_no)?;
        }
        let nt = match layout.nt.map(|c| row[c].trim()) {
            None | Some("") => None,
            Some(tok) => Some(parse_real(tok, NT_COLUMN, row_no)?),
        };
        let outlier = match layout.outlier.map(|c| row[c].trim()) {
            None | Some("0") => false,
            Some("1") => true,
            Some(tok) => {
                return Err(Error::MalformedRow {
                    row: row_no,
                    reason: format!("outlier flag must be 0 or 1, found `{tok}`"),
                })
            }
        };
        let timestamp = match layout.timestamp.map(|c| row[c].trim()) {
            None | Some("") => None,
            Some(tok) => {
                let t: i64 = tok.parse().map_err(|_| Error::MalformedRow {
                    row: row_no,
                    reason: format!("timestamp `{tok}` is not an integer"),
                })?;
                if last_timestamp.is_some_and(|prev| t < prev) {
                    return Err(Error::MalformedRow {
                        row: row_no,
                        reason: "timestamps must be non-decreasing".to_string(),
                    });
                }
                last_timestamp = Some(t);
                Some(t)
            }
        };
        records.push(ProcessRecord {
            features,
            nt,
            outlier,
            timestamp,
        });
    }
    Ok(Dataset::from_parts(records, false))
}

/// Parse a process-data CSV file.
pub fn parse_csv(path: impl AsRef<Path>, schema: &FeatureSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(std::io::BufReader::new(file), schema)
}

/// Write a dataset in the same format `read_csv` accepts. The `nt` and
/// `timestamp` columns are emitted only when at least one record carries
/// them; `outlier` is always written.
pub fn write_csv<W: Write>(data: &Dataset, writer: W) -> Result<()> {
    let has_nt = data.records().iter().any(|r| r.nt.is_some());
    let has_ts = data.records().iter().any(|r| r.timestamp.is_some());
    let mut wtr = csv::Writer::from_writer(writer);

    let mut header: Vec<&str> = data.schema().names().to_vec();
    if has_nt {
        header.push(NT_COLUMN);
    }
    header.push("outlier");
    if has_ts {
        header.push("timestamp");
    }
    wtr.write_record(&header)?;

    let mut fields: Vec<String> = Vec::with_capacity(header.len());
    for r in data.records() {
        fields.clear();
        fields.extend(r.features.iter().map(|v| v.to_string()));
        if has_nt {
            fields.push(r.nt.map(|v| v.to_string()).unwrap_or_default());
        }
        fields.push(if r.outlier { "1" } else { "0" }.to_string());
        if has_ts {
            fields.push(r.timestamp.map(|t| t.to_string()).unwrap_or_default());
        }
        wtr.write_record(&fields)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}
