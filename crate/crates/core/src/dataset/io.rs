use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::iotid20::{CATEGORY_COLUMN, LABEL_COLUMN, SUBCATEGORY_COLUMN};
use super::{check_hierarchy, FlowRecord, FlowTable, HierLabel};
use crate::{Error, Result};

/// A cell in a numeric column that did not parse; loaded as NaN.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MalformedCell {
    /// Zero-based data row (the header is not counted).
    pub row: usize,
    pub column: String,
    pub text: String,
}

/// Loads an IoTID20-shaped CSV file.
pub fn load_csv(path: impl AsRef<Path>) -> Result<FlowTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file)
}

/// Parses IoTID20-shaped CSV text from any reader.
///
/// A column whose first non-empty cell is not a number is treated as text and
/// skipped. Unparseable cells in numeric columns load as NaN and are listed
/// in [`FlowTable::malformed`]. `inf`, `Infinity` and `NaN` parse as floats.
pub fn read_csv<R: Read>(reader: R) -> Result<FlowTable> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = csv.headers()?.iter().map(str::to_owned).collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(Error::Schema("missing header row".into()));
    }
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("missing label column {name:?}")))
    };
    let label_cols = [find(LABEL_COLUMN)?, find(CATEGORY_COLUMN)?, find(SUBCATEGORY_COLUMN)?];

    let rows: Vec<csv::StringRecord> = csv.records().collect::<std::result::Result<_, _>>()?;

    let candidate: Vec<usize> = (0..header.len()).filter(|i| !label_cols.contains(i)).collect();
    let mut numeric = Vec::new();
    let mut text_columns = Vec::new();
    for &c in &candidate {
        let first = rows.iter().map(|r| r.get(c).unwrap_or("")).find(|s| !s.is_empty());
        match first {
            Some(cell) if cell.parse::<f64>().is_err() => text_columns.push(header[c].clone()),
            _ => numeric.push(c),
        }
    }

    let mut malformed = Vec::new();
    let mut records = Vec::with_capacity(rows.len());
    for (row_idx, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(Error::Schema(format!(
                "row {row_idx} has {} fields, header has {}",
                row.len(),
                header.len()
            )));
        }
        let values = numeric
            .iter()
            .map(|&c| {
                let cell = &row[c];
                cell.parse::<f64>().unwrap_or_else(|_| {
                    malformed.push(MalformedCell {
                        row: row_idx,
                        column: header[c].clone(),
                        text: cell.to_owned(),
                    });
                    f64::NAN
                })
            })
            .collect();
        let label = HierLabel::new(&row[label_cols[0]], &row[label_cols[1]], &row[label_cols[2]]);
        records.push(FlowRecord { values, label });
    }

    let table = FlowTable {
        columns: numeric.iter().map(|&c| header[c].clone()).collect(),
        records,
        text_columns,
        malformed,
    };
    check_hierarchy(&table.labels())?;
    Ok(table)
}

/// Writes a table as CSV: feature columns followed by the three label columns.
pub fn write_csv(table: &FlowTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let mut header: Vec<&str> = table.columns.iter().map(String::as_str).collect();
    header.extend([LABEL_COLUMN, CATEGORY_COLUMN, SUBCATEGORY_COLUMN]);
    out.write_record(&header)?;
    let mut fields: Vec<String> = Vec::with_capacity(header.len());
    for record in &table.records {
        fields.clear();
        fields.extend(record.values.iter().map(|v| v.to_string()));
        fields.push(record.label.binary.clone());
        fields.push(record.label.category.clone());
        fields.push(record.label.subcategory.clone());
        out.write_record(&fields)?;
    }
    out.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = "\
Flow_ID,Src_IP,Flow_Duration,Tot_Fwd_Pkts,Label,Cat,Sub_Cat
a-1,192.168.0.13,75,1,Normal,Normal,Normal
a-2,192.168.0.24,5310,2,Anomaly,Mirai,Mirai-UDP Flooding
a-3,192.168.0.13,141,x,Anomaly,DoS,DoS-Synflooding
";

    #[test]
    fn three_row_fixture() {
        let table = read_csv(FIXTURE.as_bytes()).unwrap();
        assert_eq!(table.len(), 3);
        assert_eq!(table.columns, vec!["Flow_Duration", "Tot_Fwd_Pkts"]);
        assert_eq!(table.text_columns, vec!["Flow_ID", "Src_IP"]);
        assert_eq!(table.value(1, "Flow_Duration"), Some(5310.0));
        assert_eq!(table.records[2].label.subcategory, "DoS-Synflooding");
        assert_eq!(table.records[0].label.binary, "Normal");
        assert!(table.value(2, "Tot_Fwd_Pkts").unwrap().is_nan());
        assert_eq!(
            table.malformed,
            vec![MalformedCell {
                row: 2,
                column: "Tot_Fwd_Pkts".into(),
                text: "x".into()
            }]
        );
    }

    #[test]
    fn missing_label_column_is_a_schema_error() {
        let text = "Flow_Duration,Cat,Sub_Cat\n1,Normal,Normal\n";
        assert!(matches!(read_csv(text.as_bytes()), Err(Error::Schema(_))));
    }

    #[test]
    fn infinity_tokens_parse() {
        let text = "Flow_Byts/s,Label,Cat,Sub_Cat\nInfinity,Normal,Normal,Normal\nNaN,Normal,Normal,Normal\n-inf,Normal,Normal,Normal\n";
        let table = read_csv(text.as_bytes()).unwrap();
        assert_eq!(table.records[0].values[0], f64::INFINITY);
        assert!(table.records[1].values[0].is_nan());
        assert_eq!(table.records[2].values[0], f64::NEG_INFINITY);
        assert!(table.malformed.is_empty());
    }

    #[test]
    fn unreadable_file_is_an_io_error() {
        assert!(matches!(load_csv("/nonexistent/flows.csv"), Err(Error::Io { .. })));
    }

    #[test]
    fn write_then_read_round_trips() {
        let table = read_csv(FIXTURE.as_bytes()).unwrap();
        let mut table = table;
        table.records[2].values[1] = 3.5;
        table.malformed.clear();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("flows.csv");
        write_csv(&table, &path).unwrap();
        let mut back = load_csv(&path).unwrap();
        back.text_columns = table.text_columns.clone();
        assert_eq!(back, table);
    }
}
