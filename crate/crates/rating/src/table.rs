use std::collections::BTreeMap;
use std::io::{Read, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("feature table has no `workbook_id` column")]
    MissingIdColumn,
    #[error("workbook `{id}` has {got} values, expected {expected}")]
    Width { id: String, got: usize, expected: usize },
    #[error("workbook `{id}` appears twice")]
    Duplicate { id: String },
    #[error("workbook `{id}`, feature `{feature}`: `{value}` is not a finite number")]
    BadValue { id: String, feature: String, value: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Per-workbook feature rows keyed by workbook id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    names: Vec<String>,
    rows: BTreeMap<String, Vec<f64>>,
}

impl FeatureTable {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        Self {
            names: names.into_iter().map(Into::into).collect(),
            rows: BTreeMap::new(),
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, workbook_id: &str) -> Option<&[f64]> {
        self.rows.get(workbook_id).map(Vec::as_slice)
    }

    pub fn rows(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.rows.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn insert(&mut self, workbook_id: impl Into<String>, values: Vec<f64>) -> Result<(), TableError> {
        let id = workbook_id.into();
        if values.len() != self.names.len() {
            return Err(TableError::Width {
                id,
                got: values.len(),
                expected: self.names.len(),
            });
        }
        if self.rows.contains_key(&id) {
            return Err(TableError::Duplicate { id });
        }
        self.rows.insert(id, values);
        Ok(())
    }

    /// A copy with every value replaced by zero.
    pub fn zeroed(&self) -> Self {
        Self {
            names: self.names.clone(),
            rows: self.rows.iter().map(|(k, v)| (k.clone(), vec![0.0; v.len()])).collect(),
        }
    }

    /// Parse a CSV whose header is `workbook_id` followed by feature names.
    pub fn read_csv(reader: impl Read) -> Result<Self, TableError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        let id_col = headers
            .iter()
            .position(|h| h == "workbook_id")
            .ok_or(TableError::MissingIdColumn)?;
        let names: Vec<String> = headers
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != id_col)
            .map(|(_, h)| h.to_string())
            .collect();
        let mut table = FeatureTable::new(names.clone());
        for record in rdr.records() {
            let record = record?;
            let id = record.get(id_col).unwrap_or_default().to_string();
            let mut values = Vec::with_capacity(names.len());
            for (i, field) in record.iter().enumerate().filter(|(i, _)| *i != id_col) {
                let v: f64 = field.trim().parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                    TableError::BadValue {
                        id: id.clone(),
                        feature: headers.get(i).unwrap_or_default().to_string(),
                        value: field.to_string(),
                    }
                })?;
                values.push(v);
            }
            table.insert(id, values)?;
        }
        Ok(table)
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<(), TableError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(std::iter::once("workbook_id").chain(self.names.iter().map(String::as_str)))?;
        for (id, values) in &self.rows {
            let mut record = vec![id.clone()];
            record.extend(values.iter().map(|v| v.to_string()));
            w.write_record(&record)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}
