//! Birth records, record files and ground-truth files.
//!
//! A record file is comma-separated text with a header row. The header must
//! contain `id` and `date` (ISO `YYYY-MM-DD`) plus every schema attribute;
//! extra columns are ignored. An empty field is a missing value.
//!
//! A ground-truth file has the header `record_id,entity_id`, one row per record.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type RecordId = u64;

pub const DATE_FORMAT: &str = "%Y-%m-%d";

/// Attribute names of a birth certificate, in file column order.
pub const STANDARD_ATTRIBUTES: [&str; 15] = [
    "father_first",
    "father_last",
    "mother_first",
    "mother_last",
    "mother_maiden",
    "marriage_day",
    "marriage_month",
    "marriage_year",
    "marriage_place1",
    "marriage_place2",
    "occupation_father",
    "occupation_mother",
    "address1",
    "address2",
    "parish",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Schema {
    names: Vec<String>,
}

impl Schema {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut seen = HashSet::new();
        for name in &names {
            if name.is_empty() {
                return Err(Error::InvalidSchema("empty attribute name".into()));
            }
            if name == "id" || name == "date" {
                return Err(Error::InvalidSchema(format!(
                    "{name:?} is a reserved column"
                )));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidSchema(format!(
                    "duplicate attribute {name:?}"
                )));
            }
        }
        Ok(Self { names })
    }

    pub fn standard() -> Self {
        Self::new(STANDARD_ATTRIBUTES).expect("standard schema is valid")
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

impl TryFrom<Vec<String>> for Schema {
    type Error = Error;

    fn try_from(names: Vec<String>) -> Result<Self> {
        Schema::new(names)
    }
}

impl From<Schema> for Vec<String> {
    fn from(schema: Schema) -> Self {
        schema.names
    }
}

/// One birth registration. Attribute values are positional, aligned with the
/// schema of the owning [`RecordSet`]; `None` is a missing value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub id: RecordId,
    pub date: NaiveDate,
    values: Vec<Option<String>>,
}

impl Record {
    pub fn new(id: RecordId, date: NaiveDate, values: Vec<Option<String>>) -> Self {
        Self { id, date, values }
    }

    pub fn value(&self, index: usize) -> Option<&str> {
        self.values.get(index).and_then(|v| v.as_deref())
    }

    pub fn values(&self) -> &[Option<String>] {
        &self.values
    }
}

#[derive(Debug, Clone)]
pub struct RecordSet {
    schema: Schema,
    records: Vec<Record>,
    by_id: HashMap<RecordId, usize>,
}

impl PartialEq for RecordSet {
    fn eq(&self, other: &Self) -> bool {
        self.schema == other.schema && self.records == other.records
    }
}

impl RecordSet {
    pub fn new(schema: Schema, records: Vec<Record>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if r.values.len() != schema.len() {
                return Err(Error::SchemaMismatch {
                    id: r.id,
                    got: r.values.len(),
                    expected: schema.len(),
                });
            }
            if by_id.insert(r.id, i).is_some() {
                return Err(Error::DuplicateId(r.id));
            }
        }
        Ok(Self {
            schema,
            records,
            by_id,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: RecordId) -> Option<&Record> {
        self.by_id.get(&id).map(|&i| &self.records[i])
    }

    pub fn contains(&self, id: RecordId) -> bool {
        self.by_id.contains_key(&id)
    }

    /// Record ids in ascending order.
    pub fn ids(&self) -> Vec<RecordId> {
        let mut ids: Vec<RecordId> = self.records.iter().map(|r| r.id).collect();
        ids.sort_unstable();
        ids
    }

    /// Looks up an attribute by name.
    pub fn value<'a>(&self, record: &'a Record, attribute: &str) -> Option<&'a str> {
        self.schema
            .index_of(attribute)
            .and_then(|i| record.value(i))
    }

    pub fn load(path: impl AsRef<Path>, schema: &Schema) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, schema)
    }

    pub fn read_csv<R: Read>(reader: R, schema: &Schema) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::None)
            .from_reader(reader);
        let header = rdr.headers()?.clone();
        let column = |name: &str| -> Result<usize> {
            header
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::MissingColumn(name.to_string()))
        };
        let id_col = column("id")?;
        let date_col = column("date")?;
        let attr_cols = schema
            .names()
            .iter()
            .map(|n| column(n))
            .collect::<Result<Vec<_>>>()?;

        let mut records = Vec::new();
        let mut seen = HashSet::new();
        for row in rdr.records() {
            let row = row?;
            let line = row.position().map(|p| p.line()).unwrap_or(0);
            let field = |col: usize| row.get(col).unwrap_or("");

            let raw_id = field(id_col);
            let id: RecordId = raw_id.trim().parse().map_err(|_| Error::BadId {
                row: line,
                value: raw_id.to_string(),
            })?;
            if !seen.insert(id) {
                return Err(Error::DuplicateId(id));
            }
            let raw_date = field(date_col);
            let date = NaiveDate::parse_from_str(raw_date.trim(), DATE_FORMAT).map_err(|_| {
                Error::BadDate {
                    row: line,
                    value: raw_date.to_string(),
                }
            })?;
            let values = attr_cols
                .iter()
                .map(|&c| {
                    let v = field(c);
                    (!v.is_empty()).then(|| v.to_string())
                })
                .collect();
            records.push(Record::new(id, date, values));
        }
        Self::new(schema.clone(), records)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["id", "date"];
        header.extend(self.schema.names().iter().map(String::as_str));
        wtr.write_record(&header)?;
        for r in &self.records {
            let mut row = Vec::with_capacity(header.len());
            row.push(r.id.to_string());
            row.push(r.date.format(DATE_FORMAT).to_string());
            row.extend(r.values.iter().map(|v| v.clone().unwrap_or_default()));
            wtr.write_record(&row)?;
        }
        wtr.flush().map_err(|e| Error::io("<records>", e))?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(file)
    }
}

/// Expert (or generated) assignment of records to real-world entities.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    assignment: BTreeMap<RecordId, String>,
}

impl GroundTruth {
    pub fn new(assignment: BTreeMap<RecordId, String>, records: &RecordSet) -> Result<Self> {
        if let Some(&id) = assignment.keys().find(|id| !records.contains(**id)) {
            return Err(Error::UnknownRecord(id));
        }
        Ok(Self { assignment })
    }

    pub fn entity_of(&self, id: RecordId) -> Option<&str> {
        self.assignment.get(&id).map(String::as_str)
    }

    pub fn assignment(&self) -> &BTreeMap<RecordId, String> {
        &self.assignment
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Entity id → member record ids.
    pub fn partition(&self) -> BTreeMap<&str, BTreeSet<RecordId>> {
        let mut out: BTreeMap<&str, BTreeSet<RecordId>> = BTreeMap::new();
        for (&id, entity) in &self.assignment {
            out.entry(entity.as_str()).or_default().insert(id);
        }
        out
    }

    pub fn load(path: impl AsRef<Path>, records: &RecordSet) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, records)
    }

    pub fn read_csv<R: Read>(reader: R, records: &RecordSet) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let mut assignment = BTreeMap::new();
        for row in rdr.records() {
            let row = row?;
            let line = row.position().map(|p| p.line()).unwrap_or(0);
            if row.len() != 2 {
                return Err(Error::BadRow {
                    row: line,
                    message: format!("expected 2 columns, found {}", row.len()),
                });
            }
            let id: RecordId = row[0].trim().parse().map_err(|_| Error::BadId {
                row: line,
                value: row[0].to_string(),
            })?;
            if !records.contains(id) {
                return Err(Error::UnknownRecord(id));
            }
            if assignment.insert(id, row[1].trim().to_string()).is_some() {
                return Err(Error::DuplicateId(id));
            }
        }
        Ok(Self { assignment })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["record_id", "entity_id"])?;
        for (id, entity) in &self.assignment {
            wtr.write_record([id.to_string().as_str(), entity.as_str()])?;
        }
        wtr.flush().map_err(|e| Error::io("<ground truth>", e))?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(file)
    }
}
