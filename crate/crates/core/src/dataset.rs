//! Reading and writing student datasets as comma-separated values.
//!
//! Expected layout (column names configurable through [`DatasetSchema`]):
//! `ID, Name, Gender, wish1..wishH, Time, T1..Tm`. At least one of `Time`
//! and the `T` priority columns must be present. When priority columns are
//! present they are taken verbatim as W; otherwise W is derived from the
//! registration times.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};

use crate::error::{Error, IngestError, Result};
use crate::model::{
    validate_instance, Category, DenseMatrix, Instance, Params, PriorityMatrix, Student,
    ValidationReport, WishMatrix,
};
use crate::welfare::{build_interest_matrix, build_priority_matrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetSchema {
    pub id: String,
    pub name: String,
    pub protected: String,
    pub wish_prefix: String,
    pub time: String,
    pub priority_prefix: String,
    /// Number of topics when the file has no priority columns. Defaults to
    /// the largest wished topic index.
    pub topics: Option<usize>,
}

impl Default for DatasetSchema {
    fn default() -> Self {
        DatasetSchema {
            id: "ID".into(),
            name: "Name".into(),
            protected: "Gender".into(),
            wish_prefix: "wish".into(),
            time: "Time".into(),
            priority_prefix: "T".into(),
            topics: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LoadedDataset {
    pub instance: Instance,
    pub report: ValidationReport,
}

/// `F`/`female`/`1` map to [`Category::One`]; `M`/`male`/`0` to [`Category::Zero`].
pub fn parse_category(raw: &str) -> Option<Category> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "f" | "female" | "w" | "1" => Some(Category::One),
        "m" | "male" | "0" => Some(Category::Zero),
        _ => None,
    }
}

fn category_label(c: Category) -> &'static str {
    match c {
        Category::One => "F",
        Category::Zero => "M",
    }
}

/// Integer ranks are taken as-is; ISO-8601 timestamps become Unix milliseconds.
pub fn parse_time(raw: &str) -> Option<i64> {
    let raw = raw.trim();
    if let Ok(v) = raw.parse::<i64>() {
        return Some(v);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.timestamp_millis());
    }
    const FORMATS: [&str; 4] = [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ];
    for fmt in FORMATS {
        if let Ok(dt) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(dt.and_utc().timestamp_millis());
        }
    }
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|dt| dt.and_utc().timestamp_millis())
}

fn numbered_columns(headers: &csv::StringRecord, prefix: &str) -> Vec<usize> {
    let lookup: BTreeMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    (1..)
        .map_while(|k| lookup.get(format!("{prefix}{k}").as_str()).copied())
        .collect()
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h == name)
}

pub fn load_dataset(
    path: impl AsRef<Path>,
    schema: &DatasetSchema,
    params: Params,
) -> Result<LoadedDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(file, schema, params)
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader)
}

fn ingest_csv(e: csv::Error) -> Error {
    IngestError::Csv(e.to_string()).into()
}

pub fn read_dataset<R: Read>(
    reader: R,
    schema: &DatasetSchema,
    params: Params,
) -> Result<LoadedDataset> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(ingest_csv)?.clone();
    let id_col = column(&headers, &schema.id)
        .ok_or_else(|| IngestError::MissingColumn(schema.id.clone()))?;
    let cat_col = column(&headers, &schema.protected)
        .ok_or_else(|| IngestError::MissingColumn(schema.protected.clone()))?;
    let name_col = column(&headers, &schema.name);
    let wish_cols = numbered_columns(&headers, &schema.wish_prefix);
    if wish_cols.is_empty() {
        return Err(IngestError::MissingColumn(format!("{}1", schema.wish_prefix)).into());
    }
    let time_col = column(&headers, &schema.time);
    let prio_cols = numbered_columns(&headers, &schema.priority_prefix);
    if time_col.is_none() && prio_cols.is_empty() {
        return Err(IngestError::NoPrioritySource.into());
    }
    if let (Some(m), false) = (schema.topics, prio_cols.is_empty()) {
        if m != prio_cols.len() {
            return Err(IngestError::PriorityColumnCount {
                expected: m,
                found: prio_cols.len(),
            }
            .into());
        }
    }

    let bad = |row: usize, col: usize, value: &str| IngestError::BadValue {
        row,
        column: headers.get(col).unwrap_or_default().to_string(),
        value: value.to_string(),
    };

    let mut students = Vec::new();
    let mut raw_wishes: Vec<Vec<i64>> = Vec::new();
    let mut priorities: Vec<Vec<f64>> = Vec::new();
    let mut seen_ids = HashSet::new();
    for (row_idx, record) in rdr.records().enumerate() {
        let record = record.map_err(ingest_csv)?;
        let row = row_idx + 1;
        let field = |col: usize| record.get(col).unwrap_or("");
        let external_id = field(id_col).to_string();
        if !seen_ids.insert(external_id.clone()) {
            return Err(IngestError::DuplicateStudentId(external_id).into());
        }
        let category =
            parse_category(field(cat_col)).ok_or_else(|| bad(row, cat_col, field(cat_col)))?;
        let registration = match time_col {
            Some(c) => Some(parse_time(field(c)).ok_or_else(|| bad(row, c, field(c)))?),
            None => None,
        };
        let wishes = wish_cols
            .iter()
            .map(|&c| field(c).parse::<i64>().map_err(|_| bad(row, c, field(c))))
            .collect::<Result<Vec<_>, _>>()?;
        let prio = prio_cols
            .iter()
            .map(|&c| {
                field(c)
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite() && *x >= 0.0)
                    .ok_or_else(|| bad(row, c, field(c)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        students.push(Student {
            id: row,
            category,
            registration,
            external_id,
            name: name_col.map(|c| field(c).to_string()).unwrap_or_default(),
        });
        raw_wishes.push(wishes);
        priorities.push(prio);
    }
    if students.is_empty() {
        return Err(IngestError::Empty.into());
    }

    let topics = if !prio_cols.is_empty() {
        prio_cols.len()
    } else {
        match schema.topics {
            Some(m) => m,
            None => raw_wishes
                .iter()
                .flatten()
                .copied()
                .max()
                .unwrap_or(0)
                .max(0) as usize,
        }
    };
    let mut rows = Vec::with_capacity(raw_wishes.len());
    for (i, raw) in raw_wishes.into_iter().enumerate() {
        let mut row = Vec::with_capacity(raw.len());
        for value in raw {
            if value < 1 || value as u64 > topics as u64 {
                return Err(IngestError::InvalidTopicIndex {
                    student: i + 1,
                    value,
                    topics,
                }
                .into());
            }
            row.push(value as usize);
        }
        rows.push(row);
    }
    let wishes = WishMatrix::new(rows);
    let h = wish_cols.len();
    let interest = build_interest_matrix(&wishes, h, topics)?;

    let mut notes = Vec::new();
    if time_col.is_some() {
        disambiguate_ties(&mut students, &wishes, topics, &mut notes);
    }
    let priority = if prio_cols.is_empty() {
        let times: Vec<i64> = students
            .iter()
            .map(|s| s.registration.unwrap_or_default())
            .collect();
        build_priority_matrix(&wishes, &times, topics)?
    } else {
        let mut w = DenseMatrix::zeros(students.len(), topics);
        for (i, row) in priorities.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                w.set(i + 1, j + 1, x);
            }
        }
        PriorityMatrix(w)
    };

    let instance = Instance::new(students, topics, wishes, interest, priority, params)?;
    let mut report = validate_instance(&instance);
    report.notes.extend(notes);
    Ok(LoadedDataset { instance, report })
}

/// When two choosers of one topic share a registration time, every student's
/// time is replaced by its rank in (time, id) order.
fn disambiguate_ties(
    students: &mut [Student],
    wishes: &WishMatrix,
    topics: usize,
    notes: &mut Vec<String>,
) {
    let mut per_topic: Vec<Vec<i64>> = vec![Vec::new(); topics];
    for (s, row) in wishes.rows() {
        for &t in row {
            per_topic[t - 1].push(students[s - 1].registration.unwrap_or_default());
        }
    }
    let tied_topics: Vec<usize> = per_topic
        .iter_mut()
        .enumerate()
        .filter_map(|(t, times)| {
            times.sort_unstable();
            times.windows(2).any(|w| w[0] == w[1]).then_some(t + 1)
        })
        .collect();
    if tied_topics.is_empty() {
        return;
    }
    let mut order: Vec<(i64, usize)> = students
        .iter()
        .map(|s| (s.registration.unwrap_or_default(), s.id))
        .collect();
    order.sort_unstable();
    for (rank, &(_, id)) in order.iter().enumerate() {
        students[id - 1].registration = Some(rank as i64 + 1);
    }
    notes.push(format!(
        "registration-time ties on topics {tied_topics:?} resolved by student order; times replaced by ranks"
    ));
}

/// Writes `instance` in the layout read by [`read_dataset`] with the default
/// schema. `comment` lines are emitted first, each prefixed with `# `.
pub fn write_dataset<W: Write>(instance: &Instance, writer: W, comment: &[String]) -> Result<()> {
    let mut writer = writer;
    for line in comment {
        writeln!(writer, "# {line}").map_err(|e| Error::io("<output>", e))?;
    }
    let schema = DatasetSchema::default();
    let with_time = instance.students().iter().all(|s| s.registration.is_some());
    let mut out = csv::Writer::from_writer(writer);
    let mut header = vec![
        schema.id.clone(),
        schema.name.clone(),
        schema.protected.clone(),
    ];
    header.extend((1..=instance.h()).map(|p| format!("{}{p}", schema.wish_prefix)));
    if with_time {
        header.push(schema.time.clone());
    }
    header.extend((1..=instance.topics()).map(|t| format!("{}{t}", schema.priority_prefix)));
    out.write_record(&header)?;
    let w = &instance.priority().0;
    for s in instance.students() {
        let mut rec = vec![
            s.external_id.clone(),
            s.name.clone(),
            category_label(s.category).to_string(),
        ];
        rec.extend(instance.wishes().row(s.id).iter().map(|t| t.to_string()));
        if with_time {
            rec.push(s.registration.unwrap_or_default().to_string());
        }
        rec.extend(w.row(s.id).iter().map(|x| x.to_string()));
        out.write_record(&rec)?;
    }
    out.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

/// Reads only the protected attribute column, e.g. a roster for the generator.
pub fn read_roster(path: impl AsRef<Path>, schema: &DatasetSchema) -> Result<Vec<Category>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv_reader(file);
    let headers = rdr.headers().map_err(ingest_csv)?.clone();
    let col = column(&headers, &schema.protected)
        .ok_or_else(|| IngestError::MissingColumn(schema.protected.clone()))?;
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(ingest_csv)?;
        let raw = record.get(col).unwrap_or("");
        out.push(parse_category(raw).ok_or_else(|| IngestError::BadValue {
            row: i + 1,
            column: schema.protected.clone(),
            value: raw.to_string(),
        })?);
    }
    if out.is_empty() {
        return Err(IngestError::Empty.into());
    }
    Ok(out)
}
