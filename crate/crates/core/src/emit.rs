//! Writing and reading solved groupings.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{group_balance, group_welfare, MetricsReport};
use crate::model::{partition_defect, Grouping, Instance, Params, StudentId, TopicId};
use crate::solver::Method;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(format!("unknown format {other:?} (expected json or csv)")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupRecord {
    pub topic: TopicId,
    pub members: Vec<StudentId>,
    pub balance: f64,
    pub welfare_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupingDocument {
    pub method: Method,
    pub params: Params,
    pub groups: Vec<GroupRecord>,
    pub metrics: MetricsReport,
}

impl GroupingDocument {
    /// Refuses groupings that leave a student out or break the bounds.
    pub fn new(
        grouping: &Grouping,
        metrics: &MetricsReport,
        instance: &Instance,
        method: Method,
    ) -> Result<Self> {
        if let Some(defect) = partition_defect(grouping, instance) {
            return Err(Error::IncompletePartition(defect));
        }
        let groups = grouping
            .groups()
            .map(|(topic, members)| {
                Ok(GroupRecord {
                    topic,
                    members: members.to_vec(),
                    balance: group_balance(members, instance.students())?,
                    welfare_sum: group_welfare(members, topic, instance.welfare()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupingDocument {
            method,
            params: instance.params(),
            groups,
            metrics: metrics.clone(),
        })
    }

    pub fn grouping(&self) -> Result<Grouping> {
        Grouping::from_groups(self.groups.iter().map(|g| (g.topic, g.members.clone())))
    }
}

/// JSON writes the whole document; CSV writes the metrics row.
pub fn emit_grouping<W: Write>(
    doc: &GroupingDocument,
    format: OutputFormat,
    mut writer: W,
) -> Result<()> {
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut writer, doc)?;
            writeln!(writer).map_err(|e| Error::io("<json>", e))?;
        }
        OutputFormat::Csv => {
            let mut out = csv::Writer::from_writer(writer);
            out.write_record(MetricsReport::CSV_HEADER)?;
            out.write_record(doc.metrics.csv_record(
                doc.method.as_str(),
                doc.params.bounds.lower,
                doc.params.bounds.upper,
            ))?;
            out.flush().map_err(|e| Error::io("<csv>", e))?;
        }
    }
    Ok(())
}

pub fn write_grouping(
    doc: &GroupingDocument,
    path: impl AsRef<Path>,
    format: OutputFormat,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    emit_grouping(doc, format, &mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn parse_grouping<R: Read>(reader: R) -> Result<GroupingDocument> {
    Ok(serde_json::from_reader(reader)?)
}

pub fn read_grouping(path: impl AsRef<Path>) -> Result<GroupingDocument> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_grouping(BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristic::{heuristic_solve, HeuristicConfig};
    use crate::model::fixtures::five_by_four;

    fn solved() -> (Instance, GroupingDocument) {
        let inst = five_by_four();
        let sol = heuristic_solve(&inst, &HeuristicConfig::default()).unwrap();
        let doc =
            GroupingDocument::new(&sol.grouping, &sol.metrics, &inst, Method::Heuristic).unwrap();
        (inst, doc)
    }

    #[test]
    fn json_round_trip() {
        let (_, doc) = solved();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.json");
        write_grouping(&doc, &path, OutputFormat::Json).unwrap();
        let back = read_grouping(&path).unwrap();
        assert_eq!(back, doc);
        let sizes: Vec<usize> = back.groups.iter().map(|g| g.members.len()).collect();
        assert_eq!(sizes, back.metrics.cardinalities);
    }

    #[test]
    fn key_order_is_stable() {
        let (_, doc) = solved();
        let mut a = Vec::new();
        let mut b = Vec::new();
        emit_grouping(&doc, OutputFormat::Json, &mut a).unwrap();
        emit_grouping(&doc, OutputFormat::Json, &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        let pos = |k: &str| text.find(&format!("\"{k}\"")).unwrap();
        assert!(
            pos("method") < pos("params")
                && pos("params") < pos("groups")
                && pos("groups") < pos("metrics")
        );
    }

    #[test]
    fn incomplete_partition_is_refused() {
        let (inst, doc) = solved();
        let mut groups: Vec<(usize, Vec<usize>)> = doc
            .grouping()
            .unwrap()
            .groups()
            .map(|(t, m)| (t, m.to_vec()))
            .collect();
        groups[0].1.pop();
        let partial = Grouping::from_groups(groups).unwrap();
        let err =
            GroupingDocument::new(&partial, &doc.metrics, &inst, Method::Heuristic).unwrap_err();
        assert!(matches!(err, Error::IncompletePartition(_)));
    }

    #[test]
    fn csv_has_one_row() {
        let (_, doc) = solved();
        let mut buf = Vec::new();
        emit_grouping(&doc, OutputFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("method,C_l,C_u,k"));
    }

    #[test]
    fn unwritable_path_is_an_io_error() {
        let (_, doc) = solved();
        let err =
            write_grouping(&doc, "/nonexistent-dir/x/g.json", OutputFormat::Json).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
