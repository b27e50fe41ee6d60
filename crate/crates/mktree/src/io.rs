//! File formats: CSV sample sets (with an optional cardinality sidecar),
//! dense joint tables as JSON, and score tables as JSON.
//!
//! The CSV layout is a header row naming the variables followed by one row of
//! nonnegative state indices per sample. Column order is the backbone order.
//! Cardinalities default to (max observed state + 1), clamped to at least 2,
//! unless `<input>.cards.json` provides `{"cardinalities": {"X1": 2, ...}}`.

use crate::error::{MkError, Result};
use crate::learn::{ScoreTableJson, TableScore};
use crate::tables::{Cardinalities, JointTable, SampleSet, VariableId};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// A parsed sample file: data, cardinalities, and the header names in
/// backbone order.
pub struct CsvData {
    pub samples: SampleSet,
    pub cards: Cardinalities,
    pub names: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct CardSidecar {
    cardinalities: BTreeMap<String, u32>,
}

pub fn read_csv_samples(path: &Path) -> Result<CsvData> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| MkError::Parse("empty sample file".into()))?;
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let n = names.len();
    if n == 0 || names.iter().any(|s| s.is_empty()) {
        return Err(MkError::Parse("malformed CSV header".into()));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let row: Vec<u32> = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u32>()
                    .map_err(|_| MkError::Parse(format!("bad state value on data row {}", lineno + 1)))
            })
            .collect::<Result<_>>()?;
        if row.len() != n {
            return Err(MkError::Parse(format!(
                "data row {} has {} fields, expected {n}",
                lineno + 1,
                row.len()
            )));
        }
        rows.push(row);
    }
    let samples = SampleSet::new(n, rows)?;
    let mut sizes: Vec<u32> = vec![2; n];
    for row in samples.rows() {
        for (j, &s) in row.iter().enumerate() {
            sizes[j] = sizes[j].max(s + 1);
        }
    }
    let sidecar = path.with_extension(format!(
        "{}cards.json",
        path.extension().map_or(String::new(), |e| format!("{}.", e.to_string_lossy()))
    ));
    if sidecar.is_file() {
        let side: CardSidecar = serde_json::from_str(&std::fs::read_to_string(&sidecar)?)?;
        for (name, &card) in &side.cardinalities {
            let j = names
                .iter()
                .position(|m| m == name)
                .ok_or_else(|| MkError::Parse(format!("sidecar names unknown variable {name}")))?;
            if card < sizes[j] {
                return Err(MkError::Parse(format!(
                    "sidecar cardinality {card} for {name} is below an observed state"
                )));
            }
            sizes[j] = card;
        }
    }
    let cards = Cardinalities::new(sizes)?;
    samples.validate(&cards)?;
    Ok(CsvData {
        samples,
        cards,
        names,
    })
}

/// A dense joint over X1..Xn as JSON: `{"cards": [...], "probs": [...]}` with
/// the last variable's state index varying fastest.
#[derive(Debug, Serialize, Deserialize)]
pub struct JointJson {
    pub cards: Vec<u32>,
    pub probs: Vec<f64>,
}

pub fn read_json_joint(path: &Path) -> Result<JointTable> {
    let json: JointJson = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let scope: Vec<VariableId> = (1..=json.cards.len() as u16).map(VariableId).collect();
    JointTable::new(scope, json.cards, json.probs)
}

pub fn write_json_joint(path: &Path, joint: &JointTable) -> Result<()> {
    let json = JointJson {
        cards: joint.cards().to_vec(),
        probs: joint.probs().to_vec(),
    };
    std::fs::write(path, serde_json::to_string_pretty(&json)?)?;
    Ok(())
}

pub fn read_score_table(path: &Path) -> Result<(TableScore, ScoreTableJson)> {
    let json: ScoreTableJson = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let table = TableScore::from_json(&json)?;
    Ok((table, json))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn csv_roundtrip_with_inferred_cards() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("data.csv");
        std::fs::write(&path, "X1,X2,X3\n0,1,2\n1,0,0\n0,0,1\n").unwrap();
        let data = read_csv_samples(&path).unwrap();
        assert_eq!(data.names, vec!["X1", "X2", "X3"]);
        assert_eq!(data.cards.sizes(), &[2, 2, 3]);
        assert_eq!(data.samples.len(), 3);
    }

    #[test]
    fn csv_sidecar_overrides_cards() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("data.csv");
        std::fs::write(&path, "A,B\n0,1\n1,0\n").unwrap();
        std::fs::write(
            dir.path().join("data.csv.cards.json"),
            r#"{"cardinalities": {"B": 4}}"#,
        )
        .unwrap();
        let data = read_csv_samples(&path).unwrap();
        assert_eq!(data.cards.sizes(), &[2, 4]);
        // A sidecar below the observed maximum is rejected.
        std::fs::write(
            dir.path().join("data.csv.cards.json"),
            r#"{"cardinalities": {"B": 1}}"#,
        )
        .unwrap();
        assert!(read_csv_samples(&path).is_err());
    }

    #[test]
    fn csv_rejects_ragged_and_nonnumeric_rows() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "X1,X2\n0,1,0\n").unwrap();
        assert!(read_csv_samples(&path).is_err());
        std::fs::write(&path, "X1,X2\n0,x\n").unwrap();
        assert!(read_csv_samples(&path).is_err());
        std::fs::write(&path, "").unwrap();
        assert!(read_csv_samples(&path).is_err());
    }

    #[test]
    fn joint_json_roundtrip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("joint.json");
        let scope = vec![VariableId(1), VariableId(2)];
        let joint = JointTable::new(scope, vec![2, 2], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        write_json_joint(&path, &joint).unwrap();
        let back = read_json_joint(&path).unwrap();
        assert_eq!(back.probs(), joint.probs());
        assert_eq!(back.cards(), joint.cards());
    }
}
