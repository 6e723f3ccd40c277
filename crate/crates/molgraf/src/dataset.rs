//! Dataset file handling and the synthetic regression target.
//!
//! Datasets are UTF-8 CSV files with the exact header `smiles,target`,
//! one molecule per row. The synthetic target is a fixed linear formula
//! over graph counts, so models can demonstrably learn it without any
//! external property data.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::smiles::{parse, Element, MolecularGraph, SmilesError};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("expected header \"smiles,target\", found {found:?}")]
    BadHeader { found: String },
    #[error("line {line}: expected two comma-separated fields, found {found}")]
    BadRow { line: usize, found: usize },
    #[error("line {line}: invalid SMILES: {source}")]
    Smiles {
        line: usize,
        #[source]
        source: SmilesError,
    },
    #[error("line {line}: target {text:?} is not a number")]
    BadTarget { line: usize, text: String },
    #[error("dataset has no rows")]
    Empty,
}

/// A deterministic, graph-computable stand-in property:
/// 0.5 per carbon, -1.0 per nitrogen or oxygen, +0.3 per aromatic atom,
/// -0.1 per bond.
pub fn pseudo_property(graph: &MolecularGraph) -> f64 {
    let mut carbons = 0usize;
    let mut hetero = 0usize;
    let mut aromatic = 0usize;
    for atom in &graph.atoms {
        match atom.element {
            Element::C => carbons += 1,
            Element::N | Element::O => hetero += 1,
            _ => {}
        }
        if atom.aromatic {
            aromatic += 1;
        }
    }
    0.5 * carbons as f64 - 1.0 * hetero as f64 + 0.3 * aromatic as f64
        - 0.1 * graph.bond_count() as f64
}

/// Parse every row of a `smiles,target` CSV into graphs with targets.
/// Any malformed row aborts the load with its line number.
pub fn load_dataset(path: &Path) -> Result<Vec<(MolecularGraph, f64)>, DatasetError> {
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_dataset(&text)
}

/// Parser behind [`load_dataset`], split out so tests can feed text
/// directly.
pub fn parse_dataset(text: &str) -> Result<Vec<(MolecularGraph, f64)>, DatasetError> {
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, l)| l.trim_end()).unwrap_or("");
    if header != "smiles,target" {
        return Err(DatasetError::BadHeader {
            found: header.to_string(),
        });
    }
    let mut records = Vec::new();
    for (idx, raw) in lines {
        // Data rows are numbered from 1; the header is row 0.
        let line = idx;
        let row = raw.trim_end();
        if row.is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 2 {
            return Err(DatasetError::BadRow {
                line,
                found: fields.len(),
            });
        }
        let graph = parse(fields[0]).map_err(|source| DatasetError::Smiles { line, source })?;
        let target: f64 = fields[1]
            .trim()
            .parse()
            .map_err(|_| DatasetError::BadTarget {
                line,
                text: fields[1].to_string(),
            })?;
        records.push((graph, target));
    }
    if records.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(records)
}

/// Write rows in the same CSV dialect [`load_dataset`] reads.
pub fn write_dataset(path: &Path, rows: &[(String, f64)]) -> io::Result<()> {
    let mut out = String::from("smiles,target\n");
    for (smiles, target) in rows {
        out.push_str(smiles);
        out.push(',');
        out.push_str(&format!("{target}"));
        out.push('\n');
    }
    fs::write(path, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pseudo_property_hand_values() {
        assert_eq!(pseudo_property(&parse("C").unwrap()), 0.5);
        let ethanol = pseudo_property(&parse("CCO").unwrap());
        assert!((ethanol - (-0.2)).abs() < 1e-12, "{ethanol}");
        let benzene = pseudo_property(&parse("c1ccccc1").unwrap());
        assert!((benzene - 4.2).abs() < 1e-12, "{benzene}");
    }

    #[test]
    fn round_trip_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mols.csv");
        let rows = vec![
            ("CCO".to_string(), -0.2),
            ("c1ccccc1".to_string(), 4.2),
            ("CC(C)O".to_string(), 0.65),
        ];
        write_dataset(&path, &rows).unwrap();
        let loaded = load_dataset(&path).unwrap();
        assert_eq!(loaded.len(), 3);
        assert_eq!(loaded[0].0.atom_count(), 3);
        assert_eq!(loaded[1].1, 4.2);
    }

    #[test]
    fn header_is_mandatory() {
        let err = parse_dataset("smile,target\nCCO,1.0\n").unwrap_err();
        assert!(matches!(err, DatasetError::BadHeader { .. }));
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let err = parse_dataset("smiles,target\nCCO,1.0\nCCO\n").unwrap_err();
        assert!(matches!(err, DatasetError::BadRow { line: 2, found: 1 }));

        let err = parse_dataset("smiles,target\nC$O,1.0\n").unwrap_err();
        assert!(matches!(err, DatasetError::Smiles { line: 1, .. }));

        let err = parse_dataset("smiles,target\nCCO,abc\n").unwrap_err();
        assert!(matches!(err, DatasetError::BadTarget { line: 1, .. }));
    }

    #[test]
    fn empty_dataset_is_rejected() {
        assert!(matches!(
            parse_dataset("smiles,target\n"),
            Err(DatasetError::Empty)
        ));
    }

    #[test]
    fn blank_lines_are_skipped() {
        let records = parse_dataset("smiles,target\nCCO,1.0\n\nC,0.5\n").unwrap();
        assert_eq!(records.len(), 2);
    }
}
