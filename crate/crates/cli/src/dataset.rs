//! Labeled dataset ingestion.
//!
//! Reads the two table formats the benchmark corpora come in: ARFF with
//! numeric feature attributes plus one nominal label attribute, and plain
//! CSV with a header row. Anything richer (string attributes, extra nominal
//! columns, missing values) is rejected with the offending row or attribute
//! named, since silently dropping columns would change the distance space.

use std::fs;
use std::io;
use std::path::Path;

use clap::ValueEnum;
use lookout_core::DataVector;
use thiserror::Error;

/// Supported input formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Arff,
    Csv,
}

impl Format {
    /// Guess the format from the file extension.
    pub fn infer(path: &Path) -> Option<Format> {
        match path
            .extension()
            .and_then(|e| e.to_str())?
            .to_ascii_lowercase()
            .as_str()
        {
            "arff" => Some(Format::Arff),
            "csv" => Some(Format::Csv),
            _ => None,
        }
    }
}

/// A dataset replayed as a stream: vectors in file order with 1-based
/// arrival indices, one outlier flag per vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledStream {
    pub name: String,
    pub vectors: Vec<DataVector>,
    pub labels: Vec<bool>,
    pub dims: usize,
}

impl LabeledStream {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn outlier_count(&self) -> usize {
        self.labels.iter().filter(|&&o| o).count()
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("file not found: {path}")]
    FileNotFound { path: String },
    #[error("failed to read {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("malformed header line: {line:?}")]
    MalformedHeader { line: String },
    #[error("attribute {name:?} has unsupported type {declared:?}; only numeric features plus one nominal label are accepted")]
    UnsupportedAttribute { name: String, declared: String },
    #[error("label column {column:?} not present")]
    MissingLabelColumn { column: String },
    #[error("label column {column:?} is numeric; a nominal label attribute is required")]
    NumericLabelColumn { column: String },
    #[error("outlier label {label:?} is not in the declared domain {domain:?}")]
    OutlierLabelNotInDomain { label: String, domain: Vec<String> },
    #[error("malformed row {index}: {reason}")]
    MalformedRow { index: usize, reason: String },
    #[error("unknown label value {value:?} in row {index}")]
    UnknownLabelValue { index: usize, value: String },
    #[error("no @data section")]
    MissingDataSection,
    #[error("need at least one feature attribute besides the label")]
    NoFeatureAttributes,
    #[error("no data rows")]
    NoData,
}

/// Parse a labeled dataset file into a replayable stream.
///
/// Numeric attributes become vector dimensions in declaration order; the
/// label column is mapped to a flag by exact comparison with
/// `outlier_label`. Row indices in errors are 1-based data row numbers.
pub fn parse_dataset(
    path: &Path,
    format: Format,
    label_column: &str,
    outlier_label: &str,
) -> Result<LabeledStream, DatasetError> {
    let text = fs::read_to_string(path).map_err(|e| {
        let path = path.display().to_string();
        if e.kind() == io::ErrorKind::NotFound {
            DatasetError::FileNotFound { path }
        } else {
            DatasetError::Io { path, source: e }
        }
    })?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset")
        .to_string();
    match format {
        Format::Arff => parse_arff(&text, stem, label_column, outlier_label),
        Format::Csv => parse_csv(&text, stem, label_column, outlier_label),
    }
}

enum AttrKind {
    Numeric,
    Nominal(Vec<String>),
}

struct Attr {
    name: String,
    kind: AttrKind,
}

/// Strip one matching pair of surrounding single or double quotes.
fn unquote(s: &str) -> &str {
    let s = s.trim();
    let b = s.as_bytes();
    if b.len() >= 2 && (b[0] == b'\'' || b[0] == b'"') && b[b.len() - 1] == b[0] {
        &s[1..s.len() - 1]
    } else {
        s
    }
}

/// Split an @attribute body into (name, declared type); the name may be
/// quoted and contain spaces.
fn split_attribute(rest: &str) -> Option<(String, String)> {
    let rest = rest.trim();
    let b = rest.as_bytes();
    if b.first() == Some(&b'\'') || b.first() == Some(&b'"') {
        let quote = b[0] as char;
        let end = rest[1..].find(quote)? + 1;
        let ty = rest[end + 1..].trim();
        if ty.is_empty() {
            return None;
        }
        Some((rest[1..end].to_string(), ty.to_string()))
    } else {
        let mut parts = rest.splitn(2, char::is_whitespace);
        let name = parts.next()?.to_string();
        let ty = parts.next()?.trim().to_string();
        if name.is_empty() || ty.is_empty() {
            None
        } else {
            Some((name, ty))
        }
    }
}

fn classify_attribute(name: &str, declared: &str) -> Result<AttrKind, DatasetError> {
    let declared = declared.trim();
    if let Some(body) = declared.strip_prefix('{') {
        let body = body
            .strip_suffix('}')
            .ok_or_else(|| DatasetError::UnsupportedAttribute {
                name: name.to_string(),
                declared: declared.to_string(),
            })?;
        let values: Vec<String> = body.split(',').map(|v| unquote(v).to_string()).collect();
        return Ok(AttrKind::Nominal(values));
    }
    match declared.to_ascii_lowercase().as_str() {
        "numeric" | "real" | "integer" => Ok(AttrKind::Numeric),
        _ => Err(DatasetError::UnsupportedAttribute {
            name: name.to_string(),
            declared: declared.to_string(),
        }),
    }
}

fn parse_arff(
    text: &str,
    stem: String,
    label_column: &str,
    outlier_label: &str,
) -> Result<LabeledStream, DatasetError> {
    let mut name = stem;
    let mut attrs: Vec<Attr> = Vec::new();
    let mut label: Option<(usize, Vec<String>)> = None;
    let mut in_data = false;
    let mut vectors = Vec::new();
    let mut labels = Vec::new();
    let mut row_index = 0usize;

    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if !in_data {
            let lower = line.to_ascii_lowercase();
            if let Some(rest) = lower.strip_prefix("@relation") {
                let rest_len = rest.len();
                name = unquote(line[line.len() - rest_len..].trim()).to_string();
            } else if lower.starts_with("@attribute") {
                let body = &line["@attribute".len()..];
                let (attr_name, declared) =
                    split_attribute(body).ok_or_else(|| DatasetError::MalformedHeader {
                        line: line.to_string(),
                    })?;
                let kind = classify_attribute(&attr_name, &declared)?;
                attrs.push(Attr {
                    name: attr_name,
                    kind,
                });
            } else if lower.starts_with("@data") {
                label = Some(resolve_label(&attrs, label_column, outlier_label)?);
                in_data = true;
            } else {
                return Err(DatasetError::MalformedHeader {
                    line: line.to_string(),
                });
            }
            continue;
        }

        let (label_idx, domain) = label.as_ref().expect("set when @data was seen");
        row_index += 1;
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != attrs.len() {
            return Err(DatasetError::MalformedRow {
                index: row_index,
                reason: format!("expected {} values, got {}", attrs.len(), cells.len()),
            });
        }
        let mut values = Vec::with_capacity(attrs.len() - 1);
        for (i, cell) in cells.iter().enumerate() {
            if i == *label_idx {
                let value = unquote(cell);
                if !domain.iter().any(|d| d == value) {
                    return Err(DatasetError::UnknownLabelValue {
                        index: row_index,
                        value: value.to_string(),
                    });
                }
                labels.push(value == outlier_label);
            } else {
                values.push(parse_feature(cell, &attrs[i].name, row_index)?);
            }
        }
        vectors.push(DataVector::new(row_index as u64, values));
    }

    if !in_data {
        return Err(DatasetError::MissingDataSection);
    }
    if vectors.is_empty() {
        return Err(DatasetError::NoData);
    }
    let dims = attrs.len() - 1;
    Ok(LabeledStream {
        name,
        vectors,
        labels,
        dims,
    })
}

/// Locate the label attribute and check the benchmark shape: every other
/// attribute numeric, the label nominal with the outlier value in domain.
fn resolve_label(
    attrs: &[Attr],
    label_column: &str,
    outlier_label: &str,
) -> Result<(usize, Vec<String>), DatasetError> {
    let label_idx = attrs
        .iter()
        .position(|a| a.name.eq_ignore_ascii_case(label_column))
        .ok_or_else(|| DatasetError::MissingLabelColumn {
            column: label_column.to_string(),
        })?;
    if attrs.len() < 2 {
        return Err(DatasetError::NoFeatureAttributes);
    }
    let domain = match &attrs[label_idx].kind {
        AttrKind::Nominal(values) => values.clone(),
        AttrKind::Numeric => {
            return Err(DatasetError::NumericLabelColumn {
                column: label_column.to_string(),
            })
        }
    };
    if !domain.iter().any(|d| d == outlier_label) {
        return Err(DatasetError::OutlierLabelNotInDomain {
            label: outlier_label.to_string(),
            domain,
        });
    }
    for (i, attr) in attrs.iter().enumerate() {
        if i != label_idx {
            if let AttrKind::Nominal(_) = attr.kind {
                return Err(DatasetError::UnsupportedAttribute {
                    name: attr.name.clone(),
                    declared: "nominal".to_string(),
                });
            }
        }
    }
    Ok((label_idx, domain))
}

fn parse_feature(cell: &str, attr: &str, row_index: usize) -> Result<f64, DatasetError> {
    let x: f64 = cell.parse().map_err(|_| DatasetError::MalformedRow {
        index: row_index,
        reason: format!("non-numeric value {cell:?} in attribute {attr:?}"),
    })?;
    if !x.is_finite() {
        return Err(DatasetError::MalformedRow {
            index: row_index,
            reason: format!("non-finite value in attribute {attr:?}"),
        });
    }
    Ok(x)
}

fn parse_csv(
    text: &str,
    stem: String,
    label_column: &str,
    outlier_label: &str,
) -> Result<LabeledStream, DatasetError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or(DatasetError::NoData)?;
    let columns: Vec<&str> = header.split(',').map(unquote).collect();
    let label_idx = columns
        .iter()
        .position(|c| c.eq_ignore_ascii_case(label_column))
        .ok_or_else(|| DatasetError::MissingLabelColumn {
            column: label_column.to_string(),
        })?;
    if columns.len() < 2 {
        return Err(DatasetError::NoFeatureAttributes);
    }

    let mut vectors = Vec::new();
    let mut labels = Vec::new();
    for (row_index, line) in lines.enumerate() {
        let row_index = row_index + 1;
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != columns.len() {
            return Err(DatasetError::MalformedRow {
                index: row_index,
                reason: format!("expected {} values, got {}", columns.len(), cells.len()),
            });
        }
        let mut values = Vec::with_capacity(columns.len() - 1);
        for (i, cell) in cells.iter().enumerate() {
            if i == label_idx {
                labels.push(unquote(cell) == outlier_label);
            } else {
                values.push(parse_feature(cell, columns[i], row_index)?);
            }
        }
        vectors.push(DataVector::new(row_index as u64, values));
    }
    if vectors.is_empty() {
        return Err(DatasetError::NoData);
    }
    Ok(LabeledStream {
        name: stem,
        vectors,
        labels,
        dims: columns.len() - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(name: &str, contents: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(name);
        fs::write(&path, contents).unwrap();
        (dir, path)
    }

    const SMALL_ARFF: &str = "\
% toy table
@relation toy
@attribute x numeric
@attribute y real
@attribute class {no,yes}
@data
1.0,2.0,no
3.5,-1.25,yes
0.0,0.0,no
";

    #[test]
    fn arff_smoke() {
        let (_d, path) = write_temp("toy.arff", SMALL_ARFF);
        let s = parse_dataset(&path, Format::Arff, "class", "yes").unwrap();
        assert_eq!(s.name, "toy");
        assert_eq!(s.dims, 2);
        assert_eq!(s.len(), 3);
        assert_eq!(s.labels, vec![false, true, false]);
        assert_eq!(s.outlier_count(), 1);
        assert_eq!(s.vectors[1].t, 2);
        assert_eq!(s.vectors[1].values, vec![3.5, -1.25]);
    }

    #[test]
    fn arff_tolerates_case_quotes_and_comments() {
        let text = "\
@RELATION 'spaced name'
% mid-header comment
@ATTRIBUTE 'col one' NUMERIC
@Attribute cls {'a','b'}
@DATA
% data comment
2.5,'b'

1.5,a
";
        let (_d, path) = write_temp("t.arff", text);
        let s = parse_dataset(&path, Format::Arff, "cls", "b").unwrap();
        assert_eq!(s.name, "spaced name");
        assert_eq!(s.dims, 1);
        assert_eq!(s.labels, vec![true, false]);
    }

    #[test]
    fn arff_rejects_bad_feature_with_row_index() {
        let text = SMALL_ARFF.replace("3.5,-1.25,yes", "3.5,oops,yes");
        let (_d, path) = write_temp("t.arff", &text);
        let err = parse_dataset(&path, Format::Arff, "class", "yes").unwrap_err();
        match err {
            DatasetError::MalformedRow { index, .. } => assert_eq!(index, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn arff_rejects_wrong_arity_row() {
        let text = SMALL_ARFF.replace("0.0,0.0,no", "0.0,no");
        let (_d, path) = write_temp("t.arff", &text);
        let err = parse_dataset(&path, Format::Arff, "class", "yes").unwrap_err();
        assert!(matches!(err, DatasetError::MalformedRow { index: 3, .. }));
    }

    #[test]
    fn arff_rejects_label_outside_domain() {
        let text = SMALL_ARFF.replace("0.0,0.0,no", "0.0,0.0,maybe");
        let (_d, path) = write_temp("t.arff", &text);
        let err = parse_dataset(&path, Format::Arff, "class", "yes").unwrap_err();
        match err {
            DatasetError::UnknownLabelValue { index, value } => {
                assert_eq!(index, 3);
                assert_eq!(value, "maybe");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn arff_rejects_missing_label_column() {
        let (_d, path) = write_temp("t.arff", SMALL_ARFF);
        let err = parse_dataset(&path, Format::Arff, "target", "yes").unwrap_err();
        assert!(matches!(err, DatasetError::MissingLabelColumn { .. }));
    }

    #[test]
    fn arff_rejects_outlier_label_outside_domain() {
        let (_d, path) = write_temp("t.arff", SMALL_ARFF);
        let err = parse_dataset(&path, Format::Arff, "class", "anomaly").unwrap_err();
        assert!(matches!(err, DatasetError::OutlierLabelNotInDomain { .. }));
    }

    #[test]
    fn arff_rejects_second_nominal_attribute() {
        let text = SMALL_ARFF.replace("@attribute y real", "@attribute y {p,q}");
        let (_d, path) = write_temp("t.arff", &text);
        let err = parse_dataset(&path, Format::Arff, "class", "yes").unwrap_err();
        assert!(matches!(err, DatasetError::UnsupportedAttribute { .. }));
    }

    #[test]
    fn arff_rejects_string_attribute() {
        let text = SMALL_ARFF.replace("@attribute y real", "@attribute y string");
        let (_d, path) = write_temp("t.arff", &text);
        let err = parse_dataset(&path, Format::Arff, "class", "yes").unwrap_err();
        match err {
            DatasetError::UnsupportedAttribute { name, declared } => {
                assert_eq!(name, "y");
                assert_eq!(declared, "string");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn arff_requires_data_section() {
        let text = "@relation x\n@attribute a numeric\n@attribute c {n,y}\n";
        let (_d, path) = write_temp("t.arff", text);
        let err = parse_dataset(&path, Format::Arff, "c", "y").unwrap_err();
        assert!(matches!(err, DatasetError::MissingDataSection));
    }

    #[test]
    fn csv_smoke() {
        let text = "x,y,class\n1,2,n\n5,6,o\n3,4,n\n";
        let (_d, path) = write_temp("tiny.csv", text);
        let s = parse_dataset(&path, Format::Csv, "class", "o").unwrap();
        assert_eq!(s.name, "tiny");
        assert_eq!(s.dims, 2);
        assert_eq!(s.labels, vec![false, true, false]);
        assert_eq!(s.vectors[2].values, vec![3.0, 4.0]);
        assert_eq!(s.vectors[2].t, 3);
    }

    #[test]
    fn csv_rejects_bad_cell_with_row_index() {
        let text = "x,class\n1,n\nzap,o\n";
        let (_d, path) = write_temp("t.csv", text);
        let err = parse_dataset(&path, Format::Csv, "class", "o").unwrap_err();
        assert!(matches!(err, DatasetError::MalformedRow { index: 2, .. }));
    }

    #[test]
    fn missing_file_is_reported_as_such() {
        let err =
            parse_dataset(Path::new("/nope/absent.arff"), Format::Arff, "c", "y").unwrap_err();
        assert!(matches!(err, DatasetError::FileNotFound { .. }));
    }

    #[test]
    fn format_inference_uses_the_extension() {
        assert_eq!(Format::infer(Path::new("a/b.arff")), Some(Format::Arff));
        assert_eq!(Format::infer(Path::new("a/B.CSV")), Some(Format::Csv));
        assert_eq!(Format::infer(Path::new("a/b.txt")), None);
        assert_eq!(Format::infer(Path::new("bare")), None);
    }
}
