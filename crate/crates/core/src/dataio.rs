//! Dataset ingestion, preprocessing, and splitting.
//!
//! CSV dialect: comma-separated, UTF-8, optional header row auto-detected by
//! a non-numeric first row, fields trimmed, scientific notation accepted.
//! The label column must hold exactly two distinct values; they are mapped to
//! 0/1 by sorted order of their raw strings and the mapping is recorded on
//! the dataset so reports can echo it.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;

use crate::error::{invalid, Error, Result};
use crate::rng::substream_rng;

const SPLIT_TAG: u64 = 0x5350_4C49; // "SPLI"

/// A two-class dataset stored column-major: `p` feature columns of `m + n`
/// values plus an aligned 0/1 label vector. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Vec<f64>>,
    labels: Vec<u8>,
    feature_names: Option<Vec<String>>,
    label_name: Option<String>,
    /// Raw label strings mapped to 0 and 1, when loaded from a file.
    label_mapping: Option<[String; 2]>,
}

impl Dataset {
    pub fn from_columns(columns: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self> {
        let rows = labels.len();
        if rows == 0 {
            return Err(invalid("dataset has no rows"));
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::Schema(format!(
                    "column {j} has {} values, expected {rows}",
                    col.len()
                )));
            }
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::Schema(format!("label {bad} is not 0 or 1")));
        }
        Ok(Dataset {
            columns,
            labels,
            feature_names: None,
            label_name: None,
            label_mapping: None,
        })
    }

    pub fn with_names(mut self, feature_names: Vec<String>, label_name: String) -> Result<Self> {
        if feature_names.len() != self.n_features() {
            return Err(Error::Schema(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                self.n_features()
            )));
        }
        self.feature_names = Some(feature_names);
        self.label_name = Some(label_name);
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn label_mapping(&self) -> Option<&[String; 2]> {
        self.label_mapping.as_ref()
    }

    /// Counts of label-0 and label-1 rows.
    pub fn class_counts(&self) -> (usize, usize) {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        (self.labels.len() - ones, ones)
    }

    /// Errors unless both classes have at least `min_per_class` rows.
    pub fn require_two_classes(&self, min_per_class: usize) -> Result<(usize, usize)> {
        let (n0, n1) = self.class_counts();
        if n0 < min_per_class || n1 < min_per_class {
            return Err(invalid(format!(
                "need at least {min_per_class} rows per class, have {n0} and {n1}"
            )));
        }
        Ok((n0, n1))
    }

    /// The feature vector of row `i`.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|col| col[i]).collect()
    }

    /// Values of column `j` restricted to rows with the given label.
    pub fn column_for_class(&self, j: usize, label: u8) -> Vec<f64> {
        self.columns[j]
            .iter()
            .zip(&self.labels)
            .filter(|&(_, &l)| l == label)
            .map(|(&v, _)| v)
            .collect()
    }

    /// Rows of `a` followed by rows of `b`; feature counts must match.
    pub fn vstack(a: &Dataset, b: &Dataset) -> Result<Dataset> {
        if a.n_features() != b.n_features() {
            return Err(Error::Schema(format!(
                "cannot stack datasets with {} and {} features",
                a.n_features(),
                b.n_features()
            )));
        }
        let columns = a
            .columns
            .iter()
            .zip(&b.columns)
            .map(|(ca, cb)| {
                let mut col = ca.clone();
                col.extend_from_slice(cb);
                col
            })
            .collect();
        let mut labels = a.labels.clone();
        labels.extend_from_slice(&b.labels);
        let mut out = Dataset::from_columns(columns, labels)?;
        out.feature_names = a.feature_names.clone();
        out.label_name = a.label_name.clone();
        out.label_mapping = a.label_mapping.clone();
        Ok(out)
    }

    /// A new dataset consisting of the given rows, in the given order.
    fn subset_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            columns: self
                .columns
                .iter()
                .map(|col| rows.iter().map(|&i| col[i]).collect())
                .collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            label_name: self.label_name.clone(),
            label_mapping: self.label_mapping.clone(),
        }
    }
}

/// How to locate the label column of a CSV file.
#[derive(Debug, Clone)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

fn parse_cell(field: &str, row: usize, column: usize) -> Result<f64> {
    let trimmed = field.trim();
    trimmed.parse::<f64>().map_err(|_| Error::Parse {
        row,
        column,
        message: format!("cannot parse {trimmed:?} as a number"),
    })
}

/// Load a two-class dataset from a CSV file.
pub fn load_csv(path: &Path, label: &LabelColumn) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    parse_csv(&text, label)
}

fn parse_csv(text: &str, label: &LabelColumn) -> Result<Dataset> {
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.is_empty() {
        return Err(Error::Schema("empty file".into()));
    }
    let first: Vec<&str> = lines[0].split(',').collect();
    let width = first.len();
    if width < 2 {
        return Err(Error::Schema("need at least one feature and a label column".into()));
    }

    // Header detection: the first row is a header when any field outside the
    // label column fails to parse as a number.
    let label_idx_guess = match label {
        LabelColumn::Index(i) => Some(*i),
        LabelColumn::Name(_) => None,
    };
    let has_header = match label_idx_guess {
        Some(li) => first
            .iter()
            .enumerate()
            .any(|(c, f)| c != li && f.trim().parse::<f64>().is_err()),
        None => true, // a named label column requires a header
    };

    let (header, data_start) = if has_header {
        (Some(first.clone()), 1)
    } else {
        (None, 0)
    };

    let label_idx = match label {
        LabelColumn::Index(i) => {
            if *i >= width {
                return Err(Error::Schema(format!(
                    "label column index {i} out of range for {width} columns"
                )));
            }
            *i
        }
        LabelColumn::Name(name) => {
            let header = header.as_ref().ok_or_else(|| {
                Error::Schema(format!("label column {name:?} requires a header row"))
            })?;
            header
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::Schema(format!("label column {name:?} not found")))?
        }
    };

    let n_features = width - 1;
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(lines.len()); n_features];
    let mut raw_labels: Vec<String> = Vec::with_capacity(lines.len());

    for (line_no, line) in lines.iter().enumerate().skip(data_start) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(Error::Parse {
                row: line_no + 1,
                column: fields.len().min(width),
                message: format!("row has {} fields, expected {width}", fields.len()),
            });
        }
        let mut feat = 0;
        for (c, field) in fields.iter().enumerate() {
            if c == label_idx {
                raw_labels.push(field.trim().to_string());
            } else {
                columns[feat].push(parse_cell(field, line_no + 1, c + 1)?);
                feat += 1;
            }
        }
    }
    if raw_labels.is_empty() {
        return Err(Error::Schema("no data rows".into()));
    }

    let mut distinct: Vec<String> = raw_labels.clone();
    distinct.sort();
    distinct.dedup();
    if distinct.len() != 2 {
        return Err(Error::Schema(format!(
            "label column must have exactly 2 distinct values, found {}",
            distinct.len()
        )));
    }
    let labels: Vec<u8> = raw_labels
        .iter()
        .map(|l| u8::from(*l == distinct[1]))
        .collect();

    let feature_names = header.map(|h| {
        h.iter()
            .enumerate()
            .filter(|&(c, _)| c != label_idx)
            .map(|(_, name)| name.trim().to_string())
            .collect::<Vec<_>>()
    });
    let label_name = feature_names
        .is_some()
        .then(|| match label {
            LabelColumn::Name(n) => n.clone(),
            LabelColumn::Index(_) => first[label_idx].trim().to_string(),
        });

    let mut dataset = Dataset::from_columns(columns, labels)?;
    dataset.feature_names = feature_names;
    dataset.label_name = label_name;
    dataset.label_mapping = Some([distinct[0].clone(), distinct[1].clone()]);
    Ok(dataset)
}

/// Write a dataset as CSV. A header row is emitted when feature names are
/// present; labels are written back through the recorded mapping when one
/// exists. Values round-trip exactly for finite doubles.
pub fn save_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    if let Some(names) = &dataset.feature_names {
        let label_name = dataset.label_name.as_deref().unwrap_or("label");
        let _ = writeln!(out, "{},{}", names.join(","), label_name);
    }
    for i in 0..dataset.n_rows() {
        for col in &dataset.columns {
            let _ = write!(out, "{},", col[i]);
        }
        match &dataset.label_mapping {
            Some(map) => {
                let _ = writeln!(out, "{}", map[dataset.labels[i] as usize]);
            }
            None => {
                let _ = writeln!(out, "{}", dataset.labels[i]);
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Remove columns whose values are all identical; returns the reduced dataset
/// and the removed original column indices.
pub fn drop_constant_features(dataset: &Dataset) -> (Dataset, Vec<usize>) {
    let mut removed = Vec::new();
    let mut kept_cols = Vec::new();
    let mut kept_names = dataset.feature_names.as_ref().map(|_| Vec::new());
    for (j, col) in dataset.columns.iter().enumerate() {
        let constant = col.windows(2).all(|w| w[0] == w[1]);
        if constant {
            removed.push(j);
        } else {
            kept_cols.push(col.clone());
            if let (Some(names), Some(all)) = (&mut kept_names, &dataset.feature_names) {
                names.push(all[j].clone());
            }
        }
    }
    let reduced = Dataset {
        columns: kept_cols,
        labels: dataset.labels.clone(),
        feature_names: kept_names,
        label_name: dataset.label_name.clone(),
        label_mapping: dataset.label_mapping.clone(),
    };
    (reduced, removed)
}

/// Split per class at the given fraction (rounded half-up per class),
/// deterministically in `seed`. Row order within each part follows the
/// original row order, and the two parts partition the input rows exactly.
pub fn stratified_split(dataset: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(invalid(format!("split fraction {fraction} must be in (0, 1)")));
    }
    dataset.require_two_classes(2)?;

    let mut first_rows: Vec<usize> = Vec::new();
    let mut second_rows: Vec<usize> = Vec::new();
    for class in 0u8..=1 {
        let mut rows: Vec<usize> = (0..dataset.n_rows())
            .filter(|&i| dataset.labels[i] == class)
            .collect();
        let count = rows.len();
        let take = (fraction * count as f64 + 0.5).floor() as usize;
        if take == 0 || take >= count {
            return Err(invalid(format!(
                "class {class} with {count} rows cannot leave at least 1 row on each side at fraction {fraction}"
            )));
        }
        let mut rng = substream_rng(seed, &[SPLIT_TAG, u64::from(class)]);
        rows.shuffle(&mut rng);
        first_rows.extend_from_slice(&rows[..take]);
        second_rows.extend_from_slice(&rows[take..]);
    }
    first_rows.sort_unstable();
    second_rows.sort_unstable();
    Ok((dataset.subset_rows(&first_rows), dataset.subset_rows(&second_rows)))
}

/// Write an importance mask as one 0/1 per line.
pub fn write_mask(mask: &[bool], path: &Path) -> Result<()> {
    let mut out = String::with_capacity(mask.len() * 2);
    for &m in mask {
        out.push(if m { '1' } else { '0' });
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read an importance mask written by [`write_mask`].
pub fn read_mask(path: &Path) -> Result<Vec<bool>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .map(|(i, line)| match line.trim() {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(Error::Parse {
                row: i + 1,
                column: 1,
                message: format!("mask entry must be 0 or 1, found {other:?}"),
            }),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(text: &str, label: &LabelColumn) -> Result<Dataset> {
        parse_csv(text, label)
    }

    #[test]
    fn loads_with_header_and_string_labels() {
        let d = toy("x,y,cls\n1.0,2.0,a\n3.5,4.0,b\n-1e2,0.25,a\n", &LabelColumn::Name("cls".into()))
            .unwrap();
        assert_eq!(d.n_rows(), 3);
        assert_eq!(d.n_features(), 2);
        assert_eq!(d.labels(), &[0, 1, 0]);
        assert_eq!(d.label_mapping().unwrap(), &["a".to_string(), "b".to_string()]);
        assert_eq!(d.column(0), &[1.0, 3.5, -100.0]);
    }

    #[test]
    fn loads_headerless_by_index() {
        let d = toy("1,2,0\n3,4,1\n", &LabelColumn::Index(2)).unwrap();
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.labels(), &[0, 1]);
        assert!(d.feature_names().is_none());
    }

    #[test]
    fn missing_cell_is_a_located_parse_error() {
        let err = toy("x,y,cls\n1.0,,a\n2.0,3.0,b\n", &LabelColumn::Name("cls".into()))
            .unwrap_err();
        match err {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, 2);
            }
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn three_label_values_is_a_schema_error() {
        let err = toy("1,a\n2,b\n3,c\n", &LabelColumn::Index(1)).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn ragged_row_is_located() {
        let err = toy("1,2,0\n3,1\n", &LabelColumn::Index(2)).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }));
    }

    #[test]
    fn csv_round_trip_is_value_identical() {
        let dir = std::env::temp_dir().join("albscreen-dataio-roundtrip");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("rt.csv");
        let d = toy(
            "x,y,cls\n0.1,2e-8,a\n-3.25,4.0,b\n9007199254740993,0.3333333333333333,a\n",
            &LabelColumn::Name("cls".into()),
        )
        .unwrap();
        save_csv(&d, &path).unwrap();
        let back = load_csv(&path, &LabelColumn::Name("cls".into())).unwrap();
        assert_eq!(d, back);
    }

    #[test]
    fn drop_constant_reports_indices_and_is_idempotent() {
        let d = Dataset::from_columns(
            vec![vec![5.0, 5.0, 5.0], vec![1.0, 2.0, 3.0], vec![0.0, 0.0, 0.0]],
            vec![0, 1, 0],
        )
        .unwrap();
        let (reduced, removed) = drop_constant_features(&d);
        assert_eq!(removed, vec![0, 2]);
        assert_eq!(reduced.n_features(), 1);
        let (again, removed2) = drop_constant_features(&reduced);
        assert!(removed2.is_empty());
        assert_eq!(again, reduced);
    }

    #[test]
    fn stratified_split_counts_and_multiset() {
        // 10 + 10 at fraction 0.5 -> 5 + 5 per side.
        let cols = vec![(0..20).map(f64::from).collect::<Vec<_>>()];
        let labels: Vec<u8> = (0..20).map(|i| u8::from(i >= 10)).collect();
        let d = Dataset::from_columns(cols, labels).unwrap();
        let (a, b) = stratified_split(&d, 0.5, 17).unwrap();
        assert_eq!(a.class_counts(), (5, 5));
        assert_eq!(b.class_counts(), (5, 5));
        let mut all: Vec<f64> = a.column(0).to_vec();
        all.extend_from_slice(b.column(0));
        all.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(all, (0..20).map(f64::from).collect::<Vec<_>>());
    }

    #[test]
    fn stratified_split_half_up_rounding() {
        // 47 + 25 at fraction 0.5 -> (24 + 13, 23 + 12).
        let n = 72;
        let cols = vec![(0..n).map(|i| i as f64).collect::<Vec<_>>()];
        let labels: Vec<u8> = (0..n).map(|i| u8::from(i >= 47)).collect();
        let d = Dataset::from_columns(cols, labels).unwrap();
        let (a, b) = stratified_split(&d, 0.5, 3).unwrap();
        assert_eq!(a.class_counts(), (24, 13));
        assert_eq!(b.class_counts(), (23, 12));
    }

    #[test]
    fn stratified_split_is_deterministic() {
        let cols = vec![(0..30).map(f64::from).collect::<Vec<_>>()];
        let labels: Vec<u8> = (0..30).map(|i| u8::from(i % 3 == 0)).collect();
        let d = Dataset::from_columns(cols, labels).unwrap();
        let (a1, b1) = stratified_split(&d, 0.4, 99).unwrap();
        let (a2, b2) = stratified_split(&d, 0.4, 99).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(b1, b2);
        let (a3, _) = stratified_split(&d, 0.4, 100).unwrap();
        assert_ne!(a1, a3);
    }

    #[test]
    fn split_rejects_tiny_classes() {
        let cols = vec![vec![1.0, 2.0, 3.0, 4.0]];
        let d = Dataset::from_columns(cols, vec![0, 0, 1, 1]).unwrap();
        assert!(stratified_split(&d, 0.9, 1).is_err());
    }

    #[test]
    fn mask_round_trip() {
        let dir = std::env::temp_dir().join("albscreen-dataio-mask");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.mask");
        let mask = vec![true, false, false, true];
        write_mask(&mask, &path).unwrap();
        assert_eq!(read_mask(&path).unwrap(), mask);
    }
}
