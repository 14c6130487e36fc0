//! Columns, frames, tasks, and CSV ingestion.
//!
//! A [`Frame`] is an immutable, column-oriented table with numeric and
//! categorical columns. A [`Task`] binds a frame to a prediction target and
//! optional protected attribute, and classifies itself as regression, binary,
//! or multiclass.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

impl ColumnKind {
    pub fn name(self) -> &'static str {
        match self {
            ColumnKind::Numeric => "numeric",
            ColumnKind::Categorical => "categorical",
        }
    }
}

/// Column payload. Categorical values are stored as level codes; the level
/// table preserves declared order (first appearance when read from CSV).
#[derive(Clone, Debug, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Categorical { codes: Vec<u32>, levels: Vec<String> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

impl Column {
    pub fn numeric(name: impl Into<String>, values: Vec<f64>) -> Column {
        Column {
            name: name.into(),
            data: ColumnData::Numeric(values),
        }
    }

    /// Build a categorical column from raw strings; levels are recorded in
    /// order of first appearance.
    pub fn categorical_from_strings<S: AsRef<str>>(name: impl Into<String>, values: &[S]) -> Column {
        let mut levels: Vec<String> = Vec::new();
        let mut codes = Vec::with_capacity(values.len());
        for v in values {
            let v = v.as_ref();
            let code = match levels.iter().position(|l| l == v) {
                Some(i) => i as u32,
                None => {
                    levels.push(v.to_string());
                    (levels.len() - 1) as u32
                }
            };
            codes.push(code);
        }
        Column {
            name: name.into(),
            data: ColumnData::Categorical { codes, levels },
        }
    }

    /// Build a categorical column from codes against a declared level table.
    pub fn categorical(
        name: impl Into<String>,
        codes: Vec<u32>,
        levels: Vec<String>,
    ) -> Result<Column> {
        let name = name.into();
        if levels.is_empty() {
            return Err(Error::InvalidColumn(format!("{name}: empty level table")));
        }
        for i in 1..levels.len() {
            if levels[..i].contains(&levels[i]) {
                return Err(Error::InvalidColumn(format!(
                    "{name}: duplicate level {}",
                    levels[i]
                )));
            }
        }
        if let Some(&bad) = codes.iter().find(|&&c| c as usize >= levels.len()) {
            return Err(Error::InvalidColumn(format!(
                "{name}: level code {bad} out of range"
            )));
        }
        Ok(Column {
            name,
            data: ColumnData::Categorical { codes, levels },
        })
    }

    pub fn len(&self) -> usize {
        match &self.data {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ColumnKind {
        match &self.data {
            ColumnData::Numeric(_) => ColumnKind::Numeric,
            ColumnData::Categorical { .. } => ColumnKind::Categorical,
        }
    }

    pub fn as_numeric(&self) -> Option<&[f64]> {
        match &self.data {
            ColumnData::Numeric(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_categorical(&self) -> Option<(&[u32], &[String])> {
        match &self.data {
            ColumnData::Categorical { codes, levels } => Some((codes, levels)),
            _ => None,
        }
    }

    pub fn levels(&self) -> Option<&[String]> {
        self.as_categorical().map(|(_, l)| l)
    }

    fn select_rows(&self, rows: &[usize]) -> Column {
        let data = match &self.data {
            ColumnData::Numeric(v) => ColumnData::Numeric(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Categorical { codes, levels } => ColumnData::Categorical {
                codes: rows.iter().map(|&r| codes[r]).collect(),
                levels: levels.clone(),
            },
        };
        Column {
            name: self.name.clone(),
            data,
        }
    }
}

/// Immutable table of equal-length, uniquely named columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    columns: Vec<Column>,
    n_rows: usize,
}

impl Frame {
    pub fn new(columns: Vec<Column>) -> Result<Frame> {
        let n_rows = columns.first().map_or(0, Column::len);
        for (i, c) in columns.iter().enumerate() {
            if c.name.is_empty() {
                return Err(Error::InvalidColumn("empty column name".into()));
            }
            if columns[..i].iter().any(|o| o.name == c.name) {
                return Err(Error::DuplicateColumn(c.name.clone()));
            }
            if c.len() != n_rows {
                return Err(Error::ColumnLength {
                    column: c.name.clone(),
                    expected: n_rows,
                    got: c.len(),
                });
            }
        }
        Ok(Frame { columns, n_rows })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Copy of the frame restricted to the given rows (in the given order).
    pub fn select_rows(&self, rows: &[usize]) -> Frame {
        Frame {
            columns: self.columns.iter().map(|c| c.select_rows(rows)).collect(),
            n_rows: rows.len(),
        }
    }

    /// Replace a column with one of the same length, returning a new frame.
    pub fn with_column(&self, column: Column) -> Result<Frame> {
        let mut columns = self.columns.clone();
        match columns.iter_mut().find(|c| c.name == column.name) {
            Some(slot) => {
                if column.len() != self.n_rows {
                    return Err(Error::ColumnLength {
                        column: column.name.clone(),
                        expected: self.n_rows,
                        got: column.len(),
                    });
                }
                *slot = column;
            }
            None => return Err(Error::UnknownColumn(column.name)),
        }
        Frame::new(columns)
    }
}

/// Forces the kind of a named column during CSV loading.
#[derive(Clone, Debug)]
pub struct ColumnOverride {
    pub column: String,
    pub kind: ColumnKind,
}

fn is_missing(field: &str) -> bool {
    field.is_empty() || field == "NA"
}

/// Read a CSV (UTF-8, header row, RFC 4180) into a frame.
///
/// A column is numeric iff every field parses as a decimal float, unless an
/// override forces its kind. Missing tokens (`""`, `"NA"`) are a hard error.
/// Row numbers in errors are 1-based data rows (the header is row 0).
pub fn read_csv<R: Read>(reader: R, overrides: &[ColumnOverride]) -> Result<Frame> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    for (ri, record) in rdr.records().enumerate() {
        let record = record?;
        for (ci, field) in record.iter().enumerate() {
            if is_missing(field) {
                return Err(Error::MissingValue {
                    row: ri + 1,
                    column: headers[ci].clone(),
                });
            }
            cells[ci].push(field.to_string());
        }
    }

    let mut columns = Vec::with_capacity(headers.len());
    for (ci, name) in headers.iter().enumerate() {
        let forced = overrides
            .iter()
            .find(|o| &o.column == name)
            .map(|o| o.kind);
        let parsed: Vec<Option<f64>> = cells[ci].iter().map(|s| s.parse::<f64>().ok()).collect();
        let numeric = match forced {
            Some(ColumnKind::Numeric) => {
                if let Some(bad) = parsed.iter().position(Option::is_none) {
                    return Err(Error::UnparseableNumeric {
                        row: bad + 1,
                        column: name.clone(),
                    });
                }
                true
            }
            Some(ColumnKind::Categorical) => false,
            None => parsed.iter().all(Option::is_some),
        };
        if numeric {
            columns.push(Column::numeric(
                name.clone(),
                parsed.into_iter().map(Option::unwrap).collect(),
            ));
        } else {
            columns.push(Column::categorical_from_strings(name.clone(), &cells[ci]));
        }
    }
    Frame::new(columns)
}

/// [`read_csv`] from a file path.
pub fn load_csv(path: impl AsRef<Path>, overrides: &[ColumnOverride]) -> Result<Frame> {
    read_csv(std::fs::File::open(path)?, overrides)
}

/// Write a frame as CSV with a header row. Numeric cells use the shortest
/// round-trip float representation, so write/read cycles preserve values.
pub fn write_csv<W: Write>(frame: &Frame, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(frame.columns().iter().map(|c| c.name.as_str()))?;
    let mut record = Vec::with_capacity(frame.n_cols());
    for row in 0..frame.n_rows() {
        record.clear();
        for col in frame.columns() {
            match &col.data {
                ColumnData::Numeric(v) => record.push(format!("{}", v[row])),
                ColumnData::Categorical { codes, levels } => {
                    record.push(levels[codes[row] as usize].clone())
                }
            }
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// [`write_csv`] to a file path.
pub fn save_csv(frame: &Frame, path: impl AsRef<Path>) -> Result<()> {
    write_csv(frame, std::fs::File::create(path)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskType {
    Regression,
    Binary,
    Multiclass,
}

impl TaskType {
    pub fn name(self) -> &'static str {
        match self {
            TaskType::Regression => "regression",
            TaskType::Binary => "binary",
            TaskType::Multiclass => "multiclass",
        }
    }

    pub fn is_classification(self) -> bool {
        !matches!(self, TaskType::Regression)
    }
}

/// Options for [`make_task_with`].
#[derive(Clone, Debug, Default)]
pub struct TaskSpec {
    pub target: String,
    pub positive_class: Option<String>,
    pub protected: Option<String>,
    /// Keep the protected attribute among the model features instead of
    /// holding it out (it stays available for fairness either way).
    pub protected_as_feature: bool,
}

/// A frame bound to a target (and optional protected attribute).
#[derive(Clone, Debug)]
pub struct Task {
    frame: Arc<Frame>,
    pub target: String,
    pub task_type: TaskType,
    /// Positive level name; set exactly for binary tasks.
    pub positive_class: Option<String>,
    pub protected: Option<String>,
    pub protected_as_feature: bool,
    /// Feature columns in frame order, excluding the target and (unless
    /// `protected_as_feature`) the protected attribute.
    pub feature_names: Vec<String>,
}

/// Bind `frame` to `target` with the protected attribute held out of the
/// feature set (the common case).
pub fn make_task(
    frame: Frame,
    target: &str,
    positive_class: Option<&str>,
    protected: Option<&str>,
) -> Result<Task> {
    make_task_with(
        frame,
        TaskSpec {
            target: target.to_string(),
            positive_class: positive_class.map(str::to_string),
            protected: protected.map(str::to_string),
            protected_as_feature: false,
        },
    )
}

pub fn make_task_with(frame: Frame, spec: TaskSpec) -> Result<Task> {
    if frame.n_rows() == 0 {
        return Err(Error::EmptyTask);
    }
    let target_col = frame
        .column(&spec.target)
        .ok_or_else(|| Error::UnknownColumn(spec.target.clone()))?;

    let (task_type, positive_class) = match &target_col.data {
        ColumnData::Numeric(values) => {
            if spec.positive_class.is_some() {
                return Err(Error::InvalidPositiveClass(spec.target.clone()));
            }
            let first = values[0];
            if values.iter().all(|&v| v == first) {
                return Err(Error::ConstantTarget(spec.target.clone()));
            }
            (TaskType::Regression, None)
        }
        ColumnData::Categorical { levels, .. } => match levels.len() {
            1 => return Err(Error::ConstantTarget(spec.target.clone())),
            2 => {
                let positive = match &spec.positive_class {
                    Some(p) => {
                        if !levels.contains(p) {
                            return Err(Error::UnknownPositiveClass {
                                target: spec.target.clone(),
                                class: p.clone(),
                            });
                        }
                        p.clone()
                    }
                    None => levels[0].clone(),
                };
                (TaskType::Binary, Some(positive))
            }
            _ => {
                if spec.positive_class.is_some() {
                    return Err(Error::InvalidPositiveClass(spec.target.clone()));
                }
                (TaskType::Multiclass, None)
            }
        },
    };

    if let Some(p) = &spec.protected {
        let col = frame
            .column(p)
            .ok_or_else(|| Error::UnknownColumn(p.clone()))?;
        match col.levels() {
            Some(levels) if levels.len() >= 2 => {}
            _ => return Err(Error::InvalidProtected(p.clone())),
        }
        if p == &spec.target {
            return Err(Error::InvalidProtected(p.clone()));
        }
    }

    let feature_names = frame
        .columns()
        .iter()
        .map(|c| c.name.clone())
        .filter(|n| {
            n != &spec.target
                && (spec.protected_as_feature || Some(n.as_str()) != spec.protected.as_deref())
        })
        .collect();

    Ok(Task {
        frame: Arc::new(frame),
        target: spec.target,
        task_type,
        positive_class,
        protected: spec.protected,
        protected_as_feature: spec.protected_as_feature,
        feature_names,
    })
}

impl Task {
    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn n(&self) -> usize {
        self.frame.n_rows()
    }

    pub fn p(&self) -> usize {
        self.feature_names.len()
    }

    pub fn target_column(&self) -> &Column {
        self.frame.column(&self.target).expect("target column")
    }

    /// Target level table for classification tasks.
    pub fn class_levels(&self) -> Option<&[String]> {
        self.target_column().levels()
    }

    /// Index of the positive class within the target levels (binary only).
    pub fn positive_index(&self) -> Option<usize> {
        let positive = self.positive_class.as_deref()?;
        self.class_levels()?.iter().position(|l| l == positive)
    }

    pub fn feature_column(&self, name: &str) -> Result<&Column> {
        self.frame
            .column(name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    /// Counts of (numeric, categorical) feature columns.
    pub fn feature_kind_counts(&self) -> (usize, usize) {
        let mut numeric = 0;
        let mut categorical = 0;
        for name in &self.feature_names {
            match self.frame.column(name).map(Column::kind) {
                Some(ColumnKind::Numeric) => numeric += 1,
                Some(ColumnKind::Categorical) => categorical += 1,
                None => {}
            }
        }
        (numeric, categorical)
    }
}

/// Target values gathered for a set of rows.
#[derive(Clone, Debug)]
pub enum Truth {
    /// Class codes against the task's level table.
    Classes(Vec<u32>),
    Values(Vec<f64>),
}

impl Truth {
    pub fn len(&self) -> usize {
        match self {
            Truth::Classes(c) => c.len(),
            Truth::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Task {
    /// Gather target values for the given rows.
    pub fn truth(&self, rows: &[usize]) -> Truth {
        match &self.target_column().data {
            ColumnData::Numeric(v) => Truth::Values(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Categorical { codes, .. } => {
                Truth::Classes(rows.iter().map(|&r| codes[r]).collect())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame_xy() -> Frame {
        Frame::new(vec![
            Column::numeric("x", vec![1.0, 2.0, 3.0, 4.0]),
            Column::categorical_from_strings("y", &["a", "b", "a", "b"]),
        ])
        .unwrap()
    }

    #[test]
    fn infers_numeric_and_categorical_columns() {
        let frame = read_csv("a,b\n1,x\n2,y\n".as_bytes(), &[]).unwrap();
        assert_eq!(frame.column("a").unwrap().kind(), ColumnKind::Numeric);
        assert_eq!(frame.column("b").unwrap().kind(), ColumnKind::Categorical);
        assert_eq!(frame.column("a").unwrap().as_numeric().unwrap(), &[1.0, 2.0]);
    }

    #[test]
    fn parses_float_syntax_variants() {
        let frame = read_csv("v\n1\n2.5\n3e-1\n".as_bytes(), &[]).unwrap();
        assert_eq!(
            frame.column("v").unwrap().as_numeric().unwrap(),
            &[1.0, 2.5, 0.3]
        );
    }

    #[test]
    fn missing_tokens_are_hard_errors() {
        let err = read_csv("a,b\n1,x\n,y\n".as_bytes(), &[]).unwrap_err();
        match err {
            Error::MissingValue { row, column } => {
                assert_eq!(row, 2);
                assert_eq!(column, "a");
            }
            other => panic!("unexpected error {other:?}"),
        }
        let err = read_csv("a,b\n1,NA\n".as_bytes(), &[]).unwrap_err();
        assert!(matches!(err, Error::MissingValue { row: 1, .. }));
    }

    #[test]
    fn override_forcing_numeric_reports_offending_cell() {
        let overrides = [ColumnOverride {
            column: "b".into(),
            kind: ColumnKind::Numeric,
        }];
        let err = read_csv("a,b\n1,x\n2,y\n".as_bytes(), &overrides).unwrap_err();
        assert_eq!(err.to_string(), "unparseable numeric at row 1, column b");
    }

    #[test]
    fn override_forcing_categorical_keeps_digit_strings() {
        let overrides = [ColumnOverride {
            column: "a".into(),
            kind: ColumnKind::Categorical,
        }];
        let frame = read_csv("a\n1\n2\n1\n".as_bytes(), &overrides).unwrap();
        let (codes, levels) = frame.column("a").unwrap().as_categorical().unwrap();
        assert_eq!(levels, &["1".to_string(), "2".to_string()]);
        assert_eq!(codes, &[0, 1, 0]);
    }

    #[test]
    fn levels_are_ordered_by_first_appearance() {
        let frame = read_csv("g\nb\na\nc\na\n".as_bytes(), &[]).unwrap();
        assert_eq!(
            frame.column("g").unwrap().levels().unwrap(),
            &["b".to_string(), "a".to_string(), "c".to_string()]
        );
    }

    #[test]
    fn duplicate_header_is_rejected() {
        let err = read_csv("a,a\n1,2\n".as_bytes(), &[]).unwrap_err();
        assert!(matches!(err, Error::DuplicateColumn(name) if name == "a"));
    }

    #[test]
    fn quoted_fields_roundtrip() {
        let frame = read_csv("t\n\"x, y\"\nplain\n".as_bytes(), &[]).unwrap();
        let mut buf = Vec::new();
        write_csv(&frame, &mut buf).unwrap();
        let again = read_csv(buf.as_slice(), &[]).unwrap();
        assert_eq!(frame, again);
    }

    #[test]
    fn csv_write_read_roundtrips_float_bits() {
        let frame = Frame::new(vec![Column::numeric(
            "v",
            vec![0.1, 1.0 / 3.0, -2.5e-10, 12345.678901234567],
        )])
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&frame, &mut buf).unwrap();
        let again = read_csv(buf.as_slice(), &[]).unwrap();
        assert_eq!(frame, again);
    }

    #[test]
    fn binary_task_defaults_positive_to_first_level() {
        let task = make_task(frame_xy(), "y", None, None).unwrap();
        assert_eq!(task.task_type, TaskType::Binary);
        assert_eq!(task.positive_class.as_deref(), Some("a"));
        assert_eq!(task.positive_index(), Some(0));
        assert_eq!(task.feature_names, vec!["x".to_string()]);
    }

    #[test]
    fn explicit_positive_class_is_validated() {
        let task = make_task(frame_xy(), "y", Some("b"), None).unwrap();
        assert_eq!(task.positive_index(), Some(1));
        let err = make_task(frame_xy(), "y", Some("zzz"), None).unwrap_err();
        assert!(matches!(err, Error::UnknownPositiveClass { .. }));
    }

    #[test]
    fn numeric_target_with_positive_class_is_an_error() {
        let frame = frame_xy();
        let err = make_task(frame, "x", Some("a"), None).unwrap_err();
        assert!(matches!(err, Error::InvalidPositiveClass(_)));
    }

    #[test]
    fn constant_targets_are_rejected() {
        let frame = Frame::new(vec![
            Column::numeric("x", vec![1.0, 2.0]),
            Column::numeric("y", vec![3.0, 3.0]),
            Column::categorical_from_strings("c", &["u", "u"]),
        ])
        .unwrap();
        assert!(matches!(
            make_task(frame.clone(), "y", None, None).unwrap_err(),
            Error::ConstantTarget(_)
        ));
        assert!(matches!(
            make_task(frame, "c", None, None).unwrap_err(),
            Error::ConstantTarget(_)
        ));
    }

    #[test]
    fn three_level_target_is_multiclass() {
        let frame = Frame::new(vec![
            Column::numeric("x", vec![1.0, 2.0, 3.0]),
            Column::categorical_from_strings("y", &["a", "b", "c"]),
        ])
        .unwrap();
        let task = make_task(frame, "y", None, None).unwrap();
        assert_eq!(task.task_type, TaskType::Multiclass);
        assert_eq!(task.positive_class, None);
    }

    #[test]
    fn protected_attribute_is_held_out_of_features_by_default() {
        let frame = Frame::new(vec![
            Column::numeric("x", vec![1.0, 2.0, 3.0, 4.0]),
            Column::categorical_from_strings("sex", &["m", "f", "m", "f"]),
            Column::categorical_from_strings("y", &["a", "b", "a", "b"]),
        ])
        .unwrap();
        let task = make_task(frame.clone(), "y", None, Some("sex")).unwrap();
        assert_eq!(task.feature_names, vec!["x".to_string()]);
        assert!(!task.protected_as_feature);

        let task = make_task_with(
            frame,
            TaskSpec {
                target: "y".into(),
                positive_class: None,
                protected: Some("sex".into()),
                protected_as_feature: true,
            },
        )
        .unwrap();
        assert_eq!(task.feature_names, vec!["x".to_string(), "sex".to_string()]);
    }

    #[test]
    fn protected_attribute_must_be_categorical_with_two_levels() {
        let frame = frame_xy();
        let err = make_task(frame.clone(), "y", None, Some("x")).unwrap_err();
        assert!(matches!(err, Error::InvalidProtected(_)));

        let frame2 = Frame::new(vec![
            Column::numeric("x", vec![1.0, 2.0]),
            Column::categorical_from_strings("g", &["only", "only"]),
            Column::categorical_from_strings("y", &["a", "b"]),
        ])
        .unwrap();
        let err = make_task(frame2, "y", None, Some("g")).unwrap_err();
        assert!(matches!(err, Error::InvalidProtected(_)));
    }

    #[test]
    fn select_rows_copies_in_given_order() {
        let frame = frame_xy();
        let sub = frame.select_rows(&[3, 0]);
        assert_eq!(sub.n_rows(), 2);
        assert_eq!(sub.column("x").unwrap().as_numeric().unwrap(), &[4.0, 1.0]);
        let (codes, _) = sub.column("y").unwrap().as_categorical().unwrap();
        assert_eq!(codes, &[1, 0]);
    }
}
