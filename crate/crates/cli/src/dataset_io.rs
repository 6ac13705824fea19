//! Delimited dataset files.
//!
//! One sample per line: the label, then the values. Fields are separated by
//! commas, or by whitespace when a line has no comma. Blank lines and lines
//! starting with `#` are skipped.
//!
//! Univariate files carry `t` values per row. Multivariate files start with
//! a `@shape <t> <s>` header and carry `t * s` values per row in step-major
//! order (all channels of step 0, then step 1, ...).

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use freqatt_core::{Dataset, Split, TimeSeries};

use crate::error::{CliError, DatasetError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    Delimited,
    Multivariate,
}

impl FromStr for DatasetFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "delimited" => Ok(Self::Delimited),
            "multivariate" => Ok(Self::Multivariate),
            other => Err(format!("unknown dataset format `{other}`")),
        }
    }
}

const SHAPE_TAG: &str = "@shape";

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn split_fields(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Guesses the format from the first content line.
pub fn detect_format(path: &Path) -> Result<DatasetFormat> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let multivariate = content_lines(&text)
        .next()
        .is_some_and(|(_, line)| line.starts_with(SHAPE_TAG));
    Ok(if multivariate {
        DatasetFormat::Multivariate
    } else {
        DatasetFormat::Delimited
    })
}

fn parse_header(path: &Path, line: &str) -> Result<(usize, usize), DatasetError> {
    let bad = |message: &str| DatasetError::BadHeader {
        path: path.to_path_buf(),
        message: message.to_string(),
    };
    let mut parts = line.split_whitespace();
    if parts.next() != Some(SHAPE_TAG) {
        return Err(bad("expected `@shape <length> <channels>`"));
    }
    let mut dim = || -> Result<usize, DatasetError> {
        parts
            .next()
            .and_then(|p| p.parse().ok())
            .filter(|&v: &usize| v > 0)
            .ok_or_else(|| bad("length and channels must be positive integers"))
    };
    let (t, s) = (dim()?, dim()?);
    if parts.next().is_some() {
        return Err(bad("trailing fields"));
    }
    Ok((t, s))
}

/// Class label; numeric labels compare by value so `1` and `1.0` agree.
#[derive(Debug, Clone, PartialEq)]
enum LabelKey {
    Number(f64),
    Text(String),
}

impl LabelKey {
    fn new(raw: &str) -> Self {
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => LabelKey::Number(v),
            _ => LabelKey::Text(raw.to_string()),
        }
    }

    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self, other) {
            (LabelKey::Number(a), LabelKey::Number(b)) => a.total_cmp(b),
            (LabelKey::Number(_), LabelKey::Text(_)) => Ordering::Less,
            (LabelKey::Text(_), LabelKey::Number(_)) => Ordering::Greater,
            (LabelKey::Text(a), LabelKey::Text(b)) => a.cmp(b),
        }
    }
}

struct Row {
    line: usize,
    label: String,
    values: Vec<f64>,
}

/// Loads a dataset and remaps its labels to `0..c` in sorted label order.
pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<Dataset> {
    load(path, format, None)
}

/// Loads a dataset whose labels must come from `classes` (for example the
/// class list of a training split); class ids follow the order of
/// `classes`.
pub fn load_dataset_with_classes(path: &Path, format: DatasetFormat, classes: &[String]) -> Result<Dataset> {
    load(path, format, Some(classes))
}

fn load(path: &Path, format: DatasetFormat, classes: Option<&[String]>) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = content_lines(&text).peekable();
    let shape = match format {
        DatasetFormat::Multivariate => {
            let (_, header) = lines.next().ok_or_else(|| DatasetError::Empty { path: path.to_path_buf() })?;
            Some(parse_header(path, header)?)
        }
        DatasetFormat::Delimited => None,
    };

    let mut rows = Vec::new();
    let mut expected = shape.map(|(t, s)| t * s);
    for (line, content) in lines {
        let fields = split_fields(content);
        let found = fields.len().saturating_sub(1);
        let width = *expected.get_or_insert(found);
        if found != width || found == 0 {
            return Err(DatasetError::RaggedRow {
                path: path.to_path_buf(),
                line,
                expected: width,
                found,
            }
            .into());
        }
        let values = fields[1..]
            .iter()
            .enumerate()
            .map(|(i, raw)| {
                raw.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| DatasetError::NonNumeric {
                        path: path.to_path_buf(),
                        line,
                        field: i + 2,
                        value: raw.to_string(),
                    })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(Row {
            line,
            label: fields[0].to_string(),
            values,
        });
    }
    if rows.is_empty() {
        return Err(DatasetError::Empty { path: path.to_path_buf() }.into());
    }

    let class_names: Vec<String> = match classes {
        Some(known) => known.to_vec(),
        None => {
            let mut distinct: Vec<(LabelKey, String)> = Vec::new();
            for row in &rows {
                let key = LabelKey::new(&row.label);
                if !distinct.iter().any(|(k, _)| *k == key) {
                    distinct.push((key, row.label.clone()));
                }
            }
            distinct.sort_by(|a, b| a.0.cmp(&b.0));
            distinct.into_iter().map(|(_, name)| name).collect()
        }
    };
    let keys: Vec<LabelKey> = class_names.iter().map(|n| LabelKey::new(n)).collect();

    let (t, s) = shape.unwrap_or((rows[0].values.len(), 1));
    let mut samples = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for row in rows {
        let key = LabelKey::new(&row.label);
        let class = keys.iter().position(|k| *k == key).ok_or_else(|| DatasetError::UnknownLabel {
            path: path.to_path_buf(),
            line: row.line,
            label: row.label.clone(),
        })?;
        labels.push(class);
        samples.push(TimeSeries::new(t, s, row.values)?);
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    Ok(Dataset::new(name, Split::Test, samples, labels, class_names)?)
}

/// Writes `ds` so that loading it again yields the same values. Labels are
/// written with their original names.
pub fn save_dataset(ds: &Dataset, path: &Path, format: DatasetFormat) -> Result<()> {
    if format == DatasetFormat::Delimited && ds.channels() != 1 {
        return Err(CliError::Config(format!(
            "{} channels need the multivariate format",
            ds.channels()
        )));
    }
    let mut out = Vec::new();
    let io = |e| CliError::io(path, e);
    if format == DatasetFormat::Multivariate {
        writeln!(out, "{SHAPE_TAG} {} {}", ds.length(), ds.channels()).map_err(io)?;
    }
    for (x, &label) in ds.samples().iter().zip(ds.labels()) {
        write!(out, "{}", ds.class_names()[label]).map_err(io)?;
        for v in x.values() {
            write!(out, ",{v:?}").map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    fs::write(path, out).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
        let path = dir.join(name);
        fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn four_univariate_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(dir.path(), "tiny.txt", "1,0.5,1,2,3\n-1,4,3,2,1\n1 9 9 9 9\n-1,0,0,0,0\n");
        let ds = load_dataset(&path, detect_format(&path).unwrap()).unwrap();
        assert_eq!((ds.len(), ds.length(), ds.channels()), (4, 4, 1));
        assert_eq!(ds.labels(), &[1, 0, 1, 0]);
        assert_eq!(ds.class_names(), &["-1".to_string(), "1".to_string()]);
        assert_eq!(ds.name, "tiny");
    }

    #[test]
    fn trajectory_shaped_multivariate_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut text = String::from("@shape 182 3\n");
        for i in 0..40 {
            text.push_str(&(i % 20 + 1).to_string());
            for j in 0..182 * 3 {
                text.push_str(&format!(",{}", ((i * 31 + j) % 17) as f64 / 8.0));
            }
            text.push('\n');
        }
        let path = write(dir.path(), "traj.txt", &text);
        assert_eq!(detect_format(&path).unwrap(), DatasetFormat::Multivariate);
        let ds = load_dataset(&path, DatasetFormat::Multivariate).unwrap();
        assert_eq!((ds.length(), ds.channels(), ds.num_classes()), (182, 3, 20));
        // Numeric label order, not text order.
        assert_eq!(ds.class_names()[1], "2");
        assert_eq!(ds.class_names()[9], "10");
    }

    #[test]
    fn distinct_errors_for_bad_rows() {
        let dir = tempfile::tempdir().unwrap();
        let ragged = write(dir.path(), "r.txt", "0,1,2,3,4\n1,1,2,3\n");
        assert!(matches!(
            load_dataset(&ragged, DatasetFormat::Delimited),
            Err(CliError::Dataset(DatasetError::RaggedRow { line: 2, expected: 4, found: 3, .. }))
        ));
        let text = write(dir.path(), "n.txt", "0,1,2\n1,1,x\n");
        assert!(matches!(
            load_dataset(&text, DatasetFormat::Delimited),
            Err(CliError::Dataset(DatasetError::NonNumeric { line: 2, field: 3, .. }))
        ));
        let unknown = write(dir.path(), "u.txt", "a,1,2\nc,1,2\n");
        let classes = vec!["a".to_string(), "b".to_string()];
        assert!(matches!(
            load_dataset_with_classes(&unknown, DatasetFormat::Delimited, &classes),
            Err(CliError::Dataset(DatasetError::UnknownLabel { line: 2, .. }))
        ));
        let header = write(dir.path(), "h.txt", "@shape 4\n0,1,2,3,4\n");
        assert!(matches!(
            load_dataset(&header, DatasetFormat::Multivariate),
            Err(CliError::Dataset(DatasetError::BadHeader { .. }))
        ));
        let wrong_width = write(dir.path(), "w.txt", "@shape 2 2\n0,1,2,3\n");
        assert!(matches!(
            load_dataset(&wrong_width, DatasetFormat::Multivariate),
            Err(CliError::Dataset(DatasetError::RaggedRow { expected: 4, found: 3, .. }))
        ));
        let empty = write(dir.path(), "e.txt", "# nothing\n\n");
        assert!(matches!(
            load_dataset(&empty, DatasetFormat::Delimited),
            Err(CliError::Dataset(DatasetError::Empty { .. }))
        ));
    }

    #[test]
    fn known_classes_fix_the_ids() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(dir.path(), "t.txt", "2.0,1,2\n1,3,4\n");
        let classes = vec!["2".to_string(), "1".to_string()];
        let ds = load_dataset_with_classes(&path, DatasetFormat::Delimited, &classes).unwrap();
        assert_eq!(ds.labels(), &[0, 1]);
    }

    #[test]
    fn save_then_load_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let values = [0.1, -1e-300, 1.0 / 3.0, 123456789.125, f64::MIN_POSITIVE, -0.0];
        let mut text = String::from("@shape 3 2\n");
        for label in ["x", "y"] {
            text.push_str(label);
            for v in values {
                text.push_str(&format!(",{v:e}"));
            }
            text.push('\n');
        }
        let path = write(dir.path(), "m.txt", &text);
        let ds = load_dataset(&path, DatasetFormat::Multivariate).unwrap();
        let copy = dir.path().join("copy.txt");
        save_dataset(&ds, &copy, DatasetFormat::Multivariate).unwrap();
        let again = load_dataset(&copy, DatasetFormat::Multivariate).unwrap();
        for (a, b) in ds.samples().iter().zip(again.samples()) {
            assert!(a.values().iter().zip(b.values()).all(|(u, v)| u.to_bits() == v.to_bits()));
        }
        assert_eq!(ds.class_names(), again.class_names());
        assert!(save_dataset(&ds, &copy, DatasetFormat::Delimited).is_err());
    }
}
