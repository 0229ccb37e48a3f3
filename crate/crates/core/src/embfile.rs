//! Plain-text embedding files.
//!
//! ```text
//! user 2 3 v1
//! u0001 1.00000000e0 -2.50000000e-1 3.33333333e-1
//! u0002 ...
//! ```
//!
//! Values carry nine significant digits, so `save(load(save(x)))` is
//! byte-identical to `save(x)`.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sgns::TableKind;

pub const FORMAT_VERSION: &str = "v1";

/// Labelled rows of one entity family.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingFile {
    pub kind: TableKind,
    pub dim: usize,
    pub ids: Vec<String>,
    /// Row-major, `ids.len() * dim` values.
    pub values: Vec<f64>,
}

impl EmbeddingFile {
    pub fn new(kind: TableKind, dim: usize, ids: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || values.len() != ids.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: ids.len() * dim,
                actual: values.len(),
            });
        }
        Ok(EmbeddingFile { kind, dim, ids, values })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.dim..(r + 1) * self.dim]
    }

    pub fn write_to(&self, out: impl Write) -> Result<()> {
        let mut out = BufWriter::new(out);
        let io = |e| Error::io("<embeddings>", e);
        writeln!(out, "{} {} {} {FORMAT_VERSION}", self.kind.as_str(), self.len(), self.dim).map_err(io)?;
        for (r, id) in self.ids.iter().enumerate() {
            if id.is_empty() || id.chars().any(char::is_whitespace) {
                return Err(Error::invalid(format!("entity id {id:?} is empty or contains whitespace")));
            }
            let row = self.row(r);
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    context: format!("{} {id}: {v}", self.kind.as_str()),
                });
            }
            out.write_all(id.as_bytes()).map_err(io)?;
            for v in row {
                write!(out, " {v:.8e}").map_err(io)?;
            }
            out.write_all(b"\n").map_err(io)?;
        }
        out.flush().map_err(io)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(file).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file), &path.display().to_string())
    }

    /// Parses a file; `source` names it in error messages.
    pub fn read_from(reader: impl BufRead, source: &str) -> Result<Self> {
        let fail = |line: usize, message: String| Error::Format {
            path: source.into(),
            line,
            message,
        };
        let mut lines = reader.lines();
        let header = match lines.next() {
            Some(line) => line.map_err(|e| Error::io(source, e))?,
            None => return Err(fail(1, "empty file".into())),
        };
        let fields: Vec<&str> = header.split_whitespace().collect();
        let (kind, count, dim) = match fields.as_slice() {
            [kind, count, dim, version] if *version == FORMAT_VERSION => {
                let kind: TableKind = kind.parse().map_err(|_| fail(1, format!("unknown kind {kind:?}")))?;
                let count: usize = count.parse().map_err(|_| fail(1, format!("bad row count {count:?}")))?;
                let dim: usize = dim.parse().map_err(|_| fail(1, format!("bad dimension {dim:?}")))?;
                if dim == 0 {
                    return Err(fail(1, "dimension must be positive".into()));
                }
                (kind, count, dim)
            }
            _ => {
                return Err(fail(
                    1,
                    format!("expected \"<kind> <count> <dim> {FORMAT_VERSION}\", got {header:?}"),
                ))
            }
        };
        let mut ids = Vec::with_capacity(count);
        let mut values = Vec::with_capacity(count * dim);
        let mut seen = HashSet::with_capacity(count);
        let mut line_no = 1;
        for line in lines {
            line_no += 1;
            let line = line.map_err(|e| Error::io(source, e))?;
            if line.trim().is_empty() {
                continue;
            }
            if ids.len() == count {
                return Err(fail(line_no, format!("more rows than the {count} declared")));
            }
            let mut parts = line.split_whitespace();
            let id = parts.next().expect("non-blank line has a field");
            let start = values.len();
            for p in parts {
                let v: f64 = p.parse().map_err(|_| fail(line_no, format!("bad value {p:?}")))?;
                if !v.is_finite() {
                    return Err(fail(line_no, format!("non-finite value {p:?}")));
                }
                values.push(v);
            }
            let width = values.len() - start;
            if width != dim {
                return Err(fail(line_no, format!("row {id:?} has {width} values, expected {dim}")));
            }
            if !seen.insert(id.to_string()) {
                return Err(fail(line_no, format!("duplicate id {id:?}")));
            }
            ids.push(id.to_string());
        }
        if ids.len() != count {
            return Err(fail(
                line_no + 1,
                format!("header declares {count} rows, file ends after {}", ids.len()),
            ));
        }
        Ok(EmbeddingFile { kind, dim, ids, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EmbeddingFile {
        let values = (0..12).map(|i| (i as f64 - 5.5) / 7.0).collect();
        EmbeddingFile::new(TableKind::Item, 4, vec!["a".into(), "b".into(), "c".into()], values).unwrap()
    }

    fn text(f: &EmbeddingFile) -> String {
        let mut buf = Vec::new();
        f.write_to(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    fn parse(s: &str) -> Result<EmbeddingFile> {
        EmbeddingFile::read_from(s.as_bytes(), "mem")
    }

    #[test]
    fn round_trip_within_stored_precision() {
        let f = sample();
        let saved = text(&f);
        assert!(saved.starts_with("item 3 4 v1\n"));
        let back = parse(&saved).unwrap();
        assert_eq!(back.ids, f.ids);
        for (a, b) in back.values.iter().zip(&f.values) {
            assert!((a - b).abs() <= 5e-9 * b.abs().max(1e-300));
        }
        assert_eq!(text(&back), saved);
    }

    #[test]
    fn short_file_errors_at_end() {
        let saved = text(&sample()).replacen("item 3", "item 5", 1);
        match parse(&saved) {
            Err(Error::Format { line, message, .. }) => {
                assert_eq!(line, 5);
                assert!(message.contains("declares 5"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn short_row_names_its_line() {
        let mut saved = text(&sample());
        let cut = saved.rfind(' ').unwrap();
        saved.replace_range(cut..saved.len() - 1, "");
        match parse(&saved) {
            Err(Error::Format { line, message, .. }) => {
                assert_eq!(line, 4);
                assert!(message.contains("3 values"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_headers_and_duplicates() {
        assert!(parse("").is_err());
        assert!(parse("item 1 2\nx 1 2\n").is_err());
        assert!(parse("item 1 2 v2\nx 1 2\n").is_err());
        assert!(parse("thing 1 2 v1\nx 1 2\n").is_err());
        assert!(parse("item 1 0 v1\n").is_err());
        match parse("word 2 1 v1\nx 1\nx 2\n") {
            Err(Error::Format { line: 3, message, .. }) => assert!(message.contains("duplicate")),
            other => panic!("{other:?}"),
        }
        assert!(parse("word 1 1 v1\nx 1\ny 2\n").is_err());
        assert!(parse("word 1 1 v1\nx nan\n").is_err());
    }

    #[test]
    fn rejects_unwritable_ids() {
        let f = EmbeddingFile::new(TableKind::User, 1, vec!["a b".into()], vec![1.0]).unwrap();
        assert!(f.write_to(Vec::new()).is_err());
    }
}
