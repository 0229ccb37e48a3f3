use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde_json::{Map, Value};

use super::{tokenize, DatasetKind, Review, ReviewSet, Sentiment};
use crate::error::{Error, Result};

/// How malformed records are treated while loading.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum LoadMode {
    #[default]
    Strict,
    /// Skip malformed records and report them as warnings.
    Lenient,
}

#[derive(Debug)]
pub struct Loaded {
    pub set: ReviewSet,
    /// Record-level errors skipped in lenient mode.
    pub warnings: Vec<Error>,
}

fn string_field(obj: &Map<String, Value>, line: usize, field: &'static str) -> Result<String> {
    match obj.get(field) {
        None | Some(Value::Null) => Err(Error::MissingField { line, field }),
        Some(Value::String(s)) => Ok(s.clone()),
        // numeric ids show up in some dumps
        Some(Value::Number(n)) => Ok(n.to_string()),
        Some(_) => Err(Error::Record {
            line,
            message: format!("field \"{field}\" must be a string"),
        }),
    }
}

fn parse_record(text: &str, line: usize) -> Result<Review> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Record {
        line,
        message: format!("invalid JSON: {e}"),
    })?;
    let Value::Object(obj) = value else {
        return Err(Error::Record {
            line,
            message: "record is not an object".into(),
        });
    };
    let doc_id = string_field(&obj, line, "doc_id")?;
    let user_id = string_field(&obj, line, "user_id")?;
    let item_id = string_field(&obj, line, "item_id")?;
    let rating = match obj.get("rating") {
        None | Some(Value::Null) => return Err(Error::MissingField { line, field: "rating" }),
        Some(v) => v.as_f64().filter(|r| r.is_finite()).ok_or_else(|| Error::Record {
            line,
            message: "field \"rating\" must be a finite number".into(),
        })?,
    };
    let text = string_field(&obj, line, "text")?;
    let genres = match obj.get("genres") {
        None | Some(Value::Null) => return Err(Error::MissingField { line, field: "genres" }),
        Some(Value::Array(items)) => items
            .iter()
            .map(|g| {
                g.as_str().map(str::to_string).ok_or_else(|| Error::Record {
                    line,
                    message: "field \"genres\" must hold strings".into(),
                })
            })
            .collect::<Result<_>>()?,
        Some(_) => {
            return Err(Error::Record {
                line,
                message: "field \"genres\" must be an array".into(),
            })
        }
    };
    // Files written by `write_reviews` carry tokens and sentiment already.
    let tokens = match obj.get("tokens") {
        Some(Value::Array(items)) => items
            .iter()
            .map(|t| {
                t.as_str().map(str::to_string).ok_or_else(|| Error::Record {
                    line,
                    message: "field \"tokens\" must hold strings".into(),
                })
            })
            .collect::<Result<_>>()?,
        _ => tokenize(&text),
    };
    let sentiment = match obj.get("sentiment") {
        Some(v @ Value::String(_)) => Some(
            serde_json::from_value::<Sentiment>(v.clone()).map_err(|e| Error::Record {
                line,
                message: format!("bad sentiment: {e}"),
            })?,
        ),
        _ => None,
    };
    Ok(Review {
        doc_id,
        user_id,
        item_id,
        rating,
        text,
        genres,
        sentiment,
        tokens,
    })
}

/// Reads newline-delimited review records.
///
/// Blank lines are ignored. An empty file yields an empty set.
pub fn load_reviews(path: impl AsRef<Path>, kind: DatasetKind, mode: LoadMode) -> Result<Loaded> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_reviews(BufReader::new(file), kind, mode).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// [`load_reviews`] over any buffered reader.
pub fn read_reviews(reader: impl BufRead, kind: DatasetKind, mode: LoadMode) -> Result<Loaded> {
    let mut reviews = Vec::new();
    let mut warnings = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<reader>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_record(&line, i + 1) {
            Ok(review) => reviews.push(review),
            Err(e) if mode == LoadMode::Lenient => warnings.push(e),
            Err(e) => return Err(e),
        }
    }
    let set = ReviewSet::new(kind, reviews);
    set.check_unique_doc_ids()?;
    Ok(Loaded { set, warnings })
}

/// Writes one JSON record per review, including tokens and sentiment.
pub fn write_reviews(set: &ReviewSet, out: impl Write) -> Result<()> {
    let mut out = BufWriter::new(out);
    for review in &set.reviews {
        serde_json::to_writer(&mut out, review)
            .map_err(|e| Error::io("<writer>", std::io::Error::other(e)))?;
        out.write_all(b"\n").map_err(|e| Error::io("<writer>", e))?;
    }
    out.flush().map_err(|e| Error::io("<writer>", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{"doc_id":"d1","user_id":"u1","item_id":"i1","rating":4,"text":"Nice place, friendly staff.","genres":["restaurants"]}"#;

    fn load(text: &str, mode: LoadMode) -> Result<Loaded> {
        read_reviews(text.as_bytes(), DatasetKind::Yelp, mode)
    }

    #[test]
    fn loads_single_record() {
        let loaded = load(GOOD, LoadMode::Strict).unwrap();
        assert_eq!(loaded.set.len(), 1);
        let r = &loaded.set.reviews[0];
        assert_eq!(r.tokens, ["Nice", "place", ",", "friendly", "staff", "."]);
        assert_eq!(r.sentiment, None);
    }

    #[test]
    fn missing_rating_names_line_and_field() {
        let text = r#"{"doc_id":"d1","user_id":"u1","item_id":"i1","text":"x","genres":[]}"#;
        let err = load(text, LoadMode::Strict).unwrap_err();
        assert!(matches!(err, Error::MissingField { line: 1, field: "rating" }), "{err}");
    }

    #[test]
    fn strict_vs_lenient() {
        let mut text = String::new();
        for i in 0..3 {
            text.push_str(&GOOD.replace("\"d1\"", &format!("\"d{i}\"")));
            text.push('\n');
        }
        text.push_str("{\"doc_id\": \"broken\"\n");
        assert!(load(&text, LoadMode::Strict).is_err());
        let loaded = load(&text, LoadMode::Lenient).unwrap();
        assert_eq!(loaded.set.len(), 3);
        assert_eq!(loaded.warnings.len(), 1);
    }

    #[test]
    fn empty_input_is_empty_set() {
        assert!(load("", LoadMode::Strict).unwrap().set.is_empty());
    }

    #[test]
    fn unreadable_file_is_fatal() {
        let err = load_reviews("/nonexistent/reviews.jsonl", DatasetKind::Yelp, LoadMode::Lenient).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn written_records_load_back() {
        let mut loaded = load(GOOD, LoadMode::Strict).unwrap().set;
        loaded.reviews[0].sentiment = Some(Sentiment::Positive);
        let mut buf = Vec::new();
        write_reviews(&loaded, &mut buf).unwrap();
        let back = read_reviews(&buf[..], DatasetKind::Yelp, LoadMode::Strict).unwrap().set;
        assert_eq!(back.reviews, loaded.reviews);
    }
}
