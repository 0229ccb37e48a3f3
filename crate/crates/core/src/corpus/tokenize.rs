//! Tokenizer used for every corpus entering the pipeline.
//!
//! Text is split into maximal runs of letters/digits. Runs of any other
//! non-whitespace characters (punctuation, symbols) become their own tokens,
//! and whitespace only separates.

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Word,
    Punct,
    Space,
}

fn class_of(c: char) -> Class {
    if c.is_alphanumeric() {
        Class::Word
    } else if c.is_whitespace() {
        Class::Space
    } else {
        Class::Punct
    }
}

/// Splits `text` into tokens without changing case.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut start = None;
    let mut current = Class::Space;
    for (i, c) in text.char_indices() {
        let class = class_of(c);
        if class != current {
            if let Some(s) = start.take() {
                tokens.push(text[s..i].to_string());
            }
            if class != Class::Space {
                start = Some(i);
            }
            current = class;
        }
    }
    if let Some(s) = start {
        tokens.push(text[s..].to_string());
    }
    tokens
}

/// Lowercases with single-character mappings only, leaving characters whose
/// lowercase form expands to several code points untouched. This tracks
/// Unicode simple case folding for the scripts found in review text.
pub fn fold_case(token: &str) -> String {
    token
        .chars()
        .map(|c| {
            let mut lower = c.to_lowercase();
            match (lower.next(), lower.next()) {
                (Some(l), None) => l,
                _ => c,
            }
        })
        .collect()
}
