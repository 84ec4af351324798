//! `key: value` line files shared by the schema, config and binding readers.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct KvError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Splits `text` into entries. Blank lines and `#` comments are skipped;
/// duplicate keys are rejected.
pub fn parse(text: &str) -> Result<Vec<Entry>, KvError> {
    let mut out: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            return Err(KvError {
                line: i + 1,
                message: format!("expected `<key>: <value>`, got `{line}`"),
            });
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(KvError {
                line: i + 1,
                message: "empty key".into(),
            });
        }
        if out.iter().any(|e| e.key == key) {
            return Err(KvError {
                line: i + 1,
                message: format!("duplicate key `{key}`"),
            });
        }
        out.push(Entry {
            line: i + 1,
            key: key.to_string(),
            value: value.trim().to_string(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects_duplicates() {
        let e = parse("# c\n a: 1 \n\nb:two words\n").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!((e[1].line, e[1].key.as_str(), e[1].value.as_str()), (4, "b", "two words"));
        assert_eq!(parse("a: 1\na: 2\n").unwrap_err().line, 2);
        assert!(parse("novalue\n").is_err());
    }
}
