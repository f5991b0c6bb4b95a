//! Document paths.
//!
//! A path is a sequence of object keys and array indices written as
//! `dynamics.resolve`, `storybeats[3].phase` or `annotations["storypoints.mc"]`.
//! Keys made only of ASCII letters, digits, `_` and `-` are written bare;
//! any other key is written as a bracketed JSON string. Storypoint paths
//! leave out the `quad` wrapper, so `storypoints.mc.tl.term` is the term of
//! the main character's top-left signpost.
//!
//! The same grammar addresses annotations, deviations, diagnostics and
//! changeset entries.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Segment {
    Key(String),
    Index(usize),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DocPath(Vec<Segment>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid path `{text}` at byte {offset}: {reason}")]
pub struct PathSyntaxError {
    pub text: String,
    pub offset: usize,
    pub reason: &'static str,
}

fn is_bare_key(key: &str) -> bool {
    !key.is_empty() && key.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

impl DocPath {
    pub fn root() -> Self {
        DocPath(Vec::new())
    }

    pub fn from_keys<I, S>(keys: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        DocPath(keys.into_iter().map(|k| Segment::Key(k.into())).collect())
    }

    pub fn segments(&self) -> &[Segment] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn key(&self, key: impl Into<String>) -> DocPath {
        let mut next = self.clone();
        next.0.push(Segment::Key(key.into()));
        next
    }

    pub fn index(&self, index: usize) -> DocPath {
        let mut next = self.clone();
        next.0.push(Segment::Index(index));
        next
    }

    /// Key segment at `i`, if there is one.
    pub fn key_at(&self, i: usize) -> Option<&str> {
        match self.0.get(i) {
            Some(Segment::Key(k)) => Some(k),
            _ => None,
        }
    }

    pub fn starts_with(&self, prefix: &DocPath) -> bool {
        self.0.starts_with(&prefix.0)
    }
}

impl fmt::Display for DocPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, seg) in self.0.iter().enumerate() {
            match seg {
                Segment::Key(k) if is_bare_key(k) => {
                    if i > 0 {
                        f.write_str(".")?;
                    }
                    f.write_str(k)?;
                }
                Segment::Key(k) => {
                    let quoted = serde_json::to_string(k).map_err(|_| fmt::Error)?;
                    write!(f, "[{quoted}]")?;
                }
                Segment::Index(n) => write!(f, "[{n}]")?,
            }
        }
        Ok(())
    }
}

impl FromStr for DocPath {
    type Err = PathSyntaxError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let err = |offset, reason| PathSyntaxError {
            text: text.to_owned(),
            offset,
            reason,
        };
        let bytes = text.as_bytes();
        let mut segments = Vec::new();
        let mut i = 0;
        if text.is_empty() {
            return Err(err(0, "empty path"));
        }
        while i < bytes.len() {
            match bytes[i] {
                b'[' => {
                    if bytes.get(i + 1) == Some(&b'"') {
                        let (key, used) = read_quoted(&text[i + 1..]).ok_or_else(|| err(i + 1, "unterminated key"))?;
                        i += 1 + used;
                        if bytes.get(i) != Some(&b']') {
                            return Err(err(i, "expected `]`"));
                        }
                        segments.push(Segment::Key(key));
                    } else {
                        let end = text[i + 1..].find(']').ok_or_else(|| err(i, "expected `]`"))? + i + 1;
                        let digits = &text[i + 1..end];
                        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                            return Err(err(i + 1, "expected an index"));
                        }
                        let n = digits.parse().map_err(|_| err(i + 1, "index out of range"))?;
                        segments.push(Segment::Index(n));
                        i = end;
                    }
                    i += 1;
                }
                b'.' if segments.is_empty() => return Err(err(i, "leading `.`")),
                _ => {
                    if !segments.is_empty() {
                        if bytes[i] != b'.' {
                            return Err(err(i, "expected `.` or `[`"));
                        }
                        i += 1;
                    }
                    let start = i;
                    while i < bytes.len() && bytes[i] != b'.' && bytes[i] != b'[' {
                        i += 1;
                    }
                    let key = &text[start..i];
                    if !is_bare_key(key) {
                        return Err(err(start, "expected a key"));
                    }
                    segments.push(Segment::Key(key.to_owned()));
                }
            }
        }
        Ok(DocPath(segments))
    }
}

/// Reads a JSON string literal at the start of `text`; returns the decoded
/// string and the number of bytes consumed.
fn read_quoted(text: &str) -> Option<(String, usize)> {
    let bytes = text.as_bytes();
    let mut i = 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'"' => {
                let decoded = serde_json::from_str(&text[..=i]).ok()?;
                return Some((decoded, i + 1));
            }
            _ => i += 1,
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_keys_indices_and_quoted_keys() {
        let p = DocPath::from_keys(["storybeats"]).index(3).key("phase");
        assert_eq!(p.to_string(), "storybeats[3].phase");
        let p = DocPath::from_keys(["annotations", "storypoints.mc"]);
        assert_eq!(p.to_string(), r#"annotations["storypoints.mc"]"#);
        let p = DocPath::from_keys(["x-ext", "a b"]);
        assert_eq!(p.to_string(), r#"x-ext["a b"]"#);
    }

    #[test]
    fn parses_what_it_renders() {
        for text in [
            "dynamics.resolve",
            "storypoints.mc.tl.term",
            "storybeats[12].resolution_kind",
            r#"annotations["storypoints.mc.tl"]"#,
            r#"annotations["quote \" and ]"]"#,
            r#"["odd key"].x[0][1]"#,
        ] {
            let parsed: DocPath = text.parse().unwrap();
            assert_eq!(parsed.to_string(), text);
        }
    }

    #[test]
    fn rejects_malformed_paths() {
        for text in ["", ".a", "a..b", "a.", "a[", "a[x]", "a[1", "a b", r#"a["x"#, "a]"] {
            assert!(text.parse::<DocPath>().is_err(), "{text:?} should not parse");
        }
    }

    #[test]
    fn orders_indices_numerically() {
        let a: DocPath = "storybeats[2]".parse().unwrap();
        let b: DocPath = "storybeats[10]".parse().unwrap();
        assert!(a < b);
    }
}
