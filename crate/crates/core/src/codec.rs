//! Reading, writing and canonicalizing storyform documents.
//!
//! Documents are JSON objects. The canonical text has keys sorted
//! lexicographically, two-space indentation, LF line endings and a trailing
//! newline. Floating-point numbers are rejected anywhere in a document, so
//! every scalar has exactly one spelling.
//!
//! Parsing only checks shape. Storyforms with broken assignments, missing
//! trees or stale beats parse fine; see [`crate::validator`] for the
//! narrative judgment.

mod markdown;

use std::collections::BTreeMap;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::model::{
    ConflictForm, Dynamics, Extensions, Perspective, PerspectiveAssignment, Quad, QuadPosition, Storybeat, Storyform,
    StorypointNode, StorypointPath, NCP_VERSION,
};
use crate::path::DocPath;

pub use markdown::export_markdown;

/// Major version of the document format this crate understands.
pub const SUPPORTED_MAJOR: u64 = 0;
const SUPPORTED_MINOR: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("document is not valid UTF-8 (invalid byte at offset {offset})")]
    Encoding { offset: usize },
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at {}: {message}", display_path(.path))]
    Schema { path: DocPath, message: String },
    #[error("unsupported ncp_version `{found}`: this reader supports {SUPPORTED_MAJOR}.x documents")]
    Version { found: String },
}

fn display_path(path: &DocPath) -> String {
    if path.is_root() {
        "document root".to_owned()
    } else {
        format!("`{path}`")
    }
}

/// Non-fatal findings while reading a document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodecWarning {
    /// Same major version, different minor: fields may be missing or
    /// unknown to this reader.
    MinorVersionMismatch { found: String },
}

impl std::fmt::Display for CodecWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CodecWarning::MinorVersionMismatch { found } => {
                write!(f, "ncp_version {found} differs from {NCP_VERSION} in minor version")
            }
        }
    }
}

pub fn parse(doc: &str) -> Result<Storyform, CodecError> {
    parse_with_warnings(doc).map(|(s, _)| s)
}

/// Like [`parse`], for raw bytes that must be UTF-8.
pub fn parse_bytes(doc: &[u8]) -> Result<Storyform, CodecError> {
    let text = std::str::from_utf8(doc).map_err(|e| CodecError::Encoding {
        offset: e.valid_up_to(),
    })?;
    parse(text)
}

pub fn parse_with_warnings(doc: &str) -> Result<(Storyform, Vec<CodecWarning>), CodecError> {
    let value: Value = serde_json::from_str(doc).map_err(|e| CodecError::Syntax {
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })?;
    from_value(&value)
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_owned(),
        None => message.to_owned(),
    }
}

/// Canonical text of a storyform. Equal storyforms give identical bytes.
pub fn serialize(s: &Storyform) -> String {
    let mut text = serde_json::to_string_pretty(&to_value(s)).expect("JSON values always serialize");
    text.push('\n');
    text
}

/// `serialize(parse(doc))`.
pub fn canonicalize(doc: &str) -> Result<String, CodecError> {
    parse(doc).map(|s| serialize(&s))
}

fn schema(path: &DocPath, message: impl Into<String>) -> CodecError {
    CodecError::Schema {
        path: path.clone(),
        message: message.into(),
    }
}

fn find_float(value: &Value, path: &DocPath) -> Option<DocPath> {
    match value {
        Value::Number(n) if n.is_f64() => Some(path.clone()),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .find_map(|(i, v)| find_float(v, &path.index(i))),
        Value::Object(map) => map.iter().find_map(|(k, v)| find_float(v, &path.key(k.as_str()))),
        _ => None,
    }
}

/// Builds a storyform from an already-parsed JSON value.
pub fn from_value(value: &Value) -> Result<(Storyform, Vec<CodecWarning>), CodecError> {
    let root = DocPath::root();
    if let Some(at) = find_float(value, &root) {
        return Err(schema(&at, "floating-point numbers are not allowed"));
    }
    let mut obj = Fields::new(value, &root)?;

    let version = obj.required_str("ncp_version")?;
    let warnings = check_version(&version)?;
    let title = obj.required_str("title")?;
    let dynamics = {
        let (v, p) = obj.required("dynamics")?;
        read_dynamics(v, &p)?
    };
    let assignment = match obj.optional("perspectives") {
        Some((v, p)) => read_assignment(v, &p)?,
        None => PerspectiveAssignment::new(),
    };
    let storypoints = match obj.optional("storypoints") {
        Some((v, p)) => read_storypoints(v, &p)?,
        None => BTreeMap::new(),
    };
    let beats = match obj.optional("storybeats") {
        Some((v, p)) => Some(read_beats(v, &p)?),
        None => None,
    };
    let annotations = match obj.optional("annotations") {
        Some((v, p)) => read_annotations(v, &p)?,
        None => BTreeMap::new(),
    };
    let storyform = Storyform {
        version,
        title,
        dynamics,
        assignment,
        storypoints,
        beats,
        annotations,
        extensions: obj.rest(),
    };
    Ok((storyform, warnings))
}

fn check_version(found: &str) -> Result<Vec<CodecWarning>, CodecError> {
    let bad = || CodecError::Version {
        found: found.to_owned(),
    };
    let parts: Vec<&str> = found.split('.').collect();
    if parts.len() != 3
        || parts
            .iter()
            .any(|p| p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit()))
    {
        return Err(bad());
    }
    let major: u64 = parts[0].parse().map_err(|_| bad())?;
    let minor: u64 = parts[1].parse().map_err(|_| bad())?;
    if major != SUPPORTED_MAJOR {
        return Err(bad());
    }
    if minor != SUPPORTED_MINOR {
        return Ok(vec![CodecWarning::MinorVersionMismatch {
            found: found.to_owned(),
        }]);
    }
    Ok(Vec::new())
}

/// Object reader that tracks which keys were consumed.
struct Fields<'a> {
    path: DocPath,
    map: &'a Map<String, Value>,
    taken: Vec<&'a str>,
}

impl<'a> Fields<'a> {
    fn new(value: &'a Value, path: &DocPath) -> Result<Self, CodecError> {
        match value {
            Value::Object(map) => Ok(Fields {
                path: path.clone(),
                map,
                taken: Vec::new(),
            }),
            other => Err(schema(path, format!("expected an object, found {}", kind(other)))),
        }
    }

    fn optional(&mut self, key: &'a str) -> Option<(&'a Value, DocPath)> {
        let v = self.map.get(key)?;
        self.taken.push(key);
        Some((v, self.path.key(key)))
    }

    fn required(&mut self, key: &'a str) -> Result<(&'a Value, DocPath), CodecError> {
        self.optional(key)
            .ok_or_else(|| schema(&self.path, format!("missing required field `{key}`")))
    }

    fn required_str(&mut self, key: &'a str) -> Result<String, CodecError> {
        let (v, p) = self.required(key)?;
        string(v, &p)
    }

    fn optional_str(&mut self, key: &'a str) -> Result<Option<String>, CodecError> {
        self.optional(key).map(|(v, p)| string(v, &p)).transpose()
    }

    fn optional_keyword<T: FromStr>(&mut self, key: &'a str) -> Result<Option<T>, CodecError>
    where
        T::Err: std::fmt::Display,
    {
        self.optional(key).map(|(v, p)| keyword(v, &p)).transpose()
    }

    fn required_keyword<T: FromStr>(&mut self, key: &'a str) -> Result<T, CodecError>
    where
        T::Err: std::fmt::Display,
    {
        let (v, p) = self.required(key)?;
        keyword(v, &p)
    }

    /// Everything not consumed, as extensions.
    fn rest(self) -> Extensions {
        self.map
            .iter()
            .filter(|(k, _)| !self.taken.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn string(v: &Value, path: &DocPath) -> Result<String, CodecError> {
    v.as_str()
        .map(str::to_owned)
        .ok_or_else(|| schema(path, format!("expected a string, found {}", kind(v))))
}

fn keyword<T: FromStr>(v: &Value, path: &DocPath) -> Result<T, CodecError>
where
    T::Err: std::fmt::Display,
{
    let s = v
        .as_str()
        .ok_or_else(|| schema(path, format!("expected a keyword string, found {}", kind(v))))?;
    s.parse().map_err(|e: T::Err| schema(path, e.to_string()))
}

fn read_dynamics(v: &Value, path: &DocPath) -> Result<Dynamics, CodecError> {
    let mut obj = Fields::new(v, path)?;
    let resolve = obj.required_keyword("resolve")?;
    let outcome = obj.required_keyword("outcome")?;
    let judgment = obj.required_keyword("judgment")?;
    let alignment = obj.required_keyword("alignment")?;
    let attunement = obj.optional_str("attunement")?;
    Ok(Dynamics {
        resolve,
        outcome,
        judgment,
        alignment,
        attunement,
        extensions: obj.rest(),
    })
}

fn perspective_entries<'a>(v: &'a Value, path: &DocPath) -> Result<Vec<(Perspective, &'a Value, DocPath)>, CodecError> {
    let map = v
        .as_object()
        .ok_or_else(|| schema(path, format!("expected an object, found {}", kind(v))))?;
    map.iter()
        .map(|(k, v)| {
            let p = path.key(k.as_str());
            let perspective = k.parse::<Perspective>().map_err(|e| schema(&p, e.to_string()))?;
            Ok((perspective, v, p))
        })
        .collect()
}

fn read_assignment(v: &Value, path: &DocPath) -> Result<PerspectiveAssignment, CodecError> {
    let mut a = PerspectiveAssignment::new();
    for (perspective, v, p) in perspective_entries(v, path)? {
        a.set(perspective, keyword::<ConflictForm>(v, &p)?);
    }
    Ok(a)
}

fn read_storypoints(v: &Value, path: &DocPath) -> Result<BTreeMap<Perspective, StorypointNode>, CodecError> {
    perspective_entries(v, path)?
        .into_iter()
        .map(|(perspective, v, p)| Ok((perspective, read_node(v, &p)?)))
        .collect()
}

fn read_node(v: &Value, path: &DocPath) -> Result<StorypointNode, CodecError> {
    let mut obj = Fields::new(v, path)?;
    let term = obj.required_str("term")?;
    let storytelling = obj.optional_str("storytelling")?;
    let quad = match obj.optional("quad") {
        Some((v, _)) => Some(Box::new(read_quad(v, path)?)),
        None => None,
    };
    let extensions = obj.rest();
    if let Some(pos) = QuadPosition::ALL.iter().find(|p| extensions.contains_key(p.as_str())) {
        return Err(schema(
            &path.key(pos.as_str()),
            "quad positions belong inside `quad`, not on the node itself",
        ));
    }
    Ok(StorypointNode {
        term,
        storytelling,
        quad,
        extensions,
    })
}

/// `node_path` is the owning node's path; children are addressed without
/// the `quad` segment.
fn read_quad(v: &Value, node_path: &DocPath) -> Result<Quad, CodecError> {
    let quad_path = node_path.key("quad");
    let map = v
        .as_object()
        .ok_or_else(|| schema(&quad_path, format!("expected an object, found {}", kind(v))))?;
    if let Some(k) = map.keys().find(|k| k.parse::<QuadPosition>().is_err()) {
        return Err(schema(
            &quad_path.key(k.as_str()),
            "not a quad position (tl, tr, bl, br)",
        ));
    }
    let child = |pos: QuadPosition| -> Result<StorypointNode, CodecError> {
        let v = map
            .get(pos.as_str())
            .ok_or_else(|| schema(&quad_path, format!("quad is missing `{pos}`")))?;
        read_node(v, &node_path.key(pos.as_str()))
    };
    Ok(Quad {
        tl: child(QuadPosition::TopLeft)?,
        tr: child(QuadPosition::TopRight)?,
        bl: child(QuadPosition::BottomLeft)?,
        br: child(QuadPosition::BottomRight)?,
    })
}

fn read_beats(v: &Value, path: &DocPath) -> Result<Vec<Storybeat>, CodecError> {
    let items = v
        .as_array()
        .ok_or_else(|| schema(path, format!("expected an array, found {}", kind(v))))?;
    items
        .iter()
        .enumerate()
        .map(|(i, v)| read_beat(v, &path.index(i)))
        .collect()
}

fn read_beat(v: &Value, path: &DocPath) -> Result<Storybeat, CodecError> {
    let mut obj = Fields::new(v, path)?;
    let index = {
        let (v, p) = obj.required("index")?;
        v.as_u64()
            .ok_or_else(|| schema(&p, format!("expected a non-negative integer, found {}", kind(v))))?
    };
    let perspective: Perspective = obj.required_keyword("perspective")?;
    let positions = {
        let (v, p) = obj.required("path")?;
        let text = string(v, &p)?;
        let positions = StorypointPath::parse_positions(&text).map_err(|e| schema(&p, e.to_string()))?;
        if !(1..=2).contains(&positions.len()) {
            return Err(schema(&p, "a storybeat path has one or two quad positions"));
        }
        positions
    };
    let phase = obj.required_keyword("phase")?;
    let resolution_kind = obj.optional_keyword("resolution_kind")?;
    let storytelling = obj.optional_str("storytelling")?;
    Ok(Storybeat {
        index,
        path: StorypointPath::new(perspective, positions),
        phase,
        resolution_kind,
        storytelling,
        extensions: obj.rest(),
    })
}

fn read_annotations(v: &Value, path: &DocPath) -> Result<BTreeMap<String, String>, CodecError> {
    let map = v
        .as_object()
        .ok_or_else(|| schema(path, format!("expected an object, found {}", kind(v))))?;
    map.iter()
        .map(|(k, v)| Ok((k.clone(), string(v, &path.key(k.as_str()))?)))
        .collect()
}

/// Canonical JSON value of a storyform. Known fields take precedence over
/// extensions with the same key.
pub fn to_value(s: &Storyform) -> Value {
    let mut root = extensions_map(&s.extensions);
    root.insert("ncp_version".into(), Value::String(s.version.clone()));
    root.insert("title".into(), Value::String(s.title.clone()));
    root.insert("dynamics".into(), dynamics_value(&s.dynamics));
    root.insert(
        "perspectives".into(),
        Value::Object(
            s.assignment
                .iter()
                .map(|(p, f)| (p.as_str().to_owned(), Value::String(f.as_str().to_owned())))
                .collect(),
        ),
    );
    root.insert(
        "storypoints".into(),
        Value::Object(
            s.storypoints
                .iter()
                .map(|(p, n)| (p.as_str().to_owned(), node_value(n)))
                .collect(),
        ),
    );
    if let Some(beats) = &s.beats {
        root.insert(
            "storybeats".into(),
            Value::Array(beats.iter().map(beat_value).collect()),
        );
    }
    if !s.annotations.is_empty() {
        root.insert(
            "annotations".into(),
            Value::Object(
                s.annotations
                    .iter()
                    .map(|(k, v)| (k.clone(), Value::String(v.clone())))
                    .collect(),
            ),
        );
    }
    Value::Object(root)
}

fn extensions_map(ext: &Extensions) -> Map<String, Value> {
    ext.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
}

fn dynamics_value(d: &Dynamics) -> Value {
    let mut m = extensions_map(&d.extensions);
    m.insert("resolve".into(), d.resolve.as_str().into());
    m.insert("outcome".into(), d.outcome.as_str().into());
    m.insert("judgment".into(), d.judgment.as_str().into());
    m.insert("alignment".into(), d.alignment.as_str().into());
    if let Some(a) = &d.attunement {
        m.insert("attunement".into(), a.clone().into());
    }
    Value::Object(m)
}

fn node_value(n: &StorypointNode) -> Value {
    let mut m = extensions_map(&n.extensions);
    m.insert("term".into(), n.term.clone().into());
    if let Some(st) = &n.storytelling {
        m.insert("storytelling".into(), st.clone().into());
    }
    if let Some(q) = &n.quad {
        let quad = q
            .iter()
            .map(|(pos, child)| (pos.as_str().to_owned(), node_value(child)))
            .collect();
        m.insert("quad".into(), Value::Object(quad));
    }
    Value::Object(m)
}

fn beat_value(b: &Storybeat) -> Value {
    let mut m = extensions_map(&b.extensions);
    m.insert("index".into(), b.index.into());
    m.insert("perspective".into(), b.path.perspective.as_str().into());
    m.insert("path".into(), b.path.positions_text().into());
    m.insert("phase".into(), b.phase.as_str().into());
    if let Some(k) = b.resolution_kind {
        m.insert("resolution_kind".into(), k.as_str().into());
    }
    if let Some(st) = &b.storytelling {
        m.insert("storytelling".into(), st.clone().into());
    }
    Value::Object(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;

    const MINIMAL: &str = r#"{"ncp_version":"0.1.0","title":"t",
        "dynamics":{"resolve":"maintained","outcome":"success","judgment":"good","alignment":"dopamine"}}"#;

    #[test]
    fn minimal_document_parses() {
        let s = parse(MINIMAL).unwrap();
        assert_eq!(s.title, "t");
        assert!(s.assignment.is_empty());
        assert!(s.beats.is_none());
    }

    #[test]
    fn canonical_text_shape() {
        let out = canonicalize(MINIMAL).unwrap();
        assert_eq!(
            out,
            "{\n  \"dynamics\": {\n    \"alignment\": \"dopamine\",\n    \"judgment\": \"good\",\n    \"outcome\": \"success\",\n    \"resolve\": \"maintained\"\n  },\n  \"ncp_version\": \"0.1.0\",\n  \"perspectives\": {},\n  \"storypoints\": {},\n  \"title\": \"t\"\n}\n"
        );
        assert_eq!(canonicalize(&out).unwrap(), out);
    }

    #[test]
    fn duplicate_forms_still_parse() {
        let doc = MINIMAL.replace(
            "\"title\":\"t\",",
            r#""title":"t","perspectives":{"mc":"external_framing","cp":"external_framing"},"#,
        );
        let s = parse(&doc).unwrap();
        assert_eq!(
            s.assignment.form(Perspective::CatalystProvocateur),
            Some(ConflictForm::ExternalFraming)
        );
        assert!(!s.assignment.is_valid());
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = parse("{\n  \"title\": ,\n}").unwrap_err();
        match err {
            CodecError::Syntax { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn perspective_bound_to_number_is_schema_error() {
        let doc = MINIMAL.replace("\"title\":\"t\",", r#""title":"t","perspectives":{"mc":3},"#);
        match parse(&doc).unwrap_err() {
            CodecError::Schema { path, .. } => assert_eq!(path.to_string(), "perspectives.mc"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keyword_is_schema_error() {
        let doc = MINIMAL.replace("maintained", "wavering");
        assert!(matches!(parse(&doc), Err(CodecError::Schema { .. })));
    }

    #[test]
    fn floats_are_rejected() {
        let doc = MINIMAL.replace("\"title\":\"t\",", r#""title":"t","x-weight":0.5,"#);
        match parse(&doc).unwrap_err() {
            CodecError::Schema { path, .. } => assert_eq!(path.to_string(), "x-weight"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn version_gating() {
        let doc = MINIMAL.replace("0.1.0", "1.0.0");
        assert!(matches!(parse(&doc), Err(CodecError::Version { .. })));
        let doc = MINIMAL.replace("0.1.0", "banana");
        assert!(matches!(parse(&doc), Err(CodecError::Version { .. })));
        let doc = MINIMAL.replace("0.1.0", "0.2.3");
        let (s, warnings) = parse_with_warnings(&doc).unwrap();
        assert_eq!(s.version, "0.2.3");
        assert_eq!(warnings.len(), 1);
        let (_, warnings) = parse_with_warnings(&MINIMAL.replace("0.1.0", "0.1.7")).unwrap();
        assert!(warnings.is_empty());
    }

    #[test]
    fn unknown_fields_survive() {
        let doc = MINIMAL.replace(
            "\"alignment\":\"dopamine\"",
            r#""alignment":"dopamine","x-tempo":{"b":[1,2],"a":null}"#,
        );
        let s = parse(&doc).unwrap();
        assert!(s.dynamics.extensions.contains_key("x-tempo"));
        let out = serialize(&s);
        assert!(out.contains("\"x-tempo\": {\n      \"a\": null,"));
        assert_eq!(parse(&out).unwrap(), s);
    }

    #[test]
    fn quad_needs_all_four_positions() {
        let doc = MINIMAL.replace(
            "\"title\":\"t\",",
            r#""title":"t","storypoints":{"os":{"term":"x","quad":{"tl":{"term":"a"}}}},"#,
        );
        assert!(matches!(parse(&doc), Err(CodecError::Schema { .. })));
        let doc = MINIMAL.replace(
            "\"title\":\"t\",",
            r#""title":"t","storypoints":{"os":{"term":"x","tl":{"term":"a"}}},"#,
        );
        match parse(&doc).unwrap_err() {
            CodecError::Schema { path, .. } => assert_eq!(path.to_string(), "storypoints.os.tl"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn beat_paths_are_one_or_two_positions() {
        let beats = |path: &str| {
            MINIMAL.replace(
                "\"title\":\"t\",",
                &format!(
                    r#""title":"t","storybeats":[{{"index":0,"perspective":"mc","path":"{path}","phase":"crisis"}}],"#
                ),
            )
        };
        assert!(parse(&beats("tl")).is_ok());
        assert!(parse(&beats("tl.br")).is_ok());
        assert!(parse(&beats("tl.br.bl")).is_err());
        assert!(parse(&beats("middle")).is_err());
    }

    #[test]
    fn invalid_utf8_is_rejected() {
        let mut bytes = MINIMAL.as_bytes().to_vec();
        bytes[40] = 0xff;
        assert!(matches!(parse_bytes(&bytes), Err(CodecError::Encoding { offset: 40 })));
    }
}
