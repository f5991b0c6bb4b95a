//! Structural diff and three-way merge of storyforms.
//!
//! Both work on the canonical document tree addressed with [`DocPath`]s.
//! Storypoint children are addressed without the `quad` wrapper, so a term
//! edit shows up as `storypoints.os.tr.term`. Values are rendered as compact
//! JSON, which keeps them on one line and tab-free.
//!
//! Beats are compared by position, never aligned. After a merge that
//! touches structure, recompiling is the way to bring beats back in line.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::{Map, Value};

use crate::codec::{self, CodecError};
use crate::model::{QuadPosition, Storyform};
use crate::path::{DocPath, Segment};

/// One changed leaf. `old == None` is an addition, `new == None` a
/// deletion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Change {
    pub path: DocPath,
    pub old: Option<String>,
    pub new: Option<String>,
}

/// Changes sorted by path, at most one per path.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChangeSet {
    pub entries: Vec<Change>,
}

impl ChangeSet {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// One `path<TAB>old<TAB>new` line per entry; absent values are empty.
    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|c| {
                format!(
                    "{}\t{}\t{}\n",
                    c.path,
                    c.old.as_deref().unwrap_or(""),
                    c.new.as_deref().unwrap_or("")
                )
            })
            .collect()
    }
}

/// A path both sides changed differently. The merged document keeps
/// `base` there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conflict {
    pub path: DocPath,
    pub base: Option<String>,
    pub ours: Option<String>,
    pub theirs: Option<String>,
}

impl fmt::Display for Conflict {
    /// `path<TAB>base<TAB>ours<TAB>theirs`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &Option<String>| v.clone().unwrap_or_default();
        write!(
            f,
            "{}\t{}\t{}\t{}",
            self.path,
            show(&self.base),
            show(&self.ours),
            show(&self.theirs)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeResult {
    pub merged: Storyform,
    pub conflicts: Vec<Conflict>,
}

impl MergeResult {
    pub fn is_clean(&self) -> bool {
        self.conflicts.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ApplyError {
    #[error("change at `{path}` expects {}, found {}", show(.expected), show(.found))]
    Mismatch {
        path: DocPath,
        expected: Option<String>,
        found: Option<String>,
    },
    #[error("change at `{path}` has neither an old nor a new value")]
    Empty { path: DocPath },
    #[error("value at `{path}` is not JSON: {text}")]
    BadValue { path: DocPath, text: String },
    #[error("changes leave an inconsistent tree at `{path}`: {reason}")]
    Shape { path: DocPath, reason: &'static str },
    #[error("changed document is not a storyform: {0}")]
    Document(#[from] CodecError),
}

fn show(v: &Option<String>) -> String {
    v.clone().unwrap_or_else(|| "nothing".to_owned())
}

pub fn diff(a: &Storyform, b: &Storyform) -> ChangeSet {
    let before = flatten(&to_view(a));
    let after = flatten(&to_view(b));
    let paths: BTreeSet<&DocPath> = before.keys().chain(after.keys()).collect();
    let entries = paths
        .into_iter()
        .filter_map(|p| {
            let old = before.get(p);
            let new = after.get(p);
            (old != new).then(|| Change {
                path: p.clone(),
                old: old.cloned(),
                new: new.cloned(),
            })
        })
        .collect();
    ChangeSet { entries }
}

/// Applies `changes` to `a`. Every entry's old value must match what `a`
/// has at that path.
pub fn apply(a: &Storyform, changes: &ChangeSet) -> Result<Storyform, ApplyError> {
    let mut leaves = flatten(&to_view(a));
    for c in &changes.entries {
        if c.old.is_none() && c.new.is_none() {
            return Err(ApplyError::Empty { path: c.path.clone() });
        }
        let found = leaves.get(&c.path);
        if found != c.old.as_ref() {
            return Err(ApplyError::Mismatch {
                path: c.path.clone(),
                expected: c.old.clone(),
                found: found.cloned(),
            });
        }
        match &c.new {
            Some(v) => leaves.insert(c.path.clone(), v.clone()),
            None => leaves.remove(&c.path),
        };
    }
    let view = unflatten(&leaves)?;
    from_view(view).map_err(ApplyError::from)
}

/// Three-way merge of `ours` and `theirs` against `base`.
///
/// A path changed on one side takes that side; changed identically on both
/// takes the shared value; changed differently is a conflict and keeps
/// `base`. Where one side replaced a whole subtree, or the beat lists
/// differ in length, the subtree is merged as a unit.
pub fn merge3(base: &Storyform, ours: &Storyform, theirs: &Storyform) -> MergeResult {
    let (b, o, t) = (to_view(base), to_view(ours), to_view(theirs));
    let mut conflicts = Vec::new();
    let merged = merge_value(&DocPath::root(), Some(&b), Some(&o), Some(&t), &mut conflicts)
        .expect("the document root is present on every side");
    conflicts.sort_by(|x, y| x.path.cmp(&y.path));
    let merged = from_view(merged).expect("merging parsed storyforms yields a parseable document");
    MergeResult { merged, conflicts }
}

fn text(v: Option<&Value>) -> Option<String> {
    v.map(|v| serde_json::to_string(v).expect("JSON values always serialize"))
}

fn merge_value(
    path: &DocPath,
    base: Option<&Value>,
    ours: Option<&Value>,
    theirs: Option<&Value>,
    conflicts: &mut Vec<Conflict>,
) -> Option<Value> {
    if ours == theirs || theirs == base {
        return ours.cloned();
    }
    if ours == base {
        return theirs.cloned();
    }
    match (base, ours, theirs) {
        (Some(Value::Object(b)), Some(Value::Object(o)), Some(Value::Object(t))) => {
            Some(Value::Object(merge_object(path, b, o, t, conflicts)))
        }
        (None, Some(Value::Object(o)), Some(Value::Object(t))) if has_optional_entries(path) => {
            Some(Value::Object(merge_object(path, &Map::new(), o, t, conflicts)))
        }
        (Some(Value::Array(b)), Some(Value::Array(o)), Some(Value::Array(t)))
            if b.len() == o.len() && o.len() == t.len() =>
        {
            let items = (0..b.len())
                .map(|i| {
                    merge_value(&path.index(i), Some(&b[i]), Some(&o[i]), Some(&t[i]), conflicts)
                        .expect("array slots are present on every side")
                })
                .collect();
            Some(Value::Array(items))
        }
        _ => {
            conflicts.push(Conflict {
                path: path.clone(),
                base: text(base),
                ours: text(ours),
                theirs: text(theirs),
            });
            base.cloned()
        }
    }
}

fn merge_object(
    path: &DocPath,
    base: &Map<String, Value>,
    ours: &Map<String, Value>,
    theirs: &Map<String, Value>,
    conflicts: &mut Vec<Conflict>,
) -> Map<String, Value> {
    let grouped = is_node_path(path);
    let mut out = Map::new();
    let keys: BTreeSet<&String> = base.keys().chain(ours.keys()).chain(theirs.keys()).collect();
    for key in keys {
        if grouped && is_position(key) {
            continue;
        }
        if let Some(v) = merge_value(
            &path.key(key.as_str()),
            base.get(key),
            ours.get(key),
            theirs.get(key),
            conflicts,
        ) {
            out.insert(key.clone(), v);
        }
    }
    if grouped {
        merge_quad(path, base, ours, theirs, conflicts, &mut out);
    }
    out
}

/// The four children of a node appear or disappear together. They merge
/// one by one only when every side has them; otherwise they merge as one
/// unit so a partial quad can never come out.
fn merge_quad(
    path: &DocPath,
    base: &Map<String, Value>,
    ours: &Map<String, Value>,
    theirs: &Map<String, Value>,
    conflicts: &mut Vec<Conflict>,
    out: &mut Map<String, Value>,
) {
    let children = |m: &Map<String, Value>| -> Vec<Option<Value>> {
        QuadPosition::ALL.iter().map(|p| m.get(p.as_str()).cloned()).collect()
    };
    let (b, o, t) = (children(base), children(ours), children(theirs));
    let has = |c: &[Option<Value>]| c.iter().all(Option::is_some);
    let chosen = if has(&b) && has(&o) && has(&t) {
        QuadPosition::ALL
            .iter()
            .enumerate()
            .map(|(i, p)| {
                merge_value(
                    &path.key(p.as_str()),
                    b[i].as_ref(),
                    o[i].as_ref(),
                    t[i].as_ref(),
                    conflicts,
                )
            })
            .collect()
    } else if o == t || t == b {
        o
    } else if o == b {
        t
    } else {
        for (i, p) in QuadPosition::ALL.iter().enumerate() {
            if !(b[i] == o[i] && o[i] == t[i]) {
                conflicts.push(Conflict {
                    path: path.key(p.as_str()),
                    base: text(b[i].as_ref()),
                    ours: text(o[i].as_ref()),
                    theirs: text(t[i].as_ref()),
                });
            }
        }
        b
    };
    for (p, v) in QuadPosition::ALL.iter().zip(chosen) {
        if let Some(v) = v {
            out.insert(p.as_str().to_owned(), v);
        }
    }
}

/// Maps whose entries are independent, so two sides creating the map can
/// still merge entry by entry. The map is left out of documents when empty.
fn has_optional_entries(path: &DocPath) -> bool {
    path.len() == 1 && path.key_at(0) == Some("annotations")
}

fn is_position(key: &str) -> bool {
    key.parse::<QuadPosition>().is_ok()
}

/// `storypoints.<p>` followed only by quad positions.
fn is_node_path(path: &DocPath) -> bool {
    let segs = path.segments();
    segs.len() >= 2
        && path.key_at(0) == Some("storypoints")
        && segs[2..].iter().all(|s| matches!(s, Segment::Key(k) if is_position(k)))
}

/// Canonical document tree with every node's `quad` folded into the node.
fn to_view(s: &Storyform) -> Value {
    let mut v = codec::to_value(s);
    if let Some(Value::Object(trees)) = v.get_mut("storypoints") {
        for node in trees.values_mut() {
            lift_quads(node);
        }
    }
    v
}

fn lift_quads(node: &mut Value) {
    let Value::Object(m) = node else { return };
    if let Some(Value::Object(quad)) = m.remove("quad") {
        for (pos, mut child) in quad {
            lift_quads(&mut child);
            m.insert(pos, child);
        }
    }
}

fn from_view(mut v: Value) -> Result<Storyform, CodecError> {
    if let Some(Value::Object(trees)) = v.get_mut("storypoints") {
        for node in trees.values_mut() {
            lower_quads(node);
        }
    }
    codec::from_value(&v).map(|(s, _)| s)
}

fn lower_quads(node: &mut Value) {
    let Value::Object(m) = node else { return };
    let mut quad = Map::new();
    for p in QuadPosition::ALL {
        if let Some(mut child) = m.remove(p.as_str()) {
            lower_quads(&mut child);
            quad.insert(p.as_str().to_owned(), child);
        }
    }
    if !quad.is_empty() {
        m.insert("quad".to_owned(), Value::Object(quad));
    }
}

/// Leaves of the tree: scalars and empty containers.
fn flatten(v: &Value) -> BTreeMap<DocPath, String> {
    fn walk(v: &Value, path: DocPath, out: &mut BTreeMap<DocPath, String>) {
        match v {
            Value::Object(m) if !m.is_empty() => {
                for (k, child) in m {
                    walk(child, path.key(k.as_str()), out);
                }
            }
            Value::Array(items) if !items.is_empty() => {
                for (i, child) in items.iter().enumerate() {
                    walk(child, path.index(i), out);
                }
            }
            leaf => {
                out.insert(path, text(Some(leaf)).expect("present"));
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(v, DocPath::root(), &mut out);
    out
}

enum Node {
    Leaf(Value),
    Object(BTreeMap<String, Node>),
    Array(BTreeMap<usize, Node>),
}

fn unflatten(leaves: &BTreeMap<DocPath, String>) -> Result<Value, ApplyError> {
    let mut root = Node::Object(BTreeMap::new());
    for (path, text) in leaves {
        let value: Value = serde_json::from_str(text).map_err(|_| ApplyError::BadValue {
            path: path.clone(),
            text: text.clone(),
        })?;
        let shape = |reason| ApplyError::Shape {
            path: path.clone(),
            reason,
        };
        if path.is_root() {
            return Err(shape("the document root cannot be a leaf"));
        }
        let mut cursor = &mut root;
        let segs = path.segments();
        for (i, seg) in segs.iter().enumerate() {
            let last = i + 1 == segs.len();
            let fresh = || {
                if last {
                    Node::Leaf(value.clone())
                } else {
                    empty_for(&segs[i + 1])
                }
            };
            cursor = match (cursor, seg) {
                (Node::Object(m), Segment::Key(k)) => {
                    if last && m.contains_key(k) {
                        return Err(shape("path is both a value and a container"));
                    }
                    m.entry(k.clone()).or_insert_with(fresh)
                }
                (Node::Array(a), Segment::Index(n)) => {
                    if last && a.contains_key(n) {
                        return Err(shape("path is both a value and a container"));
                    }
                    a.entry(*n).or_insert_with(fresh)
                }
                (Node::Leaf(_), _) => return Err(shape("path is both a value and a container")),
                _ => return Err(shape("key used on an array or index used on an object")),
            };
        }
    }
    finish(root, &DocPath::root())
}

fn empty_for(next: &Segment) -> Node {
    match next {
        Segment::Key(_) => Node::Object(BTreeMap::new()),
        Segment::Index(_) => Node::Array(BTreeMap::new()),
    }
}

fn finish(node: Node, path: &DocPath) -> Result<Value, ApplyError> {
    match node {
        Node::Leaf(v) => Ok(v),
        Node::Object(m) => m
            .into_iter()
            .map(|(k, child)| {
                let p = path.key(k.as_str());
                Ok((k, finish(child, &p)?))
            })
            .collect::<Result<Map<_, _>, _>>()
            .map(Value::Object),
        Node::Array(a) => {
            let mut items = Vec::with_capacity(a.len());
            for (i, (n, child)) in a.into_iter().enumerate() {
                if n != i {
                    return Err(ApplyError::Shape {
                        path: path.index(i),
                        reason: "array indices have a gap",
                    });
                }
                items.push(finish(child, &path.index(n))?);
            }
            Ok(Value::Array(items))
        }
    }
}
