//! Narrative validity of a parsed storyform.
//!
//! Findings carry stable codes; see the table on [`Code`]. Validation is
//! advisory: it never fails and never changes its input.

use std::collections::BTreeSet;
use std::fmt;

use crate::justification;
use crate::model::{Alignment, Perspective, Storyform, StorypointNode, CENTERED};
use crate::path::DocPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl Severity {
    pub const fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Diagnostic codes. The numbers are a public contract and never reused.
///
/// | code   | severity | finding |
/// |--------|----------|---------|
/// | NCP001 | error    | perspective assignment is not total or not bijective |
/// | NCP002 | error    | catalyst provocateur is not opposite the main character |
/// | NCP003 | error    | relationship story is not opposite the objective story |
/// | NCP010 | error    | serotonin, success and good without a "Centered" attunement |
/// | NCP011 | warning  | attunement set under dopamine alignment |
/// | NCP020 | error    | storybeat path does not resolve |
/// | NCP021 | error    | storybeat indices are not `0..n` |
/// | NCP022 | error    | resolution kind on a non-resolution beat, or missing on the resolution beat |
/// | NCP023 | warning  | storybeats differ from the justified sequence |
/// | NCP030 | error    | empty storypoint term, or quads nested more than two levels |
/// | NCP040 | warning  | perspective without a storypoint tree |
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Code {
    Ncp001,
    Ncp002,
    Ncp003,
    Ncp010,
    Ncp011,
    Ncp020,
    Ncp021,
    Ncp022,
    Ncp023,
    Ncp030,
    Ncp040,
}

impl Code {
    pub const ALL: &'static [Code] = &[
        Code::Ncp001,
        Code::Ncp002,
        Code::Ncp003,
        Code::Ncp010,
        Code::Ncp011,
        Code::Ncp020,
        Code::Ncp021,
        Code::Ncp022,
        Code::Ncp023,
        Code::Ncp030,
        Code::Ncp040,
    ];

    pub const fn as_str(self) -> &'static str {
        match self {
            Code::Ncp001 => "NCP001",
            Code::Ncp002 => "NCP002",
            Code::Ncp003 => "NCP003",
            Code::Ncp010 => "NCP010",
            Code::Ncp011 => "NCP011",
            Code::Ncp020 => "NCP020",
            Code::Ncp021 => "NCP021",
            Code::Ncp022 => "NCP022",
            Code::Ncp023 => "NCP023",
            Code::Ncp030 => "NCP030",
            Code::Ncp040 => "NCP040",
        }
    }

    pub const fn severity(self) -> Severity {
        match self {
            Code::Ncp011 | Code::Ncp023 | Code::Ncp040 => Severity::Warning,
            _ => Severity::Error,
        }
    }

    /// The assignment and storypoint-shape codes that block sequencing.
    pub const fn is_structural(self) -> bool {
        matches!(self, Code::Ncp001 | Code::Ncp002 | Code::Ncp003 | Code::Ncp030)
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Diagnostic {
    pub code: Code,
    pub severity: Severity,
    pub path: DocPath,
    pub message: String,
}

impl Diagnostic {
    fn new(code: Code, path: DocPath, message: impl Into<String>) -> Self {
        Diagnostic {
            code,
            severity: code.severity(),
            path,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    /// `CODE<TAB>severity<TAB>path<TAB>message`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}\t{}", self.code, self.severity, self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    /// Sorted by code, then path.
    pub diagnostics: Vec<Diagnostic>,
    /// No diagnostic has error severity.
    pub valid: bool,
}

impl ValidationReport {
    fn from_diagnostics(mut diagnostics: Vec<Diagnostic>) -> Self {
        diagnostics.sort();
        diagnostics.dedup();
        let valid = diagnostics.iter().all(|d| d.severity != Severity::Error);
        ValidationReport { diagnostics, valid }
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Warning)
    }

    pub fn has_code(&self, code: Code) -> bool {
        self.diagnostics.iter().any(|d| d.code == code)
    }
}

pub fn validate(s: &Storyform) -> ValidationReport {
    let mut out = structural_diagnostics(s);
    let blocked = !out.is_empty();
    check_dynamics(s, &mut out);
    check_completeness(s, &mut out);
    if let Some(beats) = &s.beats {
        check_beats(s, beats, &mut out);
        if !blocked {
            check_staleness(s, beats, &mut out);
        }
    }
    ValidationReport::from_diagnostics(out)
}

/// Findings that make a storyform impossible to sequence.
pub(crate) fn structural_diagnostics(s: &Storyform) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    check_assignment(s, &mut out);
    for (p, root) in &s.storypoints {
        check_node(root, 0, &DocPath::from_keys(["storypoints", p.as_str()]), &mut out);
    }
    out
}

fn perspective_path(p: Perspective) -> DocPath {
    DocPath::from_keys(["perspectives", p.as_str()])
}

fn check_assignment(s: &Storyform, out: &mut Vec<Diagnostic>) {
    use Perspective::*;
    let a = &s.assignment;
    for &p in Perspective::ALL {
        match a.form(p) {
            None => out.push(Diagnostic::new(
                Code::Ncp001,
                perspective_path(p),
                format!("{} has no conflict form", p.label()),
            )),
            Some(form) => {
                let others: Vec<&str> = a
                    .iter()
                    .filter(|(q, f)| *q != p && *f == form)
                    .map(|(q, _)| q.label())
                    .collect();
                if !others.is_empty() {
                    out.push(Diagnostic::new(
                        Code::Ncp001,
                        perspective_path(p),
                        format!("{} is also assigned to {}", form.label(), others.join(", ")),
                    ));
                }
            }
        }
    }
    let mut opposite = |code, anchor: Perspective, other: Perspective| {
        if let (Some(fa), Some(fo)) = (a.form(anchor), a.form(other)) {
            let expected = fa.diagonal_counterpart();
            if fo != expected {
                out.push(Diagnostic::new(
                    code,
                    perspective_path(other),
                    format!(
                        "{} must sit opposite the {} ({}): expected {}, found {}",
                        other.label(),
                        anchor.label(),
                        fa.label(),
                        expected.label(),
                        fo.label()
                    ),
                ));
            }
        }
    };
    opposite(Code::Ncp002, MainCharacter, CatalystProvocateur);
    opposite(Code::Ncp003, ObjectiveStory, RelationshipStory);
}

fn check_node(node: &StorypointNode, depth: usize, path: &DocPath, out: &mut Vec<Diagnostic>) {
    if node.term.trim().is_empty() {
        out.push(Diagnostic::new(
            Code::Ncp030,
            path.key("term"),
            "storypoint term is empty",
        ));
    }
    if let Some(q) = &node.quad {
        if depth >= 2 {
            out.push(Diagnostic::new(
                Code::Ncp030,
                path.clone(),
                "quads may be nested at most two levels below a perspective",
            ));
        }
        for (pos, child) in q.iter() {
            check_node(child, depth + 1, &path.key(pos.as_str()), out);
        }
    }
}

fn check_dynamics(s: &Storyform, out: &mut Vec<Diagnostic>) {
    let d = &s.dynamics;
    let path = DocPath::from_keys(["dynamics", "attunement"]);
    if d.requires_centered() && d.attunement.as_deref() != Some(CENTERED) {
        let found = d
            .attunement
            .as_deref()
            .map_or_else(|| "none".to_owned(), |a| format!("\"{a}\""));
        out.push(Diagnostic::new(
            Code::Ncp010,
            path.clone(),
            format!("serotonin alignment with success and good requires attunement \"{CENTERED}\", found {found}"),
        ));
    }
    if d.alignment == Alignment::Dopamine && d.attunement.is_some() {
        out.push(Diagnostic::new(
            Code::Ncp011,
            path,
            "attunement only applies under serotonin alignment",
        ));
    }
}

fn check_completeness(s: &Storyform, out: &mut Vec<Diagnostic>) {
    for &p in Perspective::ALL {
        let path = DocPath::from_keys(["storypoints", p.as_str()]);
        match s.storypoints.get(&p) {
            None => out.push(Diagnostic::new(
                Code::Ncp040,
                path,
                format!("{} has no storypoint tree", p.label()),
            )),
            Some(root) if root.quad.is_none() => out.push(Diagnostic::new(
                Code::Ncp040,
                path,
                format!("{} has no signposts", p.label()),
            )),
            Some(_) => {}
        }
    }
}

fn check_beats(s: &Storyform, beats: &[crate::model::Storybeat], out: &mut Vec<Diagnostic>) {
    let base = DocPath::from_keys(["storybeats"]);
    let n = beats.len() as u64;
    let mut seen = BTreeSet::new();
    for (i, beat) in beats.iter().enumerate() {
        let at = base.index(i);
        if !s.resolves(&beat.path) {
            out.push(Diagnostic::new(
                Code::Ncp020,
                at.key("path"),
                format!("{} does not resolve", beat.path),
            ));
        }
        if beat.index >= n {
            out.push(Diagnostic::new(
                Code::Ncp021,
                at.key("index"),
                format!("index {} is outside 0..{n}", beat.index),
            ));
        } else if !seen.insert(beat.index) {
            out.push(Diagnostic::new(
                Code::Ncp021,
                at.key("index"),
                format!("index {} is repeated", beat.index),
            ));
        }
        let is_resolution = beat.phase == crate::model::Phase::Resolution;
        match (is_resolution, beat.resolution_kind) {
            (false, Some(k)) => out.push(Diagnostic::new(
                Code::Ncp022,
                at.key("resolution_kind"),
                format!("resolution kind {k} on a {} beat", beat.phase),
            )),
            (true, None) => out.push(Diagnostic::new(
                Code::Ncp022,
                at.key("resolution_kind"),
                "resolution beat has no resolution kind",
            )),
            _ => {}
        }
    }
}

fn check_staleness(s: &Storyform, beats: &[crate::model::Storybeat], out: &mut Vec<Diagnostic>) {
    let Ok(expected) = justification::justify(s) else {
        return;
    };
    let same = expected.len() == beats.len() && expected.iter().zip(beats).all(|(e, b)| e.same_structure(b));
    if !same {
        out.push(Diagnostic::new(
            Code::Ncp023,
            DocPath::from_keys(["storybeats"]),
            format!(
                "storybeats do not match the justified sequence ({} stored, {} expected)",
                beats.len(),
                expected.len()
            ),
        ));
    }
}
