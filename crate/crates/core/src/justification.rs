//! Justification: turning dynamics and storypoints into a storybeat
//! sequence, and recompiling a storyform after a deviation.
//!
//! The sequencer is deterministic. Each dynamic has a visible effect:
//!
//! * alignment picks the interleaving of perspectives: dopamine runs
//!   `os, mc, cp, rs`, serotonin runs `rs, cp, mc, os`;
//! * within a perspective, signposts are visited `tl, tr, bl, br`, reversed
//!   for the main character and catalyst provocateur when resolve is
//!   relinquished, for the objective story on failure and for the
//!   relationship story when judgment is bad;
//! * act `k` takes the `k`-th signpost of every perspective, and a
//!   signpost with its own quad is followed at once by its four sub-beats in
//!   the same direction;
//! * acts one to three are challenge, reinforcement and escalation; act four
//!   is crisis, except the very last beat, which is the resolution and
//!   carries the resolution kind.

use std::collections::BTreeSet;
use std::str::FromStr;

use crate::model::enumerate_valid_assignments;
use crate::model::{
    Alignment, ConflictForm, Extensions, Judgment, Outcome, Perspective, PerspectiveAssignment, Phase, QuadPosition,
    ResolutionKind, Resolve, Storybeat, Storyform, StorypointPath, CENTERED,
};
use crate::path::{DocPath, Segment};
use crate::validator::{structural_diagnostics, Diagnostic};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JustifyError {
    #[error("storyform cannot be sequenced: {}", summarize(.0))]
    Structure(Vec<Diagnostic>),
}

fn summarize(diagnostics: &[Diagnostic]) -> String {
    let parts: Vec<String> = diagnostics
        .iter()
        .map(|d| format!("{} at {}", d.code, d.path))
        .collect();
    parts.join(", ")
}

const ACT_PHASES: [Phase; 4] = [
    Phase::ChallengeIntroduced,
    Phase::Reinforcement,
    Phase::Escalation,
    Phase::Crisis,
];

pub fn perspective_order(alignment: Alignment) -> [Perspective; 4] {
    use Perspective::*;
    match alignment {
        Alignment::Dopamine => [ObjectiveStory, MainCharacter, CatalystProvocateur, RelationshipStory],
        Alignment::Serotonin => [RelationshipStory, CatalystProvocateur, MainCharacter, ObjectiveStory],
    }
}

/// Order in which `p` visits quad positions under `s`'s dynamics.
pub fn traversal(s: &Storyform, p: Perspective) -> [QuadPosition; 4] {
    let d = &s.dynamics;
    let reversed = match p {
        Perspective::MainCharacter | Perspective::CatalystProvocateur => d.resolve == Resolve::Relinquished,
        Perspective::ObjectiveStory => d.outcome == Outcome::Failure,
        Perspective::RelationshipStory => d.judgment == Judgment::Bad,
    };
    let mut order = [
        QuadPosition::TopLeft,
        QuadPosition::TopRight,
        QuadPosition::BottomLeft,
        QuadPosition::BottomRight,
    ];
    if reversed {
        order.reverse();
    }
    order
}

pub fn resolution_kind(s: &Storyform) -> ResolutionKind {
    match (s.dynamics.resolve, s.dynamics.alignment) {
        (Resolve::Maintained, _) => ResolutionKind::Holds,
        (Resolve::Relinquished, Alignment::Serotonin) => ResolutionKind::Released,
        (Resolve::Relinquished, Alignment::Dopamine) => ResolutionKind::Relinquished,
    }
}

/// The storybeat sequence for `s`. Any beats already on `s` are ignored.
///
/// Perspectives without a tree, or whose root has no quad, contribute no
/// beats.
pub fn justify(s: &Storyform) -> Result<Vec<Storybeat>, JustifyError> {
    let blocking = structural_diagnostics(s);
    if !blocking.is_empty() {
        let mut blocking = blocking;
        blocking.sort();
        return Err(JustifyError::Structure(blocking));
    }

    let order = perspective_order(s.dynamics.alignment);
    let traversals: Vec<_> = order.iter().map(|p| (*p, traversal(s, *p))).collect();
    let mut beats = Vec::new();
    for (act, phase) in ACT_PHASES.iter().enumerate() {
        for (p, dir) in &traversals {
            let Some(root) = s.storypoints.get(p) else { continue };
            let Some(signpost) = root.child(dir[act]) else { continue };
            beats.push(beat(beats.len(), *p, vec![dir[act]], *phase));
            if signpost.quad.is_some() {
                for sub in dir {
                    beats.push(beat(beats.len(), *p, vec![dir[act], *sub], *phase));
                }
            }
        }
    }
    if let Some(last) = beats.last_mut() {
        last.phase = Phase::Resolution;
        last.resolution_kind = Some(resolution_kind(s));
    }
    Ok(beats)
}

fn beat(index: usize, p: Perspective, positions: Vec<QuadPosition>, phase: Phase) -> Storybeat {
    Storybeat {
        index: index as u64,
        path: StorypointPath::new(p, positions),
        phase,
        resolution_kind: None,
        storytelling: None,
        extensions: Extensions::new(),
    }
}

/// Structural changes applied before recompiling. Values use document
/// keywords (`relinquished`, `internal_framing`) or plain term text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Deviation {
    pub changes: Vec<(DocPath, String)>,
}

impl Deviation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(mut self, path: DocPath, value: impl Into<String>) -> Self {
        self.changes.push((path, value.into()));
        self
    }

    /// Parses `PATH=VALUE`, splitting at the first `=`.
    pub fn parse_change(text: &str) -> Result<(DocPath, String), RecompileError> {
        let (path, value) = text.split_once('=').ok_or_else(|| RecompileError::Path {
            path: text.to_owned(),
            reason: "expected PATH=VALUE".to_owned(),
        })?;
        let path = path.parse::<DocPath>().map_err(|e| RecompileError::Path {
            path: path.to_owned(),
            reason: e.reason.to_owned(),
        })?;
        Ok((path, value.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecompileError {
    #[error("cannot apply deviation at `{path}`: {reason}")]
    Path { path: String, reason: String },
    #[error("invalid value for `{path}`: {reason}")]
    Value { path: String, reason: String },
    #[error("cut index {cut} is outside 0..={len}")]
    Index { cut: usize, len: usize },
    #[error("storyform has no storybeats to recompile")]
    NoBeats,
    #[error(transparent)]
    Justify(#[from] JustifyError),
}

/// Valid assignment closest to `a`: fewest perspectives changed, ties
/// going to the earliest in [`enumerate_valid_assignments`] order.
pub fn repair_assignment(a: &PerspectiveAssignment) -> PerspectiveAssignment {
    if a.is_valid() {
        return a.clone();
    }
    enumerate_valid_assignments()
        .into_iter()
        .min_by_key(|candidate| candidate.distance(a))
        .expect("there are always valid assignments")
}

/// Applies `deviation` to `s`, repairs the result into a valid
/// configuration and regenerates the beats after `cut_index`.
///
/// Beats before `cut_index` are kept as they are. The regenerated suffix
/// drops every storypoint already covered by the kept beats and is
/// renumbered from `cut_index`.
pub fn recompile(s: &Storyform, cut_index: usize, deviation: &Deviation) -> Result<Storyform, RecompileError> {
    let beats = s.beats.as_ref().ok_or(RecompileError::NoBeats)?;
    if cut_index > beats.len() {
        return Err(RecompileError::Index {
            cut: cut_index,
            len: beats.len(),
        });
    }

    let mut next = s.clone();
    for (path, value) in &deviation.changes {
        apply_change(&mut next, path, value)?;
    }
    next.assignment = repair_assignment(&next.assignment);
    if next.dynamics.requires_centered() && next.dynamics.attunement.as_deref() != Some(CENTERED) {
        next.dynamics.attunement = Some(CENTERED.to_owned());
    }

    next.beats = None;
    let regenerated = justify(&next)?;
    let prefix = &beats[..cut_index];
    let experienced: BTreeSet<&StorypointPath> = prefix.iter().map(|b| &b.path).collect();
    let mut out: Vec<Storybeat> = prefix.to_vec();
    for mut b in regenerated.into_iter().filter(|b| !experienced.contains(&b.path)) {
        b.index = out.len() as u64;
        out.push(b);
    }
    next.beats = Some(out);
    Ok(next)
}

fn apply_change(s: &mut Storyform, path: &DocPath, value: &str) -> Result<(), RecompileError> {
    let path_err = |reason: &str| RecompileError::Path {
        path: path.to_string(),
        reason: reason.to_owned(),
    };
    let value_err = |reason: String| RecompileError::Value {
        path: path.to_string(),
        reason,
    };
    fn keyword<T: FromStr>(value: &str) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        value.parse().map_err(|e: T::Err| e.to_string())
    }

    let keys: Option<Vec<&str>> = path
        .segments()
        .iter()
        .map(|seg| match seg {
            Segment::Key(k) => Some(k.as_str()),
            Segment::Index(_) => None,
        })
        .collect();
    let keys = keys.ok_or_else(|| path_err("storybeats cannot be changed by a deviation"))?;

    match keys.as_slice() {
        ["dynamics", field] => {
            let d = &mut s.dynamics;
            match *field {
                "resolve" => d.resolve = keyword::<Resolve>(value).map_err(value_err)?,
                "outcome" => d.outcome = keyword::<Outcome>(value).map_err(value_err)?,
                "judgment" => d.judgment = keyword::<Judgment>(value).map_err(value_err)?,
                "alignment" => d.alignment = keyword::<Alignment>(value).map_err(value_err)?,
                "attunement" => d.attunement = (!value.is_empty()).then(|| value.to_owned()),
                _ => return Err(path_err("not a dynamic")),
            }
        }
        ["perspectives", p] => {
            let p: Perspective = p
                .parse()
                .map_err(|e: crate::model::UnknownKeyword| path_err(&e.to_string()))?;
            let form = keyword::<ConflictForm>(value).map_err(value_err)?;
            s.assignment.set(p, form);
        }
        ["storypoints", p, rest @ .., "term"] => {
            let p: Perspective = p
                .parse()
                .map_err(|e: crate::model::UnknownKeyword| path_err(&e.to_string()))?;
            let positions = rest
                .iter()
                .map(|k| k.parse::<QuadPosition>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| path_err(&e.to_string()))?;
            if value.trim().is_empty() {
                return Err(value_err("storypoint terms cannot be empty".to_owned()));
            }
            let node = s
                .storypoints
                .get_mut(&p)
                .and_then(|root| root.descend_mut(&positions))
                .ok_or_else(|| path_err("no storypoint at this path"))?;
            node.term = value.to_owned();
        }
        _ => {
            return Err(path_err(
                "deviations may only change dynamics, perspective forms or storypoint terms",
            ))
        }
    }
    Ok(())
}
