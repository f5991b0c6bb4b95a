//! Storyform domain types and the quad geometry behind valid perspective
//! configurations.
//!
//! Every type here is a plain value. Nothing is checked at construction
//! time beyond well-formedness of individual fields: a storyform with a
//! broken assignment or missing trees is representable, and the
//! [`validator`](crate::validator) decides whether it is sound.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde_json::Value;

/// Fields a document carried that this version does not know about.
///
/// They are kept verbatim (sorted by key) so that documents extended by
/// downstream platforms survive a parse/serialize cycle.
pub type Extensions = BTreeMap<String, Value>;

/// Error returned when a keyword does not name a variant of a closed
/// enumeration.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {kind} `{value}`")]
pub struct UnknownKeyword {
    pub kind: &'static str,
    pub value: String,
}

macro_rules! keyword_enum {
    (
        $(#[$meta:meta])*
        $name:ident, $kind:literal {
            $($(#[$vmeta:meta])* $variant:ident => $keyword:literal, $label:literal;)+
        }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            $($(#[$vmeta])* $variant,)+
        }

        impl $name {
            /// Every variant, in declaration order.
            pub const ALL: &'static [$name] = &[$($name::$variant,)+];

            /// The lower_snake_case keyword used in documents.
            pub const fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $keyword,)+
                }
            }

            /// Human-readable label.
            pub const fn label(self) -> &'static str {
                match self {
                    $($name::$variant => $label,)+
                }
            }
        }

        impl FromStr for $name {
            type Err = UnknownKeyword;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($keyword => Ok($name::$variant),)+
                    _ => Err(UnknownKeyword { kind: $kind, value: s.to_owned() }),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

keyword_enum! {
    /// One of the four simultaneous viewpoints on a story's central inequity.
    Perspective, "perspective" {
        /// The "They" perspective.
        ObjectiveStory => "os", "Objective Story";
        /// The "I" perspective.
        MainCharacter => "mc", "Main Character";
        /// The "You" perspective.
        CatalystProvocateur => "cp", "Catalyst Provocateur";
        /// The "We" perspective.
        RelationshipStory => "rs", "Relationship Story";
    }
}

keyword_enum! {
    /// The four forms of conflict. Declaration order is the enumeration
    /// order used by [`enumerate_valid_assignments`].
    ConflictForm, "conflict form" {
        /// Static external conflict.
        ExternalFraming => "external_framing", "External Framing";
        /// Dynamic external conflict.
        ExternalProcessing => "external_processing", "External Processing";
        /// Dynamic internal conflict.
        InternalProcessing => "internal_processing", "Internal Processing";
        /// Static internal conflict.
        InternalFraming => "internal_framing", "Internal Framing";
    }
}

keyword_enum! {
    /// A cell of a 2x2 quad.
    QuadPosition, "quad position" {
        TopLeft => "tl", "TL";
        TopRight => "tr", "TR";
        BottomLeft => "bl", "BL";
        BottomRight => "br", "BR";
    }
}

keyword_enum! {
    /// Whether the main character's resolve holds by the end.
    Resolve, "resolve" {
        Maintained => "maintained", "Maintained";
        Relinquished => "relinquished", "Relinquished";
    }
}

keyword_enum! {
    Outcome, "outcome" {
        Success => "success", "Success";
        Failure => "failure", "Failure";
    }
}

keyword_enum! {
    Judgment, "judgment" {
        Good => "good", "Good";
        Bad => "bad", "Bad";
    }
}

keyword_enum! {
    /// Narrative alignment: the global tendency of the story.
    Alignment, "alignment" {
        Dopamine => "dopamine", "Dopamine";
        Serotonin => "serotonin", "Serotonin";
    }
}

keyword_enum! {
    /// Arc phase of a storybeat.
    Phase, "phase" {
        ChallengeIntroduced => "challenge_introduced", "Challenge Introduced";
        Reinforcement => "reinforcement", "Reinforcement";
        Escalation => "escalation", "Escalation";
        Crisis => "crisis", "Crisis";
        Resolution => "resolution", "Resolution";
    }
}

keyword_enum! {
    /// How the final beat resolves the main character's resolve.
    ResolutionKind, "resolution kind" {
        Holds => "holds", "Holds";
        Relinquished => "relinquished", "Relinquished";
        Released => "released", "Released";
    }
}

/// The only attunement value with a fixed meaning.
pub const CENTERED: &str = "Centered";

impl QuadPosition {
    /// The diagonally opposite cell. An involution.
    pub const fn diagonal(self) -> QuadPosition {
        match self {
            QuadPosition::TopLeft => QuadPosition::BottomRight,
            QuadPosition::TopRight => QuadPosition::BottomLeft,
            QuadPosition::BottomLeft => QuadPosition::TopRight,
            QuadPosition::BottomRight => QuadPosition::TopLeft,
        }
    }
}

impl ConflictForm {
    /// Fixed cell of this form in the canonical form-quad: the external
    /// forms on the top row, the internal forms on the bottom row.
    pub const fn home_position(self) -> QuadPosition {
        match self {
            ConflictForm::ExternalFraming => QuadPosition::TopLeft,
            ConflictForm::ExternalProcessing => QuadPosition::TopRight,
            ConflictForm::InternalProcessing => QuadPosition::BottomLeft,
            ConflictForm::InternalFraming => QuadPosition::BottomRight,
        }
    }

    /// The form whose home position is `pos`.
    pub const fn at_position(pos: QuadPosition) -> ConflictForm {
        match pos {
            QuadPosition::TopLeft => ConflictForm::ExternalFraming,
            QuadPosition::TopRight => ConflictForm::ExternalProcessing,
            QuadPosition::BottomLeft => ConflictForm::InternalProcessing,
            QuadPosition::BottomRight => ConflictForm::InternalFraming,
        }
    }

    /// The form diagonally opposite this one in the form-quad.
    pub const fn diagonal_counterpart(self) -> ConflictForm {
        ConflictForm::at_position(self.home_position().diagonal())
    }
}

/// Assignment of conflict forms to perspectives.
///
/// May be partial or non-injective; see [`PerspectiveAssignment::is_valid`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct PerspectiveAssignment {
    forms: BTreeMap<Perspective, ConflictForm>,
}

impl PerspectiveAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Total assignment in `[os, mc, cp, rs]` order.
    pub fn from_forms(os: ConflictForm, mc: ConflictForm, cp: ConflictForm, rs: ConflictForm) -> Self {
        let mut a = Self::new();
        a.set(Perspective::ObjectiveStory, os);
        a.set(Perspective::MainCharacter, mc);
        a.set(Perspective::CatalystProvocateur, cp);
        a.set(Perspective::RelationshipStory, rs);
        a
    }

    pub fn form(&self, p: Perspective) -> Option<ConflictForm> {
        self.forms.get(&p).copied()
    }

    pub fn set(&mut self, p: Perspective, form: ConflictForm) {
        self.forms.insert(p, form);
    }

    pub fn remove(&mut self, p: Perspective) -> Option<ConflictForm> {
        self.forms.remove(&p)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Perspective, ConflictForm)> + '_ {
        self.forms.iter().map(|(p, f)| (*p, *f))
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    pub fn is_total(&self) -> bool {
        Perspective::ALL.iter().all(|p| self.forms.contains_key(p))
    }

    /// Total and injective. With four perspectives and four forms that is a
    /// bijection.
    pub fn is_bijective(&self) -> bool {
        if !self.is_total() {
            return false;
        }
        let mut seen = [false; 4];
        for form in self.forms.values() {
            let slot = &mut seen[*form as usize];
            if *slot {
                return false;
            }
            *slot = true;
        }
        true
    }

    /// Bijective, with MC opposite CP and OS opposite RS.
    pub fn is_valid(&self) -> bool {
        is_valid_assignment(self)
    }

    /// Number of perspectives whose form differs from `other`. A perspective
    /// assigned on one side only counts as a difference.
    pub fn distance(&self, other: &PerspectiveAssignment) -> usize {
        Perspective::ALL
            .iter()
            .filter(|p| self.form(**p) != other.form(**p))
            .count()
    }
}

/// Returns the form at the diagonally opposite home position.
pub fn diagonal_counterpart(form: ConflictForm) -> ConflictForm {
    form.diagonal_counterpart()
}

pub fn is_valid_assignment(a: &PerspectiveAssignment) -> bool {
    use Perspective::*;
    if !a.is_bijective() {
        return false;
    }
    let opposite = |x: Perspective, y: Perspective| match (a.form(x), a.form(y)) {
        (Some(fx), Some(fy)) => fy == fx.diagonal_counterpart(),
        _ => false,
    };
    opposite(MainCharacter, CatalystProvocateur) && opposite(ObjectiveStory, RelationshipStory)
}

/// Every valid assignment, ordered by `(form(OS), form(MC))` under the
/// [`ConflictForm`] declaration order.
///
/// This ordering is relied on for tie-breaking when an assignment is
/// repaired, so it must not change.
pub fn enumerate_valid_assignments() -> Vec<PerspectiveAssignment> {
    let mut out = Vec::with_capacity(8);
    for &os in ConflictForm::ALL {
        for &mc in ConflictForm::ALL {
            let candidate =
                PerspectiveAssignment::from_forms(os, mc, mc.diagonal_counterpart(), os.diagonal_counterpart());
            if candidate.is_valid() {
                out.push(candidate);
            }
        }
    }
    out
}

/// The global authorial-intent switches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dynamics {
    pub resolve: Resolve,
    pub outcome: Outcome,
    pub judgment: Judgment,
    pub alignment: Alignment,
    /// Free-form; only meaningful under serotonin alignment.
    pub attunement: Option<String>,
    pub extensions: Extensions,
}

impl Dynamics {
    pub fn new(resolve: Resolve, outcome: Outcome, judgment: Judgment, alignment: Alignment) -> Self {
        Dynamics {
            resolve,
            outcome,
            judgment,
            alignment,
            attunement: None,
            extensions: Extensions::new(),
        }
    }

    pub fn with_attunement(mut self, attunement: impl Into<String>) -> Self {
        self.attunement = Some(attunement.into());
        self
    }

    /// Serotonin, success and good together pin the attunement to
    /// [`CENTERED`].
    pub fn requires_centered(&self) -> bool {
        self.alignment == Alignment::Serotonin && self.outcome == Outcome::Success && self.judgment == Judgment::Good
    }
}

/// Four child storypoints keyed by quad position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quad {
    pub tl: StorypointNode,
    pub tr: StorypointNode,
    pub bl: StorypointNode,
    pub br: StorypointNode,
}

impl Quad {
    pub fn new(tl: StorypointNode, tr: StorypointNode, bl: StorypointNode, br: StorypointNode) -> Self {
        Quad { tl, tr, bl, br }
    }

    pub fn get(&self, pos: QuadPosition) -> &StorypointNode {
        match pos {
            QuadPosition::TopLeft => &self.tl,
            QuadPosition::TopRight => &self.tr,
            QuadPosition::BottomLeft => &self.bl,
            QuadPosition::BottomRight => &self.br,
        }
    }

    pub fn get_mut(&mut self, pos: QuadPosition) -> &mut StorypointNode {
        match pos {
            QuadPosition::TopLeft => &mut self.tl,
            QuadPosition::TopRight => &mut self.tr,
            QuadPosition::BottomLeft => &mut self.bl,
            QuadPosition::BottomRight => &mut self.br,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (QuadPosition, &StorypointNode)> {
        QuadPosition::ALL.iter().map(move |p| (*p, self.get(*p)))
    }
}

/// A source of conflict, optionally subdivided into a quad.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StorypointNode {
    pub term: String,
    pub storytelling: Option<String>,
    pub quad: Option<Box<Quad>>,
    pub extensions: Extensions,
}

impl StorypointNode {
    pub fn leaf(term: impl Into<String>) -> Self {
        StorypointNode {
            term: term.into(),
            storytelling: None,
            quad: None,
            extensions: Extensions::new(),
        }
    }

    pub fn with_quad(mut self, quad: Quad) -> Self {
        self.quad = Some(Box::new(quad));
        self
    }

    pub fn with_storytelling(mut self, text: impl Into<String>) -> Self {
        self.storytelling = Some(text.into());
        self
    }

    pub fn child(&self, pos: QuadPosition) -> Option<&StorypointNode> {
        self.quad.as_deref().map(|q| q.get(pos))
    }

    pub fn child_mut(&mut self, pos: QuadPosition) -> Option<&mut StorypointNode> {
        self.quad.as_deref_mut().map(|q| q.get_mut(pos))
    }

    /// Follows `positions` down from this node.
    pub fn descend(&self, positions: &[QuadPosition]) -> Option<&StorypointNode> {
        positions.iter().try_fold(self, |node, pos| node.child(*pos))
    }

    pub fn descend_mut(&mut self, positions: &[QuadPosition]) -> Option<&mut StorypointNode> {
        positions.iter().try_fold(self, |node, pos| node.child_mut(*pos))
    }

    /// Number of quad levels below this node.
    pub fn height(&self) -> usize {
        match &self.quad {
            None => 0,
            Some(q) => 1 + q.iter().map(|(_, n)| n.height()).max().unwrap_or(0),
        }
    }
}

/// Address of a storypoint below a perspective's root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StorypointPath {
    pub perspective: Perspective,
    /// One or two positions.
    pub positions: Vec<QuadPosition>,
}

impl StorypointPath {
    pub fn new(perspective: Perspective, positions: Vec<QuadPosition>) -> Self {
        StorypointPath { perspective, positions }
    }

    /// Positions joined with `.`, e.g. `tr.bl`.
    pub fn positions_text(&self) -> String {
        let parts: Vec<&str> = self.positions.iter().map(|p| p.as_str()).collect();
        parts.join(".")
    }

    /// Parses the `tl` / `tr.bl` form used in documents.
    pub fn parse_positions(text: &str) -> Result<Vec<QuadPosition>, UnknownKeyword> {
        text.split('.').map(QuadPosition::from_str).collect()
    }
}

impl fmt::Display for StorypointPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "storypoints.{}.{}", self.perspective, self.positions_text())
    }
}

/// One temporally ordered narrative event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Storybeat {
    pub index: u64,
    pub path: StorypointPath,
    pub phase: Phase,
    pub resolution_kind: Option<ResolutionKind>,
    pub storytelling: Option<String>,
    pub extensions: Extensions,
}

impl Storybeat {
    pub fn perspective(&self) -> Perspective {
        self.path.perspective
    }

    /// Equality on the sequencing fields only; storytelling and extensions
    /// are author content and do not make a beat stale.
    pub fn same_structure(&self, other: &Storybeat) -> bool {
        self.index == other.index
            && self.path == other.path
            && self.phase == other.phase
            && self.resolution_kind == other.resolution_kind
    }
}

/// The document format version this crate reads and writes.
pub const NCP_VERSION: &str = "0.1.0";

/// Root document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Storyform {
    pub version: String,
    pub title: String,
    pub dynamics: Dynamics,
    pub assignment: PerspectiveAssignment,
    pub storypoints: BTreeMap<Perspective, StorypointNode>,
    pub beats: Option<Vec<Storybeat>>,
    /// Storytelling notes keyed by document path text.
    pub annotations: BTreeMap<String, String>,
    pub extensions: Extensions,
}

impl Storyform {
    pub fn new(title: impl Into<String>, dynamics: Dynamics, assignment: PerspectiveAssignment) -> Self {
        Storyform {
            version: NCP_VERSION.to_owned(),
            title: title.into(),
            dynamics,
            assignment,
            storypoints: BTreeMap::new(),
            beats: None,
            annotations: BTreeMap::new(),
            extensions: Extensions::new(),
        }
    }

    pub fn storypoint(&self, path: &StorypointPath) -> Option<&StorypointNode> {
        self.storypoints.get(&path.perspective)?.descend(&path.positions)
    }

    /// True if `path` names an existing node at depth 1 or 2.
    pub fn resolves(&self, path: &StorypointPath) -> bool {
        (1..=2).contains(&path.positions.len()) && self.storypoint(path).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ConflictForm::*;

    #[test]
    fn diagonal_pairs_follow_form_quad() {
        assert_eq!(diagonal_counterpart(ExternalFraming), InternalFraming);
        assert_eq!(diagonal_counterpart(ExternalProcessing), InternalProcessing);
        for &f in ConflictForm::ALL {
            assert_eq!(diagonal_counterpart(diagonal_counterpart(f)), f);
            assert_ne!(diagonal_counterpart(f), f);
        }
        for &p in QuadPosition::ALL {
            assert_eq!(p.diagonal().diagonal(), p);
        }
    }

    #[test]
    fn action_drama_and_courtroom_assignments_are_valid() {
        // [os, mc, cp, rs]
        let action_drama =
            PerspectiveAssignment::from_forms(ExternalProcessing, ExternalFraming, InternalFraming, InternalProcessing);
        assert!(is_valid_assignment(&action_drama));
        let few_good_men =
            PerspectiveAssignment::from_forms(InternalFraming, InternalProcessing, ExternalProcessing, ExternalFraming);
        assert!(is_valid_assignment(&few_good_men));
    }

    #[test]
    fn adjacent_mc_and_cp_is_invalid() {
        let a =
            PerspectiveAssignment::from_forms(InternalProcessing, ExternalFraming, ExternalProcessing, InternalFraming);
        assert!(!is_valid_assignment(&a));
    }

    #[test]
    fn partial_and_duplicate_assignments_are_invalid() {
        let mut a = PerspectiveAssignment::new();
        a.set(Perspective::MainCharacter, ExternalFraming);
        a.set(Perspective::CatalystProvocateur, InternalFraming);
        assert!(!a.is_total());
        assert!(!a.is_valid());

        let dup = PerspectiveAssignment::from_forms(ExternalFraming, ExternalFraming, InternalFraming, InternalFraming);
        assert!(dup.is_total());
        assert!(!dup.is_bijective());
        assert!(!dup.is_valid());
    }

    #[test]
    fn enumeration_is_ordered_by_os_then_mc() {
        let all = enumerate_valid_assignments();
        assert_eq!(all.len(), 8);
        let keys: Vec<_> = all
            .iter()
            .map(|a| {
                (
                    a.form(Perspective::ObjectiveStory).unwrap(),
                    a.form(Perspective::MainCharacter).unwrap(),
                )
            })
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(all.iter().all(is_valid_assignment));
    }

    #[test]
    fn swapping_opposed_perspectives_stays_valid() {
        use Perspective::*;
        for a in enumerate_valid_assignments() {
            let mut swapped = a.clone();
            swapped.set(MainCharacter, a.form(CatalystProvocateur).unwrap());
            swapped.set(CatalystProvocateur, a.form(MainCharacter).unwrap());
            assert!(swapped.is_valid());
            let mut swapped = a.clone();
            swapped.set(ObjectiveStory, a.form(RelationshipStory).unwrap());
            swapped.set(RelationshipStory, a.form(ObjectiveStory).unwrap());
            assert!(swapped.is_valid());
        }
    }

    #[test]
    fn keywords_round_trip() {
        for &p in Phase::ALL {
            assert_eq!(p.as_str().parse::<Phase>().unwrap(), p);
        }
        assert_eq!(
            "challenge_introduced".parse::<Phase>().unwrap(),
            Phase::ChallengeIntroduced
        );
        assert!("Maintained".parse::<Resolve>().is_err());
    }

    #[test]
    fn node_height_counts_quad_levels() {
        let leaf = || StorypointNode::leaf("x");
        let quad = || Quad::new(leaf(), leaf(), leaf(), leaf());
        assert_eq!(leaf().height(), 0);
        assert_eq!(leaf().with_quad(quad()).height(), 1);
        let nested = Quad::new(leaf().with_quad(quad()), leaf(), leaf(), leaf());
        assert_eq!(leaf().with_quad(nested).height(), 2);
    }
}
