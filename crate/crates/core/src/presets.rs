//! Ready-made storyforms for common genre configurations.
//!
//! Each preset is shipped as a canonical document under `presets/` and can
//! also be rebuilt in code; the two are kept byte-identical by tests.

use std::fmt;
use std::str::FromStr;

use crate::justification::justify;
use crate::model::{
    Alignment, ConflictForm, Dynamics, Judgment, Outcome, Perspective, PerspectiveAssignment, Quad, Resolve, Storyform,
    StorypointNode, CENTERED,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// Objective story in external processing, main character in external
    /// framing; relinquished, success, good, dopamine.
    ActionDrama,
    /// Objective story in internal framing, main character in internal
    /// processing.
    CourtroomInternal,
    /// Objective story in internal framing, main character in external
    /// processing.
    CourtroomExternal,
    /// The action drama layout under serotonin alignment with a centered
    /// attunement.
    MatrixAttuned,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown preset `{0}` (expected one of: action-drama, courtroom-internal, courtroom-external, matrix-attuned)")]
pub struct UnknownPreset(pub String);

impl Preset {
    pub const ALL: &'static [Preset] = &[
        Preset::ActionDrama,
        Preset::CourtroomInternal,
        Preset::CourtroomExternal,
        Preset::MatrixAttuned,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            Preset::ActionDrama => "action-drama",
            Preset::CourtroomInternal => "courtroom-internal",
            Preset::CourtroomExternal => "courtroom-external",
            Preset::MatrixAttuned => "matrix-attuned",
        }
    }

    pub const fn file_name(self) -> &'static str {
        match self {
            Preset::ActionDrama => "action_drama.ncp.json",
            Preset::CourtroomInternal => "courtroom_internal.ncp.json",
            Preset::CourtroomExternal => "courtroom_external.ncp.json",
            Preset::MatrixAttuned => "matrix_attuned.ncp.json",
        }
    }

    /// The shipped canonical document.
    pub const fn document(self) -> &'static str {
        match self {
            Preset::ActionDrama => include_str!("../presets/action_drama.ncp.json"),
            Preset::CourtroomInternal => include_str!("../presets/courtroom_internal.ncp.json"),
            Preset::CourtroomExternal => include_str!("../presets/courtroom_external.ncp.json"),
            Preset::MatrixAttuned => include_str!("../presets/matrix_attuned.ncp.json"),
        }
    }

    /// Builds the preset from scratch, beats included.
    pub fn build(self) -> Storyform {
        use ConflictForm::*;
        let mut s = match self {
            Preset::ActionDrama | Preset::MatrixAttuned => {
                let assignment = PerspectiveAssignment::from_forms(
                    ExternalProcessing,
                    ExternalFraming,
                    InternalFraming,
                    InternalProcessing,
                );
                let (title, dynamics, hero) = if self == Preset::ActionDrama {
                    (
                        "Action Drama",
                        Dynamics::new(
                            Resolve::Relinquished,
                            Outcome::Success,
                            Judgment::Good,
                            Alignment::Dopamine,
                        ),
                        "Luke the farm boy",
                    )
                } else {
                    (
                        "Action Drama (Serotonin)",
                        Dynamics::new(
                            Resolve::Relinquished,
                            Outcome::Success,
                            Judgment::Good,
                            Alignment::Serotonin,
                        )
                        .with_attunement(CENTERED),
                        "Neo the one",
                    )
                };
                let mut s = Storyform::new(title, dynamics, assignment);
                plant(
                    &mut s,
                    Perspective::ObjectiveStory,
                    root("the battle for the crown", ExternalProcessing),
                );
                plant(
                    &mut s,
                    Perspective::MainCharacter,
                    root("the heir apparent", ExternalFraming).with_storytelling(hero),
                );
                plant(
                    &mut s,
                    Perspective::CatalystProvocateur,
                    root("a mentor", InternalFraming),
                );
                plant(
                    &mut s,
                    Perspective::RelationshipStory,
                    root("father/son dynamic", InternalProcessing),
                );
                s.annotations.insert(
                    "dynamics.resolve".into(),
                    "relinquishing familiar methods is what wins the day".into(),
                );
                s
            }
            Preset::CourtroomInternal | Preset::CourtroomExternal => {
                let internal = self == Preset::CourtroomInternal;
                let (mc, cp) = if internal {
                    (InternalProcessing, ExternalProcessing)
                } else {
                    (ExternalProcessing, InternalProcessing)
                };
                let assignment = PerspectiveAssignment::from_forms(InternalFraming, mc, cp, ExternalFraming);
                let dynamics = Dynamics::new(
                    Resolve::Maintained,
                    Outcome::Success,
                    Judgment::Good,
                    Alignment::Dopamine,
                );
                let title = if internal {
                    "Courtroom Drama (Internal Processing)"
                } else {
                    "Courtroom Drama (External Processing)"
                };
                let mut s = Storyform::new(title, dynamics, assignment);
                plant(
                    &mut s,
                    Perspective::ObjectiveStory,
                    root("the innocence or guilt of a culprit", InternalFraming),
                );
                let mc_term = if internal {
                    "manipulating those who stand in the way"
                } else {
                    "learning the real facts of the case"
                };
                plant(&mut s, Perspective::MainCharacter, root(mc_term, mc));
                plant(
                    &mut s,
                    Perspective::CatalystProvocateur,
                    root("the opposing view of the case", cp),
                );
                plant(
                    &mut s,
                    Perspective::RelationshipStory,
                    root("the bond under cross-examination", ExternalFraming),
                );
                s
            }
        };
        s.beats = Some(justify(&s).expect("presets are structurally sound"));
        s
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = UnknownPreset;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| UnknownPreset(s.to_owned()))
    }
}

fn plant(s: &mut Storyform, p: Perspective, node: StorypointNode) {
    s.storypoints.insert(p, node);
}

/// A perspective root whose four signposts are typical conflict sources of
/// its form.
fn root(term: &str, form: ConflictForm) -> StorypointNode {
    let [a, b, c, d] = signpost_terms(form);
    let leaf = StorypointNode::leaf;
    StorypointNode::leaf(term).with_quad(Quad::new(leaf(a), leaf(b), leaf(c), leaf(d)))
}

fn signpost_terms(form: ConflictForm) -> [&'static str; 4] {
    match form {
        ConflictForm::ExternalFraming => ["societal rules", "status", "finances", "fixed limitations"],
        ConflictForm::ExternalProcessing => ["actions", "events", "visible changes", "physical challenges"],
        ConflictForm::InternalProcessing => [
            "psychological dysfunction",
            "identity struggles",
            "manipulative schemes",
            "distorted ways of thinking",
        ],
        ConflictForm::InternalFraming => [
            "fixed beliefs",
            "mindsets",
            "deep-seated psychological states",
            "pre-existing ideas",
        ],
    }
}
