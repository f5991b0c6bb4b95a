//! Narrative Context Protocol toolkit.
//!
//! A storyform encodes a story's narrative intent as structured data:
//! dynamics (the author's broad intent), storypoints (sources of conflict
//! arranged in nested 2x2 quads, one tree per perspective) and storybeats
//! (the temporal sequence those two produce). This crate reads and writes
//! storyform documents, judges their validity, sequences beats, recompiles
//! after deviations, and diffs and merges storyforms.
//!
//! ```
//! use ncp_core::{codec, presets::Preset, validator};
//!
//! let storyform = codec::parse(Preset::ActionDrama.document()).unwrap();
//! assert!(validator::validate(&storyform).valid);
//! ```

pub mod codec;
pub mod collab;
pub mod justification;
pub mod model;
pub mod path;
pub mod presets;
pub mod validator;

pub use codec::{canonicalize, export_markdown, parse, serialize, CodecError};
pub use collab::{apply, diff, merge3, ChangeSet, MergeResult};
pub use justification::{justify, recompile, Deviation, JustifyError, RecompileError};
pub use model::{
    ConflictForm, Dynamics, Perspective, PerspectiveAssignment, QuadPosition, Storybeat, Storyform, StorypointNode,
    StorypointPath,
};
pub use path::DocPath;
pub use validator::{validate, Code, Diagnostic, Severity, ValidationReport};
