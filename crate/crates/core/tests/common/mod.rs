//! Seeded storyform generators and brute-force oracles shared by the
//! integration tests. The oracles work from first principles (grid
//! coordinates, raw permutations, counting) and never call the code paths
//! they check.

#![allow(dead_code)]

use ncp_core::model::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Forms in enumeration order: external framing, external processing,
/// internal processing, internal framing.
pub const FORMS: [ConflictForm; 4] = [
    ConflictForm::ExternalFraming,
    ConflictForm::ExternalProcessing,
    ConflictForm::InternalProcessing,
    ConflictForm::InternalFraming,
];

/// (row, column) of each form in the form-quad, read off the published
/// layout: main character / external framing top left, objective story /
/// external processing top right, relationship story / internal processing
/// bottom left, catalyst provocateur / internal framing bottom right.
fn grid(form: ConflictForm) -> (u8, u8) {
    match form {
        ConflictForm::ExternalFraming => (0, 0),
        ConflictForm::ExternalProcessing => (0, 1),
        ConflictForm::InternalProcessing => (1, 0),
        ConflictForm::InternalFraming => (1, 1),
    }
}

fn diagonal(a: ConflictForm, b: ConflictForm) -> bool {
    let (ra, ca) = grid(a);
    let (rb, cb) = grid(b);
    ra != rb && ca != cb
}

/// Forms as `[os, mc, cp, rs]`.
pub type Bijection = [ConflictForm; 4];

pub fn oracle_valid(b: &Bijection) -> bool {
    let [os, mc, cp, rs] = *b;
    let distinct = (0..4).all(|i| (i + 1..4).all(|j| b[i] != b[j]));
    distinct && diagonal(mc, cp) && diagonal(os, rs)
}

/// All 24 permutations of the four forms.
pub fn all_bijections() -> Vec<Bijection> {
    let mut out = Vec::new();
    for &a in &FORMS {
        for &b in &FORMS {
            for &c in &FORMS {
                for &d in &FORMS {
                    let forms = [a, b, c, d];
                    if (0..4).all(|i| (i + 1..4).all(|j| forms[i] != forms[j])) {
                        out.push(forms);
                    }
                }
            }
        }
    }
    out
}

pub fn to_assignment(b: &Bijection) -> PerspectiveAssignment {
    PerspectiveAssignment::from_forms(b[0], b[1], b[2], b[3])
}

pub fn form_rank(f: ConflictForm) -> usize {
    FORMS.iter().position(|x| *x == f).unwrap()
}

/// Brute-force minimum-change repair: among the oracle-valid bijections,
/// fewest perspectives differing from `deviated`, ties broken by
/// `(rank(os), rank(mc))`.
pub fn oracle_repair(deviated: &[Option<ConflictForm>; 4]) -> Bijection {
    let mut candidates: Vec<(usize, usize, usize, Bijection)> = all_bijections()
        .into_iter()
        .filter(oracle_valid)
        .map(|b| {
            let changed = (0..4).filter(|i| deviated[*i] != Some(b[*i])).count();
            (changed, form_rank(b[0]), form_rank(b[1]), b)
        })
        .collect();
    candidates.sort_by_key(|c| (c.0, c.1, c.2));
    candidates[0].3
}

pub const PERSPECTIVES: [Perspective; 4] = [
    Perspective::ObjectiveStory,
    Perspective::MainCharacter,
    Perspective::CatalystProvocateur,
    Perspective::RelationshipStory,
];

/// Expected beat count: four signposts per perspective that has a quad,
/// plus four per signpost that has its own quad.
pub fn oracle_beat_count(s: &Storyform) -> usize {
    s.storypoints
        .values()
        .filter_map(|root| root.quad.as_ref())
        .map(|q| 4 + 4 * [&q.tl, &q.tr, &q.bl, &q.br].iter().filter(|n| n.quad.is_some()).count())
        .sum()
}

const WORDS: &[&str] = &[
    "the battle for the crown",
    "the heir apparent",
    "a mentor",
    "father/son dynamic",
    "status",
    "finances",
    "identity struggles",
    "fixed beliefs",
    "visible changes",
    "the real facts of the case",
    "Luke the farm boy",
    "Neo the one",
    "Ünïcödé \"quoted\" term",
    "tabs\tand\nnewlines",
];

fn word(rng: &mut TestRng) -> String {
    WORDS.choose(rng).unwrap().to_string()
}

fn distinct_terms(rng: &mut TestRng) -> [String; 4] {
    let mut picks: Vec<&str> = WORDS.to_vec();
    picks.shuffle(rng);
    [0, 1, 2, 3].map(|i| format!("{} #{i}", picks[i]))
}

pub fn leaf(term: impl Into<String>) -> StorypointNode {
    StorypointNode::leaf(term)
}

/// Root with four signposts carrying distinct terms; each signpost is
/// expanded with probability `expand`.
pub fn tree(rng: &mut TestRng, expand: f64) -> StorypointNode {
    let terms = distinct_terms(rng);
    let mut signposts = terms.map(|t| {
        let mut n = leaf(t);
        if rng.gen_bool(0.2) {
            n.storytelling = Some(word(rng));
        }
        n
    });
    for n in signposts.iter_mut() {
        if rng.gen_bool(expand) {
            let sub = distinct_terms(rng).map(leaf);
            let [a, b, c, d] = sub;
            n.quad = Some(Box::new(Quad::new(a, b, c, d)));
        }
    }
    let [a, b, c, d] = signposts;
    leaf(word(rng)).with_quad(Quad::new(a, b, c, d))
}

pub fn random_dynamics(rng: &mut TestRng) -> Dynamics {
    let mut d = Dynamics::new(
        *Resolve::ALL.choose(rng).unwrap(),
        *Outcome::ALL.choose(rng).unwrap(),
        *Judgment::ALL.choose(rng).unwrap(),
        *Alignment::ALL.choose(rng).unwrap(),
    );
    if d.requires_centered() {
        d.attunement = Some(CENTERED.to_owned());
    } else if d.alignment == Alignment::Serotonin && rng.gen_bool(0.5) {
        d.attunement = Some("Adrift".to_owned());
    }
    d
}

/// A structurally sound storyform: valid assignment, four full trees,
/// consistent dynamics, no beats.
pub fn sound_storyform(rng: &mut TestRng, expand: f64) -> Storyform {
    let valid: Vec<Bijection> = all_bijections().into_iter().filter(oracle_valid).collect();
    let b = *valid.choose(rng).unwrap();
    let mut s = Storyform::new(
        format!("story {}", rng.gen::<u16>()),
        random_dynamics(rng),
        to_assignment(&b),
    );
    for p in PERSPECTIVES {
        s.storypoints.insert(p, tree(rng, expand));
    }
    if rng.gen_bool(0.3) {
        s.annotations.insert("storypoints.mc".into(), word(rng));
    }
    s
}

fn random_extension(rng: &mut TestRng) -> Value {
    match rng.gen_range(0..5) {
        0 => Value::Null,
        1 => Value::Bool(rng.gen()),
        2 => Value::from(rng.gen_range(-1000i64..1000)),
        3 => Value::from(word(rng)),
        _ => serde_json::json!({ "nested": [1, {"k": word(rng)}], "empty": {} }),
    }
}

/// Anything the codec accepts, including narratively broken storyforms.
pub fn any_storyform(rng: &mut TestRng) -> Storyform {
    let mut s = sound_storyform(rng, 0.3);
    if rng.gen_bool(0.5) {
        s.beats = Some(ncp_core::justify(&s).unwrap());
    }
    match rng.gen_range(0..8) {
        0 => {
            let b = *all_bijections().choose(rng).unwrap();
            s.assignment = to_assignment(&b);
        }
        1 => {
            s.assignment.remove(*PERSPECTIVES.choose(rng).unwrap());
            s.assignment
                .set(Perspective::MainCharacter, ConflictForm::InternalFraming);
        }
        2 => {
            s.storypoints.remove(PERSPECTIVES.choose(rng).unwrap());
        }
        3 => {
            let root = s.storypoints.get_mut(&Perspective::ObjectiveStory).unwrap();
            root.child_mut(QuadPosition::TopRight).unwrap().term = String::new();
            let deep = tree(rng, 1.0);
            *root.child_mut(QuadPosition::BottomLeft).unwrap() = deep;
        }
        4 => {
            s.beats = Some(Vec::new());
            s.dynamics.attunement = Some("Adrift".into());
        }
        5 => {
            if let Some(beats) = s.beats.as_mut() {
                beats.reverse();
                beats[0].resolution_kind = Some(ResolutionKind::Released);
                beats[0].storytelling = Some(word(rng));
            }
        }
        _ => {}
    }
    if rng.gen_bool(0.3) {
        s.extensions
            .insert(format!("x-{}", rng.gen_range(0..5)), random_extension(rng));
        s.dynamics.extensions.insert("x-tempo".into(), random_extension(rng));
    }
    if rng.gen_bool(0.2) {
        if let Some(root) = s.storypoints.get_mut(&Perspective::CatalystProvocateur) {
            root.extensions.insert("x-color".into(), random_extension(rng));
        }
    }
    if rng.gen_bool(0.2) {
        s.version = "0.1.9".into();
    }
    s
}

/// A random handful of edits, for diff/apply round trips.
pub fn mutate(rng: &mut TestRng, s: &Storyform) -> Storyform {
    let mut out = s.clone();
    for _ in 0..rng.gen_range(1..6) {
        match rng.gen_range(0..10) {
            0 => out.dynamics.resolve = *Resolve::ALL.choose(rng).unwrap(),
            1 => out.dynamics.attunement = if rng.gen() { Some(word(rng)) } else { None },
            2 => {
                out.assignment
                    .set(*PERSPECTIVES.choose(rng).unwrap(), *FORMS.choose(rng).unwrap());
            }
            3 => {
                let p = *PERSPECTIVES.choose(rng).unwrap();
                let pos = *QuadPosition::ALL.choose(rng).unwrap();
                if let Some(n) = out.storypoints.get_mut(&p).and_then(|r| r.child_mut(pos)) {
                    n.term = word(rng);
                }
            }
            4 => {
                out.storypoints.remove(PERSPECTIVES.choose(rng).unwrap());
            }
            5 => {
                let p = *PERSPECTIVES.choose(rng).unwrap();
                let fresh = tree(rng, 0.5);
                out.storypoints.insert(p, fresh);
            }
            6 => {
                if let Some(beats) = out.beats.as_mut() {
                    if !beats.is_empty() && rng.gen() {
                        beats.pop();
                    } else if let Some(b) = beats.first_mut() {
                        b.storytelling = Some(word(rng));
                    }
                } else {
                    out.beats = Some(Vec::new());
                }
            }
            7 => {
                out.annotations
                    .insert(format!("storypoints.{}", PERSPECTIVES.choose(rng).unwrap()), word(rng));
            }
            8 => {
                out.extensions.insert("x-platform".into(), random_extension(rng));
            }
            _ => out.title = word(rng),
        }
    }
    out
}

/// Writes `v` as JSON with shuffled object keys and random inter-token
/// whitespace.
pub fn scrambled_json(rng: &mut TestRng, v: &Value) -> String {
    fn ws(rng: &mut TestRng) -> &'static str {
        ["", " ", "\n", "\t", "  \r\n  "][rng.gen_range(0..5)]
    }
    fn write(rng: &mut TestRng, v: &Value, out: &mut String) {
        out.push_str(ws(rng));
        match v {
            Value::Object(m) => {
                let mut entries: Vec<(&String, &Value)> = m.iter().collect();
                entries.shuffle(rng);
                out.push('{');
                for (i, (k, child)) in entries.into_iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(ws(rng));
                    out.push_str(&serde_json::to_string(k).unwrap());
                    out.push_str(ws(rng));
                    out.push(':');
                    write(rng, child, out);
                }
                out.push_str(ws(rng));
                out.push('}');
            }
            Value::Array(items) => {
                out.push('[');
                for (i, child) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write(rng, child, out);
                }
                out.push_str(ws(rng));
                out.push(']');
            }
            scalar => out.push_str(&serde_json::to_string(scalar).unwrap()),
        }
        out.push_str(ws(rng));
    }
    let mut out = String::new();
    write(rng, v, &mut out);
    out
}
