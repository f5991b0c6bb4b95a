mod common;

use common::*;
use ncp_core::model::*;
use ncp_core::presets::Preset;
use ncp_core::{canonicalize, codec, export_markdown, justify, validate};

#[test]
fn action_drama_preset_parses_to_a_valid_assignment() {
    let s = codec::parse(Preset::ActionDrama.document()).unwrap();
    assert!(is_valid_assignment(&s.assignment));
    assert_eq!(
        s.assignment.form(Perspective::MainCharacter),
        Some(ConflictForm::ExternalFraming)
    );
    assert_eq!(
        s.assignment.form(Perspective::CatalystProvocateur),
        Some(ConflictForm::InternalFraming)
    );
}

#[test]
fn key_shuffled_presets_canonicalize_to_golden_bytes() {
    let mut rng = rng(11);
    for &p in Preset::ALL {
        let value: serde_json::Value = serde_json::from_str(p.document()).unwrap();
        for _ in 0..5 {
            let scrambled = scrambled_json(&mut rng, &value);
            assert_eq!(canonicalize(&scrambled).unwrap(), p.document(), "{p}");
        }
    }
}

#[test]
fn presets_carry_their_justified_beats() {
    for &p in Preset::ALL {
        let s = codec::parse(p.document()).unwrap();
        let beats = s.beats.clone().unwrap();
        assert_eq!(beats.len(), 16, "{p}");
        assert_eq!(justify(&s).unwrap(), beats);
        assert!(
            validate(&s).diagnostics.is_empty(),
            "{p}: {:?}",
            validate(&s).diagnostics
        );
    }
}

#[test]
fn maintained_preset_resolves_with_holds() {
    let s = codec::parse(Preset::CourtroomInternal.document()).unwrap();
    assert_eq!(s.dynamics.resolve, Resolve::Maintained);
    let last = s.beats.unwrap().pop().unwrap();
    assert_eq!(last.phase, Phase::Resolution);
    assert_eq!(last.resolution_kind, Some(ResolutionKind::Holds));
}

#[test]
fn serotonin_preset_is_released_and_centered() {
    let s = codec::parse(Preset::MatrixAttuned.document()).unwrap();
    assert_eq!(s.dynamics.attunement.as_deref(), Some(CENTERED));
    let last = s.beats.unwrap().pop().unwrap();
    assert_eq!(last.resolution_kind, Some(ResolutionKind::Released));
}

#[test]
fn markdown_outline_of_action_drama() {
    let s = codec::parse(Preset::ActionDrama.document()).unwrap();
    let md = export_markdown(&s);
    assert!(md.lines().any(|l| l == "## Main Character (MC): External Framing"));
    assert!(md.contains("**the battle for the crown**"));
    assert!(md.contains("(Luke the farm boy)"));
    assert!(md.contains("## Storybeats"));
    assert_eq!(md, export_markdown(&s));
}
