//! Randomized property checks for the combination rules, the canonical
//! serialization forms, and the step functions.

use proptest::prelude::*;
use qrisk::engine::{assess_inventory, AssessmentConfig};
use qrisk::inventory::load_inventory;
use qrisk::kb::{load_kb_dir, load_kb_documents, KnowledgeBase, LoadOptions};
use qrisk::report::canonical_json;
use qrisk::risk::{aggregate_findings, combine_hybrid, combine_risk, Level};
use qrisk::timeline::{impact_from_strength, likelihood_level, TimelineConfig};
use std::path::Path;

fn kb() -> KnowledgeBase {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("kb");
    load_kb_dir(&dir, LoadOptions::default()).expect("seeded KB loads cleanly")
}

fn level() -> impl Strategy<Value = Level> {
    prop_oneof![Just(Level::Low), Just(Level::Medium), Just(Level::High)]
}

proptest! {
    #[test]
    fn risk_matrix_is_monotone(a in level(), b in level(), c in level()) {
        if b <= c {
            prop_assert!(combine_risk(a, b) <= combine_risk(a, c));
            prop_assert!(combine_risk(b, a) <= combine_risk(c, a));
        }
    }

    #[test]
    fn risk_matrix_bounded_by_inputs(a in level(), b in level()) {
        let r = combine_risk(a, b);
        prop_assert!(r >= a.min(b));
        prop_assert!(r <= a.max(b));
    }

    #[test]
    fn hybrid_min_algebra(a in level(), b in level(), c in level()) {
        prop_assert_eq!(combine_hybrid(a, b), combine_hybrid(b, a));
        prop_assert_eq!(
            combine_hybrid(combine_hybrid(a, b), c),
            combine_hybrid(a, combine_hybrid(b, c))
        );
        prop_assert_eq!(combine_hybrid(a, a), a);
        prop_assert_eq!(combine_hybrid(a, Level::High), a);
    }

    #[test]
    fn aggregation_is_order_independent(mut levels in proptest::collection::vec(level(), 1..16)) {
        let forward = aggregate_findings(&levels).unwrap();
        levels.reverse();
        prop_assert_eq!(aggregate_findings(&levels).unwrap(), forward);
        levels.sort();
        prop_assert_eq!(aggregate_findings(&levels).unwrap(), forward);
        prop_assert_eq!(forward, *levels.last().unwrap());
    }

    #[test]
    fn likelihood_level_is_a_monotone_step(x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let cfg = TimelineConfig::default();
        if x <= y {
            prop_assert!(likelihood_level(x, &cfg) <= likelihood_level(y, &cfg));
        } else {
            prop_assert!(likelihood_level(x, &cfg) >= likelihood_level(y, &cfg));
        }
    }

    #[test]
    fn impact_is_antitone_in_strength(a in 0u32..4096, b in 0u32..4096) {
        if a <= b {
            prop_assert!(impact_from_strength(a) >= impact_from_strength(b));
        }
    }

    #[test]
    fn level_letters_round_trip(l in level()) {
        let parsed: Level = l.letter().to_string().parse().unwrap();
        prop_assert_eq!(parsed, l);
        let parsed: Level = l.as_str().parse().unwrap();
        prop_assert_eq!(parsed, l);
    }
}

#[test]
fn kb_round_trip_is_a_fixed_point() {
    let kb = kb();
    let docs = kb.to_documents();
    let reloaded = load_kb_documents(&docs, LoadOptions::default()).expect("round-trip loads");
    assert_eq!(reloaded, kb);
    assert_eq!(reloaded.to_documents(), docs);
}

#[test]
fn report_canonical_json_is_a_fixed_point() {
    let kb = kb();
    let inventory = load_inventory(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/sample_inventory.json").as_path(),
        true,
    )
    .expect("sample inventory parses");
    let report = assess_inventory(&inventory, &kb, &AssessmentConfig::default()).unwrap();
    let json = canonical_json(&report);
    let reparsed: qrisk::report::AssessmentReport = serde_json::from_str(&json).unwrap();
    assert_eq!(canonical_json(&reparsed), json);
}
