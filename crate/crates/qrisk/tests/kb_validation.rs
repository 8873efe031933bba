//! Loading and validation behavior over the seeded KB and mutated copies.

use qrisk::kb::{load_kb_dir, load_kb_documents, KnowledgeBase, LoadOptions};
use qrisk::risk::MigrationStage;
use qrisk::timeline::MechanismFamily;
use std::collections::BTreeMap;
use std::path::Path;

fn kb() -> KnowledgeBase {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("kb");
    load_kb_dir(&dir, LoadOptions::default()).expect("seeded KB loads cleanly")
}

fn docs() -> BTreeMap<String, String> {
    kb().to_documents()
}

fn violation_codes(docs: &BTreeMap<String, String>) -> Vec<String> {
    match load_kb_documents(docs, LoadOptions::default()) {
        Ok(_) => Vec::new(),
        Err(e) => e.violations.into_iter().map(|v| v.code).collect(),
    }
}

/// Rewrites one document through a JSON transformation.
fn mutate(
    docs: &mut BTreeMap<String, String>,
    name: &str,
    f: impl FnOnce(&mut serde_json::Value),
) {
    let mut value: serde_json::Value = serde_json::from_str(&docs[name]).unwrap();
    f(&mut value);
    docs.insert(name.to_string(), serde_json::to_string_pretty(&value).unwrap());
}

#[test]
fn seeded_kb_meets_the_catalog_floor() {
    let kb = kb();
    let classical = kb
        .mechanisms
        .values()
        .filter(|m| m.profile.family != MechanismFamily::QuantumResistant)
        .count();
    let post_quantum = kb.mechanisms.len() - classical;
    assert!(classical >= 14, "expected at least 14 classical mechanisms, found {classical}");
    assert!(post_quantum >= 8, "expected at least 8 post-quantum mechanisms, found {post_quantum}");
    assert!(kb.protocols.len() >= 16, "expected at least 16 protocols, found {}", kb.protocols.len());
    assert_eq!(kb.overrides.len(), 1, "exactly one seeded override");
    let ov = &kb.overrides[0];
    assert_eq!(ov.subject, "ipsec");
    assert_eq!(ov.stage, MigrationStage::PostMigration);
    assert!(!ov.justification.trim().is_empty());
    assert_eq!(kb.version, "2026.08");
}

#[test]
fn every_poll_horizon_is_normalized() {
    let kb = kb();
    assert_eq!(
        kb.poll.horizons.iter().map(|h| h.years).collect::<Vec<_>>(),
        vec![5, 10, 15, 20, 30]
    );
    for horizon in &kb.poll.horizons {
        let sum: f64 = horizon.bins.iter().map(|b| b.fraction).sum();
        assert!((sum - 1.0).abs() <= 1e-9, "horizon {}y fractions sum to {sum}", horizon.years);
    }
}

#[test]
fn dangling_suite_member_is_rejected() {
    let mut docs = docs();
    mutate(&mut docs, "protocols.json", |v| {
        let suite = v["entries"][0]["suite"].as_array_mut().unwrap();
        suite[0]["mechanism"] = "no_such_mechanism".into();
    });
    assert!(violation_codes(&docs).contains(&"dangling-reference".to_string()));
}

#[test]
fn dangling_attack_target_is_rejected() {
    let mut docs = docs();
    mutate(&mut docs, "attacks.json", |v| {
        v["entries"][0]["target_mechanism"] = "no_such_mechanism".into();
    });
    assert!(violation_codes(&docs).contains(&"dangling-reference".to_string()));
}

#[test]
fn attack_on_classical_mechanism_is_rejected() {
    let mut docs = docs();
    mutate(&mut docs, "attacks.json", |v| {
        v["entries"][0]["target_mechanism"] = "rsa_2048".into();
    });
    assert!(violation_codes(&docs).contains(&"invalid-target".to_string()));
}

#[test]
fn uncategorized_attack_attributes_are_rejected() {
    let mut docs = docs();
    mutate(&mut docs, "attacks.json", |v| {
        let entry = &mut v["entries"][0];
        entry["exploit_vector"] = "physical_access".into();
        entry["known_exploit"] = true.into();
        entry["countermeasure_available"] = true.into();
        entry["countermeasures"] = serde_json::json!(["some countermeasure"]);
    });
    assert!(violation_codes(&docs).contains(&"uncategorized-attack".to_string()));
}

#[test]
fn countermeasure_flag_requires_a_list() {
    let mut docs = docs();
    mutate(&mut docs, "attacks.json", |v| {
        // bike_fault is seeded with countermeasure_available = true
        let entries = v["entries"].as_array_mut().unwrap();
        let entry = entries.iter_mut().find(|e| e["id"] == "bike_fault").unwrap();
        entry["countermeasures"] = serde_json::json!([]);
    });
    assert!(violation_codes(&docs).contains(&"missing-countermeasures".to_string()));
}

#[test]
fn duplicate_ids_across_collections_are_rejected() {
    let mut docs = docs();
    mutate(&mut docs, "protocols.json", |v| {
        v["entries"][0]["id"] = "rsa_2048".into();
    });
    assert!(violation_codes(&docs).contains(&"duplicate-id".to_string()));
}

#[test]
fn disallowed_combiner_pairing_is_rejected() {
    let mut docs = docs();
    mutate(&mut docs, "combiners.json", |v| {
        let entries = v["entries"].as_array_mut().unwrap();
        let entry = entries.iter_mut().find(|e| e["id"] == "weak_nesting").unwrap();
        entry["applies_to"] = "kem_enc".into();
    });
    assert!(violation_codes(&docs).contains(&"combiner-pairing".to_string()));
}

#[test]
fn override_requires_a_justification_and_a_change() {
    let mut docs = docs();
    mutate(&mut docs, "overrides.json", |v| {
        let entry = &mut v["entries"][0];
        entry["justification"] = "  ".into();
        entry.as_object_mut().unwrap().remove("likelihood");
        entry.as_object_mut().unwrap().remove("impact");
    });
    let codes = violation_codes(&docs);
    assert!(codes.contains(&"missing-justification".to_string()));
    assert!(codes.contains(&"empty-override".to_string()));
}

#[test]
fn poll_fraction_drift_is_rejected() {
    let mut docs = docs();
    mutate(&mut docs, "poll.json", |v| {
        v["entries"][0]["bins"][0]["fraction"] = 0.9.into();
    });
    assert!(violation_codes(&docs).contains(&"poll-fractions-sum".to_string()));
}

#[test]
fn unknown_fields_are_strict_by_default_and_lax_on_request() {
    let mut docs = docs();
    mutate(&mut docs, "mechanisms.json", |v| {
        v["entries"][0]["unexpected_field"] = "value".into();
    });
    let codes = violation_codes(&docs);
    assert!(codes.contains(&"unknown-field".to_string()), "strict mode rejects: {codes:?}");
    assert!(load_kb_documents(&docs, LoadOptions { strict: false }).is_ok());
}

#[test]
fn missing_and_unknown_documents_are_reported() {
    let mut docs = docs();
    docs.remove("poll.json");
    docs.insert("extra.json".to_string(), "{}".to_string());
    let codes = violation_codes(&docs);
    assert!(codes.contains(&"missing-document".to_string()));
    assert!(codes.contains(&"unknown-document".to_string()));
}

#[test]
fn version_disagreement_is_reported() {
    let mut docs = docs();
    mutate(&mut docs, "attacks.json", |v| {
        v["version"] = "1999.01".into();
    });
    assert!(violation_codes(&docs).contains(&"version-mismatch".to_string()));
}

#[test]
fn lookup_suggests_near_misses() {
    use qrisk::kb::LookupResult;
    let kb = kb();
    match kb.lookup("tls_1_2") {
        LookupResult::NotFound { suggestions } => {
            assert!(suggestions.contains(&"tls_1_3".to_string()), "got {suggestions:?}");
        }
        LookupResult::Found(_) => panic!("tls_1_2 is not seeded"),
    }
    assert!(matches!(kb.lookup("tls_1_3"), LookupResult::Found(_)));
}

#[test]
fn tls_suite_matches_the_documented_members() {
    let kb = kb();
    let tls = kb.protocols.get("tls_1_3").expect("seeded");
    let members: Vec<&str> = tls.suite.iter().map(|m| m.mechanism.as_str()).collect();
    assert_eq!(members, vec!["rsa_2048", "ecdh", "aes_128", "sha2_256", "chacha20_poly1305"]);
}
