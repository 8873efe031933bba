//! KB validation: every invariant checked, every violation reported.

use super::load::Violation;
use super::types::*;
use crate::timeline::MechanismFamily;
use std::collections::BTreeMap;

/// Checks every KB invariant and returns the complete violation list.
/// An empty list means the KB is valid. Idempotent.
pub fn validate_kb(kb: &KnowledgeBase) -> Vec<Violation> {
    let mut v = Vec::new();

    if kb.mechanisms.is_empty() {
        v.push(Violation::new("no-mechanisms", "mechanisms.json", "no mechanisms defined"));
    }

    check_cross_collection_ids(kb, &mut v);

    for mech in kb.mechanisms.values() {
        check_mechanism(kb, mech, &mut v);
    }
    for attack in kb.attacks.values() {
        check_attack(kb, attack, &mut v);
    }
    for cert in kb.certificates.values() {
        check_suite(kb, &cert.id, "certificates.json", &cert.suite, &mut v);
        if cert.suite.is_empty() && cert.stage_attributes.is_none() {
            v.push(Violation::new(
                "empty-suite",
                format!("certificates.json:{}", cert.id),
                "classical certificate profile must list a crypto suite",
            ));
        }
    }
    for proto in kb.protocols.values() {
        check_suite(kb, &proto.id, "protocols.json", &proto.suite, &mut v);
    }
    for comb in kb.combiners.values() {
        if !combiner_pairing_allowed(comb.kind, comb.applies_to) {
            v.push(Violation::new(
                "combiner-pairing",
                format!("combiners.json:{}", comb.id),
                format!(
                    "combiner kind {:?} is not defined for {} constructions",
                    comb.kind, comb.applies_to
                ),
            ));
        }
    }
    for (i, ov) in kb.overrides.iter().enumerate() {
        check_override(kb, i, ov, &mut v);
    }
    check_poll(kb, &mut v);

    v
}

fn check_cross_collection_ids(kb: &KnowledgeBase, v: &mut Vec<Violation>) {
    let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
    let collections: [(&str, Vec<&str>); 5] = [
        ("mechanisms.json", kb.mechanisms.keys().map(String::as_str).collect()),
        ("attacks.json", kb.attacks.keys().map(String::as_str).collect()),
        ("certificates.json", kb.certificates.keys().map(String::as_str).collect()),
        ("protocols.json", kb.protocols.keys().map(String::as_str).collect()),
        ("combiners.json", kb.combiners.keys().map(String::as_str).collect()),
    ];
    for (doc, ids) in collections {
        for id in ids {
            if let Some(other) = seen.insert(id, doc) {
                v.push(Violation::new(
                    "duplicate-id",
                    format!("{doc}:{id}"),
                    format!("id {id:?} already defined in {other}"),
                ));
            }
        }
    }
}

fn check_mechanism(kb: &KnowledgeBase, mech: &MechanismRecord, v: &mut Vec<Violation>) {
    let loc = format!("mechanisms.json:{}", mech.id);
    let p = &mech.profile;
    if p.parameter_bits == 0 && p.family != MechanismFamily::AsymmetricShorBreakable {
        v.push(Violation::new(
            "invalid-profile",
            loc.clone(),
            "parameter_bits must be positive for this family",
        ));
    }
    if matches!(
        p.family,
        MechanismFamily::SymmetricCipher | MechanismFamily::KeyedMac | MechanismFamily::UnkeyedHash
    ) && p.classic_strength_bits > p.parameter_bits
    {
        v.push(Violation::new(
            "invalid-profile",
            loc.clone(),
            format!(
                "classic_strength_bits {} exceeds parameter_bits {}",
                p.classic_strength_bits, p.parameter_bits
            ),
        ));
    }
    if p.family == MechanismFamily::AsymmetricShorBreakable && mech.stride_threats.is_empty() {
        v.push(Violation::new(
            "missing-stride",
            loc.clone(),
            "Shor-breakable mechanisms must list at least one STRIDE threat",
        ));
    }
    if let Some(base) = &mech.variant_of {
        if !kb.mechanisms.contains_key(base) {
            v.push(Violation::new(
                "dangling-reference",
                loc.clone(),
                format!("variant_of {base:?} does not resolve"),
            ));
        }
    }
    for alt in &mech.alternatives {
        if let Alternative::Reference { mechanism } = alt {
            if !kb.mechanisms.contains_key(mechanism) {
                v.push(Violation::new(
                    "dangling-reference",
                    loc.clone(),
                    format!("alternative {mechanism:?} does not resolve"),
                ));
            }
        }
    }
}

fn check_attack(kb: &KnowledgeBase, attack: &AttackRecord, v: &mut Vec<Violation>) {
    let loc = format!("attacks.json:{}", attack.id);
    match kb.mechanisms.get(&attack.target_mechanism) {
        None => v.push(Violation::new(
            "dangling-reference",
            loc.clone(),
            format!("target_mechanism {:?} does not resolve", attack.target_mechanism),
        )),
        Some(target) => {
            if target.profile.family != MechanismFamily::QuantumResistant {
                v.push(Violation::new(
                    "invalid-target",
                    loc.clone(),
                    format!(
                        "attack records target quantum-resistant mechanisms, but {:?} is {}",
                        target.id, target.profile.family
                    ),
                ));
            }
        }
    }
    if attack.countermeasure_available && attack.countermeasures.is_empty() {
        v.push(Violation::new(
            "missing-countermeasures",
            loc.clone(),
            "countermeasure_available is true but the countermeasure list is empty",
        ));
    }
    if attack.likelihood_category().is_none() {
        v.push(Violation::new(
            "uncategorized-attack",
            loc,
            "attribute combination (physical access, known exploit, countermeasured) has no \
             defined likelihood category",
        ));
    }
}

fn check_suite(
    kb: &KnowledgeBase,
    owner: &str,
    doc: &str,
    suite: &[SuiteMember],
    v: &mut Vec<Violation>,
) {
    for member in suite {
        if !kb.mechanisms.contains_key(&member.mechanism) {
            v.push(Violation::new(
                "dangling-reference",
                format!("{doc}:{owner}"),
                format!("suite member {:?} does not resolve to a mechanism", member.mechanism),
            ));
        }
    }
}

fn check_override(kb: &KnowledgeBase, index: usize, ov: &RiskOverride, v: &mut Vec<Violation>) {
    let loc = format!("overrides.json:{} ({})", index, ov.subject);
    if ov.justification.trim().is_empty() {
        v.push(Violation::new("missing-justification", loc.clone(), "justification is mandatory"));
    }
    if ov.likelihood.is_none() && ov.impact.is_none() {
        v.push(Violation::new(
            "empty-override",
            loc.clone(),
            "at least one of likelihood/impact must be set",
        ));
    }
    if matches!(kb.lookup(&ov.subject), LookupResult::NotFound { .. }) {
        v.push(Violation::new(
            "dangling-reference",
            loc,
            format!("override subject {:?} does not resolve", ov.subject),
        ));
    }
}

fn check_poll(kb: &KnowledgeBase, v: &mut Vec<Violation>) {
    if kb.poll.horizons.is_empty() {
        v.push(Violation::new("empty-poll", "poll.json", "at least one horizon is required"));
        return;
    }
    let mut prev_years: Option<u32> = None;
    for horizon in &kb.poll.horizons {
        let loc = format!("poll.json:{}y", horizon.years);
        if let Some(prev) = prev_years {
            if horizon.years <= prev {
                v.push(Violation::new(
                    "poll-order",
                    loc.clone(),
                    format!("horizon years must be strictly increasing (saw {prev} before)"),
                ));
            }
        }
        prev_years = Some(horizon.years);
        if horizon.years == 0 {
            v.push(Violation::new("poll-order", loc.clone(), "horizon years must be positive"));
        }
        let mut sum = 0.0;
        for bin in &horizon.bins {
            if !(0.0..=1.0).contains(&bin.representative) || !(0.0..=1.0).contains(&bin.fraction) {
                v.push(Violation::new(
                    "poll-range",
                    loc.clone(),
                    format!(
                        "bin ({}, {}) outside [0, 1]",
                        bin.representative, bin.fraction
                    ),
                ));
            }
            sum += bin.fraction;
        }
        if (sum - 1.0).abs() > 1e-9 {
            v.push(Violation::new(
                "poll-fractions-sum",
                loc,
                format!("bin fractions sum to {sum}, expected 1.0"),
            ));
        }
    }
}
