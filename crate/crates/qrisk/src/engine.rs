//! The assessment calculus: stage-specific likelihood/impact derivation,
//! hybrid composition, override application, and inventory orchestration.
//!
//! Pre-migration likelihood is global and timeline-driven; impact follows
//! from the quantum strength of the mechanism (or the worst suite member).
//! Post-migration algorithm findings aggregate per-attack sub-findings;
//! post-migration protocol findings follow the asymmetric-use and
//! countermeasure attributes. Hybrids combine component risks with the
//! minimum rule, except weak nesting which follows its first component.

use crate::inventory::{Asset, AssetKind, HybridSpec, Inventory};
use crate::kb::{
    AttackRecord, CertificateRecord, CombinerRecord, Id, KnowledgeBase, LookupResult,
    MechanismRecord, PostStageAttributes, ProtocolRecord, RecordRef, StrideThreat, SuiteMember,
};
use crate::report::{AssessmentReport, AssetOutcome, DeltaReport};
use crate::risk::{
    aggregate_findings, canonical_stride, combine_hybrid, combine_risk, combine_weak_nesting,
    CombinerKind, Level, MigrationStage, StrideClass,
};
use crate::timeline::{
    expected_likelihood, impact_from_strength, likelihood_level, quantum_strength,
    MechanismFamily, TimelineConfig,
};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Assessment parameters echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentConfig {
    pub horizon_years: u32,
    pub timeline: TimelineConfig,
    pub fail_on_unknown: bool,
}

impl AssessmentConfig {
    pub fn with_horizon(horizon_years: u32) -> Self {
        AssessmentConfig {
            horizon_years,
            timeline: TimelineConfig::with_horizon(horizon_years),
            fail_on_unknown: false,
        }
    }
}

impl Default for AssessmentConfig {
    fn default() -> Self {
        AssessmentConfig::with_horizon(15)
    }
}

/// An assessment error with a machine-readable code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineError {
    pub code: String,
    pub message: String,
}

impl EngineError {
    fn new(code: &str, message: impl Into<String>) -> Self {
        EngineError { code: code.to_string(), message: message.into() }
    }
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for EngineError {}

/// Per-attack sub-finding for a post-migration algorithm assessment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackFinding {
    pub attack: Id,
    pub attack_class: String,
    pub likelihood: Level,
    pub impact: Level,
    pub risk: Level,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub countermeasures: Vec<String>,
}

/// The assessment result for one asset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub asset: Id,
    pub subject: String,
    pub stage: MigrationStage,
    pub likelihood: Level,
    pub impact: Level,
    pub risk: Level,
    pub stride: Vec<StrideClass>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vulnerabilities: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub countermeasures: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alternatives: Vec<String>,
    pub derivation: Vec<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub overridden: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub override_justification: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_attack: Option<Vec<AttackFinding>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_notes: Option<String>,
}

fn stride_classes(threats: &[StrideThreat]) -> Vec<StrideClass> {
    let classes: Vec<StrideClass> = threats.iter().map(|t| t.class).collect();
    canonical_stride(&classes)
}

fn push_unique(list: &mut Vec<String>, item: &str) {
    if !list.iter().any(|x| x == item) {
        list.push(item.to_string());
    }
}

/// Timeline-driven likelihood shared by every pre-migration assessment.
pub fn timeline_likelihood(
    kb: &KnowledgeBase,
    cfg: &AssessmentConfig,
) -> Result<(f64, Level), EngineError> {
    let expected = expected_likelihood(&kb.poll, cfg.horizon_years)
        .map_err(|m| EngineError::new("unknown-horizon", m))?;
    Ok((expected, likelihood_level(expected, &cfg.timeline)))
}

fn strength_rule_note(family: MechanismFamily) -> &'static str {
    match family {
        MechanismFamily::AsymmetricShorBreakable => "Shor's algorithm breaks the key",
        MechanismFamily::SymmetricCipher | MechanismFamily::KeyedMac => {
            "Grover's algorithm halves the key strength"
        }
        MechanismFamily::UnkeyedHash => "quantum collision search thirds the digest strength",
        MechanismFamily::QuantumResistant => "claimed post-quantum strength",
    }
}

/// Assesses a classical mechanism in the pre-migration stage.
pub fn assess_pre_algorithm(
    mech: &MechanismRecord,
    kb: &KnowledgeBase,
    cfg: &AssessmentConfig,
) -> Result<Finding, EngineError> {
    if mech.profile.family == MechanismFamily::QuantumResistant {
        return Err(EngineError::new(
            "stage-mismatch",
            format!(
                "stage/mechanism mismatch: {:?} is quantum-resistant and belongs to the \
                 post-migration stage",
                mech.id
            ),
        ));
    }
    let (expected, likelihood) = timeline_likelihood(kb, cfg)?;
    let qs = quantum_strength(&mech.profile);
    let impact = impact_from_strength(qs);
    let risk = combine_risk(likelihood, impact);
    let derivation = vec![
        format!(
            "expected likelihood within {} years = {:.4} -> likelihood {}",
            cfg.horizon_years, expected, likelihood
        ),
        format!(
            "quantum strength of {} = {} bits ({}) -> impact {}",
            mech.id,
            qs,
            strength_rule_note(mech.profile.family),
            impact
        ),
        format!("risk matrix ({likelihood}, {impact}) -> {risk}"),
    ];
    Ok(Finding {
        asset: mech.id.clone(),
        subject: mech.id.clone(),
        stage: MigrationStage::PreMigration,
        likelihood,
        impact,
        risk,
        stride: stride_classes(&mech.stride_threats),
        vulnerabilities: mech.vulnerabilities.clone(),
        countermeasures: Vec::new(),
        alternatives: mech.alternatives.iter().map(|a| a.to_string()).collect(),
        derivation,
        overridden: false,
        override_justification: None,
        per_attack: None,
        context_notes: None,
    })
}

/// Borrowed view over the suite-bearing fields shared by protocol and
/// certificate records.
struct SuiteSubject<'a> {
    id: &'a str,
    suite: &'a [SuiteMember],
    stride_threats: &'a [StrideThreat],
    alternatives: &'a [String],
    post_attributes: Option<&'a PostStageAttributes>,
}

impl<'a> From<&'a ProtocolRecord> for SuiteSubject<'a> {
    fn from(r: &'a ProtocolRecord) -> Self {
        SuiteSubject {
            id: &r.id,
            suite: &r.suite,
            stride_threats: &r.stride_threats,
            alternatives: &r.alternatives,
            post_attributes: r.post_attributes.as_ref(),
        }
    }
}

impl<'a> From<&'a CertificateRecord> for SuiteSubject<'a> {
    fn from(r: &'a CertificateRecord) -> Self {
        SuiteSubject {
            id: &r.id,
            suite: &r.suite,
            stride_threats: &r.stride_threats,
            alternatives: &r.alternatives,
            post_attributes: r.stage_attributes.as_ref(),
        }
    }
}

fn apply_override(
    finding: &mut Finding,
    kb: &KnowledgeBase,
    subject: &str,
    stage: MigrationStage,
) {
    if let Some(ov) = kb.override_for(subject, stage) {
        if let Some(l) = ov.likelihood {
            finding.likelihood = l;
        }
        if let Some(i) = ov.impact {
            finding.impact = i;
        }
        finding.risk = combine_risk(finding.likelihood, finding.impact);
        finding.overridden = true;
        finding.override_justification = Some(ov.justification.clone());
        finding.derivation.push(format!(
            "override applied -> likelihood {}, impact {}, risk {} ({})",
            finding.likelihood, finding.impact, finding.risk, ov.justification
        ));
    }
}

fn assess_pre_suite_view(
    subject: &SuiteSubject<'_>,
    kb: &KnowledgeBase,
    cfg: &AssessmentConfig,
) -> Result<Finding, EngineError> {
    if subject.suite.is_empty() {
        return Err(EngineError::new(
            "empty-suite",
            format!("{:?} has no crypto suite to assess at the pre-migration stage", subject.id),
        ));
    }
    let (expected, likelihood) = timeline_likelihood(kb, cfg)?;
    let mut derivation = vec![format!(
        "expected likelihood within {} years = {:.4} -> likelihood {}",
        cfg.horizon_years, expected, likelihood
    )];
    let mut impact = Level::Low;
    let mut weakest: Option<(u32, &str)> = None;
    let mut vulnerabilities = Vec::new();
    for member in subject.suite {
        let mech = match kb.mechanisms.get(&member.mechanism) {
            Some(m) => m,
            None if cfg.fail_on_unknown => {
                return Err(EngineError::new(
                    "unknown-subject",
                    format!(
                        "suite member {:?} of {:?} does not resolve",
                        member.mechanism, subject.id
                    ),
                ));
            }
            None => {
                derivation.push(format!(
                    "suite member {} skipped: not in the knowledge base",
                    member.mechanism
                ));
                continue;
            }
        };
        let qs = quantum_strength(&mech.profile);
        let mut member_impact = impact_from_strength(qs);
        let mut note = String::new();
        if member.optional_use && member_impact > Level::Medium {
            member_impact = Level::Medium;
            note = " (optional use, capped at medium)".to_string();
        }
        derivation.push(format!(
            "suite member {}: quantum strength {} bits -> impact {}{}",
            mech.id, qs, member_impact, note
        ));
        if weakest.map_or(true, |(w, _)| qs < w) {
            weakest = Some((qs, &mech.id));
        }
        impact = impact.max(member_impact);
        for v in &mech.vulnerabilities {
            push_unique(&mut vulnerabilities, v);
        }
    }
    if let Some((qs, id)) = weakest {
        derivation.push(format!("minimum suite quantum strength = {qs} bits ({id})"));
    }
    derivation.push(format!("suite impact = worst member impact = {impact}"));
    let risk = combine_risk(likelihood, impact);
    derivation.push(format!("risk matrix ({likelihood}, {impact}) -> {risk}"));
    let mut finding = Finding {
        asset: subject.id.to_string(),
        subject: subject.id.to_string(),
        stage: MigrationStage::PreMigration,
        likelihood,
        impact,
        risk,
        stride: stride_classes(subject.stride_threats),
        vulnerabilities,
        countermeasures: Vec::new(),
        alternatives: subject.alternatives.to_vec(),
        derivation,
        overridden: false,
        override_justification: None,
        per_attack: None,
        context_notes: None,
    };
    apply_override(&mut finding, kb, subject.id, MigrationStage::PreMigration);
    Ok(finding)
}

/// Assesses a protocol or certificate profile in the pre-migration stage.
pub fn assess_pre_protocol(
    record: &ProtocolRecord,
    kb: &KnowledgeBase,
    cfg: &AssessmentConfig,
) -> Result<Finding, EngineError> {
    assess_pre_suite_view(&record.into(), kb, cfg)
}

/// See [`assess_pre_protocol`]; certificates share the suite rule.
pub fn assess_pre_certificate(
    record: &CertificateRecord,
    kb: &KnowledgeBase,
    cfg: &AssessmentConfig,
) -> Result<Finding, EngineError> {
    assess_pre_suite_view(&record.into(), kb, cfg)
}

/// Assesses one recorded attack on a post-quantum mechanism.
pub fn assess_post_attack(attack: &AttackRecord) -> Result<AttackFinding, EngineError> {
    let likelihood = attack.likelihood_category().ok_or_else(|| {
        EngineError::new(
            "uncategorized-attack",
            format!(
                "uncategorized attack attributes on {:?}: ({}, known_exploit={}, \
                 countermeasure_available={})",
                attack.id,
                attack.exploit_vector,
                attack.known_exploit,
                attack.countermeasure_available
            ),
        )
    })?;
    let impact = Level::Medium;
    Ok(AttackFinding {
        attack: attack.id.clone(),
        attack_class: attack.attack_class.to_string(),
        likelihood,
        impact,
        risk: combine_risk(likelihood, impact),
        countermeasures: attack.countermeasures.clone(),
    })
}

/// Assesses a post-quantum mechanism against its recorded attacks.
pub fn assess_post_algorithm(
    target: &MechanismRecord,
    kb: &KnowledgeBase,
    cfg: &AssessmentConfig,
) -> Result<Finding, EngineError> {
    if target.profile.family != MechanismFamily::QuantumResistant {
        return Err(EngineError::new(
            "stage-mismatch",
            format!(
                "stage/mechanism mismatch: {:?} is not quantum-resistant and belongs to the \
                 pre-migration stage",
                target.id
            ),
        ));
    }
    let attacks = kb.attacks_on(&target.id);
    let mut stride: Vec<StrideClass> =
        target.stride_threats.iter().map(|t| t.class).collect();
    if attacks.is_empty() {
        if cfg.fail_on_unknown {
            return Err(EngineError::new(
                "no-recorded-attacks",
                format!("no recorded attacks for {:?}", target.id),
            ));
        }
        return Ok(Finding {
            asset: target.id.clone(),
            subject: target.id.clone(),
            stage: MigrationStage::PostMigration,
            likelihood: Level::Low,
            impact: Level::Low,
            risk: Level::Low,
            stride: canonical_stride(&stride),
            vulnerabilities: Vec::new(),
            countermeasures: Vec::new(),
            alternatives: target.alternatives.iter().map(|a| a.to_string()).collect(),
            derivation: vec![
                "no recorded attacks; risk defaults to low".to_string(),
            ],
            overridden: false,
            override_justification: None,
            per_attack: Some(Vec::new()),
            context_notes: None,
        });
    }
    let mut per_attack = Vec::new();
    let mut derivation = Vec::new();
    let mut vulnerabilities = Vec::new();
    let mut countermeasures = Vec::new();
    for attack in &attacks {
        let sub = assess_post_attack(attack)?;
        derivation.push(format!(
            "attack {} ({}): {}, known_exploit={}, countermeasure_available={} -> \
             likelihood {}, impact {}, risk {}",
            attack.id,
            attack.attack_class,
            attack.exploit_vector,
            attack.known_exploit,
            attack.countermeasure_available,
            sub.likelihood,
            sub.impact,
            sub.risk
        ));
        for t in &attack.stride_threats {
            stride.push(t.class);
        }
        push_unique(&mut vulnerabilities, &attack.attack_class.to_string());
        for c in &attack.countermeasures {
            push_unique(&mut countermeasures, c);
        }
        per_attack.push(sub);
    }
    let risks: Vec<Level> = per_attack.iter().map(|s| s.risk).collect();
    let risk = aggregate_findings(&risks).map_err(|m| EngineError::new("aggregation", m))?;
    // ties broken by attack id order: the first sub-finding at the
    // aggregated risk supplies the headline likelihood and impact
    let worst = per_attack.iter().find(|s| s.risk == risk).expect("nonempty");
    derivation.push(format!(
        "aggregation: worst-case over {} attacks -> risk {} (from {})",
        per_attack.len(),
        risk,
        worst.attack
    ));
    Ok(Finding {
        asset: target.id.clone(),
        subject: target.id.clone(),
        stage: MigrationStage::PostMigration,
        likelihood: worst.likelihood,
        impact: worst.impact,
        risk,
        stride: canonical_stride(&stride),
        vulnerabilities,
        countermeasures,
        alternatives: target.alternatives.iter().map(|a| a.to_string()).collect(),
        derivation,
        overridden: false,
        override_justification: None,
        per_attack: Some(per_attack),
        context_notes: None,
    })
}

fn assess_post_suite_view(
    subject: &SuiteSubject<'_>,
    kb: &KnowledgeBase,
    _cfg: &AssessmentConfig,
) -> Result<Finding, EngineError> {
    let attrs = subject.post_attributes.ok_or_else(|| {
        EngineError::new(
            "missing-post-attributes",
            format!("{:?} has no post-migration profile", subject.id),
        )
    })?;
    let likelihood = if attrs.countermeasures_available
        && attrs.uses_asymmetric
        && !attrs.vulnerability_via_optional_only
    {
        Level::Medium
    } else {
        Level::Low
    };
    let impact = if attrs.uses_asymmetric { Level::Medium } else { Level::Low };
    let risk = combine_risk(likelihood, impact);
    let derivation = vec![
        format!(
            "post-migration profile: uses_asymmetric={}, countermeasures_available={}, \
             vulnerability_via_optional_only={}",
            attrs.uses_asymmetric,
            attrs.countermeasures_available,
            attrs.vulnerability_via_optional_only
        ),
        format!("likelihood {likelihood} (medium only with countermeasures, asymmetric use, and a non-optional exposure)"),
        format!("impact {impact} (medium when asymmetric cryptography is employed)"),
        format!("risk matrix ({likelihood}, {impact}) -> {risk}"),
    ];
    let mut finding = Finding {
        asset: subject.id.to_string(),
        subject: subject.id.to_string(),
        stage: MigrationStage::PostMigration,
        likelihood,
        impact,
        risk,
        stride: stride_classes(subject.stride_threats),
        vulnerabilities: attrs.challenges.clone(),
        countermeasures: attrs.countermeasures.clone(),
        alternatives: subject.alternatives.to_vec(),
        derivation,
        overridden: false,
        override_justification: None,
        per_attack: None,
        context_notes: None,
    };
    apply_override(&mut finding, kb, subject.id, MigrationStage::PostMigration);
    Ok(finding)
}

/// Assesses a protocol's post-migration profile.
pub fn assess_post_protocol(
    record: &ProtocolRecord,
    kb: &KnowledgeBase,
    cfg: &AssessmentConfig,
) -> Result<Finding, EngineError> {
    assess_post_suite_view(&record.into(), kb, cfg)
}

/// See [`assess_post_protocol`]; certificates share the rule.
pub fn assess_post_certificate(
    record: &CertificateRecord,
    kb: &KnowledgeBase,
    cfg: &AssessmentConfig,
) -> Result<Finding, EngineError> {
    assess_post_suite_view(&record.into(), kb, cfg)
}

/// Combines component findings under a hybrid combiner.
///
/// All combiners fold the minimum rule left to right over the component
/// risks, except weak nesting which is pairwise and follows the first
/// component. The headline likelihood and impact are taken from the
/// component whose risk the combination follows (first such component on
/// ties).
pub fn assess_hybrid(
    components: &[Finding],
    combiner: &CombinerRecord,
) -> Result<Finding, EngineError> {
    if components.len() < 2 {
        return Err(EngineError::new(
            "hybrid-arity",
            "hybrid combination needs at least two components",
        ));
    }
    if !combiner.kind.permits_folding() && components.len() != 2 {
        return Err(EngineError::new(
            "hybrid-arity",
            format!(
                "{:?} is defined only pairwise; got {} components",
                combiner.kind,
                components.len()
            ),
        ));
    }
    let mut derivation: Vec<String> = components
        .iter()
        .map(|c| format!("component {} ({}): risk {}", c.asset, c.subject, c.risk))
        .collect();
    let (risk, representative) = if combiner.kind == CombinerKind::WeakNesting {
        let risk = combine_weak_nesting(components[0].risk, components[1].risk);
        derivation.push(format!("weak nesting: risk follows the first component -> {risk}"));
        (risk, &components[0])
    } else {
        let risk = components[1..]
            .iter()
            .fold(components[0].risk, |acc, c| combine_hybrid(acc, c.risk));
        derivation.push(format!("minimum rule over component risks -> {risk}"));
        let representative =
            components.iter().find(|c| c.risk == risk).expect("minimum is attained");
        (risk, representative)
    };
    derivation.push(
        "combined STRIDE threats apply only when none of the components resist them".to_string(),
    );
    let subject = format!(
        "{}[{}]",
        combiner.id,
        components.iter().map(|c| c.subject.as_str()).collect::<Vec<_>>().join(" + ")
    );
    Ok(Finding {
        asset: subject.clone(),
        subject,
        stage: MigrationStage::ThroughMigration,
        likelihood: representative.likelihood,
        impact: representative.impact,
        risk,
        stride: stride_classes(&combiner.stride_threats),
        vulnerabilities: combiner.cons.clone(),
        countermeasures: Vec::new(),
        alternatives: Vec::new(),
        derivation,
        overridden: false,
        override_justification: None,
        per_attack: None,
        context_notes: None,
    })
}

fn record_kind(record: &RecordRef<'_>) -> Option<AssetKind> {
    match record {
        RecordRef::Mechanism(_) => Some(AssetKind::Algorithm),
        RecordRef::Certificate(_) => Some(AssetKind::Certificate),
        RecordRef::Protocol(_) => Some(AssetKind::Protocol),
        RecordRef::Attack(_) | RecordRef::Combiner(_) => None,
    }
}

fn suite_is_classical(kb: &KnowledgeBase, suite: &[SuiteMember]) -> bool {
    suite.iter().any(|m| {
        kb.mechanisms
            .get(&m.mechanism)
            .is_some_and(|mech| mech.profile.family != MechanismFamily::QuantumResistant)
    })
}

/// Infers the (kind, stage) a bare KB id would be assessed at, used when a
/// hybrid component or a what-if replacement names a KB record directly.
pub fn infer_component_stage(
    kb: &KnowledgeBase,
    record: &RecordRef<'_>,
) -> Option<(AssetKind, MigrationStage)> {
    match record {
        RecordRef::Mechanism(m) => {
            let stage = if m.profile.family == MechanismFamily::QuantumResistant {
                MigrationStage::PostMigration
            } else {
                MigrationStage::PreMigration
            };
            Some((AssetKind::Algorithm, stage))
        }
        RecordRef::Protocol(p) => {
            let stage = if !p.suite.is_empty() && suite_is_classical(kb, &p.suite) {
                MigrationStage::PreMigration
            } else if p.post_attributes.is_some() {
                MigrationStage::PostMigration
            } else {
                MigrationStage::PreMigration
            };
            Some((AssetKind::Protocol, stage))
        }
        RecordRef::Certificate(c) => {
            let stage = if !c.suite.is_empty() && suite_is_classical(kb, &c.suite) {
                MigrationStage::PreMigration
            } else if c.stage_attributes.is_some() {
                MigrationStage::PostMigration
            } else {
                MigrationStage::PreMigration
            };
            Some((AssetKind::Certificate, stage))
        }
        RecordRef::Attack(_) | RecordRef::Combiner(_) => None,
    }
}

fn unknown_subject_error(id: &str, suggestions: &[Id]) -> EngineError {
    let hint = if suggestions.is_empty() {
        String::new()
    } else {
        format!(" (closest known ids: {})", suggestions.join(", "))
    };
    EngineError::new("unknown-subject", format!("unknown id {id:?}{hint}"))
}

fn required_component_kind(applies_to: crate::kb::AppliesTo) -> AssetKind {
    match applies_to {
        crate::kb::AppliesTo::KemEnc | crate::kb::AppliesTo::Signature => AssetKind::Algorithm,
        crate::kb::AppliesTo::Certificate => AssetKind::Certificate,
        crate::kb::AppliesTo::Protocol => AssetKind::Protocol,
    }
}

fn assess_hybrid_asset(
    asset: &Asset,
    spec: &HybridSpec,
    inv: &Inventory,
    kb: &KnowledgeBase,
    cfg: &AssessmentConfig,
    visiting: &mut Vec<Id>,
) -> Result<Finding, EngineError> {
    let combiner = kb.combiners.get(&spec.combiner).ok_or_else(|| {
        EngineError::new(
            "unknown-combiner",
            format!("combiner {:?} is not in the knowledge base", spec.combiner),
        )
    })?;
    let required = required_component_kind(combiner.applies_to);
    let mut findings = Vec::new();
    for component in &spec.components {
        // components name inventory assets first, then KB records
        let (finding, kind) = if let Some(target) = inv.asset(component) {
            (assess_asset_inner(target, inv, kb, cfg, visiting)?, target.kind)
        } else {
            match kb.lookup(component) {
                LookupResult::Found(record) => {
                    let (kind, stage) = infer_component_stage(kb, &record).ok_or_else(|| {
                        EngineError::new(
                            "kind-mismatch",
                            format!(
                                "{component:?} is a {} record and cannot be a hybrid component",
                                record.kind_name()
                            ),
                        )
                    })?;
                    let synthetic = Asset {
                        id: component.clone(),
                        kind,
                        stage,
                        subject: Some(component.clone()),
                        hybrid: None,
                        context_notes: None,
                    };
                    (assess_asset_inner(&synthetic, inv, kb, cfg, visiting)?, kind)
                }
                LookupResult::NotFound { suggestions } => {
                    return Err(unknown_subject_error(component, &suggestions));
                }
            }
        };
        if kind != required && kind != AssetKind::Hybrid {
            return Err(EngineError::new(
                "combiner-mismatch",
                format!(
                    "combiner {:?} applies to {} components, but {component:?} is a {kind}",
                    combiner.id, combiner.applies_to
                ),
            ));
        }
        findings.push(finding);
    }
    let mut finding = assess_hybrid(&findings, combiner)?;
    finding.asset = asset.id.clone();
    Ok(finding)
}

fn assess_asset_inner(
    asset: &Asset,
    inv: &Inventory,
    kb: &KnowledgeBase,
    cfg: &AssessmentConfig,
    visiting: &mut Vec<Id>,
) -> Result<Finding, EngineError> {
    if visiting.contains(&asset.id) {
        return Err(EngineError::new(
            "component-cycle",
            format!("hybrid component cycle through {:?}", asset.id),
        ));
    }
    visiting.push(asset.id.clone());
    let result = dispatch_asset(asset, inv, kb, cfg, visiting);
    visiting.pop();
    let mut finding = result?;
    finding.asset = asset.id.clone();
    finding.context_notes = asset.context_notes.clone();
    Ok(finding)
}

fn dispatch_asset(
    asset: &Asset,
    inv: &Inventory,
    kb: &KnowledgeBase,
    cfg: &AssessmentConfig,
    visiting: &mut Vec<Id>,
) -> Result<Finding, EngineError> {
    use MigrationStage::*;
    if asset.kind == AssetKind::Hybrid {
        if asset.stage != ThroughMigration {
            return Err(EngineError::new(
                "stage-mismatch",
                format!("hybrid asset {:?} must be at the through-migration stage", asset.id),
            ));
        }
        let spec = asset.hybrid.as_ref().ok_or_else(|| {
            EngineError::new(
                "missing-hybrid-spec",
                format!("hybrid asset {:?} has no composition", asset.id),
            )
        })?;
        return assess_hybrid_asset(asset, spec, inv, kb, cfg, visiting);
    }
    if asset.stage == ThroughMigration {
        return Err(EngineError::new(
            "stage-mismatch",
            format!(
                "asset {:?}: only hybrid assets are assessed at the through-migration stage",
                asset.id
            ),
        ));
    }
    let subject_id = asset.subject.as_deref().ok_or_else(|| {
        EngineError::new("missing-subject", format!("asset {:?} has no subject", asset.id))
    })?;
    let record = match kb.lookup(subject_id) {
        LookupResult::Found(r) => r,
        LookupResult::NotFound { suggestions } => {
            return Err(unknown_subject_error(subject_id, &suggestions));
        }
    };
    let record_kind = record_kind(&record).ok_or_else(|| {
        EngineError::new(
            "kind-mismatch",
            format!("{subject_id:?} is a {} record, not an assessable subject", record.kind_name()),
        )
    })?;
    if record_kind != asset.kind {
        return Err(EngineError::new(
            "kind-mismatch",
            format!(
                "asset {:?} is declared as {}, but {subject_id:?} is a {record_kind}",
                asset.id, asset.kind
            ),
        ));
    }
    match (record, asset.stage) {
        (RecordRef::Mechanism(m), PreMigration) => assess_pre_algorithm(m, kb, cfg),
        (RecordRef::Mechanism(m), PostMigration) => assess_post_algorithm(m, kb, cfg),
        (RecordRef::Protocol(p), PreMigration) => assess_pre_protocol(p, kb, cfg),
        (RecordRef::Protocol(p), PostMigration) => assess_post_protocol(p, kb, cfg),
        (RecordRef::Certificate(c), PreMigration) => assess_pre_certificate(c, kb, cfg),
        (RecordRef::Certificate(c), PostMigration) => assess_post_certificate(c, kb, cfg),
        _ => unreachable!("kind and stage combinations are filtered above"),
    }
}

/// Assesses a single asset.
pub fn assess_asset(
    asset: &Asset,
    inv: &Inventory,
    kb: &KnowledgeBase,
    cfg: &AssessmentConfig,
) -> Result<Finding, EngineError> {
    let mut visiting = Vec::new();
    assess_asset_inner(asset, inv, kb, cfg, &mut visiting)
}

/// Assesses every asset in the inventory and assembles the report.
///
/// Per-asset errors are collected into the report unless
/// `cfg.fail_on_unknown` is set, in which case the first error aborts the
/// whole assessment.
pub fn assess_inventory(
    inv: &Inventory,
    kb: &KnowledgeBase,
    cfg: &AssessmentConfig,
) -> Result<AssessmentReport, EngineError> {
    let mut outcomes = Vec::new();
    let mut warnings = Vec::new();
    if inv.assets.is_empty() {
        warnings.push("inventory contains no assets".to_string());
    }
    for asset in &inv.assets {
        match assess_asset(asset, inv, kb, cfg) {
            Ok(finding) => outcomes.push(AssetOutcome::Assessed(Box::new(finding))),
            Err(e) if cfg.fail_on_unknown => return Err(e),
            Err(e) => {
                warnings.push(format!("asset {:?} could not be assessed: {e}", asset.id));
                outcomes.push(AssetOutcome::Errored {
                    asset: asset.id.clone(),
                    code: e.code,
                    error: e.message,
                });
            }
        }
    }
    Ok(AssessmentReport::new(kb.version.clone(), cfg.clone(), outcomes, warnings))
}

/// A what-if replacement for one inventory asset.
#[derive(Debug, Clone, PartialEq)]
pub struct Substitution {
    pub asset: Id,
    pub replace_with: Replacement,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Replacement {
    Subject(Id),
    Hybrid(HybridSpec),
}

/// Assesses the inventory before and after the substitutions and reports
/// the per-asset risk deltas.
pub fn what_if(
    inv: &Inventory,
    substitutions: &[Substitution],
    kb: &KnowledgeBase,
    cfg: &AssessmentConfig,
) -> Result<DeltaReport, EngineError> {
    let mut modified = inv.clone();
    for sub in substitutions {
        let asset = modified
            .assets
            .iter_mut()
            .find(|a| a.id == sub.asset)
            .ok_or_else(|| {
                EngineError::new(
                    "unknown-asset",
                    format!("substitution targets unknown asset {:?}", sub.asset),
                )
            })?;
        match &sub.replace_with {
            Replacement::Hybrid(spec) => {
                asset.kind = AssetKind::Hybrid;
                asset.stage = MigrationStage::ThroughMigration;
                asset.subject = None;
                asset.hybrid = Some(spec.clone());
            }
            Replacement::Subject(id) => {
                let record = match kb.lookup(id) {
                    LookupResult::Found(r) => r,
                    LookupResult::NotFound { suggestions } => {
                        return Err(unknown_subject_error(id, &suggestions));
                    }
                };
                let (kind, stage) = infer_component_stage(kb, &record).ok_or_else(|| {
                    EngineError::new(
                        "kind-mismatch",
                        format!(
                            "{id:?} is a {} record, not an assessable subject",
                            record.kind_name()
                        ),
                    )
                })?;
                asset.kind = kind;
                asset.stage = stage;
                asset.subject = Some(id.clone());
                asset.hybrid = None;
            }
        }
    }
    let baseline = assess_inventory(inv, kb, cfg)?;
    let after = assess_inventory(&modified, kb, cfg)?;
    Ok(crate::report::diff_reports(&baseline, &after))
}
