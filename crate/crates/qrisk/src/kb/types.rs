//! Record types for the knowledge base collections.

use crate::risk::{CombinerKind, Level, MigrationStage, StrideClass};
use crate::timeline::{ExpertPoll, MechanismProfile};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

pub type Id = String;

/// One STRIDE class a record is exposed to, with the reasoning behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrideThreat {
    pub class: StrideClass,
    pub rationale: String,
}

/// A replacement suggestion: either another KB record or free text for
/// guidance that has no catalog entry (for example "larger key sizes").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Alternative {
    Reference { mechanism: Id },
    External { external: String },
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alternative::Reference { mechanism } => f.write_str(mechanism),
            Alternative::External { external } => f.write_str(external),
        }
    }
}

/// A cryptographic mechanism (one key- or digest-size variant per record).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismRecord {
    pub id: Id,
    pub display_name: String,
    pub profile: MechanismProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant_of: Option<Id>,
    pub stride_threats: Vec<StrideThreat>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vulnerabilities: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alternatives: Vec<Alternative>,
    /// True when the strength profile was filled in from the family rules
    /// rather than taken from a published figure.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub derived_profile: bool,
}

/// Implementation-level attack classes recorded against post-quantum
/// mechanisms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackClass {
    FaultAttack,
    TimingAttack,
    SimplePowerAnalysis,
    AdvancedPowerAnalysis,
    ElectromagneticAttack,
    TemplateAttack,
    ColdBootAttack,
    CryptanalysisAttack,
}

impl AttackClass {
    pub const ALL: [AttackClass; 8] = [
        AttackClass::FaultAttack,
        AttackClass::TimingAttack,
        AttackClass::SimplePowerAnalysis,
        AttackClass::AdvancedPowerAnalysis,
        AttackClass::ElectromagneticAttack,
        AttackClass::TemplateAttack,
        AttackClass::ColdBootAttack,
        AttackClass::CryptanalysisAttack,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AttackClass::FaultAttack => "fault_attack",
            AttackClass::TimingAttack => "timing_attack",
            AttackClass::SimplePowerAnalysis => "simple_power_analysis",
            AttackClass::AdvancedPowerAnalysis => "advanced_power_analysis",
            AttackClass::ElectromagneticAttack => "electromagnetic_attack",
            AttackClass::TemplateAttack => "template_attack",
            AttackClass::ColdBootAttack => "cold_boot_attack",
            AttackClass::CryptanalysisAttack => "cryptanalysis_attack",
        }
    }
}

impl fmt::Display for AttackClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Access an attacker needs to mount an attack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExploitVector {
    RemoteNetwork,
    PhysicalAccess,
    PrivilegedAccess,
}

impl fmt::Display for ExploitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExploitVector::RemoteNetwork => "remote_network",
            ExploitVector::PhysicalAccess => "physical_access",
            ExploitVector::PrivilegedAccess => "privileged_access",
        };
        f.write_str(s)
    }
}

/// A recorded attack on a post-quantum mechanism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackRecord {
    pub id: Id,
    pub target_mechanism: Id,
    pub attack_class: AttackClass,
    pub exploit_vector: ExploitVector,
    pub known_exploit: bool,
    pub countermeasure_available: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub countermeasures: Vec<String>,
    pub stride_threats: Vec<StrideThreat>,
}

impl AttackRecord {
    /// Likelihood category for this attack's attribute triple, or `None`
    /// when the combination falls outside the defined categories.
    ///
    /// Categories: a known exploit launchable remotely is high likelihood
    /// without countermeasures and medium with them; a known exploit
    /// needing physical access without countermeasures is medium; anything
    /// requiring privileged access, or with no known exploit, is low. A
    /// countermeasured physical-access exploit is deliberately
    /// uncategorized so the data has to be corrected rather than guessed
    /// at.
    pub fn likelihood_category(&self) -> Option<Level> {
        use ExploitVector::*;
        match (self.exploit_vector, self.known_exploit, self.countermeasure_available) {
            (_, false, _) => Some(Level::Low),
            (PrivilegedAccess, true, _) => Some(Level::Low),
            (RemoteNetwork, true, false) => Some(Level::High),
            (RemoteNetwork, true, true) => Some(Level::Medium),
            (PhysicalAccess, true, false) => Some(Level::Medium),
            (PhysicalAccess, true, true) => None,
        }
    }
}

/// A suite entry: one mechanism a protocol or certificate profile uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteMember {
    pub mechanism: Id,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub optional_use: bool,
    pub role: String,
}

/// Attributes driving the post-migration protocol and certificate rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostStageAttributes {
    pub uses_asymmetric: bool,
    pub vulnerability_via_optional_only: bool,
    pub countermeasures_available: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub challenges: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub countermeasures: Vec<String>,
}

/// A certificate profile (for example one X.509 version).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub id: Id,
    pub standard: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fields_summary: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub purposes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub suite: Vec<SuiteMember>,
    pub stride_threats: Vec<StrideThreat>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alternatives: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage_attributes: Option<PostStageAttributes>,
}

/// A protocol profile with its crypto suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRecord {
    pub id: Id,
    pub display_name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub purposes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub suite: Vec<SuiteMember>,
    pub stride_threats: Vec<StrideThreat>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alternatives: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_attributes: Option<PostStageAttributes>,
}

/// What a hybrid combiner can combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AppliesTo {
    KemEnc,
    Signature,
    Certificate,
    Protocol,
}

impl fmt::Display for AppliesTo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AppliesTo::KemEnc => "kem_enc",
            AppliesTo::Signature => "signature",
            AppliesTo::Certificate => "certificate",
            AppliesTo::Protocol => "protocol",
        };
        f.write_str(s)
    }
}

/// Allowed (kind, applies_to) pairings for combiners.
pub(crate) fn combiner_pairing_allowed(kind: CombinerKind, applies_to: AppliesTo) -> bool {
    use CombinerKind::*;
    match applies_to {
        AppliesTo::KemEnc => matches!(
            kind,
            Concatenation
                | ConcatKdf
                | CascadeKdf
                | DualPrf
                | NestedDualPrf
                | SplitKeyPrf
                | Xor
                | XorThenMac
                | XorThenPrf
        ),
        AppliesTo::Signature => {
            matches!(kind, Concatenation | WeakNesting | StrongNesting | DualNesting)
        }
        AppliesTo::Certificate => matches!(kind, DualCertificate | CompositeCertificate),
        AppliesTo::Protocol => matches!(kind, DualProtocol | CompositeProtocol),
    }
}

/// A hybrid combiner construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinerRecord {
    pub id: Id,
    pub kind: CombinerKind,
    pub applies_to: AppliesTo,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pros: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cons: Vec<String>,
    pub stride_threats: Vec<StrideThreat>,
}

/// A justified correction applied after rule-based derivation, for table
/// cells the general rules cannot produce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskOverride {
    pub subject: Id,
    pub stage: MigrationStage,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub likelihood: Option<Level>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impact: Option<Level>,
    pub justification: String,
}

/// The validated catalog all assessments run against.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KnowledgeBase {
    pub version: String,
    pub mechanisms: BTreeMap<Id, MechanismRecord>,
    pub attacks: BTreeMap<Id, AttackRecord>,
    pub certificates: BTreeMap<Id, CertificateRecord>,
    pub protocols: BTreeMap<Id, ProtocolRecord>,
    pub combiners: BTreeMap<Id, CombinerRecord>,
    pub poll: ExpertPoll,
    pub overrides: Vec<RiskOverride>,
}

/// A reference to any record kind, tagged by collection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RecordRef<'a> {
    Mechanism(&'a MechanismRecord),
    Attack(&'a AttackRecord),
    Certificate(&'a CertificateRecord),
    Protocol(&'a ProtocolRecord),
    Combiner(&'a CombinerRecord),
}

impl RecordRef<'_> {
    pub fn kind_name(&self) -> &'static str {
        match self {
            RecordRef::Mechanism(_) => "mechanism",
            RecordRef::Attack(_) => "attack",
            RecordRef::Certificate(_) => "certificate",
            RecordRef::Protocol(_) => "protocol",
            RecordRef::Combiner(_) => "combiner",
        }
    }

    pub fn id(&self) -> &str {
        match self {
            RecordRef::Mechanism(r) => &r.id,
            RecordRef::Attack(r) => &r.id,
            RecordRef::Certificate(r) => &r.id,
            RecordRef::Protocol(r) => &r.id,
            RecordRef::Combiner(r) => &r.id,
        }
    }
}

/// Outcome of a KB lookup.
#[derive(Debug, Clone, PartialEq)]
pub enum LookupResult<'a> {
    Found(RecordRef<'a>),
    NotFound { suggestions: Vec<Id> },
}

impl KnowledgeBase {
    /// Looks up a record of any kind by id; on a miss, suggests the
    /// closest known ids.
    pub fn lookup(&self, id: &str) -> LookupResult<'_> {
        if let Some(r) = self.mechanisms.get(id) {
            return LookupResult::Found(RecordRef::Mechanism(r));
        }
        if let Some(r) = self.attacks.get(id) {
            return LookupResult::Found(RecordRef::Attack(r));
        }
        if let Some(r) = self.certificates.get(id) {
            return LookupResult::Found(RecordRef::Certificate(r));
        }
        if let Some(r) = self.protocols.get(id) {
            return LookupResult::Found(RecordRef::Protocol(r));
        }
        if let Some(r) = self.combiners.get(id) {
            return LookupResult::Found(RecordRef::Combiner(r));
        }
        LookupResult::NotFound { suggestions: self.near_misses(id) }
    }

    /// All ids across collections, sorted.
    pub fn all_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self
            .mechanisms
            .keys()
            .chain(self.attacks.keys())
            .chain(self.certificates.keys())
            .chain(self.protocols.keys())
            .chain(self.combiners.keys())
            .map(String::as_str)
            .collect();
        ids.sort_unstable();
        ids
    }

    fn near_misses(&self, id: &str) -> Vec<Id> {
        let mut scored: Vec<(usize, &str)> = self
            .all_ids()
            .into_iter()
            .filter_map(|candidate| {
                let d = edit_distance(id, candidate);
                let related = candidate.contains(id) || id.contains(candidate);
                if d <= 3 || related {
                    Some((if related { d.min(1) } else { d }, candidate))
                } else {
                    None
                }
            })
            .collect();
        scored.sort();
        scored.into_iter().take(5).map(|(_, c)| c.to_string()).collect()
    }

    /// Attacks recorded against a mechanism, in id order.
    pub fn attacks_on(&self, mechanism_id: &str) -> Vec<&AttackRecord> {
        self.attacks
            .values()
            .filter(|a| a.target_mechanism == mechanism_id)
            .collect()
    }

    /// The override registered for a (subject, stage) pair, if any.
    pub fn override_for(&self, subject: &str, stage: MigrationStage) -> Option<&RiskOverride> {
        self.overrides
            .iter()
            .find(|o| o.subject == subject && o.stage == stage)
    }
}

fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attack_likelihood_categories() {
        use ExploitVector::*;
        let mk = |vector, known, cm| AttackRecord {
            id: "a".into(),
            target_mechanism: "m".into(),
            attack_class: AttackClass::FaultAttack,
            exploit_vector: vector,
            known_exploit: known,
            countermeasure_available: cm,
            countermeasures: vec![],
            stride_threats: vec![],
        };
        assert_eq!(mk(RemoteNetwork, true, false).likelihood_category(), Some(Level::High));
        assert_eq!(mk(RemoteNetwork, true, true).likelihood_category(), Some(Level::Medium));
        assert_eq!(mk(PhysicalAccess, true, false).likelihood_category(), Some(Level::Medium));
        assert_eq!(mk(PhysicalAccess, true, true).likelihood_category(), None);
        assert_eq!(mk(PrivilegedAccess, true, true).likelihood_category(), Some(Level::Low));
        assert_eq!(mk(PrivilegedAccess, true, false).likelihood_category(), Some(Level::Low));
        assert_eq!(mk(RemoteNetwork, false, false).likelihood_category(), Some(Level::Low));
    }

    #[test]
    fn edit_distance_basics() {
        assert_eq!(edit_distance("tls_1_3", "tls_1_3"), 0);
        assert_eq!(edit_distance("tls_1_2", "tls_1_3"), 1);
        assert_eq!(edit_distance("", "abc"), 3);
    }
}
