//! Qualitative risk scale and the combination rules applied to it.
//!
//! Everything here is a pure function over small enumerations: the
//! three-level scale used for likelihood, impact, and risk, the STRIDE
//! threat taxonomy, the migration stages, and the rules that combine
//! levels (risk matrix, hybrid minimum, weak-nesting passthrough,
//! worst-case aggregation).

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Qualitative level used for likelihood, impact, and risk.
///
/// The ordering `Low < Medium < High` is significant: hybrid combination
/// takes the minimum and aggregation takes the maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Low,
    Medium,
    High,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Low, Level::Medium, Level::High];

    /// Single-letter form used in rendered tables.
    pub fn letter(self) -> char {
        match self {
            Level::Low => 'L',
            Level::Medium => 'M',
            Level::High => 'H',
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Low => "low",
            Level::Medium => "medium",
            Level::High => "high",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "low" | "l" => Ok(Level::Low),
            "medium" | "m" => Ok(Level::Medium),
            "high" | "h" => Ok(Level::High),
            other => Err(format!("unknown level {other:?}; expected low, medium, or high")),
        }
    }
}

/// STRIDE threat class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrideClass {
    Spoofing,
    Tampering,
    Repudiation,
    InformationDisclosure,
    DenialOfService,
    ElevationOfPrivilege,
}

impl StrideClass {
    /// Canonical S, T, R, I, D, E order used for rendering.
    pub const ALL: [StrideClass; 6] = [
        StrideClass::Spoofing,
        StrideClass::Tampering,
        StrideClass::Repudiation,
        StrideClass::InformationDisclosure,
        StrideClass::DenialOfService,
        StrideClass::ElevationOfPrivilege,
    ];

    pub fn letter(self) -> char {
        match self {
            StrideClass::Spoofing => 'S',
            StrideClass::Tampering => 'T',
            StrideClass::Repudiation => 'R',
            StrideClass::InformationDisclosure => 'I',
            StrideClass::DenialOfService => 'D',
            StrideClass::ElevationOfPrivilege => 'E',
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StrideClass::Spoofing => "spoofing",
            StrideClass::Tampering => "tampering",
            StrideClass::Repudiation => "repudiation",
            StrideClass::InformationDisclosure => "information_disclosure",
            StrideClass::DenialOfService => "denial_of_service",
            StrideClass::ElevationOfPrivilege => "elevation_of_privilege",
        }
    }

    /// Index in the canonical S, T, R, I, D, E order.
    pub fn canonical_index(self) -> usize {
        Self::ALL.iter().position(|c| *c == self).unwrap()
    }
}

impl fmt::Display for StrideClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Deduplicates a set of STRIDE classes and sorts it in S, T, R, I, D, E
/// order.
pub fn canonical_stride(classes: &[StrideClass]) -> Vec<StrideClass> {
    let mut out: Vec<StrideClass> = Vec::new();
    for class in StrideClass::ALL {
        if classes.contains(&class) && !out.contains(&class) {
            out.push(class);
        }
    }
    out
}

/// Renders a STRIDE set as its letters, e.g. "S, T, R".
pub fn stride_letters(classes: &[StrideClass]) -> String {
    canonical_stride(classes)
        .iter()
        .map(|c| c.letter().to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Migration stage an asset is assessed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MigrationStage {
    PreMigration,
    ThroughMigration,
    PostMigration,
}

impl MigrationStage {
    pub const ALL: [MigrationStage; 3] = [
        MigrationStage::PreMigration,
        MigrationStage::ThroughMigration,
        MigrationStage::PostMigration,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MigrationStage::PreMigration => "pre_migration",
            MigrationStage::ThroughMigration => "through_migration",
            MigrationStage::PostMigration => "post_migration",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            MigrationStage::PreMigration => "Pre-Migration",
            MigrationStage::ThroughMigration => "Through-Migration",
            MigrationStage::PostMigration => "Post-Migration",
        }
    }
}

impl fmt::Display for MigrationStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Kind of hybrid combiner.
///
/// `WeakNesting` is the only kind whose risk depends solely on the first
/// component; every other kind uses the minimum rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombinerKind {
    Concatenation,
    ConcatKdf,
    CascadeKdf,
    DualPrf,
    NestedDualPrf,
    SplitKeyPrf,
    Xor,
    XorThenMac,
    XorThenPrf,
    WeakNesting,
    StrongNesting,
    DualNesting,
    DualCertificate,
    CompositeCertificate,
    DualProtocol,
    CompositeProtocol,
}

impl CombinerKind {
    pub const ALL: [CombinerKind; 16] = [
        CombinerKind::Concatenation,
        CombinerKind::ConcatKdf,
        CombinerKind::CascadeKdf,
        CombinerKind::DualPrf,
        CombinerKind::NestedDualPrf,
        CombinerKind::SplitKeyPrf,
        CombinerKind::Xor,
        CombinerKind::XorThenMac,
        CombinerKind::XorThenPrf,
        CombinerKind::WeakNesting,
        CombinerKind::StrongNesting,
        CombinerKind::DualNesting,
        CombinerKind::DualCertificate,
        CombinerKind::CompositeCertificate,
        CombinerKind::DualProtocol,
        CombinerKind::CompositeProtocol,
    ];

    /// True when the hybrid risk is taken from the first component only.
    pub fn first_component_only(self) -> bool {
        matches!(self, CombinerKind::WeakNesting)
    }

    /// True when a combiner of this kind may fold more than two components.
    ///
    /// Weak nesting is defined only pairwise; every min-rule combiner folds
    /// left to right.
    pub fn permits_folding(self) -> bool {
        !self.first_component_only()
    }
}

/// Risk matrix: maps a (likelihood, impact) pair to a risk level.
///
/// Rows are likelihood, columns are impact:
///
/// |        | Low | Medium | High |
/// |--------|-----|--------|------|
/// | Low    | L   | L      | M    |
/// | Medium | L   | M      | H    |
/// | High   | M   | H      | H    |
pub fn combine_risk(likelihood: Level, impact: Level) -> Level {
    use Level::*;
    match (likelihood, impact) {
        (Low, Low) => Low,
        (Low, Medium) => Low,
        (Low, High) => Medium,
        (Medium, Low) => Low,
        (Medium, Medium) => Medium,
        (Medium, High) => High,
        (High, Low) => Medium,
        (High, Medium) => High,
        (High, High) => High,
    }
}

/// Hybrid combination: the risk of a hybrid is the minimum of its
/// components' risks (the stronger component protects the combination).
pub fn combine_hybrid(a: Level, b: Level) -> Level {
    a.min(b)
}

/// Weak-nesting combination: the risk depends only on the first component.
pub fn combine_weak_nesting(first: Level, _second: Level) -> Level {
    first
}

/// Worst-case aggregation of several risk levels into one headline level.
pub fn aggregate_findings(levels: &[Level]) -> Result<Level, String> {
    levels
        .iter()
        .copied()
        .max()
        .ok_or_else(|| "no findings to aggregate".to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_order() {
        assert!(Level::Low < Level::Medium);
        assert!(Level::Medium < Level::High);
        assert_eq!("medium".parse::<Level>().unwrap(), Level::Medium);
        assert_eq!("H".parse::<Level>().unwrap(), Level::High);
        assert!("severe".parse::<Level>().is_err());
    }

    #[test]
    fn level_serde_round_trip() {
        for level in Level::ALL {
            let json = serde_json::to_string(&level).unwrap();
            assert_eq!(json, format!("\"{level}\""));
            let back: Level = serde_json::from_str(&json).unwrap();
            assert_eq!(back, level);
        }
        assert!(serde_json::from_str::<Level>("\"critical\"").is_err());
    }

    #[test]
    fn risk_matrix_cells() {
        use Level::*;
        let expected = [
            ((Low, Low), Low),
            ((Low, Medium), Low),
            ((Low, High), Medium),
            ((Medium, Low), Low),
            ((Medium, Medium), Medium),
            ((Medium, High), High),
            ((High, Low), Medium),
            ((High, Medium), High),
            ((High, High), High),
        ];
        for ((l, i), r) in expected {
            assert_eq!(combine_risk(l, i), r, "cell ({l}, {i})");
        }
    }

    #[test]
    fn risk_matrix_symmetric_and_monotone() {
        for a in Level::ALL {
            for b in Level::ALL {
                assert_eq!(combine_risk(a, b), combine_risk(b, a));
                // the matrix never leaves the range spanned by its inputs
                let r = combine_risk(a, b);
                assert!(r >= a.min(b) && r <= a.max(b));
                for c in Level::ALL.iter().copied().filter(|c| *c >= b) {
                    assert!(combine_risk(a, c) >= combine_risk(a, b));
                }
            }
        }
    }

    #[test]
    fn hybrid_is_min() {
        for a in Level::ALL {
            for b in Level::ALL {
                assert_eq!(combine_hybrid(a, b), a.min(b));
                assert_eq!(combine_hybrid(a, b), combine_hybrid(b, a));
            }
        }
        assert_eq!(combine_hybrid(Level::High, Level::Medium), Level::Medium);
    }

    #[test]
    fn weak_nesting_ignores_second() {
        for a in Level::ALL {
            for b in Level::ALL {
                assert_eq!(combine_weak_nesting(a, b), a);
            }
        }
    }

    #[test]
    fn aggregation_is_max() {
        use Level::*;
        assert_eq!(aggregate_findings(&[Medium, High, Low]).unwrap(), High);
        assert_eq!(aggregate_findings(&[Low]).unwrap(), Low);
        assert_eq!(aggregate_findings(&[Medium, Medium]).unwrap(), Medium);
        assert_eq!(aggregate_findings(&[]).unwrap_err(), "no findings to aggregate");
    }

    #[test]
    fn stride_canonical_order() {
        let mixed = [
            StrideClass::ElevationOfPrivilege,
            StrideClass::Spoofing,
            StrideClass::Spoofing,
            StrideClass::InformationDisclosure,
        ];
        let canon = canonical_stride(&mixed);
        assert_eq!(
            canon,
            vec![
                StrideClass::Spoofing,
                StrideClass::InformationDisclosure,
                StrideClass::ElevationOfPrivilege
            ]
        );
        assert_eq!(stride_letters(&mixed), "S, I, E");
    }

    #[test]
    fn combiner_kind_semantics() {
        let first_only: Vec<_> = CombinerKind::ALL
            .iter()
            .filter(|k| k.first_component_only())
            .collect();
        assert_eq!(first_only, vec![&CombinerKind::WeakNesting]);
        assert!(!CombinerKind::WeakNesting.permits_folding());
        assert!(CombinerKind::Concatenation.permits_folding());
    }
}
