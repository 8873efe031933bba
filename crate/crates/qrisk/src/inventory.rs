//! Inventory ingestion: the declared cryptographic deployment to assess.

use crate::kb::{Id, Violation};
use crate::risk::MigrationStage;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

pub const INVENTORY_SCHEMA: &str = "qrisk-inventory/1";

/// What kind of thing an asset is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssetKind {
    Algorithm,
    Certificate,
    Protocol,
    Hybrid,
}

impl AssetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AssetKind::Algorithm => "algorithm",
            AssetKind::Certificate => "certificate",
            AssetKind::Protocol => "protocol",
            AssetKind::Hybrid => "hybrid",
        }
    }
}

impl std::fmt::Display for AssetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Hybrid composition: a combiner and the components it combines.
/// Components name other inventory assets or KB records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridSpec {
    pub combiner: Id,
    pub components: Vec<Id>,
}

/// One deployed asset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Asset {
    pub id: Id,
    pub kind: AssetKind,
    pub stage: MigrationStage,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<Id>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hybrid: Option<HybridSpec>,
    /// Free-text deployment context (network segmentation, workforce
    /// factors, ...). Annotates reports; never changes any level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_notes: Option<String>,
}

/// The declared deployment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inventory {
    pub name: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
    pub assets: Vec<Asset>,
}

impl Inventory {
    pub fn asset(&self, id: &str) -> Option<&Asset> {
        self.assets.iter().find(|a| a.id == id)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct InventoryDocument {
    schema: String,
    name: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, String>,
    assets: Vec<Asset>,
}

/// Parses and structurally validates an inventory document, returning
/// either the inventory or the complete violation list.
pub fn parse_inventory(text: &str, strict: bool) -> Result<Inventory, Vec<Violation>> {
    let mut violations = Vec::new();
    let mut unknown: Vec<String> = Vec::new();
    let mut de = serde_json::Deserializer::from_str(text);
    let doc: InventoryDocument =
        match serde_ignored::deserialize(&mut de, |path| unknown.push(path.to_string())) {
            Ok(doc) => doc,
            Err(e) => {
                violations.push(Violation::new(
                    "parse-error",
                    format!("inventory:{}:{}", e.line(), e.column()),
                    e.to_string(),
                ));
                return Err(violations);
            }
        };
    if strict {
        for path in &unknown {
            violations.push(Violation::new(
                "unknown-field",
                format!("inventory:{path}"),
                "unknown field rejected in strict mode",
            ));
        }
    }
    if doc.schema != INVENTORY_SCHEMA {
        violations.push(Violation::new(
            "schema-mismatch",
            "inventory",
            format!("expected schema {INVENTORY_SCHEMA:?}, found {:?}", doc.schema),
        ));
    }

    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for asset in &doc.assets {
        let loc = format!("inventory:{}", asset.id);
        if !seen.insert(&asset.id) {
            violations.push(Violation::new(
                "duplicate-id",
                loc.clone(),
                format!("asset id {:?} declared more than once", asset.id),
            ));
        }
        match (asset.kind, &asset.subject, &asset.hybrid) {
            (AssetKind::Hybrid, None, Some(spec)) => {
                if asset.stage != MigrationStage::ThroughMigration {
                    violations.push(Violation::new(
                        "stage-mismatch",
                        loc.clone(),
                        "hybrid assets belong to the through-migration stage",
                    ));
                }
                if spec.components.len() < 2 {
                    violations.push(Violation::new(
                        "hybrid-arity",
                        loc.clone(),
                        "hybrid assets need at least two components",
                    ));
                }
            }
            (AssetKind::Hybrid, _, None) => violations.push(Violation::new(
                "missing-hybrid-spec",
                loc.clone(),
                "hybrid assets must declare a `hybrid` composition",
            )),
            (_, Some(_), Some(_)) => violations.push(Violation::new(
                "conflicting-fields",
                loc.clone(),
                "declare either `subject` or `hybrid`, not both",
            )),
            (_, Some(_), None) => {}
            (_, None, _) => violations.push(Violation::new(
                "missing-subject",
                loc.clone(),
                "non-hybrid assets must declare a `subject`",
            )),
        }
    }

    if violations.is_empty() {
        Ok(Inventory { name: doc.name, metadata: doc.metadata, assets: doc.assets })
    } else {
        Err(violations)
    }
}

/// Reads and parses an inventory file.
pub fn load_inventory(path: &std::path::Path, strict: bool) -> Result<Inventory, Vec<Violation>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        vec![Violation::new("io-error", path.display().to_string(), e.to_string())]
    })?;
    parse_inventory(&text, strict)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_inventory_parses() {
        let text = r#"{
            "schema": "qrisk-inventory/1",
            "name": "edge",
            "assets": [
                {"id": "tls", "kind": "protocol", "stage": "pre_migration", "subject": "tls_1_3"}
            ]
        }"#;
        let inv = parse_inventory(text, true).unwrap();
        assert_eq!(inv.assets.len(), 1);
        assert_eq!(inv.asset("tls").unwrap().subject.as_deref(), Some("tls_1_3"));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = r#"{
            "schema": "qrisk-inventory/1",
            "name": "dup",
            "assets": [
                {"id": "a", "kind": "algorithm", "stage": "pre_migration", "subject": "aes_128"},
                {"id": "a", "kind": "algorithm", "stage": "pre_migration", "subject": "aes_256"}
            ]
        }"#;
        let violations = parse_inventory(text, true).unwrap_err();
        assert!(violations.iter().any(|v| v.code == "duplicate-id" && v.message.contains("\"a\"")));
    }

    #[test]
    fn hybrid_assets_resolve_spec() {
        let text = r#"{
            "schema": "qrisk-inventory/1",
            "name": "hy",
            "assets": [
                {"id": "kex", "kind": "hybrid", "stage": "through_migration",
                 "hybrid": {"combiner": "concatenation_kem", "components": ["ecdh", "kyber"]}}
            ]
        }"#;
        let inv = parse_inventory(text, true).unwrap();
        let spec = inv.asset("kex").unwrap().hybrid.as_ref().unwrap();
        assert_eq!(spec.components, vec!["ecdh", "kyber"]);
    }

    #[test]
    fn hybrid_must_be_through_migration() {
        let text = r#"{
            "schema": "qrisk-inventory/1",
            "name": "hy",
            "assets": [
                {"id": "kex", "kind": "hybrid", "stage": "pre_migration",
                 "hybrid": {"combiner": "xor", "components": ["ecdh", "kyber"]}}
            ]
        }"#;
        let violations = parse_inventory(text, true).unwrap_err();
        assert!(violations.iter().any(|v| v.code == "stage-mismatch"));
    }

    #[test]
    fn unknown_fields_rejected_in_strict_mode() {
        let text = r#"{
            "schema": "qrisk-inventory/1",
            "name": "x",
            "assets": [],
            "extra": true
        }"#;
        assert!(parse_inventory(text, true).is_err());
        assert!(parse_inventory(text, false).is_ok());
    }
}
