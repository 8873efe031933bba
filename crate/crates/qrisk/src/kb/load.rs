//! Loading and serializing the KB document set.
//!
//! The KB is split into one JSON document per collection. Loading parses
//! every document, collects all violations instead of stopping at the
//! first, and only returns a knowledge base when the whole set validates.

use super::types::*;
use super::validate::validate_kb;
use crate::timeline::{ExpertPoll, PollHorizon};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

pub const KB_SCHEMA: &str = "qrisk-kb/1";

/// The fixed document set, one file per collection.
pub const DOCUMENT_NAMES: [&str; 7] = [
    "mechanisms.json",
    "attacks.json",
    "protocols.json",
    "certificates.json",
    "combiners.json",
    "poll.json",
    "overrides.json",
];

/// One validation or parse problem, with a machine-readable code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: String,
    pub location: String,
    pub message: String,
}

impl Violation {
    pub fn new(code: &str, location: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            code: code.to_string(),
            location: location.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.code, self.location, self.message)
    }
}

/// Failure to load a KB, carrying the complete violation list.
#[derive(Debug, thiserror::Error)]
pub struct LoadError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "knowledge base failed to load with {} violation(s):", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    /// Reject unknown fields when true.
    pub strict: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions { strict: true }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Envelope<T> {
    schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    version: Option<String>,
    entries: Vec<T>,
}

fn parse_document<T: DeserializeOwned>(
    name: &str,
    text: &str,
    opts: LoadOptions,
    violations: &mut Vec<Violation>,
) -> Option<Envelope<T>> {
    let mut de = serde_json::Deserializer::from_str(text);
    let mut unknown: Vec<String> = Vec::new();
    let parsed: Result<Envelope<T>, _> =
        serde_ignored::deserialize(&mut de, |path| unknown.push(path.to_string()));
    match parsed {
        Err(e) => {
            violations.push(Violation::new(
                "parse-error",
                format!("{name}:{}:{}", e.line(), e.column()),
                e.to_string(),
            ));
            None
        }
        Ok(envelope) => {
            if envelope.schema != KB_SCHEMA {
                violations.push(Violation::new(
                    "schema-mismatch",
                    name,
                    format!("expected schema {KB_SCHEMA:?}, found {:?}", envelope.schema),
                ));
                return None;
            }
            if opts.strict {
                for path in &unknown {
                    violations.push(Violation::new(
                        "unknown-field",
                        format!("{name}:{path}"),
                        "unknown field rejected in strict mode (pass --lax to ignore)",
                    ));
                }
                if !unknown.is_empty() {
                    return None;
                }
            }
            Some(envelope)
        }
    }
}

fn index_by_id<T>(
    name: &str,
    entries: Vec<T>,
    id_of: impl Fn(&T) -> &str,
    violations: &mut Vec<Violation>,
) -> BTreeMap<Id, T> {
    let mut map = BTreeMap::new();
    for entry in entries {
        let id = id_of(&entry).to_string();
        if map.contains_key(&id) {
            violations.push(Violation::new(
                "duplicate-id",
                name,
                format!("id {id:?} defined more than once"),
            ));
        } else {
            map.insert(id, entry);
        }
    }
    map
}

/// Loads a KB from named document contents.
///
/// Returns the validated KB, or every violation found across parsing and
/// validation. The result does not depend on the order documents are
/// supplied in.
pub fn load_kb_documents(
    documents: &BTreeMap<String, String>,
    opts: LoadOptions,
) -> Result<KnowledgeBase, LoadError> {
    let mut violations = Vec::new();

    for name in documents.keys() {
        if !DOCUMENT_NAMES.contains(&name.as_str()) {
            violations.push(Violation::new(
                "unknown-document",
                name.as_str(),
                format!("not part of the KB document set {DOCUMENT_NAMES:?}"),
            ));
        }
    }

    let mut get = |name: &str| -> Option<&String> {
        let doc = documents.get(name);
        if doc.is_none() {
            violations.push(Violation::new("missing-document", name, "document not supplied"));
        }
        doc
    };

    let mechanisms_doc = get("mechanisms.json").cloned();
    let attacks_doc = get("attacks.json").cloned();
    let protocols_doc = get("protocols.json").cloned();
    let certificates_doc = get("certificates.json").cloned();
    let combiners_doc = get("combiners.json").cloned();
    let poll_doc = get("poll.json").cloned();
    let overrides_doc = get("overrides.json").cloned();

    let mut version: Option<String> = None;
    let mut check_version = |name: &str, v: Option<String>, violations: &mut Vec<Violation>| {
        if let Some(v) = v {
            match &version {
                None => version = Some(v),
                Some(existing) if *existing != v => violations.push(Violation::new(
                    "version-mismatch",
                    name,
                    format!("document version {v:?} disagrees with {existing:?}"),
                )),
                Some(_) => {}
            }
        }
    };

    let mechanisms = mechanisms_doc
        .and_then(|text| parse_document::<MechanismRecord>("mechanisms.json", &text, opts, &mut violations))
        .map(|env| {
            check_version("mechanisms.json", env.version, &mut violations);
            index_by_id("mechanisms.json", env.entries, |m| &m.id, &mut violations)
        })
        .unwrap_or_default();
    let attacks = attacks_doc
        .and_then(|text| parse_document::<AttackRecord>("attacks.json", &text, opts, &mut violations))
        .map(|env| {
            check_version("attacks.json", env.version, &mut violations);
            index_by_id("attacks.json", env.entries, |a| &a.id, &mut violations)
        })
        .unwrap_or_default();
    let protocols = protocols_doc
        .and_then(|text| parse_document::<ProtocolRecord>("protocols.json", &text, opts, &mut violations))
        .map(|env| {
            check_version("protocols.json", env.version, &mut violations);
            index_by_id("protocols.json", env.entries, |p| &p.id, &mut violations)
        })
        .unwrap_or_default();
    let certificates = certificates_doc
        .and_then(|text| parse_document::<CertificateRecord>("certificates.json", &text, opts, &mut violations))
        .map(|env| {
            check_version("certificates.json", env.version, &mut violations);
            index_by_id("certificates.json", env.entries, |c| &c.id, &mut violations)
        })
        .unwrap_or_default();
    let combiners = combiners_doc
        .and_then(|text| parse_document::<CombinerRecord>("combiners.json", &text, opts, &mut violations))
        .map(|env| {
            check_version("combiners.json", env.version, &mut violations);
            index_by_id("combiners.json", env.entries, |c| &c.id, &mut violations)
        })
        .unwrap_or_default();
    let poll = poll_doc
        .and_then(|text| parse_document::<PollHorizon>("poll.json", &text, opts, &mut violations))
        .map(|env| {
            check_version("poll.json", env.version, &mut violations);
            ExpertPoll { horizons: env.entries }
        })
        .unwrap_or_default();
    let overrides = overrides_doc
        .and_then(|text| parse_document::<RiskOverride>("overrides.json", &text, opts, &mut violations))
        .map(|env| {
            check_version("overrides.json", env.version, &mut violations);
            env.entries
        })
        .unwrap_or_default();

    let kb = KnowledgeBase {
        version: version.unwrap_or_else(|| "0".to_string()),
        mechanisms,
        attacks,
        certificates,
        protocols,
        combiners,
        poll,
        overrides,
    };

    violations.extend(validate_kb(&kb));

    if violations.is_empty() {
        Ok(kb)
    } else {
        Err(LoadError { violations })
    }
}

/// Loads a KB from a directory containing the document set.
pub fn load_kb_dir(dir: &Path, opts: LoadOptions) -> Result<KnowledgeBase, LoadError> {
    let mut documents = BTreeMap::new();
    let mut violations = Vec::new();
    for name in DOCUMENT_NAMES {
        let path = dir.join(name);
        match std::fs::read_to_string(&path) {
            Ok(text) => {
                documents.insert(name.to_string(), text);
            }
            Err(e) => {
                violations.push(Violation::new(
                    "missing-document",
                    path.display().to_string(),
                    e.to_string(),
                ));
            }
        }
    }
    if !violations.is_empty() {
        return Err(LoadError { violations });
    }
    load_kb_documents(&documents, opts)
}

/// Resolves the KB directory: the `QRISK_KB` environment variable wins,
/// then a `kb/` directory under the current directory, then the dataset
/// bundled with the crate sources.
pub fn default_kb_dir() -> PathBuf {
    if let Ok(path) = std::env::var("QRISK_KB") {
        return PathBuf::from(path);
    }
    let local = PathBuf::from("kb");
    if local.is_dir() {
        return local;
    }
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("kb")
}

fn canonical_json<T: Serialize>(value: &T) -> String {
    // going through Value sorts object keys
    let value = serde_json::to_value(value).expect("serializable");
    let mut text = serde_json::to_string_pretty(&value).expect("serializable");
    text.push('\n');
    text
}

impl KnowledgeBase {
    /// Serializes the KB back into its canonical document set.
    ///
    /// Loading the result yields a KB equal to this one.
    pub fn to_documents(&self) -> BTreeMap<String, String> {
        let version = Some(self.version.clone());
        let mut docs = BTreeMap::new();
        docs.insert(
            "mechanisms.json".to_string(),
            canonical_json(&Envelope {
                schema: KB_SCHEMA.to_string(),
                version: version.clone(),
                entries: self.mechanisms.values().collect::<Vec<_>>(),
            }),
        );
        docs.insert(
            "attacks.json".to_string(),
            canonical_json(&Envelope {
                schema: KB_SCHEMA.to_string(),
                version: version.clone(),
                entries: self.attacks.values().collect::<Vec<_>>(),
            }),
        );
        docs.insert(
            "protocols.json".to_string(),
            canonical_json(&Envelope {
                schema: KB_SCHEMA.to_string(),
                version: version.clone(),
                entries: self.protocols.values().collect::<Vec<_>>(),
            }),
        );
        docs.insert(
            "certificates.json".to_string(),
            canonical_json(&Envelope {
                schema: KB_SCHEMA.to_string(),
                version: version.clone(),
                entries: self.certificates.values().collect::<Vec<_>>(),
            }),
        );
        docs.insert(
            "combiners.json".to_string(),
            canonical_json(&Envelope {
                schema: KB_SCHEMA.to_string(),
                version: version.clone(),
                entries: self.combiners.values().collect::<Vec<_>>(),
            }),
        );
        docs.insert(
            "poll.json".to_string(),
            canonical_json(&Envelope {
                schema: KB_SCHEMA.to_string(),
                version: version.clone(),
                entries: self.poll.horizons.iter().collect::<Vec<_>>(),
            }),
        );
        docs.insert(
            "overrides.json".to_string(),
            canonical_json(&Envelope {
                schema: KB_SCHEMA.to_string(),
                version,
                entries: self.overrides.iter().collect::<Vec<_>>(),
            }),
        );
        docs
    }
}
