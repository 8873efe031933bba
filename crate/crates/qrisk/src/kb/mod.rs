//! Knowledge base: the data-driven catalog the engine assesses against.
//!
//! Every table the engine relies on lives in editable JSON documents under
//! a `kb/` directory. The engine itself contains no hard-coded rows; this
//! module defines the record types, the document loader, and the
//! validator that reports every violation rather than stopping at the
//! first.

mod load;
mod types;
mod validate;

pub use load::{
    default_kb_dir, load_kb_dir, load_kb_documents, LoadError, LoadOptions, Violation,
    DOCUMENT_NAMES, KB_SCHEMA,
};
pub use types::{
    Alternative, AppliesTo, AttackClass, AttackRecord, CertificateRecord, CombinerRecord,
    ExploitVector, Id, KnowledgeBase, LookupResult, MechanismRecord, PostStageAttributes,
    ProtocolRecord, RecordRef, RiskOverride, StrideThreat, SuiteMember,
};
pub use validate::validate_kb;
