//! Risk assessment engine for planning a migration to quantum-safe
//! cryptography.
//!
//! The crate models the migration in three stages: before any post-quantum
//! algorithms are deployed, during the hybrid transition, and after the
//! migration is complete. A data-driven knowledge base describes classical
//! mechanisms, post-quantum candidates with their known implementation
//! attacks, protocol and certificate profiles, and hybrid combiners. The
//! engine turns a declared cryptographic inventory into per-asset findings
//! with STRIDE threats, likelihood, impact, and risk levels.

pub mod cli;
pub mod engine;
pub mod inventory;
pub mod kb;
pub mod report;
pub mod risk;
pub mod timeline;
