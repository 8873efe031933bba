//! Quantum-threat timeline and strength rules.
//!
//! Expert-poll data gives the expected likelihood that a cryptographically
//! relevant quantum computer exists within a horizon. Mechanism profiles
//! give the effective security strength a mechanism retains against a
//! quantum adversary: Shor reduces factoring and discrete-log mechanisms
//! to zero, Grover halves symmetric key strength, and the
//! Brassard-Hoyer-Tapp collision search reduces hash strength to a third
//! of the digest size.

use crate::risk::Level;
use serde::{Deserialize, Serialize};
use std::fmt;

/// One opinion bin of a poll horizon: a representative probability and the
/// fraction of experts whose estimate falls in the bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PollBin {
    pub representative: f64,
    pub fraction: f64,
}

/// Expert opinions for a single time horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PollHorizon {
    pub years: u32,
    pub bins: Vec<PollBin>,
}

/// Binned expert-opinion distributions per time horizon.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExpertPoll {
    pub horizons: Vec<PollHorizon>,
}

/// Broad cryptographic family determining the quantum strength rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanismFamily {
    /// Public-key mechanisms whose hardness assumption Shor's algorithm
    /// breaks (factoring, discrete log, elliptic curves).
    AsymmetricShorBreakable,
    SymmetricCipher,
    KeyedMac,
    UnkeyedHash,
    QuantumResistant,
}

impl fmt::Display for MechanismFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MechanismFamily::AsymmetricShorBreakable => "asymmetric_shor_breakable",
            MechanismFamily::SymmetricCipher => "symmetric_cipher",
            MechanismFamily::KeyedMac => "keyed_mac",
            MechanismFamily::UnkeyedHash => "unkeyed_hash",
            MechanismFamily::QuantumResistant => "quantum_resistant",
        };
        f.write_str(s)
    }
}

/// Strength-relevant parameters of a mechanism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismProfile {
    pub name: String,
    pub family: MechanismFamily,
    /// Key length for ciphers and MACs, digest length for hashes, claimed
    /// classical strength otherwise.
    pub parameter_bits: u32,
    pub classic_strength_bits: u32,
}

/// Thresholds mapping an expected likelihood to a qualitative level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineConfig {
    pub horizon_years: u32,
    pub low_upper_bound: f64,
    pub medium_upper_bound: f64,
}

impl TimelineConfig {
    pub fn with_horizon(horizon_years: u32) -> Self {
        TimelineConfig {
            horizon_years,
            ..TimelineConfig::default()
        }
    }
}

impl Default for TimelineConfig {
    fn default() -> Self {
        // defaults chosen so the seeded poll maps 5/10 years to low,
        // 15 years to medium, and 20/30 years to high
        TimelineConfig {
            horizon_years: 15,
            low_upper_bound: 0.30,
            medium_upper_bound: 0.55,
        }
    }
}

/// Expected likelihood of the quantum threat within `horizon_years`:
/// the fraction-weighted mean of the horizon's opinion bins.
pub fn expected_likelihood(poll: &ExpertPoll, horizon_years: u32) -> Result<f64, String> {
    let horizon = poll
        .horizons
        .iter()
        .find(|h| h.years == horizon_years)
        .ok_or_else(|| {
            let available: Vec<String> =
                poll.horizons.iter().map(|h| h.years.to_string()).collect();
            format!(
                "no poll horizon for {horizon_years} years; available horizons: {}",
                available.join(", ")
            )
        })?;
    Ok(horizon
        .bins
        .iter()
        .map(|b| b.representative * b.fraction)
        .sum())
}

/// Maps an expected likelihood to a qualitative level using the config
/// thresholds.
pub fn likelihood_level(expected: f64, cfg: &TimelineConfig) -> Level {
    if expected < cfg.low_upper_bound {
        Level::Low
    } else if expected < cfg.medium_upper_bound {
        Level::Medium
    } else {
        Level::High
    }
}

/// Effective security strength in bits against a quantum adversary.
pub fn quantum_strength(mech: &MechanismProfile) -> u32 {
    match mech.family {
        MechanismFamily::AsymmetricShorBreakable => 0,
        MechanismFamily::SymmetricCipher | MechanismFamily::KeyedMac => mech.parameter_bits / 2,
        MechanismFamily::UnkeyedHash => mech.parameter_bits / 3,
        MechanismFamily::QuantumResistant => mech.classic_strength_bits,
    }
}

/// Impact level implied by a quantum security strength.
///
/// Less than 64 bits is high impact, 128 bits or more is low, the band in
/// between is medium. Both boundaries are inclusive on the weaker side.
pub fn impact_from_strength(qs_bits: u32) -> Level {
    if qs_bits < 64 {
        Level::High
    } else if qs_bits < 128 {
        Level::Medium
    } else {
        Level::Low
    }
}
