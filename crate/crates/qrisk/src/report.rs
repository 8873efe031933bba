//! Report data model and rendering.
//!
//! JSON output is canonical: object keys sorted, no timestamps unless
//! explicitly stamped, byte-identical across runs for the same inputs.
//! Markdown output renders one table per migration stage with H/M/L
//! letters and marks overridden rows with a dagger and a footnote.

use crate::engine::{AssessmentConfig, Finding};
use crate::kb::Id;
use crate::risk::{stride_letters, Level, MigrationStage};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

pub const REPORT_SCHEMA: &str = "qrisk-report/1";
pub const DELTA_SCHEMA: &str = "qrisk-delta/1";

/// Output format for rendered reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Json,
    Markdown,
}

/// Result slot for one asset: a finding, or the error that prevented one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AssetOutcome {
    Assessed(Box<Finding>),
    Errored { asset: Id, code: String, error: String },
}

impl AssetOutcome {
    pub fn asset_id(&self) -> &str {
        match self {
            AssetOutcome::Assessed(f) => &f.asset,
            AssetOutcome::Errored { asset, .. } => asset,
        }
    }

    pub fn finding(&self) -> Option<&Finding> {
        match self {
            AssetOutcome::Assessed(f) => Some(f),
            AssetOutcome::Errored { .. } => None,
        }
    }
}

/// Finding counts at one stage, by risk level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LevelCounts {
    pub low: usize,
    pub medium: usize,
    pub high: usize,
}

impl LevelCounts {
    fn bump(&mut self, level: Level) {
        match level {
            Level::Low => self.low += 1,
            Level::Medium => self.medium += 1,
            Level::High => self.high += 1,
        }
    }
}

/// Report-level tallies.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub assessed: usize,
    pub errored: usize,
    pub by_stage: BTreeMap<String, LevelCounts>,
}

/// The full assessment output for one inventory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentReport {
    pub schema: String,
    pub kb_version: String,
    pub config: AssessmentConfig,
    pub findings: Vec<AssetOutcome>,
    pub summary: Summary,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
}

impl AssessmentReport {
    /// Assembles a report: sorts outcomes by asset id and tallies the
    /// summary from them.
    pub fn new(
        kb_version: String,
        config: AssessmentConfig,
        mut findings: Vec<AssetOutcome>,
        warnings: Vec<String>,
    ) -> Self {
        findings.sort_by(|a, b| a.asset_id().cmp(b.asset_id()));
        let mut summary = Summary::default();
        for outcome in &findings {
            match outcome.finding() {
                Some(f) => {
                    summary.assessed += 1;
                    summary.by_stage.entry(f.stage.as_str().to_string()).or_default().bump(f.risk);
                }
                None => summary.errored += 1,
            }
        }
        AssessmentReport {
            schema: REPORT_SCHEMA.to_string(),
            kb_version,
            config,
            findings,
            summary,
            warnings,
            generated_at: None,
        }
    }

    pub fn finding(&self, asset_id: &str) -> Option<&Finding> {
        self.findings
            .iter()
            .find(|o| o.asset_id() == asset_id)
            .and_then(AssetOutcome::finding)
    }

    /// True when any assessed asset carries high risk (the CI gate).
    pub fn has_high_risk(&self) -> bool {
        self.findings
            .iter()
            .filter_map(AssetOutcome::finding)
            .any(|f| f.risk == Level::High)
    }

    /// Adds a UTC generation timestamp. Off by default so golden-file
    /// comparisons stay byte-exact.
    pub fn stamp(&mut self) {
        self.generated_at = Some(utc_now_rfc3339());
    }
}

/// One asset's before/after risk in a what-if comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskChange {
    pub asset: Id,
    pub before: Level,
    pub after: Level,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Improved,
    Unchanged,
    Worsened,
}

impl Direction {
    fn of(before: Level, after: Level) -> Direction {
        match after.cmp(&before) {
            std::cmp::Ordering::Less => Direction::Improved,
            std::cmp::Ordering::Equal => Direction::Unchanged,
            std::cmp::Ordering::Greater => Direction::Worsened,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Improved => "improved",
            Direction::Unchanged => "unchanged",
            Direction::Worsened => "worsened",
        }
    }
}

/// Per-asset risk deltas between two reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub schema: String,
    pub baseline_summary: Summary,
    pub modified_summary: Summary,
    pub changes: Vec<RiskChange>,
    pub added: Vec<Id>,
    pub removed: Vec<Id>,
}

impl DeltaReport {
    /// True when the modified report still contains a high-risk finding.
    pub fn has_high_after(&self) -> bool {
        self.changes.iter().any(|c| c.after == Level::High)
            || self.modified_summary.by_stage.values().any(|c| c.high > 0)
    }
}

/// Compares two reports asset by asset.
///
/// Assets with a finding in only one report are listed as added or
/// removed; assets that errored count as absent.
pub fn diff_reports(baseline: &AssessmentReport, modified: &AssessmentReport) -> DeltaReport {
    let index = |r: &AssessmentReport| -> BTreeMap<String, Level> {
        r.findings
            .iter()
            .filter_map(AssetOutcome::finding)
            .map(|f| (f.asset.clone(), f.risk))
            .collect()
    };
    let before = index(baseline);
    let after = index(modified);
    let mut changes = Vec::new();
    let mut removed = Vec::new();
    for (asset, b) in &before {
        match after.get(asset) {
            Some(a) => changes.push(RiskChange {
                asset: asset.clone(),
                before: *b,
                after: *a,
                direction: Direction::of(*b, *a),
            }),
            None => removed.push(asset.clone()),
        }
    }
    let added: Vec<Id> =
        after.keys().filter(|k| !before.contains_key(*k)).cloned().collect();
    DeltaReport {
        schema: DELTA_SCHEMA.to_string(),
        baseline_summary: baseline.summary.clone(),
        modified_summary: modified.summary.clone(),
        changes,
        added,
        removed,
    }
}

/// Canonical JSON: object keys sorted, pretty-printed, trailing newline.
/// Rendering, parsing, and rendering again is byte-identical.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("report types are serializable");
    let mut text = serde_json::to_string_pretty(&value).expect("serializable");
    text.push('\n');
    text
}

/// Renders a report in the requested format.
pub fn render_report(report: &AssessmentReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => canonical_json(report),
        ReportFormat::Markdown => render_report_markdown(report),
    }
}

fn cell(texts: &[String]) -> String {
    if texts.is_empty() {
        "-".to_string()
    } else {
        texts.join("; ").replace('|', "/")
    }
}

fn render_report_markdown(report: &AssessmentReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Quantum-Safe Migration Risk Assessment");
    let _ = writeln!(out);
    let _ = writeln!(out, "- knowledge base version: {}", report.kb_version);
    let _ = writeln!(out, "- horizon: {} years", report.config.horizon_years);
    let _ = writeln!(
        out,
        "- assets assessed: {} ({} errored)",
        report.summary.assessed, report.summary.errored
    );
    if let Some(stamp) = &report.generated_at {
        let _ = writeln!(out, "- generated at: {stamp}");
    }
    if report.findings.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "No assets assessed.");
    }

    let mut footnotes: Vec<(String, String)> = Vec::new();
    for stage in MigrationStage::ALL {
        let rows: Vec<&Finding> = report
            .findings
            .iter()
            .filter_map(AssetOutcome::finding)
            .filter(|f| f.stage == stage)
            .collect();
        if rows.is_empty() {
            continue;
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "## {}", stage.title());
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "| Asset | Subject | Vulnerabilities | Quantum Threats (STRIDE) | L | I | R | \
             Countermeasures / Alternatives |"
        );
        let _ = writeln!(out, "| --- | --- | --- | --- | --- | --- | --- | --- |");
        for f in rows {
            let marker = if f.overridden { "\u{2020}" } else { "" };
            if f.overridden {
                footnotes.push((
                    f.asset.clone(),
                    f.override_justification.clone().unwrap_or_default(),
                ));
            }
            let mut remedies = f.countermeasures.clone();
            remedies.extend(f.alternatives.iter().cloned());
            let _ = writeln!(
                out,
                "| {}{} | {} | {} | {} | {} | {} | {} | {} |",
                f.asset,
                marker,
                f.subject,
                cell(&f.vulnerabilities),
                stride_letters(&f.stride),
                f.likelihood.letter(),
                f.impact.letter(),
                f.risk.letter(),
                cell(&remedies)
            );
        }
    }

    let errors: Vec<(&str, &str, &str)> = report
        .findings
        .iter()
        .filter_map(|o| match o {
            AssetOutcome::Errored { asset, code, error } => {
                Some((asset.as_str(), code.as_str(), error.as_str()))
            }
            AssetOutcome::Assessed(_) => None,
        })
        .collect();
    if !errors.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "## Errors");
        let _ = writeln!(out);
        let _ = writeln!(out, "| Asset | Code | Error |");
        let _ = writeln!(out, "| --- | --- | --- |");
        for (asset, code, error) in errors {
            let _ = writeln!(out, "| {asset} | {code} | {} |", error.replace('|', "/"));
        }
    }

    if !footnotes.is_empty() {
        let _ = writeln!(out);
        for (asset, justification) in footnotes {
            let _ = writeln!(out, "\u{2020} {asset}: {justification}");
        }
    }

    let notes: Vec<&Finding> = report
        .findings
        .iter()
        .filter_map(AssetOutcome::finding)
        .filter(|f| f.context_notes.is_some())
        .collect();
    if !notes.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "## Context Notes");
        let _ = writeln!(out);
        for f in notes {
            let _ = writeln!(out, "- {}: {}", f.asset, f.context_notes.as_deref().unwrap_or(""));
        }
    }

    if !report.warnings.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "## Warnings");
        let _ = writeln!(out);
        for w in &report.warnings {
            let _ = writeln!(out, "- {w}");
        }
    }
    out
}

/// Renders a what-if delta in the requested format.
pub fn render_delta(delta: &DeltaReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => canonical_json(delta),
        ReportFormat::Markdown => {
            let mut out = String::new();
            let _ = writeln!(out, "# What-If Risk Delta");
            let _ = writeln!(out);
            if delta.changes.is_empty() {
                let _ = writeln!(out, "No comparable assets.");
            } else {
                let _ = writeln!(out, "| Asset | Before | After | Direction |");
                let _ = writeln!(out, "| --- | --- | --- | --- |");
                for c in &delta.changes {
                    let _ = writeln!(
                        out,
                        "| {} | {} | {} | {} |",
                        c.asset,
                        c.before.letter(),
                        c.after.letter(),
                        c.direction.as_str()
                    );
                }
            }
            if !delta.added.is_empty() {
                let _ = writeln!(out);
                let _ = writeln!(out, "- added: {}", delta.added.join(", "));
            }
            if !delta.removed.is_empty() {
                let _ = writeln!(out);
                let _ = writeln!(out, "- removed: {}", delta.removed.join(", "));
            }
            out
        }
    }
}

/// Current UTC time as an RFC 3339 timestamp with second precision.
fn utc_now_rfc3339() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let days = secs / 86_400;
    let rem = secs % 86_400;
    let (year, month, day) = civil_from_days(days as i64);
    format!(
        "{year:04}-{month:02}-{day:02}T{:02}:{:02}:{:02}Z",
        rem / 3600,
        (rem % 3600) / 60,
        rem % 60
    )
}

// standard days-to-civil-date conversion for a proleptic Gregorian calendar
fn civil_from_days(z: i64) -> (i64, u32, u32) {
    let z = z + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    (if m <= 2 { y + 1 } else { y }, m, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direction_follows_level_order() {
        assert_eq!(Direction::of(Level::High, Level::Medium), Direction::Improved);
        assert_eq!(Direction::of(Level::Low, Level::Low), Direction::Unchanged);
        assert_eq!(Direction::of(Level::Medium, Level::High), Direction::Worsened);
    }

    #[test]
    fn civil_date_conversion() {
        assert_eq!(civil_from_days(0), (1970, 1, 1));
        assert_eq!(civil_from_days(19_723), (2024, 1, 1));
    }
}
