//! Command-line driver.
//!
//! Exit codes: 0 on success with no high-risk finding, 2 when any finding
//! is high risk (usable as a CI gate), 1 on usage, IO, or validation
//! errors. All errors go to standard error with a `qrisk-error[CODE]:`
//! prefix.

use crate::engine::{
    assess_asset, assess_inventory, what_if, AssessmentConfig, Replacement, Substitution,
};
use crate::inventory::{load_inventory, HybridSpec};
use crate::kb::{
    default_kb_dir, load_kb_dir, KnowledgeBase, LoadOptions, LookupResult, RecordRef, Violation,
};
use crate::report::{canonical_json, render_delta, render_report, ReportFormat};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "qrisk",
    version,
    about = "Quantum-safe migration risk assessment",
    long_about = "Assesses a cryptographic inventory against a knowledge base of classical \
                  mechanisms, post-quantum candidates, protocols, certificates, and hybrid \
                  combiners, producing per-asset risk findings for the pre-, through-, and \
                  post-migration stages."
)]
struct Cli {
    /// Knowledge base directory (overrides QRISK_KB and the bundled data)
    #[arg(long, global = true, value_name = "DIR")]
    kb: Option<PathBuf>,
    /// Accept unknown fields in KB and inventory documents
    #[arg(long, global = true)]
    lax: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct OutputArgs {
    /// Output format
    #[arg(long, value_enum, default_value = "markdown")]
    format: ReportFormat,
    /// Write the report to a file instead of standard output
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct AssessArgs {
    /// Inventory file to assess
    #[arg(long, value_name = "PATH")]
    inventory: PathBuf,
    /// Quantum-threat horizon in years (must match a poll horizon)
    #[arg(long, value_name = "YEARS", default_value_t = 15)]
    horizon: u32,
    /// Abort on unresolvable references instead of reporting them
    #[arg(long)]
    fail_on_unknown: bool,
}

impl AssessArgs {
    fn config(&self) -> AssessmentConfig {
        let mut cfg = AssessmentConfig::with_horizon(self.horizon);
        cfg.fail_on_unknown = self.fail_on_unknown;
        cfg
    }
}

#[derive(Subcommand)]
enum Command {
    /// Assess an inventory and print the risk report
    Assess {
        #[command(flatten)]
        assess: AssessArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Add a generation timestamp to the report
        #[arg(long)]
        stamp: bool,
    },
    /// Validate the knowledge base documents
    Validate,
    /// List knowledge base record ids
    #[command(name = "kb-list", alias = "kb_list")]
    KbList {
        /// Restrict to one collection (mechanisms, attacks, protocols,
        /// certificates, combiners)
        collection: Option<String>,
    },
    /// Show one knowledge base record as JSON
    #[command(name = "kb-show", alias = "kb_show")]
    KbShow { id: String },
    /// Print the derivation trace behind one asset's finding
    Explain {
        #[command(flatten)]
        assess: AssessArgs,
        /// Asset id from the inventory
        asset: String,
    },
    /// Re-assess with assets replaced and report the risk deltas
    Whatif {
        #[command(flatten)]
        assess: AssessArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Replacement, either `asset=subject` or
        /// `asset=hybrid:comp1+comp2:combiner` (repeatable)
        #[arg(long = "replace", value_name = "SPEC", required = true)]
        replace: Vec<String>,
    },
}

fn fail(code: &str, message: &str) -> i32 {
    eprintln!("qrisk-error[{code}]: {message}");
    1
}

fn fail_violations(violations: &[Violation]) -> i32 {
    for v in violations {
        eprintln!("qrisk-error[{}]: {}: {}", v.code, v.location, v.message);
    }
    1
}

fn load_kb(path: Option<&Path>, lax: bool) -> Result<KnowledgeBase, i32> {
    let dir = path.map(Path::to_path_buf).unwrap_or_else(default_kb_dir);
    load_kb_dir(&dir, LoadOptions { strict: !lax })
        .map_err(|e| fail_violations(&e.violations))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), i32> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(path, text)
            .map_err(|e| fail("io-error", &format!("cannot write {}: {e}", path.display()))),
    }
}

fn parse_replacement(spec: &str) -> Result<Substitution, String> {
    let (asset, rhs) = spec
        .split_once('=')
        .ok_or_else(|| format!("replacement {spec:?} must look like asset=subject"))?;
    if asset.is_empty() || rhs.is_empty() {
        return Err(format!("replacement {spec:?} has an empty side"));
    }
    let replace_with = match rhs.strip_prefix("hybrid:") {
        None => Replacement::Subject(rhs.to_string()),
        Some(hybrid) => {
            let (components, combiner) = hybrid.rsplit_once(':').ok_or_else(|| {
                format!(
                    "hybrid replacement {spec:?} must look like \
                     asset=hybrid:comp1+comp2:combiner"
                )
            })?;
            let components: Vec<String> =
                components.split('+').map(str::to_string).collect();
            if components.len() < 2 || components.iter().any(String::is_empty) || combiner.is_empty() {
                return Err(format!(
                    "hybrid replacement {spec:?} needs two or more components and a combiner"
                ));
            }
            Replacement::Hybrid(HybridSpec { combiner: combiner.to_string(), components })
        }
    };
    Ok(Substitution { asset: asset.to_string(), replace_with })
}

/// Runs the CLI and returns the process exit code.
pub fn run<I>(argv: I) -> i32
where
    I: IntoIterator<Item = String>,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprint!("qrisk-error[usage]: {e}");
            return 1;
        }
        Err(e) => {
            // --help and --version
            print!("{e}");
            return 0;
        }
    };
    let lax = cli.lax;
    let kb_path = cli.kb.as_deref();

    match cli.command {
        Command::Validate => {
            let dir = kb_path.map(Path::to_path_buf).unwrap_or_else(default_kb_dir);
            match load_kb_dir(&dir, LoadOptions { strict: !lax }) {
                Ok(_) => {
                    println!("0 violations");
                    0
                }
                Err(e) => {
                    println!("{} violations", e.violations.len());
                    fail_violations(&e.violations)
                }
            }
        }
        Command::KbList { collection } => {
            let kb = match load_kb(kb_path, lax) {
                Ok(kb) => kb,
                Err(code) => return code,
            };
            let collections: [(&str, Vec<&String>); 5] = [
                ("mechanisms", kb.mechanisms.keys().collect()),
                ("attacks", kb.attacks.keys().collect()),
                ("protocols", kb.protocols.keys().collect()),
                ("certificates", kb.certificates.keys().collect()),
                ("combiners", kb.combiners.keys().collect()),
            ];
            if let Some(wanted) = &collection {
                if !collections.iter().any(|(name, _)| name == wanted) {
                    return fail(
                        "usage",
                        &format!(
                            "unknown collection {wanted:?}; expected one of mechanisms, \
                             attacks, protocols, certificates, combiners"
                        ),
                    );
                }
            }
            for (name, ids) in collections {
                if collection.as_deref().is_some_and(|w| w != name) {
                    continue;
                }
                println!("{name} ({}):", ids.len());
                for id in ids {
                    println!("  {id}");
                }
            }
            0
        }
        Command::KbShow { id } => {
            let kb = match load_kb(kb_path, lax) {
                Ok(kb) => kb,
                Err(code) => return code,
            };
            match kb.lookup(&id) {
                LookupResult::Found(record) => {
                    let body = match record {
                        RecordRef::Mechanism(r) => canonical_json(&serde_json::json!({
                            "kind": "mechanism", "record": r
                        })),
                        RecordRef::Attack(r) => canonical_json(&serde_json::json!({
                            "kind": "attack", "record": r
                        })),
                        RecordRef::Certificate(r) => canonical_json(&serde_json::json!({
                            "kind": "certificate", "record": r
                        })),
                        RecordRef::Protocol(r) => canonical_json(&serde_json::json!({
                            "kind": "protocol", "record": r
                        })),
                        RecordRef::Combiner(r) => canonical_json(&serde_json::json!({
                            "kind": "combiner", "record": r
                        })),
                    };
                    print!("{body}");
                    0
                }
                LookupResult::NotFound { suggestions } => {
                    let hint = if suggestions.is_empty() {
                        String::new()
                    } else {
                        format!("; did you mean: {}", suggestions.join(", "))
                    };
                    fail("not-found", &format!("no record with id {id:?}{hint}"))
                }
            }
        }
        Command::Assess { assess, output, stamp } => {
            let kb = match load_kb(kb_path, lax) {
                Ok(kb) => kb,
                Err(code) => return code,
            };
            let inv = match load_inventory(&assess.inventory, !lax) {
                Ok(inv) => inv,
                Err(violations) => return fail_violations(&violations),
            };
            let mut report = match assess_inventory(&inv, &kb, &assess.config()) {
                Ok(report) => report,
                Err(e) => return fail(&e.code, &e.message),
            };
            if stamp {
                report.stamp();
            }
            if let Err(code) = emit(&render_report(&report, output.format), output.out.as_deref())
            {
                return code;
            }
            if report.has_high_risk() {
                2
            } else {
                0
            }
        }
        Command::Explain { assess, asset } => {
            let kb = match load_kb(kb_path, lax) {
                Ok(kb) => kb,
                Err(code) => return code,
            };
            let inv = match load_inventory(&assess.inventory, !lax) {
                Ok(inv) => inv,
                Err(violations) => return fail_violations(&violations),
            };
            let Some(target) = inv.asset(&asset) else {
                return fail(
                    "unknown-asset",
                    &format!("inventory {:?} has no asset {asset:?}", inv.name),
                );
            };
            match assess_asset(target, &inv, &kb, &assess.config()) {
                Err(e) => fail(&e.code, &e.message),
                Ok(finding) => {
                    println!(
                        "asset {} ({}, {}) -> subject {}",
                        finding.asset, target.kind, finding.stage, finding.subject
                    );
                    println!(
                        "likelihood {}, impact {}, risk {}",
                        finding.likelihood, finding.impact, finding.risk
                    );
                    println!("derivation:");
                    for (i, step) in finding.derivation.iter().enumerate() {
                        println!("  {}. {step}", i + 1);
                    }
                    0
                }
            }
        }
        Command::Whatif { assess, output, replace } => {
            let kb = match load_kb(kb_path, lax) {
                Ok(kb) => kb,
                Err(code) => return code,
            };
            let inv = match load_inventory(&assess.inventory, !lax) {
                Ok(inv) => inv,
                Err(violations) => return fail_violations(&violations),
            };
            let mut substitutions = Vec::new();
            for spec in &replace {
                match parse_replacement(spec) {
                    Ok(sub) => substitutions.push(sub),
                    Err(message) => return fail("usage", &message),
                }
            }
            let delta = match what_if(&inv, &substitutions, &kb, &assess.config()) {
                Ok(delta) => delta,
                Err(e) => return fail(&e.code, &e.message),
            };
            if let Err(code) = emit(&render_delta(&delta, output.format), output.out.as_deref()) {
                return code;
            }
            if delta.has_high_after() {
                2
            } else {
                0
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replacement_specs_parse() {
        let sub = parse_replacement("tls=hybrid:tls_1_3+kemtls:composite_protocol").unwrap();
        assert_eq!(sub.asset, "tls");
        match sub.replace_with {
            Replacement::Hybrid(spec) => {
                assert_eq!(spec.combiner, "composite_protocol");
                assert_eq!(spec.components, vec!["tls_1_3", "kemtls"]);
            }
            Replacement::Subject(_) => panic!("expected hybrid replacement"),
        }
        let sub = parse_replacement("cipher=aes_256").unwrap();
        assert!(matches!(sub.replace_with, Replacement::Subject(s) if s == "aes_256"));
        assert!(parse_replacement("nope").is_err());
        assert!(parse_replacement("a=hybrid:only_one:comb").is_err());
    }
}
