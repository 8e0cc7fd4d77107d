//! Structured and human renderings of family reports.

use serde::Serialize;
use sha2::{Digest, Sha256};

use varmc_core::checker::{render_witness, FamilyReport, Verdict};
use varmc_core::{Config, ConfigSpace, Ctl, Skeleton, VerdictKind};

pub const REPORT_SCHEMA: &str = "varmc-report/1";

/// Exit code for a summary: any failure wins over inconclusive results.
pub fn exit_code(fails: usize, inconclusive: usize) -> i32 {
    if fails > 0 {
        1
    } else if inconclusive > 0 {
        2
    } else {
        0
    }
}

pub fn digest(text: &str) -> String {
    let hash = Sha256::digest(text.as_bytes());
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

/// Enabled features of `k`, sorted by name.
pub fn features(space: &ConfigSpace, k: Config) -> Vec<String> {
    let mut names = space.enabled_features(k);
    names.sort();
    names
}

#[derive(Debug, Serialize)]
pub struct PropertyOut {
    pub name: Option<String>,
    pub formula: String,
}

#[derive(Debug, Serialize)]
pub struct VariantOut {
    pub config: Vec<String>,
    pub verdict: String,
    pub reason: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct EvidenceOut {
    pub kind: &'static str,
    pub cell: Option<usize>,
    pub complete: bool,
    pub paths: Vec<String>,
    pub attributed: String,
    pub variants: Vec<Vec<String>>,
}

#[derive(Debug, Serialize)]
pub struct AbstractOut {
    pub config: Vec<String>,
    pub outcome: &'static str,
    pub may: String,
    pub must: String,
    pub concrete: usize,
}

#[derive(Debug, Serialize)]
pub struct CellOut {
    pub index: usize,
    pub constraint: String,
    pub abstraction: String,
    pub may_transitions: usize,
    pub must_transitions: usize,
    pub structural_errors: usize,
    pub abstract_configs: Vec<AbstractOut>,
}

#[derive(Debug, Default, Serialize)]
pub struct Timings {
    pub parse: f64,
    pub project: f64,
    #[serde(rename = "abstract")]
    pub abstraction: f64,
    pub check: f64,
}

#[derive(Debug, Serialize)]
pub struct SummaryOut {
    pub holds: usize,
    pub fails: usize,
    pub inconclusive: usize,
    pub exit_code: i32,
}

/// The `check` report; field order is the serialized key order.
#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub schema: &'static str,
    pub model: String,
    pub model_digest: String,
    pub property: PropertyOut,
    pub strategy: String,
    pub refined: bool,
    pub variants: Vec<VariantOut>,
    pub evidence: Vec<EvidenceOut>,
    pub cells: Vec<CellOut>,
    pub timings_ms: Timings,
    pub summary: SummaryOut,
}

pub struct Source<'a> {
    pub name: &'a str,
    pub text: &'a str,
    pub property_name: Option<&'a str>,
    pub property: &'a Ctl,
}

impl CheckReport {
    pub fn build(
        src: &Source<'_>,
        skel: &Skeleton,
        report: &FamilyReport,
        refined: bool,
        mut timings: Timings,
    ) -> CheckReport {
        let space = &report.space;
        let variants = report
            .verdicts
            .iter()
            .map(|(k, v)| VariantOut {
                config: features(space, *k),
                verdict: v.kind().to_string(),
                reason: match v {
                    Verdict::Inconclusive(r) => Some(r.clone()),
                    _ => None,
                },
            })
            .collect();
        let evidence = report
            .evidence
            .iter()
            .map(|e| EvidenceOut {
                kind: e.kind.as_str(),
                cell: e.cell,
                complete: e.witness.complete,
                paths: render_witness(skel, &e.witness),
                attributed: e.attributed.to_string(),
                variants: e.variants.iter().map(|k| features(space, *k)).collect(),
            })
            .collect();
        let cells: Vec<CellOut> = report
            .cells
            .iter()
            .map(|c| {
                timings.project += c.project_ms;
                timings.abstraction += c.abstract_ms;
                timings.check += c.check_ms;
                CellOut {
                    index: c.index,
                    constraint: c.constraint.to_string(),
                    abstraction: c.abstraction.to_string(),
                    may_transitions: c.may_transitions,
                    must_transitions: c.must_transitions,
                    structural_errors: c
                        .structural
                        .iter()
                        .filter(|d| d.severity == varmc_core::Severity::Error)
                        .count(),
                    abstract_configs: c
                        .abstract_configs
                        .iter()
                        .map(|a| AbstractOut {
                            config: split_rendered(&a.rendered),
                            outcome: a.outcome,
                            may: a.components.may.kind().to_string(),
                            must: a.components.must.kind().to_string(),
                            concrete: a.concrete.len(),
                        })
                        .collect(),
                }
            })
            .collect();
        let s = report.summary();
        CheckReport {
            schema: REPORT_SCHEMA,
            model: src.name.to_string(),
            model_digest: digest(src.text),
            property: PropertyOut {
                name: src.property_name.map(String::from),
                formula: src.property.to_string(),
            },
            strategy: report.strategy.clone(),
            refined,
            variants,
            evidence,
            cells,
            timings_ms: timings,
            summary: SummaryOut {
                holds: s.holds.len(),
                fails: s.fails.len(),
                inconclusive: s.inconclusive.len(),
                exit_code: exit_code(s.fails.len(), s.inconclusive.len()),
            },
        }
    }

    pub fn human(&self) -> String {
        let mut out = String::new();
        let short = self.model_digest.trim_start_matches("sha256:");
        out.push_str(&format!(
            "model     {} (sha256 {})\n",
            self.model,
            &short[..12.min(short.len())]
        ));
        match &self.property.name {
            Some(n) => out.push_str(&format!("property  {n} = {}\n", self.property.formula)),
            None => out.push_str(&format!("property  {}\n", self.property.formula)),
        }
        out.push_str(&format!(
            "strategy  {}{}\n\n",
            self.strategy,
            if self.refined {
                " (refined by brute force)"
            } else {
                ""
            }
        ));
        let width = self
            .variants
            .iter()
            .map(|v| braces(&v.config).len())
            .max()
            .unwrap_or(0)
            .max("variant".len());
        out.push_str(&format!("{:width$}  verdict\n", "variant"));
        for v in &self.variants {
            out.push_str(&format!("{:width$}  {}", braces(&v.config), v.verdict));
            if let Some(r) = &v.reason {
                out.push_str(&format!(" ({r})"));
            }
            out.push('\n');
        }
        if !self.evidence.is_empty() {
            out.push_str("\nevidence\n");
            for e in &self.evidence {
                let cell = e.cell.map(|c| format!(", cell {c}")).unwrap_or_default();
                out.push_str(&format!(
                    "  {}{cell}: attributed to {} ({} variants)\n",
                    e.kind,
                    e.attributed,
                    e.variants.len()
                ));
                for p in &e.paths {
                    out.push_str(&format!("    {p}\n"));
                }
            }
        }
        let t = &self.timings_ms;
        out.push_str(&format!(
            "\nsummary   {} holds, {} fails, {} inconclusive\n",
            self.summary.holds, self.summary.fails, self.summary.inconclusive
        ));
        out.push_str(&format!(
            "timings   parse {:.2} ms, project {:.2} ms, abstract {:.2} ms, check {:.2} ms\n",
            t.parse, t.project, t.abstraction, t.check
        ));
        out
    }
}

fn split_rendered(rendered: &str) -> Vec<String> {
    let mut names: Vec<String> = rendered
        .trim_matches(|ch| ch == '{' || ch == '}')
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect();
    names.sort();
    names
}

pub fn braces(features: &[String]) -> String {
    format!("{{{}}}", features.join(","))
}

/// Verdict counts of a report.
pub fn counts(report: &FamilyReport) -> (usize, usize, usize) {
    let mut c = (0, 0, 0);
    for (_, v) in &report.verdicts {
        match v.kind() {
            VerdictKind::Holds => c.0 += 1,
            VerdictKind::Fails => c.1 += 1,
            VerdictKind::Inconclusive => c.2 += 1,
        }
    }
    c
}
