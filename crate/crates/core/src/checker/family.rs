//! Family-level verification: per-variant brute force and abstraction-based
//! checking over a partition of the configuration space.

use std::collections::BTreeMap;
use std::time::Instant;

use super::ctl::Ctl;
use super::sat::{Graph, Labeler, Semantics};
use super::{
    attribute_paths, check_mts_components, check_mts_sound, check_ts, CheckError, ComponentChecks,
    SoundOutcome, Verdict, VerdictKind, Witness,
};
use crate::exec::Exec;
use crate::featexpr::{Config, ConfigSpace, FeatExpr};
use crate::galois::Abstraction;
use crate::models::{Diagnostic, Fts, Validate};

/// Default limit on the number of variants brute force will enumerate.
pub const DEFAULT_BRUTE_BUDGET: usize = 4096;

#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    pub exec: Exec,
    pub brute_budget: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            exec: Exec::default(),
            brute_budget: DEFAULT_BRUTE_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvidenceKind {
    /// Counterexample of one or more concrete variants.
    VariantCounterexample,
    /// Abstract evidence for the negation valid in every refinement.
    AbstractRefutation,
    /// Abstract counterexample replayed on the variants it is attributed to.
    AbstractCounterexample,
    /// Abstract witness of an existential property proved for every refinement.
    AbstractWitness,
}

impl EvidenceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EvidenceKind::VariantCounterexample => "variant-counterexample",
            EvidenceKind::AbstractRefutation => "abstract-refutation",
            EvidenceKind::AbstractCounterexample => "abstract-counterexample",
            EvidenceKind::AbstractWitness => "abstract-witness",
        }
    }
}

/// A diagnostic path together with the variants it concerns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evidence {
    pub kind: EvidenceKind,
    pub cell: Option<usize>,
    pub witness: Witness,
    /// Conjunction of the presence conditions along all witness paths.
    pub attributed: FeatExpr,
    /// Variants whose verdict this evidence established.
    pub variants: Vec<Config>,
}

/// What happened at one abstract configuration of one cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractRecord {
    pub config: Config,
    pub rendered: String,
    pub outcome: &'static str,
    pub components: ComponentChecks,
    pub concrete: Vec<Config>,
}

/// Per-cell bookkeeping of an abstract run.
#[derive(Debug, Clone)]
pub struct CellRecord {
    pub index: usize,
    pub constraint: FeatExpr,
    pub abstraction: Abstraction,
    pub may_transitions: usize,
    pub must_transitions: usize,
    /// Validation findings on the produced MFTS.
    pub structural: Vec<Diagnostic>,
    pub abstract_configs: Vec<AbstractRecord>,
    pub project_ms: f64,
    pub abstract_ms: f64,
    pub check_ms: f64,
}

/// Per-variant verdicts of one strategy.
#[derive(Debug, Clone)]
pub struct FamilyReport {
    pub strategy: String,
    pub space: ConfigSpace,
    /// Sorted by configuration; total on the valid configurations.
    pub verdicts: Vec<(Config, Verdict)>,
    pub evidence: Vec<Evidence>,
    pub cells: Vec<CellRecord>,
}

/// The partition of the valid configurations by verdict.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Summary {
    pub holds: Vec<Config>,
    pub fails: Vec<Config>,
    pub inconclusive: Vec<Config>,
}

impl FamilyReport {
    pub fn summary(&self) -> Summary {
        let mut s = Summary::default();
        for (k, v) in &self.verdicts {
            match v.kind() {
                VerdictKind::Holds => s.holds.push(*k),
                VerdictKind::Fails => s.fails.push(*k),
                VerdictKind::Inconclusive => s.inconclusive.push(*k),
            }
        }
        s
    }

    pub fn verdict_of(&self, k: Config) -> Option<&Verdict> {
        self.verdicts
            .binary_search_by_key(&k, |(c, _)| *c)
            .ok()
            .map(|i| &self.verdicts[i].1)
    }

    /// Verdict kinds by configuration.
    pub fn kinds(&self) -> BTreeMap<Config, VerdictKind> {
        self.verdicts.iter().map(|(k, v)| (*k, v.kind())).collect()
    }
}

fn resolve_atoms(fts: &Fts, phi: &Ctl) -> Result<(), CheckError> {
    for p in phi.atoms() {
        fts.skeleton
            .prop_id(&p)
            .map_err(|_| CheckError::UnknownProp(p.clone()))?;
    }
    Ok(())
}

/// Checks every valid variant separately.
pub fn check_fts_brute_force(
    fts: &Fts,
    phi: &Ctl,
    opts: &CheckOptions,
) -> Result<FamilyReport, CheckError> {
    let configs = fts.space.valid_configs();
    if configs.len() > opts.brute_budget {
        return Err(CheckError::BudgetExceeded {
            configs: configs.len(),
            budget: opts.brute_budget,
        });
    }
    resolve_atoms(fts, phi)?;
    let results = opts.exec.map(configs, |k| {
        fts.project_variant(*k)
            .map_err(CheckError::from)
            .and_then(|ts| check_ts(&ts, phi))
    });
    let mut verdicts = Vec::with_capacity(configs.len());
    for (k, r) in configs.iter().zip(results) {
        verdicts.push((*k, r?));
    }
    let mut grouped: Vec<(Witness, Vec<Config>)> = Vec::new();
    for (k, v) in &verdicts {
        if let Verdict::Fails(Some(w)) = v {
            match grouped.iter_mut().find(|(g, _)| g == w) {
                Some((_, ks)) => ks.push(*k),
                None => grouped.push((w.clone(), vec![*k])),
            }
        }
    }
    let mut evidence = Vec::with_capacity(grouped.len());
    for (witness, variants) in grouped {
        evidence.push(Evidence {
            kind: EvidenceKind::VariantCounterexample,
            cell: None,
            attributed: attribute_paths(fts, witness.paths())?,
            witness,
            variants,
        });
    }
    Ok(FamilyReport {
        strategy: "brute".into(),
        space: fts.space.clone(),
        verdicts,
        evidence,
        cells: Vec::new(),
    })
}

fn check_partition(
    space: &ConfigSpace,
    plan: &[(FeatExpr, Abstraction)],
) -> Result<(), CheckError> {
    if plan.is_empty() {
        return Err(CheckError::EmptyPlan);
    }
    let compiled = plan
        .iter()
        .map(|(psi, _)| space.compile(psi))
        .collect::<Result<Vec<_>, _>>()?;
    let mut sizes = vec![0usize; plan.len()];
    for &k in space.valid_configs() {
        let covering: Vec<usize> = (0..plan.len()).filter(|i| compiled[*i].eval(k)).collect();
        if covering.len() != 1 {
            return Err(CheckError::NotPartition {
                config: space.render(k),
                covered: covering.len(),
            });
        }
        sizes[covering[0]] += 1;
    }
    if let Some(index) = sizes.iter().position(|n| *n == 0) {
        return Err(CheckError::EmptyCell {
            index,
            constraint: plan[index].0.to_string(),
        });
    }
    Ok(())
}

struct CellOutcome {
    record: CellRecord,
    verdicts: Vec<(Config, Verdict)>,
    evidence: Vec<Evidence>,
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Checks the family through one abstraction per partition cell.
///
/// Per abstract configuration: a sound proof marks its variants Holds, a
/// sound refutation marks them Fails, and otherwise a universal property's
/// may-counterexample is attributed and replayed; variants it does not
/// cover stay Inconclusive.
pub fn check_family_abstract(
    fts: &Fts,
    phi: &Ctl,
    plan: &[(FeatExpr, Abstraction)],
    opts: &CheckOptions,
) -> Result<FamilyReport, CheckError> {
    check_partition(&fts.space, plan)?;
    resolve_atoms(fts, phi)?;
    let completed = fts.complete()?;
    let indexed: Vec<(usize, &(FeatExpr, Abstraction))> = plan.iter().enumerate().collect();
    let outcomes = opts.exec.map(&indexed, |(index, (psi, a))| {
        check_cell(&completed, phi, *index, psi, a, opts.exec)
    });
    let mut verdicts = Vec::new();
    let mut evidence = Vec::new();
    let mut cells = Vec::new();
    for o in outcomes {
        let o = o?;
        verdicts.extend(o.verdicts);
        evidence.extend(o.evidence);
        cells.push(o.record);
    }
    verdicts.sort_by_key(|(k, _)| *k);
    let strategy = plan
        .iter()
        .map(|(psi, a)| format!("[{psi}] {a}"))
        .collect::<Vec<_>>()
        .join("; ");
    Ok(FamilyReport {
        strategy,
        space: fts.space.clone(),
        verdicts,
        evidence,
        cells,
    })
}

fn check_cell(
    completed: &Fts,
    phi: &Ctl,
    index: usize,
    psi: &FeatExpr,
    a: &Abstraction,
    exec: Exec,
) -> Result<CellOutcome, CheckError> {
    let t0 = Instant::now();
    let sub = completed.project_subset(psi)?;
    let project_ms = ms_since(t0);
    let t1 = Instant::now();
    let (mfts, abs) = sub.abstract_fts_mapped(a)?;
    let structural = mfts.validate();
    let abstract_ms = ms_since(t1);
    let t2 = Instant::now();
    let neg = phi.negate_nnf();

    let per_abstract = exec.map(mfts.space.valid_configs(), |kp| {
        let concrete: Vec<Config> = sub
            .space
            .valid_configs()
            .iter()
            .copied()
            .filter(|k| abs.map(*k) == *kp)
            .collect();
        let mts = mfts.project_variant(*kp)?;
        let components = check_mts_components(&mts, phi)?;
        let mut verdicts = Vec::with_capacity(concrete.len());
        let mut evidence = Vec::new();
        let outcome = match check_mts_sound(&mts, phi)? {
            SoundOutcome::Proved(w) => {
                verdicts.extend(concrete.iter().map(|k| (*k, Verdict::Holds(w.clone()))));
                if let Some(w) = w {
                    evidence.push(Evidence {
                        kind: EvidenceKind::AbstractWitness,
                        cell: Some(index),
                        attributed: attribute_paths(completed, w.paths())?,
                        witness: w,
                        variants: concrete.clone(),
                    });
                }
                "proved"
            }
            SoundOutcome::Refuted(w) => {
                verdicts.extend(
                    concrete
                        .iter()
                        .map(|k| (*k, Verdict::Fails(Some(w.clone())))),
                );
                evidence.push(Evidence {
                    kind: EvidenceKind::AbstractRefutation,
                    cell: Some(index),
                    attributed: attribute_paths(completed, w.paths())?,
                    witness: w,
                    variants: concrete.clone(),
                });
                "refuted"
            }
            SoundOutcome::Unknown => {
                let replayed = if phi.is_universal() {
                    may_counterexample(&mts, phi, &neg)
                } else {
                    None
                };
                match replayed {
                    Some(w) => {
                        let attributed = attribute_paths(completed, w.paths())?;
                        let test = sub.space.compile(&attributed)?;
                        let mut hit = Vec::new();
                        for k in &concrete {
                            if test.eval(*k) {
                                hit.push(*k);
                                verdicts.push((*k, Verdict::Fails(Some(w.clone()))));
                            } else {
                                verdicts.push((
                                    *k,
                                    Verdict::Inconclusive(
                                        "possibly spurious abstract counterexample".into(),
                                    ),
                                ));
                            }
                        }
                        if !hit.is_empty() {
                            evidence.push(Evidence {
                                kind: EvidenceKind::AbstractCounterexample,
                                cell: Some(index),
                                witness: w,
                                attributed,
                                variants: hit,
                            });
                        }
                        "counterexample"
                    }
                    None => {
                        verdicts.extend(concrete.iter().map(|k| {
                            (
                                *k,
                                Verdict::Inconclusive("abstraction too coarse to decide".into()),
                            )
                        }));
                        "unknown"
                    }
                }
            }
        };
        Ok::<_, CheckError>((
            AbstractRecord {
                config: *kp,
                rendered: mfts.space.render(*kp),
                outcome,
                components,
                concrete,
            },
            verdicts,
            evidence,
        ))
    });

    let mut record = CellRecord {
        index,
        constraint: psi.clone(),
        abstraction: a.clone(),
        may_transitions: mfts.may.len(),
        must_transitions: mfts.must.len(),
        structural,
        abstract_configs: Vec::new(),
        project_ms,
        abstract_ms,
        check_ms: 0.0,
    };
    let mut verdicts = Vec::new();
    let mut evidence = Vec::new();
    for r in per_abstract {
        let (rec, vs, ev) = r?;
        record.abstract_configs.push(rec);
        verdicts.extend(vs);
        evidence.extend(ev);
    }
    record.check_ms = ms_since(t2);
    Ok(CellOutcome {
        record,
        verdicts,
        evidence,
    })
}

/// Evidence for `neg` on the may graph read as a plain system.
fn may_counterexample(mts: &crate::models::Mts, phi: &Ctl, neg: &Ctl) -> Option<Witness> {
    let may = Graph::new(mts.skeleton.num_states(), &mts.may, true);
    let l = Labeler::new(&mts.skeleton, Semantics::Single(&may));
    let sat = l.sat(phi);
    let s = *mts.skeleton.initial().iter().find(|s| !sat.contains(**s))?;
    l.witness(neg, s).filter(|w| w.complete)
}

/// Resolves Inconclusive variants by checking them one by one.
pub fn refine_brute(
    report: &FamilyReport,
    fts: &Fts,
    phi: &Ctl,
) -> Result<FamilyReport, CheckError> {
    let mut out = report.clone();
    for (k, v) in out.verdicts.iter_mut() {
        if v.kind() == VerdictKind::Inconclusive {
            *v = check_ts(&fts.project_variant(*k)?, phi)?;
        }
    }
    out.strategy = format!("{} +refine", report.strategy);
    Ok(out)
}
