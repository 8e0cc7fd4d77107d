//! CTL model checking of single systems, modal systems and whole families.

mod ctl;
mod family;
mod sat;
mod witness;

use std::collections::BTreeSet;

use thiserror::Error;

pub use ctl::{Ctl, PathFormula};
pub use family::{
    check_family_abstract, check_fts_brute_force, refine_brute, CellRecord, CheckOptions, Evidence,
    EvidenceKind, FamilyReport, Summary, DEFAULT_BRUTE_BUDGET,
};
pub use sat::{Graph, Labeler, Semantics};
pub use witness::Witness;

use crate::featexpr::{FeatError, FeatExpr};
use crate::models::{Fts, ModelError, Mts, Path, Skeleton, Transition, Ts};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("unknown atomic proposition `{0}`")]
    UnknownProp(String),
    #[error("plan is not a partition: configuration {config} is covered by {covered} cells")]
    NotPartition { config: String, covered: usize },
    #[error("plan cell {index} (`{constraint}`) selects no valid configuration")]
    EmptyCell { index: usize, constraint: String },
    #[error("plan is empty")]
    EmptyPlan,
    #[error("brute force refused: {configs} variants exceed the budget of {budget}")]
    BudgetExceeded { configs: usize, budget: usize },
    #[error("path step {step} is not a transition of the model")]
    PathNotInModel { step: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Feat(#[from] FeatError),
}

/// Outcome of checking one system or one variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds(Option<Witness>),
    Fails(Option<Witness>),
    Inconclusive(String),
}

/// [`Verdict`] without its evidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VerdictKind {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    pub fn kind(&self) -> VerdictKind {
        match self {
            Verdict::Holds(_) => VerdictKind::Holds,
            Verdict::Fails(_) => VerdictKind::Fails,
            Verdict::Inconclusive(_) => VerdictKind::Inconclusive,
        }
    }

    pub fn evidence(&self) -> Option<&Witness> {
        match self {
            Verdict::Holds(w) | Verdict::Fails(w) => w.as_ref(),
            Verdict::Inconclusive(_) => None,
        }
    }
}

impl std::fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VerdictKind::Holds => "holds",
            VerdictKind::Fails => "fails",
            VerdictKind::Inconclusive => "inconclusive",
        })
    }
}

fn nontrivial(w: Option<Witness>) -> Option<Witness> {
    w.filter(|w| w.paths().any(|p| p.states.len() > 1))
}

/// Two-valued check under a reading where `Sat(¬Φ)` is the complement of
/// `Sat(Φ)`.
fn check_two_valued(labeler: &Labeler<'_>, phi: &Ctl) -> Result<Verdict, CheckError> {
    labeler.resolve(phi)?;
    let sat = labeler.sat(phi);
    let skel = labeler.skel;
    match skel.initial().iter().find(|s| !sat.contains(**s)) {
        None => Ok(Verdict::Holds(nontrivial(
            labeler.witness(phi, skel.initial()[0]),
        ))),
        Some(&s) => Ok(Verdict::Fails(nontrivial(
            labeler.witness(&phi.negate_nnf(), s),
        ))),
    }
}

/// Checks a transition system; deadlocks are completed with idle loops.
pub fn check_ts(ts: &Ts, phi: &Ctl) -> Result<Verdict, CheckError> {
    let g = Graph::new(ts.skeleton.num_states(), &ts.transitions, true);
    check_two_valued(&Labeler::new(&ts.skeleton, Semantics::Single(&g)), phi)
}

/// The graphs of an MTS: may completed with idle loops, must left partial.
pub fn mts_graphs(mts: &Mts) -> (Graph, Graph) {
    let n = mts.skeleton.num_states();
    (
        Graph::new(n, &mts.may, true),
        Graph::new(n, &mts.must, false),
    )
}

/// Modal reference semantics: `A` over may-executions, `E` over
/// must-executions.
pub fn check_mts_direct(mts: &Mts, phi: &Ctl) -> Result<Verdict, CheckError> {
    let (may, must) = mts_graphs(mts);
    let l = Labeler::new(
        &mts.skeleton,
        Semantics::Modal {
            may: &may,
            must: &must,
        },
    );
    l.resolve(phi)?;
    let sat = l.sat(phi);
    let initial = mts.skeleton.initial();
    if l.holds_initially(&sat) {
        Ok(Verdict::Holds(nontrivial(l.witness(phi, initial[0]))))
    } else {
        let neg = phi.negate_nnf();
        let s = *initial
            .iter()
            .find(|s| !sat.contains(**s))
            .expect("some initial fails");
        Ok(Verdict::Fails(nontrivial(l.witness(&neg, s))))
    }
}

/// Separate checks of the may graph and the must graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentChecks {
    pub may: Verdict,
    pub must: Verdict,
}

impl ComponentChecks {
    /// Holds iff both components hold.
    pub fn verdict(&self) -> VerdictKind {
        if self.may.kind() == VerdictKind::Holds && self.must.kind() == VerdictKind::Holds {
            VerdictKind::Holds
        } else {
            VerdictKind::Fails
        }
    }
}

/// Checks the may graph and the must graph as plain systems.
pub fn check_mts_components(mts: &Mts, phi: &Ctl) -> Result<ComponentChecks, CheckError> {
    let (may, must) = mts_graphs(mts);
    Ok(ComponentChecks {
        may: check_two_valued(&Labeler::new(&mts.skeleton, Semantics::Single(&may)), phi)?,
        must: check_two_valued(&Labeler::new(&mts.skeleton, Semantics::Single(&must)), phi)?,
    })
}

/// Verdict of the two-component reduction.
pub fn check_mts_two_component(mts: &Mts, phi: &Ctl) -> Result<VerdictKind, CheckError> {
    Ok(check_mts_components(mts, phi)?.verdict())
}

/// Result of the sound family reading of an MTS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SoundOutcome {
    /// Every total refinement satisfies the formula.
    Proved(Option<Witness>),
    /// Every total refinement violates it; evidence for the negation.
    Refuted(Witness),
    Unknown,
}

/// Decides `phi` for all total refinements of `mts` at once, when possible.
pub fn check_mts_sound(mts: &Mts, phi: &Ctl) -> Result<SoundOutcome, CheckError> {
    let (may, must) = mts_graphs(mts);
    let l = Labeler::new(
        &mts.skeleton,
        Semantics::Hyper {
            may: &may,
            must: &must,
        },
    );
    l.resolve(phi)?;
    let initial = mts.skeleton.initial();
    let sat = l.sat(phi);
    if l.holds_initially(&sat) {
        return Ok(SoundOutcome::Proved(nontrivial(l.witness(phi, initial[0]))));
    }
    let neg = phi.negate_nnf();
    let refuted = l.sat(&neg);
    match initial.iter().find(|s| refuted.contains(**s)) {
        Some(&s) => Ok(SoundOutcome::Refuted(
            l.witness(&neg, s).expect("refuting state is in Sat"),
        )),
        None => Ok(SoundOutcome::Unknown),
    }
}

/// The feature expression characterizing the variants that can execute
/// every step of `paths`: the conjunction of the distinct steps' presence
/// conditions. An idle step is executable where an explicit idle loop is
/// present or the state is a deadlock.
pub fn attribute_paths<'p>(
    fts: &Fts,
    paths: impl IntoIterator<Item = &'p Path>,
) -> Result<FeatExpr, CheckError> {
    let mut seen: BTreeSet<Transition> = BTreeSet::new();
    let mut conds: Vec<FeatExpr> = Vec::new();
    for p in paths {
        for t in p.steps() {
            if !seen.insert(t) {
                continue;
            }
            let cond = if t.is_idle() {
                fts.stutter_condition(t.source)
            } else {
                match fts.transitions.iter().find(|ft| ft.transition == t) {
                    Some(ft) => ft.presence.clone(),
                    None => {
                        return Err(CheckError::PathNotInModel {
                            step: fts.skeleton.render_transition(&t),
                        })
                    }
                }
            };
            let cond = cond.simplify();
            if !conds.contains(&cond) {
                conds.push(cond);
            }
        }
    }
    Ok(FeatExpr::conjunction(conds).simplify())
}

/// [`attribute_paths`] for a single path.
pub fn attribute_counterexample(fts: &Fts, path: &Path) -> Result<FeatExpr, CheckError> {
    attribute_paths(fts, [path])
}

/// Renders every path of a witness, main path first.
pub fn render_witness(skel: &Skeleton, w: &Witness) -> Vec<String> {
    w.paths().map(|p| p.render(skel)).collect()
}
