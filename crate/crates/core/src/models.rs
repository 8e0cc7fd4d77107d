//! Transition systems with and without variability and modality.
//!
//! States, actions, atomic propositions, labels and initial states live in a
//! shared [`Skeleton`]; projection and abstraction only ever change the
//! transition relations and the configuration space, so derived systems
//! share the skeleton of their origin.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::featexpr::{Config, ConfigSpace, FeatError, FeatExpr};
use crate::galois::{
    abstract_space, alpha_may, alpha_must, AbstractSpace, Abstraction, GaloisError,
};

pub type StateId = usize;
pub type ActionId = usize;
pub type PropId = usize;

/// Reserved action of idle self-loops that complete deadlocks.
pub const STUTTER: ActionId = usize::MAX;
/// Display name of [`STUTTER`].
pub const STUTTER_NAME: &str = "#stutter";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("unknown atomic proposition `{0}`")]
    UnknownProp(String),
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("no initial state")]
    NoInitial,
    #[error("state id {0} out of range")]
    StateOutOfRange(StateId),
    #[error("action id {0} out of range")]
    ActionOutOfRange(ActionId),
    #[error("idle transition must be a self-loop on state `{0}`")]
    IdleNotSelfLoop(String),
    #[error("configuration {0} is not valid in this space")]
    InvalidConfig(String),
    #[error("configuration space is empty")]
    EmptyConfigSpace,
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error(transparent)]
    Feat(#[from] FeatError),
    #[error(transparent)]
    Galois(#[from] GaloisError),
}

/// The variability-independent part of a system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    states: Vec<String>,
    actions: Vec<String>,
    props: Vec<String>,
    /// Sorted proposition ids per state.
    labels: Vec<Vec<PropId>>,
    initial: Vec<StateId>,
}

impl Skeleton {
    /// `labels[s]` names the propositions of state `s`; `props` may declare
    /// extra propositions that label no state.
    pub fn new(
        states: Vec<String>,
        actions: Vec<String>,
        props: Vec<String>,
        labels: Vec<Vec<String>>,
        initial: Vec<StateId>,
    ) -> Result<Self, ModelError> {
        unique("state", &states)?;
        unique("action", &actions)?;
        let mut all_props: Vec<String> = props;
        for l in labels.iter().flatten() {
            if !all_props.contains(l) {
                all_props.push(l.clone());
            }
        }
        unique("proposition", &all_props)?;
        if labels.len() != states.len() {
            return Err(ModelError::StateOutOfRange(labels.len()));
        }
        let labels = labels
            .into_iter()
            .map(|ls| {
                let mut ids: Vec<PropId> = ls
                    .iter()
                    .map(|l| {
                        all_props
                            .iter()
                            .position(|p| p == l)
                            .expect("collected above")
                    })
                    .collect();
                ids.sort_unstable();
                ids.dedup();
                ids
            })
            .collect();
        let mut initial = initial;
        initial.sort_unstable();
        initial.dedup();
        if initial.is_empty() {
            return Err(ModelError::NoInitial);
        }
        if let Some(&bad) = initial.iter().find(|s| **s >= states.len()) {
            return Err(ModelError::StateOutOfRange(bad));
        }
        Ok(Skeleton {
            states,
            actions,
            props: all_props,
            labels,
            initial,
        })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s]
    }

    pub fn state_id(&self, name: &str) -> Result<StateId, ModelError> {
        self.states
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ModelError::UnknownState(name.to_string()))
    }

    pub fn action_names(&self) -> &[String] {
        &self.actions
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        if a == STUTTER {
            STUTTER_NAME
        } else {
            &self.actions[a]
        }
    }

    pub fn action_id(&self, name: &str) -> Result<ActionId, ModelError> {
        if name == STUTTER_NAME {
            return Ok(STUTTER);
        }
        self.actions
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ModelError::UnknownAction(name.to_string()))
    }

    pub fn props(&self) -> &[String] {
        &self.props
    }

    pub fn prop_id(&self, name: &str) -> Result<PropId, ModelError> {
        self.props
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ModelError::UnknownProp(name.to_string()))
    }

    pub fn labels(&self, s: StateId) -> &[PropId] {
        &self.labels[s]
    }

    pub fn label_names(&self, s: StateId) -> Vec<&str> {
        self.labels[s]
            .iter()
            .map(|p| self.props[*p].as_str())
            .collect()
    }

    pub fn has_label(&self, s: StateId, p: PropId) -> bool {
        self.labels[s].binary_search(&p).is_ok()
    }

    pub fn initial(&self) -> &[StateId] {
        &self.initial
    }

    pub fn is_initial(&self, s: StateId) -> bool {
        self.initial.binary_search(&s).is_ok()
    }

    fn check_transition(&self, t: &Transition) -> Result<(), ModelError> {
        for s in [t.source, t.target] {
            if s >= self.states.len() {
                return Err(ModelError::StateOutOfRange(s));
            }
        }
        if t.action == STUTTER {
            if t.source != t.target {
                return Err(ModelError::IdleNotSelfLoop(self.states[t.source].clone()));
            }
        } else if t.action >= self.actions.len() {
            return Err(ModelError::ActionOutOfRange(t.action));
        }
        Ok(())
    }

    /// `src -act-> tgt` with names.
    pub fn render_transition(&self, t: &Transition) -> String {
        format!(
            "{} -{}-> {}",
            self.state_name(t.source),
            self.action_name(t.action),
            self.state_name(t.target)
        )
    }
}

fn unique(kind: &'static str, names: &[String]) -> Result<(), ModelError> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(ModelError::Duplicate {
                kind,
                name: n.clone(),
            });
        }
    }
    Ok(())
}

/// A labelled edge; equality is on the triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub source: StateId,
    pub action: ActionId,
    pub target: StateId,
}

impl Transition {
    pub fn new(source: StateId, action: ActionId, target: StateId) -> Self {
        Transition {
            source,
            action,
            target,
        }
    }

    pub fn idle(state: StateId) -> Self {
        Transition::new(state, STUTTER, state)
    }

    pub fn is_idle(&self) -> bool {
        self.action == STUTTER
    }
}

/// A transition guarded by a presence condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeaturedTransition {
    pub transition: Transition,
    pub presence: FeatExpr,
}

/// Merges duplicate triples by disjoining their conditions; keeps first-seen
/// order.
fn merge_featured(
    skel: &Skeleton,
    items: Vec<FeaturedTransition>,
) -> Result<Vec<FeaturedTransition>, ModelError> {
    let mut index: BTreeMap<Transition, usize> = BTreeMap::new();
    let mut out: Vec<FeaturedTransition> = Vec::with_capacity(items.len());
    for ft in items {
        skel.check_transition(&ft.transition)?;
        match index.get(&ft.transition) {
            Some(&i) => {
                let prev = std::mem::replace(&mut out[i].presence, FeatExpr::False);
                out[i].presence = FeatExpr::or(prev, ft.presence);
            }
            None => {
                index.insert(ft.transition, out.len());
                out.push(ft);
            }
        }
    }
    Ok(out)
}

fn dedup_plain(skel: &Skeleton, items: Vec<Transition>) -> Result<Vec<Transition>, ModelError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(items.len());
    for t in items {
        skel.check_transition(&t)?;
        if seen.insert(t) {
            out.push(t);
        }
    }
    Ok(out)
}

/// Plain transition system.
#[derive(Debug, Clone)]
pub struct Ts {
    pub skeleton: Arc<Skeleton>,
    pub transitions: Vec<Transition>,
}

impl Ts {
    pub fn new(skeleton: Arc<Skeleton>, transitions: Vec<Transition>) -> Result<Self, ModelError> {
        let transitions = dedup_plain(&skeleton, transitions)?;
        Ok(Ts {
            skeleton,
            transitions,
        })
    }
}

/// Modal transition system; `must ⊆ may` is checked by `validate`.
#[derive(Debug, Clone)]
pub struct Mts {
    pub skeleton: Arc<Skeleton>,
    pub may: Vec<Transition>,
    pub must: Vec<Transition>,
}

impl Mts {
    pub fn new(
        skeleton: Arc<Skeleton>,
        may: Vec<Transition>,
        must: Vec<Transition>,
    ) -> Result<Self, ModelError> {
        let may = dedup_plain(&skeleton, may)?;
        let must = dedup_plain(&skeleton, must)?;
        Ok(Mts {
            skeleton,
            may,
            must,
        })
    }

    pub fn may_ts(&self) -> Ts {
        Ts {
            skeleton: self.skeleton.clone(),
            transitions: self.may.clone(),
        }
    }

    pub fn must_ts(&self) -> Ts {
        Ts {
            skeleton: self.skeleton.clone(),
            transitions: self.must.clone(),
        }
    }
}

/// Featured transition system.
#[derive(Debug, Clone)]
pub struct Fts {
    pub skeleton: Arc<Skeleton>,
    pub space: ConfigSpace,
    pub transitions: Vec<FeaturedTransition>,
}

/// Modal featured transition system.
#[derive(Debug, Clone)]
pub struct Mfts {
    pub skeleton: Arc<Skeleton>,
    pub space: ConfigSpace,
    pub may: Vec<FeaturedTransition>,
    pub must: Vec<FeaturedTransition>,
}

impl Fts {
    /// Builds an FTS; duplicate triples are merged by disjunction and every
    /// presence condition must only mention features of `space`.
    pub fn new(
        skeleton: Arc<Skeleton>,
        space: ConfigSpace,
        transitions: Vec<FeaturedTransition>,
    ) -> Result<Self, ModelError> {
        let transitions = merge_featured(&skeleton, transitions)?;
        for ft in &transitions {
            space.compile(&ft.presence)?;
        }
        Ok(Fts {
            skeleton,
            space,
            transitions,
        })
    }

    /// Presence condition of a triple; `False` when absent.
    pub fn presence(&self, t: &Transition) -> FeatExpr {
        self.transitions
            .iter()
            .find(|ft| ft.transition == *t)
            .map_or(FeatExpr::False, |ft| ft.presence.clone())
    }

    /// Outgoing transitions of `s`, idle loops included.
    pub fn outgoing(&self, s: StateId) -> impl Iterator<Item = &FeaturedTransition> {
        self.transitions
            .iter()
            .filter(move |ft| ft.transition.source == s)
    }

    /// The variant `π_k`: transitions whose condition `k` satisfies.
    pub fn project_variant(&self, k: Config) -> Result<Ts, ModelError> {
        if !self.space.contains(k) {
            return Err(ModelError::InvalidConfig(self.space.render(k)));
        }
        let mut transitions = Vec::new();
        for ft in &self.transitions {
            if self.space.compile(&ft.presence)?.eval(k) {
                transitions.push(ft.transition);
            }
        }
        Ok(Ts {
            skeleton: self.skeleton.clone(),
            transitions,
        })
    }

    /// `π_⟦ψ⟧`: restricts the space and drops transitions no remaining
    /// configuration admits.
    pub fn project_subset(&self, psi: &FeatExpr) -> Result<Fts, ModelError> {
        let space = self.space.restrict(psi)?;
        if space.is_empty() {
            return Err(ModelError::EmptyConfigSpace);
        }
        let mut transitions = Vec::new();
        for ft in &self.transitions {
            if space.any_satisfies(&ft.presence)? {
                transitions.push(ft.clone());
            }
        }
        Ok(Fts {
            skeleton: self.skeleton.clone(),
            space,
            transitions,
        })
    }

    /// Condition under which `s` has no enabled outgoing non-idle transition.
    pub fn deadlock_condition(&self, s: StateId) -> FeatExpr {
        FeatExpr::not(FeatExpr::disjunction(
            self.outgoing(s)
                .filter(|ft| !ft.transition.is_idle())
                .map(|ft| ft.presence.clone()),
        ))
    }

    /// Condition under which a variant can take an idle step at `s`: an
    /// explicit idle loop, or `s` is a deadlock.
    pub fn stutter_condition(&self, s: StateId) -> FeatExpr {
        FeatExpr::or(
            self.presence(&Transition::idle(s)),
            self.deadlock_condition(s),
        )
    }

    /// Adds an idle loop to every state that deadlocks in some variant where
    /// it may be reachable, so that every variant is total on its reachable
    /// states without implicit completion.
    pub fn complete(&self) -> Result<Fts, ModelError> {
        let mut transitions = self.transitions.clone();
        for s in 0..self.skeleton.num_states() {
            let entered = if self.skeleton.is_initial(s) {
                FeatExpr::True
            } else {
                FeatExpr::disjunction(
                    self.transitions
                        .iter()
                        .filter(|ft| ft.transition.target == s && !ft.transition.is_idle())
                        .map(|ft| ft.presence.clone()),
                )
            };
            let cond = FeatExpr::and(self.deadlock_condition(s), entered).simplify();
            if cond.is_unsatisfiable() || !self.space.any_satisfies(&cond)? {
                continue;
            }
            let idle = Transition::idle(s);
            match transitions.iter_mut().find(|ft| ft.transition == idle) {
                Some(ft) => {
                    let prev = std::mem::replace(&mut ft.presence, FeatExpr::False);
                    ft.presence = FeatExpr::or(prev, cond);
                }
                None => transitions.push(FeaturedTransition {
                    transition: idle,
                    presence: cond,
                }),
            }
        }
        Ok(Fts {
            skeleton: self.skeleton.clone(),
            space: self.space.clone(),
            transitions,
        })
    }

    /// The abstraction `α(F)` as an MFTS.
    pub fn abstract_fts(&self, a: &Abstraction) -> Result<Mfts, ModelError> {
        Ok(self.abstract_fts_mapped(a)?.0)
    }

    /// [`abstract_fts`](Self::abstract_fts) plus the configuration map.
    pub fn abstract_fts_mapped(
        &self,
        a: &Abstraction,
    ) -> Result<(Mfts, AbstractSpace), ModelError> {
        let abs = abstract_space(a, &self.space)?;
        let mut may = Vec::new();
        let mut must = Vec::new();
        // Presence conditions repeat heavily in generated families.
        let mut cache: HashMap<&FeatExpr, (FeatExpr, FeatExpr)> = HashMap::new();
        for ft in &self.transitions {
            let (up, down) = match cache.get(&ft.presence) {
                Some(hit) => hit.clone(),
                None => {
                    let pair = (
                        alpha_may(a, &ft.presence, &self.space)?,
                        alpha_must(a, &ft.presence, &self.space)?,
                    );
                    cache.insert(&ft.presence, pair.clone());
                    pair
                }
            };
            if !up.is_unsatisfiable() {
                may.push(FeaturedTransition {
                    transition: ft.transition,
                    presence: up,
                });
            }
            if !down.is_unsatisfiable() {
                must.push(FeaturedTransition {
                    transition: ft.transition,
                    presence: down,
                });
            }
        }
        let m = Mfts {
            skeleton: self.skeleton.clone(),
            space: abs.space.clone(),
            may,
            must,
        };
        Ok((m, abs))
    }
}

impl Mfts {
    pub fn may_component(&self) -> Fts {
        Fts {
            skeleton: self.skeleton.clone(),
            space: self.space.clone(),
            transitions: self.may.clone(),
        }
    }

    pub fn must_component(&self) -> Fts {
        Fts {
            skeleton: self.skeleton.clone(),
            space: self.space.clone(),
            transitions: self.must.clone(),
        }
    }

    /// The MTS of one abstract configuration.
    pub fn project_variant(&self, k: Config) -> Result<Mts, ModelError> {
        let may = self.may_component().project_variant(k)?.transitions;
        let must = self.must_component().project_variant(k)?.transitions;
        Ok(Mts {
            skeleton: self.skeleton.clone(),
            may,
            must,
        })
    }
}

/// A finite execution fragment, or a lasso when `loop_start` is set.
///
/// `actions[i]` labels the step from `states[i]` to `states[i + 1]`. For a
/// lasso the last state equals `states[loop_start]` and the steps from
/// `loop_start` on repeat forever.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    pub states: Vec<StateId>,
    pub actions: Vec<ActionId>,
    pub loop_start: Option<usize>,
}

impl Path {
    pub fn single(state: StateId) -> Self {
        Path {
            states: vec![state],
            actions: Vec::new(),
            loop_start: None,
        }
    }

    /// Checks the shape invariants.
    pub fn is_well_formed(&self) -> bool {
        if self.states.is_empty() || self.actions.len() + 1 != self.states.len() {
            return false;
        }
        match self.loop_start {
            None => true,
            Some(i) => i + 1 < self.states.len() && self.states[i] == *self.states.last().unwrap(),
        }
    }

    pub fn is_lasso(&self) -> bool {
        self.loop_start.is_some()
    }

    pub fn first(&self) -> StateId {
        self.states[0]
    }

    pub fn steps(&self) -> impl Iterator<Item = Transition> + '_ {
        self.actions
            .iter()
            .enumerate()
            .map(|(i, a)| Transition::new(self.states[i], *a, self.states[i + 1]))
    }

    /// Distinct transitions of the path, in order of first use.
    pub fn distinct_steps(&self) -> Vec<Transition> {
        let mut seen = BTreeSet::new();
        self.steps().filter(|t| seen.insert(*t)).collect()
    }

    /// True when every step is a transition of `transitions`, with idle steps
    /// also allowed on states that have no outgoing transition.
    pub fn replays_on(&self, transitions: &[Transition]) -> bool {
        self.is_well_formed()
            && self.steps().all(|t| {
                transitions.contains(&t)
                    || (t.is_idle() && !transitions.iter().any(|u| u.source == t.source))
            })
    }

    /// Renders `1 -pay-> 2 -change-> 3 ... loop K`.
    pub fn render(&self, skel: &Skeleton) -> String {
        let mut out = skel.state_name(self.states[0]).to_string();
        for (i, a) in self.actions.iter().enumerate() {
            out.push_str(&format!(
                " -{}-> {}",
                skel.action_name(*a),
                skel.state_name(self.states[i + 1])
            ));
        }
        if let Some(i) = self.loop_start {
            out.push_str(&format!(" loop {i}"));
        }
        out
    }
}

/// Severity of a [`Diagnostic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

/// A validation finding with a stable machine-readable code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{sev}[{}]: {}", self.code, self.message)
    }
}

pub const MUST_NOT_SUBSET_MAY: &str = "MUST_NOT_SUBSET_MAY";
pub const MUST_NOT_ENTAIL_MAY: &str = "MUST_NOT_ENTAIL_MAY";
pub const DEAD_TRANSITION: &str = "DEAD_TRANSITION";
pub const DEADLOCK: &str = "DEADLOCK";
pub const EMPTY_CONFIG_SPACE: &str = "EMPTY_CONFIG_SPACE";

/// Invariant checks that report rather than fail.
pub trait Validate {
    fn validate(&self) -> Vec<Diagnostic>;

    fn has_errors(&self) -> bool {
        self.validate()
            .iter()
            .any(|d| d.severity == Severity::Error)
    }
}

fn reachable(skel: &Skeleton, transitions: &[Transition]) -> Vec<bool> {
    let mut seen = vec![false; skel.num_states()];
    let mut stack: Vec<StateId> = skel.initial().to_vec();
    for s in &stack {
        seen[*s] = true;
    }
    while let Some(s) = stack.pop() {
        for t in transitions.iter().filter(|t| t.source == s) {
            if !seen[t.target] {
                seen[t.target] = true;
                stack.push(t.target);
            }
        }
    }
    seen
}

/// Reachable states without outgoing transitions.
pub fn reachable_deadlocks(skel: &Skeleton, transitions: &[Transition]) -> Vec<StateId> {
    let seen = reachable(skel, transitions);
    (0..skel.num_states())
        .filter(|s| seen[*s] && !transitions.iter().any(|t| t.source == *s))
        .collect()
}

impl Validate for Ts {
    fn validate(&self) -> Vec<Diagnostic> {
        reachable_deadlocks(&self.skeleton, &self.transitions)
            .into_iter()
            .map(|s| Diagnostic {
                severity: Severity::Warning,
                code: DEADLOCK,
                message: format!(
                    "state `{}` is a reachable deadlock; checking adds an idle loop",
                    self.skeleton.state_name(s)
                ),
            })
            .collect()
    }
}

impl Validate for Mts {
    fn validate(&self) -> Vec<Diagnostic> {
        let mut out: Vec<Diagnostic> = self
            .must
            .iter()
            .filter(|t| !self.may.contains(t))
            .map(|t| Diagnostic {
                severity: Severity::Error,
                code: MUST_NOT_SUBSET_MAY,
                message: format!(
                    "must transition {} is not a may transition",
                    self.skeleton.render_transition(t)
                ),
            })
            .collect();
        out.extend(self.may_ts().validate());
        out
    }
}

impl Validate for Fts {
    fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if self.space.is_empty() {
            out.push(Diagnostic {
                severity: Severity::Error,
                code: EMPTY_CONFIG_SPACE,
                message: "no valid configuration".into(),
            });
            return out;
        }
        for ft in &self.transitions {
            if !self.space.any_satisfies(&ft.presence).unwrap_or(false) {
                out.push(Diagnostic {
                    severity: Severity::Warning,
                    code: DEAD_TRANSITION,
                    message: format!(
                        "transition {} is present in no valid configuration",
                        self.skeleton.render_transition(&ft.transition)
                    ),
                });
            }
        }
        let mut deadlocks: BTreeMap<StateId, Vec<Config>> = BTreeMap::new();
        for &k in self.space.valid_configs() {
            if let Ok(ts) = self.project_variant(k) {
                for s in reachable_deadlocks(&self.skeleton, &ts.transitions) {
                    deadlocks.entry(s).or_default().push(k);
                }
            }
        }
        for (s, ks) in deadlocks {
            out.push(Diagnostic {
                severity: Severity::Warning,
                code: DEADLOCK,
                message: format!(
                    "state `{}` is a reachable deadlock in {} variant(s), e.g. {}",
                    self.skeleton.state_name(s),
                    ks.len(),
                    self.space.render(ks[0])
                ),
            });
        }
        out
    }
}

impl Validate for Mfts {
    fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for m in &self.must {
            match self.may.iter().find(|ft| ft.transition == m.transition) {
                None => out.push(Diagnostic {
                    severity: Severity::Error,
                    code: MUST_NOT_SUBSET_MAY,
                    message: format!(
                        "must transition {} is not a may transition",
                        self.skeleton.render_transition(&m.transition)
                    ),
                }),
                Some(up) => {
                    if !self
                        .space
                        .entails(&m.presence, &up.presence)
                        .unwrap_or(false)
                    {
                        out.push(Diagnostic {
                            severity: Severity::Error,
                            code: MUST_NOT_ENTAIL_MAY,
                            message: format!(
                                "must condition `{}` of {} does not entail may condition `{}`",
                                m.presence,
                                self.skeleton.render_transition(&m.transition),
                                up.presence
                            ),
                        })
                    }
                }
            }
        }
        out
    }
}

/// Equality of two FTSs up to presence-condition equivalence relative to
/// their (equal) configuration space; a missing triple counts as `false`.
pub fn fts_equivalent(a: &Fts, b: &Fts) -> bool {
    if a.skeleton.state_names() != b.skeleton.state_names()
        || a.skeleton.initial() != b.skeleton.initial()
        || a.space != b.space
    {
        return false;
    }
    let labels_match = (0..a.skeleton.num_states()).all(|s| {
        let mut la = a.skeleton.label_names(s);
        let mut lb = b.skeleton.label_names(s);
        la.sort_unstable();
        lb.sort_unstable();
        la == lb
    });
    if !labels_match {
        return false;
    }
    let named = |f: &Fts| -> BTreeMap<(StateId, String, StateId), FeatExpr> {
        f.transitions
            .iter()
            .map(|ft| {
                let t = ft.transition;
                (
                    (
                        t.source,
                        f.skeleton.action_name(t.action).to_string(),
                        t.target,
                    ),
                    ft.presence.clone(),
                )
            })
            .collect()
    };
    let ma = named(a);
    let mb = named(b);
    let keys: BTreeSet<_> = ma.keys().chain(mb.keys()).collect();
    let same = keys.into_iter().all(|key| {
        let pa = ma.get(key).cloned().unwrap_or(FeatExpr::False);
        let pb = mb.get(key).cloned().unwrap_or(FeatExpr::False);
        a.space.equivalent(&pa, &pb).unwrap_or(false)
    });
    same
}

/// Every lasso with at most `max_steps` steps starting in an initial state,
/// where the loop closes on any earlier occurrence of the final state.
pub fn enumerate_lassos(
    skel: &Skeleton,
    transitions: &[Transition],
    max_steps: usize,
) -> Vec<Path> {
    let mut out = Vec::new();
    let mut stack: Vec<Path> = skel.initial().iter().map(|s| Path::single(*s)).collect();
    while let Some(p) = stack.pop() {
        let last = *p.states.last().unwrap();
        for i in 0..p.states.len() - 1 {
            if p.states[i] == last {
                let mut lasso = p.clone();
                lasso.loop_start = Some(i);
                out.push(lasso);
            }
        }
        if p.actions.len() == max_steps {
            continue;
        }
        for t in transitions.iter().filter(|t| t.source == last) {
            let mut next = p.clone();
            next.actions.push(t.action);
            next.states.push(t.target);
            stack.push(next);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featexpr::parse_feat_expr;

    fn p(s: &str) -> FeatExpr {
        parse_feat_expr(s).unwrap()
    }

    /// Two states, a guarded step and a deadlock in the `!a` variant.
    fn tiny() -> Fts {
        let skel = Skeleton::new(
            vec!["0".into(), "1".into()],
            vec!["go".into(), "back".into()],
            vec![],
            vec![vec!["p".into()], vec![]],
            vec![0],
        )
        .unwrap();
        let space = ConfigSpace::unconstrained(vec!["a".into()]).unwrap();
        Fts::new(
            Arc::new(skel),
            space,
            vec![
                FeaturedTransition {
                    transition: Transition::new(0, 0, 1),
                    presence: FeatExpr::True,
                },
                FeaturedTransition {
                    transition: Transition::new(1, 1, 0),
                    presence: p("a"),
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn duplicate_triples_merge() {
        let f = tiny();
        let mut ts = f.transitions.clone();
        ts.push(FeaturedTransition {
            transition: Transition::new(1, 1, 0),
            presence: p("!a"),
        });
        let g = Fts::new(f.skeleton.clone(), f.space.clone(), ts).unwrap();
        assert_eq!(g.transitions.len(), 2);
        assert!(g.space.all_satisfy(&g.transitions[1].presence).unwrap());
    }

    #[test]
    fn completion_adds_idle_only_where_needed() {
        let f = tiny();
        let c = f.complete().unwrap();
        assert_eq!(c.transitions.len(), 3);
        let idle = &c.transitions[2];
        assert_eq!(idle.transition, Transition::idle(1));
        let na = f.space.config_of::<&str>(&[]).unwrap();
        assert!(c.space.eval(na, &idle.presence).unwrap());
        assert!(!c.space.eval(Config(1), &idle.presence).unwrap());
        assert_eq!(c.complete().unwrap().transitions.len(), 3);
    }

    #[test]
    fn validate_reports_deadlock_and_dead_transition() {
        let f = tiny();
        let codes: Vec<_> = f.validate().iter().map(|d| d.code).collect();
        assert_eq!(codes, vec![DEADLOCK]);
        let g = f.project_subset(&p("!a")).unwrap();
        assert_eq!(g.transitions.len(), 1);
        let mut dead = f.transitions.clone();
        dead[1].presence = p("a & !a");
        let h = Fts::new(f.skeleton.clone(), f.space.clone(), dead).unwrap();
        assert!(h.validate().iter().any(|d| d.code == DEAD_TRANSITION));
        assert!(!h.has_errors());
    }

    #[test]
    fn mts_must_outside_may_is_error() {
        let f = tiny();
        let m = Mts::new(f.skeleton.clone(), vec![], vec![Transition::new(0, 0, 1)]).unwrap();
        let d = m.validate();
        assert!(d
            .iter()
            .any(|d| d.code == MUST_NOT_SUBSET_MAY && d.severity == Severity::Error));
    }

    #[test]
    fn project_rejects_invalid_config() {
        let f = tiny().project_subset(&p("a")).unwrap();
        assert!(matches!(
            f.project_variant(Config(0)),
            Err(ModelError::InvalidConfig(_))
        ));
    }

    #[test]
    fn path_shape_and_replay() {
        let f = tiny();
        let ts = f.project_variant(Config(1)).unwrap();
        let lasso = Path {
            states: vec![0, 1, 0],
            actions: vec![0, 1],
            loop_start: Some(0),
        };
        assert!(lasso.is_well_formed());
        assert!(lasso.replays_on(&ts.transitions));
        assert_eq!(lasso.render(&f.skeleton), "0 -go-> 1 -back-> 0 loop 0");
        let ts0 = f.project_variant(Config(0)).unwrap();
        assert!(!lasso.replays_on(&ts0.transitions));
        let stuck = Path {
            states: vec![0, 1, 1],
            actions: vec![0, STUTTER],
            loop_start: Some(1),
        };
        assert!(stuck.replays_on(&ts0.transitions));
        assert!(!stuck.replays_on(&ts.transitions));
    }

    #[test]
    fn lasso_enumeration() {
        let f = tiny();
        let ts = f.project_variant(Config(1)).unwrap();
        let lassos = enumerate_lassos(&f.skeleton, &ts.transitions, 4);
        assert!(lassos.iter().all(|l| l.replays_on(&ts.transitions)));
        assert_eq!(lassos.len(), 4);
    }
}
