//! Fixpoint labeling of CTL formulas under three readings of a system:
//! a single relation, the modal reading (A over may, E over must) and the
//! sound family reading used for abstract verdicts.

use fixedbitset::FixedBitSet;

use super::ctl::{Ctl, PathFormula};
use super::CheckError;
use crate::models::{ActionId, PropId, Skeleton, StateId, Transition, STUTTER};

/// Successor lists sorted by target, then action.
#[derive(Debug, Clone)]
pub struct Graph {
    succ: Vec<Vec<(StateId, ActionId)>>,
}

impl Graph {
    /// With `complete`, every state without successors gets an idle loop.
    pub fn new(num_states: usize, transitions: &[Transition], complete: bool) -> Self {
        let mut succ = vec![Vec::new(); num_states];
        for t in transitions {
            succ[t.source].push((t.target, t.action));
        }
        for (s, out) in succ.iter_mut().enumerate() {
            if complete && out.is_empty() {
                out.push((s, STUTTER));
            }
            out.sort_unstable();
            out.dedup();
        }
        Graph { succ }
    }

    pub fn num_states(&self) -> usize {
        self.succ.len()
    }

    pub fn successors(&self, s: StateId) -> &[(StateId, ActionId)] {
        &self.succ[s]
    }

    /// `{s | some successor in t}`.
    pub fn pre_exists(&self, t: &FixedBitSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.succ.len());
        for (s, out_edges) in self.succ.iter().enumerate() {
            if out_edges.iter().any(|(u, _)| t.contains(*u)) {
                out.insert(s);
            }
        }
        out
    }

    /// States with an infinite path.
    pub fn alive(&self) -> FixedBitSet {
        let mut z = full(self.succ.len());
        loop {
            let next = self.pre_exists(&z);
            if next == z {
                return z;
            }
            z = next;
        }
    }
}

pub(crate) fn full(n: usize) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(n);
    s.insert_range(..);
    s
}

pub(crate) fn complement(s: &FixedBitSet) -> FixedBitSet {
    let mut c = s.clone();
    c.toggle_range(..);
    c
}

fn intersect(a: &FixedBitSet, b: &FixedBitSet) -> FixedBitSet {
    let mut c = a.clone();
    c.intersect_with(b);
    c
}

fn union(a: &FixedBitSet, b: &FixedBitSet) -> FixedBitSet {
    let mut c = a.clone();
    c.union_with(b);
    c
}

/// How a system is read when labeling.
#[derive(Debug, Clone, Copy)]
pub enum Semantics<'a> {
    /// Both quantifiers over one relation.
    Single(&'a Graph),
    /// `A` over may-executions, `E` over must-executions.
    Modal { may: &'a Graph, must: &'a Graph },
    /// `A` over may-executions; `E` steps along a must transition or to a
    /// state all of whose may-successors qualify. Satisfaction implies
    /// satisfaction in every total refinement.
    Hyper { may: &'a Graph, must: &'a Graph },
}

/// One-step predecessor operator for existential path quantification.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Step<'a> {
    Exists(&'a Graph),
    Hyper { may: &'a Graph, must: &'a Graph },
}

impl<'a> Step<'a> {
    fn pre(&self, t: &FixedBitSet) -> FixedBitSet {
        match self {
            Step::Exists(g) => g.pre_exists(t),
            Step::Hyper { may, must } => {
                let mut out = must.pre_exists(t);
                for s in 0..may.num_states() {
                    let succ = may.successors(s);
                    if !succ.is_empty() && succ.iter().all(|(u, _)| t.contains(*u)) {
                        out.insert(s);
                    }
                }
                out
            }
        }
    }

    /// Lowest-target successor justifying `s ∈ pre(t)`.
    pub(crate) fn choose(&self, s: StateId, t: &FixedBitSet) -> Option<(StateId, ActionId)> {
        match self {
            Step::Exists(g) => g
                .successors(s)
                .iter()
                .copied()
                .find(|(u, _)| t.contains(*u)),
            Step::Hyper { may, must } => {
                if let Some(e) = must
                    .successors(s)
                    .iter()
                    .copied()
                    .find(|(u, _)| t.contains(*u))
                {
                    return Some(e);
                }
                let succ = may.successors(s);
                if !succ.is_empty() && succ.iter().all(|(u, _)| t.contains(*u)) {
                    succ.first().copied()
                } else {
                    None
                }
            }
        }
    }
}

/// A quantifier's view: its step operator and the states from which an
/// infinite execution exists.
#[derive(Debug, Clone)]
pub(crate) struct Side<'a> {
    pub(crate) step: Step<'a>,
    pub(crate) alive: FixedBitSet,
}

impl<'a> Side<'a> {
    pub(crate) fn ex(&self, s: &FixedBitSet) -> FixedBitSet {
        self.step.pre(&intersect(s, &self.alive))
    }

    pub(crate) fn eu(&self, s1: &FixedBitSet, s2: &FixedBitSet) -> FixedBitSet {
        let base = intersect(s2, &self.alive);
        let mut z = base.clone();
        loop {
            let next = union(&base, &intersect(s1, &self.step.pre(&z)));
            if next == z {
                return z;
            }
            z = next;
        }
    }

    pub(crate) fn eg(&self, s: &FixedBitSet) -> FixedBitSet {
        let mut z = s.clone();
        loop {
            let next = intersect(s, &self.step.pre(&z));
            if next == z {
                return z;
            }
            z = next;
        }
    }

    pub(crate) fn er(&self, s1: &FixedBitSet, s2: &FixedBitSet) -> FixedBitSet {
        let released = intersect(s1, &self.alive);
        let mut z = s2.clone();
        loop {
            let next = intersect(s2, &union(&released, &self.step.pre(&z)));
            if next == z {
                return z;
            }
            z = next;
        }
    }

    /// Rank layers of `E[s1 U s2]`: layer 0 is `s2 ∩ alive`.
    pub(crate) fn eu_layers(&self, s1: &FixedBitSet, s2: &FixedBitSet) -> Vec<FixedBitSet> {
        let mut layers = vec![intersect(s2, &self.alive)];
        let mut seen = layers[0].clone();
        loop {
            let mut next = intersect(s1, &self.step.pre(&seen));
            next.difference_with(&seen);
            if next.is_clear() {
                return layers;
            }
            seen.union_with(&next);
            layers.push(next);
        }
    }
}

/// Computes satisfaction sets of formulas on one system under one reading.
pub struct Labeler<'a> {
    pub(crate) skel: &'a Skeleton,
    pub(crate) e: Side<'a>,
    pub(crate) a: Side<'a>,
    n: usize,
}

impl<'a> Labeler<'a> {
    pub fn new(skel: &'a Skeleton, sem: Semantics<'a>) -> Self {
        let n = skel.num_states();
        let (e, a) = match sem {
            Semantics::Single(g) => {
                let side = Side {
                    step: Step::Exists(g),
                    alive: g.alive(),
                };
                (side.clone(), side)
            }
            Semantics::Modal { may, must } => (
                Side {
                    step: Step::Exists(must),
                    alive: must.alive(),
                },
                Side {
                    step: Step::Exists(may),
                    alive: may.alive(),
                },
            ),
            Semantics::Hyper { may, must } => (
                Side {
                    step: Step::Hyper { may, must },
                    alive: full(n),
                },
                Side {
                    step: Step::Exists(may),
                    alive: may.alive(),
                },
            ),
        };
        Labeler { skel, e, a, n }
    }

    /// Fails on propositions the skeleton does not declare.
    pub fn resolve(&self, phi: &Ctl) -> Result<(), CheckError> {
        for p in phi.atoms() {
            self.skel
                .prop_id(&p)
                .map_err(|_| CheckError::UnknownProp(p))?;
        }
        Ok(())
    }

    fn prop_set(&self, p: PropId) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.n);
        for s in 0..self.n {
            if self.skel.has_label(s, p) {
                out.insert(s);
            }
        }
        out
    }

    /// `Sat(phi)`; atoms must already be resolved.
    pub fn sat(&self, phi: &Ctl) -> FixedBitSet {
        match phi {
            Ctl::True => full(self.n),
            Ctl::False => FixedBitSet::with_capacity(self.n),
            Ctl::Atom(p) => self.prop_set(self.skel.prop_id(p).expect("resolved")),
            Ctl::NegAtom(p) => complement(&self.prop_set(self.skel.prop_id(p).expect("resolved"))),
            Ctl::And(a, b) => intersect(&self.sat(a), &self.sat(b)),
            Ctl::Or(a, b) => union(&self.sat(a), &self.sat(b)),
            Ctl::E(path) => match &**path {
                PathFormula::Next(f) => self.e.ex(&self.sat(f)),
                PathFormula::Eventually(f) => self.e.eu(&full(self.n), &self.sat(f)),
                PathFormula::Globally(f) => self.e.eg(&self.sat(f)),
                PathFormula::Until(f, g) => self.e.eu(&self.sat(f), &self.sat(g)),
                PathFormula::Release(f, g) => self.e.er(&self.sat(f), &self.sat(g)),
            },
            Ctl::A(path) => {
                let neg = |f: &Ctl| complement(&self.sat(f));
                complement(&match &**path {
                    PathFormula::Next(f) => self.a.ex(&neg(f)),
                    PathFormula::Eventually(f) => self.a.eg(&neg(f)),
                    PathFormula::Globally(f) => self.a.eu(&full(self.n), &neg(f)),
                    PathFormula::Until(f, g) => self.a.er(&neg(f), &neg(g)),
                    PathFormula::Release(f, g) => self.a.eu(&neg(f), &neg(g)),
                })
            }
        }
    }

    /// True when every initial state satisfies `phi`.
    pub fn holds_initially(&self, sat: &FixedBitSet) -> bool {
        self.skel.initial().iter().all(|s| sat.contains(*s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn skel(n: usize, labels: &[&[&str]]) -> Arc<Skeleton> {
        Arc::new(
            Skeleton::new(
                (0..n).map(|i| i.to_string()).collect(),
                vec!["a".into()],
                vec![],
                labels
                    .iter()
                    .map(|ls| ls.iter().map(|s| s.to_string()).collect())
                    .collect(),
                vec![0],
            )
            .unwrap(),
        )
    }

    fn t(s: StateId, u: StateId) -> Transition {
        Transition::new(s, 0, u)
    }

    #[test]
    fn single_graph_operators() {
        // 0 -> 1 -> 2 -> 2, 0 -> 0 ; p on 2
        let sk = skel(3, &[&[], &[], &["p"]]);
        let g = Graph::new(3, &[t(0, 1), t(1, 2), t(2, 2), t(0, 0)], true);
        let l = Labeler::new(&sk, Semantics::Single(&g));
        let p = Ctl::atom("p");
        let bits = |f: &Ctl| l.sat(f).ones().collect::<Vec<_>>();
        assert_eq!(bits(&Ctl::ef(p.clone())), vec![0, 1, 2]);
        assert_eq!(bits(&Ctl::af(p.clone())), vec![1, 2]);
        assert_eq!(bits(&Ctl::eg(Ctl::neg_atom("p"))), vec![0]);
        assert_eq!(bits(&Ctl::ag(p.clone())), vec![2]);
        assert_eq!(bits(&Ctl::ax(p.clone())), vec![1, 2]);
        assert_eq!(bits(&Ctl::er(Ctl::False, Ctl::True)), vec![0, 1, 2]);
        assert_eq!(
            bits(&Ctl::ar(p.clone(), Ctl::neg_atom("p"))),
            Vec::<usize>::new()
        );
    }

    #[test]
    fn partial_graph_vacuity() {
        // 0 -> 1, 1 has no successor; no completion
        let sk = skel(2, &[&["p"], &[]]);
        let g = Graph::new(2, &[t(0, 1)], false);
        let l = Labeler::new(&sk, Semantics::Single(&g));
        assert!(l.sat(&Ctl::ag(Ctl::False)).contains(1));
        assert!(l.sat(&Ctl::ag(Ctl::False)).contains(0));
        assert!(!l.sat(&Ctl::ef(Ctl::True)).contains(0));
    }

    #[test]
    fn hyper_step_uses_universal_may_successors() {
        // must: 0 -> 1 ; may: 0 -> 1, 1 -> 2, 2 -> 2 ; p on 2
        let sk = skel(3, &[&[], &[], &["p"]]);
        let may = Graph::new(3, &[t(0, 1), t(1, 2), t(2, 2)], true);
        let must = Graph::new(3, &[t(0, 1)], false);
        let hyper = Labeler::new(
            &sk,
            Semantics::Hyper {
                may: &may,
                must: &must,
            },
        );
        let modal = Labeler::new(
            &sk,
            Semantics::Modal {
                may: &may,
                must: &must,
            },
        );
        let ef = Ctl::ef(Ctl::atom("p"));
        assert!(hyper.sat(&ef).contains(0));
        assert!(!modal.sat(&ef).contains(0));
    }
}
