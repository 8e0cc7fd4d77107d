//! Evidence extraction by backtracking through fixpoint sets.
//!
//! Ties are broken by lowest successor state id, so evidence is
//! deterministic.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use super::ctl::{Ctl, PathFormula};
use super::sat::{full, Labeler};
use crate::models::{Path, StateId};

/// Evidence that a state satisfies a formula: one main path plus the paths
/// needed for nested existential obligations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub main: Path,
    pub branches: Vec<Path>,
    /// False when some obligation was universal and is not represented.
    pub complete: bool,
}

impl Witness {
    pub fn trivial(s: StateId) -> Self {
        Witness {
            main: Path::single(s),
            branches: Vec::new(),
            complete: true,
        }
    }

    /// Main path first, then branches.
    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        std::iter::once(&self.main).chain(self.branches.iter())
    }

    fn absorb_as_branch(&mut self, other: Witness) {
        self.complete &= other.complete;
        if other.main.states.len() > 1 {
            self.branches.push(other.main);
        }
        self.branches.extend(other.branches);
    }
}

/// Joins `prefix` with a path that starts at its last state.
pub(crate) fn concat(prefix: &Path, tail: &Path) -> Path {
    debug_assert_eq!(prefix.states.last(), tail.states.first());
    let offset = prefix.states.len() - 1;
    let mut states = prefix.states.clone();
    states.extend_from_slice(&tail.states[1..]);
    let mut actions = prefix.actions.clone();
    actions.extend_from_slice(&tail.actions);
    Path {
        states,
        actions,
        loop_start: tail.loop_start.map(|i| i + offset),
    }
}

impl<'a> Labeler<'a> {
    /// Evidence for `s ∈ Sat(phi)`; `None` when `s` does not satisfy `phi`.
    pub fn witness(&self, phi: &Ctl, s: StateId) -> Option<Witness> {
        if !self.sat(phi).contains(s) {
            return None;
        }
        Some(self.explain(phi, s))
    }

    fn explain(&self, phi: &Ctl, s: StateId) -> Witness {
        match phi {
            Ctl::True | Ctl::False | Ctl::Atom(_) | Ctl::NegAtom(_) => Witness::trivial(s),
            Ctl::And(a, b) => {
                let mut w = self.explain(a, s);
                w.absorb_as_branch(self.explain(b, s));
                if w.main.states.len() == 1 && !w.branches.is_empty() {
                    w.main = w.branches.remove(0);
                }
                w
            }
            Ctl::Or(a, b) => {
                if self.sat(a).contains(s) {
                    self.explain(a, s)
                } else {
                    self.explain(b, s)
                }
            }
            Ctl::A(_) => Witness {
                main: Path::single(s),
                branches: Vec::new(),
                complete: false,
            },
            Ctl::E(path) => match &**path {
                PathFormula::Next(f) => {
                    let mut target = self.sat(f);
                    target.intersect_with(&self.e.alive);
                    let (u, act) = self.e.step.choose(s, &target).expect("s in Sat(EX f)");
                    let step = Path {
                        states: vec![s, u],
                        actions: vec![act],
                        loop_start: None,
                    };
                    let tail = self.explain(f, u);
                    Witness {
                        main: concat(&step, &tail.main),
                        branches: tail.branches,
                        complete: tail.complete,
                    }
                }
                PathFormula::Eventually(g) => self.explain_until(None, g, s),
                PathFormula::Until(f, g) => self.explain_until(Some(f), g, s),
                PathFormula::Globally(f) => {
                    let z = self.sat(phi);
                    self.explain_invariant(f, None, &z, s)
                }
                PathFormula::Release(f, g) => {
                    let z = self.sat(phi);
                    self.explain_invariant(g, Some(f), &z, s)
                }
            },
        }
    }

    fn explain_until(&self, f: Option<&Ctl>, g: &Ctl, s: StateId) -> Witness {
        let n = self.skel.num_states();
        let s1 = f.map_or_else(|| full(n), |f| self.sat(f));
        let layers = self.e.eu_layers(&s1, &self.sat(g));
        let rank = |u: StateId| layers.iter().position(|l| l.contains(u));
        let mut path = Path::single(s);
        let mut w = Witness::trivial(s);
        let mut cur = s;
        let mut r = rank(cur).expect("s in Sat(E[f U g])");
        while r > 0 {
            if let Some(f) = f {
                w.absorb_as_branch(self.explain(f, cur));
            }
            let mut lower = FixedBitSet::with_capacity(n);
            for l in &layers[..r] {
                lower.union_with(l);
            }
            let (u, act) = self
                .e
                .step
                .choose(cur, &lower)
                .expect("layered predecessor");
            path.states.push(u);
            path.actions.push(act);
            cur = u;
            r = rank(cur).expect("successor is ranked");
        }
        let tail = self.explain(g, cur);
        w.main = concat(&path, &tail.main);
        w.complete &= tail.complete;
        w.branches.extend(tail.branches);
        w
    }

    /// Walks inside `z`, explaining `inv` at each state, until `release`
    /// holds (finite evidence) or a state repeats (lasso).
    fn explain_invariant(
        &self,
        inv: &Ctl,
        release: Option<&Ctl>,
        z: &FixedBitSet,
        s: StateId,
    ) -> Witness {
        let released = release.map(|f| {
            let mut r = self.sat(f);
            r.intersect_with(&self.e.alive);
            r
        });
        let mut path = Path::single(s);
        let mut w = Witness::trivial(s);
        let mut seen: HashMap<StateId, usize> = HashMap::from([(s, 0)]);
        let mut cur = s;
        loop {
            w.absorb_as_branch(self.explain(inv, cur));
            if let (Some(f), Some(r)) = (release, &released) {
                if r.contains(cur) {
                    w.absorb_as_branch(self.explain(f, cur));
                    break;
                }
            }
            let (u, act) = self.e.step.choose(cur, z).expect("fixpoint is closed");
            path.states.push(u);
            path.actions.push(act);
            if let Some(&i) = seen.get(&u) {
                path.loop_start = Some(i);
                break;
            }
            seen.insert(u, path.states.len() - 1);
            cur = u;
        }
        w.main = path;
        w
    }
}

#[cfg(test)]
mod tests {
    use super::super::sat::{Graph, Semantics};
    use super::*;
    use crate::models::{Skeleton, Transition};

    fn skel(n: usize, labels: &[&[&str]]) -> Skeleton {
        Skeleton::new(
            (0..n).map(|i| i.to_string()).collect(),
            vec!["a".into(), "b".into()],
            vec![],
            labels
                .iter()
                .map(|ls| ls.iter().map(|s| s.to_string()).collect())
                .collect(),
            vec![0],
        )
        .unwrap()
    }

    #[test]
    fn eventually_and_globally_evidence() {
        // 0 -a-> 1 -a-> 2 -b-> 1, 0 -b-> 2 ; p on 2
        let sk = skel(3, &[&[], &[], &["p"]]);
        let ts = [
            Transition::new(0, 0, 1),
            Transition::new(1, 0, 2),
            Transition::new(2, 1, 1),
            Transition::new(0, 1, 2),
        ];
        let g = Graph::new(3, &ts, true);
        let l = Labeler::new(&sk, Semantics::Single(&g));
        let w = l.witness(&Ctl::ef(Ctl::atom("p")), 0).unwrap();
        assert_eq!(w.main.states, vec![0, 2]);
        assert!(w.complete);
        let w = l.witness(&Ctl::eg(Ctl::True), 0).unwrap();
        assert_eq!(w.main.states, vec![0, 1, 2, 1]);
        assert_eq!(w.main.loop_start, Some(1));
        assert!(w.main.replays_on(&ts));
        assert!(l.witness(&Ctl::eg(Ctl::atom("p")), 0).is_none());
    }

    #[test]
    fn nested_obligations_become_branches() {
        let sk = skel(3, &[&[], &[], &["p"]]);
        let ts = [
            Transition::new(0, 0, 1),
            Transition::new(1, 0, 2),
            Transition::new(2, 0, 0),
        ];
        let g = Graph::new(3, &ts, true);
        let l = Labeler::new(&sk, Semantics::Single(&g));
        let w = l.witness(&Ctl::eg(Ctl::ef(Ctl::atom("p"))), 0).unwrap();
        assert_eq!(w.main.states, vec![0, 1, 2, 0]);
        assert_eq!(w.branches.len(), 2);
        assert!(w.paths().all(|p| p.replays_on(&ts)));
        let w = l.witness(&Ctl::ef(Ctl::ag(Ctl::True)), 0).unwrap();
        assert!(!w.complete);
    }

    #[test]
    fn concat_shifts_loop() {
        let a = Path {
            states: vec![0, 1],
            actions: vec![0],
            loop_start: None,
        };
        let b = Path {
            states: vec![1, 2, 1],
            actions: vec![0, 0],
            loop_start: Some(0),
        };
        let c = concat(&a, &b);
        assert_eq!(c.states, vec![0, 1, 2, 1]);
        assert_eq!(c.loop_start, Some(1));
        assert!(c.is_well_formed());
    }
}
