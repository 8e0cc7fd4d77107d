//! The scalable benchmark family.
//!
//! Feature `A{i}` (1 ≤ i ≤ n) adds `i` to a counter `x` that starts at 0.
//! The counter is encoded in the state space: state `l{i}_x{x}` is location
//! `i` with counter value `x`. From location `i - 1` the family moves to
//! location `i` by `inc{i}` (presence `A{i}`, adds `i`) or `skip{i}`
//! (presence `!A{i}`). Location `n` loops on `done`. Every variant is
//! deterministic, and after the last location `x` is the sum of the enabled
//! features' indices.

use std::sync::Arc;

use thiserror::Error;

use crate::checker::Ctl;
use crate::featexpr::{ConfigSpace, FeatError, FeatExpr};
use crate::models::{FeaturedTransition, Fts, ModelError, Skeleton, Transition};

/// Default cap on generated states.
pub const DEFAULT_STATE_BUDGET: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("the family needs at least one feature")]
    NoFeatures,
    #[error("family would have {states} states, above the budget of {budget}")]
    StateBudget { states: usize, budget: usize },
    #[error("invalid goal `{0}`; expected e.g. `AF(x >= 0)`")]
    BadGoal(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Feat(#[from] FeatError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Ge,
    Gt,
    Le,
    Lt,
    Eq,
}

impl Cmp {
    fn holds(self, x: u64, bound: u64) -> bool {
        match self {
            Cmp::Ge => x >= bound,
            Cmp::Gt => x > bound,
            Cmp::Le => x <= bound,
            Cmp::Lt => x < bound,
            Cmp::Eq => x == bound,
        }
    }
}

/// `OP(x CMP bound)` with `OP` one of `AF EF AG EG`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Goal {
    pub op: String,
    pub cmp: Cmp,
    pub bound: u64,
}

impl std::str::FromStr for Goal {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SynthError::BadGoal(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (op, rest) = compact.split_at(compact.len().min(2));
        if !["AF", "EF", "AG", "EG"].contains(&op) {
            return Err(bad());
        }
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|r| r.strip_prefix('x'))
            .ok_or_else(bad)?;
        let (cmp, num) = [
            (">=", Cmp::Ge),
            ("<=", Cmp::Le),
            (">", Cmp::Gt),
            ("<", Cmp::Lt),
            ("=", Cmp::Eq),
        ]
        .into_iter()
        .find_map(|(lit, c)| inner.strip_prefix(lit).map(|n| (c, n)))
        .ok_or_else(bad)?;
        Ok(Goal {
            op: op.to_string(),
            cmp,
            bound: num.parse().map_err(|_| bad())?,
        })
    }
}

impl Default for Goal {
    fn default() -> Self {
        Goal {
            op: "AF".into(),
            cmp: Cmp::Ge,
            bound: 0,
        }
    }
}

/// A generated family together with its property over the `goal` label.
#[derive(Debug, Clone)]
pub struct ScaledFamily {
    pub fts: Fts,
    pub property: Ctl,
}

fn triangle(i: usize) -> usize {
    i * (i + 1) / 2
}

/// Number of states of the family with `n` features.
pub fn state_count(n: usize) -> usize {
    (0..=n).map(|i| triangle(i) + 1).sum()
}

/// Builds the family with `n` features.
pub fn scaled_family(
    n: usize,
    goal: &Goal,
    state_budget: usize,
) -> Result<ScaledFamily, SynthError> {
    if n == 0 {
        return Err(SynthError::NoFeatures);
    }
    let states = state_count(n);
    if states > state_budget {
        return Err(SynthError::StateBudget {
            states,
            budget: state_budget,
        });
    }
    let features: Vec<String> = (1..=n).map(|i| format!("A{i}")).collect();
    let space = ConfigSpace::unconstrained(features.clone())?;

    // Every x in 0..=triangle(i) is a subset sum of 1..=i, so all are reachable.
    let mut index = Vec::with_capacity(n + 1);
    let mut names = Vec::with_capacity(states);
    let mut labels = Vec::with_capacity(states);
    for i in 0..=n {
        index.push(names.len());
        for x in 0..=triangle(i) {
            names.push(format!("l{i}_x{x}"));
            let hit = goal.cmp.holds(x as u64, goal.bound);
            labels.push(if hit {
                vec!["goal".to_string()]
            } else {
                Vec::new()
            });
        }
    }
    let mut actions = Vec::new();
    for i in 1..=n {
        actions.push(format!("inc{i}"));
        actions.push(format!("skip{i}"));
    }
    actions.push("done".to_string());
    let skel = Skeleton::new(names, actions, vec!["goal".into()], labels, vec![0])?;

    let mut transitions = Vec::new();
    for i in 1..=n {
        let on = FeatExpr::var(features[i - 1].clone());
        let off = FeatExpr::not(on.clone());
        for x in 0..=triangle(i - 1) {
            let from = index[i - 1] + x;
            transitions.push(FeaturedTransition {
                transition: Transition::new(from, 2 * (i - 1), index[i] + x + i),
                presence: on.clone(),
            });
            transitions.push(FeaturedTransition {
                transition: Transition::new(from, 2 * (i - 1) + 1, index[i] + x),
                presence: off.clone(),
            });
        }
    }
    for x in 0..=triangle(n) {
        let s = index[n] + x;
        transitions.push(FeaturedTransition {
            transition: Transition::new(s, 2 * n, s),
            presence: FeatExpr::True,
        });
    }
    let atom = Ctl::atom("goal");
    let property = match goal.op.as_str() {
        "AF" => Ctl::af(atom),
        "EF" => Ctl::ef(atom),
        "AG" => Ctl::ag(atom),
        _ => Ctl::eg(atom),
    };
    Ok(ScaledFamily {
        fts: Fts::new(Arc::new(skel), space, transitions)?,
        property,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn goal_syntax() {
        assert_eq!("AF(x >= 0)".parse::<Goal>().unwrap(), Goal::default());
        let g: Goal = "EG (x<3)".parse().unwrap();
        assert_eq!((g.op.as_str(), g.cmp, g.bound), ("EG", Cmp::Lt, 3));
        assert!("AF x".parse::<Goal>().is_err());
        assert!("XF(x>1)".parse::<Goal>().is_err());
    }

    #[test]
    fn family_shape() {
        let f = scaled_family(2, &Goal::default(), DEFAULT_STATE_BUDGET).unwrap();
        // locations 0, 1, 2 hold 1, 2 and 4 counter values
        assert_eq!(f.fts.skeleton.num_states(), 7);
        assert_eq!(f.fts.space.len(), 4);
        assert_eq!(f.fts.transitions.len(), 2 + 4 + 4);
        assert_eq!(state_count(18), 1159);
        assert_eq!(
            scaled_family(30, &Goal::default(), 100).unwrap_err(),
            SynthError::StateBudget {
                states: state_count(30),
                budget: 100
            }
        );
    }
}
