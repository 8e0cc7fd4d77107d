//! Seeded random models, formulas and plans for differential testing.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::checker::Ctl;
use crate::featexpr::{ConfigSpace, FeatExpr};
use crate::galois::Abstraction;
use crate::models::{FeaturedTransition, Fts, Mts, Skeleton, Transition};

/// Size bounds for generated families.
#[derive(Debug, Clone, Copy)]
pub struct Bounds {
    pub max_states: usize,
    pub max_features: usize,
    pub max_transitions: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_states: 6,
            max_features: 4,
            max_transitions: 12,
        }
    }
}

/// The generator every seeded command and test uses.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const PROPS: [&str; 2] = ["p", "q"];
const ACTIONS: [&str; 3] = ["a", "b", "c"];

pub fn feature_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("f{i}")).collect()
}

/// A random expression over `features` with at most `depth` nested
/// connectives.
pub fn feat_expr<R: Rng>(rng: &mut R, features: &[String], depth: usize) -> FeatExpr {
    let leaf = depth == 0 || rng.gen_bool(0.35);
    if leaf {
        if features.is_empty() || rng.gen_bool(0.1) {
            return if rng.gen_bool(0.5) {
                FeatExpr::True
            } else {
                FeatExpr::False
            };
        }
        let v = FeatExpr::var(features.choose(rng).unwrap().clone());
        return if rng.gen_bool(0.3) {
            FeatExpr::not(v)
        } else {
            v
        };
    }
    match rng.gen_range(0..3) {
        0 => FeatExpr::not(feat_expr(rng, features, depth - 1)),
        1 => FeatExpr::and(
            feat_expr(rng, features, depth - 1),
            feat_expr(rng, features, depth - 1),
        ),
        _ => FeatExpr::or(
            feat_expr(rng, features, depth - 1),
            feat_expr(rng, features, depth - 1),
        ),
    }
}

/// A random non-empty configuration space over `n` features.
pub fn space<R: Rng>(rng: &mut R, n: usize) -> ConfigSpace {
    let features = feature_names(n);
    for _ in 0..32 {
        let constraint = if rng.gen_bool(0.3) {
            FeatExpr::True
        } else {
            feat_expr(rng, &features, 2)
        };
        let k = ConfigSpace::new(features.clone(), constraint).expect("generated names are valid");
        if !k.is_empty() {
            return k;
        }
    }
    ConfigSpace::unconstrained(features).expect("generated names are valid")
}

fn skeleton<R: Rng>(rng: &mut R, n: usize) -> Skeleton {
    let labels = (0..n)
        .map(|_| {
            PROPS
                .iter()
                .filter(|_| rng.gen_bool(0.4))
                .map(|p| p.to_string())
                .collect()
        })
        .collect();
    Skeleton::new(
        (0..n).map(|i| format!("s{i}")).collect(),
        ACTIONS.iter().map(|a| a.to_string()).collect(),
        PROPS.iter().map(|p| p.to_string()).collect(),
        labels,
        vec![0],
    )
    .expect("generated skeleton is well formed")
}

fn transition<R: Rng>(rng: &mut R, n: usize) -> Transition {
    Transition::new(
        rng.gen_range(0..n),
        rng.gen_range(0..ACTIONS.len()),
        rng.gen_range(0..n),
    )
}

/// A random FTS within `bounds`; state 0 is initial.
pub fn fts<R: Rng>(rng: &mut R, bounds: Bounds) -> Fts {
    let n = rng.gen_range(1..=bounds.max_states);
    let nf = rng.gen_range(1..=bounds.max_features);
    let k = space(rng, nf);
    let skel = Arc::new(skeleton(rng, n));
    let m = rng.gen_range(1..=bounds.max_transitions);
    let transitions = (0..m)
        .map(|_| FeaturedTransition {
            transition: transition(rng, n),
            presence: if rng.gen_bool(0.25) {
                FeatExpr::True
            } else {
                feat_expr(rng, k.features(), 2)
            },
        })
        .collect();
    Fts::new(skel, k, transitions).expect("generated transitions are in range")
}

/// A random MTS with `must ⊆ may`.
pub fn mts<R: Rng>(rng: &mut R, bounds: Bounds) -> Mts {
    let n = rng.gen_range(1..=bounds.max_states);
    let skel = Arc::new(skeleton(rng, n));
    let mut may: Vec<Transition> = (0..rng.gen_range(1..=bounds.max_transitions))
        .map(|_| transition(rng, n))
        .collect();
    may.sort();
    may.dedup();
    let must = may.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    Mts {
        skeleton: skel,
        may,
        must,
    }
}

/// A random NNF formula over `props` with temporal depth at most `depth`.
pub fn ctl<R: Rng>(rng: &mut R, props: &[&str], depth: usize) -> Ctl {
    if depth == 0 || rng.gen_bool(0.2) {
        let p = *props.choose(rng).unwrap();
        return match rng.gen_range(0..8) {
            0 => Ctl::True,
            1 => Ctl::False,
            2 | 3 => Ctl::neg_atom(p),
            _ => Ctl::atom(p),
        };
    }
    let sub = |rng: &mut R| ctl(rng, props, depth - 1);
    let cases = if depth >= 2 { 16 } else { 12 };
    let inner = |rng: &mut R| ctl(rng, props, depth.saturating_sub(2));
    match rng.gen_range(0..cases) {
        0 => Ctl::and(sub(rng), sub(rng)),
        1 => Ctl::or(sub(rng), sub(rng)),
        2 => Ctl::ax(sub(rng)),
        3 => Ctl::ex(sub(rng)),
        4 => Ctl::af(sub(rng)),
        5 => Ctl::ef(sub(rng)),
        6 => Ctl::ag(sub(rng)),
        7 => Ctl::eg(sub(rng)),
        8 => Ctl::au(sub(rng), sub(rng)),
        9 => Ctl::eu(sub(rng), sub(rng)),
        10 => Ctl::ar(sub(rng), sub(rng)),
        11 => Ctl::er(sub(rng), sub(rng)),
        12 => Ctl::ag(Ctl::af(inner(rng))),
        13 => Ctl::ag(Ctl::ef(inner(rng))),
        14 => Ctl::eg(Ctl::ef(inner(rng))),
        _ => Ctl::af(Ctl::ag(inner(rng))),
    }
}

/// Join, a single ignore, or an ignore followed by join.
pub fn abstraction<R: Rng>(rng: &mut R, k: &ConfigSpace) -> Abstraction {
    let features = k.features();
    if features.is_empty() {
        return Abstraction::Join;
    }
    let f = features.choose(rng).unwrap().clone();
    match rng.gen_range(0..4) {
        0 | 1 => Abstraction::Join,
        2 => Abstraction::ignore(f),
        _ => Abstraction::ignore(f).then(Abstraction::Join),
    }
}

/// A one-cell plan or a two-cell partition `ψ ; ¬ψ` with non-empty cells.
pub fn plan<R: Rng>(rng: &mut R, k: &ConfigSpace) -> Vec<(FeatExpr, Abstraction)> {
    if rng.gen_bool(0.5) {
        for _ in 0..8 {
            let psi = feat_expr(rng, k.features(), 2);
            let n = k
                .satisfying_configs(&psi)
                .expect("features are declared")
                .len();
            if n > 0 && n < k.len() {
                return vec![
                    (psi.clone(), abstraction(rng, k)),
                    (FeatExpr::not(psi), abstraction(rng, k)),
                ];
            }
        }
    }
    vec![(FeatExpr::True, abstraction(rng, k))]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_seeded() {
        let a = fts(&mut seeded(7), Bounds::default());
        let b = fts(&mut seeded(7), Bounds::default());
        assert_eq!(a.transitions, b.transitions);
        assert_eq!(a.space, b.space);
    }

    #[test]
    fn generated_objects_respect_bounds() {
        let mut rng = seeded(1);
        for _ in 0..50 {
            let f = fts(&mut rng, Bounds::default());
            assert!(f.skeleton.num_states() <= 6 && f.space.features().len() <= 4);
            assert!(f.transitions.len() <= 12 && !f.space.is_empty());
            let m = mts(&mut rng, Bounds::default());
            assert!(m.must.iter().all(|t| m.may.contains(t)));
            assert!(ctl(&mut rng, &PROPS, 3).temporal_depth() <= 3);
            let p = plan(&mut rng, &f.space);
            let covered: usize = p
                .iter()
                .map(|(psi, _)| f.space.satisfying_configs(psi).unwrap().len())
                .sum();
            assert_eq!(covered, f.space.len());
        }
    }
}
