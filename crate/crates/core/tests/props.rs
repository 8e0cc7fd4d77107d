//! Property tests for expressions, formulas, abstractions and checking.

use proptest::prelude::*;

use varmc_core::checker::{check_mts_components, check_mts_two_component, check_ts, VerdictKind};
use varmc_core::dsl::parse_property;
use varmc_core::featexpr::{equiv, truth_table_over};
use varmc_core::galois::{abstract_space, alpha_may, alpha_must};
use varmc_core::gen::{self, seeded, Bounds, PROPS};
use varmc_core::selftest::LassoOracle;
use varmc_core::{parse_feat_expr, Abstraction, Ctl, FeatExpr, Ts};

const FEATURES: [&str; 4] = ["a", "b", "c", "d"];

fn feat_expr() -> impl Strategy<Value = FeatExpr> {
    let leaf = prop_oneof![
        Just(FeatExpr::True),
        Just(FeatExpr::False),
        prop::sample::select(&FEATURES[..]).prop_map(FeatExpr::var),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(FeatExpr::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| FeatExpr::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| FeatExpr::or(a, b)),
        ]
    })
}

fn ctl() -> impl Strategy<Value = Ctl> {
    let leaf = prop_oneof![
        Just(Ctl::True),
        Just(Ctl::False),
        prop::sample::select(&PROPS[..]).prop_map(Ctl::atom),
        prop::sample::select(&PROPS[..]).prop_map(Ctl::neg_atom),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Ctl::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Ctl::or(a, b)),
            inner.clone().prop_map(Ctl::ax),
            inner.clone().prop_map(Ctl::ex),
            inner.clone().prop_map(Ctl::af),
            inner.clone().prop_map(Ctl::eg),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Ctl::au(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Ctl::er(a, b)),
        ]
    })
}

fn is_nnf(phi: &Ctl) -> bool {
    match phi {
        Ctl::True | Ctl::False | Ctl::Atom(_) | Ctl::NegAtom(_) => true,
        Ctl::And(a, b) | Ctl::Or(a, b) => is_nnf(a) && is_nnf(b),
        Ctl::A(p) | Ctl::E(p) => p.operands().into_iter().all(is_nnf),
    }
}

fn vars() -> Vec<String> {
    FEATURES.iter().map(|s| s.to_string()).collect()
}

/// A non-empty space over `FEATURES` with constraint `c`, or the full space.
fn space_with(c: FeatExpr) -> varmc_core::ConfigSpace {
    let k = varmc_core::ConfigSpace::new(vars(), c).unwrap();
    if k.is_empty() {
        varmc_core::ConfigSpace::unconstrained(vars()).unwrap()
    } else {
        k
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn feat_expr_display_round_trips(e in feat_expr()) {
        let again = parse_feat_expr(&e.to_string()).unwrap();
        prop_assert_eq!(truth_table_over(&again, &vars()), truth_table_over(&e, &vars()));
    }

    #[test]
    fn nnf_preserves_meaning(e in feat_expr()) {
        let n = e.nnf();
        prop_assert!(n.is_nnf());
        prop_assert!(equiv(&n, &e));
    }

    #[test]
    fn simplify_preserves_meaning(e in feat_expr()) {
        prop_assert!(equiv(&e.simplify(), &e));
    }

    #[test]
    fn exists_is_shannon(e in feat_expr(), f in prop::sample::select(&FEATURES[..])) {
        let shannon = FeatExpr::or(e.cofactor(f, true), e.cofactor(f, false));
        prop_assert!(equiv(&e.exists(f), &shannon));
    }

    #[test]
    fn ignore_brackets_the_expression(e in feat_expr(), f in prop::sample::select(&FEATURES[..])) {
        let k = varmc_core::ConfigSpace::unconstrained(vars()).unwrap();
        let a = Abstraction::ignore(f);
        let up = alpha_may(&a, &e, &k).unwrap();
        let down = alpha_must(&a, &e, &k).unwrap();
        // down ⊨ ∀f.e ⊨ e ⊨ ∃f.e ⊨ up
        prop_assert!(varmc_core::featexpr::entails_absolute(&down, &e));
        prop_assert!(varmc_core::featexpr::entails_absolute(&e, &up));
        prop_assert!(!up.features().contains(f) && !down.features().contains(f));
    }

    #[test]
    fn must_is_dual_of_may(e in feat_expr(), f in prop::sample::select(&FEATURES[..]), c in feat_expr()) {
        let k = space_with(c);
        for a in [Abstraction::Join, Abstraction::ignore(f)] {
            let down = alpha_must(&a, &e, &k).unwrap();
            let dual = FeatExpr::not(alpha_may(&a, &FeatExpr::not(e.clone()), &k).unwrap());
            prop_assert!(equiv(&down, &dual), "{a}: {down} vs {dual}");
        }
    }

    #[test]
    fn join_decides_by_quantifying_over_k(e in feat_expr(), c in feat_expr()) {
        let k = space_with(c);
        let up = alpha_may(&Abstraction::Join, &e, &k).unwrap();
        let down = alpha_must(&Abstraction::Join, &e, &k).unwrap();
        prop_assert_eq!(up == FeatExpr::True, k.any_satisfies(&e).unwrap());
        prop_assert_eq!(down == FeatExpr::True, k.all_satisfy(&e).unwrap());
        prop_assert!(abstract_space(&Abstraction::Join, &k).unwrap().space.len() == 1);
    }

    #[test]
    fn negation_is_an_involution(phi in ctl()) {
        let neg = phi.negate_nnf();
        prop_assert!(is_nnf(&neg));
        prop_assert_eq!(neg.negate_nnf(), phi.clone());
        prop_assert_eq!(neg.is_universal(), phi.is_existential());
    }

    #[test]
    fn ctl_display_round_trips(phi in ctl()) {
        prop_assert_eq!(parse_property(&phi.to_string()).unwrap(), phi);
    }

    #[test]
    fn negation_flips_verdicts(phi in ctl(), seed in any::<u64>()) {
        let m = gen::mts(&mut seeded(seed), Bounds { max_states: 5, max_features: 1, max_transitions: 10 });
        let ts = Ts { skeleton: m.skeleton, transitions: m.may };
        let v = check_ts(&ts, &phi).unwrap().kind();
        let n = check_ts(&ts, &phi.negate_nnf()).unwrap().kind();
        prop_assert!(v != n);
    }

    #[test]
    fn fixpoints_match_lasso_semantics(phi in ctl(), seed in any::<u64>()) {
        let m = gen::mts(&mut seeded(seed), Bounds { max_states: 5, max_features: 1, max_transitions: 10 });
        let ts = Ts { skeleton: m.skeleton, transitions: m.may };
        let got = check_ts(&ts, &phi).unwrap().kind() == VerdictKind::Holds;
        prop_assert_eq!(got, LassoOracle::new(&ts.skeleton, &ts.transitions).holds(&phi));
    }

    #[test]
    fn single_quantifier_fragments_use_one_component(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let mts = gen::mts(&mut rng, Bounds::default());
        let phi = gen::ctl(&mut rng, &PROPS, 3);
        let both = check_mts_components(&mts, &phi).unwrap();
        let two = check_mts_two_component(&mts, &phi).unwrap();
        if phi.is_universal() {
            prop_assert_eq!(two, both.may.kind());
        }
        if phi.is_existential() {
            prop_assert_eq!(two, both.must.kind());
        }
    }

    #[test]
    fn witnesses_replay(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let m = gen::mts(&mut rng, Bounds::default());
        let ts = Ts { skeleton: m.skeleton, transitions: m.may };
        let phi = gen::ctl(&mut rng, &PROPS, 2);
        if let Some(w) = check_ts(&ts, &phi).unwrap().evidence() {
            for p in w.paths() {
                prop_assert!(p.is_well_formed());
                let completed = p.steps().all(|t| {
                    ts.transitions.contains(&t)
                        || (t.is_idle() && !ts.transitions.iter().any(|u| u.source == t.source))
                });
                prop_assert!(completed, "{}", p.render(&ts.skeleton));
            }
        }
    }
}
