//! Golden results on the bundled vending machine family.

use varmc_core::bundled;
use varmc_core::checker::{
    attribute_counterexample, check_mts_components, check_mts_direct, check_mts_sound, check_ts,
    EvidenceKind, SoundOutcome, Verdict, VerdictKind,
};
use varmc_core::dsl::{apply_abstraction_syntactic, apply_invar, parse_path, parse_property, Mode};
use varmc_core::models::fts_equivalent;
use varmc_core::{
    check_family_abstract, check_fts_brute_force, parse_feat_expr, Abstraction, CheckOptions, Ctl,
    FeatExpr, Fts, Validate,
};

fn vm() -> (varmc_core::ModelDocument, Fts) {
    bundled::vending().unwrap()
}

fn prop(name: &str) -> Ctl {
    vm().0.property(name).unwrap().clone()
}

fn e(text: &str) -> FeatExpr {
    parse_feat_expr(text).unwrap()
}

fn names(fts: &Fts, configs: &[varmc_core::Config]) -> Vec<String> {
    configs.iter().map(|k| fts.space.render(*k)).collect()
}

#[test]
fn model_shape() {
    let (_, fts) = vm();
    assert_eq!(fts.skeleton.num_states(), 8);
    assert_eq!(fts.transitions.len(), 13);
    assert_eq!(fts.space.features().len(), 5);
    assert_eq!(fts.space.len(), 8);
    assert!(!fts.has_errors());
    // every variant is deadlock free, so completion adds nothing
    assert_eq!(fts.complete().unwrap().transitions.len(), 13);
}

#[test]
fn brute_force_golden() {
    let (_, fts) = vm();
    let opts = CheckOptions::default();
    let r1 = check_fts_brute_force(&fts, &prop("P1"), &opts).unwrap();
    let s1 = r1.summary();
    let mut want: Vec<_> = [
        &["v", "s", "c"][..],
        &["v", "s", "t", "c"],
        &["v", "s", "c", "f"],
        &["v", "s", "t", "c", "f"],
    ]
    .iter()
    .map(|fs| fts.space.config_of(fs).unwrap())
    .collect();
    want.sort();
    assert_eq!(s1.fails, want, "{:?}", names(&fts, &s1.fails));
    assert_eq!(s1.holds.len(), 4);
    for p in ["P2", "P3"] {
        let r = check_fts_brute_force(&fts, &prop(p), &opts).unwrap();
        assert_eq!(r.summary().holds.len(), 8, "{p}");
    }
}

#[test]
fn single_variant_checks() {
    let (_, fts) = vm();
    let ok = fts.space.config_of(&["v", "s"]).unwrap();
    assert_eq!(
        check_ts(&fts.project_variant(ok).unwrap(), &prop("P1"))
            .unwrap()
            .kind(),
        VerdictKind::Holds
    );
    let bad = fts.space.config_of(&["v", "s", "c"]).unwrap();
    let v = check_ts(&fts.project_variant(bad).unwrap(), &prop("P1")).unwrap();
    let Verdict::Fails(Some(w)) = v else {
        panic!("expected evidence")
    };
    let start = fts.skeleton.state_id("1").unwrap();
    let cycle = &w.main.states[w.main.loop_start.unwrap()..];
    assert!(!cycle.contains(&start));
    assert!(w
        .main
        .replays_on(&fts.project_variant(bad).unwrap().transitions));
    assert_eq!(
        check_ts(&fts.project_variant(ok).unwrap(), &Ctl::True)
            .unwrap()
            .kind(),
        VerdictKind::Holds
    );
}

#[test]
fn partition_plan_decides_phi1() {
    let (_, fts) = vm();
    let plan = vec![(e("c"), Abstraction::Join), (e("!c"), Abstraction::Join)];
    let r = check_family_abstract(&fts, &prop("P1"), &plan, &CheckOptions::default()).unwrap();
    let s = r.summary();
    assert!(s.inconclusive.is_empty());
    assert_eq!(s.fails, fts.space.satisfying_configs(&e("c")).unwrap());
    assert_eq!(s.holds, fts.space.satisfying_configs(&e("!c")).unwrap());
    let ev = &r.evidence[0];
    assert_eq!(ev.kind, EvidenceKind::AbstractRefutation);
    assert!(ev.witness.main.is_lasso());
    assert!(fts.space.entails(&ev.attributed, &e("c")).unwrap());
}

#[test]
fn join_over_whole_family() {
    let (_, fts) = vm();
    let plan = vec![(FeatExpr::True, Abstraction::Join)];
    let opts = CheckOptions::default();
    for p in ["P2", "P3"] {
        let r = check_family_abstract(&fts, &prop(p), &plan, &opts).unwrap();
        assert_eq!(r.summary().holds.len(), 8, "{p}");
    }
    // the join is too coarse for P1: genuine failures are still found
    let r = check_family_abstract(&fts, &prop("P1"), &plan, &opts).unwrap();
    let s = r.summary();
    assert_eq!(s.fails, fts.space.satisfying_configs(&e("c")).unwrap());
    assert_eq!(s.holds.len(), 0);
    assert_eq!(s.inconclusive.len(), 4);
}

#[test]
fn join_mts_components() {
    let (_, fts) = vm();
    let m = fts.abstract_fts(&Abstraction::Join).unwrap();
    assert_eq!(m.may.len(), 13);
    assert_eq!(m.must.len(), 6);
    let mts = m.project_variant(varmc_core::Config(0)).unwrap();
    let c2 = check_mts_components(&mts, &prop("P2")).unwrap();
    assert_eq!(
        (c2.may.kind(), c2.must.kind()),
        (VerdictKind::Holds, VerdictKind::Holds)
    );
    let c1 = check_mts_components(&mts, &prop("P1")).unwrap();
    assert_eq!(c1.may.kind(), VerdictKind::Fails);
    // states 4 and 6 have no must path back to start, so the modal reading
    // cannot prove P2; the sound family reading can
    assert_eq!(
        check_mts_direct(&mts, &prop("P2")).unwrap().kind(),
        VerdictKind::Fails
    );
    assert!(matches!(
        check_mts_sound(&mts, &prop("P2")).unwrap(),
        SoundOutcome::Proved(_)
    ));

    let SoundOutcome::Proved(Some(w)) = check_mts_sound(&mts, &prop("P3")).unwrap() else {
        panic!("P3 is proved on the join");
    };
    let path = parse_path(
        &fts,
        "1 -pay-> 2 -change-> 3 -soda-> 5 -serveSoda-> 7 -open-> 8 -take-> 1 loop 0",
    )
    .unwrap();
    assert_eq!(w.main, path);
    assert!(w.main.replays_on(&mts.must));
    let Verdict::Holds(Some(w)) = check_mts_direct(&mts, &prop("P3")).unwrap() else {
        panic!("P3 holds on the must graph");
    };
    assert_eq!(w.main, path);
}

#[test]
fn attribution_golden() {
    let (_, fts) = vm();
    let free_loop = parse_path(&fts, "1 -> 3 -> 5 -> 7 -> 3 loop 1").unwrap();
    let a = attribute_counterexample(&fts, &free_loop).unwrap();
    assert!(varmc_core::featexpr::equiv(&a, &e("f & s & c")));
    assert_eq!(fts.space.satisfying_configs(&a).unwrap().len(), 2);
    let main = parse_path(&fts, "1 -> 2 -> 3 -> 5 -> 7 -> 8 -> 1 loop 0").unwrap();
    let a = attribute_counterexample(&fts, &main).unwrap();
    assert!(varmc_core::featexpr::equiv(&a, &e("v & s")));
    let pay = parse_path(&fts, "1 -pay-> 2").unwrap();
    assert_eq!(attribute_counterexample(&fts, &pay).unwrap(), e("v"));
    let twice = parse_path(&fts, "1 -> 3 -> 5 -> 7 -> 3 -> 5 -> 7 -> 3 loop 4").unwrap();
    assert_eq!(
        attribute_counterexample(&fts, &twice).unwrap(),
        attribute_counterexample(&fts, &free_loop).unwrap()
    );
}

#[test]
fn attributed_variants_replay() {
    let (_, fts) = vm();
    let p = parse_path(&fts, "1 -> 3 -> 5 -> 7 -> 3 loop 1").unwrap();
    let a = attribute_counterexample(&fts, &p).unwrap();
    for &k in fts.space.valid_configs() {
        let ts = fts.project_variant(k).unwrap();
        assert_eq!(
            fts.space.eval(k, &a).unwrap(),
            p.replays_on(&ts.transitions)
        );
    }
}

#[test]
fn syntactic_transforms() {
    let (doc, fts) = vm();
    let not_c = apply_invar(&doc, &e("!c")).unwrap();
    assert_eq!(not_c.space().unwrap().len(), 4);
    assert!(fts_equivalent(
        &not_c.to_fts().unwrap(),
        &fts.project_subset(&e("!c")).unwrap()
    ));
    assert!(fts_equivalent(
        &apply_invar(&doc, &FeatExpr::True)
            .unwrap()
            .to_fts()
            .unwrap(),
        &fts
    ));

    let may = apply_abstraction_syntactic(&doc, &Abstraction::Join, Mode::May).unwrap();
    assert!(may.features.is_empty());
    assert_eq!(may.transitions.len(), 13);
    assert!(may.transitions.iter().all(|t| t.when.is_none()));
    let must = apply_abstraction_syntactic(&doc, &Abstraction::Join, Mode::Must).unwrap();
    assert_eq!(must.transitions.len(), 6);
    let m = fts.abstract_fts(&Abstraction::Join).unwrap();
    assert!(fts_equivalent(&must.to_fts().unwrap(), &m.must_component()));
    assert!(fts_equivalent(&may.to_fts().unwrap(), &m.may_component()));
}

#[test]
fn ignore_after_projection() {
    let (doc, _) = vm();
    let projected = apply_invar(&doc, &e("v & s")).unwrap();
    let a = Abstraction::ignore_all(&["t", "f"]).unwrap();
    let may = apply_abstraction_syntactic(&projected, &a, Mode::May).unwrap();
    let must = apply_abstraction_syntactic(&projected, &a, Mode::Must).unwrap();
    assert_eq!(may.features, vec!["v", "s", "c"]);
    assert_eq!(may.space().unwrap().len(), 2);
    assert_eq!(may.transitions.len(), 13);
    // tea, serveTea, free and the f-guarded take are must-absent
    assert_eq!(must.transitions.len(), 9);
}

#[test]
fn dummy_ignore_matches_brute_force() {
    let (doc, _) = vm();
    let mut with_dummy = doc.clone();
    with_dummy.features.push("d".into());
    let fts = with_dummy.to_fts().unwrap();
    let opts = CheckOptions::default();
    for p in ["P1", "P2", "P3"] {
        let phi = prop(p);
        let plan = vec![(FeatExpr::True, Abstraction::ignore("d"))];
        let abs = check_family_abstract(&fts, &phi, &plan, &opts).unwrap();
        let brute = check_fts_brute_force(&fts, &phi, &opts).unwrap();
        assert_eq!(abs.kinds(), brute.kinds(), "{p}");
    }
}

#[test]
fn properties_parse_as_written() {
    assert_eq!(prop("P1"), parse_property("AG ( AF start )").unwrap());
    assert_eq!(prop("P3"), Ctl::eg(Ctl::ef(Ctl::atom("start"))));
    assert_eq!(
        prop("P1").negate_nnf(),
        Ctl::ef(Ctl::eg(Ctl::neg_atom("start")))
    );
}
