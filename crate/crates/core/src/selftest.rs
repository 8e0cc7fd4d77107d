//! Independent oracles and seeded differential suites.
//!
//! Each suite returns a [`Tally`]; a suite passes when it records no
//! violation. Case `i` of a suite seeded with `s` draws from its own
//! generator, so results do not depend on the worker count.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;

use crate::bundled;
use crate::checker::{
    attribute_counterexample, check_family_abstract, check_fts_brute_force, check_mts_direct,
    check_mts_two_component, check_ts, CheckOptions, Ctl, PathFormula, VerdictKind,
};
use crate::dsl::{
    apply_abstraction_syntactic, apply_invar, parse_document, print_model, DslError, Mode,
    ModelDocument,
};
use crate::exec::Exec;
use crate::featexpr::{equiv, Config, ConfigSpace, FeatExpr};
use crate::galois::{alpha_may, alpha_must, check_galois_law, Abstraction};
use crate::gen::{self, seeded, Bounds, PROPS};
use crate::models::{
    enumerate_lassos, fts_equivalent, Fts, Mfts, Path, Skeleton, Transition, Ts, STUTTER,
};

/// Outcome of one suite.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tally {
    pub cases: usize,
    pub checks: u64,
    pub violations: Vec<String>,
    /// Observations that are not failures, such as recorded disagreements.
    pub findings: Vec<String>,
}

impl Tally {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn merge(&mut self, other: Tally) {
        self.cases += other.cases;
        self.checks += other.checks;
        self.violations.extend(other.violations);
        self.findings.extend(other.findings);
    }

    fn violation(&mut self, msg: String) {
        self.violations.push(msg);
    }
}

impl fmt::Display for Tally {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} cases, {} checks, {} violations, {} findings",
            self.cases,
            self.checks,
            self.violations.len(),
            self.findings.len()
        )
    }
}

fn case_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(i as u64)
}

fn run_cases(exec: Exec, seed: u64, cases: usize, f: impl Fn(u64) -> Tally + Sync) -> Tally {
    let seeds: Vec<u64> = (0..cases).map(|i| case_seed(seed, i)).collect();
    let mut out = Tally::default();
    for t in exec.map(&seeds, |s| f(*s)) {
        out.merge(t);
    }
    out
}

// ---------------------------------------------------------------------------
// Enumerative CTL semantics

/// Direct CTL semantics over lassos, for small systems.
///
/// Deadlocks get an idle loop. A path quantifier ranges over the lassos
/// whose states are distinct except the last, which closes the loop. Every
/// operator of the fragment has a witness of that shape: a simple prefix to
/// the deciding position, continued until the first repeated state.
pub struct LassoOracle<'a> {
    skel: &'a Skeleton,
    lassos: Vec<Vec<Vec<usize>>>,
    memo: HashMap<(*const Ctl, usize), bool>,
}

impl<'a> LassoOracle<'a> {
    pub fn new(skel: &'a Skeleton, transitions: &[Transition]) -> Self {
        let n = skel.num_states();
        let mut succ = vec![Vec::new(); n];
        for t in transitions {
            if !succ[t.source].contains(&t.target) {
                succ[t.source].push(t.target);
            }
        }
        for (s, out) in succ.iter_mut().enumerate() {
            if out.is_empty() {
                out.push(s);
            }
        }
        let lassos = (0..n).map(|s| Self::lassos_from(&succ, s)).collect();
        LassoOracle {
            skel,
            lassos,
            memo: HashMap::new(),
        }
    }

    /// Each lasso is its states followed by the loop index.
    fn lassos_from(succ: &[Vec<usize>], s: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut stack = vec![vec![s]];
        while let Some(p) = stack.pop() {
            let last = *p.last().unwrap();
            for &u in &succ[last] {
                let mut q = p.clone();
                match p.iter().position(|x| *x == u) {
                    Some(i) => {
                        q.push(u);
                        q.push(i);
                        out.push(q);
                    }
                    None => {
                        q.push(u);
                        stack.push(q);
                    }
                }
            }
        }
        out
    }

    /// Number of lassos starting in `s`.
    pub fn lasso_count(&self, s: usize) -> usize {
        self.lassos[s].len()
    }

    pub fn holds(&mut self, phi: &Ctl) -> bool {
        self.skel
            .initial()
            .to_vec()
            .into_iter()
            .all(|s| self.eval(phi, s))
    }

    pub fn eval(&mut self, phi: &Ctl, s: usize) -> bool {
        let key = (phi as *const Ctl, s);
        if let Some(v) = self.memo.get(&key) {
            return *v;
        }
        let v = match phi {
            Ctl::True => true,
            Ctl::False => false,
            Ctl::Atom(p) => self.has(s, p),
            Ctl::NegAtom(p) => !self.has(s, p),
            Ctl::And(a, b) => self.eval(a, s) && self.eval(b, s),
            Ctl::Or(a, b) => self.eval(a, s) || self.eval(b, s),
            Ctl::E(pf) => {
                let ls = self.lassos[s].clone();
                ls.iter().any(|l| self.on_lasso(pf, l))
            }
            Ctl::A(pf) => {
                let ls = self.lassos[s].clone();
                ls.iter().all(|l| self.on_lasso(pf, l))
            }
        };
        self.memo.insert(key, v);
        v
    }

    fn has(&self, s: usize, p: &str) -> bool {
        self.skel.label_names(s).contains(&p)
    }

    /// `l` is `states ++ [loop index]`; positions `0..steps` are visited in
    /// order before the cycle repeats.
    fn on_lasso(&mut self, pf: &PathFormula, l: &[usize]) -> bool {
        let states = &l[..l.len() - 1];
        let steps = states.len() - 1;
        let pos = &states[..steps];
        match pf {
            PathFormula::Next(f) => self.eval(f, states[1]),
            PathFormula::Eventually(g) => pos.iter().any(|s| self.eval(g, *s)),
            PathFormula::Globally(f) => pos.iter().all(|s| self.eval(f, *s)),
            PathFormula::Until(f, g) => {
                for s in pos {
                    if self.eval(g, *s) {
                        return true;
                    }
                    if !self.eval(f, *s) {
                        return false;
                    }
                }
                false
            }
            PathFormula::Release(f, g) => {
                for s in pos {
                    if !self.eval(g, *s) {
                        return false;
                    }
                    if self.eval(f, *s) {
                        return true;
                    }
                }
                true
            }
        }
    }
}

/// Random TS with at most `max_states` states.
fn random_ts<R: Rng>(rng: &mut R, max_states: usize) -> Ts {
    let m = gen::mts(
        rng,
        Bounds {
            max_states,
            max_features: 1,
            max_transitions: 2 * max_states,
        },
    );
    Ts {
        skeleton: m.skeleton,
        transitions: m.may,
    }
}

/// `check_ts` against [`LassoOracle`], plus the negation duality.
pub fn checker_oracle(exec: Exec, seed: u64, cases: usize) -> Tally {
    run_cases(exec, seed, cases, |s| {
        let mut rng = seeded(s);
        let ts = random_ts(&mut rng, 5);
        let phi = gen::ctl(&mut rng, &PROPS, 3);
        let mut t = Tally {
            cases: 1,
            checks: 2,
            ..Tally::default()
        };
        let got = check_ts(&ts, &phi).expect("generated atoms exist").kind();
        let want = LassoOracle::new(&ts.skeleton, &ts.transitions).holds(&phi);
        if (got == VerdictKind::Holds) != want {
            t.violation(format!(
                "seed {s}: check_ts says {got} on `{phi}`, lasso semantics says {want}"
            ));
        }
        let neg = check_ts(&ts, &phi.negate_nnf())
            .expect("generated atoms exist")
            .kind();
        let single_initial = ts.skeleton.initial().len() == 1;
        if single_initial && (got == VerdictKind::Holds) == (neg == VerdictKind::Holds) {
            t.violation(format!("seed {s}: `{phi}` and its negation agree ({got})"));
        }
        t
    })
}

// ---------------------------------------------------------------------------
// Galois connections

fn all_spaces(n: usize) -> Vec<ConfigSpace> {
    let features = gen::feature_names(n);
    let rows = 1usize << n;
    (1u64..(1u64 << rows))
        .map(|mask| {
            let configs: Vec<Config> = (0..rows)
                .filter(|r| mask >> r & 1 == 1)
                .map(|r| Config(r as u64))
                .collect();
            ConfigSpace::from_configs(features.clone(), &configs)
                .expect("generated names are valid")
        })
        .collect()
}

fn single_abstractions(k: &ConfigSpace) -> Vec<Abstraction> {
    std::iter::once(Abstraction::Join)
        .chain(k.features().iter().map(|f| Abstraction::ignore(f.clone())))
        .collect()
}

/// Both adjunctions for join and every single ignore, over every non-empty
/// configuration space with at most `max_features` features.
pub fn galois_exhaustive(exec: Exec, max_features: usize) -> Tally {
    let spaces: Vec<ConfigSpace> = (0..=max_features).flat_map(all_spaces).collect();
    let per_space = exec.map(&spaces, |k| {
        let mut t = Tally::default();
        for a in single_abstractions(k) {
            t.cases += 1;
            match check_galois_law(&a, k, u128::MAX) {
                Ok(r) => {
                    t.checks += (r.may_pairs + r.must_pairs) as u64;
                    if let Some(v) = r.violation {
                        t.violation(format!(
                            "{a} over {:?}: {:?} law broken on ({}, {})",
                            k.valid_configs(),
                            v.connection,
                            v.concrete,
                            v.abstract_expr
                        ));
                    }
                }
                Err(e) => t.violation(format!("{a}: {e}")),
            }
        }
        t
    });
    let mut out = Tally::default();
    per_space.into_iter().for_each(|t| out.merge(t));
    out
}

/// `α̃(ψ) ≡ ¬α(¬ψ)` on random expressions.
pub fn duality(exec: Exec, seed: u64, cases: usize, max_features: usize) -> Tally {
    run_cases(exec, seed, cases, |s| {
        let mut rng = seeded(s);
        let n = rng.gen_range(1..=max_features);
        let k = gen::space(&mut rng, n);
        let psi = gen::feat_expr(&mut rng, k.features(), 4);
        let mut t = Tally {
            cases: 1,
            ..Tally::default()
        };
        for a in single_abstractions(&k) {
            t.checks += 1;
            let down = alpha_must(&a, &psi, &k).expect("valid abstraction");
            let dual = FeatExpr::not(
                alpha_may(&a, &FeatExpr::not(psi.clone()), &k).expect("valid abstraction"),
            );
            if !equiv(&down, &dual) {
                t.violation(format!(
                    "seed {s}: {a} on `{psi}`: must gives `{down}`, dual gives `{dual}`"
                ));
            }
        }
        t
    })
}

// ---------------------------------------------------------------------------
// Structural invariant of abstract families

/// Must transitions missing from may, or whose must presence does not
/// entail the may presence.
pub fn structural_violations(m: &Mfts) -> Vec<String> {
    let mut out = Vec::new();
    for ft in &m.must {
        let render = m.skeleton.render_transition(&ft.transition);
        match m.may.iter().find(|u| u.transition == ft.transition) {
            None => out.push(format!("must transition {render} is not a may transition")),
            Some(u) => {
                if !m.space.entails(&ft.presence, &u.presence).unwrap_or(false) {
                    out.push(format!(
                        "must presence of {render} does not entail its may presence"
                    ));
                }
            }
        }
    }
    out
}

/// The abstract families a plan builds, rebuilt independently.
pub fn plan_mfts(fts: &Fts, plan: &[(FeatExpr, Abstraction)]) -> Vec<Mfts> {
    let complete = fts.complete().expect("generated family is well formed");
    plan.iter()
        .filter_map(|(psi, a)| complete.project_subset(psi).ok()?.abstract_fts(a).ok())
        .collect()
}

// ---------------------------------------------------------------------------
// End-to-end soundness

/// Counts for the soundness suite.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SoundnessTally {
    pub tally: Tally,
    pub holds: usize,
    pub fails: usize,
    pub inconclusive: usize,
    pub structural_checks: usize,
    pub structural_violations: Vec<String>,
}

/// Abstract family checking against brute force on random families,
/// formulas and plans.
pub fn soundness(exec: Exec, seed: u64, cases: usize) -> SoundnessTally {
    let seeds: Vec<u64> = (0..cases).map(|i| case_seed(seed, i)).collect();
    let opts = CheckOptions {
        exec: Exec::Sequential,
        ..CheckOptions::default()
    };
    let results = exec.map(&seeds, |&s| {
        let mut rng = seeded(s);
        let fts = gen::fts(&mut rng, Bounds::default());
        let phi = gen::ctl(&mut rng, &PROPS, 3);
        let plan = gen::plan(&mut rng, &fts.space);
        let mut out = SoundnessTally::default();
        out.tally.cases = 1;
        let brute = match check_fts_brute_force(&fts, &phi, &opts) {
            Ok(r) => r.kinds(),
            Err(e) => {
                out.tally
                    .violation(format!("seed {s}: brute force failed: {e}"));
                return out;
            }
        };
        let abs = match check_family_abstract(&fts, &phi, &plan, &opts) {
            Ok(r) => r,
            Err(e) => {
                out.tally
                    .violation(format!("seed {s}: abstract check failed: {e}"));
                return out;
            }
        };
        for (k, kind) in abs.kinds() {
            out.tally.checks += 1;
            match kind {
                VerdictKind::Holds => out.holds += 1,
                VerdictKind::Fails => out.fails += 1,
                VerdictKind::Inconclusive => {
                    out.inconclusive += 1;
                    continue;
                }
            }
            if brute.get(&k) != Some(&kind) {
                out.tally.violation(format!(
                    "seed {s}: `{phi}` at {}: abstract {kind}, brute force {:?}",
                    fts.space.render(k),
                    brute.get(&k)
                ));
            }
        }
        for m in plan_mfts(&fts, &plan) {
            out.structural_checks += 1;
            out.structural_violations.extend(
                structural_violations(&m)
                    .into_iter()
                    .map(|v| format!("seed {s}: {v}")),
            );
        }
        out
    });
    let mut total = SoundnessTally::default();
    for r in results {
        total.tally.merge(r.tally);
        total.holds += r.holds;
        total.fails += r.fails;
        total.inconclusive += r.inconclusive;
        total.structural_checks += r.structural_checks;
        total.structural_violations.extend(r.structural_violations);
    }
    total
}

// ---------------------------------------------------------------------------
// Preservation lemmas

fn all_functions(vars: &[String]) -> Vec<FeatExpr> {
    let rows = 1usize << vars.len();
    (0u64..(1u64 << rows))
        .map(|bits| {
            let t: Vec<bool> = (0..rows).map(|r| bits >> r & 1 == 1).collect();
            FeatExpr::from_truth_table_dnf(vars, &t)
        })
        .collect()
}

/// Lifting and simulation checks for one family and one abstraction.
fn lemma_case(
    fts: &Fts,
    a: &Abstraction,
    functions: &[FeatExpr],
    max_steps: usize,
    tag: &str,
) -> Tally {
    let mut t = Tally::default();
    let k = &fts.space;
    let (m, abs) = fts.abstract_fts_mapped(a).expect("valid abstraction");
    let presences = fts.transitions.iter().map(|ft| &ft.presence);
    for psi in functions.iter().chain(presences) {
        let up = abs
            .space
            .compile(&alpha_may(a, psi, k).expect("valid"))
            .expect("abstract features");
        let down = abs
            .space
            .compile(&alpha_must(a, psi, k).expect("valid"))
            .expect("abstract features");
        let c = k.compile(psi).expect("concrete features");
        for &conf in k.valid_configs() {
            t.checks += 2;
            let mapped = abs.map(conf);
            if c.eval(conf) && !up.eval(mapped) {
                t.violation(format!(
                    "{tag}: may lifting fails for {a} on `{psi}` at {}",
                    k.render(conf)
                ));
            }
            if down.eval(mapped) && !c.eval(conf) {
                t.violation(format!(
                    "{tag}: must lowering fails for {a} on `{psi}` at {}",
                    k.render(conf)
                ));
            }
        }
    }
    let skel = &fts.skeleton;
    for &conf in k.valid_configs() {
        let mapped = abs.map(conf);
        let concrete = fts.project_variant(conf).expect("valid config").transitions;
        let modal = m.project_variant(mapped).expect("mapped config is valid");
        for p in enumerate_lassos(skel, &concrete, max_steps) {
            t.checks += 1;
            if !p.replays_on(&modal.may) {
                t.violation(format!(
                    "{tag}: may simulation fails for {a}: {} is not a may-execution",
                    p.render(skel)
                ));
            }
        }
        for p in enumerate_lassos(skel, &modal.must, max_steps) {
            t.checks += 1;
            if !p.replays_on(&concrete) {
                t.violation(format!(
                    "{tag}: must simulation fails for {a}: must-execution {} missing at {}",
                    p.render(skel),
                    k.render(conf)
                ));
            }
        }
    }
    t
}

/// Presence lifting over every Boolean function and execution simulation
/// over every lasso of at most `max_steps` steps, on random families with
/// at most three features.
pub fn lemmas(exec: Exec, seed: u64, cases: usize, max_steps: usize) -> Tally {
    run_cases(exec, seed, cases, |s| {
        let mut rng = seeded(s);
        let fts = gen::fts(
            &mut rng,
            Bounds {
                max_features: 3,
                ..Bounds::default()
            },
        );
        let functions = all_functions(fts.space.features());
        let mut t = Tally {
            cases: 1,
            ..Tally::default()
        };
        for a in single_abstractions(&fts.space) {
            t.merge(lemma_case(
                &fts,
                &a,
                &functions,
                max_steps,
                &format!("seed {s}"),
            ));
        }
        t.cases = 1;
        t
    })
}

// ---------------------------------------------------------------------------
// Syntactic transformations

fn commutation_case(doc: &ModelDocument, psi: &FeatExpr, tag: &str) -> Tally {
    let mut t = Tally {
        cases: 1,
        ..Tally::default()
    };
    let fts = match doc.to_fts() {
        Ok(f) => f,
        Err(e) => {
            t.violation(format!("{tag}: document does not build: {e}"));
            return t;
        }
    };
    t.checks += 1;
    match parse_document(&print_model(doc)) {
        Ok(again) if again == *doc => {}
        Ok(_) => t.violation(format!("{tag}: print/parse is not the identity")),
        Err(e) => t.violation(format!("{tag}: printed document does not parse: {e}")),
    }
    t.checks += 1;
    match (apply_invar(doc, psi), fts.project_subset(psi)) {
        (Ok(d), Ok(f)) => {
            if !d.to_fts().map(|g| fts_equivalent(&g, &f)).unwrap_or(false) {
                t.violation(format!(
                    "{tag}: INVAR({psi}) does not commute with projection"
                ));
            }
        }
        (Err(DslError::EmptyConfigSpace), Err(_)) => {}
        (d, f) => t.violation(format!(
            "{tag}: INVAR({psi}) outcome differs: {:?} vs {:?}",
            d.err(),
            f.err()
        )),
    }
    let space = fts.space.clone();
    let mut abstractions = single_abstractions(&space);
    if let Some(f) = space.features().first() {
        abstractions.push(Abstraction::ignore(f.clone()).then(Abstraction::Join));
    }
    for a in abstractions {
        let m = fts.abstract_fts(&a).expect("valid abstraction");
        for (mode, component) in [
            (Mode::May, m.may_component()),
            (Mode::Must, m.must_component()),
        ] {
            t.checks += 1;
            let ok = apply_abstraction_syntactic(doc, &a, mode)
                .and_then(|d| d.to_fts())
                .map(|g| fts_equivalent(&g, &component))
                .unwrap_or(false);
            if !ok {
                t.violation(format!(
                    "{tag}: {a} ({mode:?}) does not commute with abstraction"
                ));
            }
        }
    }
    t
}

/// A random document; some clauses are duplicated so that merging is
/// exercised.
pub fn random_document<R: Rng>(rng: &mut R) -> ModelDocument {
    let fts = gen::fts(rng, Bounds::default());
    let phi = gen::ctl(rng, &PROPS, 2);
    let mut doc = ModelDocument::from_fts(&fts, vec![("P".into(), phi)]);
    if !doc.transitions.is_empty() && rng.gen_bool(0.3) {
        let mut dup = doc.transitions[rng.gen_range(0..doc.transitions.len())].clone();
        dup.when = Some(gen::feat_expr(rng, &doc.features, 2));
        doc.transitions.push(dup);
    }
    if rng.gen_bool(0.3) {
        let s = doc.states[rng.gen_range(0..doc.states.len())].name.clone();
        doc.idles.push(crate::dsl::IdleDecl {
            state: s,
            when: Some(gen::feat_expr(rng, &doc.features, 1)),
        });
    }
    doc
}

/// INVAR and syntactic abstraction against their semantic counterparts on
/// every bundled model and `fuzzed` random documents.
pub fn commutation(exec: Exec, seed: u64, fuzzed: usize) -> Tally {
    let mut total = Tally::default();
    for (name, src) in bundled::ALL {
        let doc = parse_document(src).expect("bundled models parse");
        for psi in doc
            .features
            .iter()
            .map(|f| FeatExpr::not(FeatExpr::var(f.clone())))
            .chain([FeatExpr::True, FeatExpr::False])
        {
            total.merge(commutation_case(&doc, &psi, name));
        }
    }
    total.merge(run_cases(exec, seed, fuzzed, |s| {
        let mut rng = seeded(s);
        let doc = random_document(&mut rng);
        let psi = gen::feat_expr(&mut rng, &doc.features, 2);
        commutation_case(&doc, &psi, &format!("seed {s}"))
    }));
    total
}

// ---------------------------------------------------------------------------
// Modal semantics

/// The two-component reduction against the modal reference semantics.
/// Disagreements are findings, not violations.
pub fn modal_differential(exec: Exec, seed: u64, cases: usize) -> Tally {
    run_cases(exec, seed, cases, |s| {
        let mut rng = seeded(s);
        let mts = gen::mts(&mut rng, Bounds::default());
        let phi = gen::ctl(&mut rng, &PROPS, 3);
        let mut t = Tally {
            cases: 1,
            checks: 1,
            ..Tally::default()
        };
        let two = check_mts_two_component(&mts, &phi).expect("generated atoms exist");
        let direct = check_mts_direct(&mts, &phi)
            .expect("generated atoms exist")
            .kind();
        if two != direct {
            t.findings.push(format!(
                "seed {s}: `{phi}`: two-component {two}, modal {direct}"
            ));
        }
        t
    })
}

/// Attribution is exact: a variant satisfies the attributed expression iff
/// it replays the path.
pub fn attribution_replay(exec: Exec, seed: u64, cases: usize) -> Tally {
    run_cases(exec, seed, cases, |s| {
        let mut rng = seeded(s);
        let fts = gen::fts(&mut rng, Bounds::default())
            .complete()
            .expect("well formed");
        let all: Vec<Transition> = fts.transitions.iter().map(|ft| ft.transition).collect();
        let mut t = Tally {
            cases: 1,
            ..Tally::default()
        };
        let lassos = enumerate_lassos(&fts.skeleton, &all, 5);
        for p in lassos.iter().take(20) {
            let a = attribute_counterexample(&fts, p).expect("path uses model transitions");
            for &k in fts.space.valid_configs() {
                t.checks += 1;
                let ts = fts.project_variant(k).expect("valid config");
                let replays = replays_with_idle(p, &ts.transitions);
                if fts.space.eval(k, &a).expect("declared features") != replays {
                    t.violation(format!(
                        "seed {s}: `{a}` misattributes {} at {}",
                        p.render(&fts.skeleton),
                        fts.space.render(k)
                    ));
                }
            }
        }
        t
    })
}

/// Replay where idle steps need an explicit idle transition or a deadlock.
fn replays_with_idle(p: &Path, transitions: &[Transition]) -> bool {
    p.steps().all(|st| {
        transitions.contains(&st)
            || (st.action == STUTTER
                && !transitions
                    .iter()
                    .any(|t| t.source == st.source && !t.is_idle()))
    })
}
