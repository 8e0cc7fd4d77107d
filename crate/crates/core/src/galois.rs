//! Variability abstractions on feature expressions.
//!
//! `alpha_may` over-approximates and `alpha_must` under-approximates the set
//! of configurations in which a presence condition holds. The `gamma`
//! functions exist so that the adjunction laws can be checked; the
//! verification pipeline only ever uses the `alpha` side.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::featexpr::{
    entails_absolute, truth_table_over, valid_feature_name, Config, ConfigSpace, FeatError,
    FeatExpr,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GaloisError {
    #[error("join undefined on empty configuration space")]
    EmptySpace,
    #[error("cannot ignore `{0}`: not a feature of the current space")]
    IgnoreUnknown(String),
    #[error("join-gamma argument must be constant, got `{0}`")]
    NonConstantJoinArgument(FeatExpr),
    #[error("law check needs {needed} pairs, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("invalid abstraction `{0}`")]
    Syntax(String),
    #[error(transparent)]
    Feat(#[from] FeatError),
}

/// A variability abstraction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Abstraction {
    /// Collapse all configurations into one.
    Join,
    /// Forget one feature.
    Ignore(String),
    /// Apply `.0`, then `.1` on the resulting abstract space.
    Compose(Box<Abstraction>, Box<Abstraction>),
}

impl Abstraction {
    pub fn ignore(feature: impl Into<String>) -> Self {
        Abstraction::Ignore(feature.into())
    }

    pub fn then(self, next: Abstraction) -> Self {
        Abstraction::Compose(Box::new(self), Box::new(next))
    }

    /// Left-to-right composition of ignores over `features`; `None` if empty.
    pub fn ignore_all<S: AsRef<str>>(features: &[S]) -> Option<Self> {
        features
            .iter()
            .map(|f| Abstraction::ignore(f.as_ref()))
            .reduce(Abstraction::then)
    }

    /// The primitive steps in application order.
    pub fn steps(&self) -> Vec<&Abstraction> {
        match self {
            Abstraction::Compose(a, b) => {
                let mut out = a.steps();
                out.extend(b.steps());
                out
            }
            other => vec![other],
        }
    }
}

impl fmt::Display for Abstraction {
    /// Renders the CLI syntax; consecutive ignores are grouped.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut groups: Vec<String> = Vec::new();
        let mut pending: Vec<&str> = Vec::new();
        for step in self.steps() {
            match step {
                Abstraction::Ignore(name) => pending.push(name),
                _ => {
                    if !pending.is_empty() {
                        groups.push(format!("ignore={}", pending.join(",")));
                        pending.clear();
                    }
                    groups.push("join".into());
                }
            }
        }
        if !pending.is_empty() {
            groups.push(format!("ignore={}", pending.join(",")));
        }
        write!(f, "{}", groups.join("+"))
    }
}

impl FromStr for Abstraction {
    type Err = GaloisError;

    /// Parses `join`, `ignore=A`, `ignore=A,B` and `+`-chains thereof.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut steps = Vec::new();
        for part in text.split('+').map(str::trim) {
            if part == "join" {
                steps.push(Abstraction::Join);
            } else if let Some(list) = part.strip_prefix("ignore=") {
                for name in list.split(',').map(str::trim) {
                    if !valid_feature_name(name) {
                        return Err(GaloisError::Syntax(text.to_string()));
                    }
                    steps.push(Abstraction::ignore(name));
                }
            } else {
                return Err(GaloisError::Syntax(text.to_string()));
            }
        }
        steps
            .into_iter()
            .reduce(Abstraction::then)
            .ok_or_else(|| GaloisError::Syntax(text.to_string()))
    }
}

/// The abstract configuration space together with the map `k ↦ α(k)`.
#[derive(Debug, Clone)]
pub struct AbstractSpace {
    pub space: ConfigSpace,
    /// `kept[i]` is the concrete feature index of abstract feature `i`.
    pub kept: Vec<usize>,
}

impl AbstractSpace {
    /// Projects a concrete configuration onto the abstract features.
    pub fn map(&self, k: Config) -> Config {
        Config(
            self.kept
                .iter()
                .enumerate()
                .filter(|(_, src)| k.is_enabled(**src))
                .fold(0, |acc, (i, _)| acc | 1 << i),
        )
    }
}

/// Computes `α(F)`, `α(K)` and the configuration map.
pub fn abstract_space(a: &Abstraction, k: &ConfigSpace) -> Result<AbstractSpace, GaloisError> {
    if k.is_empty() {
        return Err(GaloisError::EmptySpace);
    }
    match a {
        Abstraction::Join => Ok(AbstractSpace {
            space: ConfigSpace::unconstrained(Vec::new())?,
            kept: Vec::new(),
        }),
        Abstraction::Ignore(name) => {
            let drop = k
                .index_of(name)
                .ok_or_else(|| GaloisError::IgnoreUnknown(name.clone()))?;
            let kept: Vec<usize> = (0..k.features().len()).filter(|i| *i != drop).collect();
            let features = kept.iter().map(|i| k.features()[*i].clone()).collect();
            let constraint = k.constraint().exists(name);
            let space = ConfigSpace::new(features, constraint)?;
            let out = AbstractSpace { space, kept };
            debug_assert!(image_matches(&out, k));
            Ok(out)
        }
        Abstraction::Compose(first, then) => {
            let inner = abstract_space(first, k)?;
            let outer = abstract_space(then, &inner.space)?;
            let kept = outer.kept.iter().map(|i| inner.kept[*i]).collect();
            Ok(AbstractSpace {
                space: outer.space,
                kept,
            })
        }
    }
}

fn image_matches(abs: &AbstractSpace, k: &ConfigSpace) -> bool {
    let mut image: Vec<Config> = k.valid_configs().iter().map(|c| abs.map(*c)).collect();
    image.sort();
    image.dedup();
    image == abs.space.valid_configs()
}

/// Over-approximating abstraction of a presence condition.
pub fn alpha_may(
    a: &Abstraction,
    psi: &FeatExpr,
    k: &ConfigSpace,
) -> Result<FeatExpr, GaloisError> {
    alpha(a, psi, k, true)
}

/// Under-approximating (dual) abstraction of a presence condition.
pub fn alpha_must(
    a: &Abstraction,
    psi: &FeatExpr,
    k: &ConfigSpace,
) -> Result<FeatExpr, GaloisError> {
    alpha(a, psi, k, false)
}

fn alpha(
    a: &Abstraction,
    psi: &FeatExpr,
    k: &ConfigSpace,
    may: bool,
) -> Result<FeatExpr, GaloisError> {
    match a {
        Abstraction::Join => {
            if k.is_empty() {
                return Err(GaloisError::EmptySpace);
            }
            let holds = if may {
                k.any_satisfies(psi)?
            } else {
                k.all_satisfy(psi)?
            };
            Ok(if holds {
                FeatExpr::True
            } else {
                FeatExpr::False
            })
        }
        Abstraction::Ignore(name) => {
            if k.index_of(name).is_none() {
                return Err(GaloisError::IgnoreUnknown(name.clone()));
            }
            Ok(psi.nnf().substitute_literal(name, may).simplify())
        }
        Abstraction::Compose(first, then) => {
            let mid = alpha(first, psi, k, may)?;
            let inner = abstract_space(first, k)?;
            alpha(then, &mid, &inner.space, may)
        }
    }
}

/// Concretization paired with [`alpha_may`].
pub fn gamma_may(
    a: &Abstraction,
    psi: &FeatExpr,
    k: &ConfigSpace,
) -> Result<FeatExpr, GaloisError> {
    gamma(a, psi, k, true)
}

/// Concretization paired with [`alpha_must`].
pub fn gamma_must(
    a: &Abstraction,
    psi: &FeatExpr,
    k: &ConfigSpace,
) -> Result<FeatExpr, GaloisError> {
    gamma(a, psi, k, false)
}

fn gamma(
    a: &Abstraction,
    psi: &FeatExpr,
    k: &ConfigSpace,
    may: bool,
) -> Result<FeatExpr, GaloisError> {
    match a {
        Abstraction::Join => {
            if !psi.features().is_empty() {
                return Err(GaloisError::NonConstantJoinArgument(psi.clone()));
            }
            let value = psi.is_tautology();
            let invalid = (0..1u64 << k.features().len())
                .map(Config)
                .filter(|c| !k.contains(*c));
            Ok(match (may, value) {
                (true, true) => FeatExpr::True,
                (true, false) => FeatExpr::disjunction(invalid.map(|c| k.config_formula(c))),
                (false, false) => FeatExpr::False,
                (false, true) => {
                    FeatExpr::conjunction(invalid.map(|c| FeatExpr::not(k.config_formula(c))))
                }
            })
        }
        Abstraction::Ignore(name) => {
            let lit = FeatExpr::var(name.clone());
            let neg = FeatExpr::not(lit.clone());
            Ok(if may {
                FeatExpr::or(
                    FeatExpr::and(psi.clone(), lit),
                    FeatExpr::and(psi.clone(), neg),
                )
            } else {
                FeatExpr::and(
                    FeatExpr::or(psi.clone(), neg),
                    FeatExpr::or(psi.clone(), lit),
                )
            })
        }
        Abstraction::Compose(first, then) => {
            let inner = abstract_space(first, k)?;
            let mid = gamma(then, psi, &inner.space, may)?;
            gamma(first, &mid, k, may)
        }
    }
}

/// Which of the two adjunctions a law-check result refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connection {
    /// `α(ψ) ⊨ ψ'  ⟺  ψ ⊨ γ(ψ')`
    May,
    /// `γ̃(ψ') ⊨ ψ  ⟺  ψ' ⊨ α̃(ψ)`
    Must,
}

/// A pair on which the two sides of an adjunction disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawViolation {
    pub connection: Connection,
    pub concrete: FeatExpr,
    pub abstract_expr: FeatExpr,
    pub left: bool,
    pub right: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawReport {
    pub may_pairs: u128,
    pub must_pairs: u128,
    pub violation: Option<LawViolation>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Signature of an `alpha` implementation, for mutation testing.
pub type AlphaFn<'a> =
    &'a dyn Fn(&Abstraction, &FeatExpr, &ConfigSpace) -> Result<FeatExpr, GaloisError>;

/// Checks both adjunctions on every pair of Boolean functions over the
/// concrete and abstract feature sets.
pub fn check_galois_law(
    a: &Abstraction,
    k: &ConfigSpace,
    budget: u128,
) -> Result<LawReport, GaloisError> {
    check_galois_law_with(a, k, budget, &alpha_may, &alpha_must)
}

/// [`check_galois_law`] with substitutable `alpha` functions.
///
/// Concrete functions are represented by their canonical minterm DNF for the
/// may side and maxterm CNF for the must side; literal substitution acts on
/// these exactly as quantification does.
pub fn check_galois_law_with(
    a: &Abstraction,
    k: &ConfigSpace,
    budget: u128,
    may: AlphaFn<'_>,
    must: AlphaFn<'_>,
) -> Result<LawReport, GaloisError> {
    let abs = abstract_space(a, k)?;
    let conc_vars = k.features().to_vec();
    let abs_vars = abs.space.features().to_vec();
    let conc_rows = 1usize << conc_vars.len();
    let abs_rows = 1usize << abs_vars.len();
    let conc_count = 1u128 << conc_rows;
    let abs_count = 1u128 << abs_rows;
    let needed = conc_count * abs_count;
    if needed > budget {
        return Err(GaloisError::BudgetExceeded { needed, budget });
    }

    let table =
        |bits: u128, rows: usize| -> Vec<bool> { (0..rows).map(|r| bits >> r & 1 == 1).collect() };
    let abstract_fns: Vec<(FeatExpr, Vec<bool>)> = (0..abs_count)
        .map(|bits| {
            let t = table(bits, abs_rows);
            (FeatExpr::from_truth_table_dnf(&abs_vars, &t), t)
        })
        .collect();
    let abstract_gammas: Vec<(FeatExpr, FeatExpr)> = abstract_fns
        .iter()
        .map(|(e, _)| Ok((gamma_may(a, e, k)?, gamma_must(a, e, k)?)))
        .collect::<Result<_, GaloisError>>()?;

    let mut report = LawReport {
        may_pairs: 0,
        must_pairs: 0,
        violation: None,
    };
    for bits in 0..conc_count {
        let t = table(bits, conc_rows);
        let psi_dnf = FeatExpr::from_truth_table_dnf(&conc_vars, &t);
        let psi_cnf = FeatExpr::from_truth_table_cnf(&conc_vars, &t);
        let up = truth_table_over(&may(a, &psi_dnf, k)?, &abs_vars);
        let down = truth_table_over(&must(a, &psi_cnf, k)?, &abs_vars);
        for ((prime, prime_t), (g_may, g_must)) in abstract_fns.iter().zip(&abstract_gammas) {
            let left = up.iter().zip(prime_t).all(|(x, y)| !*x || *y);
            let right = entails_absolute(&psi_dnf, g_may);
            report.may_pairs += 1;
            if left != right {
                report.violation = Some(LawViolation {
                    connection: Connection::May,
                    concrete: psi_dnf,
                    abstract_expr: prime.clone(),
                    left,
                    right,
                });
                return Ok(report);
            }
            let left = entails_absolute(g_must, &psi_cnf);
            let right = prime_t.iter().zip(&down).all(|(x, y)| !*x || *y);
            report.must_pairs += 1;
            if left != right {
                report.violation = Some(LawViolation {
                    connection: Connection::Must,
                    concrete: psi_cnf,
                    abstract_expr: prime.clone(),
                    left,
                    right,
                });
                return Ok(report);
            }
        }
    }
    Ok(report)
}
