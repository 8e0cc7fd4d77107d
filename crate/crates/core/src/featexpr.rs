//! Feature expressions: the Boolean domain that presence conditions,
//! validity constraints and configurations live in.
//!
//! A [`ConfigSpace`] fixes an ordered feature list and enumerates its valid
//! configurations eagerly. A [`Config`] is a bitmask relative to that order,
//! so configs from different spaces must not be mixed.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Upper bound on the number of features a space may enumerate.
pub const MAX_FEATURES: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeatError {
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("duplicate feature `{0}`")]
    DuplicateFeature(String),
    #[error("invalid feature name `{0}`")]
    InvalidName(String),
    #[error("{count} features exceed the enumeration limit of {MAX_FEATURES}")]
    TooManyFeatures { count: usize },
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
}

/// Propositional formula over feature names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatExpr {
    True,
    False,
    Var(String),
    Not(Box<FeatExpr>),
    And(Box<FeatExpr>, Box<FeatExpr>),
    Or(Box<FeatExpr>, Box<FeatExpr>),
}

impl FeatExpr {
    pub fn var(name: impl Into<String>) -> Self {
        FeatExpr::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: FeatExpr) -> Self {
        FeatExpr::Not(Box::new(e))
    }

    pub fn and(a: FeatExpr, b: FeatExpr) -> Self {
        FeatExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: FeatExpr, b: FeatExpr) -> Self {
        FeatExpr::Or(Box::new(a), Box::new(b))
    }

    /// Left-nested conjunction; `True` when empty.
    pub fn conjunction(items: impl IntoIterator<Item = FeatExpr>) -> Self {
        items
            .into_iter()
            .reduce(FeatExpr::and)
            .unwrap_or(FeatExpr::True)
    }

    /// Left-nested disjunction; `False` when empty.
    pub fn disjunction(items: impl IntoIterator<Item = FeatExpr>) -> Self {
        items
            .into_iter()
            .reduce(FeatExpr::or)
            .unwrap_or(FeatExpr::False)
    }

    /// Feature names mentioned anywhere in the expression.
    pub fn features(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_features(&mut out);
        out
    }

    fn collect_features(&self, out: &mut BTreeSet<String>) {
        match self {
            FeatExpr::True | FeatExpr::False => {}
            FeatExpr::Var(v) => {
                out.insert(v.clone());
            }
            FeatExpr::Not(e) => e.collect_features(out),
            FeatExpr::And(a, b) | FeatExpr::Or(a, b) => {
                a.collect_features(out);
                b.collect_features(out);
            }
        }
    }

    /// Evaluates under an assignment; `lookup` returns `None` for features it
    /// does not know.
    pub fn eval_with(&self, lookup: &impl Fn(&str) -> Option<bool>) -> Result<bool, FeatError> {
        Ok(match self {
            FeatExpr::True => true,
            FeatExpr::False => false,
            FeatExpr::Var(v) => lookup(v).ok_or_else(|| FeatError::UnknownFeature(v.clone()))?,
            FeatExpr::Not(e) => !e.eval_with(lookup)?,
            FeatExpr::And(a, b) => a.eval_with(lookup)? && b.eval_with(lookup)?,
            FeatExpr::Or(a, b) => a.eval_with(lookup)? || b.eval_with(lookup)?,
        })
    }

    /// Negation normal form: `Not` only directly above `Var`.
    pub fn nnf(&self) -> FeatExpr {
        self.nnf_polarity(true)
    }

    fn nnf_polarity(&self, positive: bool) -> FeatExpr {
        match (self, positive) {
            (FeatExpr::True, true) | (FeatExpr::False, false) => FeatExpr::True,
            (FeatExpr::True, false) | (FeatExpr::False, true) => FeatExpr::False,
            (FeatExpr::Var(v), true) => FeatExpr::Var(v.clone()),
            (FeatExpr::Var(v), false) => FeatExpr::not(FeatExpr::Var(v.clone())),
            (FeatExpr::Not(e), p) => e.nnf_polarity(!p),
            (FeatExpr::And(a, b), true) => {
                FeatExpr::and(a.nnf_polarity(true), b.nnf_polarity(true))
            }
            (FeatExpr::And(a, b), false) => {
                FeatExpr::or(a.nnf_polarity(false), b.nnf_polarity(false))
            }
            (FeatExpr::Or(a, b), true) => FeatExpr::or(a.nnf_polarity(true), b.nnf_polarity(true)),
            (FeatExpr::Or(a, b), false) => {
                FeatExpr::and(a.nnf_polarity(false), b.nnf_polarity(false))
            }
        }
    }

    pub fn is_nnf(&self) -> bool {
        match self {
            FeatExpr::True | FeatExpr::False | FeatExpr::Var(_) => true,
            FeatExpr::Not(e) => matches!(**e, FeatExpr::Var(_)),
            FeatExpr::And(a, b) | FeatExpr::Or(a, b) => a.is_nnf() && b.is_nnf(),
        }
    }

    /// Replaces both literals of `feature` (`A` and `!A`) by the constant
    /// `value`. Expects NNF input; the result does not mention `feature`.
    pub fn substitute_literal(&self, feature: &str, value: bool) -> FeatExpr {
        let constant = if value {
            FeatExpr::True
        } else {
            FeatExpr::False
        };
        match self {
            FeatExpr::Var(v) if v == feature => constant,
            FeatExpr::Not(e) if matches!(&**e, FeatExpr::Var(v) if v == feature) => constant,
            FeatExpr::True | FeatExpr::False | FeatExpr::Var(_) => self.clone(),
            FeatExpr::Not(e) => FeatExpr::not(e.substitute_literal(feature, value)),
            FeatExpr::And(a, b) => FeatExpr::and(
                a.substitute_literal(feature, value),
                b.substitute_literal(feature, value),
            ),
            FeatExpr::Or(a, b) => FeatExpr::or(
                a.substitute_literal(feature, value),
                b.substitute_literal(feature, value),
            ),
        }
    }

    /// Replaces the variable `feature` by a constant (Shannon cofactor).
    /// Unlike [`substitute_literal`](Self::substitute_literal) this respects
    /// polarity, so it is a function on equivalence classes.
    pub fn cofactor(&self, feature: &str, value: bool) -> FeatExpr {
        match self {
            FeatExpr::Var(v) if v == feature => {
                if value {
                    FeatExpr::True
                } else {
                    FeatExpr::False
                }
            }
            FeatExpr::True | FeatExpr::False | FeatExpr::Var(_) => self.clone(),
            FeatExpr::Not(e) => FeatExpr::not(e.cofactor(feature, value)),
            FeatExpr::And(a, b) => {
                FeatExpr::and(a.cofactor(feature, value), b.cofactor(feature, value))
            }
            FeatExpr::Or(a, b) => {
                FeatExpr::or(a.cofactor(feature, value), b.cofactor(feature, value))
            }
        }
    }

    /// Existential quantification of one feature.
    pub fn exists(&self, feature: &str) -> FeatExpr {
        FeatExpr::or(self.cofactor(feature, true), self.cofactor(feature, false)).simplify()
    }

    /// Constant folding plus removal of duplicate operands. Never changes the
    /// denotation.
    pub fn simplify(&self) -> FeatExpr {
        match self {
            FeatExpr::True | FeatExpr::False | FeatExpr::Var(_) => self.clone(),
            FeatExpr::Not(e) => match e.simplify() {
                FeatExpr::True => FeatExpr::False,
                FeatExpr::False => FeatExpr::True,
                FeatExpr::Not(inner) => *inner,
                other => FeatExpr::not(other),
            },
            FeatExpr::And(a, b) => match (a.simplify(), b.simplify()) {
                (FeatExpr::False, _) | (_, FeatExpr::False) => FeatExpr::False,
                (FeatExpr::True, x) | (x, FeatExpr::True) => x,
                (x, y) if x == y => x,
                (x, y) if is_complement(&x, &y) => FeatExpr::False,
                (x, y) => FeatExpr::and(x, y),
            },
            FeatExpr::Or(a, b) => match (a.simplify(), b.simplify()) {
                (FeatExpr::True, _) | (_, FeatExpr::True) => FeatExpr::True,
                (FeatExpr::False, x) | (x, FeatExpr::False) => x,
                (x, y) if x == y => x,
                (x, y) if is_complement(&x, &y) => FeatExpr::True,
                (x, y) => FeatExpr::or(x, y),
            },
        }
    }

    /// Truth table over the mentioned features, as the list of satisfying
    /// assignments' bitmasks (bit i = i-th feature of `features()`).
    fn truth_table(&self) -> (Vec<String>, Vec<bool>) {
        let vars: Vec<String> = self.features().into_iter().collect();
        let table = truth_table_over(self, &vars);
        (vars, table)
    }

    /// True when no assignment satisfies the expression.
    pub fn is_unsatisfiable(&self) -> bool {
        match self.simplify() {
            FeatExpr::False => true,
            FeatExpr::True => false,
            e => !e.truth_table().1.into_iter().any(|b| b),
        }
    }

    /// True when every assignment satisfies the expression.
    pub fn is_tautology(&self) -> bool {
        FeatExpr::not(self.clone()).is_unsatisfiable()
    }

    /// Canonical disjunction of full minterms over `vars` for the Boolean
    /// function whose truth table is `models` (bit i of a row index is the
    /// value of `vars[i]`).
    pub fn from_truth_table_dnf(vars: &[String], models: &[bool]) -> FeatExpr {
        FeatExpr::disjunction(
            models
                .iter()
                .enumerate()
                .filter(|(_, on)| **on)
                .map(|(row, _)| row_literals(vars, row as u64)),
        )
    }

    /// Canonical conjunction of full maxterms; dual of
    /// [`from_truth_table_dnf`](Self::from_truth_table_dnf).
    pub fn from_truth_table_cnf(vars: &[String], models: &[bool]) -> FeatExpr {
        FeatExpr::conjunction(
            models
                .iter()
                .enumerate()
                .filter(|(_, on)| !**on)
                .map(|(row, _)| {
                    FeatExpr::disjunction(vars.iter().enumerate().map(|(i, v)| {
                        if row >> i & 1 == 1 {
                            FeatExpr::not(FeatExpr::var(v))
                        } else {
                            FeatExpr::var(v)
                        }
                    }))
                }),
        )
    }
}

fn row_literals(vars: &[String], row: u64) -> FeatExpr {
    FeatExpr::conjunction(vars.iter().enumerate().map(|(i, v)| {
        if row >> i & 1 == 1 {
            FeatExpr::var(v)
        } else {
            FeatExpr::not(FeatExpr::var(v))
        }
    }))
}

fn is_complement(x: &FeatExpr, y: &FeatExpr) -> bool {
    matches!(x, FeatExpr::Not(inner) if **inner == *y)
        || matches!(y, FeatExpr::Not(inner) if **inner == *x)
}

/// Evaluates `e` on all `2^vars.len()` assignments. Features of `e` missing
/// from `vars` evaluate to false.
pub fn truth_table_over(e: &FeatExpr, vars: &[String]) -> Vec<bool> {
    let compiled = Compiled::compile_lenient(e, vars);
    (0..1u64 << vars.len())
        .map(|row| compiled.eval(Config(row)))
        .collect()
}

/// Semantic equivalence by truth table over the union of mentioned features.
pub fn equiv(a: &FeatExpr, b: &FeatExpr) -> bool {
    let vars: Vec<String> = a.features().union(&b.features()).cloned().collect();
    truth_table_over(a, &vars) == truth_table_over(b, &vars)
}

/// Absolute entailment: every assignment satisfying `a` satisfies `b`.
pub fn entails_absolute(a: &FeatExpr, b: &FeatExpr) -> bool {
    let vars: Vec<String> = a.features().union(&b.features()).cloned().collect();
    let ta = truth_table_over(a, &vars);
    let tb = truth_table_over(b, &vars);
    ta.iter().zip(tb).all(|(x, y)| !*x || y)
}

// ---------------------------------------------------------------------------
// Parsing and printing

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Checks that `name` is a usable feature identifier.
pub fn valid_feature_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if is_ident_start(c))
        && chars.all(is_ident_char)
        && name != "true"
        && name != "false"
}

struct ExprParser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> ExprParser<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn error(&self, message: impl Into<String>) -> FeatError {
        FeatError::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn parse_or(&mut self) -> Result<FeatExpr, FeatError> {
        let mut lhs = self.parse_and()?;
        while self.peek() == Some('|') {
            self.pos += 1;
            let rhs = self.parse_and()?;
            lhs = FeatExpr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<FeatExpr, FeatError> {
        let mut lhs = self.parse_unary()?;
        while self.peek() == Some('&') {
            self.pos += 1;
            let rhs = self.parse_unary()?;
            lhs = FeatExpr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<FeatExpr, FeatError> {
        match self.peek() {
            Some('!') => {
                self.pos += 1;
                Ok(FeatExpr::not(self.parse_unary()?))
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.parse_or()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if is_ident_start(c) => {
                let start = self.pos;
                while let Some(c) = self.src[self.pos..].chars().next() {
                    if is_ident_char(c) {
                        self.pos += c.len_utf8();
                    } else {
                        break;
                    }
                }
                Ok(match &self.src[start..self.pos] {
                    "true" => FeatExpr::True,
                    "false" => FeatExpr::False,
                    name => FeatExpr::var(name),
                })
            }
            Some(c) => Err(self.error(format!("unexpected character `{c}`"))),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

/// Parses `true | false | ident | !e | e & e | e | e | (e)` with
/// precedence `!` > `&` > `|`, binary operators left-associative.
pub fn parse_feat_expr(text: &str) -> Result<FeatExpr, FeatError> {
    let mut parser = ExprParser { src: text, pos: 0 };
    let expr = parser.parse_or()?;
    if parser.peek().is_some() {
        return Err(parser.error("trailing input"));
    }
    Ok(expr)
}

impl std::str::FromStr for FeatExpr {
    type Err = FeatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_feat_expr(s)
    }
}

impl fmt::Display for FeatExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // precedence levels: 0 = or, 1 = and, 2 = unary/atom
        fn go(e: &FeatExpr, ctx: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match e {
                FeatExpr::True => write!(f, "true"),
                FeatExpr::False => write!(f, "false"),
                FeatExpr::Var(v) => write!(f, "{v}"),
                FeatExpr::Not(inner) => {
                    write!(f, "!")?;
                    go(inner, 2, f)
                }
                FeatExpr::And(a, b) => {
                    if ctx > 1 {
                        write!(f, "(")?;
                    }
                    go(a, 1, f)?;
                    write!(f, " & ")?;
                    go(b, 2, f)?;
                    if ctx > 1 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                FeatExpr::Or(a, b) => {
                    if ctx > 0 {
                        write!(f, "(")?;
                    }
                    go(a, 0, f)?;
                    write!(f, " | ")?;
                    go(b, 1, f)?;
                    if ctx > 0 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self, 0, f)
    }
}

// ---------------------------------------------------------------------------
// Configurations

/// A total assignment over the features of one [`ConfigSpace`]; bit `i` is
/// the value of the space's `i`-th feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Config(pub u64);

impl Config {
    pub fn is_enabled(self, index: usize) -> bool {
        self.0 >> index & 1 == 1
    }
}

/// Expression compiled against a fixed feature order.
#[derive(Debug, Clone)]
pub struct Compiled(Node);

#[derive(Debug, Clone)]
enum Node {
    Const(bool),
    Var(u32),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
}

impl Compiled {
    pub fn compile(e: &FeatExpr, features: &[String]) -> Result<Self, FeatError> {
        fn go(e: &FeatExpr, features: &[String], lenient: bool) -> Result<Node, FeatError> {
            Ok(match e {
                FeatExpr::True => Node::Const(true),
                FeatExpr::False => Node::Const(false),
                FeatExpr::Var(v) => match features.iter().position(|f| f == v) {
                    Some(i) => Node::Var(i as u32),
                    None if lenient => Node::Const(false),
                    None => return Err(FeatError::UnknownFeature(v.clone())),
                },
                FeatExpr::Not(a) => Node::Not(Box::new(go(a, features, lenient)?)),
                FeatExpr::And(a, b) => Node::And(
                    Box::new(go(a, features, lenient)?),
                    Box::new(go(b, features, lenient)?),
                ),
                FeatExpr::Or(a, b) => Node::Or(
                    Box::new(go(a, features, lenient)?),
                    Box::new(go(b, features, lenient)?),
                ),
            })
        }
        go(e, features, false).map(Compiled)
    }

    fn compile_lenient(e: &FeatExpr, features: &[String]) -> Self {
        fn go(e: &FeatExpr, features: &[String]) -> Node {
            match e {
                FeatExpr::True => Node::Const(true),
                FeatExpr::False => Node::Const(false),
                FeatExpr::Var(v) => features
                    .iter()
                    .position(|f| f == v)
                    .map_or(Node::Const(false), |i| Node::Var(i as u32)),
                FeatExpr::Not(a) => Node::Not(Box::new(go(a, features))),
                FeatExpr::And(a, b) => {
                    Node::And(Box::new(go(a, features)), Box::new(go(b, features)))
                }
                FeatExpr::Or(a, b) => {
                    Node::Or(Box::new(go(a, features)), Box::new(go(b, features)))
                }
            }
        }
        Compiled(go(e, features))
    }

    pub fn eval(&self, k: Config) -> bool {
        fn go(n: &Node, k: Config) -> bool {
            match n {
                Node::Const(b) => *b,
                Node::Var(i) => k.is_enabled(*i as usize),
                Node::Not(a) => !go(a, k),
                Node::And(a, b) => go(a, k) && go(b, k),
                Node::Or(a, b) => go(a, k) || go(b, k),
            }
        }
        go(&self.0, k)
    }
}

#[derive(Debug)]
struct SpaceInner {
    features: Vec<String>,
    constraint: FeatExpr,
    valid: Vec<Config>,
}

/// A feature set together with its valid configurations.
///
/// Cloning is cheap; the configuration list is shared.
#[derive(Debug, Clone)]
pub struct ConfigSpace(Arc<SpaceInner>);

impl PartialEq for ConfigSpace {
    /// Same features in the same order and the same valid configurations.
    fn eq(&self, other: &Self) -> bool {
        self.0.features == other.0.features && self.0.valid == other.0.valid
    }
}

impl ConfigSpace {
    /// Builds the space by enumerating `2^features` against `constraint`.
    pub fn new(features: Vec<String>, constraint: FeatExpr) -> Result<Self, FeatError> {
        check_feature_list(&features)?;
        let compiled = Compiled::compile(&constraint, &features)?;
        let valid = (0..1u64 << features.len())
            .map(Config)
            .filter(|k| compiled.eval(*k))
            .collect();
        Ok(ConfigSpace(Arc::new(SpaceInner {
            features,
            constraint,
            valid,
        })))
    }

    /// Every assignment is valid.
    pub fn unconstrained(features: Vec<String>) -> Result<Self, FeatError> {
        ConfigSpace::new(features, FeatExpr::True)
    }

    /// Builds a space from an explicit configuration set; the constraint is
    /// the disjunction of the configurations' formulas.
    pub fn from_configs(features: Vec<String>, configs: &[Config]) -> Result<Self, FeatError> {
        check_feature_list(&features)?;
        let mut valid: Vec<Config> = configs
            .iter()
            .copied()
            .filter(|k| k.0 < 1u64 << features.len())
            .collect();
        valid.sort();
        valid.dedup();
        let constraint = FeatExpr::disjunction(valid.iter().map(|k| config_formula(&features, *k)));
        Ok(ConfigSpace(Arc::new(SpaceInner {
            features,
            constraint,
            valid,
        })))
    }

    pub fn features(&self) -> &[String] {
        &self.0.features
    }

    pub fn constraint(&self) -> &FeatExpr {
        &self.0.constraint
    }

    pub fn valid_configs(&self) -> &[Config] {
        &self.0.valid
    }

    pub fn len(&self) -> usize {
        self.0.valid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.valid.is_empty()
    }

    pub fn index_of(&self, feature: &str) -> Option<usize> {
        self.0.features.iter().position(|f| f == feature)
    }

    pub fn contains(&self, k: Config) -> bool {
        self.0.valid.binary_search(&k).is_ok()
    }

    pub fn compile(&self, e: &FeatExpr) -> Result<Compiled, FeatError> {
        Compiled::compile(e, &self.0.features)
    }

    pub fn eval(&self, k: Config, e: &FeatExpr) -> Result<bool, FeatError> {
        Ok(self.compile(e)?.eval(k))
    }

    pub fn satisfying_configs(&self, e: &FeatExpr) -> Result<Vec<Config>, FeatError> {
        let c = self.compile(e)?;
        Ok(self
            .0
            .valid
            .iter()
            .copied()
            .filter(|k| c.eval(*k))
            .collect())
    }

    pub fn any_satisfies(&self, e: &FeatExpr) -> Result<bool, FeatError> {
        let c = self.compile(e)?;
        Ok(self.0.valid.iter().any(|k| c.eval(*k)))
    }

    pub fn all_satisfy(&self, e: &FeatExpr) -> Result<bool, FeatError> {
        let c = self.compile(e)?;
        Ok(self.0.valid.iter().all(|k| c.eval(*k)))
    }

    /// Entailment relative to the valid configurations.
    pub fn entails(&self, a: &FeatExpr, b: &FeatExpr) -> Result<bool, FeatError> {
        let ca = self.compile(a)?;
        let cb = self.compile(b)?;
        Ok(self.0.valid.iter().all(|k| !ca.eval(*k) || cb.eval(*k)))
    }

    /// Equivalence relative to the valid configurations.
    pub fn equivalent(&self, a: &FeatExpr, b: &FeatExpr) -> Result<bool, FeatError> {
        Ok(self.entails(a, b)? && self.entails(b, a)?)
    }

    /// The sub-space whose constraint is `constraint & extra`.
    pub fn restrict(&self, extra: &FeatExpr) -> Result<ConfigSpace, FeatError> {
        let c = self.compile(extra)?;
        let valid = self
            .0
            .valid
            .iter()
            .copied()
            .filter(|k| c.eval(*k))
            .collect();
        Ok(ConfigSpace(Arc::new(SpaceInner {
            features: self.0.features.clone(),
            constraint: FeatExpr::and(self.0.constraint.clone(), extra.clone()),
            valid,
        })))
    }

    /// `k(A_1) & ... & k(A_n)`.
    pub fn config_formula(&self, k: Config) -> FeatExpr {
        config_formula(&self.0.features, k)
    }

    /// Enabled feature names, sorted.
    pub fn enabled_features(&self, k: Config) -> Vec<String> {
        let mut names: Vec<String> = self
            .0
            .features
            .iter()
            .enumerate()
            .filter(|(i, _)| k.is_enabled(*i))
            .map(|(_, f)| f.clone())
            .collect();
        names.sort();
        names
    }

    /// `{a,b,c}` rendering of a configuration.
    pub fn render(&self, k: Config) -> String {
        format!("{{{}}}", self.enabled_features(k).join(","))
    }

    /// Looks up the configuration enabling exactly `names`.
    pub fn config_of<S: AsRef<str>>(&self, names: &[S]) -> Result<Config, FeatError> {
        let mut bits = 0u64;
        for n in names {
            let i = self
                .index_of(n.as_ref())
                .ok_or_else(|| FeatError::UnknownFeature(n.as_ref().to_string()))?;
            bits |= 1 << i;
        }
        Ok(Config(bits))
    }
}

fn check_feature_list(features: &[String]) -> Result<(), FeatError> {
    if features.len() > MAX_FEATURES {
        return Err(FeatError::TooManyFeatures {
            count: features.len(),
        });
    }
    let mut seen = BTreeSet::new();
    for f in features {
        if !valid_feature_name(f) {
            return Err(FeatError::InvalidName(f.clone()));
        }
        if !seen.insert(f) {
            return Err(FeatError::DuplicateFeature(f.clone()));
        }
    }
    Ok(())
}

fn config_formula(features: &[String], k: Config) -> FeatExpr {
    row_literals(features, k.0)
}
