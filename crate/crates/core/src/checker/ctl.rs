use std::collections::BTreeSet;
use std::fmt;

/// CTL state formula in negation normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ctl {
    True,
    False,
    Atom(String),
    NegAtom(String),
    And(Box<Ctl>, Box<Ctl>),
    Or(Box<Ctl>, Box<Ctl>),
    A(Box<PathFormula>),
    E(Box<PathFormula>),
}

/// Path operator directly under a quantifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PathFormula {
    Next(Ctl),
    Until(Ctl, Ctl),
    Eventually(Ctl),
    Globally(Ctl),
    /// `f R g`: `g` holds up to and including the first `f`, or forever.
    Release(Ctl, Ctl),
}

impl Ctl {
    pub fn atom(p: impl Into<String>) -> Self {
        Ctl::Atom(p.into())
    }

    pub fn neg_atom(p: impl Into<String>) -> Self {
        Ctl::NegAtom(p.into())
    }

    pub fn and(a: Ctl, b: Ctl) -> Self {
        Ctl::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Ctl, b: Ctl) -> Self {
        Ctl::Or(Box::new(a), Box::new(b))
    }

    pub fn ax(f: Ctl) -> Self {
        Ctl::A(Box::new(PathFormula::Next(f)))
    }

    pub fn ex(f: Ctl) -> Self {
        Ctl::E(Box::new(PathFormula::Next(f)))
    }

    pub fn af(f: Ctl) -> Self {
        Ctl::A(Box::new(PathFormula::Eventually(f)))
    }

    pub fn ef(f: Ctl) -> Self {
        Ctl::E(Box::new(PathFormula::Eventually(f)))
    }

    pub fn ag(f: Ctl) -> Self {
        Ctl::A(Box::new(PathFormula::Globally(f)))
    }

    pub fn eg(f: Ctl) -> Self {
        Ctl::E(Box::new(PathFormula::Globally(f)))
    }

    pub fn au(f: Ctl, g: Ctl) -> Self {
        Ctl::A(Box::new(PathFormula::Until(f, g)))
    }

    pub fn eu(f: Ctl, g: Ctl) -> Self {
        Ctl::E(Box::new(PathFormula::Until(f, g)))
    }

    pub fn ar(f: Ctl, g: Ctl) -> Self {
        Ctl::A(Box::new(PathFormula::Release(f, g)))
    }

    pub fn er(f: Ctl, g: Ctl) -> Self {
        Ctl::E(Box::new(PathFormula::Release(f, g)))
    }

    /// The NNF dual. Structurally involutive.
    pub fn negate_nnf(&self) -> Ctl {
        match self {
            Ctl::True => Ctl::False,
            Ctl::False => Ctl::True,
            Ctl::Atom(p) => Ctl::NegAtom(p.clone()),
            Ctl::NegAtom(p) => Ctl::Atom(p.clone()),
            Ctl::And(a, b) => Ctl::or(a.negate_nnf(), b.negate_nnf()),
            Ctl::Or(a, b) => Ctl::and(a.negate_nnf(), b.negate_nnf()),
            Ctl::A(path) => Ctl::E(Box::new(path.negate())),
            Ctl::E(path) => Ctl::A(Box::new(path.negate())),
        }
    }

    /// No `E` quantifier occurs.
    pub fn is_universal(&self) -> bool {
        !self.has_quantifier(true)
    }

    /// No `A` quantifier occurs.
    pub fn is_existential(&self) -> bool {
        !self.has_quantifier(false)
    }

    fn has_quantifier(&self, existential: bool) -> bool {
        match self {
            Ctl::True | Ctl::False | Ctl::Atom(_) | Ctl::NegAtom(_) => false,
            Ctl::And(a, b) | Ctl::Or(a, b) => {
                a.has_quantifier(existential) || b.has_quantifier(existential)
            }
            Ctl::A(path) => {
                !existential
                    || path
                        .operands()
                        .iter()
                        .any(|f| f.has_quantifier(existential))
            }
            Ctl::E(path) => {
                existential
                    || path
                        .operands()
                        .iter()
                        .any(|f| f.has_quantifier(existential))
            }
        }
    }

    /// Nesting depth of temporal operators.
    pub fn temporal_depth(&self) -> usize {
        match self {
            Ctl::True | Ctl::False | Ctl::Atom(_) | Ctl::NegAtom(_) => 0,
            Ctl::And(a, b) | Ctl::Or(a, b) => a.temporal_depth().max(b.temporal_depth()),
            Ctl::A(path) | Ctl::E(path) => {
                1 + path
                    .operands()
                    .iter()
                    .map(|f| f.temporal_depth())
                    .max()
                    .unwrap_or(0)
            }
        }
    }

    /// Atomic propositions mentioned.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Ctl::True | Ctl::False => {}
            Ctl::Atom(p) | Ctl::NegAtom(p) => {
                out.insert(p.clone());
            }
            Ctl::And(a, b) | Ctl::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Ctl::A(path) | Ctl::E(path) => {
                for f in path.operands() {
                    f.collect_atoms(out);
                }
            }
        }
    }
}

impl PathFormula {
    pub fn operands(&self) -> Vec<&Ctl> {
        match self {
            PathFormula::Next(f) | PathFormula::Eventually(f) | PathFormula::Globally(f) => vec![f],
            PathFormula::Until(f, g) | PathFormula::Release(f, g) => vec![f, g],
        }
    }

    fn negate(&self) -> PathFormula {
        match self {
            PathFormula::Next(f) => PathFormula::Next(f.negate_nnf()),
            PathFormula::Eventually(f) => PathFormula::Globally(f.negate_nnf()),
            PathFormula::Globally(f) => PathFormula::Eventually(f.negate_nnf()),
            PathFormula::Until(f, g) => PathFormula::Release(f.negate_nnf(), g.negate_nnf()),
            PathFormula::Release(f, g) => PathFormula::Until(f.negate_nnf(), g.negate_nnf()),
        }
    }
}

impl fmt::Display for Ctl {
    /// Prints in the property grammar; reparses to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // precedence: 0 = or, 1 = and, 2 = unary
        fn go(e: &Ctl, ctx: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match e {
                Ctl::True => write!(f, "true"),
                Ctl::False => write!(f, "false"),
                Ctl::Atom(p) => write!(f, "{p}"),
                Ctl::NegAtom(p) => write!(f, "!{p}"),
                Ctl::And(a, b) => {
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
                Ctl::Or(a, b) => {
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
                Ctl::A(path) | Ctl::E(path) => {
                    let q = if matches!(e, Ctl::A(_)) { "A" } else { "E" };
                    match &**path {
                        PathFormula::Next(g) => {
                            write!(f, "{q}X ")?;
                            go(g, 2, f)
                        }
                        PathFormula::Eventually(g) => {
                            write!(f, "{q}F ")?;
                            go(g, 2, f)
                        }
                        PathFormula::Globally(g) => {
                            write!(f, "{q}G ")?;
                            go(g, 2, f)
                        }
                        PathFormula::Until(a, b) => {
                            write!(f, "{q}[")?;
                            go(a, 0, f)?;
                            write!(f, " U ")?;
                            go(b, 0, f)?;
                            write!(f, "]")
                        }
                        PathFormula::Release(a, b) => {
                            write!(f, "{q}[")?;
                            go(a, 0, f)?;
                            write!(f, " R ")?;
                            go(b, 0, f)?;
                            write!(f, "]")
                        }
                    }
                }
            }
        }
        go(self, 0, f)
    }
}
