//! The `.fts` text format, the property grammar, path specs and the
//! syntactic transformations on documents.
//!
//! ```text
//! format-version 1
//! features v, s;            # may be empty
//! configs v & s;
//! props extra;              # optional
//! state 1 init label start;
//! state 2;
//! trans 1 -> 2 on pay when v;
//! idle 2 when s;
//! prop P := AG EF start;
//! ```

use std::sync::Arc;

use thiserror::Error;

use crate::checker::{Ctl, PathFormula};
use crate::featexpr::{parse_feat_expr, valid_feature_name, ConfigSpace, FeatError, FeatExpr};
use crate::galois::{abstract_space, alpha_may, alpha_must, Abstraction, GaloisError};
use crate::models::{FeaturedTransition, Fts, ModelError, Path, Skeleton, Transition};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: {message}")]
    Resolve {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("EMPTY_CONFIG_SPACE: the configuration constraint admits no configuration")]
    EmptyConfigSpace,
    #[error("property syntax error at offset {offset}: {message}")]
    Property { offset: usize, message: String },
    #[error("invalid path: {0}")]
    Path(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Feat(#[from] FeatError),
    #[error(transparent)]
    Galois(#[from] GaloisError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDecl {
    pub name: String,
    pub init: bool,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransDecl {
    pub source: String,
    pub target: String,
    pub action: String,
    pub when: Option<FeatExpr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdleDecl {
    pub state: String,
    pub when: Option<FeatExpr>,
}

/// A parsed `.fts` document, in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelDocument {
    pub features: Vec<String>,
    pub configs: FeatExpr,
    pub props: Vec<String>,
    pub states: Vec<StateDecl>,
    pub transitions: Vec<TransDecl>,
    pub idles: Vec<IdleDecl>,
    pub properties: Vec<(String, Ctl)>,
}

/// Whether a syntactic abstraction produces the may or the must component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    May,
    Must,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "may" => Ok(Mode::May),
            "must" => Ok(Mode::Must),
            other => Err(format!("unknown mode `{other}`, expected may or must")),
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before
        .rfind('\n')
        .map_or(before.len(), |i| before.len() - i - 1)
        + 1;
    (line, col)
}

/// Replaces `#` comments by spaces so offsets are preserved.
fn blank_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_comment = false;
    for c in text.chars() {
        if c == '\n' {
            in_comment = false;
            out.push(c);
        } else if in_comment || c == '#' {
            in_comment = true;
            for _ in 0..c.len_utf8() {
                out.push(' ');
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Scanner over one statement; offsets are absolute in the source.
struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    end: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.end {
            let c = self.src[self.pos..].chars().next().unwrap();
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.end
    }

    fn name(&mut self) -> Option<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.end {
            let c = self.src[self.pos..].chars().next().unwrap();
            if !is_name_char(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        (self.pos > start).then(|| (start, &self.src[start..self.pos]))
    }

    fn eat(&mut self, lit: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..self.end].starts_with(lit) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        let save = self.pos;
        match self.name() {
            Some((_, w)) if w == kw => true,
            _ => {
                self.pos = save;
                false
            }
        }
    }

    fn rest(&mut self) -> (usize, &'a str) {
        self.skip_ws();
        let start = self.pos;
        self.pos = self.end;
        (start, &self.src[start..self.end])
    }
}

struct ModelParser<'a> {
    text: &'a str,
}

impl<'a> ModelParser<'a> {
    fn syntax(&self, offset: usize, message: impl Into<String>) -> DslError {
        let (line, col) = line_col(self.text, offset);
        DslError::Syntax {
            line,
            col,
            message: message.into(),
        }
    }

    fn resolve(&self, offset: usize, message: impl Into<String>) -> DslError {
        let (line, col) = line_col(self.text, offset);
        DslError::Resolve {
            line,
            col,
            message: message.into(),
        }
    }

    fn expr(&self, start: usize, text: &str) -> Result<FeatExpr, DslError> {
        parse_feat_expr(text).map_err(|e| match e {
            FeatError::Syntax { offset, message } => self.syntax(start + offset, message),
            other => DslError::Feat(other),
        })
    }

    fn name_list(&self, c: &mut Cursor<'_>, what: &str) -> Result<Vec<(usize, String)>, DslError> {
        let mut out = Vec::new();
        if c.at_end() {
            return Ok(out);
        }
        loop {
            let (at, n) = c
                .name()
                .ok_or_else(|| self.syntax(c.pos, format!("expected {what} name")))?;
            out.push((at, n.to_string()));
            if !c.eat(",") {
                break;
            }
        }
        if !c.at_end() {
            return Err(self.syntax(c.pos, "expected `,` or `;`"));
        }
        Ok(out)
    }

    fn parse(&self) -> Result<ModelDocument, DslError> {
        let clean = blank_comments(self.text);
        let mut head = Cursor {
            src: &clean,
            pos: 0,
            end: clean.len(),
        };
        if !head.eat("format-version") {
            return Err(self.syntax(head.pos, "missing `format-version 1` header"));
        }
        match head.name() {
            Some((_, "1")) => {}
            Some((at, v)) => return Err(self.syntax(at, format!("unsupported format version {v}"))),
            None => return Err(self.syntax(head.pos, "expected format version number")),
        }

        let mut doc = ModelDocument {
            features: Vec::new(),
            configs: FeatExpr::True,
            props: Vec::new(),
            states: Vec::new(),
            transitions: Vec::new(),
            idles: Vec::new(),
            properties: Vec::new(),
        };
        let mut seen_features = false;
        let mut seen_configs = false;
        let mut pending_props: Vec<(usize, String, String)> = Vec::new();
        let mut feature_exprs: Vec<(usize, FeatExpr)> = Vec::new();
        let mut state_refs: Vec<(usize, String)> = Vec::new();

        let mut pos = head.pos;
        while pos < clean.len() {
            let semi = match clean[pos..].find(';') {
                Some(i) => pos + i,
                None => {
                    let mut tail = Cursor {
                        src: &clean,
                        pos,
                        end: clean.len(),
                    };
                    if tail.at_end() {
                        break;
                    }
                    return Err(self.syntax(tail.pos, "statement not terminated by `;`"));
                }
            };
            let mut c = Cursor {
                src: &clean,
                pos,
                end: semi,
            };
            pos = semi + 1;
            let (kw_at, kw) = c
                .name()
                .ok_or_else(|| self.syntax(c.pos, "expected a keyword"))?;
            match kw {
                "features" => {
                    if seen_features {
                        return Err(self.syntax(kw_at, "duplicate `features` declaration"));
                    }
                    seen_features = true;
                    for (at, f) in self.name_list(&mut c, "feature")? {
                        if !valid_feature_name(&f) {
                            return Err(self.syntax(at, format!("invalid feature name `{f}`")));
                        }
                        if doc.features.contains(&f) {
                            return Err(self.resolve(at, format!("duplicate feature `{f}`")));
                        }
                        doc.features.push(f);
                    }
                }
                "configs" => {
                    if seen_configs {
                        return Err(self.syntax(kw_at, "duplicate `configs` declaration"));
                    }
                    seen_configs = true;
                    let (at, text) = c.rest();
                    doc.configs = self.expr(at, text)?;
                    feature_exprs.push((at, doc.configs.clone()));
                }
                "props" => {
                    for (at, p) in self.name_list(&mut c, "proposition")? {
                        if !valid_feature_name(&p) {
                            return Err(self.syntax(at, format!("invalid proposition name `{p}`")));
                        }
                        if !doc.props.contains(&p) {
                            doc.props.push(p);
                        }
                    }
                }
                "state" => {
                    let (at, name) = c
                        .name()
                        .ok_or_else(|| self.syntax(c.pos, "expected state name"))?;
                    if doc.states.iter().any(|s| s.name == name) {
                        return Err(self.resolve(at, format!("duplicate state `{name}`")));
                    }
                    let init = c.eat_keyword("init");
                    let mut labels = Vec::new();
                    if c.eat_keyword("label") {
                        for (lat, l) in self.name_list(&mut c, "label")? {
                            if !valid_feature_name(&l) {
                                return Err(self.syntax(lat, format!("invalid label `{l}`")));
                            }
                            labels.push(l);
                        }
                    } else if !c.at_end() {
                        return Err(self.syntax(c.pos, "expected `init`, `label` or `;`"));
                    }
                    doc.states.push(StateDecl {
                        name: name.to_string(),
                        init,
                        labels,
                    });
                }
                "trans" => {
                    let (sat, source) = c
                        .name()
                        .ok_or_else(|| self.syntax(c.pos, "expected source state"))?;
                    if !c.eat("->") {
                        return Err(self.syntax(c.pos, "expected `->`"));
                    }
                    let (tat, target) = c
                        .name()
                        .ok_or_else(|| self.syntax(c.pos, "expected target state"))?;
                    if !c.eat_keyword("on") {
                        return Err(self.syntax(c.pos, "expected `on ACTION`"));
                    }
                    let (_, action) = c
                        .name()
                        .ok_or_else(|| self.syntax(c.pos, "expected action name"))?;
                    let when = self.when_clause(&mut c, &mut feature_exprs)?;
                    state_refs.push((sat, source.to_string()));
                    state_refs.push((tat, target.to_string()));
                    doc.transitions.push(TransDecl {
                        source: source.to_string(),
                        target: target.to_string(),
                        action: action.to_string(),
                        when,
                    });
                }
                "idle" => {
                    let (at, state) = c
                        .name()
                        .ok_or_else(|| self.syntax(c.pos, "expected state name"))?;
                    let when = self.when_clause(&mut c, &mut feature_exprs)?;
                    state_refs.push((at, state.to_string()));
                    doc.idles.push(IdleDecl {
                        state: state.to_string(),
                        when,
                    });
                }
                "prop" => {
                    let (at, name) = c
                        .name()
                        .ok_or_else(|| self.syntax(c.pos, "expected property name"))?;
                    if !c.eat(":=") {
                        return Err(self.syntax(c.pos, "expected `:=`"));
                    }
                    let (fat, text) = c.rest();
                    if doc.properties.iter().any(|(n, _)| n == name)
                        || pending_props.iter().any(|(_, n, _)| n == name)
                    {
                        return Err(self.resolve(at, format!("duplicate property `{name}`")));
                    }
                    pending_props.push((fat, name.to_string(), text.to_string()));
                }
                other => return Err(self.syntax(kw_at, format!("unknown keyword `{other}`"))),
            }
        }

        for (at, e) in &feature_exprs {
            if let Some(f) = e.features().into_iter().find(|f| !doc.features.contains(f)) {
                return Err(self.resolve(*at, format!("unknown feature `{f}`")));
            }
        }
        for (at, s) in &state_refs {
            if !doc.states.iter().any(|d| d.name == *s) {
                return Err(self.resolve(*at, format!("undeclared state `{s}`")));
            }
        }
        if doc.states.is_empty() {
            return Err(self.resolve(self.text.len(), "no states declared"));
        }
        if !doc.states.iter().any(|s| s.init) {
            return Err(self.resolve(self.text.len(), "no initial state"));
        }
        let ap = doc.atomic_props();
        for (at, name, text) in pending_props {
            let phi = parse_property(&text).map_err(|e| match e {
                DslError::Property { offset, message } => self.syntax(at + offset, message),
                other => other,
            })?;
            if let Some(p) = phi.atoms().into_iter().find(|p| !ap.contains(p)) {
                return Err(self.resolve(at, format!("unknown atomic proposition `{p}`")));
            }
            doc.properties.push((name, phi));
        }
        Ok(doc)
    }

    fn when_clause(
        &self,
        c: &mut Cursor<'_>,
        exprs: &mut Vec<(usize, FeatExpr)>,
    ) -> Result<Option<FeatExpr>, DslError> {
        if c.at_end() {
            return Ok(None);
        }
        if !c.eat_keyword("when") {
            return Err(self.syntax(c.pos, "expected `when` or `;`"));
        }
        let (at, text) = c.rest();
        let e = self.expr(at, text)?;
        exprs.push((at, e.clone()));
        Ok(Some(e))
    }
}

impl ModelDocument {
    /// Declared propositions followed by state labels, without duplicates.
    pub fn atomic_props(&self) -> Vec<String> {
        let mut out = self.props.clone();
        for l in self.states.iter().flat_map(|s| s.labels.iter()) {
            if !out.contains(l) {
                out.push(l.clone());
            }
        }
        out
    }

    pub fn space(&self) -> Result<ConfigSpace, DslError> {
        let space = ConfigSpace::new(self.features.clone(), self.configs.clone())?;
        if space.is_empty() {
            return Err(DslError::EmptyConfigSpace);
        }
        Ok(space)
    }

    /// Builds the FTS the document denotes.
    pub fn to_fts(&self) -> Result<Fts, DslError> {
        let space = self.space()?;
        let mut actions: Vec<String> = Vec::new();
        for t in &self.transitions {
            if !actions.contains(&t.action) {
                actions.push(t.action.clone());
            }
        }
        let skel = Skeleton::new(
            self.states.iter().map(|s| s.name.clone()).collect(),
            actions,
            self.props.clone(),
            self.states.iter().map(|s| s.labels.clone()).collect(),
            self.states
                .iter()
                .enumerate()
                .filter(|(_, s)| s.init)
                .map(|(i, _)| i)
                .collect(),
        )?;
        let mut transitions = Vec::new();
        for t in &self.transitions {
            transitions.push(FeaturedTransition {
                transition: Transition::new(
                    skel.state_id(&t.source)?,
                    skel.action_id(&t.action)?,
                    skel.state_id(&t.target)?,
                ),
                presence: t.when.clone().unwrap_or(FeatExpr::True),
            });
        }
        for i in &self.idles {
            transitions.push(FeaturedTransition {
                transition: Transition::idle(skel.state_id(&i.state)?),
                presence: i.when.clone().unwrap_or(FeatExpr::True),
            });
        }
        Ok(Fts::new(Arc::new(skel), space, transitions)?)
    }

    /// The document of an FTS; transitions with condition `true` get no
    /// `when` clause.
    pub fn from_fts(fts: &Fts, properties: Vec<(String, Ctl)>) -> ModelDocument {
        let skel = &fts.skeleton;
        let labelled: Vec<&str> = (0..skel.num_states())
            .flat_map(|s| skel.label_names(s))
            .collect();
        let when = |e: &FeatExpr| (*e != FeatExpr::True).then(|| e.clone());
        ModelDocument {
            features: fts.space.features().to_vec(),
            configs: fts.space.constraint().clone(),
            props: skel
                .props()
                .iter()
                .filter(|p| !labelled.contains(&p.as_str()))
                .cloned()
                .collect(),
            states: (0..skel.num_states())
                .map(|s| StateDecl {
                    name: skel.state_name(s).to_string(),
                    init: skel.is_initial(s),
                    labels: skel.label_names(s).iter().map(|l| l.to_string()).collect(),
                })
                .collect(),
            transitions: fts
                .transitions
                .iter()
                .filter(|ft| !ft.transition.is_idle())
                .map(|ft| TransDecl {
                    source: skel.state_name(ft.transition.source).to_string(),
                    target: skel.state_name(ft.transition.target).to_string(),
                    action: skel.action_name(ft.transition.action).to_string(),
                    when: when(&ft.presence),
                })
                .collect(),
            idles: fts
                .transitions
                .iter()
                .filter(|ft| ft.transition.is_idle())
                .map(|ft| IdleDecl {
                    state: skel.state_name(ft.transition.source).to_string(),
                    when: when(&ft.presence),
                })
                .collect(),
            properties,
        }
    }

    pub fn property(&self, name: &str) -> Option<&Ctl> {
        self.properties
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, p)| p)
    }

    /// Merges transition clauses with the same triple by disjunction.
    fn merged(&self) -> ModelDocument {
        let mut out = self.clone();
        out.transitions.clear();
        for t in &self.transitions {
            let key = |u: &TransDecl| {
                (
                    u.source == t.source,
                    u.target == t.target,
                    u.action == t.action,
                )
            };
            match out
                .transitions
                .iter_mut()
                .find(|u| key(u) == (true, true, true))
            {
                Some(u) => {
                    let prev = u.when.take().unwrap_or(FeatExpr::True);
                    u.when = Some(FeatExpr::or(prev, t.when.clone().unwrap_or(FeatExpr::True)));
                }
                None => out.transitions.push(t.clone()),
            }
        }
        out.idles.clear();
        for i in &self.idles {
            match out.idles.iter_mut().find(|u| u.state == i.state) {
                Some(u) => {
                    let prev = u.when.take().unwrap_or(FeatExpr::True);
                    u.when = Some(FeatExpr::or(prev, i.when.clone().unwrap_or(FeatExpr::True)));
                }
                None => out.idles.push(i.clone()),
            }
        }
        out
    }
}

/// Parses a `.fts` document and builds its FTS.
pub fn parse_model(text: &str) -> Result<(ModelDocument, Fts), DslError> {
    let doc = parse_document(text)?;
    let fts = doc.to_fts()?;
    Ok((doc, fts))
}

/// Parses a `.fts` document without building the FTS.
pub fn parse_document(text: &str) -> Result<ModelDocument, DslError> {
    ModelParser { text }.parse()
}

fn write_list(out: &mut String, kw: &str, items: &[String]) {
    if items.is_empty() {
        out.push_str(&format!("{kw};\n"));
    } else {
        out.push_str(&format!("{kw} {};\n", items.join(", ")));
    }
}

/// Canonical text of a document.
pub fn print_model(doc: &ModelDocument) -> String {
    let mut out = String::from("format-version 1\n\n");
    write_list(&mut out, "features", &doc.features);
    out.push_str(&format!("configs {};\n", doc.configs));
    if !doc.props.is_empty() {
        write_list(&mut out, "props", &doc.props);
    }
    out.push('\n');
    for s in &doc.states {
        out.push_str(&format!("state {}", s.name));
        if s.init {
            out.push_str(" init");
        }
        if !s.labels.is_empty() {
            out.push_str(&format!(" label {}", s.labels.join(", ")));
        }
        out.push_str(";\n");
    }
    out.push('\n');
    for t in &doc.transitions {
        out.push_str(&format!(
            "trans {} -> {} on {}",
            t.source, t.target, t.action
        ));
        if let Some(w) = &t.when {
            out.push_str(&format!(" when {w}"));
        }
        out.push_str(";\n");
    }
    for i in &doc.idles {
        out.push_str(&format!("idle {}", i.state));
        if let Some(w) = &i.when {
            out.push_str(&format!(" when {w}"));
        }
        out.push_str(";\n");
    }
    if !doc.properties.is_empty() {
        out.push('\n');
        for (name, phi) in &doc.properties {
            out.push_str(&format!("prop {name} := {phi};\n"));
        }
    }
    out
}

/// Conjoins `psi` into the configuration constraint.
pub fn apply_invar(doc: &ModelDocument, psi: &FeatExpr) -> Result<ModelDocument, DslError> {
    if let Some(f) = psi
        .features()
        .into_iter()
        .find(|f| !doc.features.contains(f))
    {
        return Err(DslError::Feat(FeatError::UnknownFeature(f)));
    }
    let mut out = doc.clone();
    out.configs = FeatExpr::and(doc.configs.clone(), psi.clone());
    out.space()?;
    Ok(out)
}

/// Rewrites every `when` clause through the may or must abstraction and
/// replaces the feature declarations by the abstract ones. Clauses whose
/// condition becomes unsatisfiable are deleted.
pub fn apply_abstraction_syntactic(
    doc: &ModelDocument,
    a: &Abstraction,
    mode: Mode,
) -> Result<ModelDocument, DslError> {
    let space = doc.space()?;
    let abs = abstract_space(a, &space)?;
    let merged = doc.merged();
    let rewrite = |w: &Option<FeatExpr>| -> Result<Option<Option<FeatExpr>>, DslError> {
        let e = w.clone().unwrap_or(FeatExpr::True);
        let r = match mode {
            Mode::May => alpha_may(a, &e, &space)?,
            Mode::Must => alpha_must(a, &e, &space)?,
        };
        Ok(if r.is_unsatisfiable() {
            None
        } else if r == FeatExpr::True {
            Some(None)
        } else {
            Some(Some(r))
        })
    };
    let mut out = merged.clone();
    out.features = abs.space.features().to_vec();
    out.configs = abs.space.constraint().clone();
    out.transitions.clear();
    for t in &merged.transitions {
        if let Some(when) = rewrite(&t.when)? {
            out.transitions.push(TransDecl { when, ..t.clone() });
        }
    }
    out.idles.clear();
    for i in &merged.idles {
        if let Some(when) = rewrite(&i.when)? {
            out.idles.push(IdleDecl { when, ..i.clone() });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Properties

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Not,
    And,
    Or,
    Implies,
    LParen,
    RParen,
    LBracket,
    RBracket,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, DslError> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some(&(i, c)) = it.peek() {
        if c.is_whitespace() {
            it.next();
            continue;
        }
        let single = match c {
            '!' => Some(Tok::Not),
            '&' => Some(Tok::And),
            '|' => Some(Tok::Or),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            _ => None,
        };
        if let Some(t) = single {
            it.next();
            out.push((i, t));
        } else if c == '-' {
            it.next();
            if it.next().map(|(_, c)| c) != Some('>') {
                return Err(DslError::Property {
                    offset: i,
                    message: "expected `->`".into(),
                });
            }
            out.push((i, Tok::Implies));
        } else if is_name_char(c) {
            let mut end = i;
            while let Some(&(j, d)) = it.peek() {
                if !is_name_char(d) {
                    break;
                }
                end = j + d.len_utf8();
                it.next();
            }
            out.push((i, Tok::Ident(text[i..end].to_string())));
        } else {
            return Err(DslError::Property {
                offset: i,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

const RESERVED: [&str; 12] = [
    "AX", "EX", "AF", "EF", "AG", "EG", "A", "E", "U", "R", "true", "false",
];

struct PropParser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
}

impl PropParser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.len, |(o, _)| *o)
    }

    fn error(&self, message: impl Into<String>) -> DslError {
        DslError::Property {
            offset: self.offset(),
            message: message.into(),
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), DslError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn implication(&mut self) -> Result<Ctl, DslError> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Implies) {
            self.pos += 1;
            let rhs = self.implication()?;
            return Ok(Ctl::or(lhs.negate_nnf(), rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Ctl, DslError> {
        let mut lhs = self.conjunction()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            lhs = Ctl::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Ctl, DslError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            lhs = Ctl::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ctl, DslError> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(self.unary()?.negate_nnf())
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.implication()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(word)) => {
                self.pos += 1;
                let unary_op = |f: fn(Ctl) -> Ctl, p: &mut PropParser| Ok(f(p.unary()?));
                match word.as_str() {
                    "true" => Ok(Ctl::True),
                    "false" => Ok(Ctl::False),
                    "AX" => unary_op(Ctl::ax, self),
                    "EX" => unary_op(Ctl::ex, self),
                    "AF" => unary_op(Ctl::af, self),
                    "EF" => unary_op(Ctl::ef, self),
                    "AG" => unary_op(Ctl::ag, self),
                    "EG" => unary_op(Ctl::eg, self),
                    "A" | "E" => {
                        self.expect(Tok::LBracket, "`[`")?;
                        let lhs = self.implication()?;
                        let op = match self.peek() {
                            Some(Tok::Ident(w)) if w == "U" || w == "R" => w.clone(),
                            _ => return Err(self.error("expected `U` or `R`")),
                        };
                        self.pos += 1;
                        let rhs = self.implication()?;
                        self.expect(Tok::RBracket, "`]`")?;
                        let path = if op == "U" {
                            PathFormula::Until(lhs, rhs)
                        } else {
                            PathFormula::Release(lhs, rhs)
                        };
                        Ok(if word == "A" {
                            Ctl::A(Box::new(path))
                        } else {
                            Ctl::E(Box::new(path))
                        })
                    }
                    w if RESERVED.contains(&w) => {
                        self.pos -= 1;
                        Err(self.error(format!("unexpected keyword `{w}`")))
                    }
                    w if w.starts_with(|c: char| c.is_ascii_digit()) => {
                        self.pos -= 1;
                        Err(self.error(format!("invalid atom `{w}`")))
                    }
                    w => Ok(Ctl::atom(w)),
                }
            }
            Some(t) => Err(self.error(format!("unexpected token {t:?}"))),
            None => Err(self.error("unexpected end of formula")),
        }
    }
}

/// Parses a CTL property into NNF.
///
/// Precedence: `!` > `&` > `|` > `->`; `->` is right-associative and
/// `f -> g` means `!f | g`.
pub fn parse_property(text: &str) -> Result<Ctl, DslError> {
    let mut p = PropParser {
        toks: tokenize(text)?,
        pos: 0,
        len: text.len(),
    };
    let phi = p.implication()?;
    if p.pos != p.toks.len() {
        return Err(p.error("trailing input"));
    }
    Ok(phi)
}

/// Parses a property and checks its atoms against a skeleton.
pub fn parse_property_for(text: &str, skel: &Skeleton) -> Result<Ctl, DslError> {
    let phi = parse_property(text)?;
    for a in phi.atoms() {
        skel.prop_id(&a)?;
    }
    Ok(phi)
}

// ---------------------------------------------------------------------------
// Path notation

/// Parses `1 -pay-> 2 -> 3 loop 1`.
///
/// An unlabeled `->` must be resolved by exactly one transition of `fts`
/// between the two states. `loop K` closes a lasso at position `K`.
pub fn parse_path(fts: &Fts, text: &str) -> Result<Path, DslError> {
    let skel = &fts.skeleton;
    let words: Vec<&str> = text.split_whitespace().collect();
    let (body, loop_start) = match words.iter().position(|w| *w == "loop") {
        Some(i) => {
            if i + 2 != words.len() {
                return Err(DslError::Path(
                    "`loop` must be followed by one index".into(),
                ));
            }
            let k: usize = words[i + 1]
                .parse()
                .map_err(|_| DslError::Path(format!("bad loop index `{}`", words[i + 1])))?;
            (&words[..i], Some(k))
        }
        None => (&words[..], None),
    };
    if body.is_empty() || body.len() % 2 == 0 {
        return Err(DslError::Path("expected `STATE (-ACTION-> STATE)*`".into()));
    }
    let mut states = vec![skel.state_id(body[0])?];
    let mut actions = Vec::new();
    for pair in body[1..].chunks(2) {
        let arrow = pair[0];
        let target = skel.state_id(pair[1])?;
        let source = *states.last().unwrap();
        let action = if arrow == "->" {
            let candidates: Vec<_> = fts
                .transitions
                .iter()
                .filter(|ft| ft.transition.source == source && ft.transition.target == target)
                .map(|ft| ft.transition.action)
                .collect();
            match candidates.as_slice() {
                [a] => *a,
                [] if source == target => crate::models::STUTTER,
                [] => {
                    return Err(DslError::Path(format!(
                        "no transition from `{}` to `{}`",
                        skel.state_name(source),
                        skel.state_name(target)
                    )))
                }
                _ => {
                    return Err(DslError::Path(format!(
                        "ambiguous step `{}` -> `{}`; name the action",
                        skel.state_name(source),
                        skel.state_name(target)
                    )))
                }
            }
        } else if let Some(name) = arrow.strip_prefix('-').and_then(|a| a.strip_suffix("->")) {
            skel.action_id(name)?
        } else {
            return Err(DslError::Path(format!(
                "expected an arrow, found `{arrow}`"
            )));
        };
        actions.push(action);
        states.push(target);
    }
    let path = Path {
        states,
        actions,
        loop_start,
    };
    if !path.is_well_formed() {
        return Err(DslError::Path(
            "loop index must point at an earlier occurrence of the last state".into(),
        ));
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "format-version 1
# a comment
features a, b;
configs a | b;
props q;
state s0 init label p;
state s1;
trans s0 -> s1 on go when a;   # trailing comment
trans s1 -> s0 on back;
idle s1 when b & !a;
prop P := AG (p -> EF !p);
";

    #[test]
    fn parse_small_document() {
        let (doc, fts) = parse_model(SMALL).unwrap();
        assert_eq!(doc.features, vec!["a", "b"]);
        assert_eq!(doc.states.len(), 2);
        assert_eq!(doc.transitions.len(), 2);
        assert_eq!(doc.idles.len(), 1);
        assert_eq!(fts.transitions.len(), 3);
        assert_eq!(fts.space.len(), 3);
        assert_eq!(
            doc.property("P").unwrap(),
            &Ctl::ag(Ctl::or(Ctl::neg_atom("p"), Ctl::ef(Ctl::neg_atom("p"))))
        );
        assert_eq!(doc.atomic_props(), vec!["q", "p"]);
    }

    #[test]
    fn print_parse_round_trip() {
        let doc = parse_document(SMALL).unwrap();
        let printed = print_model(&doc);
        let again = parse_document(&printed).unwrap();
        assert_eq!(again, doc);
        assert_eq!(print_model(&again), printed);
    }

    #[test]
    fn model_errors() {
        let empty = SMALL.replace("configs a | b;", "configs false;");
        assert_eq!(parse_model(&empty).unwrap_err(), DslError::EmptyConfigSpace);
        let undeclared = SMALL.replace("trans s1 -> s0", "trans s1 -> s9");
        assert!(matches!(
            parse_model(&undeclared).unwrap_err(),
            DslError::Resolve { line: 9, .. }
        ));
        let bad_expr = SMALL.replace("when a;", "when a &;");
        assert!(matches!(
            parse_model(&bad_expr).unwrap_err(),
            DslError::Syntax { line: 8, .. }
        ));
        let unknown_atom = SMALL.replace("EF !p", "EF !zz");
        assert!(matches!(
            parse_model(&unknown_atom).unwrap_err(),
            DslError::Resolve { .. }
        ));
        let no_header = SMALL.replace("format-version 1", "");
        assert!(parse_model(&no_header).is_err());
        let unknown_feature = SMALL.replace("when a;", "when zz;");
        assert!(matches!(
            parse_model(&unknown_feature).unwrap_err(),
            DslError::Resolve { .. }
        ));
    }

    #[test]
    fn property_grammar() {
        assert_eq!(
            parse_property("AG ( AF start )").unwrap(),
            Ctl::ag(Ctl::af(Ctl::atom("start")))
        );
        assert_eq!(
            parse_property("EG EF start").unwrap(),
            Ctl::eg(Ctl::ef(Ctl::atom("start")))
        );
        assert_eq!(
            parse_property("a -> b -> c").unwrap(),
            Ctl::or(
                Ctl::neg_atom("a"),
                Ctl::or(Ctl::neg_atom("b"), Ctl::atom("c"))
            )
        );
        assert_eq!(
            parse_property("!(a & EX b)").unwrap(),
            Ctl::or(Ctl::neg_atom("a"), Ctl::ax(Ctl::neg_atom("b")))
        );
        assert_eq!(
            parse_property("A[a U b] | E[a R b]").unwrap(),
            Ctl::or(
                Ctl::au(Ctl::atom("a"), Ctl::atom("b")),
                Ctl::er(Ctl::atom("a"), Ctl::atom("b"))
            )
        );
        assert!(matches!(
            parse_property("AG & p"),
            Err(DslError::Property { offset: 3, .. })
        ));
        assert!(parse_property("A[a b]").is_err());
        assert!(parse_property("a )").is_err());
    }

    #[test]
    fn property_display_round_trips() {
        for text in [
            "AG AF start",
            "E[a | !b U c & d]",
            "AX (a | b) & EG !c",
            "A[true R false] | a | (b | c)",
        ] {
            let phi = parse_property(text).unwrap();
            assert_eq!(parse_property(&phi.to_string()).unwrap(), phi, "{text}");
        }
    }

    #[test]
    fn invar_and_abstraction() {
        let doc = parse_document(SMALL).unwrap();
        let only_a = apply_invar(&doc, &parse_feat_expr("a").unwrap()).unwrap();
        assert_eq!(only_a.space().unwrap().len(), 2);
        assert_eq!(
            apply_invar(&doc, &parse_feat_expr("!a & !b").unwrap()).unwrap_err(),
            DslError::EmptyConfigSpace
        );
        let must = apply_abstraction_syntactic(&doc, &Abstraction::Join, Mode::Must).unwrap();
        assert_eq!(must.transitions.len(), 1);
        assert!(must.features.is_empty());
        let may = apply_abstraction_syntactic(&doc, &Abstraction::Join, Mode::May).unwrap();
        assert_eq!(may.transitions.len(), 2);
        assert!(may.transitions.iter().all(|t| t.when.is_none()));
    }

    #[test]
    fn path_specs() {
        let (_, fts) = parse_model(SMALL).unwrap();
        let p = parse_path(&fts, "s0 -go-> s1 -> s0 loop 0").unwrap();
        assert_eq!(p.states, vec![0, 1, 0]);
        assert_eq!(p.loop_start, Some(0));
        let idle = parse_path(&fts, "s0 -> s1 -> s1 loop 1").unwrap();
        assert_eq!(idle.actions[1], crate::models::STUTTER);
        assert!(parse_path(&fts, "s0 -> s0").is_ok());
        assert!(parse_path(&fts, "s1 -go-> s0").is_ok());
        assert!(parse_path(&fts, "s0 -> s1 loop 0").is_err());
        assert!(parse_path(&fts, "s0 -> s9").is_err());
    }
}
