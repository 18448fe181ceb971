//! The optimization rule catalog.
//!
//! Each entry is a parameterized transformation `(Grammar, ScopeSpec, args)
//! -> Grammar` with a declared subject, allowed scope kinds and argument
//! arity. [`Catalog::builtin`] wires up the shipped set; [`Catalog::register`]
//! is the extension point for new rules.

mod brace;
mod keyword;
mod multiplicity;
mod optionality;
mod structure;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::model::Grammar;
use crate::scope::{resolve_scope_indices, ScopeError, ScopeKind, ScopeSpec};
use crate::tokens::{self, Tok};

/// What a rule manipulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subject {
    Keyword,
    Rule,
    Attribute,
    Optionality,
    Multiplicity,
    Brace,
    Import,
    Symbol,
    PrimitiveType,
    Line,
    RuleCall,
}

/// The scope kinds a catalog rule accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScopeKinds {
    pub global: bool,
    pub rule: bool,
    pub attribute: bool,
}

impl ScopeKinds {
    /// Global, rule or attribute scope, chosen by the provided selectors.
    pub const CONFIGURABLE: ScopeKinds =
        ScopeKinds { global: true, rule: true, attribute: true };
    pub const GLOBAL: ScopeKinds =
        ScopeKinds { global: true, rule: false, attribute: false };
    pub const RULE: ScopeKinds =
        ScopeKinds { global: false, rule: true, attribute: false };
    pub const ATTRIBUTE: ScopeKinds =
        ScopeKinds { global: false, rule: false, attribute: true };
    pub const RULE_OR_ATTRIBUTE: ScopeKinds =
        ScopeKinds { global: false, rule: true, attribute: true };
    pub const GLOBAL_OR_RULE: ScopeKinds =
        ScopeKinds { global: true, rule: true, attribute: false };

    pub fn allows(&self, kind: ScopeKind) -> bool {
        match kind {
            ScopeKind::Global => self.global,
            ScopeKind::Rule => self.rule,
            ScopeKind::Attribute => self.attribute,
        }
    }
}

/// Argument count bounds, with a usage string for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Arity {
    pub min: usize,
    pub max: usize,
    pub usage: &'static str,
}

impl Arity {
    pub const fn none() -> Arity {
        Arity { min: 0, max: 0, usage: "" }
    }

    pub const fn exactly(n: usize, usage: &'static str) -> Arity {
        Arity { min: n, max: n, usage }
    }

    pub const fn range(min: usize, max: usize, usage: &'static str) -> Arity {
        Arity { min, max, usage }
    }

    pub fn accepts(&self, n: usize) -> bool {
        n >= self.min && n <= self.max
    }
}

/// Descriptor of one catalog rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub key: String,
    pub subject: Subject,
    pub scope_kinds: ScopeKinds,
    pub arity: Arity,
}

impl CatalogEntry {
    pub fn new(key: &str, subject: Subject, scope_kinds: ScopeKinds, arity: Arity) -> CatalogEntry {
        CatalogEntry { key: key.to_string(), subject, scope_kinds, arity }
    }
}

/// Failure of a single rule application: malformed arguments or a violated
/// precondition. The grammar is left untouched.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct RuleError(pub String);

impl RuleError {
    pub fn new(message: impl Into<String>) -> RuleError {
        RuleError(message.into())
    }
}

/// What one application touched. Zero counts mean the application found
/// nothing to change.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChangeStats {
    pub rules_touched: usize,
    pub lines_touched: usize,
    pub note: Option<String>,
}

impl ChangeStats {
    pub fn changed(rules_touched: usize, lines_touched: usize) -> ChangeStats {
        ChangeStats { rules_touched, lines_touched, note: None }
    }

    pub fn no_match(note: impl Into<String>) -> ChangeStats {
        ChangeStats { rules_touched: 0, lines_touched: 0, note: Some(note.into()) }
    }

    pub fn is_no_match(&self) -> bool {
        self.rules_touched == 0 && self.lines_touched == 0
    }
}

/// A rule transformation. Implementations mutate the grammar in place and
/// report what they touched; on error the engine discards the mutation.
pub type TransformFn =
    Box<dyn Fn(&mut Grammar, &ScopeSpec, &[String]) -> Result<ChangeStats, RuleError> + Send + Sync>;

pub(crate) type TransformRef<'a> =
    &'a (dyn Fn(&mut Grammar, &ScopeSpec, &[String]) -> Result<ChangeStats, RuleError> + Send + Sync);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("catalog already has a rule with key '{0}'")]
    DuplicateKey(String),
}

struct Registered {
    entry: CatalogEntry,
    transform: TransformFn,
}

/// The rule registry. Immutable once configuration starts; keyed lookups and
/// listing are deterministic.
pub struct Catalog {
    rules: BTreeMap<String, Registered>,
}

impl Catalog {
    pub fn empty() -> Catalog {
        Catalog { rules: BTreeMap::new() }
    }

    /// The shipped rule set.
    pub fn builtin() -> Catalog {
        let mut c = Catalog::empty();
        brace::register(&mut c);
        keyword::register(&mut c);
        optionality::register(&mut c);
        multiplicity::register(&mut c);
        structure::register(&mut c);
        c
    }

    /// Add a rule. Keys must be unique.
    pub fn register(&mut self, entry: CatalogEntry, transform: TransformFn) -> Result<(), CatalogError> {
        if self.rules.contains_key(&entry.key) {
            return Err(CatalogError::DuplicateKey(entry.key));
        }
        self.rules.insert(entry.key.clone(), Registered { entry, transform });
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.rules.contains_key(key)
    }

    pub fn entry(&self, key: &str) -> Option<&CatalogEntry> {
        self.rules.get(key).map(|r| &r.entry)
    }

    /// All entries, sorted by key.
    pub fn entries(&self) -> impl Iterator<Item = &CatalogEntry> {
        self.rules.values().map(|r| &r.entry)
    }

    /// Check scope shape, scope kind and argument count against the entry.
    pub fn validate(
        &self,
        key: &str,
        scope: &ScopeSpec,
        args: &[String],
    ) -> Result<(), String> {
        let entry = self.entry(key).ok_or_else(|| format!("unknown rule '{key}'"))?;
        let kind = scope.kind().map_err(|e| e.to_string())?;
        if !entry.scope_kinds.allows(kind) {
            return Err(format!("rule '{key}' does not accept {} scope", kind.as_str()));
        }
        if !entry.arity.accepts(args.len()) {
            let expect = if entry.arity.min == entry.arity.max {
                format!("{}", entry.arity.min)
            } else {
                format!("{} to {}", entry.arity.min, entry.arity.max)
            };
            return Err(format!(
                "rule '{key}' takes {expect} argument(s){}{}, got {}",
                if entry.arity.usage.is_empty() { "" } else { ": " },
                entry.arity.usage,
                args.len()
            ));
        }
        Ok(())
    }

    pub(crate) fn transform(&self, key: &str) -> Option<TransformRef<'_>> {
        self.rules.get(key).map(|r| r.transform.as_ref())
    }
}

impl std::fmt::Debug for Catalog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Catalog").field("keys", &self.rules.keys().collect::<Vec<_>>()).finish()
    }
}

/// Rewrite the content of every line in scope through `f`. Counts a line
/// when its rendered content actually changed; a missing rule or attribute
/// becomes a no-match.
pub(crate) fn rewrite_scoped_lines(
    grammar: &mut Grammar,
    scope: &ScopeSpec,
    mut f: impl FnMut(&mut Vec<Tok>),
) -> Result<ChangeStats, RuleError> {
    let selection = match resolve_scope_indices(grammar, scope) {
        Ok(s) => s,
        Err(e @ (ScopeError::RuleNotFound(_) | ScopeError::AttrNotFound(..))) => {
            return Ok(ChangeStats::no_match(e.to_string()))
        }
        Err(e) => return Err(RuleError::new(e.to_string())),
    };
    let mut stats = ChangeStats::default();
    for (ri, line_indices) in selection {
        let mut rule_touched = false;
        for li in line_indices {
            let line = &mut grammar.rules[ri].lines[li];
            let before = line.content().to_string();
            let mut toks = tokens::lex(&before);
            f(&mut toks);
            let after = tokens::render(&toks);
            if after != before {
                line.set_content(after);
                stats.lines_touched += 1;
                rule_touched = true;
            }
        }
        if rule_touched {
            stats.rules_touched += 1;
        }
    }
    if stats.is_no_match() {
        stats.note = Some("nothing to change in scope".to_string());
    }
    Ok(stats)
}

/// Resolve a scope for rules that need the selection itself, mapping missing
/// targets to no-match.
pub(crate) enum Selection {
    Found(Vec<(usize, Vec<usize>)>),
    NoMatch(String),
}

pub(crate) fn select(
    grammar: &Grammar,
    scope: &ScopeSpec,
) -> Result<Selection, RuleError> {
    match resolve_scope_indices(grammar, scope) {
        Ok(s) => Ok(Selection::Found(s)),
        Err(e @ (ScopeError::RuleNotFound(_) | ScopeError::AttrNotFound(..))) => {
            Ok(Selection::NoMatch(e.to_string()))
        }
        Err(e) => Err(RuleError::new(e.to_string())),
    }
}

/// Index of the line carrying the rule-declaration colon.
pub(crate) fn colon_line_index(rule: &crate::model::GrammarRule) -> Option<usize> {
    rule.lines
        .iter()
        .position(|l| tokens::decl_colon_index(&tokens::lex(l.content())).is_some())
}

/// True when the line holds nothing but a semantic action `{Name}`.
pub(crate) fn is_action_only_line(content: &str) -> bool {
    let toks = tokens::lex(content);
    let non_ws: Vec<&Tok> = toks.iter().filter(|t| !t.is_ws()).collect();
    matches!(
        non_ws.as_slice(),
        [Tok::Punct('{'), Tok::Word(_), Tok::Punct('}')]
    )
}

/// Insert a quoted token as the first body element of a rule: on its own
/// line after the header and semantic action, or inline for one-line rules.
pub(crate) fn insert_body_start_token(rule: &mut crate::model::GrammarRule, token: &str) -> bool {
    let Some(cl) = colon_line_index(rule) else { return false };
    let content = rule.lines[cl].content().to_string();
    let toks = tokens::lex(&content);
    let colon = tokens::decl_colon_index(&toks).unwrap();
    let has_inline_body = toks[colon + 1..].iter().any(|t| !t.is_ws());
    if has_inline_body {
        let mut toks = toks;
        let mut at = colon + 1;
        if let Some(first) = tokens::next_non_ws(&toks, at) {
            if toks[first].is_punct('{') {
                if let Some(close) = (first..toks.len()).find(|&j| toks[j].is_punct('}')) {
                    at = close + 1;
                }
            }
        }
        toks.insert(at, Tok::quoted(token));
        toks.insert(at, Tok::Ws(" ".into()));
        rule.lines[cl].set_content(tokens::render(&toks));
        return true;
    }
    let mut at = cl + 1;
    if rule
        .lines
        .get(at)
        .is_some_and(|l| is_action_only_line(l.content()))
    {
        at += 1;
    }
    let indent: String = rule
        .lines
        .get(at)
        .or_else(|| rule.lines.get(cl + 1))
        .map(|l| {
            l.content()
                .chars()
                .take_while(|c| c.is_whitespace())
                .collect()
        })
        .filter(|s: &String| !s.is_empty())
        .unwrap_or_else(|| "\t".to_string());
    rule.lines
        .insert(at, crate::model::LineEntry::new(format!("{indent}'{token}'")));
    true
}

/// Insert a quoted token right before the rule-terminating `;`.
pub(crate) fn insert_body_end_token(rule: &mut crate::model::GrammarRule, token: &str) -> bool {
    let Some(li) = rule.lines.iter().rposition(|l| {
        let toks = tokens::lex(l.content());
        toks.iter().rev().find(|t| !t.is_ws()).is_some_and(|t| t.is_punct(';'))
    }) else {
        return false;
    };
    let mut toks = tokens::lex(rule.lines[li].content());
    let semi = toks.iter().rposition(|t| t.is_punct(';')).unwrap();
    toks.insert(semi, Tok::Ws(" ".into()));
    toks.insert(semi, Tok::quoted(token));
    if semi > 0 && !toks[semi - 1].is_ws() {
        toks.insert(semi, Tok::Ws(" ".into()));
    }
    rule.lines[li].set_content(tokens::render(&toks));
    true
}

/// A keyword argument: identifier-shaped, quotable.
pub(crate) fn require_keyword(args: &[String], idx: usize) -> Result<&str, RuleError> {
    let arg = &args[idx];
    if !tokens::is_ident(arg) {
        return Err(RuleError::new(format!(
            "'{arg}' is not a keyword (expected an identifier-shaped token)"
        )));
    }
    Ok(arg)
}

/// A symbol argument: punctuation-shaped, quotable.
pub(crate) fn require_symbol(args: &[String], idx: usize) -> Result<&str, RuleError> {
    let arg = &args[idx];
    if arg.is_empty() || tokens::is_ident(arg) || arg.contains('\'') || arg.contains('"') {
        return Err(RuleError::new(format!(
            "'{arg}' is not a symbol (expected an unquotable punctuation token)"
        )));
    }
    Ok(arg)
}

/// An identifier argument (rule or attribute name).
pub(crate) fn require_ident(args: &[String], idx: usize) -> Result<&str, RuleError> {
    let arg = &args[idx];
    if !tokens::is_ident(arg) {
        return Err(RuleError::new(format!("'{arg}' is not a valid identifier")));
    }
    Ok(arg)
}
