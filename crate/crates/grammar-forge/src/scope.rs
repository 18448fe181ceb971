//! Scopes select where an optimization applies: the whole grammar, one rule,
//! or the lines of one attribute, optionally minus a list of exclusions.

use serde::Serialize;

use crate::model::{Grammar, GrammarRule, LineEntry};

/// How wide a scope selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScopeKind {
    Global,
    Rule,
    Attribute,
}

impl ScopeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScopeKind::Global => "global",
            ScopeKind::Rule => "rule",
            ScopeKind::Attribute => "attribute",
        }
    }
}

/// A scope selector. No rule and no attribute means the whole grammar; a
/// rule name narrows to that rule; a rule plus attribute narrows to the
/// lines defining that attribute. Exclusions exempt rules (global scope) or
/// attribute lines (global and rule scope).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ScopeSpec {
    pub rule_name: Option<String>,
    pub attr_name: Option<String>,
    pub exclusions: Vec<String>,
}

impl ScopeSpec {
    pub fn global() -> ScopeSpec {
        ScopeSpec::default()
    }

    pub fn rule(name: impl Into<String>) -> ScopeSpec {
        ScopeSpec { rule_name: Some(name.into()), ..ScopeSpec::default() }
    }

    pub fn attr(rule: impl Into<String>, attr: impl Into<String>) -> ScopeSpec {
        ScopeSpec {
            rule_name: Some(rule.into()),
            attr_name: Some(attr.into()),
            exclusions: Vec::new(),
        }
    }

    pub fn with_exclusions(mut self, exclusions: Vec<String>) -> ScopeSpec {
        self.exclusions = exclusions;
        self
    }

    /// Classify and validate the selector shape.
    pub fn kind(&self) -> Result<ScopeKind, ScopeError> {
        match (&self.rule_name, &self.attr_name) {
            (None, None) => Ok(ScopeKind::Global),
            (Some(_), None) => Ok(ScopeKind::Rule),
            (Some(_), Some(_)) => {
                if self.exclusions.is_empty() {
                    Ok(ScopeKind::Attribute)
                } else {
                    Err(ScopeError::ExclusionsWithAttr)
                }
            }
            (None, Some(_)) => Err(ScopeError::AttrWithoutRule),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScopeError {
    #[error("an attribute selector requires a rule selector")]
    AttrWithoutRule,
    #[error("exclusions cannot be combined with an attribute selector")]
    ExclusionsWithAttr,
    #[error("no rule named '{0}'")]
    RuleNotFound(String),
    #[error("rule '{0}' has no line for attribute '{1}'")]
    AttrNotFound(String, String),
}

/// Indices into `grammar.rules` and each rule's `lines`, in document order.
pub(crate) fn resolve_scope_indices(
    grammar: &Grammar,
    scope: &ScopeSpec,
) -> Result<Vec<(usize, Vec<usize>)>, ScopeError> {
    let kind = scope.kind()?;
    let excluded = |name: &str| scope.exclusions.iter().any(|e| e == name);
    match kind {
        ScopeKind::Global => Ok(grammar
            .rules
            .iter()
            .enumerate()
            .filter(|(_, r)| !excluded(&r.name))
            .map(|(ri, r)| (ri, attr_filtered_lines(r, &excluded)))
            .collect()),
        ScopeKind::Rule => {
            let name = scope.rule_name.as_deref().unwrap();
            let ri = grammar
                .rule_index(name)
                .ok_or_else(|| ScopeError::RuleNotFound(name.to_string()))?;
            Ok(vec![(ri, attr_filtered_lines(&grammar.rules[ri], &excluded))])
        }
        ScopeKind::Attribute => {
            let name = scope.rule_name.as_deref().unwrap();
            let attr = scope.attr_name.as_deref().unwrap();
            let ri = grammar
                .rule_index(name)
                .ok_or_else(|| ScopeError::RuleNotFound(name.to_string()))?;
            let lines: Vec<usize> = grammar.rules[ri]
                .lines
                .iter()
                .enumerate()
                .filter(|(_, l)| l.attr_name() == Some(attr))
                .map(|(li, _)| li)
                .collect();
            if lines.is_empty() {
                return Err(ScopeError::AttrNotFound(name.to_string(), attr.to_string()));
            }
            Ok(vec![(ri, lines)])
        }
    }
}

fn attr_filtered_lines(rule: &GrammarRule, excluded: &dyn Fn(&str) -> bool) -> Vec<usize> {
    rule.lines
        .iter()
        .enumerate()
        .filter(|(_, l)| !l.attr_name().is_some_and(excluded))
        .map(|(li, _)| li)
        .collect()
}

/// Resolve a scope to the rules and lines it selects, preserving document
/// order.
pub fn resolve_scope<'g>(
    grammar: &'g Grammar,
    scope: &ScopeSpec,
) -> Result<Vec<(&'g GrammarRule, Vec<&'g LineEntry>)>, ScopeError> {
    let indices = resolve_scope_indices(grammar, scope)?;
    Ok(indices
        .into_iter()
        .map(|(ri, lis)| {
            let rule = &grammar.rules[ri];
            (rule, lis.into_iter().map(|li| &rule.lines[li]).collect())
        })
        .collect())
}
