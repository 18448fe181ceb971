//! Structural rules: whole-rule and whole-line operations, imports, symbol
//! insertion, call-site rewiring and the optional-keyword permutation.

use super::{
    keyword::add_token_to_rule, require_ident, require_symbol, rewrite_scoped_lines, select,
    Arity, Catalog, CatalogEntry, ChangeStats, RuleError, ScopeKinds, Selection, Subject,
};
use crate::model::{Grammar, ImportDecl};
use crate::scope::ScopeSpec;
use crate::tokens::{self, Tok};

pub(super) fn register(catalog: &mut Catalog) {
    catalog
        .register(
            CatalogEntry::new(
                "removeAttribute",
                Subject::Attribute,
                ScopeKinds::ATTRIBUTE,
                Arity::none(),
            ),
            Box::new(remove_attribute),
        )
        .unwrap();
    catalog
        .register(
            CatalogEntry::new("removeRule", Subject::Rule, ScopeKinds::RULE, Arity::none()),
            Box::new(remove_rule),
        )
        .unwrap();
    catalog
        .register(
            CatalogEntry::new(
                "renameRule",
                Subject::Rule,
                ScopeKinds::RULE,
                Arity::exactly(1, "<new-name>"),
            ),
            Box::new(rename_rule),
        )
        .unwrap();
    catalog
        .register(
            CatalogEntry::new(
                "addSymbolToRule",
                Subject::Symbol,
                ScopeKinds::RULE,
                Arity::exactly(2, "<symbol> <start|end>"),
            ),
            Box::new(add_symbol_to_rule),
        )
        .unwrap();
    catalog
        .register(
            CatalogEntry::new(
                "addImport",
                Subject::Import,
                ScopeKinds::GLOBAL,
                Arity::range(1, 2, "<uri> [alias]"),
            ),
            Box::new(add_import),
        )
        .unwrap();
    catalog
        .register(
            CatalogEntry::new(
                "removeImport",
                Subject::Import,
                ScopeKinds::GLOBAL,
                Arity::exactly(1, "<uri>"),
            ),
            Box::new(remove_import),
        )
        .unwrap();
    catalog
        .register(
            CatalogEntry::new(
                "changeCalledRule",
                Subject::RuleCall,
                ScopeKinds::GLOBAL_OR_RULE,
                Arity::exactly(2, "<attr> <new-rule>"),
            ),
            Box::new(change_called_rule),
        )
        .unwrap();
    catalog
        .register(
            CatalogEntry::new(
                "permuteOptionalKeywordAttrs",
                Subject::Attribute,
                ScopeKinds::RULE,
                Arity::exactly(2, "<attrA> <attrB>"),
            ),
            Box::new(permute_optional_keyword_attrs),
        )
        .unwrap();
}

/// Delete the lines defining the attribute. The rule header prefix and the
/// terminating `;` survive when the line carries them.
fn remove_attribute(g: &mut Grammar, scope: &ScopeSpec, _args: &[String]) -> Result<ChangeStats, RuleError> {
    let selection = match select(g, scope)? {
        Selection::Found(s) => s,
        Selection::NoMatch(note) => return Ok(ChangeStats::no_match(note)),
    };
    let mut stats = ChangeStats::default();
    for (ri, line_indices) in selection {
        let rule = &mut g.rules[ri];
        for li in line_indices.into_iter().rev() {
            let toks = tokens::lex(rule.lines[li].content());
            let prefix = tokens::decl_colon_index(&toks)
                .map(|c| tokens::render(&toks[..=c]));
            let terminator = toks
                .iter()
                .rev()
                .find(|t| !t.is_ws())
                .is_some_and(|t| t.is_punct(';'));
            match (prefix, terminator) {
                (None, false) => {
                    rule.lines.remove(li);
                }
                (Some(p), false) => rule.lines[li].set_content(p),
                (None, true) => {
                    let indent: String = rule.lines[li]
                        .content()
                        .chars()
                        .take_while(|c| c.is_whitespace())
                        .collect();
                    rule.lines[li].set_content(format!("{indent};"));
                }
                (Some(p), true) => rule.lines[li].set_content(format!("{p} ;")),
            }
            stats.lines_touched += 1;
        }
        stats.rules_touched += 1;
    }
    Ok(stats)
}

/// Delete the rule. Call sites elsewhere stay as they are; the differ
/// reports them as dangling.
fn remove_rule(g: &mut Grammar, scope: &ScopeSpec, _args: &[String]) -> Result<ChangeStats, RuleError> {
    let selection = match select(g, scope)? {
        Selection::Found(s) => s,
        Selection::NoMatch(note) => return Ok(ChangeStats::no_match(note)),
    };
    let mut removed_lines = 0usize;
    let mut removed_rules = 0usize;
    for (ri, _) in selection.into_iter().rev() {
        removed_lines += g.rules[ri].lines.len();
        g.rules.remove(ri);
        removed_rules += 1;
    }
    Ok(ChangeStats::changed(removed_rules, removed_lines))
}

/// Rename the rule and rewrite every call site: assignment right-hand
/// sides, cross-reference targets and bare invocations. `returns` clauses
/// name metaclasses, not rules, and are left alone.
fn rename_rule(g: &mut Grammar, scope: &ScopeSpec, args: &[String]) -> Result<ChangeStats, RuleError> {
    let new = require_ident(args, 0)?.to_string();
    let selection = match select(g, scope)? {
        Selection::Found(s) => s,
        Selection::NoMatch(note) => return Ok(ChangeStats::no_match(note)),
    };
    let [(ri, _)] = selection.as_slice() else {
        return Err(RuleError::new("renameRule needs exactly one rule in scope"));
    };
    let old = g.rules[*ri].name.clone();
    if new == old {
        return Ok(ChangeStats::no_match("rule already has that name"));
    }
    if g.rule_index(&new).is_some() {
        return Err(RuleError::new(format!(
            "cannot rename '{old}' to '{new}': a rule with that name exists"
        )));
    }
    let mut stats = ChangeStats::default();
    for rule in &mut g.rules {
        let mut touched = false;
        for line in &mut rule.lines {
            let before = line.content().to_string();
            let mut toks = tokens::lex(&before);
            rename_word_call_sites(&mut toks, &old, &new);
            let after = tokens::render(&toks);
            if after != before {
                line.set_content(after);
                stats.lines_touched += 1;
                touched = true;
            }
        }
        if touched {
            stats.rules_touched += 1;
        }
    }
    g.rules[*ri].name = new;
    Ok(stats)
}

/// Replace `Word(old)` tokens that act as rule references. Skipped: words
/// inside semantic actions, assignment left-hand sides, and words following
/// `returns`.
fn rename_word_call_sites(toks: &mut [Tok], old: &str, new: &str) {
    let lhs_positions: Vec<usize> =
        tokens::find_assignments(toks).iter().map(|a| a.lhs).collect();
    let mut action_depth = 0usize;
    let mut prev_word: Option<String> = None;
    for (i, tok) in toks.iter_mut().enumerate() {
        match tok {
            Tok::Punct('{') => action_depth += 1,
            Tok::Punct('}') => action_depth = action_depth.saturating_sub(1),
            Tok::Word(w) => {
                let current = w.clone();
                let is_call = action_depth == 0
                    && current == old
                    && !lhs_positions.contains(&i)
                    && prev_word.as_deref() != Some("returns");
                if is_call {
                    *tok = Tok::Word(new.to_string());
                }
                prev_word = Some(current);
            }
            _ => {}
        }
    }
}

/// Insert a quoted symbol at the start or end of the rule body.
fn add_symbol_to_rule(g: &mut Grammar, scope: &ScopeSpec, args: &[String]) -> Result<ChangeStats, RuleError> {
    let symbol = require_symbol(args, 0)?.to_string();
    add_token_to_rule(g, scope, &symbol, &args[1])
}

fn add_import(g: &mut Grammar, _scope: &ScopeSpec, args: &[String]) -> Result<ChangeStats, RuleError> {
    let uri = args[0].clone();
    if uri.is_empty() {
        return Err(RuleError::new("import URI must not be empty"));
    }
    let alias = args.get(1).cloned();
    if let Some(alias) = &alias {
        require_ident(std::slice::from_ref(alias), 0)?;
    }
    if g.imports.iter().any(|i| i.uri == uri) {
        return Ok(ChangeStats::no_match(format!("'{uri}' is already imported")));
    }
    g.imports.push(ImportDecl { uri, alias });
    Ok(ChangeStats::changed(0, 1))
}

fn remove_import(g: &mut Grammar, _scope: &ScopeSpec, args: &[String]) -> Result<ChangeStats, RuleError> {
    let uri = &args[0];
    let before = g.imports.len();
    g.imports.retain(|i| &i.uri != uri);
    let removed = before - g.imports.len();
    if removed == 0 {
        return Ok(ChangeStats::no_match(format!("no import of '{uri}'")));
    }
    Ok(ChangeStats::changed(0, removed))
}

/// Point the attribute's assignment at a different rule. Works on plain
/// rule calls and on cross-reference targets.
fn change_called_rule(g: &mut Grammar, scope: &ScopeSpec, args: &[String]) -> Result<ChangeStats, RuleError> {
    let attr = require_ident(args, 0)?.to_string();
    let new = require_ident(args, 1)?.to_string();
    let error: std::cell::RefCell<Option<RuleError>> = std::cell::RefCell::new(None);
    let stats = rewrite_scoped_lines(g, scope, |toks| {
        if error.borrow().is_some() {
            return;
        }
        // Every occurrence of the assignment on the line is rewritten.
        for assign in tokens::find_assignments(toks) {
            if assign.name(toks) != attr {
                continue;
            }
            let Some(rhs) = assign.rhs else { continue };
            match &toks[rhs] {
                Tok::Word(_) => toks[rhs] = Tok::Word(new.clone()),
                Tok::Punct('[') => {
                    if let Some(t) = tokens::next_non_ws(toks, rhs + 1) {
                        if toks[t].word().is_some() {
                            toks[t] = Tok::Word(new.clone());
                        }
                    }
                }
                _ => {
                    *error.borrow_mut() = Some(RuleError::new(format!(
                        "attribute '{attr}' does not call a rule"
                    )));
                    return;
                }
            }
        }
    })?;
    match error.into_inner() {
        Some(e) => Err(e),
        None => {
            if stats.is_no_match() {
                Ok(ChangeStats::no_match(format!("no call through attribute '{attr}' in scope")))
            } else {
                Ok(stats)
            }
        }
    }
}

/// Rewrite two adjacent optional boolean-keyword lines
/// `(a?='ka')? (b?='kb')?` into the two-order alternation
/// `a?='ka' b?='kb'? | b?='kb' a?='ka'?`.
fn permute_optional_keyword_attrs(g: &mut Grammar, scope: &ScopeSpec, args: &[String]) -> Result<ChangeStats, RuleError> {
    let attr_a = require_ident(args, 0)?.to_string();
    let attr_b = require_ident(args, 1)?.to_string();
    if attr_a == attr_b {
        return Err(RuleError::new("the two attributes must differ"));
    }
    let selection = match select(g, scope)? {
        Selection::Found(s) => s,
        Selection::NoMatch(note) => return Ok(ChangeStats::no_match(note)),
    };
    let [(ri, _)] = selection.as_slice() else {
        return Err(RuleError::new("permuteOptionalKeywordAttrs needs one rule in scope"));
    };
    let rule = &mut g.rules[*ri];
    let la = rule.lines.iter().position(|l| l.attr_name() == Some(attr_a.as_str()));
    let lb = rule.lines.iter().position(|l| l.attr_name() == Some(attr_b.as_str()));
    let (Some(la), Some(lb)) = (la, lb) else {
        return Ok(ChangeStats::no_match(format!(
            "rule '{}' does not define both '{attr_a}' and '{attr_b}'",
            rule.name
        )));
    };
    if lb != la + 1 {
        return Err(RuleError::new(format!(
            "'{attr_a}' and '{attr_b}' are not adjacent lines in rule '{}'",
            rule.name
        )));
    }
    let ka = optional_boolean_keyword(rule.lines[la].content(), &attr_a)?;
    let kb = optional_boolean_keyword(rule.lines[lb].content(), &attr_b)?;
    let indent_a: String =
        rule.lines[la].content().chars().take_while(|c| c.is_whitespace()).collect();
    let indent_b: String =
        rule.lines[lb].content().chars().take_while(|c| c.is_whitespace()).collect();
    rule.lines[la].set_content(format!(
        "{indent_a}{attr_a}?='{ka}' {attr_b}?='{kb}'? |"
    ));
    rule.lines[lb].set_content(format!(
        "{indent_b}{attr_b}?='{kb}' {attr_a}?='{ka}'?"
    ));
    Ok(ChangeStats::changed(1, 2))
}

/// Extract `k` from a line of the exact shape `(attr?='k')?`.
fn optional_boolean_keyword(content: &str, attr: &str) -> Result<String, RuleError> {
    let toks = tokens::lex(content);
    let non_ws: Vec<&Tok> = toks.iter().filter(|t| !t.is_ws()).collect();
    if let [Tok::Punct('('), Tok::Word(name), Tok::Punct('?'), Tok::Punct('='), Tok::Quoted { body, .. }, Tok::Punct(')'), Tok::Punct('?')] =
        non_ws.as_slice()
    {
        if name == attr {
            return Ok(body.clone());
        }
    }
    Err(RuleError::new(format!(
        "line for '{attr}' is not an optional boolean keyword assignment: {:?}",
        content.trim()
    )))
}
