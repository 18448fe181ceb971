//! Keyword rules. A quoted token is a keyword when its body is shaped like
//! an identifier; quoted punctuation is a symbol and is never touched by the
//! keyword sweeps.

use super::{
    colon_line_index, insert_body_end_token, insert_body_start_token, require_keyword,
    rewrite_scoped_lines, select, Arity, Catalog, CatalogEntry, ChangeStats, RuleError,
    ScopeKinds, Selection, Subject,
};
use crate::model::Grammar;
use crate::scope::ScopeSpec;
use crate::tokens::{self, Tok};

pub(super) fn register(catalog: &mut Catalog) {
    catalog
        .register(
            CatalogEntry::new(
                "removeKeyword",
                Subject::Keyword,
                ScopeKinds::CONFIGURABLE,
                Arity::range(0, 1, "[keyword]"),
            ),
            Box::new(remove_keyword),
        )
        .unwrap();
    catalog
        .register(
            CatalogEntry::new(
                "renameKeyword",
                Subject::Keyword,
                ScopeKinds::CONFIGURABLE,
                Arity::exactly(2, "<old> <new>"),
            ),
            Box::new(rename_keyword),
        )
        .unwrap();
    catalog
        .register(
            CatalogEntry::new(
                "addKeywordToRule",
                Subject::Keyword,
                ScopeKinds::RULE,
                Arity::exactly(2, "<keyword> <start|end>"),
            ),
            Box::new(add_keyword_to_rule),
        )
        .unwrap();
    catalog
        .register(
            CatalogEntry::new(
                "addKeywordToAttr",
                Subject::Keyword,
                ScopeKinds::ATTRIBUTE,
                Arity::exactly(2, "<keyword> <before|after>"),
            ),
            Box::new(add_keyword_to_attr),
        )
        .unwrap();
    catalog
        .register(
            CatalogEntry::new(
                "addKeywordToLine",
                Subject::Line,
                ScopeKinds::RULE,
                Arity::exactly(2, "<keyword> <body-line-number>"),
            ),
            Box::new(add_keyword_to_line),
        )
        .unwrap();
    catalog
        .register(
            CatalogEntry::new(
                "addAlternativeKeyword",
                Subject::Keyword,
                ScopeKinds::RULE,
                Arity::exactly(2, "<keyword> <alternative>"),
            ),
            Box::new(add_alternative_keyword),
        )
        .unwrap();
}

/// Without an argument, delete every keyword-shaped quoted token in scope;
/// with one, delete only quoted occurrences of that keyword. A quoted token
/// standing as the right-hand side of an assignment stays: deleting it
/// would orphan the operator.
fn remove_keyword(g: &mut Grammar, scope: &ScopeSpec, args: &[String]) -> Result<ChangeStats, RuleError> {
    let target = match args.first() {
        Some(_) => Some(require_keyword(args, 0)?.to_string()),
        None => None,
    };
    rewrite_scoped_lines(g, scope, |toks| {
        let protected: Vec<usize> = tokens::find_assignments(toks)
            .iter()
            .filter_map(|a| a.rhs.filter(|&r| matches!(toks[r], Tok::Quoted { .. })))
            .collect();
        let doomed: Vec<bool> = toks
            .iter()
            .enumerate()
            .map(|(i, t)| match t.quoted_body() {
                Some(body) if !protected.contains(&i) => match &target {
                    Some(kw) => body == kw,
                    None => tokens::is_ident(body),
                },
                _ => false,
            })
            .collect();
        let mut is_doomed = doomed.into_iter();
        toks.retain(|_| !is_doomed.next().unwrap());
    })
}

fn rename_keyword(g: &mut Grammar, scope: &ScopeSpec, args: &[String]) -> Result<ChangeStats, RuleError> {
    let old = require_keyword(args, 0)?.to_string();
    let new = require_keyword(args, 1)?.to_string();
    rewrite_scoped_lines(g, scope, |toks| {
        for tok in toks.iter_mut() {
            if let Tok::Quoted { body, .. } = tok {
                if *body == old {
                    *body = new.clone();
                }
            }
        }
    })
}

/// Insert the keyword at the start of the rule body (after the semantic
/// action) or right before the terminating `;`.
fn add_keyword_to_rule(g: &mut Grammar, scope: &ScopeSpec, args: &[String]) -> Result<ChangeStats, RuleError> {
    let keyword = require_keyword(args, 0)?.to_string();
    add_token_to_rule(g, scope, &keyword, &args[1])
}

pub(super) fn add_token_to_rule(
    g: &mut Grammar,
    scope: &ScopeSpec,
    token: &str,
    position: &str,
) -> Result<ChangeStats, RuleError> {
    let at_start = match position {
        "start" => true,
        "end" => false,
        other => {
            return Err(RuleError::new(format!(
                "position must be 'start' or 'end', got '{other}'"
            )))
        }
    };
    let selection = match select(g, scope)? {
        Selection::Found(s) => s,
        Selection::NoMatch(note) => return Ok(ChangeStats::no_match(note)),
    };
    let mut stats = ChangeStats::default();
    for (ri, _) in selection {
        let rule = &mut g.rules[ri];
        let inserted = if at_start {
            insert_body_start_token(rule, token)
        } else {
            insert_body_end_token(rule, token)
        };
        if inserted {
            stats.rules_touched += 1;
            stats.lines_touched += 1;
        }
    }
    if stats.is_no_match() {
        stats.note = Some("no rule body to insert into".to_string());
    }
    Ok(stats)
}

/// Insert the keyword adjacent to the attribute assignment.
fn add_keyword_to_attr(g: &mut Grammar, scope: &ScopeSpec, args: &[String]) -> Result<ChangeStats, RuleError> {
    let keyword = require_keyword(args, 0)?.to_string();
    let before = match args[1].as_str() {
        "before" => true,
        "after" => false,
        other => {
            return Err(RuleError::new(format!(
                "position must be 'before' or 'after', got '{other}'"
            )))
        }
    };
    let attr = scope.attr_name.clone().unwrap_or_default();
    rewrite_scoped_lines(g, scope, |toks| {
        let Some(assign) = tokens::find_assignments(toks)
            .into_iter()
            .find(|a| a.name(toks) == attr)
        else {
            return;
        };
        if before {
            toks.insert(assign.lhs, Tok::Ws(" ".into()));
            toks.insert(assign.lhs, Tok::quoted(&keyword));
        } else if let Some(end) = assign.rhs_end {
            toks.insert(end + 1, Tok::quoted(&keyword));
            toks.insert(end + 1, Tok::Ws(" ".into()));
        }
    })
}

/// Prepend the keyword to the n-th body line (1-based, counted after the
/// line holding the declaration colon).
fn add_keyword_to_line(g: &mut Grammar, scope: &ScopeSpec, args: &[String]) -> Result<ChangeStats, RuleError> {
    let keyword = require_keyword(args, 0)?.to_string();
    let index: usize = args[1]
        .parse()
        .map_err(|_| RuleError::new(format!("'{}' is not a line number", args[1])))?;
    if index == 0 {
        return Err(RuleError::new("line numbers start at 1"));
    }
    let selection = match select(g, scope)? {
        Selection::Found(s) => s,
        Selection::NoMatch(note) => return Ok(ChangeStats::no_match(note)),
    };
    let mut stats = ChangeStats::default();
    for (ri, _) in selection {
        let rule = &mut g.rules[ri];
        let Some(cl) = colon_line_index(rule) else { continue };
        let li = cl + index;
        if li >= rule.lines.len() {
            continue;
        }
        let mut toks = tokens::lex(rule.lines[li].content());
        let at = if toks.first().is_some_and(Tok::is_ws) { 1 } else { 0 };
        toks.insert(at, Tok::Ws(" ".into()));
        toks.insert(at, Tok::quoted(&keyword));
        rule.lines[li].set_content(tokens::render(&toks));
        stats.rules_touched += 1;
        stats.lines_touched += 1;
    }
    if stats.is_no_match() {
        stats.note = Some(format!("no body line {index} in scope"));
    }
    Ok(stats)
}

/// Turn `'k'` into `('k' | 'alt')`; when `'k'` already sits in an
/// alternation, splice `| 'alt'` in after it instead.
fn add_alternative_keyword(g: &mut Grammar, scope: &ScopeSpec, args: &[String]) -> Result<ChangeStats, RuleError> {
    let existing = require_keyword(args, 0)?.to_string();
    let alternative = require_keyword(args, 1)?.to_string();
    rewrite_scoped_lines(g, scope, |toks| {
        let hits: Vec<usize> = toks
            .iter()
            .enumerate()
            .filter(|(_, t)| t.quoted_body() == Some(existing.as_str()))
            .map(|(i, _)| i)
            .collect();
        for i in hits.into_iter().rev() {
            let in_alternation = tokens::prev_non_ws(toks, i)
                .is_some_and(|p| toks[p].is_punct('|'))
                || tokens::next_non_ws(toks, i + 1).is_some_and(|n| toks[n].is_punct('|'));
            let mut splice: Vec<Tok> = Vec::new();
            if !in_alternation {
                splice.push(Tok::Punct('('));
            }
            splice.push(Tok::quoted(&existing));
            splice.push(Tok::Ws(" ".into()));
            splice.push(Tok::Punct('|'));
            splice.push(Tok::Ws(" ".into()));
            splice.push(Tok::quoted(&alternative));
            if !in_alternation {
                splice.push(Tok::Punct(')'));
            }
            toks.splice(i..=i, splice);
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node_stmt() -> Grammar {
        Grammar::parse(
            "\
NodeStmt returns NodeStmt:
    {NodeStmt}
    'NodeStmt'
    '{'
        ('node' node=NodeId)?
        ('attrLists' '{' attrLists+=AttrList ( \",\" attrLists+=AttrList)* '}' )?
    '}';",
        )
        .unwrap()
    }

    fn line(g: &Grammar, rule: &str, idx: usize) -> String {
        g.rule(rule).unwrap().lines[idx].content().to_string()
    }

    #[test]
    fn bare_remove_keyword_strips_identifier_shaped_tokens_only() {
        let mut g = node_stmt();
        remove_keyword(&mut g, &ScopeSpec::rule("NodeStmt"), &[]).unwrap();
        let text = g.to_text();
        for gone in ["'NodeStmt'", "'node'", "'attrLists'"] {
            assert!(!text.contains(gone), "{gone} should be removed");
        }
        assert!(text.contains("\",\""), "symbols stay");
        assert!(text.contains("'{'"), "symbols stay");
    }

    #[test]
    fn targeted_remove_keyword_leaves_the_rest() {
        let mut g = node_stmt();
        remove_keyword(&mut g, &ScopeSpec::rule("NodeStmt"), &["node".into()]).unwrap();
        let text = g.to_text();
        assert!(!text.contains("'node'"));
        assert!(text.contains("'NodeStmt'") && text.contains("'attrLists'"));
    }

    #[test]
    fn remove_keyword_on_symbols_only_is_no_match() {
        let mut g = Grammar::parse("A: x=B ',' y=C;").unwrap();
        let stats = remove_keyword(&mut g, &ScopeSpec::rule("A"), &[]).unwrap();
        assert!(stats.is_no_match());
    }

    #[test]
    fn remove_keyword_keeps_assignment_right_hand_sides() {
        let mut g = Grammar::parse("A:\n\t('strict' strict?='strict')?\n\top='next'\n\t;").unwrap();
        remove_keyword(&mut g, &ScopeSpec::rule("A"), &[]).unwrap();
        let text = g.to_text();
        assert!(text.contains("strict?='strict'"), "boolean literal survives: {text}");
        assert!(text.contains("op='next'"), "plain keyword value survives: {text}");
        assert!(!text.contains("'strict' strict"), "leading keyword removed: {text}");
        // The targeted variant is protected the same way.
        remove_keyword(&mut g, &ScopeSpec::rule("A"), &["next".into()]).unwrap();
        assert!(g.to_text().contains("op='next'"));
    }

    #[test]
    fn rename_keyword_is_scoped() {
        let mut g = Grammar::parse("A: 'graph' x=B;\n\nB: 'graph';").unwrap();
        rename_keyword(&mut g, &ScopeSpec::rule("A"), &["graph".into(), "digraph".into()]).unwrap();
        assert!(line(&g, "A", 0).contains("'digraph'"));
        assert!(line(&g, "B", 0).contains("'graph'"));
    }

    #[test]
    fn rename_keyword_globally_hits_every_rule() {
        let mut g = Grammar::parse("A: 'graph' x=B;\n\nB: 'graph';").unwrap();
        let stats =
            rename_keyword(&mut g, &ScopeSpec::global(), &["graph".into(), "digraph".into()])
                .unwrap();
        assert_eq!(stats.rules_touched, 2);
        assert!(!g.to_text().contains("'graph'"));
    }

    #[test]
    fn rename_missing_keyword_is_no_match() {
        let mut g = node_stmt();
        let stats =
            rename_keyword(&mut g, &ScopeSpec::rule("NodeStmt"), &["nope".into(), "x".into()])
                .unwrap();
        assert!(stats.is_no_match());
    }

    #[test]
    fn add_keyword_to_rule_start_lands_after_the_action() {
        let mut g = node_stmt();
        add_keyword_to_rule(&mut g, &ScopeSpec::rule("NodeStmt"), &["node".into(), "start".into()])
            .unwrap();
        assert_eq!(line(&g, "NodeStmt", 2), "    'node'");
    }

    #[test]
    fn add_keyword_into_empty_body_goes_after_action() {
        let mut g = Grammar::parse("X: {X} ;").unwrap();
        add_keyword_to_rule(&mut g, &ScopeSpec::rule("X"), &["kw".into(), "start".into()]).unwrap();
        assert_eq!(line(&g, "X", 0), "X: {X} 'kw' ;");
    }

    #[test]
    fn add_keyword_to_attr_before_and_after() {
        let mut g = node_stmt();
        add_keyword_to_attr(
            &mut g,
            &ScopeSpec::attr("NodeStmt", "attrLists"),
            &["with".into(), "before".into()],
        )
        .unwrap();
        assert!(line(&g, "NodeStmt", 5).contains("'with' attrLists+=AttrList"));
        let mut g = node_stmt();
        add_keyword_to_attr(
            &mut g,
            &ScopeSpec::attr("NodeStmt", "node"),
            &["named".into(), "after".into()],
        )
        .unwrap();
        assert!(line(&g, "NodeStmt", 4).contains("node=NodeId 'named'"));
    }

    #[test]
    fn add_keyword_to_line_is_one_based_and_bounded() {
        let mut g = node_stmt();
        add_keyword_to_line(&mut g, &ScopeSpec::rule("NodeStmt"), &["kw".into(), "1".into()])
            .unwrap();
        assert_eq!(line(&g, "NodeStmt", 1), "    'kw' {NodeStmt}");
        let stats =
            add_keyword_to_line(&mut g, &ScopeSpec::rule("NodeStmt"), &["kw".into(), "99".into()])
                .unwrap();
        assert!(stats.is_no_match());
    }

    #[test]
    fn alternative_keyword_wraps_then_extends() {
        let mut g = Grammar::parse("A: 'true' x=B;").unwrap();
        add_alternative_keyword(&mut g, &ScopeSpec::rule("A"), &["true".into(), "yes".into()])
            .unwrap();
        assert!(line(&g, "A", 0).contains("('true' | 'yes')"));
        add_alternative_keyword(&mut g, &ScopeSpec::rule("A"), &["true".into(), "si".into()])
            .unwrap();
        assert!(line(&g, "A", 0).contains("('true' | 'si' | 'yes')"));
    }

    #[test]
    fn absent_alternative_target_is_no_match() {
        let mut g = node_stmt();
        let stats = add_alternative_keyword(
            &mut g,
            &ScopeSpec::rule("NodeStmt"),
            &["absent".into(), "alt".into()],
        )
        .unwrap();
        assert!(stats.is_no_match());
    }
}
