//! Brace rules: removal, substitution between bracket families, and
//! wrapping attributes in square brackets.
//!
//! Only quoted brace tokens are touched; unquoted braces delimit semantic
//! actions and stay as they are.

use super::{
    rewrite_scoped_lines, Arity, Catalog, CatalogEntry, ChangeStats, RuleError, ScopeKinds,
    Subject,
};
use crate::model::Grammar;
use crate::scope::ScopeSpec;
use crate::tokens::{self, Tok};

const OPENERS: [&str; 4] = ["{", "(", "[", "<"];
const CLOSERS: [&str; 4] = ["}", ")", "]", ">"];

pub(super) fn register(catalog: &mut Catalog) {
    catalog
        .register(
            CatalogEntry::new("removeBraces", Subject::Brace, ScopeKinds::CONFIGURABLE, Arity::none()),
            Box::new(remove_braces),
        )
        .unwrap();
    for (key, open, close) in [
        ("changeBracesToParentheses", "(", ")"),
        ("changeBracesToSquare", "[", "]"),
        ("changeBracesToAngle", "<", ">"),
    ] {
        catalog
            .register(
                CatalogEntry::new(key, Subject::Brace, ScopeKinds::CONFIGURABLE, Arity::none()),
                Box::new(move |g: &mut Grammar, scope: &ScopeSpec, _: &[String]| {
                    change_braces(g, scope, open, close)
                }),
            )
            .unwrap();
    }
    catalog
        .register(
            CatalogEntry::new(
                "addSquareBracketsToAttr",
                Subject::Brace,
                ScopeKinds::ATTRIBUTE,
                Arity::none(),
            ),
            Box::new(add_square_brackets_to_attr),
        )
        .unwrap();
}

/// Delete every quoted `'{'` and `'}'` token in scope.
fn remove_braces(g: &mut Grammar, scope: &ScopeSpec, _args: &[String]) -> Result<ChangeStats, RuleError> {
    rewrite_scoped_lines(g, scope, |toks| {
        toks.retain(|t| !matches!(t.quoted_body(), Some("{") | Some("}")));
    })
}

/// Substitute the braces in scope with the target bracket family. All four
/// families count as braces here, which is what makes successive
/// substitutions last-write-wins.
fn change_braces(
    g: &mut Grammar,
    scope: &ScopeSpec,
    open: &str,
    close: &str,
) -> Result<ChangeStats, RuleError> {
    rewrite_scoped_lines(g, scope, |toks| {
        for tok in toks.iter_mut() {
            if let Tok::Quoted { body, .. } = tok {
                if OPENERS.contains(&body.as_str()) {
                    *body = open.to_string();
                } else if CLOSERS.contains(&body.as_str()) {
                    *body = close.to_string();
                }
            }
        }
    })
}

/// Wrap the attribute assignment in quoted `'['` and `']'` tokens. Applying
/// this twice nests the brackets.
fn add_square_brackets_to_attr(
    g: &mut Grammar,
    scope: &ScopeSpec,
    _args: &[String],
) -> Result<ChangeStats, RuleError> {
    let attr = scope.attr_name.clone().unwrap_or_default();
    rewrite_scoped_lines(g, scope, |toks| {
        let Some(assign) = tokens::find_assignments(toks)
            .into_iter()
            .find(|a| a.name(toks) == attr)
        else {
            return;
        };
        let Some(rhs_end) = assign.rhs_end else { return };
        let (mut start, mut end) = (assign.lhs, rhs_end);
        // Take an enclosing `( ... )` with optional quantifier along.
        if let Some(prev) = tokens::prev_non_ws(toks, start) {
            if toks[prev].is_punct('(') {
                if let Some(close) = tokens::matching_close_paren(toks, prev) {
                    if close > end {
                        start = prev;
                        end = close;
                        if let Some(next) = tokens::next_non_ws(toks, close + 1) {
                            if matches!(&toks[next], Tok::Punct('?') | Tok::Punct('*') | Tok::Punct('+')) {
                                end = next;
                            }
                        }
                    }
                }
            }
        }
        toks.insert(end + 1, Tok::quoted("]"));
        toks.insert(end + 1, Tok::Ws(" ".into()));
        toks.insert(start, Tok::Ws(" ".into()));
        toks.insert(start, Tok::quoted("["));
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(g: &Grammar, rule: &str, idx: usize) -> String {
        g.rule(rule).unwrap().lines[idx].content().to_string()
    }

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

    #[test]
    fn remove_braces_deletes_quoted_curlies_only() {
        let mut g = node_stmt();
        let stats = remove_braces(&mut g, &ScopeSpec::rule("NodeStmt"), &[]).unwrap();
        assert_eq!(stats.lines_touched, 3);
        let text = g.to_text();
        assert!(!text.contains("'{'") && !text.contains("'}'"));
        assert!(text.contains("{NodeStmt}"), "semantic action must survive");
    }

    #[test]
    fn remove_braces_is_idempotent() {
        let mut once = node_stmt();
        remove_braces(&mut once, &ScopeSpec::global(), &[]).unwrap();
        let mut twice = once.clone();
        let stats = remove_braces(&mut twice, &ScopeSpec::global(), &[]).unwrap();
        assert!(stats.is_no_match());
        assert_eq!(once.to_text(), twice.to_text());
    }

    #[test]
    fn substitution_converts_any_bracket_family() {
        let mut g = node_stmt();
        change_braces(&mut g, &ScopeSpec::rule("NodeStmt"), "<", ">").unwrap();
        assert!(g.to_text().contains("'<'"));
        change_braces(&mut g, &ScopeSpec::rule("NodeStmt"), "[", "]").unwrap();
        let text = g.to_text();
        assert!(text.contains("'['") && text.contains("']'"));
        assert!(!text.contains("'<'"));
    }

    #[test]
    fn square_brackets_wrap_the_assignment() {
        let mut g = Grammar::parse(
            "TypeDef:\n\ttypedef_condition=ExpressionGO\n\t;",
        )
        .unwrap();
        let scope = ScopeSpec::attr("TypeDef", "typedef_condition");
        add_square_brackets_to_attr(&mut g, &scope, &[]).unwrap();
        assert_eq!(
            line(&g, "TypeDef", 1),
            "\t'[' typedef_condition=ExpressionGO ']'"
        );
        // Second application nests.
        add_square_brackets_to_attr(&mut g, &scope, &[]).unwrap();
        assert_eq!(
            line(&g, "TypeDef", 1),
            "\t'[' '[' typedef_condition=ExpressionGO ']' ']'"
        );
    }

    #[test]
    fn square_brackets_take_the_optional_group_along() {
        let mut g = Grammar::parse("TypeDef:\n\t(cond=ExpressionGO)?\n\t;").unwrap();
        add_square_brackets_to_attr(&mut g, &ScopeSpec::attr("TypeDef", "cond"), &[]).unwrap();
        assert_eq!(line(&g, "TypeDef", 1), "\t'[' (cond=ExpressionGO)? ']'");
    }
}
