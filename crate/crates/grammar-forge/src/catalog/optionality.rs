//! Optionality rules: stripping `?` markers (unwrapping their groups),
//! wrapping attributes or keywords in `( ... )?`, and making a whole rule
//! body optional. The boolean-assignment operator `?=` is never touched.

use super::{
    require_keyword, rewrite_scoped_lines, select, Arity, Catalog, CatalogEntry, ChangeStats,
    RuleError, ScopeKinds, Selection, Subject,
};
use crate::model::Grammar;
use crate::scope::ScopeSpec;
use crate::tokens::{self, Tok};

pub(super) fn register(catalog: &mut Catalog) {
    catalog
        .register(
            CatalogEntry::new(
                "removeOptionality",
                Subject::Optionality,
                ScopeKinds::CONFIGURABLE,
                Arity::none(),
            ),
            Box::new(remove_optionality),
        )
        .unwrap();
    catalog
        .register(
            CatalogEntry::new(
                "addOptionalityToAttr",
                Subject::Optionality,
                ScopeKinds::ATTRIBUTE,
                Arity::none(),
            ),
            Box::new(add_optionality_to_attr),
        )
        .unwrap();
    catalog
        .register(
            CatalogEntry::new(
                "addOptionalityToKeyword",
                Subject::Optionality,
                ScopeKinds::CONFIGURABLE,
                Arity::exactly(1, "<keyword>"),
            ),
            Box::new(add_optionality_to_keyword),
        )
        .unwrap();
    catalog
        .register(
            CatalogEntry::new(
                "makeBodyOptional",
                Subject::Optionality,
                ScopeKinds::RULE,
                Arity::none(),
            ),
            Box::new(make_body_optional),
        )
        .unwrap();
}

/// Drop every optionality marker in scope. A `?` after a group unwraps the
/// group; a `?` after an assignment or keyword is simply removed.
fn remove_optionality(g: &mut Grammar, scope: &ScopeSpec, _args: &[String]) -> Result<ChangeStats, RuleError> {
    rewrite_scoped_lines(g, scope, |toks| loop {
        let candidate = toks.iter().enumerate().rposition(|(i, t)| {
            t.is_punct('?') && !toks.get(i + 1).is_some_and(|n| n.is_punct('='))
        });
        let Some(q) = candidate else { break };
        match tokens::prev_non_ws(toks, q) {
            Some(close) if toks[close].is_punct(')') => {
                toks.remove(q);
                match tokens::matching_open_paren(toks, close) {
                    Some(open) => {
                        toks.remove(close);
                        toks.remove(open);
                    }
                    None => {
                        toks.remove(close);
                    }
                }
            }
            _ => {
                toks.remove(q);
            }
        }
    })
}

/// Wrap the attribute assignment as `( ... )?` unless it is already
/// optional (trailing `?` or a `( ... )?` / `( ... )*` group).
fn add_optionality_to_attr(g: &mut Grammar, scope: &ScopeSpec, _args: &[String]) -> Result<ChangeStats, RuleError> {
    let attr = scope.attr_name.clone().unwrap_or_default();
    rewrite_scoped_lines(g, scope, |toks| {
        let Some(assign) = tokens::find_assignments(toks)
            .into_iter()
            .find(|a| a.name(toks) == attr)
        else {
            return;
        };
        let Some(rhs_end) = assign.rhs_end else { return };
        // Already `a=B?`.
        if tokens::next_non_ws(toks, rhs_end + 1).is_some_and(|n| toks[n].is_punct('?')) {
            return;
        }
        // Already inside `( ... )?` or `( ... )*`.
        if let Some(prev) = tokens::prev_non_ws(toks, assign.lhs) {
            if toks[prev].is_punct('(') {
                if let Some(close) = tokens::matching_close_paren(toks, prev) {
                    if close > rhs_end
                        && tokens::next_non_ws(toks, close + 1)
                            .is_some_and(|n| toks[n].is_punct('?') || toks[n].is_punct('*'))
                    {
                        return;
                    }
                }
            }
        }
        toks.insert(rhs_end + 1, Tok::Punct('?'));
        toks.insert(rhs_end + 1, Tok::Punct(')'));
        toks.insert(assign.lhs, Tok::Punct('('));
    })
}

/// Wrap each quoted occurrence of the keyword as `('k')?` unless already
/// optional.
fn add_optionality_to_keyword(g: &mut Grammar, scope: &ScopeSpec, args: &[String]) -> Result<ChangeStats, RuleError> {
    let keyword = require_keyword(args, 0)?.to_string();
    rewrite_scoped_lines(g, scope, |toks| {
        let hits: Vec<usize> = toks
            .iter()
            .enumerate()
            .filter(|(_, t)| t.quoted_body() == Some(keyword.as_str()))
            .map(|(i, _)| i)
            .collect();
        for i in hits.into_iter().rev() {
            if tokens::next_non_ws(toks, i + 1).is_some_and(|n| toks[n].is_punct('?')) {
                continue;
            }
            let wrapped = tokens::prev_non_ws(toks, i).is_some_and(|p| toks[p].is_punct('('))
                && tokens::next_non_ws(toks, i + 1).is_some_and(|n| toks[n].is_punct(')'))
                && {
                    let close = tokens::next_non_ws(toks, i + 1).unwrap();
                    tokens::next_non_ws(toks, close + 1).is_some_and(|q| toks[q].is_punct('?'))
                };
            if wrapped {
                continue;
            }
            toks.insert(i + 1, Tok::Punct('?'));
            toks.insert(i + 1, Tok::Punct(')'));
            toks.insert(i, Tok::Punct('('));
        }
    })
}

/// Wrap the container braces and everything between them as one optional
/// group. Requires every attribute line inside to be optional already.
fn make_body_optional(g: &mut Grammar, scope: &ScopeSpec, _args: &[String]) -> Result<ChangeStats, RuleError> {
    let selection = match select(g, scope)? {
        Selection::Found(s) => s,
        Selection::NoMatch(note) => return Ok(ChangeStats::no_match(note)),
    };
    let mut stats = ChangeStats::default();
    for (ri, _) in selection {
        let rule = &mut g.rules[ri];
        let open = rule.lines.iter().position(|l| {
            let non_ws: Vec<Tok> = tokens::lex(l.content())
                .into_iter()
                .filter(|t| !t.is_ws())
                .collect();
            matches!(non_ws.as_slice(), [Tok::Quoted { body, .. }] if body == "{")
        });
        let close = rule.lines.iter().rposition(|l| {
            let non_ws: Vec<Tok> = tokens::lex(l.content())
                .into_iter()
                .filter(|t| !t.is_ws())
                .collect();
            match non_ws.as_slice() {
                [Tok::Quoted { body, .. }] if body == "}" => true,
                [Tok::Quoted { body, .. }, Tok::Punct(';')] if body == "}" => true,
                _ => false,
            }
        });
        let (Some(open), Some(close)) = (open, close) else { continue };
        if close <= open {
            continue;
        }
        for li in open + 1..close {
            let line = &rule.lines[li];
            if line.attr_name().is_none() {
                continue;
            }
            let toks = tokens::lex(line.content());
            let optional = toks
                .iter()
                .rev()
                .find(|t| !t.is_ws())
                .is_some_and(|t| t.is_punct('?') || t.is_punct('*'));
            if !optional {
                return Err(RuleError::new(format!(
                    "attribute '{}' in rule '{}' is mandatory; the body cannot be made optional",
                    line.attr_name().unwrap_or("?"),
                    rule.name
                )));
            }
        }
        let opening = rule.lines[open].content().to_string();
        let indent: String = opening.chars().take_while(|c| c.is_whitespace()).collect();
        rule.lines[open].set_content(format!("{indent}( {}", opening.trim_start()));
        let mut toks = tokens::lex(rule.lines[close].content());
        let brace = toks
            .iter()
            .rposition(|t| t.quoted_body() == Some("}"))
            .unwrap();
        toks.insert(brace + 1, Tok::Punct('?'));
        toks.insert(brace + 1, Tok::Punct(')'));
        toks.insert(brace + 1, Tok::Ws(" ".into()));
        rule.lines[close].set_content(tokens::render(&toks));
        stats.rules_touched += 1;
        stats.lines_touched += 2;
    }
    if stats.is_no_match() {
        stats.note = Some("no container braces found in scope".to_string());
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(g: &Grammar, rule: &str, idx: usize) -> String {
        g.rule(rule).unwrap().lines[idx].content().to_string()
    }

    #[test]
    fn optional_groups_are_unwrapped() {
        let mut g = Grammar::parse("A:\n\t( node=NodeId)?\n\t(a+=B ( \",\" a+=B)* )?\n\t;").unwrap();
        let stats = remove_optionality(&mut g, &ScopeSpec::rule("A"), &[]).unwrap();
        assert_eq!(stats.lines_touched, 2);
        assert_eq!(line(&g, "A", 1).trim(), "node=NodeId");
        assert_eq!(line(&g, "A", 2).trim(), "a+=B ( \",\" a+=B)*");
    }

    #[test]
    fn boolean_assignments_keep_their_operator() {
        let mut g = Grammar::parse("A:\n\t(unordered?='unordered')?\n\t;").unwrap();
        remove_optionality(&mut g, &ScopeSpec::rule("A"), &[]).unwrap();
        assert_eq!(line(&g, "A", 1).trim(), "unordered?='unordered'");
    }

    #[test]
    fn quoted_question_marks_survive() {
        let mut g = Grammar::parse("A:\n\tx='?' (y=B)?\n\t;").unwrap();
        remove_optionality(&mut g, &ScopeSpec::rule("A"), &[]).unwrap();
        assert_eq!(line(&g, "A", 1).trim(), "x='?' y=B");
    }

    #[test]
    fn nested_optional_groups_all_unwrap() {
        let mut g = Grammar::parse("A:\n\t((a=B)? c=D)?\n\t;").unwrap();
        remove_optionality(&mut g, &ScopeSpec::rule("A"), &[]).unwrap();
        assert_eq!(line(&g, "A", 1).trim(), "a=B c=D");
    }

    #[test]
    fn add_optionality_wraps_once() {
        let mut g = Grammar::parse("A:\n\tnode=NodeId\n\t;").unwrap();
        let scope = ScopeSpec::attr("A", "node");
        add_optionality_to_attr(&mut g, &scope, &[]).unwrap();
        assert_eq!(line(&g, "A", 1).trim(), "(node=NodeId)?");
        let stats = add_optionality_to_attr(&mut g, &scope, &[]).unwrap();
        assert!(stats.is_no_match());
        assert_eq!(line(&g, "A", 1).trim(), "(node=NodeId)?");
    }

    #[test]
    fn add_optionality_to_keyword_wraps_every_occurrence() {
        let mut g = Grammar::parse("A: 'sep' x=B 'sep' y=C;\n\nB: 'sep';").unwrap();
        add_optionality_to_keyword(&mut g, &ScopeSpec::global(), &["sep".into()]).unwrap();
        assert_eq!(line(&g, "A", 0), "A: ('sep')? x=B ('sep')? y=C;");
        assert_eq!(line(&g, "B", 0), "B: ('sep')?;");
    }

    #[test]
    fn make_body_optional_wraps_the_braces() {
        let mut g = Grammar::parse(
            "EAPackage:\n\t'EAPackage' name=EString\n\t'{'\n\t\t(a=X)?\n\t\t(b+=Y)*\n\t'}';",
        )
        .unwrap();
        make_body_optional(&mut g, &ScopeSpec::rule("EAPackage"), &[]).unwrap();
        assert_eq!(line(&g, "EAPackage", 2), "\t( '{'");
        assert_eq!(line(&g, "EAPackage", 5), "\t'}' )?;");
        // Still parses.
        Grammar::parse(&g.to_text()).unwrap();
    }

    #[test]
    fn make_body_optional_rejects_mandatory_attrs() {
        let mut g = Grammar::parse("P:\n\t'{'\n\t\ta=X\n\t'}';").unwrap();
        let err = make_body_optional(&mut g, &ScopeSpec::rule("P"), &[]).unwrap_err();
        assert!(err.to_string().contains("mandatory"));
    }

    #[test]
    fn make_body_optional_without_braces_is_no_match() {
        let mut g = Grammar::parse("P:\n\ta=X\n\t;").unwrap();
        let stats = make_body_optional(&mut g, &ScopeSpec::rule("P"), &[]).unwrap();
        assert!(stats.is_no_match());
    }
}
