//! Multiplicity rules: collapsing separator-repetition into `(a+=X)*` and
//! rewriting an attribute between the four shapes `a=X`, `(a=X)?`,
//! `(a+=X)*`, `(a+=X)+`.

use super::{
    rewrite_scoped_lines, Arity, Catalog, CatalogEntry, ChangeStats, RuleError, ScopeKinds,
    Subject,
};
use crate::model::Grammar;
use crate::scope::ScopeSpec;
use crate::tokens::{self, AssignOp, Tok};

pub(super) fn register(catalog: &mut Catalog) {
    catalog
        .register(
            CatalogEntry::new(
                "convert1toStarToStar",
                Subject::Multiplicity,
                ScopeKinds::RULE_OR_ATTRIBUTE,
                Arity::none(),
            ),
            Box::new(convert_1_to_star_to_star),
        )
        .unwrap();
    catalog
        .register(
            CatalogEntry::new(
                "changeMultiplicity",
                Subject::Multiplicity,
                ScopeKinds::RULE_OR_ATTRIBUTE,
                Arity::exactly(1, "<optional|exactly-one|star|plus>"),
            ),
            Box::new(change_multiplicity),
        )
        .unwrap();
}

/// Collapse `a+=X ( sep a+=X )*` into `(a+=X)*`. The separator may be any
/// sequence of quoted symbol tokens.
fn convert_1_to_star_to_star(g: &mut Grammar, scope: &ScopeSpec, _args: &[String]) -> Result<ChangeStats, RuleError> {
    rewrite_scoped_lines(g, scope, |toks| {
        while let Some((start, end, name, rhs)) = find_one_to_star(toks) {
            let replacement = vec![
                Tok::Punct('('),
                Tok::Word(name),
                Tok::Punct('+'),
                Tok::Punct('='),
                Tok::Word(rhs),
                Tok::Punct(')'),
                Tok::Punct('*'),
            ];
            toks.splice(start..=end, replacement);
        }
    })
}

/// Locate the `a+=X ( sep a+=X )*` pattern; returns the token span, the
/// attribute name and the called rule.
fn find_one_to_star(toks: &[Tok]) -> Option<(usize, usize, String, String)> {
    for first in tokens::find_assignments(toks) {
        if first.op != AssignOp::Append {
            continue;
        }
        let Some(rhs) = first.rhs else { continue };
        let Some(Tok::Word(rhs_name)) = toks.get(rhs) else { continue };
        let Some(open) = tokens::next_non_ws(toks, rhs + 1) else { continue };
        if !toks[open].is_punct('(') {
            continue;
        }
        let Some(close) = tokens::matching_close_paren(toks, open) else { continue };
        let Some(star) = tokens::next_non_ws(toks, close + 1) else { continue };
        if !toks[star].is_punct('*') {
            continue;
        }
        // Between the open paren and the repeated assignment only quoted
        // separators may appear; the repeated assignment must equal the
        // first one.
        let inner = &toks[open + 1..close];
        let inner_assigns = tokens::find_assignments(inner);
        let [second] = inner_assigns.as_slice() else { continue };
        if second.op != AssignOp::Append || second.name(inner) != first.name(toks) {
            continue;
        }
        let Some(second_rhs) = second.rhs else { continue };
        if toks[open + 1 + second_rhs].word() != Some(rhs_name.as_str()) {
            continue;
        }
        let sep_ok = inner[..second.lhs]
            .iter()
            .all(|t| t.is_ws() || matches!(t, Tok::Quoted { .. }));
        let tail_ok = inner[second_rhs + 1..].iter().all(Tok::is_ws);
        if !sep_ok || !tail_ok {
            continue;
        }
        return Some((first.lhs, star, first.name(toks).to_string(), rhs_name.clone()));
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    ExactlyOne,
    Optional,
    Star,
    Plus,
}

impl Shape {
    fn parse(arg: &str) -> Result<Shape, RuleError> {
        match arg {
            "exactly-one" | "one" => Ok(Shape::ExactlyOne),
            "optional" => Ok(Shape::Optional),
            "star" => Ok(Shape::Star),
            "plus" => Ok(Shape::Plus),
            other => Err(RuleError::new(format!(
                "unknown multiplicity '{other}' (expected optional, exactly-one, star or plus)"
            ))),
        }
    }
}

/// Rewrite the attribute line to the target multiplicity shape. Boolean
/// `?=` attributes reject the repeating shapes.
fn change_multiplicity(g: &mut Grammar, scope: &ScopeSpec, args: &[String]) -> Result<ChangeStats, RuleError> {
    let target = Shape::parse(&args[0])?;
    let error: std::cell::RefCell<Option<RuleError>> = std::cell::RefCell::new(None);
    let stats = rewrite_scoped_lines(g, scope, |toks| {
        if error.borrow().is_some() {
            return;
        }
        let assigns = tokens::find_assignments(toks);
        let Some(assign) = assigns.first() else { return };
        let Some(rhs) = assign.rhs else { return };
        let Some(rhs_end) = assign.rhs_end else { return };
        if assign.op == AssignOp::Boolean && matches!(target, Shape::Star | Shape::Plus) {
            *error.borrow_mut() = Some(RuleError::new(format!(
                "boolean attribute '{}' cannot repeat",
                assign.name(toks)
            )));
            return;
        }
        // Current wrapper, if the assignment sits alone in `( ... )x`.
        let mut span = (assign.lhs, rhs_end);
        if let (Some(prev), Some(next)) = (
            tokens::prev_non_ws(toks, assign.lhs),
            tokens::next_non_ws(toks, rhs_end + 1),
        ) {
            if toks[prev].is_punct('(') && toks[next].is_punct(')') {
                if let Some(q) = tokens::next_non_ws(toks, next + 1) {
                    if matches!(toks[q], Tok::Punct('?') | Tok::Punct('*') | Tok::Punct('+')) {
                        span = (prev, q);
                    }
                }
            }
        }
        // Anything else on the line besides indentation, the rule header
        // and a trailing terminator makes the shape ambiguous.
        let before_ok = toks[..span.0].iter().all(Tok::is_ws)
            || tokens::decl_colon_index(toks)
                .is_some_and(|c| c < span.0 && toks[c + 1..span.0].iter().all(Tok::is_ws));
        let after = &toks[span.1 + 1..];
        let after_ok = after
            .iter()
            .all(|t| t.is_ws() || t.is_punct(';'));
        if !before_ok || !after_ok {
            *error.borrow_mut() = Some(RuleError::new(format!(
                "line defining '{}' has content besides the attribute; cannot change multiplicity",
                assign.name(toks)
            )));
            return;
        }
        let name = assign.name(toks).to_string();
        let rhs_toks: Vec<Tok> = toks[rhs..=rhs_end].to_vec();
        let op = match (target, assign.op) {
            (_, AssignOp::Boolean) => AssignOp::Boolean,
            (Shape::ExactlyOne | Shape::Optional, _) => AssignOp::Plain,
            (Shape::Star | Shape::Plus, _) => AssignOp::Append,
        };
        let mut replacement: Vec<Tok> = Vec::new();
        if target != Shape::ExactlyOne {
            replacement.push(Tok::Punct('('));
        }
        replacement.push(Tok::Word(name));
        for c in op.as_str().chars() {
            replacement.push(Tok::Punct(c));
        }
        replacement.extend(rhs_toks);
        match target {
            Shape::ExactlyOne => {}
            Shape::Optional => {
                replacement.push(Tok::Punct(')'));
                replacement.push(Tok::Punct('?'));
            }
            Shape::Star => {
                replacement.push(Tok::Punct(')'));
                replacement.push(Tok::Punct('*'));
            }
            Shape::Plus => {
                replacement.push(Tok::Punct(')'));
                replacement.push(Tok::Punct('+'));
            }
        }
        toks.splice(span.0..=span.1, replacement);
    })?;
    match error.into_inner() {
        Some(e) => Err(e),
        None => Ok(stats),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(g: &Grammar, rule: &str, idx: usize) -> String {
        g.rule(rule).unwrap().lines[idx].content().to_string()
    }

    #[test]
    fn collapses_separator_repetition() {
        let mut g = Grammar::parse(
            "A:\n\tattrLists+=AttrList ( \",\" attrLists+=AttrList)*\n\t;",
        )
        .unwrap();
        convert_1_to_star_to_star(&mut g, &ScopeSpec::attr("A", "attrLists"), &[]).unwrap();
        assert_eq!(line(&g, "A", 1).trim(), "(attrLists+=AttrList)*");
    }

    #[test]
    fn collapse_is_idempotent_and_plain_assignment_no_match() {
        let mut g = Grammar::parse("A:\n\t(a+=X)*\n\tb=Y\n\t;").unwrap();
        let stats = convert_1_to_star_to_star(&mut g, &ScopeSpec::rule("A"), &[]).unwrap();
        assert!(stats.is_no_match());
    }

    #[test]
    fn multiplicity_star_to_plus() {
        let mut g = Grammar::parse("A:\n\t(a+=X)*\n\t;").unwrap();
        change_multiplicity(&mut g, &ScopeSpec::attr("A", "a"), &["plus".into()]).unwrap();
        assert_eq!(line(&g, "A", 1).trim(), "(a+=X)+");
    }

    #[test]
    fn multiplicity_identity_is_no_match() {
        let mut g = Grammar::parse("A:\n\t(a+=X)*\n\t;").unwrap();
        let stats =
            change_multiplicity(&mut g, &ScopeSpec::attr("A", "a"), &["star".into()]).unwrap();
        assert!(stats.is_no_match());
        assert_eq!(line(&g, "A", 1).trim(), "(a+=X)*");
    }

    #[test]
    fn boolean_attributes_reject_repetition() {
        let mut g = Grammar::parse("A:\n\t(unordered?='unordered')?\n\t;").unwrap();
        let err = change_multiplicity(&mut g, &ScopeSpec::attr("A", "unordered"), &["star".into()])
            .unwrap_err();
        assert!(err.to_string().contains("cannot repeat"));
        // And optional keeps the boolean operator.
        change_multiplicity(&mut g, &ScopeSpec::attr("A", "unordered"), &["one".into()]).unwrap();
        assert_eq!(line(&g, "A", 1).trim(), "unordered?='unordered'");
    }

    #[test]
    fn one_liner_rule_keeps_header_and_terminator() {
        let mut g = Grammar::parse("A: a=X;").unwrap();
        change_multiplicity(&mut g, &ScopeSpec::attr("A", "a"), &["optional".into()]).unwrap();
        assert_eq!(line(&g, "A", 0), "A: (a=X)?;");
    }

    #[test]
    fn cross_reference_targets_are_preserved() {
        let mut g = Grammar::parse("A:\n\t(p=[Referrable|EString])?\n\t;").unwrap();
        change_multiplicity(&mut g, &ScopeSpec::attr("A", "p"), &["star".into()]).unwrap();
        assert_eq!(line(&g, "A", 1).trim(), "(p+=[Referrable|EString])*");
    }
}
