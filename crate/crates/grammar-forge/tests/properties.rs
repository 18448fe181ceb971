//! Property tests: serialization fidelity, config round-trips, and
//! reparseability of whatever the engine produces.

mod common;

use grammar_forge::tokens::{lex, render};
use grammar_forge::{
    apply_all, diff_grammars, Catalog, ConfigFile, Grammar, OutcomeStatus, RuleApplication,
    ScopeSpec,
};
use proptest::prelude::*;

fn ident() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,6}"
}

fn keyword() -> impl Strategy<Value = String> {
    "[a-z]{1,8}"
}

/// One body line of a synthetic generated-style rule.
fn body_line(attr: String, callee: String, kw: String, shape: u8) -> String {
    match shape {
        0 => format!("        ('{kw}' {attr}={callee})?"),
        1 => format!("        {attr}={callee}"),
        2 => format!("        ('{kw}' '{{' {attr}+={callee} ( \",\" {attr}+={callee})* '}}' )?"),
        3 => format!("        ({attr}?='{kw}')?"),
        4 => format!("        ('{kw}' {attr}=[{callee}|EString])?"),
        5 => format!("        '{kw}'"),
        _ => format!("        ({attr}+={callee})*"),
    }
}

prop_compose! {
    fn rule_text(index: usize)(
        lines in prop::collection::vec((ident(), ident(), keyword(), 0u8..7), 0..5),
        with_action in any::<bool>(),
    ) -> String {
        let name = format!("Rule{index}");
        let mut out = vec![format!("{name} returns {name}:")];
        if with_action || lines.is_empty() {
            out.push(format!("        {{{name}}}"));
        }
        for (i, (attr, callee_raw, kw, shape)) in lines.into_iter().enumerate() {
            let callee = {
                let mut c = callee_raw.chars();
                let first = c.next().unwrap().to_ascii_uppercase();
                format!("{first}{}", c.as_str())
            };
            out.push(body_line(format!("{attr}{i}"), callee, kw, shape));
        }
        out.push("        ;".to_string());
        out.join("\n")
    }
}

fn grammar_text() -> impl Strategy<Value = String> {
    (1usize..6).prop_flat_map(|n| {
        let rules: Vec<_> = (0..n).map(rule_text).collect();
        (rules, any::<bool>()).prop_map(|(rules, with_header)| {
            let mut blocks = Vec::new();
            if with_header {
                blocks.push("grammar org.example.p.P with org.eclipse.xtext.common.Terminals".to_string());
                blocks.push("import \"http://www.eclipse.org/emf/2002/Ecore\" as ecore".to_string());
            }
            blocks.extend(rules);
            blocks.join("\n\n") + "\n"
        })
    })
}

proptest! {
    #[test]
    fn line_lexing_is_lossless(line in "[ -~\t]{0,60}") {
        prop_assert_eq!(render(&lex(&line)), line);
    }

    #[test]
    fn canonical_grammars_roundtrip(text in grammar_text()) {
        let grammar = Grammar::parse(&text).unwrap();
        prop_assert_eq!(grammar.to_text(), text);
        // Order preservation: names come out in source order.
        let names: Vec<_> = grammar.rules.iter().map(|r| r.name.clone()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        prop_assert_eq!(names.len(), sorted.len());
    }

    #[test]
    fn random_valid_applications_preserve_parseability(
        text in grammar_text(),
        picks in prop::collection::vec((0usize..12, 0usize..6, 0usize..6, 0usize..4), 0..12),
    ) {
        let grammar = Grammar::parse(&text).unwrap();
        let catalog = Catalog::builtin();
        let apps: Vec<RuleApplication> = picks
            .into_iter()
            .map(|(key, ri, ai, arg)| synth_application(&grammar, key, ri, ai, arg))
            .collect();
        let (out, report) = apply_all(&grammar, &apps, &catalog, false).unwrap();
        let reparsed = Grammar::parse(&out.to_text());
        prop_assert!(reparsed.is_ok(), "output no longer parses: {:?}\n{}", reparsed.err(), out.to_text());
        // Inert runs leave the grammar untouched. The converse only holds
        // per application: a later application can undo an earlier one
        // (add a keyword, then sweep keywords), so a sequence of applied
        // outcomes may still diff to zero overall.
        let all_inert = report.outcomes.iter().all(|o| o.status != OutcomeStatus::Applied);
        let diff = diff_grammars(&grammar, &out);
        if all_inert {
            prop_assert!(diff.per_rule.is_empty(), "no-match run must not change the grammar");
        }
    }

    #[test]
    fn single_applied_application_always_shows_in_the_diff(
        text in grammar_text(),
        pick in (0usize..12, 0usize..6, 0usize..6, 0usize..4),
    ) {
        let grammar = Grammar::parse(&text).unwrap();
        let catalog = Catalog::builtin();
        let app = synth_application(&grammar, pick.0, pick.1, pick.2, pick.3);
        let (out, report) = apply_all(&grammar, std::slice::from_ref(&app), &catalog, false).unwrap();
        let diff = diff_grammars(&grammar, &out);
        if report.outcomes[0].status == OutcomeStatus::Applied {
            prop_assert!(!diff.per_rule.is_empty(), "applied outcome with empty diff: {app:?}");
        } else {
            prop_assert!(diff.per_rule.is_empty(), "inert outcome changed the grammar: {app:?}");
        }
    }

    #[test]
    fn config_serialization_is_lossless(
        entries in prop::collection::vec(
            (0usize..5, ident(), ident(), "[a-zA-Z0-9 _\"\\\\#=.:-]{0,10}"),
            0..10,
        ),
    ) {
        let catalog = Catalog::builtin();
        let applications: Vec<RuleApplication> = entries
            .into_iter()
            .map(|(kind, rule, attr, free)| match kind {
                0 => RuleApplication::new("removeBraces", ScopeSpec::global(), vec![]),
                1 => RuleApplication::new("removeKeyword", ScopeSpec::rule(rule), vec![free]),
                2 => RuleApplication::new(
                    "renameKeyword",
                    ScopeSpec::global().with_exclusions(vec![attr]),
                    vec![rule, free],
                ),
                3 => RuleApplication::new("addSquareBracketsToAttr", ScopeSpec::attr(rule, attr), vec![]),
                _ => RuleApplication::new("changeMultiplicity", ScopeSpec::attr(rule, attr), vec![free]),
            })
            .collect();
        let config = ConfigFile { applications, source_path: "prop.gro".into(), line_map: vec![] };
        let text = config.to_text();
        let reparsed = ConfigFile::parse(&text, "prop.gro", &catalog).unwrap();
        prop_assert_eq!(reparsed.applications, config.applications);
    }
}

/// Map random indices onto a concrete, catalog-valid application against
/// the given grammar. Names mostly hit real rules and attributes; the
/// leftovers exercise the no-match path.
fn synth_application(
    grammar: &Grammar,
    key: usize,
    ri: usize,
    ai: usize,
    arg: usize,
) -> RuleApplication {
    let rule_name = grammar
        .rules
        .get(ri % grammar.rules.len().max(1))
        .map(|r| r.name.clone())
        .unwrap_or_else(|| "Ghost".to_string());
    let attr_name = grammar
        .rule(&rule_name)
        .and_then(|r| {
            let attrs: Vec<&str> = r.lines.iter().filter_map(|l| l.attr_name()).collect();
            attrs.get(ai % attrs.len().max(1)).map(|s| s.to_string())
        })
        .unwrap_or_else(|| "ghost".to_string());
    let rule_scope = ScopeSpec::rule(rule_name.clone());
    let attr_scope = ScopeSpec::attr(rule_name.clone(), attr_name);
    match key {
        0 => RuleApplication::new("removeBraces", ScopeSpec::global(), vec![]),
        1 => RuleApplication::new("removeKeyword", rule_scope, vec![]),
        2 => RuleApplication::new("removeOptionality", rule_scope, vec![]),
        3 => RuleApplication::new("renameKeyword", ScopeSpec::global(), vec!["a".into(), "b".into()]),
        4 => RuleApplication::new("changeBracesToSquare", rule_scope, vec![]),
        5 => RuleApplication::new("convert1toStarToStar", rule_scope, vec![]),
        6 => RuleApplication::new(
            "changeMultiplicity",
            attr_scope,
            vec![["optional", "exactly-one", "star", "plus"][arg].to_string()],
        ),
        7 => RuleApplication::new("removeAttribute", attr_scope, vec![]),
        8 => RuleApplication::new("removeRule", rule_scope, vec![]),
        9 => RuleApplication::new("renameRule", rule_scope, vec![format!("Renamed{arg}")]),
        10 => RuleApplication::new("addOptionalityToAttr", attr_scope, vec![]),
        _ => RuleApplication::new(
            "addKeywordToRule",
            rule_scope,
            vec!["kw".into(), ["start", "end"][arg % 2].to_string()],
        ),
    }
}
