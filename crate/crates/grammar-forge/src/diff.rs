//! Structural grammar comparison: per-rule line diffs with the
//! mod/add/del counts used to size an optimization, dangling-call
//! detection, and the token-level imitation check against a reference
//! grammar.
//!
//! The imitation check is a structural proxy. Whether two grammars accept
//! the same language is undecidable in general; everything this module
//! reports is labeled accordingly.

use serde::Serialize;

use crate::lcs::lcs_mask;
use crate::model::{body_tokens, rule_call_names, Grammar, GrammarRule};
use crate::tokens::Tok;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChangeKind {
    Modified,
    Added,
    Deleted,
}

/// One line-level difference inside a matched rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineChange {
    pub kind: ChangeKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub before: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub after: Option<String>,
}

/// Per-rule record of a grammar diff.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleDiff {
    pub rule_name: String,
    pub kind: ChangeKind,
    pub line_changes: Vec<LineChange>,
}

/// A call site whose target rule does not exist.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DanglingCall {
    pub rule_name: String,
    pub called: String,
}

/// Structural difference between two grammars. Line counts cover matched
/// rules only; added and deleted rules are counted whole.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DiffReport {
    pub rules_modified: usize,
    pub rules_added: usize,
    pub rules_deleted: usize,
    pub lines_modified: usize,
    pub lines_added: usize,
    pub lines_deleted: usize,
    pub per_rule: Vec<RuleDiff>,
    pub dangling_calls: Vec<DanglingCall>,
}

impl DiffReport {
    pub fn is_empty(&self) -> bool {
        self.per_rule.is_empty()
    }

    /// Human-readable summary.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "rules: {} modified, {} added, {} deleted\n",
            self.rules_modified, self.rules_added, self.rules_deleted
        ));
        out.push_str(&format!(
            "lines: {} modified, {} added, {} deleted\n",
            self.lines_modified, self.lines_added, self.lines_deleted
        ));
        for rule in &self.per_rule {
            out.push_str(&format!(
                "{} {}\n",
                match rule.kind {
                    ChangeKind::Modified => "~",
                    ChangeKind::Added => "+",
                    ChangeKind::Deleted => "-",
                },
                rule.rule_name
            ));
            for change in &rule.line_changes {
                match (&change.before, &change.after) {
                    (Some(b), Some(a)) => out.push_str(&format!("  ~ {b}  =>  {a}\n")),
                    (Some(b), None) => out.push_str(&format!("  - {b}\n")),
                    (None, Some(a)) => out.push_str(&format!("  + {a}\n")),
                    (None, None) => {}
                }
            }
        }
        for d in &self.dangling_calls {
            out.push_str(&format!("! {} calls missing rule {}\n", d.rule_name, d.called));
        }
        out
    }

    /// Machine-readable form: one JSON record per changed rule.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for rule in &self.per_rule {
            out.push_str(&serde_json::to_string(rule).expect("report serializes"));
            out.push('\n');
        }
        out
    }
}

/// Lines of a rule as serialized, whitespace-normalized for comparison.
fn normalized_lines(rule: &GrammarRule) -> Vec<String> {
    rule.visible_lines()
        .map(|l| {
            l.content()
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

/// Diff two grammars, matching rules by name.
pub fn diff_grammars(before: &Grammar, after: &Grammar) -> DiffReport {
    diff_grammars_with_renames(before, after, &[])
}

/// Diff two grammars, treating each `(old, new)` pair as the same rule so
/// engine-reported renames do not show up as delete-plus-add.
pub fn diff_grammars_with_renames(
    before: &Grammar,
    after: &Grammar,
    renames: &[(String, String)],
) -> DiffReport {
    let renamed_to = |old: &str| -> Option<&str> {
        renames.iter().find(|(o, _)| o == old).map(|(_, n)| n.as_str())
    };
    let mut report = DiffReport::default();
    let mut matched_after: Vec<&str> = Vec::new();

    for rule in &before.rules {
        let counterpart = after
            .rule(&rule.name)
            .or_else(|| renamed_to(&rule.name).and_then(|n| after.rule(n)));
        match counterpart {
            Some(other) => {
                matched_after.push(&other.name);
                let changes = diff_lines(&normalized_lines(rule), &normalized_lines(other));
                if !changes.is_empty() {
                    for c in &changes {
                        match c.kind {
                            ChangeKind::Modified => report.lines_modified += 1,
                            ChangeKind::Added => report.lines_added += 1,
                            ChangeKind::Deleted => report.lines_deleted += 1,
                        }
                    }
                    report.rules_modified += 1;
                    report.per_rule.push(RuleDiff {
                        rule_name: other.name.clone(),
                        kind: ChangeKind::Modified,
                        line_changes: changes,
                    });
                }
            }
            None => {
                report.rules_deleted += 1;
                report.per_rule.push(RuleDiff {
                    rule_name: rule.name.clone(),
                    kind: ChangeKind::Deleted,
                    line_changes: Vec::new(),
                });
            }
        }
    }
    for rule in &after.rules {
        if before.rule(&rule.name).is_none() && !matched_after.contains(&rule.name.as_str()) {
            report.rules_added += 1;
            report.per_rule.push(RuleDiff {
                rule_name: rule.name.clone(),
                kind: ChangeKind::Added,
                line_changes: Vec::new(),
            });
        }
    }
    let names: Vec<&str> = after.rules.iter().map(|r| r.name.as_str()).collect();
    for rule in &after.rules {
        for called in rule_call_names(rule) {
            if !names.contains(&called.as_str()) {
                report.dangling_calls.push(DanglingCall {
                    rule_name: rule.name.clone(),
                    called,
                });
            }
        }
    }
    report.dangling_calls.dedup();
    report
}

/// LCS line diff. Inside each gap, deletions pair positionally with
/// additions as modifications; leftovers stay pure deletions or additions.
fn diff_lines(before: &[String], after: &[String]) -> Vec<LineChange> {
    let (in_a, in_b) = lcs_mask(before, after);
    let mut changes = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    loop {
        // Collect one gap on each side.
        let mut dels = Vec::new();
        while i < before.len() && !in_a[i] {
            dels.push(before[i].clone());
            i += 1;
        }
        let mut adds = Vec::new();
        while j < after.len() && !in_b[j] {
            adds.push(after[j].clone());
            j += 1;
        }
        let paired = dels.len().min(adds.len());
        for k in 0..paired {
            changes.push(LineChange {
                kind: ChangeKind::Modified,
                before: Some(dels[k].clone()),
                after: Some(adds[k].clone()),
            });
        }
        for d in dels.into_iter().skip(paired) {
            changes.push(LineChange { kind: ChangeKind::Deleted, before: Some(d), after: None });
        }
        for a in adds.into_iter().skip(paired) {
            changes.push(LineChange { kind: ChangeKind::Added, before: None, after: Some(a) });
        }
        if i >= before.len() && j >= after.len() {
            break;
        }
        // Skip the common run.
        while i < before.len() && in_a[i] {
            i += 1;
        }
        while j < after.len() && in_b[j] {
            j += 1;
        }
    }
    changes
}

/// How one reference rule was matched.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleMatch {
    pub reference_rule: String,
    pub matched_by: Vec<String>,
}

/// Token-level imitation result: which reference rules some optimized rule
/// (or set of rules) covers, and which are left over. A structural proxy,
/// not a language-equality proof.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ImitationReport {
    pub matched_rules: Vec<RuleMatch>,
    pub unmatched_reference_rules: Vec<String>,
}

impl ImitationReport {
    pub fn igr_count(&self) -> usize {
        self.matched_rules.len()
    }

    pub fn nigr_count(&self) -> usize {
        self.unmatched_reference_rules.len()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from(
            "imitation check (structural proxy; token-level, not language equality)\n",
        );
        out.push_str(&format!(
            "matched: {}  unmatched: {}\n",
            self.igr_count(),
            self.nigr_count()
        ));
        for m in &self.matched_rules {
            out.push_str(&format!(
                "= {} <= {{{}}}\n",
                m.reference_rule,
                m.matched_by.join(", ")
            ));
        }
        for u in &self.unmatched_reference_rules {
            out.push_str(&format!("? {u} not imitated\n"));
        }
        out
    }
}

/// Body tokens normalized for imitation comparison: whitespace dropped,
/// semantic actions dropped, cross-references reduced to their target, the
/// rule terminator dropped, and quotes canonicalized.
fn imitation_tokens(rule: &GrammarRule) -> Vec<String> {
    let mut out = Vec::new();
    let mut action_depth = 0usize;
    for line in body_tokens(rule) {
        let mut i = 0;
        while i < line.len() {
            match &line[i] {
                Tok::Ws(_) => {}
                Tok::Punct('{') => action_depth += 1,
                Tok::Punct('}') => action_depth = action_depth.saturating_sub(1),
                Tok::Punct('[') if action_depth == 0 => {
                    // `[T|payload]` and `[T]` both reduce to `T`.
                    let close = (i + 1..line.len()).find(|&k| line[k].is_punct(']'));
                    if let Some(close) = close {
                        if let Some(Tok::Word(target)) =
                            line[i + 1..close].iter().find(|t| !t.is_ws())
                        {
                            out.push(target.clone());
                        }
                        i = close + 1;
                        continue;
                    }
                    out.push("[".to_string());
                }
                tok if action_depth == 0 => match tok {
                    Tok::Quoted { body, .. } => out.push(format!("'{body}'")),
                    Tok::Word(w) => out.push(w.clone()),
                    Tok::Punct(p) => out.push(p.to_string()),
                    Tok::Ws(_) => {}
                },
                _ => {}
            }
            i += 1;
        }
    }
    while out.last().is_some_and(|t| t == ";") {
        out.pop();
    }
    out
}

fn normalize_rule_name(name: &str) -> String {
    name.chars()
        .filter(|c| *c != '_')
        .flat_map(char::to_lowercase)
        .collect()
}

/// Expand top-level alternations (bare `A | B` bodies and unquantified
/// `( .. | .. )` groups) into the full set of alternative token sequences.
/// Expansion is capped; a body beyond the cap stays unexpanded.
fn expand_alternatives(seq: &[String]) -> Vec<Vec<String>> {
    const CAP: usize = 64;
    // Bare top-level alternation.
    let mut parts: Vec<Vec<String>> = Vec::new();
    let mut depth = 0usize;
    let mut current: Vec<String> = Vec::new();
    for tok in seq {
        match tok.as_str() {
            "(" => {
                depth += 1;
                current.push(tok.clone());
            }
            ")" => {
                depth = depth.saturating_sub(1);
                current.push(tok.clone());
            }
            "|" if depth == 0 => parts.push(std::mem::take(&mut current)),
            _ => current.push(tok.clone()),
        }
    }
    parts.push(current);
    if parts.len() > 1 {
        let mut out = Vec::new();
        for part in parts {
            out.extend(expand_alternatives(&part));
            if out.len() > CAP {
                return vec![seq.to_vec()];
            }
        }
        return out;
    }

    // First unquantified group holding a top-level alternation.
    let mut i = 0;
    while i < seq.len() {
        if seq[i] == "(" {
            let mut depth = 1usize;
            let mut close = None;
            for (k, tok) in seq.iter().enumerate().skip(i + 1) {
                match tok.as_str() {
                    "(" => depth += 1,
                    ")" => {
                        depth -= 1;
                        if depth == 0 {
                            close = Some(k);
                            break;
                        }
                    }
                    _ => {}
                }
            }
            let Some(close) = close else { break };
            let quantified = seq
                .get(close + 1)
                .is_some_and(|t| matches!(t.as_str(), "?" | "*" | "+"));
            let inner = &seq[i + 1..close];
            let has_alternation = {
                let mut d = 0usize;
                inner.iter().any(|t| {
                    match t.as_str() {
                        "(" => d += 1,
                        ")" => d = d.saturating_sub(1),
                        "|" if d == 0 => return true,
                        _ => {}
                    }
                    false
                })
            };
            if !quantified && has_alternation {
                let mut alternatives = Vec::new();
                let mut d = 0usize;
                let mut cur: Vec<String> = Vec::new();
                for t in inner {
                    match t.as_str() {
                        "(" => {
                            d += 1;
                            cur.push(t.clone());
                        }
                        ")" => {
                            d = d.saturating_sub(1);
                            cur.push(t.clone());
                        }
                        "|" if d == 0 => alternatives.push(std::mem::take(&mut cur)),
                        _ => cur.push(t.clone()),
                    }
                }
                alternatives.push(cur);
                let mut out = Vec::new();
                for alt in alternatives {
                    let mut expanded: Vec<String> = seq[..i].to_vec();
                    expanded.extend(alt);
                    expanded.extend(seq[close + 1..].iter().cloned());
                    out.extend(expand_alternatives(&expanded));
                    if out.len() > CAP {
                        return vec![seq.to_vec()];
                    }
                }
                return out;
            }
            i = close;
        }
        i += 1;
    }
    vec![seq.to_vec()]
}

/// Check which reference rules the optimized grammar imitates, token-wise.
///
/// A reference rule matches when a single optimized rule has the same
/// normalized body, or when a set of optimized rules sharing the reference
/// rule's name prefix covers all of its top-level alternatives.
pub fn match_against_reference(reference: &Grammar, optimized: &Grammar) -> ImitationReport {
    let optimized_bodies: Vec<(String, Vec<String>)> = optimized
        .rules
        .iter()
        .map(|r| (r.name.clone(), imitation_tokens(r)))
        .collect();
    let mut report = ImitationReport::default();
    for rule in &reference.rules {
        let body = imitation_tokens(rule);
        if let Some((name, _)) = optimized_bodies.iter().find(|(_, b)| *b == body) {
            report.matched_rules.push(RuleMatch {
                reference_rule: rule.name.clone(),
                matched_by: vec![name.clone()],
            });
            continue;
        }
        let prefix = normalize_rule_name(&rule.name);
        let candidates: Vec<&(String, Vec<String>)> = optimized_bodies
            .iter()
            .filter(|(name, _)| normalize_rule_name(name).starts_with(&prefix))
            .collect();
        let alternatives = expand_alternatives(&body);
        if alternatives.len() > 1 && !candidates.is_empty() {
            let mut matched_by: Vec<String> = Vec::new();
            let all_covered = alternatives.iter().all(|alt| {
                match candidates.iter().find(|(_, b)| b == alt) {
                    Some((name, _)) => {
                        if !matched_by.contains(name) {
                            matched_by.push(name.clone());
                        }
                        true
                    }
                    None => false,
                }
            });
            if all_covered {
                report.matched_rules.push(RuleMatch {
                    reference_rule: rule.name.clone(),
                    matched_by,
                });
                continue;
            }
        }
        report.unmatched_reference_rules.push(rule.name.clone());
    }
    report
}
