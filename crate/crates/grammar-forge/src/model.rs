//! Line-oriented document model for Xtext-style grammars.
//!
//! A [`Grammar`] keeps the header declaration, the import list and the rules
//! in source order. Each rule keeps its physical lines verbatim, one
//! [`LineEntry`] per line, so that serializing an unmodified grammar
//! reproduces the input after newline normalization. Generators emit one
//! attribute per line, which is what makes this representation workable:
//! the line is the unit every optimization targets.

use serde::Serialize;

use crate::tokens::{self, Tok};

/// An `import "uri" as alias` declaration from the grammar prologue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportDecl {
    pub uri: String,
    pub alias: Option<String>,
}

impl ImportDecl {
    fn render(&self) -> String {
        let uri = self.uri.replace('\\', "\\\\").replace('"', "\\\"");
        match &self.alias {
            Some(alias) => format!("import \"{uri}\" as {alias}"),
            None => format!("import \"{uri}\""),
        }
    }
}

/// Resolve backslash escapes inside a quoted token body.
fn unescape(body: &str) -> String {
    let mut out = String::with_capacity(body.len());
    let mut chars = body.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some(next) => out.push(next),
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// One physical line of a rule body, with the attribute it defines, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineEntry {
    content: String,
    attr_name: Option<String>,
}

impl LineEntry {
    pub fn new(content: impl Into<String>) -> LineEntry {
        let content = content.into();
        let attr_name = tokens::leftmost_attr(&content);
        LineEntry { content, attr_name }
    }

    pub fn content(&self) -> &str {
        &self.content
    }

    pub fn attr_name(&self) -> Option<&str> {
        self.attr_name.as_deref()
    }

    /// Replace the line content and recompute the owning attribute.
    pub fn set_content(&mut self, content: impl Into<String>) {
        self.content = content.into();
        self.attr_name = tokens::leftmost_attr(&self.content);
    }

    /// True when nothing but whitespace is left.
    pub fn is_blank(&self) -> bool {
        self.content.trim().is_empty()
    }
}

/// A named grammar rule and its physical lines, header and terminator
/// included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammarRule {
    pub name: String,
    pub returns_clause: Option<String>,
    pub lines: Vec<LineEntry>,
}

impl GrammarRule {
    /// Lines that survive serialization (lines emptied by rule applications
    /// are dropped).
    pub fn visible_lines(&self) -> impl Iterator<Item = &LineEntry> {
        self.lines.iter().filter(|l| !l.is_blank())
    }
}

/// Size counts over a grammar: non-blank lines, parser rules, and call sites
/// between rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GrammarMetrics {
    pub line_count: usize,
    pub rule_count: usize,
    pub call_count: usize,
}

/// Parse failure, with the 1-based source line it was detected on.
#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> ParseError {
        ParseError { line, message: message.into() }
    }
}

/// The grammar document: header text, imports, rules, and any trailing
/// comment block kept opaque.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Grammar {
    pub header_text: String,
    pub imports: Vec<ImportDecl>,
    pub rules: Vec<GrammarRule>,
    pub trailing_text: String,
}

/// Header fields recognized at the start of a rule.
struct HeaderParts {
    name: String,
    returns_clause: Option<String>,
    has_colon: bool,
}

impl Grammar {
    /// Parse grammar text. Newlines are normalized to LF; blank lines inside
    /// rule bodies are dropped.
    pub fn parse(source: &str) -> Result<Grammar, ParseError> {
        let normalized = source.replace("\r\n", "\n").replace('\r', "\n");
        let lines: Vec<&str> = normalized.split('\n').collect();
        let n = lines.len();

        // Prologue: everything before the first import or rule header.
        let mut body_start = n;
        for (i, line) in lines.iter().enumerate() {
            if is_import_line(line) || match_rule_header(line).is_some() {
                body_start = i;
                break;
            }
            if is_split_header(&lines, i) {
                body_start = i;
                break;
            }
        }
        let mut header_lines: Vec<&str> = lines[..body_start].to_vec();
        while header_lines.last().is_some_and(|l| l.trim().is_empty()) {
            header_lines.pop();
        }
        let header_text = header_lines.join("\n");

        let mut grammar = Grammar { header_text, ..Grammar::default() };

        let mut idx = body_start;
        // Import section.
        loop {
            while idx < n && lines[idx].trim().is_empty() {
                idx += 1;
            }
            if idx >= n || !is_import_line(lines[idx]) {
                break;
            }
            grammar.imports.push(parse_import(lines[idx], idx + 1)?);
            idx += 1;
        }

        // Rule section. Comment blocks glue to the rule below them; a final
        // comment block with no rule after it becomes the trailing text.
        let mut pending: Vec<&str> = Vec::new();
        let mut pending_start = 0usize;
        while idx < n {
            let line = lines[idx];
            if line.trim().is_empty() {
                idx += 1;
                continue;
            }
            if is_comment_line(line) {
                if pending.is_empty() {
                    pending_start = idx;
                }
                pending.push(line);
                idx += 1;
                continue;
            }
            let header = match match_rule_header(line) {
                Some(h) => h,
                None => {
                    return Err(ParseError::new(
                        idx + 1,
                        format!("expected a grammar rule header, found {:?}", line.trim()),
                    ))
                }
            };
            let start_line = idx;
            let mut entries: Vec<LineEntry> =
                pending.drain(..).map(LineEntry::new).collect();
            entries.push(LineEntry::new(line));
            let mut terminated = ends_rule(line);
            let mut saw_colon = header.has_colon;
            idx += 1;
            while !terminated {
                if idx >= n {
                    return Err(ParseError::new(
                        start_line + 1,
                        format!("rule '{}' is not terminated by ';'", header.name),
                    ));
                }
                let body = lines[idx];
                idx += 1;
                if body.trim().is_empty() {
                    continue;
                }
                if !saw_colon {
                    // Header split across two lines: the continuation must
                    // open with the declaration colon.
                    if body.trim_start().starts_with(':') {
                        saw_colon = true;
                    } else {
                        return Err(ParseError::new(
                            start_line + 1,
                            format!("malformed rule header for '{}'", header.name),
                        ));
                    }
                }
                entries.push(LineEntry::new(body));
                terminated = ends_rule(body);
            }
            if !saw_colon {
                return Err(ParseError::new(
                    start_line + 1,
                    format!("malformed rule header for '{}'", header.name),
                ));
            }
            if grammar.rules.iter().any(|r| r.name == header.name) {
                return Err(ParseError::new(
                    start_line + 1,
                    format!("duplicate rule name '{}'", header.name),
                ));
            }
            grammar.rules.push(GrammarRule {
                name: header.name,
                returns_clause: header.returns_clause,
                lines: entries,
            });
        }
        if !pending.is_empty() {
            let _ = pending_start;
            grammar.trailing_text = pending.join("\n");
        }
        Ok(grammar)
    }

    /// Serialize back to text: header, imports, rules and trailing block,
    /// separated by single blank lines, ending with one newline. Lines that
    /// rule applications emptied are dropped.
    pub fn to_text(&self) -> String {
        let mut blocks: Vec<String> = Vec::new();
        if !self.header_text.is_empty() {
            blocks.push(self.header_text.clone());
        }
        if !self.imports.is_empty() {
            let block: Vec<String> = self.imports.iter().map(ImportDecl::render).collect();
            blocks.push(block.join("\n"));
        }
        for rule in &self.rules {
            let block: Vec<&str> = rule.visible_lines().map(LineEntry::content).collect();
            if !block.is_empty() {
                blocks.push(block.join("\n"));
            }
        }
        if !self.trailing_text.is_empty() {
            blocks.push(self.trailing_text.clone());
        }
        if blocks.is_empty() {
            return String::new();
        }
        let mut out = blocks.join("\n\n");
        out.push('\n');
        out
    }

    pub fn rule(&self, name: &str) -> Option<&GrammarRule> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn rule_mut(&mut self, name: &str) -> Option<&mut GrammarRule> {
        self.rules.iter_mut().find(|r| r.name == name)
    }

    pub fn rule_index(&self, name: &str) -> Option<usize> {
        self.rules.iter().position(|r| r.name == name)
    }

    /// Line, rule and call-site counts over the serialized form.
    pub fn metrics(&self) -> GrammarMetrics {
        let text = self.to_text();
        let line_count = text.lines().filter(|l| !l.trim().is_empty()).count();
        let call_count = self.rules.iter().map(|r| rule_call_names(r).len()).sum();
        GrammarMetrics { line_count, rule_count: self.rules.len(), call_count }
    }
}

fn is_comment_line(line: &str) -> bool {
    line.trim_start().starts_with("//")
}

fn is_import_line(line: &str) -> bool {
    let t = line.trim_start();
    t.starts_with("import") && t[6..].starts_with(|c: char| c.is_whitespace() || c == '"' || c == '\'')
}

fn parse_import(line: &str, line_no: usize) -> Result<ImportDecl, ParseError> {
    let toks = tokens::lex(line);
    let mut it = toks.iter().filter(|t| !t.is_ws());
    match it.next() {
        Some(Tok::Word(w)) if w == "import" => {}
        _ => return Err(ParseError::new(line_no, "malformed import")),
    }
    let uri = match it.next() {
        Some(Tok::Quoted { body, closed: true, .. }) if !body.is_empty() => unescape(body),
        _ => return Err(ParseError::new(line_no, "import requires a quoted, non-empty URI")),
    };
    let alias = match it.next() {
        None => None,
        Some(Tok::Word(w)) if w == "as" => match it.next() {
            Some(Tok::Word(a)) if tokens::is_ident(a) => Some(a.clone()),
            _ => return Err(ParseError::new(line_no, "import alias must be an identifier")),
        },
        _ => return Err(ParseError::new(line_no, "unexpected tokens after import URI")),
    };
    if it.next().is_some() {
        return Err(ParseError::new(line_no, "unexpected tokens after import"));
    }
    Ok(ImportDecl { uri, alias })
}

/// True when the line ends a rule: last non-whitespace token is a `;`
/// outside of quotes. Comment lines never terminate a rule.
fn ends_rule(line: &str) -> bool {
    if is_comment_line(line) {
        return false;
    }
    let toks = tokens::lex(line);
    toks.iter().rev().find(|t| !t.is_ws()).is_some_and(|t| t.is_punct(';'))
}

const RULE_MODIFIERS: [&str; 3] = ["terminal", "enum", "fragment"];

/// Match `modifiers? Name (returns Qualified.Name)? (hidden(...))? :?` at the
/// start of a line. Returns `None` when the line cannot open a rule.
fn match_rule_header(line: &str) -> Option<HeaderParts> {
    if is_comment_line(line) {
        return None;
    }
    let toks = tokens::lex(line);
    let mut i = tokens::next_non_ws(&toks, 0)?;

    let mut name = match toks[i].word() {
        Some(w) if tokens::is_ident(w) => w.to_string(),
        _ => return None,
    };
    while RULE_MODIFIERS.contains(&name.as_str()) {
        i = tokens::next_non_ws(&toks, i + 1)?;
        name = match toks[i].word() {
            Some(w) if tokens::is_ident(w) => w.to_string(),
            _ => return None,
        };
    }
    // `grammar` and `import` open other kinds of declarations.
    if name == "grammar" || name == "import" {
        return None;
    }
    let mut i = match tokens::next_non_ws(&toks, i + 1) {
        // Name alone on the line: a split header candidate.
        None => {
            return Some(HeaderParts { name, returns_clause: None, has_colon: false })
        }
        Some(i) => i,
    };

    let mut returns_clause = None;
    if toks[i].word() == Some("returns") {
        let mut qualified = String::new();
        i = tokens::next_non_ws(&toks, i + 1)?;
        loop {
            match toks[i].word() {
                Some(w) if tokens::is_ident(w) => qualified.push_str(w),
                _ => return None,
            }
            // Qualified names continue with `::` or `.` glued to words.
            match (toks.get(i + 1), toks.get(i + 2)) {
                (Some(Tok::Punct(':')), Some(Tok::Punct(':'))) => {
                    qualified.push_str("::");
                    i += 3;
                    toks.get(i).and_then(Tok::word)?;
                }
                (Some(Tok::Punct('.')), Some(Tok::Word(_))) => {
                    qualified.push('.');
                    i += 2;
                }
                _ => break,
            }
        }
        returns_clause = Some(qualified);
        i = match tokens::next_non_ws(&toks, i + 1) {
            None => {
                return Some(HeaderParts { name, returns_clause, has_colon: false })
            }
            Some(i) => i,
        };
    }

    if toks[i].word() == Some("hidden") {
        let open = tokens::next_non_ws(&toks, i + 1)?;
        if !toks[open].is_punct('(') {
            return None;
        }
        let close = tokens::matching_close_paren(&toks, open)?;
        i = match tokens::next_non_ws(&toks, close + 1) {
            None => {
                return Some(HeaderParts { name, returns_clause, has_colon: false })
            }
            Some(i) => i,
        };
    }

    if toks[i].is_punct(':') && !toks.get(i + 1).is_some_and(|t| t.is_punct(':')) {
        return Some(HeaderParts { name, returns_clause, has_colon: true });
    }
    None
}

/// A header whose declaration colon sits on the following line.
fn is_split_header(lines: &[&str], i: usize) -> bool {
    match match_rule_header(lines[i]) {
        Some(h) if !h.has_colon => {}
        _ => return false,
    }
    lines[i + 1..]
        .iter()
        .find(|l| !l.trim().is_empty())
        .is_some_and(|l| l.trim_start().starts_with(':'))
}

/// Tokens of a rule body, in order, with the declaration header and colon
/// stripped. One entry per line.
pub(crate) fn body_tokens(rule: &GrammarRule) -> Vec<Vec<Tok>> {
    let mut out = Vec::new();
    let mut seen_colon = false;
    for line in &rule.lines {
        let toks = tokens::lex(line.content());
        if seen_colon {
            out.push(toks);
            continue;
        }
        let Some(colon) = decl_colon_index(&toks) else {
            out.push(Vec::new());
            continue;
        };
        seen_colon = true;
        out.push(toks[colon + 1..].to_vec());
    }
    out
}

use crate::tokens::decl_colon_index;

/// Call sites in one rule, in order: assignment right-hand sides that name
/// a rule, cross-reference targets, and bare rule invocations. Semantic
/// actions `{...}` are excluded.
pub(crate) fn rule_call_names(rule: &GrammarRule) -> Vec<String> {
    let mut calls = Vec::new();
    for toks in body_tokens(rule) {
        let mut consumed = vec![false; toks.len()];
        // Mask semantic actions.
        let mut i = 0;
        while i < toks.len() {
            if toks[i].is_punct('{') {
                let mut depth = 0;
                for (j, c) in consumed.iter_mut().enumerate().skip(i) {
                    match &toks[j] {
                        Tok::Punct('{') => depth += 1,
                        Tok::Punct('}') => {
                            *c = true;
                            depth -= 1;
                            if depth == 0 {
                                i = j;
                                break;
                            }
                            continue;
                        }
                        _ => {}
                    }
                    *c = true;
                }
            }
            i += 1;
        }
        // Cross-references `[Name]` / `[Name|payload]`.
        let mut i = 0;
        while i < toks.len() {
            if toks[i].is_punct('[') && !consumed[i] {
                if let Some(close) = (i + 1..toks.len()).find(|&j| toks[j].is_punct(']')) {
                    let target = tokens::next_non_ws(&toks, i + 1);
                    if let Some(t) = target.filter(|&t| t < close) {
                        if let Some(w) = toks[t].word().filter(|w| tokens::is_ident(w)) {
                            calls.push(w.to_string());
                        }
                    }
                    for c in consumed.iter_mut().take(close + 1).skip(i) {
                        *c = true;
                    }
                    i = close;
                }
            }
            i += 1;
        }
        // Assignments: the left-hand side is an attribute, not a call; a
        // word on the right-hand side is a call.
        for a in tokens::find_assignments(&toks) {
            if consumed[a.lhs] {
                continue;
            }
            consumed[a.lhs] = true;
            if let (Some(r), Some(_)) = (a.rhs, a.rhs_end) {
                if !consumed[r] {
                    if let Some(w) = toks[r].word().filter(|w| tokens::is_ident(w)) {
                        calls.push(w.to_string());
                        consumed[r] = true;
                    }
                }
            }
        }
        // Anything left that is identifier-shaped is a bare invocation.
        for (j, tok) in toks.iter().enumerate() {
            if consumed[j] {
                continue;
            }
            if let Some(w) = tok.word().filter(|w| tokens::is_ident(w)) {
                calls.push(w.to_string());
            }
        }
    }
    calls
}

#[cfg(test)]
mod tests {
    use super::*;

    const LISTING_NODESTMT: &str = "\
NodeStmt returns NodeStmt:
        {NodeStmt}
        'NodeStmt'
        '{'
                ('node' node=NodeId)?
                ('attrLists' '{' attrLists+=AttrList ( \",\" attrLists+=AttrList)* '}' )?
        '}';";

    #[test]
    fn parses_node_stmt_lines_and_attrs() {
        let g = Grammar::parse(LISTING_NODESTMT).unwrap();
        assert_eq!(g.rules.len(), 1);
        let rule = &g.rules[0];
        assert_eq!(rule.name, "NodeStmt");
        assert_eq!(rule.returns_clause.as_deref(), Some("NodeStmt"));
        assert_eq!(rule.lines.len(), 7);
        let attrs: Vec<_> = rule.lines.iter().map(|l| l.attr_name()).collect();
        assert_eq!(
            attrs,
            [None, None, None, None, Some("node"), Some("attrLists"), None]
        );
    }

    #[test]
    fn empty_body_rule_has_no_attrs() {
        let g = Grammar::parse("X: {X} ;").unwrap();
        assert_eq!(g.rules[0].name, "X");
        assert!(g.rules[0].lines.iter().all(|l| l.attr_name().is_none()));
    }

    #[test]
    fn preserves_rule_order() {
        let src = "A: 'a';\n\nB: 'b';\n\nC: 'c';\n";
        let g = Grammar::parse(src).unwrap();
        let names: Vec<_> = g.rules.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["A", "B", "C"]);
        assert_eq!(g.to_text(), src);
    }

    #[test]
    fn roundtrips_full_document() {
        let src = "grammar org.example.dot.Dot with org.eclipse.xtext.common.Terminals\n\nimport \"http://www.eclipse.org/emf/2002/Ecore\" as ecore\n\nNodeStmt returns NodeStmt:\n\t{NodeStmt}\n\t'NodeStmt';\n";
        let g = Grammar::parse(src).unwrap();
        assert_eq!(g.to_text(), src);
        assert_eq!(g.imports.len(), 1);
        assert_eq!(g.imports[0].alias.as_deref(), Some("ecore"));
    }

    #[test]
    fn zero_rule_grammar_is_header_and_imports_only() {
        let src = "grammar org.example.Empty with Terminals\n\nimport \"http://x\" as x\n";
        let g = Grammar::parse(src).unwrap();
        assert!(g.rules.is_empty());
        assert_eq!(g.to_text(), src);
        let m = g.metrics();
        assert_eq!((m.rule_count, m.call_count), (0, 0));
    }

    #[test]
    fn split_header_is_two_lines() {
        let src = "NodeStmt returns NodeStmt\n: 'x';\n";
        let g = Grammar::parse(src).unwrap();
        assert_eq!(g.rules[0].lines.len(), 2);
        assert_eq!(g.to_text(), src);
    }

    #[test]
    fn malformed_header_reports_line() {
        let err = Grammar::parse("A: 'a';\n\n3Bad: 'x';\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.message.contains("expected a grammar rule header"));
    }

    #[test]
    fn unterminated_rule_reports_line() {
        let err = Grammar::parse("A: 'a';\n\nB: 'b'\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.message.contains("not terminated"));
    }

    #[test]
    fn duplicate_rule_names_rejected() {
        let err = Grammar::parse("A: 'a';\nA: 'b';\n").unwrap_err();
        assert!(err.message.contains("duplicate"));
    }

    #[test]
    fn terminal_enum_and_datatype_rules_parse_as_rules() {
        let src = "terminal INT returns ecore::EInt: ('0'..'9')+;\n\nenum Visibility returns Visibility: PUBLIC='public' | PRIVATE='private';\n\nEString returns ecore::EString: STRING | ID;\n";
        let g = Grammar::parse(src).unwrap();
        let names: Vec<_> = g.rules.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["INT", "Visibility", "EString"]);
        assert_eq!(g.rules[0].returns_clause.as_deref(), Some("ecore::EInt"));
        assert_eq!(g.to_text(), src);
    }

    #[test]
    fn trailing_comment_block_is_opaque() {
        let src = "A: 'a';\n\n// kept as-is\n// two lines\n";
        let g = Grammar::parse(src).unwrap();
        assert_eq!(g.trailing_text, "// kept as-is\n// two lines");
        assert_eq!(g.to_text(), src);
    }

    #[test]
    fn blank_lines_in_bodies_are_dropped() {
        let src = "A:\n\t'a'\n\n\t'b';\n";
        let g = Grammar::parse(src).unwrap();
        assert_eq!(g.rules[0].lines.len(), 3);
        assert_eq!(g.to_text(), "A:\n\t'a'\n\t'b';\n");
    }

    #[test]
    fn metrics_counts_calls_per_occurrence() {
        // Two rules, six call sites: NodeId, Subgraph, EdgeRhs x2, AttrList x2.
        let src = "\
EdgeStmtNode returns EdgeStmtNode:
    {EdgeStmtNode}
         node=NodeId
          (edgeRHS+=EdgeRhs)+
          (attrLists+=AttrList)*
    ;

EdgeStmtSubgraph returns EdgeStmtSubgraph:
    {EdgeStmtSubgraph}
         subgraph=Subgraph
          (edgeRHS+=EdgeRhs)+
          (attrLists+=AttrList)*
    ;
";
        let g = Grammar::parse(src).unwrap();
        let m = g.metrics();
        assert_eq!(m.rule_count, 2);
        assert_eq!(m.call_count, 6);
        assert_eq!(m.line_count, 12);
    }

    #[test]
    fn metrics_on_single_node_stmt() {
        let g = Grammar::parse(LISTING_NODESTMT).unwrap();
        let m = g.metrics();
        assert_eq!(m.rule_count, 1);
        // node=NodeId, attrLists+=AttrList twice.
        assert_eq!(m.call_count, 3);
    }

    #[test]
    fn metrics_counts_cross_references_and_bare_calls() {
        let src = "A:\n\tpredPatt=[PredicateOrPatternReferrable|EString]\n\tSubgraph\n\t;\n";
        let g = Grammar::parse(src).unwrap();
        // One cross-reference target, one bare invocation.
        assert_eq!(g.metrics().call_count, 2);
    }
}
