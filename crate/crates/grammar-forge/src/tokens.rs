//! Lossless tokenization of single grammar lines.
//!
//! Every transformation anchors on quoted-token boundaries, so the one
//! invariant that matters here is fidelity: `render(lex(s)) == s` for any
//! input line, including lines with unterminated quotes.

/// One lexeme of a grammar line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    /// A quoted token such as `'node'` or `","`. `body` holds the raw text
    /// between the delimiters, escapes untouched. `closed` is false when the
    /// line ended before the closing quote.
    Quoted { quote: char, body: String, closed: bool },
    /// A run of identifier characters (letters, digits, underscore).
    Word(String),
    /// A single character of punctuation.
    Punct(char),
    /// A run of whitespace.
    Ws(String),
}

impl Tok {
    pub fn quoted(body: &str) -> Tok {
        Tok::Quoted { quote: '\'', body: body.to_string(), closed: true }
    }

    pub fn is_ws(&self) -> bool {
        matches!(self, Tok::Ws(_))
    }

    pub fn is_punct(&self, c: char) -> bool {
        matches!(self, Tok::Punct(p) if *p == c)
    }

    /// Body of a quoted token, if this is one.
    pub fn quoted_body(&self) -> Option<&str> {
        match self {
            Tok::Quoted { body, .. } => Some(body),
            _ => None,
        }
    }

    pub fn word(&self) -> Option<&str> {
        match self {
            Tok::Word(w) => Some(w),
            _ => None,
        }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// True when `s` is shaped like an identifier: a letter or underscore
/// followed by letters, digits or underscores. Quoted tokens with this shape
/// are keywords; everything else quoted is a symbol.
pub fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(is_word_char)
}

/// Split a line into lexemes. Backslash escapes the next character inside
/// quotes.
pub fn lex(line: &str) -> Vec<Tok> {
    let mut toks = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c == '\'' || c == '"' {
            chars.next();
            let mut body = String::new();
            let mut closed = false;
            let mut escaped = false;
            for d in chars.by_ref() {
                if escaped {
                    body.push(d);
                    escaped = false;
                } else if d == '\\' {
                    body.push(d);
                    escaped = true;
                } else if d == c {
                    closed = true;
                    break;
                } else {
                    body.push(d);
                }
            }
            toks.push(Tok::Quoted { quote: c, body, closed });
        } else if c.is_whitespace() {
            let mut ws = String::new();
            while let Some(&d) = chars.peek() {
                if !d.is_whitespace() {
                    break;
                }
                ws.push(d);
                chars.next();
            }
            toks.push(Tok::Ws(ws));
        } else if is_word_char(c) {
            let mut word = String::new();
            while let Some(&d) = chars.peek() {
                if !is_word_char(d) {
                    break;
                }
                word.push(d);
                chars.next();
            }
            toks.push(Tok::Word(word));
        } else {
            chars.next();
            toks.push(Tok::Punct(c));
        }
    }
    toks
}

/// Inverse of [`lex`].
pub fn render(toks: &[Tok]) -> String {
    let mut out = String::new();
    for tok in toks {
        match tok {
            Tok::Quoted { quote, body, closed } => {
                out.push(*quote);
                out.push_str(body);
                if *closed {
                    out.push(*quote);
                }
            }
            Tok::Word(w) => out.push_str(w),
            Tok::Punct(p) => out.push(*p),
            Tok::Ws(ws) => out.push_str(ws),
        }
    }
    out
}

/// Index of the next token that is not whitespace, starting at `from`.
pub fn next_non_ws(toks: &[Tok], from: usize) -> Option<usize> {
    (from..toks.len()).find(|&i| !toks[i].is_ws())
}

/// Index of the previous token that is not whitespace, ending at `from`
/// exclusive.
pub fn prev_non_ws(toks: &[Tok], from: usize) -> Option<usize> {
    (0..from).rev().find(|&i| !toks[i].is_ws())
}

/// Index of the `Punct('(')` matching the `Punct(')')` at `close`, honoring
/// nesting. Quoted parens are distinct tokens and never counted.
pub fn matching_open_paren(toks: &[Tok], close: usize) -> Option<usize> {
    let mut depth = 0usize;
    for i in (0..=close).rev() {
        match &toks[i] {
            Tok::Punct(')') => depth += 1,
            Tok::Punct('(') => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// Index of the `Punct(')')` matching the `Punct('(')` at `open`.
pub fn matching_close_paren(toks: &[Tok], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (i, tok) in toks.iter().enumerate().skip(open) {
        match tok {
            Tok::Punct('(') => depth += 1,
            Tok::Punct(')') => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// Index of the rule-declaration colon: the first `:` not glued to another
/// `:` (qualified names in `returns` clauses use `::`).
pub fn decl_colon_index(toks: &[Tok]) -> Option<usize> {
    let mut i = 0;
    while i < toks.len() {
        if toks[i].is_punct(':') {
            if toks.get(i + 1).is_some_and(|t| t.is_punct(':')) {
                i += 2;
                continue;
            }
            return Some(i);
        }
        i += 1;
    }
    None
}

/// Assignment operators that bind an attribute to its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignOp {
    Plain,
    Append,
    Boolean,
}

impl AssignOp {
    pub fn as_str(&self) -> &'static str {
        match self {
            AssignOp::Plain => "=",
            AssignOp::Append => "+=",
            AssignOp::Boolean => "?=",
        }
    }
}

/// An attribute assignment found inside a token stream.
#[derive(Debug, Clone)]
pub struct Assignment {
    /// Index of the `Tok::Word` holding the attribute name.
    pub lhs: usize,
    pub op: AssignOp,
    /// Index range of the operator tokens (inclusive).
    pub op_span: (usize, usize),
    /// Index of the token starting the right-hand side, if any.
    pub rhs: Option<usize>,
    /// Index of the last token of the right-hand side term.
    pub rhs_end: Option<usize>,
}

impl Assignment {
    pub fn name<'a>(&self, toks: &'a [Tok]) -> &'a str {
        toks[self.lhs].word().unwrap_or("")
    }
}

/// Scan for attribute assignments: `name=`, `name+=` and `name?=`.
///
/// `==`, `!=` and friends never match because the operator scan requires the
/// `=` to directly terminate the sequence. The right-hand side term is the
/// next non-whitespace token; cross-references `[...]` and groups `(...)`
/// extend to their closing delimiter.
pub fn find_assignments(toks: &[Tok]) -> Vec<Assignment> {
    let mut found = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let Tok::Word(_) = &toks[i] else {
            i += 1;
            continue;
        };
        // Operator must be adjacent to the word: no whitespace in between.
        let (op, op_span) = match (toks.get(i + 1), toks.get(i + 2)) {
            (Some(Tok::Punct('+')), Some(Tok::Punct('='))) => {
                (AssignOp::Append, (i + 1, i + 2))
            }
            (Some(Tok::Punct('?')), Some(Tok::Punct('='))) => {
                (AssignOp::Boolean, (i + 1, i + 2))
            }
            (Some(Tok::Punct('=')), next) => {
                // Reject `==` and `=>`.
                if matches!(next, Some(Tok::Punct('=')) | Some(Tok::Punct('>'))) {
                    i += 1;
                    continue;
                }
                (AssignOp::Plain, (i + 1, i + 1))
            }
            _ => {
                i += 1;
                continue;
            }
        };
        let rhs = next_non_ws(toks, op_span.1 + 1);
        let rhs_end = rhs.and_then(|r| match &toks[r] {
            Tok::Word(_) | Tok::Quoted { .. } => Some(r),
            Tok::Punct('[') => {
                let mut j = r;
                while j < toks.len() && !toks[j].is_punct(']') {
                    j += 1;
                }
                (j < toks.len()).then_some(j)
            }
            Tok::Punct('(') => matching_close_paren(toks, r),
            _ => None,
        });
        found.push(Assignment { lhs: i, op, op_span, rhs, rhs_end });
        i = op_span.1 + 1;
    }
    found
}

/// The leftmost assigned attribute name on a line, skipping anything inside
/// quoted tokens and inside semantic actions `{...}`.
pub fn leftmost_attr(line: &str) -> Option<String> {
    let toks = lex(line);
    let mut action_depth = 0usize;
    for (i, tok) in toks.iter().enumerate() {
        match tok {
            Tok::Punct('{') => action_depth += 1,
            Tok::Punct('}') => action_depth = action_depth.saturating_sub(1),
            Tok::Word(_) if action_depth == 0 => {
                if let Some(a) = find_assignments(&toks[i..]).first() {
                    if a.lhs == 0 {
                        return Some(toks[i].word().unwrap().to_string());
                    }
                }
            }
            _ => {}
        }
    }
    None
}
