// Shared by several test targets; not every target uses every helper.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn read_fixture(name: &str) -> String {
    let path = fixture_dir().join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {path:?}: {e}"))
}

/// Every grammar fixture in the corpus.
pub fn grammar_fixtures() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(fixture_dir())
        .unwrap()
        .filter_map(|entry| {
            let path = entry.unwrap().path();
            let name = path.file_name()?.to_str()?.to_string();
            name.ends_with(".xtext")
                .then(|| (name, std::fs::read_to_string(&path).unwrap()))
        })
        .collect();
    out.sort();
    out
}

pub fn normalize_lf(text: &str) -> String {
    text.replace("\r\n", "\n").replace('\r', "\n")
}

/// Whitespace-insensitive token sequence of a whole document: quoted
/// tokens, words and punctuation in order; blank lines vanish.
pub fn token_stream(text: &str) -> Vec<String> {
    use grammar_forge::tokens::{lex, Tok};
    text.lines()
        .flat_map(lex)
        .filter(|t| !t.is_ws())
        .map(|t| match t {
            Tok::Quoted { quote, body, .. } => format!("{quote}{body}{quote}"),
            Tok::Word(w) => w,
            Tok::Punct(p) => p.to_string(),
            Tok::Ws(_) => unreachable!(),
        })
        .collect()
}
