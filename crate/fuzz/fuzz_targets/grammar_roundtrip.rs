#![no_main]

use libfuzzer_sys::fuzz_target;

use grammar_forge::Grammar;

// Serialization is a fixpoint: whatever parses serializes to text that
// parses back to the same document.
fuzz_target!(|data: &[u8]| {
    let Ok(input) = std::str::from_utf8(data) else { return };
    let Ok(grammar) = Grammar::parse(input) else { return };
    let first = grammar.to_text();
    let reparsed = Grammar::parse(&first).expect("serialized grammar must parse");
    assert_eq!(reparsed.to_text(), first, "serialization must be a fixpoint");
});
