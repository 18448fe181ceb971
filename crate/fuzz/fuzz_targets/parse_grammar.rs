#![no_main]

use libfuzzer_sys::fuzz_target;

// The grammar parser must never panic; it either builds a document or
// reports a ParseError with a line number.
fuzz_target!(|data: &[u8]| {
    if let Ok(input) = std::str::from_utf8(data) {
        let _ = grammar_forge::Grammar::parse(input);
    }
});
