#![no_main]

use libfuzzer_sys::fuzz_target;

use grammar_forge::{apply_all, Catalog, ConfigFile, Grammar};

// Split the input into a config part and a grammar part; whatever the
// engine does, the optimized grammar must still parse.
fuzz_target!(|data: &[u8]| {
    let Ok(input) = std::str::from_utf8(data) else { return };
    let Some((config_text, grammar_text)) = input.split_once("\n%%\n") else {
        return;
    };
    let catalog = Catalog::builtin();
    let Ok(config) = ConfigFile::parse(config_text, "fuzz.gro", &catalog) else {
        return;
    };
    let Ok(grammar) = Grammar::parse(grammar_text) else { return };
    let Ok((optimized, _)) = apply_all(&grammar, &config.applications, &catalog, false) else {
        return;
    };
    Grammar::parse(&optimized.to_text()).expect("optimized grammar must parse");
});
