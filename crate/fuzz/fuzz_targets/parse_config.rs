#![no_main]

use libfuzzer_sys::fuzz_target;

use grammar_forge::{Catalog, ConfigFile};

// Config parsing must never panic, and whatever parses must survive a
// serialize/re-parse round trip with the application list intact.
fuzz_target!(|data: &[u8]| {
    let Ok(input) = std::str::from_utf8(data) else { return };
    let catalog = Catalog::builtin();
    let Ok(config) = ConfigFile::parse(input, "fuzz.gro", &catalog) else {
        return;
    };
    let text = config.to_text();
    let reparsed = ConfigFile::parse(&text, "fuzz.gro", &catalog)
        .expect("serialized config must parse");
    assert_eq!(reparsed.applications, config.applications);
});
