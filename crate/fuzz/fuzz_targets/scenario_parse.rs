#![no_main]

use libfuzzer_sys::fuzz_target;

// The scenario file is the artifact's only untrusted input. Parsing must
// never panic, and anything that parses must echo back to TOML that parses
// to the same scenario.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(scenario) = onephoton::parse_scenario(text) {
        let echoed = scenario.to_toml();
        let reparsed = onephoton::parse_scenario(&echoed).expect("echoed scenario must re-parse");
        assert_eq!(reparsed.to_toml(), echoed, "echo must be a fixed point");
    }
});
