#![no_main]
use libfuzzer_sys::fuzz_target;
use obstacle_dpp::config::{parse_override, Command, RunConfig};

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = parse_override(s);
        let overrides: Vec<String> = s.lines().map(str::to_owned).collect();
        let _ = RunConfig::from_sources(None, &overrides, Some(Command::Solve));
    }
});
