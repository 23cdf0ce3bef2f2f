#![no_main]
use libfuzzer_sys::fuzz_target;
use obstacle_dpp::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(config) = RunConfig::from_sources(Some(s), &[], None) {
            let _ = config.problem();
        }
    }
});
