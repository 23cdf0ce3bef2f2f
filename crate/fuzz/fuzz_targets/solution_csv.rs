#![no_main]
use libfuzzer_sys::fuzz_target;
use obstacle_dpp::output::parse_solution_csv;

fuzz_target!(|data: &[u8]| {
    let _ = parse_solution_csv(data, std::path::Path::new("fuzz"));
});
