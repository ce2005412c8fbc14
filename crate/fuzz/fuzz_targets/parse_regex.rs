#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(r) = gcore::path::parse_regex(s) {
            let _ = gcore::path::Nfa::compile(&r);
        }
    }
});
