#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(g) = gcore::catalog::json::decode(s) {
            assert!(g.validate().is_empty());
            let again = gcore::catalog::json::decode(&gcore::catalog::json::encode(&g)).expect("encoded graph decodes");
            assert_eq!(g, again);
        }
    }
});
