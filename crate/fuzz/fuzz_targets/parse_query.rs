#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(q) = gcore::parse(s) {
            // whatever parses must survive a render/parse cycle unchanged
            let again = gcore::parse(&gcore::parser::render(&q)).expect("rendered query parses");
            assert_eq!(q, again);
        }
    }
});
