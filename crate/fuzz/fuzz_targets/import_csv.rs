#![no_main]
use gcore::catalog::{csv, ImportOptions};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = csv::import("t", data, &ImportOptions::default());
});
