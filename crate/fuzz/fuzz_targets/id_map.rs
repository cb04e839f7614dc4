#![no_main]
#[macro_use]
extern crate libfuzzer_sys;

use fj_core::graph::read_id_map;

fuzz_target!(|data: &[u8]| {
    let _ = read_id_map(data);
});
