#![no_main]
#[macro_use]
extern crate libfuzzer_sys;

use fj_core::opinions::read_opinions;

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    if let Ok(x) = read_opinions(rest, n as usize) {
        assert_eq!(x.len(), n as usize);
        assert!(x.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
    }
});
