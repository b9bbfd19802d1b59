#![no_main]

use libfuzzer_sys::fuzz_target;
use qperm::hadamard::{parse_blog, write_blog};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(m) = parse_blog(text) else { return };
    // Anything accepted must survive a write/read cycle unchanged.
    let again = parse_blog(&write_blog(&m)).expect("written .blog parses");
    assert_eq!(m, again);
});
