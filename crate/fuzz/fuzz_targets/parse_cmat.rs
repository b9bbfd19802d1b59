#![no_main]

use libfuzzer_sys::fuzz_target;
use qperm::hadamard::{parse_cmat, write_cmat};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(m) = parse_cmat(text) else { return };
    let written = write_cmat(&m);
    let again = parse_cmat(&written).expect("written .cmat parses");
    assert_eq!(written, write_cmat(&again));
});
