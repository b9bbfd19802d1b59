#![no_main]

use libfuzzer_sys::fuzz_target;
use qperm::hadamard::{parse_phase, Phase};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(p) = parse_phase(text) else { return };
    let z = p.to_complex();
    assert!((z.norm() - 1.0).abs() < 1e-6, "{text:?} parsed off the unit circle");
    if let Phase::Root { .. } = p {
        assert_eq!(parse_phase(&p.to_string()).unwrap(), p);
    }
});
