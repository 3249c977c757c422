#![no_main]

use auglag_core::problem::corpus;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(name) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(problem) = corpus::by_name(name) {
        assert!(problem.is_feasible(&problem.x0, 1e-10));
    }
});
