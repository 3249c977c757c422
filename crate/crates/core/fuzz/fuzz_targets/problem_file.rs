#![no_main]

use auglag_core::lagrangian::eval_p;
use auglag_core::problem::file::{parse_problem, parse_problem_bytes, ProblemFile};
use libfuzzer_sys::fuzz_target;
use nalgebra::DVector;

fuzz_target!(|data: &[u8]| {
    let Ok(problem) = parse_problem_bytes(data) else {
        return;
    };
    let lambda = DVector::zeros(problem.m());
    let _ = eval_p(&problem, &problem.x0, &lambda, 1.0);
    if let Some(file) = ProblemFile::from_spec(&problem) {
        let text = serde_json::to_string(&file).expect("a parsed problem serializes");
        let again = parse_problem(&text).expect("an exported problem parses");
        assert_eq!(again.x0, problem.x0);
        assert_eq!(again.m(), problem.m());
    }
});
