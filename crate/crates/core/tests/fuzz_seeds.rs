//! Replays the checked-in fuzz seeds through the parsers on stable.

use std::fs;
use std::path::PathBuf;

use auglag_core::problem::corpus;
use auglag_core::problem::file::{parse_problem, parse_problem_bytes, ProblemFile};
use auglag_core::SolverConfig;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn problem_file_seeds() {
    let mut parsed = 0;
    for (name, bytes) in seeds("problem_file") {
        let Ok(problem) = parse_problem_bytes(&bytes) else {
            continue;
        };
        parsed += 1;
        let file = ProblemFile::from_spec(&problem).unwrap();
        let again = parse_problem(&serde_json::to_string(&file).unwrap()).unwrap();
        assert_eq!(again.x0, problem.x0, "{name}");
    }
    assert!(parsed >= 3);
}

#[test]
fn solver_config_seeds() {
    for (name, bytes) in seeds("solver_config") {
        let config = SolverConfig::from_json_bytes(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
        let text = serde_json::to_string(&config).unwrap();
        assert_eq!(SolverConfig::from_json(&text).unwrap(), config, "{name}");
    }
}

#[test]
fn problem_name_seeds() {
    let mut resolved = 0;
    for (_, bytes) in seeds("problem_name") {
        if let Ok(p) = corpus::by_name(std::str::from_utf8(&bytes).unwrap()) {
            assert!(p.is_feasible(&p.x0, 1e-10));
            resolved += 1;
        }
    }
    assert!(resolved >= 4);
}
