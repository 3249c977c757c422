#![no_main]

use auglag_core::SolverConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(config) = SolverConfig::from_json_bytes(data) {
        config.validate().expect("a loaded config is valid");
        let text = serde_json::to_string(&config).expect("a config serializes");
        assert_eq!(SolverConfig::from_json(&text).expect("a saved config loads"), config);
    }
});
