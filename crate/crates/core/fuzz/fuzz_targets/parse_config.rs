#![no_main]

use libfuzzer_sys::fuzz_target;
use sdnlte::config::{parse_config_str, to_toml_string};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = parse_config_str(text) {
        // Anything accepted must survive a round trip.
        let again = to_toml_string(&cfg).expect("serializes");
        assert_eq!(parse_config_str(&again).expect("reparses"), cfg);
    }
});
