#![no_main]

use libfuzzer_sys::fuzz_target;
use sdnlte::report::{events_jsonl, parse_event_log};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(events) = parse_event_log(text) {
        let bytes = events_jsonl(&events).expect("serializes");
        let again = parse_event_log(std::str::from_utf8(&bytes).unwrap()).expect("reparses");
        assert_eq!(again, events);
    }
});
