#![no_main]

use libfuzzer_sys::fuzz_target;
use sdnlte::metrics::compute_metrics;
use sdnlte::report::{parse_raw_csv, raw_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = parse_raw_csv(data) {
        let bytes = raw_csv(&rows).expect("serializes");
        assert_eq!(parse_raw_csv(&bytes).expect("reparses"), rows);
        let _ = compute_metrics(&rows, 1, 1.0);
    }
});
