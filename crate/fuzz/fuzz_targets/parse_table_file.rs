#![no_main]

use libfuzzer_sys::fuzz_target;
use mindep::format::{parse_table_file, to_table_file};

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = parse_table_file(data) {
        // anything accepted must survive a write/read cycle unchanged
        let text = to_table_file(&t);
        let back = parse_table_file(text.as_bytes()).expect("round trip");
        assert_eq!(back.counts(), t.counts());
        assert_eq!(back.dims(), t.dims());
    }
});
