#![no_main]

use libfuzzer_sys::fuzz_target;
use mindep::format::parse_model_label;

fuzz_target!(|data: &[u8]| {
    let Ok(label) = std::str::from_utf8(data) else { return };
    for names in [&["A", "S", "C"][..], &["H", "A", "O"][..], &["AB", "B", "C"][..]] {
        if let Ok(g) = parse_model_label(label, names) {
            // a parsed model's own label must parse back to the same graph
            assert_eq!(parse_model_label(&g.label(), names).unwrap(), g);
        }
    }
});
