#![no_main]

use assocmem::patterns::{parse_patterns_csv, write_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(vs) = parse_patterns_csv(data) {
        assert!(vs.dim() > 0);
        assert_eq!(vs.as_slice().len(), vs.dim() * vs.len());
        let mut out = Vec::new();
        write_csv(&mut out, &vs).unwrap();
        let again = parse_patterns_csv(&out).expect("written CSV parses");
        assert_eq!(again, vs);
    }
});
