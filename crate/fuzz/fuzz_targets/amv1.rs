#![no_main]

use assocmem::patterns::{parse_amv1, write_amv1};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(vs) = parse_amv1(data) {
        let mut out = Vec::new();
        write_amv1(&mut out, &vs).unwrap();
        let again = parse_amv1(&out).expect("written AMV1 parses");
        assert_eq!(again, vs);
    }
});
