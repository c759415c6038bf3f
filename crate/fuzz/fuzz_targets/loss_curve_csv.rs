#![no_main]

use assocmem::scaling::parse_loss_curve_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(curve) = parse_loss_curve_csv(data, 1.0e6, 1.0e7) {
        assert_eq!(curve.steps.len(), curve.train_loss.len());
        assert_eq!(curve.steps.len(), curve.val_loss.len());
        assert!(curve.steps.windows(2).all(|w| w[0] < w[1]));
    }
});
