#![no_main]

use libfuzzer_sys::fuzz_target;
use qga_photonics::surrogate::LabeledDataset;

fuzz_target!(|data: &[u8]| {
    if let Ok(set) = LabeledDataset::read_csv(data) {
        let mut out = Vec::new();
        set.write_csv(&mut out).unwrap();
        let again = LabeledDataset::read_csv(out.as_slice()).unwrap();
        assert_eq!(again.codes(), set.codes());
    }
});
