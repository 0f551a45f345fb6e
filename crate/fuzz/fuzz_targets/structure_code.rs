#![no_main]

use libfuzzer_sys::fuzz_target;
use qga_photonics::{MaterialPalette, StructureCode};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(code) = text.parse::<StructureCode>() {
        assert_eq!(code.to_string().parse::<StructureCode>().unwrap(), code);
        let _ = MaterialPalette::bundled().names(&code);
    }
});
