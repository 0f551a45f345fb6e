#![no_main]

use libfuzzer_sys::fuzz_target;
use qga_photonics::surrogate::{Surrogate, SurrogateModel};
use qga_photonics::StructureCode;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(model) = SurrogateModel::from_json(text) {
        let len = model.code_length().min(64);
        let _ = model.predict(&StructureCode::zeros(len));
    }
});
