#![no_main]

use libfuzzer_sys::fuzz_target;
use qga_photonics::active_learning::read_iterations_csv;

fuzz_target!(|data: &[u8]| {
    let _ = read_iterations_csv(data);
});
