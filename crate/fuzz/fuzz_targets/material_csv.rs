#![no_main]

use libfuzzer_sys::fuzz_target;
use qga_photonics::optics::MaterialTable;

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = MaterialTable::from_csv("fuzz", data) {
        let (lo, hi) = table.span();
        for w in [lo, 0.5 * (lo + hi), hi] {
            let _ = table.nk(w);
        }
    }
});
