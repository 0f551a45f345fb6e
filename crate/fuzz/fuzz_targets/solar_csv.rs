#![no_main]

use libfuzzer_sys::fuzz_target;
use qga_photonics::optics::{SolarSpectrum, SpectralGrid};

fuzz_target!(|data: &[u8]| {
    if let Ok(solar) = SolarSpectrum::from_csv(data) {
        let (lo, hi) = solar.span();
        let _ = solar.irradiance_at(0.5 * (lo + hi));
        let _ = SpectralGrid::uniform(&solar, lo, hi, ((hi - lo) / 50.0).max(1e-3));
    }
});
