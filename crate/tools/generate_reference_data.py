#!/usr/bin/env python3
"""Regenerate the bundled optical data under crates/core/data/.

Material tables are evaluated from published dispersion fits:
  SiO2   Malitson (1965), fused silica, 3-term Sellmeier
  Si3N4  Luke et al. (2015), 2-term Sellmeier
  TiO2   DeVore (1951), rutile ordinary ray; UV points below 400 nm are
         hand-placed approximate values with an absorption edge
  Al2O3  Malitson (1962), sapphire ordinary ray, 3-term Sellmeier

The solar table is a smooth clear-sky AM1.5G-style model: a 5778 K
blackbody scaled to the extraterrestrial irradiance, attenuated by
Rayleigh, aerosol, ozone and water/CO2 absorption bands at air mass 1.5,
then rescaled to a 1000 W/m^2 broadband total over 300-2500 nm. It is not
the ASTM G173 table; drop that file in via the config for quantitative work.
"""
import math
import os

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "data")
WAVELENGTHS = list(range(300, 2505, 5))


def sellmeier(lam_um, terms, const=1.0):
    l2 = lam_um * lam_um
    n2 = const + sum(b * l2 / (l2 - c * c) for b, c in terms)
    return math.sqrt(n2)


def sio2(lam):
    return sellmeier(lam / 1000, [(0.6961663, 0.0684043), (0.4079426, 0.1162414), (0.8974794, 9.896161)]), 0.0


def si3n4(lam):
    return sellmeier(lam / 1000, [(3.0249, 0.1353406), (40314.0, 1239.842)]), 0.0


TIO2_UV = [(300, 3.35, 1.75), (320, 3.65, 1.35), (340, 3.75, 0.85), (360, 3.55, 0.35), (380, 3.25, 0.08), (400, 2.996, 0.0)]


def tio2(lam):
    if lam <= 400:
        for (l0, n0, k0), (l1, n1, k1) in zip(TIO2_UV, TIO2_UV[1:]):
            if l0 <= lam <= l1:
                t = (lam - l0) / (l1 - l0)
                return n0 + t * (n1 - n0), k0 + t * (k1 - k0)
    l2 = (lam / 1000) ** 2
    return math.sqrt(5.913 + 0.2441 / (l2 - 0.0803)), 0.0


def al2o3(lam):
    return sellmeier(lam / 1000, [(1.4313493, 0.0726631), (0.65054713, 0.1193242), (5.3414021, 18.028251)]), 0.0


def solar(lam):
    um = lam / 1000
    h, c, kb, t = 6.62607015e-34, 2.99792458e8, 1.380649e-23, 5778.0
    lm = lam * 1e-9
    planck = 2 * h * c * c / lm**5 / (math.exp(h * c / (lm * kb * t)) - 1)
    am = 1.5
    rayleigh = 0.0088 * um ** -4.05
    aerosol = 0.08 * um ** -1.3
    ozone = 3.5 * math.exp(-(lam - 255) / 12.0) if lam < 340 else 3.5 * math.exp(-85 / 12.0) * math.exp(-(lam - 340) / 40.0)
    bands = [(760, 4, 0.9), (940, 22, 1.4), (1130, 28, 2.0), (1390, 38, 6.0), (1880, 50, 8.0), (2010, 25, 1.2), (2700, 180, 6.0), (820, 20, 0.25), (720, 15, 0.3)]
    water = sum(d * math.exp(-0.5 * ((lam - c0) / w) ** 2) for c0, w, d in bands)
    tau = (rayleigh + aerosol + ozone) * am + water
    return planck * math.exp(-tau)


def write_material(name, fn):
    path = os.path.join(OUT, "materials", f"{name}.csv")
    with open(path, "w") as f:
        f.write("wavelength_nm,n,k\n")
        for lam in WAVELENGTHS:
            n, k = fn(lam)
            f.write(f"{lam},{n:.6f},{k:.6f}\n")


def write_solar():
    raw = [solar(lam) for lam in WAVELENGTHS]
    total = sum(0.5 * (a + b) * 5 for a, b in zip(raw, raw[1:]))
    scale = 1000.0 / total
    with open(os.path.join(OUT, "am15g_model.csv"), "w") as f:
        f.write("wavelength_nm,irradiance\n")
        for lam, s in zip(WAVELENGTHS, raw):
            f.write(f"{lam},{s * scale:.6f}\n")


if __name__ == "__main__":
    os.makedirs(os.path.join(OUT, "materials"), exist_ok=True)
    for name, fn in [("SiO2", sio2), ("Si3N4", si3n4), ("TiO2", tio2), ("Al2O3", al2o3)]:
        write_material(name, fn)
    write_solar()
