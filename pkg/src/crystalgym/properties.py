"""Target property identifiers, units, and normalization scales."""

BULK_MODULUS = "bulk_modulus"
DENSITY = "density"
BAND_GAP = "band_gap"

ALL_PROPERTIES = (BULK_MODULUS, DENSITY, BAND_GAP)

UNITS = {BULK_MODULUS: "GPa", DENSITY: "g/cm^3", BAND_GAP: "eV"}

# divisors used to keep the conditioning scalar bounded in network inputs
TARGET_SCALE = {BULK_MODULUS: 1000.0, DENSITY: 30.0, BAND_GAP: 5.0}


def check_property(prop: str) -> str:
    if prop not in ALL_PROPERTIES:
        raise ValueError(f"unknown property {prop!r}; expected one of {ALL_PROPERTIES}")
    return prop
