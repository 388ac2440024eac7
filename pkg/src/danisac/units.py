"""Unit conversions shared across the package."""


def dbm_to_watt(x_dbm: float) -> float:
    """Convert a power level in dBm to Watts: 10^((x - 30) / 10)."""
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


def watt_to_dbm(x_watt: float) -> float:
    """Convert a power in Watts to dBm.  Rejects nonpositive input."""
    if x_watt <= 0.0:
        raise ValueError(f"power must be positive to express in dBm, got {x_watt}")
    import math

    return 10.0 * math.log10(x_watt) + 30.0
