"""Exception types shared across the package."""


class DataFormatError(Exception):
    """Malformed or inconsistent input data: bad headers, size mismatches,
    out-of-range labels, incompatible cube/ground-truth dimensions."""


class ConfigError(ValueError):
    """Invalid configuration values: thresholds out of range, bad bin or
    neighbor counts, unknown measure tokens."""
