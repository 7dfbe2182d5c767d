"""Exception types shared across the simulator."""


class ConfigurationError(ValueError):
    """Invalid or unsatisfiable configuration (parameters, bounds, rates)."""


class IngestionError(ValueError):
    """Malformed external input, e.g. a latency matrix failing schema checks."""


class SamplingError(RuntimeError):
    """A random draw could not be satisfied (candidate pool too small)."""
