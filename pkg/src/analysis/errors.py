class WsnFusionError(Exception):
    """Base class for every error raised by wsn-fusion"""


class ConfigurationError(WsnFusionError, ValueError):
    """Invalid parameter, configuration file or command line flag"""


class EnumerationLimitError(WsnFusionError):
    """Odd-subset enumeration requested beyond its hop guard"""

    def __init__(self, hops: int, limit: int):
        super().__init__(
            f"Odd-subset enumeration is limited to M <= {limit} hops (got M={hops}); "
            "use flip_probability() for the closed form"
        )
        self.hops = hops
        self.limit = limit


class TraceSizeError(WsnFusionError):
    """Trace window would exceed the configured lattice size"""
