"""Coverage control of mobile sensor networks."""

__version__ = "0.1.0"
