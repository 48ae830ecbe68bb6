"""Second-order efficiency certificates for smooth vector optimization."""

__version__ = "0.1.0"
