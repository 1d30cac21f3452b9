"""Graph-based characterization of echo state network dynamics."""

__version__ = "0.1.0"
