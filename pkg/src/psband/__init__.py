"""V2X spectrum-sharing feasibility in the 4.9 GHz U.S. public-safety band."""

__version__ = "0.1.0"
