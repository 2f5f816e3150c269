"""Multi-resolution clustering of vector-embedded document corpora."""

__version__ = "0.1.0"
