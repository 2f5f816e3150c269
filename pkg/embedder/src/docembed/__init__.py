"""Raw-article adapter: text preprocessing and PV-DBOW vector inference."""

__version__ = "0.1.0"
