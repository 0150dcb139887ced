"""isac-fbl: finite-blocklength ISAC multiple-access tradeoff bounds."""

__version__ = "1.0.0"
