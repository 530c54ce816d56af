"""Front propagation laboratory: spreading speeds, traveling waves and selection thresholds."""

__version__ = "0.1.0"
