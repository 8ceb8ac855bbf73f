"""Performance bounds for confidence intervals centred on bootstrap smoothed estimators."""

__version__ = "0.1.0"
