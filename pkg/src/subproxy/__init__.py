"""Summary-graph discovery for subsampled first-order SVAR processes."""

__version__ = "0.1.0"
FORMAT_VERSION = "1"
