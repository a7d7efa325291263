"""Scene-graph-conditioned toy text-to-video pipeline."""

__version__ = "0.1.0"
