"""needlens: weakly-supervised need analytics over demographic registries
and timestamped free-text feedback."""

__version__ = "0.1.0"
