"""drpipe: edge-offloaded diminished-reality object substitution at desk scale."""

__version__ = "0.1.0"

PROTO_VERSION = 1
