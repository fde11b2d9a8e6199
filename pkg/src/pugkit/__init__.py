"""pugkit: constant-size adjacency sketches, equality-based labeling
schemes, and structural certificates for hereditary graph families."""

__version__ = "0.1.0"
