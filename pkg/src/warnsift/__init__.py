"""warnsift: verify individual static-analysis warnings against bug fixes.

The package covers the full pipeline: ingesting analyzer XML reports,
building a labeled corpus from buggy/fixed commit pairs, extracting
warning-aware code context through a three-address IR and dependence
slicing, encoding everything into fixed-length id sequences, and training
a Bi-LSTM cross-attention classifier with focal loss.
"""

__version__ = "0.1.0"
