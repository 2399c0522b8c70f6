"""Boolean-model percolation in the hyperbolic plane: geometry, sampling, alpha-values, visibility."""

__version__ = "0.1.0"
