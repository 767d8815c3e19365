"""Multi-objective hyperparameter optimization with recursive design-space shrinking."""

__version__ = "0.1.0"
