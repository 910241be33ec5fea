"""Functional data regression toolkit.

Represents discretely sampled functions on smooth bases (B-splines,
Fourier), applies functional transforms (centering/reduction, derivatives,
functional PCA), and feeds the resulting coordinates to RBF networks and
MLPs. Includes the semi-artificial missing-data benchmark with mean/k-NN
imputation baselines.
"""

__version__ = "0.1.0"
