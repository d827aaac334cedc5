"""Numerical laboratory for Riesz bases of normalized reproducing kernels in
small Fock spaces with weight ``phi(r) = (log+ r)^(1+beta)``."""

__version__ = "0.1.0"
