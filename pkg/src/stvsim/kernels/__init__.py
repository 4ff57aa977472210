"""Numba kernels: diagonal clusters and non-diagonal (generic, paired, recursive) gates."""
