"""Python access to the gamblet multiresolution solver.

The heavy lifting happens in the C++ extension ``gamblet._core``; this module
adds small conveniences on top (scipy matrices, reshaping to the grid).
"""

from ._core import (
    DEFAULT_C_RHO,
    ConfigError,
    NumericalError,
    assemble,
    basis,
    canonical_config,
    config_hash,
    run,
    schedule,
    solve,
)

__all__ = [
    "DEFAULT_C_RHO",
    "ConfigError",
    "NumericalError",
    "assemble",
    "basis",
    "canonical_config",
    "config_hash",
    "run",
    "schedule",
    "solve",
    "to_scipy",
    "as_grid",
]


def to_scipy(csr_tuple):
    """Turn a ``(data, indices, indptr, shape)`` tuple into a scipy CSR matrix."""
    from scipy.sparse import csr_matrix

    data, indices, indptr, shape = csr_tuple
    return csr_matrix((data, indices, indptr), shape=shape)


def as_grid(values):
    """Reshape nodal values (node id x + n*y) to an (n, n) array indexed [y, x]."""
    import numpy as np

    v = np.asarray(values)
    n = int(round(v.size ** 0.5))
    if n * n != v.size:
        raise ValueError("not a square grid of nodal values")
    return v.reshape(n, n)
