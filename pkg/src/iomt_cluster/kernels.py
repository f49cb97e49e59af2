"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the pure-Python
fallback is loaded. Set ``IOMT_CLUSTER_PURE_PYTHON=1`` to force the fallback.
"""

import importlib
import os

import numpy as np

from . import _purepy


def load_backend(name):
    """Return the kernel module for ``"cython"`` or ``"python"``."""
    if name == "python":
        return _purepy
    if name == "cython":
        return importlib.import_module("iomt_cluster._kernels")
    raise ValueError(f"unknown kernel backend {name!r}")


def available_backends():
    names = ["python"]
    try:
        load_backend("cython")
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


if os.environ.get("IOMT_CLUSTER_PURE_PYTHON", "") == "1":
    _impl = _purepy
else:
    try:
        _impl = load_backend("cython")
    except ImportError:
        _impl = _purepy

BACKEND = "cython" if _impl is not _purepy else "python"


def betweenness(indptr, indices):
    """Unnormalized Brandes sums; see ``_kernels.betweenness``."""
    return _impl.betweenness(
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int64),
    )


def decode_batch(positions, n):
    return _impl.decode_batch(np.ascontiguousarray(positions, dtype=np.float64), int(n))


def set_scores(ranks, scores):
    return _impl.set_scores(
        np.ascontiguousarray(ranks, dtype=np.int64),
        np.ascontiguousarray(scores, dtype=np.float64),
    )


def cso_epoch(*args):
    """Several swarm iterations on a set objective; see ``_kernels.cso_epoch``."""
    return _impl.cso_epoch(*args)
