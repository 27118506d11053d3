import json

import numpy as np

from . import _core
from ._core import ComputationError, InputError, aggregate_pvalues, pvalue, schema_version, wchisq_cdf

__all__ = [
    "ComputationError",
    "InputError",
    "aggregate_pvalues",
    "diffnet",
    "diffregr",
    "generate",
    "permtest",
    "pvalue",
    "schema_version",
    "wchisq_cdf",
]


def _matrix(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def diffregr(u, v, **options):
    """Two-sample test for regression parameters; column 0 of each array is the response."""
    return json.loads(_core.diffregr(_matrix(u), _matrix(v), **options))


def diffnet(u, v, **options):
    """Two-sample test for Gaussian graphical models on zero-mean samples."""
    return json.loads(_core.diffnet(_matrix(u), _matrix(v), **options))


def permtest(u, v, **options):
    """Permutation test on the symmetric KL divergence of l1-penalised fits."""
    return json.loads(_core.permtest(_matrix(u), _matrix(v), **options))


def generate(setting="regression", **options):
    """Synthetic populations (u, v) from the simulation settings."""
    return _core.generate(setting, **options)
