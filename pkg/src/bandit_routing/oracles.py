"""Exhaustive reference implementations for cross-checking the fast routines.

These enumerate the path set and are exponential in general; they exist so
tests and the ``verify`` command have an independent ground truth.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import NoSecondPath
from .network import DEFAULT_PATH_CAP, Network, PathVector, enumerate_paths, path_matrix

RANK_RTOL = 1e-8


def _ranked(net, weights, cap):
    w = np.asarray(weights, dtype=float)
    paths = enumerate_paths(net, cap)
    # enumeration order is lexicographic, and sort is stable
    return sorted(((p.value(w), p) for p in paths), key=lambda vp: vp[0])


def brute_shortest(net: Network, weights, cap: int = DEFAULT_PATH_CAP) -> tuple[PathVector, float]:
    value, path = _ranked(net, weights, cap)[0]
    return path, value


def brute_second_shortest(net: Network, weights,
                          cap: int = DEFAULT_PATH_CAP) -> tuple[PathVector, float]:
    ranked = _ranked(net, weights, cap)
    if len(ranked) < 2:
        raise NoSecondPath("network has a single path")
    value, path = ranked[1]
    return path, value


def brute_S(basis, net: Network, cap: int = DEFAULT_PATH_CAP) -> float:
    """Largest |coefficient| over all enumerated paths, by direct least squares."""
    b = basis.matrix
    a = path_matrix(enumerate_paths(net, cap)).T
    nu, *_ = np.linalg.lstsq(b, a, rcond=None)
    return float(np.max(np.abs(nu)))


def path_matrix_rank(net: Network, cap: int = DEFAULT_PATH_CAP) -> int:
    a = path_matrix(enumerate_paths(net, cap))
    sv = np.linalg.svd(a, compute_uv=False)
    return int(np.count_nonzero(sv >= RANK_RTOL * sv[0]))


def exact_det(m) -> Fraction:
    """Determinant by recursive cofactor expansion in exact rational arithmetic."""
    rows = [[Fraction(x) for x in row] for row in np.asarray(m).tolist()]
    return _cofactor_expand(rows)


def _cofactor_expand(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = Fraction(0)
    for j, pivot in enumerate(rows[0]):
        if pivot == 0:
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        total += (-1) ** j * pivot * _cofactor_expand(minor)
    return total
