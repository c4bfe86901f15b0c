"""Exploration bases built from linear optimisation over the path set.

Every routine here touches the path set only through extremal-path calls,
so nothing is enumerated.  The determinant of a matrix with column j
replaced by a path is linear in the path (Laplace expansion along column
j), so "the path maximising |det|" is one longest-path and one
shortest-path computation with the cofactor vector as link weights.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import linalg
from .errors import NotIdentifiable, SingularMatrix
from .network import Network, PathVector, Sense, extremal_path

log = logging.getLogger(__name__)

# |<c_j, a>| must exceed this fraction of ||c_j|| * ||a|| to count as nonzero
REPLACE_TOL = 1e-9
COEF_TOL = 1e-9


@dataclass
class Basis:
    """Ordered exploration basis.

    ``completion`` is a nonsingular d-by-d matrix whose first ``d0`` columns
    are the basis paths; the remaining columns are unit vectors.
    """

    paths: list[PathVector]
    S: float
    completion: np.ndarray = field(repr=False)

    @property
    def d0(self) -> int:
        return len(self.paths)

    @property
    def d(self) -> int:
        return self.completion.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        """The d-by-d0 matrix whose columns are the basis paths."""
        return self.completion[:, :self.d0]

    def to_json(self) -> dict:
        return {
            "paths": [[int(x) for x in p.coords] for p in self.paths],
            "d0": self.d0,
            "S": float(self.S),
        }


@dataclass(frozen=True)
class Coefficients:
    nu: np.ndarray
    residual: float


def basis_from_json(obj: dict, net: Network) -> Basis:
    """Load a basis; every row must be a valid path of ``net``.

    The stored ``S`` is kept as-is; callers that need a trusted value should
    recompute it with :func:`compute_S`.
    """
    try:
        rows = obj["paths"]
        d0 = int(obj["d0"])
        s_val = float(obj["S"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed basis description: {exc!r}") from None
    paths = [net.path_from_coords(r) for r in rows]
    if len(paths) != d0:
        raise ValueError(f"basis lists {len(paths)} paths but d0={d0}")
    return Basis(paths, s_val, complete_columns(np.array([p.coords for p in paths]).T))


def complete_columns(b: np.ndarray) -> np.ndarray:
    """Append unit columns to a full-column-rank d-by-k matrix until square and nonsingular."""
    d, k = b.shape
    cols = [b[:, i] for i in range(k)]
    for i in range(d):
        if len(cols) == d:
            break
        e = np.zeros(d)
        e[i] = 1.0
        trial = np.column_stack(cols + [e])
        if np.linalg.matrix_rank(trial) == trial.shape[1]:
            cols.append(e)
    out = np.column_stack(cols)
    if out.shape != (d, d) or np.linalg.matrix_rank(out) < d:
        raise SingularMatrix("basis columns are linearly dependent")
    return out


def _best_abs(net: Network, weights: np.ndarray) -> tuple[PathVector, float]:
    """Path maximising |<weights, a>|: one longest and one shortest path."""
    hi, hi_val = extremal_path(net, weights, Sense.MAX)
    lo, lo_val = extremal_path(net, weights, Sense.MIN)
    if abs(lo_val) > abs(hi_val):
        return lo, lo_val
    return hi, hi_val


def _is_replacement(cof: np.ndarray, a: np.ndarray, value: float) -> bool:
    scale = np.linalg.norm(cof) * np.linalg.norm(a)
    return scale > 0 and abs(value) > REPLACE_TOL * scale


def general_basis(net: Network) -> Basis:
    """Greedy basis of the path set, valid when paths do not span R^d.

    Starting from the identity, each step replaces one remaining unit column
    by a path that keeps the matrix nonsingular, scanning columns left to
    right; the new path is placed first.  It stops when no unit column can
    be replaced.  ``S`` is filled in by :func:`compute_S`.
    """
    d = net.d
    c = np.eye(d)
    u = 0
    flag = True
    while u <= d - 1 and flag:
        adj = _adjugate(c)
        for j in range(u, d):
            cof = adj[j]
            a, val = _best_abs(net, cof)
            if _is_replacement(cof, a.coords, val):
                c = np.column_stack([a.coords, np.delete(c, j, axis=1)])
                u += 1
                break
            if j == d - 1:
                flag = False
    # columns 0..u-1 are paths, newest first
    paths = [net.path_from_coords(c[:, i]) for i in range(u)]
    basis = Basis(paths, 1.0, c)
    basis.S = compute_S(basis, net)
    return basis


def _adjugate(c: np.ndarray) -> np.ndarray:
    """Row j is the cofactor vector of column j (adj(C) = det(C) inv(C))."""
    if not linalg.is_nonsingular(c):
        raise SingularMatrix("completion matrix is numerically singular")
    return linalg.det(c) * np.linalg.inv(c)


def compute_S(basis: Basis, net: Network) -> float:
    """Largest |coefficient| any path needs when written in the basis.

    For each basis column j, ``max_a |det(C with column j := a)| / |det C|``
    equals the largest |nu_{a,j}|; it is found with two extremal-path calls
    on the scaled cofactor weights.
    """
    c = basis.completion
    if not linalg.is_nonsingular(c):
        raise SingularMatrix("basis completion is singular")
    inv = np.linalg.inv(c)
    best = 0.0
    for j in range(basis.d0):
        _, val = _best_abs(net, inv[j])
        best = max(best, abs(val))
    return best


def coefficients(basis: Basis, a) -> Coefficients:
    """Least-squares coordinates of a path in the basis, with residual norm."""
    vec = a.coords if isinstance(a, PathVector) else np.asarray(a, dtype=float)
    b = basis.matrix
    nu, *_ = np.linalg.lstsq(b, vec, rcond=None)
    return Coefficients(nu, float(np.linalg.norm(b @ nu - vec)))


# -- barycentric spanner for action sets spanning R^d --------------------------

Oracle = Callable[[np.ndarray], tuple[np.ndarray, float]]


@dataclass
class SpannerResult:
    columns: np.ndarray
    swaps: int


def spanner_columns(best_abs: Oracle, d: int, S: float = 2.0,
                    max_swaps: int | None = None) -> SpannerResult:
    """S-approximate barycentric spanner for an action set spanning R^d.

    ``best_abs(w)`` must return an action maximising |<w, a>| and that inner
    product.  The first pass fills each column with the action of largest
    |det|; the second swaps in any action whose determinant beats the
    current one by more than a factor S, until none does.
    """
    if S <= 1:
        raise ValueError("S must exceed 1")
    b = np.eye(d)
    for j in range(d):
        cof = _adjugate(b)[j]
        a, val = best_abs(cof)
        if not _is_replacement(cof, a, val):
            raise NotIdentifiable(f"no action has a component along column {j}")
        b[:, j] = a
    swaps = 0
    while True:
        inv = np.linalg.inv(b)
        for j in range(d):
            a, val = best_abs(inv[j])
            # |det(a, B(:,-j))| / |det B| is |<inv[j], a>|
            if abs(val) > S * (1.0 + COEF_TOL):
                b[:, j] = a
                swaps += 1
                break
        else:
            return SpannerResult(b, swaps)
        if max_swaps is not None and swaps > max_swaps:
            raise RuntimeError(f"spanner did not converge in {max_swaps} swaps")


def barycentric_spanner(net: Network, S: float = 2.0) -> Basis:
    """S-approximate barycentric spanner of an identifiable network's paths.

    Raises:
        NotIdentifiable: the paths do not span R^d.
    """
    def best_abs(w):
        a, val = _best_abs(net, w)
        return a.coords, val

    res = spanner_columns(best_abs, net.d, S)
    log.debug("barycentric spanner: %d swaps", res.swaps)
    paths = [net.path_from_coords(res.columns[:, i]) for i in range(net.d)]
    return Basis(paths, float(S), res.columns.copy())


def finite_set_oracle(actions: Sequence[np.ndarray]) -> Oracle:
    """|<w, a>| maximiser over an explicit finite action list (first on ties)."""
    mat = np.asarray(actions, dtype=float)

    def best_abs(w):
        vals = mat @ w
        k = int(np.argmax(np.abs(vals)))
        return mat[k], float(vals[k])

    return best_abs


def exploration_basis(net: Network) -> Basis:
    """Basis used by the routing policies.

    Networks whose paths span R^d get a 2-approximate barycentric spanner;
    all others get the greedy basis with its exact S.
    """
    basis = general_basis(net)
    if basis.d0 == net.d:
        return barycentric_spanner(net, 2.0)
    return basis
