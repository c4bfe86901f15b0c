"""Dense matrix kernels: determinants, cofactor vectors, solves, pseudo-inverses.

All tolerances are module constants.
"""

import warnings

import numpy as np
import scipy.linalg

from .errors import SingularMatrix

EPS_DET = 1e-9
PINV_RTOL = 1e-10
SOLVE_RTOL = 1e-8


def _square(m):
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
    return m


def det(m) -> float:
    """Determinant via LU factorisation with partial pivoting; 0.0 if singular."""
    m = _square(m)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(m, check_finite=True)
    diag = np.diag(lu)
    if np.any(diag == 0.0):
        return 0.0
    swaps = np.count_nonzero(piv != np.arange(len(piv)))
    sign = -1.0 if swaps % 2 else 1.0
    return float(sign * np.prod(diag))


def is_nonsingular(m) -> bool:
    """Scale-free nonsingularity test: smallest singular value > EPS_DET * largest.

    Comparing |det| against the product of column norms is also scale-free,
    but that bound grows exponentially with size while unimodular 0/1 path
    matrices keep |det| = 1, so it misclassifies them from d ~ 70 on.
    """
    m = _square(m)
    if not np.all(np.isfinite(m)):
        return False
    sv = np.linalg.svd(m, compute_uv=False)
    return bool(sv[0] > 0 and sv[-1] > EPS_DET * sv[0])


def cofactor_vector(c, j: int) -> np.ndarray:
    """Entries ``(-1)**(i+j) * det(C without row i, column j)`` for every i.

    Uses the adjugate identity ``adj(C) = det(C) C^{-1}``, so entry i is
    ``det(C) * inv(C)[j, i]``.  Raises :class:`SingularMatrix` when C fails
    :func:`is_nonsingular`; :func:`cofactor_vector_minors` covers that case.
    """
    c = _square(c)
    if not is_nonsingular(c):
        raise SingularMatrix("cofactor shortcut needs a nonsingular matrix")
    e = np.zeros(c.shape[0])
    e[j] = 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        out = det(c) * scipy.linalg.solve(c.T, e)
    if not np.all(np.isfinite(out)):
        # inverse overflowed (extreme scaling); the minors are still finite
        return cofactor_vector_minors(c, j)
    return out


def cofactor_vector_minors(c, j: int) -> np.ndarray:
    """Cofactor vector from d separate minor determinants (works when singular)."""
    c = _square(c)
    n = c.shape[0]
    if n == 1:
        return np.ones(1)
    out = np.empty(n)
    keep_cols = [k for k in range(n) if k != j]
    for i in range(n):
        keep_rows = [k for k in range(n) if k != i]
        out[i] = (-1) ** (i + j) * det(c[np.ix_(keep_rows, keep_cols)])
    return out


def solve(m, b) -> np.ndarray:
    m = _square(m)
    b = np.asarray(b, dtype=np.float64)
    try:
        x = scipy.linalg.solve(m, b)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise SingularMatrix(str(exc)) from None
    if np.linalg.norm(m @ x - b) > SOLVE_RTOL * (1.0 + np.linalg.norm(b)):
        raise SingularMatrix("solve residual too large; matrix numerically singular")
    return x


def pinv(m, rel_tol: float = PINV_RTOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse keeping singular values >= rel_tol * max."""
    if not 0.0 < rel_tol < 1.0:
        raise ValueError("rel_tol must lie in (0, 1)")
    m = np.asarray(m, dtype=np.float64)
    return np.linalg.pinv(m, rcond=rel_tol)
