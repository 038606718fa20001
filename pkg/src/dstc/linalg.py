"""Dense linear-algebra kernel shared by the transmit and receive chains.

Everything works on plain float64 ndarrays. Conventions that the rest of the
package relies on:

* ``vec``/``unvec`` are column-major, so ``vec(h @ s.T) == kronecker(s, h)``
  for column vectors ``h`` and ``s``.
* ``khatri_rao`` is the column-wise Kronecker product.
* ``hadamard`` returns an integer matrix whose first column is all ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

# Relative cutoff for pseudoinverse truncation: sigma <= PINV_RTOL * max_dim * sigma_max.
PINV_RTOL = 1e-12

# Brute-force k-rank search is exponential in the column count; refuse beyond this.
KRUSKAL_GUARD = 14

DEFAULT_RANK_TOL = 1e-9


class HadamardOrderError(ValueError):
    """No supported Hadamard construction exists for the requested order."""


class SizeLimitError(ValueError):
    """Combinatorial search refused because the input is too wide."""


class DegenerateInputError(ValueError):
    """The input carries no usable signal (for example an all-zero matrix)."""


def _as_matrix(m, name: str = "matrix") -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def kronecker(a, b) -> np.ndarray:
    """Kronecker product of two matrices."""
    return np.kron(_as_matrix(a, "a"), _as_matrix(b, "b"))


def khatri_rao(a, b) -> np.ndarray:
    """Column-wise Kronecker product.

    Column ``r`` of the result is ``kron(a[:, r], b[:, r])``; the factors must
    have the same number of columns.
    """
    a = _as_matrix(a, "a")
    b = _as_matrix(b, "b")
    if a.shape[1] != b.shape[1]:
        raise ValueError(
            f"column-count mismatch: {a.shape[1]} vs {b.shape[1]}"
        )
    return (a[:, None, :] * b[None, :, :]).reshape(a.shape[0] * b.shape[0], a.shape[1])


def vec(m) -> np.ndarray:
    """Stack the columns of a matrix into one vector (column-major)."""
    return _as_matrix(m).reshape(-1, order="F")


def unvec(v, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec` for the given target shape."""
    a = np.asarray(v, dtype=float).reshape(-1)
    if not np.all(np.isfinite(a)):
        raise ValueError("vector contains non-finite entries")
    if a.size != rows * cols:
        raise ValueError(f"cannot reshape {a.size} entries into {rows}x{cols}")
    return a.reshape(rows, cols, order="F")


def pseudoinverse(m) -> np.ndarray:
    """Moore-Penrose pseudoinverse with relative singular-value truncation.

    Singular values at or below ``PINV_RTOL * max(m.shape) * sigma_max`` are
    treated as zero, so rank-deficient inputs are handled gracefully.
    """
    a = _as_matrix(m)
    return np.linalg.pinv(a, rcond=PINV_RTOL * max(a.shape))


@dataclass(frozen=True)
class SingularTriplet:
    """Leading singular value with its unit left/right singular vectors."""

    sigma: float
    u: np.ndarray
    v: np.ndarray


def leading_singular_triplet(m) -> SingularTriplet:
    """Dominant singular triplet of a nonzero matrix.

    The sign is fixed so that the first entry of ``u`` with magnitude above
    1e-12 is nonnegative, which makes the result deterministic.
    """
    a = _as_matrix(m)
    if not a.any():
        raise DegenerateInputError("all-zero matrix has no leading singular direction")
    u_full, s, vt = np.linalg.svd(a)
    u = u_full[:, 0].copy()
    v = vt[0].copy()
    nz = np.flatnonzero(np.abs(u) > 1e-12)
    if nz.size and u[nz[0]] < 0:
        u = -u
        v = -v
    return SingularTriplet(float(s[0]), u, v)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    p = 2
    while p * p <= n:
        if n % p == 0:
            return False
        p += 1
    return True


def _hadamard_supported(order: int) -> bool:
    if order in (1, 2):
        return True
    if order < 1 or order % 4 != 0:
        return False
    if order & (order - 1) == 0:
        return True
    if _is_prime(order - 1) and (order - 1) % 4 == 3:
        return True
    return order % 2 == 0 and _hadamard_supported(order // 2)


def _paley_type1(order: int) -> np.ndarray:
    # Quadratic-residue (Jacobsthal) core; q = order-1 is a prime = 3 (mod 4),
    # so the core is skew and identity-plus-core is a Hadamard matrix.
    q = order - 1
    chi = np.full(q, -1, dtype=np.int64)
    chi[0] = 0
    chi[list({(i * i) % q for i in range(1, q)})] = 1
    diff = (np.arange(q)[None, :] - np.arange(q)[:, None]) % q
    h = np.ones((order, order), dtype=np.int64)
    h[1:, 0] = -1
    h[1:, 1:] = chi[diff] + np.eye(q, dtype=np.int64)
    # Negate rows that start with -1 so the first column is all ones.
    h[h[:, 0] == -1] *= -1
    return h


def hadamard(order: int) -> np.ndarray:
    """Hadamard matrix of the given order with an all-ones first column.

    Supported orders: 1, 2, powers of two (Sylvester doubling), ``q + 1`` for
    a prime ``q = 3 (mod 4)`` (Paley), and any product of supported orders
    reachable by doubling.  Entries are int64 and ``h @ h.T == order * I``
    holds exactly.
    """
    if not isinstance(order, (int, np.integer)) or order < 1:
        raise HadamardOrderError(f"order must be a positive integer, got {order!r}")
    order = int(order)
    if order == 1:
        return np.array([[1]], dtype=np.int64)
    if order == 2:
        return np.array([[1, 1], [1, -1]], dtype=np.int64)
    if order % 4 != 0:
        raise HadamardOrderError(
            f"no Hadamard matrix of order {order}: order must be 1, 2, or a multiple of 4"
        )
    if order & (order - 1) == 0:
        return np.kron(hadamard(2), hadamard(order // 2))
    if _is_prime(order - 1) and (order - 1) % 4 == 3:
        return _paley_type1(order)
    if order % 2 == 0 and _hadamard_supported(order // 2):
        return np.kron(hadamard(2), hadamard(order // 2))
    raise HadamardOrderError(
        f"no construction available for order {order}; supported orders are 1, 2, "
        "powers of two (Sylvester), q+1 for prime q = 3 (mod 4) (Paley), and "
        "products of supported orders by doubling"
    )


def kruskal_rank(m, tol: float = DEFAULT_RANK_TOL) -> int:
    """Largest k such that every set of k columns is linearly independent.

    A subset counts as independent when its smallest singular value exceeds
    ``tol`` times its largest.  If the full matrix already passes that test,
    every column subset does too (dropping columns can only raise sigma_min
    and lower sigma_max), so the answer is the column count without any
    search.  Otherwise the subsets are enumerated, which is only allowed up
    to ``KRUSKAL_GUARD`` columns.
    """
    a = _as_matrix(m)
    rows, cols = a.shape
    if cols <= rows:
        s = np.linalg.svd(a, compute_uv=False)
        if s[0] > 0 and s[-1] > tol * s[0]:
            return cols
    if cols > KRUSKAL_GUARD:
        raise SizeLimitError(
            f"brute-force k-rank needs <= {KRUSKAL_GUARD} columns, got {cols} "
            "(and the matrix is not full column rank)"
        )
    best = 0
    for size in range(1, min(rows, cols) + 1):
        for idx in combinations(range(cols), size):
            s = np.linalg.svd(a[:, idx], compute_uv=False)
            if not s[-1] > tol * s[0]:
                return best
        best = size
    return best
