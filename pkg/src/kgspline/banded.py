"""Banded matrix storage, LU factorization without pivoting, and a dense
reference solver used to cross-check it.

Storage is diagonal-major: entry (i, j) of an n-by-n matrix with kl sub-
and ku superdiagonals lives at

    bands[ku + i - j, j]

so each row of ``bands`` is one diagonal and the elimination loops run at
unit stride.  The collocation matrices assembled elsewhere in this package
are strongly diagonally dominant through their 2/dt terms, which is what
justifies factoring without row exchanges (a banded generalization of the
Thomas tridiagonal sweep): no fill-in appears outside the band.  The
factorization still measures its growth factor -- largest magnitude
produced during elimination over largest initial magnitude -- so a caller
can detect the assumption breaking down instead of silently absorbing the
rounding damage.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import BandwidthError, InvalidParameterError, SingularMatrixError

# Pivots smaller than this in magnitude are treated as exact zeros.
_PIVOT_FLOOR = 1e-300

# Factorizations whose growth factor exceeds this are suspect; callers that
# care (the time stepper does) compare against it and warn.
GROWTH_LIMIT = 1e3


@dataclass
class BandedMatrix:
    """n-by-n matrix holding only kl sub- and ku superdiagonals."""

    n: int
    kl: int
    ku: int
    bands: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameterError(f"matrix order must be >= 1, got {self.n}")
        if not (0 <= self.kl < self.n and 0 <= self.ku < self.n):
            raise InvalidParameterError(
                f"bandwidths must satisfy 0 <= kl, ku < n; "
                f"got kl={self.kl}, ku={self.ku}, n={self.n}"
            )
        if self.bands is None:
            self.bands = np.zeros((self.kl + self.ku + 1, self.n))
        else:
            expected = (self.kl + self.ku + 1, self.n)
            if self.bands.shape != expected:
                raise InvalidParameterError(
                    f"band array shape {self.bands.shape} != {expected}"
                )

    def _offset(self, i: int, j: int) -> int:
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise BandwidthError(f"index ({i}, {j}) outside {self.n}x{self.n} matrix")
        if j - i > self.ku or i - j > self.kl:
            raise BandwidthError(
                f"entry ({i}, {j}) lies outside the stored band "
                f"(kl={self.kl}, ku={self.ku})"
            )
        return self.ku + i - j

    def set(self, i: int, j: int, value: float) -> None:
        self.bands[self._offset(i, j), j] = value

    def add(self, i: int, j: int, value: float) -> None:
        self.bands[self._offset(i, j), j] += value

    def get(self, i: int, j: int) -> float:
        # Entries outside the band are structural zeros, not errors.
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise BandwidthError(f"index ({i}, {j}) outside {self.n}x{self.n} matrix")
        if j - i > self.ku or i - j > self.kl:
            return 0.0
        return float(self.bands[self.ku + i - j, j])

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        for j in range(self.n):
            lo = max(0, j - self.ku)
            hi = min(self.n, j + self.kl + 1)
            for i in range(lo, hi):
                out[i, j] = self.bands[self.ku + i - j, j]
        return out


def make_banded(n: int, kl: int, ku: int) -> BandedMatrix:
    """Zero-initialized band container (validation in the constructor)."""
    return BandedMatrix(n=n, kl=kl, ku=ku)


@njit(cache=True)
def _factor_inplace(bands, n, kl, ku):  # pragma: no cover - exercised via BandedLU
    """Unpivoted banded LU, overwriting ``bands`` with the factors.

    Multipliers land where the eliminated entries were.  Returns
    (fail_index, growth): fail_index is -1 on success or the column whose
    pivot underflowed; growth is the largest magnitude seen during
    elimination divided by the largest initial magnitude.
    """
    initial_max = 0.0
    for r in range(bands.shape[0]):
        for c in range(n):
            v = abs(bands[r, c])
            if v > initial_max:
                initial_max = v
    peak = initial_max
    for k in range(n - 1):
        pivot = bands[ku, k]
        if abs(pivot) < _PIVOT_FLOOR:
            return k, 0.0
        i_hi = min(n - 1, k + kl)
        j_hi = min(n - 1, k + ku)
        for i in range(k + 1, i_hi + 1):
            mult = bands[ku + i - k, k] / pivot
            bands[ku + i - k, k] = mult
            av = abs(mult)
            if av > peak:
                peak = av
            for j in range(k + 1, j_hi + 1):
                bands[ku + i - j, j] -= mult * bands[ku + k - j, j]
                av = abs(bands[ku + i - j, j])
                if av > peak:
                    peak = av
    if abs(bands[ku, n - 1]) < _PIVOT_FLOOR:
        return n - 1, 0.0
    growth = peak / initial_max if initial_max > 0.0 else 1.0
    return -1, growth


@njit(cache=True)
def _solve_inplace(bands, n, kl, ku, x):  # pragma: no cover
    """Forward/back substitution against factors from _factor_inplace."""
    for k in range(n - 1):
        i_hi = min(n - 1, k + kl)
        for i in range(k + 1, i_hi + 1):
            x[i] -= bands[ku + i - k, k] * x[k]
    for i in range(n - 1, -1, -1):
        j_hi = min(n - 1, i + ku)
        acc = x[i]
        for j in range(i + 1, j_hi + 1):
            acc -= bands[ku + i - j, j] * x[j]
        x[i] = acc / bands[ku, i]


class BandedLU:
    """LU factors of a BandedMatrix, reusable across right-hand sides.

    ``factors`` holds U on and above the diagonal and the elimination
    multipliers (unit-diagonal L) below it, in the same band layout as the
    source matrix, which stays intact.  ``growth_factor`` is set by the
    factorization.
    """

    def __init__(self, mat: BandedMatrix):
        self.n = mat.n
        self.kl = mat.kl
        self.ku = mat.ku
        self.factors = mat.bands.copy()
        fail, growth = _factor_inplace(self.factors, self.n, self.kl, self.ku)
        if fail >= 0:
            raise SingularMatrixError(fail, float(self.factors[self.ku, fail]))
        self.growth_factor = float(growth)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape != (self.n,):
            raise InvalidParameterError(
                f"right-hand side shape {rhs.shape} != ({self.n},)"
            )
        x = rhs.copy()
        _solve_inplace(self.factors, self.n, self.kl, self.ku, x)
        return x


def lu_factor(mat: BandedMatrix) -> BandedLU:
    """Factor a banded matrix; raises SingularMatrixError on a dead pivot."""
    return BandedLU(mat)


def solve(lu: BandedLU, rhs: np.ndarray) -> np.ndarray:
    """Solve against an existing factorization."""
    return lu.solve(rhs)


def solve_dense_oracle(a: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Reference solver: dense Gaussian elimination with partial pivoting.

    Deliberately written out longhand (no library solve) so the banded path
    above is checked against independent arithmetic, not against a shared
    implementation.
    """
    a = np.array(a, dtype=float)
    b = np.array(rhs, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or b.shape != (n,):
        raise InvalidParameterError(
            f"shape mismatch: matrix {a.shape}, right-hand side {b.shape}"
        )
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) < _PIVOT_FLOOR:
            raise SingularMatrixError(k, float(a[p, k]))
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
        for i in range(k + 1, n):
            m = a[i, k] / a[k, k]
            if m != 0.0:
                a[i, k + 1:] -= m * a[k, k + 1:]
                b[i] -= m * b[k]
            a[i, k] = 0.0
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - a[i, i + 1:] @ x[i + 1:]) / a[i, i]
    return x
