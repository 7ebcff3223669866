"""Padé approximants and Shanks acceleration of the boundary-scattering series."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import linalg

from .errors import DegenerateApproximantError


class Convention(enum.Enum):
    DIRICHLET = "dirichlet"  # c_n = (-1)^{n+1} x (boundary integral of H_{n+1}), series in lambda
    GENERAL_POTENTIAL = "general-potential"  # C_p, evaluated at lambda = 1


@dataclass(frozen=True)
class CoefficientSeries:
    values: tuple[float, ...]
    convention: Convention = Convention.DIRICHLET
    metadata: dict = field(default_factory=dict, compare=False)

    def __init__(self, values: Sequence[float], convention: Convention = Convention.DIRICHLET, metadata=None):
        vals = tuple(float(v) for v in values)
        if len(vals) < 1:
            raise ValueError("empty coefficient series")
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite coefficient in {vals}")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "convention", Convention(convention))
        object.__setattr__(self, "metadata", dict(metadata or {}))

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def padded(self, length: int) -> np.ndarray:
        c = np.zeros(max(length, len(self.values)))
        c[: len(self.values)] = self.values
        return c


def _coeffs(c) -> np.ndarray:
    return np.asarray(c.values if isinstance(c, CoefficientSeries) else c, dtype=float)


@dataclass(frozen=True)
class ResummationResult:
    T: float
    P11: float
    P22: float
    P33: float
    S1: float
    S2: float
    eps: float
    exact: float | None = None


def _solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    if A.size == 0:
        return np.zeros(0)
    try:
        with warnings.catch_warnings():
            # an exactly singular system is reported below as a typed error
            warnings.simplefilter("ignore", linalg.LinAlgWarning)
            lu, piv = linalg.lu_factor(A, check_finite=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise DegenerateApproximantError(str(exc)) from exc
    d = np.abs(np.diag(lu))
    if np.min(d) <= 1e-14 * max(np.max(d), 1e-300):
        raise DegenerateApproximantError("singular Padé denominator system")
    return linalg.lu_solve((lu, piv), b)


def pade_coefficients(M: int, N: int, c) -> tuple[np.ndarray, np.ndarray]:
    """Numerator a_0..a_M and denominator b_0 = 1, b_1..b_N of the [M/N] approximant."""
    c = _coeffs(c)
    if M < 0 or N < 0:
        raise ValueError("M and N must be >= 0")
    if len(c) < M + N + 1:
        raise ValueError(f"[{M}/{N}] needs {M + N + 1} coefficients, got {len(c)}")
    get = lambda k: c[k] if k >= 0 else 0.0
    # sum_{j=1}^N b_j c_{k-j} = -c_k for k = M+1..M+N
    A = np.array([[get(k - j) for j in range(1, N + 1)] for k in range(M + 1, M + N + 1)]).reshape(N, N)
    rhs = -np.array([get(k) for k in range(M + 1, M + N + 1)])
    b = np.concatenate([[1.0], _solve(A, rhs)])
    a = np.array([sum(b[j] * get(k - j) for j in range(0, min(k, N) + 1)) for k in range(M + 1)])
    return a, b


def pade(M: int, N: int, c, x: float) -> float:
    a, b = pade_coefficients(M, N, c)
    num = np.polynomial.polynomial.polyval(x, a)
    den = np.polynomial.polynomial.polyval(x, b)
    if den == 0:
        raise DegenerateApproximantError(f"[{M}/{N}] has a pole at x={x}")
    return float(num / den)


def _strong_coupling_linear(c: np.ndarray, N: int) -> float:
    # lambda * [N-1/N](lambda) -> a_{N-1} / b_N as lambda -> infinity
    a, b = pade_coefficients(N - 1, N, c)
    if b[N] == 0:
        raise DegenerateApproximantError("leading denominator coefficient vanishes")
    return float(a[N - 1] / b[N])


def strong_coupling_determinant(c, N: int) -> float:
    """lim lambda P_N^N as a quotient of determinants (Cramer's rule); cross-check only.

    With A_{kj} = c_{k-j} (k = N..2N-1, j = 1..N) and A_j the matrix A whose
    column j is replaced by -c_k, b_j = det A_j / det A and the limit is
    (det A c_{N-1} + sum_{j<N} det A_j c_{N-1-j}) / det A_N.
    """
    c = np.concatenate([_coeffs(c), np.zeros(2 * N)])[: 2 * N]
    get = lambda k: c[k] if k >= 0 else 0.0
    A = np.array([[get(k - j) for j in range(1, N + 1)] for k in range(N, 2 * N)])
    rhs = -np.array([get(k) for k in range(N, 2 * N)])

    def det_j(j):
        Aj = A.copy()
        Aj[:, j - 1] = rhs
        return np.linalg.det(Aj)

    den = det_j(N)
    if den == 0:
        raise DegenerateApproximantError("zero denominator determinant")
    num = np.linalg.det(A) * get(N - 1) + sum(det_j(j) * get(N - 1 - j) for j in range(1, N))
    return float(num / den)


def padeexplicit(c, N: int) -> float:
    """Closed expressions of lim lambda P_N^N in terms of c_0..c_3 for N = 1, 2, 3."""
    c0, c1, c2, c3 = (list(map(float, _coeffs(c))) + [0.0] * 4)[:4]
    if N == 1:
        num, den = -(c0**2), c1
    elif N == 2:
        num, den = c1**3 + c0**2 * c3 - 2 * c0 * c1 * c2, c2**2 - c1 * c3
    elif N == 3:
        num, den = -(c2**4 - 3 * c1 * c2**2 * c3 + c1**2 * c3**2 + 2 * c0 * c2 * c3**2), c3**3
    else:
        raise ValueError(f"explicit form available for N <= 3, got {N}")
    if den == 0:
        raise DegenerateApproximantError(f"P{N}{N} denominator vanishes")
    return num / den


def diagonal_pade_strong_coupling(c, N: int, method: str = "auto") -> float:
    """lim_{lambda -> inf} P_N^N(lambda) of the Dirichlet scattering series.

    The explicit N <= 3 expressions use c_0..c_3 only, which coincides with the
    general formula when the unknown c_4, c_5 are set to zero; the linear
    route pads the series the same way.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    vals = _coeffs(c)
    if method == "auto":
        method = "explicit" if N <= 3 else "linear"
    if method == "explicit":
        return float(padeexplicit(vals, N))
    padded = np.concatenate([vals, np.zeros(max(0, 2 * N - len(vals)))])
    if method == "linear":
        return _strong_coupling_linear(padded, N)
    if method == "determinant":
        return strong_coupling_determinant(padded, N)
    raise ValueError(f"unknown method {method!r}")


def kv_pade(C, N: int) -> float:
    """Diagonal [N/N] approximant of sum_p C_p lambda^p evaluated at lambda = 1.

    A series that terminates within the first N+1 terms (numerically a
    polynomial) is returned as its partial sum, which is its own Padé limit.
    """
    vals = _coeffs(C)
    if len(vals) < 2 * N + 1:
        raise ValueError(f"[{N}/{N}] needs {2 * N + 1} coefficients, got {len(vals)}")
    tail = vals[N + 1 : 2 * N + 1]
    if np.all(tail == 0.0):
        return float(np.sum(vals[: N + 1]))
    return pade(N, N, vals, 1.0)


def shanks(a: Sequence[float]) -> np.ndarray:
    """S(a_n) = (a_{n+1} a_{n-1} - a_n^2) / (a_{n+1} + a_{n-1} - 2 a_n)."""
    a = np.asarray(a, dtype=float)
    if a.size < 3:
        raise ValueError("Shanks needs at least three terms")
    lo, mid, hi = a[:-2], a[1:-1], a[2:]
    den = hi + lo - 2.0 * mid
    if np.any(den == 0):
        raise DegenerateApproximantError("zero second difference in Shanks transform")
    # difference form is less prone to cancellation than the textbook quotient
    return hi - (hi - mid) ** 2 / den


def shanks_s1_s2(p11: float, p22: float, p33: float) -> tuple[float, float]:
    """S1 = Shanks(P11, P22, P33) and S2 = Shanks(P11, P22, S1).

    S2 reuses the first two approximants with S1 in the third slot,
    S2 = (S1 P11 - P22^2) / (S1 + P11 - 2 P22).
    """
    s1 = float(shanks([p11, p22, p33])[0])
    den = s1 + p11 - 2.0 * p22
    if den == 0:
        raise DegenerateApproximantError("zero denominator in S2")
    s2 = (s1 * p11 - p22**2) / den
    return s1, float(s2)


def s2_additive(p11: float, p22: float, s1: float) -> float:
    """(S1 + P11 - P22^2) / (S1 + P11 - 2 P22); dimensionally inconsistent, kept for comparison."""
    den = s1 + p11 - 2.0 * p22
    if den == 0:
        raise DegenerateApproximantError("zero denominator")
    return (s1 + p11 - p22**2) / den


def leibniz_error(s1: float, s2: float) -> float:
    if s2 == 0:
        raise DegenerateApproximantError("S2 = 0, relative error undefined")
    return abs(s2 - s1) / abs(s2)


def resum_series(c, T: float, exact: float | None = None) -> ResummationResult:
    """Full per-T pipeline: P11, P22, P33, S1, S2 and the Leibniz estimate."""
    p = [diagonal_pade_strong_coupling(c, N) for N in (1, 2, 3)]
    s1, s2 = shanks_s1_s2(*p)
    return ResummationResult(T, p[0], p[1], p[2], s1, s2, leibniz_error(s1, s2), exact)
