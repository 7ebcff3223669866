"""Special functions used by the closed forms and the exact references.

erfc, K0, j_l and P_l come from scipy.special; the iterated erfc integrals,
the spherical Bessel zeros and the complex Hermite polynomials are built here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import optimize, special

from .errors import RootFindingError

_SQRT_PI = math.sqrt(math.pi)

# Above this argument the forward recursion for i^n erfc loses digits to
# cancellation, so each order is integrated directly instead.
_INERFC_SWITCH = 1.5
_LAGUERRE_NODES = 48


def erfc(z):
    return special.erfc(z)


def erfcx(z):
    """Scaled complement e^{z^2} erfc(z)."""
    return special.erfcx(z)


@lru_cache(maxsize=64)
def _genlaguerre(order: int):
    return special.roots_genlaguerre(_LAGUERRE_NODES, order)


def _inerfc_large(n: int, z: np.ndarray) -> np.ndarray:
    # i^n erfc(z) = 2/sqrt(pi) e^{-z^2} / (n! (2z)^{n+1}) * int_0^inf u^n e^{-u} e^{-u^2/4z^2} du
    if n == -1:
        return 2.0 / _SQRT_PI * np.exp(-z * z)
    if n == 0:
        return special.erfc(z)
    u, w = _genlaguerre(n)
    integral = np.exp(-(u[None, :] ** 2) / (4.0 * z[:, None] ** 2)) @ w
    log_pref = -z * z - math.lgamma(n + 1) - (n + 1) * np.log(2.0 * z)
    return 2.0 / _SQRT_PI * np.exp(log_pref) * integral


def inerfc(n: int, z):
    """n-fold iterated integral of erfc, i^n erfc(z) = int_z^inf i^{n-1} erfc(t) dt.

    i^{-1} erfc(z) = 2 e^{-z^2}/sqrt(pi) and i^0 erfc = erfc.  Orders obey
    2n i^n + 2z i^{n-1} - i^{n-2} = 0.
    """
    n = int(n)
    if n < -1:
        raise ValueError(f"inerfc needs n >= -1, got {n}")
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z)

    small = z <= _INERFC_SWITCH
    if small.any():
        zs = z[small]
        prev = 2.0 / _SQRT_PI * np.exp(-zs * zs)
        cur = special.erfc(zs)
        if n == -1:
            cur = prev
        for k in range(1, n + 1):
            prev, cur = cur, (prev - 2.0 * zs * cur) / (2.0 * k)
        out[small] = cur
    if (~small).any():
        out[~small] = _inerfc_large(n, z[~small])
    return out[0] if scalar else out


def bessel_k0(x):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("bessel_k0 needs x > 0")
    v = special.k0(x)
    return v[()] if v.ndim == 0 else v


def bessel_k0e(x):
    """e^x K0(x), finite for large x."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("bessel_k0e needs x > 0")
    v = special.k0e(x)
    return v[()] if v.ndim == 0 else v


def spherical_bessel_j(l: int, x):
    if l < 0:
        raise ValueError(f"order must be >= 0, got {l}")
    v = special.spherical_jn(int(l), np.asarray(x, dtype=float))
    return v[()] if np.ndim(v) == 0 else v


@dataclass
class BesselZeroTable:
    """Lazily filled table u[l, k] of the positive zeros of j_l."""

    xtol: float = 1e-12
    entries: dict[tuple[int, int], float] = field(default_factory=dict)

    def __call__(self, l: int, k: int) -> float:
        return self.zero(l, k)

    def zero(self, l: int, k: int) -> float:
        if l < 0 or k < 1:
            raise ValueError(f"need l >= 0 and k >= 1, got ({l}, {k})")
        key = (l, k)
        if key not in self.entries:
            self.entries[key] = self._find(l, k)
        return self.entries[key]

    def _find(self, l: int, k: int) -> float:
        if l == 0:
            return k * math.pi
        # interlacing: u_{l-1,k} < u_{l,k} < u_{l-1,k+1}
        a, b = self.zero(l - 1, k), self.zero(l - 1, k + 1)
        f = lambda x: special.spherical_jn(l, x)
        fa, fb = f(a), f(b)
        if fa * fb > 0:
            raise RootFindingError(f"no sign change for j_{l} on [{a}, {b}]")
        try:
            return optimize.brentq(f, a, b, xtol=self.xtol, rtol=4 * np.finfo(float).eps)
        except (ValueError, RuntimeError) as exc:
            raise RootFindingError(f"root of j_{l} #{k} not found: {exc}") from exc

    def zeros(self, l_max: int, k_max: int) -> np.ndarray:
        return np.array([[self.zero(l, k) for k in range(1, k_max + 1)] for l in range(l_max + 1)])


_TABLE = BesselZeroTable()


def bessel_zero(l: int, k: int) -> float:
    """k-th positive zero of the spherical Bessel function j_l."""
    return _TABLE.zero(l, k)


def legendre_p(l: int, x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + 1e-14):
        raise ValueError("legendre_p needs |x| <= 1")
    v = special.eval_legendre(int(l), np.clip(x, -1.0, 1.0))
    return v[()] if np.ndim(v) == 0 else v


def hermite_h(n: int, z):
    """Physicists' Hermite polynomial H_n at (possibly complex) z, by recurrence."""
    if n < 0:
        raise ValueError(f"hermite_h needs n >= 0, got {n}")
    z = np.asarray(z, dtype=complex)
    h_prev, h = np.ones_like(z), 2.0 * z
    if n == 0:
        return h_prev[()] if z.ndim == 0 else h_prev
    for k in range(1, n):
        h_prev, h = h, 2.0 * z * h - 2.0 * k * h_prev
    return h[()] if z.ndim == 0 else h
