"""Free kernel and n-hit functions of the free propagator (m = 1/2).

Point-based entry points take a ``HitQuery``.  The shift operators act on
"functional forms": callables ``f(deltas, T)`` where ``deltas`` is a sequence
of the n+1 segment lengths (scalars or broadcastable arrays).  This mirrors
the fact that the dimension and order shifts are relations between functions
of the Delta_i, not between values at fixed points.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

from . import specfun
from .errors import DimensionMismatchError, QuadratureError, SingularConfigurationError
from .geometry import PolygonalPath, as_point

Form = Callable[[Sequence, float], np.ndarray]

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class HitQuery:
    path: PolygonalPath
    T: float

    def __post_init__(self):
        if not math.isfinite(self.T):
            raise ValueError("T must be finite")

    @property
    def n(self) -> int:
        return self.path.order

    @property
    def dim(self) -> int:
        return self.path.dim

    def deltas(self) -> list[float]:
        return self.path.segment_lengths()


def free_kernel_r(r, tau, D: int):
    """(4 pi tau)^{-D/2} exp(-r^2 / 4 tau) as a function of the distance r."""
    r = np.asarray(r, dtype=float)
    tau = np.asarray(tau, dtype=float)
    pos = tau > 0
    t = np.where(pos, tau, 1.0)
    val = np.where(pos, (FOUR_PI * t) ** (-D / 2.0) * np.exp(-r * r / (4.0 * t)), 0.0)
    return val[()] if val.ndim == 0 else val


def free_kernel(x, y, tau: float, D: int | None = None) -> float:
    x, y = as_point(x), as_point(y)
    if D is None:
        D = x.dim
    if D < 1:
        raise ValueError("dimension must be >= 1")
    if x.dim != D or y.dim != D:
        raise DimensionMismatchError(f"points of dimension {x.dim}, {y.dim} for D={D}")
    return float(free_kernel_r(x.distance(y), tau, D))


def _check_dim(q: HitQuery, D: int):
    if q.dim != D:
        raise DimensionMismatchError(f"expected a path in D={D}, got D={q.dim}")


# ---- D = 1 ---------------------------------------------------------------


def hit_d1_total(n: int, delta, T: float):
    """D=1 hit function of order n as a function of the total length Delta.

    H = T^{(n-1)/2} i^{n-1}erfc(Delta / 2 sqrt(T)) / 4, which for n = 0 is the
    free kernel.
    """
    if n < 0:
        raise ValueError("order must be >= 0")
    delta = np.asarray(delta, dtype=float)
    if T <= 0:
        return np.zeros_like(delta)[()] if delta.ndim == 0 else np.zeros_like(delta)
    z = delta / (2.0 * math.sqrt(T))
    return 0.25 * T ** ((n - 1) / 2.0) * specfun.inerfc(n - 1, z)


def hit_d1(q: HitQuery) -> float:
    _check_dim(q, 1)
    return float(hit_d1_total(q.n, q.path.total_length(), q.T))


def hit_d1_rodrigues_total(n: int, delta, T: float):
    """Same function through derivatives of e^{z^2} erfc(z), written with Hermite polynomials.

    H = (-1)^k / (4 k!) (T/4)^{k/2} e^{-z^2} d^k/dz^k [e^{z^2} erfc z], k = n - 1, and
    e^{-z^2} d^k/dz^k [e^{z^2} erfc z]
      = i^k [H_k(-iz) erfc z + 2/sqrt(pi) e^{-z^2} sum_j C(k,j) i^j H_{j-1}(z) H_{k-j}(-iz)].
    Loses accuracy to cancellation for large z; meant as a cross-check.
    """
    if n < 1:
        raise ValueError("Rodrigues form needs n >= 1")
    delta = np.asarray(delta, dtype=float)
    if T <= 0:
        return np.zeros_like(delta)
    k = n - 1
    z = delta / (2.0 * math.sqrt(T))
    w = -1j * z
    acc = specfun.hermite_h(k, w) * special.erfc(z)
    gauss = 2.0 / math.sqrt(math.pi) * np.exp(-z * z)
    for j in range(1, k + 1):
        acc = acc + gauss * math.comb(k, j) * (1j) ** j * specfun.hermite_h(j - 1, z) * specfun.hermite_h(k - j, w)
    deriv = ((1j) ** k * acc).real
    return (-1) ** k / (4.0 * math.factorial(k)) * (T / 4.0) ** (k / 2.0) * deriv


def hit_d1_rodrigues(q: HitQuery) -> float:
    _check_dim(q, 1)
    return float(hit_d1_rodrigues_total(q.n, q.path.total_length(), q.T))


# ---- D = 3 ---------------------------------------------------------------


def hit_d3_deltas(deltas: Sequence, T: float):
    """(4 pi)^{-(2n+3)/2} T^{-3/2} e^{-Delta^2/4T} Delta / (Delta_1 ... Delta_{n+1})."""
    ds = [np.asarray(d, dtype=float) for d in deltas]
    n = len(ds) - 1
    if n == 0:
        return free_kernel_r(ds[0], T, 3)
    total = sum(ds)
    if T <= 0:
        return np.zeros(np.broadcast(*ds).shape)[()]
    prod = np.prod(np.broadcast_arrays(*ds), axis=0)
    return FOUR_PI ** (-(2 * n + 3) / 2.0) * T ** -1.5 * np.exp(-total * total / (4.0 * T)) * total / prod


def hit_d3(q: HitQuery) -> float:
    _check_dim(q, 3)
    ds = q.deltas()
    if q.n > 0 and min(ds) == 0.0:
        raise SingularConfigurationError("coincident consecutive points in D=3")
    return float(hit_d3_deltas(ds, q.T))


# ---- D = 2, n = 1 ----------------------------------------------------------


def hit_d2_n1_deltas(deltas: Sequence, T: float):
    """(8 pi^2 T)^{-1} K0(D1 D2 / 2T) exp(-(D1^2 + D2^2)/4T), via the scaled K0."""
    d1, d2 = (np.asarray(d, dtype=float) for d in deltas)
    if T <= 0:
        return np.zeros(np.broadcast(d1, d2).shape)[()]
    x = d1 * d2 / (2.0 * T)
    return special.k0e(x) * np.exp(-((d1 + d2) ** 2) / (4.0 * T)) / (8.0 * math.pi**2 * T)


def hit_d2_n1(q: HitQuery) -> float:
    _check_dim(q, 2)
    if q.n != 1:
        raise ValueError(f"the D=2 closed form covers n=1 only, got n={q.n}")
    ds = q.deltas()
    if min(ds) == 0.0:
        raise SingularConfigurationError("K0 diverges when a segment has zero length")
    if q.T <= 0:
        return 0.0
    return float(hit_d2_n1_deltas(ds, q.T))


def closed_form(D: int, n: int) -> Form:
    """Closed-form functional form f(deltas, T) for the supported (D, n)."""
    if D == 1:
        return lambda ds, T: hit_d1_total(n, sum(np.asarray(d, dtype=float) for d in ds), T)
    if D == 3:
        return hit_d3_deltas
    if D == 2 and n == 1:
        return hit_d2_n1_deltas
    raise ValueError(f"no closed form for D={D}, n={n}")


def hit_closed(q: HitQuery) -> float:
    if q.T <= 0:
        return 0.0
    if q.dim == 1:
        return hit_d1(q)
    if q.dim == 3:
        return hit_d3(q)
    if q.dim == 2 and q.n == 1:
        return hit_d2_n1(q)
    if q.n == 0:
        return free_kernel(q.path.start, q.path.end, q.T)
    raise ValueError(f"no closed form for D={q.dim}, n={q.n}")


# ---- Bromwich momentum integral ------------------------------------------


@dataclass(frozen=True)
class BromwichConfig:
    """Contour Re(-ip) = contour_shift, truncated at |Re p| <= p_max.

    ``None`` picks the saddle point Delta/2T (floored at 1/sqrt(T)) for the
    shift, and a cut where e^{-p^2 T} < 1e-17 for p_max.
    """

    contour_shift: float | None = None
    p_max: float | None = None
    n_nodes: int = 400
    rel_tol: float = 1e-11
    imag_tol: float = 1e-8

    def __post_init__(self):
        if self.contour_shift is not None and not self.contour_shift > 0:
            raise ValueError("contour_shift must be positive")
        if self.p_max is not None and not self.p_max > 0:
            raise ValueError("p_max must be positive")


def _bromwich_integrand(s, c, c0, T, nu, deltas):
    # q = -ip on the contour, q = c - i s; the Gaussian and the exponential
    # tails of the K's are pulled out so that only exp(-Delta^2/4T) remains.
    q = c - 1j * s
    p = 1j * q
    n_hits = len(deltas)
    val = p * np.exp(T * (q - c0) ** 2) * q ** (-n_hits * nu)
    for d in deltas:
        val = val * special.kve(-nu, q * d)
    return val


def hit_bromwich_deltas(deltas: Sequence[float], T: float, D: int, cfg: BromwichConfig | None = None) -> float:
    cfg = cfg or BromwichConfig()
    if T <= 0:
        return 0.0
    ds = [float(d) for d in deltas]
    if min(ds) <= 0:
        raise SingularConfigurationError("Bromwich form needs every segment length > 0")
    nu = (2.0 - D) / 2.0
    total = sum(ds)
    c0 = total / (2.0 * T)
    c = cfg.contour_shift if cfg.contour_shift is not None else max(c0, 1.0 / math.sqrt(T))
    s_max = cfg.p_max if cfg.p_max is not None else math.sqrt(40.0 / T) + abs(c - c0)
    n_hits = len(ds)

    f = lambda s: _bromwich_integrand(s, c, c0, T, nu, ds)
    peak = max(abs(f(0.0)), abs(f(0.5 / math.sqrt(T))))
    tail = max(abs(f(s_max)), abs(f(-s_max)))
    if peak == 0 or tail > 1e-14 * peak:
        raise QuadratureError(f"Bromwich integrand not negligible at p_max={s_max:g}")

    with warnings.catch_warnings():
        # quad flags roundoff once it reaches machine precision; judged below instead
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        res, err = integrate.quad(
            f, -s_max, s_max, complex_func=True, points=[0.0], limit=400, epsabs=0.0, epsrel=cfg.rel_tol
        )
    if not np.isfinite(res) or abs(err) > 1e3 * cfg.rel_tol * abs(res):
        raise QuadratureError(f"Bromwich quadrature did not converge (error estimate {abs(err):.2e})")
    # (1/2 pi i) int dp with dp = ds
    value = res / (2j * math.pi)
    if abs(value.imag) > cfg.imag_tol * abs(value.real):
        raise QuadratureError(f"Bromwich result not real: {value}")
    pref = 2.0 * (2.0 * math.pi) ** (-D * n_hits / 2.0) * math.prod(ds) ** nu
    return float(pref * math.exp(-total * total / (4.0 * T)) * value.real)


def hit_bromwich(q: HitQuery, D: int | None = None, cfg: BromwichConfig | None = None) -> float:
    D = q.dim if D is None else D
    _check_dim(q, D)
    return hit_bromwich_deltas(q.deltas(), q.T, D, cfg)


# ---- finite differences ----------------------------------------------------


def _richardson(estimates: list, order: int = 2):
    """Eliminate h^2, h^4, ... from estimates at h, h/2, h/4, ..."""
    table = list(estimates)
    k = order
    while len(table) > 1:
        fac = 2.0**k
        table = [(fac * table[i + 1] - table[i]) / (fac - 1.0) for i in range(len(table) - 1)]
        k += 2
    return table[0]


def _mixed_central(f, ds: list, T: float, steps: list):
    """Central-difference estimate of d^m f / dD_1 ... dD_m (all arguments)."""
    m = len(ds)
    acc = 0.0
    for signs in np.ndindex(*(2,) * m):
        shifted = [d + (1 - 2 * s) * h for d, s, h in zip(ds, signs, steps)]
        acc = acc + (-1) ** sum(signs) * f(shifted, T)
    return acc / math.prod(2.0 * h for h in steps)


def _default_step(ds, T, frac):
    # ds may be broadcastable grids of different shapes
    scale = np.minimum(np.minimum.reduce(np.broadcast_arrays(*ds)), math.sqrt(T))
    return frac * scale


# ---- dimension shifts ------------------------------------------------------


def raise_dimension(f: Form, n: int, step_frac: float = 0.04, levels: int = 3) -> Form:
    """D -> D+2: apply prod_i (-1/(2 pi Delta_i)) d/dDelta_i to a functional form.

    Steps are a fraction of min(Delta_i, sqrt T); the mixed derivative is
    Richardson extrapolated over ``levels`` halvings.
    """
    m = n + 1

    def g(deltas, T):
        ds = [np.asarray(d, dtype=float) for d in deltas]
        if len(ds) != m:
            raise DimensionMismatchError(f"expected {m} segment lengths, got {len(ds)}")
        h0 = _default_step(ds, T, step_frac)
        ests = [_mixed_central(f, ds, T, [h0 / 2**lv] * m) for lv in range(levels)]
        deriv = _richardson(ests)
        return deriv * math.prod(-1.0 / (2.0 * math.pi * d) for d in ds)

    return g


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(40)


def _tail_length(T: float) -> float:
    # exp(-a^2/4T) < 1e-17 beyond a
    return math.sqrt(4.0 * 40.0 * T)


def lower_dimension(f: Form, n: int, panels: int = 2, tail_check: bool = True) -> Form:
    """D -> D-2: apply prod_i 2 pi int_{Delta_i}^inf dDelta_i Delta_i to a functional form.

    Tensor Gauss-Legendre on [Delta_i, Delta_i + a] with a chosen so that the
    Gaussian decay makes the neglected tail < 1e-17.
    """
    m = n + 1

    def g_scalar(ds, T):
        a = _tail_length(T)
        nodes, weights = [], []
        for d in ds:
            edges = np.linspace(d, d + a, panels + 1)
            x = np.concatenate([0.5 * (hi - lo) * _GL_NODES + 0.5 * (hi + lo) for lo, hi in zip(edges[:-1], edges[1:])])
            w = np.concatenate([0.5 * (hi - lo) * _GL_WEIGHTS for lo, hi in zip(edges[:-1], edges[1:])])
            nodes.append(x)
            weights.append(2.0 * math.pi * x * w)
        grids = np.meshgrid(*nodes, indexing="ij", sparse=True)
        vals = np.asarray(f(grids, T), dtype=float)
        for w in reversed(weights):
            vals = vals @ w
        if tail_check:
            edge = abs(float(np.asarray(f([d + a for d in ds], T))))
            if edge > 1e-12 * max(abs(float(vals)), 1e-300):
                raise QuadratureError("integrand not negligible at the truncation point")
        return float(vals)

    def g(deltas, T):
        ds = [np.asarray(d, dtype=float) for d in deltas]
        if len(ds) != m:
            raise DimensionMismatchError(f"expected {m} segment lengths, got {len(ds)}")
        b = np.broadcast_arrays(*ds)
        out = np.array([g_scalar([float(x[i]) for x in b], T) for i in np.ndindex(b[0].shape)])
        return out.reshape(b[0].shape)[()]

    return g


# ---- order shifts ----------------------------------------------------------


def raise_order(f: Form, D: int, rel_tol: float = 1e-11) -> Form:
    """Order n-1 -> n: H_n(D_1..D_{n+1}; T) = int_0^T dtau H_{n-1}(D_1..D_n; tau) K0(D_{n+1}; T - tau).

    The last segment Delta_{n+1} = |y - z_n| carries the new point z_n.
    """

    def g_scalar(ds, T):
        if T <= 0:
            return 0.0
        head, last = ds[:-1], ds[-1]
        integrand = lambda tau: float(f(head, tau)) * float(free_kernel_r(last, T - tau, D))
        val, err = integrate.quad(integrand, 0.0, T, epsabs=0.0, epsrel=rel_tol, limit=400)
        if not math.isfinite(val):
            raise QuadratureError("order-raising quadrature failed")
        return val

    def g(deltas, T):
        b = np.broadcast_arrays(*[np.asarray(d, dtype=float) for d in deltas])
        out = np.array([g_scalar([float(x[i]) for x in b], T) for i in np.ndindex(b[0].shape)])
        return out.reshape(b[0].shape)[()]

    return g


def _integrate_last_point(f: Form, ds: list, T: float, D: int) -> float:
    """G(L, T) = int d^D z f(D_1..D_{n-1}, |z - a|, |z - y|; T) with L = |y - a| = ds[-1]."""
    head, L = ds[:-1], ds[-1]
    a = _tail_length(T) + L
    if D == 1:
        # a at 0, y at L; z ranges over the line
        def h(z):
            z = np.atleast_1d(z)
            return np.asarray(f([*head, np.abs(z), np.abs(z - L)], T), dtype=float)

        pts = [(-a, 0.0), (0.0, L), (L, L + a)]
        total = 0.0
        for lo, hi in pts:
            val, _ = integrate.quad(lambda z: float(h(z)[0]), lo, hi, epsabs=0.0, epsrel=1e-13, limit=400)
            total += val
        return total
    if D == 3:
        # bipolar coordinates about a and y: d^3z = (pi / L) r1 r2 du dv, u = r1 + r2, v = r1 - r2
        def inner(u):
            v = L * _GL_NODES
            r1, r2 = 0.5 * (u + v), 0.5 * (u - v)
            vals = np.asarray(f([*head, r1, r2], T), dtype=float)
            return L * np.sum(_GL_WEIGHTS * r1 * r2 * vals)

        val, _ = integrate.quad(inner, L, L + a, epsabs=0.0, epsrel=1e-13, limit=400)
        return math.pi / L * val
    raise ValueError(f"order lowering implemented for D in (1, 3), got {D}")


def lower_order(f: Form, D: int, c: float = 1.0, step_frac: float = 0.05) -> Form:
    """Order n -> n-1: c (d/dT - Laplacian_y) int d^D z_n H_n.

    For a functional form the y-dependence enters only through L = |y - z_{n-1}|,
    so the Laplacian is the radial one, G'' + (D-1)/L G'.  The constant c = 1 is
    the one consistent with (d/dT - Laplacian) K0 = delta for m = 1/2.
    """

    def g_scalar(ds, T):
        L = ds[-1]
        G = lambda LL, TT: _integrate_last_point(f, [*ds[:-1], LL], TT, D)
        hL = step_frac * min(L, math.sqrt(T))
        hT = step_frac * T
        g0 = G(L, T)
        d1, d2, dt = [], [], []
        for lv in range(3):
            h, k = hL / 2**lv, hT / 2**lv
            gp, gm = G(L + h, T), G(L - h, T)
            d1.append((gp - gm) / (2 * h))
            d2.append((gp - 2 * g0 + gm) / (h * h))
            dt.append((G(L, T + k) - G(L, T - k)) / (2 * k))
        lap = _richardson(d2) + (D - 1) / L * _richardson(d1)
        return c * (_richardson(dt) - lap)

    def g(deltas, T):
        b = np.broadcast_arrays(*[np.asarray(d, dtype=float) for d in deltas])
        out = np.array([g_scalar([float(x[i]) for x in b], T) for i in np.ndindex(b[0].shape)])
        return out.reshape(b[0].shape)[()]

    return g


def green_residual(f: Form, deltas: Sequence[float], T: float, D: int, step_frac: float = 0.05) -> float:
    """(d/dT - Laplacian_y) H with y entering through the last segment length."""
    ds = [float(d) for d in deltas]
    L = ds[-1]
    F = lambda LL, TT: float(f([*ds[:-1], LL], TT))
    hL, hT = step_frac * min(L, math.sqrt(T)), step_frac * T
    f0 = F(L, T)
    d1, d2, dt = [], [], []
    for lv in range(3):
        h, k = hL / 2**lv, hT / 2**lv
        fp, fm = F(L + h, T), F(L - h, T)
        d1.append((fp - fm) / (2 * h))
        d2.append((fp - 2 * f0 + fm) / (h * h))
        dt.append((F(L, T + k) - F(L, T - k)) / (2 * k))
    return _richardson(dt) - _richardson(d2) - (D - 1) / L * _richardson(d1)


def d1_order_step(direction: str, g: Callable, step_frac: float = 0.05) -> Callable:
    """D=1 order step on a function g(Delta, T) of the total length.

    up:   H_n(Delta) = 1/2 int_Delta^inf H_{n-1}
    down: H_{n-1}(Delta) = -2 dH_n/dDelta
    """
    if direction == "up":

        def up(delta, T):
            a = _tail_length(T)

            def one(d):
                val, _ = integrate.quad(lambda t: float(g(t, T)), d, d + a, epsabs=0.0, epsrel=1e-13, limit=200)
                if abs(float(g(d + a, T))) > 1e-12 * max(abs(val), 1e-300):
                    raise QuadratureError("tail of the order-raising integral is not negligible")
                return 0.5 * val

            return np.vectorize(one, otypes=[float])(delta)[()]

        return up
    if direction == "down":

        def down(delta, T):
            delta = np.asarray(delta, dtype=float)
            h0 = step_frac * math.sqrt(T)
            ests = [(g(delta + h0 / 2**lv, T) - g(delta - h0 / 2**lv, T)) / (2 * h0 / 2**lv) for lv in range(3)]
            return -2.0 * _richardson(ests)

        return down
    raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")
