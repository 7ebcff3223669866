"""Brute-force evaluators of the hit function used to validate the closed forms."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import QuadratureError
from .hitfn import HitQuery, free_kernel_r


def _tanh_sinh(h: float, t_max: float = 3.2):
    """Double-exponential nodes on (0, 1) with their complements 1 - x and weights."""
    t = np.arange(-t_max, t_max + 0.5 * h, h)
    u = 0.5 * math.pi * np.sinh(t)
    # x = (1 + tanh u)/2 = 1/(1 + e^{-2u}); 1 - x = 1/(1 + e^{2u})
    x = 1.0 / (1.0 + np.exp(-2.0 * u))
    xc = 1.0 / (1.0 + np.exp(2.0 * u))
    w = h * 0.25 * math.pi * np.cosh(t) / np.cosh(u) ** 2
    return x, xc, w


def _simplex_sum(ds, T, D, h):
    # tau_n = T x_n, tau_{k} = tau_{k+1} x_k; the gaps tau_{k+1} - tau_k = tau_{k+1}(1 - x_k)
    x, xc, w = _tanh_sinh(h)
    n = len(ds) - 1
    total = 0.0
    for xo, xco, wo in zip(x, xc, w):
        tau = np.array([T * xo])
        weight = np.array([wo * T]) * free_kernel_r(ds[-1], T * xco, D)
        for k in range(n - 1, 0, -1):
            gap = np.multiply.outer(tau, xc).ravel()
            weight = np.multiply.outer(weight * tau, w).ravel() * free_kernel_r(ds[k], gap, D)
            tau = np.multiply.outer(tau, x).ravel()
        total += float(np.sum(weight * free_kernel_r(ds[0], tau, D)))
    return total


def hit_by_time_quadrature(q: HitQuery, D: int | None = None, rel_tol: float = 1e-10, method: str = "tanh-sinh") -> float:
    """Nested proper-time integral over 0 < tau_1 < ... < tau_n < T of the product of free kernels.

    ``tanh-sinh`` maps the ordered times onto the unit cube and applies
    double-exponential quadrature in each variable, halving the step until
    two successive results agree to ``rel_tol``.  ``adaptive`` nests
    scipy.integrate.quad as the iterated convolution
    F_k(t) = int_0^t F_{k-1}(s) K0(Delta_{k+1}; t - s) ds (slow beyond n = 2).
    """
    D = q.dim if D is None else D
    if q.T <= 0:
        return 0.0
    if q.n > 3:
        raise ValueError("nested time quadrature is limited to n <= 3")
    ds = q.deltas()
    if q.n == 0:
        return float(free_kernel_r(ds[0], q.T, D))
    if method == "tanh-sinh":
        h = 1.0 / 8.0
        prev = _simplex_sum(ds, q.T, D, h)
        for _ in range(4):
            h /= 2.0
            cur = _simplex_sum(ds, q.T, D, h)
            if abs(cur - prev) <= rel_tol * abs(cur):
                return cur
            prev = cur
        raise QuadratureError(f"time quadrature not converged: {prev} vs {cur}")
    if method != "adaptive":
        raise ValueError(f"unknown method {method!r}")

    def F(k: int, t: float) -> float:
        if k == 0:
            return float(free_kernel_r(ds[0], t, D))
        if t <= 0:
            return 0.0
        val, err = integrate.quad(
            lambda s: F(k - 1, s) * float(free_kernel_r(ds[k], t - s, D)),
            0.0,
            t,
            epsabs=0.0,
            epsrel=rel_tol,
            limit=200,
        )
        if not math.isfinite(val):
            raise QuadratureError("nested time quadrature did not converge")
        return val

    return F(q.n, q.T)


@dataclass(frozen=True)
class McConfig:
    n_paths: int = 100_000
    n_steps: int = 400
    bin_width: float = 0.05
    seed: int = 0
    chunk: int = 2048

    def __post_init__(self):
        if self.n_paths < 1 or self.n_steps < 2 or not self.bin_width > 0 or self.chunk < 1:
            raise ValueError("need n_paths >= 1, n_steps >= 2, bin_width > 0, chunk >= 1")


def _ball_volume(D: int, r: float) -> float:
    return math.pi ** (D / 2) / math.gamma(D / 2 + 1) * r**D


def _bridge_chunk(rng, m, x, y, T, n_steps, D):
    dt = T / n_steps
    steps = rng.normal(scale=math.sqrt(2.0 * dt), size=(m, n_steps, D))
    w = np.cumsum(steps, axis=1)
    t = (np.arange(1, n_steps + 1) * dt)[None, :, None]
    # bridge pinned at x (t = 0) and y (t = T); interior times only
    b = x + w - t / T * (w[:, -1:, :] - (y - x))
    return b[:, :-1, :]


def hit_by_monte_carlo(q: HitQuery, D: int | None = None, cfg: McConfig | None = None, normalized: bool = False):
    """Brownian-bridge estimate of the hit function, returned as (estimate, std_error).

    Each bridge from x to y contributes the time-ordered sum over grid times of
    ball indicators around z_1, ..., z_n divided by the ball volume, times dt^n.
    The mean is the hit function divided by K0(y, x; T); ``normalized`` returns
    that ratio, otherwise it is multiplied back by K0.  The random stream is
    split per chunk of paths, so results do not depend on how chunks are
    scheduled.
    """
    cfg = cfg or McConfig()
    D = q.dim if D is None else D
    if q.n > 2:
        raise ValueError("Monte Carlo oracle is limited to n <= 2")
    x, y = q.path.start.asarray(), q.path.end.asarray()
    k0 = float(free_kernel_r(np.linalg.norm(y - x), q.T, D))
    scale = 1.0 if normalized else k0
    if q.n == 0:
        return scale, 0.0
    if q.T <= 0:
        return 0.0, 0.0

    zs = [z.asarray() for z in q.path.intermediates]
    dt = q.T / cfg.n_steps
    weight = dt / _ball_volume(D, cfg.bin_width)
    n_chunks = -(-cfg.n_paths // cfg.chunk)
    seeds = np.random.SeedSequence(cfg.seed).spawn(n_chunks)
    samples = []
    for i, ss in enumerate(seeds):
        m = min(cfg.chunk, cfg.n_paths - i * cfg.chunk)
        b = _bridge_chunk(np.random.default_rng(ss), m, x, y, q.T, cfg.n_steps, D)
        hits = [(np.sum((b - z) ** 2, axis=2) < cfg.bin_width**2) * weight for z in zs]
        acc = hits[0]
        for h in hits[1:]:
            # strictly earlier passage through the previous point
            prior = np.cumsum(acc, axis=1) - acc
            acc = h * prior
        samples.append(acc.sum(axis=1))
    s = np.concatenate(samples)
    if not np.any(s):
        raise QuadratureError("no sampled path passed through the prescribed points")
    return float(s.mean() * scale), float(s.std(ddof=1) / math.sqrt(s.size) * scale)
