"""Exact Dirichlet kernels: mode sum inside the unit sphere and images for a plane."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .errors import DimensionMismatchError
from .geometry import Plane, as_point, reflect_in_plane
from .hitfn import free_kernel


@dataclass(frozen=True)
class SphereModeSumConfig:
    l_max: int = 3
    k_max: int = 8

    def __post_init__(self):
        if self.l_max < 0 or self.k_max < 1:
            raise ValueError("need l_max >= 0 and k_max >= 1")


def _sphere_modes(cfg: SphereModeSumConfig):
    u = np.array([[specfun.bessel_zero(l, k) for k in range(1, cfg.k_max + 1)] for l in range(cfg.l_max + 1)])
    # j_{l+1} at the zeros of j_l, evaluated fresh rather than tabulated
    norm = np.array([specfun.spherical_bessel_j(l + 1, u[l]) ** 2 for l in range(cfg.l_max + 1)])
    return u, norm


def sphere_exact(x, y, T: float, cfg: SphereModeSumConfig | None = None) -> float:
    """sum_{l,k} (2l+1)/(2 pi) j_l(r u) j_l(r' u) / j_{l+1}(u)^2 P_l(cos gamma) e^{-u^2 T}."""
    cfg = cfg or SphereModeSumConfig()
    x, y = as_point(x), as_point(y)
    if x.dim != 3 or y.dim != 3:
        raise DimensionMismatchError("sphere kernel needs points in D=3")
    r, rp = np.linalg.norm(x.asarray()), np.linalg.norm(y.asarray())
    if r >= 1.0 or rp >= 1.0:
        raise ValueError("points must lie strictly inside the unit sphere")
    if T <= 0:
        return 0.0
    if r == 0.0 or rp == 0.0:
        cos_g = 1.0
    else:
        cos_g = float(np.clip(np.dot(x.asarray(), y.asarray()) / (r * rp), -1.0, 1.0))
    u, norm = _sphere_modes(cfg)
    total = 0.0
    for l in range(cfg.l_max + 1):
        radial = specfun.spherical_bessel_j(l, r * u[l]) * specfun.spherical_bessel_j(l, rp * u[l]) / norm[l]
        terms = radial * np.exp(-u[l] ** 2 * T)
        total += (2 * l + 1) / (2.0 * math.pi) * specfun.legendre_p(l, cos_g) * math.fsum(terms)
    return float(total)


def sphere_exact_subtracted(x, y, T: float, cfg: SphereModeSumConfig | None = None) -> float:
    if T <= 0:
        return 0.0
    return sphere_exact(x, y, T, cfg) - free_kernel(x, y, T, 3)


def plane_exact(x, y, T: float, b: Plane | None = None) -> float:
    """K0(y, x; T) - K0(reflected y, x; T), zero across or on the plane."""
    b = b or Plane()
    x, y = as_point(x), as_point(y)
    if T <= 0:
        return 0.0
    hx, hy = b.signed_distance(x), b.signed_distance(y)
    if hx * hy <= 0:
        return 0.0
    return free_kernel(x, y, T) - free_kernel(x, reflect_in_plane(y, b), T)


def plane_exact_subtracted(x, y, T: float, b: Plane | None = None) -> float:
    if T <= 0:
        return 0.0
    return plane_exact(x, y, T, b) - free_kernel(x, y, T)
