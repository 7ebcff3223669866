import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import integrate, special

from hitprop.errors import SingularConfigurationError
from hitprop.geometry import PolygonalPath
from hitprop.hitfn import (
    HitQuery,
    closed_form,
    d1_order_step,
    free_kernel,
    free_kernel_r,
    green_residual,
    hit_bromwich,
    hit_closed,
    hit_d1,
    hit_d1_rodrigues,
    hit_d1_total,
    hit_d2_n1,
    hit_d3,
    hit_d3_deltas,
    lower_dimension,
    lower_order,
    raise_dimension,
    raise_order,
)
from hitprop.oracle import hit_by_time_quadrature


def query(x, zs, y, T):
    return HitQuery(PolygonalPath(x, zs, y), T)


def test_free_kernel_values():
    assert_allclose(free_kernel((0,), (0,), 1.0), 1 / math.sqrt(4 * math.pi))
    assert_allclose(free_kernel((0, 0, 0), (0, 0, 1), 0.5), (2 * math.pi) ** -1.5 * math.exp(-0.5))
    assert free_kernel((0,), (1,), 0.0) == 0.0


def test_d1_examples():
    # single hit at the endpoints' midpoint with zero total length: T^0 erfc(0)/4
    assert_allclose(hit_d1(query((0,), [(0,)], (0,), 2.0)), 0.25)
    q = query((0,), [(1.0,)], (0.5,), 1.0)
    assert_allclose(hit_d1(q), 0.25 * math.erfc(0.75), rtol=1e-14)
    q0 = query((0,), [], (0.7,), 0.3)
    assert_allclose(hit_d1(q0), free_kernel((0,), (0.7,), 0.3), rtol=1e-14)


def test_d3_example():
    q = query((0, 0, 0), [(0, 0, 1)], (0, 0, 0), 1.0)
    assert_allclose(hit_d3(q), (4 * math.pi) ** -2.5 * math.exp(-1.0) * 2.0, rtol=1e-14)
    with pytest.raises(SingularConfigurationError):
        hit_d3(query((0, 0, 0), [(0, 0, 0)], (0, 0, 1), 1.0))


def test_d2_examples_against_time_integral():
    for d1, d2, T in [(0.4, 0.9, 0.5), (1.0, 1.0, 1.0), (2.0, 0.3, 3.0)]:
        q = query((0, 0), [(d1, 0)], (d1, d2), T)
        ref = integrate.quad(lambda t: free_kernel_r(d1, t, 2) * free_kernel_r(d2, T - t, 2), 0, T, epsrel=1e-12)[0]
        assert_allclose(hit_d2_n1(q), ref, rtol=1e-9)


@given(st.floats(0.05, 3), st.floats(0.05, 3), st.floats(0.05, 3), st.floats(0.05, 3))
def test_d2_decreasing(d1, d2, h, T):
    f = closed_form(2, 1)
    assert f([d1 + h, d2], T) < f([d1, d2], T)
    assert f([d1, d2 + h], T) < f([d1, d2], T)


pts3 = st.tuples(*[st.floats(-2, 2)] * 3)


@given(st.lists(pts3, min_size=2, max_size=5), st.floats(0.05, 5))
def test_reversal_symmetry(pts, T):
    p = PolygonalPath(pts[0], pts[1:-1], pts[-1])
    if min(p.segment_lengths()) < 1e-3:
        return
    assert_allclose(hit_closed(HitQuery(p, T)), hit_closed(HitQuery(p.reversed(), T)), rtol=1e-12)
    p1 = PolygonalPath(pts[0][:1], [z[:1] for z in pts[1:-1]], pts[-1][:1])
    assert_allclose(hit_d1(HitQuery(p1, T)), hit_d1(HitQuery(p1.reversed(), T)), rtol=1e-12)


@pytest.mark.parametrize("n", range(1, 7))
def test_rodrigues_matches(n):
    # the Hermite form cancels for large Delta / sqrt(T); stay at z <= 2
    for delta in [0.0, 0.4, 1.7, 4.0]:
        for T in [1.0, 2.5]:
            assert_allclose(hit_d1_rodrigues_total_(n, delta, T), hit_d1_total(n, delta, T), rtol=5e-12)


def hit_d1_rodrigues_total_(n, delta, T):
    zs = [(0.0,)] * n
    return hit_d1_rodrigues(query((0.0,), zs, (delta,), T))


@pytest.mark.parametrize("D,n", [(1, 1), (1, 2), (1, 3), (2, 1), (3, 1), (3, 2), (3, 3)])
def test_bromwich_matches_closed_form(D, n):
    rng = np.random.default_rng(10 * D + n)
    for _ in range(4):
        pts = rng.uniform(-1.5, 1.5, size=(n + 2, D))
        q = HitQuery(PolygonalPath(pts[0], pts[1:-1], pts[-1]), rng.uniform(0.1, 3.0))
        assert_allclose(hit_bromwich(q), hit_closed(q), rtol=1e-11)


@pytest.mark.parametrize("n", [2, 3])
def test_bromwich_d2_against_time_integral(n):
    # no closed form beyond n = 1 in two dimensions
    pts = [(0, 0), (0.6, 0.1), (0.2, 0.9), (-0.4, 0.3)][: n + 2]
    q = query(pts[0], pts[1:-1], pts[-1], 0.8)
    assert_allclose(hit_bromwich(q), hit_by_time_quadrature(q), rtol=1e-9)


def test_integral_identities():
    a, b, T = 0.7, 0.3, 1.3
    sa, sb = math.sqrt(a), math.sqrt(b)
    w = lambda t: math.exp(-a / (T - t) - b / t)
    q = lambda f: integrate.quad(f, 0, T, epsabs=0, epsrel=1e-12, limit=200)[0]
    val = integrate.quad(lambda x: math.exp(-a * x * x - b / (x * x)), 0, np.inf, epsabs=0, epsrel=1e-12)[0]
    assert_allclose(val, 0.5 * math.sqrt(math.pi / a) * math.exp(-2 * sa * sb), rtol=1e-10)
    ex = math.exp(-((sa + sb) ** 2) / T)
    assert_allclose(q(lambda t: w(t) / (math.sqrt(t) * (T - t) ** 1.5)), math.sqrt(math.pi / (a * T)) * ex, rtol=1e-10)
    assert_allclose(q(lambda t: w(t) / (t * (T - t)) ** 1.5), math.sqrt(math.pi / T**3) * (sa + sb) / (sa * sb) * ex, rtol=1e-10)
    assert_allclose(q(lambda t: w(t) / (t * (T - t))), 2 / T * special.k0(2 * math.sqrt(a * b) / T) * math.exp(-(a + b) / T), rtol=1e-10)


@pytest.mark.parametrize("n", [1, 2])
def test_d1_normalization(n):
    # int dz_1..dz_n H_n = T^n / n! K0
    x, y, T = 0.0, 0.8, 0.9
    lim = 12.0
    if n == 1:
        val = integrate.quad(lambda z: hit_d1(query((x,), [(z,)], (y,), T)), -lim, lim, points=[x, y], epsrel=1e-11)[0]
    else:
        val = integrate.dblquad(lambda z2, z1: hit_d1(query((x,), [(z1,), (z2,)], (y,), T)), -lim, lim, -lim, lim, epsrel=1e-9)[0]
    assert_allclose(val * math.factorial(n) / T**n, free_kernel((x,), (y,), T), rtol=1e-7)


@given(st.integers(0, 5), st.floats(0.05, 4), st.floats(0.1, 3))
def test_d1_ode(n, delta, T):
    h = 1e-3 * math.sqrt(T)
    f = lambda d: hit_d1_total(n, d, T)
    d1 = (f(delta + h) - f(delta - h)) / (2 * h)
    d2 = (f(delta + h) - 2 * f(delta) + f(delta - h)) / h**2
    res = 4 * T * d2 + 2 * delta * d1 - 2 * (n - 1) * f(delta)
    assert abs(res) < 1e-5 * (abs(4 * T * d2) + abs(2 * delta * d1) + abs(2 * (n - 1) * f(delta)) + 1e-300)


def test_chapman_kolmogorov():
    x, y, T, s = 0.2, -0.5, 1.1, 0.35
    val = integrate.quad(lambda w: free_kernel((x,), (w,), s) * free_kernel((w,), (y,), T - s), -np.inf, np.inf)[0]
    assert_allclose(val, free_kernel((x,), (y,), T), rtol=1e-10)
    # radial form in three dimensions, bipolar integration about the end points
    L = 0.9
    inner = lambda u: integrate.quad(lambda v: (u * u - v * v) / 4 * free_kernel_r((u + v) / 2, s, 3) * free_kernel_r((u - v) / 2, T - s, 3), -L, L)[0]
    val3 = math.pi / L * integrate.quad(inner, L, L + 30)[0]
    assert_allclose(val3, free_kernel_r(L, T, 3), rtol=1e-9)


@pytest.mark.parametrize("n", [1, 2])
def test_raise_dimension(n):
    f1 = closed_form(1, n)
    ds, T = [0.6, 0.9, 1.3][: n + 1], 0.7
    assert_allclose(raise_dimension(f1, n)(ds, T), hit_d3_deltas(ds, T), rtol=1e-6)


@pytest.mark.parametrize("n", [0, 1, 2])
def test_lower_dimension(n):
    ds, T = [0.6, 0.9, 1.3][: n + 1], 0.7
    assert_allclose(lower_dimension(hit_d3_deltas, n)(ds, T), closed_form(1, n)(ds, T), rtol=1e-11)


def test_raise_and_lower_order():
    ds, T = [0.5, 1.1, 0.8], 1.2
    for D in (1, 3):
        assert_allclose(raise_order(closed_form(D, 1), D)(ds, T), closed_form(D, 2)(ds, T), rtol=1e-11)
        # lowering takes the segment lengths of the shorter path
        assert_allclose(lower_order(closed_form(D, 2), D)(ds[:2], T), closed_form(D, 1)(ds[:2], T), rtol=1e-8)
    assert_allclose(raise_order(lambda d, t: free_kernel_r(d[0], t, 2), 2)([0.4, 0.7], 0.9),
                    closed_form(2, 1)([0.4, 0.7], 0.9), rtol=1e-11)


def test_shifts_commute():
    # raising order then dimension agrees with raising dimension then order
    k1 = lambda d, t: free_kernel_r(d[0], t, 1)
    ds, T = [0.7, 1.0], 0.8
    a = raise_dimension(raise_order(k1, 1), 1)(ds, T)
    b = raise_order(raise_dimension(k1, 0), 3)(ds, T)
    assert_allclose(a, b, rtol=1e-7)
    assert_allclose(a, hit_d3_deltas(ds, T), rtol=1e-7)


@pytest.mark.parametrize("D", [1, 3])
def test_green_residual_vanishes_off_coincidence(D):
    ds, T = [0.6, 0.8, 1.1], 0.9
    f = closed_form(D, 2)
    scale = abs(float(f(ds, T))) / T
    assert abs(green_residual(f, ds, T, D)) < 1e-8 * scale


def test_d1_order_steps():
    T = 0.8
    for n in (1, 2, 3):
        g = lambda d, t, n=n: hit_d1_total(n - 1, d, t)
        assert_allclose(d1_order_step("up", g)(0.6, T), hit_d1_total(n, 0.6, T), rtol=1e-12)
        h = lambda d, t, n=n: hit_d1_total(n, d, t)
        assert_allclose(d1_order_step("down", h)(0.6, T), hit_d1_total(n - 1, 0.6, T), rtol=1e-9)
    with pytest.raises(ValueError):
        d1_order_step("sideways", g)


def test_nonpositive_time():
    q = query((0, 0, 0), [(0, 0, 1)], (1, 0, 0), 0.0)
    assert hit_closed(q) == 0.0
    assert hit_bromwich(q) == 0.0
