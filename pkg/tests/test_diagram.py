import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from imexstab import _backend, _kernels_py
from imexstab.coeffs import generate_scheme
from imexstab.diagram import (
    all_inside,
    asymptotic_circle,
    boundary_locus,
    contains,
    extreme_points,
    locus_start,
    root_modulus,
    stability_diagram,
)
from imexstab.errors import ParameterError

ORDERS = range(1, 6)
DELTA_GRID = [round(0.05 * i, 2) for i in range(1, 21)]


@pytest.mark.parametrize("r", ORDERS)
@pytest.mark.parametrize("delta", DELTA_GRID)
def test_extremes_match_sampled_locus(r, delta):
    m_l, m_r = extreme_points(r, delta)
    mu = boundary_locus(r, delta, 8192)
    assert mu.real.min() == pytest.approx(m_l, abs=1e-6)
    assert mu.real.max() == pytest.approx(m_r, abs=1e-6)


@pytest.mark.parametrize("r", ORDERS)
@pytest.mark.parametrize("delta", [0.05, 0.3, 0.7, 1.0])
def test_extremes_match_root_condition(r, delta):
    # second route: locate where the largest root modulus reaches 1 on the real axis
    m_l, m_r = extreme_points(r, delta)
    f = lambda x: root_modulus(r, delta, x) - 1.0
    assert brentq(f, 2 * m_l, -1e-12, xtol=1e-13) == pytest.approx(m_l, abs=1e-6)
    if r >= 3:
        assert brentq(f, 1e-9, 1.5, xtol=1e-13) == pytest.approx(m_r, abs=1e-6)
    else:
        assert m_r == 1.0
        assert contains(r, delta, 1.0 - 1e-3) and not contains(r, delta, 1.0)


def test_known_extremes():
    assert extreme_points(1, 1.0) == pytest.approx((-1.0, 1.0))
    assert extreme_points(3, 1.0) == pytest.approx((-1 / 7, 0.5))
    assert extreme_points(2, 1.0)[1] == 1.0


def test_first_order_locus_endpoints():
    mu = boundary_locus(1, 1.0, 64)
    assert mu[0] == pytest.approx(1.0)
    assert mu[len(mu) // 2] == pytest.approx(-1.0)
    for delta in (0.2, 0.6):
        assert boundary_locus(1, delta, 64)[0] == pytest.approx(1.0)
    assert locus_start(1, 0.5) == 1.0


@pytest.mark.parametrize("r", ORDERS)
@pytest.mark.parametrize("delta", [0.1, 0.5, 1.0])
def test_locus_points_are_on_the_boundary(r, delta):
    mu = boundary_locus(r, delta, 512)
    rho = root_modulus(r, delta, mu)
    assert np.all(np.abs(rho - 1.0) <= 1e-6)
    np.testing.assert_allclose(mu, np.conj(mu[::-1]), atol=1e-12)


@pytest.mark.parametrize("r", ORDERS)
@pytest.mark.parametrize("delta", DELTA_GRID)
def test_origin_inside(r, delta):
    assert contains(r, delta, 0.0)


def test_example_membership():
    assert not contains(3, 1.0, -9.0)
    assert contains(3, 0.0656, -9.0)


def test_asymptotic_circle():
    assert asymptotic_circle(2, 0.25) == pytest.approx((-1.25, 2.0))
    assert asymptotic_circle(1, 1.0) == pytest.approx((0.0, 1.0))
    c, rad = asymptotic_circle(3, 0.01)
    m_l, _ = extreme_points(3, 0.01)
    assert abs(m_l - (c - rad)) <= 0.05 * abs(c - rad)


def _probe_grid():
    x = np.linspace(-30, 1.2, 60)
    y = np.linspace(-15, 15, 41)
    return (x[:, None] + 1j * y[None, :]).ravel()


@pytest.mark.parametrize("r", ORDERS)
def test_diagram_grows_as_delta_shrinks(r):
    pts = _probe_grid()
    deltas = [1.0, 0.5, 0.25, 0.1]
    masks = [contains(r, d, pts) for d in deltas]
    for big, small in zip(masks, masks[1:]):
        assert np.all(small[big])


@pytest.mark.parametrize("delta", [0.25, 0.5, 1.0])
def test_diagram_shrinks_with_order(delta):
    pts = _probe_grid()
    masks = [contains(r, delta, pts) for r in ORDERS]
    for lo, hi in zip(masks, masks[1:]):
        assert np.all(lo[hi])
    assert masks[0].sum() > masks[-1].sum()


def test_boundary_counts_as_outside():
    # r = 1, delta = 1: mu = -1 gives the root z = -1
    assert root_modulus(1, 1.0, -1.0) == pytest.approx(1.0)
    assert not contains(1, 1.0, -1.0)


def test_vectorized_contains_matches_scalar():
    pts = _probe_grid()[::37]
    vec = contains(4, 0.3, pts)
    assert vec.dtype == bool
    assert list(vec) == [contains(4, 0.3, p) for p in pts]
    assert all_inside(4, 0.3, pts[vec])
    assert not all_inside(4, 0.3, pts)
    assert all_inside(4, 0.3, [])
    assert not all_inside(4, 0.3, [np.nan])


def test_stability_diagram_record():
    D = stability_diagram(3, 0.5, 256)
    assert D.m_left < 0 < D.m_right <= 1
    assert D.contains(0.0)
    d = D.to_dict()
    assert d["order"] == 3 and len(d["locus"]) == D.locus.size


def test_errors():
    with pytest.raises(ParameterError):
        boundary_locus(3, 0.5, 4)
    with pytest.raises(ParameterError):
        contains(3, None, 0.0)
    with pytest.raises(ParameterError):
        extreme_points(7, 0.5)


# --- compiled kernel against the numpy fallback ---------------------------------


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.floats(0.01, 1.0), st.integers(0, 2**31 - 1))
def test_backend_parity(r, delta, seed):
    rng = np.random.default_rng(seed)
    s = generate_scheme(r, delta)
    mu = rng.uniform(-40, 2, 64) + 1j * rng.uniform(-20, 20, 64)
    ref = _kernels_py.max_root_modulus(s.c, s.b, mu)
    got = _backend.max_root_modulus(s.c, s.b, mu)
    np.testing.assert_allclose(got, ref, rtol=1e-9, atol=1e-12)
    inside = mu[ref < 0.99]
    if inside.size:
        assert _backend.first_exceeding(s.c, s.b, inside, 0.99) == -1
    idx = _kernels_py.first_exceeding(s.c, s.b, mu, 1.0)
    assert _backend.first_exceeding(s.c, s.b, mu, 1.0) == idx


def test_backend_flag():
    assert _backend.BACKEND in ("compiled", "python")


def test_pure_python_switch():
    import os
    import subprocess
    import sys

    env = dict(os.environ, IMEXSTAB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import imexstab; print(imexstab.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
