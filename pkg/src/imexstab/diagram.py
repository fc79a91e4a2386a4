"""Unconditional-stability diagrams of the ImEx family.

For an order-``r`` scheme with parameter ``delta`` the diagram is

    D = { mu in C : every root of c(z) - mu b(z) lies in |z| < 1 }.

A splitting ``(A, B)`` is unconditionally stable when the relevant spectral
set of ``B`` relative to ``A`` lies inside ``D``. Membership is decided from
companion-matrix roots; the boundary is traced by the locus
``mu(z) = c(z) / b(z)`` on an arc of the unit circle.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .coeffs import ImExScheme, generate_scheme
from .errors import ParameterError

__all__ = [
    "StabilityDiagram",
    "locus_start",
    "boundary_locus",
    "extreme_points",
    "asymptotic_circle",
    "root_modulus",
    "contains",
    "all_inside",
    "stability_diagram",
]

MEMBERSHIP_TOL = 1e-9


def _scheme(r_or_scheme, delta=None) -> ImExScheme:
    if isinstance(r_or_scheme, ImExScheme):
        return r_or_scheme
    if delta is None:
        raise ParameterError("delta is required when an order is given")
    return generate_scheme(r_or_scheme, delta)


def locus_start(r: int, delta: float) -> complex:
    """Point on the unit circle where the boundary arc starts.

    The arc runs from ``z0`` counter-clockwise to ``conj(z0)``; its image
    under ``c/b`` is the boundary of the diagram, and ``mu(z0)`` is the
    rightmost point of the diagram on the real axis.
    """
    _scheme(r, delta)
    if r == 1:
        return 1.0 + 0.0j
    e = np.exp(1j * np.pi / r)
    cr = np.cos(np.pi / r)
    z0 = (2 - delta - 2 * (1 - delta) * cr * e) / (2 - delta - 2 * cr * e)
    return complex(z0 / abs(z0))


def boundary_locus(r: int, delta: float, n_samples: int = 4096) -> np.ndarray:
    """Sample the boundary of the diagram.

    The upper half of the arc ``arg z in [arg z0, pi]`` gets
    ``n_samples // 2 + 1`` points, which always include ``z = z0`` and
    ``z = -1``; the lower half is its mirror image. The result traces the
    closed curve from ``mu(z0)`` through ``mu(-1)`` and back.

    Returns
    -------
    ndarray of complex
    """
    if n_samples < 8:
        raise ParameterError("n_samples must be at least 8")
    scheme = _scheme(r, delta)
    theta0 = float(np.angle(locus_start(r, delta)))
    half = np.linspace(theta0, np.pi, n_samples // 2 + 1)
    theta = np.concatenate([half, 2 * np.pi - half[-2::-1]])
    z = np.exp(1j * theta)
    pv = np.polynomial.polynomial.polyval
    mu = pv(z, scheme.c) / pv(z, scheme.b)
    # the locus is symmetric about the real axis; enforce it exactly
    m = half.size
    mu[m:] = np.conj(mu[m - 2 :: -1])
    mu[m - 1] = mu[m - 1].real
    return mu


def extreme_points(r: int, delta: float) -> tuple[float, float]:
    """Leftmost and rightmost real points ``(m_l, m_r)`` of the diagram."""
    _scheme(r, delta)
    q = 1.0 - delta / 2.0
    m_left = 1.0 / (1.0 - q ** (-r))
    if r <= 2:
        # for r = 2 the secant blows up and the formula tends to 1
        m_right = 1.0
    else:
        m_right = 1.0 / (1.0 + (q / np.cos(np.pi / r)) ** (-r))
    return float(m_left), float(m_right)


def asymptotic_circle(r: int, delta: float) -> tuple[float, float]:
    """Center and radius of the circle approximating the diagram as delta -> 0."""
    _scheme(r, delta)
    radius = 1.0 / (r * delta)
    center = -radius + (r + 1) / (2.0 * r)
    return float(center), float(radius)


def root_modulus(r_or_scheme, delta=None, mu=0.0) -> np.ndarray:
    """Largest root modulus of ``c(z) - mu b(z)``, vectorized over ``mu``."""
    scheme = _scheme(r_or_scheme, delta)
    mu = np.asarray(mu, dtype=complex)
    out = _backend.max_root_modulus(scheme.c, scheme.b, mu)
    return out if mu.ndim else float(out.ravel()[0])


def contains(r_or_scheme, delta=None, mu=0.0, tol: float = MEMBERSHIP_TOL):
    """Membership test ``max |root| < 1 - tol``.

    Points on the boundary count as outside. Accepts a scalar or an array
    of ``mu``; returns a bool or a boolean array accordingly.
    """
    mods = root_modulus(r_or_scheme, delta, mu)
    if np.ndim(mods) == 0:
        return bool(mods < 1.0 - tol)
    return mods < 1.0 - tol


def all_inside(r_or_scheme, delta=None, points=(), tol: float = MEMBERSHIP_TOL) -> bool:
    """True when every point lies strictly inside the diagram (early exit)."""
    scheme = _scheme(r_or_scheme, delta)
    pts = np.ravel(np.asarray(points, dtype=complex))
    if pts.size == 0:
        return True
    if not np.all(np.isfinite(pts)):
        return False
    return _backend.first_exceeding(scheme.c, scheme.b, pts, 1.0 - tol) < 0


@dataclass(frozen=True, eq=False)
class StabilityDiagram:
    """Sampled diagram for one scheme.

    Attributes
    ----------
    scheme : ImExScheme
    locus : ndarray of complex
        Closed boundary curve.
    m_left, m_right : float
        Real-axis extremes from the closed forms.
    circle : tuple of float
        ``(center, radius)`` of the small-delta circle.
    """

    scheme: ImExScheme
    locus: np.ndarray = field(repr=False)
    m_left: float
    m_right: float
    circle: tuple[float, float]

    def contains(self, mu, tol: float = MEMBERSHIP_TOL):
        return contains(self.scheme, mu=mu, tol=tol)

    def to_dict(self) -> dict:
        return {
            "order": self.scheme.order,
            "delta": self.scheme.delta,
            "m_left": self.m_left,
            "m_right": self.m_right,
            "circle": {"center": self.circle[0], "radius": self.circle[1]},
            "locus": [[float(z.real), float(z.imag)] for z in self.locus],
        }


def stability_diagram(r: int, delta: float, n_samples: int = 4096) -> StabilityDiagram:
    """Build a :class:`StabilityDiagram` for order ``r`` and parameter ``delta``."""
    scheme = generate_scheme(r, delta)
    m_left, m_right = extreme_points(r, delta)
    return StabilityDiagram(
        scheme=scheme,
        locus=boundary_locus(r, delta, n_samples),
        m_left=m_left,
        m_right=m_right,
        circle=asymptotic_circle(r, delta),
    )
