"""Stokes channel flow with explicit pressure, one horizontal wavenumber at a time.

After a Fourier transform in ``x`` the horizontal velocity of mode ``xi``
obeys a non-local PDE on ``0 < y < 1`` with ``u(0) = u(1) = 0``. On the
interior nodes ``y_j = j h``, ``h = 1 / (Ny + 1)``, it is discretized as

    u_t = A0 u + Q u,   A0 = tridiag(1, -2, 1) / h**2 - xi**2 I,
    Q = a d1^T + b d2^T,

where ``d1 = e_1 / h`` and ``d2 = -e_Ny / h`` are one-sided wall-derivative
stencils and

    a_j = xi csch(xi) cosh(xi (y_j - 1)),   b_j = -xi csch(xi) cosh(xi y_j).

The splitting is ``A = sigma A0`` (implicit) and ``B = (1 - sigma) A0 + Q``
(explicit pressure), analysed with the weight ``p = 2``, for which

    W_2(sigma A0, B) = 1 - 1/sigma + W_2(A0, Q) / sigma.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from ._threads import fft_workers
from .coeffs import ImExScheme, generate_scheme
from .errors import GridError, InstabilityError, ParameterError
from .recipes import certify_sets, optimal_interval_params, sbdf_diffusion_feasible
from .spectra import SpectralSet, imag_extent, numerical_range, real_extent, rescale
from .stepper import GROWTH_LIMIT, initialize, integrate

__all__ = [
    "MAX_NY",
    "ChannelMode",
    "ModeSpectra",
    "ChannelParameters",
    "ChannelOperator",
    "build_mode",
    "pressure_profiles",
    "w2_mode",
    "split_set",
    "wmax_sweep",
    "channel_parameters",
    "integrate_mode",
    "instability_probe",
]

MAX_NY = 512


def pressure_profiles(xi: float, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """The vectors ``a(xi)`` and ``b(xi)`` on the nodes ``y``.

    Uses ``csch(x) cosh(x s) = (e^{x(|s|-1)} + e^{-x(|s|+1)}) / (1 - e^{-2x})``
    with ``x = |xi|``, which cannot overflow. Both vectors vanish at
    ``xi = 0``, where the pressure of the mode is zero.
    """
    y = np.asarray(y, dtype=float)
    x = abs(float(xi))
    if x == 0.0:
        return np.zeros_like(y), np.zeros_like(y)

    def xcc(s):
        s = np.abs(s)
        return x * (np.exp(x * (s - 1)) + np.exp(-x * (s + 1))) / (-math.expm1(-2 * x))

    return xcc(y - 1), -xcc(y)


@dataclass(frozen=True, eq=False)
class ChannelMode:
    """Discretized channel mode.

    Attributes
    ----------
    xi : float
    Ny : int
    sigma : float
    y : ndarray
        Interior nodes.
    a, b : ndarray
        Pressure profiles.
    """

    xi: float
    Ny: int
    sigma: float
    y: np.ndarray = field(repr=False)
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)

    @property
    def h(self) -> float:
        return 1.0 / (self.Ny + 1)

    @property
    def A0(self) -> np.ndarray:
        n, h = self.Ny, self.h
        M = (np.diag(np.full(n, -2.0)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)) / h**2
        return M - self.xi**2 * np.eye(n)

    @property
    def Q(self) -> np.ndarray:
        Q = np.zeros((self.Ny, self.Ny))
        Q[:, 0] += self.a / self.h
        Q[:, -1] -= self.b / self.h
        return Q

    @property
    def B(self) -> np.ndarray:
        return (1.0 - self.sigma) * self.A0 + self.Q

    def apply_A0(self, u: np.ndarray) -> np.ndarray:
        h2 = self.h**2
        out = -2.0 * u
        out[1:] += u[:-1]
        out[:-1] += u[1:]
        return out / h2 - self.xi**2 * u

    def apply_Q(self, u: np.ndarray) -> np.ndarray:
        return self.a * (u[0] / self.h) + self.b * (-u[-1] / self.h)


def build_mode(xi: float, Ny: int, sigma: float = 1.0) -> ChannelMode:
    """Assemble mode ``xi`` on ``Ny`` interior nodes with splitting parameter ``sigma``."""
    if int(Ny) != Ny or Ny < 4:
        raise GridError(f"Ny must be an integer >= 4, got {Ny}")
    if not math.isfinite(xi):
        raise ParameterError("xi must be finite")
    if not (math.isfinite(sigma) and sigma > 0):
        raise ParameterError("sigma must be positive")
    Ny = int(Ny)
    y = np.arange(1, Ny + 1) / (Ny + 1)
    a, b = pressure_profiles(xi, y)
    return ChannelMode(xi=float(xi), Ny=Ny, sigma=float(sigma), y=y, a=a, b=b)


@dataclass(frozen=True, eq=False)
class ModeSpectra:
    """``W_2`` sets of one mode.

    Attributes
    ----------
    base : SpectralSet
        ``W_2(A0, Q)``.
    split : SpectralSet
        ``W_2(sigma A0, B)`` from the affine identity.
    wmax, wmin : float
        Exact real extremes of ``W_2(A0, Q)``.
    imag_band : float
        Largest ``|Im|`` over ``W_2(A0, Q)``.
    """

    xi: float
    Ny: int
    sigma: float
    base: SpectralSet = field(repr=False)
    split: SpectralSet = field(repr=False)
    wmax: float
    wmin: float
    imag_band: float


def _w2_operator(mode: ChannelMode) -> np.ndarray:
    """``Q (-A0)^{-1}``, whose numerical range is ``W_2(A0, Q)``."""
    if mode.Ny > MAX_NY:
        raise GridError(f"dense W_2 computation is limited to Ny <= {MAX_NY}")
    neg = -mode.A0
    # (-A0)^{-1} is symmetric, so Q (-A0)^{-1} = ((-A0)^{-1} Q^T)^T
    return sla.solve(neg, mode.Q.T, assume_a="pos").T


def w2_mode(mode: ChannelMode, n_angles: int = 256, refine: int | None = None) -> ModeSpectra:
    """Compute ``W_2(A0, Q)``, its real extremes and the shifted set for ``mode.sigma``."""
    X = _w2_operator(mode)
    base = numerical_range(X, n_angles=n_angles, refine=refine)
    base = SpectralSet(kind=base.kind, points=base.points, hull=base.hull, angles=base.angles,
                       support=base.support, p=2.0)
    wmin, wmax = real_extent(X)
    lo, hi = imag_extent(X)
    return ModeSpectra(xi=mode.xi, Ny=mode.Ny, sigma=mode.sigma, base=base, split=split_set(base, mode.sigma),
                       wmax=wmax, wmin=wmin, imag_band=max(abs(lo), abs(hi)))


def split_set(base: SpectralSet, sigma: float) -> SpectralSet:
    """Map ``W_2(A0, Q)`` to ``W_2(sigma A0, (1 - sigma) A0 + Q)``: ``w -> 1 - 1/sigma + w/sigma``.

    Since ``L = A0 + Q``, the set of ``(A0, L)`` is ``base - 1`` and the
    generic rescaling ``w -> 1 + w/sigma`` applies to that.
    """
    support = None if base.support is None else base.support - np.cos(base.angles)
    shifted = SpectralSet(kind=base.kind, points=base.points - 1.0, hull=base.hull - 1.0, angles=base.angles,
                          support=support, p=base.p)
    return rescale(shifted, sigma)


def _wmax(xi: float, Ny: int) -> float:
    return real_extent(_w2_operator(build_mode(xi, Ny)))[1]


def wmax_sweep(xi_list, Ny: int) -> dict:
    """``W_max(xi)`` for each wavenumber, computed in parallel.

    Returns
    -------
    dict
        ``xi`` and ``wmax`` lists in input order, and ``decreasing``: whether
        ``W_max`` strictly decreases with ``|xi|`` over the distinct values.
    """
    xis = [float(x) for x in xi_list]
    if any(x <= 0 for x in xis):
        raise ParameterError("wavenumbers must be positive")
    with ThreadPoolExecutor(max_workers=max(1, fft_workers())) as pool:
        vals = list(pool.map(lambda x: _wmax(x, Ny), xis))
    distinct = sorted(set(xis))
    by_xi = {x: v for x, v in zip(xis, vals)}
    seq = [by_xi[x] for x in distinct]
    decreasing = all(b < a for a, b in zip(seq, seq[1:]))
    return {"xi": xis, "wmax": vals, "Ny": int(Ny), "decreasing": decreasing}


@dataclass
class ChannelParameters:
    """Outcome of :func:`channel_parameters`.

    Attributes
    ----------
    delta, sigma : float
    xi1 : float
        Smallest positive wavenumber.
    wmax, wmin : float
        Computed extremes of ``W_2(A0, Q)`` at ``xi1``.
    d_min, d_max : float
        Interval endpoints handed to the interval recipe.
    certified : bool
        ``W_2(sigma A0, B)`` lies inside the diagram.
    sbdf_feasible : bool
        Whether SBDF of the same order could handle the interval at all.
    """

    order: int
    delta: float
    sigma: float
    xi1: float
    Ny: int
    eta: float
    wmax: float
    wmin: float
    d_min: float
    d_max: float
    certified: bool
    sbdf_feasible: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def channel_parameters(Lx: float, Ny: int, r: int, eta: float = 0.1, wmax_step: float | None = 0.01,
                       n_angles: int = 256) -> ChannelParameters:
    """Pick ``(delta, sigma)`` for a channel of length ``Lx``.

    Stabilizing the smallest positive wavenumber ``xi1 = 2 pi / Lx`` covers
    every mode up to an ``O(h)`` margin, because ``W_max`` decreases with
    ``xi``. The real set ``[W_min, W_max]`` is mapped to the interval
    recipe with ``d_max = 1 - W_min`` and ``d_min = 1 - W_max``.

    Parameters
    ----------
    wmax_step : float or None
        ``W_max`` is rounded up to a multiple of this step before use,
        which only enlarges the set being stabilized. ``None`` uses the
        computed value as is.
    """
    if not (Lx > 0 and math.isfinite(Lx)):
        raise ParameterError("Lx must be positive")
    generate_scheme(r, 1.0)
    xi1 = 2 * math.pi / Lx
    mode = build_mode(xi1, Ny)
    spec = w2_mode(mode, n_angles=n_angles)
    wmax, wmin = spec.wmax, max(spec.wmin, 0.0)
    w_used = wmax if wmax_step is None else math.ceil(wmax / wmax_step - 1e-9) * wmax_step
    d_min, d_max = 1.0 - w_used, 1.0 - wmin
    delta, sigma = optimal_interval_params(r, d_min, d_max, eta)
    ok = certify_sets(generate_scheme(r, delta), [split_set(spec.base, sigma)])
    return ChannelParameters(order=r, delta=delta, sigma=sigma, xi1=xi1, Ny=int(Ny), eta=eta, wmax=wmax,
                             wmin=spec.wmin, d_min=d_min, d_max=d_max, certified=ok,
                             sbdf_feasible=sbdf_diffusion_feasible(r, d_min, d_max))


class ChannelOperator:
    """Split operator ``A = sigma A0``, ``B = (1 - sigma) A0 + Q`` with banded solves."""

    def __init__(self, mode: ChannelMode):
        self.mode = mode
        self._chol: dict[tuple[float, float], np.ndarray] = {}

    def apply_A(self, u):
        return self.mode.sigma * self.mode.apply_A0(u)

    def apply_B(self, u, t):
        m = self.mode
        return (1.0 - m.sigma) * m.apply_A0(u) + m.apply_Q(u)

    def solve_shifted(self, alpha, beta, rhs):
        key = (float(alpha), float(beta))
        cb = self._chol.get(key)
        if cb is None:
            m = self.mode
            s = beta * m.sigma
            # alpha I - s A0 is symmetric positive definite and tridiagonal
            ab = np.empty((2, m.Ny))
            ab[0, 0] = 0.0
            ab[0, 1:] = -s / m.h**2
            ab[1, :] = alpha + s * (2.0 / m.h**2 + m.xi**2)
            cb = sla.cholesky_banded(ab)
            self._chol[key] = cb
        return sla.cho_solve_banded((cb, False), rhs)


def integrate_mode(mode: ChannelMode, scheme: ImExScheme, k: float, steps: int, u0,
                   growth_limit: float = GROWTH_LIMIT) -> np.ndarray:
    """Norm history of the unforced mode equation.

    The starting history repeats ``u0``. Returns the 2-norms of the newest
    state after initialization and after each step; raises
    :class:`InstabilityError` when the growth test fails.
    """
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (mode.Ny,):
        raise GridError(f"u0 must have shape ({mode.Ny},)")
    op = ChannelOperator(mode)
    st = initialize(op, scheme, k, [u0.copy() for _ in range(scheme.order)])
    norms = [float(np.linalg.norm(st.current))]
    integrate(st, op, n_steps=int(steps), callback=lambda s: norms.append(float(np.linalg.norm(s.current))),
              growth_limit=growth_limit)
    return np.array(norms)


def instability_probe(mode: ChannelMode, scheme: ImExScheme, ks, steps: int = 1000, seed: int = 0,
                      growth_limit: float = GROWTH_LIMIT) -> list[dict]:
    """Run :func:`integrate_mode` over a ladder of step sizes from a random start.

    Returns one record per ``k`` with ``stable``, ``blowup_step`` (or None)
    and the final or offending norm.
    """
    rng = np.random.default_rng(seed)
    u0 = rng.standard_normal(mode.Ny)
    out = []
    for k in ks:
        try:
            norms = integrate_mode(mode, scheme, float(k), steps, u0, growth_limit)
            out.append({"k": float(k), "stable": True, "blowup_step": None, "norm": float(norms[-1])})
        except InstabilityError as exc:
            out.append({"k": float(k), "stable": False, "blowup_step": exc.step, "norm": exc.norm})
    return out
