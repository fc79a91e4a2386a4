"""Fourier pseudospectral diffusion solvers on the periodic unit cell.

Two problems are covered:

* 1D variable-coefficient diffusion ``u_t = (d(x) u_x)_x + f`` split as
  ``A = sigma D^2`` (implicit) and ``B = D (d - sigma) D`` (explicit);
* 3D porous-medium diffusion ``rho_t = a div(rho^gamma grad rho) + f`` split
  as ``A = a sigma Lap`` and ``B = a div((rho^gamma - sigma) grad)``.

For the porous problem ``sigma`` is measured in units of the mobility
``a``, so that the interval recipe is applied to ``d = rho^gamma``.

Wavenumbers follow the usual periodic layout, ``2 pi j`` for
``0 <= j < N/2``, ``N pi`` at the Nyquist index and ``2 pi (j - N)`` above
it. The Nyquist coefficient is dropped in first-derivative products, which
keeps real data real; the Laplacian keeps ``-(N pi)^2``. The explicit part
is always built from the first-derivative pair, so it vanishes on Nyquist
modes and the implicit part damps them; were ``B`` to subtract the full
Laplacian, those modes would sit at ``mu = 1`` on the diagram boundary and
grow polynomially. ``A + B`` equals the unsplit operator except on Nyquist
modes. The dense matrices used by :func:`check_interval_bounds` keep
``i N pi`` instead so that ``D D = D^2`` holds exactly and the bounds apply
as stated.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft

from . import __version__
from ._threads import fft_workers
from .coeffs import generate_scheme
from .errors import DomainError, GridError, ParameterError
from .report import ConvergenceReport, observed_rates
from .spectra import SplittingPair, generalized_eigenvalues, real_extent, wp_operator
from .stepper import Bootstrap, initialize, integrate

__all__ = [
    "PeriodicGrid",
    "spectral_derivative",
    "VarDiffProblem",
    "VarDiffOperator",
    "manufactured_vardiff",
    "vardiff_matrices",
    "IntervalBoundsReport",
    "check_interval_bounds",
    "run_vardiff_convergence",
    "PorousProblem",
    "PorousOperator",
    "manufactured_porous",
    "gaussian_porous",
    "run_porous_convergence",
    "run_gaussian_ratios",
    "gaussian_peak_decay",
    "decay_slope",
    "NYQUIST_NOTE",
]

NYQUIST_NOTE = ("nyquist coefficient dropped in first derivatives, kept as -(N pi)^2 in the implicit Laplacian; "
                "explicit part built from first derivatives only")


# --- grid -------------------------------------------------------------------


class PeriodicGrid:
    """Uniform periodic grid on ``[0, 1)^dims``.

    Parameters
    ----------
    N : int
        Even number of nodes per axis.
    dims : int
        1 or 3.
    """

    def __init__(self, N: int, dims: int = 1):
        if int(N) != N or N < 4 or N % 2:
            raise GridError(f"N must be an even integer >= 4, got {N}")
        if dims not in (1, 3):
            raise GridError(f"dims must be 1 or 3, got {dims}")
        self.N = int(N)
        self.dims = int(dims)
        self.h = 1.0 / self.N
        self.x = np.arange(self.N) * self.h
        self.workers = fft_workers()
        N = self.N
        k_half = 2 * np.pi * np.arange(N // 2 + 1)  # last entry is N pi
        k_half_d = k_half.copy()
        k_half_d[-1] = 0.0
        k_full = self.wavenumbers()
        k_full_d = k_full.copy()
        k_full_d[N // 2] = 0.0
        if self.dims == 1:
            self.shape = (N,)
            self.lap_symbol = -(k_half**2)
            self.deriv_symbols = (1j * k_half_d,)
        else:
            self.shape = (N, N, N)
            kx, ky, kz = k_full[:, None, None], k_full[None, :, None], k_half[None, None, :]
            self.lap_symbol = -(kx**2 + ky**2 + kz**2)
            self.deriv_symbols = (
                1j * k_full_d[:, None, None],
                1j * k_full_d[None, :, None],
                1j * k_half_d[None, None, :],
            )

    def wavenumbers(self) -> np.ndarray:
        """Wavenumbers of the full complex transform, Nyquist entry ``+N pi``."""
        j = np.arange(self.N)
        xi = 2 * np.pi * np.where(j < self.N // 2, j, j - self.N).astype(float)
        xi[self.N // 2] = self.N * np.pi
        return xi

    def nodes(self):
        """Node coordinates: an array in 1D, a tuple of three broadcastable arrays in 3D."""
        if self.dims == 1:
            return self.x
        return self.x[:, None, None], self.x[None, :, None], self.x[None, None, :]

    def forward(self, u: np.ndarray) -> np.ndarray:
        if self.dims == 1:
            return sfft.rfft(u, workers=self.workers)
        return sfft.rfftn(u, workers=self.workers)

    def inverse(self, u_hat: np.ndarray) -> np.ndarray:
        if self.dims == 1:
            return sfft.irfft(u_hat, n=self.N, workers=self.workers)
        return sfft.irfftn(u_hat, s=self.shape, workers=self.workers)

    def check_field(self, u, name: str = "u") -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != self.shape:
            raise GridError(f"{name} has shape {u.shape}, grid expects {self.shape}")
        return u


def spectral_derivative(grid: PeriodicGrid, u, order: int = 1) -> np.ndarray:
    """Spectral derivative of nodal values.

    ``order=1`` returns ``u'`` in 1D and the gradient (leading axis of
    length 3) in 3D; ``order=2`` returns the second derivative or the
    Laplacian.
    """
    u = grid.check_field(u)
    u_hat = grid.forward(u)
    if order == 2:
        return grid.inverse(grid.lap_symbol * u_hat)
    if order != 1:
        raise ParameterError("order must be 1 or 2")
    if grid.dims == 1:
        return grid.inverse(grid.deriv_symbols[0] * u_hat)
    return np.stack([grid.inverse(s * u_hat) for s in grid.deriv_symbols])


class _TransformCache:
    """Remembers the transform of the last field seen, by identity.

    The stepper applies ``A`` and ``B`` to the same new state back to back,
    so this saves one forward transform per step.
    """

    def __init__(self, grid: PeriodicGrid):
        self.grid = grid
        self._u = None
        self._u_hat = None

    def __call__(self, u: np.ndarray) -> np.ndarray:
        if u is not self._u:
            self._u_hat = self.grid.forward(u)
            self._u = u
        return self._u_hat


# --- 1D variable-coefficient diffusion ---------------------------------------


@dataclass
class VarDiffProblem:
    """``u_t = (d u_x)_x + f`` on a 1D periodic grid.

    Attributes
    ----------
    grid : PeriodicGrid
    d : ndarray
        Positive nodal diffusion coefficient.
    sigma : float
        Scale of the implicit Laplacian.
    forcing : callable, optional
        ``forcing(x, t)`` returning nodal values.
    exact : callable, optional
        ``exact(x, t)``, used for starting values and errors.
    """

    grid: PeriodicGrid
    d: np.ndarray
    sigma: float
    forcing: Callable[[np.ndarray, float], np.ndarray] | None = None
    exact: Callable[[np.ndarray, float], np.ndarray] | None = None

    def __post_init__(self):
        if self.grid.dims != 1:
            raise GridError("VarDiffProblem needs a 1D grid")
        self.d = self.grid.check_field(self.d, "d")
        if not np.all(np.isfinite(self.d)) or self.d.min() <= 0:
            raise ParameterError("d must be finite and positive")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ParameterError("sigma must be positive")

    @property
    def d_min(self) -> float:
        return float(self.d.min())

    @property
    def d_max(self) -> float:
        return float(self.d.max())

    @property
    def d2_min(self) -> float:
        """Second-smallest nodal value."""
        return float(np.sort(self.d)[1])

    @property
    def d2_max(self) -> float:
        """Second-largest nodal value."""
        return float(np.sort(self.d)[-2])


class VarDiffOperator:
    """Split operator for :class:`VarDiffProblem`, transforms via real FFTs."""

    def __init__(self, problem: VarDiffProblem):
        self.problem = problem
        self.grid = problem.grid
        self._hat = _TransformCache(self.grid)
        self._dk = self.grid.deriv_symbols[0]
        self._lap = self.grid.lap_symbol
        self._d_shift = problem.d - problem.sigma

    def apply_A(self, u):
        return self.grid.inverse(self.problem.sigma * self._lap * self._hat(u))

    def apply_B(self, u, t):
        g = self.grid
        ux = g.inverse(self._dk * self._hat(u))
        out = g.inverse(self._dk * g.forward(self._d_shift * ux))
        if self.problem.forcing is not None:
            out = out + self.problem.forcing(g.x, t)
        return out

    def apply_full(self, u):
        """Unsplit operator ``D (d D u)`` without forcing."""
        g = self.grid
        ux = g.inverse(self._dk * g.forward(u))
        return g.inverse(self._dk * g.forward(self.problem.d * ux))

    def solve_shifted(self, alpha, beta, rhs):
        g = self.grid
        return g.inverse(g.forward(rhs) / (alpha - beta * self.problem.sigma * self._lap))


def manufactured_vardiff(N: int = 64, sigma: float = 2.69) -> VarDiffProblem:
    """``d = 4 + 3 cos(2 pi x)`` with exact solution ``sin(20 t) exp(sin(2 pi x))``.

    The forcing is evaluated analytically.
    """
    grid = PeriodicGrid(N, 1)
    tp = 2 * np.pi

    def exact(x, t):
        return np.sin(20 * t) * np.exp(np.sin(tp * x))

    def forcing(x, t):
        e = np.exp(np.sin(tp * x))
        d = 4 + 3 * np.cos(tp * x)
        dd = -3 * tp * np.sin(tp * x)
        ex = tp * np.cos(tp * x) * e
        exx = tp**2 * (np.cos(tp * x) ** 2 - np.sin(tp * x)) * e
        return 20 * np.cos(20 * t) * e - np.sin(20 * t) * (dd * ex + d * exx)

    d = 4 + 3 * np.cos(tp * grid.x)
    return VarDiffProblem(grid=grid, d=d, sigma=sigma, forcing=forcing, exact=exact)


def vardiff_matrices(d, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    """Dense ``(A, B) = (sigma D^2, D diag(d - sigma) D)``.

    ``D`` is the full spectral differentiation matrix with Nyquist
    wavenumber ``N pi``, so it is skew-Hermitian and ``D D = D^2``.
    """
    d = np.asarray(d, dtype=float)
    grid = PeriodicGrid(d.size, 1)
    xi = grid.wavenumbers()
    eye = np.eye(grid.N)
    D = np.fft.ifft(1j * xi[:, None] * np.fft.fft(eye, axis=0), axis=0)
    A = sigma * (D @ D)
    A = 0.5 * (A + A.conj().T)
    B = D @ ((d - sigma)[:, None] * D)
    B = 0.5 * (B + B.conj().T)
    return A, B


@dataclass
class IntervalBoundsReport:
    """Spectral sets of the variable-coefficient splitting against their bounds.

    ``margins`` holds the slack of each inequality (nonnegative when it
    holds); ``sharpness`` is the larger distance between an endpoint of
    ``W_1`` and the bound it approaches.
    """

    N: int
    sigma: float
    w1: tuple[float, float]
    mu: tuple[float, float]
    mu_imag_max: float
    bounds: dict
    margins: dict
    sharpness: float
    tol: float = 1e-10

    @property
    def holds(self) -> bool:
        return all(m >= -self.tol for m in self.margins.values())

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        out["holds"] = self.holds
        return out


def check_interval_bounds(d, sigma: float) -> IntervalBoundsReport:
    """Compare ``W_1`` and the generalized eigenvalues with the nodal bounds.

    With ``s = 1 / sigma`` and sorted nodal values of ``d``, the checks are

    * ``1 - s d_max <= min W_1`` and ``max W_1 <= 1 - s d_min``;
    * ``1 - s d_max <= mu_min <= 1 - s d_(N-1)``;
    * ``1 - s d_(2) <= mu_max <= 1 - s d_min``.

    Everything is computed densely on the zero-mean subspace, so keep
    ``N <= 256``.
    """
    d = np.asarray(d, dtype=float)
    if d.size > 256:
        raise GridError("dense bound check limited to N <= 256")
    if d.min() <= 0:
        raise ParameterError("d must be positive")
    A, B = vardiff_matrices(d, sigma)
    pair = SplittingPair(A, B, null_basis=np.ones(d.size))
    w_lo, w_hi = real_extent(wp_operator(pair, 1.0))
    mu = generalized_eigenvalues(pair).points
    ds = np.sort(d)
    s = 1.0 / sigma
    b = {
        "w1_lower": 1 - s * ds[-1],
        "w1_upper": 1 - s * ds[0],
        "mu_min_lower": 1 - s * ds[-1],
        "mu_min_upper": 1 - s * ds[-2],
        "mu_max_lower": 1 - s * ds[1],
        "mu_max_upper": 1 - s * ds[0],
    }
    mu_min, mu_max = float(mu.real.min()), float(mu.real.max())
    m = {
        "w1_lower": w_lo - b["w1_lower"],
        "w1_upper": b["w1_upper"] - w_hi,
        "mu_min_lower": mu_min - b["mu_min_lower"],
        "mu_min_upper": b["mu_min_upper"] - mu_min,
        "mu_max_lower": mu_max - b["mu_max_lower"],
        "mu_max_upper": b["mu_max_upper"] - mu_max,
    }
    scale = 1.0 + s * ds[-1]
    return IntervalBoundsReport(
        N=d.size,
        sigma=float(sigma),
        w1=(w_lo, w_hi),
        mu=(mu_min, mu_max),
        mu_imag_max=float(np.abs(mu.imag).max()),
        bounds={k: float(v) for k, v in b.items()},
        margins={k: float(v) for k, v in m.items()},
        sharpness=float(max(m["w1_lower"], m["w1_upper"])),
        tol=1e-10 * scale,
    )


# --- shared driver ------------------------------------------------------------


def _check_ks(ks: Sequence[float], t_final: float) -> list[tuple[float, int]]:
    out = []
    for k in ks:
        if not (k > 0):
            raise ParameterError("time steps must be positive")
        n = int(round(t_final / k))
        if n < 1 or abs(n * k - t_final) > 1e-9 * t_final:
            raise ParameterError(f"t_final={t_final} is not a whole number of steps k={k}")
        out.append((float(k), n))
    return out


def _exact_history(exact, x, k: float, r: int) -> list[np.ndarray]:
    """Exact states at ``t = -(r-1)k, ..., -k, 0``, oldest first."""
    return [exact(x, -(r - 1 - j) * k) for j in range(r)]


def _convergence(title: str, make_op, exact, x, orders, ks, delta: float, t_final: float,
                 metadata: dict) -> ConvergenceReport:
    steps = _check_ks(ks, t_final)
    report = ConvergenceReport(title=title, metadata=dict(metadata))
    t_start = time.perf_counter()
    u_exact = exact(x, t_final)
    for r in orders:
        scheme = generate_scheme(int(r), delta)
        errs = []
        for k, n in steps:
            op = make_op()
            st = initialize(op, scheme, k, _exact_history(exact, x, k, scheme.order), t0=0.0)
            integrate(st, op, n_steps=n)
            errs.append(float(np.max(np.abs(st.current - u_exact))))
        ksr = [k for k, _ in steps]
        report.add_series(r, ksr, [n for _, n in steps], errs, observed_rates(ksr, errs))
    report.timing["wall_seconds"] = time.perf_counter() - t_start
    return report


def _base_metadata(kind: str, **kw) -> dict:
    meta = {"problem": kind, "version": __version__, "nyquist": NYQUIST_NOTE, "norm": "discrete max norm"}
    meta.update(kw)
    return meta


def run_vardiff_convergence(orders: Sequence[int] = (1, 2, 3, 4, 5), ks: Sequence[float] = tuple(2.0**-j for j in range(0, 16)),
                            N: int = 64, delta: float = 0.1732, sigma: float = 2.69,
                            t_final: float = 5.0) -> ConvergenceReport:
    """Temporal convergence for the manufactured 1D problem.

    Starts from exact history, integrates to ``t_final`` and reports the
    discrete max-norm error and observed rates per order.
    """
    prob = manufactured_vardiff(N, sigma)
    meta = _base_metadata("vardiff1d", N=N, delta=delta, sigma=sigma, t_final=t_final,
                          forcing="analytic", init="exact history")
    return _convergence("variable-coefficient diffusion, 1D", lambda: VarDiffOperator(prob), prob.exact,
                        prob.grid.x, orders, ks, delta, t_final, meta)


# --- 3D porous-medium diffusion ------------------------------------------------


@dataclass
class PorousProblem:
    """``rho_t = a div(rho^gamma grad rho) + f`` on a 3D periodic grid.

    Attributes
    ----------
    grid : PeriodicGrid
    sigma : float
        Implicit Laplacian scale relative to ``a``.
    gamma : float
    a : float
    forcing : callable, optional
        ``forcing(x, t)`` with ``x`` the tuple of node coordinates.
    exact : callable, optional
    initial : ndarray, optional
    """

    grid: PeriodicGrid
    sigma: float
    gamma: float = 5.0 / 3.0
    a: float = 1.0
    forcing: Callable | None = None
    exact: Callable | None = None
    initial: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.grid.dims != 3:
            raise GridError("PorousProblem needs a 3D grid")
        if not (self.gamma >= 0 and math.isfinite(self.gamma)):
            raise ParameterError("gamma must be finite and nonnegative")
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ParameterError("a must be positive")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ParameterError("sigma must be positive")


class PorousOperator:
    """Split operator for :class:`PorousProblem`.

    ``apply_B`` evaluates ``(rho^gamma - sigma) grad rho`` pointwise
    without dealiasing and raises :class:`DomainError` on negative density.
    """

    def __init__(self, problem: PorousProblem):
        self.problem = problem
        self.grid = problem.grid
        self._hat = _TransformCache(self.grid)
        self._nodes = self.grid.nodes()
        self._a_sigma = problem.a * problem.sigma
        # div(grad) with the Nyquist entries of each derivative dropped
        self._divgrad = sum(s * s for s in self.grid.deriv_symbols).real

    def apply_A(self, rho):
        return self.grid.inverse(self._a_sigma * self.grid.lap_symbol * self._hat(rho))

    def apply_B(self, rho, t):
        g, p = self.grid, self.problem
        if not np.all(np.isfinite(rho)):
            raise DomainError("density is not finite")
        if rho.min() < 0:
            raise DomainError(f"negative density {rho.min():.3e} in rho**gamma")
        rho_hat = self._hat(rho)
        power = rho**p.gamma
        acc = -p.sigma * self._divgrad * rho_hat
        for s in g.deriv_symbols:
            acc = acc + s * g.forward(power * g.inverse(s * rho_hat))
        out = g.inverse(p.a * acc)
        if p.forcing is not None:
            out = out + p.forcing(self._nodes, t)
        return out

    def apply_full(self, rho):
        """``a div(rho^gamma grad rho)`` without forcing."""
        g, p = self.grid, self.problem
        rho_hat = g.forward(rho)
        power = rho**p.gamma
        acc = 0
        for s in g.deriv_symbols:
            acc = acc + s * g.forward(power * g.inverse(s * rho_hat))
        return g.inverse(p.a * acc)

    def solve_shifted(self, alpha, beta, rhs):
        g = self.grid
        return g.inverse(g.forward(rhs) / (alpha - beta * self._a_sigma * g.lap_symbol))


class _PorousForcing:
    """Analytic forcing for ``rho* = 2e + exp(sin 4 pi x) cos 2 pi y cos 2 pi z cos t``.

    The spatial factors are computed once per node set.
    """

    def __init__(self, gamma: float, a: float):
        self.gamma, self.a = gamma, a
        self._key = None

    def _spatial(self, x):
        if self._key is not x:
            X, Y, Z = x
            fp, tp = 4 * np.pi, 2 * np.pi
            E = np.exp(np.sin(fp * X))
            Ex = fp * np.cos(fp * X) * E
            Exx = fp**2 * (np.cos(fp * X) ** 2 - np.sin(fp * X)) * E
            cy, sy = np.cos(tp * Y), np.sin(tp * Y)
            cz, sz = np.cos(tp * Z), np.sin(tp * Z)
            S = E * cy * cz
            grad2 = (Ex * cy * cz) ** 2 + (E * tp * sy * cz) ** 2 + (E * cy * tp * sz) ** 2
            lap = (Exx - 2 * tp**2 * E) * cy * cz
            self._S, self._grad2, self._lap = S, grad2, lap
            self._key = x
        return self._S, self._grad2, self._lap

    def __call__(self, x, t):
        S, grad2, lap = self._spatial(x)
        c, s = math.cos(t), math.sin(t)
        rho = 2 * math.e + S * c
        pm1 = rho ** (self.gamma - 1)
        div = self.gamma * pm1 * (c * c) * grad2 + pm1 * rho * c * lap
        return -S * s - self.a * div


def _porous_exact(x, t):
    X, Y, Z = x
    return 2 * math.e + np.exp(np.sin(4 * np.pi * X)) * np.cos(2 * np.pi * Y) * np.cos(2 * np.pi * Z) * math.cos(t)


def manufactured_porous(N: int = 64, sigma: float = 13.8, gamma: float = 5.0 / 3.0, a: float = 1.0) -> PorousProblem:
    """Porous problem with the exact solution
    ``2e + exp(sin 4 pi x) cos(2 pi y) cos(2 pi z) cos t`` and analytic forcing."""
    return PorousProblem(grid=PeriodicGrid(N, 3), sigma=sigma, gamma=gamma, a=a,
                         forcing=_PorousForcing(gamma, a), exact=_porous_exact)


def gaussian_porous(N: int = 128, sigma: float = 2.616, gamma: float = 5.0 / 3.0, a: float = 2.0**-4,
                    width: float = 0.15) -> PorousProblem:
    """Unforced porous problem from ``1 + exp(-|x - c|^2 / width^2)``, ``c`` the cell centre."""
    grid = PeriodicGrid(N, 3)
    X, Y, Z = grid.nodes()
    r2 = (X - 0.5) ** 2 + (Y - 0.5) ** 2 + (Z - 0.5) ** 2
    rho0 = 1.0 + np.exp(-r2 / width**2)
    return PorousProblem(grid=grid, sigma=sigma, gamma=gamma, a=a, initial=rho0)


def run_porous_convergence(orders: Sequence[int] = (1, 2, 3, 4, 5), ks: Sequence[float] = tuple(2.0**-j for j in range(3, 12)),
                           N: int = 64, delta: float = 0.19166, sigma: float = 13.8, t_final: float = 1.0,
                           gamma: float = 5.0 / 3.0, a: float = 1.0) -> ConvergenceReport:
    """Temporal convergence for the manufactured porous-medium problem."""
    prob = manufactured_porous(N, sigma, gamma, a)
    meta = _base_metadata("porous3d", N=N, delta=delta, sigma=sigma, t_final=t_final, gamma=gamma, a=a,
                          forcing="analytic", init="exact history")
    return _convergence("porous-medium diffusion, 3D manufactured", lambda: PorousOperator(prob), prob.exact,
                        prob.grid.nodes(), orders, ks, delta, t_final, meta)


def _gaussian_solution(prob: PorousProblem, r: int, delta: float, k: float, t_final: float, substeps: int,
                       callback=None):
    op = PorousOperator(prob)
    scheme = generate_scheme(r, delta)
    st = initialize(op, scheme, k, Bootstrap(prob.initial, substeps=substeps))
    if callback is not None:
        # bootstrap states are part of the trajectory
        for j, u in enumerate(st.u):
            callback(j * k, u)
    n = _check_ks([k], t_final)[0][1] - (scheme.order - 1)
    cb = None if callback is None else (lambda s: callback(s.t, s.current))
    integrate(st, op, n_steps=n, callback=cb)
    return st.current


def run_gaussian_ratios(orders: Sequence[int] = (1, 2, 3), ks: Sequence[float] = tuple(2.0**-j for j in range(4, 13)),
                        N: int = 128, delta: float = 0.794, sigma: float = 2.616, a: float = 2.0**-4,
                        gamma: float = 5.0 / 3.0, t_final: float = 1.0, substeps: int = 64) -> ConvergenceReport:
    """Self-convergence ratios for the decaying Gaussian.

    For each ``k`` in ``ks`` the solutions at steps ``4k``, ``2k`` and ``k``
    are compared:

        R_k = log2(|rho_4k - rho_2k| / |rho_2k - rho_k|)

    in the discrete max norm. Rows report ``error = |rho_2k - rho_k|`` and
    ``rate = R_k``. Multistep history comes from :class:`Bootstrap` with
    ``substeps`` fine steps per coarse step. The largest drift of the
    discrete mean over all runs is stored under ``mean_drift``.
    """
    prob = gaussian_porous(N, sigma, gamma, a)
    ks = sorted((float(k) for k in ks), reverse=True)
    ladder = sorted({k * m for k in ks for m in (1, 2, 4)}, reverse=True)
    mean0 = float(prob.initial.mean())
    meta = _base_metadata("gaussian3d", N=N, delta=delta, sigma=sigma, a=a, gamma=gamma, t_final=t_final,
                          init=f"bootstrap, {substeps} substeps per level", columns="error=|rho_2k-rho_k|, rate=R_k")
    report = ConvergenceReport(title="porous-medium diffusion, 3D Gaussian self-convergence", metadata=meta)
    drift = 0.0
    t_start = time.perf_counter()
    for r in orders:
        sol = {}
        for k in ladder:
            sol[k] = _gaussian_solution(prob, int(r), delta, k, t_final, substeps)
            drift = max(drift, abs(float(sol[k].mean()) - mean0))
        diffs, ratios, steps = [], [], []
        for k in ks:
            e_coarse = float(np.max(np.abs(sol[4 * k] - sol[2 * k])))
            e_fine = float(np.max(np.abs(sol[2 * k] - sol[k])))
            diffs.append(e_fine)
            ratios.append(math.log2(e_coarse / e_fine))
            steps.append(int(round(t_final / k)))
        report.add_series(r, ks, steps, diffs, ratios)
    report.timing["wall_seconds"] = time.perf_counter() - t_start
    report.metadata["mean_drift"] = drift
    return report


def gaussian_peak_decay(order: int = 3, k: float = 2.0**-6, N: int = 128, delta: float = 0.794,
                        sigma: float = 2.616, a: float = 2.0**-4, gamma: float = 5.0 / 3.0,
                        t_final: float = 1.0, substeps: int = 64) -> dict:
    """Peak excess ``max rho(t) - mean rho`` along a Gaussian run.

    Returns
    -------
    dict
        ``t``, ``peak_excess`` and ``mean`` (arrays), plus ``mean0``, the
        discrete mean of the initial data.
    """
    prob = gaussian_porous(N, sigma, gamma, a)
    mean0 = float(prob.initial.mean())
    ts, peaks, means = [], [], []

    def record(t, u):
        ts.append(t)
        peaks.append(float(u.max()) - mean0)
        means.append(float(u.mean()))

    _gaussian_solution(prob, order, delta, k, t_final, substeps, callback=record)
    return {"t": np.array(ts), "peak_excess": np.array(peaks), "mean": np.array(means), "mean0": mean0}


def decay_slope(t, y, t_min: float) -> float:
    """Least-squares slope of ``log y`` against ``log t`` for ``t >= t_min``."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    sel = (t >= t_min) & (y > 0)
    if sel.sum() < 2:
        raise ParameterError("need at least two samples after t_min")
    return float(np.polyfit(np.log(t[sel]), np.log(y[sel]), 1)[0])
