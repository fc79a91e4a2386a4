"""Searches for stable ImEx parameters.

Three searches are offered, all built on the inclusion test
"spectral set inside the stability diagram":

* :func:`recipe_delta` fixes the splitting and finds the largest ``delta``;
* :func:`recipe_sigma` fixes the scheme and scans the splitting family
  ``A = sigma A0``, ``B = L - sigma A0`` for the smallest ``sigma``;
* :func:`recipe_joint` searches ``delta`` and ``sigma`` together.

Rescaling makes the ``sigma`` family cheap: if ``W`` is a spectral set of
``(A0, L)`` then ``1 + W / sigma`` is the set of ``(sigma A0, L - sigma A0)``.

For interval-valued sets (diffusion with variable coefficients) the
inclusion reduces to closed-form inequalities, see
:func:`interval_feasible` and :func:`optimal_interval_params`.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .coeffs import ImExScheme, generate_scheme
from .diagram import MEMBERSHIP_TOL, all_inside, extreme_points, root_modulus
from .errors import ParameterError
from .spectra import SpectralSet, SplittingPair, generalized_eigenvalues, rescale, w_p_set

__all__ = [
    "FeasibilityResult",
    "certify",
    "certify_sets",
    "recipe_delta",
    "recipe_sigma",
    "recipe_joint",
    "interval_feasible",
    "interval_sigma_bounds",
    "optimal_interval_params",
    "sbdf_gap_threshold",
    "sbdf_diffusion_feasible",
]

DELTA_FLOOR = 1e-6
NC_PROBE_DELTA = 1e-3
MIN_CERT_POINTS = 256
_SEARCH_POINTS = 128
_SIGMA_DECADES = (-6.0, 6.0)
_SIGMA_PER_DECADE = 5

# Largest SBDF-admissible ratio d_max / d_min for variable-coefficient
# diffusion with the interval splitting; orders 1 and 2 have no limit.
_SBDF_GAP_TABULATED = {1: math.inf, 2: math.inf, 3: 2.1429, 4: 1.2667, 5: 1.0931}


@dataclass
class FeasibilityResult:
    """Outcome of a parameter search.

    Attributes
    ----------
    feasible : bool
    delta_star : float or None
        Largest admissible ``delta`` found (before the safety factor).
    sigma_star : float or None
        Splitting parameter found by the search.
    sigma_range : tuple or None
        Feasible ``sigma`` interval at the recommended ``delta``;
        ``inf`` marks an unbounded end.
    delta, sigma : float or None
        Recommended values, certified by boundary sampling.
    reason : str
        Short explanation when infeasible.
    diagnostics : dict
    """

    feasible: bool
    delta_star: float | None = None
    sigma_star: float | None = None
    sigma_range: tuple[float, float] | None = None
    delta: float | None = None
    sigma: float | None = None
    reason: str = ""
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def clean(x):
            if isinstance(x, float) and not math.isfinite(x):
                return None
            if isinstance(x, (tuple, list)):
                return [clean(v) for v in x]
            if isinstance(x, dict):
                return {k: clean(v) for k, v in x.items()}
            if isinstance(x, np.generic):
                return clean(x.item())
            return x

        return clean(asdict(self))


# --- certification ----------------------------------------------------------


def _cert_points(S: SpectralSet) -> np.ndarray:
    if S.kind == "eigenvalues":
        return S.points
    per_edge = max(8, math.ceil(MIN_CERT_POINTS / max(S.hull.size, 1)))
    return S.boundary_samples(per_edge)


def _search_points(S: SpectralSet) -> np.ndarray:
    """A cheaper sample of the set for use inside search loops.

    The diagram is not convex, so polygon edges are sampled as well as
    vertices.
    """
    if S.kind == "eigenvalues":
        return S.points
    pts = S.boundary_samples(max(1, math.ceil(_SEARCH_POINTS / max(S.hull.size, 1))))
    if pts.size > _SEARCH_POINTS:
        idx = np.unique(np.linspace(0, pts.size - 1, _SEARCH_POINTS).round().astype(int))
        # keep the real extremes, which usually decide inclusion
        idx = np.union1d(idx, [np.argmin(pts.real), np.argmax(pts.real)])
        pts = pts[idx]
    return pts


def certify_sets(scheme: ImExScheme, sets, tol: float = MEMBERSHIP_TOL) -> bool:
    """True when every set lies inside the diagram of ``scheme``.

    Numerical ranges are checked on at least 256 points spread along their
    hull boundary; eigenvalue sets are checked pointwise.
    """
    if isinstance(sets, SpectralSet):
        sets = [sets]
    pts = np.concatenate([_cert_points(S) for S in sets if S is not None])
    return all_inside(scheme, points=pts, tol=tol)


def certify(r: int, delta: float, sigma: float, W0: SpectralSet, Lam0: SpectralSet | None = None,
            tol: float = MEMBERSHIP_TOL) -> bool:
    """Certify ``(delta, sigma)`` for the splitting ``(sigma A0, L - sigma A0)``.

    ``W0`` (and optionally ``Lam0``) are the spectral sets of ``(A0, L)``.
    """
    sets = [rescale(W0, sigma)]
    if Lam0 is not None:
        sets.append(rescale(Lam0, sigma))
    return certify_sets(generate_scheme(r, delta), sets, tol)


# --- searches ---------------------------------------------------------------


def _check_safety(safety: float) -> None:
    if not (0 < safety <= 1):
        raise ParameterError("safety must lie in (0, 1]")


def _bisect(pred, lo: float, hi: float, xtol: float, log: bool = False) -> tuple[float, float]:
    """Shrink ``[lo, hi]`` with ``pred(lo) != pred(hi)`` until narrower than ``xtol``."""
    p_lo = pred(lo)
    while (math.log(hi / lo) if log else hi - lo) > xtol:
        mid = math.sqrt(lo * hi) if log else 0.5 * (lo + hi)
        if pred(mid) == p_lo:
            lo = mid
        else:
            hi = mid
    return lo, hi


class _SigmaScan:
    """Inclusion of ``1 + S / sigma`` in a fixed diagram as ``sigma`` varies."""

    def __init__(self, scheme: ImExScheme, sets, tol: float = MEMBERSHIP_TOL):
        self.scheme = scheme
        self.tol = tol
        self.pts = np.concatenate([_search_points(S) for S in sets])
        scale = float(np.abs(self.pts).max()) if self.pts.size else 1.0
        self.scale = scale if scale > 0 else 1.0
        lo, hi = _SIGMA_DECADES
        n = int((hi - lo) * _SIGMA_PER_DECADE) + 1
        self.grid = self.scale * np.logspace(lo, hi, n)

    def ok(self, sigma: float) -> bool:
        return all_inside(self.scheme, points=1.0 + self.pts / sigma, tol=self.tol)

    def g(self, sigma: float) -> float:
        return float(np.max(root_modulus(self.scheme, mu=1.0 + self.pts / sigma)))

    def _profile(self, sigmas: np.ndarray) -> np.ndarray:
        mu = 1.0 + self.pts[None, :] / sigmas[:, None]
        return root_modulus(self.scheme, mu=mu).max(axis=1)

    def best(self, seed: float | None = None, levels: int = 5, width: int = 21) -> tuple[float, float]:
        """Approximate minimizer of the largest root modulus over ``sigma``.

        A log grid (refined around ``seed`` when given) locates the basin;
        each further level re-grids the two neighbouring cells of the best
        point, shrinking the bracket tenfold. The objective is a maximum of
        root moduli and only piecewise smooth, so this zoom is used instead
        of a derivative-free line search.
        """
        grid = self.grid
        if seed is not None:
            grid = np.union1d(grid, np.geomspace(seed / 2, seed * 2, 61))
        vals = self._profile(grid)
        i = int(np.argmin(vals))
        s_best, g_best = float(grid[i]), float(vals[i])
        for _ in range(levels):
            lo = grid[max(i - 1, 0)]
            hi = grid[min(i + 1, grid.size - 1)]
            if hi <= lo * (1 + 1e-12):
                break
            grid = np.geomspace(lo, hi, width)
            vals = self._profile(grid)
            i = int(np.argmin(vals))
            if vals[i] <= g_best:
                s_best, g_best = float(grid[i]), float(vals[i])
        return s_best, g_best

    def any_feasible(self, seed: float | None = None) -> float | None:
        """A feasible sigma if one exists, else None."""
        s_best, g_best = self.best(seed)
        return s_best if g_best < 1.0 - self.tol and self.ok(s_best) else None

    def interval(self, s_feasible: float, rtol: float = 1e-9) -> tuple[float, float]:
        """Feasible interval around a feasible sigma (bisection in log sigma)."""
        lo_edge, hi_edge = self.grid[0], self.grid[-1]
        if self.ok(lo_edge):
            lo = float(lo_edge)
        else:
            lo = _bisect(self.ok, float(lo_edge), s_feasible, rtol, log=True)[1]
        if self.ok(hi_edge):
            hi = math.inf
        else:
            hi = _bisect(self.ok, s_feasible, float(hi_edge), rtol, log=True)[0]
        return lo, hi


def _base_sets(base: SplittingPair, p: float, n_angles: int):
    return w_p_set(base, p, n_angles=n_angles), generalized_eigenvalues(base)


def recipe_delta(r: int, pair: SplittingPair, p: float = 1.0, safety: float = 0.95,
                 xtol: float = 1e-7, n_angles: int = 256) -> FeasibilityResult:
    """Largest ``delta`` for which a fixed splitting is unconditionally stable.

    The necessary condition (generalized eigenvalues inside the diagram) is
    probed first at ``delta = 1e-3``; if it fails there the splitting is
    reported infeasible. Otherwise ``delta`` is bisected on inclusion of
    ``W_p`` and the eigenvalues. The recommended ``delta`` is
    ``safety * delta_star``, or 1 when SBDF itself is admissible.
    """
    _check_safety(safety)
    W, Lam = _base_sets(pair, p, n_angles)
    pts = np.concatenate([_search_points(W), Lam.points])
    diag = {"order": r, "p": p, "nc_probe_delta": NC_PROBE_DELTA}

    def ok(delta: float) -> bool:
        return all_inside(generate_scheme(r, delta), points=pts)

    if not all_inside(generate_scheme(r, NC_PROBE_DELTA), points=Lam.points):
        return FeasibilityResult(False, reason="generalized eigenvalues fall outside the diagram as delta -> 0",
                                 diagnostics=diag)
    if ok(1.0) and certify_sets(generate_scheme(r, 1.0), [W, Lam]):
        return FeasibilityResult(True, delta_star=1.0, delta=1.0, diagnostics=diag)
    lo = NC_PROBE_DELTA
    while not ok(lo):
        lo /= 2
        if lo < DELTA_FLOOR:
            return FeasibilityResult(False, reason="numerical range not inside the diagram for any delta",
                                     diagnostics=diag)
    lo, _ = _bisect(ok, lo, 1.0, xtol)
    delta = safety * lo
    while not certify_sets(generate_scheme(r, delta), [W, Lam]):
        delta *= safety
        if delta < DELTA_FLOOR:
            return FeasibilityResult(False, reason="certification failed", diagnostics=diag)
    return FeasibilityResult(True, delta_star=lo, delta=delta, diagnostics=diag)


def recipe_sigma(scheme: ImExScheme, base: SplittingPair, p: float = 1.0, n_angles: int = 256,
                 sets: tuple[SpectralSet, SpectralSet] | None = None) -> FeasibilityResult:
    """Smallest ``sigma`` making ``(sigma A0, L - sigma A0)`` stable for ``scheme``.

    Parameters
    ----------
    scheme : ImExScheme
    base : SplittingPair
        The pair ``(A0, L)``: ``A0`` Hermitian negative definite and ``L``
        the full operator.
    sets : tuple, optional
        Precomputed ``(W_p(A0, L), Lambda(A0, L))``.
    """
    W, Lam = sets if sets is not None else _base_sets(base, p, n_angles)
    diag = {"order": scheme.order, "delta": scheme.delta, "p": p}
    nc = _SigmaScan(scheme, [Lam])
    if nc.any_feasible() is None:
        return FeasibilityResult(False, reason="generalized eigenvalues never fit inside the diagram",
                                 diagnostics=diag)
    scan = _SigmaScan(scheme, [W, Lam])
    s_feas = scan.any_feasible()
    if s_feas is None:
        return FeasibilityResult(False, reason="numerical range never fits inside the diagram", diagnostics=diag)
    lo, hi = scan.interval(s_feas)
    sigma = lo
    if not certify_sets(scheme, [rescale(W, sigma), rescale(Lam, sigma)]):
        # the search used a thinned hull; nudge inward until the full check passes
        sigma = s_feas
        if not certify_sets(scheme, [rescale(W, sigma), rescale(Lam, sigma)]):
            return FeasibilityResult(False, reason="certification failed", diagnostics=diag)
    return FeasibilityResult(True, delta_star=scheme.delta, sigma_star=lo, sigma_range=(lo, hi),
                             delta=scheme.delta, sigma=sigma, diagnostics=diag)


def recipe_joint(r: int, base: SplittingPair, p: float = 1.0, safety: float = 0.95, xtol: float = 1e-5,
                 n_angles: int = 256, sets: tuple[SpectralSet, SpectralSet] | None = None) -> FeasibilityResult:
    """Search ``delta`` and ``sigma`` together, favouring large ``delta``.

    ``delta_star`` is the largest ``delta`` for which some ``sigma`` works;
    ``sigma_star`` is the ``sigma`` that keeps the sets deepest inside the
    diagram at ``delta_star``. The recommended pair is
    ``(safety * delta_star, sigma_star)``. When SBDF is admissible the
    smallest admissible ``sigma`` is returned with a 5% margin instead.
    """
    _check_safety(safety)
    W, Lam = sets if sets is not None else _base_sets(base, p, n_angles)
    diag = {"order": r, "p": p}

    def scan(delta):
        return _SigmaScan(generate_scheme(r, delta), [W, Lam])

    # the feasible sigma window shrinks continuously as delta grows, so the
    # last feasible sigma seeds the next probe
    seed: list[float | None] = [None]

    def exists(delta):
        s_feas = scan(delta).any_feasible(seed[0])
        if s_feas is not None:
            seed[0] = s_feas
        return s_feas is not None

    if _SigmaScan(generate_scheme(r, NC_PROBE_DELTA), [Lam]).any_feasible() is None:
        return FeasibilityResult(False, reason="generalized eigenvalues never fit inside the diagram",
                                 diagnostics=diag)
    if exists(1.0):
        sc = scan(1.0)
        lo, hi = sc.interval(sc.any_feasible())
        sigma = lo * 1.05 if math.isinf(hi) or lo * 1.05 < hi else math.sqrt(lo * hi)
        scheme = generate_scheme(r, 1.0)
        if certify_sets(scheme, [rescale(W, sigma), rescale(Lam, sigma)]):
            return FeasibilityResult(True, delta_star=1.0, sigma_star=lo, sigma_range=(lo, hi), delta=1.0,
                                     sigma=sigma, diagnostics=diag)
    lo = NC_PROBE_DELTA
    while not exists(lo):
        lo /= 2
        if lo < DELTA_FLOOR:
            return FeasibilityResult(False, reason="no (delta, sigma) pair found", diagnostics=diag)
    lo, _ = _bisect(exists, lo, 1.0, xtol)
    sigma_star, _ = scan(lo).best(seed[0])
    delta = safety * lo
    for _ in range(50):
        sc = scan(delta)
        if sc.ok(sigma_star):
            scheme = generate_scheme(r, delta)
            if certify_sets(scheme, [rescale(W, sigma_star), rescale(Lam, sigma_star)]):
                rng = sc.interval(sigma_star)
                return FeasibilityResult(True, delta_star=lo, sigma_star=sigma_star, sigma_range=rng,
                                         delta=delta, sigma=sigma_star, diagnostics=diag)
        delta *= safety
    return FeasibilityResult(False, reason="certification failed", diagnostics=diag)


# --- closed forms for real intervals ------------------------------------------


def _check_interval(d_min: float, d_max: float) -> None:
    if not (0 < d_min <= d_max) or not math.isfinite(d_max):
        raise ParameterError("need 0 < d_min <= d_max < inf")


def interval_sigma_bounds(r: int, delta: float, d_min: float, d_max: float) -> tuple[float, float]:
    """Open interval of ``sigma`` for which ``[1 - d_max/sigma, 1 - d_min/sigma]`` fits in the diagram."""
    _check_interval(d_min, d_max)
    m_left, m_right = extreme_points(r, delta)
    lo = d_max / (1.0 - m_left)
    hi = math.inf if m_right >= 1.0 else d_min / (1.0 - m_right)
    return lo, hi


def interval_feasible(r: int, delta: float, sigma: float, d_min: float, d_max: float) -> bool:
    """Closed-form test for real spectral sets ``[1 - d_max/sigma, 1 - d_min/sigma]``."""
    lo, hi = interval_sigma_bounds(r, delta, d_min, d_max)
    return lo < sigma < hi


def optimal_interval_params(r: int, d_min: float, d_max: float, eta: float = 0.1) -> tuple[float, float]:
    """Largest ``delta`` and matching ``sigma`` for a real interval with gap margin ``eta``.

    For ``r >= 3`` the pair closes the gap between the two bounds of
    :func:`interval_sigma_bounds` up to the fraction ``eta``. Orders 1 and
    2 are unconditionally stable at ``delta = 1`` for large enough sigma;
    the returned sigma is 5% above that bound.
    """
    _check_interval(d_min, d_max)
    generate_scheme(r, 1.0)
    if not (0 <= eta < 1):
        raise ParameterError("eta must lie in [0, 1)")
    if r <= 2:
        c_r = {1: 0.5, 2: 0.75}[r]
        return 1.0, 1.05 * c_r * d_max
    sec_r = math.cos(math.pi / r) ** (-r)
    kappa = (d_min / d_max) * (1.0 - eta)
    delta = 2.0 - 2.0 * ((1.0 - kappa) / (1.0 + kappa * sec_r)) ** (1.0 / r)
    sigma = d_min * (1.0 - eta / 2.0) * (1.0 + sec_r) / (1.0 + kappa * sec_r)
    if delta >= 1.0:
        # SBDF already has room; keep sigma centred in its interval
        lo, hi = interval_sigma_bounds(r, 1.0, d_min, d_max)
        return 1.0, sigma if lo < sigma < hi else math.sqrt(lo * hi)
    return delta, sigma


def sbdf_gap_threshold(r: int, recomputed: bool = False) -> float:
    """Largest ratio ``d_max / d_min`` handled by SBDF with the interval splitting.

    The default returns the reference constants (2.1429, 1.2667, 1.0931
    for orders 3 to 5). ``recomputed=True`` evaluates the ratio of the two
    interval bounds at ``delta = 1`` directly,
    ``(1 + 2**-r sec(pi/r)**r) / (1 - 2**-r)``, which is larger.
    """
    generate_scheme(r, 1.0)
    if r <= 2:
        return math.inf
    if not recomputed:
        return _SBDF_GAP_TABULATED[r]
    s = 2.0**-r
    return (1.0 + s * math.cos(math.pi / r) ** (-r)) / (1.0 - s)


def sbdf_diffusion_feasible(r: int, d_min: float, d_max: float) -> bool:
    """Whether SBDF of order ``r`` admits some ``sigma`` for diffusion coefficients in ``[d_min, d_max]``."""
    _check_interval(d_min, d_max)
    return d_max / d_min < sbdf_gap_threshold(r)
