"""Spectral sets of a splitting ``L = A + B``.

Two sets decide unconditional stability of an ImEx scheme:

* generalized eigenvalues ``Lambda(A, B)``: the ``mu`` with ``B v = -mu A v``
  (necessary condition);
* the weighted numerical range
  ``W_p(A, B) = W((-A)**(p/2 - 1) B (-A)**(-p/2))`` for a real ``p``
  (sufficient condition).

``A`` must be Hermitian negative definite, optionally after removing a
known null space (for example constants for periodic diffusion). Numerical
ranges are computed with Johnson's algorithm: for each angle ``theta`` the
top eigenvector of the Hermitian part of ``e^{i theta} X`` yields a boundary
point, and the boundary points are closed into a convex polygon.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as sla

from .errors import DefinitenessError, ParameterError, SingularityError

__all__ = [
    "SplittingPair",
    "SpectralSet",
    "convex_hull",
    "numerical_range",
    "real_extent",
    "imag_extent",
    "wp_operator",
    "w_p_set",
    "generalized_eigenvalues",
    "rescale",
]

_HERMITIAN_RTOL = 1e-10
_DEFINITE_RTOL = 1e-12


def _as_matrix(x, name: str) -> np.ndarray:
    m = np.atleast_2d(np.asarray(x, dtype=complex))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ParameterError(f"{name} must be a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ParameterError(f"{name} contains non-finite entries")
    return m


def _complement_basis(null_basis: np.ndarray, n: int) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``span(null_basis)``."""
    q, _ = np.linalg.qr(null_basis)
    proj = np.eye(n) - q @ q.conj().T
    qp, _, _ = sla.qr(proj, pivoting=True)
    return qp[:, : n - q.shape[1]]


@dataclass(frozen=True, eq=False)
class SplittingPair:
    """An operator split ``L = A + B`` with ``A`` treated implicitly.

    Parameters
    ----------
    A : array_like
        Hermitian, negative definite on the working subspace.
    B : array_like
        Same shape as ``A``.
    null_basis : array_like, optional
        Columns spanning a common null space that is removed before any
        spectral computation.
    """

    A: np.ndarray
    B: np.ndarray
    null_basis: np.ndarray | None = None

    def __post_init__(self):
        A = _as_matrix(self.A, "A")
        B = _as_matrix(self.B, "B")
        if A.shape != B.shape:
            raise ParameterError(f"A and B shapes differ: {A.shape} vs {B.shape}")
        scale = max(1.0, float(np.abs(A).max()))
        if np.abs(A - A.conj().T).max() > _HERMITIAN_RTOL * scale:
            raise DefinitenessError("A is not Hermitian")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        if self.null_basis is not None:
            nb = np.asarray(self.null_basis, dtype=complex)
            if nb.ndim == 1:
                nb = nb[:, None]
            if nb.shape[0] != A.shape[0] or nb.shape[1] >= A.shape[0]:
                raise ParameterError("null_basis must have shape (N, m) with m < N")
            object.__setattr__(self, "null_basis", nb)

    @property
    def size(self) -> int:
        return self.A.shape[0]

    @cached_property
    def basis(self) -> np.ndarray | None:
        """Orthonormal basis of the working subspace, or None for the full space."""
        if self.null_basis is None:
            return None
        return _complement_basis(self.null_basis, self.size)

    @cached_property
    def compressed(self) -> tuple[np.ndarray, np.ndarray]:
        """``(A, B)`` restricted to the working subspace."""
        V = self.basis
        if V is None:
            return self.A, self.B
        Vh = V.conj().T
        A_v = Vh @ self.A @ V
        return 0.5 * (A_v + A_v.conj().T), Vh @ self.B @ V

    @cached_property
    def neg_a_eig(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigen-decomposition of ``-A`` on the working subspace, checked for definiteness."""
        A_v, _ = self.compressed
        lam, U = np.linalg.eigh(-A_v)
        top = float(np.abs(lam).max()) if lam.size else 0.0
        if top == 0.0:
            raise SingularityError("A vanishes on the working subspace")
        if lam[0] < -_DEFINITE_RTOL * top:
            raise DefinitenessError("A is not negative semidefinite on the working subspace")
        if lam[0] <= _DEFINITE_RTOL * top:
            raise SingularityError("A is singular on the working subspace; supply null_basis")
        return lam, U

    def neg_a_power(self, s: float) -> np.ndarray:
        """``(-A)**s`` on the working subspace."""
        lam, U = self.neg_a_eig
        return (U * lam**s) @ U.conj().T


def convex_hull(points) -> np.ndarray:
    """Counter-clockwise convex hull vertices of complex points.

    Collinear points are dropped. Degenerate inputs return one or two points.
    """
    pts = np.asarray(points, dtype=complex).ravel()
    if pts.size == 0:
        return pts
    scale = max(float(np.abs(pts).max()), 1e-300)
    key = np.round(np.column_stack([pts.real, pts.imag]) / (scale * 1e-14))
    _, idx = np.unique(key, axis=0, return_index=True)
    pts = pts[np.sort(idx)]
    order = np.lexsort((pts.imag, pts.real))
    P = pts[order]
    if P.size <= 2:
        return P

    def cross(o, a, b):
        return (a.real - o.real) * (b.imag - o.imag) - (a.imag - o.imag) * (b.real - o.real)

    eps = 1e-15 * scale * scale
    lower: list[complex] = []
    for p in P:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= eps:
            lower.pop()
        lower.append(p)
    upper: list[complex] = []
    for p in P[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= eps:
            upper.pop()
        upper.append(p)
    hull = np.array(lower[:-1] + upper[:-1])
    return hull if hull.size else P[:1]


def _herm_parts(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    H = 0.5 * (X + X.conj().T)
    K = (X - X.conj().T) / 2j
    return H, K


def real_extent(X) -> tuple[float, float]:
    """Exact ``(min, max)`` of the real part of the numerical range of ``X``."""
    H, _ = _herm_parts(np.atleast_2d(np.asarray(X, dtype=complex)))
    lam = np.linalg.eigvalsh(H)
    return float(lam[0]), float(lam[-1])


def imag_extent(X) -> tuple[float, float]:
    """Exact ``(min, max)`` of the imaginary part of the numerical range of ``X``."""
    _, K = _herm_parts(np.atleast_2d(np.asarray(X, dtype=complex)))
    lam = np.linalg.eigvalsh(K)
    return float(lam[0]), float(lam[-1])


@dataclass(frozen=True, eq=False)
class SpectralSet:
    """A sampled spectral set in the complex plane.

    Attributes
    ----------
    kind : str
        ``"numerical_range"`` or ``"eigenvalues"``.
    points : ndarray of complex
        Boundary samples (numerical range) or eigenvalues.
    hull : ndarray of complex
        Counter-clockwise convex hull of ``points``.
    angles, support : ndarray or None
        For numerical ranges, the sweep angles and the exact support values
        ``h(theta) = max Re(e^{i theta} w)`` over the set.
    p : float or None
        Weight exponent for numerical ranges.
    """

    kind: str
    points: np.ndarray = field(repr=False)
    hull: np.ndarray = field(repr=False)
    angles: np.ndarray | None = field(default=None, repr=False)
    support: np.ndarray | None = field(default=None, repr=False)
    p: float | None = None

    def real_extent(self) -> tuple[float, float]:
        return float(self.hull.real.min()), float(self.hull.real.max())

    def imag_extent(self) -> tuple[float, float]:
        return float(self.hull.imag.min()), float(self.hull.imag.max())

    def boundary_samples(self, per_edge: int = 8) -> np.ndarray:
        """Points to test for inclusion in a stability diagram.

        Eigenvalue sets return the eigenvalues; numerical ranges return the
        hull vertices plus ``per_edge - 1`` interior points on every edge.
        """
        if self.kind == "eigenvalues":
            return self.points
        h = self.hull
        if h.size <= 1 or per_edge <= 1:
            return h
        nxt = np.roll(h, -1)
        t = np.arange(per_edge) / per_edge
        return (h[:, None] + t[None, :] * (nxt - h)[:, None]).ravel()

    def distance_outside(self, w) -> np.ndarray:
        """How far each ``w`` violates a supporting half-plane (<= 0 means inside)."""
        w = np.asarray(w, dtype=complex)
        if self.support is not None:
            e = np.exp(1j * self.angles)
            return np.max((np.multiply.outer(w, e)).real - self.support, axis=-1)
        # polygon of eigenvalues: use hull edges as half-planes
        h = self.hull
        if h.size < 3:
            d = np.abs(w[..., None] - h).min(axis=-1) if h.size == 1 else _seg_dist(w, h[0], h[-1])
            return d
        nxt = np.roll(h, -1)
        edge = nxt - h
        normal = -1j * edge / np.abs(edge)
        return np.max(((w[..., None] - h) * np.conj(normal)).real, axis=-1)

    def contains(self, w, tol: float = 1e-8):
        d = self.distance_outside(w)
        return d <= tol

    def to_dict(self) -> dict:
        def enc(z):
            return [[float(x.real), float(x.imag)] for x in np.ravel(z)]

        out = {"kind": self.kind, "p": self.p, "points": enc(self.points), "hull": enc(self.hull)}
        if self.support is not None:
            out["angles"] = [float(a) for a in self.angles]
            out["support"] = [float(s) for s in self.support]
        return out


def _seg_dist(w, a, b):
    d = b - a
    if d == 0:
        return np.abs(w - a)
    t = np.clip(((w - a) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
    return np.abs(w - (a + t * d))


def _sweep(H: np.ndarray, K: np.ndarray, X: np.ndarray, thetas: np.ndarray):
    """Top eigenpairs of cos(t) H - sin(t) K for each angle, chunked."""
    n = X.shape[0]
    chunk = max(1, int(2**22 // max(n * n, 1)))
    pts = np.empty(thetas.size, dtype=complex)
    sup = np.empty(thetas.size)
    for s in range(0, thetas.size, chunk):
        t = thetas[s : s + chunk]
        M = np.cos(t)[:, None, None] * H - np.sin(t)[:, None, None] * K
        lam, vec = np.linalg.eigh(M)
        x = vec[:, :, -1]
        pts[s : s + chunk] = np.einsum("ki,ij,kj->k", x.conj(), X, x)
        sup[s : s + chunk] = lam[:, -1]
    return pts, sup


def _gap(t0, h0, p0, t1, h1, p1) -> float:
    """Outer minus inner support at the mid angle between two sweep angles."""
    det = np.sin(t0 - t1)
    if abs(det) < 1e-15:
        return 0.0
    # intersection of Re(e^{it} w) = h for the two angles
    x = (-h0 * np.sin(t1) + h1 * np.sin(t0)) / det
    y = (np.cos(t0) * h1 - np.cos(t1) * h0) / det
    q = complex(x, y)
    e = np.exp(1j * 0.5 * (t0 + t1))
    return max(0.0, (e * q).real - max((e * p0).real, (e * p1).real))


def numerical_range(X, n_angles: int = 256, refine: int | None = None, refine_tol: float = 1e-9) -> SpectralSet:
    """Numerical range of ``X`` by Johnson's angle sweep.

    Parameters
    ----------
    X : array_like
        Square matrix.
    n_angles : int
        Number of equally spaced sweep angles; multiples of 4 make real and
        imaginary extremes exact.
    refine : int, optional
        Budget of extra angles placed where the gap between the supporting
        lines and the inner polygon is largest. Defaults to ``n_angles``
        for matrices up to 64 x 64 and to 0 above.
    refine_tol : float
        Refinement stops once every gap is below ``refine_tol`` times the
        size of the set.
    """
    X = _as_matrix(X, "X")
    if n_angles < 4:
        raise ParameterError("n_angles must be at least 4")
    if refine is None:
        refine = n_angles if X.shape[0] <= 64 else 0
    H, K = _herm_parts(X)
    thetas = 2 * np.pi * np.arange(n_angles) / n_angles
    pts, sup = _sweep(H, K, X, thetas)
    if refine > 0:
        th, pl, sl = list(thetas), list(pts), list(sup)
        scale = max(float(np.abs(pts).max()), float(np.ptp(pts.real) + np.ptp(pts.imag)), 1e-300)

        def gap_at(i):
            j = (i + 1) % len(th)
            t1 = th[j] + (2 * np.pi if j == 0 else 0.0)
            return _gap(th[i], sl[i], pl[i], t1, sl[j], pl[j])

        # lazy max-heap keyed by the left angle of each interval
        heap = [(-gap_at(i), th[i]) for i in range(len(th))]
        heapq.heapify(heap)
        added = 0
        while heap and added < refine:
            neg, t_left = heapq.heappop(heap)
            if -neg <= refine_tol * scale:
                break
            i = int(np.searchsorted(th, t_left))
            if i >= len(th) or th[i] != t_left:
                continue
            g = gap_at(i)
            if g != -neg:
                heapq.heappush(heap, (-g, t_left))
                continue
            j = (i + 1) % len(th)
            t1 = th[j] + (2 * np.pi if j == 0 else 0.0)
            tm = 0.5 * (th[i] + t1)
            p_new, s_new = _sweep(H, K, X, np.array([tm]))
            tm = tm % (2 * np.pi)
            k = int(np.searchsorted(th, tm))
            th.insert(k, tm)
            pl.insert(k, p_new[0])
            sl.insert(k, s_new[0])
            added += 1
            for idx in {(k - 1) % len(th), k}:
                heapq.heappush(heap, (-gap_at(idx), th[idx]))
        thetas, pts, sup = np.array(th), np.array(pl), np.array(sl)
    return SpectralSet(kind="numerical_range", points=pts, hull=convex_hull(pts), angles=thetas, support=sup)


def wp_operator(pair: SplittingPair, p: float = 1.0) -> np.ndarray:
    """``(-A)**(p/2 - 1) B (-A)**(-p/2)`` on the working subspace."""
    _, B_v = pair.compressed
    if p == 2:
        return B_v @ pair.neg_a_power(-1.0)
    if p == 0:
        return pair.neg_a_power(-1.0) @ B_v
    return pair.neg_a_power(p / 2 - 1) @ B_v @ pair.neg_a_power(-p / 2)


def w_p_set(pair: SplittingPair, p: float = 1.0, n_angles: int = 256, refine: int | None = None) -> SpectralSet:
    """Weighted numerical range ``W_p(A, B)`` as a :class:`SpectralSet`."""
    if not np.isfinite(p):
        raise ParameterError("p must be finite")
    S = numerical_range(wp_operator(pair, p), n_angles=n_angles, refine=refine)
    return SpectralSet(kind=S.kind, points=S.points, hull=S.hull, angles=S.angles, support=S.support, p=float(p))


def generalized_eigenvalues(pair: SplittingPair) -> SpectralSet:
    """Eigenvalues ``mu`` of ``B v = -mu A v`` on the working subspace."""
    pair.neg_a_eig  # definiteness and singularity checks
    A_v, B_v = pair.compressed
    mu = sla.eigvals(B_v, -A_v)
    return SpectralSet(kind="eigenvalues", points=mu, hull=convex_hull(mu))


def rescale(S: SpectralSet, sigma: float) -> SpectralSet:
    """Image of ``S`` under ``w -> 1 + w / sigma``.

    If ``S`` was computed for ``(A0, L)`` then the result is the matching
    set for the splitting ``(sigma A0, L - sigma A0)``.
    """
    if not (np.isfinite(sigma) and sigma > 0):
        raise ParameterError("sigma must be positive")
    support = None
    if S.support is not None:
        support = np.cos(S.angles) + S.support / sigma
    return SpectralSet(
        kind=S.kind,
        points=1.0 + S.points / sigma,
        hull=1.0 + S.hull / sigma,
        angles=S.angles,
        support=support,
        p=S.p,
    )
