"""Coefficients of the one-parameter family of ImEx linear multistep schemes.

A scheme of order ``r`` advances

    (1/k) sum_j a_j u_{n+j} = sum_j c_j A u_{n+j} + b_j (B u_{n+j} + f_{n+j})

with ``A`` treated implicitly and ``B`` explicitly. The family is fixed by

    c(z) = (z - 1 + delta)**r
    b(z) = c(z) - (z - 1)**r
    a(z) = r-th order Taylor polynomial of log(z) * c(z) about z = 1

so that ``delta = 1`` recovers the semi-implicit BDF schemes. Coefficient
arrays are stored low-to-high: entry ``j`` multiplies ``z**j``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from numbers import Real

import numpy as np

from ._tabulated import TABULATED
from .errors import InvalidSchemeError, ParameterError

__all__ = [
    "MAX_ORDER",
    "ImExScheme",
    "coefficient_polynomials",
    "exact_coefficients",
    "generate_scheme",
    "tabulated_coefficients",
    "evaluate_polynomials",
    "check_zero_stability",
    "order_residuals",
    "check_order_conditions",
]

MAX_ORDER = 5
_CROSSCHECK_RTOL = 1e-12

Poly = tuple[Fraction, ...]


# --- exact polynomial arithmetic in delta (ascending powers) ----------------


def _padd(p: Poly, q: Poly) -> Poly:
    n = max(len(p), len(q))
    p = p + (Fraction(0),) * (n - len(p))
    q = q + (Fraction(0),) * (n - len(q))
    return tuple(x + y for x, y in zip(p, q))


def _pscale(p: Poly, s: Fraction) -> Poly:
    return tuple(s * x for x in p)


def _monomial(power: int, coef: Fraction) -> Poly:
    return (Fraction(0),) * power + (Fraction(coef),)


def _trim(p: Poly) -> Poly:
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return tuple(p)


def _shift_to_z(coefs_w: list[Poly]) -> list[Poly]:
    """Rewrite sum_j p_j (z-1)**j as sum_i q_i z**i."""
    out: list[Poly] = [(Fraction(0),)] * len(coefs_w)
    for j, pj in enumerate(coefs_w):
        for i in range(j + 1):
            out[i] = _padd(out[i], _pscale(pj, Fraction(comb(j, i) * (-1) ** (j - i))))
    return [_trim(q) for q in out]


def _check_order(r: int) -> int:
    if isinstance(r, bool) or not isinstance(r, (int, np.integer)):
        raise ParameterError(f"order must be an integer, got {r!r}")
    r = int(r)
    if not 1 <= r <= MAX_ORDER:
        raise ParameterError(f"order must lie in 1..{MAX_ORDER}, got {r}")
    return r


def _check_delta(delta) -> None:
    if not isinstance(delta, (Real, Fraction)) or isinstance(delta, bool):
        raise ParameterError(f"delta must be a real number, got {delta!r}")
    if not (0 < delta <= 1):
        raise ParameterError(f"delta must lie in (0, 1], got {delta!r}")


@lru_cache(maxsize=None)
def coefficient_polynomials(r: int) -> dict[str, tuple[Poly, ...]]:
    """Exact coefficients as rational polynomials in delta.

    Parameters
    ----------
    r : int
        Order of the scheme, 1 to 5.

    Returns
    -------
    dict
        Keys ``"a"``, ``"b"``, ``"c"``. Each value is a tuple of length
        ``r + 1`` whose entry ``j`` is the coefficient of ``z**j``, written
        as a tuple of :class:`fractions.Fraction` in ascending powers of delta.
    """
    r = _check_order(r)
    # c in powers of w = z - 1: binom(r, m) delta**(r-m) w**m
    c_w = [_monomial(r - m, Fraction(comb(r, m))) for m in range(r + 1)]
    log_w = [Fraction(0)] + [Fraction((-1) ** (m + 1), m) for m in range(1, r + 1)]
    a_w: list[Poly] = [(Fraction(0),)]
    for j in range(1, r + 1):
        acc: Poly = (Fraction(0),)
        for m in range(1, j + 1):
            acc = _padd(acc, _pscale(c_w[j - m], log_w[m]))
        a_w.append(acc)
    w_r = [(Fraction(0),)] * r + [(Fraction(1),)]
    a = _shift_to_z(a_w)
    c = _shift_to_z(c_w)
    b = [_trim(_padd(cj, _pscale(wj, Fraction(-1)))) for cj, wj in zip(c, _shift_to_z(w_r))]
    return {"a": tuple(a), "b": tuple(b), "c": tuple(c)}


def _horner(p, x):
    acc = 0 * x
    for coef in reversed(p):
        acc = acc * x + coef
    return acc


def exact_coefficients(r: int, delta: Fraction | int) -> dict[str, list[Fraction]]:
    """Coefficients evaluated in exact rational arithmetic."""
    r = _check_order(r)
    delta = Fraction(delta)
    _check_delta(delta)
    polys = coefficient_polynomials(r)
    return {key: [_horner(p, delta) for p in rows] for key, rows in polys.items()}


def tabulated_coefficients(r: int, delta: float) -> dict[str, np.ndarray]:
    """Evaluate the hand-transcribed closed forms at ``delta``."""
    r = _check_order(r)
    rows = TABULATED[r]
    return {
        key: np.array([float(_horner([Fraction(x) for x in p], Fraction(delta))) for p in rows[key]])
        for key in ("a", "b", "c")
    }


@dataclass(frozen=True, eq=False)
class ImExScheme:
    """Coefficient set of an order-``r`` ImEx multistep scheme.

    Attributes
    ----------
    order : int
    delta : float
    a, b, c : ndarray
        Length ``order + 1``, low-to-high in powers of ``z``.
    """

    order: int
    delta: float
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    c: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("a", "b", "c"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (self.order + 1,):
                raise InvalidSchemeError(f"{name} must have length {self.order + 1}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def is_sbdf(self) -> bool:
        return self.delta == 1.0

    def __repr__(self) -> str:
        return f"ImExScheme(order={self.order}, delta={self.delta!r})"


def generate_scheme(r: int, delta: float) -> ImExScheme:
    """Build the order-``r`` scheme with parameter ``delta``.

    The coefficients come from the exact rational generator and are
    cross-checked against the tabulated closed forms.

    Parameters
    ----------
    r : int
        Order, 1 to 5.
    delta : float
        Shape parameter in (0, 1]. ``delta = 1`` gives SBDF.

    Returns
    -------
    ImExScheme

    Raises
    ------
    ParameterError
        If ``r`` or ``delta`` is out of range.
    InvalidSchemeError
        If the generated coefficients disagree with the closed forms.
    """
    r = _check_order(r)
    _check_delta(delta)
    polys = coefficient_polynomials(r)
    x = float(delta)
    # exact rational evaluation, rounded once, so delta = 1 reproduces SBDF bit for bit
    xf = Fraction(x)
    coefs = {key: np.array([float(_horner(p, xf)) for p in rows]) for key, rows in polys.items()}
    ref = tabulated_coefficients(r, x)
    for key in ("a", "b", "c"):
        scale = max(1.0, float(np.abs(ref[key]).max()))
        if np.any(np.abs(coefs[key] - ref[key]) > _CROSSCHECK_RTOL * scale):
            raise InvalidSchemeError(f"generated {key} coefficients disagree with closed forms")
    return ImExScheme(order=r, delta=x, a=coefs["a"], b=coefs["b"], c=coefs["c"])


def evaluate_polynomials(scheme: ImExScheme, z):
    """Return ``(a(z), b(z), c(z))`` for scalar or array ``z``."""
    z = np.asarray(z)
    pv = np.polynomial.polynomial.polyval
    return pv(z, scheme.a), pv(z, scheme.b), pv(z, scheme.c)


def check_zero_stability(scheme: ImExScheme, tol: float = 1e-10) -> bool:
    """Root condition for ``a(z)``.

    All roots must satisfy ``|z| <= 1 + tol`` and roots on the unit circle
    (within ``tol``) must be simple.
    """
    a = np.asarray(scheme.a, dtype=float)
    if abs(a[-1]) <= tol * max(1.0, float(np.abs(a).max())):
        raise InvalidSchemeError("leading coefficient a_r vanishes")
    # work with a(1 + w); a'(1) = delta**r makes the root z = 1 badly
    # conditioned for small delta, so deflate it exactly when a(1) vanishes
    n = a.size
    a_w = np.array([sum(comb(j, m) * a[j] for j in range(m, n)) for m in range(n)])
    if abs(a_w[0]) <= 1e-12 * float(np.abs(a).sum()):
        roots = np.concatenate([[1.0 + 0j], 1.0 + np.roots(a_w[1:][::-1])])
    else:
        roots = 1.0 + np.roots(a_w[::-1])
    mods = np.abs(roots)
    if np.any(mods > 1.0 + tol):
        return False
    on_circle = np.flatnonzero(mods >= 1.0 - tol)
    for i in on_circle:
        others = np.delete(roots, i)
        if others.size and np.min(np.abs(others - roots[i])) <= tol:
            return False
    return True


def order_residuals(scheme: ImExScheme, n_terms: int | None = None) -> dict[str, np.ndarray]:
    """Taylor coefficients of the consistency residuals in ``h``.

    Returns the coefficients of ``h**n`` for ``n = 0 .. n_terms - 1`` in

    * ``"implicit"``: ``a(e^h) - h c(e^h)``
    * ``"explicit"``: ``c(e^h) - b(e^h) - (e^h - 1)**r``

    Both vanish through ``n = r`` for an order-``r`` scheme.
    """
    r = scheme.order
    n_terms = r + 2 if n_terms is None else int(n_terms)
    j = np.arange(r + 1, dtype=float)
    a, b, c = (np.asarray(x, dtype=float) for x in (scheme.a, scheme.b, scheme.c))
    binom_part = np.array([comb(r, i) * (-1.0) ** (r - i) for i in range(r + 1)])
    imp = np.zeros(n_terms)
    exp_ = np.zeros(n_terms)
    for n in range(n_terms):
        jn = j**n / factorial(n)
        imp[n] = a @ jn
        if n >= 1:
            imp[n] -= c @ (j ** (n - 1) / factorial(n - 1))
        exp_[n] = (c - b - binom_part) @ jn
    return {"implicit": imp, "explicit": exp_}


def check_order_conditions(scheme: ImExScheme, tol: float = 1e-12) -> bool:
    """True when both consistency residuals vanish through ``h**r``.

    Each Taylor coefficient is compared against ``tol`` times the size of
    the terms that cancel in it.
    """
    r = scheme.order
    res = order_residuals(scheme, r + 1)
    j = np.arange(r + 1, dtype=float)
    a, b, c = (np.abs(np.asarray(x, dtype=float)) for x in (scheme.a, scheme.b, scheme.c))
    for n in range(r + 1):
        jn = j**n / factorial(n)
        scale = 1.0 + a @ jn + (c + b) @ jn
        if n >= 1:
            scale += c @ (j ** (n - 1) / factorial(n - 1))
        if abs(res["implicit"][n]) > tol * scale or abs(res["explicit"][n]) > tol * scale:
            return False
    return True
