"""Generic r-step ImEx time integrator.

One step of an order-``r`` scheme solves

    (a_r I - k c_r A) u_{n+r} = sum_{j<r} [ -a_j u_{n+j} + k c_j A u_{n+j}
                                            + k b_j (B(u_{n+j}) + f_{n+j}) ]

so each step costs one shifted solve with ``A``, one application of ``A``
and one of ``B`` (which includes the forcing). The products ``A u`` and
``B(u) + f`` are cached with the history, so nothing is recomputed.

Operators only need three methods, see :class:`SplitOperator`.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np
import scipy.linalg as sla

from .coeffs import ImExScheme, generate_scheme
from .errors import InitializationError, InstabilityError, ParameterError

__all__ = [
    "SplitOperator",
    "MatrixSplitOperator",
    "StepperState",
    "Bootstrap",
    "initialize",
    "step",
    "integrate",
    "GROWTH_LIMIT",
]

GROWTH_LIMIT = 1e12


class SplitOperator(Protocol):
    """Interface consumed by the stepper."""

    def apply_A(self, u: np.ndarray) -> np.ndarray:
        """Implicit part applied to ``u``."""

    def apply_B(self, u: np.ndarray, t: float) -> np.ndarray:
        """Explicit part at time ``t``, forcing included."""

    def solve_shifted(self, alpha: float, beta: float, rhs: np.ndarray) -> np.ndarray:
        """Solve ``(alpha I - beta A) x = rhs``."""


class MatrixSplitOperator:
    """Dense reference implementation of :class:`SplitOperator`.

    Parameters
    ----------
    A, B : array_like
        Square matrices of the same size.
    forcing : callable, optional
        ``forcing(t)`` returning a vector added to ``B u``.
    """

    def __init__(self, A, B, forcing: Callable[[float], np.ndarray] | None = None):
        self.A = np.atleast_2d(np.asarray(A))
        self.B = np.atleast_2d(np.asarray(B))
        if self.A.shape != self.B.shape or self.A.shape[0] != self.A.shape[1]:
            raise ParameterError("A and B must be square matrices of equal size")
        self.forcing = forcing
        self._lu: dict[tuple[float, float], tuple] = {}

    def apply_A(self, u):
        return self.A @ u

    def apply_B(self, u, t):
        out = self.B @ u
        if self.forcing is not None:
            out = out + self.forcing(t)
        return out

    def solve_shifted(self, alpha, beta, rhs):
        key = (float(alpha), float(beta))
        lu = self._lu.get(key)
        if lu is None:
            lu = sla.lu_factor(alpha * np.eye(self.A.shape[0]) - beta * self.A)
            self._lu[key] = lu
        return sla.lu_solve(lu, rhs)


@dataclass
class Bootstrap:
    """Start from a single state by integrating lower orders on a finer step.

    The history of an order-``r`` run is generated with the order ``r - 1``
    member of the same family on steps ``k / substeps``; that run is in turn
    started by order ``r - 2`` on steps ``k / substeps**2``, and so on down
    to order 1.

    Attributes
    ----------
    u0 : ndarray
    substeps : int
    max_order : int, optional
        Cap on the orders used for the start-up runs.
    """

    u0: np.ndarray
    substeps: int = 64
    max_order: int | None = None


@dataclass
class StepperState:
    """History of an r-step integration.

    Attributes
    ----------
    scheme : ImExScheme
    k : float
        Step size.
    t : float
        Time of the newest state.
    n : int
        Number of steps taken.
    u, Au, Bu : deque of ndarray
        States and cached operator products, oldest first.
    """

    scheme: ImExScheme
    k: float
    t: float
    n: int = 0
    u: deque = field(default_factory=deque, repr=False)
    Au: deque = field(default_factory=deque, repr=False)
    Bu: deque = field(default_factory=deque, repr=False)
    reference_norm: float = 1.0

    @property
    def current(self) -> np.ndarray:
        return self.u[-1]


def _state_from_history(op, scheme: ImExScheme, k: float, hist: Sequence[np.ndarray], t_last: float) -> StepperState:
    r = scheme.order
    st = StepperState(scheme=scheme, k=k, t=t_last)
    for j, u in enumerate(hist):
        tj = t_last - (r - 1 - j) * k
        st.u.append(u)
        st.Au.append(op.apply_A(u))
        st.Bu.append(op.apply_B(u, tj))
    st.reference_norm = max(1.0, max(float(np.linalg.norm(u)) for u in hist))
    return st


def _bootstrap_history(op, r: int, delta: float, k: float, u0, t0: float, m: int, cap: int) -> list[np.ndarray]:
    """States at ``t0 + j k`` for ``j = 0 .. r - 1``."""
    if r == 1:
        return [u0]
    q = min(r - 1, cap)
    h = k / m
    sub = _state_from_history(op, generate_scheme(q, delta), h,
                              _bootstrap_history(op, q, delta, h, u0, t0, m, cap), t0 + (q - 1) * h)
    out = {s: sub.u[s] for s in range(q) if s % m == 0}
    s = q - 1
    while s < (r - 1) * m:
        step(sub, op)
        s += 1
        if s % m == 0:
            out[s] = sub.current
    return [out[j * m] for j in range(r)]


def initialize(op: SplitOperator, scheme: ImExScheme, k: float, init, t0: float = 0.0) -> StepperState:
    """Build the starting history.

    Parameters
    ----------
    op : SplitOperator
    scheme : ImExScheme
    k : float
        Step size, positive.
    init : sequence of ndarray or Bootstrap
        Either ``r`` states ordered oldest first, the newest at time ``t0``
        and the others at ``t0 - k, t0 - 2k, ...``; or a :class:`Bootstrap`
        starting at ``t0``, in which case the newest state is at
        ``t0 + (r - 1) k``.
    t0 : float
    """
    if not (np.isfinite(k) and k > 0):
        raise ParameterError("step size k must be positive")
    r = scheme.order
    if isinstance(init, Bootstrap):
        if init.substeps < 1:
            raise InitializationError("substeps must be at least 1")
        cap = r - 1 if init.max_order is None else int(init.max_order)
        if cap < 1 and r > 1:
            raise InitializationError("max_order must be at least 1")
        u0 = np.asarray(init.u0)
        hist = _bootstrap_history(op, r, scheme.delta, k, u0, t0, int(init.substeps), max(cap, 1))
        return _state_from_history(op, scheme, k, hist, t0 + (r - 1) * k)
    hist = [np.asarray(u) for u in init]
    if len(hist) != r:
        raise InitializationError(f"order {r} needs {r} starting states, got {len(hist)}")
    shape = hist[0].shape
    if any(u.shape != shape for u in hist):
        raise InitializationError("starting states have inconsistent shapes")
    if not all(np.all(np.isfinite(u)) for u in hist):
        raise InitializationError("starting states contain non-finite values")
    return _state_from_history(op, scheme, k, hist, t0)


def step(state: StepperState, op: SplitOperator) -> StepperState:
    """Advance ``state`` by one step in place and return it."""
    sch, k = state.scheme, state.k
    a, b, c = sch.a, sch.b, sch.c
    r = sch.order
    # increment form: since sum(a) = 0 the update for w = u_new - u_last is
    # (a_r - k c_r A) w = -sum_{j<r-1} a_j (u_j - u_last)
    #                     + k (c_r A u_last + sum_{j<r} c_j A u_j + b_j B u_j)
    # which keeps round-off proportional to the increments, not the state
    u_last = state.u[-1]
    rhs = k * (c[r] * state.Au[-1])
    for j in range(r):
        rhs = rhs + k * (c[j] * state.Au[j] + b[j] * state.Bu[j])
    for j in range(r - 1):
        rhs = rhs - a[j] * (state.u[j] - u_last)
    u_new = u_last + op.solve_shifted(a[r], k * c[r], rhs)
    t_new = state.t + k
    state.u.append(u_new)
    state.Au.append(op.apply_A(u_new))
    state.Bu.append(op.apply_B(u_new, t_new))
    state.u.popleft()
    state.Au.popleft()
    state.Bu.popleft()
    state.t = t_new
    state.n += 1
    return state


def integrate(state: StepperState, op: SplitOperator, t_final: float | None = None, n_steps: int | None = None,
              callback: Callable[[StepperState], None] | None = None,
              growth_limit: float = GROWTH_LIMIT) -> StepperState:
    """Take steps until ``t_final`` (or for ``n_steps``).

    The run stops with :class:`InstabilityError` as soon as a state is not
    finite or its norm exceeds ``growth_limit`` times the largest starting
    norm (floored at 1).

    Parameters
    ----------
    state : StepperState
        Modified in place.
    op : SplitOperator
    t_final : float, optional
        Must be reachable in a whole number of steps.
    n_steps : int, optional
    callback : callable, optional
        Called with the state after every step.
    """
    if (t_final is None) == (n_steps is None):
        raise ParameterError("give exactly one of t_final and n_steps")
    if n_steps is None:
        span = (t_final - state.t) / state.k
        n_steps = int(round(span))
        if n_steps < 0 or abs(span - n_steps) > 1e-8 * max(1.0, abs(span)):
            raise ParameterError("t_final is not a whole number of steps ahead")
    limit = growth_limit * state.reference_norm
    for _ in range(n_steps):
        step(state, op)
        nrm = float(np.linalg.norm(state.current))
        if not np.isfinite(nrm) or nrm > limit:
            raise InstabilityError(state.n, nrm)
        if callback is not None:
            callback(state)
    return state
