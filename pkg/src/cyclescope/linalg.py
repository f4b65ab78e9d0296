"""Dense complex linear algebra substrate.

Everything downstream (superoperators, cycle statistics, trajectory
sampling) is built on the small set of primitives collected here:
column-stacking vectorization, the matrix exponential, linear solves with
a residual guarantee, one-dimensional null spaces, and a monotone root
finder used for inverse-transform sampling of waiting times.

Vectorization convention (fixed globally): a d x d matrix X is mapped to
the length-d**2 vector of its stacked *columns*, so that

    vectorize(A @ X @ B) == kron(B.T, A) @ vectorize(X).

Superoperator matrices in other conventions differ by a transpose.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
import scipy.linalg

__all__ = [
    "vectorize",
    "devectorize",
    "expm",
    "solve",
    "lu_solver",
    "nullspace_onedim",
    "find_root_increasing",
    "ConditioningError",
    "DegenerateNullSpaceError",
    "BracketError",
]

#: matrices with a condition estimate above this are treated as singular
COND_LIMIT = 1e12


class ConditioningError(ValueError):
    """Linear system is singular or too ill-conditioned to trust."""

    def __init__(self, message: str, cond: float):
        super().__init__(f"{message} (condition estimate {cond:.3e})")
        self.cond = cond


class DegenerateNullSpaceError(ValueError):
    """Null space has dimension >= 2 (or is numerically ambiguous)."""

    def __init__(self, smallest: float, second_smallest: float):
        super().__init__(
            "null space is not one-dimensional: two smallest singular values "
            f"{smallest:.3e}, {second_smallest:.3e}"
        )
        self.smallest = smallest
        self.second_smallest = second_smallest


class BracketError(RuntimeError):
    """Root bracket expansion exceeded t_max (near-dark state signature)."""


def _as_square(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A.real)) or not np.all(np.isfinite(A.imag if np.iscomplexobj(A) else A.real)):
        raise ValueError("matrix has non-finite entries")
    return A


def vectorize(X: np.ndarray) -> np.ndarray:
    """Column-stack a d x d matrix into a length-d**2 vector."""
    X = _as_square(X)
    return X.flatten(order="F")


def devectorize(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    v = np.asarray(v)
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise ValueError(f"vector length {v.size} is not a perfect square")
    return v.reshape((d, d), order="F")


def expm(A: np.ndarray, t: float = 1.0) -> np.ndarray:
    """e^(A t) by scaling-and-squaring with a Pade approximant.

    Generators of dissipative dynamics are non-normal, so eigendecomposition
    is not a safe route; the Pade/squaring scheme used by scipy is.
    Correctness is pinned by the semigroup property in the test suite, not
    by the method choice.
    """
    A = _as_square(A)
    if not np.isfinite(t):
        raise ValueError("non-finite time argument")
    return scipy.linalg.expm(A * t)


def _residual_ok(A, x, b, rtol=1e-10):
    r = A @ x - b
    scale = np.linalg.norm(b)
    if scale == 0.0:
        scale = np.linalg.norm(A, ord="fro") * max(np.linalg.norm(x), 1.0)
        if scale == 0.0:
            return True
    return np.linalg.norm(r) <= rtol * scale


def solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve A x = b with ||A x - b|| <= 1e-10 ||b|| guaranteed.

    One step of iterative refinement is applied if the first solution
    misses the residual target; a persistent miss is diagnosed as
    ill-conditioning and raised with the condition estimate.
    """
    return lu_solver(A)(b)


def lu_solver(A: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Factor A once, return a solve closure with the residual guarantee.

    Repeated applications of the inverse of the no-jump generator dominate
    the cycle statistics, so the factorization is reused rather than
    forming an explicit inverse.
    """
    A = _as_square(A)
    lu, piv = scipy.linalg.lu_factor(A)

    def apply(b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=complex)
        x = scipy.linalg.lu_solve((lu, piv), b)
        if not _residual_ok(A, x, b):
            # one refinement step, then give up with a diagnosis
            x = x + scipy.linalg.lu_solve((lu, piv), b - A @ x)
            if not _residual_ok(A, x, b):
                cond = np.linalg.cond(A)
                raise ConditioningError("linear solve failed residual check", cond)
        return x

    return apply


def nullspace_onedim(A: np.ndarray) -> np.ndarray:
    """Unit-norm v with A v = 0, for A of numerical rank exactly n - 1.

    The two smallest singular values must be separated by a factor of at
    least 1e6, otherwise the null space is reported as degenerate.
    """
    A = _as_square(A)
    _, s, vh = np.linalg.svd(A)
    smallest = s[-1]
    second = s[-2] if len(s) >= 2 else np.inf
    if smallest > 0.0 and second / smallest < 1e6:
        raise DegenerateNullSpaceError(smallest, second)
    v = vh[-1].conj()
    residual = np.linalg.norm(A @ v)
    scale = s[0] if s[0] > 0 else 1.0
    if residual > 1e-10 * scale:
        raise DegenerateNullSpaceError(smallest, second)
    return v


def find_root_increasing(
    f: Callable[[float], float],
    target: float,
    *,
    t_scale: float = 1.0,
    t_max: float = 1e12,
    f_tol: float = 1e-10,
    dfdt: Callable[[float], float] | None = None,
) -> float:
    """Solve f(t) = target for continuous monotone increasing f on [0, inf).

    The bracket grows geometrically (factor 2) from ``t_scale``; inside the
    bracket plain bisection is globally safe because f is monotone.  When a
    derivative is supplied, bisection steps are replaced by Newton steps
    whenever the Newton iterate stays inside the bracket, which matters in
    the trajectory sampler where this routine runs once per jump.

    Raises :class:`BracketError` if the bracket exceeds ``t_max`` before
    enclosing the target; for survival functions this signals a near-dark
    state whose no-jump norm plateaus above the sampled level.
    """
    f0 = f(0.0)
    if f0 >= target:
        return 0.0
    lo = 0.0
    hi = t_scale
    fhi = f(hi)
    while fhi < target:
        lo = hi
        hi *= 2.0
        if hi > t_max:
            raise BracketError(
                f"bracket expansion exceeded t_max={t_max:g} "
                f"(f plateaued at {fhi:.6g} below target {target:.6g})"
            )
        fhi = f(hi)
    t = 0.5 * (lo + hi)
    for _ in range(200):
        ft = f(t)
        if abs(ft - target) <= f_tol:
            return t
        if ft < target:
            lo = t
        else:
            hi = t
        t_next = None
        if dfdt is not None:
            slope = dfdt(t)
            if slope > 0.0:
                cand = t - (ft - target) / slope
                if lo < cand < hi:
                    t_next = cand
        t = t_next if t_next is not None else 0.5 * (lo + hi)
    return t
