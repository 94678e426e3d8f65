"""Unitary propagation.

``expm`` is a scaling-and-squaring Taylor exponential; it needs no eigensolver.
The eigen-decomposition route (``method="eigh"``) exists for conditioning
checks and debugging only.

Time-dependent generators are propagated with the exponential midpoint rule,
``psi <- exp(-i H(t + dt/2) dt) psi``, which is second order in ``dt``.
For periodic drives :func:`propagate_periodic` builds the one-period
propagator once and raises it to an integer power, so long runs at high drive
frequency stay cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import LayoutError, NonHermitianError, NumericalError
from .hilbert import HilbertLayout, Operator, StateVector

__all__ = [
    "PropagatorConfig",
    "expm",
    "propagator",
    "expm_apply",
    "propagate_td",
    "period_propagator",
    "propagate_periodic",
]

MatrixSource = Callable[[float], Union[Operator, np.ndarray]]


@dataclass(frozen=True)
class PropagatorConfig:
    """Numerical settings for propagation.

    ``dt`` is only used by :func:`propagate_td`; ``steps_per_period`` by the
    periodic propagator.  ``tol`` bounds the truncation error of the Taylor
    series in operator norm.
    """

    method: str = "taylor"
    dt: Optional[float] = None
    tol: float = 1e-15
    unitarity_check_threshold: float = 1e-10
    steps_per_period: int = 200
    hermiticity_tol: float = 1e-10

    def __post_init__(self):
        if self.method not in ("taylor", "eigh"):
            raise ValueError(f"unknown propagation method {self.method!r}")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be > 0")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if self.steps_per_period < 1:
            raise ValueError("steps_per_period must be >= 1")


DEFAULT_CONFIG = PropagatorConfig()

# Taylor degree at which the remainder of exp(B), ||B||_1 <= 1/2, is below
# double-precision round-off; the loop usually exits earlier on ``tol``.
_MAX_TERMS = 40
_THETA = 0.5


def expm(A: np.ndarray, tol: float = 1e-15) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a truncated Taylor series."""
    A = np.asarray(A, dtype=np.complex128)
    n = A.shape[0]
    norm1 = np.max(np.sum(np.abs(A), axis=0)) if n else 0.0
    if norm1 == 0.0:
        return np.eye(n, dtype=np.complex128)
    s = max(0, int(math.ceil(math.log2(norm1 / _THETA))))
    B = A / (2.0 ** s)
    result = np.eye(n, dtype=np.complex128)
    term = np.eye(n, dtype=np.complex128)
    for k in range(1, _MAX_TERMS + 1):
        term = term @ B / k
        result = result + term
        if np.max(np.abs(term)) <= tol * 1e-2:
            break
    for _ in range(s):
        result = result @ result
    return result


def _as_matrix(H: Union[Operator, np.ndarray]) -> np.ndarray:
    return H.matrix if isinstance(H, Operator) else np.asarray(H, dtype=np.complex128)


def _unitary(Hm: np.ndarray, t: float, config: PropagatorConfig) -> np.ndarray:
    if config.method == "eigh":
        w, V = np.linalg.eigh(Hm)
        return (V * np.exp(-1j * w * t)) @ V.conj().T
    return expm(-1j * t * Hm, config.tol)


def propagator(H: Operator, t: float, config: PropagatorConfig = DEFAULT_CONFIG) -> Operator:
    """exp(-i H t) for a Hermitian ``H`` (hbar = 1)."""
    H.require_hermitian(config.hermiticity_tol, "generator")
    return Operator(H.layout, _unitary(H.matrix, t, config))


def _check_norm(v: np.ndarray, config: PropagatorConfig, where: str) -> None:
    drift = abs(np.linalg.norm(v) - 1.0)
    if drift > config.unitarity_check_threshold:
        raise NumericalError(
            f"{where}: norm drift {drift:.3e} exceeds {config.unitarity_check_threshold:g}"
        )


def _matvec(Hm: np.ndarray):
    """Matrix-vector product, in coordinate form when ``Hm`` is mostly zeros."""
    rows, cols = np.nonzero(Hm)
    n = Hm.shape[0]
    if len(rows) > n * n // 20:
        return lambda v: Hm @ v
    vals = Hm[rows, cols]

    def apply(v):
        w = vals * v[cols]
        return np.bincount(rows, w.real, n) + 1j * np.bincount(rows, w.imag, n)

    return apply


def _taylor_apply(Hm: np.ndarray, t: float, v: np.ndarray, tol: float) -> np.ndarray:
    """exp(-i H t) v from matrix-vector products only.

    The interval is cut into substeps with ||H dt||_1 <= 1/2 and each substep
    sums the Taylor series until the term falls below ``tol``.
    """
    norm1 = np.max(np.sum(np.abs(Hm), axis=0)) * abs(t) if Hm.size else 0.0
    steps = max(1, int(math.ceil(norm1 / _THETA)))
    matvec = _matvec(Hm)
    c = -1j * t / steps
    v = np.asarray(v, dtype=np.complex128)
    for _ in range(steps):
        acc = v.copy()
        term = v
        for k in range(1, _MAX_TERMS + 1):
            term = matvec(term) * (c / k)
            acc += term
            if np.max(np.abs(term)) <= tol * 1e-2:
                break
        v = acc
    return v


def expm_apply(
    H: Operator, t: float, psi: StateVector, config: PropagatorConfig = DEFAULT_CONFIG
) -> StateVector:
    """Return exp(-i H t) psi."""
    if H.layout != psi.layout:
        raise LayoutError(f"layout mismatch: {H.layout!r} vs {psi.layout!r}")
    H.require_hermitian(config.hermiticity_tol, "generator")
    if config.method == "eigh":
        out = _unitary(H.matrix, t, config) @ psi.amplitudes
    else:
        out = _taylor_apply(H.matrix, t, psi.amplitudes, config.tol)
    _check_norm(out, config, "expm_apply")
    return StateVector(psi.layout, out, normalize=False)


def _midpoint_steps(
    H_of_t: MatrixSource,
    t0: float,
    dt: float,
    n: int,
    config: PropagatorConfig,
    dim: int,
    vec: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Apply ``n`` midpoint steps; to ``vec`` if given, else accumulate the propagator."""
    acc = np.eye(dim, dtype=np.complex128) if vec is None else vec.copy()
    for k in range(n):
        Hm = _as_matrix(H_of_t(t0 + (k + 0.5) * dt))
        defect = np.max(np.abs(Hm - Hm.conj().T), initial=0.0)
        if defect > config.hermiticity_tol:
            raise NonHermitianError(f"H(t) not Hermitian at t={t0 + (k + 0.5) * dt}: defect {defect:.3e}")
        acc = _unitary(Hm, dt, config) @ acc
    return acc


def propagate_td(
    H_of_t: MatrixSource,
    t0: float,
    t1: float,
    config: PropagatorConfig,
    psi: StateVector,
) -> StateVector:
    """Second-order midpoint propagation from ``t0`` to ``t1``.

    The interval is split into ``ceil((t1 - t0) / config.dt)`` equal steps.
    """
    if not t1 > t0:
        raise ValueError("propagate_td requires t1 > t0")
    if config.dt is None:
        raise ValueError("propagate_td requires config.dt")
    n = max(1, int(math.ceil((t1 - t0) / config.dt - 1e-12)))
    dt = (t1 - t0) / n
    out = _midpoint_steps(H_of_t, t0, dt, n, config, psi.layout.dim, psi.amplitudes)
    _check_norm(out, config, "propagate_td")
    return StateVector(psi.layout, out, normalize=False)


def period_propagator(
    H_of_t: MatrixSource,
    layout: HilbertLayout,
    period: float,
    n_steps: int,
    config: PropagatorConfig = DEFAULT_CONFIG,
    t0: float = 0.0,
) -> Operator:
    """Midpoint-rule propagator over one drive period starting at ``t0``."""
    dt = period / n_steps
    return Operator(layout, _midpoint_steps(H_of_t, t0, dt, n_steps, config, layout.dim))


def propagate_periodic(
    H_of_t: MatrixSource,
    period: float,
    t: float,
    psi: StateVector,
    config: PropagatorConfig = DEFAULT_CONFIG,
    steps_per_period: Optional[int] = None,
) -> StateVector:
    """Propagate a ``period``-periodic generator from 0 to ``t``.

    Whole periods use a single one-period propagator raised to a power; the
    leftover fraction is stepped with the same step size.
    """
    if not t > 0:
        raise ValueError("t must be > 0")
    n_per = steps_per_period or config.steps_per_period
    k, rem = divmod(t, period)
    k = int(k)
    dt = period / n_per
    v = psi.amplitudes
    if k:
        UT = period_propagator(H_of_t, psi.layout, period, n_per, config).matrix
        v = np.linalg.matrix_power(UT, k) @ v
    if rem > 0:
        n_rem = max(1, int(math.ceil(rem / dt - 1e-9)))
        v = _midpoint_steps(H_of_t, k * period, rem / n_rem, n_rem, config, psi.layout.dim, v)
    _check_norm(v, config, "propagate_periodic")
    return StateVector(psi.layout, v, normalize=False)
