"""Constructors for the state families used by the protocols.

All constructors return unit-norm :class:`StateVector` objects.  Truncated
expansions (coherent, squeezed vacuum) are renormalized after truncation; the
pre-normalization tail mass is available from the matching ``*_tail_mass``
function and must not exceed ``eps_trunc``.

Unless a phase is prescribed (N00N relative phase, powers of the stereographic
label of a spin coherent state), the first nonzero amplitude is real positive.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import LayoutError, TruncationError
from .hilbert import BosonMode, HilbertLayout, StateVector
from .spin import two_j

__all__ = [
    "EPS_TRUNC",
    "fock",
    "vacuum",
    "coherent",
    "coherent_tail_mass",
    "squeezed_vacuum",
    "squeezed_tail_mass",
    "noon",
    "multi_noon",
    "dicke_from_two_mode",
    "two_mode_from_dicke",
    "SpinParams",
    "spin_coherent",
    "spin_antipode",
    "spin_cat",
    "spin_extreme_x",
    "dicke_to_two_mode",
    "parity",
]

EPS_TRUNC = 1e-10


def fock(layout: HilbertLayout, occupations: Sequence[int]) -> StateVector:
    """Basis vector with the given occupation (or qubit level) on every factor."""
    for n, f in zip(occupations, layout.factors):
        if n >= f.dim or n < 0:
            raise TruncationError(f"occupation {n} does not fit factor {f!r}")
    v = np.zeros(layout.dim, dtype=complex)
    v[layout.flatten(occupations)] = 1.0
    return StateVector(layout, v)


def vacuum(d: int) -> StateVector:
    return fock(HilbertLayout([BosonMode(d)]), [0])


def _poisson_tail(lam: float, d: int) -> float:
    """sum_{n >= d} e^{-lam} lam^n / n!, summed directly so tiny tails stay accurate."""
    if lam == 0.0:
        return 0.0 if d > 0 else 1.0
    term = math.exp(-lam + d * math.log(lam) - math.lgamma(d + 1))
    total = 0.0
    n = d
    while True:
        total += term
        n += 1
        term *= lam / n
        if n > lam and term <= 1e-18 * max(total, 1e-300):
            return total


def coherent_tail_mass(alpha: complex, d: int) -> float:
    """Probability weight of levels >= d lost by truncating |alpha>."""
    return _poisson_tail(abs(alpha) ** 2, d)


def coherent(alpha: complex, d: int, eps_trunc: float = EPS_TRUNC) -> StateVector:
    """|alpha> = e^{-|alpha|^2/2} sum_n alpha^n / sqrt(n!) |n>, truncated to d levels."""
    if d < 1:
        raise LayoutError("truncation dimension must be >= 1")
    tail = coherent_tail_mass(alpha, d)
    if tail > eps_trunc:
        raise TruncationError(
            f"coherent state alpha={alpha} loses tail mass {tail:.3e} > {eps_trunc:g} at d={d}"
        )
    amps = np.empty(d, dtype=complex)
    amps[0] = 1.0
    for n in range(1, d):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    return StateVector(HilbertLayout([BosonMode(d)]), amps * math.exp(-abs(alpha) ** 2 / 2))


def squeezed_tail_mass(r: float, d: int) -> float:
    """Weight of Fock levels >= d in the squeezed vacuum with squeeze magnitude r."""
    t2 = math.tanh(abs(r)) ** 2
    if t2 == 0.0:
        return 0.0 if d > 0 else 1.0
    # p_m = |c_{2m}|^2 with p_0 = 1/cosh r and p_{m+1}/p_m = t2 (2m+1)/(2m+2)
    m = (d + 1) // 2
    log_p = -math.log(math.cosh(r)) + m * math.log(t2) + math.lgamma(2 * m + 1) - 2 * math.lgamma(m + 1) - m * math.log(4)
    p = math.exp(log_p)
    total = 0.0
    while True:
        total += p
        p *= t2 * (2 * m + 1) / (2 * m + 2)
        m += 1
        if p <= 1e-18 * max(total, 1e-300):
            return total


def squeezed_vacuum(r: float, phi_s: float, d: int, eps_trunc: float = EPS_TRUNC) -> StateVector:
    """Even-Fock squeezed vacuum, amplitudes ∝ (-e^{i phi_s} tanh r)^m sqrt((2m)!) / (2^m m!)."""
    if d < 1:
        raise LayoutError("truncation dimension must be >= 1")
    tail = squeezed_tail_mass(r, d)
    if tail > eps_trunc:
        raise TruncationError(f"squeezed vacuum r={r} loses tail mass {tail:.3e} > {eps_trunc:g} at d={d}")
    x = -cmath.exp(1j * phi_s) * math.tanh(r)
    amps = np.zeros(d, dtype=complex)
    c = 1.0 / math.sqrt(math.cosh(r))
    for m in range(0, (d + 1) // 2):
        if 2 * m >= d:
            break
        amps[2 * m] = c
        # ratio of consecutive even amplitudes: x sqrt((2m+1)(2m+2)) / (2(m+1))
        c = c * x * math.sqrt((2 * m + 1) * (2 * m + 2)) / (2 * (m + 1))
    return StateVector(HilbertLayout([BosonMode(d)]), amps)


def noon(N: int, d: Optional[int] = None, phase: float = 0.0) -> StateVector:
    """(|N,0> + e^{i phase} |0,N>) / sqrt(2) on two modes truncated at d (default N+1)."""
    if N < 1:
        raise ValueError("N00N states need N >= 1")
    d = N + 1 if d is None else d
    if d < N + 1:
        raise TruncationError(f"truncation d={d} cannot hold N={N} photons (need d >= N+1)")
    layout = HilbertLayout([BosonMode(d), BosonMode(d)])
    v = np.zeros(layout.dim, dtype=complex)
    v[layout.flatten((N, 0))] = 1.0
    v[layout.flatten((0, N))] = cmath.exp(1j * phase)
    return StateVector(layout, v)


def multi_noon(M: int, N: int, d: Optional[int] = None, phase: float = 0.0) -> StateVector:
    """(|N,0>^{⊗M} + e^{i phase} |0,N>^{⊗M}) / sqrt(2) over 2M modes."""
    if M < 1 or N < 1:
        raise ValueError("need M >= 1 and N >= 1")
    d = N + 1 if d is None else d
    if d < N + 1:
        raise TruncationError(f"truncation d={d} cannot hold N={N} photons (need d >= N+1)")
    layout = HilbertLayout([BosonMode(d)] * (2 * M))
    v = np.zeros(layout.dim, dtype=complex)
    v[layout.flatten((N, 0) * M)] = 1.0
    v[layout.flatten((0, N) * M)] = cmath.exp(1j * phase)
    return StateVector(layout, v)


def dicke_from_two_mode(n_a: int, n_b: int):
    """|n_a>_a |n_b>_b  ->  (j, m) with j = (n_a + n_b)/2, m = (n_a - n_b)/2."""
    if n_a < 0 or n_b < 0 or int(n_a) != n_a or int(n_b) != n_b:
        raise ValueError(f"occupations must be non-negative integers, got ({n_a}, {n_b})")
    return (n_a + n_b) / 2, (n_a - n_b) / 2


def two_mode_from_dicke(j: float, m: float):
    tj = two_j(j)
    jm = j - m
    if abs(m) > j or abs(jm - round(jm)) > 1e-12:
        raise ValueError(f"inconsistent Dicke labels (j={j}, m={m})")
    n_b = int(round(jm))
    return tj - n_b, n_b


@dataclass(frozen=True)
class SpinParams:
    """Point (theta, phi) on the Bloch sphere of a spin j.

    ``gamma = e^{-i phi} tan(theta/2)`` is the stereographic label; it is
    infinite at the south pole theta = pi, which the constructors never need
    because they work from (theta, phi) directly.
    """

    j: float
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        two_j(self.j)

    @property
    def gamma(self) -> complex:
        return cmath.exp(-1j * self.phi) * math.tan(self.theta / 2)

    @classmethod
    def from_gamma(cls, j: float, gamma: complex) -> "SpinParams":
        return cls(j, 2 * math.atan(abs(gamma)), -cmath.phase(gamma) if gamma != 0 else 0.0)

    def antipodal(self) -> "SpinParams":
        return SpinParams(self.j, math.pi - self.theta, math.pi + self.phi)


def _binomial_sqrt(tj: int) -> np.ndarray:
    n = np.arange(tj + 1)
    lg = math.lgamma(tj + 1) - np.array([math.lgamma(k + 1) + math.lgamma(tj - k + 1) for k in n])
    return np.exp(0.5 * lg)


def _powers(x: complex, tj: int) -> np.ndarray:
    out = np.empty(tj + 1, dtype=complex)
    out[0] = 1.0
    for k in range(1, tj + 1):
        out[k] = out[k - 1] * x
    return out


def _coherent_ladder(tj: int, up: complex, down: complex) -> np.ndarray:
    """Amplitudes C(2j, n)^{1/2} up^n down^{2j-n} of a product of 2j identical spin-1/2 states."""
    return _binomial_sqrt(tj) * _powers(up, tj) * _powers(down, tj)[::-1]


def dicke_to_two_mode(ladder: np.ndarray, d: Optional[int] = None) -> StateVector:
    """Place Dicke amplitudes c[j+m] at Fock pair (j+m, j-m) on two modes of size d."""
    tj = len(ladder) - 1
    d = tj + 1 if d is None else d
    if d < tj + 1:
        raise TruncationError(f"two-mode truncation d={d} too small for 2j={tj}")
    layout = HilbertLayout([BosonMode(d), BosonMode(d)])
    v = np.zeros(layout.dim, dtype=complex)
    for n, c in enumerate(ladder):
        v[layout.flatten((n, tj - n))] = c
    return StateVector(layout, v)


def _represent(ladder: np.ndarray, representation: str, d: Optional[int]) -> StateVector:
    if representation in ("dicke", "dicke-ladder"):
        return StateVector(HilbertLayout([BosonMode(len(ladder))]), ladder)
    if representation in ("two-mode", "two-mode-fock"):
        return dicke_to_two_mode(ladder, d)
    raise ValueError(f"unknown representation {representation!r}")


def spin_coherent(params: SpinParams, representation: str = "dicke", d: Optional[int] = None) -> StateVector:
    """|theta, phi, j> = R(theta, phi)|j, -j>.

    Amplitude on |j, m> is C(2j, j+m)^{1/2} gamma^{j+m} / (1 + |gamma|^2)^j,
    evaluated as e^{-i phi (j+m)} sin^{j+m}(theta/2) cos^{j-m}(theta/2) so
    theta = pi needs no special case.
    """
    tj = two_j(params.j)
    s, c = math.sin(params.theta / 2), math.cos(params.theta / 2)
    ladder = _coherent_ladder(tj, cmath.exp(-1j * params.phi) * s, c)
    return _represent(ladder, representation, d)


def spin_antipode(params: SpinParams, representation: str = "dicke", d: Optional[int] = None) -> StateVector:
    """R(theta, phi)|j, j>: the antipodal coherent state built from the rotated north pole.

    Equal to |pi - theta, pi + phi, j> up to a global phase, and equal to
    |j, j> itself at theta = 0.
    """
    tj = two_j(params.j)
    s, c = math.sin(params.theta / 2), math.cos(params.theta / 2)
    ladder = _coherent_ladder(tj, c, -cmath.exp(1j * params.phi) * s)
    return _represent(ladder, representation, d)


def spin_cat(params: SpinParams, representation: str = "dicke", d: Optional[int] = None) -> StateVector:
    """(|theta, phi, j> + R(theta, phi)|j, j>) / sqrt(2); the theta = 0 cat is the N00N state."""
    a = spin_coherent(params, representation, d)
    b = spin_antipode(params, representation, d)
    return StateVector(a.layout, (a.amplitudes + b.amplitudes) / math.sqrt(2))


def spin_extreme_x(j: float, sign: int = 1, representation: str = "dicke", d: Optional[int] = None) -> StateVector:
    """|j, ±j>_x = 2^{-j} sum_m C(2j, j+m)^{1/2} (±1)^{j+m} |j, m>_z."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    tj = two_j(j)
    ladder = _binomial_sqrt(tj) * _powers(sign, tj) / 2 ** (tj / 2)
    return _represent(ladder, representation, d)


def parity(psi: StateVector) -> Optional[int]:
    """+1 or -1 if a single-mode state has definite photon-number parity, else None."""
    if len(psi.layout) != 1:
        raise LayoutError("parity() expects a single-mode state")
    p = np.abs(psi.amplitudes) ** 2
    even, odd = p[0::2].sum(), p[1::2].sum()
    if odd <= 1e-24:
        return 1
    if even <= 1e-24:
        return -1
    return None
