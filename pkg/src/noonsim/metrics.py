"""Fidelity, concurrence, quantum Fisher information and su(2) helpers."""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import ImpossibleBranchError, LayoutError
from .evolution import expm
from .hilbert import BosonMode, HilbertLayout, Operator, StateVector, mode_operator
from .states import SpinParams

__all__ = [
    "fidelity",
    "phase_insensitive_noon_fidelity",
    "coherent_overlap",
    "spin_coherent_overlap",
    "concurrence_superposition",
    "concurrence_spin_flip",
    "schmidt_concurrence",
    "PhaseProbe",
    "qfi",
    "phase_uncertainty",
    "rotation_gamma",
    "rotation_compose",
    "schwinger_generators",
]

log = logging.getLogger(__name__)


def fidelity(psi: StateVector, phi: StateVector) -> float:
    """|<psi|phi>|^2 for pure states on the same layout."""
    if psi.layout != phi.layout:
        raise LayoutError(f"layout mismatch: {psi.layout!r} vs {phi.layout!r}")
    return float(min(1.0, abs(np.vdot(psi.amplitudes, phi.amplitudes)) ** 2))


def phase_insensitive_noon_fidelity(psi: StateVector, N: int) -> float:
    """max over theta of |<NOON(theta)|psi>|^2 = (|c_{N,0}| + |c_{0,N}|)^2 / 2."""
    lay = psi.layout
    a = abs(psi.amplitudes[lay.flatten((N, 0))])
    b = abs(psi.amplitudes[lay.flatten((0, N))])
    return float(min(1.0, (a + b) ** 2 / 2))


def coherent_overlap(alpha: complex, beta: complex) -> complex:
    """<alpha|beta> = exp(-(|alpha|^2 + |beta|^2)/2 + conj(alpha) beta)."""
    return cmath.exp(-(abs(alpha) ** 2 + abs(beta) ** 2) / 2 + alpha.conjugate() * beta)


def spin_coherent_overlap(p: SpinParams, q: SpinParams) -> complex:
    """<p|q> for spin coherent states of equal j, in (theta, phi) form.

    Equals (1 + conj(gamma_p) gamma_q)^{2j} / ((1+|gamma_p|^2)(1+|gamma_q|^2))^j
    but written with half-angle cosines so the south pole is regular.
    """
    if p.j != q.j:
        raise ValueError("overlap needs equal spin j")
    cp, sp = math.cos(p.theta / 2), math.sin(p.theta / 2)
    cq, sq = math.cos(q.theta / 2), math.sin(q.theta / 2)
    base = cp * cq + sp * sq * cmath.exp(1j * (p.phi - q.phi))
    return base ** int(round(2 * p.j))


def _overlap(psi1: StateVector, psi2: StateVector) -> complex:
    if psi1.layout != psi2.layout:
        raise LayoutError("inputs must share a layout")
    return complex(np.vdot(psi1.amplitudes, psi2.amplitudes))


def concurrence_superposition(psi1: StateVector, psi2: StateVector, sign: int) -> float:
    """Concurrence of (|psi1 psi2> + sign |psi2 psi1>)/norm: (1 - |s|^2) / (1 + sign |s|^2)."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    s2 = abs(_overlap(psi1, psi2)) ** 2
    if sign == -1 and 1 - s2 < 1e-14:
        raise ImpossibleBranchError("antisymmetric superposition of identical inputs is undefined")
    return (1 - s2) / (1 + sign * s2)


_YY = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])


def concurrence_spin_flip(psi1: StateVector, psi2: StateVector, sign: int) -> float:
    """Concurrence |<Psi| sy x sy |Psi*>| computed in the orthonormalized span of {psi1, psi2}.

    Independent of :func:`concurrence_superposition`: the inputs are expanded
    in a QR basis of their span and the two-qubit formula is applied directly.
    """
    u, v = psi1.amplitudes, psi2.amplitudes
    Q, _ = np.linalg.qr(np.column_stack([u, v]))
    cu, cv = Q.conj().T @ u, Q.conj().T @ v
    vec = np.kron(cu, cv) + sign * np.kron(cv, cu)
    n = np.linalg.norm(vec)
    if n < 1e-12:
        raise ImpossibleBranchError("superposition has zero norm")
    vec = vec / n
    return float(abs(vec.conj() @ (_YY @ vec.conj())))


def schmidt_concurrence(psi: StateVector) -> float:
    """sqrt(2 (1 - Tr rho_A^2)) for a pure bipartite state of two factors."""
    if len(psi.layout) != 2:
        raise LayoutError("schmidt_concurrence expects two factors")
    m = psi.tensor()
    rho = m @ m.conj().T
    purity = float(np.real(np.trace(rho @ rho)))
    return math.sqrt(max(0.0, 2 * (1 - purity)))


@dataclass(frozen=True)
class PhaseProbe:
    """Phase imprinted as exp(-i theta G) for a Hermitian generator G."""

    generator: Operator
    theta: float = 0.0

    def __post_init__(self):
        self.generator.require_hermitian(1e-10, "phase generator")

    def unitary(self) -> Operator:
        return Operator(self.generator.layout, expm(-1j * self.theta * self.generator.matrix))

    def apply(self, psi: StateVector) -> StateVector:
        return self.unitary() @ psi


def qfi(psi: StateVector, generator: Operator) -> float:
    """Pure-state quantum Fisher information 4 Var_psi(G)."""
    generator.require_hermitian(1e-10, "QFI generator")
    if generator.layout != psi.layout:
        raise LayoutError("generator and state layouts differ")
    g_psi = generator.matrix @ psi.amplitudes
    mean = np.vdot(psi.amplitudes, g_psi).real
    second = np.vdot(g_psi, g_psi).real
    return max(0.0, 4 * (second - mean ** 2))


def phase_uncertainty(psi: StateVector, generator: Operator) -> float:
    """1 / sqrt(QFI); +inf when the state is an eigenstate of the generator."""
    f = qfi(psi, generator)
    if f <= 1e-24:
        log.info("zero quantum Fisher information: phase uncertainty is unbounded")
        return math.inf
    return 1 / math.sqrt(f)


def rotation_gamma(gamma: complex, Jp: Operator, Jm: Operator) -> Operator:
    """R(gamma) = exp[(theta/2)(J+ e^{-i phi} - J- e^{i phi})] with gamma = e^{-i phi} tan(theta/2)."""
    theta = 2 * math.atan(abs(gamma))
    phi = -cmath.phase(gamma) if gamma != 0 else 0.0
    gen = (Jp * cmath.exp(-1j * phi) - Jm * cmath.exp(1j * phi)) * (theta / 2)
    return Operator(Jp.layout, expm(gen.matrix))


def rotation_compose(gamma1: complex, gamma2: complex) -> Tuple[complex, float]:
    """(gamma3, Phi) with R(gamma1) R(gamma2) = R(gamma3) exp(i Phi Jz).

    gamma3 = (gamma1 + gamma2) / (1 - conj(gamma1) gamma2) and
    Phi = -2 arg(1 - conj(gamma1) gamma2).
    """
    den = 1 - gamma1.conjugate() * gamma2
    if abs(den) < 1e-15:
        raise ZeroDivisionError("conj(gamma1) gamma2 = 1 is a pole of the composition law")
    return (gamma1 + gamma2) / den, -2 * cmath.phase(den)


def schwinger_generators(layout: HilbertLayout, slots: Tuple[int, int] = (0, 1)):
    """(J+, J-, Jz) = (a^dag b, b^dag a, (a^dag a - b^dag b)/2) on two modes of equal truncation."""
    fa, fb = layout.check_slot(slots[0]), layout.check_slot(slots[1])
    if not (isinstance(fa, BosonMode) and isinstance(fb, BosonMode)) or fa.d != fb.d:
        raise LayoutError("Schwinger generators need two modes of equal truncation")
    a = mode_operator(layout, slots[0], "a")
    b = mode_operator(layout, slots[1], "a")
    Jp = a.adjoint() @ b
    Jz = (a.adjoint() @ a - b.adjoint() @ b) / 2
    return Jp, Jp.adjoint(), Jz
