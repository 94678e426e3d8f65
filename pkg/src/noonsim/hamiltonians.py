"""Hamiltonian builders, Bessel/Jacobi-Anger machinery and the Floquet reduction.

Layouts are ``[Qubit, Mode(d1), Mode(d2)]`` unless stated otherwise.  Units
have hbar = 1, so every rate is an angular frequency.

Two periodically driven settings are covered:

* coupling modulation, ``H_I(t) = delta sz/2 + sum_j 2 g0 cos(u t + phi_j) X_j``
  with ``X_j = s+ a_j + a_j^dag s-``;
* frequency modulation, ``H_I(t) = g s+ sum_j a_j exp(i zeta cos(nu t - phi_j)) + h.c.``

Both reduce, at high drive frequency, to ``H0 + sum_n [H_n, H_-n] / (n nu)``
where ``H_n`` multiplies ``exp(i n nu t)`` in the Fourier series of ``H_I``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import LayoutError, NonHermitianError
from .hilbert import (
    BosonMode,
    HilbertLayout,
    Operator,
    Qubit,
    annihilation,
    commutator,
    embed,
    embed_product,
    mode_operator,
    pauli,
)

__all__ = [
    "EffectiveCouplingParams",
    "DriveSpec",
    "TrappedIonParams",
    "EnsembleParams",
    "three_factor_layout",
    "build_effective",
    "coupling_modulated_kappa",
    "coupling_modulated_source",
    "build_coupling_modulated",
    "coupling_modulated_harmonics",
    "frequency_modulated_source",
    "build_frequency_modulated",
    "frequency_modulated_harmonics",
    "frequency_modulated_omega",
    "bessel_j",
    "bessel_j_orders",
    "chi",
    "floquet_reduce",
    "build_trapped_ion",
    "trapped_ion_frame",
    "hp_reference_dynamics",
    "ZETA_J0_ZERO",
]

# first positive zero of J0
ZETA_J0_ZERO = 2.404825557695773

BESSEL_MAX_ORDER = 60
BESSEL_MAX_ARG = 30.0


def three_factor_layout(d1: int, d2: Optional[int] = None) -> HilbertLayout:
    return HilbertLayout([Qubit(), BosonMode(d1), BosonMode(d1 if d2 is None else d2)])


def _require_qubit_two_modes(layout: HilbertLayout) -> None:
    f = layout.factors
    if len(f) != 3 or not isinstance(f[0], Qubit) or not all(isinstance(x, BosonMode) for x in f[1:]):
        raise LayoutError(f"expected layout [Qubit, Mode, Mode], got {layout!r}")


def _checked(H: Operator, what: str) -> Operator:
    # builders are Hermitian by construction; anything else is a bug
    defect = H.hermiticity_defect()
    if defect > 1e-12 * max(1.0, float(np.max(np.abs(H.matrix), initial=0.0))):
        raise NonHermitianError(f"{what} is not Hermitian (defect {defect:.3e})")
    return H


class _Parts:
    """Embedded ladder and Pauli operators for a [Qubit, Mode, Mode] layout."""

    def __init__(self, layout: HilbertLayout):
        _require_qubit_two_modes(layout)
        self.layout = layout
        self.a1 = mode_operator(layout, 1, "a")
        self.a2 = mode_operator(layout, 2, "a")
        self.sz = embed(pauli("z"), layout, 0)
        self.sp = embed(pauli("plus"), layout, 0)
        self.sm = embed(pauli("minus"), layout, 0)

    def x(self, j: int) -> Operator:
        """X_j = s+ a_j + a_j^dag s-."""
        a = self.a1 if j == 0 else self.a2
        return self.sp @ a + a.adjoint() @ self.sm


# ----------------------------------------------------------------------------
# Effective Hamiltonian


@dataclass(frozen=True)
class EffectiveCouplingParams:
    """Rate of the effective two-mode/qubit coupling.

    With ``varphi`` unset the form is ``i k (a1 a2^dag - a2 a1^dag) sz``.
    With ``varphi`` set it is ``i k (e^{-i varphi} a1^dag a2 - e^{i varphi} a1 a2^dag) sz``.
    The two agree for ``varphi = pi``.  Negative rates are accepted because the
    Floquet reductions produce signed couplings.
    """

    kappa_or_omega: float
    varphi: Optional[float] = None

    def __post_init__(self):
        k = self.kappa_or_omega
        if not math.isfinite(k) or k == 0:
            raise ValueError("effective coupling rate must be finite and nonzero")


def build_effective(
    params: EffectiveCouplingParams, layout: HilbertLayout, slots: Optional[Tuple[int, int]] = None
) -> Operator:
    """Effective coupling between qubit slot 0 and the mode pair ``slots``.

    Without ``slots`` the layout must be [Qubit, Mode, Mode]; larger layouts
    (several mode pairs sharing one qubit) name the pair explicitly.
    """
    if slots is None:
        _require_qubit_two_modes(layout)
        slots = (1, 2)
    if not isinstance(layout.check_slot(0), Qubit):
        raise LayoutError("slot 0 must hold the qubit")
    for s in slots:
        if not isinstance(layout.check_slot(s), BosonMode):
            raise LayoutError(f"slot {s} is not a bosonic mode")
    i, j = slots
    a_i = annihilation(layout.factors[i].d)
    a_j = annihilation(layout.factors[j].d)
    sz = pauli("z")

    def term(op_i, op_j):
        return embed_product(layout, {0: sz, i: op_i, j: op_j})

    k = params.kappa_or_omega
    if params.varphi is None:
        H = term(a_i, a_j.adjoint()) - term(a_i.adjoint(), a_j)
    else:
        e = cmath.exp(1j * params.varphi)
        H = term(a_i.adjoint(), a_j) * e.conjugate() - term(a_i, a_j.adjoint()) * e
    return _checked(H * (1j * k), "effective Hamiltonian")


# ----------------------------------------------------------------------------
# Drive description


@dataclass(frozen=True)
class DriveSpec:
    """Periodic modulation parameters shared by both driven schemes.

    ``g0`` is the bare coupling, ``nu`` the modulation frequency, ``phases`` the
    per-mode drive phases.  ``zeta`` only matters for frequency modulation,
    ``detuning`` only for coupling modulation.
    """

    g0: float
    nu: float
    phases: Tuple[float, float] = (0.0, 0.0)
    zeta: float = ZETA_J0_ZERO
    detuning: float = 0.0
    n_max: int = 40

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError("drive frequency nu must be > 0")
        if self.n_max < 1:
            raise ValueError("harmonic cutoff n_max must be >= 1")
        if self.zeta < 0:
            raise ValueError("modulation depth zeta must be >= 0")
        if len(self.phases) != 2:
            raise ValueError("exactly two mode phases are required")

    @property
    def dphi(self) -> float:
        return self.phases[0] - self.phases[1]

    @property
    def period(self) -> float:
        return 2 * math.pi / self.nu


# ----------------------------------------------------------------------------
# Coupling modulation


def coupling_modulated_kappa(g0: float, upsilon: float, dphi: float = math.pi / 2) -> float:
    """kappa = (2 g0^2 / upsilon) sin(phi1 - phi2); no validity check on upsilon / g0."""
    return 2 * g0 ** 2 / upsilon * math.sin(dphi)


def coupling_modulated_source(params: DriveSpec, layout: HilbertLayout) -> Callable[[float], np.ndarray]:
    """Fast ``t -> H_I(t)`` matrix for the coupling-modulated scheme."""
    p = _Parts(layout)
    static = (p.sz * (params.detuning / 2)).matrix
    xs = [p.x(0).matrix, p.x(1).matrix]
    g0, nu = params.g0, params.nu
    ph = params.phases

    def H(t: float) -> np.ndarray:
        return static + 2 * g0 * (math.cos(nu * t + ph[0]) * xs[0] + math.cos(nu * t + ph[1]) * xs[1])

    return H


def build_coupling_modulated(params: DriveSpec, layout: HilbertLayout, t: float) -> Operator:
    return _checked(Operator(layout, coupling_modulated_source(params, layout)(t)), "H_I(t)")


def coupling_modulated_harmonics(params: DriveSpec, layout: HilbertLayout):
    """(H0, [(1, H_1, H_-1)]) with H_1 = g0 sum_j X_j e^{i phi_j} multiplying e^{i u t}."""
    p = _Parts(layout)
    h1 = (p.x(0) * cmath.exp(1j * params.phases[0]) + p.x(1) * cmath.exp(1j * params.phases[1])) * params.g0
    return p.sz * (params.detuning / 2), [(1, h1, h1.adjoint())]


# ----------------------------------------------------------------------------
# Bessel functions


def _check_bessel_range(n: int, x: float) -> None:
    if int(n) != n or n < 0 or n > BESSEL_MAX_ORDER:
        raise ValueError(f"Bessel order must be an integer in [0, {BESSEL_MAX_ORDER}], got {n!r}")
    if not abs(x) <= BESSEL_MAX_ARG:
        raise ValueError(f"Bessel argument must satisfy |x| <= {BESSEL_MAX_ARG}, got {x!r}")


def bessel_j_orders(n_max: int, x: float) -> np.ndarray:
    """J_0(x) .. J_{n_max}(x) by Miller's downward recurrence.

    The recurrence J_{k-1} = (2k/x) J_k - J_{k+1} is started far above both
    ``n_max`` and ``|x|`` from arbitrary seeds, then normalized with
    J_0 + 2 sum_k J_{2k} = 1.  Orders above 60 are allowed here so the
    Jacobi-Anger sums can reach their tails; accuracy is absolute.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    out = np.zeros(n_max + 1)
    if x == 0.0:
        out[0] = 1.0
        return out
    ax = abs(x)
    if ax < 1e-6:
        # two-term power series; the recurrence would overflow at 2k/x
        h2 = (ax / 2) ** 2
        for n in range(n_max + 1):
            lead = math.exp(n * math.log(ax / 2) - math.lgamma(n + 1)) if n else 1.0
            out[n] = lead * (1 - h2 / (n + 1))
    else:
        out[:] = _miller(n_max, ax)
    if x < 0:
        out[1::2] *= -1
    return out


def _miller(n_max: int, ax: float) -> np.ndarray:
    start = int(max(n_max, ax)) + 40 + int(math.sqrt(60 * max(n_max, ax, 1.0)))
    start += start % 2
    vals = np.zeros(start + 2)
    vals[start] = 1e-300
    for k in range(start, 0, -1):
        vals[k - 1] = (2 * k / ax) * vals[k] - vals[k + 1]
        if abs(vals[k - 1]) > 1e250:
            vals[k - 1 :] *= 1e-250
    norm = vals[0] + 2 * vals[2:start + 1:2].sum()
    return vals[: n_max + 1] / norm


def bessel_j(n: int, x: float) -> float:
    """Bessel function of the first kind J_n(x) for 0 <= n <= 60, |x| <= 30."""
    _check_bessel_range(n, x)
    return float(bessel_j_orders(int(n), float(x))[int(n)])


def chi(zeta: float, dphi: float, n_max: int = 40) -> Tuple[float, float]:
    """sum_{n=1}^{n_max} 2 J_n(zeta)^2 sin(n dphi) / n, and the magnitude of its last term."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if dphi == 0:
        return 0.0, 0.0
    J = bessel_j_orders(n_max, zeta)
    n = np.arange(1, n_max + 1)
    terms = 2 * J[1:] ** 2 * np.sin(n * dphi) / n
    return float(terms.sum()), float(abs(terms[-1]))


# ----------------------------------------------------------------------------
# Frequency modulation


def frequency_modulated_omega(g: float, nu: float, zeta: float, dphi: float, n_max: int = 40) -> float:
    """Omega = g^2 chi / nu."""
    return g ** 2 * chi(zeta, dphi, n_max)[0] / nu


def frequency_modulated_source(params: DriveSpec, layout: HilbertLayout) -> Callable[[float], np.ndarray]:
    """Fast ``t -> H_I(t)`` for the frequency-modulated scheme, phases evaluated exactly."""
    p = _Parts(layout)
    sa = [(p.sp @ p.a1).matrix, (p.sp @ p.a2).matrix]
    g, nu, zeta = params.g0, params.nu, params.zeta
    ph = params.phases

    def H(t: float) -> np.ndarray:
        upper = g * (
            cmath.exp(1j * zeta * math.cos(nu * t - ph[0])) * sa[0]
            + cmath.exp(1j * zeta * math.cos(nu * t - ph[1])) * sa[1]
        )
        return upper + upper.conj().T

    return H


def build_frequency_modulated(params: DriveSpec, layout: HilbertLayout, t: float) -> Operator:
    return _checked(Operator(layout, frequency_modulated_source(params, layout)(t)), "H_I(t)")


def frequency_modulated_harmonics(params: DriveSpec, layout: HilbertLayout):
    """(H0, [(n, H_n, H_-n) for n = 1..n_max]) from the Jacobi-Anger expansion.

    H_n = g i^n J_n(zeta) sum_j e^{-i n phi_j} (s+ a_j + (-1)^n a_j^dag s-).
    """
    p = _Parts(layout)
    J = bessel_j_orders(params.n_max, params.zeta)
    terms = [(p.sp @ a, a.adjoint() @ p.sm) for a in (p.a1, p.a2)]
    h0 = (p.x(0) + p.x(1)) * (params.g0 * J[0])
    out = []
    for n in range(1, params.n_max + 1):
        acc = None
        for (up, down), phi in zip(terms, params.phases):
            term = (up + down * (-1) ** n) * cmath.exp(-1j * n * phi)
            acc = term if acc is None else acc + term
        hn = acc * (params.g0 * 1j ** n * J[n])
        out.append((n, hn, hn.adjoint()))
    return h0, out


# ----------------------------------------------------------------------------
# Floquet reduction


def floquet_reduce(h0: Operator, harmonics: Sequence[Tuple[int, Operator, Operator]], nu: float) -> Operator:
    """H0 + sum_n [H_n, H_-n] / (n nu)."""
    seen = set()
    out = h0
    hermitian_pairs = True
    for n, hp, hm in harmonics:
        if n < 1 or n in seen:
            raise ValueError(f"harmonic orders must be distinct and >= 1 (got {n})")
        seen.add(n)
        if hp.layout != h0.layout or hm.layout != h0.layout:
            raise LayoutError("harmonics must share the layout of H0")
        hermitian_pairs &= np.allclose(hm.matrix, hp.matrix.conj().T, atol=1e-14)
        out = out + commutator(hp, hm) / (n * nu)
    if hermitian_pairs and h0.is_hermitian(1e-12):
        out.require_hermitian(1e-10, "reduced Hamiltonian")
    return out


# ----------------------------------------------------------------------------
# Trapped ion


@dataclass(frozen=True)
class TrappedIonParams:
    """Ion-cavity-vibration model in the laser frame.

    ``epsilon_L = eps e^{-i phi_L}`` is the complex laser amplitude.  ``nu`` is
    the trap frequency, ``delta_c`` the cavity detuning, ``delta`` the atomic
    detuning; only the ``full`` stage uses them.
    """

    g0: float
    eta: float
    epsilon_L: complex
    nu: float = 0.0
    delta_c: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("Lamb-Dicke parameter must be >= 0")
        if self.epsilon_L == 0:
            raise ValueError("laser amplitude must be nonzero")

    @property
    def phi_L(self) -> float:
        return -cmath.phase(self.epsilon_L)

    @property
    def omega(self) -> float:
        """Effective rate g0 eta / 2."""
        return self.g0 * self.eta / 2

    @property
    def varphi(self) -> float:
        """Phase of the effective coupling, phi = phi_L + pi/2."""
        return self.phi_L + math.pi / 2

    @property
    def rwa_ratio(self) -> float:
        """g0 eta / |epsilon_L|; the reduction needs this to be small."""
        return self.g0 * self.eta / abs(self.epsilon_L)


def build_trapped_ion(params: TrappedIonParams, layout: HilbertLayout, stage: str = "rwa_reduced") -> Operator:
    """Trapped-ion Hamiltonian at one of three reduction stages.

    ``full``: Lamb-Dicke-linearized laser-frame model with trap, cavity and
    atomic detunings.  ``rwa_reduced``: the resonant interaction-picture form
    eps s+ + eps* s- + g0 eta (b a^dag s- + b^dag a s+).  ``effective``: the
    dressed-qubit form with rate g0 eta / 2.  Mode slot 1 is the cavity (a),
    slot 2 the vibration (b).
    """
    if stage == "effective":
        return build_effective(EffectiveCouplingParams(params.omega, params.varphi), layout)
    p = _Parts(layout)
    a, b = p.a1, p.a2
    eps = complex(params.epsilon_L)
    G = params.g0 * params.eta
    drive = p.sp * eps + p.sm * eps.conjugate()
    if stage == "rwa_reduced":
        H = drive + (b @ a.adjoint() @ p.sm + b.adjoint() @ a @ p.sp) * G
    elif stage == "full":
        H = (
            b.adjoint() @ b * params.nu
            + a.adjoint() @ a * params.delta_c
            + p.sz * params.delta
            + drive
            + (b + b.adjoint()) @ (a.adjoint() @ p.sm + a @ p.sp) * G
        )
    else:
        raise ValueError(f"unknown trapped-ion stage {stage!r}")
    return _checked(H, f"trapped-ion Hamiltonian ({stage})")


def trapped_ion_frame(params: TrappedIonParams, layout: HilbertLayout, t: float, stage: str = "rwa_reduced") -> Operator:
    """Unitary mapping a laser-frame state at time t into the effective-Hamiltonian frame.

    R(t) = exp(i eps sz t) W, where W sends the dressed drive eigenstates
    (|0> +- e^{-i phi_L}|1>)/sqrt(2) to |1> and |0>.  For the ``full`` stage
    the free rotation exp(i nu (n_a + n_b) t) is removed too, which assumes
    delta_c = nu and delta = 0.
    """
    eps = abs(params.epsilon_L)
    ph = cmath.exp(-1j * params.phi_L)
    plus = np.array([1, ph]) / math.sqrt(2)
    minus = np.array([1, -ph]) / math.sqrt(2)
    W = np.outer([0, 1], plus.conj()) + np.outer([1, 0], minus.conj())
    q = np.diag([np.exp(-1j * eps * t), np.exp(1j * eps * t)]) @ W
    R = embed(Operator(HilbertLayout([Qubit()]), q), layout, 0)
    if stage == "full":
        n_tot = mode_operator(layout, 1, "n") + mode_operator(layout, 2, "n")
        R = R @ Operator(layout, np.diag(np.exp(1j * params.nu * t * np.diag(n_tot.matrix).real)))
    return R


# ----------------------------------------------------------------------------
# Spin ensembles and the Holstein-Primakoff map


@dataclass(frozen=True)
class EnsembleParams:
    """``N0`` spins per ensemble, collective ladder kept up to ``excitation_cutoff``."""

    N0: int
    excitation_cutoff: int = 3
    ensembles: int = 1

    def __post_init__(self):
        if self.N0 < 1:
            raise ValueError("N0 must be >= 1")
        if self.excitation_cutoff < 1:
            raise ValueError("excitation_cutoff must be >= 1")
        if self.excitation_cutoff > self.N0:
            raise ValueError(f"excitation_cutoff {self.excitation_cutoff} exceeds N0 = {self.N0}")
        if self.ensembles not in (1, 2):
            raise ValueError("one or two ensembles are supported")

    @property
    def weak_excitation_ratio(self) -> float:
        return self.excitation_cutoff / self.N0

    def layout(self) -> HilbertLayout:
        return HilbertLayout([Qubit()] + [BosonMode(self.excitation_cutoff + 1)] * self.ensembles)


def collective_raising(N0: int, levels: int, exact: bool = True) -> np.ndarray:
    """Collective S+ on the lowest ``levels`` Dicke levels of N0 spins, or its HP image sqrt(N0) c^dag."""
    k = np.arange(levels - 1)
    up = np.zeros((levels, levels))
    up[k + 1, k] = np.sqrt((N0 - k) * (k + 1.0)) if exact else math.sqrt(N0) * np.sqrt(k + 1.0)
    return up


def hp_reference_dynamics(params: EnsembleParams, g: float):
    """Exact Dicke-ladder and HP bosonic Tavis-Cummings generators on one layout.

    H = g sum_j (s+ S_j- + s- S_j+) with ``g`` the single-spin coupling.
    Returns (layout, H_exact, H_hp).
    """
    layout = params.layout()
    levels = params.excitation_cutoff + 1
    sp = embed(pauli("plus"), layout, 0)
    pair = []
    for exact in (True, False):
        up = Operator(HilbertLayout([BosonMode(levels)]), collective_raising(params.N0, levels, exact))
        H = None
        for slot in range(1, params.ensembles + 1):
            Sp = embed(up, layout, slot)
            term = sp @ Sp.adjoint()
            term = (term + term.adjoint()) * g
            H = term if H is None else H + term
        pair.append(_checked(H, "ensemble Hamiltonian"))
    return layout, pair[0], pair[1]
