"""Circuit engine: qubit gates, projective measurement, beamsplitters and the composed protocols.

The qubit always sits in slot 0.  Mode pairs are consecutive slots
``(1, 2), (3, 4), ...``.  Each protocol returns a :class:`ProtocolRecord`
holding a step-by-step trace plus the final two-mode (or 2M-mode) state.

Branch naming: |0> is the ground state |g>, |1> is the excited state |e>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ImpossibleBranchError, LayoutError, TruncationError
from .evolution import DEFAULT_CONFIG, PropagatorConfig, expm, expm_apply
from .hamiltonians import EffectiveCouplingParams, build_effective
from .hilbert import BosonMode, HilbertLayout, Qubit, StateVector
from .metrics import fidelity, phase_insensitive_noon_fidelity
from .states import fock, multi_noon, noon, parity

__all__ = [
    "LEAKAGE_THRESHOLD",
    "IMPOSSIBLE_BRANCH_P",
    "MAX_DIM",
    "ProtocolTiming",
    "MeasurementPolicy",
    "ProtocolStep",
    "ProtocolRecord",
    "leakage",
    "hadamard",
    "measure_qubit",
    "beamsplitter",
    "binomial_intermediate",
    "conditional_map_target",
    "superposition_state",
    "run_noon_protocol",
    "run_conditional_map",
    "run_multi_noon",
]

LEAKAGE_THRESHOLD = 1e-10
IMPOSSIBLE_BRANCH_P = 1e-14
MAX_DIM = 4096

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


@dataclass(frozen=True)
class ProtocolTiming:
    """Interaction times derived from the effective rate ``omega``."""

    omega: float

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be > 0")

    @property
    def dt1(self) -> float:
        return math.pi / (4 * self.omega)

    @property
    def dt_final_outcome0(self) -> float:
        return math.pi / (4 * self.omega)

    @property
    def dt_final_outcome1(self) -> float:
        return 3 * math.pi / (4 * self.omega)

    def dt_final(self, outcome: int) -> float:
        return self.dt_final_outcome0 if outcome == 0 else self.dt_final_outcome1


@dataclass(frozen=True)
class MeasurementPolicy:
    """Either force an outcome or sample it from a seeded generator."""

    mode: str = "forced"
    outcome: Optional[int] = 0
    seed: Optional[int] = None

    def __post_init__(self):
        if self.mode == "forced":
            if self.outcome not in (0, 1) or self.seed is not None:
                raise ValueError("forced policy needs outcome 0 or 1 and no seed")
        elif self.mode == "sampled":
            if self.seed is None or self.outcome is not None:
                raise ValueError("sampled policy needs a seed and no outcome")
        else:
            raise ValueError(f"unknown measurement mode {self.mode!r}")

    @classmethod
    def forced(cls, outcome: int) -> "MeasurementPolicy":
        return cls("forced", outcome, None)

    @classmethod
    def sampled(cls, seed: int) -> "MeasurementPolicy":
        return cls("sampled", None, seed)

    def rng(self) -> Optional[np.random.Generator]:
        return np.random.default_rng(self.seed) if self.mode == "sampled" else None


@dataclass
class ProtocolStep:
    label: str
    kind: str
    duration: Optional[float] = None
    outcome: Optional[int] = None
    probability: Optional[float] = None
    norm: float = 1.0
    leakage: float = 0.0
    fidelity: Optional[float] = None


@dataclass
class ProtocolRecord:
    steps: List[ProtocolStep] = field(default_factory=list)
    final_state: Optional[StateVector] = None
    reference: Optional[StateVector] = None
    fidelity: Optional[float] = None
    diagnostics: Dict[str, float] = field(default_factory=dict)

    @property
    def outcome(self) -> Optional[int]:
        for s in self.steps:
            if s.kind == "measure":
                return s.outcome
        return None

    def as_rows(self) -> List[dict]:
        return [vars(s).copy() for s in self.steps]


# ----------------------------------------------------------------------------
# Primitive operations


def _mode_pairs(layout: HilbertLayout) -> List[Tuple[int, int]]:
    modes = layout.mode_slots()
    return [(modes[i], modes[i + 1]) for i in range(0, len(modes) - 1, 2)]


def leakage(
    psi: StateVector, pairs: Optional[Sequence[Tuple[int, int]]] = None, unpaired: bool = True
) -> float:
    """Population in the sector the truncation cannot represent faithfully.

    For a mode pair the number-conserving gates are exact while n_i + n_j < d,
    so the monitored weight is that of n_i + n_j >= d.  Unpaired modes are
    monitored on their top Fock level unless ``unpaired`` is false.
    """
    layout = psi.layout
    pairs = _mode_pairs(layout) if pairs is None else list(pairs)
    prob = np.abs(psi.tensor()) ** 2
    grids = np.indices(layout.dims, sparse=True)
    bad = np.zeros(layout.dims, dtype=bool)
    paired = set()
    for i, j in pairs:
        d = layout.factors[i].dim
        bad |= (grids[i] + grids[j]) >= d
        paired.update((i, j))
    for s in layout.mode_slots() if unpaired else ():
        if s not in paired:
            bad |= grids[s] == layout.factors[s].dim - 1
    return float(prob[bad].sum())


def _check_leakage(psi: StateVector, where: str) -> float:
    leak = leakage(psi)
    if leak > LEAKAGE_THRESHOLD:
        raise TruncationError(f"{where}: truncation leakage {leak:.3e} exceeds {LEAKAGE_THRESHOLD:g}")
    return leak


def _apply_local(psi: StateVector, U: np.ndarray, slots: Sequence[int]) -> StateVector:
    """Apply a unitary acting on the listed factors (in that order)."""
    t = psi.tensor()
    k = len(slots)
    t = np.moveaxis(t, list(slots), list(range(k)))
    shape = t.shape
    t = (U @ t.reshape(U.shape[1], -1)).reshape(shape)
    t = np.moveaxis(t, list(range(k)), list(slots))
    return StateVector(psi.layout, t.reshape(-1), normalize=False)


def hadamard(psi: StateVector, qubit_slot: int = 0) -> StateVector:
    """Apply (1/sqrt2)[[1, 1], [1, -1]] to the qubit in ``qubit_slot``."""
    if not isinstance(psi.layout.check_slot(qubit_slot), Qubit):
        raise LayoutError(f"slot {qubit_slot} is not a qubit")
    return _apply_local(psi, _HADAMARD, [qubit_slot])


def measure_qubit(
    psi: StateVector,
    qubit_slot: int = 0,
    policy: MeasurementPolicy = MeasurementPolicy.forced(0),
    rng: Optional[np.random.Generator] = None,
):
    """Projective computational-basis measurement.

    Returns ``(outcome, probability, collapsed_state, (p0, p1))``.  Sampled
    policies draw from ``rng`` when given, else from a fresh generator seeded
    by the policy.
    """
    if not isinstance(psi.layout.check_slot(qubit_slot), Qubit):
        raise LayoutError(f"slot {qubit_slot} is not a qubit")
    t = np.moveaxis(psi.tensor(), qubit_slot, 0)
    p = np.array([np.vdot(t[0], t[0]).real, np.vdot(t[1], t[1]).real])
    p = p / p.sum()
    if policy.mode == "forced":
        outcome = policy.outcome
        if p[outcome] < IMPOSSIBLE_BRANCH_P:
            raise ImpossibleBranchError(f"forced outcome {outcome} has probability {p[outcome]:.3e}")
    else:
        rng = rng if rng is not None else policy.rng()
        outcome = 0 if rng.random() < p[0] else 1
    proj = np.zeros_like(t)
    proj[outcome] = t[outcome]
    collapsed = np.moveaxis(proj, 0, qubit_slot).reshape(-1)
    return outcome, float(p[outcome]), StateVector(psi.layout, collapsed), (float(p[0]), float(p[1]))


@lru_cache(maxsize=32)
def _beamsplitter_unitary(d: int, theta: float) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1, d)), 1)
    a1 = np.kron(a, np.eye(d))
    a2 = np.kron(np.eye(d), a)
    gen = a1.conj().T @ a2 - a2.conj().T @ a1
    U = expm(-theta * gen)
    U.flags.writeable = False  # shared through the cache
    return U


def beamsplitter(psi: StateVector, mode_slots: Tuple[int, int] = (1, 2), theta: float = math.pi / 4) -> StateVector:
    """Apply exp[-theta (a_i^dag a_j - a_j^dag a_i)]; theta = pi/4 is the 50/50 point."""
    i, j = mode_slots
    fi, fj = psi.layout.check_slot(i), psi.layout.check_slot(j)
    if not (isinstance(fi, BosonMode) and isinstance(fj, BosonMode)) or fi.d != fj.d or i == j:
        raise LayoutError("beamsplitter needs two distinct modes of equal truncation")
    leak = leakage(psi, [(i, j)], unpaired=False)
    if leak > LEAKAGE_THRESHOLD:
        raise TruncationError(f"beamsplitter input leakage {leak:.3e} exceeds {LEAKAGE_THRESHOLD:g}")
    return _apply_local(psi, _beamsplitter_unitary(fi.d, theta), [i, j])


def _modes_state(psi: StateVector, outcome: int) -> StateVector:
    """Drop the (collapsed) qubit in slot 0, keeping the mode amplitudes."""
    modes = HilbertLayout(psi.layout.factors[1:])
    return StateVector(modes, psi.amplitudes.reshape(2, -1)[outcome])


def _plus_qubit_product(modes: StateVector) -> StateVector:
    layout = HilbertLayout((Qubit(),) + modes.layout.factors)
    return StateVector(layout, np.kron(np.array([1, 1]) / math.sqrt(2), modes.amplitudes))


def _step(record: ProtocolRecord, psi: StateVector, label: str, kind: str, **kw) -> float:
    leak = _check_leakage(psi, label)
    record.steps.append(ProtocolStep(label, kind, norm=psi.norm, leakage=leak, **kw))
    return leak


# ----------------------------------------------------------------------------
# N00N generation


def binomial_intermediate(N: int, d: int) -> StateVector:
    """sum_{k=0}^N C(N,k)^{1/2} 2^{-N/2} |k, N-k> (|0> + (-1)^k |1>)/sqrt2 on [Qubit, Mode d, Mode d]."""
    layout = HilbertLayout([Qubit(), BosonMode(d), BosonMode(d)])
    v = np.zeros(layout.dim, dtype=complex)
    for k in range(N + 1):
        c = math.sqrt(math.comb(N, k)) / 2 ** (N / 2) / math.sqrt(2)
        v[layout.flatten((0, k, N - k))] += c
        v[layout.flatten((1, k, N - k))] += c * (-1) ** k
    return StateVector(layout, v)


def run_noon_protocol(
    N: int,
    omega: float,
    policy: MeasurementPolicy = MeasurementPolicy.forced(0),
    truncation: Optional[int] = None,
    config: PropagatorConfig = DEFAULT_CONFIG,
) -> ProtocolRecord:
    """Measurement-conditioned N00N generation.

    Sequence: |+>|0, N>; evolve pi/(4 omega) under the effective coupling;
    Hadamard; measure the qubit; evolve pi/(4 omega) after outcome 0 or
    3 pi/(4 omega) after outcome 1.  The final mode state is compared with
    (|N,0> + |0,N>)/sqrt2 for outcome 0 and (|N,0> - |0,N>)/sqrt2 for outcome 1.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    d = N + 1 if truncation is None else truncation
    if d < N + 1:
        raise TruncationError(f"truncation {d} < N + 1 = {N + 1}")
    timing = ProtocolTiming(omega)
    layout = HilbertLayout([Qubit(), BosonMode(d), BosonMode(d)])
    H = build_effective(EffectiveCouplingParams(omega), layout)
    rng = policy.rng()
    rec = ProtocolRecord()

    psi = _plus_qubit_product(fock(HilbertLayout([BosonMode(d), BosonMode(d)]), (0, N)))
    _step(rec, psi, "prepare |+>|0,N>", "prepare")

    psi = expm_apply(H, timing.dt1, psi, config)
    _step(rec, psi, "evolve dt1", "evolve", duration=timing.dt1, fidelity=fidelity(psi, binomial_intermediate(N, d)))

    psi = hadamard(psi, 0)
    _step(rec, psi, "hadamard", "gate")

    outcome, prob, psi, (p0, p1) = measure_qubit(psi, 0, policy, rng)
    _step(rec, psi, "measure qubit", "measure", outcome=outcome, probability=prob)
    rec.diagnostics.update(p0=p0, p1=p1)

    dt = timing.dt_final(outcome)
    psi = expm_apply(H, dt, psi, config)
    _step(rec, psi, f"evolve final (outcome {outcome})", "evolve", duration=dt)

    final = _modes_state(psi, outcome)
    ref = noon(N, d, 0.0 if outcome == 0 else math.pi)
    rec.final_state, rec.reference = final, ref
    rec.fidelity = fidelity(final, ref)
    rec.diagnostics["phase_insensitive_fidelity"] = phase_insensitive_noon_fidelity(final, N)
    if outcome == 0:
        # reference with an extra (-1)^N on |N,0>, kept for comparison only
        rec.diagnostics["alt_reference_fidelity"] = fidelity(final, noon(N, d, N * math.pi))
    return rec


# ----------------------------------------------------------------------------
# Conditional map


def _pad(psi: StateVector, d: int) -> np.ndarray:
    if len(psi.layout) != 1 or not isinstance(psi.layout.factors[0], BosonMode):
        raise LayoutError("inputs must be single-mode states")
    n = psi.layout.dim
    if n > d:
        tail = float(np.sum(np.abs(psi.amplitudes[d:]) ** 2))
        if tail > LEAKAGE_THRESHOLD:
            raise TruncationError(f"input does not fit truncation {d} (weight {tail:.3e} above it)")
        return psi.amplitudes[:d]
    out = np.zeros(d, dtype=complex)
    out[:n] = psi.amplitudes
    return out


def superposition_state(psi1: StateVector, psi2: StateVector, sign: int, d: Optional[int] = None) -> StateVector:
    """(|psi1>|psi2> + sign |psi2>|psi1>) / sqrt(2 + 2 sign |<psi1|psi2>|^2)."""
    d = max(psi1.layout.dim, psi2.layout.dim) if d is None else d
    u, v = _pad(psi1, d), _pad(psi2, d)
    s = np.vdot(u, v)
    norm2 = 2 + 2 * sign * abs(s) ** 2
    if norm2 < 1e-24:
        raise ImpossibleBranchError("antisymmetric combination of identical inputs has zero norm")
    amps = (np.kron(u, v) + sign * np.kron(v, u)) / math.sqrt(norm2)
    return StateVector(HilbertLayout([BosonMode(d), BosonMode(d)]), amps, normalize=False)


def conditional_map_target(psi1: StateVector, psi2: StateVector, outcome: int, d: Optional[int] = None) -> StateVector:
    """Exact output of the conditional map for a measured qubit outcome.

    The ground branch leaves |psi1, psi2> untouched; the excited branch maps
    it to |P psi2, psi1> with P = (-1)^n.  After the Hadamard and the
    measurement the modes hold |psi1 psi2> + (-1)^outcome |P psi2, psi1>.
    """
    d = max(psi1.layout.dim, psi2.layout.dim) if d is None else d
    u, v = _pad(psi1, d), _pad(psi2, d)
    pv = v * (-1.0) ** np.arange(d)
    amps = np.kron(u, v) + (-1) ** outcome * np.kron(pv, u)
    if np.linalg.norm(amps) < 1e-12:
        raise ImpossibleBranchError("conditional-map branch has zero norm")
    return StateVector(HilbertLayout([BosonMode(d), BosonMode(d)]), amps)


def run_conditional_map(
    psi1: StateVector,
    psi2: StateVector,
    omega: float,
    policy: MeasurementPolicy = MeasurementPolicy.forced(0),
    truncation: Optional[int] = None,
    config: PropagatorConfig = DEFAULT_CONFIG,
) -> ProtocolRecord:
    """Qubit-conditioned two-mode map followed by a 50/50 beamsplitter and a Hadamard.

    Sequence: |psi1>|psi2>(|g> + |e>)/sqrt2; evolve to kappa t = pi/4;
    beamsplitter(pi/4); Hadamard; measure.  ``rec.fidelity`` is against the
    exact branch output (see :func:`conditional_map_target`).  When psi2 has
    definite parity p the output is the symmetric (sign +p) or antisymmetric
    (sign -p) superposition, and its fidelity is stored as
    ``superposition_fidelity`` with the sign as ``superposition_sign``.
    """
    d = max(psi1.layout.dim, psi2.layout.dim) if truncation is None else truncation
    modes = HilbertLayout([BosonMode(d), BosonMode(d)])
    layout = HilbertLayout((Qubit(),) + modes.factors)
    H = build_effective(EffectiveCouplingParams(omega), layout)
    rng = policy.rng()
    rec = ProtocolRecord()

    psi = _plus_qubit_product(StateVector(modes, np.kron(_pad(psi1, d), _pad(psi2, d))))
    _step(rec, psi, "prepare |psi1>|psi2>|+>", "prepare")

    t = math.pi / (4 * omega)
    psi = expm_apply(H, t, psi, config)
    _step(rec, psi, "evolve kappa t = pi/4", "evolve", duration=t)

    psi = beamsplitter(psi, (1, 2), math.pi / 4)
    _step(rec, psi, "beamsplitter", "beamsplitter")

    psi = hadamard(psi, 0)
    _step(rec, psi, "hadamard", "gate")

    outcome, prob, psi, (p0, p1) = measure_qubit(psi, 0, policy, rng)
    _step(rec, psi, "measure qubit", "measure", outcome=outcome, probability=prob)
    rec.diagnostics.update(p0=p0, p1=p1)

    final = _modes_state(psi, outcome)
    ref = conditional_map_target(psi1, psi2, outcome, d)
    rec.final_state, rec.reference = final, ref
    rec.fidelity = fidelity(final, ref)
    p = parity(StateVector(HilbertLayout([BosonMode(d)]), _pad(psi2, d)))
    if p is not None:
        sign = p if outcome == 0 else -p
        rec.diagnostics["superposition_sign"] = float(sign)
        rec.diagnostics["superposition_fidelity"] = fidelity(final, superposition_state(psi1, psi2, sign, d))
    return rec


# ----------------------------------------------------------------------------
# Multi-pair chain


def run_multi_noon(
    M: int,
    N: int,
    omega: float,
    policy: MeasurementPolicy = MeasurementPolicy.forced(0),
    truncation: Optional[int] = None,
    config: PropagatorConfig = DEFAULT_CONFIG,
    max_dim: int = MAX_DIM,
) -> ProtocolRecord:
    """Multi-pair N00N chain with one shared qubit.

    Input |N,0>^{M} (|g> + |e>)/sqrt2.  The qubit interacts with each pair in
    turn for kappa t = pi/4, every pair passes a 50/50 beamsplitter, then a
    Hadamard and a measurement leave (|N,0..N,0> +- |0,N..0,N>)/sqrt2, with
    + for outcome 0.
    """
    if M < 1 or N < 1:
        raise ValueError("need M >= 1 and N >= 1")
    d = N + 1 if truncation is None else truncation
    if d < N + 1:
        raise TruncationError(f"truncation {d} < N + 1 = {N + 1}")
    dim = 2 * d ** (2 * M)
    if dim > max_dim:
        raise ValueError(f"dimension {dim} exceeds the budget {max_dim}")
    modes = HilbertLayout([BosonMode(d)] * (2 * M))
    layout = HilbertLayout((Qubit(),) + modes.factors)
    rng = policy.rng()
    rec = ProtocolRecord()

    psi = _plus_qubit_product(fock(modes, (N, 0) * M))
    _step(rec, psi, "prepare |N,0>^M |+>", "prepare")

    t = math.pi / (4 * omega)
    for m in range(M):
        pair = (2 * m + 1, 2 * m + 2)
        H = build_effective(EffectiveCouplingParams(omega), layout, pair)
        psi = expm_apply(H, t, psi, config)
        _step(rec, psi, f"evolve pair {m + 1}", "evolve", duration=t)
    for m in range(M):
        psi = beamsplitter(psi, (2 * m + 1, 2 * m + 2), math.pi / 4)
        _step(rec, psi, f"beamsplitter pair {m + 1}", "beamsplitter")

    psi = hadamard(psi, 0)
    _step(rec, psi, "hadamard", "gate")
    outcome, prob, psi, (p0, p1) = measure_qubit(psi, 0, policy, rng)
    _step(rec, psi, "measure qubit", "measure", outcome=outcome, probability=prob)
    rec.diagnostics.update(p0=p0, p1=p1)

    final = _modes_state(psi, outcome)
    ref = multi_noon(M, N, d, 0.0 if outcome == 0 else math.pi)
    rec.final_state, rec.reference = final, ref
    rec.fidelity = fidelity(final, ref)
    return rec
