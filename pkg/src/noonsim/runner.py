"""Scenario execution: protocol runs, verification sweeps and the metrology table."""

from __future__ import annotations

import math
from datetime import datetime, timezone
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .config import ConditionalMapConfig, InputStateModel, MetrologyConfig, MultiNoonConfig, NoonProtocolConfig
from .evolution import PropagatorConfig, expm_apply, propagate_periodic
from .hamiltonians import (
    DriveSpec,
    EffectiveCouplingParams,
    EnsembleParams,
    TrappedIonParams,
    build_effective,
    build_trapped_ion,
    chi,
    coupling_modulated_kappa,
    coupling_modulated_source,
    frequency_modulated_source,
    hp_reference_dynamics,
    three_factor_layout,
    trapped_ion_frame,
)
from .hilbert import BosonMode, HilbertLayout, Qubit, StateVector, embed, mode_operator, pauli
from .metrics import concurrence_superposition, fidelity, phase_uncertainty, qfi, schmidt_concurrence
from .protocol import run_conditional_map, run_multi_noon, run_noon_protocol
from .report import Column, RunReport, Table
from .spin import j_gamma, spin_operators
from .states import (
    SpinParams,
    coherent,
    fock,
    multi_noon,
    noon,
    spin_cat,
    spin_coherent,
    squeezed_vacuum,
)

__all__ = [
    "run_scenario",
    "floquet_error_sweep",
    "hp_error_sweep",
    "trapped_ion_verify",
    "metrology_table",
    "plus_with_modes",
]


def plus_with_modes(modes: StateVector) -> StateVector:
    """(|0> + |1>)/sqrt2 tensored with a mode state."""
    layout = HilbertLayout((Qubit(),) + modes.layout.factors)
    return StateVector(layout, np.kron(np.array([1, 1]) / math.sqrt(2), modes.amplitudes))


# ----------------------------------------------------------------------------
# Floquet sweep


_FLOQUET_COLUMNS = [
    Column("nu_over_g", "1"),
    Column("nu", "rad/time"),
    Column("rate", "rad/time"),
    Column("t_final", "time"),
    Column("periods", "1"),
    Column("infidelity", "1"),
    Column("stepper_delta", "1"),
]


def floquet_error_sweep(
    scheme: str,
    nu_ratios: Sequence[float],
    g0: float = 1.0,
    phases: Tuple[float, float] = (math.pi / 3, 0.0),
    zeta: float = 2.404825557695773,
    detuning: float = 0.0,
    n_max: int = 40,
    N: int = 2,
    truncation: Optional[int] = None,
    numerics: PropagatorConfig = PropagatorConfig(),
):
    """Exact driven dynamics against the reduced Hamiltonian, one row per drive frequency.

    The initial state is |+>|0, N>.  Each point propagates to t = pi / (4 |rate|)
    where rate is kappa (coupling modulation) or Omega (frequency modulation).
    ``stepper_delta`` is the state distance between the run and one with half
    the steps per period, a self-convergence estimate of the stepper.
    Returns ``(table, reference_table)``.
    """
    d = N + 2 if truncation is None else truncation
    layout = three_factor_layout(d)
    modes = HilbertLayout([BosonMode(d), BosonMode(d)])
    psi0 = plus_with_modes(fock(modes, (0, N)))
    table = Table(list(_FLOQUET_COLUMNS))
    spp = numerics.steps_per_period
    for ratio in nu_ratios:
        nu = ratio * g0
        drive = DriveSpec(g0=g0, nu=nu, phases=tuple(phases), zeta=zeta, detuning=detuning, n_max=n_max)
        if scheme == "coupling-mod":
            rate = coupling_modulated_kappa(g0, nu, drive.dphi)
            H_eff = build_effective(EffectiveCouplingParams(rate), layout) + embed(pauli("z"), layout, 0) * (detuning / 2)
            source = coupling_modulated_source(drive, layout)
        elif scheme == "frequency-mod":
            rate = g0 ** 2 * chi(zeta, drive.dphi, n_max)[0] / nu
            H_eff = build_effective(EffectiveCouplingParams(rate, 0.0), layout)
            source = frequency_modulated_source(drive, layout)
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
        t = math.pi / (4 * abs(rate))
        eff = expm_apply(H_eff, t, psi0, numerics)
        exact = propagate_periodic(source, drive.period, t, psi0, numerics, spp)
        coarse = propagate_periodic(source, drive.period, t, psi0, numerics, max(1, spp // 2))
        table.add(
            nu_over_g=float(ratio),
            nu=nu,
            rate=rate,
            t_final=t,
            periods=t / drive.period,
            infidelity=1 - fidelity(eff, exact),
            stepper_delta=float(np.linalg.norm(exact.amplitudes - coarse.amplitudes)),
        )
    ref = Table([Column("quantity"), Column("value", "rad/time or 1"), Column("aux", "1")])
    if scheme == "coupling-mod":
        # the strong-coupling operating point upsilon = 2 g0 at maximal phase difference
        ref.add(quantity="kappa_at_upsilon_2g0_over_g0", value=coupling_modulated_kappa(g0, 2 * g0, math.pi / 2) / g0)
    else:
        value, last = chi(zeta, phases[0] - phases[1], n_max)
        ref.add(quantity="chi", value=value, aux=last)
    return table, ref


# ----------------------------------------------------------------------------
# Holstein-Primakoff sweep


def hp_error_sweep(
    N0_list: Iterable[int],
    excitation: int = 1,
    g: float = 1.0,
    t_list: Iterable[float] = (1.0,),
    cutoff: Optional[int] = None,
    numerics: PropagatorConfig = PropagatorConfig(),
) -> Table:
    """Exact Dicke-ladder dynamics against the HP boson model.

    Initial state: qubit excited, ensemble on collective level ``excitation``.
    ``g`` is the single-spin coupling, so the collective one is sqrt(N0) g.
    """
    cutoff = excitation + 2 if cutoff is None else cutoff
    table = Table(
        [
            Column("N0", "spins"),
            Column("t", "time"),
            Column("gt", "1"),
            Column("infidelity", "1"),
            Column("collective_coupling", "rad/time"),
            Column("element_ratio", "1"),
        ]
    )
    for N0 in N0_list:
        params = EnsembleParams(N0, cutoff)
        layout, H_exact, H_hp = hp_reference_dynamics(params, g)
        psi0 = fock(layout, (1, excitation))
        for t in t_list:
            a = expm_apply(H_exact, t, psi0, numerics)
            b = expm_apply(H_hp, t, psi0, numerics)
            table.add(
                N0=int(N0),
                t=float(t),
                gt=g * t,
                infidelity=1 - fidelity(a, b),
                collective_coupling=math.sqrt(N0) * g,
                element_ratio=math.sqrt(1 - excitation / N0),
            )
    return table


# ----------------------------------------------------------------------------
# Trapped ion


def trapped_ion_verify(
    ratios: Iterable[float],
    g0: float = 1.0,
    eta: float = 0.1,
    phi_L: float = 0.0,
    stage: str = "rwa_reduced",
    nu: float = 0.0,
    N: int = 2,
    truncation: Optional[int] = None,
    numerics: PropagatorConfig = PropagatorConfig(),
) -> Table:
    """Laser-frame dynamics mapped into the effective frame, against the effective Hamiltonian.

    Initial effective-frame state |+>|0_a, N_b>; comparison at t = pi / (4 Omega).
    """
    d = N + 1 if truncation is None else truncation
    layout = three_factor_layout(d)
    psi_eff0 = plus_with_modes(fock(HilbertLayout([BosonMode(d), BosonMode(d)]), (0, N)))
    table = Table(
        [
            Column("ratio", "1"),
            Column("epsilon", "rad/time"),
            Column("omega", "rad/time"),
            Column("t_final", "time"),
            Column("infidelity", "1", tol=1e-2),
        ]
    )
    for ratio in ratios:
        eps = g0 * eta / ratio
        params = TrappedIonParams(
            g0=g0, eta=eta, epsilon_L=eps * complex(math.cos(phi_L), -math.sin(phi_L)), nu=nu, delta_c=nu
        )
        t = math.pi / (4 * params.omega)
        H = build_trapped_ion(params, layout, stage)
        lab0 = trapped_ion_frame(params, layout, 0.0, stage).adjoint() @ psi_eff0
        lab = expm_apply(H, t, StateVector(layout, lab0.amplitudes), numerics)
        mapped = trapped_ion_frame(params, layout, t, stage) @ lab
        eff = expm_apply(build_trapped_ion(params, layout, "effective"), t, psi_eff0, numerics)
        table.add(ratio=float(ratio), epsilon=eps, omega=params.omega, t_final=t, infidelity=1 - fidelity(mapped, eff))
    return table


# ----------------------------------------------------------------------------
# Metrology


_METRO_COLUMNS = [
    Column("family"),
    Column("label"),
    Column("size", "photons or 2j"),
    Column("theta", "rad"),
    Column("phi", "rad"),
    Column("generator"),
    Column("matched", "bool"),
    Column("qfi", "1", tol=1e-8),
    Column("expected_qfi", "1"),
    Column("phase_uncertainty", "rad"),
]


def metrology_table(cfg: MetrologyConfig, seed: Optional[int] = None) -> Table:
    """QFI and phase uncertainty for N00N, spin-cat, multi-N00N and coherent probes.

    ``expected_qfi`` is filled only where a closed form exists; unmatched
    generators are listed as diagnostics.
    """
    table = Table(list(_METRO_COLUMNS))
    for N in cfg.noon_N:
        psi = noon(N)
        G = mode_operator(psi.layout, 0, "n")
        table.add(family="noon", label=f"N={N}", size=N, generator="n1", matched=True,
                  qfi=qfi(psi, G), expected_qfi=float(N * N), phase_uncertainty=phase_uncertainty(psi, G))
    rng = np.random.default_rng(seed if seed is not None else 0)
    for tj in cfg.cat_two_j:
        j = tj / 2
        Jp, Jm, Jz = spin_operators(j)
        points = [("z-cat", 0.0, 0.0), ("x-cat", math.pi / 2, 0.0), ("y-cat", math.pi / 2, math.pi / 2)]
        points += [(f"random-{k}", float(rng.uniform(0, math.pi)), float(rng.uniform(0, 2 * math.pi)))
                   for k in range(cfg.random_cats)]
        for label, th, ph in points:
            cat = spin_cat(SpinParams(j, th, ph))
            G = j_gamma(th, ph, Jp, Jm, Jz)
            table.add(family="spin-cat", label=label, size=tj, theta=th, phi=ph, generator="J_gamma",
                      matched=True, qfi=qfi(cat, G), expected_qfi=float(tj * tj),
                      phase_uncertainty=phase_uncertainty(cat, G))
            if th != 0.0:
                table.add(family="spin-cat", label=label, size=tj, theta=th, phi=ph, generator="Jz",
                          matched=False, qfi=qfi(cat, Jz), phase_uncertainty=phase_uncertainty(cat, Jz))
        # two coherent states that are not antipodal
        a = spin_coherent(SpinParams(j, 0.0, 0.0)).amplitudes
        b = spin_coherent(SpinParams(j, math.pi / 2, 0.0)).amplitudes
        sup = StateVector(Jz.layout, a + b)
        table.add(family="non-antipodal", label="poles(0, pi/2)", size=tj, generator="Jz", matched=False,
                  qfi=qfi(sup, Jz), phase_uncertainty=phase_uncertainty(sup, Jz))
        table.add(family="dicke", label="|j,-j>", size=tj, generator="Jz", matched=False,
                  qfi=qfi(spin_coherent(SpinParams(j, 0.0)), Jz),
                  phase_uncertainty=phase_uncertainty(spin_coherent(SpinParams(j, 0.0)), Jz))
    M, N = cfg.multi_noon
    psi = multi_noon(M, N)
    G = mode_operator(psi.layout, 0, "n")
    for m in range(1, M):
        G = G + mode_operator(psi.layout, 2 * m, "n")
    table.add(family="multi-noon", label=f"M={M},N={N}", size=M * N, generator="sum n_first", matched=True,
              qfi=qfi(psi, G), expected_qfi=float((M * N) ** 2), phase_uncertainty=phase_uncertainty(psi, G))
    for alpha in cfg.coherent_alpha:
        d = max(20, int(4 * alpha ** 2 + 20 * alpha + 20))
        psi = coherent(alpha, d)
        G = mode_operator(psi.layout, 0, "n")
        table.add(family="coherent", label=f"alpha={alpha}", size=alpha ** 2, generator="n1", matched=True,
                  qfi=qfi(psi, G), expected_qfi=4 * alpha ** 2, phase_uncertainty=phase_uncertainty(psi, G))
    return table


# ----------------------------------------------------------------------------
# Protocol scenarios


def _input_state(spec: InputStateModel, d: int) -> StateVector:
    if spec.type == "fock":
        return fock(HilbertLayout([BosonMode(d)]), (spec.n,))
    if spec.type == "coherent":
        return coherent(complex(*spec.alpha), d)
    return squeezed_vacuum(spec.r, spec.phi, d)


def _label(spec: InputStateModel) -> str:
    if spec.type == "fock":
        return f"fock({spec.n})"
    if spec.type == "coherent":
        return f"coherent({spec.alpha[0]:g}{spec.alpha[1]:+g}i)"
    return f"squeezed(r={spec.r:g},phi={spec.phi:g})"


_STEP_STATS = [Column("max_leakage", "1", tol=1e-10), Column("max_norm_error", "1", tol=1e-10)]


def _step_stats(rec):
    return (max(s.leakage for s in rec.steps), max(abs(s.norm - 1) for s in rec.steps))


def _noon_report(cfg: NoonProtocolConfig, seed, numerics):
    table = Table(
        [
            Column("N", "photons"),
            Column("outcome"),
            Column("probability", "1", tol=1e-12),
            Column("fidelity", "1", tol=1e-10),
            Column("intermediate_fidelity", "1", tol=1e-10),
            Column("phase_insensitive_fidelity", "1"),
            Column("alt_reference_fidelity", "1"),
        ]
        + _STEP_STATS
    )
    for N, policies in zip(cfg.N, cfg.policy.policies(seed, len(cfg.N))):
        for pol in policies:
            rec = run_noon_protocol(N, cfg.omega, pol, cfg.truncation, numerics)
            leak, nerr = _step_stats(rec)
            table.add(N=N, outcome=rec.outcome, probability=rec.steps[3].probability, fidelity=rec.fidelity,
                      intermediate_fidelity=rec.steps[1].fidelity,
                      phase_insensitive_fidelity=rec.diagnostics["phase_insensitive_fidelity"],
                      alt_reference_fidelity=rec.diagnostics.get("alt_reference_fidelity"),
                      max_leakage=leak, max_norm_error=nerr)
    return {"runs": table}, "runs"


def _conditional_report(cfg: ConditionalMapConfig, seed, numerics):
    table = Table(
        [
            Column("pair"),
            Column("psi1"),
            Column("psi2"),
            Column("outcome"),
            Column("probability", "1"),
            Column("fidelity", "1", tol=1e-9),
            Column("superposition_sign"),
            Column("superposition_fidelity", "1", tol=1e-9),
            Column("concurrence", "1"),
            Column("concurrence_formula", "1", tol=1e-10),
        ]
        + _STEP_STATS
    )
    d = cfg.truncation
    for k, ((s1, s2), policies) in enumerate(zip(cfg.inputs, cfg.policy.policies(seed, len(cfg.inputs)))):
        psi1, psi2 = _input_state(s1, d), _input_state(s2, d)
        for pol in policies:
            rec = run_conditional_map(psi1, psi2, cfg.omega, pol, d, numerics)
            sign = rec.diagnostics.get("superposition_sign")
            formula = concurrence_superposition(psi1, psi2, int(sign)) if sign is not None else None
            leak, nerr = _step_stats(rec)
            table.add(pair=k, psi1=_label(s1), psi2=_label(s2), outcome=rec.outcome,
                      probability=rec.steps[-1].probability, fidelity=rec.fidelity,
                      superposition_sign=None if sign is None else int(sign),
                      superposition_fidelity=rec.diagnostics.get("superposition_fidelity"),
                      concurrence=schmidt_concurrence(rec.final_state), concurrence_formula=formula,
                      max_leakage=leak, max_norm_error=nerr)
    return {"runs": table}, "runs"


def _multi_report(cfg: MultiNoonConfig, seed, numerics):
    table = Table(
        [
            Column("M", "pairs"),
            Column("N", "photons"),
            Column("outcome"),
            Column("probability", "1"),
            Column("fidelity", "1", tol=1e-9),
            Column("qfi", "1", tol=1e-9),
            Column("phase_uncertainty", "rad", tol=1e-9),
        ]
        + _STEP_STATS
    )
    for pol in cfg.policy.policies(seed, 1)[0]:
        rec = run_multi_noon(cfg.M, cfg.N, cfg.omega, pol, cfg.truncation, numerics)
        psi = rec.final_state
        G = mode_operator(psi.layout, 0, "n")
        for m in range(1, cfg.M):
            G = G + mode_operator(psi.layout, 2 * m, "n")
        leak, nerr = _step_stats(rec)
        table.add(M=cfg.M, N=cfg.N, outcome=rec.outcome, probability=rec.steps[-1].probability,
                  fidelity=rec.fidelity, qfi=qfi(psi, G), phase_uncertainty=phase_uncertainty(psi, G),
                  max_leakage=leak, max_norm_error=nerr)
    return {"runs": table}, "runs"


def run_scenario(config, seed: Optional[int] = None, timestamp: bool = True) -> RunReport:
    """Execute a validated scenario config and assemble its report.

    ``seed`` overrides the config's seed (used by sampled measurements and by
    the random spin-cat draws of the metrology table).
    """
    numerics = config.numerics.propagator()
    seed = config.seed if seed is None else seed
    if seed is None:
        seed = getattr(getattr(config, "policy", None), "seed", None)
    convergence = {}
    kind = config.kind
    if kind == "noon-protocol":
        tables, primary = _noon_report(config, seed, numerics)
    elif kind == "conditional-map":
        tables, primary = _conditional_report(config, seed, numerics)
    elif kind == "multi-noon":
        tables, primary = _multi_report(config, seed, numerics)
    elif kind == "floquet-sweep":
        sweep, ref = floquet_error_sweep(config.scheme, config.nu_ratios, config.g0, config.phases, config.zeta,
                                         config.detuning, config.n_max, config.N, config.truncation, numerics)
        tables, primary = {"sweep": sweep, "reference": ref}, "sweep"
        convergence["max_stepper_delta"] = max(sweep.column("stepper_delta"))
    elif kind == "trapped-ion-verify":
        tables = {"sweep": trapped_ion_verify(config.ratios, config.g0, config.eta, config.phi_L, config.stage,
                                              config.nu, config.N, config.truncation, numerics)}
        primary = "sweep"
    elif kind == "hp-sweep":
        tables = {"sweep": hp_error_sweep(config.N0, config.excitation, config.g, config.t,
                                          config.effective_cutoff, numerics)}
        primary = "sweep"
    elif kind == "metrology-table":
        tables, primary = {"qfi": metrology_table(config, seed)}, "qfi"
    else:  # pragma: no cover - the config union is closed
        raise ValueError(f"unknown scenario kind {kind!r}")
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds") if timestamp else None
    return RunReport(kind=kind, config=config.model_dump(mode="json"), tables=tables, primary=primary,
                     seed=seed, timestamp=stamp, convergence=convergence)
