"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""

import math
import time

import numpy as np

from noonsim.cli import main
from noonsim.evolution import PropagatorConfig, expm_apply, propagate_td, propagator
from noonsim.hamiltonians import (
    DriveSpec,
    EffectiveCouplingParams,
    build_effective,
    chi,
    coupling_modulated_harmonics,
    coupling_modulated_kappa,
    floquet_reduce,
    frequency_modulated_harmonics,
    frequency_modulated_source,
    three_factor_layout,
    ZETA_J0_ZERO,
)
from noonsim.hilbert import BosonMode, HilbertLayout, StateVector, commutator, embed, mode_operator, pauli
from noonsim.metrics import (
    concurrence_spin_flip,
    concurrence_superposition,
    fidelity,
    phase_uncertainty,
    qfi,
    rotation_compose,
    rotation_gamma,
    schwinger_generators,
)
from noonsim.protocol import (
    MeasurementPolicy,
    ProtocolTiming,
    binomial_intermediate,
    hadamard,
    measure_qubit,
    run_conditional_map,
    run_multi_noon,
    run_noon_protocol,
)
from noonsim.runner import floquet_error_sweep, hp_error_sweep, plus_with_modes, trapped_ion_verify
from noonsim.spin import j_gamma, rotation_y, spin_operators
from noonsim.states import SpinParams, coherent, fock, noon, spin_cat, spin_extreme_x, vacuum


def test_criterion_01_noon_protocol_exact(criterion):
    with criterion(1, "N00N protocol exact for N=1..6, both outcomes, <1 s per run") as note:
        worst, slowest = 0.0, 0.0
        for N in range(1, 7):
            for outcome in (0, 1):
                start = time.perf_counter()
                rec = run_noon_protocol(N, 1.0, MeasurementPolicy.forced(outcome), truncation=N + 1)
                slowest = max(slowest, time.perf_counter() - start)
                worst = max(worst, 1 - rec.fidelity)
        note(f"max infidelity {worst:.1e}, slowest run {slowest * 1e3:.1f} ms")
        assert worst <= 1e-10
        assert slowest < 1.0


def test_criterion_02_intermediate_state(criterion):
    with criterion(2, "post-dt1 binomial state and 1/2 outcome probabilities") as note:
        worst_dist, worst_p = 0.0, 0.0
        for N in range(1, 7):
            d = N + 1
            layout = three_factor_layout(d)
            psi0 = plus_with_modes(fock(HilbertLayout([BosonMode(d)] * 2), (0, N)))
            H = build_effective(EffectiveCouplingParams(1.0), layout)
            psi1 = expm_apply(H, ProtocolTiming(1.0).dt1, psi0)
            ref = binomial_intermediate(N, d)
            worst_dist = max(worst_dist, float(np.linalg.norm(psi1.amplitudes - ref.amplitudes)))
            _, _, _, (p0, p1) = measure_qubit(hadamard(psi1), 0, MeasurementPolicy.forced(0))
            worst_p = max(worst_p, abs(p0 - 0.5), abs(p1 - 0.5))
        note(f"max state distance {worst_dist:.1e}, max |p - 1/2| {worst_p:.1e}")
        assert worst_dist <= 1e-10
        assert worst_p <= 1e-12


def test_criterion_03_coupling_modulated_reduction(criterion):
    with criterion(3, "coupling-modulated Floquet reduction; kappa at upsilon = 2 g0") as note:
        layout = three_factor_layout(4)
        worst = 0.0
        for g0, nu, phases in ((1.0, 7.0, (math.pi / 2, 0.0)), (0.6, 12.0, (1.3, -0.4)), (2.0, 30.0, (0.2, 0.9))):
            drive = DriveSpec(g0=g0, nu=nu, phases=phases)
            h0, harm = coupling_modulated_harmonics(drive, layout)
            kappa = coupling_modulated_kappa(g0, nu, phases[0] - phases[1])
            ref = build_effective(EffectiveCouplingParams(kappa), layout)
            worst = max(worst, floquet_reduce(h0, harm, nu).max_abs_diff(ref))
        note(f"reduction vs effective max |diff| {worst:.1e}")
        assert worst <= 1e-12
        _, ref_table = floquet_error_sweep("coupling-mod", [10.0], phases=(math.pi / 2, 0.0),
                                           numerics=PropagatorConfig(steps_per_period=50))
        kappa_ratio = ref_table.column("value")[0]
        note(f"recorded kappa(upsilon=2 g0) = {kappa_ratio:g} g0")
        assert abs(kappa_ratio - 0.5) <= 1e-12, "expected 0.5 g0"


def test_criterion_04_frequency_modulated_reduction(criterion, frozen):
    with criterion(4, "chi(2.4048, pi/3, 50) and frequency-modulated reduced Hamiltonian") as note:
        value, _ = chi(2.4048, math.pi / 3, 50)
        note(f"chi = {value:.6f}")
        assert abs(value - 0.628) <= 0.002
        assert abs(value - frozen["chi_2.4048_pi3_50"]) <= 1e-13
        g, nu = 1.0, 20.0
        layout = three_factor_layout(4)
        drive = DriveSpec(g0=g, nu=nu, phases=(math.pi / 3, 0.0), zeta=ZETA_J0_ZERO, n_max=50)
        h0, harm = frequency_modulated_harmonics(drive, layout)
        omega = g ** 2 * chi(ZETA_J0_ZERO, math.pi / 3, 50)[0] / nu
        a1, a2 = mode_operator(layout, 1, "a"), mode_operator(layout, 2, "a")
        sz = embed(pauli("z"), layout, 0)
        target = (a1.adjoint() @ a2 - a1 @ a2.adjoint()) @ sz * (1j * omega)
        diff = floquet_reduce(h0, harm, nu).max_abs_diff(target)
        note(f"reduced vs i Omega(...) max |diff| {diff:.1e} at the J0 zero")
        assert diff <= 1e-10


def test_criterion_05_effective_vs_exact(criterion):
    with criterion(5, "frequency-modulated exact vs effective, nu/g = 10..80") as note:
        start = time.perf_counter()
        table, _ = floquet_error_sweep("frequency-mod", [10, 20, 40, 80], phases=(math.pi / 3, 0.0), zeta=2.4048,
                                       N=2, numerics=PropagatorConfig(steps_per_period=800))
        elapsed = time.perf_counter() - start
        inf = table.column("infidelity")
        ratios = [a / b for a, b in zip(inf, inf[1:])]
        note("infidelity " + ", ".join(f"{x:.2e}" for x in inf))
        note("reduction per doubling " + ", ".join(f"{r:.2f}" for r in ratios))
        note(f"{elapsed:.1f} s; max stepper delta {max(table.column('stepper_delta')):.1e}")
        assert all(r >= 1.5 for r in ratios)
        assert elapsed < 300


def test_criterion_06_heisenberg_identity(criterion):
    with criterion(6, "U^dag a1 U = a1 cos(kt) - a2 sz sin(kt)") as note:
        d, kappa = 6, 0.8
        layout = three_factor_layout(d)
        H = build_effective(EffectiveCouplingParams(kappa), layout)
        a1 = mode_operator(layout, 1, "a").matrix
        a2 = mode_operator(layout, 2, "a").matrix
        sz = embed(pauli("z"), layout, 0).matrix
        keep = np.array([sum(layout.unflatten(i)[1:]) <= d - 1 for i in range(layout.dim)])
        worst = 0.0
        for kt in (math.pi / 8, math.pi / 4, 1.0):
            U = propagator(H, kt / kappa).matrix
            lhs = U.conj().T @ a1 @ U
            rhs = a1 * math.cos(kt) - a2 @ sz * math.sin(kt)
            worst = max(worst, float(np.max(np.abs((lhs - rhs)[:, keep]))))
        note(f"max |diff| {worst:.1e} on inputs with n1 + n2 <= {d - 1}")
        assert worst <= 1e-9


def test_criterion_07_beyond_noon(criterion):
    with criterion(7, "conditional map on coherent + vacuum; concurrence closed form") as note:
        d = 16
        psi1, psi2 = coherent(1.0, d), vacuum(d)
        worst = 0.0
        for outcome, sign in ((0, 1), (1, -1)):
            rec = run_conditional_map(psi1, psi2, 1.0, MeasurementPolicy.forced(outcome))
            raw = np.kron(psi1.amplitudes, psi2.amplitudes) + sign * np.kron(psi2.amplitudes, psi1.amplitudes)
            printed = StateVector(rec.final_state.layout, raw / math.sqrt(2 + sign * 2 * math.exp(-1.0)), normalize=False)
            assert abs(printed.norm - 1) < 1e-12
            worst = max(worst, 1 - fidelity(rec.final_state, printed))
        note(f"max infidelity against the normalized superpositions {worst:.1e}")
        assert worst <= 1e-9

        rng = np.random.default_rng(2024)
        gap, minus_gap = 0.0, 0.0
        for _ in range(100):
            a, b = (complex(*rng.uniform(-1.5, 1.5, 2)) for _ in range(2))
            u, v = coherent(a, 30), coherent(b, 30)
            for s in (1, -1):
                gap = max(gap, abs(concurrence_superposition(u, v, s) - concurrence_spin_flip(u, v, s)))
            minus_gap = max(minus_gap, abs(concurrence_superposition(u, v, -1) - 1))
            minus_gap = max(minus_gap, abs(concurrence_spin_flip(u, v, -1) - 1))
        note(f"closed form vs spin-flip {gap:.1e}; |C(psi-) - 1| {minus_gap:.1e}")
        assert gap <= 1e-10
        assert minus_gap <= 1e-10


def test_criterion_08_metrology(criterion):
    with criterion(8, "QFI of N00N, spin cats and the multi-N00N chain") as note:
        noon_err = 0.0
        for N in range(1, 11):
            psi = noon(N)
            noon_err = max(noon_err, abs(qfi(psi, mode_operator(psi.layout, 0, "n")) - N * N))
        rng = np.random.default_rng(8)
        points = [(float(rng.uniform(0, math.pi)), float(rng.uniform(0, 2 * math.pi))) for _ in range(20)]
        cat_err = 0.0
        for tj in range(1, 11):
            j = tj / 2
            Jp, Jm, Jz = spin_operators(j)
            for th, ph in points:
                cat_err = max(cat_err, abs(qfi(spin_cat(SpinParams(j, th, ph)), j_gamma(th, ph, Jp, Jm, Jz)) - tj * tj))
        rec = run_multi_noon(2, 2, 1.0)
        psi = rec.final_state
        G = mode_operator(psi.layout, 0, "n") + mode_operator(psi.layout, 2, "n")
        dtheta = phase_uncertainty(psi, G)
        note(f"N00N {noon_err:.1e}; cats {cat_err:.1e}; multi-N00N dtheta {dtheta:.12f}")
        assert noon_err <= 1e-8
        assert cat_err <= 1e-8
        assert abs(dtheta - 0.25) <= 1e-9


def test_criterion_09_su2_structure(criterion):
    with criterion(9, "Schwinger commutators, rotation composition, x-cat to N00N") as note:
        d = 6
        L = HilbertLayout([BosonMode(d), BosonMode(d)])
        Jp, Jm, Jz = schwinger_generators(L)
        keep = np.array([sum(L.unflatten(i)) <= d - 1 for i in range(L.dim)])
        block = np.ix_(keep, keep)
        comm = max(
            float(np.max(np.abs((commutator(Jp, Jm) - Jz * 2).matrix[block]))),
            float(np.max(np.abs((commutator(Jz, Jp) - Jp).matrix[block]))),
        )
        rng = np.random.default_rng(9)
        comp = 0.0
        for tj in range(1, 11):
            Sp, Sm, Sz = spin_operators(tj / 2)
            for _ in range(5):
                g1, g2 = (complex(*rng.normal(size=2)) for _ in range(2))
                g3, Phi = rotation_compose(g1, g2)
                lhs = (rotation_gamma(g1, Sp, Sm) @ rotation_gamma(g2, Sp, Sm)).matrix
                rhs = rotation_gamma(g3, Sp, Sm).matrix @ np.diag(np.exp(1j * Phi * np.diag(Sz.matrix)))
                comp = max(comp, float(np.max(np.abs(lhs - rhs))))
        cat = 0.0
        for tj in range(1, 11):
            j = tj / 2
            Sp, Sm, _ = spin_operators(j)
            xcat = StateVector(Sp.layout, spin_extreme_x(j, 1).amplitudes + spin_extreme_x(j, -1).amplitudes)
            out = rotation_y(-math.pi / 2, Sp, Sm) @ xcat
            zcat = spin_cat(SpinParams(j, 0.0))
            cat = max(cat, float(np.linalg.norm(out.amplitudes - zcat.amplitudes)))
        note(f"commutators {comm:.1e}; composition {comp:.1e}; x-cat {cat:.1e}")
        assert comm <= 1e-12
        assert comp <= 1e-9
        assert cat <= 1e-10


def test_criterion_10_holstein_primakoff(criterion, frozen):
    with criterion(10, "HP vs exact collective spin at gt = 1, N0 = 10, 100, 1000") as note:
        table = hp_error_sweep([10, 100, 1000], excitation=1, g=1.0, t_list=[1.0])
        inf = table.column("infidelity")
        note("infidelity " + ", ".join(f"{x:.3e}" for x in inf))
        assert inf[0] > inf[1] > inf[2]
        assert inf[2] < 1e-3
        for N0, x in zip((10, 100, 1000), inf):
            assert abs(x - frozen["hp_infidelity_gt1"][str(N0)]) <= 1e-12


def test_criterion_11_trapped_ion(criterion):
    with criterion(11, "trapped-ion laser-frame dynamics vs effective coupling") as note:
        full = trapped_ion_verify([0.05, 0.02, 0.01], phi_L=0.4, stage="full", nu=200.0).column("infidelity")
        rwa = trapped_ion_verify([0.05, 0.02, 0.01], phi_L=0.4, stage="rwa_reduced").column("infidelity")
        note("full " + ", ".join(f"{x:.2e}" for x in full))
        note("rwa " + ", ".join(f"{x:.2e}" for x in rwa))
        for inf in (full, rwa):
            assert inf[1] <= 1e-2
            assert inf[0] > inf[1] > inf[2]


def test_criterion_12_numerics(criterion, tmp_path):
    with criterion(12, "norm preservation, second-order stepper, byte-identical reruns") as note:
        norm_err = 0.0
        for N in range(1, 7):
            for o in (0, 1):
                rec = run_noon_protocol(N, 1.0, MeasurementPolicy.forced(o))
                norm_err = max(norm_err, max(abs(s.norm - 1) for s in rec.steps))
        drive = DriveSpec(g0=1.0, nu=20.0, phases=(math.pi / 3, 0.0), zeta=2.4048)
        layout = three_factor_layout(4)
        src = frequency_modulated_source(drive, layout)
        psi0 = plus_with_modes(fock(HilbertLayout([BosonMode(4)] * 2), (0, 2)))
        T, dt = 2.0, drive.period / 8
        runs = {k: propagate_td(src, 0.0, T, PropagatorConfig(dt=dt / k), psi0) for k in (1, 2, 16)}
        norm_err = max(norm_err, max(abs(r.norm - 1) for r in runs.values()))
        e1 = np.linalg.norm(runs[1].amplitudes - runs[16].amplitudes)
        e2 = np.linalg.norm(runs[2].amplitudes - runs[16].amplitudes)
        order = e1 / e2

        cfg = tmp_path / "sampled.yaml"
        cfg.write_text("kind: noon-protocol\nN: [1, 2, 3, 4]\npolicy:\n  mode: sampled\n  seed: 5\n")
        blobs = []
        for fmt in ("csv", "json"):
            for k in range(2):
                out = tmp_path / f"{fmt}{k}"
                assert main(["run", str(cfg), "--format", fmt, "--out", str(out), "--no-timestamp"]) == 0
                blobs.append(out.read_bytes())
        identical = blobs[0] == blobs[1] and blobs[2] == blobs[3]
        note(f"max norm error {norm_err:.1e}; error ratio per halving {order:.2f}; reruns identical {identical}")
        assert norm_err <= 1e-10
        assert order >= 3.5
        assert identical
