import cmath
import math

import numpy as np
import pytest

from noonsim.errors import ImpossibleBranchError, LayoutError
from noonsim.hilbert import BosonMode, HilbertLayout, StateVector, commutator, mode_operator
from noonsim.metrics import (
    PhaseProbe,
    coherent_overlap,
    concurrence_spin_flip,
    concurrence_superposition,
    fidelity,
    phase_insensitive_noon_fidelity,
    phase_uncertainty,
    qfi,
    rotation_compose,
    rotation_gamma,
    schmidt_concurrence,
    schwinger_generators,
)
from noonsim.protocol import superposition_state
from noonsim.spin import j_gamma, rotation_y, spin_operators
from noonsim.states import (
    SpinParams,
    coherent,
    fock,
    multi_noon,
    noon,
    spin_cat,
    spin_coherent,
    spin_extreme_x,
    vacuum,
)
from noonsim.errors import NonHermitianError


class TestFidelity:
    def test_identical(self):
        assert fidelity(noon(2), noon(2)) == pytest.approx(1)

    def test_layout_mismatch(self):
        with pytest.raises(LayoutError):
            fidelity(noon(2), noon(3))

    def test_phase_insensitive(self):
        psi = noon(3, phase=1.234)
        assert fidelity(psi, noon(3)) < 0.99
        assert phase_insensitive_noon_fidelity(psi, 3) == pytest.approx(1)


class TestOverlaps:
    def test_coherent_overlap(self, frozen):
        assert abs(coherent_overlap(1.0, 0.0)) ** 2 == pytest.approx(frozen["coherent_overlap_1_0_sq"], rel=1e-14)

    def test_coherent_overlap_matches_vectors(self):
        a, b = 0.4 - 0.3j, -0.2 + 0.9j
        numeric = np.vdot(coherent(a, 40).amplitudes, coherent(b, 40).amplitudes)
        assert abs(coherent_overlap(a, b) - numeric) < 1e-12

    def test_spin_overlap_matches_vectors(self):
        from noonsim.metrics import spin_coherent_overlap

        p, q = SpinParams(2.5, 0.4, 1.0), SpinParams(2.5, 2.1, -0.3)
        numeric = np.vdot(spin_coherent(p).amplitudes, spin_coherent(q).amplitudes)
        assert abs(spin_coherent_overlap(p, q) - numeric) < 1e-13


class TestConcurrence:
    def test_oracle_value(self, frozen):
        d = 16
        c = concurrence_superposition(coherent(1.0, d), vacuum(d), 1)
        assert c == pytest.approx(frozen["concurrence_coherent1_vacuum_plus"], abs=1e-12)

    def test_three_routes(self):
        d = 16
        psi1, psi2 = coherent(0.5 + 0.5j, d), coherent(-0.3, d)
        for sign in (1, -1):
            closed = concurrence_superposition(psi1, psi2, sign)
            flip = concurrence_spin_flip(psi1, psi2, sign)
            assert closed == pytest.approx(flip, abs=1e-12)
        # Schmidt route on orthogonal inputs, where the state is a genuine two-qubit Bell state
        L = HilbertLayout([BosonMode(3)])
        a, b = fock(L, (0,)), fock(L, (1,))
        assert schmidt_concurrence(superposition_state(a, b, 1, 3)) == pytest.approx(1)

    def test_antisymmetric_is_maximal(self):
        d = 16
        assert concurrence_superposition(coherent(0.3, d), vacuum(d), -1) == pytest.approx(1)

    def test_identical_antisymmetric_rejected(self):
        with pytest.raises(ImpossibleBranchError):
            concurrence_superposition(vacuum(3), vacuum(3), -1)
        with pytest.raises(ImpossibleBranchError):
            concurrence_spin_flip(vacuum(3), vacuum(3), -1)

    def test_product_state(self):
        assert concurrence_superposition(vacuum(3), vacuum(3), 1) == pytest.approx(0)


class TestQfi:
    @pytest.mark.parametrize("N", [1, 2, 5, 10])
    def test_noon_heisenberg(self, N):
        psi = noon(N)
        assert qfi(psi, mode_operator(psi.layout, 0, "n")) == pytest.approx(N * N, abs=1e-9)

    def test_coherent_shot_noise(self):
        psi = coherent(1.5, 40)
        assert qfi(psi, mode_operator(psi.layout, 0, "n")) == pytest.approx(4 * 1.5 ** 2, abs=1e-8)

    def test_eigenstate_unbounded(self):
        psi = fock(HilbertLayout([BosonMode(3)]), (2,))
        assert phase_uncertainty(psi, mode_operator(psi.layout, 0, "n")) == math.inf

    def test_multi_noon(self):
        psi = multi_noon(2, 2)
        G = mode_operator(psi.layout, 0, "n") + mode_operator(psi.layout, 2, "n")
        assert phase_uncertainty(psi, G) == pytest.approx(0.25, abs=1e-12)

    def test_non_hermitian(self):
        psi = noon(2)
        with pytest.raises(NonHermitianError):
            qfi(psi, mode_operator(psi.layout, 0, "a"))

    def test_probe_phase(self):
        psi = noon(2)
        probe = PhaseProbe(mode_operator(psi.layout, 0, "n"), 0.3)
        out = probe.apply(psi)
        L = psi.layout
        ratio = out.amplitudes[L.flatten((2, 0))] / out.amplitudes[L.flatten((0, 2))]
        assert cmath.phase(ratio) == pytest.approx(-0.6)


class TestSu2:
    def test_schwinger_commutators(self):
        d = 5
        L = HilbertLayout([BosonMode(d), BosonMode(d)])
        Jp, Jm, Jz = schwinger_generators(L)
        keep = np.array([sum(L.unflatten(i)) <= d - 1 for i in range(L.dim)])
        c1 = commutator(Jp, Jm) - Jz * 2
        c2 = commutator(Jz, Jp) - Jp
        assert np.max(np.abs(c1.matrix[np.ix_(keep, keep)])) < 1e-12
        assert np.max(np.abs(c2.matrix[np.ix_(keep, keep)])) < 1e-12

    @pytest.mark.parametrize("j", [0.5, 1, 1.5, 3, 5])
    def test_rotation_compose(self, j):
        Jp, Jm, Jz = spin_operators(j)
        g1, g2 = 0.3 - 0.8j, -1.1 + 0.4j
        g3, Phi = rotation_compose(g1, g2)
        lhs = (rotation_gamma(g1, Jp, Jm) @ rotation_gamma(g2, Jp, Jm)).matrix
        rhs = rotation_gamma(g3, Jp, Jm).matrix @ np.diag(np.exp(1j * Phi * np.diag(Jz.matrix)))
        assert np.max(np.abs(lhs - rhs)) < 1e-10

    def test_compose_pole(self):
        with pytest.raises(ZeroDivisionError):
            rotation_compose(2.0, 0.5)

    @pytest.mark.parametrize("tj", [1, 2, 3, 6])
    def test_x_cat_to_noon(self, tj):
        j = tj / 2
        Jp, Jm, _ = spin_operators(j)
        xcat = StateVector(Jp.layout, spin_extreme_x(j, 1).amplitudes + spin_extreme_x(j, -1).amplitudes)
        out = rotation_y(-math.pi / 2, Jp, Jm) @ xcat
        zcat = spin_cat(SpinParams(j, 0.0))
        assert abs(abs(out.inner(zcat)) - 1) < 1e-12

    @pytest.mark.parametrize("tj", [2, 5, 10])
    def test_cat_qfi(self, tj):
        j = tj / 2
        Jp, Jm, Jz = spin_operators(j)
        th, ph = 1.1, 2.3
        assert qfi(spin_cat(SpinParams(j, th, ph)), j_gamma(th, ph, Jp, Jm, Jz)) == pytest.approx(tj * tj, abs=1e-9)

    def test_schwinger_layout(self):
        with pytest.raises(LayoutError):
            schwinger_generators(HilbertLayout([BosonMode(3), BosonMode(4)]))
