import math

import numpy as np
import pytest

from noonsim.errors import LayoutError
from noonsim.hilbert import (
    BosonMode,
    HilbertLayout,
    Operator,
    Qubit,
    StateVector,
    adjoint,
    annihilation,
    commutator,
    creation,
    embed,
    identity,
    mode_operator,
    number,
    pauli,
    tensor,
)


class TestLadderOperators:
    def test_annihilation_entries(self):
        a = annihilation(3).matrix
        expected = np.zeros((3, 3))
        expected[0, 1], expected[1, 2] = 1, math.sqrt(2)
        np.testing.assert_array_equal(a, expected)

    def test_single_level_space_is_zero(self):
        np.testing.assert_array_equal(annihilation(1).matrix, np.zeros((1, 1)))

    def test_empty_space_rejected(self):
        with pytest.raises(LayoutError):
            annihilation(0)

    def test_creation_is_adjoint(self):
        np.testing.assert_array_equal(creation(5).matrix, annihilation(5).matrix.conj().T)

    def test_truncated_commutator(self):
        c = commutator(annihilation(10), creation(10)).matrix
        expected = np.eye(10)
        expected[9, 9] = -9
        np.testing.assert_allclose(c, expected, atol=1e-13)

    def test_number_spectrum(self):
        np.testing.assert_array_equal(np.linalg.eigvalsh(number(7).matrix), np.arange(7))


class TestPauli:
    def test_sigma_z(self):
        np.testing.assert_array_equal(pauli("z").matrix, np.diag([-1, 1]))

    def test_plus_minus_projector(self):
        np.testing.assert_array_equal((pauli("plus") @ pauli("minus")).matrix, np.diag([0, 1]))

    def test_plus_minus_commutator(self):
        assert commutator(pauli("plus"), pauli("minus")).allclose(pauli("z"))

    def test_su2_cyclic(self):
        x, y, z = pauli("x"), pauli("y"), pauli("z")
        assert commutator(x, y).allclose(z * 2j)

    def test_unknown(self):
        with pytest.raises(ValueError):
            pauli("w")


class TestEmbed:
    def test_sigma_z_on_qubit_first(self):
        L = HilbertLayout([Qubit(), BosonMode(2)])
        np.testing.assert_array_equal(embed(pauli("z"), L, 0).matrix, np.diag([-1, -1, 1, 1]))

    def test_mode_lowering(self):
        L = HilbertLayout([Qubit(), BosonMode(2)])
        v = np.zeros(4)
        v[L.flatten((0, 1))] = 1
        out = embed(annihilation(2), L, 1).matrix @ v
        expected = np.zeros(4)
        expected[L.flatten((0, 0))] = 1
        np.testing.assert_array_equal(out, expected)

    def test_three_factor_dimension(self):
        L = HilbertLayout([Qubit(), BosonMode(3), BosonMode(3)])
        assert embed(pauli("x"), L, 0).matrix.shape == (18, 18)

    def test_slot_out_of_range(self):
        L = HilbertLayout([Qubit(), BosonMode(3)])
        with pytest.raises(LayoutError):
            embed(pauli("x"), L, 2)

    def test_dimension_mismatch(self):
        L = HilbertLayout([Qubit(), BosonMode(3)])
        with pytest.raises(LayoutError):
            embed(annihilation(4), L, 1)


class TestCommutator:
    def test_self_commutator_zero(self):
        A = Operator(HilbertLayout([BosonMode(3)]), np.arange(9).reshape(3, 3))
        assert np.all(commutator(A, A).matrix == 0)

    def test_two_mode_hopping(self):
        L = HilbertLayout([BosonMode(4), BosonMode(4)])
        a1, a2 = mode_operator(L, 0), mode_operator(L, 1)
        c = commutator(a1 @ a2.adjoint(), a2 @ a1.adjoint()).matrix
        # oracle: [a1 a2^dag, a2 a1^dag] = n2 (a1 a1^dag) - n1 (a2 a2^dag) built by hand, entry by entry
        expected = np.zeros((16, 16))
        for n1 in range(4):
            for n2 in range(4):
                i = L.flatten((n1, n2))
                up1 = n1 + 1 if n1 < 3 else 0  # truncated a1 a1^dag on |n1>
                up2 = n2 + 1 if n2 < 3 else 0
                expected[i, i] = n2 * up1 - n1 * up2
        np.testing.assert_allclose(c, expected, atol=1e-12)

    def test_layout_mismatch(self):
        with pytest.raises(LayoutError):
            commutator(annihilation(2), annihilation(3))


class TestLayoutAndStates:
    def test_row_major(self):
        L = HilbertLayout([Qubit(), BosonMode(3)])
        assert L.flatten((0, 2)) == 2
        assert L.flatten((1, 0)) == 3
        assert L.unflatten(5) == (1, 2)

    def test_flatten_bounds(self):
        with pytest.raises(LayoutError):
            HilbertLayout([BosonMode(2)]).flatten((2,))

    def test_state_normalized(self):
        s = StateVector(HilbertLayout([BosonMode(3)]), [1, 1j, 0])
        assert abs(s.norm - 1) < 1e-12

    def test_zero_state_rejected(self):
        with pytest.raises(ValueError):
            StateVector(HilbertLayout([BosonMode(3)]), [0, 0, 0])

    def test_double_adjoint_exact(self):
        rng = np.random.default_rng(0)
        A = Operator(HilbertLayout([BosonMode(4)]), rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        assert np.array_equal(adjoint(adjoint(A)).matrix, A.matrix)

    def test_tensor_matches_embed(self):
        L = HilbertLayout([Qubit(), BosonMode(3)])
        assert tensor(pauli("x"), annihilation(3)).allclose(embed(pauli("x"), L, 0) @ embed(annihilation(3), L, 1))

    def test_identity(self):
        L = HilbertLayout([Qubit(), BosonMode(3)])
        np.testing.assert_array_equal(identity(L).matrix, np.eye(6))
