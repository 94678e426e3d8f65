"""Collective-spin (Dicke ladder) operators and SU(2) rotations.

A spin-j ladder is stored as a single ``BosonMode(2j + 1)`` whose level
``n = j + m`` is the Dicke state |j, m>.  The same index is the photon number
of mode ``a`` in the two-mode (Schwinger) picture, ``|j+m>_a |j-m>_b``.
"""

from __future__ import annotations

import numpy as np

from .evolution import expm
from .hilbert import BosonMode, HilbertLayout, Operator

__all__ = ["two_j", "ladder_layout", "spin_operators", "j_gamma", "rotation", "rotation_y"]


def two_j(j: float) -> int:
    """Return 2j as an int, rejecting anything that is not a half-integer >= 0."""
    tj = 2 * float(j)
    if tj < 0 or abs(tj - round(tj)) > 1e-12:
        raise ValueError(f"j must be a non-negative half-integer, got {j!r}")
    return int(round(tj))


def ladder_layout(j: float) -> HilbertLayout:
    return HilbertLayout([BosonMode(two_j(j) + 1)])


def spin_operators(j: float):
    """(J+, J-, Jz) on the 2j+1 dimensional Dicke ladder."""
    tj = two_j(j)
    jj = tj / 2
    m = np.arange(tj + 1) - jj
    jp = np.zeros((tj + 1, tj + 1))
    # J+|j,m> = sqrt((j - m)(j + m + 1)) |j, m+1>
    jp[np.arange(1, tj + 1), np.arange(tj)] = np.sqrt((jj - m[:-1]) * (jj + m[:-1] + 1))
    layout = ladder_layout(j)
    Jp = Operator(layout, jp)
    return Jp, Jp.adjoint(), Operator(layout, np.diag(m))


def j_gamma(theta: float, phi: float, Jp: Operator, Jm: Operator, Jz: Operator) -> Operator:
    """Jz cos(theta) - (J+ e^{-i phi} + J- e^{i phi}) sin(theta) / 2.

    Works for any realization of the generators (Dicke ladder or Schwinger).
    The spin coherent state at (theta, phi) is its eigenvector with eigenvalue -j.
    """
    return Jz * np.cos(theta) - (Jp * np.exp(-1j * phi) + Jm * np.exp(1j * phi)) * (np.sin(theta) / 2)


def rotation(theta: float, phi: float, Jp: Operator, Jm: Operator) -> Operator:
    """R(theta, phi) = exp[(theta/2)(J+ e^{-i phi} - J- e^{i phi})], by matrix exponential."""
    gen = (Jp * np.exp(-1j * phi) - Jm * np.exp(1j * phi)) * (theta / 2)
    return Operator(Jp.layout, expm(gen.matrix))


def rotation_y(angle: float, Jp: Operator, Jm: Operator) -> Operator:
    """R_y(angle) = exp(-i angle J_y), J_y = (J+ - J-)/(2i)."""
    Jy = (Jp - Jm) / 2j
    return Operator(Jp.layout, expm(-1j * angle * Jy.matrix))
