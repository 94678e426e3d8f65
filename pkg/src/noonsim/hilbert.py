"""Truncated Fock-space and qubit linear algebra.

A :class:`HilbertLayout` is an ordered tuple of tensor factors.  The flattened
index is row-major over the factors as written, so the leftmost factor varies
slowest.  By convention the qubit (if any) is listed first and bosonic modes
follow in ascending label order.

Operators are defined directly on the truncated space.  In particular
``[a, a†]`` equals the identity except on the top Fock level, where it is
``-(d-1)``; protocols keep that level out of play.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import LayoutError, NonHermitianError

__all__ = [
    "Qubit",
    "BosonMode",
    "Factor",
    "HilbertLayout",
    "Operator",
    "StateVector",
    "annihilation",
    "creation",
    "number",
    "pauli",
    "identity",
    "embed",
    "embed_product",
    "commutator",
    "adjoint",
    "mode_operator",
    "tensor",
]


@dataclass(frozen=True)
class Qubit:
    """Two-level factor with ordered basis (|0>, |1>) and sigma_z|1> = +|1>."""

    @property
    def dim(self) -> int:
        return 2

    def __repr__(self) -> str:
        return "Qubit"


@dataclass(frozen=True)
class BosonMode:
    """Bosonic mode truncated to Fock levels ``0 .. d-1``."""

    d: int

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise LayoutError(f"BosonMode truncation must be an integer >= 1, got {self.d!r}")

    @property
    def dim(self) -> int:
        return self.d

    def __repr__(self) -> str:
        return f"Mode({self.d})"


Factor = Union[Qubit, BosonMode]


@dataclass(frozen=True)
class HilbertLayout:
    factors: tuple

    def __init__(self, factors: Iterable[Factor]):
        factors = tuple(factors)
        for f in factors:
            if not isinstance(f, (Qubit, BosonMode)):
                raise LayoutError(f"unknown factor {f!r}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def of(cls, *factors: Factor) -> "HilbertLayout":
        return cls(factors)

    @property
    def dims(self) -> tuple:
        return tuple(f.dim for f in self.factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.factors else 1

    def __len__(self) -> int:
        return len(self.factors)

    def __repr__(self) -> str:
        return "[" + ", ".join(map(repr, self.factors)) + "]"

    def flatten(self, multi_index: Sequence[int]) -> int:
        """Row-major flat index of a per-factor multi-index."""
        if len(multi_index) != len(self.factors):
            raise LayoutError(
                f"multi-index has {len(multi_index)} entries, layout has {len(self.factors)} factors"
            )
        idx = 0
        for i, d in zip(multi_index, self.dims):
            if not 0 <= i < d:
                raise LayoutError(f"index {i} out of range for factor of dimension {d}")
            idx = idx * d + int(i)
        return idx

    def unflatten(self, index: int) -> tuple:
        if not 0 <= index < self.dim:
            raise LayoutError(f"flat index {index} out of range for dimension {self.dim}")
        out = []
        for d in reversed(self.dims):
            index, r = divmod(index, d)
            out.append(r)
        return tuple(reversed(out))

    def qubit_slots(self) -> tuple:
        return tuple(i for i, f in enumerate(self.factors) if isinstance(f, Qubit))

    def mode_slots(self) -> tuple:
        return tuple(i for i, f in enumerate(self.factors) if isinstance(f, BosonMode))

    def check_slot(self, slot: int) -> Factor:
        if not 0 <= slot < len(self.factors):
            raise LayoutError(f"slot {slot} out of range for layout {self!r}")
        return self.factors[slot]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Operator:
    layout: HilbertLayout
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        n = self.layout.dim
        if m.shape != (n, n):
            raise LayoutError(f"matrix shape {m.shape} does not match layout dimension {n}")
        object.__setattr__(self, "matrix", m)

    def _check(self, other: "Operator"):
        if not isinstance(other, Operator):
            return NotImplemented
        if other.layout != self.layout:
            raise LayoutError(f"layout mismatch: {self.layout!r} vs {other.layout!r}")

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Operator(self.layout, self.matrix + other.matrix)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Operator(self.layout, self.matrix - other.matrix)

    def __neg__(self):
        return Operator(self.layout, -self.matrix)

    def __mul__(self, scalar):
        if isinstance(scalar, (Operator, StateVector)):
            return NotImplemented
        return Operator(self.layout, self.matrix * complex(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Operator(self.layout, self.matrix / complex(scalar))

    def __matmul__(self, other):
        if isinstance(other, StateVector):
            if other.layout != self.layout:
                raise LayoutError(f"layout mismatch: {self.layout!r} vs {other.layout!r}")
            return StateVector(self.layout, self.matrix @ other.amplitudes, normalize=False)
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Operator(self.layout, self.matrix @ other.matrix)

    def adjoint(self) -> "Operator":
        return Operator(self.layout, self.matrix.conj().T)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return self.hermiticity_defect() <= tol

    def require_hermitian(self, tol: float = 1e-10, what: str = "operator") -> "Operator":
        defect = self.hermiticity_defect()
        if defect > tol:
            raise NonHermitianError(f"{what} is not Hermitian: max|H - H^dag| = {defect:.3e} > {tol:g}")
        return self

    def norm(self) -> float:
        """Spectral (operator 2-) norm."""
        return float(np.linalg.norm(self.matrix, 2))

    def allclose(self, other: "Operator", atol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.max(np.abs(self.matrix - other.matrix), initial=0.0) <= atol)

    def max_abs_diff(self, other: "Operator") -> float:
        self._check(other)
        return float(np.max(np.abs(self.matrix - other.matrix), initial=0.0))


@dataclass(frozen=True, eq=False)
class StateVector:
    """Unit-norm amplitude vector on a layout.

    Public construction normalizes to unit norm; ``normalize=False`` keeps the
    raw vector and is meant for intermediate arithmetic only.
    """

    layout: HilbertLayout
    amplitudes: np.ndarray

    def __init__(self, layout: HilbertLayout, amplitudes, normalize: bool = True):
        v = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        if v.shape != (layout.dim,):
            raise LayoutError(f"amplitude length {v.size} does not match layout dimension {layout.dim}")
        if normalize:
            nrm = np.linalg.norm(v)
            if nrm == 0.0:
                raise ValueError("cannot normalize the zero vector")
            v = v / nrm
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "amplitudes", _frozen(v))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        return StateVector(self.layout, self.amplitudes)

    def inner(self, other: "StateVector") -> complex:
        """<self|other>."""
        if other.layout != self.layout:
            raise LayoutError(f"layout mismatch: {self.layout!r} vs {other.layout!r}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def expectation(self, op: Operator) -> complex:
        if op.layout != self.layout:
            raise LayoutError(f"layout mismatch: {self.layout!r} vs {op.layout!r}")
        v = self.amplitudes
        return complex(np.vdot(v, op.matrix @ v))

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per factor."""
        return self.amplitudes.reshape(self.layout.dims)

    def __add__(self, other: "StateVector") -> "StateVector":
        if other.layout != self.layout:
            raise LayoutError(f"layout mismatch: {self.layout!r} vs {other.layout!r}")
        return StateVector(self.layout, self.amplitudes + other.amplitudes, normalize=False)

    def __sub__(self, other: "StateVector") -> "StateVector":
        if other.layout != self.layout:
            raise LayoutError(f"layout mismatch: {self.layout!r} vs {other.layout!r}")
        return StateVector(self.layout, self.amplitudes - other.amplitudes, normalize=False)

    def __mul__(self, scalar) -> "StateVector":
        return StateVector(self.layout, self.amplitudes * complex(scalar), normalize=False)

    __rmul__ = __mul__

    def kron(self, other: "StateVector") -> "StateVector":
        return StateVector(
            HilbertLayout(self.layout.factors + other.layout.factors),
            np.kron(self.amplitudes, other.amplitudes),
            normalize=False,
        )


def annihilation(d: int) -> Operator:
    """Truncated annihilation operator, <n-1|a|n> = sqrt(n)."""
    if d < 1:
        raise LayoutError("truncation dimension must be >= 1 (d = 0 is an empty space)")
    m = np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1)
    return Operator(HilbertLayout([BosonMode(d)]), m)


def creation(d: int) -> Operator:
    return annihilation(d).adjoint()


def number(d: int) -> Operator:
    if d < 1:
        raise LayoutError("truncation dimension must be >= 1 (d = 0 is an empty space)")
    return Operator(HilbertLayout([BosonMode(d)]), np.diag(np.arange(d, dtype=float)))


_QUBIT = HilbertLayout([Qubit()])

# basis order (|0>, |1>); sigma_+ = |1><0| raises, sigma_z = diag(-1, +1).
# sigma_y is fixed by sigma_+ = (sigma_x + i sigma_y)/2 so [sx, sy] = 2i sz holds.
_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, 1j], [-1j, 0]], dtype=complex),
    "z": np.array([[-1, 0], [0, 1]], dtype=complex),
    "plus": np.array([[0, 0], [1, 0]], dtype=complex),
    "minus": np.array([[0, 1], [0, 0]], dtype=complex),
    "i": np.eye(2, dtype=complex),
}


def pauli(which: str) -> Operator:
    try:
        return Operator(_QUBIT, _PAULI[which])
    except KeyError:
        raise ValueError(f"unknown Pauli label {which!r}; expected one of x, y, z, plus, minus, i") from None


def identity(layout: HilbertLayout) -> Operator:
    return Operator(layout, np.eye(layout.dim))


def embed(op: Operator, layout: HilbertLayout, slot: int) -> Operator:
    """Lift a single-factor operator into ``layout`` at position ``slot``."""
    factor = layout.check_slot(slot)
    if op.layout.dim != factor.dim or len(op.layout) != 1:
        raise LayoutError(
            f"operator of dimension {op.layout.dim} cannot act on slot {slot} ({factor!r})"
        )
    left = int(np.prod(layout.dims[:slot], dtype=np.int64))
    right = int(np.prod(layout.dims[slot + 1:], dtype=np.int64))
    m = np.kron(np.kron(np.eye(left), op.matrix), np.eye(right))
    return Operator(layout, m)


def embed_product(layout: HilbertLayout, ops: Mapping[int, Operator]) -> Operator:
    """Product of single-factor operators on distinct slots, identity elsewhere.

    Equal to the product of the individual :func:`embed` lifts, built by
    Kronecker products so no full-space matrix multiplication is needed.
    """
    for slot in ops:
        layout.check_slot(slot)
    mats = []
    for slot, factor in enumerate(layout.factors):
        op = ops.get(slot)
        if op is None:
            mats.append(np.eye(factor.dim))
        elif op.layout.dim != factor.dim or len(op.layout) != 1:
            raise LayoutError(f"operator of dimension {op.layout.dim} cannot act on slot {slot} ({factor!r})")
        else:
            mats.append(op.matrix)
    return Operator(layout, reduce(np.kron, mats))


def mode_operator(layout: HilbertLayout, slot: int, kind: str = "a") -> Operator:
    """Annihilation ("a"), creation ("adag") or number ("n") operator on a mode slot."""
    factor = layout.check_slot(slot)
    if not isinstance(factor, BosonMode):
        raise LayoutError(f"slot {slot} is {factor!r}, not a bosonic mode")
    single = {"a": annihilation, "adag": creation, "n": number}[kind](factor.d)
    return embed(single, layout, slot)


def commutator(A: Operator, B: Operator) -> Operator:
    if A.layout != B.layout:
        raise LayoutError(f"layout mismatch: {A.layout!r} vs {B.layout!r}")
    return Operator(A.layout, A.matrix @ B.matrix - B.matrix @ A.matrix)


def adjoint(A: Operator) -> Operator:
    return A.adjoint()


def tensor(*ops: Operator) -> Operator:
    """Kronecker product of operators; the layout is the concatenation."""
    layout = HilbertLayout(sum((o.layout.factors for o in ops), ()))
    return Operator(layout, reduce(np.kron, [o.matrix for o in ops]))
