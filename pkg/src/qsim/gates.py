"""Gate library: names, arities and exact unitary matrices.

Two-qubit matrices are written in control-first order, i.e. the local basis
index is ``2 * bit(qubits[0]) + bit(qubits[1])``. For CNOT that is the familiar
permutation ``|00>->|00>, |01>->|01>, |10>->|11>, |11>->|10>`` with the first
listed qubit as control.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import DomainError

UNITARY_ATOL = 1e-12

_SQRT1_2 = 1.0 / math.sqrt(2.0)

_FIXED: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_SQRT1_2, _SQRT1_2], [_SQRT1_2, -_SQRT1_2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "SDG": np.array([[1, 0], [0, -1j]], dtype=complex),
    "T": np.array([[1, 0], [0, cmath.exp(1j * math.pi / 4)]], dtype=complex),
    "TDG": np.array([[1, 0], [0, cmath.exp(-1j * math.pi / 4)]], dtype=complex),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
}
for _m in _FIXED.values():
    _m.setflags(write=False)

PARAMETRIC = frozenset({"P"})
GATE_NAMES = frozenset(_FIXED) | PARAMETRIC
SINGLE_QUBIT = frozenset(n for n in GATE_NAMES if n != "CNOT")

_ALIASES = {"CX": "CNOT", "U1": "P", "PHASE": "P"}


def canonical_name(name: str) -> str:
    """Normalise a gate name (case-insensitive, ``cx``/``u1`` aliases)."""
    key = name.upper()
    key = _ALIASES.get(key, key)
    if key not in GATE_NAMES:
        raise DomainError(f"unknown gate '{name}'")
    return key


def arity_of(name: str) -> int:
    return 2 if canonical_name(name) == "CNOT" else 1


def phase_matrix(theta: float) -> np.ndarray:
    """diag(1, e^{i theta}).

    ``theta`` of pi, pi/2 and pi/4 produce Z, S and T. The off-diagonal form
    ``[[0, 1], [1, e^{i theta}]]`` is not unitary and is not used.
    """
    m = np.array([[1, 0], [0, cmath.exp(1j * theta)]], dtype=complex)
    # cmath.exp(i*pi) leaves a 1.2e-16 imaginary residue; snap exact multiples.
    m[1, 1] = complex(_snap(m[1, 1].real), _snap(m[1, 1].imag))
    return m


def _snap(x: float) -> float:
    for v in (-1.0, 0.0, 1.0):
        if abs(x - v) < 1e-15:
            return v
    return x


def matrix_of(name: str, theta: Optional[float] = None) -> np.ndarray:
    """Return the matrix of gate ``name``.

    Args:
        name: gate mnemonic, e.g. ``"H"``, ``"cx"`` or ``"P"``.
        theta: phase angle in radians; required for ``P`` and forbidden otherwise.

    Raises:
        DomainError: unknown name, or theta given/missing inappropriately.
    """
    key = canonical_name(name)
    if key in PARAMETRIC:
        if theta is None:
            raise DomainError(f"gate '{name}' requires an angle")
        if not math.isfinite(theta):
            raise DomainError(f"gate '{name}' angle must be finite, got {theta}")
        return phase_matrix(float(theta))
    if theta is not None:
        raise DomainError(f"gate '{name}' takes no angle")
    return _FIXED[key].copy()


@dataclass(frozen=True)
class GateDef:
    """A named gate with its unitary."""

    name: str
    theta: Optional[float] = None
    matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        key = canonical_name(self.name)
        m = matrix_of(key, self.theta)
        m.setflags(write=False)
        object.__setattr__(self, "name", key)
        object.__setattr__(self, "matrix", m)

    @property
    def arity(self) -> int:
        return 2 if self.name == "CNOT" else 1


def gate(name: str, theta: Optional[float] = None) -> GateDef:
    return GateDef(name, theta)


def is_unitary(m: np.ndarray, atol: float = UNITARY_ATOL) -> bool:
    m = np.asarray(m)
    return bool(np.allclose(m.conj().T @ m, np.eye(m.shape[0]), rtol=0.0, atol=atol))


def equal_up_to_global_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-10) -> bool:
    """True when ``a == e^{i phi} b`` element-wise within ``atol`` for some phi."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        return False
    # Align on the largest entry of b so the phase estimate is well conditioned.
    k = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(b[k]) < atol:
        return bool(np.allclose(a, b, rtol=0.0, atol=atol))
    phase = a[k] / b[k]
    if abs(abs(phase) - 1.0) > atol:
        return False
    phase /= abs(phase)
    return bool(np.max(np.abs(a - phase * b)) <= atol)


GateLike = Union[GateDef, str, tuple]


def _as_gate(g: GateLike) -> GateDef:
    if isinstance(g, GateDef):
        return g
    if isinstance(g, tuple):
        return GateDef(*g)
    return GateDef(g)


def sequence_product(seq: Sequence[GateLike]) -> np.ndarray:
    """Operator of a gate sequence applied left to right (first gate acts first)."""
    gates = [_as_gate(g) for g in seq]
    if not gates:
        raise DomainError("empty gate sequence")
    dims = {g.matrix.shape[0] for g in gates}
    if len(dims) != 1:
        raise DomainError("gate sequence mixes arities")
    out = np.eye(dims.pop(), dtype=complex)
    for g in gates:
        out = g.matrix @ out
    return out


def decompose_identity_check(
    lhs: Iterable[GateLike], rhs: Iterable[GateLike], atol: float = 1e-10
) -> bool:
    """Whether two gate sequences implement the same operator up to global phase.

    >>> decompose_identity_check(["H", "Z", "H"], ["X"])
    True
    """
    a = sequence_product(list(lhs))
    b = sequence_product(list(rhs))
    if a.shape != b.shape:
        raise DomainError(f"arity mismatch: {a.shape[0]}x{a.shape[0]} vs {b.shape[0]}x{b.shape[0]}")
    return equal_up_to_global_phase(a, b, atol=atol)
