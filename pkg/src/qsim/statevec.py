"""Dense state-vector engine and a brute-force dense-unitary reference.

Basis index ``i`` encodes qubit ``j`` as bit ``j`` of ``i`` (little-endian).
The engine updates amplitude groups selected by bit masks; the reference in
:func:`dense_unitary_of` builds full ``2^n x 2^n`` matrices from Kronecker
products and shares no code with the engine kernels.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import CapacityError, DomainError, UnsupportedInstructionError
from .gates import GateDef, matrix_of
from .report import CountsReport

ENGINE_MAX_QUBITS = 24
ORACLE_MAX_QUBITS = 10
NORM_ATOL = 1e-10


@dataclass(frozen=True, eq=False)
class StateVector:
    num_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amps, dtype=complex)
        if a.shape != (1 << self.num_qubits,):
            raise DomainError(
                f"expected {1 << self.num_qubits} amplitudes for {self.num_qubits} qubits, got {a.shape}"
            )
        if a is self.amps and a.flags.writeable:
            a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "amps", a)

    def __len__(self) -> int:
        return self.amps.shape[0]

    def norm(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def allclose(self, other: "StateVector", atol: float = 1e-10) -> bool:
        return self.num_qubits == other.num_qubits and bool(
            np.max(np.abs(self.amps - other.amps)) <= atol
        )


def _check_num_qubits(n: int, cap: int = ENGINE_MAX_QUBITS) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"num_qubits must be a positive integer, got {n!r}")
    if n > cap:
        raise CapacityError(f"{n} qubits exceeds the cap of {cap}")


def init_basis(num_qubits: int, basis_index: int = 0) -> StateVector:
    """Computational basis state ``|basis_index>`` on ``num_qubits`` qubits."""
    _check_num_qubits(num_qubits)
    if not 0 <= basis_index < (1 << num_qubits):
        raise DomainError(f"basis index {basis_index} out of range for {num_qubits} qubits")
    amps = np.zeros(1 << num_qubits, dtype=complex)
    amps[basis_index] = 1.0
    return StateVector(num_qubits, amps)


def check_qubits(qubits: Sequence[int], num_qubits: int) -> tuple[int, ...]:
    qs = tuple(int(q) for q in qubits)
    if len(set(qs)) != len(qs):
        raise DomainError(f"duplicate qubit in {qs}")
    for q in qs:
        if not 0 <= q < num_qubits:
            raise DomainError(f"qubit {q} out of range for {num_qubits} qubits")
    return qs


@lru_cache(maxsize=256)
def _group_indices(num_qubits: int, qubits: tuple[int, ...]) -> np.ndarray:
    """Index table of shape ``(2^k, 2^(n-k))``.

    Row ``r`` lists every basis index whose bits at ``qubits`` spell ``r``
    (``qubits[j]`` is bit ``j`` of ``r``); column order is shared across rows so
    each column is one independent amplitude group.
    """
    k = len(qubits)
    base = np.arange(1 << (num_qubits - k), dtype=np.int64)
    for q in sorted(qubits):
        low = base & ((1 << q) - 1)
        base = ((base >> q) << (q + 1)) | low
    offsets = np.zeros(1 << k, dtype=np.int64)
    for r in range(1 << k):
        for j, q in enumerate(qubits):
            if (r >> j) & 1:
                offsets[r] |= 1 << q
    table = offsets[:, None] | base[None, :]
    table.setflags(write=False)
    return table


def apply_matrix_inplace(amps: np.ndarray, matrix: np.ndarray, qubits: Sequence[int]) -> None:
    """Apply ``matrix`` to ``amps`` in place.

    ``matrix`` is indexed little-endian over ``qubits``: bit ``j`` of the local
    index belongs to ``qubits[j]``.
    """
    n = amps.shape[0].bit_length() - 1
    if len(qubits) == 1:
        q = qubits[0]
        idx = _group_indices(n, (q,))
        i0, i1 = idx[0], idx[1]
        a0 = amps[i0]
        a1 = amps[i1]
        amps[i0] = matrix[0, 0] * a0 + matrix[0, 1] * a1
        amps[i1] = matrix[1, 0] * a0 + matrix[1, 1] * a1
        return
    idx = _group_indices(n, tuple(qubits))
    amps[idx] = matrix @ amps[idx]


def apply_gate_inplace(amps: np.ndarray, gate: GateDef, qubits: Sequence[int]) -> None:
    # Two-qubit gate matrices are control-first; the kernel wants bit 0 first.
    apply_matrix_inplace(amps, gate.matrix, tuple(reversed(tuple(qubits))))


def apply_gate(state: StateVector, gate: GateDef, qubits: Sequence[int]) -> StateVector:
    """Return ``state`` with ``gate`` applied to ``qubits`` (identity elsewhere).

    Raises:
        DomainError: arity mismatch, duplicate or out-of-range qubit.
    """
    qs = check_qubits(qubits, state.num_qubits)
    if len(qs) != gate.arity:
        raise DomainError(f"gate {gate.name} expects {gate.arity} qubit(s), got {len(qs)}")
    amps = state.amps.copy()
    apply_gate_inplace(amps, gate, qs)
    return StateVector(state.num_qubits, amps)


def apply_unitary(state: StateVector, matrix: np.ndarray, qubits: Sequence[int]) -> StateVector:
    """Apply a dense operator indexed little-endian over ``qubits``."""
    qs = check_qubits(qubits, state.num_qubits)
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape != (1 << len(qs), 1 << len(qs)):
        raise DomainError(f"matrix shape {matrix.shape} does not match {len(qs)} qubit(s)")
    amps = state.amps.copy()
    apply_matrix_inplace(amps, matrix, qs)
    return StateVector(state.num_qubits, amps)


def marginal(amps: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Probability vector over ``qubits`` (``qubits[j]`` is bit ``j`` of the index)."""
    n = amps.shape[0].bit_length() - 1
    p = np.abs(amps) ** 2
    tensor = p.reshape((2,) * n)  # axis a <-> qubit n-1-a
    keep = [n - 1 - q for q in qubits]
    drop = tuple(a for a in range(n) if a not in keep)
    reduced = tensor.sum(axis=drop) if drop else tensor
    # Remaining axes are in ascending axis order; reorder so qubits[-1] is the slowest.
    remaining = sorted(keep)
    order = [remaining.index(keep[j]) for j in reversed(range(len(qubits)))]
    out = np.transpose(reduced, order).reshape(-1) if len(qubits) > 1 else reduced.reshape(-1)
    total = out.sum()
    return out / total if total > 0 else out


def probabilities(state: StateVector, qubits: Sequence[int]) -> np.ndarray:
    """Marginal distribution of ``qubits``.

    Entry ``b`` is the probability that ``qubits[j]`` reads bit ``j`` of ``b``.

    Raises:
        DomainError: empty subset or invalid index.
    """
    qs = check_qubits(qubits, state.num_qubits)
    if not qs:
        raise DomainError("qubit subset must be non-empty")
    return marginal(state.amps, qs)


def to_bitstring(value: int, width: int) -> str:
    return format(value, f"0{width}b") if width else ""


def probability_table(state: StateVector, qubits: Sequence[int]) -> dict[str, float]:
    """:func:`probabilities` keyed by MSB-first bitstring."""
    p = probabilities(state, qubits)
    return {to_bitstring(i, len(qubits)): float(v) for i, v in enumerate(p)}


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """PCG64 generator for ``seed`` and an optional sub-stream path."""
    if seed < 0:
        raise DomainError(f"seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=stream)))


def sample_indices(probs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draw of ``shots`` outcome indices; zero-probability entries never occur."""
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    u = rng.random(shots)
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(probs) - 1)


def sample_measurements(
    state: StateVector,
    measured: Sequence[tuple[int, int]],
    shots: int,
    seed: int = 0,
    num_clbits: int | None = None,
) -> CountsReport:
    """Sample ``shots`` joint outcomes of the measured qubits.

    Args:
        measured: ``(qubit, clbit)`` pairs; clbits must be distinct.
        num_clbits: width of the bitstring keys; defaults to ``max(clbit) + 1``.
    """
    if shots < 1:
        raise DomainError(f"shots must be >= 1, got {shots}")
    pairs = [(int(q), int(c)) for q, c in measured]
    qubits = check_qubits([q for q, _ in pairs], state.num_qubits)
    clbits = [c for _, c in pairs]
    if len(set(clbits)) != len(clbits) or any(c < 0 for c in clbits):
        raise DomainError(f"clbits must be distinct and non-negative: {clbits}")
    width = num_clbits if num_clbits is not None else (max(clbits) + 1 if clbits else 0)
    if clbits and max(clbits) >= width:
        raise DomainError(f"clbit {max(clbits)} out of range for {width} clbits")

    dist: dict[int, float] = {}
    if qubits:
        p = marginal(state.amps, qubits)
        for local, prob in enumerate(p):
            key = 0
            for j, c in enumerate(clbits):
                if (local >> j) & 1:
                    key |= 1 << c
            dist[key] = dist.get(key, 0.0) + float(prob)
    else:
        dist[0] = 1.0
    h = hashlib.sha256(state.amps.tobytes())
    h.update(repr(pairs).encode())
    return sample_distribution(dist, width, shots, seed, h.hexdigest())


def clean_distribution(dist: dict[int, float], tol: float = 1e-14) -> dict[int, float]:
    kept = {k: v for k, v in dist.items() if v > tol}
    total = sum(kept.values())
    return {k: v / total for k, v in sorted(kept.items())}


def sample_distribution(
    dist: dict[int, float], width: int, shots: int, seed: int, digest: str
) -> CountsReport:
    """Sample an exact classical distribution (integer-keyed) into a report."""
    dist = clean_distribution(dist)
    keys = list(dist)
    probs = np.array([dist[k] for k in keys])
    draws = sample_indices(probs, shots, make_rng(seed))
    tally = np.bincount(draws, minlength=len(keys))
    counts = {to_bitstring(keys[i], width): int(c) for i, c in enumerate(tally) if c}
    exact = {to_bitstring(k, width): v for k, v in dist.items()}
    return CountsReport(shots, seed, counts, exact, digest, num_clbits=width)


# ---------------------------------------------------------------------------
# Reference oracle: explicit Kronecker products, no bit-mask indexing.

_I2 = np.eye(2, dtype=complex)


def _ket_bra(r: int, c: int) -> np.ndarray:
    m = np.zeros((2, 2), dtype=complex)
    m[r, c] = 1.0
    return m


def _kron_all(factors_by_qubit: dict[int, np.ndarray], n: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for q in reversed(range(n)):  # qubit n-1 is the leftmost factor
        out = np.kron(out, factors_by_qubit.get(q, _I2))
    return out


def embed_operator(matrix: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Full ``2^n`` operator of ``matrix`` acting on ``qubits``.

    ``matrix`` is indexed little-endian over ``qubits`` (bit ``j`` <-> ``qubits[j]``).
    """
    qubits = list(qubits)
    k = len(qubits)
    dim = 1 << k
    lo = min(qubits)
    if qubits == list(range(lo, lo + k)):
        return np.kron(np.kron(np.eye(1 << (n - lo - k)), matrix), np.eye(1 << lo))
    full = np.zeros((1 << n, 1 << n), dtype=complex)
    for r in range(dim):
        for c in range(dim):
            coeff = matrix[r, c]
            if coeff == 0:
                continue
            factors = {q: _ket_bra((r >> j) & 1, (c >> j) & 1) for j, q in enumerate(qubits)}
            full += coeff * _kron_all(factors, n)
    return full


def _instruction_operator(ins, n: int) -> np.ndarray | None:
    kind = ins.kind
    if kind == "barrier":
        return None
    if kind == "measure":
        raise UnsupportedInstructionError("dense unitary undefined for circuits with measurement")
    if kind == "gate":
        m = matrix_of(ins.name, ins.theta)
        if m.shape[0] == 2:
            return _kron_all({ins.qubits[0]: m}, n)
        a, b = ins.qubits  # control-first matrix: local index = 2*bit(a) + bit(b)
        full = np.zeros((1 << n, 1 << n), dtype=complex)
        for r in range(4):
            for c in range(4):
                if m[r, c] != 0:
                    full += m[r, c] * _kron_all(
                        {a: _ket_bra(r >> 1, c >> 1), b: _ket_bra(r & 1, c & 1)}, n
                    )
        return full
    if kind == "unitary":
        return embed_operator(np.asarray(ins.matrix), ins.qubits, n)
    raise UnsupportedInstructionError(f"unknown instruction kind {kind!r}")


def dense_unitary_of(circuit) -> np.ndarray:
    """Whole-circuit unitary, the product of per-instruction full matrices.

    Raises:
        UnsupportedInstructionError: the circuit contains a measurement.
        CapacityError: more than ``ORACLE_MAX_QUBITS`` qubits.
    """
    n = circuit.num_qubits
    if n > ORACLE_MAX_QUBITS:
        raise CapacityError(f"{n} qubits exceeds the dense oracle cap of {ORACLE_MAX_QUBITS}")
    u = np.eye(1 << n, dtype=complex)
    for ins in circuit.instructions:
        op = _instruction_operator(ins, n)
        if op is not None:
            u = op @ u
    return u


def kron_power(matrix: np.ndarray, n: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for _ in range(n):
        out = np.kron(out, matrix)
    return out


def evolve(circuit, state: StateVector | None = None) -> StateVector:
    """Run the gates of a measurement-free circuit through the engine."""
    from .circuit import run_unitary_part

    return run_unitary_part(circuit, state)
