"""Circuit IR, validation and the noiseless executor."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import CapacityError, DomainError, UnsupportedExportError, ValidationError
from .gates import GATE_NAMES, GateDef, arity_of, canonical_name
from .report import CountsReport
from .statevec import (
    ENGINE_MAX_QUBITS,
    StateVector,
    apply_gate_inplace,
    apply_matrix_inplace,
    clean_distribution,
    init_basis,
    marginal,
    sample_distribution,
)

MAX_BRANCHES = 1 << 16

KINDS = ("gate", "measure", "barrier", "unitary")


@dataclass(frozen=True, eq=False)
class Instruction:
    """One circuit step.

    ``gate`` carries a gate name, optional angle and qubits (control first for
    CNOT). ``measure`` carries one qubit and one clbit. ``unitary`` carries a
    dense matrix indexed little-endian over ``qubits`` and a display label; it
    has no OpenQASM spelling.
    """

    kind: str
    name: Optional[str] = None
    qubits: tuple[int, ...] = ()
    clbits: tuple[int, ...] = ()
    theta: Optional[float] = None
    matrix: Optional[np.ndarray] = field(default=None, repr=False)
    label: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "clbits", tuple(int(c) for c in self.clbits))
        if self.matrix is not None:
            m = np.array(self.matrix, dtype=complex)
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)

    @classmethod
    def gate(cls, name: str, *qubits: int, theta: Optional[float] = None) -> "Instruction":
        return cls("gate", canonical_name(name), tuple(qubits), theta=theta)

    @classmethod
    def measure(cls, qubit: int, clbit: int) -> "Instruction":
        return cls("measure", qubits=(qubit,), clbits=(clbit,))

    @classmethod
    def barrier(cls, *qubits: int) -> "Instruction":
        return cls("barrier", qubits=tuple(qubits))

    @classmethod
    def unitary(cls, matrix, qubits: Sequence[int], label: str = "unitary") -> "Instruction":
        return cls("unitary", qubits=tuple(qubits), matrix=matrix, label=label)

    def gatedef(self) -> GateDef:
        return GateDef(self.name, self.theta)

    def _key(self):
        return (self.kind, self.name, self.qubits, self.clbits, self.theta, self.label)

    def __eq__(self, other):
        if not isinstance(other, Instruction):
            return NotImplemented
        if self._key() != other._key():
            return False
        if self.matrix is None or other.matrix is None:
            return self.matrix is None and other.matrix is None
        return bool(np.array_equal(self.matrix, other.matrix))

    def __hash__(self):
        return hash(self._key())


@dataclass(frozen=True)
class Circuit:
    """Ordered instructions over a flat qubit and clbit index space.

    ``qregs``/``cregs`` record the declared registers, in order, as
    ``(name, size)`` pairs; their sizes sum to ``num_qubits``/``num_clbits``.
    """

    num_qubits: int
    num_clbits: int = 0
    instructions: tuple[Instruction, ...] = ()
    name: Optional[str] = field(default=None, compare=False)
    qregs: tuple[tuple[str, int], ...] = ()
    cregs: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        # A bare barrier spans every qubit; store that explicitly so printing round-trips.
        everything = tuple(range(self.num_qubits))
        instrs = tuple(
            Instruction.barrier(*everything) if i.kind == "barrier" and not i.qubits else i
            for i in self.instructions
        )
        object.__setattr__(self, "instructions", instrs)
        if not self.qregs:
            object.__setattr__(self, "qregs", (("q", self.num_qubits),))
        if not self.cregs and self.num_clbits:
            object.__setattr__(self, "cregs", (("c", self.num_clbits),))
        object.__setattr__(self, "qregs", tuple((str(a), int(b)) for a, b in self.qregs))
        object.__setattr__(self, "cregs", tuple((str(a), int(b)) for a, b in self.cregs))

    def __len__(self) -> int:
        return len(self.instructions)

    def __iter__(self):
        return iter(self.instructions)

    def append(self, *instructions: Instruction) -> "Circuit":
        """New circuit with ``instructions`` added at the end."""
        return Circuit(
            self.num_qubits,
            self.num_clbits,
            self.instructions + tuple(instructions),
            self.name,
            self.qregs,
            self.cregs,
        )

    def without_measurements(self) -> "Circuit":
        kept = tuple(i for i in self.instructions if i.kind != "measure")
        return Circuit(self.num_qubits, self.num_clbits, kept, self.name, self.qregs, self.cregs)

    def count(self, kind: str = "gate", name: Optional[str] = None) -> int:
        return sum(
            1
            for i in self.instructions
            if i.kind == kind and (name is None or i.name == canonical_name(name))
        )

    def measured_pairs(self) -> list[tuple[int, int]]:
        return [(i.qubits[0], i.clbits[0]) for i in self.instructions if i.kind == "measure"]

    def layers(self, align: str = "asap") -> list[list[Instruction]]:
        """Group gate/measure/unitary instructions into layers of disjoint qubits.

        ``asap`` places each instruction as early as its qubits allow;
        ``alap`` as late as possible. Barriers synchronise their qubits.
        """
        if align not in ("asap", "alap"):
            raise DomainError(f"align must be 'asap' or 'alap', got {align!r}")
        seq = self.instructions if align == "asap" else tuple(reversed(self.instructions))
        depth_of = [0] * self.num_qubits
        out: list[list[Instruction]] = []
        for ins in seq:
            if ins.kind == "barrier":
                level = max((depth_of[q] for q in ins.qubits), default=0)
                for q in ins.qubits:
                    depth_of[q] = level
                continue
            level = max(depth_of[q] for q in ins.qubits)
            if level == len(out):
                out.append([])
            out[level].append(ins)
            for q in ins.qubits:
                depth_of[q] = level + 1
        if align == "alap":
            out = [list(reversed(layer)) for layer in reversed(out)]
        return out


@dataclass(frozen=True)
class Violation:
    position: int
    message: str

    def __str__(self) -> str:
        return f"instruction {self.position}: {self.message}"


def validate(circuit: Circuit) -> list[Violation]:
    """All bound and duplication violations; an empty list means valid."""
    out: list[Violation] = []
    if circuit.num_qubits < 1:
        out.append(Violation(-1, f"circuit needs at least one qubit, has {circuit.num_qubits}"))
    if circuit.num_qubits > ENGINE_MAX_QUBITS:
        out.append(Violation(-1, f"{circuit.num_qubits} qubits exceeds engine cap {ENGINE_MAX_QUBITS}"))
    if sum(s for _, s in circuit.qregs) != circuit.num_qubits:
        out.append(Violation(-1, "qreg sizes do not sum to num_qubits"))
    if sum(s for _, s in circuit.cregs) != circuit.num_clbits:
        out.append(Violation(-1, "creg sizes do not sum to num_clbits"))
    written: dict[int, int] = {}
    for pos, ins in enumerate(circuit.instructions):
        if ins.kind not in KINDS:
            out.append(Violation(pos, f"unknown instruction kind {ins.kind!r}"))
            continue
        for q in ins.qubits:
            if not 0 <= q < circuit.num_qubits:
                out.append(Violation(pos, f"index out of bounds: qubit {q}"))
        if len(set(ins.qubits)) != len(ins.qubits):
            out.append(Violation(pos, "duplicate qubit"))
        if ins.kind == "gate":
            if ins.name not in GATE_NAMES:
                out.append(Violation(pos, f"unknown gate {ins.name!r}"))
                continue
            if len(ins.qubits) != arity_of(ins.name):
                out.append(Violation(pos, f"gate {ins.name} expects {arity_of(ins.name)} qubit(s)"))
            if (ins.name == "P") != (ins.theta is not None):
                out.append(Violation(pos, f"gate {ins.name} angle mismatch"))
        elif ins.kind == "measure":
            if len(ins.qubits) != 1 or len(ins.clbits) != 1:
                out.append(Violation(pos, "measure needs exactly one qubit and one clbit"))
                continue
            c = ins.clbits[0]
            if not 0 <= c < circuit.num_clbits:
                out.append(Violation(pos, f"index out of bounds: clbit {c}"))
            elif c in written:
                out.append(Violation(pos, f"clbit {c} already written at instruction {written[c]}"))
            else:
                written[c] = pos
        elif ins.kind == "unitary":
            k = len(ins.qubits)
            if ins.matrix is None or ins.matrix.shape != (1 << k, 1 << k):
                out.append(Violation(pos, "unitary matrix does not match its qubits"))
    return out


def check(circuit: Circuit) -> None:
    """Raise :class:`ValidationError` when :func:`validate` reports anything."""
    violations = validate(circuit)
    if violations:
        raise ValidationError(violations)


def _apply(amps: np.ndarray, ins: Instruction) -> None:
    if ins.kind == "gate":
        apply_gate_inplace(amps, ins.gatedef(), ins.qubits)
    elif ins.kind == "unitary":
        apply_matrix_inplace(amps, ins.matrix, ins.qubits)


def run_unitary_part(circuit: Circuit, state: Optional[StateVector] = None) -> StateVector:
    """Evolve ``state`` (default ``|0...0>``) through every non-measure instruction."""
    check(circuit)
    if state is None:
        state = init_basis(circuit.num_qubits, 0)
    amps = np.array(state.amps, dtype=complex)
    for ins in circuit.instructions:
        _apply(amps, ins)
    return StateVector(circuit.num_qubits, amps)


def has_gate_after_measure(circuit: Circuit) -> bool:
    seen = False
    for ins in circuit.instructions:
        if ins.kind == "measure":
            seen = True
        elif seen and ins.kind in ("gate", "unitary"):
            return True
    return False


def _clbit_key(local: int, clbits: Sequence[int]) -> int:
    key = 0
    for j, c in enumerate(clbits):
        if (local >> j) & 1:
            key |= 1 << c
    return key


def exact_distribution(circuit: Circuit) -> dict[int, float]:
    """Exact distribution of the classical register, keyed by integer (clbit k = bit k).

    Circuits whose measurements all come last are evolved once and
    marginalised. Otherwise every measurement splits the state into its two
    collapsed branches, so later gates see the post-measurement state exactly
    as a per-shot collapse would.
    """
    check(circuit)
    n = circuit.num_qubits
    if not has_gate_after_measure(circuit):
        state = run_unitary_part(circuit)
        pairs = circuit.measured_pairs()
        if not pairs:
            return {0: 1.0}
        p = marginal(state.amps, [q for q, _ in pairs])
        clbits = [c for _, c in pairs]
        dist: dict[int, float] = {}
        for local, prob in enumerate(p):
            key = _clbit_key(local, clbits)
            dist[key] = dist.get(key, 0.0) + float(prob)
        return clean_distribution(dist)

    amps0 = np.zeros(1 << n, dtype=complex)
    amps0[0] = 1.0
    branches: list[tuple[float, np.ndarray, int]] = [(1.0, amps0, 0)]
    idx = np.arange(1 << n)
    for ins in circuit.instructions:
        if ins.kind == "measure":
            q, c = ins.qubits[0], ins.clbits[0]
            mask = ((idx >> q) & 1).astype(bool)
            nxt = []
            for w, amps, bits in branches:
                p1 = float(np.sum(np.abs(amps[mask]) ** 2))
                for outcome, p in ((0, 1.0 - p1), (1, p1)):
                    if p <= 1e-14:
                        continue
                    child = np.where(mask == bool(outcome), amps, 0) / np.sqrt(p)
                    nxt.append((w * p, child, bits | (outcome << c)))
            if len(nxt) > MAX_BRANCHES:
                raise CapacityError(f"more than {MAX_BRANCHES} measurement branches")
            branches = nxt
        else:
            for _, amps, _ in branches:
                _apply(amps, ins)
    dist = {}
    for w, _, bits in branches:
        dist[bits] = dist.get(bits, 0.0) + w
    return clean_distribution(dist)


def circuit_digest(circuit: Circuit) -> str:
    """SHA-256 of the canonical QASM text.

    Dense ``unitary`` instructions have no QASM spelling; they are rendered as
    comment lines carrying a hash of their matrix bytes instead.
    """
    from . import qasm

    try:
        text = qasm.dumps(circuit)
    except UnsupportedExportError:
        text = qasm.dumps(circuit, dense_placeholders=True)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def execute(
    circuit: Circuit,
    shots: int = 1024,
    seed: int = 0,
    noise=None,
) -> CountsReport:
    """Run ``circuit`` for ``shots`` shots.

    The noiseless path samples the exact classical distribution once and
    fills ``exact_probabilities``. A non-trivial ``noise`` model switches to
    the stochastic path in :mod:`qsim.noise`.

    Raises:
        ValidationError: ``circuit`` is invalid.
        DomainError: ``shots < 1`` or negative seed.
    """
    if shots < 1:
        raise DomainError(f"shots must be >= 1, got {shots}")
    if noise is not None and not noise.is_zero():
        from .noise import apply_noisy_execution

        return apply_noisy_execution(circuit, noise, shots, seed)
    dist = exact_distribution(circuit)
    return sample_distribution(dist, circuit.num_clbits, shots, seed, circuit_digest(circuit))
