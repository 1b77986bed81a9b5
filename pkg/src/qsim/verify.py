"""Self-check suites behind ``qsim verify``.

Each suite returns a :class:`SuiteResult` carrying the worst deviation it
observed, so a tolerance tighter than floating point shows up as a failure
with a concrete number rather than a bare ``False``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import algorithms, gates, qasm
from .circuit import Circuit, Instruction, execute
from .statevec import dense_unitary_of, evolve, init_basis, apply_gate

ONE_QUBIT_GATES = ("I", "X", "Y", "Z", "H", "S", "SDG", "T", "TDG")


@dataclass
class SuiteResult:
    name: str
    passed: bool
    max_error: float
    cases: int
    seconds: float = 0.0
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status}  {self.name:<20} cases={self.cases:<5d} max_error={self.max_error:.3e}"
            f"  {self.seconds * 1000:8.1f} ms  {self.detail}".rstrip()
        )


def random_circuit(rng: np.random.Generator, n: int, depth: int, measure: bool = False) -> Circuit:
    """Random circuit over the built-in gate set (plus ``P`` with a random angle)."""
    pool = list(ONE_QUBIT_GATES) + ["P"] + (["CNOT"] * 2 if n >= 2 else [])
    ops = []
    for _ in range(depth):
        name = pool[rng.integers(len(pool))]
        if name == "CNOT":
            a, b = rng.choice(n, size=2, replace=False)
            ops.append(Instruction.gate("CNOT", int(a), int(b)))
        elif name == "P":
            ops.append(Instruction.gate("P", int(rng.integers(n)), theta=float(rng.uniform(-math.pi, math.pi))))
        else:
            ops.append(Instruction.gate(name, int(rng.integers(n))))
    if measure:
        ops += [Instruction.measure(q, q) for q in range(n)]
    return Circuit(n, n if measure else 0, ops)


def gate_identities(tol: float, max_qubits: int) -> SuiteResult:
    worst = 0.0
    cases = 0
    for name in sorted(gates.GATE_NAMES):
        m = gates.matrix_of(name, math.pi / 3 if name == "P" else None)
        worst = max(worst, float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))))
        cases += 1
    pairs = [
        (["H", "Z", "H"], ["X"]),
        (["H", "X", "H"], ["Z"]),
        (["S", "S"], ["Z"]),
        (["T", "T"], ["S"]),
        (["T", "T", "T", "T"], ["Z"]),
        ([("P", math.pi)], ["Z"]),
        ([("P", math.pi / 2)], ["S"]),
        ([("P", math.pi / 4)], ["T"]),
    ]
    for lhs, rhs in pairs:
        a = gates.sequence_product(lhs)
        b = gates.sequence_product(rhs)
        k = np.unravel_index(np.argmax(np.abs(b)), b.shape)
        phase = a[k] / b[k]
        worst = max(worst, float(np.max(np.abs(a - phase / abs(phase) * b))))
        cases += 1
    return SuiteResult("gate-identity", worst <= tol, worst, cases)


def oracle_equivalence(tol: float, max_qubits: int, count: int = 200, seed: int = 1234) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(1, max_qubits + 1))
        c = random_circuit(rng, n, int(rng.integers(0, 21)))
        start = int(rng.integers(1 << n))
        fast = evolve(c, init_basis(n, start)).amps
        ref = dense_unitary_of(c)[:, start]
        worst = max(worst, float(np.max(np.abs(fast - ref))))
    return SuiteResult("oracle-equivalence", worst <= tol, worst, count)


def hadamard_transform(tol: float, max_qubits: int) -> SuiteResult:
    worst = 0.0
    cases = 0
    h = gates.GateDef("H")
    for n in range(1, min(max_qubits, 4) + 1):
        for x in range(1 << n):
            state = init_basis(n, x)
            for q in range(n):
                state = apply_gate(state, h, [q])
            ref = algorithms.hadamard_transform_reference(format(x, f"0{n}b"), n)
            worst = max(worst, float(np.max(np.abs(state.amps - ref.amps))))
            cases += 1
    return SuiteResult("hadamard-transform", worst <= tol, worst, cases)


def grover_angle(tol: float, max_qubits: int) -> SuiteResult:
    worst = 0.0
    cases = 0
    for n in range(1, min(max_qubits, 5) + 1):
        key = format((1 << n) - 1, f"0{n}b")
        for k in range(11):
            c = algorithms.build_grover(algorithms.GroverSpec(n, key, k))
            p = algorithms.key_probability(c, key)
            worst = max(worst, abs(p - algorithms.grover_success_probability(n, k)))
            cases += 1
    return SuiteResult("grover-angle", worst <= tol, worst, cases)


def round_trip(tol: float, max_qubits: int, count: int = 100, seed: int = 99) -> SuiteResult:
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(count):
        n = int(rng.integers(1, max_qubits + 1))
        c = random_circuit(rng, n, int(rng.integers(0, 21)), measure=bool(rng.integers(2)))
        if qasm.parse(qasm.dumps(c)) != c:
            failures += 1
    return SuiteResult("qasm-round-trip", failures == 0, float(failures), count, detail=f"mismatches={failures}")


def determinism(tol: float, max_qubits: int) -> SuiteResult:
    n = max(1, min(max_qubits // 2, 3))
    key = format(1, f"0{n}b")
    c = algorithms.build_constant_search(algorithms.SearchSpec(n, key, algorithms.QASM_LITERAL))
    a = execute(c, 2048, 7).to_json()
    b = execute(c, 2048, 7).to_json()
    same = a == b
    return SuiteResult("determinism", same, 0.0 if same else 1.0, 2)


SUITES: dict[str, Callable[[float, int], SuiteResult]] = {
    "gate-identity": gate_identities,
    "oracle-equivalence": oracle_equivalence,
    "hadamard-transform": hadamard_transform,
    "grover-angle": grover_angle,
    "qasm-round-trip": round_trip,
    "determinism": determinism,
}


def run_all(max_qubits: int = 5, tolerance: float = 1e-10) -> list[SuiteResult]:
    results = []
    for fn in SUITES.values():
        t0 = time.perf_counter()
        res = fn(tolerance, max_qubits)
        res.seconds = time.perf_counter() - t0
        results.append(res)
    return results
