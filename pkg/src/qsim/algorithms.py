"""Circuit builders: Hadamard transform, Grover search, marking oracles, constant-depth key search.

Bitstrings are MSB-first: character ``-1-j`` is qubit ``j``, so ``"01"``
sets qubit 0. This is the reading under which ``x q[0]`` prepares key 01.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

from .circuit import Circuit, Instruction, exact_distribution
from .errors import CapacityError, DomainError
from .statevec import StateVector, kron_power

DENSE_MAX_QUBITS = 10

ALGORITHM = "algorithm"
QASM_LITERAL = "qasm-literal"
VARIANTS = (ALGORITHM, QASM_LITERAL)

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)


def key_index(key: str, n: int) -> int:
    """Integer value of an MSB-first bitstring, checked against length ``n``."""
    if not isinstance(key, str) or len(key) != n or any(ch not in "01" for ch in key):
        raise DomainError(f"key must be a {n}-character bitstring, got {key!r}")
    return int(key, 2)


def _check_dense(n: int, cap: int = DENSE_MAX_QUBITS) -> None:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if n > cap:
        raise CapacityError(f"n={n} exceeds the dense-operator cap of {cap}")


def hadamard_transform_reference(x: str, n: int) -> StateVector:
    """H on every qubit of ``|x>``, evaluated from the closed-form sum.

    Amplitude at ``y`` is ``(-1)^{popcount(x & y)} / sqrt(2^n)``.
    """
    _check_dense(n)
    xi = key_index(x, n)
    ys = np.arange(1 << n)
    parity = np.array([bin(xi & int(y)).count("1") & 1 for y in ys])
    amps = np.where(parity == 1, -1.0, 1.0) / math.sqrt(1 << n)
    return StateVector(n, amps.astype(complex))


def phase_oracle(n: int, key: str, alpha: float) -> np.ndarray:
    """Diagonal operator multiplying the key amplitude by ``e^{i alpha}``."""
    _check_dense(n)
    k = key_index(key, n)
    d = np.ones(1 << n, dtype=complex)
    d[k] = -1.0 if alpha == math.pi else np.exp(1j * alpha)
    return np.diag(d)


def grover_phase_oracle(n: int, key: str) -> np.ndarray:
    """``|x> -> (-1)^{f(x)} |x>`` with ``f`` the indicator of ``key``."""
    _check_dense(n)
    k = key_index(key, n)
    d = np.ones(1 << n, dtype=complex)
    d[k] = -1.0
    return np.diag(d)


def entangling_oracle(n: int, key: str) -> np.ndarray:
    """``|x, y> -> |x, y XOR f(x)>`` over ``n + 1`` qubits.

    ``x`` occupies qubits ``0..n-1`` and the ancilla ``y`` is qubit ``n``.
    """
    _check_dense(n, DENSE_MAX_QUBITS - 1)
    k = key_index(key, n)
    dim = 1 << (n + 1)
    perm = np.arange(dim)
    perm[k], perm[k | (1 << n)] = k | (1 << n), k
    u = np.zeros((dim, dim), dtype=complex)
    u[perm, np.arange(dim)] = 1.0
    return u


def grover_diffusion(n: int) -> np.ndarray:
    """``2|psi><psi| - I`` with ``|psi>`` the uniform superposition."""
    _check_dense(n)
    dim = 1 << n
    return np.full((dim, dim), 2.0 / dim, dtype=complex) - np.eye(dim)


def diffusion_via_hadamards(n: int) -> np.ndarray:
    """``H^n (2|0><0| - I) H^n`` built from Kronecker powers (independent of :func:`grover_diffusion`)."""
    _check_dense(n)
    hn = kron_power(_H, n)
    reflect = -np.eye(1 << n, dtype=complex)
    reflect[0, 0] = 1.0
    return hn @ reflect @ hn


def auto_iterations(n: int) -> int:
    """``floor(pi/4 * sqrt(2^n))``."""
    return int(math.floor(math.pi / 4 * math.sqrt(2**n)))


def grover_success_probability(n: int, iterations: int) -> float:
    """Closed form ``sin^2((2k+1) theta)`` with ``sin(theta) = 2^{-n/2}``."""
    theta = math.asin(2 ** (-n / 2))
    return math.sin((2 * iterations + 1) * theta) ** 2


@dataclass(frozen=True)
class GroverSpec:
    n: int
    key: str
    iterations: Union[int, Literal["auto"]] = "auto"

    def __post_init__(self):
        key_index(self.key, self.n)
        if self.iterations != "auto" and (not isinstance(self.iterations, int) or self.iterations < 0):
            raise DomainError(f"iterations must be a non-negative int or 'auto', got {self.iterations!r}")

    @property
    def resolved_iterations(self) -> int:
        return auto_iterations(self.n) if self.iterations == "auto" else int(self.iterations)


def build_grover(spec: GroverSpec) -> Circuit:
    """H on all qubits, ``k`` rounds of (oracle, diffusion), then measure qubit i into clbit i.

    Oracle and diffusion are injected as dense operators, so the result is
    not QASM-exportable.
    """
    n = spec.n
    _check_dense(n)
    qubits = tuple(range(n))
    oracle = Instruction.unitary(grover_phase_oracle(n, spec.key), qubits, "oracle")
    diffusion = Instruction.unitary(grover_diffusion(n), qubits, "diffusion")
    ops = [Instruction.gate("H", q) for q in qubits]
    for _ in range(spec.resolved_iterations):
        ops += [oracle, diffusion]
    ops += [Instruction.measure(q, q) for q in qubits]
    return Circuit(n, n, ops, name=f"grover-n{n}-{spec.key}-k{spec.resolved_iterations}")


@dataclass(frozen=True)
class SearchSpec:
    n: int
    key: str
    variant: str = ALGORITHM

    def __post_init__(self):
        if not 1 <= self.n <= DENSE_MAX_QUBITS:
            raise DomainError(f"n must be in 1..{DENSE_MAX_QUBITS}, got {self.n}")
        key_index(self.key, self.n)
        if self.variant not in VARIANTS:
            raise DomainError(f"variant must be one of {VARIANTS}, got {self.variant!r}")


def build_constant_search(spec: SearchSpec) -> Circuit:
    """Constant-depth key search over a key register (qubits 0..n-1) and data register (n..2n-1).

    ``algorithm``: X on set key bits, then H, Z, H on all 2n qubits, CNOT from
    key qubit i to data qubit n+i, measure data qubit n+i into clbit i. Since
    HZH = X, the key register ends as NOT key and the data register as all
    ones; the CNOTs XOR them back to the key.

    ``qasm-literal``: X on set key bits, H on all 2n qubits, the CNOTs, the
    measurements, then Z on each data qubit. With the data qubits in |+>
    the CNOTs copy nothing and every outcome is equally likely.
    """
    n = spec.n
    k = key_index(spec.key, n)
    everything = range(2 * n)
    ops = [Instruction.gate("X", i) for i in range(n) if (k >> i) & 1]
    ops += [Instruction.gate("H", q) for q in everything]
    if spec.variant == ALGORITHM:
        ops += [Instruction.gate("Z", q) for q in everything]
        ops += [Instruction.gate("H", q) for q in everything]
    ops += [Instruction.gate("CNOT", i, n + i) for i in range(n)]
    ops += [Instruction.measure(n + i, i) for i in range(n)]
    if spec.variant == QASM_LITERAL:
        ops += [Instruction.gate("Z", n + i) for i in range(n)]
    return Circuit(
        2 * n,
        n,
        ops,
        name=f"constant-search-{spec.variant}-n{n}-{spec.key}",
        qregs=(("q", 2 * n),),
        cregs=(("res", n),),
    )


def key_probability(circuit: Circuit, key: str) -> float:
    """Exact probability that the classical register reads ``key``."""
    dist = exact_distribution(circuit)
    return dist.get(key_index(key, circuit.num_clbits), 0.0)


def compare_variants(n: int, key: str) -> dict[str, float]:
    """Exact ``P(key)`` for both constant-search variants."""
    return {v: key_probability(build_constant_search(SearchSpec(n, key, v)), key) for v in VARIANTS}


def identify_constant_search(circuit: Circuit) -> SearchSpec | None:
    """The :class:`SearchSpec` whose builder output equals ``circuit``, if any."""
    if circuit.num_qubits % 2 or circuit.num_clbits * 2 != circuit.num_qubits:
        return None
    n = circuit.num_clbits
    if not 1 <= n <= DENSE_MAX_QUBITS:
        return None
    k = 0
    for ins in circuit.instructions:
        if ins.kind == "gate" and ins.name == "X" and ins.qubits[0] < n:
            k |= 1 << ins.qubits[0]
    key = format(k, f"0{n}b")
    for variant in VARIANTS:
        spec = SearchSpec(n, key, variant)
        if build_constant_search(spec).instructions == circuit.instructions:
            return spec
    return None
