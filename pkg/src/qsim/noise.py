"""Stochastic noise: Pauli depolarizing after gates, classical readout flips, and readout fitting."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .circuit import Circuit, check, circuit_digest, exact_distribution, execute
from .errors import DomainError, FitError
from .report import CountsReport
from .statevec import _group_indices, make_rng, sample_indices, to_bitstring
from .gates import matrix_of

SHOT_BLOCK = 1024

_PAULIS = (matrix_of("X"), matrix_of("Y"), matrix_of("Z"))


@dataclass(frozen=True)
class NoiseModel:
    """Per-qubit depolarizing probability after each gate, and readout flip probabilities.

    ``readout_p01`` is the chance a true 0 is recorded as 1; ``readout_p10``
    the chance a true 1 is recorded as 0.
    """

    depolarizing_p: float = 0.0
    readout_p01: float = 0.0
    readout_p10: float = 0.0

    def __post_init__(self):
        for name, v in asdict(self).items():
            if not (isinstance(v, (int, float)) and math.isfinite(v) and 0.0 <= v <= 1.0):
                raise DomainError(f"{name} must be a probability in [0, 1], got {v!r}")

    @classmethod
    def symmetric_readout(cls, p: float) -> "NoiseModel":
        return cls(0.0, p, p)

    def is_zero(self) -> bool:
        return self.depolarizing_p == 0 and self.readout_p01 == 0 and self.readout_p10 == 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "NoiseModel":
        d = json.loads(text)
        return cls(float(d["depolarizing_p"]), float(d["readout_p01"]), float(d["readout_p10"]))


def _flip_readout(bits: np.ndarray, u: np.ndarray, p01: float, p10: float) -> np.ndarray:
    thresh = np.where(bits == 1, p10, p01)
    return np.where(u < thresh, 1 - bits, bits)


def readout_distribution(
    dist: dict[int, float], clbits: Sequence[int], p01: float, p10: float
) -> dict[int, float]:
    """Exact classical distribution after independent readout flips on ``clbits``."""
    out: dict[int, float] = {}
    m = len(clbits)
    for key, p in dist.items():
        for flips in range(1 << m):
            w = p
            obs = key
            for j, c in enumerate(clbits):
                bit = (key >> c) & 1
                pf = p10 if bit else p01
                if (flips >> j) & 1:
                    w *= pf
                    obs ^= 1 << c
                else:
                    w *= 1.0 - pf
            if w:
                out[obs] = out.get(obs, 0.0) + w
    return out


def _readout_only(circuit: Circuit, model: NoiseModel, shots: int, seed: int) -> np.ndarray:
    """Sample the exact distribution (same stream as the noiseless path), then flip readouts."""
    dist = exact_distribution(circuit)
    keys = np.array(list(dist), dtype=np.int64)
    probs = np.array([dist[k] for k in dist])
    outcomes = keys[sample_indices(probs, shots, make_rng(seed))]
    clbits = [c for _, c in circuit.measured_pairs()]
    if not clbits:
        return outcomes
    u = make_rng(seed, 1).random((shots, len(clbits)))
    for j, c in enumerate(clbits):
        bits = (outcomes >> c) & 1
        flipped = _flip_readout(bits, u[:, j], model.readout_p01, model.readout_p10)
        outcomes = outcomes ^ ((bits ^ flipped) << c)
    return outcomes


def _draws_per_shot(circuit: Circuit) -> int:
    total = 0
    for ins in circuit.instructions:
        if ins.kind in ("gate", "unitary"):
            total += 2 * len(ins.qubits)
        elif ins.kind == "measure":
            total += 2
    return max(total, 1)


def _apply_rows(amps: np.ndarray, rows: np.ndarray, matrix: np.ndarray, qubits: Sequence[int]) -> None:
    """Apply ``matrix`` (little-endian over ``qubits``) to the selected trajectory rows."""
    if not rows.any():
        return
    n = amps.shape[1].bit_length() - 1
    idx = _group_indices(n, tuple(qubits))
    sub = amps[rows][:, idx]  # (S, 2^k, M)
    amps[np.ix_(rows, idx.ravel())] = np.einsum("ij,sjm->sim", matrix, sub).reshape(sub.shape[0], -1)


def _trajectories(circuit: Circuit, model: NoiseModel, shots: int, seed: int) -> np.ndarray:
    """Per-shot pure-state trajectories; shot ``s`` draws only from ``make_rng(seed, 2, s)``."""
    n = circuit.num_qubits
    dim = 1 << n
    ndraw = _draws_per_shot(circuit)
    outcomes = np.zeros(shots, dtype=np.int64)
    for start in range(0, shots, SHOT_BLOCK):
        stop = min(start + SHOT_BLOCK, shots)
        size = stop - start
        draws = np.stack([make_rng(seed, 2, s).random(ndraw) for s in range(start, stop)])
        amps = np.zeros((size, dim), dtype=complex)
        amps[:, 0] = 1.0
        bits = np.zeros(size, dtype=np.int64)
        all_rows = np.ones(size, dtype=bool)
        col = 0
        for ins in circuit.instructions:
            if ins.kind == "gate":
                g = ins.gatedef()
                _apply_rows(amps, all_rows, g.matrix, tuple(reversed(ins.qubits)))
            elif ins.kind == "unitary":
                _apply_rows(amps, all_rows, ins.matrix, ins.qubits)
            elif ins.kind == "measure":
                q, c = ins.qubits[0], ins.clbits[0]
                idx = _group_indices(n, (q,))
                p1 = np.sum(np.abs(amps[:, idx[1]]) ** 2, axis=1)
                p1 = np.clip(p1 / np.sum(np.abs(amps) ** 2, axis=1), 0.0, 1.0)
                result = (draws[:, col] < p1).astype(np.int64)
                drop = np.where(result[:, None] == 1, idx[0][None, :], idx[1][None, :])
                np.put_along_axis(amps, drop, 0.0, axis=1)
                amps /= np.linalg.norm(amps, axis=1, keepdims=True)
                recorded = _flip_readout(result, draws[:, col + 1], model.readout_p01, model.readout_p10)
                bits |= recorded << c
                col += 2
                continue
            else:
                continue
            for q in ins.qubits:
                hit = draws[:, col] < model.depolarizing_p
                which = np.minimum((draws[:, col + 1] * 3).astype(int), 2)
                for w, pauli in enumerate(_PAULIS):
                    _apply_rows(amps, hit & (which == w), pauli, (q,))
                col += 2
        outcomes[start:stop] = bits
    return outcomes


def apply_noisy_execution(
    circuit: Circuit, model: NoiseModel, shots: int = 1024, seed: int = 0
) -> CountsReport:
    """Run ``circuit`` under ``model``.

    Depolarizing noise uses per-shot trajectories: after each gate, every
    involved qubit independently suffers a uniformly chosen X, Y or Z with
    probability ``depolarizing_p``. Readout flips are applied to each
    recorded bit. ``exact_probabilities`` is ``None`` unless the model is
    all zeros, in which case the noiseless report is returned unchanged.

    Raises:
        ValidationError: invalid circuit.
        DomainError: bad shots/seed.
    """
    if not isinstance(model, NoiseModel):
        raise DomainError(f"expected a NoiseModel, got {type(model).__name__}")
    if shots < 1:
        raise DomainError(f"shots must be >= 1, got {shots}")
    if model.is_zero():
        return execute(circuit, shots, seed)
    check(circuit)
    if model.depolarizing_p == 0:
        outcomes = _readout_only(circuit, model, shots, seed)
    else:
        make_rng(seed)  # validates the seed before the long loop
        outcomes = _trajectories(circuit, model, shots, seed)
    keys, tally = np.unique(outcomes, return_counts=True)
    counts = {to_bitstring(int(k), circuit.num_clbits): int(c) for k, c in zip(keys, tally)}
    return CountsReport(shots, seed, counts, None, circuit_digest(circuit), num_clbits=circuit.num_clbits)


@dataclass(frozen=True)
class FitResult:
    p: float
    achieved: float
    target: float
    iterations: int

    def to_dict(self) -> dict:
        return asdict(self)


def fit_readout(
    circuit: Circuit,
    key: str,
    target_prob: float,
    shots: int = 8192,
    seed: int = 0,
    tol: float = 0.01,
    max_iter: int = 50,
) -> FitResult:
    """Symmetric readout error ``p`` in [0, 0.5] whose sampled ``P(key)`` hits ``target_prob``.

    Every evaluation reuses ``seed``, so the sampled ``P(key)`` is
    non-increasing in ``p`` and bisection is well defined. Bisection runs
    until the bracket is narrower than 1e-4 and the best point is kept.

    Raises:
        DomainError: target outside (0, 1].
        FitError: the noiseless circuit cannot reach the target, or even
            ``p = 0.5`` stays above it.
    """
    if not 0.0 < target_prob <= 1.0:
        raise DomainError(f"target probability must lie in (0, 1], got {target_prob}")
    width = circuit.num_clbits
    key_int = int(key, 2)
    if len(key) != width:
        raise DomainError(f"key {key!r} does not match {width} clbits")
    key_str = to_bitstring(key_int, width)

    def sampled(p: float) -> float:
        rep = apply_noisy_execution(circuit, NoiseModel.symmetric_readout(p), shots, seed)
        return rep.probability(key_str)

    ideal = exact_distribution(circuit).get(key_int, 0.0)
    if ideal + tol < target_prob:
        raise FitError(f"noiseless P({key})={ideal:.6g} is below target {target_prob}")
    lo, hi = 0.0, 0.5
    f_lo = sampled(lo)
    iterations = 1
    if abs(f_lo - target_prob) <= tol:
        return FitResult(0.0, f_lo, target_prob, iterations)
    f_hi = sampled(hi)
    iterations += 1
    if f_hi > target_prob + tol or f_lo < target_prob - tol:
        raise FitError(
            f"cannot bracket target {target_prob}: P(p=0)={f_lo:.4g}, P(p=0.5)={f_hi:.4g}"
        )
    best = min(((abs(f_lo - target_prob), lo, f_lo), (abs(f_hi - target_prob), hi, f_hi)))
    while hi - lo > 1e-4 and iterations < max_iter:
        mid = 0.5 * (lo + hi)
        f_mid = sampled(mid)
        iterations += 1
        best = min(best, (abs(f_mid - target_prob), mid, f_mid))
        if f_mid > target_prob:
            lo = mid
        else:
            hi = mid
    err, p, achieved = best
    if err > tol:
        raise FitError(f"best fit p={p:.4g} gives P={achieved:.4g}, not within {tol} of {target_prob}")
    return FitResult(p, achieved, target_prob, iterations)
