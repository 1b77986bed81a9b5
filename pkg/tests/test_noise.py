import math

import numpy as np
import pytest

from qsim import algorithms as alg
from qsim.circuit import Circuit, Instruction, exact_distribution, execute
from qsim.errors import DomainError, FitError
from qsim.gates import matrix_of
from qsim.noise import NoiseModel, _trajectories, apply_noisy_execution, fit_readout, readout_distribution
from qsim.verify import random_circuit

G = Instruction.gate
M = Instruction.measure

PAULIS = [matrix_of(n) for n in "XYZ"]


def density_matrix_reference(circuit, p):
    """Independent oracle: exact density-matrix evolution with a per-qubit depolarizing channel."""
    n = circuit.num_qubits
    dim = 2**n
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1

    def full(op, qubits):
        # op is control-first for two qubits; build via basis action.
        u = np.zeros((dim, dim), dtype=complex)
        for col in range(dim):
            bits = [(col >> q) & 1 for q in qubits]
            local = int("".join(map(str, bits)), 2)
            for row_local in range(op.shape[0]):
                amp = op[row_local, local]
                if amp == 0:
                    continue
                row = col
                for j, q in enumerate(qubits):
                    b = (row_local >> (len(qubits) - 1 - j)) & 1
                    row = (row & ~(1 << q)) | (b << q)
                u[row, col] += amp
        return u

    for ins in circuit.instructions:
        if ins.kind != "gate":
            continue
        u = full(matrix_of(ins.name, ins.theta), ins.qubits)
        rho = u @ rho @ u.conj().T
        for q in ins.qubits:
            mixed = sum(full(P, [q]) @ rho @ full(P, [q]).conj().T for P in PAULIS)
            rho = (1 - p) * rho + p / 3 * mixed
    probs = np.real(np.diag(rho))
    dist = {}
    for idx, pr in enumerate(probs):
        key = 0
        for q, c in circuit.measured_pairs():
            if (idx >> q) & 1:
                key |= 1 << c
        dist[key] = dist.get(key, 0.0) + pr
    return dist


def within_3sigma(count, shots, p):
    return abs(count - shots * p) <= 3 * math.sqrt(shots * p * (1 - p)) + 1


def test_zero_model_is_noiseless_byte_for_byte(listing):
    assert apply_noisy_execution(listing, NoiseModel(), 1000, 3).to_json() == execute(listing, 1000, 3).to_json()
    c = alg.build_constant_search(alg.SearchSpec(2, "01"))
    assert execute(c, 500, 1, NoiseModel()).to_json() == execute(c, 500, 1).to_json()


def test_readout_only_keeps_noiseless_stream_at_zero_flip():
    # p10 only flips true ones, so a |0> outcome never moves.
    c = Circuit(1, 1, [M(0, 0)])
    assert apply_noisy_execution(c, NoiseModel(0, 0, 0.7), 100, 0).counts == {"0": 100}


def test_readout_half_flip():
    c = Circuit(1, 1, [G("X", 0), M(0, 0)])
    rep = apply_noisy_execution(c, NoiseModel(readout_p10=0.5), 8192, 0)
    assert within_3sigma(rep.counts["1"], 8192, 0.5)
    assert rep.exact_probabilities is None


def test_symmetric_readout_reproduces_0747_level():
    p = 0.1357
    assert (1 - p) ** 2 == pytest.approx(0.747, abs=5e-4)
    c = alg.build_constant_search(alg.SearchSpec(2, "01"))
    rep = execute(c, 8192, 0, NoiseModel.symmetric_readout(p))
    assert rep.probability("01") == pytest.approx(0.747, abs=0.02)


def test_readout_distribution_matches_sampling():
    c = alg.build_constant_search(alg.SearchSpec(2, "01"))
    model = NoiseModel(0, 0.1, 0.3)
    exact = readout_distribution(exact_distribution(c), [0, 1], 0.1, 0.3)
    assert sum(exact.values()) == pytest.approx(1.0)
    assert exact[1] == pytest.approx(0.7 * 0.9)
    rep = execute(c, 8192, 2, model)
    for key, p in exact.items():
        assert within_3sigma(rep.counts.get(format(key, "02b"), 0), 8192, p)


def test_depolarizing_single_gate_analytic():
    p = 0.3
    c = Circuit(1, 1, [G("X", 0), M(0, 0)])
    rep = apply_noisy_execution(c, NoiseModel(depolarizing_p=p), 8192, 4)
    assert within_3sigma(rep.counts.get("0", 0), 8192, 2 * p / 3)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_trajectories_match_density_matrix(seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng, 2, 8, measure=True)
    p = 0.1
    ref = density_matrix_reference(c, p)
    rep = apply_noisy_execution(c, NoiseModel(depolarizing_p=p), 8192, seed)
    for key, pr in ref.items():
        assert within_3sigma(rep.counts.get(format(key, "02b"), 0), 8192, pr)


def test_trajectory_shots_are_individually_seeded():
    c = random_circuit(np.random.default_rng(0), 3, 10, measure=True)
    model = NoiseModel(0.2, 0.05, 0.05)
    a = _trajectories(c, model, 100, 8)
    b = _trajectories(c, model, 2500, 8)
    np.testing.assert_array_equal(a, b[:100])


def test_noisy_runs_are_deterministic(listing):
    model = NoiseModel(0.02, 0.03, 0.04)
    assert apply_noisy_execution(listing, model, 300, 5).to_json() == apply_noisy_execution(listing, model, 300, 5).to_json()


@pytest.mark.parametrize("bad", [-0.1, 1.5, float("nan")])
def test_invalid_probabilities(bad):
    with pytest.raises(DomainError):
        NoiseModel(depolarizing_p=bad)
    with pytest.raises(DomainError):
        NoiseModel(readout_p01=bad)


def test_noise_model_json():
    m = NoiseModel(0.01, 0.02, 0.03)
    assert m.to_json() == '{"depolarizing_p": 0.01, "readout_p01": 0.02, "readout_p10": 0.03}'
    assert NoiseModel.from_json(m.to_json()) == m


def test_monotone_in_readout_error():
    c = alg.build_constant_search(alg.SearchSpec(2, "01"))
    dist = exact_distribution(c)
    exact = [readout_distribution(dist, [0, 1], p, p)[1] for p in np.linspace(0, 0.5, 26)]
    assert all(a > b for a, b in zip(exact, exact[1:]))
    sampled = [execute(c, 8192, 0, NoiseModel.symmetric_readout(p)).probability("01") for p in (0, 0.05, 0.1, 0.2)]
    assert all(a >= b for a, b in zip(sampled, sampled[1:]))
    for p, s in zip((0, 0.05, 0.1, 0.2), sampled):
        assert within_3sigma(round(s * 8192), 8192, (1 - p) ** 2)


@pytest.mark.parametrize(
    "target, expected_p",
    [(1.0, 0.0), (0.747, 1 - math.sqrt(0.747)), (0.364, 1 - math.sqrt(0.364))],
)
def test_fit_readout(target, expected_p):
    c = alg.build_constant_search(alg.SearchSpec(2, "01"))
    fit = fit_readout(c, "01", target, 8192, 0)
    assert fit.p == pytest.approx(expected_p, abs=0.01)
    assert abs(fit.achieved - target) <= 0.01
    assert abs((1 - fit.p) ** 2 - target) <= 0.01


def test_frozen_fit_targets():
    # Closed-form solutions of (1 - p)^2 = target.
    assert 1 - math.sqrt(0.747) == pytest.approx(0.13571, abs=1e-5)
    assert 1 - math.sqrt(0.364) == pytest.approx(0.39667, abs=1e-5)


def test_fit_failures():
    literal = alg.build_constant_search(alg.SearchSpec(2, "01", alg.QASM_LITERAL))
    with pytest.raises(FitError):
        fit_readout(literal, "01", 0.747)
    faithful = alg.build_constant_search(alg.SearchSpec(2, "01"))
    with pytest.raises(FitError):
        fit_readout(faithful, "01", 0.1)
    with pytest.raises(DomainError):
        fit_readout(faithful, "01", 0.0)
    with pytest.raises(DomainError):
        fit_readout(faithful, "011", 0.5)
