"""Exit criteria, one test per criterion; each also prints a PASS/FAIL summary line."""

import hashlib
import json
import math
import time
from importlib import resources
from itertools import product

import numpy as np
import pytest

from qsim import algorithms as alg
from qsim import key_search_listing
from qsim.circuit import execute
from qsim.cli import main
from qsim.gates import GATE_NAMES, GateDef, equal_up_to_global_phase, matrix_of, sequence_product
from qsim.noise import fit_readout
from qsim.qasm import ParseError, dumps, parse
from qsim.statevec import apply_gate, dense_unitary_of, evolve, init_basis
from qsim.verify import random_circuit

from conftest import dense_clbit_distribution

LISTING_SHA256 = "514cd5a8e4cacad64a5ef02a26757d052266de275a7a2d074be847d634148cbc"


def test_c01_ideal_certainty(capsys, criterion):
    t0 = time.perf_counter()
    code = main(["search", "--n", "2", "--key", "01", "--variant", "algorithm", "--format", "json", "--shots", "8192"])
    doc = json.loads(capsys.readouterr().out)
    worst = 0.0
    for n in range(1, 6):
        for bits in product("01", repeat=n):
            key = "".join(bits)
            c = alg.build_constant_search(alg.SearchSpec(n, key))
            worst = max(worst, abs(alg.key_probability(c, key) - 1.0))
    elapsed = time.perf_counter() - t0
    ok = (
        code == 0
        and abs(doc["exact_probabilities"]["01"] - 1.0) <= 1e-10
        and doc["counts"] == {"01": 8192}
        and worst <= 1e-10
        and elapsed < 1.0
    )
    criterion(1, "ideal certainty, n=1..5 all keys", ok, f"max|P-1|={worst:.1e} t={elapsed:.2f}s")
    assert ok


def test_c02_literal_fixture(capsys, criterion):
    t0 = time.perf_counter()
    text = key_search_listing()
    c = parse(text)
    rep = execute(c, 8192, 0)
    code = main(["run", str(resources.files("qsim") / "data/key_search_01.qasm"), "--format", "json"])
    captured = capsys.readouterr()
    elapsed = time.perf_counter() - t0
    worst = max(abs(p - 0.25) for p in rep.exact_probabilities.values())
    ok = (
        hashlib.sha256(text.encode()).hexdigest() == LISTING_SHA256
        and len(c) == 11
        and c.num_qubits == 4
        and c.num_clbits == 2
        and set(rep.exact_probabilities) == {"00", "01", "10", "11"}
        and worst <= 1e-10
        and code == 0
        and "not 1" in captured.err
        and elapsed < 1.0
    )
    criterion(2, "bundled listing: 11 instr, 4q/2c, P=0.25 each, flagged", ok, f"max|P-0.25|={worst:.1e} t={elapsed:.2f}s")
    assert ok


def test_c03_noise_fit(criterion):
    t0 = time.perf_counter()
    c = alg.build_constant_search(alg.SearchSpec(2, "01"))
    fits = {t: fit_readout(c, "01", t, 8192, 0) for t in (0.747, 0.364)}
    elapsed = time.perf_counter() - t0
    expected = {0.747: 1 - math.sqrt(0.747), 0.364: 1 - math.sqrt(0.364)}
    ok = elapsed < 5.0
    parts = []
    for t, f in fits.items():
        ok &= abs((1 - f.p) ** 2 - t) <= 0.01 and abs(f.p - expected[t]) <= 0.01
        parts.append(f"target {t}: p={f.p:.4f} (1-p)^2={(1 - f.p) ** 2:.4f}")
    criterion(3, "readout fit for 0.747 / 0.364", ok, "; ".join(parts) + f" t={elapsed:.2f}s")
    assert ok


def test_c04_grover(criterion):
    t0 = time.perf_counter()
    p2 = alg.key_probability(alg.build_grover(alg.GroverSpec(2, "11", 1)), "11")
    p3 = alg.key_probability(alg.build_grover(alg.GroverSpec(3, "101", 2)), "101")
    worst = 0.0
    for n in range(1, 6):
        key = format((1 << n) - 1, f"0{n}b")
        for k in range(11):
            p = alg.key_probability(alg.build_grover(alg.GroverSpec(n, key, k)), key)
            worst = max(worst, abs(p - math.sin((2 * k + 1) * math.asin(2 ** (-n / 2))) ** 2))
    elapsed = time.perf_counter() - t0
    ok = abs(p2 - 1) <= 1e-10 and abs(p3 - 0.9453125) <= 1e-6 and worst <= 1e-9 and elapsed < 2.0
    criterion(4, "Grover n=2/n=3 and angle law", ok, f"P2={p2:.12f} P3={p3:.9f} sweep={worst:.1e} t={elapsed:.2f}s")
    assert ok


def test_c05_oracle_equivalence(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 6))
        c = random_circuit(rng, n, int(rng.integers(0, 21)))
        start = int(rng.integers(1 << n))
        fast = evolve(c, init_basis(n, start)).amps
        worst = max(worst, float(np.max(np.abs(fast - dense_unitary_of(c)[:, start]))))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and elapsed < 10.0
    criterion(5, "engine vs dense oracle, 200 circuits", ok, f"max dev={worst:.1e} t={elapsed:.2f}s")
    assert ok


def test_c06_gate_algebra(criterion):
    worst = 0.0
    for name in GATE_NAMES:
        m = matrix_of(name, 0.9 if name == "P" else None)
        worst = max(worst, float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))))
    unitary_ok = worst <= 1e-12
    identities = [
        (["H", "Z", "H"], ["X"]),
        (["H", "X", "H"], ["Z"]),
        (["S", "S"], ["Z"]),
        (["T", "T"], ["S"]),
        ([("P", math.pi)], ["Z"]),
    ]
    algebra_ok = all(
        equal_up_to_global_phase(sequence_product(a), sequence_product(b), atol=1e-12) for a, b in identities
    )
    ok = unitary_ok and algebra_ok
    criterion(6, "gate unitarity and identities", ok, f"max unitarity dev={worst:.1e}")
    assert ok


def test_c07_hadamard_transform(criterion):
    h = GateDef("H")
    worst = 0.0
    for n in range(1, 5):
        for x in range(1 << n):
            s = init_basis(n, x)
            for q in range(n):
                s = apply_gate(s, h, [q])
            ref = alg.hadamard_transform_reference(format(x, f"0{n}b"), n)
            worst = max(worst, float(np.max(np.abs(s.amps - ref.amps))))
    worked = np.allclose(alg.hadamard_transform_reference("11", 2).amps, [0.5, -0.5, -0.5, 0.5], atol=1e-12) and np.allclose(
        alg.hadamard_transform_reference("00", 2).amps, [0.5] * 4, atol=1e-12
    )
    ok = worst <= 1e-12 and worked
    criterion(7, "Hadamard transform closed form, n<=4", ok, f"max dev={worst:.1e}")
    assert ok


def test_c08_round_trip(criterion):
    rng = np.random.default_rng(8)
    mismatches = 0
    for _ in range(100):
        n = int(rng.integers(1, 6))
        c = random_circuit(rng, n, int(rng.integers(0, 21)), measure=bool(rng.integers(2)))
        mismatches += parse(dumps(c)) != c
    fixture = parse(key_search_listing())
    fixture_ok = parse(dumps(fixture)) == fixture
    try:
        parse('OPENQASM 2.0;\nqreg q[1];\nh q[0];\n  frob q[0];\n')
        located = False
    except ParseError as e:
        located = (e.position.line, e.position.column) == (4, 3) and "line 4, column 3" in str(e)
    ok = mismatches == 0 and fixture_ok and located
    criterion(8, "QASM round trip + error positions", ok, f"mismatches={mismatches} located={located}")
    assert ok


def test_c09_constant_depth(criterion):
    """Instruction count is 5n + |ones| and layer count is independent of n, for n = 1..8."""
    counts_ok = True
    observed = []
    depths = set()
    for n in range(1, 9):
        for key in {"1" * n, "0" * (n - 1) + "1", "1" + "0" * (n - 1)}:
            c = alg.build_constant_search(alg.SearchSpec(n, key))
            ones = key.count("1")
            observed.append((n, len(c) - ones))
            counts_ok &= len(c) == 5 * n + ones
            layers = c.layers("alap")
            cnot_layers = sum(any(i.name == "CNOT" for i in layer) for layer in layers)
            single = sum(all(i.kind == "gate" and i.name != "CNOT" for i in layer) for layer in layers)
            assert cnot_layers == 1 and single <= 4
            depths.add(len(layers))
    layers_ok = len(depths) == 1
    per_n = sorted({(n, v // n) for n, v in observed})
    detail = f"layers={sorted(depths)}; observed count - |ones| = {per_n[0][1]}n (stated 5n)"
    criterion(9, "constant depth: count 5n+|ones|, n-independent layers", counts_ok and layers_ok, detail)
    assert layers_ok, "layer count depends on n"
    assert counts_ok, detail


def test_c10_determinism_and_sampling(criterion):
    circuits = [
        parse(key_search_listing()),
        alg.build_constant_search(alg.SearchSpec(2, "01")),
        alg.build_grover(alg.GroverSpec(3, "101", 1)),
    ]
    rng = np.random.default_rng(10)
    circuits += [random_circuit(rng, 3, 12, measure=True) for _ in range(3)]
    identical = all(execute(c, 8192, 1).to_json() == execute(c, 8192, 1).to_json() for c in circuits)
    worst_z = 0.0
    for c in circuits:
        rep = execute(c, 8192, 2)
        for key, p in rep.exact_probabilities.items():
            sigma = math.sqrt(8192 * p * (1 - p))
            dev = abs(rep.counts.get(key, 0) - 8192 * p)
            if sigma > 0:
                worst_z = max(worst_z, dev / sigma)
            else:
                assert dev == 0
    for c in circuits[3:]:
        ref = dense_clbit_distribution(c)
        rep = execute(c, 16, 0)
        for key, p in ref.items():
            assert rep.exact_probabilities.get(format(key, f"0{c.num_clbits}b"), 0.0) == pytest.approx(p, abs=1e-10)
    ok = identical and worst_z <= 3.0
    criterion(10, "byte-identical reports, 3 sigma sampling", ok, f"max z={worst_z:.2f}")
    assert ok
