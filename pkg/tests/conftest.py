import math

import numpy as np
import pytest

from qsim import key_search_listing, parse
from qsim.statevec import dense_unitary_of

SQ2 = 1 / math.sqrt(2)


def dense_final_state(circuit):
    """Reference: measurement-free part of ``circuit`` as a dense matrix times |0...0>."""
    u = dense_unitary_of(circuit.without_measurements())
    return u[:, 0]


def dense_clbit_distribution(circuit):
    """Reference distribution for circuits whose measurements all come last."""
    psi = dense_final_state(circuit)
    pairs = circuit.measured_pairs()
    dist = {}
    for idx, amp in enumerate(psi):
        p = abs(amp) ** 2
        key = 0
        for q, c in pairs:
            if (idx >> q) & 1:
                key |= 1 << c
        dist[key] = dist.get(key, 0.0) + p
    return dist


@pytest.fixture
def listing_text():
    return key_search_listing()


@pytest.fixture
def listing(listing_text):
    return parse(listing_text)


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one acceptance line; printed in the terminal summary."""

    def record(number, title, ok, detail=""):
        ACCEPTANCE_LINES.append((number, "PASS" if ok else "FAIL", title, detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, title, detail in sorted(ACCEPTANCE_LINES, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{status}] {number:>2}. {title}  {detail}".rstrip())
