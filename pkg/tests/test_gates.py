import cmath
import math

import numpy as np
import pytest

from qsim.errors import DomainError
from qsim.gates import (
    GATE_NAMES,
    GateDef,
    decompose_identity_check,
    equal_up_to_global_phase,
    is_unitary,
    matrix_of,
    phase_matrix,
)


@pytest.mark.parametrize(
    "name, expected",
    [
        ("X", [[0, 1], [1, 0]]),
        ("Y", [[0, -1j], [1j, 0]]),
        ("Z", [[1, 0], [0, -1]]),
        ("H", np.array([[1, 1], [1, -1]]) / math.sqrt(2)),
        ("I", [[1, 0], [0, 1]]),
        ("CNOT", [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]),
    ],
)
def test_canonical_matrices(name, expected):
    np.testing.assert_allclose(matrix_of(name), np.array(expected, dtype=complex), atol=1e-15)


def test_aliases_are_case_insensitive():
    np.testing.assert_array_equal(matrix_of("cx"), matrix_of("CNOT"))
    np.testing.assert_array_equal(matrix_of("u1", math.pi), matrix_of("P", math.pi))


@pytest.mark.parametrize("name", sorted(GATE_NAMES))
def test_every_matrix_is_unitary(name):
    theta = 0.731 if name == "P" else None
    assert is_unitary(matrix_of(name, theta), atol=1e-12)


@pytest.mark.parametrize(
    "theta, fixed",
    [(math.pi, "Z"), (math.pi / 2, "S"), (math.pi / 4, "T"), (-math.pi / 2, "SDG"), (-math.pi / 4, "TDG")],
)
def test_phase_family_hits_named_gates_exactly(theta, fixed):
    assert np.max(np.abs(matrix_of("P", theta) - matrix_of(fixed))) <= 1e-12


def test_phase_matrix_is_diagonal():
    m = phase_matrix(0.3)
    assert m[0, 1] == 0 and m[1, 0] == 0
    assert m[0, 0] == 1
    assert m[1, 1] == pytest.approx(cmath.exp(0.3j))


def test_y_action_follows_matrix():
    y = matrix_of("Y")
    np.testing.assert_allclose(y @ [1, 0], [0, 1j])
    np.testing.assert_allclose(y @ [0, 1], [-1j, 0])


@pytest.mark.parametrize(
    "name, theta",
    [("Q", None), ("P", None), ("X", 0.1), ("P", float("nan"))],
)
def test_bad_gate_requests(name, theta):
    with pytest.raises(DomainError):
        matrix_of(name, theta)


def test_gatedef_normalises_and_freezes():
    g = GateDef("cx")
    assert g.name == "CNOT" and g.arity == 2
    with pytest.raises(ValueError):
        g.matrix[0, 0] = 2
    assert GateDef("u1", 0.5) == GateDef("P", 0.5)


@pytest.mark.parametrize(
    "lhs, rhs, expected",
    [
        (["H", "Z", "H"], ["X"], True),
        (["S", "S"], ["Z"], True),
        (["H", "X", "H"], ["X"], False),
        (["H", "X", "H"], ["Z"], True),
        (["T", "T"], ["S"], True),
        (["T"] * 4, ["Z"], True),
        (["X", "Y"], ["Z"], True),
        (["H", "H"], ["I"], True),
    ],
)
def test_decompose_identity_check(lhs, rhs, expected):
    assert decompose_identity_check(lhs, rhs) is expected


def test_identity_check_arity_mismatch():
    with pytest.raises(DomainError):
        decompose_identity_check(["CNOT"], ["X"])


def test_global_phase_comparison():
    z = matrix_of("Z")
    assert equal_up_to_global_phase(1j * z, z)
    assert not equal_up_to_global_phase(z, matrix_of("X"))
    assert not equal_up_to_global_phase(2 * z, z)


def test_gate_algebra_elementwise():
    h, x, z, s, t = (matrix_of(n) for n in "HXZST")
    for lhs, rhs in [(h @ z @ h, x), (h @ x @ h, z), (s @ s, z), (t @ t, s), (t @ t @ t @ t, z), (h @ h, np.eye(2))]:
        assert np.max(np.abs(lhs - rhs)) <= 1e-12
