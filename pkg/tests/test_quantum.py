import math

import numpy as np
import pytest

from delayedpa.quantum import (
    BasisDecomposition,
    DensityMatrix,
    PureState,
    basis_ket,
    build_2c_state,
    build_2d_state,
    decompose,
    partial_trace,
    pauli,
    projector,
    random_pure_state,
    tensor,
    verify_2c_2d,
)

S = 1.0 / math.sqrt(2.0)


def bell_state():
    amps = np.zeros(4, dtype=complex)
    amps[0] = S  # |0>|0>
    amps[3] = S  # |1>|1>
    return PureState(amps, (2, 2), ("A", "Abar"))


def product_state(qubit_amps, chi):
    amps = np.kron(np.asarray(qubit_amps, dtype=complex), np.asarray(chi, dtype=complex))
    return PureState(amps, (2, len(chi)), ("A", "Abar"))


# ---------------------------------------------------------------- paulis

def test_pauli_anticommutation():
    x, z = pauli("X"), pauli("Z")
    assert np.allclose(x @ z, -(z @ x))


def test_pauli_y_is_i_x_z():
    assert np.allclose(pauli("Y"), 1j * pauli("X") @ pauli("Z"))
    assert np.allclose(pauli("Y"), np.array([[0, -1j], [1j, 0]]))


def test_pauli_x_flips_z_eigenstate():
    assert np.allclose(pauli("X") @ basis_ket(0, "z"), basis_ket(1, "z"))


def test_pauli_unknown_name():
    with pytest.raises(ValueError):
        pauli("H")


# ---------------------------------------------------------------- projector

def test_projector_z0():
    p = projector(PureState.qubit(0, "z"))
    assert np.allclose(p.mat, np.diag([1.0, 0.0]))


def test_projector_idempotent():
    rng = np.random.default_rng(1)
    phi = random_pure_state((2, 3), ("A", "B"), rng)
    p = projector(phi).mat
    assert np.abs(p @ p - p).max() <= 1e-12


def test_projector_plus_state():
    p = projector(PureState.qubit(0, "x"))
    assert np.allclose(p.mat, np.full((2, 2), 0.5))


def test_projector_rejects_unnormalized():
    with pytest.raises(ValueError):
        PureState(np.array([1.0, 1.0]), (2,), ("A",))


# ------------------------------------------------------- tensor/ptrace

def test_partial_trace_of_product_returns_factor():
    rng = np.random.default_rng(2)
    a = random_pure_state((2,), ("A",), rng)
    b = random_pure_state((3,), ("Abar",), rng)
    rho = projector(tensor([a, b]))
    reduced = partial_trace(rho, ["A"])
    assert np.abs(reduced.mat - projector(a).mat).max() <= 1e-12


def test_partial_trace_preserves_trace():
    rng = np.random.default_rng(3)
    psi = random_pure_state((2, 2, 3), ("A", "B", "C"), rng)
    rho = projector(psi)
    for keep in (["A"], ["B"], ["C"], ["A", "C"], ["A", "B", "C"]):
        reduced = partial_trace(rho, keep)
        assert abs(np.trace(reduced.mat) - 1.0) <= 1e-12


def test_partial_trace_bell_gives_maximally_mixed():
    rho = projector(bell_state())
    for keep in ("A", "Abar"):
        reduced = partial_trace(rho, [keep])
        assert np.abs(reduced.mat - np.eye(2) / 2).max() <= 1e-12


def test_partial_trace_unknown_label():
    rho = projector(bell_state())
    with pytest.raises(ValueError):
        partial_trace(rho, ["Q"])


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[1.0, 0.5], [0.0, 0.0]]), (2,), ("A",))  # not Hermitian
    with pytest.raises(ValueError):
        DensityMatrix(np.eye(2), (2,), ("A",))  # trace 2


# ---------------------------------------------------------------- decompose

def test_decompose_product_state():
    chi = np.array([0.6, 0.8], dtype=complex)
    psi = product_state(basis_ket(0, "z"), chi)
    d = decompose(psi, "z")
    assert abs(d.lambdas[0] - 1.0) <= 1e-12
    assert abs(d.lambdas[1]) <= 1e-12
    assert np.abs(d.companions[0].amps - chi).max() <= 1e-12


def test_decompose_bell():
    d = decompose(bell_state(), "z")
    assert abs(d.lambdas[0] - S) <= 1e-12
    assert abs(d.lambdas[1] - S) <= 1e-12
    assert np.abs(d.companions[0].amps - basis_ket(0, "z")).max() <= 1e-12
    assert np.abs(d.companions[1].amps - basis_ket(1, "z")).max() <= 1e-12


def test_decompose_reassembly_random():
    rng = np.random.default_rng(4)
    for _ in range(100):
        dim = int(rng.integers(1, 9))
        psi = random_pure_state((2, dim), ("A", "Abar"), rng)
        for basis in ("z", "x"):
            d = decompose(psi, basis)
            assert np.abs(d.reassemble().amps - psi.amps).max() <= 1e-12
            assert abs(sum(abs(l) ** 2 for l in d.lambdas) - 1.0) <= 1e-12


def test_decompose_component_matches_bra_contraction():
    rng = np.random.default_rng(5)
    psi = random_pure_state((2, 4), ("A", "Abar"), rng)
    block = psi.amps.reshape(2, 4)
    for basis in ("z", "x"):
        d = decompose(psi, basis)
        for a in (0, 1):
            direct = basis_ket(a, basis).conj() @ block
            assert np.abs(d.lambdas[a] * d.companions[a].amps - direct).max() <= 1e-12


# ---------------------------------------------------------------- 2c build

def test_build_2c_product_state_hides_message():
    chi = np.array([0.6, 0.8j], dtype=complex)
    psi = product_state(basis_ket(0, "z"), chi)
    rho = build_2c_state(psi, "z")
    # direct 2-term construction: 1/2 sum_m P(|m> |m_z> |chi>)
    expect = np.zeros((8, 8), dtype=complex)
    for m in (0, 1):
        vec = np.kron(basis_ket(m, "z"), np.kron(basis_ket(m, "z"), chi))
        expect += 0.5 * np.outer(vec, vec.conj())
    assert np.abs(rho.mat - expect).max() <= 1e-12
    assert rho.labels == ("M", "A", "Abar")


def test_build_2c_message_marginal_is_uniform():
    rng = np.random.default_rng(6)
    for _ in range(5):
        psi = random_pure_state((2, 3), ("A", "Abar"), rng)
        for basis in ("z", "x"):
            rho = build_2c_state(psi, basis)
            m = partial_trace(rho, ["M"])
            assert np.abs(m.mat - np.eye(2) / 2).max() <= 1e-12


def test_build_2c_bell_four_terms():
    rho = build_2c_state(bell_state(), "z")
    expect = np.zeros((8, 8), dtype=complex)
    for a in (0, 1):
        for m in (0, 1):
            vec = np.kron(
                basis_ket(m, "z"),
                np.kron(basis_ket(m ^ a, "z"), basis_ket(a, "z")),
            )
            expect += 0.25 * np.outer(vec, vec.conj())
    assert np.abs(rho.mat - expect).max() <= 1e-12


# ---------------------------------------------------------------- 2d build

def test_build_2d_carried_marginal_is_depolarized():
    rng = np.random.default_rng(7)
    psi = random_pure_state((2, 4), ("A", "Abar"), rng)
    rho = build_2d_state(psi)
    reduced = partial_trace(rho, ["A", "Abar"])
    # oracle: average the four Pauli conjugations directly
    block = psi.amps.reshape(2, 4)
    expect = np.zeros((8, 8), dtype=complex)
    for name in ("I", "X", "Y", "Z"):
        vec = (pauli(name) @ block).reshape(8)
        expect += 0.25 * np.outer(vec, vec.conj())
    assert np.abs(reduced.mat - expect).max() <= 1e-12


def test_build_2d_message_marginal_uniform_for_product():
    psi = product_state(basis_ket(1, "x"), np.array([1.0, 0.0]))
    rho = build_2d_state(psi)
    m1m2 = partial_trace(rho, ["M1", "M2"])
    assert np.abs(m1m2.mat - np.eye(4) / 4).max() <= 1e-12


def test_build_2d_operator_order_swap():
    rng = np.random.default_rng(8)
    for _ in range(10):
        psi = random_pure_state((2, int(rng.integers(1, 9))), ("A", "Abar"), rng)
        d = np.abs(build_2d_state(psi, "xz").mat - build_2d_state(psi, "zx").mat).max()
        assert d <= 1e-12


# ---------------------------------------------------------------- verify

def test_verify_product_state_exact():
    psi = product_state(basis_ket(0, "z"), np.array([0.8, 0.6]))
    dz, dx = verify_2c_2d(psi)
    assert dz <= 1e-12
    assert dx <= 1e-12


def test_verify_bell_state():
    dz, dx = verify_2c_2d(bell_state())
    assert dz <= 1e-12
    assert dx <= 1e-12


def test_verify_bell_against_hand_expansion():
    # hand-built marginal over M1: weights 1/2 on each decomposition branch,
    # message bit XORed onto the carried qubit, companion untouched
    rho_2d = build_2d_state(bell_state())
    got = partial_trace(rho_2d, ["M1", "A", "Abar"]).mat
    expect = np.zeros((8, 8), dtype=complex)
    lam = {0: S, 1: S}
    for m1 in (0, 1):
        for a in (0, 1):
            vec = np.kron(
                basis_ket(m1, "z"),
                np.kron(basis_ket(m1 ^ a, "z"), lam[a] * basis_ket(a, "z")),
            )
            expect += 0.5 * np.outer(vec, vec.conj())
    assert np.abs(got - expect).max() <= 1e-12


def test_verify_random_states():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(30):
        dim = int(rng.integers(1, 9))
        psi = random_pure_state((2, dim), ("A", "Abar"), rng)
        dz, dx = verify_2c_2d(psi)
        worst = max(worst, dz, dx)
    assert worst <= 1e-10


def test_verify_ignores_preparation_basis():
    # the 2d construction takes no basis argument; its marginals reproduce
    # both 2c bases from the state alone
    rng = np.random.default_rng(10)
    psi = random_pure_state((2, 2), ("A", "Abar"), rng)
    rho = build_2d_state(psi)
    m1 = partial_trace(rho, ["M1", "A", "Abar"]).mat
    m2 = partial_trace(rho, ["M2", "A", "Abar"]).mat
    assert np.abs(m1 - build_2c_state(psi, "z").mat).max() <= 1e-10
    assert np.abs(m2 - build_2c_state(psi, "x").mat).max() <= 1e-10


def test_reassembly_type():
    d = decompose(bell_state(), "x")
    assert isinstance(d, BasisDecomposition)
    assert d.basis == "x"
