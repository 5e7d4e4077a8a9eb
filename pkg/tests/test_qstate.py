"""States, tensors, and quantum correlations against a direct kron/trace oracle."""
import json
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import bellkit as bk

SIGMA = [
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
]


def kron_chain(mats):
    return reduce(np.kron, mats)


def oracle_tensor(rho: bk.DensityMatrix) -> np.ndarray:
    """Every component from the trace formula, no shared code with the library."""
    n = rho.n_qubits
    out = np.empty((4,) * n)
    for idx in np.ndindex(*(4,) * n):
        op = kron_chain([SIGMA[i] for i in idx])
        out[idx] = np.trace(rho.matrix @ op).real
    return out


def random_pure(rng, n) -> bk.PureState:
    amps = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return bk.PureState(n, amps / np.linalg.norm(amps))


def test_singlet_tensor_is_minus_identity():
    tensor = bk.correlation_tensor(bk.density_from_pure(bk.singlet()))
    corr = tensor.correlation_part()
    assert np.allclose(corr, -np.eye(3), atol=1e-12)
    assert tensor.components[0, 0] == pytest.approx(1.0, abs=1e-12)
    # marginals of the singlet vanish
    assert np.allclose(tensor.components[0, 1:], 0.0, atol=1e-12)
    assert np.allclose(tensor.components[1:, 0], 0.0, atol=1e-12)


def test_maximally_mixed_tensor():
    rho = bk.DensityMatrix(2, np.eye(4, dtype=complex) / 4)
    tensor = bk.correlation_tensor(rho)
    expected = np.zeros((4, 4))
    expected[0, 0] = 1.0
    assert np.allclose(tensor.components, expected, atol=1e-12)


def test_schmidt_state_tensor_components():
    for alpha in (0.0, 0.2, np.pi / 8, np.pi / 4):
        state = bk.ghz_state(bk.GhzFamily(2, alpha))
        tensor = bk.correlation_tensor(bk.density_from_pure(state))
        s = np.sin(2 * alpha)
        assert tensor.components[1, 1] == pytest.approx(s, abs=1e-12)
        assert tensor.components[2, 2] == pytest.approx(-s, abs=1e-12)
        assert tensor.components[3, 3] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_tensor_matches_trace_oracle(n):
    rng = np.random.default_rng(7 + n)
    for _ in range(3):
        rho = bk.density_from_pure(random_pure(rng, n))
        tensor = bk.correlation_tensor(rho)
        assert np.allclose(tensor.components, oracle_tensor(rho), atol=1e-12)


def test_density_from_pure_examples():
    ket0 = bk.PureState(1, np.array([1.0, 0.0], dtype=complex))
    assert np.allclose(bk.density_from_pure(ket0).matrix, np.diag([1.0, 0.0]))

    rho = bk.density_from_pure(bk.singlet()).matrix
    expected = np.zeros((4, 4), dtype=complex)
    expected[1, 1] = expected[2, 2] = 0.5
    expected[1, 2] = expected[2, 1] = -0.5
    assert np.allclose(rho, expected, atol=1e-12)

    bell = bk.PureState(2, np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2))
    rho = bk.density_from_pure(bell).matrix
    assert np.trace(rho) == pytest.approx(1.0)
    assert np.trace(rho @ rho).real == pytest.approx(1.0, abs=1e-12)


def test_quantum_correlation_singlet_axes():
    tensor = bk.correlation_tensor(bk.density_from_pure(bk.singlet()))
    z = bk.SettingVector.unit(0, 0, 1)
    x = bk.SettingVector.unit(1, 0, 0)
    assert bk.quantum_correlation(tensor, [z, z]) == pytest.approx(-1.0, abs=1e-12)
    assert bk.quantum_correlation(tensor, [z, x]) == pytest.approx(0.0, abs=1e-12)
    # negating one party's vector negates the value
    mz = bk.SettingVector.unit(0, 0, -1)
    assert bk.quantum_correlation(tensor, [z, mz]) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_quantum_correlation_matches_expectation_oracle(n):
    rng = np.random.default_rng(100 + n)
    state = random_pure(rng, n)
    tensor = bk.correlation_tensor(bk.density_from_pure(state))
    for _ in range(5):
        vecs = rng.normal(size=(n, 3))
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        settings_list = [bk.SettingVector(v) for v in vecs]
        got = bk.quantum_correlation(tensor, settings_list)
        op = kron_chain([sum(v[i] * SIGMA[i + 1] for i in range(3)) for v in vecs])
        want = (state.amplitudes.conj() @ op @ state.amplitudes).real
        assert got == pytest.approx(want, abs=1e-10)


def test_product_state_tensor_factorizes():
    rng = np.random.default_rng(5)
    a = random_pure(rng, 1)
    b = random_pure(rng, 2)
    joint = bk.PureState(3, np.kron(a.amplitudes, b.amplitudes))
    ta = bk.correlation_tensor(bk.density_from_pure(a)).components
    tb = bk.correlation_tensor(bk.density_from_pure(b)).components
    tj = bk.correlation_tensor(bk.density_from_pure(joint)).components
    assert np.allclose(tj, np.einsum("a,bc->abc", ta, tb), atol=1e-10)


def test_quantum_correlation_is_multilinear():
    rng = np.random.default_rng(11)
    tensor = bk.correlation_tensor(bk.density_from_pure(random_pure(rng, 2)))
    b = rng.normal(size=3)
    b /= np.linalg.norm(b)
    u = rng.normal(size=3)
    v = rng.normal(size=3)
    u /= np.linalg.norm(u)
    v /= np.linalg.norm(v)
    c, d = 0.7, -1.3
    w = c * u + d * v
    norm = np.linalg.norm(w)
    lhs = norm * bk.quantum_correlation(tensor, [bk.SettingVector(w / norm), bk.SettingVector(b)])
    rhs = c * bk.quantum_correlation(tensor, [bk.SettingVector(u), bk.SettingVector(b)]) + \
        d * bk.quantum_correlation(tensor, [bk.SettingVector(v), bk.SettingVector(b)])
    assert lhs == pytest.approx(rhs, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=4, max_size=4))
def test_random_two_qubit_states_match_oracle(pairs):
    raw = np.array([complex(re, im) for re, im in pairs])
    norm = np.linalg.norm(raw)
    if norm < 1e-3:
        return
    state = bk.PureState(2, raw / norm)
    rho = bk.density_from_pure(state)
    tensor = bk.correlation_tensor(rho)
    assert np.allclose(tensor.components, oracle_tensor(rho), atol=1e-10)


def test_state_validation():
    with pytest.raises(ValueError):
        bk.PureState(1, np.array([1.0, 1.0], dtype=complex))
    with pytest.raises(ValueError):
        bk.PureState(2, np.array([1.0, 0.0], dtype=complex))
    with pytest.raises(ValueError):
        bk.DensityMatrix(1, np.array([[1.0, 1.0], [0.0, 0.0]], dtype=complex))
    with pytest.raises(ValueError):
        bk.SettingVector(np.array([1.0, 1.0, 0.0]))
    with pytest.raises(ValueError):
        bk.LocalFrame(bk.SettingVector.unit(1, 0, 0), bk.SettingVector.unit(1, 1, 0))


def test_tensor_qubit_cap():
    rng = np.random.default_rng(2)
    rho = bk.density_from_pure(random_pure(rng, 3))
    with pytest.raises(bk.ResourceLimitError):
        bk.correlation_tensor(rho, max_qubits=2)


def test_state_json_round_trip():
    rng = np.random.default_rng(3)
    state = random_pure(rng, 2)
    data = json.loads(json.dumps(state.to_json_dict()))
    assert set(data) == {"n_qubits", "amplitudes"}
    back = bk.PureState.from_json_dict(data)
    assert np.allclose(back.amplitudes, state.amplitudes, atol=1e-15)


def test_tensor_json_round_trip():
    tensor = bk.correlation_tensor(bk.density_from_pure(bk.singlet()))
    data = json.loads(json.dumps(tensor.to_json_dict()))
    assert set(data) == {"n_qubits", "full_components"}
    back = bk.CorrelationTensor.from_json_dict(data)
    assert np.allclose(back.components, tensor.components, atol=1e-15)
