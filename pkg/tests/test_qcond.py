"""Violation conditions and the see-saw maximizer."""
import json

import numpy as np
import pytest

import bellkit as bk

SQ2 = np.sqrt(2)


def random_pure(rng, n) -> bk.PureState:
    amps = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return bk.PureState(n, amps / np.linalg.norm(amps))


def tensor_of(state: bk.PureState) -> bk.CorrelationTensor:
    return bk.correlation_tensor(bk.density_from_pure(state))


def ghz_tensor(n, alpha) -> bk.CorrelationTensor:
    return tensor_of(bk.ghz_state(bk.GhzFamily(n, alpha)))


def rotate_tensor(tensor: bk.CorrelationTensor, rotations) -> bk.CorrelationTensor:
    """Independent local frame change: rotate the Pauli axes of each qubit."""
    full = np.asarray(tensor.components)
    for j, r in enumerate(rotations):
        ext = np.zeros((4, 4))
        ext[0, 0] = 1.0
        ext[1:, 1:] = r
        full = np.moveaxis(np.tensordot(ext, full, axes=([1], [j])), 0, j)
    return bk.CorrelationTensor(tensor.n_qubits, full)


def random_rotation(rng) -> np.ndarray:
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def display_chsh() -> bk.BellInequality:
    layout = bk.ExperimentLayout((2, 2))
    return bk.BellInequality(layout, np.array([[1, 1], [1, -1]], dtype=np.int64), 2)


def display_mermin() -> bk.BellInequality:
    coeffs = np.zeros((2, 2, 2), dtype=np.int64)
    coeffs[1, 0, 0] = coeffs[0, 1, 0] = coeffs[0, 0, 1] = 1
    coeffs[1, 1, 1] = -1
    return bk.BellInequality(bk.ExperimentLayout((2, 2, 2)), coeffs, 2)


# ---------------------------------------------------------------------------
# two-qubit closed form


def test_two_qubit_singlet():
    report = bk.condition_two_qubit(tensor_of(bk.singlet()))
    assert report.value == pytest.approx(2.0, abs=1e-9)
    assert report.violated
    assert report.certified == "exact"
    assert report.seed is None


def test_two_qubit_product_state():
    state = bk.PureState(2, np.array([1, 0, 0, 0], dtype=complex))
    report = bk.condition_two_qubit(tensor_of(state))
    assert report.value == pytest.approx(1.0, abs=1e-12)
    assert not report.violated


def test_two_qubit_schmidt_family():
    for alpha in np.linspace(0.0, np.pi / 4, 7):
        report = bk.condition_two_qubit(ghz_tensor(2, alpha))
        assert report.value == pytest.approx(1 + np.sin(2 * alpha) ** 2, abs=1e-12)


def test_two_qubit_rejects_other_sizes():
    with pytest.raises(ValueError):
        bk.condition_two_qubit(ghz_tensor(3, 0.1))


# ---------------------------------------------------------------------------
# N-party two-setting condition


def test_two_setting_ghz3_maximal():
    report = bk.condition_two_setting_N(ghz_tensor(3, np.pi / 4), restarts=20, seed=0)
    assert report.value == pytest.approx(4.0, abs=1e-7)
    assert report.violated
    assert report.certified == "lower_bound"


def test_two_setting_threshold_value():
    # at sin(2a) = 1/2 the x-y planes and the z-containing planes tie at 1
    alpha = np.arcsin(0.5) / 2
    report = bk.condition_two_setting_N(ghz_tensor(3, alpha), restarts=20, seed=0)
    assert report.value == pytest.approx(1.0, abs=1e-9)
    assert not report.violated


def test_two_setting_even_n_violates_below_threshold():
    report = bk.condition_two_setting_N(ghz_tensor(4, 0.1), restarts=20, seed=0)
    assert report.value == pytest.approx(1 + np.sin(0.2) ** 2, abs=1e-7)
    assert report.violated


def test_two_setting_matches_two_qubit_closed_form():
    rng = np.random.default_rng(31)
    for _ in range(4):
        tensor = tensor_of(random_pure(rng, 2))
        exact = bk.condition_two_qubit(tensor).value
        sweep = bk.condition_two_setting_N(tensor, restarts=15, seed=1).value
        assert sweep == pytest.approx(exact, abs=1e-9)


def test_two_setting_report_frames_shape():
    report = bk.condition_two_setting_N(ghz_tensor(3, 0.3), restarts=5, seed=0)
    frames = np.array(report.frames)
    assert frames.shape == (3, 2, 3)
    for party_frame in frames:
        gram = party_frame @ party_frame.T
        assert np.allclose(gram, np.eye(2), atol=1e-9)


# ---------------------------------------------------------------------------
# multisetting C_N


def test_cn_reduces_to_two_qubit():
    rng = np.random.default_rng(5)
    for _ in range(4):
        tensor = tensor_of(random_pure(rng, 2))
        assert bk.condition_multisetting_CN(tensor).value == pytest.approx(
            bk.condition_two_qubit(tensor).value, abs=1e-12
        )


def test_cn_ghz_lower_bound_formula():
    for n in (3, 4, 5):
        for alpha in (0.05, 0.2, np.pi / 8, np.pi / 4):
            report = bk.condition_multisetting_CN(ghz_tensor(n, alpha), restarts=10, seed=0)
            s2 = np.sin(2 * alpha) ** 2
            want = 2 ** (n - 2) * s2 + (1 - s2)
            assert report.value >= want - 1e-9
            assert report.violated  # > 1 for every alpha > 0


def test_cn_dominates_two_setting():
    rng = np.random.default_rng(77)
    for _ in range(3):
        tensor = tensor_of(random_pure(rng, 3))
        two = bk.condition_two_setting_N(tensor, restarts=10, seed=0).value
        cn = bk.condition_multisetting_CN(tensor, restarts=10, seed=0).value
        assert cn >= two - 1e-8


def test_cn_shared_plane_identity():
    """With one shared frame set, the two-setting objective splits by trailing
    index into per-slice plane-restricted Frobenius norms."""
    rng = np.random.default_rng(13)
    corr = tensor_of(random_pure(rng, 3)).correlation_part()
    for _ in range(3):
        planes = []
        for _ in range(3):
            q, _ = np.linalg.qr(rng.normal(size=(3, 2)))
            planes.append(q.T)
        # two-setting objective at these frames
        t = corr
        for j, p in enumerate(planes):
            t = np.moveaxis(np.tensordot(p, t, axes=([1], [j])), 0, j)
        direct = float(np.sum(t**2))
        # split over the third party's two plane axes
        split = 0.0
        for axis in planes[2]:
            m = np.tensordot(corr, axis, axes=([2], [0]))
            restricted = planes[0] @ m @ planes[1].T
            split += float(np.sum(restricted**2))
        assert split == pytest.approx(direct, abs=1e-10)


def test_cn_report_frames_json_shape():
    report = bk.condition_multisetting_CN(ghz_tensor(3, 0.2), restarts=5, seed=0)
    data = report.to_json_dict()
    assert set(data) == {"kind", "value", "violated", "frames", "certified", "seed"}
    json.dumps(data)  # serializable
    assert len(data["frames"]) == 2  # one entry per trailing index tuple
    for entry in data["frames"]:
        assert set(entry) == {"term", "frames"}
        assert len(entry["term"]) == 1  # N - 2 trailing indices
        assert entry["term"][0] in (1, 2)


# ---------------------------------------------------------------------------
# frame invariance


def test_conditions_invariant_under_local_rotations():
    rng = np.random.default_rng(4)
    base2 = ghz_tensor(2, 0.3)
    base3 = ghz_tensor(3, 0.3)
    for _ in range(2):
        rot2 = rotate_tensor(base2, [random_rotation(rng) for _ in range(2)])
        assert bk.condition_two_qubit(rot2).value == pytest.approx(
            bk.condition_two_qubit(base2).value, abs=1e-8
        )
        rot3 = rotate_tensor(base3, [random_rotation(rng) for _ in range(3)])
        assert bk.condition_two_setting_N(rot3, restarts=15, seed=0).value == pytest.approx(
            bk.condition_two_setting_N(base3, restarts=15, seed=0).value, abs=1e-8
        )
        assert bk.condition_multisetting_CN(rot3, restarts=15, seed=0).value == pytest.approx(
            bk.condition_multisetting_CN(base3, restarts=15, seed=0).value, abs=1e-8
        )


# ---------------------------------------------------------------------------
# see-saw maximizer


def test_seesaw_chsh_singlet():
    result = bk.maximize_bell_value(display_chsh(), tensor_of(bk.singlet()),
                                    restarts=10, seed=0)
    assert result.value == pytest.approx(2 * SQ2, abs=1e-6)
    assert result.converged


def test_seesaw_mermin_ghz():
    result = bk.maximize_bell_value(display_mermin(), ghz_tensor(3, np.pi / 4),
                                    restarts=10, seed=0)
    assert abs(result.value) == pytest.approx(4.0, abs=1e-6)


def test_seesaw_product_state_reaches_classical_bound():
    state = bk.PureState(2, np.array([1, 0, 0, 0], dtype=complex))
    result = bk.maximize_bell_value(display_chsh(), tensor_of(state), restarts=10, seed=0)
    assert result.value == pytest.approx(2.0, abs=1e-6)


def test_seesaw_value_formula_two_qubit():
    # the family optimum over settings is 2 sqrt(condition value)
    rng = np.random.default_rng(19)
    for _ in range(3):
        tensor = tensor_of(random_pure(rng, 2))
        cond = bk.condition_two_qubit(tensor).value
        result = bk.maximize_bell_value(display_chsh(), tensor, restarts=15, seed=0)
        assert result.value == pytest.approx(2 * np.sqrt(cond), abs=1e-6)


def test_seesaw_monotone_history():
    tensor = ghz_tensor(3, 0.25)
    ineq = bk.sign_inequality(bk.SignFunction.from_bitstring("00010111"))
    result = bk.maximize_bell_value(ineq, tensor, restarts=3, seed=2)
    diffs = np.diff(np.array(result.history))
    assert np.all(diffs >= -1e-12)


def test_seesaw_degenerate_tensor():
    mixed = bk.DensityMatrix(2, np.eye(4, dtype=complex) / 4)
    result = bk.maximize_bell_value(display_chsh(), bk.correlation_tensor(mixed),
                                    restarts=2, seed=0)
    assert result.value == pytest.approx(0.0, abs=1e-12)
    assert result.degenerate_updates > 0


def test_seesaw_validation():
    with pytest.raises(ValueError):
        bk.maximize_bell_value(display_chsh(), ghz_tensor(3, 0.1))
    with pytest.raises(ValueError):
        bk.maximize_bell_value(display_chsh(), tensor_of(bk.singlet()), restarts=0)


def test_maximization_result_json():
    result = bk.maximize_bell_value(display_chsh(), tensor_of(bk.singlet()),
                                    restarts=2, seed=0)
    data = result.to_json_dict()
    assert set(data) == {"value", "settings", "converged", "degenerate_updates", "seed"}
    json.dumps(data)
    assert len(data["settings"]) == 2
    assert len(data["settings"][0]) == 2


# ---------------------------------------------------------------------------
# condition > 1 pairs with an explicit family violation and an LP certificate


def quantum_table(tensor: bk.CorrelationTensor, settings) -> bk.CorrelationTable:
    layout = bk.ExperimentLayout(tuple(len(s) for s in settings))
    values = np.empty(layout.shape)
    for idx in np.ndindex(*layout.shape):
        vecs = [bk.SettingVector(settings[j][k]) for j, k in enumerate(idx)]
        values[idx] = bk.quantum_correlation(tensor, vecs)
    return bk.CorrelationTable(layout, values)


@pytest.mark.parametrize("make_tensor,n", [
    (lambda: tensor_of(bk.singlet()), 2),
    (lambda: ghz_tensor(3, np.pi / 4), 3),
])
def test_condition_violation_yields_family_violation(make_tensor, n):
    tensor = make_tensor()
    cond = (bk.condition_two_qubit(tensor) if n == 2
            else bk.condition_two_setting_N(tensor, restarts=10, seed=0))
    assert cond.violated

    best = None
    for sign in bk.enumerate_sign_functions(n):
        ineq = bk.sign_inequality(sign)
        result = bk.maximize_bell_value(ineq, tensor, restarts=3, seed=0, max_sweeps=200)
        if best is None or result.value - float(ineq.bound) > best[0]:
            best = (result.value - float(ineq.bound), result)
    excess, result = best
    assert excess > 1e-6

    table = quantum_table(tensor, result.settings)
    membership = bk.polytope_membership(table)
    assert not membership.inside
    cert = membership.certificate
    value = float(np.sum(cert.coefficients * table.values))
    assert value > cert.bound + 1e-9
