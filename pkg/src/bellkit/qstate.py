"""Multiqubit states, correlation tensors, and measurement geometry.

Correlation data for N qubits is held as the dense tensor

    T[k1, ..., kN] = Tr(rho * sigma_k1 x ... x sigma_kN),   k in {0, 1, 2, 3}

with sigma_0 the identity and sigma_1, sigma_2, sigma_3 the Pauli x, y, z
matrices.  The k=0 slots carry marginal information; the correlation part
proper is the restriction to k in {1, 2, 3}.  Spin measurement directions
are unit 3-vectors; E(a_1, ..., a_N) is the contraction of the correlation
part with one direction per qubit.

All value types are immutable after construction (arrays are copied in and
marked read-only), so instances are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ResourceLimitError

PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=np.complex128,
)

#: Dense 4**N tensors get expensive fast; refuse larger systems by default.
MAX_QUBITS = 10


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class PureState:
    """State vector of n qubits in the computational basis, norm 1."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2**self.n_qubits,):
            raise ValueError(
                f"expected {2**self.n_qubits} amplitudes, got shape {amps.shape}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state vector norm {norm!r} is not 1 within 1e-12")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    def to_json_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "PureState":
        n = int(data["n_qubits"])
        amps = np.array([complex(re, im) for re, im in data["amplitudes"]])
        return cls(n, amps)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite operator on n qubits."""

    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        dim = 2**self.n_qubits
        mat = np.asarray(self.matrix, dtype=np.complex128)
        if mat.shape != (dim, dim):
            raise ValueError(f"expected shape {(dim, dim)}, got {mat.shape}")
        if np.max(np.abs(mat - mat.conj().T)) > 1e-12:
            raise ValueError("matrix is not Hermitian within 1e-12")
        tr = np.trace(mat).real
        if abs(tr - 1.0) > 1e-12:
            raise ValueError(f"trace {tr!r} is not 1 within 1e-12")
        if np.min(np.linalg.eigvalsh(mat)) < -1e-10:
            raise ValueError("matrix has an eigenvalue below -1e-10")
        object.__setattr__(self, "matrix", _frozen(mat))


@dataclass(frozen=True)
class SettingVector:
    """Unit vector in R^3: a spin measurement direction."""

    components: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.components, dtype=np.float64)
        if vec.shape != (3,):
            raise ValueError("a setting vector has exactly 3 components")
        if abs(np.linalg.norm(vec) - 1.0) > 1e-12:
            raise ValueError("setting vector is not unit length within 1e-12")
        object.__setattr__(self, "components", _frozen(vec))

    @classmethod
    def unit(cls, x: float, y: float, z: float) -> "SettingVector":
        """Build from an unnormalized direction (must be nonzero)."""
        vec = np.array([x, y, z], dtype=np.float64)
        norm = np.linalg.norm(vec)
        if norm < 1e-14:
            raise ValueError("cannot normalize the zero vector")
        return cls(vec / norm)


@dataclass(frozen=True)
class LocalFrame:
    """Ordered pair of orthonormal axes spanning one observer's plane."""

    axis1: SettingVector
    axis2: SettingVector

    def __post_init__(self):
        dot = float(self.axis1.components @ self.axis2.components)
        if abs(dot) > 1e-10:
            raise ValueError(f"frame axes are not orthogonal (dot={dot!r})")

    def as_matrix(self) -> np.ndarray:
        return np.stack([self.axis1.components, self.axis2.components])


@dataclass(frozen=True)
class CorrelationTensor:
    """Dense tensor of Pauli expectation values for an n-qubit state."""

    n_qubits: int
    components: np.ndarray

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        if self.n_qubits > MAX_QUBITS:
            raise ResourceLimitError(
                f"dense tensors are capped at {MAX_QUBITS} qubits"
            )
        comp = np.asarray(self.components, dtype=np.float64)
        if comp.shape != (4,) * self.n_qubits:
            raise ValueError(f"expected shape {(4,) * self.n_qubits}, got {comp.shape}")
        if abs(comp[(0,) * self.n_qubits] - 1.0) > 1e-12:
            raise ValueError("identity component must be 1 within 1e-12")
        if np.max(np.abs(comp)) > 1.0 + 1e-9:
            raise ValueError("components must lie in [-1, 1] within 1e-9")
        object.__setattr__(self, "components", _frozen(comp))

    def correlation_part(self) -> np.ndarray:
        """The {x,y,z}-only block, shape (3,)*n_qubits."""
        return self.components[(slice(1, 4),) * self.n_qubits]

    def to_json_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "full_components": self.components.tolist(),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "CorrelationTensor":
        return cls(int(data["n_qubits"]), np.array(data["full_components"], dtype=float))


def density_from_pure(state: PureState) -> DensityMatrix:
    """Outer product |psi><psi| as a DensityMatrix."""
    psi = state.amplitudes
    return DensityMatrix(state.n_qubits, np.outer(psi, psi.conj()))


def correlation_tensor(rho: DensityMatrix, max_qubits: int = MAX_QUBITS) -> CorrelationTensor:
    """Compute all 4**N Pauli expectation values of a density matrix.

    Contracts one qubit at a time against the Pauli stack, so the cost is
    O(N 4**N) rather than one trace per component.
    """
    n = rho.n_qubits
    if n > max_qubits:
        raise ResourceLimitError(f"dense tensors are capped at {max_qubits} qubits")
    # X starts as rho with row/column indices split per qubit; after step t the
    # leading axis enumerates Pauli labels for qubits 1..t.
    x = rho.matrix.reshape((1, 2**n, 2**n))
    for t in range(n):
        rest = 2 ** (n - t - 1)
        x = x.reshape((4**t, 2, rest, 2, rest))
        # new[m, k, i, j] = sum_ab PAULI[k, b, a] * x[m, a, i, b, j]
        x = np.einsum("kba,maibj->mkij", PAULI, x)
        x = x.reshape((4 ** (t + 1), rest, rest))
    values = x.reshape((4,) * n).real
    return CorrelationTensor(n, values)


def quantum_correlation(tensor: CorrelationTensor, settings: list[SettingVector]) -> float:
    """E(a_1, ..., a_N): correlation part contracted with one direction per qubit.

    Directions must be unit vectors; the result of a physical tensor lies in
    [-1, 1] and is checked to that range within 1e-9.
    """
    n = tensor.n_qubits
    if len(settings) != n:
        raise ValueError(f"expected {n} setting vectors, got {len(settings)}")
    # Contracting the full tensor with (0, a) per qubit kills every k=0 slot,
    # which is exactly the correlation-part contraction.
    value = tensor.components
    for vec in settings:
        ext = np.concatenate(([0.0], vec.components))
        value = np.tensordot(ext, value, axes=([0], [0]))
    value = float(value)
    if abs(value) > 1.0 + 1e-9:
        raise ValueError(f"correlation value {value!r} outside [-1, 1]")
    return value
