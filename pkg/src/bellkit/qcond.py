"""Quantum violation conditions on correlation tensors.

Three condition values are computed, each compared against 1:

* two_setting_NS_2qubit: for two qubits, the sum of the two largest
  eigenvalues of M^T M with M the 3x3 correlation matrix.  Exceeding 1 is
  necessary and sufficient for violating some two-setting member; exact.

* two_setting_sufficient_N: max over one measurement plane per party of the
  sum of squared correlation components with every index in the plane.
  Computed by alternating per-party plane updates (top-2 eigenvectors of the
  party's contracted positive matrix) from random restarts, so the reported
  value is a certified lower bound on the true maximum.

* multisetting_CN: the recursive condition behind the 4 x ... x 4 x 2
  family.  Parties 1 and 2 get independent planes per trailing index tuple
  (closed form: two largest eigenvalues of M_t M_t^T); each trailing party
  gets one plane per branch of the indices behind it.  Exact for N=2,
  otherwise an optimizer lower bound.

maximize_bell_value runs see-saw ascent on an arbitrary inequality: each
per-party, per-setting vector update is the normalized contraction of the
coefficient tensor with all other current vectors, which is the exact
optimum for that vector and never decreases the objective.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .lhv import BellInequality
from .qstate import CorrelationTensor

VIOLATION_MARGIN = 1e-9

_CANONICAL_PLANES = (
    np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
    np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
    np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
)


@dataclass(frozen=True)
class FrameAssignment:
    """Orthonormal 2x3 frame rows for each party, one list entry per party."""

    frames: tuple[np.ndarray, ...]

    def __post_init__(self):
        frozen = []
        for f in self.frames:
            arr = np.asarray(f, dtype=np.float64)
            if arr.shape != (2, 3):
                raise ValueError("each frame is a 2x3 array of axis rows")
            if np.max(np.abs(arr @ arr.T - np.eye(2))) > 1e-8:
                raise ValueError("frame rows must be orthonormal")
            arr = arr.copy()
            arr.flags.writeable = False
            frozen.append(arr)
        object.__setattr__(self, "frames", tuple(frozen))


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of one condition evaluation."""

    kind: str
    value: float
    violated: bool
    frames: Any
    certified: str
    seed: int | None

    def __post_init__(self):
        if self.kind not in (
            "two_setting_NS_2qubit",
            "two_setting_sufficient_N",
            "multisetting_CN",
        ):
            raise ValueError(f"unknown condition kind {self.kind!r}")
        if self.certified not in ("exact", "lower_bound"):
            raise ValueError("certified must be 'exact' or 'lower_bound'")
        if self.value < 0:
            raise ValueError("condition values are nonnegative")
        if self.violated != (self.value > 1 + VIOLATION_MARGIN):
            raise ValueError("violated flag inconsistent with value")

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "value": self.value,
            "violated": self.violated,
            "frames": self.frames,
            "certified": self.certified,
            "seed": self.seed,
        }


def _frames_json(frames: list[np.ndarray]) -> list:
    return [f.tolist() for f in frames]


def condition_two_qubit(tensor: CorrelationTensor) -> ConditionReport:
    """Sum of the two largest eigenvalues of M^T M for a two-qubit tensor."""
    if tensor.n_qubits != 2:
        raise ValueError("this condition applies to exactly 2 qubits")
    m = tensor.correlation_part()
    u, s, vt = np.linalg.svd(m)
    value = float(s[0] ** 2 + s[1] ** 2)
    frames = [u[:, :2].T.copy(), vt[:2].copy()]
    return ConditionReport(
        kind="two_setting_NS_2qubit",
        value=value,
        violated=value > 1 + VIOLATION_MARGIN,
        frames=_frames_json(frames),
        certified="exact",
        seed=None,
    )


def _random_plane(rng: np.random.Generator) -> np.ndarray:
    q, _ = np.linalg.qr(rng.normal(size=(3, 2)))
    return q.T.copy()


def _contract_axis(grid: np.ndarray, axis: int, rows: np.ndarray) -> np.ndarray:
    """Replace one tensor axis by contraction with a stack of row vectors."""
    out = np.tensordot(rows, grid, axes=([rows.ndim - 1], [axis]))
    return np.moveaxis(out, 0, axis)


def _plane_objective(corr: np.ndarray, planes: list[np.ndarray]) -> float:
    grid = corr
    for j, plane in enumerate(planes):
        grid = _contract_axis(grid, j, plane)
    return float(np.sum(grid**2))


def _two_setting_sweeps(corr: np.ndarray, planes: list[np.ndarray],
                        max_sweeps: int, tol: float) -> tuple[float, list[np.ndarray], bool]:
    n = corr.ndim
    value = _plane_objective(corr, planes)
    for _ in range(max_sweeps):
        previous = value
        for j in range(n):
            # contract every other party into its plane; axis j stays 3-dim
            grid = corr
            for l in range(n):
                if l != j:
                    grid = _contract_axis(grid, l, planes[l])
            u = np.moveaxis(grid, j, -1).reshape(-1, 3)
            g = u.T @ u
            eigvals, eigvecs = np.linalg.eigh(g)
            planes[j] = eigvecs[:, [2, 1]].T.copy()
            value = float(eigvals[-1] + eigvals[-2])
        if value - previous <= tol:
            return value, planes, True
    return value, planes, False


def condition_two_setting_N(tensor: CorrelationTensor, restarts: int = 50,
                            seed: int = 0, max_sweeps: int = 500,
                            tol: float = 1e-10) -> ConditionReport:
    """Maximize the in-plane squared correlation sum over per-party planes."""
    n = tensor.n_qubits
    if n < 2:
        raise ValueError("need at least 2 parties")
    if restarts < 1:
        raise ValueError("need at least one restart")
    corr = tensor.correlation_part()
    rng = np.random.default_rng(seed)
    best_value = -np.inf
    best_planes: list[np.ndarray] | None = None
    for start in range(restarts):
        if start < len(_CANONICAL_PLANES):
            planes = [_CANONICAL_PLANES[start].copy() for _ in range(n)]
        else:
            planes = [_random_plane(rng) for _ in range(n)]
        value, planes, _ = _two_setting_sweeps(corr, planes, max_sweeps, tol)
        if value > best_value:
            best_value = value
            best_planes = planes
    # report the value the frames actually attain
    best_value = _plane_objective(corr, best_planes)
    return ConditionReport(
        kind="two_setting_sufficient_N",
        value=best_value,
        violated=best_value > 1 + VIOLATION_MARGIN,
        frames=_frames_json(best_planes),
        certified="lower_bound",
        seed=seed,
    )


def _top_two_sum(m: np.ndarray) -> float:
    s = np.linalg.svd(m, compute_uv=False)
    return float(s[0] ** 2 + s[1] ** 2)


def _orthonormal_pair_ascent(g1: np.ndarray, g2: np.ndarray, a: np.ndarray,
                             b: np.ndarray, iters: int = 30) -> tuple[np.ndarray, np.ndarray]:
    """Maximize a.g1.a + b.g2.b over orthonormal pairs, never decreasing it."""

    def best_perp(g: np.ndarray, fixed: np.ndarray, current: np.ndarray) -> np.ndarray:
        # 2x2 eigenproblem in the plane orthogonal to `fixed`
        seed_axis = np.eye(3)[np.argmin(np.abs(fixed))]
        q1 = seed_axis - (seed_axis @ fixed) * fixed
        q1 /= np.linalg.norm(q1)
        q2 = np.cross(fixed, q1)
        basis = np.stack([q1, q2])
        small = basis @ g @ basis.T
        eigvals, eigvecs = np.linalg.eigh(small)
        candidate = eigvecs[:, -1] @ basis
        if candidate @ g @ candidate >= current @ g @ current:
            return candidate
        return current

    obj = a @ g1 @ a + b @ g2 @ b
    for _ in range(iters):
        a = best_perp(g1, b, a)
        b = best_perp(g2, a, b)
        new_obj = a @ g1 @ a + b @ g2 @ b
        if new_obj - obj <= 1e-14:
            break
        obj = new_obj
    return a, b


class _TrailingFrames:
    """One orthonormal plane per (party, branch) node of the recursion tree.

    Party j in 3..N holds 2^(N-j) planes, keyed by the index tuple of the
    parties behind it; terms are tuples over parties 3..N with entries 0/1.
    """

    def __init__(self, n_parties: int, init):
        self.n = n_parties
        self.planes = {}
        for j in range(3, n_parties + 1):
            for branch in np.ndindex(*(2,) * (n_parties - j)):
                self.planes[(j, tuple(branch))] = init(j, tuple(branch))

    def axis(self, j: int, term: tuple[int, ...]) -> np.ndarray:
        branch = term[j - 2:]
        return self.planes[(j, branch)][term[j - 3]]

    def plane_nodes(self):
        return sorted(self.planes.keys())


def _cn_slice(corr: np.ndarray, frames: _TrailingFrames, term: tuple[int, ...]) -> np.ndarray:
    grid = corr
    for j in range(frames.n, 2, -1):
        grid = np.tensordot(grid, frames.axis(j, term), axes=([j - 1], [0]))
    return grid


def _cn_value(corr: np.ndarray, frames: _TrailingFrames) -> float:
    n = frames.n
    total = 0.0
    for term in np.ndindex(*(2,) * (n - 2)):
        total += _top_two_sum(_cn_slice(corr, frames, term))
    return total


def _cn_sweeps(corr: np.ndarray, frames: _TrailingFrames, max_sweeps: int,
               tol: float) -> float:
    n = frames.n
    value = _cn_value(corr, frames)
    for _ in range(max_sweeps):
        previous = value
        for (j, branch) in frames.plane_nodes():
            g = [np.zeros((3, 3)), np.zeros((3, 3))]
            free = j - 3  # position of party j inside the term tuple
            for term in np.ndindex(*(2,) * (n - 2)):
                if term[j - 2:] != branch:
                    continue
                m = _cn_slice(corr, frames, term)
                u, s, vt = np.linalg.svd(m)
                # gradient vectors for party j with the top singular frames fixed
                grid = corr
                for l in range(n, 2, -1):
                    if l != j:
                        grid = np.tensordot(grid, frames.axis(l, term), axes=([l - 1], [0]))
                # grid axes now (party1, party2, party j)
                for k in range(2):
                    for m2 in range(2):
                        vec = np.einsum("i,j,ijq->q", u[:, k], vt[m2], grid)
                        g[term[free]] += np.outer(vec, vec)
            plane = frames.planes[(j, branch)]
            a, b = _orthonormal_pair_ascent(g[0], g[1], plane[0].copy(), plane[1].copy())
            frames.planes[(j, branch)] = np.stack([a, b])
        value = _cn_value(corr, frames)
        if value - previous <= tol:
            break
    return value


def condition_multisetting_CN(tensor: CorrelationTensor, restarts: int = 50,
                              seed: int = 0, max_sweeps: int = 500,
                              tol: float = 1e-10) -> ConditionReport:
    """Recursive multisetting condition with branch-dependent trailing planes."""
    n = tensor.n_qubits
    if n < 2:
        raise ValueError("need at least 2 parties")
    corr = tensor.correlation_part()

    if n == 2:
        u, s, vt = np.linalg.svd(corr)
        value = float(s[0] ** 2 + s[1] ** 2)
        term = {"term": [], "frames": _frames_json([u[:, :2].T.copy(), vt[:2].copy()])}
        return ConditionReport(
            kind="multisetting_CN",
            value=value,
            violated=value > 1 + VIOLATION_MARGIN,
            frames=[term],
            certified="exact",
            seed=seed,
        )

    rng = np.random.default_rng(seed)
    best_value = -np.inf
    best_frames: _TrailingFrames | None = None
    for start in range(restarts):
        if start < len(_CANONICAL_PLANES):
            init = lambda j, branch: _CANONICAL_PLANES[start].copy()
        elif start < 2 * len(_CANONICAL_PLANES):
            # alternate canonical planes along the branch depth
            init = lambda j, branch: _CANONICAL_PLANES[
                (start + j + sum(branch)) % len(_CANONICAL_PLANES)
            ].copy()
        else:
            init = lambda j, branch: _random_plane(rng)
        frames = _TrailingFrames(n, init)
        value = _cn_sweeps(corr, frames, max_sweeps, tol)
        if value > best_value:
            best_value = value
            best_frames = frames
    best_value = _cn_value(corr, best_frames)

    report_terms = []
    for term in np.ndindex(*(2,) * (n - 2)):
        m = _cn_slice(corr, best_frames, term)
        u, s, vt = np.linalg.svd(m)
        per_party = [u[:, :2].T.copy(), vt[:2].copy()]
        per_party += [best_frames.planes[(j, tuple(term[j - 2:]))] for j in range(3, n + 1)]
        report_terms.append({
            "term": [t + 1 for t in term],
            "frames": _frames_json(per_party),
        })
    return ConditionReport(
        kind="multisetting_CN",
        value=best_value,
        violated=best_value > 1 + VIOLATION_MARGIN,
        frames=report_terms,
        certified="lower_bound",
        seed=seed,
    )


@dataclass(frozen=True)
class MaximizationResult:
    """Best see-saw objective with the realizing measurement directions."""

    value: float
    settings: tuple[np.ndarray, ...]
    converged: bool
    degenerate_updates: int
    seed: int
    history: tuple[float, ...] = field(repr=False, default=())

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "settings": [s.tolist() for s in self.settings],
            "converged": self.converged,
            "degenerate_updates": self.degenerate_updates,
            "seed": self.seed,
        }


def _seesaw_value(coeff: np.ndarray, corr: np.ndarray, settings: list[np.ndarray]) -> float:
    grid = corr
    for j, rows in enumerate(settings):
        grid = _contract_axis(grid, j, rows)
    return float(np.sum(coeff * grid))


def _seesaw_run(coeff: np.ndarray, corr: np.ndarray, settings: list[np.ndarray],
                max_sweeps: int, tol: float) -> tuple[float, bool, int, list[float]]:
    n = corr.ndim
    other_axes = [[l for l in range(n) if l != j] for j in range(n)]
    degenerate = 0
    value = _seesaw_value(coeff, corr, settings)
    history = [value]
    converged = False
    for _ in range(max_sweeps):
        previous = value
        for j in range(n):
            grid = corr
            for l in range(n):
                if l != j:
                    grid = _contract_axis(grid, l, settings[l])
            env = np.tensordot(coeff, grid, axes=(other_axes[j], other_axes[j]))
            norms = np.linalg.norm(env, axis=1)
            rows = settings[j].copy()
            for k in range(rows.shape[0]):
                if norms[k] > 1e-14:
                    rows[k] = env[k] / norms[k]
                else:
                    degenerate += 1  # keep the previous vector
            settings[j] = rows
        value = _seesaw_value(coeff, corr, settings)
        history.append(value)
        if value - previous <= tol:
            converged = True
            break
    return value, converged, degenerate, history


def maximize_bell_value(ineq: BellInequality, tensor: CorrelationTensor,
                        restarts: int = 50, seed: int = 0, max_sweeps: int = 500,
                        tol: float = 1e-10) -> MaximizationResult:
    """See-saw ascent of sum_k c[k] E(k) over unit measurement directions.

    Returns the best run: a certified lower bound on the quantum maximum of
    the inequality expression for this tensor.
    """
    if ineq.layout.n_parties != tensor.n_qubits:
        raise ValueError("inequality and tensor party counts differ")
    if restarts < 1:
        raise ValueError("need at least one restart")
    coeff = ineq.coefficients.astype(np.float64)
    corr = tensor.correlation_part()
    rng = np.random.default_rng(seed)
    best: MaximizationResult | None = None
    for _ in range(restarts):
        settings = []
        for m in ineq.layout.settings_per_party:
            vecs = rng.normal(size=(m, 3))
            vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
            settings.append(vecs)
        value, converged, degenerate, history = _seesaw_run(
            coeff, corr, settings, max_sweeps, tol
        )
        if best is None or value > best.value:
            best = MaximizationResult(
                value=value,
                settings=tuple(s.copy() for s in settings),
                converged=converged,
                degenerate_updates=degenerate,
                seed=seed,
                history=tuple(history),
            )
    return best
