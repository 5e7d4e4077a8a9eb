"""Local hidden-variable analysis of correlation-function data.

An experiment layout fixes the number of measurement settings per party; a
correlation table holds one expectation value E(k_1, ..., k_N) per setting
combination.  For two settings per party the complete family of
correlation-function inequalities is indexed by sign functions
S: {-1,+1}^N -> {-1,+1}:

    | sum_s S(s) sum_k s_1^(k_1-1) ... s_N^(k_N-1) E(k) | <= 2^N

and summing the modulus over all s instead gives the single equivalent
condition general_bell_lhs(table) <= 2^N.  When that bound holds, an explicit
LHV model can be written down whose hidden probabilities are the rescaled
moduli of the transformed table.  For arbitrary layouts, membership in the
polytope spanned by deterministic strategies is decided by a phase-1 simplex
over the vertex list, returning either the convex weights or a separating
hyperplane as a violated Bell inequality.

Deterministic strategies are encoded as one unsigned integer per party with
bit k holding the outcome sign for setting k+1 (bit 0 means +1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import InequalityViolated, ResourceLimitError
from .simplex import solve_feasibility

#: Vertex enumeration refuses layouts with more strategies than this.
MAX_STRATEGIES = 2**20


@dataclass(frozen=True)
class ExperimentLayout:
    """Number of measurement settings for each of N >= 1 parties."""

    settings_per_party: tuple[int, ...]

    def __post_init__(self):
        m = tuple(int(v) for v in self.settings_per_party)
        if len(m) < 1 or any(v < 1 for v in m):
            raise ValueError("layout needs at least one party, each with >= 1 settings")
        object.__setattr__(self, "settings_per_party", m)

    @property
    def n_parties(self) -> int:
        return len(self.settings_per_party)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.settings_per_party

    def is_two_setting(self) -> bool:
        return all(m == 2 for m in self.settings_per_party)

    def strategy_count(self) -> int:
        return 1 << sum(self.settings_per_party)


@dataclass(frozen=True)
class CorrelationTable:
    """E(k_1, ..., k_N) for every setting combination of a layout."""

    layout: ExperimentLayout
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != self.layout.shape:
            raise ValueError(f"values shape {vals.shape} != layout {self.layout.shape}")
        if np.max(np.abs(vals)) > 1.0 + 1e-9:
            raise ValueError("correlation values must lie in [-1, 1] within 1e-9")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def to_json_dict(self) -> dict:
        return {
            "layout": list(self.layout.settings_per_party),
            "values": self.values.tolist(),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "CorrelationTable":
        layout = ExperimentLayout(tuple(int(m) for m in data["layout"]))
        return cls(layout, np.array(data["values"], dtype=float))


@dataclass(frozen=True)
class SignFunction:
    """A function {-1,+1}^arity -> {-1,+1} stored as bits.

    Bit p encodes the value on the argument tuple whose j-th entry is +1 when
    the j-th most significant bit of p is 0 (so p=0 is the all-plus tuple and
    a set bit means the value -1).
    """

    arity: int
    bits: tuple[int, ...]

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("arity must be >= 1")
        bits = tuple(int(b) for b in self.bits)
        if len(bits) != 2**self.arity or any(b not in (0, 1) for b in bits):
            raise ValueError(f"need {2**self.arity} bits, each 0 or 1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_bitstring(cls, text: str) -> "SignFunction":
        n = len(text).bit_length() - 1
        if len(text) != 2**n or n < 1:
            raise ValueError("bitstring length must be a power of two, >= 2")
        if set(text) - {"0", "1"}:
            raise ValueError("bitstring may contain only 0 and 1")
        return cls(n, tuple(int(c) for c in text))

    @classmethod
    def chsh(cls) -> "SignFunction":
        """The arity-2 pattern (+1, +1, +1, -1): sqrt2 * sin(3pi/4 + (s1+s2-2)pi/4)."""
        return cls(2, (0, 0, 0, 1))

    def values_grid(self) -> np.ndarray:
        """Values as a (2,)*arity array of +-1; axis j indexes s_j (0 is +1)."""
        vals = 1 - 2 * np.array(self.bits, dtype=np.int64)
        return vals.reshape((2,) * self.arity)

    def __call__(self, s: tuple[int, ...]) -> int:
        idx = tuple((1 - v) // 2 for v in s)
        return int(self.values_grid()[idx])

    def walsh_coefficients(self) -> np.ndarray:
        """c[k] = sum_s S(s) s_1^k_1 ... s_n^k_n over k in {0,1}^arity (integers)."""
        return _hadamard_transform(self.values_grid())


def _hadamard_transform(grid: np.ndarray) -> np.ndarray:
    """Apply [[1, 1], [1, -1]] along every axis of a (2,)*n array."""
    h = np.array([[1, 1], [1, -1]], dtype=grid.dtype)
    out = grid
    for axis in range(grid.ndim):
        out = np.tensordot(h, out, axes=([1], [axis]))
        out = np.moveaxis(out, 0, axis)
    return out


def enumerate_sign_functions(n_parties: int) -> Iterator[SignFunction]:
    """All 2^(2^N) sign functions of arity N, in numeric bit order (N <= 4)."""
    if n_parties > 4:
        raise ResourceLimitError("sign-function enumeration is capped at arity 4")
    width = 2**n_parties
    for code in range(2**width):
        bits = tuple((code >> (width - 1 - p)) & 1 for p in range(width))
        yield SignFunction(n_parties, bits)


@dataclass(frozen=True)
class DeterministicStrategy:
    """Per-party outcome assignments, one integer code per party."""

    layout: ExperimentLayout
    codes: tuple[int, ...]

    def __post_init__(self):
        codes = tuple(int(c) for c in self.codes)
        if len(codes) != self.layout.n_parties:
            raise ValueError("one code per party required")
        for code, m in zip(codes, self.layout.settings_per_party):
            if not 0 <= code < (1 << m):
                raise ValueError(f"code {code} out of range for {m} settings")
        object.__setattr__(self, "codes", codes)

    def outcome(self, party: int, setting: int) -> int:
        """Outcome A_party(setting) in {-1,+1}; both arguments 1-based."""
        return 1 - 2 * ((self.codes[party - 1] >> (setting - 1)) & 1)

    def outcome_vector(self, party: int) -> np.ndarray:
        m = self.layout.settings_per_party[party - 1]
        code = self.codes[party - 1]
        return np.array([1 - 2 * ((code >> k) & 1) for k in range(m)], dtype=np.int64)

    def table(self) -> CorrelationTable:
        """The deterministic correlation table: products of outcomes."""
        grid = _outer_products([self.outcome_vector(j + 1) for j in range(self.layout.n_parties)])
        return CorrelationTable(self.layout, grid.astype(float))


def _outer_products(vectors: list[np.ndarray]) -> np.ndarray:
    grid = vectors[0]
    for vec in vectors[1:]:
        grid = np.multiply.outer(grid, vec)
    return grid


@dataclass(frozen=True)
class LhvModel:
    """Mixture of deterministic strategies, plus an optional uniform tail.

    ``weights`` maps per-party code tuples to probabilities.  ``tail_weight``
    is spread uniformly over all strategies of the layout; a uniform mixture
    contributes nothing to any correlation function, so the tail never shows
    up in predicted tables.
    """

    layout: ExperimentLayout
    weights: dict[tuple[int, ...], float]
    tail_weight: float = 0.0

    def __post_init__(self):
        if self.tail_weight < -1e-12:
            raise ValueError("tail weight must be nonnegative")
        total = self.tail_weight
        for codes, w in self.weights.items():
            DeterministicStrategy(self.layout, codes)  # validates ranges
            if w < -1e-12:
                raise ValueError(f"negative weight {w!r} for strategy {codes}")
            total += w
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"total weight {total!r} is not 1 within 1e-12")

    def strategies(self) -> Iterator[tuple[DeterministicStrategy, float]]:
        for codes, w in self.weights.items():
            yield DeterministicStrategy(self.layout, codes), w

    def to_json_list(self) -> list[dict]:
        """Serialize as strategy/weight records, materializing the tail."""
        entries: dict[tuple[int, ...], float] = {}
        if self.tail_weight > 0.0:
            share = self.tail_weight / self.layout.strategy_count()
            for codes in _all_strategy_codes(self.layout):
                entries[codes] = share
        for codes, w in self.weights.items():
            entries[codes] = entries.get(codes, 0.0) + w
        return [
            {"strategy": list(codes), "weight": w}
            for codes, w in sorted(entries.items())
            if w > 0.0
        ]

    @classmethod
    def from_json_list(cls, layout: ExperimentLayout, data: list[dict]) -> "LhvModel":
        weights: dict[tuple[int, ...], float] = {}
        for record in data:
            codes = tuple(int(c) for c in record["strategy"])
            weights[codes] = weights.get(codes, 0.0) + float(record["weight"])
        return cls(layout, weights)


def _all_strategy_codes(layout: ExperimentLayout) -> Iterator[tuple[int, ...]]:
    def rec(prefix: tuple[int, ...], rest: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        if not rest:
            yield prefix
            return
        for code in range(1 << rest[0]):
            yield from rec(prefix + (code,), rest[1:])

    yield from rec((), layout.settings_per_party)


@dataclass(frozen=True)
class BellInequality:
    """Linear bound sum_k c[k] E(k) <= bound on correlation tables.

    Generated inequalities carry exact integer coefficients; separating
    hyperplanes from the polytope oracle carry floats.
    """

    layout: ExperimentLayout
    coefficients: np.ndarray
    bound: float

    def __post_init__(self):
        coeff = np.asarray(self.coefficients)
        if coeff.dtype.kind not in "if":
            raise ValueError("coefficients must be numeric")
        if coeff.dtype.kind == "i":
            coeff = coeff.astype(np.int64)
        if coeff.shape != self.layout.shape:
            raise ValueError(f"coefficients shape {coeff.shape} != layout {self.layout.shape}")
        if not np.any(coeff):
            raise ValueError("coefficients must not all vanish")
        if not self.bound > 0:
            raise ValueError("bound must be positive")
        coeff = coeff.copy()
        coeff.flags.writeable = False
        object.__setattr__(self, "coefficients", coeff)
        if coeff.dtype.kind == "i" and float(self.bound).is_integer():
            object.__setattr__(self, "bound", int(self.bound))
        else:
            object.__setattr__(self, "bound", float(self.bound))

    def is_integral(self) -> bool:
        return self.coefficients.dtype.kind == "i"

    def to_json_dict(self) -> dict:
        return {
            "layout": list(self.layout.settings_per_party),
            "coefficients": self.coefficients.tolist(),
            "bound": self.bound,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "BellInequality":
        layout = ExperimentLayout(tuple(int(m) for m in data["layout"]))
        coeff = np.array(data["coefficients"])
        if coeff.dtype.kind == "f" and np.all(coeff == np.round(coeff)):
            coeff = coeff.astype(np.int64)
        return cls(layout, coeff, data["bound"])


def evaluate_inequality(ineq: BellInequality, table: CorrelationTable) -> float:
    """The signed expression sum_k c[k] E(k) (not the modulus)."""
    if table.layout != ineq.layout:
        raise ValueError("table layout does not match inequality layout")
    return float(np.sum(ineq.coefficients * table.values))


def sign_inequality(sign: SignFunction) -> BellInequality:
    """The two-setting family member for one sign function.

    Coefficients are the Walsh coefficients of S, the bound is 2^N; the
    expression then equals sum_s S(s) sum_k s_1^(k_1-1)...E(k).
    """
    layout = ExperimentLayout((2,) * sign.arity)
    return BellInequality(layout, sign.walsh_coefficients(), 2**sign.arity)


def _require_two_setting(table: CorrelationTable) -> None:
    if not table.layout.is_two_setting():
        raise ValueError("operation requires exactly two settings per party")


def transformed_table(table: CorrelationTable) -> np.ndarray:
    """f(s) = sum_k s_1^(k_1-1)...s_N^(k_N-1) E(k) over s in {-1,+1}^N.

    Axis j indexes s_j with 0 meaning +1.  This is the per-axis Hadamard
    transform of the table values.
    """
    _require_two_setting(table)
    return _hadamard_transform(table.values)


def general_bell_lhs(table: CorrelationTable) -> float:
    """sum_s |f(s)|, to be compared with the local-realistic bound 2^N."""
    return float(np.sum(np.abs(transformed_table(table))))


def evaluate_sign_inequality(table: CorrelationTable, sign: SignFunction) -> float:
    """|sum_s S(s) f(s)| for one sign function (bound: 2^N)."""
    _require_two_setting(table)
    if sign.arity != table.layout.n_parties:
        raise ValueError("sign function arity must equal the number of parties")
    return float(abs(np.sum(sign.values_grid() * transformed_table(table))))


def hidden_probabilities(table: CorrelationTable) -> dict[tuple[int, ...], float]:
    """P(s) = 2^-N |f(s)|: the hidden weights of the explicit LHV model."""
    _require_two_setting(table)
    n = table.layout.n_parties
    f = transformed_table(table)
    probs: dict[tuple[int, ...], float] = {}
    for idx in np.ndindex(*f.shape):
        s = tuple(1 - 2 * b for b in idx)
        probs[s] = float(abs(f[idx])) / 2**n
    return probs


def construct_lhv_model(table: CorrelationTable) -> LhvModel:
    """Build an explicit LHV model for a table satisfying the 2^N bound.

    Each s with positive transform modulus contributes the strategy whose
    party-1 outcomes are (sigma, sigma*s_1) and whose party-j outcomes are
    (1, s_j), where sigma is the sign of f(s); the sign choice makes the
    strategy reproduce sign(f(s)) * s_1^(k_1-1)...s_N^(k_N-1) so the weighted
    sum inverts the transform exactly.  The probability deficit is spread as
    a uniform tail over all strategies, which leaves every correlation
    function untouched.
    """
    _require_two_setting(table)
    n = table.layout.n_parties
    lhs = general_bell_lhs(table)
    if lhs > 2**n + 1e-12:
        raise InequalityViolated(
            f"general two-setting expression {lhs!r} exceeds {2**n}", lhs
        )
    f = transformed_table(table)
    weights: dict[tuple[int, ...], float] = {}
    for idx in np.ndindex(*f.shape):
        p = float(abs(f[idx])) / 2**n
        if p == 0.0:
            continue
        sigma = 1 if f[idx] > 0 else -1
        s = tuple(1 - 2 * b for b in idx)
        # bit k set <=> outcome -1 at setting k+1
        first = (0 if sigma > 0 else 1) | ((0 if sigma * s[0] > 0 else 1) << 1)
        codes = (first,) + tuple((0 if s_j > 0 else 1) << 1 for s_j in s[1:])
        weights[codes] = weights.get(codes, 0.0) + p
    deficit = 1.0 - sum(weights.values())
    return LhvModel(table.layout, weights, tail_weight=max(deficit, 0.0))


def evaluate_model(model: LhvModel) -> CorrelationTable:
    """Correlation table predicted by a mixture of deterministic strategies."""
    values = np.zeros(model.layout.shape)
    for strategy, w in model.strategies():
        vectors = [strategy.outcome_vector(j + 1).astype(float)
                   for j in range(model.layout.n_parties)]
        values += w * _outer_products(vectors)
    return CorrelationTable(model.layout, values)


def _canonical_vertex_codes(layout: ExperimentLayout) -> list[tuple[int, ...]]:
    """One strategy per distinct vertex tensor.

    Flipping all outcomes of an even number of parties leaves every product
    unchanged, so representatives fix the first-setting outcome of parties
    2..N to +1 (even codes) while party 1 ranges over everything.
    """
    ranges = [range(1 << layout.settings_per_party[0])]
    for m in layout.settings_per_party[1:]:
        ranges.append(range(0, 1 << m, 2))

    def rec(prefix: tuple[int, ...], rest: list[range]) -> Iterator[tuple[int, ...]]:
        if not rest:
            yield prefix
            return
        for code in rest[0]:
            yield from rec(prefix + (code,), rest[1:])

    return list(rec((), ranges))


def enumerate_vertices(layout: ExperimentLayout) -> tuple[list[tuple[int, ...]], np.ndarray]:
    """Distinct vertex tensors of the correlation polytope.

    Returns representative strategy codes and an integer matrix with one
    flattened product tensor per row.
    """
    if layout.strategy_count() > MAX_STRATEGIES:
        raise ResourceLimitError(
            f"layout has {layout.strategy_count()} strategies, cap is {MAX_STRATEGIES}"
        )
    codes = _canonical_vertex_codes(layout)
    rows = np.empty((len(codes), int(np.prod(layout.shape))), dtype=np.int64)
    for i, c in enumerate(codes):
        strat = DeterministicStrategy(layout, c)
        vectors = [strat.outcome_vector(j + 1) for j in range(layout.n_parties)]
        rows[i] = _outer_products(vectors).ravel()
    return codes, rows


@dataclass(frozen=True)
class PolytopeResult:
    inside: bool
    model: LhvModel | None
    certificate: BellInequality | None
    lp_iterations: int = field(default=0, compare=False)


def polytope_membership(table: CorrelationTable, tol: float = 1e-9) -> PolytopeResult:
    """Decide whether a table is a mixture of deterministic strategies.

    Feasibility of V lambda = values, lambda >= 0, sum lambda = 1 over the
    distinct vertex tensors.  Inside: the weights become an LhvModel.
    Outside: the Farkas vector of the phase-1 simplex gives a hyperplane
    separating the table from every vertex; its sweep-tightened form is
    returned as a violated BellInequality.
    """
    layout = table.layout
    codes, vertices = enumerate_vertices(layout)
    dim = vertices.shape[1]
    a = np.empty((dim + 1, len(codes)))
    a[:dim] = vertices.T
    a[dim] = 1.0
    b = np.concatenate([table.values.ravel(), [1.0]])

    result = solve_feasibility(a, b, tol=tol)
    if result.feasible:
        lam = result.x
        weights = {codes[i]: float(w) for i, w in enumerate(lam) if w > 1e-12}
        total = sum(weights.values())
        weights = {c: w / total for c, w in weights.items()}
        model = LhvModel(layout, weights)
        return PolytopeResult(True, model, None, result.iterations)

    y = result.farkas
    coeff = y[:dim]
    scale = np.max(np.abs(coeff))
    if scale <= 0:
        raise RuntimeError("degenerate separating hyperplane")
    coeff = coeff / scale
    bound = float(np.max(vertices @ coeff))
    certificate = BellInequality(layout, coeff.reshape(layout.shape), bound)
    return PolytopeResult(False, None, certificate, result.iterations)


def most_violated_sign_inequality(table: CorrelationTable) -> tuple[SignFunction, float]:
    """The family member maximizing |sum_s S(s) f(s)|: S matching the signs of f.

    Returns the maximizer and its expression value sum_s |f(s)|.
    """
    _require_two_setting(table)
    f = transformed_table(table)
    bits = tuple(0 if v >= 0 else 1 for v in f.ravel())
    sign = SignFunction(table.layout.n_parties, bits)
    return sign, float(np.sum(np.abs(f)))
