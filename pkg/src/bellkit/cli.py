"""Command-line front end: JSON in, JSON/CSV out, scriptable exit codes.

Exit codes: 0 success (a model exists / nothing violated), 2 bad input,
3 a violation was found, 4 a resource cap was hit.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import re
import sys
from pathlib import Path

import numpy as np

from .errors import InequalityViolated, ResourceLimitError
from .families import GhzFamily, ghz_state, ghz_tensor_analytic, mix_with_white_noise, singlet
from .lhv import (
    BellInequality,
    CorrelationTable,
    SignFunction,
    construct_lhv_model,
    most_violated_sign_inequality,
    polytope_membership,
    sign_inequality,
)
from .multiset import build_recursive, check_tightness, tree_8842, tree_88444, tree_chain
from .qcond import (
    condition_multisetting_CN,
    condition_two_qubit,
    condition_two_setting_N,
    maximize_bell_value,
)
from .qstate import (
    CorrelationTensor,
    DensityMatrix,
    PureState,
    correlation_tensor,
    density_from_pure,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_VIOLATION = 3
EXIT_RESOURCE = 4

CONDITION_KINDS = ("two_setting_NS_2qubit", "two_setting_sufficient_N", "multisetting_CN")


class CliError(Exception):
    """Unusable input; reported on stderr, exit code 2."""


# ---------------------------------------------------------------------------
# state specs


_NOISE_RE = re.compile(r"v=([^()]+)\((.+)\)\Z", re.DOTALL)


def _parse_params(text: str, spec: str) -> dict[str, str]:
    params: dict[str, str] = {}
    for part in text.split(","):
        key, sep, value = part.partition("=")
        if not sep or not key or not value:
            raise CliError(f"malformed parameter {part!r} in state spec {spec!r}")
        params[key.strip()] = value.strip()
    return params


def parse_state_spec(spec: str) -> DensityMatrix:
    """Parse "singlet", "ghz:N=3,alpha=0.3" or "noise:v=0.8(<inner spec>)"."""
    spec = spec.strip()
    if spec == "singlet":
        return density_from_pure(singlet())
    if spec.startswith("ghz:"):
        params = _parse_params(spec[4:], spec)
        unknown = set(params) - {"N", "n", "alpha"}
        if unknown:
            raise CliError(f"unknown ghz parameters {sorted(unknown)} in {spec!r}")
        n_text = params.get("N", params.get("n"))
        if n_text is None:
            raise CliError(f"ghz spec needs N=<int>, got {spec!r}")
        if "alpha" not in params:
            raise CliError(f"ghz spec needs alpha=<float>, got {spec!r}")
        try:
            family = GhzFamily(int(n_text), float(params["alpha"]))
        except ValueError as exc:
            raise CliError(f"bad ghz spec {spec!r}: {exc}") from exc
        return density_from_pure(ghz_state(family))
    if spec.startswith("noise:"):
        match = _NOISE_RE.match(spec[6:])
        if match is None:
            raise CliError(f"noise spec must look like noise:v=0.8(<state>), got {spec!r}")
        try:
            visibility = float(match.group(1))
        except ValueError as exc:
            raise CliError(f"bad visibility in {spec!r}") from exc
        inner = parse_state_spec(match.group(2))
        try:
            return mix_with_white_noise(inner, visibility)
        except ValueError as exc:
            raise CliError(str(exc)) from exc
    raise CliError(f"unknown state spec {spec!r} (expected singlet, ghz:..., noise:...)")


# ---------------------------------------------------------------------------
# I/O helpers


def _read_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path!r}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"invalid JSON in {path!r}: {exc}") from exc


def _parse_payload(loader, data, what: str):
    try:
        return loader(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"not a valid {what}: {exc}") from exc


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _tensor_from_args(args) -> CorrelationTensor:
    if (args.state is None) == (args.tensor_file is None):
        raise CliError("give exactly one of --state or --tensor-file")
    if args.state is not None:
        return correlation_tensor(parse_state_spec(args.state))
    data = _read_json(args.tensor_file)
    return _parse_payload(CorrelationTensor.from_json_dict, data, "correlation tensor")


# ---------------------------------------------------------------------------
# commands


def cmd_tensor(args) -> int:
    if (args.state is None) == (args.state_file is None):
        raise CliError("give exactly one of --state or --state-file")
    if args.state is not None:
        rho = parse_state_spec(args.state)
    else:
        data = _read_json(args.state_file)
        state = _parse_payload(PureState.from_json_dict, data, "pure state")
        rho = density_from_pure(state)
    tensor = correlation_tensor(rho)
    _emit(_dump_json(tensor.to_json_dict()), args.out)
    return EXIT_OK


def cmd_lhv(args) -> int:
    data = _read_json(args.table)
    table = _parse_payload(CorrelationTable.from_json_dict, data, "correlation table")
    if table.layout.is_two_setting():
        try:
            model = construct_lhv_model(table)
        except InequalityViolated:
            sign, value = most_violated_sign_inequality(table)
            certificate = sign_inequality(sign)
            _emit(_dump_json(certificate.to_json_dict()), args.out)
            print(f"violation: value {value!r} exceeds bound {certificate.bound!r}",
                  file=sys.stderr)
            return EXIT_VIOLATION
        _emit(_dump_json(model.to_json_list()), args.out)
        return EXIT_OK
    result = polytope_membership(table)
    if result.inside:
        _emit(_dump_json(result.model.to_json_list()), args.out)
        return EXIT_OK
    certificate = result.certificate
    value = float(np.sum(certificate.coefficients * table.values))
    _emit(_dump_json(certificate.to_json_dict()), args.out)
    print(f"violation: value {value!r} exceeds bound {certificate.bound!r}", file=sys.stderr)
    return EXIT_VIOLATION


def _default_bitstring(arity: int) -> str:
    return "0" * (2**arity - 1) + "1"


def _generate_inequality(layout: tuple[int, ...], bitstrings: list[str] | None) -> BellInequality:
    n = len(layout)
    if n >= 1 and all(m == 2 for m in layout):
        arities = [n]
    elif n >= 3 and layout == (4,) * (n - 1) + (2,):
        arities = [2, n - 1, n - 1]
    elif layout == (8, 8, 4, 2):
        arities = [2] * 7
    elif layout == (8, 8, 4, 4, 4):
        arities = [2] * 9
    else:
        raise CliError(
            f"unsupported layout {layout}; supported: 2x...x2, 4x...x4x2, 8x8x4x2, 8x8x4x4x4"
        )
    if bitstrings is None:
        bitstrings = [_default_bitstring(a) for a in arities]
    if len(bitstrings) != len(arities):
        raise CliError(f"layout {layout} needs {len(arities)} sign bitstrings, got {len(bitstrings)}")
    signs = []
    for text, arity in zip(bitstrings, arities):
        try:
            sign = SignFunction.from_bitstring(text)
        except ValueError as exc:
            raise CliError(f"bad sign bitstring {text!r}: {exc}") from exc
        if sign.arity != arity:
            raise CliError(f"sign bitstring {text!r} has arity {sign.arity}, expected {arity}")
        signs.append(sign)
    if len(arities) == 1:
        return sign_inequality(signs[0])
    if layout == (8, 8, 4, 2):
        return build_recursive(tree_8842(signs))
    if layout == (8, 8, 4, 4, 4):
        return build_recursive(tree_88444(signs))
    return build_recursive(tree_chain(n, signs[0], signs[1], signs[2]))


def cmd_generate(args) -> int:
    try:
        layout = tuple(int(part) for part in args.layout.split(","))
    except ValueError as exc:
        raise CliError(f"bad layout {args.layout!r}: {exc}") from exc
    if args.sign_fn and args.signs is not None:
        raise CliError("give either --sign-fn (repeatable) or --signs, not both")
    bitstrings = None
    if args.sign_fn:
        bitstrings = list(args.sign_fn)
    elif args.signs is not None:
        bitstrings = args.signs.split(",")
    ineq = _generate_inequality(layout, bitstrings)
    if args.check_tight:
        report = check_tightness(ineq)
        payload = {"inequality": ineq.to_json_dict(), "tightness": dataclasses.asdict(report)}
    else:
        payload = ineq.to_json_dict()
    _emit(_dump_json(payload), args.out)
    return EXIT_OK


def _run_condition(kind: str, tensor: CorrelationTensor, restarts: int, seed: int):
    if kind == "two_setting_NS_2qubit":
        if tensor.n_qubits != 2:
            raise CliError("two_setting_NS_2qubit applies to 2-qubit tensors only")
        return condition_two_qubit(tensor)
    if kind == "two_setting_sufficient_N":
        return condition_two_setting_N(tensor, restarts=restarts, seed=seed)
    if kind == "multisetting_CN":
        return condition_multisetting_CN(tensor, restarts=restarts, seed=seed)
    raise CliError(f"unknown condition kind {kind!r}; choose from {', '.join(CONDITION_KINDS)}")


def cmd_condition(args) -> int:
    tensor = _tensor_from_args(args)
    report = _run_condition(args.kind, tensor, args.restarts, args.seed)
    _emit(_dump_json(report.to_json_dict()), args.out)
    return EXIT_VIOLATION if report.violated else EXIT_OK


def cmd_scan(args) -> int:
    if args.family != "ghz":
        raise CliError(f"unknown scan family {args.family!r} (only ghz is supported)")
    try:
        n_list = [int(part) for part in args.n.split(",")]
    except ValueError as exc:
        raise CliError(f"bad N list {args.n!r}: {exc}") from exc
    if not n_list:
        raise CliError("N list is empty")
    if args.alpha_steps < 2:
        raise CliError("the alpha grid needs at least 2 points")
    if not 0.0 <= args.alpha_min <= args.alpha_max <= np.pi / 4 + 1e-12:
        raise CliError("alpha range must satisfy 0 <= min <= max <= pi/4")
    kinds = args.kinds.split(",")
    for kind in kinds:
        if kind not in CONDITION_KINDS:
            raise CliError(f"unknown condition kind {kind!r}; choose from {', '.join(CONDITION_KINDS)}")
    alphas = np.linspace(args.alpha_min, args.alpha_max, args.alpha_steps)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["family", "N", "alpha", "kind", "value", "violated"])
    for n in n_list:
        for alpha in alphas:
            tensor = ghz_tensor_analytic(GhzFamily(n, float(alpha)))
            for kind in kinds:
                report = _run_condition(kind, tensor, args.restarts, args.seed)
                writer.writerow([
                    args.family,
                    n,
                    repr(float(alpha)),
                    kind,
                    repr(report.value),
                    "true" if report.violated else "false",
                ])
    _emit(buffer.getvalue(), args.out)
    return EXIT_OK


def cmd_maximize(args) -> int:
    data = _read_json(args.inequality)
    ineq = _parse_payload(BellInequality.from_json_dict, data, "Bell inequality")
    tensor = _tensor_from_args(args)
    try:
        result = maximize_bell_value(
            ineq, tensor, restarts=args.restarts, seed=args.seed
        )
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    _emit(_dump_json(result.to_json_dict()), args.out)
    if result.value > float(ineq.bound) + 1e-9:
        print(f"violation: value {result.value!r} exceeds bound {ineq.bound!r}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_out(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="write output to this file instead of stdout")


def _add_rng(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    parser.add_argument("--restarts", type=int, default=50,
                        help="random restarts for the sweeps (default 50)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellkit",
        description="Correlation Bell inequalities: generation, LHV models, violation checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tensor", help="correlation tensor of a state spec or pure-state JSON")
    p.add_argument("--state", help='state spec, e.g. "singlet" or "ghz:N=3,alpha=0.3"')
    p.add_argument("--state-file", help="pure-state JSON file ('-' for stdin)")
    _add_out(p)
    p.set_defaults(func=cmd_tensor)

    p = sub.add_parser("lhv", help="local model for a correlation table, or a violation certificate")
    p.add_argument("--table", required=True, help="correlation-table JSON file ('-' for stdin)")
    _add_out(p)
    p.set_defaults(func=cmd_lhv)

    p = sub.add_parser("generate", help="build an inequality for a supported layout")
    p.add_argument("--layout", required=True, help='settings per party, e.g. "4,4,2"')
    p.add_argument("--sign-fn", action="append", metavar="BITS",
                   help="sign-function bitstring of length 2^arity; repeat once per slot "
                        "(defaults to 0...01 each)")
    p.add_argument("--signs", help="comma-separated sign bitstrings (same as repeated --sign-fn)")
    p.add_argument("--check-tight", action="store_true", help="also run the tightness check")
    _add_out(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("condition", help="evaluate a violation condition on a tensor")
    p.add_argument("--kind", required=True, choices=CONDITION_KINDS)
    p.add_argument("--state", help="state spec (alternative to --tensor-file)")
    p.add_argument("--tensor-file", help="correlation-tensor JSON file ('-' for stdin)")
    _add_rng(p)
    _add_out(p)
    p.set_defaults(func=cmd_condition)

    p = sub.add_parser("scan", help="CSV of condition values over a parameter grid")
    p.add_argument("--family", required=True, help="state family (ghz)")
    p.add_argument("--n", required=True, help='comma-separated qubit counts, e.g. "3,4,5"')
    p.add_argument("--alpha-min", type=float, default=0.0)
    p.add_argument("--alpha-max", type=float, default=float(np.pi / 4))
    p.add_argument("--alpha-steps", type=int, default=21,
                   help="grid points including both endpoints (default 21)")
    p.add_argument("--kinds", default="two_setting_sufficient_N,multisetting_CN",
                   help="comma-separated condition kinds")
    _add_rng(p)
    _add_out(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("maximize", help="see-saw the quantum value of an inequality on a state")
    p.add_argument("--inequality", required=True, help="Bell-inequality JSON file ('-' for stdin)")
    p.add_argument("--state", help="state spec (alternative to --tensor-file)")
    p.add_argument("--tensor-file", help="correlation-tensor JSON file ('-' for stdin)")
    _add_rng(p)
    _add_out(p)
    p.set_defaults(func=cmd_maximize)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ResourceLimitError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
