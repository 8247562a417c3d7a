"""Command-line front end: ``qdense <command> [options]``.

Exit status is 0 when everything passes, 1 when a verification fails and 2
on malformed input.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

import numpy as np

from . import densecoding as dc
from . import serialization as ser
from .quantum import (
    EPS_ZERO,
    SchmidtSpectrum,
    ValidationError,
    state_from_spectrum,
    validate_channel,
    validate_povm,
)

# user-typed coefficients are renormalized when this close to unit norm
INPUT_NORM_SLACK = 1e-4
SATURATION_TOL = 1e-9


class InputError(ValueError):
    pass


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def resolve_spectrum(args) -> SchmidtSpectrum:
    """Spectrum from ``--input``, or ``--d`` with optional ``--lambdas``."""
    if getattr(args, "input", None):
        if args.lambdas is not None or args.d is not None:
            raise InputError("give either --input or --d/--lambdas, not both")
        return ser.spectrum_from_json(ser.load_json(args.input), str(args.input))
    if args.d is None:
        raise InputError("a state is required: use --input FILE or --d N [--lambdas ...]")
    if args.d < 2:
        raise InputError("--d must be at least 2")
    if args.lambdas is None:
        return SchmidtSpectrum.maximally_entangled(args.d)
    vals = np.asarray(args.lambdas, dtype=float)
    if vals.size != args.d:
        raise InputError(f"--lambdas has {vals.size} values but --d is {args.d}")
    if np.any(vals < 0):
        raise InputError("Schmidt coefficients must be nonnegative")
    weights = vals if args.squared else vals**2
    total = float(weights.sum())
    if abs(total - 1.0) > INPUT_NORM_SLACK:
        what = "weights" if args.squared else "squared coefficients"
        raise InputError(f"{what} sum to {total!r}; they must sum to 1")
    weights = np.sort(weights / total)[::-1]
    if np.any(np.diff(np.asarray(vals)) > 0):
        print("note: coefficients reordered to descending order", file=sys.stderr)
    return SchmidtSpectrum(np.sqrt(weights))


def _emit(args, doc=None, rows=None, header=None) -> None:
    """Write JSON (``doc``) or CSV (``header`` + ``rows``) to ``--output`` or stdout."""
    if args.format == "csv" and rows is not None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
        text = buf.getvalue()
    else:
        text = ser.dumps(doc)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _build(kind: str, spec: SchmidtSpectrum) -> dc.DenseCodingProtocol:
    if kind == "approximate":
        return dc.build_approximate_protocol(spec.d)
    if spec.lambdas[-1] <= EPS_ZERO:
        raise InputError(
            "the smallest Schmidt coefficient is zero, so the unambiguous bound is 0; "
            "only the trivial always-inconclusive protocol attains it"
        )
    return dc.build_unambiguous_protocol(spec)


def _summary(om: dc.OutcomeMatrix) -> dict:
    if om.has_inconclusive:
        rep = dc.check_unambiguous(om)
        return {"conclusive_probability": rep.conclusive_probability}
    return {"average_success_probability": dc.average_success_probability(om)}


def cmd_bound(args) -> int:
    spec = resolve_spectrum(args)
    approx, unamb = dc.approximate_bound(spec), dc.unambiguous_bound(spec)
    doc = {
        "d": spec.d,
        "lambdas": spec.lambdas.tolist(),
        "approximate_bound": approx,
        "unambiguous_bound": unamb,
    }
    header = ["d"] + [f"lambda_{i}" for i in range(spec.d)] + ["approximate_bound", "unambiguous_bound"]
    _emit(args, doc, [[spec.d, *map(float, spec.lambdas), approx, unamb]], header)
    return 0


def cmd_build(args) -> int:
    spec = resolve_spectrum(args)
    proto = _build(args.kind, spec)
    args.format = "json"
    _emit(args, ser.protocol_to_json(proto, spec))
    return 0


def cmd_simulate(args) -> int:
    spec = resolve_spectrum(args)
    proto = _build(args.kind, spec)
    om = dc.outcome_matrix(proto, state_from_spectrum(spec))
    if args.emit_protocol:
        Path(args.emit_protocol).write_text(ser.dumps(ser.protocol_to_json(proto, spec)))
    bound = dc.approximate_bound(spec) if args.kind == "approximate" else dc.unambiguous_bound(spec)
    doc = {
        "kind": args.kind,
        "d": spec.d,
        "lambdas": spec.lambdas.tolist(),
        "has_inconclusive": om.has_inconclusive,
        "outcome_matrix": om.p.tolist(),
        "summary": _summary(om),
        "bound": bound,
    }
    labels = list(proto.measurement.labels)
    rows = [[r, *map(float, om.p[r])] for r in range(spec.d**2)]
    _emit(args, doc, rows, ["signal"] + labels)
    return 0


def verify_protocol(proto: dc.DenseCodingProtocol, spec: SchmidtSpectrum) -> list[dict]:
    """Run every check on ``proto`` driven by the state with spectrum ``spec``."""
    checks = []
    worst = max(validate_channel(ch).residual for ch in proto.encodings)
    bad = [r for r, ch in enumerate(proto.encodings) if not validate_channel(ch).passed]
    checks.append(
        {
            "name": "channels",
            "passed": not bad,
            "max_residual": worst,
            "detail": f"encodings {bad} are not trace preserving" if bad else "all trace preserving",
        }
    )
    prep = validate_povm(proto.measurement)
    checks.append(
        {
            "name": "povm",
            "passed": prep.passed,
            "completeness_residual": prep.completeness_residual,
            "min_eigenvalue": float(np.nanmin(prep.min_eigenvalues)),
            "detail": "; ".join(prep.problems) or "positive and complete",
        }
    )
    if bad or not prep.passed:
        return checks

    if spec.d != proto.d:
        checks.append({"name": "state", "passed": False, "detail": "state and protocol differ in d"})
        return checks
    om = dc.outcome_matrix(proto, state_from_spectrum(spec), validate=False)
    if proto.measurement.has_inconclusive:
        rep = dc.check_unambiguous(om)
        checks.append(
            {
                "name": "unambiguous",
                "passed": rep.passed,
                "max_off_diagonal": rep.max_off_diagonal,
                "diagonal_spread": rep.diagonal_spread,
                "conclusive_probability": rep.conclusive_probability,
            }
        )
        achieved, bound = rep.conclusive_probability, dc.unambiguous_bound(spec)
    else:
        achieved, bound = dc.average_success_probability(om), dc.approximate_bound(spec)
    checks.append(
        {
            "name": "saturation",
            "passed": abs(bound - achieved) <= SATURATION_TOL,
            "bound": bound,
            "achieved": achieved,
            "gap": bound - achieved,
        }
    )
    return checks


def cmd_verify(args) -> int:
    if args.protocol:
        proto, embedded = ser.protocol_from_json(ser.load_json(args.protocol))
        if args.input or args.d is not None:
            spec = resolve_spectrum(args)
        elif embedded is not None:
            spec = embedded
        else:
            spec = SchmidtSpectrum.maximally_entangled(proto.d)
    else:
        spec = resolve_spectrum(args)
        proto = _build(args.kind, spec)
    checks = verify_protocol(proto, spec)
    passed = all(c["passed"] for c in checks)
    doc = {"d": spec.d, "lambdas": spec.lambdas.tolist(), "passed": passed, "checks": checks}
    rows = [[c["name"], "pass" if c["passed"] else "fail"] for c in checks]
    _emit(args, doc, rows, ["check", "result"])
    return 0 if passed else 1


def sweep_spectra(d: int, start: float, stop: float, steps: int) -> list[SchmidtSpectrum]:
    """Spectra with largest weight ``x`` on a grid and the rest spread evenly."""
    lo = 1.0 / d
    if steps < 1:
        raise InputError("--steps must be at least 1")
    if not (lo - 1e-12 <= start <= stop <= 1.0):
        raise InputError(f"grid must satisfy 1/d <= start <= stop <= 1 (1/d = {lo!r})")
    out = []
    for x in np.linspace(start, stop, steps) if steps > 1 else [start]:
        x = max(float(x), lo)
        rest = min((1.0 - x) / (d - 1), x)
        w = np.array([x] + [rest] * (d - 1))
        out.append(SchmidtSpectrum(np.sqrt(w / w.sum())))
    return out


def cmd_sweep(args) -> int:
    if args.d is None or args.d < 2:
        raise InputError("sweep needs --d >= 2")
    args.format = args.format or "csv"
    start = 1.0 / args.d if args.start is None else args.start
    rows, docs = [], []
    for spec in sweep_spectra(args.d, start, args.stop, args.steps):
        psi = state_from_spectrum(spec)
        approx = dc.average_success_probability(
            dc.outcome_matrix(dc.build_approximate_protocol(spec.d), psi)
        )
        if spec.lambdas[-1] > EPS_ZERO:
            unamb_proto = dc.build_unambiguous_protocol(spec)
        else:
            unamb_proto = dc.all_inconclusive_protocol(spec.d)
        unamb = dc.check_unambiguous(dc.outcome_matrix(unamb_proto, psi)).conclusive_probability
        row = {
            "lambda0_squared": float(spec.lambdas[0] ** 2),
            "lambdas": spec.lambdas.tolist(),
            "approximate_bound": dc.approximate_bound(spec),
            "unambiguous_bound": dc.unambiguous_bound(spec),
            "approximate_achieved": approx,
            "unambiguous_achieved": unamb,
        }
        docs.append(row)
        rows.append(
            [row["lambda0_squared"], *row["lambdas"]]
            + [row[k] for k in ("approximate_bound", "unambiguous_bound")]
            + [approx, unamb]
        )
    header = (
        ["lambda0_squared"]
        + [f"lambda_{i}" for i in range(args.d)]
        + ["approximate_bound", "unambiguous_bound", "approximate_achieved", "unambiguous_achieved"]
    )
    _emit(args, {"d": args.d, "rows": docs}, rows, header)
    return 0


def cmd_search(args) -> int:
    spec = resolve_spectrum(args)
    rep = dc.random_protocol_search(
        spec, args.trials, args.seed, args.kind, include_construction=not args.no_construction
    )
    exceeded = rep.achieved_value > rep.bound_value + dc.TOL_SEARCH
    doc = {
        "kind": rep.kind,
        "d": spec.d,
        "lambdas": spec.lambdas.tolist(),
        "trials": rep.trials,
        "seed": args.seed,
        "bound": rep.bound_value,
        "best_found": rep.achieved_value,
        "best_trial": rep.best_trial,
        "gap": rep.gap,
        "bound_exceeded": exceeded,
    }
    _emit(args, doc, [[rep.kind, rep.trials, args.seed, rep.bound_value, rep.achieved_value, rep.gap]],
          ["kind", "trials", "seed", "bound", "best_found", "gap"])
    return 1 if exceeded else 0


def cmd_montecarlo(args) -> int:
    if args.diagonal is not None:
        if args.input or args.d is not None or args.lambdas is not None:
            raise InputError("give either --diagonal or a state, not both")
        n = len(args.diagonal)
        d = math.isqrt(n)
        if d * d != n or d < 2:
            raise InputError(f"--diagonal needs d**2 entries (d >= 2), got {n}")
        om = dc.OutcomeMatrix.from_diagonal(d, args.diagonal)
    else:
        spec = resolve_spectrum(args)
        om = dc.outcome_matrix(_build(args.kind, spec), state_from_spectrum(spec))
    if args.samples < 1:
        raise InputError("--samples must be at least 1")
    res = dc.monte_carlo_average(om, args.samples, args.seed)
    analytic = dc.average_success_probability(om)
    doc = {
        "d": om.d,
        "samples": res.samples,
        "seed": args.seed,
        "estimate": res.estimate,
        "stderr": res.stderr,
        "analytic_average": analytic,
        "deviation": res.estimate - analytic,
    }
    _emit(args, doc, [[om.d, res.samples, args.seed, res.estimate, res.stderr, analytic]],
          ["d", "samples", "seed", "estimate", "stderr", "analytic_average"])
    return 0


def build_parser() -> argparse.ArgumentParser:
    state = argparse.ArgumentParser(add_help=False)
    state.add_argument("--input", type=Path, help="JSON state or spectrum file")
    state.add_argument("--d", type=int, help="local dimension (maximally entangled if no --lambdas)")
    state.add_argument("--lambdas", type=_float_list, help="Schmidt coefficients, comma separated")
    state.add_argument("--squared", action="store_true", help="--lambdas are weights lambda_i**2")

    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--format", choices=("json", "csv"), help="default json (csv for sweep)")
    out.add_argument("--output", type=Path, help="write here instead of stdout")

    kind = argparse.ArgumentParser(add_help=False)
    kind.add_argument("--kind", choices=("approximate", "unambiguous"), default="approximate")

    parser = argparse.ArgumentParser(prog="qdense", description="Dense coding with pure entangled states.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", parents=[state, out], help="evaluate both optimal bounds")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("build", parents=[state, out, kind], help="export an optimal protocol as JSON")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("simulate", parents=[state, out, kind], help="outcome matrix of an optimal protocol")
    p.add_argument("--emit-protocol", type=Path, help="also write the protocol JSON here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", parents=[state, out, kind], help="check a built-in or imported protocol")
    p.add_argument("--protocol", type=Path, help="protocol JSON to verify instead of a built-in one")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", parents=[out], help="bounds and simulated optima over a spectrum grid")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--start", type=float, help="smallest lambda_0**2 (default 1/d)")
    p.add_argument("--stop", type=float, default=1.0, help="largest lambda_0**2")
    p.add_argument("--steps", type=int, default=11)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("search", parents=[state, out, kind], help="random protocols against the bound")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-construction", action="store_true", help="do not seed trial 0 with the optimum")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("montecarlo", parents=[state, out, kind], help="Monte Carlo average over priors")
    p.add_argument("--diagonal", type=_float_list, help="conditional success probabilities P(r|r)")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_montecarlo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ser.FormatError, OSError) as exc:
        print(f"qdense {args.command}: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"qdense {args.command}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"qdense {args.command}: invalid input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
