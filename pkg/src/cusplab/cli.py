"""Command line front end.

Every subcommand builds one RunRecord and renders it as canonical JSON
(sorted keys, compact separators) or long format CSV.  Records carry no
timestamps or environment state, so a command line is reproducible byte
for byte; pass --timing to append a wall clock field at the cost of that
byte identity.

Exit codes: 0 success; 1 usage errors and inadmissible inputs
(DomainError, SamplerError); 2 violated invariants or failed fits
(InvariantViolation, IdentityViolation, FitError).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .deformation import dbar_w_norm_sq, flow_array, w_coefficients, wp_integrand
from .errors import (
    ChartError,
    DomainError,
    FitError,
    IdentityViolation,
    InvariantViolation,
    SamplerError,
)
from .geometry import (
    ModelConfig,
    a_squared,
    curvature_sup,
    dominant_chart,
    frame_metric,
    grad_phi_frame,
    make_point,
    metric_determinant,
    phi,
    volume_density,
)
from .experiments import run_bounds_scan, run_sweep, run_volume, run_wp_ratio
from .quadrature import exact_volume_n1

_CSV_COLUMNS = ("command", "n", "log_t2", "c_log2", "key", "value",
                "std_error", "seed", "samples")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse calls error() then SystemExit(2); we want exit code 1 for
    # usage problems, so raise instead and let main() translate.
    def error(self, message):
        raise _UsageError(message)


@dataclass
class RunRecord:
    """Everything one command produced, in a JSON and CSV friendly shape."""

    command: str
    n: int
    log_t2: float | None
    c_log2: float | None
    seed: int
    samples: int
    outputs: dict
    std_errors: dict
    args: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    schema: int = 1

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":")) + "\n"

    def to_csv(self) -> str:
        lines = [",".join(_CSV_COLUMNS)]
        log_t2 = "" if self.log_t2 is None else repr(self.log_t2)
        c_log2 = "" if self.c_log2 is None else repr(self.c_log2)
        for key in sorted(self.outputs):
            err = self.std_errors.get(key, 0.0)
            lines.append(
                ",".join(
                    [
                        self.command,
                        str(self.n),
                        log_t2,
                        c_log2,
                        key,
                        repr(float(self.outputs[key])),
                        repr(float(err)),
                        str(self.seed),
                        str(self.samples),
                    ]
                )
            )
        return "\n".join(lines) + "\n"


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma separated floats, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=1, help="fiber dimension (default 1)")
    common.add_argument("--log-t2", type=float, default=-100.0,
                        help="log |t|^2 of the fiber (default -100)")
    common.add_argument("--c-log2", type=float, default=-2.0,
                        help="log c^2 of the truncation radius (default -2)")
    common.add_argument("--samples", type=int, default=100000,
                        help="sample count (default 100000)")
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads for sampling shards (default 1)")
    common.add_argument("--format", choices=("json", "csv"), default="json",
                        help="output format (default json)")
    common.add_argument("--out", default=None, help="write the record to this path")
    common.add_argument("--timing", action="store_true",
                        help="append wall_time_ms (breaks byte reproducibility)")

    parser = _Parser(prog="cusplab",
                     description="Cusp metric experiments on degenerating "
                                 "polydisk hypersurface families")
    parser.add_argument("--version", action="version", version=f"cusplab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("volume", parents=[common],
                   help="Monte Carlo volume of the truncated fiber")

    sub.add_parser("wp-ratio", parents=[common],
                   help="metric pairing ratio against its small |t| prediction")

    sweep = sub.add_parser("sweep", parents=[common],
                           help="ratio scaling across several log |t|^2 values")
    sweep.add_argument("--log-t2-list", type=_float_list, required=True,
                       help="comma separated log |t|^2 values")
    sweep.add_argument("--fit-tol", type=float, default=0.1,
                       help="max rms fit residual in log units (default 0.1)")

    sub.add_parser("bounds-scan", parents=[common],
                   help="survey bounded pointwise quantities at random points")

    flow = sub.add_parser("flow-check", parents=[common],
                          help="verify conservation and composition of the log flow")
    flow.add_argument("--sigma", type=float, default=1.0, help="flow time (default 1)")
    flow.add_argument("--steps", type=int, default=None,
                      help="integrator substeps (default 100 per unit sigma)")

    pe = sub.add_parser("point-eval", parents=[common],
                        help="evaluate pointwise quantities at one point")
    pe.add_argument("--b", type=_float_list, required=True,
                    help="comma separated barycentric fractions, length n")
    pe.add_argument("--theta", type=_float_list, default=None,
                    help="comma separated fiber angles, length n (default zeros)")

    return parser


def _record(args, outputs, std_errors, extra_args=None, log_t2="default") -> RunRecord:
    return RunRecord(
        command=args.command,
        n=args.n,
        log_t2=args.log_t2 if log_t2 == "default" else log_t2,
        c_log2=args.c_log2,
        seed=args.seed,
        samples=args.samples,
        outputs=outputs,
        std_errors=std_errors,
        args=extra_args or {},
        meta={
            "angles": "integrated analytically; (2 pi)^n folded into prefactors",
            "scaling": "barycentric b = a / lt; |lt|^n jacobian folded into prefactors",
            "curvature_scale": "normalized entries doubled to the Gaussian scale",
        },
    )


def _cmd_volume(args) -> RunRecord:
    config = ModelConfig(args.n, args.log_t2, args.c_log2)
    est = run_volume(config, args.samples, seed=args.seed, threads=args.threads)
    outputs = {"volume": est.value}
    errors = {"volume": est.std_error}
    if config.n == 1:
        exact = exact_volume_n1(config)
        outputs["exact_n1"] = exact.value
        errors["exact_n1"] = 0.0
    return _record(args, outputs, errors)


def _cmd_wp_ratio(args) -> RunRecord:
    config = ModelConfig(args.n, args.log_t2, args.c_log2)
    r = run_wp_ratio(config, args.samples, seed=args.seed, threads=args.threads)
    outputs = {
        "ratio": r.ratio,
        "predicted": r.predicted,
        "rel_dev": r.rel_dev,
        "numerator": r.numerator.value,
        "volume": r.volume.value,
    }
    errors = {
        "ratio": r.std_error,
        "predicted": 0.0,
        "rel_dev": r.std_error / r.predicted,
        "numerator": r.numerator.std_error,
        "volume": r.volume.std_error,
    }
    return _record(args, outputs, errors)


def _cmd_sweep(args) -> RunRecord:
    if not args.log_t2_list:
        raise DomainError("--log-t2-list must name at least two values")
    config = ModelConfig(args.n, args.log_t2_list[0], args.c_log2)
    report = run_sweep(config, args.log_t2_list, args.samples, seed=args.seed,
                       threads=args.threads, fit_residual_tol=args.fit_tol)
    outputs = {
        "fitted_exponent": report.fitted_exponent,
        "fit_residual": report.fit_residual,
        "bound_spread": report.bound_spread,
    }
    errors = {
        "fitted_exponent": report.exponent_std_error,
        "fit_residual": 0.0,
        "bound_spread": 0.0,
    }
    for row in report.rows:
        tag = f"{row['lt']:g}"
        outputs[f"ratio@{tag}"] = row["ratio"]
        errors[f"ratio@{tag}"] = row["std_error"]
        outputs[f"predicted@{tag}"] = row["predicted"]
        errors[f"predicted@{tag}"] = 0.0
    return _record(args, outputs, errors,
                   extra_args={"log_t2_list": list(args.log_t2_list),
                               "fit_tol": args.fit_tol},
                   log_t2=None)


def _cmd_bounds_scan(args) -> RunRecord:
    config = ModelConfig(args.n, args.log_t2, args.c_log2)
    report = run_bounds_scan(config, args.samples, seed=args.seed)
    outputs = {
        "phi_min": report.phi_min,
        "phi_max": report.phi_max,
        "grad_phi_max": report.grad_phi_max,
        "frame_eig_min": report.frame_eig_min,
        "frame_eig_max": report.frame_eig_max,
        "curvature_sup": report.curvature_sup,
    }
    errors = {key: 0.0 for key in outputs}
    return _record(args, outputs, errors)


def _cmd_flow_check(args) -> RunRecord:
    config = ModelConfig(args.n, args.log_t2, args.c_log2)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=[args.seed])))
    bary = rng.dirichlet(np.ones(config.n + 1), size=args.samples)
    a0 = bary * config.lt  # rows sum to lt exactly up to rounding
    sigma = args.sigma

    full = flow_array(a0, sigma, args.steps)
    half1 = flow_array(a0, 0.5 * sigma, args.steps)
    half2 = flow_array(half1, 0.5 * sigma, args.steps)

    target = config.lt + 2.0 * sigma
    conservation = float(np.max(np.abs(full.sum(axis=1) - target)))
    composition = float(np.max(np.abs(half2 - full)))
    tol = 1e-9 * abs(config.lt)
    outputs = {
        "conservation_max_err": conservation,
        "composition_max_err": composition,
        "tolerance": tol,
    }
    errors = {key: 0.0 for key in outputs}
    if conservation > tol:
        raise InvariantViolation(
            f"flow conservation error {conservation:.3e} exceeds {tol:.3e}"
        )
    if composition > tol:
        raise InvariantViolation(
            f"flow composition error {composition:.3e} exceeds {tol:.3e}"
        )
    return _record(args, outputs, errors,
                   extra_args={"sigma": sigma, "steps": args.steps})


def _cmd_point_eval(args) -> RunRecord:
    config = ModelConfig(args.n, args.log_t2, args.c_log2)
    p = make_point(args.b, config, theta=args.theta)
    q = dominant_chart(p)
    coeffs = w_coefficients(p)
    eigs = frame_metric(q).eigenvalues()
    outputs = {
        "a2": a_squared(p),
        "phi": phi(p),
        "det": metric_determinant(p),
        "volume_density": volume_density(p),
        "dbar_norm_sq": dbar_w_norm_sq(p),
        "wp_integrand": wp_integrand(p),
        "frame_eig_min": float(eigs[0]),
        "frame_eig_max": float(eigs[-1]),
        "grad_phi_max": float(np.max(np.abs(grad_phi_frame(q)))),
        "curvature_sup": curvature_sup(q),
    }
    for k, c in enumerate(coeffs):
        outputs[f"c{k}"] = float(c)
    errors = {key: 0.0 for key in outputs}
    return _record(args, outputs, errors,
                   extra_args={"b": list(map(float, args.b)),
                               "theta": None if args.theta is None
                               else list(map(float, args.theta))})


_DISPATCH = {
    "volume": _cmd_volume,
    "wp-ratio": _cmd_wp_ratio,
    "sweep": _cmd_sweep,
    "bounds-scan": _cmd_bounds_scan,
    "flow-check": _cmd_flow_check,
    "point-eval": _cmd_point_eval,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"cusplab: error: {exc}", file=sys.stderr)
        return 1

    start = time.perf_counter()
    try:
        record = _DISPATCH[args.command](args)
    except (DomainError, SamplerError, ChartError) as exc:
        print(f"cusplab: error: {exc}", file=sys.stderr)
        return 1
    except (InvariantViolation, IdentityViolation, FitError) as exc:
        print(f"cusplab: invariant failure: {exc}", file=sys.stderr)
        return 2

    if args.timing:
        record.outputs["wall_time_ms"] = (time.perf_counter() - start) * 1000.0
        record.std_errors["wall_time_ms"] = 0.0

    text = record.to_json() if args.format == "json" else record.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
