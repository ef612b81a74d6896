"""Command-line front end: one JSON job in, JSON or CSV out.

A job is a single JSON document selected with --job (path or '-' for
stdin).  Its "command" key picks the operation:

* ``biorth``        build the biorthogonal system; JSON (or h_sq CSV)
* ``avg``           one characteristic-polynomial average; JSON
* ``kernels``       tabulate a kernel or transform on a grid; CSV
* ``traces``        trace-product average with oracle comparison; JSON
* ``correlations``  eigenvalue intensity on a grid; CSV
* ``verify``        run the named invariant suite; pass/fail lines

Complex numbers are [re, im] pairs everywhere.  Unknown job keys are
rejected.  Exit status: 0 success (and every verify check passed),
1 computation error, 2 malformed job; errors are emitted as JSON on
stdout with a machine-readable "error" object.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .averages import SourceConfig, average
from .applications import correlation, trace_product_average
from .biorth import build_system
from .errors import TwoMatrixError
from .kernels import (
    KernelContext,
    k11,
    k11_tilde,
    k12,
    k12_tilde,
    k21,
    k21_tilde,
    k22,
    k22_tilde,
)
from .model import ModelSpec
from .oracle import oracle_average, oracle_trace_moments
from .transforms import TransformEvaluator
from .verification import run_all_checks

_CSV_HELP = """\
CSV columns by command:
  kernels (kernel entries):  kernel,n,re_arg1,im_arg1,re_arg2,im_arg2,re_val,im_val
  kernels (transforms P/Q):  index,re_arg,im_arg,re_val,im_val
  correlations:              lambda,mu,r_value   (mu column omitted if no mu grid)
  biorth with format=h_sq_csv: n,h_sq
"""

_KERNELS = {
    "k11": (k11, False),
    "k12": (k12, False),
    "k21": (k21, False),
    "k22": (k22, False),
    "k11_tilde": (k11_tilde, True),
    "k12_tilde": (k12_tilde, False),
    "k21_tilde": (k21_tilde, True),
    "k22_tilde": (k22_tilde, True),
}
_TRANSFORMS = ("P", "Q", "P_tilde", "Q_tilde")


class JobError(ValueError):
    pass


def _require_keys(job, allowed, required):
    unknown = set(job) - set(allowed)
    if unknown:
        raise JobError(f"unknown job keys: {sorted(unknown)}")
    missing = set(required) - set(job)
    if missing:
        raise JobError(f"missing job keys: {sorted(missing)}")


def _complex_list(raw, what):
    out = []
    for item in raw:
        if not (isinstance(item, (list, tuple)) and len(item) == 2):
            raise JobError(f"{what} entries must be [re, im] pairs")
        out.append(complex(float(item[0]), float(item[1])))
    return out


def _grid(spec, what):
    allowed = {"min", "max", "count", "imag"}
    unknown = set(spec) - allowed
    if unknown:
        raise JobError(f"unknown {what} grid keys: {sorted(unknown)}")
    pts = np.linspace(float(spec["min"]), float(spec["max"]), int(spec["count"]))
    return pts + 1j * float(spec.get("imag", 0.0))


def _pair(z):
    z = complex(z)
    return [z.real, z.imag]


def _model_from(job):
    if "model" not in job:
        raise JobError("missing job keys: ['model']")
    try:
        return ModelSpec.from_json(job["model"])
    except (KeyError, TypeError) as exc:
        raise JobError(f"bad model: {exc}") from exc


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _cmd_biorth(job, args):
    _require_keys(job, {"command", "model", "N", "format"}, {"model", "N"})
    model = _model_from(job)
    n_max = int(job["N"])
    sys_ = build_system(
        model,
        n_max,
        node_count=args.nodes,
        allow_high_order=n_max <= args.max_n,
        tol=args.tol,
    )
    fmt = job.get("format", "json")
    if fmt == "h_sq_csv":
        _emit(sys_.h_sq_csv(), args.out)
    elif fmt == "json":
        _emit(sys_.to_json(), args.out)
    else:
        raise JobError(f"unknown format {fmt!r}")
    return 0


def _cmd_avg(job, args):
    _require_keys(
        job,
        {"command", "model", "n", "xs", "ys", "vs", "ws", "p_shift"},
        {"model", "n"},
    )
    model = _model_from(job)
    n = int(job["n"])
    cfg = SourceConfig.make(
        _complex_list(job.get("xs", []), "xs"),
        _complex_list(job.get("ys", []), "ys"),
        _complex_list(job.get("vs", []), "vs"),
        _complex_list(job.get("ws", []), "ws"),
    )
    i_, j_, k_, l_ = cfg.counts
    order = max(n + max(i_ - k_, j_ - l_, 0), n, 1)
    sys_ = build_system(model, min(max(order, 1), args.max_n), node_count=args.nodes)
    tev = TransformEvaluator(model, sys_, node_count=args.nodes, memoize=True)
    ctx = KernelContext(model, sys_, tev, n)
    p_shift = job.get("p_shift")
    res = average(ctx, cfg, p_shift=None if p_shift is None else int(p_shift))
    payload = {
        "value": _pair(res.value),
        "formula_used": res.formula_used,
        "p_index_used": res.p_index_used,
        "condition_estimate": res.condition_estimate,
    }
    if args.with_oracle:
        want = oracle_average(model, n, cfg)
        payload["oracle_value"] = _pair(want)
        payload["rel_err"] = abs(res.value - want) / max(abs(want), 1e-300)
    _emit(json.dumps(payload), args.out)
    return 0


def _cmd_kernels(job, args):
    _require_keys(
        job,
        {"command", "model", "kernel", "n", "arg1", "arg2", "index", "arg"},
        {"model", "kernel"},
    )
    model = _model_from(job)
    name = job["kernel"]
    if name in _TRANSFORMS:
        index = int(job.get("index", 0))
        pts = _grid(job["arg"], "arg")
        order = max(index, 1)
        sys_ = build_system(model, order, node_count=args.nodes)
        tev = TransformEvaluator(model, sys_, node_count=args.nodes, memoize=True)
        fn = getattr(tev, name)
        lines = ["index,re_arg,im_arg,re_val,im_val"]
        for z in pts:
            z = complex(z)
            val = complex(fn(index, z))
            lines.append(f"{index},{z.real!r},{z.imag!r},{val.real!r},{val.imag!r}")
        _emit("\n".join(lines) + "\n", args.out)
        return 0
    if name not in _KERNELS:
        raise JobError(f"unknown kernel {name!r}")
    if "n" not in job:
        raise JobError("missing job keys: ['n']")
    n = int(job["n"])
    fn, _ = _KERNELS[name]
    sys_ = build_system(model, max(n, 1), node_count=args.nodes)
    tev = TransformEvaluator(model, sys_, node_count=args.nodes, memoize=True)
    ctx = KernelContext(model, sys_, tev, n)
    pts1 = _grid(job["arg1"], "arg1")
    pts2 = _grid(job["arg2"], "arg2")
    lines = ["kernel,n,re_arg1,im_arg1,re_arg2,im_arg2,re_val,im_val"]
    for z1 in pts1:
        for z2 in pts2:
            z1c, z2c = complex(z1), complex(z2)
            a1 = z1c if z1c.imag else z1c.real
            a2 = z2c if z2c.imag else z2c.real
            val = complex(fn(ctx, a1, a2))
            lines.append(
                f"{name},{n},{z1c.real!r},{z1c.imag!r},{z2c.real!r},{z2c.imag!r},"
                f"{val.real!r},{val.imag!r}"
            )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_traces(job, args):
    _require_keys(job, {"command", "model", "n", "m", "p"}, {"model", "n"})
    model = _model_from(job)
    n = int(job["n"])
    m_list = [int(v) for v in job.get("m", [])]
    p_list = [int(v) for v in job.get("p", [])]
    sys_ = build_system(model, max(n, 1), node_count=args.nodes)
    tev = TransformEvaluator(model, sys_, node_count=args.nodes, memoize=True)
    ctx = KernelContext(model, sys_, tev, n)
    got = trace_product_average(ctx, m_list, p_list)
    want = oracle_trace_moments(model, n, m_list, p_list)
    payload = {
        "value": got,
        "oracle_value": want,
        "abs_err": abs(got - want),
        "rel_err": abs(got - want) / max(abs(want), 1.0),
    }
    _emit(json.dumps(payload), args.out)
    return 0


def _cmd_correlations(job, args):
    _require_keys(
        job, {"command", "model", "n", "lambda_grid", "mu_grid"}, {"model", "n", "lambda_grid"}
    )
    model = _model_from(job)
    n = int(job["n"])
    sys_ = build_system(model, max(n, 1), node_count=args.nodes)
    tev = TransformEvaluator(model, sys_, node_count=args.nodes, memoize=True)
    ctx = KernelContext(model, sys_, tev, n)
    lam = _grid(job["lambda_grid"], "lambda_grid").real
    if "mu_grid" in job:
        mu = _grid(job["mu_grid"], "mu_grid").real
        lines = ["lambda,mu,r_value"]
        for a in lam:
            for b in mu:
                lines.append(
                    f"{float(a)!r},{float(b)!r},{correlation(ctx, [a], [b])!r}"
                )
    else:
        lines = ["lambda,r_value"]
        for a in lam:
            lines.append(f"{float(a)!r},{correlation(ctx, [a], [])!r}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_verify(job, args):
    _require_keys(job, {"command", "model", "max_n"}, set())
    model = (
        _model_from(job)
        if "model" in job
        else ModelSpec((0.0, 0.0, 0.5), (0.0, 0.0, 0.5), 0.5)
    )
    n_max = int(job.get("max_n", 4))
    results = run_all_checks(model, n_max=n_max, node_count=args.nodes, seed=args.seed)
    lines = []
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        lines.append(f"{status} {res.name}: residual={res.residual:.3e} tol={res.tol:.1e}")
    ok = all(r.passed for r in results)
    lines.append(f"{'OK' if ok else 'FAILED'}: {sum(r.passed for r in results)}/{len(results)} checks passed")
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if ok else 1


_COMMANDS = {
    "biorth": _cmd_biorth,
    "avg": _cmd_avg,
    "kernels": _cmd_kernels,
    "traces": _cmd_traces,
    "correlations": _cmd_correlations,
    "verify": _cmd_verify,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="twomatrix",
        description="Two-matrix model toolkit: one JSON job per invocation.",
        epilog=_CSV_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--job", required=True, help="job JSON path, or '-' for stdin")
    parser.add_argument("--out", help="write the artifact to this file")
    parser.add_argument(
        "--with-oracle", action="store_true", help="attach oracle value to avg jobs"
    )
    parser.add_argument("--nodes", type=int, default=200, help="quadrature nodes per axis")
    parser.add_argument("--tol", type=float, default=1e-9, help="quadrature tolerance")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    parser.add_argument(
        "--max-n", type=int, default=12, help="order guard override for biorth"
    )
    args = parser.parse_args(argv)

    try:
        raw = sys.stdin.read() if args.job == "-" else open(args.job).read()
        job = json.loads(raw)
        if not isinstance(job, dict):
            raise JobError("job must be a JSON object")
        command = job.get("command")
        if command not in _COMMANDS:
            raise JobError(f"unknown command {command!r}")
    except (OSError, json.JSONDecodeError, JobError) as exc:
        payload = {"error": {"kind": "parse", "message": str(exc)}}
        if isinstance(exc, json.JSONDecodeError):
            payload["error"]["line"] = exc.lineno
            payload["error"]["column"] = exc.colno
        print(json.dumps(payload))
        return 2

    try:
        return _COMMANDS[command](job, args)
    except JobError as exc:
        print(json.dumps({"error": {"kind": "parse", "message": str(exc)}}))
        return 2
    except (TwoMatrixError, ValueError, IndexError, ArithmeticError) as exc:
        print(
            json.dumps(
                {"error": {"kind": type(exc).__name__, "message": str(exc)}}
            )
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
