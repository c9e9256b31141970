"""Command-line front end.

Examples::

    maxjump analyze --system sys.json
    maxjump certify --system line.json --gamma e^2.5 --k0-max 2 --out run/
    maxjump simulate --system line.json --input linear:T=2.5 --paths 200 --horizon 500 --out run/
    maxjump reproduce production

Exit codes: 0 ok, 2 certificate not found or rejected, 3 input error,
4 path-count cap exceeded.
"""

import argparse
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import reproduce
from .deterministic import DEFAULT_MARGIN, find_det_certificate, max_cycle_mean, verify_det_certificate
from .errors import CertificateRejected, DegenerateData, Infeasible, MaxJumpError, NotFound, PathExplosion
from .io import FileFormatError, certificate_to_dict, load_certificate, load_system
from .markov import transform_system
from .montecarlo import (
    INPUT_TIMINGS,
    LinearInput,
    _norms,
    estimate_lyapunov_exponent,
    fit_mean_norm_decay,
    simulate_batch,
    throughput_lags,
    write_trace_csv,
)
from .semiring import MAX_PLUS, exp_transform
from .stochastic import PATH_CAP, SearchOptions, search_certificate, verify_k_step

EXIT_OK, EXIT_REJECTED, EXIT_INPUT, EXIT_CAP = 0, 2, 3, 4


def parse_gamma(text):
    """``"12.18"``, ``"e^2.5"`` or ``"exp(2.5)"``."""
    s = str(text).strip().lower().replace(" ", "")
    if s.startswith("e^"):
        value = math.exp(float(s[2:]))
    elif s.startswith("exp(") and s.endswith(")"):
        value = math.exp(float(s[4:-1]))
    else:
        value = float(s)
    if not value > 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"gamma must be a finite positive number, got {text!r}")
    return value


def parse_input(text):
    """``linear:T=2.5[,delta=0.1]``."""
    kind, _, rest = text.partition(":")
    if kind != "linear" or not rest:
        raise argparse.ArgumentTypeError(f"expected linear:T=..[,delta=..], got {text!r}")
    fields = {}
    for item in rest.split(","):
        key, eq, value = item.partition("=")
        if not eq or key not in ("T", "delta"):
            raise argparse.ArgumentTypeError(f"bad input field {item!r}")
        fields[key] = float(value)
    if "T" not in fields:
        raise argparse.ArgumentTypeError("linear input needs T")
    return LinearInput(fields["T"], fields.get("delta", 0.0))


def parse_vector(text):
    return [float(v) for v in text.split(",")]


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else "-inf" if x < 0 else "nan"
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return x


def _dump(doc):
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def _config(args):
    # the output directory is left out so replays into different directories match byte for byte
    skip = {"func", "out", "json"}
    cfg = {k: v for k, v in vars(args).items() if k not in skip}
    if isinstance(cfg.get("input"), LinearInput):
        cfg["input"] = {"kind": "linear", "T": cfg["input"].T, "delta": cfg["input"].delta}
    return cfg


def _finish(args, doc, text_lines, name):
    doc = {"config": _config(args), **doc}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(_dump(doc))
    if getattr(args, "json", False):
        sys.stdout.write(_dump(doc))
    else:
        for line in text_lines:
            print(line)


def _fmt(v):
    return f"{float(v):.6g}"


# analyze


def _tightest_certificate(a, mean, margin):
    # slack just above the cycle mean when possible, else the requested margin
    tight = 1 - mean * (1 + 1e-9)
    if tight > margin:
        try:
            return find_det_certificate(a, tight)
        except Infeasible:
            pass
    return find_det_certificate(a, margin)


def cmd_analyze(args):
    system, chain = load_system(args.system)
    lines, modes = [], []
    if system.algebra is MAX_PLUS:
        if args.gamma is None:
            for y, a in enumerate(system.A, 1):
                mean = max_cycle_mean(a)
                modes.append({"mode": y, "cycle_mean": mean})
                lines.append(f"mode {y}: max cycle mean {_fmt(mean)} (growth rate per step; pass --gamma for a verdict)")
            _finish(args, {"algebra": "max-plus", "modes": modes}, lines, "analysis.json")
            return EXIT_OK
        mats = [exp_transform(a, args.gamma) for a in system.A]
        lines.append(f"max-plus system analysed through exp(.)/gamma, gamma = {_fmt(args.gamma)}")
    else:
        mats = system.A
    for y, a in enumerate(mats, 1):
        mean = max_cycle_mean(a)
        entry = {"mode": y, "cycle_mean": mean, "stable": bool(mean < 1)}
        if mean >= 1:
            lines.append(f"mode {y}: unstable (cycle mean {_fmt(mean)})")
        else:
            try:
                cert = _tightest_certificate(a, mean, args.margin)
            except Infeasible:
                entry["certificate"] = None
                lines.append(f"mode {y}: stable (cycle mean {_fmt(mean)}), no certificate at margin {args.margin:g}")
            else:
                entry["certificate"] = {"p": cert.p, "slack": float(cert.slack)}
                lines.append(f"mode {y}: stable (cycle mean {_fmt(mean)}), certificate p = {np.round(cert.p, 6).tolist()}, slack {_fmt(cert.slack)}")
        if args.verify_p is not None:
            try:
                chk = verify_det_certificate(a, args.verify_p)
                entry["supplied"] = {"p": args.verify_p, "slack": str(chk.slack), "accepted": True}
                lines.append(f"mode {y}: supplied p = {args.verify_p} verified, slack {chk.slack}")
            except CertificateRejected as exc:
                entry["supplied"] = {"p": args.verify_p, "accepted": False, "index": exc.index}
                lines.append(f"mode {y}: supplied p rejected at index {exc.index + 1}")
        modes.append(entry)
    _finish(args, {"algebra": "max-product", "modes": modes}, lines, "analysis.json")
    if args.verify_p is not None and not all(m["supplied"]["accepted"] for m in modes):
        return EXIT_REJECTED
    return EXIT_OK


# certify


def _delta_table(cert):
    lines = [f"k0 = {cert.k0}", "mode  delta"]
    lines += [f"{y:>4}  {d:.6f}" for y, d in enumerate(cert.delta, 1)]
    return lines


def cmd_certify(args):
    system, chain = load_system(args.system)
    gamma = None
    if system.algebra is MAX_PLUS:
        if args.gamma is None:
            raise FileFormatError("max-plus systems are certified through exp(.)/gamma; --gamma is required")
        gamma = args.gamma
        system = transform_system(system.free(), gamma)
    else:
        system = system.free()
    if args.verify_p:
        given = load_certificate(args.verify_p)
        try:
            cert = verify_k_step(system, chain, given.p, given.k0, args.cap, gamma)
        except CertificateRejected as exc:
            lines = [f"supplied certificate rejected: {exc}"]
            _finish(args, {"verified": False, "deltas": exc.deltas, "worst_mode": exc.index}, lines, "certificate.json")
            return EXIT_REJECTED
        doc = {"verified": True, "certificate": certificate_to_dict(cert)}
        _finish(args, doc, ["supplied certificate verified"] + _delta_table(cert), "certificate.json")
        return EXIT_OK
    opts = SearchOptions(margin=args.margin, restarts=args.restarts, seed=args.seed, cap=args.cap)
    try:
        cert = search_certificate(system, chain, args.k0_max, opts)
    except NotFound as exc:
        lines = [
            f"no certificate found: {exc}",
            "not found does not mean unstable; try a larger --k0-max or a smaller --margin",
        ]
        _finish(args, {"found": False, "best_objective": exc.best_objective}, lines, "certificate.json")
        return EXIT_REJECTED
    cert_doc = certificate_to_dict(cert)
    if gamma is not None:
        cert_doc["gamma"] = gamma
    _finish(args, {"found": True, "certificate": cert_doc}, ["certificate found"] + _delta_table(cert), "certificate.json")
    return EXIT_OK


# simulate


def cmd_simulate(args):
    system, chain = load_system(args.system)
    if args.input is not None and system.B is None:
        raise FileFormatError("--input given but the system has no B matrices")
    if args.x0 is None:
        x0 = np.zeros(system.n) if system.algebra is MAX_PLUS else np.ones(system.n)
    else:
        x0 = np.asarray(args.x0, dtype=float)
    run_sys = system if args.input is not None else system.free()
    batch = simulate_batch(run_sys, chain, x0, args.y0, args.horizon, args.paths, args.seed, args.input, args.timing)
    summary = {"paths": args.paths, "horizon": args.horizon, "final_norm_max": float(_norms(batch.states[:, -1], system.algebra).max())}
    lines = [f"simulated {args.paths} paths x {args.horizon} steps, seed {args.seed}"]
    if system.algebra is MAX_PLUS:
        if args.input is not None:
            lags = throughput_lags(
                system, chain, args.input.T, args.horizon, args.paths, args.seed, x0, args.y0, args.input.delta, args.timing
            )
            summary["lags"] = [asdict(s) for s in lags]
            lines.append("state  median     q95        q99        max        q99 slope")
            for i, s in enumerate(lags, 1):
                lines.append(f"{i:>5}  {s.median:<9.4g}  {s.q95:<9.4g}  {s.q99:<9.4g}  {s.max:<9.4g}  {s.slope_q99:.3e}")
        if np.isfinite(x0).all():
            ell = estimate_lyapunov_exponent(system, chain, x0, args.y0, args.paths, args.horizon, args.seed)
            summary["lyapunov_exponent"] = ell
            lines.append(f"Lyapunov exponent estimate {ell:.6g}")
        if args.gamma is not None:
            k = np.arange(args.horizon + 1)
            ok = (batch.states < (k * math.log(args.gamma))[None, :, None]).all(axis=2)
            summary["growth_bound_fraction"] = float(ok[:, args.horizon // 10 :].all(axis=1).mean())
    else:
        try:
            fit = fit_mean_norm_decay(system, chain, x0, args.y0, args.paths, args.horizon, args.seed)
            summary["decay"] = {"a_hat": fit.a_hat, "L_hat": fit.L_hat, "residual": fit.residual, "window": fit.window}
            lines.append(f"decay fit a_hat = {fit.a_hat:.6g}, L_hat = {fit.L_hat:.6g}, residual {fit.residual:.4g}")
        except DegenerateData as exc:
            summary["decay"] = None
            lines.append(f"decay fit skipped: {exc}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        width = len(str(args.paths - 1))
        for p in range(args.paths):
            write_trace_csv(batch[p], out / f"trace_{p:0{width}d}.csv")
    _finish(args, {"summary": summary}, lines, "summary.json")
    return EXIT_OK


# reproduce


def cmd_reproduce(args):
    names = reproduce.EXAMPLES if args.example == "all" else (args.example,)
    results = {}
    lines = []
    for name in names:
        checks = reproduce.run(name, args.seed)
        results[name] = [asdict(c) for c in checks]
        lines += [f"{name} {c.line()}" for c in checks]
    passed = all(c["passed"] for cs in results.values() for c in cs)
    lines.append("all checks passed" if passed else "some checks FAILED")
    _finish(args, {"results": results, "passed": passed}, lines, "reproduce.json")
    return EXIT_OK if passed else EXIT_REJECTED


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors, not rejections
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(
        prog="maxjump",
        description="Stability certificates and simulation for max-plus / max-product jump systems.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="exit codes: 0 ok, 2 not found or rejected, 3 input error, 4 path cap exceeded",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, system=True):
        if system:
            p.add_argument("--system", required=True, metavar="FILE", help="system JSON file")
        p.add_argument("--seed", type=int, default=0, help="base random seed (default: 0)")
        p.add_argument("--out", metavar="DIR", help="write JSON (and CSV) outputs here")
        p.add_argument("--json", action="store_true", help="print JSON instead of text")

    p = sub.add_parser("analyze", help="per-mode cycle means and deterministic certificates")
    common(p)
    p.add_argument("--margin", type=float, default=DEFAULT_MARGIN)
    p.add_argument("--gamma", type=parse_gamma, help="for max-plus files: analyse exp(A)/gamma")
    p.add_argument("--verify-p", type=parse_vector, metavar="P1,P2,..", help="also check this vector for every mode")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("certify", help="search or verify a stochastic Lyapunov certificate")
    common(p)
    p.add_argument("--k0-max", type=int, default=1)
    p.add_argument("--margin", type=float, default=DEFAULT_MARGIN)
    p.add_argument("--gamma", type=parse_gamma, help="required for max-plus files, e.g. e^2.5")
    p.add_argument("--restarts", type=int, default=SearchOptions.restarts)
    p.add_argument("--cap", type=int, default=PATH_CAP, help="maximum number of mode paths M^k0")
    p.add_argument("--verify-p", metavar="FILE", help="verify this certificate file instead of searching")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("simulate", help="Monte-Carlo traces and estimator summary")
    common(p)
    p.add_argument("--horizon", type=int, default=60)
    p.add_argument("--paths", type=int, default=10)
    p.add_argument("--x0", type=parse_vector, help="initial state (default: ones, or zeros for max-plus)")
    p.add_argument("--y0", type=int, default=1, help="initial mode, 1-based")
    p.add_argument("--input", type=parse_input, help="linear:T=..[,delta=..]")
    p.add_argument("--timing", choices=INPUT_TIMINGS, default="next", help="step k uses u_k (current) or u_{k+1} (next)")
    p.add_argument("--gamma", type=parse_gamma, help="max-plus: also report the fraction below k ln(gamma)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reproduce", help="run a built-in example and its checks")
    p.add_argument("example", choices=(*reproduce.EXAMPLES, "all"))
    common(p, system=False)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PathExplosion as exc:
        print(f"error: {exc} (k0 = {exc.k0})", file=sys.stderr)
        return EXIT_CAP
    except (NotFound, CertificateRejected) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    except (MaxJumpError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
