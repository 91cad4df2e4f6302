"""Command line interface: ``lempert-lab <subcommand> [options]``.

Exit codes: 0 success, 1 computation failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import lab
from .bounds import CERTIFIED, Bound, Chain
from .domains import Ball, GMinus, GPlain, GTilde, PolyDisc, as_point, normal_point
from .errors import ArgumentError, CapabilityError, LabError
from .lower import (projection_kr_lower, projection_lower, sqrt_trick_kr_lower,
                    sqrt_trick_lower)
from .sibony import sibony_lower
from .upper import (STRATEGIES, kobayashi_distance_upper, kobayashi_royden_upper, normal_pair,
                    kr_decomposed_upper, lempert_chain_upper, lempert_upper)

_DOMAINS = {"G": GPlain, "Gtilde": GTilde, "Gminus": GMinus, "polydisc": PolyDisc, "ball": Ball}


class ConfigError(Exception):
    pass


def _mus(text):
    try:
        vals = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad mu list {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty mu list")
    return vals


def _vector(text):
    try:
        return np.array([complex(t.replace(" ", "")) for t in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad complex vector {text!r}") from None


def _common(p):
    p.add_argument("--mu", type=_mus, default=None, help="comma-separated exponents")
    p.add_argument("--eps-min", type=float, default=1e-6)
    p.add_argument("--eps-max", type=float, default=1e-2)
    p.add_argument("--eps-count", type=int, default=9)
    p.add_argument("--delta-rule", default="eps/2", help="eps/K, R*eps or a fraction R")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output path stem (writes .csv / .json)")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    p.add_argument("--certified-only", action="store_true")


def _point_args(p, vector=False):
    p.add_argument("--domain", choices=sorted(_DOMAINS), default="G")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--eps", type=float, default=None, help="use the normal point p_eps")
    p.add_argument("--z", type=_vector, default=None)
    if vector:
        p.add_argument("--X", type=_vector, default=None, help="tangent vector (default e1)")
    else:
        p.add_argument("--delta", type=float, default=None, help="second normal point p_delta")
        p.add_argument("--w", type=_vector, default=None)
    p.add_argument("--strategy", choices=STRATEGIES, default="best-of")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lempert-lab",
                                 description="Bounds for Lempert functions and invariant metrics")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="upper and lower bounds for ell(z, w)")
    _point_args(p)
    p.add_argument("--distance", action="store_true", help="also bound the Kobayashi distance")
    _common(p)

    p = sub.add_parser("chain", help="m-leg chain upper bound for ell^(m)(z, w)")
    _point_args(p)
    p.add_argument("--m", type=int, default=2)
    _common(p)

    p = sub.add_parser("metric", help="bounds for kappa, kappa^(m) and the Busemann metric")
    _point_args(p, vector=True)
    p.add_argument("--m", default="1", help="1, 2, ... or 'hat'")
    _common(p)

    p = sub.add_parser("asymptotics", help="exponent sweeps")
    p.add_argument("--experiment", choices=("exponents", "kr-gap", "minus-model"),
                   default="exponents")
    _common(p)

    p = sub.add_parser("qti", help="quasi triangle inequality ratio scan")
    _common(p)

    p = sub.add_parser("sibony", help="Sibony metric lower bounds")
    p.add_argument("--eps", type=float, default=None, help="single point instead of a sweep")
    p.add_argument("--X", type=_vector, default=None)
    _common(p)

    p = sub.add_parser("demo", help="punctured ball demonstration")
    p.add_argument("--pairs", type=int, default=20)
    _common(p)
    return ap


# --------------------------------------------------------------------------
# single-point commands


def _domain(args):
    cls = _DOMAINS[args.domain]
    if cls in (PolyDisc, Ball):
        return cls(args.n)
    mu = args.mu[0] if args.mu else 2.0
    return cls(mu, args.n)


def _point(dom, coords, t, name):
    if coords is not None:
        return coords
    if t is None:
        raise ConfigError(f"give --{name} or the matching normal-point parameter")
    return normal_point(dom, t).coords


def _bound_row(cmd, dom, args, b: Bound):
    return lab.Row(cmd, getattr(dom, "mu", None), getattr(args, "eps", None),
                   getattr(args, "delta", None), b.label(), b.direction, b.grade, b.value,
                   b.family or "")


def _emit(cmd, dom, args, bounds, extra=None):
    if args.certified_only:
        bounds = [b for b in bounds if b.grade == CERTIFIED]
    if args.fmt == "json":
        text = json.dumps({"command": cmd, "bounds": [b.to_json() for b in bounds],
                           **(extra or {})}, indent=2) + "\n"
    else:
        text = lab.rows_to_csv([_bound_row(cmd, dom, args, b) for b in bounds])
    if args.out:
        path = args.out + (".json" if args.fmt == "json" else ".csv")
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _lower_pair(dom, z, w):
    out = []
    try:
        out.append(projection_lower(dom, z, w))
    except CapabilityError:
        pass
    if isinstance(dom, (GPlain, GTilde)):
        try:
            np_ = normal_pair(dom, as_point(z), as_point(w))
            if np_ is not None:
                out.append(sqrt_trick_lower(dom, np_[1], np_[0]))
        except (ArgumentError, CapabilityError):
            pass
    return out


def cmd_bound(args):
    dom = _domain(args)
    z = _point(dom, args.z, args.delta, "z")
    w = _point(dom, args.w, args.eps, "w")
    bounds = [lempert_upper(dom, z, w, strategy=args.strategy, seed=args.seed)]
    bounds += _lower_pair(dom, z, w)
    if args.distance:
        bounds.append(kobayashi_distance_upper(dom, z, w, seed=args.seed))
    _emit("bound", dom, args, bounds)


def cmd_chain(args):
    dom = _domain(args)
    z = _point(dom, args.z, args.delta, "z")
    w = _point(dom, args.w, args.eps, "w")
    strategy = "explicit-family" if args.strategy == "best-of" and args.m > 1 else args.strategy
    ch: Chain = lempert_chain_upper(dom, z, w, m=args.m, strategy=strategy, seed=args.seed)
    agg = Bound("ell", ch.aggregate_ell, "upper", ch.grade, m=args.m, witness=ch,
                family="+".join(b.family or "" for b in ch.legs))
    bounds = [agg] + _lower_pair(dom, z, w)
    _emit("chain", dom, args, bounds, {"aggregate_l": ch.aggregate_l})


def cmd_metric(args):
    dom = _domain(args)
    z = _point(dom, args.z, args.eps, "z")
    X = args.X if args.X is not None else np.eye(dom.dim)[0]
    m = None if args.m == "hat" else int(args.m)
    if m == 1:
        bounds = [kobayashi_royden_upper(dom, z, X, strategy=args.strategy, seed=args.seed)]
    else:
        bounds = [kr_decomposed_upper(dom, z, X, m=m, strategy=args.strategy, seed=args.seed)]
    try:
        bounds.append(projection_kr_lower(dom, z, X))
    except CapabilityError:
        pass
    if args.eps is not None and args.z is None and isinstance(dom, (GPlain, GTilde)) \
            and np.all(X[1:] == 0):
        try:
            b = sqrt_trick_kr_lower(dom, args.eps)
            bounds.append(Bound(b.quantity, b.value * abs(X[0]), b.direction, b.grade, b.m,
                                family=b.family, details=b.details))
        except ArgumentError:
            pass
    _emit("metric", dom, args, bounds)


def cmd_sibony_point(args):
    mu = args.mu[0] if args.mu else 2.0
    X = args.X if args.X is not None else np.array([1.0, 0.0])
    b = sibony_lower(mu, args.eps, X, seed=args.seed)
    dom = GPlain(mu, X.size)
    _emit("sibony", dom, args, [b])


# --------------------------------------------------------------------------
# experiment commands


def _config(args, experiment, **extra):
    try:
        return lab.ExperimentConfig(experiment, mus=args.mu or (), eps_min=args.eps_min,
                                    eps_max=args.eps_max, eps_count=args.eps_count,
                                    delta_rule=args.delta_rule, seed=args.seed, out=args.out,
                                    fmt=args.fmt, certified_only=args.certified_only, **extra)
    except ArgumentError as exc:
        raise ConfigError(str(exc)) from None


def _run(cfg):
    if cfg.out:
        summ = lab.run_experiment(cfg)
        print(f"{cfg.experiment}: {'pass' if summ['pass'] else 'FAIL'} "
              f"({summ['rows']} rows, {len(summ['fits'])} fits) -> {cfg.out}")
        return
    res = lab.compute(cfg)
    if cfg.fmt == "json":
        sys.stdout.write(json.dumps(lab.summary(res), indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(lab.rows_to_csv(res.rows))


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "bound":
            cmd_bound(args)
        elif args.command == "chain":
            cmd_chain(args)
        elif args.command == "metric":
            cmd_metric(args)
        elif args.command == "asymptotics":
            _run(_config(args, args.experiment))
        elif args.command == "qti":
            _run(_config(args, "qti"))
        elif args.command == "sibony":
            if args.eps is not None:
                cmd_sibony_point(args)
            else:
                _run(_config(args, "sibony"))
        elif args.command == "demo":
            _run(_config(args, "punctured-demo", pairs=args.pairs))
    except (ConfigError, ArgumentError, CapabilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (LabError, ArithmeticError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
