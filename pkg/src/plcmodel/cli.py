"""Command-line front end: ``plcmodel simulate|classify|fit|portrait``.

JSON goes to stdout (or ``--json PATH``) with sorted keys and numbers
rounded to 6 significant digits unless ``--full-precision`` is given.
Exit codes: 0 ok, 2 usage or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from .core import DomainError, ModelParams, ParameterError, Regime, classify_regime, make_state
from .critical import critical_points, nullclines, outcome_taxonomy
from .fit import (
    ModelFamily,
    long_term_outcome,
    load_csv,
    model_eval,
    predict_holdout,
    fit,
)
from .integrate import DEFAULT_TOL, IntegrationError, integrate, settle, trace_separatrix

logger = logging.getLogger("plcmodel")

DEFAULT_SEED = 20240101
EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ---------------------------------------------------------------- output


def _round(obj, full: bool):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return obj if full else float(f"{obj:.6g}")
    if isinstance(obj, dict):
        return {str(k): _round(v, full) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v, full) for v in obj]
    if isinstance(obj, np.generic):
        return _round(obj.item(), full)
    if isinstance(obj, complex):
        return {"re": _round(obj.real, full), "im": _round(obj.imag, full)}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(report: dict, args):
    text = json.dumps(_round(report, args.full_precision), sort_keys=True, indent=2, ensure_ascii=False)
    if args.json:
        Path(args.json).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


# ---------------------------------------------------------------- helpers


def _params(args) -> ModelParams:
    return ModelParams(args.alpha, args.beta, args.gamma, args.delta)


def _eig(vals):
    return [{"re": v.real, "im": v.imag} if v.imag else v.real for v in vals]


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("PLC_SEED")
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"PLC_SEED must be an integer, got {env!r}") from None


def _tol(args):
    if not (args.atol > 0 and args.rtol > 0):
        raise UsageError("tolerances must be positive")
    return (args.atol, args.rtol)


# ---------------------------------------------------------------- subcommands


def cmd_simulate(args) -> dict:
    p = _params(args)
    s0 = make_state(args.x0, args.y0)
    tol = _tol(args)
    if args.horizon is not None and not args.horizon > 0:
        raise UsageError(f"--horizon must be positive, got {args.horizon}")
    t_eval = None
    if args.dt is not None:
        if args.horizon is None or not args.dt > 0:
            raise UsageError("--dt needs a positive value and an explicit --horizon")
        t_eval = np.arange(0.0, args.horizon + 0.5 * args.dt, args.dt)
    if args.horizon is None:
        traj = settle(p, s0, tol)
    else:
        traj = integrate(p, s0, args.horizon, tol=tol, stop_on_fate=t_eval is None, t_eval=t_eval)
    rows = zip(traj.t, traj.x, traj.y)
    if t_eval is not None:
        keep = set(t_eval.tolist())
        rows = [r for r in rows if r[0] in keep]
    if args.csv:
        _write_csv(args.csv, ["t", "x", "y"], rows)
    return {
        "params": dict(zip(("alpha", "beta", "gamma", "delta"), p.as_tuple())),
        "regime": classify_regime(p).value,
        "initial": [s0.x, s0.y],
        "final": [float(traj.x[-1]), float(traj.y[-1])],
        "t_end": float(traj.t[-1]),
        "fate": traj.fate.as_dict(),
        "step_stats": traj.step_stats.as_dict(),
    }


def classify_report(p: ModelParams) -> dict:
    cs = critical_points(p)
    nc = nullclines(p)
    rep = outcome_taxonomy(p)

    def line(ln):
        return {"a": ln.a, "b": ln.b, "c": ln.c, "slope": ln.slope, "intercept": ln.intercept}

    return {
        "params": dict(zip(("alpha", "beta", "gamma", "delta"), p.as_tuple())),
        "regime": rep.regime.value,
        "D": p.D,
        "critical_points": [
            {
                "kind": cp.kind,
                "location": [cp.location.x, cp.location.y],
                "eigenvalues": _eig(cp.eigenvalues),
                "stability": cp.stability.value,
            }
            for cp in cs.points
        ],
        "critical_segments": [
            {"kind": seg.kind, "from": [seg.start.x, seg.start.y], "to": [seg.end.x, seg.end.y]}
            for seg in cs.segments
        ],
        "everywhere_critical": cs.everywhere,
        "nullclines": {"g_x": line(nc.g_x), "g_y": line(nc.g_y)},
        "limit_objects": [o.describe() for o in rep.objects],
        "outcomes": sorted(rep.labels()),
        "sectors": list(rep.sectors),
    }


def cmd_classify(args) -> dict:
    return classify_report(_params(args))


def _family_block(res) -> dict:
    block = {
        "params": {
            name: {"value": v, "sigma": s}
            for name, v, s in zip(res.family.names, res.theta.tolist(), res.sigma.tolist())
        },
        "table": [f"{n}: {v:.4f} ± {s:.4f}" for n, v, s in zip(res.family.names, res.theta, res.sigma)],
        "rss": res.rss,
        "rmse": res.rmse,
        "converged": res.converged,
        "iterations": res.n_iter,
        "n_points": res.n_points,
        "start_index": res.start_index,
    }
    if res.flagged:
        block["flagged"] = list(res.flagged)
    if res.fixed:
        block["fixed"] = list(res.fixed)
    if res.family is ModelFamily.PLC:
        out = long_term_outcome(res)
        block["predicted_outcome"] = {
            "label": out.label,
            "share": out.share,
            "regime": out.regime,
            "fate": out.fate.as_dict(),
        }
    return block


def _parse_fixed(items) -> dict:
    fixed = {}
    for item in items or []:
        name, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"--fix expects name=value, got {item!r}")
        try:
            fixed[name.strip()] = float(val)
        except ValueError:
            raise UsageError(f"--fix {name}: malformed number {val!r}") from None
    return fixed


def cmd_fit(args) -> dict:
    data = load_csv(args.data)
    families = list(ModelFamily) if "all" in args.family else [ModelFamily(f) for f in args.family]
    families = list(dict.fromkeys(families))
    if args.multistart < 1:
        raise UsageError("--multistart must be at least 1")
    if args.emit_curve and len(families) != 1:
        raise UsageError("--emit-curve needs exactly one --family")
    kw = dict(
        multistart=args.multistart,
        seed=_seed(args),
        fixed=_parse_fixed(args.fix),
        allow_negative=args.allow_negative,
    )
    report = {"dataset": data.label, "n_points": len(data), "seed": kw["seed"], "families": {}}
    for fam in families:
        if args.holdout:
            ho = predict_holdout(fam, data, args.holdout, **kw)
            block = _family_block(ho.fit)
            block["holdout"] = [
                {"t": t, "observed": o, "predicted": q}
                for t, o, q in zip(ho.t.tolist(), ho.observed.tolist(), ho.predicted.tolist())
            ]
            block["holdout_rmse"] = float(np.sqrt(np.mean(ho.residuals**2)))
            report["families"][f"{fam.title}-predict"] = block
            res = ho.fit
        else:
            res = fit(fam, data, **kw)
            report["families"][fam.title] = _family_block(res)
        if args.emit_curve:
            tt = np.linspace(data.t[0], data.t[-1], args.curve_points)
            _write_csv(args.emit_curve, ["t", "value"], zip(tt, model_eval(fam, res.theta, tt)))
    return report


def cmd_portrait(args) -> dict:
    p = _params(args)
    regime = classify_regime(p)
    if regime is not Regime.GENERIC:
        raise UsageError(
            f"portrait needs the generic regime (two transversal nullclines, saddle C); "
            f"these parameters are {regime.value}"
        )
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    nc = nullclines(p)
    _write_csv(
        out / "nullclines.csv",
        ["curve", "x", "y"],
        [(name, x, y) for name in ("g_x", "g_y") for x, y in nc.polyline(name, args.polyline_points)],
    )
    b1, b2 = trace_separatrix(p)
    _write_csv(
        out / "separatrix.csv",
        ["branch", "x", "y"],
        [(k, x, y) for k, br in enumerate((b1, b2)) for x, y in br],
    )
    cs = critical_points(p)
    tol = _tol(args)
    counts = {}
    rows = []
    n = args.n
    for i in range(n):
        for j in range(n):
            x, y = (i + 0.5) / n, (j + 0.5) / n
            if x + y >= 1.0:
                continue
            tr = settle(p, make_state(x, y), tol)
            target = tr.fate.target if tr.fate.converged else "undecided"
            rows.append((x, y, target))
            counts[target] = counts.get(target, 0) + 1
    _write_csv(out / "grid.csv", ["x", "y", "fate"], rows)
    c = cs.by_kind("C")
    return {
        "params": dict(zip(("alpha", "beta", "gamma", "delta"), p.as_tuple())),
        "regime": regime.value,
        "saddle": [c.location.x, c.location.y],
        "files": sorted(str(out / f) for f in ("nullclines.csv", "separatrix.csv", "grid.csv")),
        "grid_n": n,
        "fate_counts": counts,
        "separatrix_points": [len(b1), len(b2)],
    }


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="plcmodel", description="PC model of language change: simulate, classify, fit, portrait")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--json", metavar="PATH", help="write the JSON report here instead of stdout")
    common.add_argument("--full-precision", action="store_true", help="do not round JSON numbers")

    rates = _Parser(add_help=False)
    for name in ("alpha", "beta", "gamma", "delta"):
        rates.add_argument(f"--{name}", type=float, required=True)

    tols = _Parser(add_help=False)
    tols.add_argument("--atol", type=float, default=DEFAULT_TOL[0])
    tols.add_argument("--rtol", type=float, default=DEFAULT_TOL[1])

    p = sub.add_parser("simulate", parents=[common, rates, tols], help="integrate one trajectory")
    p.add_argument("--x0", type=float, required=True, help="initial progressive share")
    p.add_argument("--y0", type=float, required=True, help="initial conservative share")
    p.add_argument("--horizon", type=float, help="final time (default: escalate until the fate is decided)")
    p.add_argument("--dt", type=float, help="sample on a uniform grid instead of the accepted steps")
    p.add_argument("--csv", metavar="PATH", help="write t,x,y rows here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("classify", parents=[common, rates], help="regime, critical points, outcomes")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("fit", parents=[common], help="fit model families to a t,value CSV")
    p.add_argument("data", help="CSV with header t,value")
    p.add_argument(
        "--family",
        action="append",
        choices=[f.value for f in ModelFamily] + ["all"],
        help="pa, k2, k3, plc or all (repeatable; default all)",
    )
    p.add_argument("--holdout", type=int, default=0, help="fit without the last K points and predict them")
    p.add_argument("--multistart", type=int, default=8)
    p.add_argument("--seed", type=int, help="multistart seed (default: $PLC_SEED or a fixed constant)")
    p.add_argument("--allow-negative", action="store_true", help="PLC: admit one negative raw propensity")
    p.add_argument("--fix", action="append", metavar="NAME=VALUE", help="hold a parameter fixed")
    p.add_argument("--emit-curve", metavar="PATH", help="write a dense t,value curve of the fit")
    p.add_argument("--curve-points", type=int, default=200)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("portrait", parents=[common, rates, tols], help="nullclines, separatrix, basin grid")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n", type=int, default=20, help="grid cells per side")
    p.add_argument("--polyline-points", type=int, default=50)
    p.set_defaults(func=cmd_portrait)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "family", 1) is None:
            args.family = ["all"]
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        report = args.func(args)
        _emit(report, args)
    except UsageError as exc:
        print(f"plcmodel: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrationError as exc:
        print(f"plcmodel: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ParameterError, DomainError, ValueError, OSError) as exc:
        print(f"plcmodel: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
