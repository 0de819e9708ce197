"""Command-line entry point: ``riskattr <command> ...``.

Exit codes: 0 success, 1 axiom violation under ``--fail-on-violation``,
2 input or usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io as rio
from .attribution import QuadratureConfig, attribute
from .audit import AuditGrid, Axiom, TrainingDomain, Verdict, fit_domain, generate_leverage_data
from .audit import checks
from .audit.report import bundle_to_dict
from .core import Curvature, FeatureVector, Method
from .errors import RiskAttrError
from .pricing import BOND_FEATURES, MODEL_FACTORIES, bond_model, flat_vol_chain, vix_from_chain
from .surrogate import MlpSurrogate, TrainConfig, surrogate_shape, synthetic_bsm_records, train_surrogate

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2
MODEL_SOURCES = ("bond", "bsm-call", "bsm-put", "surrogate-file")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _out(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- models

def _params(items: Sequence[str]) -> dict[str, float]:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise _UsageError(f"--param expects NAME=VALUE, got {item!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise _UsageError(f"--param {key} needs a number, got {value!r}") from None
    return out


def _load_model(source: str, model_file: str | None, params: dict[str, float], kind: str | None = None):
    if source == "bond":
        unknown = set(params) - {"T"}
        if unknown:
            raise _UsageError(f"bond model takes only T, got {sorted(unknown)}")
        return bond_model(params.get("T", 10.0))
    if params:
        raise _UsageError(f"model {source} takes no --param")
    if source in MODEL_FACTORIES:
        return MODEL_FACTORIES[source]()
    if source == "surrogate-file":
        if not model_file:
            raise _UsageError("surrogate-file needs --model-file")
        net = MlpSurrogate.load(model_file)
        kind = kind or net.info.get("kind")
        return net.pricing_model(surrogate_shape(kind) if kind else None, f"surrogate:{Path(model_file).name}")
    raise _UsageError(f"unknown model {source!r}; choose from {MODEL_SOURCES}")


def _rate_scale(args, model) -> float:
    """Percent rates by default for option models, decimal for the bond."""
    unit = args.rates or ("decimal" if model.names == BOND_FEATURES else "percent")
    return 0.01 if unit == "percent" and "r" in model.names else 1.0


def _vector(text: str, model, scale: float) -> FeatureVector:
    x = rio.parse_vector(text, model.names)
    if scale != 1.0 and "r" in x.names:
        x = x.replace(r=x["r"] * scale)
    return x


def _quadrature(args, default_rule="trapezoid") -> QuadratureConfig:
    return QuadratureConfig(args.rule or default_rule, args.points)


# ---------------------------------------------------------------- commands

def _cmd_price(args) -> int:
    model = _load_model(args.model, args.model_file, _params(args.param), args.kind)
    x = _vector(args.point, model, _rate_scale(args, model))
    sys.stdout.write(f"{model.evaluate(x.values):.10g}\n")
    return EXIT_OK


def _cmd_train(args) -> int:
    if (args.data is None) == (args.synthetic is None):
        raise _UsageError("train needs exactly one of --data or --synthetic")
    if args.data:
        records = rio.load_option_records(args.data)
        kinds = sorted({r.kind for r in records})
        kind = args.kind or (kinds[0] if len(kinds) == 1 else None)
        if kind is None:
            raise _UsageError(f"data mixes kinds {kinds}; pass --kind")
        records = [r for r in records if r.kind == kind]
    else:
        kind = args.kind or "call"
        records = synthetic_bsm_records(args.synthetic, kind, seed=args.seed)
    cfg = TrainConfig(max_iters=args.max_iters, seed=args.seed, l2_lambda=args.l2)
    net, train_rmse, test_rmse = train_surrogate(records, cfg)
    net.info["kind"] = kind
    net.save(args.out)
    summary = {"kind": kind, "n_records": len(records), "train_rmse": train_rmse, "test_rmse": test_rmse,
               "mean_price": float(np.mean([r.price for r in records])),
               "iterations": int(net.info["iterations"]), "model_file": str(args.out)}
    sys.stdout.write(rio.dumps_json(summary))
    return EXIT_OK


def _cmd_attribute(args) -> int:
    model = _load_model(args.model, args.model_file, _params(args.param), args.kind)
    scale = _rate_scale(args, model)
    explicand = _vector(args.explicand, model, scale)
    if args.baseline:
        baseline = _vector(args.baseline, model, scale)
    elif args.data:
        baseline = FeatureVector(rio.default_baseline(rio.load_option_records(args.data)), model.names)
    else:
        raise _UsageError("attribute needs --baseline or --data")
    q = _quadrature(args)
    results = [attribute(m, model, explicand, baseline, q) for m in _methods(args.methods)]
    _out(rio.dumps_json({"model": model.name, "results": [r.to_dict() for r in results]}), args.out)
    if args.plot_csv:
        Path(args.plot_csv).write_text(rio.plot_rows(results), encoding="utf-8")
    return EXIT_OK


def _methods(text: str) -> list[Method]:
    return [Method.parse(m) for m in text.split(",") if m.strip()]


_ALL_AXIOMS = (Axiom.AIM, Axiom.DIM, Axiom.DME, Axiom.RDME, Axiom.IME, Axiom.FMD, Axiom.GD, Axiom.CG)


def _cmd_audit(args) -> int:
    model = _load_model(args.model, args.model_file, _params(args.param), args.kind)
    scale = _rate_scale(args, model)
    explicand = _vector(args.explicand, model, scale)
    baseline = _vector(args.baseline, model, scale)
    explicit = args.axiom.strip().lower() != "all"
    axioms = [Axiom.parse(a) for a in args.axiom.split(",")] if explicit else list(_ALL_AXIOMS)
    deltas = [float(c) for c in args.deltas.split(",")] if args.deltas else []
    grids = []
    for spec in args.grid or ():
        g = AuditGrid.parse(spec, explicand, baseline, deltas)
        if g.feature == "r" and scale != 1.0:
            g = AuditGrid(g.feature, g.values * scale, explicand, baseline, tuple(c * scale for c in deltas))
        grids.append(g)
    needs_grid = {Axiom.AIM, Axiom.DIM, Axiom.DME, Axiom.RDME, Axiom.IME, Axiom.FMD, Axiom.GD}
    if not grids and needs_grid & set(axioms):
        raise _UsageError("audit needs at least one --grid")
    q = _quadrature(args, "gauss-legendre")
    model_g = None
    if Axiom.FMD in axioms and args.model_g:
        model_g = _load_model(args.model_g, args.model_g_file, {}, None)
    domain = TrainingDomain.from_dict(_read_json(args.domain)) if args.domain else None

    reports = []
    for method in _methods(args.method):
        for ax in axioms:
            if ax is Axiom.AIM:
                reports.append(checks.check_aim(method, model, grids, args.tol, q))
            elif ax is Axiom.DIM:
                reports.extend(checks.check_dim(method, model, g, args.tol, q) for g in grids)
            elif ax in (Axiom.DME, Axiom.RDME, Axiom.IME):
                reports.extend(checks.check_marginal(method, model, g, Curvature[ax.name], args.tol, q)
                               for g in grids)
            elif ax is Axiom.FMD:
                if model_g is None:
                    if explicit:
                        raise _UsageError("FMD needs --model-g")
                    continue
                reports.extend(checks.check_fmd(method, model, model_g, g, tol=args.tol, q=q) for g in grids)
            elif ax is Axiom.GD:
                padded = model.with_dummy("dummy")
                for g in grids:
                    ctx = FeatureVector([*g.context.values, args.dummy], padded.names)
                    base = FeatureVector([*g.baseline.values, 0.0], padded.names)
                    pg = AuditGrid(g.feature, g.values, ctx, base, g.deltas)
                    reports.append(checks.check_generalized_dummy(method, padded, padded.n_features - 1, pg,
                                                                  args.tol, q))
            elif ax is Axiom.CG:
                if domain is None:
                    if explicit:
                        raise _UsageError("CG needs --domain")
                    continue
                res = attribute(method, model, explicand, baseline, q)
                reports.append(checks.check_cg(res, domain, model.name))
    _out(rio.dumps_json(bundle_to_dict(reports)), args.out)
    if args.fail_on_violation and any(r.verdict is Verdict.VIOLATED for r in reports):
        return EXIT_VIOLATION
    return EXIT_OK


def _read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _cmd_vix(args) -> int:
    tau = args.days / 365.0
    if args.chain:
        if args.forward is None:
            raise _UsageError("vix with --chain needs --forward")
        chain = rio.load_chain(args.chain, args.forward, args.rate, tau)
    elif args.flat_sigma is not None:
        chain = flat_vol_chain(args.forward or 100.0, args.flat_sigma, args.rate, tau, spacing=args.spacing)
    else:
        raise _UsageError("vix needs --chain or --flat-sigma")
    sys.stdout.write(f"{vix_from_chain(chain):.10g}\n")
    return EXIT_OK


def _cmd_domain(args) -> int:
    if args.data:
        X, names = rio.load_points(args.data)
        if args.features:
            want = tuple(f.strip() for f in args.features.split(","))
            missing = [f for f in want if f not in names]
            if missing:
                raise _UsageError(f"features {missing} not in {names}")
            X, names = X[:, [names.index(f) for f in want]], want
    elif args.leverage:
        pts = generate_leverage_data(args.leverage, (args.s_lo, args.s_hi), (args.sigma_lo, args.sigma_hi),
                                     args.correlation, seed=args.seed)
        X, names = np.array([p.values for p in pts]), pts[0].names
    else:
        raise _UsageError("domain needs --data or --leverage")
    hull_features = tuple(args.hull_features.split(","))
    dom = fit_domain(X, args.mode, names, hull_features=hull_features, radius=args.radius)
    _out(rio.dumps_json(dom.to_dict()), args.out)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _model_flags(p, with_kind=True):
    p.add_argument("--model", required=True, choices=MODEL_SOURCES)
    p.add_argument("--model-file")
    p.add_argument("--param", action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--rates", choices=("percent", "decimal"),
                   help="unit of r in vectors (default: percent for option models, decimal for bond)")
    if with_kind:
        p.add_argument("--kind", choices=("call", "put"), help="option kind of a surrogate file")


def _quad_flags(p):
    p.add_argument("--rule", choices=("trapezoid", "gauss-legendre"))
    p.add_argument("--points", type=int, default=256)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="riskattr", description="Attribution and axiom audits for asset-pricing models.")
    parser.add_argument("--seed", type=int, default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("price", help="evaluate a model at a point")
    _model_flags(p)
    p.add_argument("--point", required=True)
    p.set_defaults(func=_cmd_price)

    p = sub.add_parser("train", help="fit the MLP surrogate")
    p.add_argument("--data")
    p.add_argument("--synthetic", type=int, metavar="N")
    p.add_argument("--kind", choices=("call", "put"))
    p.add_argument("--out", required=True)
    p.add_argument("--max-iters", type=int, default=1000)
    p.add_argument("--l2", type=float, default=1e-3)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("attribute", help="BShap and/or IG attributions")
    _model_flags(p)
    _quad_flags(p)
    p.add_argument("--explicand", required=True)
    p.add_argument("--baseline")
    p.add_argument("--data", help="option CSV; its first date's mean is the default baseline")
    p.add_argument("--methods", default="bshap,ig")
    p.add_argument("--out")
    p.add_argument("--plot-csv")
    p.set_defaults(func=_cmd_attribute)

    p = sub.add_parser("audit", help="run axiom checks and emit a report bundle")
    _model_flags(p)
    _quad_flags(p)
    p.add_argument("--axiom", default="all", help="comma list of AIM,DIM,DME,RDME,IME,FMD,GD,CG or 'all'")
    p.add_argument("--method", default="ig,bshap")
    p.add_argument("--explicand", required=True)
    p.add_argument("--baseline", required=True)
    p.add_argument("--grid", action="append", help="NAME:LO:HI:COUNT, repeatable")
    p.add_argument("--deltas", help="comma list of extra DIM increments")
    p.add_argument("--tol", type=float)
    p.add_argument("--domain", help="domain JSON for the CG audit")
    p.add_argument("--model-g", choices=MODEL_SOURCES)
    p.add_argument("--model-g-file")
    p.add_argument("--dummy", type=float, default=1.0, help="explicand value of the appended dummy feature")
    p.add_argument("--out")
    p.add_argument("--fail-on-violation", action="store_true")
    p.set_defaults(func=_cmd_audit)

    p = sub.add_parser("vix", help="model-free implied volatility of a chain")
    p.add_argument("--chain", help="CSV with columns K,put,call")
    p.add_argument("--flat-sigma", type=float, help="price a synthetic flat-volatility chain instead")
    p.add_argument("--spacing", type=float, default=0.005)
    p.add_argument("--forward", type=float)
    p.add_argument("--rate", type=float, default=0.0)
    p.add_argument("--days", type=float, default=30.0)
    p.set_defaults(func=_cmd_vix)

    p = sub.add_parser("domain", help="fit a training domain")
    p.add_argument("--data")
    p.add_argument("--features")
    p.add_argument("--leverage", type=int, metavar="N", help="generate N leverage-effect points")
    p.add_argument("--correlation", type=float, default=-0.9)
    p.add_argument("--s-lo", type=float, default=700.0)
    p.add_argument("--s-hi", type=float, default=1500.0)
    p.add_argument("--sigma-lo", type=float, default=0.1)
    p.add_argument("--sigma-hi", type=float, default=0.9)
    p.add_argument("--mode", choices=("axis-box", "hull2d", "point-cloud"), default="hull2d")
    p.add_argument("--hull-features", default="S,sigma")
    p.add_argument("--radius", type=float, default=0.05)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_domain)
    return parser


def run_cli(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
    except (RiskAttrError, ValueError, TypeError, KeyError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
    return EXIT_INPUT


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
