"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 infeasible recipe result,
4 detected instability. Diagnostics go to standard error; results go to
standard output or to ``--out``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from typing import Sequence

import jsonschema
import numpy as np

from . import __version__
from .coeffs import generate_scheme
from .diagram import contains, stability_diagram
from .errors import ConfigError, DomainError, ImexError, InstabilityError, ParameterError
from .report import format_k

__all__ = ["main", "parse_k_ladder", "load_pair", "RUN_SCHEMAS", "EXIT_OK", "EXIT_CONFIG", "EXIT_INFEASIBLE",
           "EXIT_INSTABILITY"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_INSTABILITY = 4

_K_TERM = re.compile(r"^\s*2\^(-?\d+)\s*$")
_K_RANGE = re.compile(r"^\s*2\^(-?\d+)\s*\.\.\s*2\^(-?\d+)\s*$")


def parse_k_ladder(spec) -> list[float]:
    """Parse step sizes.

    Accepts an exponent range ``"2^-3..2^-15"`` (both ends included, in
    the given direction), a single ``"2^-n"``, a number, or a list of
    those.
    """
    if isinstance(spec, (list, tuple)):
        out = []
        for item in spec:
            out.extend(parse_k_ladder(item))
        return out
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        if not (spec > 0 and math.isfinite(spec)):
            raise ConfigError(f"step size must be positive, got {spec}")
        return [float(spec)]
    if isinstance(spec, str):
        m = _K_RANGE.match(spec)
        if m:
            a, b = int(m.group(1)), int(m.group(2))
            step = 1 if b >= a else -1
            return [2.0**e for e in range(a, b + step, step)]
        m = _K_TERM.match(spec)
        if m:
            return [2.0 ** int(m.group(1))]
        try:
            return parse_k_ladder(float(spec))
        except ValueError:
            pass
    raise ConfigError(f"cannot parse step sizes from {spec!r}")


def _parse_orders(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad order list {text!r}") from exc


# --- config files --------------------------------------------------------------

_K_LIST = {"oneOf": [{"type": "string"}, {"type": "number", "exclusiveMinimum": 0},
                     {"type": "array", "items": {"type": ["string", "number"]}, "minItems": 1}]}
_ORDER = {"oneOf": [{"type": "integer", "minimum": 1, "maximum": 5},
                    {"type": "array", "items": {"type": "integer", "minimum": 1, "maximum": 5}, "minItems": 1}]}
_POS = {"type": "number", "exclusiveMinimum": 0}

RUN_SCHEMAS = {
    "diffusion1d": {
        "type": "object",
        "additionalProperties": False,
        "required": ["order", "k_list"],
        "properties": {
            "order": _ORDER,
            "delta": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            "sigma": _POS,
            "N": {"type": "integer", "minimum": 4},
            "k_list": _K_LIST,
            "t_final": _POS,
            "seed": {"type": "integer"},
        },
    },
    "porous3d": {
        "type": "object",
        "additionalProperties": False,
        "required": ["order", "k_list"],
        "properties": {
            "problem": {"enum": ["manufactured", "gaussian"]},
            "order": _ORDER,
            "delta": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            "sigma": _POS,
            "N": {"type": "integer", "minimum": 4},
            "k_list": _K_LIST,
            "t_final": _POS,
            "gamma": {"type": "number", "minimum": 0},
            "a": _POS,
            "substeps": {"type": "integer", "minimum": 1},
            "seed": {"type": "integer"},
        },
    },
}

_PAIR_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["A", "B"],
    "properties": {
        "A": {"type": "array", "items": {"type": "array"}},
        "B": {"type": "array", "items": {"type": "array"}},
        "null_basis": {"type": "array"},
    },
}


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc


def _validate(doc, schema, what: str):
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{what}: {exc.message} (at {loc})") from exc
    return doc


def _decode_matrix(rows, name: str) -> np.ndarray:
    """Dense row-major matrix; entries are numbers or ``[re, im]`` pairs."""
    try:
        out = []
        for row in rows:
            out.append([complex(v[0], v[1]) if isinstance(v, list) else complex(v) for v in row])
        m = np.array(out, dtype=complex)
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"{name}: entries must be numbers or [re, im] pairs") from exc
    if m.ndim != 2:
        raise ConfigError(f"{name}: ragged matrix")
    return m.real.copy() if not np.any(m.imag) else m


def load_pair(path: str):
    """Read a splitting ``{"A": ..., "B": ..., "null_basis": ...}`` from JSON."""
    from .spectra import SplittingPair

    doc = _validate(_load_json(path), _PAIR_SCHEMA, path)
    A = _decode_matrix(doc["A"], "A")
    B = _decode_matrix(doc["B"], "B")
    nb = None
    if "null_basis" in doc:
        raw = doc["null_basis"]
        nb = _decode_matrix(raw if raw and isinstance(raw[0], list) and isinstance(raw[0][0], list)
                            else [[v] for v in raw], "null_basis")
    try:
        return SplittingPair(A, B, null_basis=nb)
    except ImexError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


# --- output helpers ---------------------------------------------------------------


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _csv(meta: dict, header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    for key in sorted(meta):
        buf.write(f"# {key}: {json.dumps(meta[key], sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def _g(x: float) -> str:
    return repr(float(x))


def _json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


# --- subcommands -----------------------------------------------------------------


def _cmd_coeffs(args) -> int:
    s = generate_scheme(args.order, args.delta)
    if args.format == "json":
        doc = {"order": s.order, "delta": s.delta, "a": s.a.tolist(), "b": s.b.tolist(), "c": s.c.tolist()}
        _emit(_json(doc), args.out)
    else:
        rows = [[j, _g(s.a[j]), _g(s.b[j]), _g(s.c[j])] for j in range(s.order + 1)]
        _emit(_csv({"order": s.order, "delta": s.delta}, ["j", "a", "b", "c"], rows), args.out)
    return EXIT_OK


def _parse_complex(text: str) -> complex:
    try:
        parts = [float(t) for t in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"expected re,im but got {text!r}") from exc
    if len(parts) == 1:
        return complex(parts[0], 0.0)
    if len(parts) != 2:
        raise ConfigError(f"expected re,im but got {text!r}")
    return complex(parts[0], parts[1])


def _cmd_diagram(args) -> int:
    if args.contains is not None:
        mu = _parse_complex(args.contains)
        inside = contains(args.order, args.delta, mu)
        _emit(_json({"order": args.order, "delta": args.delta, "mu": [mu.real, mu.imag], "inside": inside}),
              args.out)
        return EXIT_OK
    d = stability_diagram(args.order, args.delta, args.samples)
    meta = {"order": args.order, "delta": args.delta, "samples": args.samples, "m_left": d.m_left,
            "m_right": d.m_right, "circle_center": d.circle[0], "circle_radius": d.circle[1]}
    rows = [[_g(z.real), _g(z.imag)] for z in d.locus]
    _emit(_csv(meta, ["re", "im"], rows), args.out)
    return EXIT_OK


def _cmd_wp(args) -> int:
    from .spectra import generalized_eigenvalues, rescale, w_p_set

    pair = load_pair(args.pair)
    W = w_p_set(pair, args.p, n_angles=args.angles)
    Lam = generalized_eigenvalues(pair)
    if args.sigma is not None:
        W, Lam = rescale(W, args.sigma), rescale(Lam, args.sigma)
    meta = {"p": args.p, "sigma": args.sigma, "angles": args.angles, "pair": args.pair}
    rows = [["wp_hull", _g(z.real), _g(z.imag)] for z in W.hull]
    rows += [["eigenvalue", _g(z.real), _g(z.imag)] for z in Lam.points]
    _emit(_csv(meta, ["set", "re", "im"], rows), args.out)
    return EXIT_OK


def _cmd_recipe(args) -> int:
    from . import recipes

    if args.kind == "interval":
        if args.dmin is None or args.dmax is None:
            raise ConfigError("recipe interval needs --dmin and --dmax")
        delta, sigma = recipes.optimal_interval_params(args.order, args.dmin, args.dmax, args.eta)
        lo, hi = recipes.interval_sigma_bounds(args.order, delta, args.dmin, args.dmax)
        ok = recipes.interval_feasible(args.order, delta, sigma, args.dmin, args.dmax)
        res = recipes.FeasibilityResult(
            feasible=ok, delta=delta, sigma=sigma, delta_star=delta, sigma_star=sigma, sigma_range=(lo, hi),
            reason="" if ok else "pair lies on the boundary of the admissible region (eta = 0 gives the limiting vertex)",
            diagnostics={"order": args.order, "d_min": args.dmin, "d_max": args.dmax, "eta": args.eta,
                         "sbdf_feasible": recipes.sbdf_diffusion_feasible(args.order, args.dmin, args.dmax)})
    else:
        if args.pair is None:
            raise ConfigError(f"recipe {args.kind} needs --pair")
        pair = load_pair(args.pair)
        if args.kind == "delta":
            res = recipes.recipe_delta(args.order, pair, args.p, args.safety)
        elif args.kind == "sigma":
            if args.delta is None:
                raise ConfigError("recipe sigma needs --delta")
            res = recipes.recipe_sigma(generate_scheme(args.order, args.delta), pair, args.p)
        else:
            res = recipes.recipe_joint(args.order, pair, args.p, args.safety)
    _emit(_json(res.to_dict()), args.out)
    return EXIT_OK if res.feasible else EXIT_INFEASIBLE


def _orders(cfg) -> list[int]:
    o = cfg["order"]
    return [o] if isinstance(o, int) else list(o)


def _run_config(cmd: str, path: str) -> dict:
    return _validate(_load_json(path), RUN_SCHEMAS[cmd], path)


def _cmd_diffusion1d(args) -> int:
    from .diffusion import run_vardiff_convergence

    cfg = _run_config("diffusion1d", args.config)
    rep = run_vardiff_convergence(orders=_orders(cfg), ks=parse_k_ladder(cfg["k_list"]), N=cfg.get("N", 64),
                                  delta=cfg.get("delta", 0.1732), sigma=cfg.get("sigma", 2.69),
                                  t_final=cfg.get("t_final", 5.0))
    rep.metadata["seed"] = cfg.get("seed")
    _emit(rep.to_csv(), args.out)
    return EXIT_OK


def _cmd_porous3d(args) -> int:
    from .diffusion import run_gaussian_ratios, run_porous_convergence

    cfg = _run_config("porous3d", args.config)
    ks = parse_k_ladder(cfg["k_list"])
    if cfg.get("problem", "manufactured") == "gaussian":
        rep = run_gaussian_ratios(orders=_orders(cfg), ks=ks, N=cfg.get("N", 128), delta=cfg.get("delta", 0.794),
                                  sigma=cfg.get("sigma", 2.616), a=cfg.get("a", 2.0**-4),
                                  gamma=cfg.get("gamma", 5.0 / 3.0), t_final=cfg.get("t_final", 1.0),
                                  substeps=cfg.get("substeps", 64))
    else:
        rep = run_porous_convergence(orders=_orders(cfg), ks=ks, N=cfg.get("N", 64), delta=cfg.get("delta", 0.19166),
                                     sigma=cfg.get("sigma", 13.8), t_final=cfg.get("t_final", 1.0),
                                     gamma=cfg.get("gamma", 5.0 / 3.0), a=cfg.get("a", 1.0))
    rep.metadata["seed"] = cfg.get("seed")
    _emit(rep.to_csv(), args.out)
    return EXIT_OK


def _cmd_channel(args) -> int:
    from . import channel

    xi1 = 2 * math.pi / args.Lx
    if args.action == "sweep":
        xis = [float(t) for t in args.xi.split(",")] if args.xi else [n * xi1 for n in range(1, args.modes + 1)]
        sw = channel.wmax_sweep(xis, args.Ny)
        meta = {"Ny": args.Ny, "Lx": args.Lx, "decreasing": sw["decreasing"]}
        rows = [[_g(x), _g(w)] for x, w in zip(sw["xi"], sw["wmax"])]
        _emit(_csv(meta, ["xi", "wmax"], rows), args.out)
        return EXIT_OK
    params = channel.channel_parameters(args.Lx, args.Ny, args.order, args.eta)
    if args.action == "certify":
        text = _json(params.to_dict())
        if args.out:
            spec = channel.w2_mode(channel.build_mode(xi1, args.Ny, params.sigma))
            meta = params.to_dict()
            rows = [[_g(z.real), _g(z.imag)] for z in spec.split.hull]
            _emit(_csv(meta, ["re", "im"], rows), args.out)
        sys.stdout.write(text)
        return EXIT_OK if params.certified else EXIT_INFEASIBLE
    delta = params.delta if args.delta is None else args.delta
    sigma = params.sigma if args.sigma is None else args.sigma
    mode = channel.build_mode(xi1, args.Ny, sigma)
    rng = np.random.default_rng(args.seed)
    norms = channel.integrate_mode(mode, generate_scheme(args.order, delta), args.k, args.steps,
                                   rng.standard_normal(args.Ny))
    meta = {"Ny": args.Ny, "Lx": args.Lx, "order": args.order, "delta": delta, "sigma": sigma, "k": args.k,
            "seed": args.seed}
    _emit(_csv(meta, ["step", "norm"], [[i, _g(v)] for i, v in enumerate(norms)]), args.out)
    return EXIT_OK


def _cmd_reproduce(args) -> int:
    from . import diffusion

    orders = _parse_orders(args.orders) if args.orders else None
    target = args.target

    def ladder(kmax, kmin_default):
        kmin = args.kmin or kmin_default
        return parse_k_ladder(f"{args.kmax or kmax}..{kmin}")

    if target == "table2":
        rep = diffusion.run_vardiff_convergence(orders=orders or [1, 2, 3, 4, 5], ks=ladder("2^0", "2^-15"),
                                                N=args.N or 64)
    elif target == "table3":
        rep = diffusion.run_porous_convergence(orders=orders or [1, 2, 3, 4, 5], ks=ladder("2^-3", "2^-11"),
                                               N=args.N or 64)
    elif target == "table4":
        rep = diffusion.run_gaussian_ratios(orders=orders or [1, 2, 3], ks=ladder("2^-4", "2^-12"),
                                            N=args.N or 128)
    elif target == "peak-decay":
        k = parse_k_ladder(args.kmin or "2^-6")[0]
        res = diffusion.gaussian_peak_decay(order=(orders or [3])[0], k=k, N=args.N or 128)
        meta = {"target": target, "version": __version__, "order": (orders or [3])[0], "k": format_k(k),
                "N": args.N or 128, "mean0": res["mean0"]}
        rows = [[_g(t), _g(p), _g(m)] for t, p, m in zip(res["t"], res["peak_excess"], res["mean"])]
        _emit(_csv(meta, ["t", "peak_excess", "mean"], rows), args.out)
        return EXIT_OK
    else:  # wmax-sweep
        from . import channel

        sw = channel.wmax_sweep([1, 2, 5, 10, 25, 50], args.N or 256)
        meta = {"target": target, "version": __version__, "Ny": args.N or 256, "decreasing": sw["decreasing"]}
        _emit(_csv(meta, ["xi", "wmax"], [[_g(x), _g(w)] for x, w in zip(sw["xi"], sw["wmax"])]), args.out)
        return EXIT_OK
    rep.metadata["target"] = target
    _emit(rep.to_csv(), args.out)
    return EXIT_OK


# --- parser ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="imexstab", description="Unconditionally stable ImEx multistep schemes")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("coeffs", help="print the coefficient table of one scheme")
    c.add_argument("--order", type=int, required=True)
    c.add_argument("--delta", type=float, required=True)
    c.add_argument("--format", choices=["csv", "json"], default="csv")
    c.add_argument("--out")
    c.set_defaults(func=_cmd_coeffs)

    d = sub.add_parser("diagram", help="sample the stability diagram or test membership")
    d.add_argument("--order", type=int, required=True)
    d.add_argument("--delta", type=float, required=True)
    d.add_argument("--samples", type=int, default=4096)
    d.add_argument("--contains", metavar="RE,IM")
    d.add_argument("--out")
    d.set_defaults(func=_cmd_diagram)

    w = sub.add_parser("wp", help="weighted numerical range and generalized eigenvalues of a splitting")
    w.add_argument("--pair", required=True, help="JSON file with A, B and optional null_basis")
    w.add_argument("--p", type=float, default=1.0)
    w.add_argument("--sigma", type=float)
    w.add_argument("--angles", type=int, default=256)
    w.add_argument("--out")
    w.set_defaults(func=_cmd_wp)

    r = sub.add_parser("recipe", help="search for stable parameters")
    r.add_argument("kind", choices=["delta", "sigma", "joint", "interval"])
    r.add_argument("--order", type=int, required=True)
    r.add_argument("--pair")
    r.add_argument("--p", type=float, default=1.0)
    r.add_argument("--delta", type=float)
    r.add_argument("--safety", type=float, default=0.95)
    r.add_argument("--dmin", type=float)
    r.add_argument("--dmax", type=float)
    r.add_argument("--eta", type=float, default=0.1)
    r.add_argument("--out")
    r.set_defaults(func=_cmd_recipe)

    for name, helptext in (("diffusion1d", "1D variable-coefficient convergence study"),
                           ("porous3d", "3D porous-medium convergence study")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--config", required=True)
        s.add_argument("--out")
        s.set_defaults(func=_cmd_diffusion1d if name == "diffusion1d" else _cmd_porous3d)

    ch = sub.add_parser("channel", help="channel-flow mode analysis")
    ch.add_argument("action", choices=["sweep", "certify", "run"])
    ch.add_argument("--Lx", type=float, default=2 * math.pi)
    ch.add_argument("--Ny", type=int, default=256)
    ch.add_argument("--order", type=int, default=5)
    ch.add_argument("--eta", type=float, default=0.1)
    ch.add_argument("--xi", help="comma-separated wavenumbers for sweep")
    ch.add_argument("--modes", type=int, default=8, help="sweep the first n multiples of 2 pi / Lx")
    ch.add_argument("--delta", type=float)
    ch.add_argument("--sigma", type=float)
    ch.add_argument("--k", type=float, default=1e3)
    ch.add_argument("--steps", type=int, default=100)
    ch.add_argument("--seed", type=int, default=0)
    ch.add_argument("--out")
    ch.set_defaults(func=_cmd_channel)

    rp = sub.add_parser("reproduce", help="rerun a reference experiment")
    rp.add_argument("target", choices=["table2", "table3", "table4", "peak-decay", "wmax-sweep"])
    rp.add_argument("--orders")
    rp.add_argument("--kmax")
    rp.add_argument("--kmin")
    rp.add_argument("--N", type=int)
    rp.add_argument("--out")
    rp.set_defaults(func=_cmd_reproduce)
    return p


def _join_values(argv: list[str]) -> list[str]:
    """Glue ``--contains`` to its value so that ``-9,0`` is not read as an option."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        if argv[i] == "--contains" and i + 1 < len(argv):
            out.append(f"--contains={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = _join_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_CONFIG
    try:
        return args.func(args)
    except (InstabilityError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INSTABILITY
    except (ConfigError, ParameterError, ImexError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
