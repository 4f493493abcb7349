"""Command-line front end.

Exit codes: 0 success / all checks pass, 1 user error or failed
verification, 2 numerical or pipeline error.
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import catalog
from .core import Grid, PipelineError, SampledFunction, build_model, build_wavefunction
from .expr import Bindings, EvaluationError, ParseError, UnboundParameter, differentiate, evaluate, parse
from .spectrum import NonConvergence, discretize, eigenvalues, match_factorization_energy, sweep
from .verify import (
    Tolerances,
    VerificationReport,
    check_pt_symmetric,
    classify_state,
    run_battery,
    schrodinger_residual,
)

DEFAULTS = {
    "grid_L": 10.0,
    "grid_N": 2001,
    "format": "csv",
    "out": None,
    "tol_match": 1e-3,
    "quadrature": "local8",
}

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_REAL = re.compile(rf"^[+-]?{_NUM}$")
_IMAG = re.compile(rf"^(?P<im>[+-]?(?:{_NUM})?)i$")
_BOTH = re.compile(rf"^(?P<re>[+-]?{_NUM})(?P<im>[+-](?:{_NUM})?)i$")


class UserError(Exception):
    pass


def _imag_coeff(text: str) -> float:
    return float(text + "1") if text in ("", "+", "-") else float(text)


def parse_complex(text: str) -> complex:
    """Parse 'a+bi', 'a-bi', 'a', 'bi' or 'i' (no spaces; U+2212 accepted as minus)."""
    s = text.strip().replace("\u2212", "-")
    if _REAL.match(s):
        return complex(float(s), 0.0)
    if m := _IMAG.match(s):
        return complex(0.0, _imag_coeff(m.group("im")))
    if m := _BOTH.match(s):
        return complex(float(m.group("re")), _imag_coeff(m.group("im")))
    raise argparse.ArgumentTypeError(f"malformed complex literal {text!r}; use the form a+bi")


def parse_range(text: str) -> list[float]:
    try:
        start, stop, steps = text.split(":")
        return list(np.linspace(float(start), float(stop), int(steps)))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:steps, got {text!r}") from None


def parse_param(text: str) -> tuple[str, complex]:
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    return name.strip(), parse_complex(value)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--uplus", help="generating function U+(x) (for pt-limit: f(x))")
    p.add_argument("--catalog", choices=sorted(catalog.CATALOG), help="catalog entry name")
    p.add_argument("--param", action="append", type=parse_param, default=None, metavar="NAME=VALUE")
    p.add_argument("--complex-param", action="append", default=None, metavar="NAME",
                   help="declare a parameter complex (default: real)")
    p.add_argument("--eps", type=parse_complex, help="factorization energy, e.g. 1-0.5i")
    p.add_argument("--grid-L", dest="grid_L", type=float)
    p.add_argument("--grid-N", dest="grid_N", type=int)
    for f in fields(Tolerances):
        p.add_argument(f"--tol-{f.name}", dest=f"tol_{f.name}", type=float)
    p.add_argument("--tol-match", dest="tol_match", type=float)
    p.add_argument("--quadrature", choices=["local8", "local6", "simpson"])
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--out", help="output path")
    p.add_argument("--config", type=Path, help="JSON config file; flags take precedence")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ptqes", description="PT-symmetric QES potentials from a generating function")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("build", help="sample U+, U-, W, V, psi and write CSV/JSON")
    _add_common(p)
    p = sub.add_parser("verify", help="run the verification battery; exit 0 iff all pass")
    _add_common(p)
    p = sub.add_parser("spectrum", help="eigenvalues of the Dirichlet-discretized Hamiltonian")
    _add_common(p)
    p.add_argument("--match-eps", action="store_true", help="report the eigenvalue nearest eps")
    p.add_argument("--sweep-im-eps", type=parse_range, metavar="START:STOP:STEPS")
    p = sub.add_parser("sweep", help="build, verify and diagonalize along a path of Im(eps)")
    _add_common(p)
    p.add_argument("--im-eps", type=parse_range, required=False, metavar="START:STOP:STEPS")
    p.add_argument("--no-spectrum", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    sub.add_parser("example", help="list catalog entries")
    return parser


@dataclass
class RunConfig:
    grid: Grid
    tolerances: Tolerances
    tol_match: float
    format: str
    out: str | None
    bindings: Bindings
    epsilon: complex
    uplus: str | None
    catalog: str | None
    quadrature: str


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = {}
    if getattr(args, "config", None):
        try:
            cfg = json.loads(args.config.read_text())
        except (OSError, ValueError) as exc:
            raise UserError(f"cannot read config {args.config}: {exc}") from exc

    def pick(name, default=None):
        v = getattr(args, name, None)
        if v is not None:
            return v
        return cfg.get(name, DEFAULTS.get(name, default))

    tol_cfg = cfg.get("tolerances", {})
    tols = Tolerances(**{
        f.name: (getattr(args, f"tol_{f.name}") if getattr(args, f"tol_{f.name}") is not None
                 else tol_cfg.get(f.name, f.default))
        for f in fields(Tolerances)
    })
    try:
        params = {k: (parse_complex(v) if isinstance(v, str) else complex(v))
                  for k, v in cfg.get("params", {}).items()}
    except argparse.ArgumentTypeError as exc:
        raise UserError(str(exc)) from None
    params.update(dict(args.param or []))
    cplx = set(cfg.get("complex_params", [])) | set(args.complex_param or [])
    cplx |= {k for k, v in params.items() if v.imag != 0}
    eps = args.eps if args.eps is not None else cfg.get("eps")
    if eps is None:
        raise UserError("--eps is required")
    if isinstance(eps, str):
        try:
            eps = parse_complex(eps)
        except argparse.ArgumentTypeError as exc:
            raise UserError(str(exc)) from None
    uplus, cat = pick("uplus"), pick("catalog")
    if uplus is None and cat is None:
        raise UserError("one of --uplus or --catalog is required")
    if cat is not None and cat not in catalog.CATALOG:
        raise UserError(f"unknown catalog entry {cat!r}")
    if cat in ("example1", "example2") and uplus is not None:
        raise UserError("--uplus and --catalog are exclusive (except for pt-limit)")
    try:
        grid = Grid(float(pick("grid_L")), int(pick("grid_N")))
    except ValueError as exc:
        raise UserError(str(exc)) from None
    if grid.N < 5:
        raise UserError("grid needs N >= 5")
    try:
        bindings = Bindings(params, cplx)
    except ValueError as exc:
        raise UserError(str(exc)) from None
    return RunConfig(grid, tols, float(pick("tol_match")), pick("format"), pick("out"),
                     bindings, complex(eps), uplus, cat, pick("quadrature"))


# -- model resolution --------------------------------------------------------


@dataclass
class Resolved:
    """Columns to write plus the verification report for one configuration."""

    label: str
    columns: dict[str, np.ndarray]
    v: SampledFunction
    report: VerificationReport
    extra: dict


def _catalog_entry(cfg: RunConfig):
    fn, names, _ = catalog.CATALOG[cfg.catalog]
    missing = [n for n in names if n not in cfg.bindings]
    if missing:
        raise UserError(f"{cfg.catalog} needs --param for: {', '.join(missing)}")
    vals = [cfg.bindings[n].real for n in names]
    try:
        return fn(*vals, cfg.epsilon)
    except catalog.InvalidParameters as exc:
        raise UserError(str(exc)) from None


def _resolve_limit(cfg: RunConfig) -> Resolved:
    if cfg.uplus is None:
        raise UserError("pt-limit needs --uplus giving f(x)")
    if "B" not in cfg.bindings:
        raise UserError("pt-limit needs --param B=value")
    f = parse(cfg.uplus)
    B = cfg.bindings["B"].real
    g = cfg.grid
    w = catalog.pt_wavefunction_limit(f, B, g, cfg.bindings)
    w_expr = catalog.limit_superpotential_expr(f, B)
    w_prime = evaluate(differentiate(w_expr), g.x, cfg.bindings)
    eps = complex(cfg.epsilon.real, 0.0)
    v = SampledFunction(g, 0.5 * (w.values**2 - w_prime) + eps)
    psi = build_wavefunction(w, cfg.quadrature)
    t = cfg.tolerances
    checks = [
        catalog.check_limit_anti_pt(w, t.symmetry),
        check_pt_symmetric(v, t.symmetry, "pt_potential"),
        schrodinger_residual(v, psi, eps, t.schrodinger),
    ]
    steps = catalog.limit_sequence(f, B, [2.0**-m for m in range(1, 11)], g, cfg.bindings, eps.real)
    report = VerificationReport(checks, classify_state(psi, t.decay, t.bound), g.to_dict(), eps)
    extra = {"limit_sequence": [{"alpha": s.alpha, "epsilon": [s.epsilon.real, s.epsilon.imag], "error": s.error}
                                for s in steps]}
    return Resolved("pt-limit", {"w": w.values, "v": v.values, "psi": psi.values}, v, report, extra)


def resolve(cfg: RunConfig) -> Resolved:
    if cfg.catalog == "pt-limit":
        return _resolve_limit(cfg)
    extra = {}
    if cfg.catalog:
        entry = _catalog_entry(cfg)
        u_plus, bindings = entry.u_plus, entry.bindings
        extra["catalog"] = {"name": entry.name, "params": entry.params,
                            "exactly_solvable": entry.exactly_solvable}
    else:
        u_plus, bindings = parse(cfg.uplus), cfg.bindings
    model = build_model(u_plus, cfg.epsilon, cfg.grid, bindings, cfg.quadrature)
    report = run_battery(model, cfg.tolerances)
    extra["psi_overflow"] = model.psi.overflow
    return Resolved(cfg.catalog or "uplus", model.columns(), model.v, report, extra)


def _u_plus_and_bindings(cfg: RunConfig):
    if cfg.catalog:
        if cfg.catalog == "pt-limit":
            raise UserError("sweeps are not defined for pt-limit")
        entry = _catalog_entry(cfg)
        return entry.u_plus, entry.bindings
    return parse(cfg.uplus), cfg.bindings


# -- output ------------------------------------------------------------------


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_csv(path: Path, x: np.ndarray, columns: dict[str, np.ndarray]):
    header = ["x"]
    for name in columns:
        header += [f"re_{name}", f"im_{name}"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for j, xj in enumerate(x):
            row = [_fmt(xj)]
            for vals in columns.values():
                row += [_fmt(vals[j].real), _fmt(vals[j].imag)]
            w.writerow(row)


def _sanitize(obj):
    if isinstance(obj, float):
        return obj if np.isfinite(obj) else None
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return _sanitize(obj.item())
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


def dump_json(obj) -> str:
    return json.dumps(_sanitize(obj), indent=2, allow_nan=False)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _header(cfg: RunConfig, res: Resolved) -> dict:
    d = res.report.to_dict()
    d["source"] = cfg.uplus if cfg.uplus is not None else cfg.catalog
    d["bindings"] = cfg.bindings.to_dict()
    d.update(res.extra)
    return d


def cmd_build(cfg: RunConfig) -> int:
    res = resolve(cfg)
    meta = _header(cfg, res)
    if cfg.format == "json":
        meta["x"] = cfg.grid.x.tolist()
        meta["columns"] = {k: [[z.real, z.imag] for z in v] for k, v in res.columns.items()}
        out = Path(cfg.out or "model.json")
        out.write_text(dump_json(meta) + "\n")
        print(out)
        return 0
    out = Path(cfg.out or "model.csv")
    write_csv(out, cfg.grid.x, res.columns)
    side = out.with_suffix(".json")
    side.write_text(dump_json(meta) + "\n")
    print(out)
    print(side)
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    res = resolve(cfg)
    _emit(dump_json(_header(cfg, res)), cfg.out)
    return 0 if res.report.passed else 1


def _spectrum_payload(v: SampledFunction, eps: complex, match: bool, tol: float) -> dict:
    spec = eigenvalues(discretize(v))
    d = spec.to_dict()
    if match:
        d["match"] = match_factorization_energy(spec, eps, tol).to_dict()
    return d


def _write_sweep(cfg: RunConfig, records) -> None:
    rows = [r.to_dict() for r in records]
    if cfg.format == "csv" and cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["re_eps", "im_eps", "reality_fraction", "matched", "distance",
                        "battery_pass", "state_class", "error"])
            for r in rows:
                m = r["match"] or {}
                w.writerow([_fmt(r["epsilon"][0]), _fmt(r["epsilon"][1]),
                            "" if r["reality_fraction"] is None else _fmt(r["reality_fraction"]),
                            m.get("matched", ""), "" if not m else _fmt(m["distance"]),
                            r["battery_pass"], r["state_class"] or "", r["error"] or ""])
        print(cfg.out)
    else:
        _emit(dump_json(rows), cfg.out)


def _im_path(cfg: RunConfig, values) -> list[complex]:
    return [complex(cfg.epsilon.real, im) for im in values]


def cmd_spectrum(cfg: RunConfig, args) -> int:
    if args.sweep_im_eps is not None:
        u_plus, b = _u_plus_and_bindings(cfg)
        records = sweep(u_plus, _im_path(cfg, args.sweep_im_eps), cfg.grid, b, cfg.tolerances,
                        match_tol=cfg.tol_match)
        _write_sweep(cfg, records)
        return 0
    res = resolve(cfg)
    payload = _spectrum_payload(res.v, cfg.epsilon, args.match_eps, cfg.tol_match)
    payload["grid"] = cfg.grid.to_dict()
    payload["epsilon"] = [cfg.epsilon.real, cfg.epsilon.imag]
    if cfg.format == "csv" and cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["re_lambda", "im_lambda"])
            for re_, im_ in payload["eigenvalues"]:
                w.writerow([_fmt(re_), _fmt(im_)])
        print(cfg.out)
    else:
        _emit(dump_json(payload), cfg.out)
    return 0


def cmd_sweep(cfg: RunConfig, args) -> int:
    if args.im_eps is None:
        raise UserError("sweep needs --im-eps START:STOP:STEPS")
    u_plus, b = _u_plus_and_bindings(cfg)
    records = sweep(u_plus, _im_path(cfg, args.im_eps), cfg.grid, b, cfg.tolerances,
                    with_spectrum=not args.no_spectrum, match_tol=cfg.tol_match, workers=args.workers)
    _write_sweep(cfg, records)
    return 0


def cmd_example() -> int:
    for name, (_, params, desc) in catalog.CATALOG.items():
        print(f"{name:10s} params: {','.join(params):8s} {desc}")
    return 0


_SIGNED_VALUE_FLAGS = {"--eps": parse_complex, "--im-eps": parse_range, "--sweep-im-eps": parse_range}


def _attach_signed_values(argv: list[str]) -> list[str]:
    """Turn ``--eps -0.5+0i`` into ``--eps=-0.5+0i`` so argparse does not read the value as a flag."""
    out, k = [], 0
    while k < len(argv):
        tok = argv[k]
        check = _SIGNED_VALUE_FLAGS.get(tok)
        if check and k + 1 < len(argv) and argv[k + 1].startswith("-"):
            try:
                check(argv[k + 1])
            except argparse.ArgumentTypeError:
                pass
            else:
                out.append(f"{tok}={argv[k + 1]}")
                k += 2
                continue
        out.append(tok)
        k += 1
    return out


def main(argv=None) -> int:
    parser = make_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_attach_signed_values(argv))
    if args.command == "example":
        return cmd_example()
    try:
        cfg = resolve_config(args)
        if args.command == "build":
            return cmd_build(cfg)
        if args.command == "verify":
            return cmd_verify(cfg)
        if args.command == "spectrum":
            return cmd_spectrum(cfg, args)
        return cmd_sweep(cfg, args)
    except (UserError, ParseError, UnboundParameter) as exc:
        print(f"ptqes: error: {exc}", file=sys.stderr)
        return 1
    except (PipelineError, EvaluationError, NonConvergence) as exc:
        print(f"ptqes: pipeline error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
