"""Command-line interface: probabilities, scans, and the verification suite.

    coupled-gue prob   --n 2 --c 0.5 --xi 0.0 0.3
    coupled-gue scan   --n 2 --c 0.5 --grid "-1:1:3"
    coupled-gue verify --n 2 --c 0.5 --xi 0.0 0.3 [--equations toda00,cor_x]

Reports are JSON, scans CSV by default; every emitted number carries its
parameter row.  `verify` exits 0 iff every non-skipped check passes, so it
can gate CI.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, asdict, field

from .kernel import KernelParams
from .fredholm import solve, endpoint_data
from .observables import build_quartet, build_derived, SCALAR_FIELDS
from .residuals import (
    DEFAULT_STENCIL,
    HIGHER_ORDER_IDS,
    PointCache,
    Stencil,
    evaluate,
)
from .montecarlo import estimate_joint

__all__ = ["RunConfig", "main", "cmd_prob", "cmd_scan", "cmd_verify"]


@dataclass
class RunConfig:
    command: str
    n: int = 2
    c: list = field(default_factory=lambda: [0.5])
    xi: list = field(default_factory=lambda: [0.0, 0.3])
    grid: str | None = None
    quad_m: int = 64
    fd_h: float = 5e-3
    fd_hc: float = 1e-3
    tol: float | None = None
    equations: list | None = None
    mc: bool = False
    samples: int = 200_000
    seed: int = 12345
    out: str | None = None
    fmt: str = "json"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        return cls(**d)


def _parse_grid(text: str) -> list[float]:
    """'a:b:steps' -> inclusive linspace; a bare number -> [number]."""
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ValueError(f"grid must be 'a:b:steps', got {text!r}")
    a, b, steps = float(parts[0]), float(parts[1]), int(parts[2])
    if steps < 1:
        raise ValueError("grid must contain at least one point")
    if steps == 1:
        return [a]
    return [a + (b - a) * k / (steps - 1) for k in range(steps)]


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt_float(x: float) -> str:
    return repr(float(x))


def cmd_prob(cfg: RunConfig) -> int:
    rows = []
    for c in cfg.c:
        p = KernelParams(cfg.n, c, cfg.xi[0], cfg.xi[1])
        sol = solve(p, cfg.quad_m)
        e = endpoint_data(sol)
        rows.append({
            "n": cfg.n, "c": c, "xi1": cfg.xi[0], "xi2": cfg.xi[1],
            "P": sol.prob, "ln_P": sol.log_prob,
            "r11": float(e.r[0, 0]), "r22": float(e.r[1, 1]),
        })
    if cfg.fmt == "csv":
        _emit(_rows_to_csv(rows), cfg.out)
    else:
        _emit(json.dumps(rows if len(rows) > 1 else rows[0],
                         sort_keys=True, indent=2) + "\n", cfg.out)
    return 0


def _rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    for r in rows:
        writer.writerow({k: (_fmt_float(v) if isinstance(v, float) else v)
                         for k, v in r.items()})
    return buf.getvalue()


def cmd_scan(cfg: RunConfig) -> int:
    xi1s = _parse_grid(cfg.grid) if cfg.grid else [cfg.xi[0]]
    xi2s = _parse_grid(cfg.grid) if cfg.grid else [cfg.xi[1]]
    points = sorted(
        (c, x1, x2) for c in cfg.c for x1 in xi1s for x2 in xi2s
    )
    rows = []
    for c, x1, x2 in points:
        p = KernelParams(cfg.n, c, x1, x2)
        sol = solve(p, cfg.quad_m)
        e = endpoint_data(sol)
        der = build_derived(e, build_quartet(e), p)
        row = {"n": cfg.n, "c": c, "xi1": x1, "xi2": x2,
               "P": sol.prob, "ln_P": sol.log_prob}
        for name in SCALAR_FIELDS:
            row[name] = float(getattr(der, name))
        rows.append(row)
    if cfg.fmt == "json":
        _emit(json.dumps(rows, sort_keys=True, indent=2) + "\n", cfg.out)
    else:
        _emit(_rows_to_csv(rows), cfg.out)
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    stencil = Stencil(h_xi=cfg.fd_h, h_c=cfg.fd_hc, order=DEFAULT_STENCIL.order)
    ids = None
    include_higher = False
    if cfg.equations:
        ids = cfg.equations
        include_higher = any(i in HIGHER_ORDER_IDS for i in ids)
    reports = []
    for c in cfg.c:
        cache = PointCache(cfg.n, cfg.quad_m)
        center = (cfg.xi[0], cfg.xi[1], c)
        for rep in evaluate(cache, center, stencil, ids=ids,
                            include_higher=include_higher):
            if cfg.tol is not None and rep.status == "ok":
                rep.tolerance = cfg.tol
                rep.passed = rep.relative <= cfg.tol
            reports.append(rep)
    payload = {
        "config": cfg.to_dict(),
        "reports": [r.to_dict() for r in reports],
    }
    if cfg.mc:
        mc_rows = []
        for c in cfg.c:
            est = estimate_joint(cfg.n, c, cfg.xi[0], cfg.xi[1],
                                 cfg.samples, cfg.seed)
            p_num = solve(KernelParams(cfg.n, c, cfg.xi[0], cfg.xi[1]),
                          cfg.quad_m).prob
            mc_rows.append({
                "n": cfg.n, "c": c, "xi1": cfg.xi[0], "xi2": cfg.xi[1],
                "p_mc": est.p_hat, "stderr": est.stderr,
                "n_samples": est.n_samples, "seed": est.seed,
                "p_fredholm": p_num,
                "within_4_stderr": bool(abs(est.p_hat - p_num) <= 4 * est.stderr),
            })
        payload["mc"] = mc_rows
    ok = all(r.passed is not False for r in reports)
    if cfg.mc:
        ok = ok and all(row["within_4_stderr"] for row in payload["mc"])
    payload["passed"] = ok
    _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", cfg.out)
    return 0 if ok else 1


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="coupled-gue",
        description="Joint largest-eigenvalue probabilities for coupled GUE "
                    "and verification of their PDE systems.",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("prob", "scan", "verify"):
        sp = sub.add_parser(name)
        sp.add_argument("--n", type=int, default=2)
        sp.add_argument("--c", type=float, nargs="+", default=[0.5])
        sp.add_argument("--xi", type=float, nargs=2, default=[0.0, 0.3],
                        metavar=("XI1", "XI2"))
        sp.add_argument("--grid", type=str, default=None,
                        help="xi grid 'a:b:steps' (scan)")
        sp.add_argument("--quad-m", type=int, default=64)
        sp.add_argument("--fd-h", type=float, default=5e-3)
        sp.add_argument("--fd-hc", type=float, default=1e-3)
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--equations", type=str, default=None,
                        help="comma-separated equation ids (verify)")
        sp.add_argument("--mc", action="store_true")
        sp.add_argument("--samples", type=int, default=200_000)
        sp.add_argument("--seed", type=int, default=12345)
        sp.add_argument("--out", type=str, default=None)
        sp.add_argument("--format", dest="fmt", choices=("json", "csv"),
                        default=None)
    return ap


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    fmt = args.fmt or ("csv" if args.command == "scan" else "json")
    equations = args.equations.split(",") if args.equations else None
    return RunConfig(
        command=args.command, n=args.n, c=list(args.c), xi=list(args.xi),
        grid=args.grid, quad_m=args.quad_m, fd_h=args.fd_h, fd_hc=args.fd_hc,
        tol=args.tol, equations=equations, mc=args.mc, samples=args.samples,
        seed=args.seed, out=args.out, fmt=fmt,
    )


def main(argv: list[str] | None = None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    cfg = _config_from_args(args)
    if cfg.command == "prob":
        return cmd_prob(cfg)
    if cfg.command == "scan":
        return cmd_scan(cfg)
    return cmd_verify(cfg)


if __name__ == "__main__":
    sys.exit(main())
