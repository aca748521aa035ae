"""Command-line front end: ``mlcalc {ml-eval,verify,symbol-grid,mehler,sample}``.

Exit codes: 0 success, 1 verification failure, 2 usage or domain error.
"""
from __future__ import annotations

import argparse
import io
import json
import logging
import sys
import warnings
from dataclasses import asdict, dataclass
from datetime import datetime, timezone

import numpy as np

from . import operators as O
from . import transforms as T
from .errors import MLCalcError, RangeWarning
from .mc import sample_measure
from .special import MLParams, m_wright, mittag_leffler, mittag_leffler_general
from .verify import SUITES, mehler_baseline, run_suite

log = logging.getLogger("mlcalc")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    beta: float = 0.5
    dim: int = 2
    trunc: int = 8
    seed: int = 0
    samples: int = 100_000
    out: str | None = None
    format: str = "json"
    threads: int | None = None
    deterministic: bool = False

    def validate(self):
        if not 0 < self.beta <= 1:
            raise ValueError(f"--beta must lie in (0, 1], got {self.beta}")
        if self.dim < 1:
            raise ValueError("--dim must be >= 1")
        if self.trunc < 0:
            raise ValueError("--trunc must be >= 0")
        if self.samples < 0:
            raise ValueError("--samples must be >= 0")
        if self.threads is not None and self.threads < 1:
            raise ValueError("--threads must be >= 1")
        allowed = ("csv", "npz") if self.command == "sample" else ("json", "csv")
        if self.format not in allowed:
            raise ValueError(f"--format for {self.command} must be one of {allowed}")

    @property
    def params(self) -> MLParams:
        return MLParams(self.beta)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--trunc", type=int, default=8, help="truncation degree N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", default=None, choices=("json", "csv", "npz"))
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--deterministic", action="store_true", help="omit the timestamp field")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="mlcalc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ml-eval", parents=[common], help="tabulate E_beta, E_{beta,beta} and M_beta")
    p.add_argument("--grid", default=None, help="START:STOP:NUM on the real axis")
    p.add_argument("--points", default=None, help="comma-separated (complex) points, e.g. 1,2j,-1+0.5j")

    p = sub.add_parser("verify", parents=[common], help="run verification suites")
    p.add_argument("--suite", default="all", choices=SUITES + ("all",))

    p = sub.add_parser("symbol-grid", parents=[common], help="operator symbols on a grid of (xi, eta)")
    p.add_argument("--operator", required=True, help="operator JSON, inline or @path")
    p.add_argument("--xi", required=True, help="JSON list of xi vectors")
    p.add_argument("--eta", required=True, help="JSON list of eta vectors")

    p = sub.add_parser("mehler", parents=[common], help="Mehler evolution values and semigroup defects")
    p.add_argument("--t", default="0,0.5,1", help="comma-separated times t")
    p.add_argument("--s", default="0,0.5,1", help="comma-separated times s")
    p.add_argument("--xi", default="[1.0]", help="JSON vector")
    p.add_argument("--y", default=None, help="JSON vector (default zero)")

    sub.add_parser("sample", parents=[common], help="draw a seeded sample batch")
    return parser


def _floats(text: str) -> list:
    return [float(x) for x in text.split(",") if x.strip()]


def _grid(args) -> list:
    pts = []
    if args.grid:
        try:
            start, stop, num = args.grid.split(":")
            pts += list(np.linspace(float(start), float(stop), int(num)))
        except ValueError as exc:
            raise ValueError(f"bad --grid {args.grid!r}; expected START:STOP:NUM") from exc
    if args.points:
        pts += [complex(x.strip().replace(" ", "")) for x in args.points.split(",") if x.strip()]
    return pts


def _json_arg(text: str):
    if text.startswith("@"):
        with open(text[1:]) as fh:
            return json.load(fh)
    return json.loads(text)


def cmd_ml_eval(cfg: RunConfig, args) -> tuple:
    params = cfg.params
    rows = []
    for z in _grid(args):
        z = complex(z)
        arg = z.real if z.imag == 0 else z
        e = complex(mittag_leffler(params, arg))
        ebb = complex(mittag_leffler_general(params, params.beta, arg))
        if params.beta < 1:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RangeWarning)
                mw = m_wright(params, abs(z))
        else:
            mw = None
        rows.append({"z_re": z.real, "z_im": z.imag, "E_re": e.real, "E_im": e.imag,
                     "Ebb_re": ebb.real, "Ebb_im": ebb.imag, "M_abs_z": mw})
    return rows, EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> tuple:
    checks = run_suite(args.suite, cfg.params, cfg.dim, cfg.trunc, cfg.seed, cfg.samples, cfg.threads)
    for c in checks:
        if c["status"] == "underpowered":
            log.warning("check %s is underpowered: %d samples", c["name"], cfg.samples)
    failed = [c["name"] for c in checks if c["status"] == "fail"]
    report = {"suite": args.suite, "beta": cfg.beta, "dim": cfg.dim, "trunc": cfg.trunc,
              "seed": cfg.seed, "samples": cfg.samples, "checks": checks, "failed": failed}
    return report, EXIT_FAIL if failed else EXIT_OK


def _closed_form(op: O.Operator, xi, eta):
    if isinstance(op, O.Identity):
        return 1.0
    if isinstance(op, O.Gateaux):
        return T.bilinear(op.y, xi)
    if isinstance(op, O.IntegralKernel) and (op.l, op.m) == (1, 1):
        return complex(np.asarray(xi) @ op.kappa.T @ np.asarray(eta))
    return None


def cmd_symbol_grid(cfg: RunConfig, args) -> tuple:
    op = O.operator_from_json(_json_arg(args.operator), cfg.params)
    if op.params.beta != cfg.beta:
        op.params = cfg.params
    xis = [np.asarray(x, dtype=complex) for x in _json_arg(args.xi)]
    etas = [np.asarray(x, dtype=complex) for x in _json_arg(args.eta)]
    rows = []
    for xi in xis:
        for eta in etas:
            val = O.symbol(op, xi, eta, N=max(cfg.trunc, 16))
            I = T.exp_pairing(cfg.params, xi, eta)
            row = {"beta": cfg.beta}
            row.update({f"xi_{i}": float(c.real) for i, c in enumerate(xi)})
            row.update({f"eta_{i}": float(c.real) for i, c in enumerate(eta)})
            ratio = val / I
            row.update({"value_re": val.real, "value_im": val.imag, "pairing_re": I.real, "pairing_im": I.imag,
                        "ratio_re": ratio.real, "ratio_im": ratio.imag})
            cf = _closed_form(op, xi, eta)
            if cf is not None:
                cf = complex(cf) * I
                row.update({"closed_re": cf.real, "closed_im": cf.imag})
            rows.append(row)
    return rows, EXIT_OK


def cmd_mehler(cfg: RunConfig, args) -> tuple:
    params = cfg.params
    xi = np.asarray(_json_arg(args.xi), dtype=float)
    y = np.zeros_like(xi) if args.y is None else np.asarray(_json_arg(args.y), dtype=float)
    xn = float(np.linalg.norm(xi))
    rows = []
    for t in _floats(args.t):
        pt = O.mehler_exp(params, t, y, xi)
        for s in _floats(args.s):
            d = O.mehler_semigroup_defect(params, t, s, xi)
            base = mehler_baseline(cfg.beta, t, s, xn)
            rows.append({"beta": cfg.beta, "t": t, "s": s, "Pt_re": pt.real, "Pt_im": pt.imag, "defect": d,
                         "baseline_defect": base, "baseline_diff": None if base is None else abs(d - base)})
    return rows, EXIT_OK


def _emit(cfg: RunConfig, payload, fh):
    if cfg.format == "csv":
        rows = payload if isinstance(payload, list) else payload["checks"]
        rows = [{k: ("" if v is None else v) for k, v in r.items() if not isinstance(v, (list, dict))} for r in rows]
        T.write_csv(rows, fh)
        return
    doc = {"command": cfg.command, "config": asdict(cfg)}
    doc["config"].pop("out")
    if isinstance(payload, list):
        doc["rows"] = payload
    else:
        doc.update(payload)
    if not cfg.deterministic:
        doc["timestamp"] = datetime.now(timezone.utc).isoformat()
    json.dump(doc, fh, indent=2, sort_keys=True, default=str)
    fh.write("\n")


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt = args.format or ("csv" if args.command == "sample" else "json")
    cfg = RunConfig(args.command, args.beta, args.dim, args.trunc, args.seed, args.samples,
                    args.out, fmt, args.threads, args.deterministic)
    try:
        cfg.validate()
        if cfg.command == "sample":
            return _sample(cfg)
        handler = {"ml-eval": cmd_ml_eval, "verify": cmd_verify,
                   "symbol-grid": cmd_symbol_grid, "mehler": cmd_mehler}[cfg.command]
        payload, code = handler(cfg, args)
    except (MLCalcError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"mlcalc: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            _emit(cfg, payload, fh)
    else:
        _emit(cfg, payload, sys.stdout)
    return code


def _sample(cfg: RunConfig) -> int:
    batch = sample_measure(cfg.params, cfg.dim, cfg.samples, cfg.seed, cfg.threads)
    if cfg.format == "npz":
        if not cfg.out:
            raise ValueError("--format npz requires --out")
        batch.save_npz(cfg.out)
    elif cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            batch.to_csv(fh)
    else:
        buf = io.StringIO()
        batch.to_csv(buf)
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
