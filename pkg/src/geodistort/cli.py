"""Command-line front end.

    geodistort solve-exp         --spec FILE   -> r_prime, r_hat
    geodistort solve-distortion  --spec FILE   -> r, r_prime, r_hat, slip
    geodistort table             --spec FILE   -> r, r_prime, r_hat, slip, g
    geodistort verify            --spec FILE   -> verification report

Exit status: 0 on success, 1 when a verification check fails, 2 on bad
configuration (unreadable or invalid spec, bad flags, solver domain errors).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import distortion as dd
from . import metric as mc
from . import verification as vf
from .errors import GeometryError

COMMANDS = ("solve-exp", "solve-distortion", "verify", "table")
FORMATS = ("csv", "json", "text")


@dataclass(frozen=True)
class RunConfig:
    spec_path: str
    command: str
    steps: int = 2000
    grid: int = 100
    output_path: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.format not in FORMATS:
            raise ValueError(f"unknown format {self.format!r}")
        if self.steps < 2 or self.grid < 2:
            raise ValueError("--steps and --grid must be at least 2")


def fmt(x) -> str:
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.10g}"


def render_table(name, columns, rows, form) -> str:
    cells = [[fmt(v) for v in row] for row in rows]
    if form == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        w.writerows(cells)
        return buf.getvalue()
    if form == "json":
        data = {"manifold": name, "columns": list(columns),
                "rows": [[vf._num(v) for v in row] for row in rows]}
        return json.dumps(data, indent=2) + "\n"
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


def _require_radial(m):
    if m.radial_symmetry is None:
        raise GeometryError(f"metric {m.name!r} is not radially symmetric")


def cmd_solve_exp(cfg: RunConfig, m) -> tuple[str, int]:
    """Chart radius of exp along a radial geodesic, on ``grid`` equal intervals of r'."""
    _require_radial(m)
    length = dd.exponential_profile(m, cfg.steps)
    rprime = np.linspace(0.0, length.boundary, cfg.grid + 1)
    rhat = length(rprime)
    return render_table(m.name, ("r_prime", "r_hat"), np.column_stack([rprime, rhat]), cfg.format), 0


def _distortion_rows(cfg, m, with_g):
    _require_radial(m)
    p = dd.distortion_profile(m, cfg.steps, cfg.steps)
    r = np.linspace(0.0, p.r_max, cfg.grid + 1)
    rprime = p.rprime(r)
    # past the first chart-radius maximum r_hat is not single valued
    rhat = np.full_like(r, np.nan)
    ok = r <= p.rhat_limit * (1 + 1e-12)
    rhat[ok] = p.rhat(r[ok])
    slip = np.empty_like(r)
    slip[:-1] = dd.differential_slip(p, r[:-1])
    slip[-1] = p.slip[-1]
    cols = [r, rprime, rhat, slip]
    if with_g:
        cols.append(p.g(rprime))
    return m.name, np.column_stack(cols)


def cmd_solve_distortion(cfg: RunConfig, m) -> tuple[str, int]:
    name, rows = _distortion_rows(cfg, m, False)
    return render_table(name, ("r", "r_prime", "r_hat", "slip"), rows, cfg.format), 0


def cmd_table(cfg: RunConfig, m) -> tuple[str, int]:
    name, rows = _distortion_rows(cfg, m, True)
    return render_table(name, ("r", "r_prime", "r_hat", "slip", "g"), rows, cfg.format), 0


def cmd_verify(cfg: RunConfig, m) -> tuple[str, int]:
    report = vf.run_suite(m, vf.Resolution(steps=cfg.steps, grid=cfg.grid))
    if cfg.format == "json":
        text = report.to_json()
    elif cfg.format == "text":
        text = report.to_text()
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("name", "paper_ref", "residual", "tolerance", "passed"))
        for c in report.checks:
            w.writerow((c.name, c.paper_ref, fmt(c.residual), fmt(c.tolerance), str(c.passed).lower()))
        text = buf.getvalue()
    for c in report.checks:
        if not c.passed:
            print(f"FAIL {c.name}: residual {fmt(c.residual)} > tolerance {fmt(c.tolerance)}"
                  f" [{c.paper_ref}]", file=sys.stderr)
    return text, 0 if report.passed_all else 1


HANDLERS = {
    "solve-exp": cmd_solve_exp,
    "solve-distortion": cmd_solve_distortion,
    "verify": cmd_verify,
    "table": cmd_table,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geodistort", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--spec", required=True, help="manifold spec JSON file")
        sp.add_argument("--steps", type=int, default=2000, help="RK4 steps (default 2000)")
        sp.add_argument("--grid", type=int, default=100, help="grid intervals (default 100)")
        sp.add_argument("--out", default=None, help="write output here instead of stdout")
        sp.add_argument("--format", choices=FORMATS, default="csv")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(args.spec, args.command, args.steps, args.grid, args.out, args.format)
        _, m = mc.load_spec(cfg.spec_path)
        text, code = HANDLERS[cfg.command](cfg, m)
    except (GeometryError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
