"""Command-line interface: ``adsnull <command> [options]``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import __version__
from .checks import SUITES, run_suites
from .elliptic import Invariants, cubic_roots, half_periods
from .errors import AdsNullError, InvalidInput
from .frames import det2, gamma_frame, max_deviation, nullity_series, ode_frame_oracle
from .periodic import figure_grid, find_closed, f_scan, zero_runs
from .potential import CaseTag, classify, potential_for, quasi_periodic

log = logging.getLogger("adsnull")

LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


@dataclass
class RunConfig:
    quad_tol: float = 1e-12
    ode_rtol: float = 1e-10
    residual_tol: float = 1e-6
    closure_tol: float = 1e-5
    samples: int = 201
    fscan_samples: int = 400
    normalization: str = "both"
    denom_bound: int = 8
    n_max: int = 200
    domain_errors: str = "fatal"
    seed: int = 0
    jobs: int = 0

    def validate(self):
        for name in ("quad_tol", "ode_rtol", "residual_tol", "closure_tol"):
            if not getattr(self, name) > 0:
                raise InvalidInput(f"{name} must be positive")
        if self.normalization not in ("plain", "pi", "both"):
            raise InvalidInput("normalization must be plain, pi or both")
        if self.domain_errors not in ("fatal", "row"):
            raise InvalidInput("domain_errors must be fatal or row")
        if self.samples < 1 or self.fscan_samples < 2:
            raise InvalidInput("sample counts must be positive")
        if self.jobs <= 0:
            self.jobs = os.cpu_count() or 1
        return self


def load_config(args) -> RunConfig:
    """Defaults, then the JSON config file, then explicit flags."""
    values = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInput(f"cannot read config {args.config}: {exc}") from exc
    known = {f.name for f in fields(RunConfig)}
    unknown = set(values) - known
    if unknown:
        raise InvalidInput(f"unknown config keys: {sorted(unknown)}")
    for name in known:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    return RunConfig(**values).validate()


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path, header, rows):
    fh = open(path, "w", newline="") if path and path != "-" else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    finally:
        if fh is not sys.stdout:
            fh.close()


def write_meta(path, command, config: RunConfig, extra=None):
    if not path or path == "-":
        return
    meta = {"command": command, "version": __version__, "config": asdict(config), "argv": sys.argv[1:]}
    meta.update(extra or {})
    with open(path + ".meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, complex):
        return {"re": _jnum(obj.real), "im": _jnum(obj.imag)}
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(type(obj).__name__)


def _jnum(x):
    # JSON has no infinity; use string markers
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    return x


def emit_json(obj, path=None):
    text = json.dumps(obj, indent=2, default=_json_default)
    if path and path != "-":
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# commands


def _period_marker(w: complex):
    if math.isinf(w.real):
        return "+inf"
    if math.isinf(w.imag):
        return "+i*inf"
    return w


def cmd_classify(args, config):
    inv = Invariants(args.g2, args.g3)
    roots = cubic_roots(inv)
    hp = half_periods(inv)
    report = {
        "g2": inv.g2,
        "g3": inv.g3,
        "discriminant": inv.discriminant,
        "roots": list(roots.roots),
        "real_roots": list(roots.real_roots),
        "omega1": _period_marker(hp.omega1),
        "omega3": _period_marker(hp.omega3),
        "nu": hp.nu,
        "potentials": [
            {"case": p.case.value, "domain": [_jnum(d) for d in p.domain], "a": p.a} for p in classify(inv)
        ],
    }
    emit_json(report, args.out)
    return 0


def _potential_from_args(args):
    if args.ell is not None or args.e1 is not None:
        if args.ell is None or args.e1 is None:
            raise InvalidInput("--ell and --e1 go together")
        return quasi_periodic(args.ell, args.e1)
    if args.g2 is None or args.g3 is None:
        raise InvalidInput("give --g2/--g3 (optionally --case) or --ell/--e1")
    inv = Invariants(args.g2, args.g3)
    if args.case:
        return potential_for(inv, args.case, args.s0)
    for p in classify(inv):
        if p.domain[0] < args.s0 < p.domain[1]:
            return p
    raise InvalidInput(f"no potential for ({args.g2}, {args.g3}) contains s0 = {args.s0}")


TRAJ_HEADER = ["s", "g11", "g12", "g21", "g22", "k", "det", "nullity"]


def trajectory_rows(fp, deviation=None):
    det = det2(fp.gamma)
    null = nullity_series(fp.s, fp.gamma) if len(fp.s) >= 5 else np.full(len(fp.s), np.nan)
    for i, s in enumerate(fp.s):
        g = fp.gamma[i]
        row = [s, g[0, 0], g[0, 1], g[1, 0], g[1, 1], fp.k[i], det[i], null[i]]
        if deviation is not None:
            row.append(deviation[i])
        yield row


def cmd_trajectory(args, config):
    p = _potential_from_args(args)
    lo, hi = args.range
    s = np.linspace(lo, hi, config.samples)
    if config.domain_errors == "row":
        a, b = p.safe_domain()
        dropped = s[(s <= a) | (s >= b)]
        s = s[(s > a) & (s < b)]
        for x in dropped:
            log.warning("s = %r outside the domain %s, row skipped", x, p.domain)
    closed = ode = None
    if args.method in ("closed-form", "both"):
        closed = gamma_frame(args.m, p, args.s0, s)
    if args.method in ("ode", "both"):
        ode = ode_frame_oracle(args.m, p, args.s0, s, rtol=config.ode_rtol)
    fp = closed if closed is not None else ode
    deviation = None
    header = list(TRAJ_HEADER)
    status = 0
    if closed is not None and ode is not None:
        deviation = np.max(np.abs(closed.gamma - ode.gamma), axis=(1, 2))
        header.append("deviation")
        worst = max_deviation(closed, ode)
        if worst > config.residual_tol:
            log.error("closed form and ODE oracle differ by %.3e > %.3e", worst, config.residual_tol)
            status = 1
    write_csv(args.out, header, trajectory_rows(fp, deviation))
    write_meta(args.out, "trajectory", config, {"m": args.m, "case": p.case.value, "s0": args.s0, "method": args.method})
    return status


def cmd_fscan(args, config):
    grid = figure_grid(config.fscan_samples, args.m_min, args.m_max, args.gap)
    rows = f_scan(grid, jobs=config.jobs)
    write_csv(args.out, ["m", "f", "in_w", "error", "note"], ((r.m, r.f, r.in_w, r.error, r.note) for r in rows))
    good = [r for r in rows if r.in_w and math.isfinite(r.f)]
    spread = max(r.f for r in good) - min(r.f for r in good) if good else math.nan
    err = max(r.error for r in good) if good else math.nan
    summary = {
        "points": len(rows),
        "in_w": len(good),
        "out_of_w": sum(not r.in_w for r in rows),
        "variation": spread,
        "max_error": err,
        "longest_near_zero_run": zero_runs(rows),
    }
    log.info("fscan summary: %s", summary)
    write_meta(args.out, "fscan", config, {"summary": summary})
    return 0


CLOSED_HEADER = ["ell", "e1", "pi_plus", "pi_minus", "target_plus", "target_minus", "normalization", "N", "closure_error"]


def cmd_find_closed(args, config):
    hits = find_closed(args.m, config.denom_bound, config.n_max, normalization=config.normalization, tol=config.closure_tol)
    rows = [
        (h.params.ell, h.params.e1, h.pi_plus, h.pi_minus, h.target[0], h.target[1], h.normalization, h.n, h.error)
        for h in hits
    ]
    write_csv(args.out, CLOSED_HEADER, rows)
    if not hits:
        print(f"note: no closed trajectory found for m = {args.m}", file=sys.stderr)
    write_meta(args.out, "find-closed", config, {"m": args.m, "hits": len(hits)})
    return 0


def read_trajectory(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = {name: np.array([float(r[i]) for r in body]) for i, name in enumerate(header)}
    return cols


def cmd_verify(args, config):
    report = {"version": __version__, "seed": config.seed, "checks": []}
    failed = False
    if args.trajectory:
        cols = read_trajectory(args.trajectory)
        gamma = np.stack([cols["g11"], cols["g12"], cols["g21"], cols["g22"]], axis=-1).reshape(-1, 2, 2)
        det = det2(gamma)
        null = nullity_series(cols["s"], gamma)
        entries = [
            ("roundtrip_det", float(np.max(np.abs(det - cols["det"]))), 0.0),
            ("roundtrip_nullity", float(np.max(np.abs(null - cols["nullity"]))), 0.0),
            ("det_gamma", float(np.max(np.abs(det - 1.0))), 1e-9),
            ("nullity", float(np.max(np.abs(null[2:-2]))), 1e-7),
        ]
        for name, val, tol in entries:
            ok = val <= tol
            failed |= not ok
            report["checks"].append({"suite": "trajectory", "name": name, "value": val, "tol": tol, "passed": ok})
    if args.suite:
        for c in run_suites(args.suite, seed=config.seed, inject=args.inject):
            failed |= not c.passed
            report["checks"].append(c.as_dict())
            if not c.passed:
                log.error("invariant %s/%s failed: %.3e >= %.3e", c.suite, c.name, c.value, c.tol)
    report["passed"] = not failed
    emit_json(report, args.out)
    return 1 if failed else 0


# ---------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="adsnull", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override it")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int, help="worker processes (default: logical cores)")
    common.add_argument("--out", default="-", help="output path (default stdout)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="potentials for given invariants")
    p.add_argument("--g2", type=float, required=True)
    p.add_argument("--g3", type=float, required=True)

    p = sub.add_parser("trajectory", parents=[common], help="sample a trajectory to CSV")
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--g2", type=float)
    p.add_argument("--g3", type=float)
    p.add_argument("--case", choices=[c.value for c in CaseTag if c is not CaseTag.QUASI_PERIODIC])
    p.add_argument("--ell", type=float)
    p.add_argument("--e1", type=float)
    p.add_argument("--s0", type=float, required=True)
    p.add_argument("--range", type=float, nargs=2, required=True, metavar=("LO", "HI"))
    p.add_argument("--samples", type=int)
    p.add_argument("--method", choices=["closed-form", "ode", "both"], default="closed-form")
    p.add_argument("--residual-tol", dest="residual_tol", type=float, help="bound on the method=both deviation")
    p.add_argument("--ode-rtol", dest="ode_rtol", type=float)
    p.add_argument("--domain-errors", dest="domain_errors", choices=["fatal", "row"])

    p = sub.add_parser("fscan", parents=[common], help="tabulate f(m) = 400 Psi(m, 1/4, |m|+10)")
    p.add_argument("--m-min", dest="m_min", type=float, default=-10.0)
    p.add_argument("--m-max", dest="m_max", type=float, default=10.0)
    p.add_argument("--gap", type=float, default=0.1, help="exclude (-gap, gap)")
    p.add_argument("--samples", dest="fscan_samples", type=int)

    p = sub.add_parser("find-closed", parents=[common], help="search closed trajectories for one m")
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--denom-bound", dest="denom_bound", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--normalization", choices=["plain", "pi", "both"])
    p.add_argument("--closure-tol", dest="closure_tol", type=float)

    p = sub.add_parser("verify", parents=[common], help="run property suites")
    p.add_argument("--suite", action="append", choices=list(SUITES) + ["all"])
    p.add_argument("--trajectory", help="re-check a trajectory CSV")
    p.add_argument("--inject", help="debug: perturb the named check (or 'all')")
    return ap


COMMANDS = {
    "classify": cmd_classify,
    "trajectory": cmd_trajectory,
    "fscan": cmd_fscan,
    "find-closed": cmd_find_closed,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    level = os.environ.get("ADSNULL_LOG", "warn").lower()
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "verify" and not args.suite and not args.trajectory:
        args.suite = ["all"]
    try:
        config = load_config(args)
        return COMMANDS[args.command](args, config)
    except AdsNullError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
