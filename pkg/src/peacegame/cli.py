"""Command-line driver: read a scenario file, run a solver, write reports.

Exit codes: 0 success, 1 invariant violations (``verify``), 2 unreadable or
invalid scenario, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import os
import sys
import tempfile
from importlib import metadata as _metadata
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import auction, bribing, oracle, requesting
from .bribing import Scenario
from .dist import Dist
from .errors import DomainError, NumericFailure, PeaceGameError

EXIT_OK, EXIT_VIOLATION, EXIT_PARSE, EXIT_NUMERIC = 0, 1, 2, 3

OPTION_DEFAULTS: dict[str, Any] = {
    "grid_n": None,
    "tol": None,
    "curve_points": 201,
    "max_iter": 200,
    "fp_types": 200,
    "fp_iters": 5000,
    "out": None,
}
GRID_DEFAULTS = {"bribing": 1000, "requesting": 1000, "auction": 200, "verify": 100}
TOL_DEFAULTS = {"bribing": bribing.EQ_TOL, "requesting": requesting.RESIDUAL_TOL, "auction": 1e-6, "verify": 1e-6}


class ScenarioError(ValueError):
    """The scenario file is missing, malformed or fails validation."""


# -- input ------------------------------------------------------------------------


def load_scenario(path: str | os.PathLike) -> tuple[Scenario, dict[str, Any]]:
    """Parse ``{"f1": ..., "f2": ..., "options": {...}}``; unknown keys are errors."""
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ScenarioError(f"scenario file not found: {path}") from exc
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a JSON object")
    unknown = set(raw) - {"f1", "f2", "options"}
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {sorted(unknown)}")
    if "f1" not in raw or "f2" not in raw:
        raise ScenarioError("scenario needs both f1 and f2")
    options = dict(raw.get("options") or {})
    bad = set(options) - set(OPTION_DEFAULTS)
    if bad:
        raise ScenarioError(f"unknown options: {sorted(bad)}")
    try:
        scen = Scenario(Dist.from_literal(raw["f1"]), Dist.from_literal(raw["f2"]))
    except (PeaceGameError, KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"invalid distribution: {exc}") from exc
    return scen, options


# -- output -------------------------------------------------------------------------


def _clean(obj: Any) -> Any:
    """Make ``obj`` JSON-safe: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: Path, obj: Any) -> None:
    _atomic_write(path, dumps(obj))


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if x is None else repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    _atomic_write(path, buf.getvalue())


def _version() -> str:
    try:
        return _metadata.version("artifact")
    except _metadata.PackageNotFoundError:
        return "0+unknown"


def _metadata_block(command: str, args: argparse.Namespace, settings: dict[str, Any]) -> dict:
    meta = {"tool": "peacegame", "version": _version(), "command": command, "settings": settings}
    if not args.reproducible:
        meta["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    return meta


def _print_summary(title: str, items: dict[str, Any]) -> None:
    print(title)
    width = max(len(k) for k in items)
    for k, v in items.items():
        v = _clean(v)
        text = json.dumps(v) if not isinstance(v, str) else v
        print(f"  {k.ljust(width)}  {text}")


# -- settings ---------------------------------------------------------------------------


def _settings(command: str, args: argparse.Namespace, options: dict[str, Any]) -> dict[str, Any]:
    s = dict(OPTION_DEFAULTS)
    s.update(options)
    if args.grid_n is not None:
        s["grid_n"] = args.grid_n
    if args.tol is not None:
        s["tol"] = args.tol
    if s["grid_n"] is None:
        s["grid_n"] = GRID_DEFAULTS[command]
    if s["tol"] is None:
        s["tol"] = TOL_DEFAULTS[command]
    if args.max_iter is not None:
        s["max_iter"] = args.max_iter
    out = args.out or s.pop("out") or "."
    s.pop("out", None)
    s["grid_n"] = int(s["grid_n"])
    if s["grid_n"] < 2:
        raise ScenarioError("grid_n must be at least 2")
    return {**s, "_out": out}


# -- commands ---------------------------------------------------------------------------


def cmd_bribing(scen: Scenario, args: argparse.Namespace, st: dict[str, Any]) -> int:
    rep = bribing.implementability(scen, grid_n=st["grid_n"], tol=st["tol"])
    wit = bribing.security_witness(scen)
    out = Path(st["_out"])
    settings = {k: v for k, v in st.items() if not k.startswith("_")}
    report = {"implementability": rep.__dict__, "metadata": _metadata_block("bribing", args, settings)}
    write_json(out / "implementability.json", report)
    write_json(out / "security_witness.json", {"security_witness": wit.__dict__, "metadata": report["metadata"]})
    write_csv(out / "bribe_curve.csv", ["b", "a2", "payoff"], bribing.bribe_curve(scen, st["curve_points"]))
    _print_summary("Bribing", {
        "c1_bar": rep.c1_bar, "b_star": rep.b_star, "a2_at_bstar": rep.a2_at_bstar,
        "acceptance_prob": rep.acceptance_prob, "dev_payoff": rep.dev_payoff,
        "lhs": rep.lhs, "rhs": rep.rhs, "implementable": rep.implementable,
        "bribe_interval": rep.bribe_interval, "witness_bribe": wit.witness_bribe,
        "b_bar_candidate": wit.b_bar_candidate,
    })
    return EXIT_OK


def cmd_requesting(scen: Scenario, args: argparse.Namespace, st: dict[str, Any]) -> int:
    rep = requesting.robust_peaceful_exists(scen, tol=st["tol"], grid_n=st["grid_n"])
    if rep.exists:
        rep = requesting.request_security(scen, rep)
    cond = requesting.security_conditions(scen)
    out = Path(st["_out"])
    settings = {k: v for k, v in st.items() if not k.startswith("_")}
    body = dict(rep.__dict__)
    body["security_conditions"] = cond.__dict__
    write_json(out / "request_report.json", {
        "request_report": body, "metadata": _metadata_block("requesting", args, settings),
    })
    write_csv(out / "request_curve.csv", ["r", "alpha2", "payoff"], requesting.request_curve(scen, st["curve_points"]))
    _print_summary("Requesting", {
        "cond_a": rep.cond_a, "cond_b": rep.cond_b, "cond_c_residual": rep.cond_c_residual,
        "exists": rep.exists, "r_bar": rep.r_bar, "r_star": rep.r_star,
        "x_sigma_star": rep.x_sigma_star, "securable": rep.securable,
    })
    return EXIT_OK


def _solve_auction(scen: Scenario, args: argparse.Namespace, st: dict[str, Any]) -> auction.AuctionEq:
    if args.point_mass is not None:
        opp = scen.f2 if args.known_side == 1 else scen.f1
        return auction.solve_one_sided(args.point_mass, opp, known_side=args.known_side)
    return auction.solve_two_sided(scen.f1, scen.f2, max_iter=int(st["max_iter"]))


def _oracle_agreement(scen: Scenario, eq: auction.AuctionEq, args: argparse.Namespace, st: dict[str, Any]) -> dict:
    n = int(st["fp_types"])
    t1 = oracle.discretize(scen.f1, n)
    t2 = oracle.discretize(scen.f2, n)
    if args.point_mass is not None:
        if args.known_side == 1:
            t1 = oracle.point_type(args.point_mass)
        else:
            t2 = oracle.point_type(args.point_mass)
    top = float(max(t1[0].max(), t2[0].max()))
    game = oracle.make_game(t1, t2, top, n + 1)
    res = oracle.fictitious_play(game, iters=int(st["fp_iters"]))
    h1 = np.array([eq.H1(float(b)) for b in game.bids])
    h2 = np.array([eq.H2(float(b)) for b in game.bids])
    return {
        "fp_types": n, "fp_iters": int(st["fp_iters"]), "empirical": {"x_sigma": res.x_sigma, "c1": res.c1, "c2": res.c2},
        "abs_diff": {"x_sigma": abs(res.x_sigma - eq.x_sigma), "c1": abs(res.c1 - eq.c1), "c2": abs(res.c2 - eq.c2)},
        "sup_norm_H1": float(np.max(np.abs(res.H1 - h1))), "sup_norm_H2": float(np.max(np.abs(res.H2 - h2))),
        "grid_gap_H1": oracle.grid_cdf_gap(res.H1, eq.H1, game.bids),
        "grid_gap_H2": oracle.grid_cdf_gap(res.H2, eq.H2, game.bids),
        "max_regret": res.max_regret,
    }


def cmd_auction(scen: Scenario, args: argparse.Namespace, st: dict[str, Any]) -> int:
    eq = _solve_auction(scen, args, st)
    out = Path(st["_out"])
    settings = {k: v for k, v in st.items() if not k.startswith("_")}
    settings["point_mass"] = args.point_mass
    settings["known_side"] = args.known_side if args.point_mass is not None else None
    body = {"equilibrium": eq.summary(), "metadata": _metadata_block("auction", args, settings)}
    if args.verify:
        body["oracle"] = _oracle_agreement(scen, eq, args, st)
    write_json(out / "auction.json", body)
    write_csv(out / "auction_curve.csv", ["beta", "H1", "H2"], eq.table())
    summary = dict(eq.summary())
    if args.verify:
        summary["oracle_sup_norm_H1"] = body["oracle"]["sup_norm_H1"]
        summary["oracle_sup_norm_H2"] = body["oracle"]["sup_norm_H2"]
    _print_summary("Auction", summary)
    return EXIT_OK


def cmd_verify(scen: Scenario, args: argparse.Namespace, st: dict[str, Any]) -> int:
    from .checks import convergence_table, run_invariants

    violations, checked = run_invariants(scen, tol=st["tol"], grid_n=st["grid_n"])
    table = convergence_table(scen, st["grid_n"])
    out = Path(st["_out"])
    settings = {k: v for k, v in st.items() if not k.startswith("_")}
    write_json(out / "verify.json", {
        "checked": checked, "violations": violations, "convergence": table,
        "metadata": _metadata_block("verify", args, settings),
    })
    _print_summary("Verify", {"checks": len(checked), "violations": len(violations)})
    for v in violations:
        print(f"  VIOLATION {v['check']}: {v['detail']}")
    for row in table:
        print(f"  grid_n={row['grid_n']}  max_threshold_gap={json.dumps(row['max_threshold_gap'])}")
    return EXIT_VIOLATION if violations else EXIT_OK


COMMANDS = {"bribing": cmd_bribing, "requesting": cmd_requesting, "auction": cmd_auction, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="peacegame", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--scenario", required=True, help="scenario JSON file")
        sp.add_argument("--out", default=None, help="output directory (default: option 'out' or '.')")
        sp.add_argument("--grid-n", type=int, default=None, help="search or oracle grid size")
        sp.add_argument("--tol", type=float, default=None, help="tolerance for equality and inequality checks")
        sp.add_argument("--reproducible", action="store_true", help="omit wall-clock metadata")
        sp.add_argument("--verify", action="store_true", help="also compare against the fictitious-play oracle")
        sp.add_argument("--max-iter", type=int, default=None, help="shooting solver iteration cap")
        if name == "auction":
            sp.add_argument("--point-mass", type=float, default=None, metavar="V",
                            help="treat one player's value as known and equal to V")
            sp.add_argument("--known-side", type=int, choices=(1, 2), default=1)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if not hasattr(args, "point_mass"):
        args.point_mass, args.known_side = None, 1
    try:
        scen, options = load_scenario(args.scenario)
        st = _settings(args.command, args, options)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        return COMMANDS[args.command](scen, args, st)
    except NumericFailure as exc:
        print(f"numeric failure: {exc} (bracket={exc.bracket})", file=sys.stderr)
        return EXIT_NUMERIC
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
