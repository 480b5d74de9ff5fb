"""Command-line driver.

Subcommands::

    homodyne simulate SCENARIO      per-frequency expectations and spectral densities
    homodyne gw-budget SCENARIO     signal-referred noise budget
    homodyne feasibility [P Q]      sideband-combination table
    homodyne verify [quick|full]    self-checks

Exit codes: 0 success, 1 failed verification, 2 bad scenario or arguments,
3 numerical guard (for example a vanishing response).  Output files are
written only after the whole table has been computed.
"""

from __future__ import annotations

import argparse
import cmath
import csv
import io
import json
import math
import os
import sys
import tempfile
from typing import Sequence

from .gw import BUDGET_COLUMNS, main_output, signal_referred_budget
from .modes import Sideband, SidebandSector
from .moments import expect, noise_psd, number
from .network import propagate
from .readout import Target, dbhd_observables, feasibility, feasibility_table, t_b, t_theta
from .scenario import SCHEMA_VERSION, Scenario, ScenarioError, load_scenario
from .states import lo_state
from .verify import run_checks

__all__ = ["main", "simulate_table", "budget_table", "EXIT_OK", "EXIT_FAIL", "EXIT_SCHEMA", "EXIT_NUMERIC"]

EXIT_OK, EXIT_FAIL, EXIT_SCHEMA, EXIT_NUMERIC = 0, 1, 2, 3

_EIGHT_PORT = ("D1", "D2", "D3", "D4")


class _NumericalGuard(RuntimeError):
    pass


def _is_eight_port(ports: Sequence[str]) -> bool:
    return tuple(sorted(ports)) == _EIGHT_PORT


def simulate_table(sc: Scenario) -> tuple[list[str], list[list[float]]]:
    """Per-frequency detector numbers and, for the eight-port network, readouts.

    Columns: ``omega, theta``, ``n_<port>_plus``/``n_<port>_minus`` for each
    detector, then for the eight-port network the real and imaginary parts of
    ``s_D1D2``/``s_D3D4`` on each sideband and of ``t_theta``, followed by
    ``psd_t_theta`` and ``psd_t_b_plus``.
    """
    net = sc.topology()
    model = sc.model()
    policy = sc.theta_fn(model)
    ports = sorted(net.detector_ports)
    lo_stems = [s.stem for s in net.sources if s.kind.value == "lo"]
    if len(lo_stems) != 1:
        raise ScenarioError("network needs exactly one LO source")
    has_b = any(s.name == "b" for s in net.sources)
    dbhd = _is_eight_port(ports) and net.name == "eight-port"

    cols = ["omega", "theta"]
    cols += [f"n_{p}_{sb}" for p in ports for sb in ("plus", "minus")]
    if dbhd:
        for obs in ("s_D1D2_plus", "s_D3D4_plus", "s_D1D2_minus", "s_D3D4_minus", "t_theta"):
            cols += [f"re_{obs}", f"im_{obs}"]
        cols += ["psd_t_theta", "psd_t_b_plus"]

    rows = []
    for omega in sc.grid:
        sector = SidebandSector.standard(omega)
        theta = float(policy(model, omega))
        lo = sc.lo(theta)
        state = lo_state(sector, lo, stem=lo_stems[0])
        bp, bm = main_output(model, sector, theta)
        fields = {}
        for sb, b in ((Sideband.UPPER, bp), (Sideband.LOWER, bm)):
            fields[sb] = propagate(net, sector, sb, {"b": b} if has_b else None)
        row = [omega, theta]
        for p in ports:
            for sb in (Sideband.UPPER, Sideband.LOWER):
                row.append(expect(number(fields[sb][p]), state).real)
        if dbhd:
            gp, gm = lo.at(omega)
            if not all(abs(g) > 0 and abs(g / abs(g) - cmath.exp(1j * theta)) < 1e-12 for g in (gp, gm)):
                raise ScenarioError(f"LO phases at omega={omega} must equal the homodyne angle {theta}")
            s12p, s34p = dbhd_observables(fields[Sideband.UPPER], sc.eta, gp)
            s12m, s34m = dbhd_observables(fields[Sideband.LOWER], sc.eta, gm)
            tt = t_theta(sector, theta, sc.eta, lo, bp, bm)
            tbp, _ = t_b(s12p, s34p, gp)
            for obs in (s12p, s34p, s12m, s34m, tt):
                v = expect(obs, state)
                row += [v.real, v.imag]
            row += [noise_psd(tt, state), noise_psd(tbp, state)]
        rows.append(row)
    return cols, rows


def budget_table(sc: Scenario) -> tuple[list[str], list[list[float]]]:
    model = sc.model()
    out = signal_referred_budget(
        model,
        sc.grid,
        eta=sc.eta,
        gamma_abs=sc.common_gamma_abs(),
        policy=sc.theta_fn(model),
        large_gamma=sc.large_gamma,
        include_signal_power=sc.include_signal_power,
    )
    return list(BUDGET_COLUMNS), [list(r.as_csv_row()) for r in out]


def _fmt(x: float) -> str:
    return repr(float(x))


def render(cols: list[str], rows: list[list[float]], fmt: str, command: str) -> str:
    """CSV with a fixed header, or a JSON document with ``schema_version``."""
    if fmt == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "columns": cols,
            "rows": [[float(x) for x in r] for r in rows],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".homodyne-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _scenario_from_args(args: argparse.Namespace) -> Scenario:
    sc = load_scenario(args.scenario)
    return sc.with_overrides(
        eta=args.eta,
        theta=args.theta,
        policy=args.policy,
        gamma_abs=args.gamma_abs,
        large_gamma=True if args.large_gamma else None,
        out_format=args.format,
        out_path=args.out,
    )


def _run_table(args: argparse.Namespace, builder) -> int:
    sc = _scenario_from_args(args)
    try:
        cols, rows = builder(sc)
    except ScenarioError:
        raise
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise _NumericalGuard(str(exc)) from exc
    if any(not math.isfinite(x) for r in rows for x in r):
        raise _NumericalGuard("non-finite value in output table")
    _emit(render(cols, rows, sc.out_format, args.command), sc.out_path)
    return EXIT_OK


def _cmd_feasibility(args: argparse.Namespace) -> int:
    if args.pair:
        if len(args.pair) != 2:
            raise ScenarioError("feasibility takes two targets, e.g. b1 b2dag")
        try:
            reports = [feasibility(tuple(args.pair))]
        except (ValueError, KeyError) as exc:
            names = ", ".join(t.value for t in Target)
            raise ScenarioError(f"targets must be two distinct names from {names}") from exc
    else:
        reports = feasibility_table()
    if args.format == "json":
        doc = {"schema_version": SCHEMA_VERSION, "rows": [r.as_dict() for r in reports]}
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        lines = []
        for r in reports:
            head = f"{{{r.pair[0].value}, {r.pair[1].value}}}: {'feasible' if r.feasible else 'infeasible'}"
            lines.append(head)
            lines.append(f"  gamma: {r.gamma_constraint}")
            lines.append(f"  beta/alpha: {r.alpha_beta_relation}")
            lines.append(f"  result: {r.combination_formula}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    results = run_checks(args.level)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="homodyne", description="Two-photon homodyne readout simulator.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("simulate", "per-frequency expectations and spectral densities"),
        ("gw-budget", "signal-referred noise budget"),
    ):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("scenario")
        s.add_argument("--eta", type=float)
        s.add_argument("--theta", type=float, help="fixed homodyne angle (implies --policy fixed)")
        s.add_argument("--policy", choices=["fixed", "cot_half_K"])
        s.add_argument("--gamma-abs", type=float, dest="gamma_abs")
        s.add_argument("--large-gamma", action="store_true", dest="large_gamma")
        s.add_argument("--format", choices=["csv", "json"])
        s.add_argument("--out")
    f = sub.add_parser("feasibility", help="which quadrature pairs two balanced detectors can isolate")
    f.add_argument("pair", nargs="*", metavar="TARGET", help="two of b1, b2, b1dag, b2dag")
    f.add_argument("--format", choices=["text", "json"], default="text")
    f.add_argument("--out")
    v = sub.add_parser("verify", help="run self-checks")
    v.add_argument("level", nargs="?", choices=["quick", "full"], default="quick")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_SCHEMA
    try:
        if args.command == "simulate":
            return _run_table(args, simulate_table)
        if args.command == "gw-budget":
            return _run_table(args, budget_table)
        if args.command == "feasibility":
            return _cmd_feasibility(args)
        return _cmd_verify(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except _NumericalGuard as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
