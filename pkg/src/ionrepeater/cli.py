"""Command-line entry point.

Subcommands write CSV (header row, 9 significant digits) to ``--out`` or
stdout.  Exit status: 0 success, 1 invalid scenario or arguments,
2 numeric or assertion failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import replace

import numpy as np

from . import multiplex, photonic
from .config import ConfigError, Scenario
from .errors import InfeasibleLinkError, RepeaterError
from .montecarlo import simulate_nested
from .repeater import t_direct, t_total

EXIT_OK, EXIT_INVALID, EXIT_FAILURE = 0, 1, 2
BELL_TOL = 1e-12


class CheckFailed(Exception):
    def __init__(self, rows, message):
        super().__init__(message)
        self.rows = rows


def fmt(x: float) -> str:
    return f"{x:.8e}"


def default_distances() -> list[float]:
    return [float(d) for d in np.geomspace(100.0, 2000.0, 20)]


def parse_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def rate_table(scenario: Scenario, distances: list[float]) -> list[list[str]]:
    if any(b <= a for a, b in zip(distances, distances[1:])) or min(distances, default=1) <= 0:
        raise ConfigError("distances must be positive and strictly increasing")
    direct = scenario.direct()
    scenario.repeater(4)
    rows = [["distance_km", "mean_time_s", "model"]]
    for d in distances:
        rows.append([fmt(d), fmt(t_direct(d, direct)), "direct"])
    for n, tag in ((3, "ion-8-links"), (4, "ion-16-links")):
        for d in distances:
            rows.append([fmt(d), fmt(t_total(scenario.repeater(n, nesting_level=n, total_distance_km=d))), tag])
    return rows


def sensitivity(scenario: Scenario, p_values: list[float]) -> list[list[str]]:
    configs = [(p, scenario.repeater(4, p=p)) for p in p_values]
    rows = [["p", "t_total_s"]]
    for p, config in configs:
        try:
            rows.append([fmt(p), fmt(t_total(config))])
        except InfeasibleLinkError:
            rows.append([fmt(p), "infeasible"])
    return rows


def bell_check(scenario: Scenario) -> list[list[str]]:
    p_a, p_b, eta_t, eta_d = (scenario[k] for k in ("bell.p_a", "bell.p_b", "bell.eta_t", "bell.eta_d"))
    outcomes = {o.pattern: o for o in photonic.simulate_heralding(p_a, p_b, eta_t, eta_d)}
    expected = photonic.herald_probability(p_a, p_b, eta_t, eta_d)
    rows = [["pattern", "probability", "correction", "fidelity"]]
    failures = []
    for pattern in photonic.HERALD_PATTERNS:
        label = "d{}/dt{}".format("+" if pattern.d_plus else "-", "+" if pattern.dt_plus else "-")
        o = outcomes.get(pattern)
        if o is None:
            rows.append([label, fmt(0.0), "", ""])
            if expected > 0:
                failures.append(f"{label} missing")
            continue
        rows.append([label, fmt(o.probability), o.correction, fmt(o.fidelity)])
        if abs(o.probability - expected / 4) > BELL_TOL:
            failures.append(f"{label} probability {o.probability} != {expected / 4}")
        if abs(o.fidelity - 1.0) > BELL_TOL:
            failures.append(f"{label} fidelity {o.fidelity}")
    total = photonic.coincidence_probability(outcomes.values())
    completeness = math.fsum(o.probability for o in outcomes.values())
    if abs(total - expected) > BELL_TOL:
        failures.append(f"total {total} != closed form {expected}")
    if abs(completeness - 1.0) > BELL_TOL:
        failures.append(f"outcome probabilities sum to {completeness}")
    rows.append(["total", fmt(total), "", ""])
    rows.append(["closed_form", fmt(expected), "", ""])
    rows.append(["status", "FAIL" if failures else "PASS", "", ""])
    if failures:
        raise CheckFailed(rows, "; ".join(failures))
    return rows


def simulate(scenario: Scenario) -> list[list[str]]:
    options = scenario.sim_options(4)
    dist, factors = simulate_nested(options)
    analytic = t_total(options.config, include_swap_overhead=options.include_swap_overhead,
                       include_higher_level_comms=options.include_higher_level_comms)
    rows = [["record", "key", "value"]]
    rows += [["sample", str(i), fmt(t)] for i, t in enumerate(dist.samples)]
    rows.append(["summary", "mean", fmt(dist.mean)])
    rows.append(["summary", "stderr", fmt(dist.stderr)])
    rows += [["summary", f"p{q}", fmt(v)] for q, v in dist.percentiles.items()]
    rows += [["level_factor", str(k), fmt(f)] for k, f in enumerate(factors.per_level_factor, start=1)]
    rows.append(["analytic", "t_total", fmt(analytic)])
    rows.append(["analytic", "relative_deviation", fmt((dist.mean - analytic) / analytic)])
    return rows


def multiplex_report(scenario: Scenario) -> list[list[str]]:
    config = scenario.repeater(3)
    timing = scenario.timing()
    chain = scenario.chain()
    plan = multiplex.attempts_per_window(config.L0_km, timing, chain, c=config.c)
    base = t_total(replace(config, multiplex_factor=1))
    mux = multiplex.multiplexed_t_total(config, timing, chain)
    rows = [["quantity", "value"]]
    rows.append(["L0_km", fmt(config.L0_km)])
    rows.append(["repetition_rate_hz", fmt(timing.repetition_rate)])
    rows.append(["attempts_per_window", str(plan.attempts)])
    rows.append(["bottleneck", plan.bottleneck])
    rows.append(["speedup", fmt(base / mux)])
    rows.append(["speedup_quoted_reference", fmt(multiplex.cavity_length_speedup(
        timing.cavity_length, reference_length=timing.reference_cavity_length))])
    rows.append(["t_total_s", fmt(base)])
    rows.append(["t_total_multiplexed_s", fmt(mux)])
    return rows


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario file of key=value lines")
    common.add_argument("--out", help="write CSV here instead of stdout")
    common.add_argument("--seed", type=int, help="override sim.seed")
    common.add_argument("--trials", type=int, help="override sim.trials")
    common.add_argument("--distances", type=parse_list, help="comma-separated distances in km")

    parser = argparse.ArgumentParser(prog="ionrepeater", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("rate-table", parents=[common], help="direct vs 8- and 16-link repeater times")
    sens = sub.add_parser("sensitivity", parents=[common], help="t_total versus source efficiency p")
    sens.add_argument("--p-values", type=parse_list,
                      default=[round(0.1 * k, 1) for k in range(1, 11)])
    sub.add_parser("bell-check", parents=[common], help="verify the heralded Bell-state analysis")
    sub.add_parser("simulate", parents=[common], help="Monte-Carlo waiting-time distribution")
    sub.add_parser("multiplex", parents=[common], help="temporal multiplexing report")
    return parser


def render(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK

    try:
        scenario = Scenario.from_file(args.config) if args.config else Scenario()
        scenario = scenario.with_overrides(**{"sim.seed": args.seed, "sim.trials": args.trials})
        scenario.validate()
        if args.command == "rate-table":
            rows = rate_table(scenario, args.distances or default_distances())
        elif args.command == "sensitivity":
            rows = sensitivity(scenario, args.p_values)
        elif args.command == "bell-check":
            rows = bell_check(scenario)
        elif args.command == "simulate":
            rows = simulate(scenario)
        else:
            rows = multiplex_report(scenario)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CheckFailed as exc:
        emit(render(exc.rows), args.out)
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except RepeaterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE

    emit(render(rows), args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
