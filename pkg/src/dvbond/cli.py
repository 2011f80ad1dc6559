"""Command-line surface: price scenarios, sweep parameters, validate
against the Monte Carlo engine.

Exit codes: 0 success, 1 validation mismatch (Monte Carlo disagrees
with the corrected closed form beyond 3 standard errors), 2 input
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import dataclasses
import math
import sys

from .config import ConfigError, Scenario, load_scenarios, scenario_from_dict, \
    scenario_to_dict
from .mathkit import QuadratureConvergenceError
from .mcoracle import McConfig, simulate_price
from .pricer import PriceResult, PricingMode, price_bond
from .ratecurve import PiecewiseConstant

PRICE_COLUMNS = ("scenario", "mode", "price", "zcb", "spread",
                 "I1", "I21", "I22", "I23", "I24", "expected_leg")
SWEEP_COLUMNS = ("scenario", "mode", "axis", "axis_value") + PRICE_COLUMNS[2:]

# axis name -> path inside the scenario dict (None = top level)
_SWEEP_AXES = {
    "valuation_time": (None, "valuation_time"),
    "r0": ("rate", "r0"),
    "a1": ("rate", "a1"),
    "a2": ("rate", "a2"),
    "s_r": ("rate", "s_r"),
    "V0": ("firm", "V0"),
    "mu": ("firm", "mu"),
    "b": ("firm", "b"),
    "s_V": ("firm", "s_V"),
    "V1": ("firm", "V1"),
    "t1": ("default", "t1"),
    "t2": ("default", "t2"),
    "K1": ("default", "K1"),
    "K2": ("default", "K2"),
    "R_u": ("default", "R_u"),
    "R_e": ("default", "R_e"),
    "lambda0": ("default", "lambda0"),
}


def _fmt(x) -> str:
    if x is None:
        return ""
    return f"{x:.15g}"


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load(path: str) -> dict[str, Scenario]:
    try:
        return load_scenarios(path)
    except (OSError, ConfigError) as err:
        raise SystemExit(_fail(2, str(err)))


def _select(scenarios: dict[str, Scenario], name: str | None) -> Scenario:
    if name is not None:
        if name not in scenarios:
            raise SystemExit(_fail(
                2, f"scenario {name!r} not in file (have: {', '.join(scenarios)})"
            ))
        return scenarios[name]
    if len(scenarios) == 1:
        return next(iter(scenarios.values()))
    raise SystemExit(_fail(
        2, f"file has several scenarios ({', '.join(scenarios)}); pick one "
           "with --scenario"
    ))


def _mode(scenario: Scenario, flag: str | None) -> PricingMode:
    return PricingMode(flag) if flag else scenario.mode


def _spread(result: PriceResult, scenario: Scenario) -> float:
    raw = -math.log(result.price / result.zcb) / (
        scenario.spec.t2 - scenario.valuation_time
    )
    return max(raw, 0.0)


def _price_row(scenario: Scenario, result: PriceResult) -> list[str]:
    t = result.terms
    return [
        scenario.name,
        result.mode.value,
        _fmt(result.price),
        _fmt(result.zcb),
        _fmt(_spread(result, scenario)),
        _fmt(t.i1 if t else None),
        _fmt(t.i21 if t else None),
        _fmt(t.i22 if t else None),
        _fmt(t.i23 if t else None),
        _fmt(t.i24 if t else None),
        _fmt(t.expected_default if t else None),
    ]


def _write_csv(path: str, header: tuple, rows: list[list[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _priced_scenario(scenario: Scenario, mode: PricingMode,
                     paper_literal_a: bool) -> PriceResult:
    if paper_literal_a:
        scenario = dataclasses.replace(
            scenario,
            rate_model=dataclasses.replace(scenario.rate_model,
                                           paper_literal_a=True),
        )
    return price_bond(scenario.pricing_inputs(), mode)


def cmd_price(args) -> int:
    scenario = _select(_load(args.file), args.scenario)
    mode = _mode(scenario, args.mode)
    try:
        result = _priced_scenario(scenario, mode, args.paper_literal_a)
    except QuadratureConvergenceError as err:
        return _fail(3, f"quadrature failure: {err}")

    print(f"scenario {scenario.name} (mode {mode.value}"
          + (", literal-A discount curve" if args.paper_literal_a else "") + ")")
    print(f"  price   {_fmt(result.price)}")
    print(f"  zcb     {_fmt(result.zcb)}")
    print(f"  spread  {_fmt(_spread(result, scenario))}")
    if result.terms:
        t = result.terms
        print(f"  I1      {_fmt(t.i1)}")
        print(f"  I21     {_fmt(t.i21)}")
        print(f"  I22     {_fmt(t.i22)}")
        print(f"  I23     {_fmt(t.i23)}")
        print(f"  I24     {_fmt(t.i24)}")
        print(f"  exp.leg {_fmt(t.expected_default)}")
    else:
        print("  (post-announcement valuation: no term decomposition)")
    if args.csv:
        _write_csv(args.csv, PRICE_COLUMNS, [_price_row(scenario, result)])
    return 0


def cmd_sweep(args) -> int:
    scenario = _select(_load(args.file), args.scenario)
    mode = _mode(scenario, args.mode)
    if args.axis not in _SWEEP_AXES:
        return _fail(2, f"unknown axis {args.axis!r}; choose one of "
                        f"{', '.join(sorted(_SWEEP_AXES))}")
    try:
        grid = [float(v) for v in args.grid.split(",") if v.strip() != ""]
    except ValueError:
        return _fail(2, f"grid must be comma-separated numbers, got {args.grid!r}")
    if not grid:
        return _fail(2, "empty grid")

    section, key = _SWEEP_AXES[args.axis]
    base = scenario_to_dict(scenario)
    if args.axis == "lambda0" and base["default"]["intensity"]["family"] != "constant":
        return _fail(2, "axis lambda0 requires a constant intensity family")
    if args.axis in ("a1", "a2", "s_r") and not isinstance(
        base["rate"][key], (int, float)
    ):
        return _fail(2, f"axis {args.axis} requires a constant coefficient")

    rows = []
    for value in grid:
        node = copy.deepcopy(base)
        if args.axis == "lambda0":
            node["default"]["intensity"]["lambda0"] = value
        elif section is None:
            node[key] = value
        else:
            node[section][key] = value
        try:
            bumped = scenario_from_dict(scenario.name, node)
            result = _priced_scenario(bumped, mode, False)
        except ConfigError as err:
            return _fail(2, f"grid value {value!r}: {err}")
        except QuadratureConvergenceError as err:
            return _fail(3, f"grid value {value!r}: quadrature failure: {err}")
        rows.append([scenario.name, mode.value, args.axis, _fmt(value)]
                    + _price_row(bumped, result)[2:])

    writer = csv.writer(sys.stdout)
    writer.writerow(SWEEP_COLUMNS)
    writer.writerows(rows)
    if args.csv:
        _write_csv(args.csv, SWEEP_COLUMNS, rows)
    return 0


def cmd_validate(args) -> int:
    scenario = _select(_load(args.file), args.scenario)
    inputs = scenario.pricing_inputs()
    try:
        corrected = price_bond(inputs, PricingMode.CORRECTED)
        literal = price_bond(inputs, PricingMode.PAPER_LITERAL)
    except QuadratureConvergenceError as err:
        return _fail(3, f"quadrature failure: {err}")
    cfg = McConfig(
        n_paths=args.paths,
        rate_steps_per_year=args.steps_per_year,
        seed=args.seed,
        antithetic=args.antithetic,
        n_threads=args.threads,
    )
    est = simulate_price(inputs, cfg)

    z_corr = (corrected.price - est.price) / est.std_error
    z_lit = (literal.price - est.price) / est.std_error
    print(f"scenario {scenario.name}: {args.paths} paths, seed {args.seed}, "
          f"{args.steps_per_year} rate steps/year"
          + (", antithetic" if args.antithetic else ""))
    print(f"  closed corrected      {_fmt(corrected.price)}")
    print(f"  closed paper-literal  {_fmt(literal.price)}")
    print(f"  monte carlo           {_fmt(est.price)} +/- {_fmt(est.std_error)}")
    print(f"  z corrected           {z_corr:+.3f}")
    print(f"  z paper-literal       {z_lit:+.3f}")

    if corrected.terms is not None:
        spec = scenario.spec
        decay1 = math.exp(
            -spec.intensity(scenario.firm.V0) * (spec.t1 - scenario.valuation_time)
        )
        t = corrected.terms
        lit_leg = literal.terms.expected_default
        legs = (
            ("survive+jump2 legs", corrected.zcb * decay1 * (t.i21 + t.i22),
             est.leg_breakdown["survive_both"] + est.leg_breakdown["unexpected_leg2"],
             math.hypot(est.leg_std_error["survive_both"],
                        est.leg_std_error["unexpected_leg2"])),
            ("expected_t2 leg", corrected.zcb * decay1 * (t.i23 + t.i24),
             est.leg_breakdown["expected_t2"], est.leg_std_error["expected_t2"]),
            ("unexpected_t1 leg", t.i1,
             est.leg_breakdown["unexpected_leg1"],
             est.leg_std_error["unexpected_leg1"]),
            ("expected_t1 leg", t.expected_default,
             est.leg_breakdown["expected_t1"], est.leg_std_error["expected_t1"]),
        )
        print("  legs (corrected closed form vs monte carlo):")
        for name, cf, mc, se in legs:
            z = 0.0 if se == 0.0 else (cf - mc) / se
            print(f"    {name:20s} {_fmt(cf):>22s} vs {_fmt(mc):>22s}  z {z:+.3f}")
        se1 = est.leg_std_error["expected_t1"]
        z_lit_leg = 0.0 if se1 == 0.0 else \
            (lit_leg - est.leg_breakdown["expected_t1"]) / se1
        print(f"    expected_t1 (paper-literal grouping)"
              f" {_fmt(lit_leg):>22s}  z {z_lit_leg:+.3f}")

    ok = abs(z_corr) <= 3.0
    print("PASS: corrected closed form within 3 SE of the simulation"
          if ok else
          "FAIL: corrected closed form beyond 3 SE of the simulation")
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dvbond",
        description="Defaultable-bond pricing from discretely declared firm value",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_price = sub.add_parser("price", help="price one scenario")
    p_price.add_argument("file", help="scenario YAML file")
    p_price.add_argument("--scenario", help="scenario name (if several)")
    p_price.add_argument("--mode", choices=[m.value for m in PricingMode],
                         help="override the scenario's pricing mode")
    p_price.add_argument("--csv", help="also write the result as a CSV row")
    p_price.add_argument("--paper-literal-A", dest="paper_literal_a",
                         action="store_true",
                         help="diagnostic: build the discount curve's log-level "
                              "coefficient from the mean-reversion coefficient")
    p_price.set_defaults(fn=cmd_price)

    p_sweep = sub.add_parser("sweep", help="price along a parameter grid")
    p_sweep.add_argument("file")
    p_sweep.add_argument("--scenario")
    p_sweep.add_argument("--mode", choices=[m.value for m in PricingMode])
    p_sweep.add_argument("--axis", required=True, help="scenario field to vary")
    p_sweep.add_argument("--grid", required=True, help="comma-separated values")
    p_sweep.add_argument("--csv", help="also write the table to a file")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_val = sub.add_parser("validate",
                           help="compare both closed-form modes to Monte Carlo")
    p_val.add_argument("file")
    p_val.add_argument("--scenario")
    p_val.add_argument("--paths", type=int, default=200_000)
    p_val.add_argument("--seed", type=int, default=42)
    p_val.add_argument("--steps-per-year", type=int, default=64,
                       dest="steps_per_year")
    p_val.add_argument("--threads", type=int, default=1)
    p_val.add_argument("--antithetic", action="store_true")
    p_val.set_defaults(fn=cmd_validate)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else 2
    except ValueError as err:
        return _fail(2, str(err))


if __name__ == "__main__":
    sys.exit(main())
