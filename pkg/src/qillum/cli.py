"""Command-line entry point: config-driven experiment runs.

Scenario parameters come from an optional TOML config file (keys epsilon,
nbar_probe, nbar_env, p0, probe, dims, nodes, seed) with flag overrides on
top. Exit codes: 0 success, 2 configuration error, 3 convergence or
truncation failure. The `theorem1` subcommand additionally exits 1 when the
identity check fails at the requested tolerance.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import experiments
from .discord import theorem1_check
from .fock import PsdError, TruncationError
from .info import ConvergenceError
from .scenarios import (DEFAULT_POLICY, CoherentProbe, EprProbe,
                        ScenarioParams, SqueezedCoherentProbe,
                        TruncationPolicy)

CONFIG_KEYS = {"epsilon", "nbar_probe", "nbar_env", "p0", "probe", "dims",
               "nodes", "seed"}


class ConfigError(ValueError):
    pass


def parse_grid(text: str) -> tuple[float, ...]:
    """'start:stop:count' (inclusive linspace) or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"bad grid {text!r}; want start:stop:count")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ConfigError(f"bad grid {text!r}: {exc}") from None
        if count < 1:
            raise ConfigError("grid count must be positive")
        return tuple(float(x) for x in np.linspace(start, stop, count))
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}: {exc}") from None


def _probe_from_name(name: str):
    if name == "epr":
        return EprProbe()
    if name == "coherent":
        return CoherentProbe()
    if name.startswith("squeezed:"):
        return SqueezedCoherentProbe(float(name.split(":", 1)[1]))
    raise ConfigError(f"unknown probe {name!r}; use epr, coherent, or "
                      "squeezed:<r>")


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = tomllib.loads(p.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from None
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


def _resolve(args) -> tuple[ScenarioParams, TruncationPolicy, dict]:
    """Config file + flag overrides -> scenario, truncation policy, knobs."""
    cfg = load_config(args.config)
    merged = {
        "epsilon": 0.1, "nbar_probe": 0.5, "nbar_env": 4.0, "p0": 0.5,
        "probe": "epr", "dims": None, "nodes": 81, "seed": 0,
    }
    merged.update(cfg)
    flag_names = {"epsilon": "epsilon", "nbar_probe": "nbar",
                  "nbar_env": "nenv", "p0": "p0", "probe": "probe",
                  "dims": "dims", "nodes": "nodes", "seed": "seed"}
    for key, flag in flag_names.items():
        value = getattr(args, flag, None)
        if value is not None:
            merged[key] = value
    probe = merged["probe"]
    if isinstance(probe, str):
        probe = _probe_from_name(probe)
    try:
        params = ScenarioParams(float(merged["epsilon"]),
                                float(merged["nbar_probe"]),
                                float(merged["nbar_env"]),
                                p0=float(merged["p0"]), probe=probe)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad scenario parameters: {exc}") from None
    policy = DEFAULT_POLICY
    if merged["dims"]:
        policy = replace(DEFAULT_POLICY, min_dim=int(merged["dims"]))
    knobs = {"nodes": int(merged["nodes"]), "seed": int(merged["seed"])}
    if knobs["nodes"] < 21 or knobs["nodes"] % 2 == 0:
        raise ConfigError("nodes must be odd and at least 21")
    return params, policy, knobs


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="TOML config file")
    sub.add_argument("--out", default=None, help="artifact directory")
    sub.add_argument("--epsilon", type=float, default=None)
    sub.add_argument("--nbar", type=float, default=None,
                     help="probe mean photon number")
    sub.add_argument("--nenv", type=float, default=None,
                     help="environment mean photon number")
    sub.add_argument("--p0", type=float, default=None,
                     help="object-present prior")
    sub.add_argument("--probe", default=None,
                     help="epr | coherent | squeezed:<r>")
    sub.add_argument("--dims", type=int, default=None,
                     help="minimum Fock dimension per mode")
    sub.add_argument("--nodes", type=int, default=None,
                     help="upper-bound quadrature nodes (odd, >= 21)")
    sub.add_argument("--seed", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qillum",
        description="quantum-illumination information workbench")
    subs = parser.add_subparsers(dest="command", required=True)

    sweep = subs.add_parser("sweep", help="sweep one axis")
    _add_common(sweep)
    sweep.add_argument("--axis", required=True, choices=experiments.AXES)
    sweep.add_argument("--grid", required=True,
                       help="start:stop:count or comma list")
    sweep.add_argument("--quantities", default="chi_q,chi_s,chi_c",
                       help="comma list of quantity tokens")

    gd = subs.add_parser("generaldyne", help="scan the idler measurement")
    _add_common(gd)
    gd.add_argument("--t-grid", default="0.05:0.95:19", dest="t_grid")
    gd.add_argument("--discord", action="store_true",
                    help="also scan the mixture discord")

    perturb = subs.add_parser("perturb", help="perturbed-probe study")
    _add_common(perturb)
    perturb.add_argument("--samples", type=int, default=10_000)
    perturb.add_argument("--eta", type=float, default=3e-4,
                         help="perturbation norm")
    perturb.add_argument("--keep", type=float, default=0.5,
                         help="fraction of top samples to histogram")

    squeezed = subs.add_parser("squeezed", help="squeezed-probe scan")
    _add_common(squeezed)
    squeezed.add_argument("--r-grid", default="0:0.008:9", dest="r_grid")

    conc = subs.add_parser("concavity", help="lower bound vs energy")
    _add_common(conc)
    conc.add_argument("--energy-grid", default="0.05:1:11", dest="energy_grid")

    th = subs.add_parser("theorem1", help="consumed-discord identity check")
    _add_common(th)
    th.add_argument("--tol", type=float, default=5e-4)
    th.add_argument("--full", action="store_true",
                    help="also scan for the common optimal measurement")

    show = subs.add_parser("show-config", help="print the resolved scenario")
    _add_common(show)
    return parser


def _cmd_sweep(args, params, policy, knobs) -> int:
    quantities = tuple(q.strip() for q in args.quantities.split(",") if q.strip())
    spec = experiments.SweepSpec(args.axis, parse_grid(args.grid), params,
                                 quantities)
    rows = experiments.run_sweep(spec, out_dir=args.out, nodes=knobs["nodes"],
                                 policy=policy)
    bad = [r for r in rows if r.flags]
    print(f"sweep {args.axis}: {len(rows)} points, {len(bad)} flagged")
    for row in bad:
        print(f"  {args.axis}={row.axis_value:g}: {row.flags[0]}")
    return 0


def _cmd_generaldyne(args, params, policy, knobs) -> int:
    rows = experiments.run_generaldyne_scan(
        params, parse_grid(args.t_grid), include_discord=args.discord,
        out_dir=args.out, policy=policy)
    t_star, chi = experiments.scan_optimum(rows, "chi_c")
    print(f"chi_c optimum at t = {t_star:g} ({chi:.6e} bits)")
    if args.discord:
        t_mix, dmix = experiments.scan_optimum(rows, "discord_mixture",
                                               minimize=True)
        print(f"mixture discord minimum at t = {t_mix:g} ({dmix:.6e} bits)")
    return 0


def _cmd_perturb(args, params, policy, knobs) -> int:
    if not isinstance(params.probe, CoherentProbe):
        params = replace(params, probe=CoherentProbe())
    spec = experiments.PerturbationStudySpec(
        n_samples=args.samples, perturbation_scale=args.eta,
        seed=knobs["seed"], keep_fraction=args.keep)
    result = experiments.run_perturbation_study(spec, params,
                                                out_dir=args.out,
                                                policy=policy)
    print(f"samples {spec.n_samples}, kept {result.kept}, "
          f"rejected {result.rejected}")
    print(f"reference chi {result.reference_chi:.10e}")
    print(f"{result.exceed_count} samples above the reference "
          f"({100.0 * result.exceed_fraction:.2f}%)")
    return 0


def _cmd_squeezed(args, params, policy, knobs) -> int:
    if not isinstance(params.probe, CoherentProbe):
        params = replace(params, probe=CoherentProbe())
    rows = experiments.run_squeezed_scan(params, parse_grid(args.r_grid),
                                         out_dir=args.out, policy=policy)
    r_star, best = experiments.scan_optimum(rows, "A_s_lower")
    base = rows[0].values["A_s_lower"]
    rel = (best - base) / base if base else math.nan
    print(f"optimum at r = {r_star:g}; relative improvement {rel:.3e}")
    return 0


def _cmd_concavity(args, params, policy, knobs) -> int:
    rows = experiments.run_concavity_check(params, parse_grid(args.energy_grid),
                                           out_dir=args.out, policy=policy)
    print(f"concavity check passed on {len(rows)} energies")
    return 0


def _cmd_theorem1(args, params, policy, knobs) -> int:
    if not isinstance(params.probe, EprProbe):
        params = replace(params, probe=EprProbe())
    report = theorem1_check(params, args.tol, check_measurement=args.full,
                            policy=policy)
    if not report.conditions_ok:
        c = report.conditions
        print("FAIL: structural conditions violated "
              f"(marginal {c.marginal_gap:.3e}, product {c.product_gap:.3e}, "
              f"phase {c.phase_spread:.3e})")
        return 1
    print(f"chi_q = {report.chi_joint:.10f}")
    print(f"chi_c = {report.chi_collapsed:.10f}")
    print(f"consumed discord = {report.consumed:.10f}")
    print(f"residual = {report.residual:.3e} (tol {args.tol:g})")
    print("PASS" if report.passed else "FAIL")
    return 0 if report.passed else 1


def _cmd_show_config(args, params, policy, knobs) -> int:
    print(f"epsilon = {params.epsilon}")
    print(f"nbar_probe = {params.nbar_probe}")
    print(f"nbar_env = {params.nbar_env}")
    print(f"p0 = {params.p0}")
    print(f"probe = {type(params.probe).__name__}")
    print(f"min_dim = {policy.min_dim}")
    print(f"nodes = {knobs['nodes']}")
    print(f"seed = {knobs['seed']}")
    return 0


_COMMANDS = {
    "sweep": _cmd_sweep,
    "generaldyne": _cmd_generaldyne,
    "perturb": _cmd_perturb,
    "squeezed": _cmd_squeezed,
    "concavity": _cmd_concavity,
    "theorem1": _cmd_theorem1,
    "show-config": _cmd_show_config,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        params, policy, knobs = _resolve(args)
        return _COMMANDS[args.command](args, params, policy, knobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, TruncationError, PsdError) as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
