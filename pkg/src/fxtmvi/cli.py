"""Command-line interface: run, bounds, sweep, gen-data, verify.

Setting precedence is preset defaults, then config file entries, then
command-line flags.  Config files are flat ``key=value`` text with ``#``
comments; keys mirror the long flag names.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, bench, verify
from .core import (
    DiscretizationParams,
    FlowParams,
    LambdaOutOfWindowError,
    MissingCertificatesError,
    NoConvergenceError,
    NonFiniteError,
)
from .operators import estimate_lipschitz, estimate_strong_monotonicity, generate_dataset, save_dataset

__all__ = ["main"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

OUT_DIR_ENV = "FXT_MVI_OUT_DIR"

# canonical setting names; aliases map flag / config spellings onto them
_ALIASES = {
    "l": "lip",
    "lambda": "lam",
    "max-steps": "max_steps",
    "record-every": "record_every",
    "clamp-step": "clamp_step",
}
_FLOAT_KEYS = {
    "mu", "lip", "lam", "kappa1", "kappa2", "alpha1", "alpha2", "xi",
    "eta", "tol", "clamp_step",
}
_INT_KEYS = {"max_steps", "seed", "record_every", "n", "d"}
_STR_KEYS = {"preset", "x0", "out", "sweep"}
_KNOWN_KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS


def _canon(key: str) -> str:
    key = key.strip().lower().replace("-", "_")
    return _ALIASES.get(key, key)


def _parse_config(path: str) -> dict:
    """Read ``key=value`` lines, canonicalizing keys and typing values."""
    settings: dict = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ValueError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        key = _canon(_ALIASES.get(key.strip().lower(), key))
        value = value.strip()
        if key not in _KNOWN_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            settings[key] = _convert(key, value)
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: field {key!r}: {exc}") from exc
    return settings


def _convert(key: str, value: str):
    if key in _FLOAT_KEYS:
        return float(value)
    if key in _INT_KEYS:
        return int(value)
    return value


def _cli_settings(args: argparse.Namespace) -> dict:
    settings = {}
    for attr in (
        "preset", "mu", "lip", "lam", "kappa1", "kappa2", "alpha1", "alpha2",
        "xi", "eta", "max_steps", "tol", "x0", "seed", "out", "sweep",
        "record_every", "clamp_step",
    ):
        value = getattr(args, attr, None)
        if value is not None:
            settings[attr] = value
    return settings


def _merge_layers(*layers: dict) -> dict:
    """Later layers win; a layer choosing xi drops earlier alphas and vice versa."""
    merged: dict = {}
    for layer in layers:
        if "xi" in layer and ("alpha1" in layer or "alpha2" in layer):
            raise ValueError("--xi is mutually exclusive with --alpha1/--alpha2")
        if "xi" in layer:
            merged.pop("alpha1", None)
            merged.pop("alpha2", None)
        if "alpha1" in layer or "alpha2" in layer:
            merged.pop("xi", None)
        merged.update(layer)
    return merged


def _parse_x0(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",") if v != ""])
    except ValueError as exc:
        raise ValueError(f"bad --x0 value {text!r}: {exc}") from exc


def _parse_sweep(text: str) -> tuple[str, tuple[float, ...]]:
    if "=" not in text:
        raise ValueError("expected --sweep axis=v1,v2,...")
    axis, _, values = text.partition("=")
    axis = axis.strip()
    if axis not in ("eta", "xi", "x0"):
        raise ValueError(f"unknown sweep axis {axis!r}")
    try:
        parsed = tuple(float(v) for v in values.split(",") if v != "")
    except ValueError as exc:
        raise ValueError(f"bad sweep values {values!r}: {exc}") from exc
    if not parsed:
        raise ValueError("sweep needs at least one value")
    return axis, parsed


def _resolve_out(settings: dict) -> Path:
    if "out" in settings:
        return Path(settings["out"])
    env = os.environ.get(OUT_DIR_ENV)
    return Path(env) if env else Path("fxtmvi_out")


def _build_flow(base: FlowParams, settings: dict) -> FlowParams:
    fields = {}
    if "xi" in settings:
        a1, a2 = analysis.exponents_from_xi(settings["xi"])
        fields["alpha1"], fields["alpha2"] = a1, a2
    for key in ("lam", "kappa1", "kappa2", "alpha1", "alpha2"):
        if key in settings:
            fields[key] = settings[key]
    return dataclasses.replace(base, **fields)


def _build_disc(base: DiscretizationParams, settings: dict) -> DiscretizationParams:
    fields = {}
    if "eta" in settings:
        fields["eta"] = settings["eta"]
    if "max_steps" in settings:
        fields["max_steps"] = settings["max_steps"]
    if "tol" in settings:
        fields["stop_residual"] = settings["tol"]
    return dataclasses.replace(base, **fields)


def _preset_for(settings: dict) -> bench.ExperimentPreset:
    name = settings.get("preset")
    if name == "example1":
        return bench.build_example1()
    if name == "example2":
        return bench.build_example2(
            settings.get("seed", bench.DEFAULT_DATASET_SEED)
        )
    raise ValueError(f"unknown preset {name!r}; choose example1 or example2")


def _cmd_run(args: argparse.Namespace, sweep_required: bool) -> int:
    layers = [_parse_config(args.config)] if args.config else []
    layers.append(_cli_settings(args))
    settings = _merge_layers(*layers)
    if "preset" not in settings:
        raise ValueError("run/sweep require --preset example1|example2 "
                         "(custom problems are library-only)")
    preset = _preset_for(settings)
    flow_params = _build_flow(preset.flow, settings)
    disc = _build_disc(preset.disc, settings)
    out_dir = _resolve_out(settings)
    seed = settings.get("seed", 0)

    sweep_axis, sweep_values = None, ()
    if "sweep" in settings:
        sweep_axis, sweep_values = _parse_sweep(settings["sweep"])
    if sweep_required and sweep_axis is None:
        raise ValueError("sweep requires --sweep axis=v1,v2,...")

    x0_list = ()
    if "x0" in settings:
        x0_list = (_parse_x0(settings["x0"]),)

    cfg = bench.ExperimentConfig(
        experiment=preset.name,
        seed=seed,
        n_runs=1,
        x0_list=x0_list,
        flow=flow_params,
        disc=disc,
        sweep_axis=sweep_axis,
        sweep_values=sweep_values,
        output_dir=out_dir,
        record_every=settings.get("record_every", 100),
        clamp_step=settings.get("clamp_step"),
        dataset_seed=settings.get("seed"),
    )
    result = bench.run_experiment(cfg)
    for label, log in result.runs:
        final = log.final
        err = "n/a" if final.error is None else f"{final.error:.3e}"
        print(
            f"{label}: termination={log.termination} steps={log.steps} "
            f"residual={final.residual:.3e} error={err}"
        )
        print(f"  wrote {out_dir / f'run_{label}.csv'} and .meta")
    for label, message in result.failures:
        print(f"{label}: FAILED ({message})", file=sys.stderr)
    if result.failures:
        return EXIT_RUNTIME
    return EXIT_OK


def _cmd_bounds(args: argparse.Namespace) -> int:
    layers = [_parse_config(args.config)] if args.config else []
    layers.append(_cli_settings(args))
    settings = _merge_layers(*layers)

    preset = None
    if "preset" in settings:
        preset = _preset_for(settings)
        base_flow, base_disc = preset.flow, preset.disc
        mu = settings.get("mu", preset.problem.mu)
        lip = settings.get("lip", preset.problem.lip)
    else:
        base_flow = bench.build_example1().flow
        base_disc = bench.build_example1().disc
        mu = settings.get("mu")
        lip = settings.get("lip")
    if mu is None or lip is None:
        raise MissingCertificatesError(
            "bounds needs --mu and --L (or a preset carrying them)"
        )
    flow_params = _build_flow(base_flow, settings)
    disc = _build_disc(base_disc, settings)

    estimated = bool(getattr(args, "estimate_constants", False))
    if estimated:
        if preset is None:
            raise ValueError("--estimate-constants requires --preset")
        dim = 2 if preset.name == "example1" else preset.dataset.dim
        lo, hi = -10.0 * np.ones(dim), 10.0 * np.ones(dim)
        mu = estimate_strong_monotonicity(
            preset.problem.operator, 2000, lo, hi, seed=settings.get("seed", 0)
        )
        lip = estimate_lipschitz(
            preset.problem.operator, 2000, lo, hi, seed=settings.get("seed", 0)
        )
        print(
            "warning=estimated_constants: sampled mu/lip are diagnostics, "
            "not guarantees",
        )

    cert = analysis.certificate_from_constants(
        mu, lip, flow_params, disc.eta, estimated=estimated
    )
    window = analysis.lambda_window(mu, lip)
    lines = {
        "mu": f"{mu:.17g}",
        "lip": f"{lip:.17g}",
        "lambda": f"{flow_params.lam:.17g}",
        "lambda_window_low": f"{window[0]:.17g}",
        "lambda_window_high": f"{window[1]:.17g}",
        "kappa1": f"{flow_params.kappa1:.17g}",
        "kappa2": f"{flow_params.kappa2:.17g}",
        "alpha1": f"{flow_params.alpha1:.17g}",
        "alpha2": f"{flow_params.alpha2:.17g}",
        "eta": f"{disc.eta:.17g}",
        "contraction": f"{cert.contraction:.17g}",
        "alpha1_margin": f"{cert.alpha1_margin:.17g}",
        "alpha1_window_low": f"{cert.alpha1_window[0]:.17g}",
        "alpha1_window_high": f"{cert.alpha1_window[1]:.17g}",
        "alpha1_certified": "true" if cert.alpha1_certified else "false",
        "state_coef1": f"{cert.state_coef1:.17g}",
        "state_coef2": f"{cert.state_coef2:.17g}",
        "lyap_coef1": f"{cert.lyap_coef1:.17g}",
        "lyap_coef2": f"{cert.lyap_coef2:.17g}",
        "lyap_exp1": f"{cert.lyap_exp1:.17g}",
        "lyap_exp2": f"{cert.lyap_exp2:.17g}",
        "settle_bound": (
            "uncertified" if cert.settle_bound is None else f"{cert.settle_bound:.17g}"
        ),
        "xi": "none" if cert.xi is None else f"{cert.xi:.17g}",
        "step_budget": (
            "none" if cert.step_budget is None else str(cert.step_budget)
        ),
        "estimated_constants": "true" if cert.estimated_constants else "false",
    }
    if preset is not None:
        lines["preset"] = preset.name
        if preset.paper_step_budget is not None:
            lines["paper_reported_step_budget"] = str(preset.paper_step_budget)
        if preset.paper_settle_bound is not None:
            lines["paper_reported_settle_bound"] = f"{preset.paper_settle_bound:g}"
    for key, value in lines.items():
        print(f"{key}={value}")
    if not cert.alpha1_certified:
        print(
            f"warning=uncertified_alpha1: alpha1={flow_params.alpha1:g} lies "
            f"outside the certified window "
            f"({cert.alpha1_window[0]:.6g}, {cert.alpha1_window[1]:g}); "
            "settle bound and step budget are not derivable for this set"
        )
    return EXIT_OK


def _cmd_gen_data(args: argparse.Namespace) -> int:
    dataset = generate_dataset(args.seed, n=args.n, d=args.d)
    out = Path(args.out) if args.out else Path("dataset.txt")
    save_dataset(dataset, out)
    print(f"wrote {out} (seed={args.seed} n={args.n} d={args.d})")
    return EXIT_OK


def _cmd_verify(_args: argparse.Namespace) -> int:
    results = verify.run_checks()
    failed = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"{status} {res.name}: {res.detail}")
        failed += 0 if res.passed else 1
    print(f"{len(results) - failed}/{len(results)} properties passed")
    return EXIT_OK if failed == 0 else EXIT_RUNTIME


def _add_shared_flags(parser: argparse.ArgumentParser, bounds: bool = False) -> None:
    parser.add_argument("--preset", choices=("example1", "example2"))
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--mu", type=float, help="monotonicity modulus")
    parser.add_argument("--L", type=float, dest="lip", help="Lipschitz constant")
    parser.add_argument("--lambda", type=float, dest="lam", help="prox step")
    parser.add_argument("--kappa1", type=float)
    parser.add_argument("--kappa2", type=float)
    parser.add_argument("--alpha1", type=float)
    parser.add_argument("--alpha2", type=float)
    parser.add_argument(
        "--xi", type=float,
        help="exponent scale; sets alpha1=1-2/xi, alpha2=1+2/xi "
             "(mutually exclusive with --alpha1/--alpha2)",
    )
    parser.add_argument("--eta", type=float, help="time step")
    parser.add_argument("--max-steps", type=int, dest="max_steps")
    parser.add_argument(
        "--tol", type=float, help="stop when the fixed-point residual drops below this"
    )
    parser.add_argument("--seed", type=int)
    if not bounds:
        parser.add_argument("--x0", help="comma-separated initial point")
        parser.add_argument("--out", help=f"output dir (default ${OUT_DIR_ENV} or ./fxtmvi_out)")
        parser.add_argument("--sweep", help="axis=v1,v2,... with axis in {eta, xi, x0}")
        parser.add_argument("--record-every", type=int, dest="record_every")
        parser.add_argument(
            "--clamp-step", type=float, dest="clamp_step",
            help="clamp per-step displacement to this bound",
        )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fxtmvi",
        description="Fixed-time mixed-variational-inequality solver and benchmarks",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="solve from one initial point and log CSV")
    _add_shared_flags(p_run)
    p_run.set_defaults(fn=lambda a: _cmd_run(a, sweep_required=False))

    p_sweep = sub.add_parser("sweep", help="run a batch over eta, xi, or sampled x0")
    _add_shared_flags(p_sweep)
    p_sweep.set_defaults(fn=lambda a: _cmd_run(a, sweep_required=True))

    p_bounds = sub.add_parser(
        "bounds", help="print the convergence certificate for a parameter set"
    )
    _add_shared_flags(p_bounds, bounds=True)
    p_bounds.add_argument(
        "--estimate-constants", action="store_true",
        help="replace mu/L with sampled estimates (diagnostic only)",
    )
    p_bounds.set_defaults(fn=_cmd_bounds)

    p_gen = sub.add_parser("gen-data", help="write a generated dataset file")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--n", type=int, default=100)
    p_gen.add_argument("--d", type=int, default=3)
    p_gen.add_argument("--out")
    p_gen.set_defaults(fn=_cmd_gen_data)

    p_verify = sub.add_parser("verify", help="run the property suite")
    p_verify.set_defaults(fn=_cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags; map onto the validation exit code
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except (
        ValueError,
        MissingCertificatesError,
        LambdaOutOfWindowError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NonFiniteError, NoConvergenceError, ArithmeticError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
